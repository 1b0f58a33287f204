"""
Command tool implementations, one per CLI command
"""
