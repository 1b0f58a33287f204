"""
Core infrastructure for pwcycles: configuration, errors, command dispatch and report output
"""
