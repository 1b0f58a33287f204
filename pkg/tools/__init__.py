"""
Command tools for pwcycles
"""

from .base_command_tool import BaseCommandTool
from .tools_registry import ToolsRegistry
