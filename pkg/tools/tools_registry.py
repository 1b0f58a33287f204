"""
Tools Registry - Singleton holding the command tools declared in config/tools
"""
import importlib
import json
import logging
import threading
from pathlib import Path
from typing import Dict, List, Optional

from .base_command_tool import BaseCommandTool

DEFAULT_TOOLS_DIR = 'config/tools'

# command type -> implementation, used when a declaration has no "implementation"
BUILTIN_COMMANDS = {
    'construct': 'tools.impl.construct_tool.ConstructTool',
    'count': 'tools.impl.count_tool.CountTool',
    'levels': 'tools.impl.levels_tool.LevelsTool',
    'melnikov': 'tools.impl.melnikov_tool.MelnikovTool',
    'pseudo-hopf': 'tools.impl.pseudo_hopf_tool.PseudoHopfTool',
    'lift': 'tools.impl.lift_tool.LiftTool',
    'sweep': 'tools.impl.sweep_tool.SweepTool',
}


class DeclarationError(Exception):
    """A command declaration that cannot be turned into a tool"""


class ToolsRegistry:
    """
    Singleton registry of command tools, loaded from JSON declarations.

    A declaration that fails to load is remembered under its command name (or
    file stem) and the remaining commands still load.
    """

    _instance = None
    _lock = threading.Lock()

    def __new__(cls, *args, **kwargs):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self, tools_config_dir: str = DEFAULT_TOOLS_DIR):
        if getattr(self, '_initialized', False):
            return
        self._initialized = True
        self.declarations_dir = Path(tools_config_dir)
        self.commands: Dict[str, BaseCommandTool] = {}
        self.declarations: Dict[str, Dict] = {}
        self.load_errors: Dict[str, str] = {}
        self._commands_lock = threading.RLock()
        self.logger = logging.getLogger(__name__)
        self.load_declarations()

    @classmethod
    def reset(cls):
        """Drop the shared instance so the next construction reloads its directory"""
        with cls._lock:
            cls._instance = None

    def load_declarations(self):
        if not self.declarations_dir.is_dir():
            self.logger.warning(f"No command declarations at {self.declarations_dir}")
            return
        files = sorted(self.declarations_dir.glob('*.json'))
        self.logger.info(f"Loading {len(files)} command declarations from {self.declarations_dir}")
        for path in files:
            with self._commands_lock:
                try:
                    self.register_tool(self._instantiate(path))
                except DeclarationError as e:
                    key, message = e.args
                    self.logger.error(f"Command {key} not loaded from {path.name}: {message}")
                    self.load_errors[key] = message

    def _instantiate(self, path: Path) -> BaseCommandTool:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                declaration = json.load(f)
        except json.JSONDecodeError as e:
            raise DeclarationError(path.stem, f"Invalid JSON: {e}")
        except OSError as e:
            raise DeclarationError(path.stem, str(e))

        name = declaration.get('name')
        if not name:
            raise DeclarationError(path.stem, "declaration has no 'name'")
        self.declarations[name] = declaration

        dotted = declaration.get('implementation') or BUILTIN_COMMANDS.get(declaration.get('type'))
        if not dotted:
            raise DeclarationError(name, "No implementation specified")
        module_name, class_name = dotted.rsplit('.', 1)
        try:
            tool_class = getattr(importlib.import_module(module_name), class_name)
        except (ImportError, AttributeError) as e:
            raise DeclarationError(name, f"Failed to load {dotted}: {e}")
        if not issubclass(tool_class, BaseCommandTool):
            raise DeclarationError(name, f"{dotted} is not a BaseCommandTool")
        return tool_class(declaration)

    def register_tool(self, tool: BaseCommandTool):
        with self._commands_lock:
            self.commands[tool.name] = tool
            self.load_errors.pop(tool.name, None)
            self.logger.info(f"Command registered: {tool.name}")

    def get_tool(self, name: str) -> Optional[BaseCommandTool]:
        with self._commands_lock:
            return self.commands.get(name)

    def get_all_tools(self) -> List[Dict]:
        """Enabled commands as name / description / inputSchema listings, by name"""
        with self._commands_lock:
            return [self.commands[name].to_listing() for name in sorted(self.commands)
                    if self.commands[name].enabled]

    def get_tool_metrics(self) -> List[Dict]:
        with self._commands_lock:
            return [tool.get_metrics() for tool in self.commands.values()]

    def get_tool_errors(self) -> Dict[str, str]:
        with self._commands_lock:
            return dict(self.load_errors)
