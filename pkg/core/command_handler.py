"""
Command routing: runs a registered command tool and turns the outcome into an exit code
"""
import logging
from typing import Dict, List, Optional

import jsonschema

from core.errors import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, PwCyclesError


class CommandResult:
    """Outcome of one command: exit code, report payload and files written"""

    def __init__(self, command: str, exit_code: int, result: Optional[Dict] = None,
                 error: Optional[Dict] = None):
        self.command = command
        self.exit_code = exit_code
        self.result = result or {}
        self.error = error

    @property
    def files(self) -> List[str]:
        return self.result.get('files', [])

    def to_dict(self) -> Dict:
        data = {"command": self.command, "exitCode": self.exit_code}
        if self.error is not None:
            data["error"] = self.error
        else:
            data["passed"] = self.result.get('passed')
            data["files"] = self.files
        return data


class CommandHandler:
    """
    Dispatches a command name to its tool.

    Exit codes: 0 when the command's acceptance predicates pass, 1 on a
    numerical failure or a failed predicate, 2 on usage errors.
    """

    def __init__(self, tools_registry=None):
        self.tools_registry = tools_registry
        self.logger = logging.getLogger(__name__)

    def list_commands(self) -> List[Dict]:
        if not self.tools_registry:
            return []
        return self.tools_registry.get_all_tools()

    def handle(self, command: str, arguments: Dict) -> CommandResult:
        self.logger.debug(f"Handling command: {command}")
        try:
            tool = self.tools_registry.get_tool(command) if self.tools_registry else None
            if tool is None:
                raise ValueError(f"Command not found: {command}")
            result = tool.execute_with_tracking(arguments)
        except jsonschema.ValidationError as e:
            return self._error(command, EXIT_USAGE, "ValidationError", e.message)
        except PwCyclesError as e:
            self.logger.error(f"{command} failed: {e.message}", exc_info=True)
            return CommandResult(command, e.exit_code, error=e.to_dict())
        except ValueError as e:
            return self._error(command, EXIT_USAGE, "ValueError", str(e))
        except Exception as e:
            self.logger.error(f"Error running {command}: {e}", exc_info=True)
            return self._error(command, EXIT_NUMERICAL, type(e).__name__, str(e))

        exit_code = EXIT_OK if result.get('passed') else EXIT_NUMERICAL
        if exit_code != EXIT_OK:
            self.logger.warning(f"{command}: acceptance predicates failed ({result.get('summary')})")
        return CommandResult(command, exit_code, result)

    def _error(self, command: str, exit_code: int, kind: str, message: str) -> CommandResult:
        self.logger.error(f"{command}: {message}")
        return CommandResult(command, exit_code, error={"type": kind, "message": message, "context": {}})
