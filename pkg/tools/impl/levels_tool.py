"""
Levels command: level curves of H_k at eps = 0 as polyline CSV
"""
from typing import Any, Dict

from core.errors import UsageError
from pwcycles.contours import (
    CSV_COLUMNS, DEFAULT_CONTOURS, DEFAULT_GRID, contour_rows, level_contours, unperturbed_level,
)
from pwcycles.hamiltonian_family import DEFAULT_LEVEL_CAP
from ..base_command_tool import BaseCommandTool, common_properties


class LevelsTool(BaseCommandTool):
    """Marching-squares contours of both pieces, glued along the switching line"""

    def __init__(self, config: Dict = None):
        default_config = {
            'name': 'levels',
            'description': 'Level curves of the unperturbed Hamiltonians as CSV polylines',
            'version': '1.0.0',
            'enabled': True,
        }
        if config:
            default_config.update(config)
        super().__init__(default_config)

    def get_input_schema(self) -> Dict:
        return {
            "type": "object",
            "properties": {
                **common_properties(),
                "k": {"type": "integer", "minimum": 0, "maximum": 4},
                "grid": {"type": "integer", "minimum": 2, "maximum": 4000},
                "contours": {"type": "integer", "minimum": 1, "maximum": 200},
                "deep_level": {"type": "boolean"},
            },
            "required": ["k"],
            "additionalProperties": False,
        }

    def execute(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        writer = self.writer(arguments)
        k = arguments['k']
        if k > DEFAULT_LEVEL_CAP and not arguments.get('deep_level'):
            raise UsageError(f"level {k} is above {DEFAULT_LEVEL_CAP}; pass --deep-level to run it", k=k)
        grid = arguments.get('grid') or DEFAULT_GRID
        count = arguments.get('contours') or DEFAULT_CONTOURS

        lines = level_contours(unperturbed_level(k), grid=grid, count=count, jobs=self.jobs(arguments))
        writer.write_csv(f"levels_k{k}.csv", contour_rows(lines), CSV_COLUMNS)

        summary = {"k": k, "grid": grid, "contours": count, "polylines": len(lines)}
        return self.result(bool(lines), summary, writer)
