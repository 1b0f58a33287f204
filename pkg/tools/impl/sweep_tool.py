"""
Sweep command: seed-free count of the level-k cycles
"""
from typing import Any, Dict

import numpy as np

from core.run_config import resolve_family
from pwcycles.certify import SUMMARY_COLUMNS, SWEEP_DENSITY, sweep_level, sweep_windows
from pwcycles.hamiltonian_family import build_level
from pwcycles.return_maps import displacement_grid
from ..base_command_tool import BaseCommandTool, common_properties, level_properties

GRID_POINTS_PER_WINDOW = 50


class SweepTool(BaseCommandTool):
    """Counts sign changes of the displacement over the level's ordinate windows"""

    def __init__(self, config: Dict = None):
        default_config = {
            'name': 'sweep',
            'description': 'Seed-free sign-change count of the displacement at level k',
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
                **level_properties(),
                "grid": {"type": "integer", "minimum": 10, "maximum": 200000},
            },
            "required": ["k"],
            "additionalProperties": False,
        }

    def execute(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        tol = self.tolerances(arguments)
        writer = self.writer(arguments)
        k, epsilon, vector, tables = resolve_family(arguments)
        density = arguments.get('grid') or SWEEP_DENSITY

        level = build_level(k, epsilon, vector, tables, tol)
        report = sweep_level(level, density, tol, self.jobs(arguments))
        writer.write_json(f"sweep_k{k}.json", report.to_json())
        writer.write_csv("sweep_summary.csv", [report.summary_row()], SUMMARY_COLUMNS)

        ys = np.concatenate([np.linspace(lo, hi, GRID_POINTS_PER_WINDOW) for lo, hi in sweep_windows(k)])
        writer.write_csv(f"displacement_k{k}.csv", displacement_grid(level, ys, tol),
                         ('y', 'delta', 'reducedDelta'))

        summary = {"k": k, "found": report.found, "expected": report.expected}
        return self.result(report.passed, summary, writer)
