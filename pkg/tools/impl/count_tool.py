"""
Count command: certify the cycles of levels 0..k
"""
from typing import Any, Dict, List

import numpy as np

from core.run_config import resolve_family
from pwcycles.certify import (
    SUMMARY_COLUMNS, CountReport, certify_chain, pseudo_hopf_bookkeeping, shift_bound_for_report,
    sweep_windows, validate_epsilon,
)
from pwcycles.hamiltonian_family import build_level, hamiltonian_degree
from pwcycles.return_maps import displacement_grid
from ..base_command_tool import BaseCommandTool, common_properties, level_properties

GRID_POINTS_PER_WINDOW = 50
# levels whose cycles also get the shift-monotonicity check
SHIFT_CHECK_MAX_LEVEL = 1


def recurrence_holds(reports: List[CountReport]) -> bool:
    """found(k+1) = 2 found(k) + d_k - 1 along a chain of reports"""
    return all(
        child.found == 2 * parent.found + hamiltonian_degree(parent.level) - 1
        for parent, child in zip(reports, reports[1:])
    )


class CountTool(BaseCommandTool):
    """Runs the certification chain and writes the reports, a summary and a displacement grid"""

    def __init__(self, config: Dict = None):
        default_config = {
            'name': 'count',
            'description': 'Certify the crossing limit cycles of levels 0..k',
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
                "adaptive": {"type": "boolean"},
                "pseudo_hopf_mode": {"type": "boolean"},
            },
            "required": ["k"],
            "additionalProperties": False,
        }

    def execute(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        tol = self.tolerances(arguments)
        writer = self.writer(arguments)
        jobs = self.jobs(arguments)
        k, epsilon, vector, tables = resolve_family(arguments)
        pseudo_hopf = bool(arguments.get('pseudo_hopf_mode'))

        if arguments.get('adaptive'):
            epsilon, vector, reports = validate_epsilon(k, vector, tables, tol=tol, jobs=jobs,
                                                        pseudo_hopf=pseudo_hopf)
        else:
            reports = certify_chain(k, epsilon, vector, tables, tol, jobs, pseudo_hopf)
        top = reports[-1]
        recurrence = recurrence_holds(reports)
        shift_checks = {r.level: shift_bound_for_report(r, tol=tol)
                        for r in reports if r.level <= SHIFT_CHECK_MAX_LEVEL and r.passed}

        payload = {
            "k": k,
            "epsilon": epsilon,
            "epsilonVector": list(vector),
            "reports": [r.to_json() for r in reports],
            "recurrenceHolds": recurrence,
            "shiftBound": {str(level): check.to_json() for level, check in shift_checks.items()},
        }
        if pseudo_hopf:
            payload["pseudoHopf"] = pseudo_hopf_bookkeeping(reports, tol)
        writer.write_json(f"count_k{k}.json", payload)
        writer.write_csv("count_summary.csv", [r.summary_row() for r in reports], SUMMARY_COLUMNS)

        level = build_level(k, epsilon, vector, tables, tol)
        ys = np.concatenate([np.linspace(lo, hi, GRID_POINTS_PER_WINDOW) for lo, hi in sweep_windows(k)])
        writer.write_csv(f"displacement_k{k}.csv", displacement_grid(level, ys, tol),
                         ('y', 'delta', 'reducedDelta'))

        passed = (top.level == k and top.passed and recurrence
                  and all(check.passed for check in shift_checks.values()))
        summary = {"k": k, "found": top.found, "expected": top.expected, "levelReached": top.level}
        return self.result(passed, summary, writer)
