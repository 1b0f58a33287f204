"""
Lift command: degree lift of a field with known cycles in {y < 0}, plus controls
"""
import json
from typing import Any, Dict, List, Tuple

from core.errors import NumericalError, UsageError
from pwcycles.bifurcation import LIFT_B_MAGNITUDE, LIFT_EPSILON, lift_demo_field, monotonicity_demo
from pwcycles.certify import SUMMARY_COLUMNS, sweep_field
from pwcycles.field import PiecewiseField
from pwcycles.return_maps import ReturnChain, chain_points
from ..base_command_tool import BaseCommandTool, common_properties

SCAN_WINDOW = (-2.0 + 1e-3, -1e-3)
SCAN_DENSITY = 200
DEDUPE_TOLERANCE = 1e-6


def load_field(path: str) -> Tuple[PiecewiseField, List[Tuple[float, float]], bool]:
    """
    Field and base cycles from JSON: either a bare field or
    {"field": {...}, "cycles": [[upper, lower], ...]}.

    The flag says whether the file listed the cycles.
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read field file {path}: {e}", path=path)
    try:
        if "field" in data:
            field = PiecewiseField.from_json(data["field"])
            cycles = [(float(u), float(l)) for u, l in data.get("cycles", [])]
            return field, cycles, "cycles" in data
        return PiecewiseField.from_json(data), [], False
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"malformed field in {path}: {e}", path=path)


def scan_cycles(field: PiecewiseField, tol, jobs: int = 1) -> List[Tuple[float, float]]:
    """Crossing cycles met by the return-map sweep over the lower half of the strip"""
    sweep = sweep_field(field, SCAN_WINDOW, SCAN_DENSITY, tol=tol, jobs=jobs)
    cycles: List[Tuple[float, float]] = []
    for root in sweep.roots:
        try:
            points = chain_points(ReturnChain.for_crossing(field, root), field, root, 0.0, tol)
        except NumericalError:
            continue
        cycle = (max(points[:-1]), min(points[:-1]))
        if all(abs(cycle[1] - known[1]) > DEDUPE_TOLERANCE for known in cycles):
            cycles.append(cycle)
    return sorted(cycles, key=lambda c: c[1])


class LiftTool(BaseCommandTool):
    """monotonicity_demo with the eps = 0 and wrong-sign controls"""

    def __init__(self, config: Dict = None):
        default_config = {
            'name': 'lift',
            'description': 'Lift a field by one degree and certify the extra pseudo-Hopf cycle',
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
                "input": {"type": "string"},
                "epsilon": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "b_magnitude": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
            "additionalProperties": False,
        }

    def execute(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        tol = self.tolerances(arguments)
        writer = self.writer(arguments)
        jobs = self.jobs(arguments)
        epsilon = arguments.get('epsilon') or LIFT_EPSILON
        b_magnitude = arguments.get('b_magnitude') or LIFT_B_MAGNITUDE

        if arguments.get('input'):
            field, cycles, listed = load_field(arguments['input'])
            if not listed:
                cycles = scan_cycles(field, tol, jobs)
                self.logger.info(f"scan found {len(cycles)} base cycles in {SCAN_WINDOW}")
        else:
            field, cycles = lift_demo_field(tol=tol)
        if not cycles:
            raise UsageError("the lift needs at least one crossing cycle in {y < 0}")

        main = monotonicity_demo(field, cycles, epsilon, b_magnitude, tol=tol)
        flat = monotonicity_demo(field, cycles, 0.0, b_magnitude, tol=tol)
        natural = 1 if main.diagnostics["b"] > 0 else -1
        wrong = monotonicity_demo(field, cycles, epsilon, b_magnitude, b_sign=-natural, tol=tol)

        writer.write_json("lift.json", {
            "baseCycles": [list(c) for c in cycles],
            "main": main.to_json(),
            "controls": {"epsilonZero": flat.to_json(), "wrongSign": wrong.to_json()},
        })
        rows = []
        for label, report in (("main", main), ("epsilonZero", flat), ("wrongSign", wrong)):
            rows.append({**report.summary_row(), "k": label})
        writer.write_csv("lift_summary.csv", rows, SUMMARY_COLUMNS)

        m = len(cycles)
        passed = main.passed and flat.found == m and wrong.found == m
        summary = {
            "baseCycles": m,
            "degreeIn": field.degree,
            "degreeOut": main.degree,
            "found": main.found,
            "controls": {"epsilonZero": flat.found, "wrongSign": wrong.found},
        }
        return self.result(passed, summary, writer)
