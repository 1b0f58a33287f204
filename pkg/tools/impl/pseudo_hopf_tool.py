"""
Pseudo-Hopf command: existence / absence table of the shift-born cycle
"""
from typing import Any, Dict, List

from core.properties_configurator import PropertiesConfigurator
from pwcycles.bifurcation import (
    DEFAULT_B_MAGNITUDES, PseudoHopfSearchReport, focus_demo_field, focus_setup,
    pseudo_hopf_search, simultaneous_pseudo_hopf, two_fold_demo_field, two_fold_setup,
)
from ..base_command_tool import BaseCommandTool, common_properties

TABLE_COLUMNS = ('b', 'sign', 'found', 'encloses', 'upper', 'lower', 'segment_lo', 'segment_hi',
                 'defined_samples', 'absence_certified')
TWO_FOLD_OFFSETS = (0.5, 1.0)
DICHOTOMY_MAGNITUDE = 5e-2
FOCUS_CYCLE_RADIUS = 1.0
SIMULTANEOUS_B_MAGNITUDE = 1e-2


def table_rows(report: PseudoHopfSearchReport) -> List[Dict]:
    rows = []
    for r in report.results:
        segment = r.sliding_segment or (None, None)
        rows.append({
            "b": r.b,
            "sign": r.sign,
            "found": r.found,
            "encloses": r.encloses,
            "upper": r.cycle.upper_ordinate if r.cycle else None,
            "lower": r.cycle.lower_ordinate if r.cycle else None,
            "segment_lo": segment[0],
            "segment_hi": segment[1],
            "defined_samples": r.defined_samples,
            "absence_certified": r.absence_certified,
        })
    return rows


class PseudoHopfTool(BaseCommandTool):
    """
    Runs the shift search on the two-fold demo field, or on the focus demo
    field together with the simultaneous-shift check against a known cycle
    """

    def __init__(self, config: Dict = None):
        default_config = {
            'name': 'pseudo-hopf',
            'description': 'Pseudo-Hopf existence/absence over the b schedule on a demo field',
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
                "demo": {"type": "boolean"},
                "focus_demo": {"type": "boolean"},
                "b_magnitudes": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                                 "minItems": 1},
            },
            "additionalProperties": False,
        }

    def execute(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        tol = self.tolerances(arguments)
        writer = self.writer(arguments)
        jobs = self.jobs(arguments)
        magnitudes = tuple(arguments.get('b_magnitudes')
                           or PropertiesConfigurator().get_float_list('pseudohopf.b_magnitudes')
                           or DEFAULT_B_MAGNITUDES)

        if arguments.get('focus_demo'):
            return self._focus_demo(magnitudes, tol, writer, jobs)

        setup = two_fold_setup(two_fold_demo_field(), 0.0, TWO_FOLD_OFFSETS, tol)
        report = pseudo_hopf_search(setup, magnitudes, tol=tol, jobs=jobs)
        writer.write_json("pseudo_hopf_demo.json", report.to_json())
        writer.write_csv("pseudo_hopf_demo.csv", table_rows(report), TABLE_COLUMNS)

        passed = report.passed
        if DICHOTOMY_MAGNITUDE in magnitudes:
            passed = passed and report.dichotomy(DICHOTOMY_MAGNITUDE)
        summary = {
            "mode": "two-fold",
            "admissibleBSign": setup.admissible_b_sign,
            "dichotomy": {str(m): report.dichotomy(m) for m in report.magnitudes},
            "monotone": report.monotone,
        }
        return self.result(passed, summary, writer)

    def _focus_demo(self, magnitudes, tol, writer, jobs) -> Dict[str, Any]:
        setup = focus_setup(focus_demo_field(), 0.0, tol)
        report = pseudo_hopf_search(setup, magnitudes, tol=tol, jobs=jobs)

        b = setup.admissible_b_sign * SIMULTANEOUS_B_MAGNITUDE
        simultaneous = simultaneous_pseudo_hopf(
            focus_demo_field(cycle_radius=FOCUS_CYCLE_RADIUS), [0.0], b,
            existing_lower_ordinates=[-FOCUS_CYCLE_RADIUS], tol=tol, jobs=jobs,
        )
        writer.write_json("pseudo_hopf_focus.json", {
            "search": report.to_json(),
            "simultaneous": simultaneous.to_json(),
        })
        writer.write_csv("pseudo_hopf_focus.csv", table_rows(report), TABLE_COLUMNS)

        coexist = simultaneous.new_cycles == 1 and simultaneous.persisting == simultaneous.existing
        summary = {
            "mode": "focus",
            "admissibleBSign": setup.admissible_b_sign,
            "dichotomy": {str(m): report.dichotomy(m) for m in report.magnitudes},
            "newCycles": simultaneous.new_cycles,
            "persisting": simultaneous.persisting,
            "existing": simultaneous.existing,
        }
        return self.result(report.passed and coexist, summary, writer)
