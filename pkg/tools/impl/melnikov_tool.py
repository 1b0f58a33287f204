"""
Melnikov command: compare the first-order function with the reduced displacement
"""
from typing import Any, Dict

from core.properties_configurator import PropertiesConfigurator
from core.run_config import resolve_family
from pwcycles.hamiltonian_family import build_level
from pwcycles.melnikov import DEFAULT_SCHEDULE, MelnikovSpec, melnikov_oracle_check, melnikov_zeros
from ..base_command_tool import BaseCommandTool, common_properties, level_properties


class MelnikovTool(BaseCommandTool):
    """Oracle decay report plus the Melnikov zeros of the level"""

    def __init__(self, config: Dict = None):
        default_config = {
            'name': 'melnikov',
            'description': 'Melnikov function oracle check for level k',
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
                "schedule": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                             "minItems": 2},
            },
            "required": ["k"],
            "additionalProperties": False,
        }

    def execute(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        tol = self.tolerances(arguments)
        writer = self.writer(arguments)
        k, epsilon, vector, tables = resolve_family(arguments)
        schedule = tuple(arguments.get('schedule')
                         or PropertiesConfigurator().get_float_list('melnikov.schedule')
                         or DEFAULT_SCHEDULE)

        level = build_level(k, epsilon, vector, tables, tol)
        spec = MelnikovSpec.for_level(level)
        report = melnikov_oracle_check(level, spec, schedule=schedule, tol=tol, jobs=self.jobs(arguments))
        zeros = melnikov_zeros(spec, tol)
        writer.write_json(f"melnikov_k{k}.json", {
            "spec": spec.to_json(),
            "zeros": [{"y": y, "simple": simple} for y, simple in zeros],
            "oracle": report.to_json(),
        })
        summary = {"k": k, "maxErrors": report.max_errors, "maxDecayRatios": report.max_decay_ratios}
        return self.result(report.passed, summary, writer)
