"""
Construct command: assemble the level-k Hamiltonians and their vector field
"""
from typing import Any, Dict

from core.run_config import resolve_family
from pwcycles.hamiltonian_family import build_level, field_degree
from ..base_command_tool import BaseCommandTool, common_properties, level_properties


class ConstructTool(BaseCommandTool):
    """Writes the HamiltonianLevel and PiecewiseField of level k as JSON"""

    def __init__(self, config: Dict = None):
        default_config = {
            'name': 'construct',
            'description': 'Assemble the level-k piecewise Hamiltonian field',
            'version': '1.0.0',
            'enabled': True,
        }
        if config:
            default_config.update(config)
        super().__init__(default_config)

    def get_input_schema(self) -> Dict:
        return {
            "type": "object",
            "properties": {**common_properties(), **level_properties()},
            "required": ["k"],
            "additionalProperties": False,
        }

    def execute(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        tol = self.tolerances(arguments)
        writer = self.writer(arguments)
        k, epsilon, vector, tables = resolve_family(arguments)

        level = build_level(k, epsilon, vector, tables, tol)
        vector_field = level.field()
        writer.write_json(f"construct_k{k}.json", {
            "level": level.to_json(),
            "field": vector_field.to_json(),
            "degree": vector_field.degree,
        })
        expected = field_degree(k)
        summary = {"k": k, "degree": vector_field.degree, "expectedDegree": expected}
        return self.result(vector_field.degree == expected, summary, writer)
