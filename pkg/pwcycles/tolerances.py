"""
Immutable numerical tolerance set shared by every kernel of a run
"""
from dataclasses import dataclass, fields, replace
from typing import Dict, Optional

from core.errors import UsageError

OVERRIDE_MIN = 1e-14
OVERRIDE_MAX = 1e-2

# CLI flag suffix (--tol-<name>) -> field name
OVERRIDE_FLAGS = {
    'newton': 'newton_step',
    'residual': 'residual',
    'margin': 'margin',
    'ode-rtol': 'ode_rtol',
    'ode-atol': 'ode_atol',
    'root': 'root',
}


@dataclass(frozen=True)
class Tolerances:
    """Tolerances and iteration budgets; build once per run and pass down"""

    newton_step: float = 1e-15
    newton_residual: float = 1e-12
    newton_max_iterations: int = 50
    derivative_floor: float = 1e-10
    seed_radius: float = 0.5
    residual: float = 1e-10
    margin: float = 1e-6
    margin_radius: float = 1e-2
    fd_step: float = 1e-6
    root: float = 1e-12
    root_grid: int = 4096
    simple_root: float = 1e-8
    phi_nonvanishing: float = 1e-12
    boundary_identity: float = 1e-10
    lift_crosscheck: float = 1e-9
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12
    ode_max_time: float = 200.0
    ode_tangency: float = 1e-9
    shift_step: float = 1e-5
    multiplicity: float = 1e-7
    sliding_resolution: int = 401

    @classmethod
    def from_properties(cls, props, overrides: Optional[Dict[str, float]] = None) -> 'Tolerances':
        """
        Build from `numerics.*` properties, then apply --tol-* overrides

        Args:
            props: PropertiesConfigurator (or None for defaults)
            overrides: flag suffix -> value, each within [1e-14, 1e-2]
        """
        values = {}
        if props is not None:
            for f in fields(cls):
                key = f"numerics.{f.name}"
                if f.type in (int, 'int'):
                    value = props.get_int(key)
                else:
                    value = props.get_float(key)
                if value is not None:
                    values[f.name] = value
        tol = cls(**values)
        if overrides:
            tol = tol.with_overrides(overrides)
        return tol

    def with_overrides(self, overrides: Dict[str, float]) -> 'Tolerances':
        changes = {}
        for flag, value in overrides.items():
            if value is None:
                continue
            if flag not in OVERRIDE_FLAGS:
                raise UsageError(f"unknown tolerance override: --tol-{flag}")
            if not (OVERRIDE_MIN <= value <= OVERRIDE_MAX):
                raise UsageError(
                    f"--tol-{flag}={value} outside [{OVERRIDE_MIN}, {OVERRIDE_MAX}]",
                    flag=flag, value=value,
                )
            changes[OVERRIDE_FLAGS[flag]] = value
        return replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
