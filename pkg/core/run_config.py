"""
Run configuration and coefficient-table loading
"""
import json
import logging
import os
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, TypedDict

from core.errors import UsageError
from pwcycles.hamiltonian_family import (
    DEFAULT_EPSILON, DEFAULT_LEVEL_CAP, PerturbationCoeffs, default_epsilon_vector, default_tables,
)

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = 'out'
DEFAULT_COEFFICIENTS = 'config/coefficients/canonical.json'


class RunConfig(TypedDict, total=False):
    """Everything a command needs, after CLI parsing and environment overrides"""
    # Command
    command: str
    k: int

    # Family parameters
    epsilon: Optional[float]
    epsilon_vector: Optional[List[float]]
    coefficients: Optional[str]

    # Output
    out: str

    # Numerics
    tolerances: Dict[str, float]
    jobs: int
    grid: Optional[int]
    contours: Optional[int]
    schedule: Optional[List[float]]
    b_magnitudes: Optional[List[float]]
    b_magnitude: Optional[float]

    # Opt-in flags
    deep_level: bool
    pseudo_hopf_mode: bool
    adaptive: bool
    demo: bool
    focus_demo: bool
    input: Optional[str]


RUN_CONFIG_KEYS = frozenset(RunConfig.__annotations__)


def validate_run_config(config: Dict) -> RunConfig:
    unknown = set(config) - RUN_CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown run configuration keys: {sorted(unknown)}")
    if 'command' not in config:
        raise UsageError("run configuration has no command")
    return RunConfig(**config)


class CoefficientTables:
    """
    Coefficient tables plus the epsilon settings stored next to them

    File layout: {"levels": [{"k", "aPlus", "aMinus"}, ...], "epsilon", "epsilonVector"}.
    Levels the file does not cover are filled with the default Melnikov tables.
    """

    def __init__(self, tables: Sequence[PerturbationCoeffs], epsilon: float,
                 epsilon_vector: Sequence[float], source: str):
        self.tables = tuple(tables)
        self.epsilon = float(epsilon)
        self.epsilon_vector = tuple(float(e) for e in epsilon_vector)
        self.source = source

    def for_level(self, k: int) -> Tuple[Tuple[PerturbationCoeffs, ...], Tuple[float, ...]]:
        """Tables 0..k and an epsilon vector of length k"""
        tables = self.tables
        if len(tables) < k + 1:
            logger.info(f"{self.source} covers levels 0..{len(tables) - 1}; "
                        f"levels {len(tables)}..{k} use the default Melnikov tables")
            tables = tables + tuple(default_tables(k)[len(tables):])
        vector = self.epsilon_vector
        if len(vector) < k:
            vector = vector + default_epsilon_vector(k, tables)[len(vector):]
        return tables[:k + 1], vector[:k]

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "levels": [t.to_json() for t in self.tables],
            "epsilon": self.epsilon,
            "epsilonVector": list(self.epsilon_vector),
        }


def load_coefficient_tables(path: Optional[str] = None) -> CoefficientTables:
    """Load a table file; a missing file falls back to the canonical tables with a warning"""
    path = path or DEFAULT_COEFFICIENTS
    if not Path(path).exists():
        logger.warning(f"Coefficient file not found: {path}, using canonical defaults")
        return CoefficientTables(default_tables(0), DEFAULT_EPSILON, (), 'canonical')

    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read coefficient file {path}: {e}", path=path)

    try:
        tables = [PerturbationCoeffs.from_json(entry) for entry in data.get("levels", [])]
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"malformed coefficient table in {path}: {e}", path=path)
    for index, table in enumerate(tables):
        if table.level != index:
            raise UsageError(f"{path}: table {index} is labelled level {table.level}", path=path)
    if not tables:
        logger.warning(f"{path} has no levels, using the canonical level-0 table")
        tables = default_tables(0)
    logger.info(f"Loaded coefficient tables for levels 0..{len(tables) - 1} from {path}")
    return CoefficientTables(tables, data.get("epsilon", DEFAULT_EPSILON),
                             data.get("epsilonVector", []), os.path.basename(path))


def resolve_family(arguments: Dict) -> Tuple[int, float, Tuple[float, ...], Tuple[PerturbationCoeffs, ...]]:
    """
    (k, epsilon, epsilon vector, tables) for a command: explicit arguments win
    over the coefficient file, which wins over the defaults.

    Levels above DEFAULT_LEVEL_CAP need the deep_level flag.
    """
    k = int(arguments.get('k', 0))
    if k > DEFAULT_LEVEL_CAP and not arguments.get('deep_level'):
        raise UsageError(f"level {k} is above {DEFAULT_LEVEL_CAP}; pass --deep-level to run it", k=k)
    source = load_coefficient_tables(arguments.get('coefficients'))
    tables, vector = source.for_level(k)
    epsilon = arguments.get('epsilon')
    epsilon = source.epsilon if epsilon is None else float(epsilon)
    if arguments.get('epsilon_vector') is not None:
        vector = tuple(float(e) for e in arguments['epsilon_vector'])
        if len(vector) != k:
            raise UsageError(f"--epsilon-vector needs {k} values for level {k}, got {len(vector)}")
    return k, epsilon, vector, tables
