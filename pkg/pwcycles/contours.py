"""
Level curves of the piecewise Hamiltonians, as polylines for external plotting.

Each half-plane is sampled with its own piece; cells are classified by which
corners lie above the level, saddle cells are resolved with the value at the
cell center, and the per-cell segments are joined through shared cell edges.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import PreconditionError
from pwcycles.field import MINUS, PLUS
from pwcycles.hamiltonian_family import HamiltonianLevel, build_level, default_tables

logger = logging.getLogger(__name__)

DEFAULT_GRID = 400
DEFAULT_CONTOURS = 12
DEFAULT_X_MAX = 2.0
DEFAULT_Y_MAX = 2.0
PERCENTILE_SPAN = (5.0, 95.0)

CSV_COLUMNS = ('contour_id', 'level', 'piece', 'polyline_id', 'x', 'y')

# corner order: (i, j), (i+1, j), (i+1, j+1), (i, j+1)
# edge e joins corner e and corner (e + 1) % 4
_EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))


@dataclass
class ContourLine:
    contour_id: int
    level: float
    piece: str
    polyline_id: int
    points: np.ndarray
    closed: bool

    def rows(self) -> List[Dict]:
        return [{"contour_id": self.contour_id, "level": self.level, "piece": self.piece,
                 "polyline_id": self.polyline_id, "x": float(x), "y": float(y)}
                for x, y in self.points]


def _edge_key(i: int, j: int, edge: int) -> Tuple[str, int, int]:
    """Cell edges keyed so that neighbouring cells agree"""
    if edge == 0:
        return ('h', i, j)
    if edge == 1:
        return ('v', i + 1, j)
    if edge == 2:
        return ('h', i, j + 1)
    return ('v', i, j)


def _cell_segments(above: Sequence[bool], center_above: Optional[bool]) -> List[Tuple[int, int]]:
    crossed = [e for e, (a, b) in enumerate(_EDGE_CORNERS) if above[a] != above[b]]
    if len(crossed) == 2:
        return [tuple(crossed)]
    if len(crossed) != 4:
        return []
    if center_above == above[0]:
        # corners 1 and 3 are cut off
        return [(0, 1), (2, 3)]
    return [(3, 0), (1, 2)]


def _join(segments: List[Tuple[tuple, tuple]], points: Dict[tuple, Tuple[float, float]]
          ) -> List[Tuple[np.ndarray, bool]]:
    incident: Dict[tuple, List[int]] = {}
    for index, (a, b) in enumerate(segments):
        incident.setdefault(a, []).append(index)
        incident.setdefault(b, []).append(index)

    used = [False] * len(segments)

    def walk(start_key, first):
        chain = [start_key]
        key, index = start_key, first
        while index is not None and not used[index]:
            used[index] = True
            a, b = segments[index]
            key = b if a == key else a
            chain.append(key)
            index = next((n for n in incident[key] if not used[n]), None)
        return chain

    lines = []
    # open polylines start at keys with a single incident segment
    for key in sorted(incident):
        for index in incident[key]:
            if len(incident[key]) == 1 and not used[index]:
                chain = walk(key, index)
                lines.append((np.array([points[k] for k in chain]), False))
    for index, (a, _) in enumerate(segments):
        if not used[index]:
            chain = walk(a, index)
            lines.append((np.array([points[k] for k in chain]), chain[0] == chain[-1]))
    return lines


def marching_squares(xs: np.ndarray, ys: np.ndarray, values: np.ndarray, level: float,
                     center: Optional[Callable[[float, float], float]] = None
                     ) -> List[Tuple[np.ndarray, bool]]:
    """
    Polylines of {value = level} on a rectilinear grid; values[j, i] sits at (xs[i], ys[j]).

    Returns (points, closed) pairs. Saddle cells use `center` when given and
    the mean of the corners otherwise.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (len(ys), len(xs)):
        raise PreconditionError(f"values shape {values.shape} does not match grid "
                                f"({len(ys)}, {len(xs)})")
    above = values > level
    corners = (above[:-1, :-1], above[:-1, 1:], above[1:, 1:], above[1:, :-1])
    code = sum(c.astype(int) << bit for bit, c in enumerate(corners))
    js, is_ = np.nonzero((code != 0) & (code != 15))

    segments = []
    points: Dict[tuple, Tuple[float, float]] = {}

    def corner(i, j, c):
        di, dj = ((0, 0), (1, 0), (1, 1), (0, 1))[c]
        return xs[i + di], ys[j + dj], values[j + dj, i + di]

    for j, i in zip(js.tolist(), is_.tolist()):
        flags = [bool(c[j, i]) for c in corners]
        center_above = None
        if sum(flags) == 2 and flags[0] == flags[2]:
            cx, cy = 0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])
            mid = center(cx, cy) if center else float(np.mean(values[j:j + 2, i:i + 2]))
            center_above = bool(mid > level)
        for e0, e1 in _cell_segments(flags, center_above):
            keys = []
            for edge in (e0, e1):
                key = _edge_key(i, j, edge)
                if key not in points:
                    a, b = _EDGE_CORNERS[edge]
                    xa, ya, va = corner(i, j, a)
                    xb, yb, vb = corner(i, j, b)
                    t = min(1.0, max(0.0, (level - va) / (vb - va)))
                    points[key] = (xa + t * (xb - xa), ya + t * (yb - ya))
                keys.append(key)
            segments.append(tuple(keys))
    return _join(segments, points)


def contour_levels(values: np.ndarray, count: int = DEFAULT_CONTOURS) -> List[float]:
    """Evenly spaced percentiles of the sampled values"""
    if count < 1:
        raise PreconditionError(f"contour count must be >= 1, got {count}")
    finite = np.asarray(values, dtype=float)
    finite = finite[np.isfinite(finite)]
    return [float(v) for v in np.percentile(finite, np.linspace(*PERCENTILE_SPAN, count))]


def _piece_grid(level: HamiltonianLevel, side: str, grid: int, x_max: float, y_max: float):
    xs = np.linspace(0.0, x_max, grid) if side == PLUS else np.linspace(-x_max, 0.0, grid)
    ys = np.linspace(-y_max, y_max, grid)
    xx, yy = np.meshgrid(xs, ys)
    return xs, ys, level.hamiltonian(side)(xx, yy)


def level_contours(level: HamiltonianLevel, grid: int = DEFAULT_GRID, count: int = DEFAULT_CONTOURS,
                   x_max: float = DEFAULT_X_MAX, y_max: float = DEFAULT_Y_MAX,
                   levels: Optional[Sequence[float]] = None, jobs: int = 1) -> List[ContourLine]:
    """
    Contours of H+ on x >= 0 and H- on x <= 0 at common levels, numbered by level.
    """
    if grid < 2:
        raise PreconditionError(f"grid must be >= 2, got {grid}")
    pieces = {side: _piece_grid(level, side, grid, x_max, y_max) for side in (PLUS, MINUS)}
    if levels is None:
        levels = contour_levels(np.concatenate([pieces[s][2].ravel() for s in (PLUS, MINUS)]), count)

    tasks = [(cid, value, side) for cid, value in enumerate(levels) for side in (PLUS, MINUS)]

    def run(task):
        cid, value, side = task
        xs, ys, values = pieces[side]
        h = level.hamiltonian(side)
        return cid, value, side, marching_squares(xs, ys, values, value,
                                                  lambda x, y: float(h(x, y)))

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(run, tasks))

    lines = []
    for cid, value, side, polylines in results:
        for pid, (points, closed) in enumerate(polylines):
            lines.append(ContourLine(cid, float(value), side, pid, points, closed))
    logger.info(f"level {level.level}: {len(lines)} polylines over {len(levels)} levels")
    return lines


def unperturbed_level(k: int) -> HamiltonianLevel:
    """H_k at eps = 0"""
    return build_level(k, 0.0, (0.0,) * k, default_tables(k))


def contour_rows(lines: Sequence[ContourLine]) -> List[Dict]:
    rows = []
    for line in lines:
        rows.extend(line.rows())
    return rows
