"""Cell-occupancy audits.

Column subsets ``u`` are 1-based, matching how designs are usually written
down (``u = (1, 2)`` is the first two coordinates).
"""
import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .design import Design, DesignKind
from .errors import InputError

DENSE_CAP = 10**6


def subdivision_index(x, z):
    """``floor(z * x)`` for ``x`` in [0, 1): the cell ``[c/z, (c+1)/z)`` holding ``x``."""
    z = int(z)
    if z < 1:
        raise InputError(f"grain must be >= 1, got {z}")
    x = float(x)
    if not 0.0 <= x < 1.0:
        raise InputError(f"x={x!r} outside [0, 1)")
    return min(int(np.floor(z * x)), z - 1)


def subdivision(x, z):
    c = subdivision_index(x, z)
    return c / z, (c + 1) / z


def cell_indices(points, z):
    pts = np.asarray(points, dtype=np.float64)
    if np.any((pts < 0) | (pts >= 1)) or np.any(np.isnan(pts)):
        raise InputError("points must lie in [0, 1)")
    return np.minimum(np.floor(pts * z).astype(np.int64), z - 1)


@dataclass(frozen=True)
class CellCountReport:
    u: tuple
    z: int
    runs: int
    counts: dict = field(repr=False)
    expected: float
    min: int
    max: int
    violations: list = field(repr=False)

    @property
    def uniform(self):
        return self.min == self.max == self.expected

    def to_dict(self):
        return {"u": list(self.u), "z": self.z, "expected": self.expected, "min": self.min,
                "max": self.max,
                "violations": [{"cell": list(c), "count": n} for c, n in self.violations]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _points(design):
    return design.points if isinstance(design, Design) else np.asarray(design, dtype=np.float64)


def audit_cells(design, u, z, cap=DENSE_CAP):
    """Exact occupancy of every cell of side ``1/z`` in the projection onto ``u``."""
    pts = _points(design)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputError("empty design")
    u = tuple(int(c) for c in u)
    z = int(z)
    if not u:
        raise InputError("column subset must be nonempty")
    if any(c < 1 or c > pts.shape[1] for c in u):
        raise InputError(f"columns {u} outside 1..{pts.shape[1]}")
    if z < 1:
        raise InputError(f"grain must be >= 1, got {z}")
    N = pts.shape[0]
    idx = cell_indices(pts[:, [c - 1 for c in u]], z)
    ncells = z ** len(u)
    expected = N / ncells
    if expected == int(expected):
        expected = int(expected)

    if ncells <= cap:
        lin = np.ravel_multi_index(idx.T, (z,) * len(u))
        dense = np.bincount(lin, minlength=ncells)
        occupied = np.flatnonzero(dense)
        counts = {tuple(int(v) for v in np.unravel_index(i, (z,) * len(u))): int(dense[i]) for i in occupied}
        bad = np.flatnonzero(dense != expected)
        violations = [(tuple(int(v) for v in np.unravel_index(i, (z,) * len(u))), int(dense[i])) for i in bad]
        lo, hi = int(dense.min()), int(dense.max())
    else:
        cells, cnt = np.unique(idx, axis=0, return_counts=True)
        counts = {tuple(int(v) for v in c): int(n) for c, n in zip(cells, cnt)}
        violations = [(c, n) for c, n in counts.items() if n != expected]
        lo = 0 if len(counts) < ncells else int(cnt.min())
        hi = int(cnt.max())
    return CellCountReport(u, z, N, counts, expected, lo, hi, violations)


@dataclass(frozen=True)
class StratificationResult:
    passed: bool
    checked: int
    failure: CellCountReport | None = None


def stratification_plan(design):
    """``(u, z)`` pairs an OA-based design of strength h must balance."""
    oa = design.source
    K = design.dim
    plan = [(u, oa.levels) for t in range(1, oa.strength + 1)
            for u in combinations(range(1, K + 1), t)]
    if design.kind is DesignKind.U_DESIGN:
        plan += [((k,), design.runs) for k in range(1, K + 1)]
    return plan


def assert_oa_stratification(design):
    """Every projection of order <= h is uniform at grain n; U designs also at grain N per column."""
    if design.kind not in (DesignKind.RANDOMIZED_OA, DesignKind.U_DESIGN) or design.source is None:
        raise InputError("stratification audit needs a randomised OA or U design")
    checked = 0
    for u, z in stratification_plan(design):
        rep = audit_cells(design, u, z)
        checked += 1
        if not rep.uniform:
            return StratificationResult(False, checked, rep)
    return StratificationResult(True, checked)


def batch_violations(points, u, z):
    """Per-replicate count of non-uniform cells for a ``(R, N, K)`` stack of designs."""
    pts = np.asarray(points)
    R, N, _ = pts.shape
    cols = [c - 1 for c in u]
    idx = cell_indices(pts[:, :, cols].reshape(-1, len(cols)), z)
    lin = np.ravel_multi_index(idx.T, (z,) * len(cols)).reshape(R, N)
    ncells = z ** len(cols)
    lin = lin + (np.arange(R) * ncells)[:, None]
    counts = np.bincount(lin.ravel(), minlength=R * ncells).reshape(R, ncells)
    return (counts * ncells != N).sum(axis=1)
