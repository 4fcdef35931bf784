"""Randomised designs: ordinary Latin hypercubes, randomised OAs and U designs.

All three share one recipe: permute, then jitter inside a cell.

* Latin hypercube:   ``X[i, k] = (pi_k(i) + eta[i, k]) / N``
* randomised OA:     ``X[i, k] = (pi_k(H[g(i), k]) + eta[i, k]) / n``
* U design:          ``X[i, k] = pi_k(H[g(i), k]) / n + (alpha[g(i), k] + eta[i, k]) / N``

``g`` is a uniform row permutation (it plays the role of gamma^-1), ``pi_k``
uniform level permutations, ``eta`` iid U[0, 1), and for each column ``k``
and level ``x`` the ``alpha`` values of the rows at that level form a
uniform permutation of ``0..N/n-1``. Rows at a level are taken in ascending
row order before that permutation is applied.
"""
import enum
import io
import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError
from .oa import OrthogonalArray


class DesignKind(str, enum.Enum):
    LATIN_HYPERCUBE = "lhs"
    RANDOMIZED_OA = "roa"
    U_DESIGN = "u-design"
    IID = "iid"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"latin": "lhs", "latinhypercube": "lhs", "randomizedoa": "roa",
                   "udesign": "u-design", "u_design": "u-design", "ud": "u-design"}
        key = str(value).lower()
        try:
            return cls(aliases.get(key.replace("-", "").replace("_", ""), key))
        except ValueError:
            raise InputError(f"unknown design kind {value!r}") from None


@dataclass(frozen=True, eq=False)
class Design:
    points: np.ndarray
    kind: DesignKind
    seed: int
    stream: int
    n_levels: int
    source: OrthogonalArray | None = None

    @property
    def runs(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def strength(self):
        return self.source.strength if self.source is not None else 1

    def metadata(self):
        meta = {"kind": self.kind.value, "seed": self.seed, "stream": self.stream,
                "runs": self.runs, "dim": self.dim, "n_levels": self.n_levels}
        if self.source is not None:
            N, K, n, h = self.source.params
            meta["oa"] = {"name": self.source.name, "N": N, "K": K, "n": n, "h": h,
                          "index": self.source.index}
        return meta


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _require_certified(oa):
    if not isinstance(oa, OrthogonalArray):
        raise InputError("expected a certified OrthogonalArray")
    if not oa.defect_free:
        raise InputError(f"OA {oa.params} is not free of coincidence defect")


def _streams(streams):
    return np.asarray([int(s) & 0xFFFFFFFFFFFFFFFF for s in np.atleast_1d(streams)], dtype=np.uint64)


def design_batch(kind, seed, streams, oa=None, runs=None, dim=None):
    """Points of many independent designs, shape ``(len(streams), N, K)``.

    Replicate ``r`` is exactly the design built from ``RandomStream(seed, streams[r])``.
    """
    kind = DesignKind.parse(kind)
    st = _streams(streams)
    if kind in (DesignKind.RANDOMIZED_OA, DesignKind.U_DESIGN):
        _require_certified(oa)
        udesign = kind is DesignKind.U_DESIGN
        pos = oa.alpha_positions() if udesign else np.zeros_like(oa.entries)
        return kernels.oa_designs(oa.entries, oa.levels, seed, st, udesign, pos)
    if oa is not None:
        runs = oa.runs if runs is None else runs
        dim = oa.factors if dim is None else dim
    if runs is None or dim is None or runs < 1 or dim < 1:
        raise InputError("need runs >= 1 and dim >= 1")
    if kind is DesignKind.LATIN_HYPERCUBE:
        return kernels.lhs_designs(runs, dim, seed, st)
    return kernels.iid_points(runs, dim, seed, st)


def build_latin_hypercube(N, K, stream):
    N, K = int(N), int(K)
    if N < 1 or K < 1:
        raise InputError("need N >= 1 and K >= 1")
    pts = design_batch(DesignKind.LATIN_HYPERCUBE, stream.seed, [stream.stream], runs=N, dim=K)[0]
    return Design(_frozen(pts), DesignKind.LATIN_HYPERCUBE, stream.seed, stream.stream, N)


def build_randomized_oa(oa, stream):
    _require_certified(oa)
    pts = design_batch(DesignKind.RANDOMIZED_OA, stream.seed, [stream.stream], oa=oa)[0]
    return Design(_frozen(pts), DesignKind.RANDOMIZED_OA, stream.seed, stream.stream, oa.levels, oa)


def build_u_design(oa, stream):
    _require_certified(oa)
    pts = design_batch(DesignKind.U_DESIGN, stream.seed, [stream.stream], oa=oa)[0]
    return Design(_frozen(pts), DesignKind.U_DESIGN, stream.seed, stream.stream, oa.levels, oa)


def build_iid(N, K, stream):
    pts = design_batch(DesignKind.IID, stream.seed, [stream.stream], runs=N, dim=K)[0]
    return Design(_frozen(pts), DesignKind.IID, stream.seed, stream.stream, 1)


def build_design(kind, stream, oa=None, runs=None, dim=None):
    kind = DesignKind.parse(kind)
    if kind is DesignKind.RANDOMIZED_OA:
        return build_randomized_oa(oa, stream)
    if kind is DesignKind.U_DESIGN:
        return build_u_design(oa, stream)
    if oa is not None:
        runs = oa.runs if runs is None else runs
        dim = oa.factors if dim is None else dim
    if kind is DesignKind.LATIN_HYPERCUBE:
        return build_latin_hypercube(runs, dim, stream)
    return build_iid(runs, dim, stream)


# -- CSV / JSON ------------------------------------------------------------------

def design_to_csv(design_or_points):
    pts = design_or_points.points if isinstance(design_or_points, Design) else np.asarray(design_or_points)
    buf = io.StringIO()
    buf.write(",".join(f"x{k + 1}" for k in range(pts.shape[1])) + "\n")
    for row in pts:
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def read_design_csv(text):
    """Points from design CSV text. Raises InputError on malformed rows."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("empty design file")
    header = lines[0].split(",")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        vals = ln.split(",")
        if len(vals) != len(header):
            raise InputError(f"line {lineno}: expected {len(header)} values")
        try:
            rows.append([float(v) for v in vals])
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric value") from None
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(header))


def design_metadata_json(design):
    return json.dumps(design.metadata(), indent=2, sort_keys=True) + "\n"
