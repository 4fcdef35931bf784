"""Orthogonal arrays: certification, the builtin arrays, and the text format.

A matrix is an ``OA(N, K, n, h)`` when every ``h``-column projection contains
each of the ``n**h`` level tuples exactly ``lam = N / n**h`` times. Balance at
strength ``h`` implies balance at every ``p < h`` (each ``p``-tuple then occurs
``lam * n**(h - p)`` times), so only strength ``h`` is checked.
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels
from .errors import InputError, ParseError

DENSE_CAP = 10**6

TABLE1 = (
    (0, 0, 0, 0, 0, 0),
    (1, 1, 1, 1, 1, 1),
    (2, 2, 2, 2, 2, 2),
    (0, 0, 1, 2, 1, 2),
    (1, 1, 2, 0, 2, 0),
    (2, 2, 0, 1, 0, 1),
    (0, 1, 0, 2, 2, 1),
    (1, 2, 1, 0, 0, 2),
    (2, 0, 2, 1, 1, 0),
    (0, 2, 2, 0, 1, 1),
    (1, 0, 0, 1, 2, 2),
    (2, 1, 1, 2, 0, 0),
    (0, 1, 2, 1, 0, 2),
    (1, 2, 0, 2, 1, 0),
    (2, 0, 1, 0, 2, 1),
    (0, 2, 1, 1, 2, 0),
    (1, 0, 2, 2, 0, 1),
    (2, 1, 0, 0, 1, 2),
)


@dataclass(frozen=True)
class CertificationResult:
    is_oa: bool
    achieved_strength: int
    index_at_strength: int | None = None
    coincidence_defect_free: bool | None = None
    witness: dict | None = None

    def to_dict(self):
        return {
            "is_oa": self.is_oa,
            "achieved_strength": self.achieved_strength,
            "index": self.index_at_strength,
            "coincidence_defect_free": self.coincidence_defect_free,
            "witness": self.witness,
        }


@dataclass(frozen=True, eq=False)
class OrthogonalArray:
    """A certified ``OA(N, K, n, h)``. Build through :meth:`certify`."""

    entries: np.ndarray
    levels: int
    strength: int
    index: int
    defect_free: bool
    name: str = field(default="")

    @property
    def runs(self):
        return self.entries.shape[0]

    @property
    def factors(self):
        return self.entries.shape[1]

    @property
    def params(self):
        return (self.runs, self.factors, self.levels, self.strength)

    def __eq__(self, other):
        if not isinstance(other, OrthogonalArray):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.entries, other.entries)

    __hash__ = None

    @classmethod
    def certify(cls, matrix, n, h, name=""):
        """Verify strength and coincidence freedom; raise InputError unless it is an OA."""
        res = verify_strength(matrix, n, h)
        if not res.is_oa:
            raise InputError(f"not an OA of strength {h}: {res.witness}")
        H = _as_matrix(matrix)
        free = coincidence_witness(H, h) is None
        H = H.copy()
        H.setflags(write=False)
        return cls(H, int(n), int(h), res.index_at_strength, free, name)

    def alpha_positions(self):
        """Rank of each row among the rows sharing its level, per column (ascending row order)."""
        H = self.entries
        pos = np.empty_like(H)
        for k in range(self.factors):
            order = np.argsort(H[:, k], kind="stable")
            counts = np.bincount(H[:, k], minlength=self.levels)
            starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
            ranks = np.arange(self.runs) - np.repeat(starts, counts)
            pos[order, k] = ranks
        return pos


def _as_matrix(matrix):
    H = np.asarray(matrix)
    if H.ndim != 2 or H.size == 0:
        raise InputError("matrix must be a nonempty 2-D array")
    if not np.issubdtype(H.dtype, np.integer):
        if not np.all(np.equal(np.mod(H, 1), 0)):
            raise InputError("matrix entries must be integers")
    return H.astype(np.int64)


def _check_entries(H, n):
    bad = np.argwhere((H < 0) | (H >= n))
    if bad.size:
        r, c = (int(v) for v in bad[0])
        raise InputError(f"entry {H[r, c]} at (row {r}, col {c}) outside 0..{n - 1}")


def projection_counts(matrix, n, cols, cap=DENSE_CAP):
    """Occurrence count of every level tuple on columns ``cols``, lexicographic order.

    Dense ``bincount`` while ``n**len(cols) <= cap``; otherwise only the tuples
    that occur are returned, as a ``(tuples, counts)`` pair.
    """
    H = _as_matrix(matrix)
    cols = list(cols)
    lin = np.zeros(H.shape[0], dtype=np.int64)
    for c in cols:
        lin = lin * n + H[:, c]
    size = n ** len(cols)
    if size <= cap:
        return np.bincount(lin, minlength=size)
    uniq, counts = np.unique(lin, return_counts=True)
    return uniq, counts


def _unravel(idx, n, t):
    out = []
    for _ in range(t):
        out.append(int(idx % n))
        idx //= n
    return out[::-1]


def _balance_witness(H, n, t, cap):
    """First (column subset, tuple) where strength ``t`` balance fails, or None."""
    N, K = H.shape
    size = n**t
    if N % size:
        return {"reason": "divisibility", "runs": N, "cells": size}
    lam = N // size
    for cols in combinations(range(K), t):
        counts = projection_counts(H, n, cols, cap)
        if isinstance(counts, tuple):
            uniq, cnt = counts
            if uniq.size == size and np.all(cnt == lam):
                continue
            # first missing or unbalanced tuple; uniq is sorted, so the first
            # position where uniq[i] != i marks the smallest missing tuple
            gaps = np.flatnonzero(uniq != np.arange(uniq.size))
            candidates = list(uniq[cnt != lam][:1])
            candidates.append(gaps[0] if gaps.size else uniq.size)
            idx = int(min(c for c in candidates if c < size))
            hit = np.flatnonzero(uniq == idx)
            count = int(cnt[hit[0]]) if hit.size else 0
        else:
            off = np.flatnonzero(counts != lam)
            if off.size == 0:
                continue
            idx = int(off[0])
            count = int(counts[idx])
        return {"reason": "unbalanced", "columns": list(cols), "tuple": _unravel(idx, n, t),
                "count": count, "expected": lam}
    return None


def verify_strength(matrix, n, h, cap=DENSE_CAP):
    """Check that ``matrix`` is an OA of strength ``h`` over ``n`` levels.

    ``achieved_strength`` is found by raising ``t`` from 1 until balance
    fails, and is reported whether or not the claimed ``h`` holds.
    """
    H = _as_matrix(matrix)
    N, K = H.shape
    n, h = int(n), int(h)
    if n < 2:
        raise InputError(f"need at least 2 levels, got {n}")
    if not 1 <= h <= K:
        raise InputError(f"strength {h} outside 1..{K}")
    _check_entries(H, n)

    achieved = 0
    for t in range(1, K + 1):
        if _balance_witness(H, n, t, cap) is not None:
            break
        achieved = t
    witness = None if achieved >= h else _balance_witness(H, n, h, cap)
    if witness is None:
        return CertificationResult(True, achieved, N // n**h)
    return CertificationResult(False, achieved, None, None, witness)


def coincidence_witness(matrix, h):
    i, j, agree = kernels.first_agreement(_as_matrix(matrix), int(h))
    if i < 0:
        return None
    return {"reason": "coincidence", "rows": [i, j], "agreements": agree}


def verify_coincidence_free(oa, n=None, h=None):
    """Scan all row pairs; the array is defect free when no pair agrees in more than ``h`` columns.

    Accepts an :class:`OrthogonalArray` or a raw matrix with ``n`` and ``h``.
    A duplicated row shows up here as a pair agreeing in all K columns.
    """
    if isinstance(oa, OrthogonalArray):
        H, n, h = oa.entries, oa.levels, oa.strength
        res = CertificationResult(True, h, oa.index)
    else:
        H = _as_matrix(oa)
        res = verify_strength(H, n, h)
        if not res.is_oa:
            return res
    w = coincidence_witness(H, h)
    return CertificationResult(True, res.achieved_strength, res.index_at_strength, w is None, w)


def certify(matrix, n, h):
    """Full report: strength plus coincidence scan (the scan only runs on an OA)."""
    res = verify_strength(matrix, n, h)
    if not res.is_oa:
        return res
    return verify_coincidence_free(matrix, n, h)


def generate_table1():
    """The 18-run, 6-factor, 3-level strength-2 array of index 2."""
    return OrthogonalArray.certify(np.array(TABLE1), 3, 2, name="table1")


def _is_prime(p):
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def generate_rao_hamming(p, k):
    """OA(p^2, k, p, 2) of index 1 over GF(p).

    Rows run over ``(x, y)`` in GF(p)^2; columns are ``x``, ``y`` and
    ``x + c*y mod p`` for ``c = 1..k-2``.
    """
    p, k = int(p), int(k)
    if not _is_prime(p):
        raise InputError(f"{p} is not prime")
    if not 2 <= k <= p + 1:
        raise InputError(f"need 2 <= k <= {p + 1}, got {k}")
    x, y = np.divmod(np.arange(p * p), p)
    cols = [x, y] + [(x + c * y) % p for c in range(1, k - 1)]
    return OrthogonalArray.certify(np.column_stack(cols), p, 2, name=f"rao_hamming:{p}:{k}")


def builtin(spec):
    """``"table1"`` or ``"rao_hamming:p:k"``."""
    parts = str(spec).split(":")
    if parts == ["table1"]:
        return generate_table1()
    if parts[0] == "rao_hamming" and len(parts) == 3:
        try:
            return generate_rao_hamming(int(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise InputError(str(exc)) from None
    raise InputError(f"unknown builtin array {spec!r}")


# -- text format ---------------------------------------------------------------

def parse_oa_text(text):
    """Parse ``N K n h`` followed by N rows. Returns ``(matrix, n, h)``.

    ``#`` starts a comment; blank lines are ignored.
    """
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals = [int(v) for v in line.split()]
        except ValueError:
            raise ParseError(f"non-integer token in {line!r}", lineno) from None
        if header is None:
            if len(vals) != 4:
                raise ParseError("header must be 'N K n h'", lineno)
            header = vals
            continue
        if len(vals) != header[1]:
            raise ParseError(f"expected {header[1]} entries, got {len(vals)}", lineno)
        rows.append(vals)
        last = lineno
    if header is None:
        raise ParseError("empty file", 1)
    N, K, n, h = header
    if len(rows) != N:
        raise ParseError(f"header says {N} rows, found {len(rows)}", last if rows else 1)
    return np.array(rows, dtype=np.int64).reshape(N, K), n, h


def format_oa_text(matrix, n, h):
    H = _as_matrix(matrix)
    lines = [f"{H.shape[0]} {H.shape[1]} {int(n)} {int(h)}"]
    lines += [" ".join(str(int(v)) for v in row) for row in H]
    return "\n".join(lines) + "\n"


def read_oa(path):
    with open(path, encoding="utf-8") as fh:
        return parse_oa_text(fh.read())


def write_oa(path, oa):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_oa_text(oa.entries, oa.levels, oa.strength))
