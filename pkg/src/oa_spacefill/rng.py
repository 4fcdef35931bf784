"""Seeded, splittable random streams.

A stream is a ``(seed, stream_id)`` pair. Every random ingredient of a design
is drawn from a named substream such as ``"rows"``, ``"levels:3"``,
``"jitter:5:2"`` or ``"shift:1:0"``, so each family can be replayed on its own.
The generator is a pure function of integers (no platform RNG state), which
is what makes designs byte-identical across machines.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError

_MASK64 = (1 << 64) - 1

FAMILIES = {
    "rows": kernels.ROWS,
    "levels": kernels.LEVELS,
    "jitter": kernels.JITTER,
    "shift": kernels.SHIFT,
    "iid": kernels.IID,
    "perm": kernels.PERM,
}


def parse_substream(name):
    """``"jitter:5:2"`` -> ``(JITTER, 5, 2)``."""
    head, *rest = str(name).split(":")
    if head not in FAMILIES or len(rest) > 2:
        raise InputError(f"unknown substream {name!r}")
    try:
        idx = [int(v) for v in rest] + [0] * (2 - len(rest))
    except ValueError:
        raise InputError(f"bad substream index in {name!r}") from None
    return FAMILIES[head], idx[0], idx[1]


@dataclass(frozen=True)
class RandomStream:
    seed: int
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream", int(self.stream) & _MASK64)

    def key(self, name="perm"):
        family, a, b = parse_substream(name)
        return np.uint64(kernels.key_np(self.seed, self.stream, family, a, b))

    def uniform(self, name, size=None):
        """``size`` uniforms on [0, 1) from substream ``name`` (counters 0, 1, ...)."""
        count = 1 if size is None else int(size)
        u = kernels.unit_np(kernels.draw_np(self.key(name), np.arange(count, dtype=np.uint64)))
        return float(u[0]) if size is None else u

    def permutation(self, a, name="perm"):
        return uniform_permutation(a, self, name)

    def spawn(self, stream):
        return RandomStream(self.seed, stream)


def uniform_permutation(a, stream, name="perm"):
    """Fisher-Yates shuffle of ``range(a)`` driven by ``stream``'s substream ``name``."""
    a = int(a)
    if a < 1:
        raise InputError(f"permutation size must be >= 1, got {a}")
    return kernels.permutations(np.array([stream.key(name)], dtype=np.uint64), a)[0]
