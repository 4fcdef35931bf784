"""Test integrands on the unit cube.

Each integrand takes an ``(M, K')`` array of unit-cube points (``K' >= K``;
extra columns are ignored) and returns ``M`` values. Functions defined on a
box are composed with the affine map from ``[0, 1)^K`` onto the box, so their
means are means over the box.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, InputError


@dataclass(frozen=True)
class Integrand:
    name: str
    dim: int
    func: Callable
    box: tuple | None = None
    mu_ref: float | None = None
    mu_ref_source: str = ""

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] < self.dim:
            raise InputError(f"{self.name} needs {self.dim} coordinates, got {x.shape[1]}")
        x = x[:, : self.dim]
        if self.box is not None:
            lo = np.array([b[0] for b in self.box])
            hi = np.array([b[1] for b in self.box])
            x = lo + (hi - lo) * x
        return self.func(x)

    def evaluate_checked(self, x):
        """Like calling, but raise DomainError naming the first non-finite point."""
        with np.errstate(divide="ignore", invalid="ignore"):
            y = self(x)
        bad = np.flatnonzero(~np.isfinite(y))
        if bad.size:
            pt = np.atleast_2d(x)[bad[0]]
            raise DomainError(f"{self.name} is not finite at {pt.tolist()}")
        return y


def _cox(x):
    x1, x2, x3, x4 = x.T
    return x1 / 2 * (np.sqrt(1 + (x2 + x3**2) * x4 / x1**2) - 1) + x1 + 3 * x4


def _cox_printed(x):
    x1, x2, x3, x4 = x.T
    return x1 / (2 * (np.sqrt(1 + (x2 + x3**2) * x4 / x1**2) - 1)) + x1 + 3 * x4


_B = 5.1 / (4 * np.pi**2)
_C = 5 / np.pi
_T = 1 / (8 * np.pi)


def _branin(x):
    x1, x2 = x.T
    return (x2 - _B * x1**2 + _C * x1 - 6) ** 2 + 10 * (1 - _T) * np.cos(x1) + 10


def _branin_printed(x):
    # first bracket not squared, as typeset in some sources
    x1, x2 = x.T
    return (x2 - _B * x1**2 + _C * x1 - 6) + 10 * (1 - _T) * np.cos(x1) + 10


BRANIN_BOX = ((-5.0, 10.0), (0.0, 15.0))

# Reference means: corrected Cox form by a large Latin hypercube, Branin by a large grid.
COX_MEAN = 2.160
BRANIN_MEAN = 54.31


def cox(variant="standard"):
    """Cox et al. test function on [0, 1)^4.

    The standard form is ``x1/2 * (sqrt(1 + (x2 + x3^2) x4 / x1^2) - 1) + x1 + 3 x4``
    and has mean about 2.160. The ``"printed"`` variant divides by the bracket
    instead; its integral over the cube diverges (the first term blows up
    like ``1/x4`` near ``x4 = 0``), so it is only useful for pointwise checks.
    """
    if variant == "standard":
        return Integrand("cox", 4, _cox, mu_ref=COX_MEAN, mu_ref_source="large Latin hypercube")
    if variant == "printed":
        return Integrand("cox-printed", 4, _cox_printed)
    raise InputError(f"unknown cox variant {variant!r}")


def branin(variant="standard"):
    if variant == "standard":
        return Integrand("branin", 2, _branin, BRANIN_BOX, BRANIN_MEAN, "large grid")
    if variant == "printed":
        return Integrand("branin-printed", 2, _branin_printed, BRANIN_BOX)
    raise InputError(f"unknown branin variant {variant!r}")


def cox_function(x, variant="standard"):
    """Cox integrand at unit-cube point(s); DomainError where it is undefined."""
    return _scalar_or_vector(cox(variant), x)


def branin_function(x, variant="standard"):
    """Branin at unit-square point(s), mapped onto [-5, 10] x [0, 15]."""
    return _scalar_or_vector(branin(variant), x)


def _scalar_or_vector(f, x):
    arr = np.asarray(x, dtype=np.float64)
    y = f.evaluate_checked(arr)
    return float(y[0]) if arr.ndim == 1 else y


def constant(value=1.0, dim=1):
    value = float(value)
    return Integrand("constant", dim, lambda x: np.full(x.shape[0], value), mu_ref=value,
                     mu_ref_source="exact")


def additive(dim=2):
    return Integrand("additive", dim, lambda x: x.sum(axis=1), mu_ref=dim / 2, mu_ref_source="exact")


def product(cols=(1, 2), dim=None):
    """``prod x_c`` over the 1-based columns ``cols``."""
    cols = tuple(int(c) for c in cols)
    dim = max(cols) if dim is None else int(dim)
    idx = [c - 1 for c in cols]
    name = "product" + "".join(str(c) for c in cols)
    return Integrand(name, dim, lambda x: np.prod(x[:, idx], axis=1), mu_ref=0.5 ** len(cols),
                     mu_ref_source="exact")


def get_integrand(name, dim=None, variant="standard", value=1.0):
    """Look up an integrand by CLI name."""
    name = str(name).lower()
    if name == "cox":
        return cox(variant)
    if name == "cox-printed":
        return cox("printed")
    if name == "branin":
        return branin(variant)
    if name == "branin-printed":
        return branin("printed")
    if name == "constant":
        return constant(value, dim or 1)
    if name == "additive":
        return additive(dim or 2)
    if name.startswith("product"):
        digits = name[len("product"):].strip(":")
        cols = (1, 2) if digits in ("", "2") else tuple(int(c) for c in digits.replace(",", ""))
        return product(cols, dim)
    raise InputError(f"unknown integrand {name!r}")
