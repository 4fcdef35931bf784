"""Functional ANOVA on a midpoint tensor grid.

``f = mu + sum_u f_u``, with ``f_u`` the average of ``f - sum_{v < u} f_v`` over
the coordinates outside ``u``. On the grid of cell centres ``(j + 1/2)/m``
every such average is an exact partial mean of the tabulated values, so the
zero-integral and orthogonality identities hold to rounding error.

Effects up to order ``h`` are kept as ``m**|u|`` tables; what is left is the
residual ``r``, whose mean square is the limiting variance of
``sqrt(N) * (mu_hat - mu)`` for OA-based designs of strength ``h``.
"""
import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, InputError, ResourceError

NODE_CAP = 10**8
EPS_ANOVA = 1e-10


def grid_nodes(m):
    return (np.arange(m) + 0.5) / m


def evaluate_grid(f, K, m, node_cap=NODE_CAP):
    """``f`` at every node of the ``m**K`` midpoint grid, as a K-dimensional table."""
    total = m**K
    if total > node_cap:
        raise ResourceError(f"{m}^{K} = {total} grid nodes exceeds cap {node_cap}")
    nodes = grid_nodes(m)
    # one slab per value of the first coordinate keeps peak memory at m^(K-1) points
    rest = np.stack(np.meshgrid(*([nodes] * (K - 1)), indexing="ij"), axis=-1).reshape(-1, K - 1) if K > 1 else np.empty((1, 0))
    F = np.empty((m, rest.shape[0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        for j, x0 in enumerate(nodes):
            pts = np.column_stack([np.full(rest.shape[0], x0), rest])
            F[j] = f(pts)
    bad = np.argwhere(~np.isfinite(F))
    if bad.size:
        j, i = bad[0]
        pt = [float(nodes[j])] + rest[i].tolist()
        raise DomainError(f"non-finite integrand value at grid point {pt}")
    return F.reshape((m,) * K)


def _expand(table, u, K):
    """View of an effect table broadcastable against the full K-dim grid."""
    shape = [1] * K
    for axis in u:
        shape[axis] = table.shape[0]
    return table.reshape(shape)


@dataclass(eq=False)
class AnovaModel:
    integrand: object
    K: int
    h: int
    m: int
    mu: float
    effects: dict
    sigma2: float
    total_variance: float
    grid: np.ndarray = field(repr=False)
    _interp: dict = field(default_factory=dict, repr=False)

    def residual_grid(self):
        r = self.grid - self.mu
        for u, tab in self.effects.items():
            r = r - _expand(tab, u, self.K)
        return r

    def effect(self, u, x):
        """``f_u`` at points ``x`` (``u`` 0-based), multilinear between cell centres."""
        u = tuple(u)
        if u not in self._interp:
            nodes = grid_nodes(self.m)
            self._interp[u] = RegularGridInterpolator((nodes,) * len(u), self.effects[u],
                                                      bounds_error=False, fill_value=None)
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return self._interp[u](x[:, list(u)])

    def residual(self, x):
        """``r(x) = f(x) - mu - sum_u f_u(x)``."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        r = self.integrand(x) - self.mu
        for u in self.effects:
            r = r - self.effect(u, x)
        return r

    def effect_variances(self):
        return {u: float(np.mean(tab**2)) for u, tab in self.effects.items()}

    def to_dict(self):
        return {"K": self.K, "h": self.h, "m": self.m, "mu": self.mu, "sigma2": self.sigma2,
                "total_variance": self.total_variance,
                "integrand": getattr(self.integrand, "name", None),
                "effects": [{"u": [c + 1 for c in u], "table_shape": list(tab.shape),
                             "variance": float(np.mean(tab**2))}
                            for u, tab in self.effects.items()]}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def write_effect_tables(self, directory):
        """One CSV per effect: grid indices (1-based axis labels) and the value."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for u, tab in self.effects.items():
            label = "_".join(str(c + 1) for c in u)
            path = directory / f"effect_{label}.csv"
            idx = np.indices(tab.shape).reshape(len(u), -1).T
            lines = [",".join([f"j{c + 1}" for c in u] + ["value"])]
            lines += [",".join([str(v) for v in row] + [f"{val:.17g}"]) for row, val in zip(idx, tab.ravel())]
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            paths.append(path)
        return paths


def decompose(f, K, h, m, node_cap=NODE_CAP):
    """ANOVA effects of order <= h, residual and ``sigma2 = mean(r^2)`` on the m^K grid."""
    K, h, m = int(K), int(h), int(m)
    if m < 2:
        raise InputError(f"grid resolution must be >= 2, got {m}")
    if not 1 <= h < K:
        raise InputError(f"need 1 <= h < K, got h={h}, K={K} (h = K leaves no residual)")
    F = evaluate_grid(f, K, m, node_cap)
    if F.min() == F.max():
        # constant: the exact value beats any rounded mean
        mu = float(F.flat[0])
        effects = {u: np.zeros((m,) * len(u)) for t in range(1, h + 1) for u in combinations(range(K), t)}
        return AnovaModel(f, K, h, m, mu, effects, 0.0, 0.0, F)

    mu = float(F.mean())
    effects = {}
    for t in range(1, h + 1):
        for u in combinations(range(K), t):
            other = tuple(a for a in range(K) if a not in u)
            g = F.mean(axis=other) - mu
            for v, tab in effects.items():
                if set(v) < set(u):
                    shape = [1] * t
                    for axis in v:
                        shape[u.index(axis)] = m
                    g = g - tab.reshape(shape)
            effects[u] = g
    model = AnovaModel(f, K, h, m, mu, effects, 0.0, float(np.mean((F - mu) ** 2)), F)
    model.sigma2 = float(np.mean(model.residual_grid() ** 2))
    return model


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int

    def __float__(self):
        return self.value


def residual_variance_mc(model, samples, stream, chunk=1 << 18):
    """Plain Monte Carlo estimate of ``mean(r^2)`` with its standard error."""
    samples = int(samples)
    if samples < 1:
        raise InputError("need at least one sample")
    from .design import design_batch

    total = 0.0
    total_sq = 0.0
    done = 0
    block = 0
    while done < samples:
        size = min(chunk, samples - done)
        # each chunk is one iid "design" drawn from its own stream id
        x = design_batch("iid", stream.seed, [stream.stream + block], runs=size, dim=model.K)[0]
        r2 = model.residual(x) ** 2
        total += float(r2.sum())
        total_sq += float((r2**2).sum())
        done += size
        block += 1
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0)
    se = np.sqrt(var / (samples - 1)) if samples > 1 else float("inf")
    return MCEstimate(mean, float(se), samples)


def covariance_matrix(models):
    """``Sigma[i, j] = mean(r_i * r_j)`` over the shared grid."""
    models = list(models)
    if not models:
        raise InputError("need at least one model")
    ref = models[0]
    for mod in models[1:]:
        if (mod.K, mod.h, mod.m) != (ref.K, ref.h, ref.m):
            raise InputError("models must share K, h and grid resolution")
    res = [mod.residual_grid().ravel() for mod in models]
    P = len(models)
    sigma = np.empty((P, P))
    for i in range(P):
        for j in range(i, P):
            sigma[i, j] = sigma[j, i] = float(np.mean(res[i] * res[j]))
    return sigma

