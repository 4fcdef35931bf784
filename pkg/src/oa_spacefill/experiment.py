"""Replicated integration experiments and normality diagnostics.

Replicate ``r`` of an experiment is the design built from
``RandomStream(seed, r)``, so any single replicate can be rebuilt on its own.
Summary statistics are computed from the sorted sample with ``math.fsum``,
which makes them independent of replicate order and of how the work was
chunked.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .anova import decompose, evaluate_grid
from .design import Design, DesignKind, design_batch
from .errors import InputError, ResourceError
from .integrands import Integrand

MAX_EVALS = 10**9
CHUNK = 4096
HIST_BINS = 101
HIST_HALF_WIDTH = 5.0
NORMAL_MOMENTS = (0.0, 1.0, 0.0, 3.0, 0.0, 15.0)
SKEW_TOL = 0.1
KURT_TOL = 0.15
# asymptotic variance of the p-th standardised sample moment under normality
_MOMENT_VARIANCE = {3: 6.0, 4: 24.0, 5: 720.0, 6: 6120.0}
_HIGH_ORDER_Z = 6.0
MIN_R_LOW = 1000
MIN_R_HIGH = 20000


def estimate_mean(f, design):
    """``mu_hat = (1/N) sum_i f(X_i)``; columns beyond ``f.dim`` are ignored."""
    pts = design.points if isinstance(design, Design) else np.asarray(design, dtype=np.float64)
    vals = f.evaluate_checked(pts)
    return math.fsum(vals) / len(vals)


def replicate_means(f, kind, R, seed, oa=None, runs=None, streams=None, chunk=CHUNK,
                    max_evals=MAX_EVALS):
    """``mu_hat`` for ``R`` independent designs, replicate ``r`` on stream ``streams[r]``."""
    kind = DesignKind.parse(kind)
    R = int(R)
    streams = np.arange(R, dtype=np.uint64) if streams is None else np.asarray(streams, dtype=np.uint64)
    if streams.shape != (R,):
        raise InputError("need one stream id per replicate")
    N = oa.runs if oa is not None else int(runs)
    if R * N > max_evals:
        raise ResourceError(f"R*N = {R * N} evaluations exceeds cap {max_evals}")
    dim = f.dim if kind in (DesignKind.IID, DesignKind.LATIN_HYPERCUBE) else None
    out = np.empty(R)
    for start in range(0, R, chunk):
        st = streams[start:start + chunk]
        pts = design_batch(kind, seed, st, oa=oa, runs=N, dim=dim)
        vals = f.evaluate_checked(pts.reshape(-1, pts.shape[2])).reshape(len(st), N)
        out[start:start + len(st)] = vals.sum(axis=1) / N
    return out


@dataclass
class ExperimentReport:
    design: dict
    R: int
    N: int
    seed: int | None
    mu_ref: float | None
    samples: np.ndarray = field(repr=False)
    mean: float = 0.0
    var: float = 0.0
    standardized_moments: list | None = None
    degenerate: bool = False
    histogram: dict | None = field(default=None, repr=False)
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, samples, N=1, mu_ref=None, design=None, seed=None):
        s = np.sort(np.asarray(samples, dtype=np.float64))
        R = len(s)
        if R < 2:
            raise InputError("need at least two replicates")
        mean = math.fsum(s) / R
        dev = s - mean
        ss = math.fsum(dev**2)
        var = ss / (R - 1)
        sd0 = math.sqrt(ss / R)
        degenerate = not sd0 > 1e-14 * max(1.0, abs(mean))
        rep = cls(design or {}, R, int(N), seed, mu_ref, s, mean, var, None, degenerate)
        if not degenerate:
            t = dev / sd0
            rep.standardized_moments = [math.fsum(t**p) / R for p in range(1, 7)]
            rep.histogram = _histogram(s, mean, math.sqrt(var))
        else:
            rep.histogram = {"lo": mean, "hi": mean, "bins": [R]}
        return rep

    @property
    def n_var(self):
        """``N * var(mu_hat)``: the variance of ``sqrt(N) (mu_hat - mu)``."""
        return self.N * self.var

    @property
    def skewness(self):
        return None if self.degenerate else self.standardized_moments[2]

    @property
    def excess_kurtosis(self):
        return None if self.degenerate else self.standardized_moments[3] - 3.0

    def to_dict(self):
        d = {"design": self.design, "R": self.R, "N": self.N, "seed": self.seed,
             "mu_ref": self.mu_ref, "mean": self.mean, "var": self.var, "n_var": self.n_var,
             "bias": None if self.mu_ref is None else self.mean - self.mu_ref,
             "degenerate": self.degenerate,
             "standardized_moments": self.standardized_moments,
             "normal_moments": list(NORMAL_MOMENTS),
             "histogram": self.histogram,
             "diagnostics": self.diagnostics}
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def histogram_csv(self):
        h = self.histogram
        nb = len(h["bins"])
        width = (h["hi"] - h["lo"]) / nb if nb else 0.0
        lines = ["bin_center,count"]
        lines += [f"{h['lo'] + (i + 0.5) * width:.17g},{c}" for i, c in enumerate(h["bins"])]
        return "\n".join(lines) + "\n"


def _histogram(s, mean, sd, bins=HIST_BINS, half_width=HIST_HALF_WIDTH):
    # values beyond mean +- 5 sd land in the edge bins so counts sum to R
    lo, hi = mean - half_width * sd, mean + half_width * sd
    idx = np.floor((s - lo) / (hi - lo) * bins).astype(np.int64)
    counts = np.bincount(np.clip(idx, 0, bins - 1), minlength=bins)
    return {"lo": lo, "hi": hi, "bins": [int(c) for c in counts]}


def run_clt_experiment(f, oa, kind, R, seed, mu_ref, streams=None, max_evals=MAX_EVALS,
                       diagnose=True, predict=False):
    """Build R designs, compute ``mu_hat`` on each, summarise and run moment diagnostics.

    With ``predict`` the diagnostics also carry a ``variance_table`` setting the
    empirical ``N var(mu_hat)`` beside the ANOVA prediction.
    """
    kind = DesignKind.parse(kind)
    R = int(R)
    if R < 2:
        raise InputError("need R >= 2")
    if mu_ref is None or not math.isfinite(mu_ref):
        raise InputError("mu_ref must be finite")
    mu_hat = replicate_means(f, kind, R, seed, oa=oa, streams=streams, max_evals=max_evals)
    design = {"kind": kind.value, "integrand": f.name}
    if oa is not None:
        design["oa"] = {"name": oa.name, "params": list(oa.params), "index": oa.index}
    rep = ExperimentReport.from_samples(mu_hat, oa.runs, mu_ref, design, seed)
    if diagnose:
        moment_diagnostics(rep)
    if predict:
        attach_variance_table(rep, f, oa, kind)
    return rep


def attach_variance_table(report, f, oa, kind, m=None):
    kind = DesignKind.parse(kind)
    if kind is DesignKind.IID:
        pred, basis = _total_variance(f, m), "total variance"
    elif kind is DesignKind.LATIN_HYPERCUBE:
        pred, basis = anova_prediction(f, 1, m), "residual beyond main effects"
    else:
        pred, basis = anova_prediction(f, oa.strength, m), f"residual beyond order {oa.strength}"
    report.diagnostics["variance_table"] = [{"kind": kind.value, "n_var": report.n_var,
                                             "predicted": pred, "basis": basis}]
    return report.diagnostics


def moment_diagnostics(report, skew_tol=SKEW_TOL, kurt_tol=KURT_TOL):
    """Compare standardised moments 3..6 with the normal values 0, 3, 0, 15.

    Orders 3 and 4 use the fixed thresholds; orders 5 and 6 use six
    normal-theory standard errors. An order is skipped (``passed`` None)
    when R is too small for it to mean anything.
    """
    if not isinstance(report, ExperimentReport):
        report = ExperimentReport.from_samples(report)
    R = report.R
    out = {}
    if report.degenerate:
        report.diagnostics = {"degenerate": True, "skew_pass": None, "kurt_pass": None,
                              "passed": None, "orders": {}}
        return report.diagnostics
    for p in (3, 4, 5, 6):
        value = report.standardized_moments[p - 1]
        target = NORMAL_MOMENTS[p - 1]
        if p == 3:
            tol = skew_tol
        elif p == 4:
            tol = kurt_tol
        else:
            tol = _HIGH_ORDER_Z * math.sqrt(_MOMENT_VARIANCE[p] / R)
        enough = R >= (MIN_R_LOW if p <= 4 else MIN_R_HIGH)
        passed = abs(value - target) < tol if enough else None
        out[p] = {"value": value, "target": target, "tol": tol, "passed": passed}
    evaluated = [o["passed"] for o in out.values() if o["passed"] is not None]
    report.diagnostics = {
        "degenerate": False,
        "skew_pass": out[3]["passed"],
        "kurt_pass": out[4]["passed"],
        "passed": all(evaluated) if evaluated else None,
        "orders": {str(p): o for p, o in out.items()},
    }
    return report.diagnostics


@dataclass
class VarianceRow:
    kind: str
    mean: float
    n_var: float
    predicted: float | None
    basis: str


def _anova_grid(K, budget=10**7):
    return max(2, min(256, int(math.floor(budget ** (1.0 / K) + 1e-9))))


def anova_prediction(f, h, m=None):
    """Predicted ``N var(mu_hat)`` for a strength-h OA design: the residual mean square.

    When ``h >= f.dim`` the residual is identically zero.
    """
    if h >= f.dim:
        return 0.0
    model = decompose(f, f.dim, h, m or _anova_grid(f.dim))
    return model.sigma2


def _total_variance(f, m=None):
    if f.dim == 1:
        return float(np.var(evaluate_grid(f, 1, m or 4096)))
    return decompose(f, f.dim, 1, m or _anova_grid(f.dim)).total_variance


def variance_comparison(f, oa, R, seed, m=None):
    """``N var(mu_hat)`` for iid, Latin hypercube, randomised OA and U design side by side."""
    R = int(R)
    if R < MIN_R_LOW:
        raise InputError(f"need R >= {MIN_R_LOW}")
    m = m or _anova_grid(f.dim)
    grid_model = decompose(f, f.dim, 1, m) if f.dim > 1 else None
    total = grid_model.total_variance if grid_model is not None else None
    lhs_pred = grid_model.sigma2 if grid_model is not None else 0.0
    oa_pred = anova_prediction(f, oa.strength, m)
    plan = [(DesignKind.IID, total, "total variance"),
            (DesignKind.LATIN_HYPERCUBE, lhs_pred, "residual beyond main effects"),
            (DesignKind.RANDOMIZED_OA, oa_pred, f"residual beyond order {oa.strength}"),
            (DesignKind.U_DESIGN, oa_pred, f"residual beyond order {oa.strength}")]
    rows = []
    for kind, pred, basis in plan:
        mu_hat = replicate_means(f, kind, R, seed, oa=oa)
        rep = ExperimentReport.from_samples(mu_hat, oa.runs)
        rows.append(VarianceRow(kind.value, rep.mean, rep.n_var, pred, basis))
    return rows


def variance_table_dict(rows):
    return [{"kind": r.kind, "mean": r.mean, "n_var": r.n_var, "predicted": r.predicted,
             "basis": r.basis} for r in rows]


# -- reference means -------------------------------------------------------------

def reference_mean_lhs(f, N, seed=0, stream=0, chunk=1 << 20):
    """Mean of ``f`` over one N-point Latin hypercube."""
    pts = design_batch(DesignKind.LATIN_HYPERCUBE, seed, [stream], runs=int(N), dim=f.dim)[0]
    parts = [math.fsum(f.evaluate_checked(pts[i:i + chunk])) for i in range(0, len(pts), chunk)]
    return math.fsum(parts) / len(pts)


def reference_mean_grid(f, total_points):
    """Midpoint-rule mean on the tensor grid with about ``total_points`` nodes."""
    m = int(round(total_points ** (1.0 / f.dim)))
    nodes = (np.arange(m) + 0.5) / m
    rest = np.stack(np.meshgrid(*([nodes] * (f.dim - 1)), indexing="ij"), -1).reshape(-1, f.dim - 1)
    parts = []
    for x0 in nodes:
        pts = np.column_stack([np.full(len(rest), x0), rest])
        parts.append(math.fsum(f.evaluate_checked(pts)))
    return math.fsum(parts) / m**f.dim, m


__all__ = ["ExperimentReport", "Integrand", "VarianceRow", "anova_prediction", "estimate_mean",
           "moment_diagnostics", "reference_mean_grid", "reference_mean_lhs", "replicate_means",
           "run_clt_experiment", "variance_comparison"]
