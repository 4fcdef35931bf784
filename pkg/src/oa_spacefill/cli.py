"""``oa-spacefill`` command line.

Exit codes: 0 success, 2 semantic failure (certification, audit or
diagnostic failed), 3 input error. Every command is a pure function of its
flags; randomness comes only from ``--seed`` (or ``OA_SPACEFILL_SEED``).
"""
import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from ._jit import set_threads
from .anova import decompose
from .design import DesignKind, build_design, design_metadata_json, design_to_csv, read_design_csv
from .errors import InputError, ParseError, ResourceError
from .experiment import attach_variance_table, moment_diagnostics, run_clt_experiment, variance_comparison, variance_table_dict
from .integrands import get_integrand
from .oa import OrthogonalArray, builtin, certify, parse_oa_text
from .rng import RandomStream
from .stratify import audit_cells

EXIT_OK = 0
EXIT_FAIL = 2
EXIT_INPUT = 3
SEED_ENV = "OA_SPACEFILL_SEED"


@dataclass
class RunConfig:
    command: str | None = None
    builtin: str | None = None
    file: str | None = None
    design: str | None = None
    out: str | None = None
    meta: str | None = None
    hist: str | None = None
    tables: str | None = None
    seed: int | None = None
    stream: int | None = None
    kind: str | None = None
    runs: int | None = None
    dim: int | None = None
    integrand: str | None = None
    variant: str | None = None
    value: float | None = None
    r: int | None = None
    m: int | None = None
    k: int | None = None
    h: int | None = None
    u: str | None = None
    z: int | None = None
    mu_ref: float | None = None
    skew_tol: float | None = None
    kurt_tol: float | None = None
    threads: int | None = None
    no_predict: bool | None = None

    def to_json(self):
        return json.dumps({k: v for k, v in asdict(self).items() if v is not None}, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


DEFAULTS = {"seed": 0, "stream": 0, "kind": "roa", "variant": "standard", "value": 1.0,
            "r": 20000, "m": 64, "skew_tol": 0.1, "kurt_tol": 0.15}


def _resolve(args):
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            cfg = RunConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}") from None
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            setattr(cfg, f.name, val)
    cfg.command = args.command
    if cfg.seed is None and os.environ.get(SEED_ENV):
        try:
            cfg.seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer") from None
    for key, val in DEFAULTS.items():
        if getattr(cfg, key) is None:
            setattr(cfg, key, val)
    return cfg


def _load_matrix(cfg):
    """Matrix, n, h from --builtin or --file (no certification yet)."""
    if cfg.builtin:
        oa = builtin(cfg.builtin.removeprefix("builtin:"))
        return oa.entries, oa.levels, oa.strength, oa.name
    if cfg.file:
        try:
            text = Path(cfg.file).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {cfg.file}: {exc}") from None
        H, n, h = parse_oa_text(text)
        return H, n, h, Path(cfg.file).name
    raise InputError("give --builtin or --file")


def _load_oa(cfg):
    H, n, h, name = _load_matrix(cfg)
    return OrthogonalArray.certify(H, n, h, name=name)


def _emit(text, path):
    if path and path != "-":
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(cfg):
    H, n, h, _ = _load_matrix(cfg)
    res = certify(H, n, h)
    _emit(json.dumps(res.to_dict(), indent=2) + "\n", cfg.out)
    return EXIT_OK if res.is_oa and res.coincidence_defect_free else EXIT_FAIL


def cmd_generate(cfg):
    kind = DesignKind.parse(cfg.kind)
    oa = None
    if kind in (DesignKind.RANDOMIZED_OA, DesignKind.U_DESIGN) or cfg.builtin or cfg.file:
        H, n, h, name = _load_matrix(cfg)
        try:
            oa = OrthogonalArray.certify(H, n, h, name=name)
        except InputError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
    design = build_design(kind, RandomStream(cfg.seed, cfg.stream), oa=oa, runs=cfg.runs, dim=cfg.dim)
    _emit(design_to_csv(design), cfg.out)
    if cfg.meta:
        Path(cfg.meta).write_text(design_metadata_json(design), encoding="utf-8")
    return EXIT_OK


def _parse_u(text):
    try:
        return tuple(int(c) for c in str(text).split(","))
    except ValueError:
        raise InputError(f"bad column list {text!r}") from None


def cmd_audit(cfg):
    if cfg.u is None or cfg.z is None:
        raise InputError("audit needs --u and --z")
    if cfg.design in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            text = Path(cfg.design).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {cfg.design}: {exc}") from None
    rep = audit_cells(read_design_csv(text), _parse_u(cfg.u), cfg.z)
    _emit(rep.to_json(), cfg.out)
    return EXIT_OK if rep.uniform else EXIT_FAIL


def _integrand(cfg):
    if not cfg.integrand:
        raise InputError("give --integrand")
    return get_integrand(cfg.integrand, dim=cfg.k, variant=cfg.variant, value=cfg.value)


def cmd_anova(cfg):
    f = _integrand(cfg)
    K = cfg.k or f.dim
    if cfg.h is None:
        raise InputError("anova needs --h")
    model = decompose(f, K, cfg.h, cfg.m)
    _emit(model.to_json(), cfg.out)
    if cfg.tables:
        model.write_effect_tables(cfg.tables)
    return EXIT_OK


def cmd_clt(cfg):
    f = _integrand(cfg)
    oa = _load_oa(cfg)
    mu_ref = cfg.mu_ref if cfg.mu_ref is not None else f.mu_ref
    if mu_ref is None:
        raise InputError(f"no reference mean for {f.name}; pass --mu-ref")
    rep = run_clt_experiment(f, oa, cfg.kind, cfg.r, cfg.seed, mu_ref, diagnose=False)
    diag = moment_diagnostics(rep, cfg.skew_tol, cfg.kurt_tol)
    if not cfg.no_predict:
        attach_variance_table(rep, f, oa, cfg.kind)
    _emit(rep.to_json(), cfg.out)
    if cfg.hist:
        Path(cfg.hist).write_text(rep.histogram_csv(), encoding="utf-8")
    if diag["degenerate"]:
        return EXIT_OK
    return EXIT_OK if diag["skew_pass"] and diag["kurt_pass"] else EXIT_FAIL


def cmd_variance(cfg):
    f = _integrand(cfg)
    oa = _load_oa(cfg)
    rows = variance_comparison(f, oa, cfg.r, cfg.seed)
    _emit(json.dumps({"integrand": f.name, "oa": oa.name, "R": cfg.r, "seed": cfg.seed,
                      "rows": variance_table_dict(rows)}, indent=2) + "\n", cfg.out)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "generate": cmd_generate, "audit": cmd_audit,
            "anova": cmd_anova, "clt": cmd_clt, "variance": cmd_variance}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="RunConfig JSON; explicit flags override it")
    common.add_argument("--save-config", help="write the resolved config here")
    common.add_argument("--out", help="primary output file (default stdout)")
    common.add_argument("--seed", type=int, help=f"master seed (fallback ${SEED_ENV}, then 0)")
    common.add_argument("--threads", type=int, help="cap on numba worker threads")

    oa_src = argparse.ArgumentParser(add_help=False)
    oa_src.add_argument("--builtin", help="table1 or rao_hamming:p:k")
    oa_src.add_argument("--file", help="OA text file ('N K n h' header)")

    integ = argparse.ArgumentParser(add_help=False)
    integ.add_argument("--integrand", help="cox, branin, constant, additive, product2, product13, ...")
    integ.add_argument("--variant", choices=["standard", "printed"])
    integ.add_argument("--value", type=float, help="value of the constant integrand")

    ap = argparse.ArgumentParser(prog="oa-spacefill",
                                 description="Orthogonal-array designs, functional ANOVA and CLT experiments.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common, oa_src], help="certify an orthogonal array")

    p = sub.add_parser("generate", parents=[common, oa_src], help="write a design as CSV")
    p.add_argument("--kind", help="roa, u-design, lhs or iid")
    p.add_argument("--stream", type=int, help="stream id (default 0)")
    p.add_argument("--runs", type=int, help="run count for lhs/iid without an OA")
    p.add_argument("--dim", type=int, help="dimension for lhs/iid without an OA")
    p.add_argument("--meta", help="metadata sidecar JSON path")

    p = sub.add_parser("audit", parents=[common], help="count points per cell")
    p.add_argument("design", nargs="?", help="design CSV (default stdin)")
    p.add_argument("--u", help="1-based columns, e.g. 1,2")
    p.add_argument("--z", type=int, help="grain")

    p = sub.add_parser("anova", parents=[common, integ], help="functional ANOVA residual variance")
    p.add_argument("--k", type=int, help="dimension")
    p.add_argument("--h", type=int, help="strength (effects of order <= h removed)")
    p.add_argument("--m", type=int, help="grid points per axis (default 64)")
    p.add_argument("--tables", help="directory for per-effect CSV tables")

    p = sub.add_parser("clt", parents=[common, oa_src, integ], help="replicated CLT experiment")
    p.add_argument("--kind", help="roa, u-design, lhs or iid")
    p.add_argument("--r", type=int, help="replicates (default 20000)")
    p.add_argument("--mu-ref", type=float, dest="mu_ref")
    p.add_argument("--hist", help="histogram CSV path")
    p.add_argument("--skew-tol", type=float, dest="skew_tol")
    p.add_argument("--kurt-tol", type=float, dest="kurt_tol")
    p.add_argument("--no-predict", action="store_true", default=None, dest="no_predict",
                   help="skip the ANOVA variance prediction")

    p = sub.add_parser("variance", parents=[common, oa_src, integ], help="N var(mu_hat) by design kind")
    p.add_argument("--r", type=int, help="replicates (default 20000)")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.save_config:
            Path(args.save_config).write_text(cfg.to_json(), encoding="utf-8")
        set_threads(cfg.threads)
        return COMMANDS[cfg.command](cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
