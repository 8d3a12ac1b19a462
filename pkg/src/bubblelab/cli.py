"""Command-line entry point: ``bubblelab <command> [options]``.

Exit codes: 0 all checks pass, 1 a quantitative check failed, 2 bad
configuration or missing inputs (including a missing golden baseline).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import __version__
from . import torus as T

log = logging.getLogger("bubblelab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
REFREEZE_ENV = "ABL_REFREEZE_ACK"
THREADS_ENV = "ABL_THREADS"


class ConfigError(ValueError):
    pass


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    return [float(v) for v in str(s).replace(" ", "").split(",") if v]


@dataclass
class RunConfig:
    n: int = 512
    alpha: float = 1.01
    alphas: list = field(default_factory=lambda: [1.04, 1.02, 1.01])
    init_lambda: float | None = None
    lambdas: list = field(default_factory=lambda: [20.0, 28.0, 40.0, 56.0, 80.0, 113.0, 160.0, 200.0])
    a: list = field(default_factory=lambda: [0.0, 0.0])
    tol_residual: float = 1e-6
    max_iters: int = 5000
    precondition: bool = True
    method: str = "cg"
    checkpoint_every: int = 0
    samples: int = 100
    seed: int = 0
    threads: int = 1
    out: str = "out"
    golden: str | None = None
    ewald_eta: float = 2.0
    ewald_tol: float = 1e-14
    quick: bool = False

    def validate(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ConfigError(f"n must be a power of two >= 8, got {self.n}")
        for al in [self.alpha] + list(self.alphas):
            if not 1.0 < al <= 2.0:
                raise ConfigError(f"alpha must lie in (1, 2], got {al}")
        if any(lam <= 4 for lam in self.lambdas) or (self.init_lambda is not None and self.init_lambda <= 4):
            raise ConfigError("all lambda values must exceed lambda_min = 4")
        if self.tol_residual <= 0 or self.max_iters < 0 or self.samples < 1:
            raise ConfigError("tol_residual > 0, max_iters >= 0 and samples >= 1 are required")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.method not in ("cg", "gd"):
            raise ConfigError(f"method must be cg or gd, got {self.method}")
        if not (0 < self.ewald_tol < 1 and self.ewald_eta > 0):
            raise ConfigError("ewald_tol must lie in (0, 1) and ewald_eta must be positive")
        if len(self.a) != 2:
            raise ConfigError("a needs two coordinates")
        return self


_CASTS = {
    "n": int, "alpha": float, "alphas": _floats, "init_lambda": float, "lambdas": _floats, "a": _floats,
    "tol_residual": float, "max_iters": int, "checkpoint_every": int, "samples": int, "seed": int,
    "threads": int, "out": str, "golden": str, "ewald_eta": float, "ewald_tol": float, "method": str,
    "precondition": lambda s: str(s).lower() in ("1", "true", "yes", "on"),
    "quick": lambda s: str(s).lower() in ("1", "true", "yes", "on"),
}


def parse_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment.  Unknown keys are rejected."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CASTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CASTS[key](val)
        except ValueError as e:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {e}") from None
    return out


def build_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    known = {f.name for f in fields(RunConfig)}
    for k, v in vars(args).items():
        if k in known and v is not None:
            values[k] = _CASTS[k](v) if isinstance(v, str) and k not in ("out", "golden", "method") else v
    if THREADS_ENV in os.environ:
        values["threads"] = int(os.environ[THREADS_ENV])
    return RunConfig(**values).validate()


# ----------------------------------------------------------------------------
# output helpers


def _outdir(cfg) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def write_csv(path, rows: list[dict], command: str, seed: int):
    path = Path(path)
    cols = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        fh.write(f"# bubblelab {command} {__version__} seed={seed}\n")
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return path


def _jsonable(o):
    if isinstance(o, dict):
        return {k: _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    return o


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n")


def _check(name, ok, value, target):
    return {"name": name, "passed": bool(ok), "value": _jsonable(value), "target": target}


def _verdict(checks) -> int:
    for c in checks:
        level = logging.INFO if c["passed"] else logging.WARNING
        log.log(level, "%s %s: %s (target %s)", "PASS" if c["passed"] else "FAIL", c["name"], c["value"], c["target"])
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_FAIL


# ----------------------------------------------------------------------------
# golden constants


def golden_path(cfg) -> Path:
    from . import golden

    return Path(cfg.golden) if cfg.golden else golden.default_path()


def load_golden(cfg) -> dict:
    from . import golden

    return golden.load(golden_path(cfg))


def _require_refreeze_ack():
    if os.environ.get(REFREEZE_ENV) != "1":
        raise ConfigError(f"--refreeze requires {REFREEZE_ENV}=1 in the environment")


def refreeze(cfg, updates: dict, grid: str):
    _require_refreeze_ack()
    from . import golden

    golden.update_golden(golden_path(cfg), updates, grid=grid)


# ----------------------------------------------------------------------------
# commands


def cmd_greens_check(cfg, args) -> int:
    from .greens import GreensTorus, weak_form_residual

    g = GreensTorus(eta=cfg.ewald_eta, tol=cfg.ewald_tol)
    rng = np.random.default_rng(cfg.seed)
    pts = rng.uniform(0, 1, (10, 2))
    jays = np.array([g.jay(a) for a in pts])
    gy0 = g.grad_y_J(np.zeros((1, 2)))[0]
    # harmonicity of x -> d_{y^i} J(x, 0) = -d_i H(x): its Laplacian is -d_i Lap H
    xs = rng.uniform(-0.45, 0.45, (200, 2))
    third = g.regular_jet(xs, 3).third
    harm = np.abs(-(third[:, :, 0, 0] + third[:, :, 1, 1])).max()
    pde = weak_form_residual(g, rng)
    checks = [
        _check("jay_equals_minus_2pi", np.abs(jays + 2 * np.pi).max() < 1e-4, float(np.abs(jays + 2 * np.pi).max()), "< 1e-4"),
        _check("grad_y_J_at_origin", np.abs(gy0).max() < 1e-8, float(np.abs(gy0).max()), "< 1e-8"),
        _check("harmonicity_of_grad_y_J", harm < 1e-6, float(harm), "< 1e-6"),
        _check("weak_pde_residual", pde < 1e-5, pde, "< 1e-5"),
    ]
    report = {"command": "greens-check", "version": __version__, "seed": cfg.seed, "checks": checks}
    if args.json:
        print(json.dumps(_jsonable(report), indent=1))
    write_json(_outdir(cfg) / "greens_check.json", report)
    return _verdict(checks)


def _verify_checks(recs, golden, cfg):
    from . import expansions as X

    checks = []
    if "lemma21" in recs:
        r = recs["lemma21"]
        tiny = [x for x in r if abs(x.alpha - 1 - 1e-6) < 1e-12]
        slope = X.loglog_slope([x.lam for x in tiny], [x.lemma21_residual for x in tiny])
        checks.append(_check("lemma21_slope", -2.3 <= slope <= -1.7, slope, "[-2.3, -1.7]"))
        C = max(abs(x.lemma21_residual) * x.lam**2 for x in tiny)
        cg = golden["lemma21"]["C_lambda2"]
        checks.append(_check("lemma21_constant_regression", C <= 1.2 * cg, C, f"<= 1.2 * {cg:.6g}"))
        cor = X.corollary22_check(r)
        checks.append(_check("corollary22", cor["passed"], len(cor["violations"]), "0 violations"))
    if "prop41" in recs:
        r = recs["prop41"]
        tiny = [x for x in r if abs(x.alpha - 1 - 1e-6) < 1e-12]
        slope = X.loglog_slope([x.lam for x in tiny], [x.prop41_defect for x in tiny])
        checks.append(_check("prop41_defect_slope", -3.4 <= slope <= -2.6, slope, "[-3.4, -2.6]"))
        at40 = [x for x in tiny if x.lam == 40.0]
        if at40:
            ratio = at40[0].d_lambda_e * 40.0**3 / (-16 * np.pi**2)
            checks.append(_check("prop41_leading_at_40", abs(ratio - 1) <= 0.1, ratio, "1 +- 0.1"))
        roots = recs.get("prop41_roots", [])
        for am, lam_star in roots:
            target = np.sqrt(2 * np.pi / am)
            checks.append(_check(f"prop41_root_{am:g}", abs(lam_star / target - 1) <= 0.05, lam_star / target, "1 +- 0.05"))
        if len(roots) >= 3:
            s = X.loglog_slope([am for am, _ in roots], [l for _, l in roots])
            checks.append(_check("prop41_root_scaling", abs(s + 0.5) <= 0.05, s, "-0.5 +- 0.05"))
    if "prop42" in recs:
        r = recs["prop42"]
        C = max(x.prop42_scaled / (1 / x.lam + x.lam * (x.alpha - 1)) for x in r)
        cg = golden["prop42"]["C_bound"]
        checks.append(_check("prop42_bound", C <= cg, C, f"<= {cg:.6g}"))
        tiny = [x for x in r if abs(x.alpha - 1 - 1e-6) < 1e-12]
        slope = X.loglog_slope([x.lam for x in tiny], [x.prop42_scaled for x in tiny])
        checks.append(_check("prop42_decay_slope", -1.4 <= slope <= -0.6, slope, "[-1.4, -0.6]"))
    return checks


def cmd_verify(cfg, args) -> int:
    from . import expansions as X

    try:
        golden = load_golden(cfg)
    except FileNotFoundError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    which = [k for k in ("lemma21", "prop41", "prop42") if getattr(args, k)] or ["lemma21", "prop41", "prop42"]
    lams = cfg.lambdas if not cfg.quick else [20.0, 40.0, 80.0, 160.0]
    out = _outdir(cfg)
    recs = {}
    if "lemma21" in which:
        alphas = [1 + 1e-6] + ([] if cfg.quick else [1.0001, 1.01, 1.04])
        recs["lemma21"] = X.lemma21_sweep(lams, alphas)
        write_csv(out / "lemma21.csv", [r.row() for r in recs["lemma21"]], "verify-expansions --lemma21", cfg.seed)
    if "prop41" in which:
        recs["prop41"] = X.prop41_sweep(lams, [1 + 1e-6])
        write_csv(out / "prop41.csv", [r.row() for r in recs["prop41"]], "verify-expansions --prop41", cfg.seed)
        roots = []
        for am in ([0.01] if cfg.quick else [0.04, 0.01, 0.0025]):
            guess = np.sqrt(2 * np.pi / am)
            roots.append((am, X.zero_crossing(1 + am, max(4.5, 0.8 * guess), 2.0 * guess, tol=1e-3)))
        recs["prop41_roots"] = roots
        write_csv(out / "prop41_roots.csv",
                  [{"alpha_minus_1": am, "lambda_star": l, "predicted": np.sqrt(2 * np.pi / am)} for am, l in roots],
                  "verify-expansions --prop41", cfg.seed)
    if "prop42" in which:
        recs["prop42"] = X.prop42_sweep(lams, [1 + 1e-6, 1.01])
        write_csv(out / "prop42.csv", [r.row() for r in recs["prop42"]], "verify-expansions --prop42", cfg.seed)
    checks = _verify_checks(recs, golden, cfg)
    write_json(out / "verify_summary.json", {"command": "verify-expansions", "version": __version__,
                                              "seed": cfg.seed, "checks": checks})
    if args.refreeze:
        upd = {}
        if "lemma21" in recs:
            tiny = [x for x in recs["lemma21"] if abs(x.alpha - 1 - 1e-6) < 1e-12]
            upd["lemma21"] = {"C_lambda2": max(abs(x.lemma21_residual) * x.lam**2 for x in tiny)}
        if "prop42" in recs:
            upd["prop42"] = {"C_bound": 10 * max(x.prop42_scaled / (1 / x.lam + x.lam * (x.alpha - 1))
                                                 for x in recs["prop42"])}
        refreeze(cfg, upd, grid=f"lambdas={lams}")
    return _verdict(checks)


def _solver_cfg(cfg, alpha, init):
    from .solver import SolverConfig

    return SolverConfig(n=cfg.n, alpha=alpha, init=init, tol_residual=cfg.tol_residual, max_iters=cfg.max_iters,
                        precondition=cfg.precondition, method=cfg.method, checkpoint_every=cfg.checkpoint_every,
                        checkpoint_dir=str(_outdir(cfg) / "checkpoints") if cfg.checkpoint_every else None)


def cmd_solve(cfg, args) -> int:
    from .bubble import BubbleParams
    from .solver import solve

    init = args.init_file or BubbleParams(cfg.init_lambda or 0.6 * np.sqrt(2 * np.pi / (cfg.alpha - 1)))
    scfg = _solver_cfg(cfg, cfg.alpha, init)
    rec, u = solve(scfg, resume=args.resume)
    out = _outdir(cfg)
    T.write_grid_binary(out / "solution.bin", u)
    d = rec.to_dict()
    d.update(command="solve", version=__version__, seed=cfg.seed)
    write_json(args.record or (out / "run.json"), d)
    ratio = rec.lam * np.sqrt((cfg.alpha - 1) / (2 * np.pi))
    checks = [_check("converged", rec.converged, rec.residual, f"<= {cfg.tol_residual:g}"),
              _check("degree", abs(rec.degree) == 1, rec.degree, "+-1"),
              _check("scale_law", 0.8 <= ratio <= 1.25, ratio, "[0.8, 1.25]")]
    return _verdict(checks)


def cmd_sweep(cfg, args) -> int:
    from .solver import alpha_sweep

    template = _solver_cfg(cfg, cfg.alphas[0], None)
    recs, slope = alpha_sweep(cfg.alphas, template, warm_start=args.warm_start)
    out = _outdir(cfg)
    rows = []
    for r in recs:
        d = r.to_dict()
        d.pop("history")
        d["a"] = ";".join(f"{v:.12g}" for v in d["a"])
        d["R"] = ";".join(f"{v:.12g}" for v in np.ravel(d["R"]))
        d["scale_ratio"] = r.lam * np.sqrt((r.alpha - 1) / (2 * np.pi))
        rows.append(d)
    write_csv(out / "sweep.csv", rows, "sweep", cfg.seed)
    checks = [_check("slope", abs(slope + 0.5) <= 0.1, slope, "-0.5 +- 0.1")]
    checks += [_check(f"scale_law_{r['alpha']:g}", 0.8 <= r["scale_ratio"] <= 1.25, r["scale_ratio"], "[0.8, 1.25]")
               for r in rows]
    checks += [_check(f"converged_{r.alpha:g}", r.converged and abs(r.degree) == 1, r.residual, "residual, degree +-1")
               for r in recs]
    write_json(out / "sweep_summary.json", {"command": "sweep", "version": __version__, "seed": cfg.seed,
                                             "slope": slope, "checks": checks})
    return _verdict(checks)


def _read_field(path):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"input field {p} not found")
    return (T.read_grid_csv(p) if p.suffix == ".csv" else T.read_grid_binary(p)).values


def cmd_project(cfg, args) -> int:
    from .projection import project_to_Z, theorem1_defect

    u = _read_field(args.input)
    r = project_to_Z(u, seed=cfg.seed)
    defect, ratio = theorem1_defect(r, cfg.alpha)
    d = asdict(r)
    d["params"] = {"lam": r.params.lam, "a": list(r.params.a), "R": r.params.R.tolist()}
    d.update(command="project", version=__version__, alpha=cfg.alpha, theorem1_defect=defect, theorem1_ratio=ratio)
    write_json(args.record or (_outdir(cfg) / "proj.json"), d)
    return _verdict([_check("converged", r.converged, r.iterations, "simplex + polish converge")])


def cmd_bubble_dump(cfg, args) -> int:
    from .bubble import BubbleParams, bubble_grid

    p = BubbleParams(cfg.init_lambda or 20.0, tuple(cfg.a))
    z = bubble_grid(p, cfg.n)
    target = Path(args.field or (_outdir(cfg) / "bubble.bin"))
    (T.write_grid_csv if target.suffix == ".csv" else T.write_grid_binary)(target, z)
    return EXIT_OK


def cmd_energy_report(cfg, args) -> int:
    from .energy import energy_report

    u = _read_field(args.input)
    rep = energy_report(u, cfg.alpha).to_dict()
    rep.update(command="energy-report", version=__version__)
    write_json(_outdir(cfg) / "energy_report.json", rep)
    print(json.dumps(_jsonable(rep), indent=1))
    return EXIT_OK


def cmd_hessian_gap(cfg, args) -> int:
    from .bubble import BubbleParams
    from .energy import hessian_gap

    try:
        golden = load_golden(cfg)
    except FileNotFoundError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    lam = cfg.init_lambda or 25.0
    gap = hessian_gap(BubbleParams(lam), cfg.alpha, samples=cfg.samples, n=cfg.n,
                      rng=np.random.default_rng(cfg.seed))
    ref = golden["hessian_gap"]["value"]
    checks = [_check("positive", gap > 0, gap, "> 0")]
    if args.refreeze:
        refreeze(cfg, {"hessian_gap": {"value": gap, "lambda": lam, "alpha": cfg.alpha, "n": cfg.n,
                                       "samples": cfg.samples, "seed": cfg.seed}}, grid=f"n={cfg.n}")
    else:
        checks.append(_check("regression_20pct", abs(gap / ref - 1) <= 0.2, gap, f"{ref:.6g} +- 20%"))
    write_json(_outdir(cfg) / "hessian_gap.json", {"command": "hessian-gap", "version": __version__,
                                                    "seed": cfg.seed, "gap": gap, "checks": checks})
    return _verdict(checks)


COMMANDS = {
    "greens-check": cmd_greens_check,
    "verify-expansions": cmd_verify,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "project": cmd_project,
    "bubble-dump": cmd_bubble_dump,
    "energy-report": cmd_energy_report,
    "hessian-gap": cmd_hessian_gap,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bubblelab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"bubblelab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--golden", help="golden constants file")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = common(sub.add_parser("greens-check", help="Green's function and Robin-quantity checks"))
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--ewald-tol", dest="ewald_tol", type=float)
    p.add_argument("--ewald-eta", dest="ewald_eta", type=float)

    p = common(sub.add_parser("verify-expansions", help="energy expansions on the bubble set"))
    for k in ("lemma21", "prop41", "prop42"):
        p.add_argument(f"--{k}", action="store_true")
    p.add_argument("--quick", action="store_true", default=None)
    p.add_argument("--lambdas")
    p.add_argument("--refreeze", action="store_true")

    p = common(sub.add_parser("solve", help="minimise E_alpha from a bubble or a grid file"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--init-lambda", dest="init_lambda", type=float)
    p.add_argument("--init-file", dest="init_file")
    p.add_argument("--tol", dest="tol_residual", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--method", choices=["cg", "gd"])
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--record", help="path of the JSON run record (default <out>/run.json)")

    p = common(sub.add_parser("sweep", help="solve over several alphas and fit the scale law"))
    p.add_argument("--alphas")
    p.add_argument("--n", type=int)
    p.add_argument("--tol", dest="tol_residual", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--warm-start", action="store_true")

    p = common(sub.add_parser("project", help="closest bubble to a grid field"))
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--record", help="path of the JSON result (default <out>/proj.json)")

    p = common(sub.add_parser("bubble-dump", help="write z_{lambda,a} on a grid"))
    p.add_argument("--lambda", dest="init_lambda", type=float)
    p.add_argument("--a", help="centre as a1,a2")
    p.add_argument("--n", type=int)
    p.add_argument("--field", help="output file (.bin or .csv)")

    p = common(sub.add_parser("energy-report", help="energy, residual and degree of a grid field"))
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alpha", type=float)

    p = common(sub.add_parser("hessian-gap", help="sampled normal Hessian gap at a bubble"))
    p.add_argument("--lambda", dest="init_lambda", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--refreeze", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    for k in ("quick", "refreeze", "resume", "warm_start", "json"):
        if not hasattr(args, k):
            setattr(args, k, None)
    try:
        cfg = build_config(args)
        if args.refreeze:
            # refuse before any expensive work
            _require_refreeze_ack()
    except (ConfigError, ValueError, OSError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("bubblelab %s %s seed=%d threads=%d", __version__, args.command, cfg.seed, cfg.threads)
    try:
        with sfft.set_workers(cfg.threads):
            code = COMMANDS[args.command](cfg, args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_FAIL
    except RuntimeError as e:
        print(f"run failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    if code == EXIT_FAIL:
        print("one or more checks failed (see the JSON summary)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
