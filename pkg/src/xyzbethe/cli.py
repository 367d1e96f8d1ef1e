"""Command-line harness: ``theta``, ``model``, ``solve-bethe``, ``scalar-product``, ``verify``.

Exit codes: 0 all checks pass, 2 usage or config error, 3 tolerance failure,
4 construction or internal error.
"""

from __future__ import annotations

import argparse
import fnmatch
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import checks as registry
from .bethe import solve_bethe_roots, surviving_sector
from .errors import RootCountMismatch, TwinPairingFailure, XYZBetheError
from .gauge import GaugeParams, sample_gauge
from .theta import ModularContext, eval_theta, eval_theta_derivative
from .vertex import ModelParams, couplings, rtt_residual

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE, EXIT_ERROR = 0, 2, 3, 4
SCHEMA_VERSION = 1

DEFAULT_CONFIG = {
    "schema": SCHEMA_VERSION,
    "seed": 0,
    "N": [2, 4],
    "tau": [0.1, 0.8],
    "eta": "1/2",
    "xi": "random",
    "gauge": "random",
    "nu": 1,
    "lambda": None,
    "kappa": [-2, -1, 0, 1, 2],
    "tolerances": {},
}

_KAPPA_CHECKS = {
    0: ("scalar.balanced-eps", "scalar.balanced-components", "scalar.symmetry"),
    1: ("scalar.plus1", "scalar.plus1-route"),
    -1: ("scalar.minus1",),
    2: ("scalar.prop1",),
    -2: ("scalar.prop1",),
}


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- config


def _complex(value, field):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{field}: expected a number or a [re, im] pair, got {value!r}")


def _int(value, field):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{field}: expected an integer, got {value!r}")
    return value


def _chain_length(value, field):
    N = _int(value, field)
    if N < 2 or N % 2:
        raise ConfigError(f"{field}: N must be even and at least 2 (chains have an even number of sites), got {N}")
    return N


def load_config(path=None) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        unknown = sorted(set(raw) - set(DEFAULT_CONFIG))
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown field")
        if raw.get("schema") != SCHEMA_VERSION:
            raise ConfigError(f"schema: expected {SCHEMA_VERSION}, got {raw.get('schema')!r}")
        cfg.update(raw)
    return validate_config(cfg)


def validate_config(cfg: dict) -> dict:
    out = dict(cfg)
    out["seed"] = _int(cfg["seed"], "seed")
    Ns = cfg["N"] if isinstance(cfg["N"], list) else [cfg["N"]]
    if not Ns:
        raise ConfigError("N: empty list")
    out["N"] = sorted({_chain_length(N, f"N[{i}]") for i, N in enumerate(Ns)})
    tau = _complex(cfg["tau"], "tau")
    try:
        ModularContext(tau)
    except XYZBetheError as exc:
        raise ConfigError(f"tau: {exc}") from exc
    out["tau"] = tau
    try:
        eta = Fraction(str(cfg["eta"])) if not isinstance(cfg["eta"], list) else _complex(cfg["eta"], "eta")
    except ValueError as exc:
        raise ConfigError(f"eta: cannot parse {cfg['eta']!r}") from exc
    out["eta"] = eta
    if cfg["xi"] != "random":
        if not isinstance(cfg["xi"], list):
            raise ConfigError("xi: expected \"random\" or a list of [re, im] pairs")
        out["xi"] = tuple(_complex(x, f"xi[{i}]") for i, x in enumerate(cfg["xi"]))
    if cfg["gauge"] != "random":
        g = cfg["gauge"]
        if not isinstance(g, dict) or set(g) != {"s", "t"}:
            raise ConfigError("gauge: expected \"random\" or an object with keys s and t")
        out["gauge"] = (_complex(g["s"], "gauge.s"), _complex(g["t"], "gauge.t"))
    out["nu"] = _int(cfg["nu"], "nu") % 4
    if cfg["lambda"] is not None:
        out["lambda"] = _int(cfg["lambda"], "lambda") % 4
    kappa = cfg["kappa"] if isinstance(cfg["kappa"], list) else [cfg["kappa"]]
    for i, k in enumerate(kappa):
        if _int(k, f"kappa[{i}]") not in _KAPPA_CHECKS:
            raise ConfigError(f"kappa[{i}]: must lie in -2..2, got {k}")
    out["kappa"] = sorted(set(kappa))
    if not isinstance(cfg["tolerances"], dict):
        raise ConfigError("tolerances: expected an object")
    for key, val in cfg["tolerances"].items():
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not val > 0:
            raise ConfigError(f"tolerances.{key}: expected a positive number")
    return out


def _apply_flags(cfg, args) -> dict:
    cfg = dict(cfg)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "N", None) is not None:
        cfg["N"] = [_chain_length(args.N, "--N")]
    Ns = set(cfg["N"])
    if getattr(args, "slow", False):
        Ns.add(6)
    if getattr(args, "very_slow", False):
        Ns.update((6, 8))
    cfg["N"] = sorted(Ns)
    if cfg["xi"] != "random":
        if len(cfg["N"]) != 1:
            raise ConfigError("xi: explicit inhomogeneities need a single chain length")
        if len(cfg["xi"]) != cfg["N"][0]:
            raise ConfigError(f"xi: need {cfg['N'][0]} entries, got {len(cfg['xi'])}")
    return cfg


def _needs_free_fermion(cfg):
    if cfg["eta"] != Fraction(1, 2):
        raise ConfigError("eta: the Bethe-state and scalar-product routines need eta = 1/2")


def _cjson(z):
    z = complex(z)
    return [z.real, z.imag]


def config_echo(cfg) -> dict:
    echo = {
        "schema": SCHEMA_VERSION,
        "seed": cfg["seed"],
        "N": cfg["N"],
        "tau": _cjson(cfg["tau"]),
        "eta": str(cfg["eta"]) if isinstance(cfg["eta"], Fraction) else _cjson(cfg["eta"]),
        "xi": "random" if cfg["xi"] == "random" else [_cjson(x) for x in cfg["xi"]],
        "gauge": "random" if cfg["gauge"] == "random" else {"s": _cjson(cfg["gauge"][0]), "t": _cjson(cfg["gauge"][1])},
        "nu": cfg["nu"],
        "lambda": cfg["lambda"],
        "kappa": cfg["kappa"],
        "tolerances": dict(sorted(cfg["tolerances"].items())),
    }
    return echo


def _setup(cfg, N) -> registry.Setup:
    return registry.Setup(cfg["seed"], N, cfg["tau"], cfg["xi"], cfg["gauge"], cfg["nu"])


# ---------------------------------------------------------------- running


def select_checks(all_checks, pattern):
    if not pattern:
        return list(all_checks)
    tokens = [t.strip() for t in pattern.split(",") if t.strip()]

    def hit(c):
        for t in tokens:
            if t in c.tags or c.check_id == t or c.check_id.startswith(t + ".") or fnmatch.fnmatchcase(c.check_id, t):
                return True
        return False

    chosen = [c for c in all_checks if hit(c)]
    if not chosen:
        raise ConfigError(f"--only: pattern {pattern!r} matched no checks")
    return chosen


def _digest(check, setup) -> str:
    payload = {
        "check_id": check.check_id,
        "seed": setup.seed,
        "N": setup.N,
        "tau": _cjson(setup.tau),
        "xi": setup.xi if setup.xi == "random" else [_cjson(x) for x in setup.xi],
        "gauge": setup.gauge if setup.gauge == "random" else [_cjson(x) for x in setup.gauge],
        "nu": setup.nu,
        "tolerance": check.tolerance,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return _cjson(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def run_one(check, setup, timings=False) -> dict:
    rng = registry.check_rng(setup.seed, check.check_id)
    t0 = time.perf_counter()
    record = {
        "record": "check",
        "check_id": check.check_id,
        "paper_ref": check.paper_ref,
        "tags": list(check.tags),
        "N": check.N,
        "inputs_digest": _digest(check, setup),
        "tolerance": check.tolerance,
        "comparison": ">=" if check.compare == "ge" else "<=",
    }
    try:
        outcome = check.run(rng, setup)
        ok = registry.passes(check, outcome)
        residual = float(outcome.residual)
        record.update(
            residual=residual if np.isfinite(residual) else None,
            status="pass" if ok else "fail",
            detail=_jsonable(outcome.detail),
            error=None,
        )
    except Exception as exc:  # reported, not raised: one bad check must not sink the run
        record.update(residual=None, status="error", detail={}, error=f"{type(exc).__name__}: {exc}")
    record["wall_time"] = round(time.perf_counter() - t0, 3) if timings else None
    return record


def run_checks(selected, cfg, jobs=1, timings=False) -> list:
    small = min(cfg["N"])
    tasks = [(c, _setup(cfg, c.N or small)) for c in selected]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda t: run_one(t[0], t[1], timings), tasks))
    else:
        records = [run_one(c, s, timings) for c, s in tasks]
    return sorted(records, key=lambda r: r["check_id"])


def summarize(records, cfg) -> dict:
    counts = {k: sum(r["status"] == k for r in records) for k in ("pass", "fail", "error")}
    if counts["error"]:
        code = EXIT_ERROR
    elif counts["fail"]:
        code = EXIT_TOLERANCE
    else:
        code = EXIT_OK
    first = next((r["check_id"] for r in records if r["status"] != "pass"), None)
    return {
        "record": "summary",
        "total": len(records),
        "passed": counts["pass"],
        "failed": counts["fail"],
        "errors": counts["error"],
        "first_failure": first,
        "exit_code": code,
        "seed": cfg["seed"],
        "config": config_echo(cfg),
    }


def format_report(records, summary) -> str:
    lines = [json.dumps(r, sort_keys=True) for r in records]
    lines.append(json.dumps(summary, sort_keys=True))
    return "\n".join(lines) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish(records, cfg, args) -> int:
    summary = summarize(records, cfg)
    _emit(format_report(records, summary), args.out)
    status = "ok" if summary["exit_code"] == EXIT_OK else "FAILED"
    msg = f"{summary['passed']}/{summary['total']} checks passed ({status})"
    if summary["first_failure"]:
        msg += f"; first failing check: {summary['first_failure']}"
    print(msg, file=sys.stderr)
    return summary["exit_code"]


# ---------------------------------------------------------------- commands


def parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {text!r} as a complex number") from exc


def cmd_theta(args) -> int:
    tau = parse_complex(args.tau)
    u = parse_complex(args.u)
    try:
        ctx = ModularContext(tau)
    except XYZBetheError as exc:
        raise ConfigError(f"--tau: {exc}") from exc
    fn = eval_theta_derivative if args.derivative else eval_theta
    print(repr(complex(fn(args.kind, u, ctx, args.scale))))
    return EXIT_OK


def _model(cfg, N):
    setup = _setup(cfg, N)
    if cfg["eta"] == Fraction(1, 2):
        return setup.params, setup.gp
    xi = setup.params.xi
    params = ModelParams(N, cfg["tau"], xi, cfg["eta"])
    if cfg["gauge"] == "random":
        return params, sample_gauge(params, setup._rng("gauge"))
    return params, GaugeParams(*cfg["gauge"], params)


def cmd_model(args, cfg) -> int:
    out = []
    for N in cfg["N"]:
        params, gp = _model(cfg, N)
        rng = registry.check_rng(cfg["seed"], f"model.N{N}")
        u, v = (complex(*rng.uniform(-0.5, 0.5, 2)) for _ in range(2))
        jx, jy, jz = couplings(params)
        out.append(
            {
                "N": N,
                "tau": _cjson(params.tau),
                "eta": str(params.eta) if isinstance(params.eta, Fraction) else _cjson(params.eta),
                "xi": [_cjson(x) for x in params.xi],
                "gauge": {"s": _cjson(gp.s), "t": _cjson(gp.t), "x": _cjson(gp.x), "y": _cjson(gp.y)},
                "couplings": {"Jx": _cjson(jx), "Jy": _cjson(jy), "Jz": _cjson(jz)},
                "rtt_residual": rtt_residual(u, v, params),
                "rtt_point": {"u": _cjson(u), "v": _cjson(v)},
            }
        )
    _emit(json.dumps(out if len(out) > 1 else out[0], indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_solve_bethe(args, cfg) -> int:
    _needs_free_fermion(cfg)
    results = []
    for N in cfg["N"]:
        setup = _setup(cfg, N)
        params, gp = setup.params, setup.gp
        try:
            rs = solve_bethe_roots(cfg["nu"], params, grid=args.grid)
        except RootCountMismatch as exc:
            print(f"error: {exc} (for example --grid {2 * args.grid})", file=sys.stderr)
            return EXIT_ERROR
        except TwinPairingFailure as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
        results.append(
            {
                "N": N,
                "nu": cfg["nu"],
                "surviving_sector": surviving_sector(cfg["nu"], list(rs.selected), gp),
                "tau": _cjson(params.tau),
                "xi": [_cjson(x) for x in params.xi],
                "gauge": {"s": _cjson(gp.s), "t": _cjson(gp.t)},
                "roots": [_cjson(z) for z in rs.roots],
                "twin_pairs": [list(map(int, p)) for p in rs.twin_pairs],
                "selected": [_cjson(z) for z in rs.selected],
                "residuals": [float(r) for r in rs.residuals],
                "winding": _cjson(rs.diagnostics["winding"]),
            }
        )
    text = json.dumps({"schema": SCHEMA_VERSION, "seed": cfg["seed"], "states": results}, indent=2, sort_keys=True)
    _emit(text + "\n", args.out)
    return EXIT_OK


def _requested_sector_check(cfg, lam):
    from . import scalar

    def run(rng, setup):
        vs, gp, nu = setup.vbar, setup.gp, setup.nu_s
        n, N = len(vs), setup.N
        worst, flags = 0.0, []
        for kappa in cfg["kappa"]:
            m = n - kappa
            if not 0 <= m <= N:
                continue
            us = scalar.sample_offshell(rng, m, gp, avoid=vs)
            if (lam - nu - kappa) % 2 or abs(kappa) == 2:
                worst = max(worst, scalar.prop1_vanishing(nu, vs, lam, us, gp))
                if (lam - nu - kappa) % 2:
                    flags.append(kappa)
            elif kappa == 0:
                closed = scalar.balanced_closed_form(nu, lam, vs, us, gp)
                brute = scalar.brute_force_sp(nu, vs, lam, us, gp)
                worst = max(worst, registry._rel(closed, brute))
        detail = {"lambda": lam, "selection_rule_kappa": flags}
        if flags:
            detail["flag"] = "selection-rule"
        return registry.Outcome(worst, detail)

    return run


def cmd_scalar_product(args, cfg) -> int:
    _needs_free_fermion(cfg)
    wanted = {"scalar.selection-rule"}
    for k in cfg["kappa"]:
        wanted.update(_KAPPA_CHECKS[k])
    pool = registry.build_checks(cfg["N"], cfg["tolerances"])
    chosen = [c for c in pool if c.check_id.rsplit(".N", 1)[0] in wanted]
    if cfg["lambda"] is not None:
        for N in cfg["N"]:
            chosen.append(
                registry.Check(
                    f"scalar.requested-sector.N{N}",
                    "sector lambda requested in the config",
                    ("scalar", "selection-rule"),
                    1e-8,
                    _requested_sector_check(cfg, cfg["lambda"]),
                    N,
                )
            )
    chosen = select_checks(sorted(chosen, key=lambda c: c.check_id), args.only)
    return _finish(run_checks(chosen, cfg, args.jobs, args.timings), cfg, args)


def cmd_verify(args, cfg) -> int:
    _needs_free_fermion(cfg)
    chosen = select_checks(registry.build_checks(cfg["N"], cfg["tolerances"]), args.only)
    return _finish(run_checks(chosen, cfg, args.jobs, args.timings), cfg, args)


# ---------------------------------------------------------------- parser


def _common(p, run=False):
    p.add_argument("--config", metavar="PATH", help="JSON config (schema 1)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    p.add_argument("--N", type=int, help="use this single chain length")
    p.add_argument("--slow", action="store_true", help="add N = 6")
    p.add_argument("--very-slow", action="store_true", help="add N = 6 and N = 8")
    if run:
        p.add_argument("--jobs", type=int, default=1, help="checks run concurrently")
        p.add_argument("--only", metavar="PATTERN", help="comma-separated tags, ids or globs")
        p.add_argument("--timings", action="store_true", help="record wall times (breaks byte-identity)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xyzbethe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", help="evaluate a Jacobi theta function")
    p.add_argument("--kind", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--u", required=True, help="argument, e.g. 0.25 or 0.1+0.2i")
    p.add_argument("--tau", default="0.1+0.8i", help="modular parameter")
    p.add_argument("--scale", type=int, choices=(1, 2), default=1, help="evaluate at scale * tau")
    p.add_argument("--derivative", action="store_true", help="d/du instead of the value")

    _common(sub.add_parser("model", help="print model, gauge and couplings"))
    p = sub.add_parser("solve-bethe", help="solve the Bethe equations and write the roots")
    _common(p)
    p.add_argument("--grid", type=int, default=80, help="coarse scan resolution")
    _common(sub.add_parser("scalar-product", help="scalar-product comparisons"), run=True)
    _common(sub.add_parser("verify", help="run the verification suite"), run=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "theta":
            return cmd_theta(args)
        if getattr(args, "jobs", 1) < 1:
            raise ConfigError("--jobs: must be at least 1")
        cfg = _apply_flags(load_config(args.config), args)
        handler = {
            "model": cmd_model,
            "solve-bethe": cmd_solve_bethe,
            "scalar-product": cmd_scalar_product,
            "verify": cmd_verify,
        }[args.command]
        return handler(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except XYZBetheError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
