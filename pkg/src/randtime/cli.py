"""Command-line front end.

Every subcommand builds a run configuration (from ``--config`` or inline
flags), validates it against the JSON schema and then runs the matching
experiment.  Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from typing import Optional, Sequence

import numpy as np

from .catalog import CompoundPoisson, asymptotic_params, check_hypotheses, default_catalog, spec_from_dict, spec_to_dict
from .config import EXPERIMENTS, config_hash, load_config, validate_config
from .cpp import CppBoundInput, exponential_bound, inverse_cpp_laplace, polynomial_bound
from .dynamics import named_flow
from .engine import decay_fit, mean_trajectory, potential, profile, renormalized_potential, subordinate_monte_carlo
from .engine import subordinate as subordinate_value
from .errors import ConfigError, HorizonExhaustedError, NonPositiveValueError, RandTimeError, UnsupportedSpecError
from .catalog import _JUMPS as JUMP_VARIANTS
from .inverse import density_slice, density_values
from .observables import parse_observable
from .sampling import sample_inverse_batch
from .transport import TransportProblem, counterexample_fixture, solve_grid
from .verify import run_checks

__all__ = ["main", "run", "EXIT_OK", "EXIT_INVALID", "EXIT_NUMERICAL"]

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class Artifact:
    """CSV text assembled in memory and written only once complete."""

    def __init__(self, cfg: dict, columns: Sequence[str], extra_header: Sequence[str] = ()):
        seed = cfg.get("mc", {}).get("seed")
        self.lines = [
            f"# experiment={cfg['experiment']}",
            f"# config_sha256={config_hash(cfg)}",
            f"# seed={seed if seed is not None else 'none'}",
        ]
        self.lines += [f"# {h}" for h in extra_header]
        self.lines.append(",".join(columns))

    def row(self, *values) -> None:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="").writerow([_fmt(v) for v in values])
        self.lines.append(buf.getvalue())

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _spec_hash(spec) -> str:
    return hashlib.sha256(json.dumps(spec_to_dict(spec), sort_keys=True).encode()).hexdigest()[:16]


def _need_spec(cfg: dict):
    if "spec" not in cfg:
        raise ConfigError(f"experiment {cfg['experiment']!r} needs a spec")
    return spec_from_dict(cfg["spec"])


def _times(cfg: dict, default, log: bool = False) -> np.ndarray:
    g = cfg.get("grid", {})
    if "t_points" in g:
        return np.asarray(g["t_points"], dtype=float)
    if "t_range" in g:
        lo, hi = g["t_range"]
        n = g.get("n_t", 13)
        if log:
            if not (0 < lo < hi):
                raise ConfigError("log-spaced t_range needs 0 < lo < hi")
            return np.geomspace(lo, hi, n)
        return np.linspace(lo, hi, n)
    return np.asarray(default, dtype=float)


def _x(cfg: dict, flow) -> np.ndarray:
    if "x" not in cfg:
        return flow.x0
    return np.atleast_1d(np.asarray(cfg["x"], dtype=float))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _catalog(cfg: dict) -> Artifact:
    art = Artifact(cfg, ["variant", "spec", "hypotheses", "gamma", "Q"])
    for spec in default_catalog():
        rep = check_hypotheses(spec)
        hyp = "all hold" if rep.all_hold else "fail: " + "; ".join(rep.failing())
        if isinstance(spec, CompoundPoisson):
            hyp += " (phi bounded at infinity; regular-variation asymptotics inapplicable)"
            gamma, q = "n/a", "n/a"
        else:
            p = asymptotic_params(spec)
            gamma = p.gamma
            q = p.description
        art.row(spec.variant, json.dumps(spec_to_dict(spec), sort_keys=True), hyp, gamma, q)
    return art


def _density(cfg: dict) -> Artifact:
    spec = _need_spec(cfg)
    t = float(_times(cfg, [1.0])[0])
    method = cfg.get("method", "auto")
    header = [f"spec={json.dumps(spec_to_dict(spec), sort_keys=True)} t={t!r}"]
    art = Artifact(cfg, ["tau", "g"], header)
    taus = cfg.get("grid", {}).get("tau_points")
    if taus is not None:
        g = density_values(spec, t, np.asarray(taus, dtype=float), method)
        for a, b in zip(taus, g):
            art.row(float(a), float(b))
    else:
        sl = density_slice(spec, t, method)
        art.lines.insert(-1, f"# mass={sl.mass:.17g} tail_bound={sl.tail_bound:.17g}")
        for a, b in zip(sl.tau, sl.g):
            art.row(float(a), float(b))
    return art


def _subordinated(cfg: dict, ts: np.ndarray):
    spec = _need_spec(cfg)
    flow = named_flow(cfg.get("field", "linear:1"))
    f = parse_observable(cfg.get("observable", "exp-abs:1"))
    x = _x(cfg, flow)
    method = cfg.get("method", "quadrature")
    out = []
    if method == "monte_carlo" or isinstance(spec, CompoundPoisson):
        mc = cfg.get("mc")
        if mc is None:
            raise ConfigError("Monte Carlo evaluation needs mc.n and mc.seed")
        mean, se = subordinate_monte_carlo(f, flow, x, spec, ts, mc["n"], mc["seed"])
        for t, m, s in zip(ts, np.atleast_1d(mean), np.atleast_1d(se)):
            out.append((float(t), float(m), float(s), "monte_carlo"))
    else:
        tol = cfg.get("tolerances", {}).get("quadrature", 1e-6)
        u = profile(f, flow, x)
        for t in ts:
            res = subordinate_value(u, spec, float(t), "quadrature", tol=tol)
            out.append((float(t), res.value, res.error_estimate, "quadrature"))
    return spec, out


def _subordinate(cfg: dict) -> Artifact:
    spec, rows = _subordinated(cfg, _times(cfg, [1.0]))
    art = Artifact(cfg, ["t", "v", "err", "method", "spec_hash"])
    h = _spec_hash(spec)
    for t, v, e, m in rows:
        art.row(t, v, e, m, h)
    return art


def _decay(cfg: dict) -> Artifact:
    ts = _times(cfg, np.geomspace(1e2, 1e4, 13), log=True)
    spec, rows = _subordinated(cfg, ts)
    fit = decay_fit([(t, v) for t, v, _, _ in rows])
    art = Artifact(cfg, ["t", "v", "err", "method", "spec_hash", "fit_exponent", "fit_log_constant", "r_squared"])
    h = _spec_hash(spec)
    for t, v, e, m in rows:
        art.row(t, v, e, m, h, fit.exponent, fit.log_constant, fit.r_squared)
    return art


def _trajectory(cfg: dict) -> Artifact:
    spec = _need_spec(cfg)
    flow = named_flow(cfg.get("field", "linear:1"))
    x = _x(cfg, flow)
    art = Artifact(cfg, ["t"] + [f"mean_x{i}" for i in range(flow.dim)])
    for t in _times(cfg, [1.0, 10.0, 100.0]):
        art.row(float(t), *map(float, mean_trajectory(flow, x, spec, float(t))))
    return art


def _xgrid(cfg: dict) -> np.ndarray:
    g = cfg.get("grid", {})
    if "x_points" in g:
        return np.asarray(g["x_points"], dtype=float)
    lo, hi = g.get("x_range", [-2.0, 2.0])
    return np.linspace(lo, hi, g.get("n_x", 41))


def _transport(cfg: dict) -> Artifact:
    ts = _times(cfg, np.linspace(0.0, 2.0, 21))
    xs = _xgrid(cfg)
    name = cfg.get("field", "ou:1")
    if name == "nonauto-counterexample":
        fx = counterexample_fixture()
        art = Artifact(cfg, ["t", "x", "u", "u_t", "b_u_x", "residual"], ["fixture: b(t,x) = t + x, f(x) = x"])
        for t in ts:
            for x in xs:
                art.row(float(t), float(x), float(fx.u(t, x)), float(fx.u_t(t, x)), float(fx.b_u_x(t, x)), float(fx.residual(t, x)))
        return art
    flow = named_flow(name)
    if flow.dim != 1:
        raise ConfigError("transport grids from the CLI are one-dimensional")
    f = parse_observable(cfg.get("observable", "exp-abs:1"))
    U = solve_grid(TransportProblem(flow.field, f, flow=flow), ts, xs)
    art = Artifact(cfg, ["t", "x", "u"])
    for i, t in enumerate(ts):
        for j, x in enumerate(xs):
            art.row(float(t), float(x), float(U[i, j]))
    return art


def _potential(cfg: dict) -> Artifact:
    flow = named_flow(cfg.get("field", "linear:1"))
    f = parse_observable(cfg.get("observable", "exp-abs:1"))
    x = _x(cfg, flow)
    u = profile(f, flow, x)
    tol = cfg.get("tolerances", {}).get("potential", 1e-6)
    res = potential(lambda s: float(u(np.array([s]))[0]), tol=tol)
    art = Artifact(cfg, ["quantity", "value", "detail"])
    art.row("potential", res.value, "divergent" if res.divergent else f"error {res.error_estimate:.3g}")
    if "spec" in cfg:
        spec = _need_spec(cfg)
        T = float(_times(cfg, [1e4])[-1])
        rp = renormalized_potential(f, flow, x, spec, T)
        art.row("renormalized_potential", rp.value, "converged" if rp.converged else "not converged")
        art.row("renormalized_potential_extrapolated", rp.extrapolated, f"T={T:g}")
    return art


def _cpp_bounds(cfg: dict) -> Artifact:
    c = cfg.get("cpp")
    if c is None:
        raise ConfigError("cpp-bounds needs a cpp block")
    jumps_cls = JUMP_VARIANTS[c["jumps"]["variant"]]
    jumps = jumps_cls(**c["jumps"].get("params", {}))
    inp = CppBoundInput(
        c["rate"], jumps, c["c"], c["beta"], c.get("moment_order"), c.get("mgf_radius"), c.get("holder_constant", 1.0)
    )
    x_dist = c.get("x_dist", 1.0)
    ts = _times(cfg, [1.0, 2.0, 5.0, 10.0])
    mc = cfg.get("mc")
    if mc is not None:
        E = sample_inverse_batch(CompoundPoisson(inp.rate, jumps), ts, mc["n"], mc["seed"])
        vals = np.exp(-inp.s * E)
        mean, se = vals.mean(axis=0), vals.std(axis=0, ddof=1) / math.sqrt(mc["n"])
    else:
        mean = se = np.full(ts.size, math.nan)
    art = Artifact(cfg, ["t", "series_value", "mc_value", "mc_se", "poly_bound", "exp_bound"])
    for i, t in enumerate(ts):
        poly = polynomial_bound(inp, float(t), x_dist) if inp.moment_order is not None and t > 0 else math.nan
        try:
            expb = exponential_bound(inp, float(t), x_dist)[1]
        except RandTimeError:
            expb = math.nan
        art.row(float(t), inverse_cpp_laplace(inp, float(t)), float(mean[i]), float(se[i]), poly, expb)
    return art


def _verify(cfg: dict) -> tuple[Artifact, bool]:
    results = run_checks(cfg.get("checks"), quick=cfg.get("quick", False))
    art = Artifact(cfg, ["check", "title", "passed", "summary"])
    for r in results:
        print(r.line(), file=sys.stderr)
        art.row(r.number, r.title, r.passed, r.summary)
    return art, all(r.passed for r in results)


_RUNNERS = {
    "catalog": _catalog,
    "density": _density,
    "subordinate": _subordinate,
    "decay": _decay,
    "trajectory": _trajectory,
    "transport": _transport,
    "potential": _potential,
    "cpp-bounds": _cpp_bounds,
}


def _write(text: str, path: Optional[str]) -> None:
    if not path:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".randtime-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: dict) -> int:
    """Validate ``cfg``, run its experiment and write the artifact; returns an exit code."""
    try:
        validate_config(cfg)
        if cfg["experiment"] == "verify":
            art, ok = _verify(cfg)
            _write(art.text(), cfg.get("output"))
            return EXIT_OK if ok else EXIT_NUMERICAL
        art = _RUNNERS[cfg["experiment"]](cfg)
        _write(art.text(), cfg.get("output"))
        return EXIT_OK
    except NonPositiveValueError as exc:
        # the data were valid; the computed values cannot be fitted
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, UnsupportedSpecError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, HorizonExhaustedError, RandTimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON argument: {exc}") from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="RunConfig JSON file (other flags are then ignored)")
    p.add_argument("--spec", help="subordinator spec as JSON")
    p.add_argument("--field", help="named field, e.g. linear:1, power:2,1, ou:1")
    p.add_argument("--observable", help="named observable, e.g. exp-abs:1")
    p.add_argument("--x", type=_floats, help="starting point (comma-separated)")
    p.add_argument("--t", type=_floats, help="time points (comma-separated)")
    p.add_argument("--t-range", type=_floats, help="lo,hi")
    p.add_argument("--n-t", type=int)
    p.add_argument("--x-range", type=_floats, help="lo,hi")
    p.add_argument("--n-x", type=int)
    p.add_argument("--tau", type=_floats, help="density abscissae")
    p.add_argument("--method")
    p.add_argument("--n", type=int, help="Monte Carlo sample size")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--rate", type=float, help="compound Poisson arrival rate")
    p.add_argument("--jumps", help="jump law as JSON, e.g. {\"variant\":\"Exponential\",\"params\":{\"rate\":1}}")
    p.add_argument("--c", type=float, help="dissipativity rate")
    p.add_argument("--beta", type=float, help="Hoelder exponent")
    p.add_argument("--moment-order", type=float)
    p.add_argument("--mgf-radius", type=float)
    p.add_argument("--x-dist", type=float)
    p.add_argument("--quick", action="store_true", help="reduced sizes for verify")
    p.add_argument("--only", type=_floats, help="verify only these check numbers")


def _config_from_args(experiment: str, a: argparse.Namespace) -> dict:
    cfg: dict = {"experiment": experiment}
    if a.spec is not None:
        cfg["spec"] = _json(a.spec)
    for key in ("field", "observable", "method"):
        if getattr(a, key) is not None:
            cfg[key] = getattr(a, key)
    if a.x is not None:
        cfg["x"] = a.x[0] if len(a.x) == 1 else a.x
    grid = {}
    for key, name in (("t", "t_points"), ("t_range", "t_range"), ("n_t", "n_t"), ("x_range", "x_range"), ("n_x", "n_x"), ("tau", "tau_points")):
        if getattr(a, key) is not None:
            grid[name] = getattr(a, key)
    if grid:
        cfg["grid"] = grid
    if a.n is not None or a.seed is not None:
        cfg["mc"] = {k: v for k, v in (("n", a.n), ("seed", a.seed)) if v is not None}
    if experiment == "cpp-bounds" and any(v is not None for v in (a.rate, a.jumps, a.c, a.beta)):
        cpp = {"rate": a.rate, "jumps": _json(a.jumps) if a.jumps else None, "c": a.c, "beta": a.beta}
        for key, name in (("moment_order", "moment_order"), ("mgf_radius", "mgf_radius"), ("x_dist", "x_dist")):
            if getattr(a, key) is not None:
                cpp[name] = getattr(a, key)
        cfg["cpp"] = {k: v for k, v in cpp.items() if v is not None}
    if a.quick:
        cfg["quick"] = True
    if a.only:
        cfg["checks"] = [int(v) for v in a.only]
    if a.out is not None:
        cfg["output"] = a.out
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randtime", description="Evolutions under random time changes.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_common(sub.add_parser(name, help=f"run the {name} experiment"))
    p = sub.add_parser("run", help="run an experiment from --config or --experiment plus flags")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    _add_common(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        if a.config:
            cfg = load_config(a.config)
            if a.command != "run" and cfg["experiment"] != a.command:
                raise ConfigError(f"config is for {cfg['experiment']!r}, not {a.command!r}")
            if a.out is not None:
                cfg["output"] = a.out
        else:
            experiment = a.experiment if a.command == "run" else a.command
            if experiment is None:
                raise ConfigError("run needs --config or --experiment")
            cfg = _config_from_args(experiment, a)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
