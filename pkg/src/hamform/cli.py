"""Command-line front end: ``simulate``, ``check`` and ``compile``.

Run configurations are JSON documents::

    {
      "system": {"name": "vdp", "params": {"eps": 0.5}},
      "initial_state": [2.0, 0.0],
      "T": 20, "h": 0.001,
      "integrator": {"method": "rk4"},
      "reservoirs": "auto",
      "outputs": {"trajectory": "vdp.csv", "report": "vdp.json"}
    }

``system`` may instead name a reaction-network file:
``{"network": "brusselator.rxn", "params": {"a": 1, "b": 3}}``.
``reservoirs`` is ``"auto"`` (the zoo decomposition), ``"none"``, or a list
of ``{"integrand": "<expr>", "against": "x1"}`` items; an explicit list can
be paired with ``"potential": "<expr>"``. Expressions use ``x1 .. xd``.

Exit codes: 0 success, 1 configuration error (nothing written),
2 numerical failure (partial trajectory kept), 3 failed check.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from hamform import zoo
from hamform.core import PhaseState, ScalarField, SystemDef
from hamform.errors import HamformError, IntegrationError, NetworkSyntaxError
from hamform.integrators import IntegratorConfig, _dg_parts, convergence_order, integrate
from hamform.reactions import (
    format_linear,
    linear_invariants,
    mass_action_odes,
    ode_strings,
    parse_network,
    stoichiometric_matrix,
)
from hamform.reservoir import QUADRATURES, EffectiveInvariant, ReservoirSpec, pfaffian_contract
from hamform.skew import SkewField, check_jacobi, check_skew, verify_casimir

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3

_TOP_KEYS = {"system", "initial_state", "t0", "T", "h", "integrator", "reservoirs", "potential",
             "quadrature", "outputs", "check"}

DEFAULT_SUITES = ("pfaffian", "skew_consistency", "skew_symmetry", "jacobi", "casimir",
                  "linear_invariants", "drift_order")
DEFAULT_TOLERANCES = {
    "pfaffian": 1e-10,
    "skew_consistency": 1e-10,
    "skew_symmetry": 1e-12,
    "jacobi": 1e-9,
    "casimir": 1e-10,
    "linear_invariants": 1e-12,
    "drift_order": 1.7,
}


class ConfigError(Exception):
    """Invalid run configuration; maps to exit code 1."""


# ---------------------------------------------------------------- config


def parse_value(text: str):
    """JSON literal if possible, else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    """Set a dotted path, e.g. ``system.params.eps=0.3``."""
    if "=" not in assignment:
        raise ConfigError(f"--param expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigError(f"bad --param key {key!r}")
    node = cfg
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"--param {key}: {p!r} is not an object")
        node = nxt
    node[parts[-1]] = parse_value(raw)


def _compile_expr(expr: str, dim: int):
    import sympy

    syms = sympy.symbols(f"x1:{dim + 1}")
    try:
        parsed = sympy.sympify(expr, locals={str(s): s for s in syms})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"cannot parse expression {expr!r}: {exc}") from exc
    unknown = parsed.free_symbols - set(syms)
    if unknown:
        raise ConfigError(f"expression {expr!r} uses unknown symbols {sorted(map(str, unknown))}")
    fun = sympy.lambdify(syms, parsed, "numpy")
    grads = [sympy.lambdify(syms, sympy.diff(parsed, s), "numpy") for s in syms]
    value = lambda x: float(fun(*x))  # noqa: E731
    grad = lambda x: np.array([float(g(*x)) for g in grads])  # noqa: E731
    return value, grad


def _against_index(token, dim: int) -> int:
    if isinstance(token, int):
        j = token - 1
    elif isinstance(token, str) and token.startswith("x") and token[1:].isdigit():
        j = int(token[1:]) - 1
    else:
        raise ConfigError(f"reservoir 'against' must be like 'x1', got {token!r}")
    if not 0 <= j < dim:
        raise ConfigError(f"reservoir against x{j + 1} in a {dim}-dimensional system")
    return j


@dataclass
class RunConfig:
    """Validated run configuration."""

    source: str
    system: SystemDef
    invariant: Optional[EffectiveInvariant]
    entry: Optional[zoo.ZooEntry]
    network: object
    initial_state: np.ndarray
    t0: float
    T: float
    h: float
    integrator: IntegratorConfig
    quadrature: str
    trajectory_path: Path
    report_path: Path
    check_report_path: Path
    check: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        ratio = self.T / self.h
        near = round(ratio)
        if abs(ratio - near) <= 1e-9 * max(1.0, ratio):
            return int(near)
        return int(math.floor(ratio))


def _system_from(cfg: dict, base_dir: Path):
    spec = cfg.get("system")
    if not isinstance(spec, dict):
        raise ConfigError("'system' must be an object with 'name' or 'network'")
    params = spec.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("'system.params' must be an object")
    if "name" in spec:
        try:
            entry = zoo.build(spec["name"], params)
        except (ValueError, KeyError, HamformError) as exc:
            raise ConfigError(str(exc)) from exc
        return entry.system, entry.invariant, entry, None
    if "network" in spec:
        path = base_dir / spec["network"]
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read network file {path}: {exc}") from exc
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                net = parse_network(text, params)
        except NetworkSyntaxError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for w in caught:
            print(f"warning: {path}: {w.message}", file=sys.stderr)
        if not net.species:
            raise ConfigError(f"{path}: network is empty")
        return mass_action_odes(net), None, None, net
    raise ConfigError("'system' needs either 'name' or 'network'")


def _invariant_from(cfg: dict, sys_def: SystemDef, default: Optional[EffectiveInvariant]):
    mode = cfg.get("reservoirs", "auto")
    potential_expr = cfg.get("potential")
    if mode == "auto":
        if potential_expr is not None:
            raise ConfigError("'potential' is only used with an explicit reservoir list")
        return default
    if mode == "none":
        if potential_expr is None:
            return None
        value, grad = _compile_expr(potential_expr, sys_def.dim)
        return EffectiveInvariant(sys_def.dim, ScalarField(value, grad))
    if not isinstance(mode, list):
        raise ConfigError("'reservoirs' must be 'auto', 'none' or a list")
    specs = []
    for k, item in enumerate(mode):
        if not isinstance(item, dict) or "integrand" not in item or "against" not in item:
            raise ConfigError(f"reservoir {k + 1} needs 'integrand' and 'against'")
        value, _ = _compile_expr(str(item["integrand"]), sys_def.dim)
        specs.append(ReservoirSpec(value, _against_index(item["against"], sys_def.dim),
                                   float(item.get("initial_value", 0.0)), f"w{k + 1}"))
    potential = None
    if potential_expr is not None:
        potential = ScalarField(*_compile_expr(potential_expr, sys_def.dim))
    structure = default.structure if default is not None else None
    return EffectiveInvariant(sys_def.dim, potential, tuple(specs), structure)


def build_run_config(cfg: dict, source: str = "<config>", base_dir: Path = Path("."),
                     out_dir: Path = Path(".")) -> RunConfig:
    """Validate a raw configuration dictionary.

    Raises:
        ConfigError: on any inconsistency; no file is touched.
    """
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    sys_def, default_inv, entry, net = _system_from(cfg, base_dir)
    invariant = _invariant_from(cfg, sys_def, default_inv)

    try:
        T = float(cfg["T"])
        h = float(cfg["h"])
        t0 = float(cfg.get("t0", 0.0))
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"T, h and t0 must be numbers: {exc}") from exc
    if not (T > 0 and h > 0 and math.isfinite(T) and math.isfinite(h)):
        raise ConfigError(f"need T > 0 and h > 0, got T={T}, h={h}")
    if h > T:
        raise ConfigError(f"step h={h} exceeds horizon T={T}")

    if "initial_state" in cfg:
        x0 = cfg["initial_state"]
    elif entry is not None:
        x0 = list(entry.default_state)
    else:
        raise ConfigError("missing required key 'initial_state'")
    try:
        x0 = np.asarray(x0, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"initial_state must be a list of numbers: {exc}") from exc
    if x0.size != sys_def.dim:
        raise ConfigError(f"initial_state has {x0.size} entries, system dimension is {sys_def.dim}")
    try:
        sys_def.require(x0)
    except HamformError as exc:
        raise ConfigError(f"initial_state rejected: {exc}") from exc

    integ = dict(cfg.get("integrator", {}) or {})
    unknown = set(integ) - {"method", "newton_tol", "newton_max_iter"}
    if unknown:
        raise ConfigError(f"unknown integrator keys: {sorted(unknown)}")
    try:
        icfg = IntegratorConfig(h=h, **integ)
    except (HamformError, TypeError, ValueError) as exc:
        raise ConfigError(f"integrator: {exc}") from exc
    if icfg.method == "discrete_gradient":
        try:
            _dg_parts(sys_def)
        except HamformError as exc:
            raise ConfigError(f"integrator: {exc}") from exc

    quadrature = cfg.get("quadrature", "trapezoid")
    if quadrature not in QUADRATURES:
        raise ConfigError(f"quadrature must be one of {QUADRATURES}")

    stem = Path(source).stem if source != "<config>" else "run"
    outputs = cfg.get("outputs", {}) or {}
    unknown = set(outputs) - {"trajectory", "report", "check_report"}
    if unknown:
        raise ConfigError(f"unknown output keys: {sorted(unknown)}")
    traj_path = out_dir / outputs.get("trajectory", f"{stem}.csv")
    report_path = out_dir / outputs.get("report", f"{stem}.report.json")
    check_path = out_dir / outputs.get("check_report", f"{stem}.check.json")

    check = dict(cfg.get("check", {}) or {})
    unknown = set(check) - {"suites", "tolerances", "samples", "seed"}
    if unknown:
        raise ConfigError(f"unknown check keys: {sorted(unknown)}")
    suites = check.get("suites", list(DEFAULT_SUITES))
    bad = [s for s in suites if s not in DEFAULT_SUITES]
    if bad:
        raise ConfigError(f"unknown check suites {bad}; available: {list(DEFAULT_SUITES)}")
    tolerances = dict(DEFAULT_TOLERANCES)
    for k, v in (check.get("tolerances", {}) or {}).items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r}")
        tolerances[k] = float(v)
    check = {"suites": list(suites), "tolerances": tolerances,
             "samples": int(check.get("samples", 100)), "seed": int(check.get("seed", 0))}

    return RunConfig(source, sys_def, invariant, entry, net, x0, t0, T, h, icfg, quadrature,
                     traj_path, report_path, check_path, check)


def load_config(path: str, overrides: Optional[List[str]] = None, out_dir: str = ".") -> RunConfig:
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    raw = copy.deepcopy(raw)
    for item in overrides or []:
        apply_override(raw, item)
    return build_run_config(raw, source=str(p), base_dir=p.parent, out_dir=Path(out_dir))


# ---------------------------------------------------------------- output


def _fmt(v: float) -> str:
    return "nan" if v != v else "%.17g" % v


def write_csv(path: Path, traj) -> None:
    """Write ``t,x1..xd,w1..wm,H,K,div`` with round-trip precision and LF endings."""
    n, d = traj.x.shape
    m = traj.reservoirs.shape[1]
    nan = np.full(n, np.nan)
    cols = [traj.t, *traj.x.T, *traj.reservoirs.T,
            nan if traj.H is None else traj.H,
            nan if traj.K is None else traj.K,
            nan if traj.div is None else traj.div]
    header = ["t"] + [f"x{i + 1}" for i in range(d)] + [f"w{i + 1}" for i in range(m)] + ["H", "K", "div"]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        data = np.column_stack(cols)
        for row in data:
            fh.write(",".join(_fmt(float(v)) for v in row) + "\n")


def _json_num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------- commands


def run_simulate(rc: RunConfig) -> int:
    """Integrate one configuration and write its CSV and report."""
    t_end = rc.steps * rc.h
    start = time.perf_counter()
    error = None
    try:
        # without an invariant, keep integrate from falling back to the built-in decomposition
        system = rc.system if rc.invariant is not None else rc.system.replace(pfaffian=None)
        traj = integrate(system, PhaseState(rc.t0, rc.initial_state), rc.integrator, t_end,
                         invariant=rc.invariant, quadrature=rc.quadrature)
        code = EXIT_OK
    except IntegrationError as exc:
        traj, error, code = exc.trajectory, str(exc), EXIT_NUMERIC
    wall = time.perf_counter() - start
    write_csv(rc.trajectory_path, traj)
    K = traj.K
    report = {
        "k_drift_max": _json_num(np.max(np.abs(K - K[0]))) if K is not None and len(K) else None,
        "k_initial": _json_num(K[0]) if K is not None and len(K) else None,
        "h": rc.h,
        "steps": len(traj) - 1,
        "method": rc.integrator.method,
        "wall_time": wall,
        "system": rc.system.name,
        "T": t_end,
        "quadrature": rc.quadrature,
        "error": error,
    }
    write_json(rc.report_path, report)
    if error:
        print(f"error: {rc.source}: numerical failure: {error}", file=sys.stderr)
    return code


def _samples(rc: RunConfig, n: int, seed: int) -> np.ndarray:
    if rc.entry is not None:
        return rc.entry.samples(n, seed)
    rng = np.random.default_rng(seed)
    return rng.uniform(0.05, 2.0, size=(n, rc.system.dim))


def _result(passed, residual=None, tol=None, status=None, **extra):
    out = {"passed": bool(passed), "status": status or ("pass" if passed else "fail"),
           "residual": _json_num(residual), "tolerance": tol}
    out.update(extra)
    return out


def _skipped(reason):
    return {"passed": True, "status": "skipped", "reason": reason}


def _suite_pfaffian(rc, xs, tol):
    if rc.invariant is None:
        return _skipped("no effective invariant")
    worst = max(abs(pfaffian_contract(rc.invariant, x, rc.system(x))) for x in xs)
    return _result(worst <= tol, worst, tol)


def _suite_skew_consistency(rc, xs, tol):
    s = rc.system
    if s.skew is None or s.hamiltonian is None:
        return _skipped("system has no (B, H) pair")
    worst = max(float(np.max(np.abs(s(x) - s.skew(x) @ s.hamiltonian.gradient(x))))
                / max(1.0, float(np.max(np.abs(s(x))))) for x in xs)
    return _result(worst <= tol, worst, tol)


def _structures(rc):
    out = {}
    if rc.system.skew is not None:
        out["B"] = SkewField(rc.system.dim, rc.system.skew)
    if rc.invariant is not None:
        try:
            out["structure"] = SkewField.constant(rc.invariant.structure_matrix())
        except HamformError:
            pass
    return out


def _suite_skew_symmetry(rc, xs, tol):
    mats = _structures(rc)
    if not mats:
        return _skipped("no skew matrix")
    res = {k: check_skew(B, xs[:20], tol=tol).residual for k, B in mats.items()}
    worst = max(res.values())
    return _result(worst <= tol, worst, tol, per_matrix=res)


def _suite_jacobi(rc, xs, tol):
    mats = _structures(rc)
    if not mats:
        return _skipped("no skew matrix")
    details = {}
    passed = True
    for key, B in mats.items():
        r = max(check_jacobi(B, x, normalized=True) for x in xs[:20])
        expected = True
        if key == "B" and rc.entry is not None and rc.entry.jacobi_expected is False:
            expected = False
        holds = r <= tol
        if expected:
            status = "pass" if holds else "fail"
        else:
            status = "expected-fail" if not holds else "unexpected-pass"
        passed &= status in ("pass", "expected-fail")
        details[key] = {"residual": _json_num(r), "status": status}
    statuses = {d["status"] for d in details.values()}
    status = "fail" if not passed else ("expected-fail" if "expected-fail" in statuses else "pass")
    return _result(passed, max(d["residual"] or 0.0 for d in details.values()), tol,
                   status=status, per_matrix=details)


def _suite_casimir(rc, xs, tol):
    if rc.entry is None or not rc.entry.casimirs:
        return _skipped("no declared Casimir")
    worst = 0.0
    for S, C in rc.entry.casimirs:
        S = S if isinstance(S, SkewField) else SkewField.constant(S)
        worst = max(worst, verify_casimir(S, C, xs, tol).max_residual)
    return _result(worst <= tol, worst, tol)


def _suite_linear(rc, xs, tol):
    if rc.network is None:
        return _skipped("not a reaction network")
    basis = linear_invariants(rc.network)
    if basis.shape[0] == 0:
        return _skipped("no linear invariants")
    worst = max(float(np.max(np.abs(basis @ rc.system(x)))) / max(1.0, float(np.max(np.abs(rc.system(x)))))
                for x in xs)
    return _result(worst <= tol, worst, tol,
                   invariants=[format_linear(c, rc.network.species) for c in basis])


def _suite_drift_order(rc, xs, tol):
    if rc.invariant is None:
        return _skipped("no effective invariant")
    h0 = min(rc.h * 10, 0.02)
    hs = [h0, h0 / 2, h0 / 4]
    T = min(rc.T, 100 * h0)
    est = convergence_order(rc.system, rc.initial_state, rc.invariant, hs, T, method="rk4")
    if est.saturated:
        return _result(True, None, tol, status="saturated", h=hs)
    return _result(est.order >= tol, None, tol, order=est.order, h=hs,
                   drifts=[_json_num(d) for d in est.drifts])


_SUITES = {
    "pfaffian": _suite_pfaffian,
    "skew_consistency": _suite_skew_consistency,
    "skew_symmetry": _suite_skew_symmetry,
    "jacobi": _suite_jacobi,
    "casimir": _suite_casimir,
    "linear_invariants": _suite_linear,
    "drift_order": _suite_drift_order,
}


def run_check(rc: RunConfig) -> int:
    """Run the requested invariant suites and write a JSON report."""
    xs = _samples(rc, rc.check["samples"], rc.check["seed"])
    results = {}
    code = EXIT_OK
    for name in rc.check["suites"]:
        tol = rc.check["tolerances"][name]
        try:
            results[name] = _SUITES[name](rc, xs, tol)
        except HamformError as exc:
            results[name] = {"passed": False, "status": "error", "error": str(exc)}
            code = EXIT_NUMERIC
    passed = all(r["passed"] for r in results.values())
    write_json(rc.check_report_path, {"system": rc.system.name, "passed": passed, "suites": results})
    for name, r in results.items():
        print(f"{name}: {r['status']}", file=sys.stderr)
    if code == EXIT_OK and not passed:
        code = EXIT_CHECK
    return code


def _run_one(kind: str, path: str, overrides: List[str], out_dir: str) -> int:
    try:
        rc = load_config(path, overrides, out_dir)
    except ConfigError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_simulate(rc) if kind == "simulate" else run_check(rc)


def _dispatch(kind: str, paths: List[str], overrides: List[str], out_dir: str, jobs: int) -> int:
    stems = [Path(p).stem for p in paths]
    if len(set(stems)) != len(stems):
        print("error: configuration files must have distinct names", file=sys.stderr)
        return EXIT_CONFIG
    if jobs <= 1 or len(paths) == 1:
        codes = [_run_one(kind, p, overrides, out_dir) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, kind, p, overrides, out_dir) for p in paths]
            codes = [f.result() for f in futures]
    return max(codes)


def cmd_compile(path: str, params: Optional[dict] = None, out=None) -> int:
    """Print species, ODEs, stoichiometric matrix and linear invariants."""
    out = out or sys.stdout
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            net = parse_network(text, params)
    except NetworkSyntaxError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for w in caught:
        print(f"warning: {path}: {w.message}", file=sys.stderr)
    if not net.species:
        print(f"warning: {path}: empty network", file=sys.stderr)
        print("species: (none)", file=out)
        return EXIT_OK
    print("species: " + ", ".join(net.species), file=out)
    for name, rhs in zip(net.species, ode_strings(net)):
        print(f"d{name}/dt = {rhs}", file=out)
    print("stoichiometric matrix:", file=out)
    N = stoichiometric_matrix(net)
    width = max(len(s) for s in net.species)
    for name, row in zip(net.species, N):
        print(f"  {name:<{width}} " + " ".join(f"{v:3d}" for v in row), file=out)
    basis = linear_invariants(net)
    if basis.shape[0] == 0:
        print("conserved: none", file=out)
    for c in basis:
        print("conserved: " + format_linear(c, net.species), file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamform", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "integrate and write CSV + JSON report"),
                        ("check", "run invariant suites")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("configs", nargs="+", help="JSON run configuration(s)")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="override a dotted config key, e.g. system.params.eps=0.3")
        p.add_argument("--jobs", type=int, default=1, help="run configurations in parallel")
        p.add_argument("--out-dir", default=".", help="directory for output files")
    p = sub.add_parser("compile", help="compile a reaction-network file")
    p.add_argument("network")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                   help="value for a named rate constant")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "compile":
        params = {}
        for item in args.param:
            if "=" not in item:
                print(f"error: --param expects NAME=VALUE, got {item!r}", file=sys.stderr)
                return EXIT_CONFIG
            key, value = item.split("=", 1)
            try:
                params[key] = float(value)
            except ValueError:
                print(f"error: rate {key!r} must be numeric", file=sys.stderr)
                return EXIT_CONFIG
        return cmd_compile(args.network, params)
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    return _dispatch(args.command, args.configs, args.param, args.out_dir, args.jobs)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
