"""Command-line front end: ``simulate``, ``verify``, ``sweep`` and ``coeffs``.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 a run ended in
NonFinite, 3 Lyapunov coefficient selection infeasible, 4 a verification
report contains violations.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis
from .errors import HypothesisError, InfeasibleError, ParameterError, ShapeError, VariantError
from .functionals import (
    LyapunovCoeffs,
    LyapunovVariant,
    coeffs_from_dict,
    cross_helicity,
    energy,
    lyapunov,
    select_coefficients,
    sobolev_norm,
    with_constants,
)
from .integrator import EventKind, StepControls, Trajectory, classify_outcome, integrate_adaptive
from .shell_model import ModelSpec, ShellState, Variant, theta_of_delta

EXIT_OK, EXIT_CONFIG, EXIT_NONFINITE, EXIT_INFEASIBLE, EXIT_VIOLATION = 0, 1, 2, 3, 4
WORKERS_ENV = "DYADIC_MHD_WORKERS"
CSV_COLUMNS = ("t", "E", "Hc", "L", "dLdt", "K_L32", "norm_a_g1", "norm_b_g1",
               "norm_a_blow", "norm_b_blow", "front_shell", "min_component")
INITIAL_MODES = ("geometric", "single_mode", "random_damped")


class ConfigError(Exception):
    """Invalid scenario configuration; ``line`` points into the JSON source when known."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "config"):
        self.message = message
        self.line = line
        self.source = source
        super().__init__(str(self))

    def __str__(self):
        where = f"{self.source}:{self.line}" if self.line else self.source
        return f"{where}: {self.message}"


def fmt(x) -> str:
    """17 significant digits: round-trip exact for doubles."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


# Configuration

@dataclass(frozen=True)
class Scenario:
    model: ModelSpec
    state0: ShellState
    controls: StepControls
    coeffs: Optional[LyapunovCoeffs]
    csv_path: Path
    events_path: Path


def _line_of(text: str, key: str) -> Optional[int]:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


class _Ctx:
    """Raises ConfigError with the line of the offending key."""

    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source

    def fail(self, key: Optional[str], message: str):
        raise ConfigError(message, _line_of(self.text, key) if key else None, self.source)

    def block(self, doc: dict, name: str, required: bool = True) -> dict:
        if name not in doc:
            if required:
                self.fail(None, f"missing block '{name}'")
            return {}
        value = doc[name]
        if not isinstance(value, dict):
            self.fail(name, f"block '{name}' must be an object")
        return value

    def number(self, block: dict, key: str, default=None, required=False):
        if key not in block:
            if required:
                self.fail(None, f"missing field '{key}'")
            return default
        v = block[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(key, f"field '{key}' must be a finite number, got {v!r}")
        return v


def parse_json(text: str, source: str = "config") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno, source) from None
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object", 1, source)
    return doc


def _model(ctx: _Ctx, block: dict) -> ModelSpec:
    known = {"variant", "lambda", "theta", "delta", "nu", "mu", "d_i", "n_shells",
             "alpha", "beta", "delta_u", "delta_b"}
    for key in block:
        if key not in known:
            ctx.fail(key, f"unknown model field '{key}'")
    variant = block.get("variant", "sys2")
    try:
        variant = Variant(variant)
    except ValueError:
        ctx.fail("variant", f"unknown variant {variant!r}; choose from {[v.value for v in Variant]}")
    lam = ctx.number(block, "lambda", required=True)
    n = block.get("n_shells", 20)
    if isinstance(n, bool) or not isinstance(n, int):
        ctx.fail("n_shells", f"n_shells must be an integer, got {n!r}")
    kwargs = {k: ctx.number(block, k, 0.0) for k in ("nu", "mu", "d_i")}
    try:
        if variant is Variant.GENERAL:
            for key in ("alpha", "beta"):
                if not isinstance(block.get(key), list):
                    ctx.fail(key if key in block else None, f"general model needs a 4-entry list '{key}'")
            return ModelSpec(variant, lam, None, n_shells=n, alpha_coeffs=tuple(block["alpha"]),
                             beta_coeffs=tuple(block["beta"]),
                             delta_u=ctx.number(block, "delta_u", required=True),
                             delta_b=ctx.number(block, "delta_b", required=True), **kwargs)
        has_theta, has_delta = "theta" in block, "delta" in block
        if has_theta == has_delta:
            ctx.fail("theta" if has_theta else None, "give exactly one of 'theta' or 'delta'")
        if has_delta:
            return ModelSpec.from_delta(variant, lam, ctx.number(block, "delta"), n_shells=n, **kwargs)
        return ModelSpec(variant, lam, ctx.number(block, "theta"), n_shells=n, **kwargs)
    except (ParameterError, VariantError, TypeError) as exc:
        ctx.fail(None, f"model: {exc}")


def _profile(ctx: _Ctx, spec, name: str, n: int) -> np.ndarray:
    if not isinstance(spec, dict):
        ctx.fail(name, f"initial '{name}' must be an object")
    mode = spec.get("mode", "geometric")
    j = np.arange(1, n + 1, dtype=float)
    amp = ctx.number(spec, "amplitude", 1.0)
    if mode == "geometric":
        ratio = ctx.number(spec, "ratio", 0.5)
        out = amp * np.power(float(ratio), j)
    elif mode == "single_mode":
        idx = spec.get("index", 1)
        if isinstance(idx, bool) or not isinstance(idx, int) or not 1 <= idx <= n:
            ctx.fail("index", f"single_mode index must be an integer in 1..{n}, got {idx!r}")
        out = np.zeros(n)
        out[idx - 1] = amp
    elif mode == "random_damped":
        seed = spec.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            ctx.fail("seed", f"seed must be an integer, got {seed!r}")
        ratio = ctx.number(spec, "ratio", 0.5)
        out = amp * np.random.default_rng(seed).random(n) * np.power(float(ratio), j)
    else:
        ctx.fail("mode", f"unknown initial mode {mode!r}; choose from {INITIAL_MODES}")
    if not np.all(np.isfinite(out)):
        ctx.fail(name, f"initial '{name}' is not finite")
    return out


def _controls(ctx: _Ctx, block: dict) -> StepControls:
    names = {f.name for f in fields(StepControls)}
    for key in block:
        if key not in names:
            ctx.fail(key, f"unknown controls field '{key}'")
    try:
        return StepControls(**block)
    except (ParameterError, TypeError) as exc:
        ctx.fail(None, f"controls: {exc}")


def analysis_exponents(model: ModelSpec, variant: LyapunovVariant, gamma: float):
    """``(lambda, theta, s_a, s_b)`` in the physical ladder for the norm columns."""
    lam = model.wavenumber_base
    theta = model.physical_theta
    if theta is None:
        return lam, None, math.nan, math.nan
    s_a = theta / 3 + 2 * gamma / 3
    s_b = (theta + 1) / 3 + 2 * gamma / 3 if variant is LyapunovVariant.HALL else s_a
    return lam, theta, s_a, s_b


def _lyapunov(ctx: _Ctx, block: dict, model: ModelSpec) -> Optional[LyapunovCoeffs]:
    if not block:
        return None
    default = "mhd" if model.d_i == 0 else "hall"
    try:
        variant = LyapunovVariant(block.get("variant", default))
    except ValueError:
        ctx.fail("variant", f"unknown Lyapunov variant {block.get('variant')!r}")
    gamma = ctx.number(block, "gamma", required=True)
    lam, theta = model.wavenumber_base, model.physical_theta
    if theta is None:
        ctx.fail("lyapunov", "the Lyapunov functional needs a variant with a theta exponent")
    explicit = block.get("coefficients")
    if explicit is not None:
        if not isinstance(explicit, dict):
            ctx.fail("coefficients", "coefficients must be an object")
        base = {"variant": variant.value, "gamma": gamma, "c0": 1.0, "M1": 0.0, "M0": 0.0, "K": 1.0, "c4": 0.0}
        base.update(explicit)
        try:
            coeffs = coeffs_from_dict(base)
            if theta > 3 + gamma:
                coeffs = with_constants(coeffs, lam, theta, model.nu, model.mu)
            return coeffs
        except (ParameterError, TypeError, KeyError) as exc:
            ctx.fail("coefficients", f"coefficients: {exc}")
    return select_coefficients(variant, lam, gamma, theta, model.nu, model.mu)


def build_scenario(doc: dict, text: str, source: str = "config", base_dir: Path = Path(".")) -> Scenario:
    ctx = _Ctx(text, source)
    for key in doc:
        if key not in ("model", "initial", "controls", "lyapunov", "outputs"):
            ctx.fail(key, f"unknown block '{key}'")
    model = _model(ctx, ctx.block(doc, "model"))
    init = ctx.block(doc, "initial")
    n = model.n_shells
    a = _profile(ctx, init.get("a", {"mode": "geometric"}), "a", n)
    b = _profile(ctx, init.get("b", {"mode": "geometric", "amplitude": 0.0}), "b", n)
    controls = _controls(ctx, ctx.block(doc, "controls", required=False))
    coeffs = _lyapunov(ctx, ctx.block(doc, "lyapunov", required=False), model)
    outputs = ctx.block(doc, "outputs", required=False)
    stem = Path(source).stem
    csv_path = base_dir / outputs.get("csv", f"{stem}.csv")
    events_path = base_dir / outputs.get("events", f"{stem}.events.jsonl")
    return Scenario(model, ShellState(0.0, a, b), controls, coeffs, csv_path, events_path)


def load_scenario(path: Path) -> Scenario:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    doc = parse_json(text, str(path))
    return build_scenario(doc, text, str(path), path.parent)


# Diagnostics and output

def diagnostic_rows(traj: Trajectory, coeffs: Optional[LyapunovCoeffs]) -> list:
    """One row per sample in ``CSV_COLUMNS`` order."""
    model = traj.model
    variant = coeffs.variant if coeffs else (LyapunovVariant.MHD if model.d_i == 0 else LyapunovVariant.HALL)
    gamma = coeffs.gamma if coeffs else 0.0
    lam, _, s_a, s_b = analysis_exponents(model, variant, gamma)
    t = traj.times
    if coeffs is not None:
        L = np.array([lyapunov(s, coeffs, lam) for s in traj.samples])
        dL = np.gradient(L, t) if len(t) >= 2 else np.full(len(t), math.nan)
        KL = coeffs.K * np.maximum(L, 0.0) ** 1.5
    else:
        L = dL = KL = np.full(len(t), math.nan)
    rows = []
    for i, s in enumerate(traj.samples):
        norm = lambda x, e: sobolev_norm(x, e, lam) if math.isfinite(e) else math.nan
        rows.append([s.t, energy(s), cross_helicity(s), L[i], dL[i], KL[i],
                     norm(s.a, gamma + 1), norm(s.b, gamma + 1), norm(s.a, s_a), norm(s.b, s_b),
                     analysis.spectral_front(s), min(float(np.min(s.a)), float(np.min(s.b)))])
    return rows


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) if isinstance(x, (int, float, np.number)) and not isinstance(x, bool) else x
                        for x in row])


def write_events(path: Path, events):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps(_jsonable(ev.to_dict()), sort_keys=True) + "\n")


def exit_code_for(traj: Trajectory) -> int:
    return EXIT_NONFINITE if traj.terminal.kind is EventKind.NON_FINITE else EXIT_OK


def run_scenario(sc: Scenario) -> Trajectory:
    traj = integrate_adaptive(sc.model, sc.state0, sc.controls)
    write_csv(sc.csv_path, CSV_COLUMNS, diagnostic_rows(traj, sc.coeffs))
    write_events(sc.events_path, traj.events)
    return traj


# Commands

def cmd_simulate(args) -> int:
    try:
        sc = load_scenario(Path(args.config))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"error: infeasible Lyapunov coefficients (violated {exc.condition_id}): {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ParameterError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    traj = run_scenario(sc)
    term = traj.terminal
    print(f"{term.kind.value} at t={fmt(term.t)}; {len(traj.samples)} samples -> {sc.csv_path}")
    return exit_code_for(traj)


def _variants(name: str):
    return ("mhd", "hall") if name == "both" else (name,)


def cmd_verify(args) -> int:
    try:
        report = analysis.run_suite(args.suite, args.lam, args.theta, args.gamma, _variants(args.variant),
                                    seed=args.seed, count=args.count, n_shells=args.n_shells,
                                    nu=args.nu, mu=args.mu)
    except InfeasibleError as exc:
        print(f"error: infeasible coefficients, violated {exc.condition_id}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParameterError, HypothesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = report.to_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for e in report.skipped():
        print(f"warning: {e.condition_id} not applicable ({e.witness})", file=sys.stderr)
    for e in report.violations():
        print(f"violation: {e.condition_id} residual {fmt(e.residual)} in {e.failures}/{e.samples}",
              file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_coeffs(args) -> int:
    try:
        c = select_coefficients(args.variant, args.lam, args.gamma, args.theta, args.nu, args.mu)
    except InfeasibleError as exc:
        print(f"error: infeasible, violated {exc.condition_id}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(_jsonable(c.to_dict()), indent=2))
    return EXIT_OK


def parse_axis(spec: str):
    """``name=v1,v2,...`` to ``(name, [values])``; values are parsed as JSON scalars."""
    if "=" not in spec:
        raise ValueError(f"axis must look like name=v1,v2,..., got {spec!r}")
    name, _, raw = spec.partition("=")
    values = []
    for item in filter(None, (x.strip() for x in raw.split(","))):
        try:
            values.append(json.loads(item))
        except json.JSONDecodeError:
            values.append(item)
    return name.strip(), values


def _set_path(doc: dict, name: str, value):
    if "." in name:
        *blocks, key = name.split(".")
        node = doc
        for b in blocks:
            node = node.setdefault(b, {})
        node[key] = value
        return
    for block in ("model", "controls", "lyapunov"):
        if name in doc.get(block, {}):
            doc[block][name] = value
            return
    if name in {f.name for f in fields(StepControls)}:
        doc.setdefault("controls", {})[name] = value
    else:
        doc.setdefault("model", {})[name] = value


SUMMARY_TAIL = ("status", "outcome", "terminal_event", "t_final", "max_norm_a_blow",
                "max_norm_b_blow", "riccati_fraction", "message")


def sweep_row(job):
    """Run one sweep row; never raises (errors become a status=Error row)."""
    index, doc, text, source, out_dir = job
    row_dir = Path(out_dir) / f"row_{index:03d}"
    try:
        doc = copy.deepcopy(doc)
        doc["outputs"] = {"csv": "run.csv", "events": "events.jsonl"}
        sc = build_scenario(doc, text, source, row_dir)
        traj = run_scenario(sc)
        rows = diagnostic_rows(traj, sc.coeffs)
        frac = math.nan
        if sc.coeffs is not None and len(traj.samples) >= 3:
            frac = analysis.riccati_monitor(traj, sc.coeffs, traj.model.wavenumber_base).fraction_satisfied()
        try:
            outcome = classify_outcome(traj, sc.coeffs, traj.model.wavenumber_base).value
            message = ""
        except ParameterError as exc:
            outcome, message = "Inconclusive", str(exc)
        return ["ok", outcome, traj.terminal.kind.value, traj.terminal.t,
                max(r[8] for r in rows), max(r[9] for r in rows), frac, message]
    except (ConfigError, ParameterError, ShapeError, VariantError) as exc:
        return ["Error", "", "", math.nan, math.nan, math.nan, math.nan, str(exc)]


def worker_count(flag: Optional[int]) -> int:
    if flag is not None:
        return max(1, flag)
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_sweep(args) -> int:
    path = Path(args.template)
    try:
        text = path.read_text()
        doc = parse_json(text, str(path))
        axes = [parse_axis(a) for a in args.axis]
    except OSError as exc:
        print(f"error: {path}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out_dir) if args.out_dir else path.parent / f"{path.stem}_sweep"
    names = [n for n, _ in axes]
    combos = list(itertools.product(*[v for _, v in axes])) if axes else [()]
    jobs = []
    for i, combo in enumerate(combos):
        row_doc = copy.deepcopy(doc)
        for name, value in zip(names, combo):
            _set_path(row_doc, name, value)
        jobs.append((i, row_doc, text, str(path), str(out_dir)))
    workers = worker_count(args.workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(sweep_row, jobs))
    else:
        results = [sweep_row(j) for j in jobs]
    header = ["row", *names, *SUMMARY_TAIL]
    rows = [[i, *combo, *res] for i, (combo, res) in enumerate(zip(combos, results))]
    summary = Path(args.summary) if args.summary else out_dir / "summary.csv"
    write_csv(summary, header, rows)
    n_err = sum(r[len(names) + 1] == "Error" for r in rows)
    print(f"{len(rows)} rows ({n_err} errors) -> {summary}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyadic-mhd", description="Dyadic MHD / Hall-MHD shell model toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario from a JSON config")
    s.add_argument("config")
    s.set_defaults(func=cmd_simulate)

    def params(q, with_visc=True):
        q.add_argument("--lambda", dest="lam", type=float, default=2.0)
        q.add_argument("--theta", type=float, default=3.5)
        q.add_argument("--gamma", type=float, default=0.25)
        if with_visc:
            q.add_argument("--nu", type=float, default=0.0)
            q.add_argument("--mu", type=float, default=0.0)

    v = sub.add_parser("verify", help="run an inequality verification suite")
    v.add_argument("suite", choices=analysis.SUITES)
    params(v)
    v.add_argument("--variant", choices=("mhd", "hall", "both"), default="both")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=1000)
    v.add_argument("--n-shells", type=int, default=12)
    v.add_argument("--out", help="write the report here instead of stdout")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="run a template over a parameter grid")
    w.add_argument("template")
    w.add_argument("--axis", action="append", default=[], help="name=v1,v2,... (repeatable)")
    w.add_argument("--workers", type=int, help=f"parallel rows (default: ${WORKERS_ENV} or 1)")
    w.add_argument("--out-dir")
    w.add_argument("--summary")
    w.set_defaults(func=cmd_sweep)

    c = sub.add_parser("coeffs", help="print constructive Lyapunov coefficients as JSON")
    c.add_argument("--variant", choices=("mhd", "hall"), default="mhd")
    params(c)
    c.set_defaults(func=cmd_coeffs)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
