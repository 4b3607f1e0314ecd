"""Command-line front end: configs, experiment runs, sweeps, certification.

Config files are flat ``key = value`` lines (blank lines and ``#`` comments
allowed, unknown keys rejected).  A run writes, under ``output_dir``:

* ``trace.csv`` - one row per step, header
  ``t,dt,sup_u,sup_v,l1_v,s_minus,s_plus,lemma23_slack,eq210_slack``;
* ``snapshot_<t>.csv`` - (x, u) profiles at the scheduled times, support
  endpoints included with value zero;
* ``summary.txt`` - termination cause, threshold-crossing times, bounds.

Exit codes: 0 success, 2 config error, 3 monitor abort (or failed
selftest), 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import testing
from .analysis import certificate_search
from .driver import (
    MonitorViolation,
    SchemeParams,
    derive_q,
    run,
)
from .hyperbolic import hopf_lax_oracle, hopf_lax_step
from .mesh import NodalField, build_initial_grid
from .parabolic import assemble, solve

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "parse_config",
    "load_config",
    "build_initial_field",
    "run_experiment",
    "certify_blowup",
    "sweep",
    "selftest",
    "main",
]

TRACE_HEADER = "t,dt,sup_u,sup_v,l1_v,s_minus,s_plus,lemma23_slack,eq210_slack"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MONITOR = 3
EXIT_IO = 4


class ConfigError(ValueError):
    """Config file rejected; message carries the offending line."""


@dataclass
class ExperimentConfig:
    m: float
    p: float
    s0: float
    n: int
    t_end: float
    initial: str = "hat"
    peak: float = 1.0
    width: float | None = None
    table: list[tuple[float, float]] = dc_field(default_factory=list)
    blowup_threshold: float | None = None
    cfl_safety: float = 1.0
    existence_safety: float = 0.5
    dt_max: float = math.inf
    dt_floor: float | None = None
    strict: bool = False
    output_dir: str = "out"
    snapshot_times: list[float] = dc_field(default_factory=list)
    snapshot_every: int = 0
    certify: bool = False

    @property
    def q(self) -> float:
        return derive_q(self.m, self.p)

    def scheme_params(self) -> SchemeParams:
        return SchemeParams(
            m=self.m, p=self.p, t_end=self.t_end,
            cfl_safety=self.cfl_safety, existence_safety=self.existence_safety,
            dt_max=self.dt_max, blowup_threshold=self.blowup_threshold,
            dt_floor=self.dt_floor, strict=self.strict,
        )


_REQUIRED = ("m", "p", "s0", "n", "t_end")
_KNOWN = _REQUIRED + (
    "initial", "peak", "width", "table", "blowup_threshold",
    "cfl_safety", "existence_safety", "dt_max", "dt_floor", "strict",
    "output_dir", "snapshot_times", "snapshot_every", "certify",
)


def _parse_float(raw: str, key: str, lineno: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: key '{key}' expects a number, got '{raw}'") from None


def _parse_int(raw: str, key: str, lineno: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: key '{key}' expects an integer, got '{raw}'") from None


def _parse_bool(raw: str, key: str, lineno: int) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"line {lineno}: key '{key}' expects true/false, got '{raw}'")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a flat key-value experiment config."""
    seen: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{line}'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in seen:
            raise ConfigError(
                f"line {lineno}: duplicate key '{key}' (first set on line {seen[key][1]})"
            )
        seen[key] = (value, lineno)

    for key in _REQUIRED:
        if key not in seen:
            raise ConfigError(f"missing required key '{key}'")

    def fget(key: str) -> float:
        return _parse_float(seen[key][0], key, seen[key][1])

    def iget(key: str) -> int:
        return _parse_int(seen[key][0], key, seen[key][1])

    def bget(key: str) -> bool:
        return _parse_bool(seen[key][0], key, seen[key][1])

    m = fget("m")
    p = fget("p")
    s0 = fget("s0")
    n = iget("n")
    t_end = fget("t_end")

    try:
        derive_q(m, p)
    except ValueError as exc:
        lineno = seen["p"][1]
        raise ConfigError(
            f"line {lineno}: unsupported reaction regime: {exc}"
        ) from None
    if s0 <= 0.0:
        raise ConfigError(f"line {seen['s0'][1]}: s0 must be positive")
    if n < 1:
        raise ConfigError(f"line {seen['n'][1]}: n must be at least 1")
    if t_end <= 0.0:
        raise ConfigError(f"line {seen['t_end'][1]}: t_end must be positive")

    cfg = ExperimentConfig(m=m, p=p, s0=s0, n=n, t_end=t_end)

    if "initial" in seen:
        val, lineno = seen["initial"]
        if val not in ("hat", "cap", "table"):
            raise ConfigError(
                f"line {lineno}: initial must be one of hat|cap|table, got '{val}'"
            )
        cfg.initial = val
    if "peak" in seen:
        cfg.peak = fget("peak")
        if cfg.peak < 0.0:
            raise ConfigError(f"line {seen['peak'][1]}: peak must be nonnegative")
    if "width" in seen:
        cfg.width = fget("width")
        if not (0.0 < cfg.width <= s0):
            raise ConfigError(f"line {seen['width'][1]}: width must lie in (0, s0]")
    if "table" in seen:
        val, lineno = seen["table"]
        pairs = []
        for item in filter(None, (s.strip() for s in val.split(","))):
            if ":" not in item:
                raise ConfigError(
                    f"line {lineno}: table entries are 'x:value', got '{item}'"
                )
            xs, us = item.split(":", 1)
            x = _parse_float(xs, "table", lineno)
            u = _parse_float(us, "table", lineno)
            if not (-s0 <= x <= s0):
                raise ConfigError(f"line {lineno}: table point x={x} outside [-s0, s0]")
            if u < 0.0:
                raise ConfigError(f"line {lineno}: table values must be nonnegative")
            pairs.append((x, u))
        cfg.table = sorted(pairs)
    if cfg.initial == "table" and not cfg.table:
        raise ConfigError("initial = table requires a nonempty 'table' key")
    if "blowup_threshold" in seen:
        v = fget("blowup_threshold")
        if v < 0.0:
            raise ConfigError(
                f"line {seen['blowup_threshold'][1]}: blowup_threshold must be >= 0"
            )
        cfg.blowup_threshold = None if v == 0.0 else v
    if "cfl_safety" in seen:
        cfg.cfl_safety = fget("cfl_safety")
        if not (0.0 < cfg.cfl_safety <= 1.0):
            raise ConfigError(f"line {seen['cfl_safety'][1]}: cfl_safety must be in (0, 1]")
    if "existence_safety" in seen:
        cfg.existence_safety = fget("existence_safety")
        if not (0.0 < cfg.existence_safety < 1.0):
            raise ConfigError(
                f"line {seen['existence_safety'][1]}: existence_safety must be in (0, 1)"
            )
    if "dt_max" in seen:
        cfg.dt_max = fget("dt_max")
        if cfg.dt_max <= 0.0:
            raise ConfigError(f"line {seen['dt_max'][1]}: dt_max must be positive")
    if "dt_floor" in seen:
        v = fget("dt_floor")
        if v < 0.0:
            raise ConfigError(f"line {seen['dt_floor'][1]}: dt_floor must be >= 0")
        cfg.dt_floor = None if v == 0.0 else v
    if "strict" in seen:
        cfg.strict = bget("strict")
    if "output_dir" in seen:
        cfg.output_dir = seen["output_dir"][0]
    if "snapshot_times" in seen:
        val, lineno = seen["snapshot_times"]
        times = [_parse_float(s.strip(), "snapshot_times", lineno)
                 for s in val.split(",") if s.strip()]
        for t in times:
            if not (0.0 <= t <= t_end):
                raise ConfigError(
                    f"line {lineno}: snapshot time {t} outside [0, t_end]"
                )
        cfg.snapshot_times = sorted(times)
    if "snapshot_every" in seen:
        cfg.snapshot_every = iget("snapshot_every")
        if cfg.snapshot_every < 0:
            raise ConfigError(f"line {seen['snapshot_every'][1]}: snapshot_every must be >= 0")
    if "certify" in seen:
        cfg.certify = bget("certify")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from None
    return parse_config(text)


def build_initial_field(cfg: ExperimentConfig) -> NodalField:
    """Sample the configured initial condition on the start grid."""
    grid = build_initial_grid(cfg.s0, cfg.n)
    x = grid.nodes()
    width = cfg.width if cfg.width is not None else cfg.s0
    if cfg.initial == "hat":
        vals = cfg.peak * np.maximum(0.0, 1.0 - np.abs(x) / width)
    elif cfg.initial == "cap":
        vals = cfg.peak * np.maximum(0.0, 1.0 - (x / width) ** 2)
    else:
        xs = np.array([pt[0] for pt in cfg.table])
        us = np.array([pt[1] for pt in cfg.table])
        vals = np.interp(x, xs, us, left=0.0, right=0.0)
    return NodalField(grid, vals)


def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return "%.17g" % value


def _snapshot_path(outdir: Path, label: str, used: set[str]) -> Path:
    base = label
    k = 2
    while label in used:
        label = f"{base}_{k}"
        k += 1
    used.add(label)
    return outdir / f"snapshot_{label}.csv"


def _write_snapshot(path: Path, field: NodalField) -> None:
    xs = field.grid.breakpoints()
    us = field.padded_values()
    lines = ["x,u"]
    lines += [f"{_fmt(x)},{_fmt(u)}" for x, u in zip(xs, us)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_experiment(cfg: ExperimentConfig) -> tuple[int, dict]:
    """Run one experiment and write trace, snapshots and summary files.

    Returns (exit_code, summary).  Identical configs produce bit-identical
    trace files: the pipeline is deterministic and floats are printed with
    17 significant digits.
    """
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    field0 = build_initial_field(cfg)
    params = cfg.scheme_params()

    pending = list(cfg.snapshot_times)
    used_labels: set[str] = set()
    while pending and pending[0] <= 0.0:
        _write_snapshot(_snapshot_path(outdir, "%g" % pending[0], used_labels), field0)
        pending.pop(0)

    def observer(step_index: int, field: NodalField, report) -> None:
        while pending and report.t >= pending[0]:
            _write_snapshot(
                _snapshot_path(outdir, "%g" % pending[0], used_labels), field
            )
            pending.pop(0)
        if cfg.snapshot_every > 0 and (step_index + 1) % cfg.snapshot_every == 0:
            _write_snapshot(
                _snapshot_path(outdir, "%.12g" % report.t, used_labels), field
            )

    code = EXIT_OK
    aborted = None
    try:
        trace = run(field0, params, observer=observer)
    except MonitorViolation as exc:
        aborted = str(exc)
        trace = None
        code = EXIT_MONITOR

    summary: dict[str, object] = {
        "q": cfg.q,
        "h": field0.grid.h,
        "initial_sup": field0.sup_norm(),
    }

    if trace is not None:
        rows = [TRACE_HEADER]
        for r in trace.reports:
            rows.append(",".join(_fmt(v) for v in (
                r.t, r.dt, r.sup_u, r.sup_v, r.l1_v, r.s_minus, r.s_plus,
                r.growth_slack, r.lifetime_slack,
            )))
        (outdir / "trace.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

        summary.update({
            "termination": trace.cause,
            "steps": len(trace.reports),
            "final_time": trace.reports[-1].t if trace.reports else 0.0,
            "final_sup": trace.final_field.sup_norm(),
            "s_minus": trace.final_field.grid.s_minus,
            "s_plus": trace.final_field.grid.s_plus,
            "t1_lifetime": trace.t1,
            "monitor_violations": trace.violation_count,
        })
        if trace.blowup_time is not None:
            summary["blowup_time"] = trace.blowup_time
        for mult, t_cross in sorted(trace.threshold_times.items()):
            summary[f"t_threshold_1e{int(round(math.log10(mult)))}"] = t_cross
    else:
        summary["termination"] = "monitor_abort"
        summary["monitor_error"] = aborted

    if cfg.certify and field0.sup_norm() > 0.0:
        result = certificate_search(
            field0, cfg.m, cfg.q,
            blowup_threshold=params.blowup_threshold
            if params.blowup_threshold is not None else 1e6 * field0.sup_norm(),
            existence_safety=cfg.existence_safety,
        )
        summary["certificate_found"] = result.found
        summary["plateau_x0"], summary["plateau_eps"], summary["plateau_rho"] = result.plateau
        if result.found:
            cert = result.certificate
            summary["certificate_lambda"] = cert.params.lam
            summary["certificate_a"] = cert.params.a
            summary["certificate_T"] = cert.params.T
            summary["certificate_t_star"] = cert.t_star
            summary["certificate_delta"] = cert.params.delta
        else:
            summary["certificate_delta"] = result.last_delta

    lines = []
    for key, value in summary.items():
        if isinstance(value, float):
            lines.append(f"{key} = {_fmt(value)}")
        else:
            lines.append(f"{key} = {value}")
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return code, summary


def certify_blowup(cfg: ExperimentConfig) -> tuple[int, dict]:
    """Search a blow-up certificate for the configured initial data.

    Prints and writes (lambda, a, T, t_star) on success, or reports that no
    certificate exists at this mesh along with the limiting mesh slack.
    """
    field0 = build_initial_field(cfg)
    if field0.sup_norm() <= 0.0:
        raise ConfigError("cannot certify blow-up for identically zero initial data")
    threshold = (cfg.blowup_threshold if cfg.blowup_threshold is not None
                 else 1e6 * field0.sup_norm())
    result = certificate_search(field0, cfg.m, cfg.q, blowup_threshold=threshold,
                                existence_safety=cfg.existence_safety)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    report: dict[str, object] = {
        "found": result.found,
        "plateau_x0": result.plateau[0],
        "plateau_eps": result.plateau[1],
        "plateau_rho": result.plateau[2],
    }
    if result.found:
        cert = result.certificate
        report.update({
            "lambda": cert.params.lam,
            "a": cert.params.a,
            "T": cert.params.T,
            "t_star": cert.t_star,
            "delta": cert.params.delta,
        })
        print(f"certificate found: lambda={_fmt(cert.params.lam)} "
              f"a={_fmt(cert.params.a)} T={_fmt(cert.params.T)} "
              f"t_star={_fmt(cert.t_star)}")
    else:
        report["delta"] = result.last_delta
        print(f"no certificate at this mesh (delta = {_fmt(result.last_delta)})")

    lines = [f"{k} = {_fmt(v) if isinstance(v, float) else v}" for k, v in report.items()]
    (outdir / "certificate.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK, report


def _sweep_worker(path_str: str) -> tuple[str, int]:
    path = Path(path_str)
    try:
        cfg = load_config(path)
        cfg.output_dir = str(path.with_suffix(".out"))
        code, _ = run_experiment(cfg)
    except ConfigError as exc:
        print(f"{path.name}: config error: {exc}", file=sys.stderr)
        return path.name, EXIT_CONFIG
    except OSError as exc:
        print(f"{path.name}: i/o error: {exc}", file=sys.stderr)
        return path.name, EXIT_IO
    return path.name, code


def sweep(config_dir: str | Path, max_workers: int | None = None) -> int:
    """Run every ``*.cfg`` in a directory concurrently, one output dir each.

    Exit code is the most severe across runs (4 > 3 > 2 > 0).
    """
    paths = sorted(Path(config_dir).glob("*.cfg"))
    if not paths:
        print(f"no *.cfg files in {config_dir}", file=sys.stderr)
        return EXIT_CONFIG
    workers = max_workers or min(len(paths), os.cpu_count() or 1)
    results: list[tuple[str, int]] = []
    if workers == 1:
        results = [_sweep_worker(str(p)) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, [str(p) for p in paths]))
    severity = {EXIT_OK: 0, EXIT_CONFIG: 1, EXIT_MONITOR: 2, EXIT_IO: 3}
    worst = EXIT_OK
    for name, code in results:
        print(f"{name}: exit {code}")
        if severity.get(code, 3) > severity.get(worst, 0):
            worst = code
    return worst


def _selftest_propagation(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(60):
        field = testing.random_field(rng, 5, 60)
        m = float(rng.uniform(0.5, 3.0))
        dt = testing.random_cfl_dt(rng, field, m)
        result = hopf_lax_step(field, dt, m)
        nodes = result.field_half.grid.nodes()
        oracle = hopf_lax_oracle(field, dt, m, nodes)
        worst = max(worst, float(np.abs(result.field_half.values - oracle).max()))
    return worst < 1e-6, f"max |step - oracle| = {worst:.3e}"


def _selftest_tridiagonal(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(120):
        field = testing.random_field(rng, 3, 200)
        m = float(rng.uniform(0.5, 3.0))
        q = float(rng.uniform(0.05, 0.95))
        sup = field.sup_norm()
        dt = 0.5 / (m * q * sup**q) if sup > 0 else 0.1
        system = assemble(field, dt, m, q)
        x = solve(system).values
        ref = testing.dense_solve_oracle(system.dense(), system.rhs)
        if np.any(x < 0.0):
            return False, "negative component in a tridiagonal solve"
        scale = max(np.abs(ref).max(), 1e-300)
        worst = max(worst, float(np.abs(x - ref).max() / scale))
    return worst < 1e-12, f"max relative gap to the dense solve = {worst:.3e}"


def _selftest_mesh(rng: np.random.Generator) -> tuple[bool, str]:
    from .mesh import regrid
    checked = 0
    for _ in range(50):
        grid = testing.random_grid(rng, 3, 40)
        for _ in range(8):
            grid = regrid(grid.s_minus + float(rng.uniform(0.0, 0.49)) * grid.h,
                          grid.s_plus + float(rng.uniform(0.0, 0.49)) * grid.h,
                          grid.h)
            ok = (grid.h * (1 - 1e-12) <= grid.h_minus < 2 * grid.h * (1 + 1e-12)
                  and grid.h * (1 - 1e-12) <= grid.h_plus < 2 * grid.h * (1 + 1e-12))
            if not ok:
                return False, f"end widths out of range: {grid}"
            checked += 1
    return True, f"{checked} regrids kept end widths in [h, 2h)"


def _selftest_bounds(_: np.random.Generator) -> tuple[bool, str]:
    grid = build_initial_grid(1.0, 40)
    field = NodalField(grid, np.maximum(0.0, 1.0 - np.abs(grid.nodes())))
    params = SchemeParams(m=1.0, p=1.5, t_end=1.2, strict=True)
    trace = run(field, params)
    return trace.violation_count == 0, (
        f"{len(trace.reports)} steps, {trace.violation_count} violations"
    )


def _selftest_determinism(_: np.random.Generator) -> tuple[bool, str]:
    grid = build_initial_grid(1.0, 25)
    field = NodalField(grid, np.maximum(0.0, 1.0 - np.abs(grid.nodes())))
    params = SchemeParams(m=1.0, p=1.5, t_end=0.5)
    a = run(field, params)
    b = run(field, params)
    same = (len(a.reports) == len(b.reports) and all(
        ra == rb for ra, rb in zip(a.reports, b.reports)))
    return same, f"{len(a.reports)} steps reproduced"


def selftest() -> int:
    """Run the built-in oracle suites; prints one line per suite."""
    rng = np.random.default_rng(20240817)
    suites = [
        ("mesh regridding", _selftest_mesh),
        ("propagation vs variational oracle", _selftest_propagation),
        ("tridiagonal vs dense solve", _selftest_tridiagonal),
        ("a priori bounds on a blow-up run", _selftest_bounds),
        ("determinism", _selftest_determinism),
    ]
    failed = 0
    for name, fn in suites:
        ok, detail = fn(rng)
        print(f"{'PASS' if ok else 'FAIL'}  {name} ({detail})")
        failed += 0 if ok else 1
    return EXIT_OK if failed == 0 else EXIT_MONITOR


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="blowup1d",
        description="Front-tracking blow-up solver for w_t - (w^m w_x)_x = w^p",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    p_cert = sub.add_parser("certify", help="search a blow-up certificate")
    p_cert.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run every *.cfg in a directory")
    p_sweep.add_argument("config_dir")
    p_sweep.add_argument("--workers", type=int, default=None)
    sub.add_parser("selftest", help="run the built-in oracle suites")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            code, summary = run_experiment(load_config(args.config))
            for key, value in summary.items():
                print(f"{key} = {value}")
            return code
        if args.command == "certify":
            code, _ = certify_blowup(load_config(args.config))
            return code
        if args.command == "sweep":
            return sweep(args.config_dir, args.workers)
        if args.command == "selftest":
            return selftest()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MonitorViolation as exc:
        print(f"monitor abort: {exc}", file=sys.stderr)
        return EXIT_MONITOR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
