"""Batch command-line interface.

Every output file embeds the fully resolved configuration (JSON blob in a
leading comment line for CSV, a "config" key for JSON), so any result can be
reproduced bit-exactly by re-running from the file itself.  Exit codes:
0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    fit_effective_params,
    n_max,
    revival_time,
    sideband_spectrum,
    zeno_time,
)
from .errors import ConfigError, NumericalError
from .evolve import default_grid, propagate, source_term_series
from .hamiltonian import (
    DriveSpec,
    FqcSpec,
    HoleSpec,
    adaptive_spec_for_size,
    build_adaptive,
    build_single_level,
    build_two_level,
)
from .metrics import d1, d2, nonmarkovianity
from .reference import NonHermitianSpec, decay_single, evolve_nonhermitian
from .sweep import SweepFixed, SweepGrid, run_size_scan, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


@dataclass
class RunConfig:
    """Resolved run configuration; unknown keys are rejected."""

    model: str = "decay"
    n_half: int = 15
    coupling_v: float = 0.3
    gamma: float = 1.0
    omega0: float = 0.0
    detuning: float = 0.0
    hole_half_width: float | None = None
    t_f: float = 10.0
    grid_points: int = 2001
    initial_state: str = "e"
    seed: int = 0
    count: int = 64
    metric: str = "d1"
    n_values: list[int] | None = None
    v_values: list[float] | None = None
    sizes: list[int] | None = None
    flat_size: int = 35
    adaptive_size: int = 34

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        if cfg.model not in ("decay", "rabi", "adaptive"):
            raise ConfigError(f"model must be decay|rabi|adaptive, got {cfg.model!r}")
        if cfg.grid_points < 2:
            raise ConfigError("grid_points must be >= 2")
        if cfg.t_f <= 0:
            raise ConfigError("t_f must be > 0")
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def embedded_config(path) -> dict:
    """Recover the resolved config embedded in an output file."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)["config"]
    for line in text.splitlines():
        if line.startswith("# fqcsim-config: "):
            return json.loads(line[len("# fqcsim-config: "):])
    raise ConfigError(f"no embedded config found in {path}")


def _header(cfg: RunConfig) -> tuple[str, ...]:
    return (
        f"fqcsim-version: {__version__}",
        f"fqcsim-config: {cfg.canonical_json()}",
    )


def _dump_json(path, payload: dict, cfg: RunConfig) -> None:
    payload = dict(payload)
    payload["config"] = cfg.to_dict()
    payload["version"] = __version__
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _spec(cfg: RunConfig) -> FqcSpec:
    hole = None
    if cfg.model == "adaptive":
        half = cfg.hole_half_width if cfg.hole_half_width is not None else cfg.omega0 / 2.0
        hole = HoleSpec(half)
    elif cfg.hole_half_width is not None:
        hole = HoleSpec(cfg.hole_half_width)
    return FqcSpec(cfg.n_half, cfg.coupling_v, cfg.gamma, hole)


def _drive(cfg: RunConfig) -> DriveSpec:
    return DriveSpec(cfg.omega0, cfg.detuning)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_decay(cfg: RunConfig, out: Path) -> None:
    h = build_single_level(_spec(cfg))
    times = default_grid(cfg.t_f, cfg.grid_points)
    series = propagate(h, cfg.initial_state, times)
    ref = decay_single(cfg.gamma, float(series.pi_e[0]), times)
    header = _header(cfg)

    with open(out / "timeseries.csv", "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("t,pi_e,pi_ref\n")
        for t, p, q in zip(times, series.pi_e, ref.pi_e):
            fh.write(f"{t:.16e},{p:.16e},{q:.16e}\n")

    metric = d1(series, cfg.gamma, cfg.t_f)
    try:
        zeno = zeno_time(series).to_json()
    except ConfigError as exc:
        zeno = {"converged": False, "notes": str(exc), "params": {}}
    payload = {
        "d1": metric.to_json(),
        "zeno": zeno,
        "revival": revival_time(series).to_json(),
    }
    _dump_json(out / "metrics.json", payload, cfg)


def _two_level_run(cfg: RunConfig):
    spec = _spec(cfg)
    builder = build_adaptive if spec.hole is not None else build_two_level
    h = builder(spec, _drive(cfg))
    times = default_grid(cfg.t_f, cfg.grid_points)
    series = propagate(h, cfg.initial_state, times)
    psi0 = np.zeros(2, dtype=complex)
    psi0[1 if cfg.initial_state == "e" else 0] = 1.0
    ref = evolve_nonhermitian(NonHermitianSpec(cfg.gamma, _drive(cfg)), psi0, times)
    return spec, h, times, series, ref


def cmd_rabi(cfg: RunConfig, out: Path, with_sidebands: bool, with_markov: bool) -> None:
    spec, h, times, series, ref = _two_level_run(cfg)
    header = _header(cfg)
    series.to_csv(out / "timeseries.csv", extra_header=header)
    ref.to_csv(out / "reference.csv", extra_header=header)

    sources = source_term_series(series, spec)
    with open(out / "source_terms.csv", "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("t,s_ge_re,s_ge_im,s_ee_re,s_ee_im\n")
        for i, t in enumerate(times):
            fh.write(
                f"{t:.16e},{sources[i, 0, 1].real:.16e},{sources[i, 0, 1].imag:.16e},"
                f"{sources[i, 1, 1].real:.16e},{sources[i, 1, 1].imag:.16e}\n"
            )

    payload = {"d2": d2(series, ref, cfg.t_f).to_json()}
    if with_sidebands:
        sb = sideband_spectrum(spec, _drive(cfg), include_quadrature=True, t_f=cfg.t_f)
        sb.to_csv(out / "sidebands.csv", extra_header=header)
        payload["n_max"] = n_max(spec, _drive(cfg))
    if with_markov:
        mk = nonmarkovianity(h, cfg.t_f, count=cfg.count, seed=cfg.seed)
        mk.to_csv(out / "sigma.csv", extra_header=header)
        payload["nonmarkovianity"] = mk.to_json()
    _dump_json(out / "metrics.json", payload, cfg)


def cmd_sidebands(cfg: RunConfig, out: Path) -> None:
    spec, drive = _spec(cfg), _drive(cfg)
    sb = sideband_spectrum(spec, drive, include_quadrature=True, t_f=cfg.t_f)
    sb.to_csv(out / "sidebands.csv", extra_header=_header(cfg))
    _dump_json(out / "sidebands.json", {"n_max": n_max(spec, drive)}, cfg)


def cmd_markov(cfg: RunConfig, out: Path) -> None:
    spec = _spec(cfg)
    h = build_two_level(spec, _drive(cfg))
    mk = nonmarkovianity(h, cfg.t_f, count=cfg.count, seed=cfg.seed,
                         grid_points=cfg.grid_points)
    mk.to_csv(out / "sigma.csv", extra_header=_header(cfg))
    _dump_json(out / "markov.json", {"nonmarkovianity": mk.to_json()}, cfg)


def cmd_fit(cfg: RunConfig, out: Path) -> None:
    _, _, _, series, ref = _two_level_run(cfg)
    report = fit_effective_params(series, cfg.t_f)
    payload = {
        "fit": report.to_json(),
        "d2": d2(series, ref, cfg.t_f).to_json(),
    }
    _dump_json(out / "fit.json", payload, cfg)


def cmd_sweep(cfg: RunConfig, out: Path, size_scan: bool, adaptive: bool,
              normalize: bool = False) -> None:
    if size_scan:
        sizes = cfg.sizes or list(range(10, 81, 2))
        scan = run_size_scan(
            sizes,
            _drive(cfg),
            coupling_v=cfg.coupling_v,
            gamma=cfg.gamma,
            t_f=cfg.t_f,
            grid_points=cfg.grid_points,
            include_adaptive=adaptive or any(s % 2 == 0 for s in sizes),
            hole_half_width=cfg.hole_half_width,
        )
        scan.to_csv(out / "size_scan.csv", extra_header=_header(cfg))
        _dump_json(out / "size_scan.json", scan.to_json(), cfg)
        return
    n_values = cfg.n_values or list(range(2, 41))
    v_values = cfg.v_values or [round(0.05 + 0.01 * i, 4) for i in range(56)]
    model = cfg.model if cfg.model != "decay" else "single"
    if model == "rabi":
        model = "two-level"
    grid = SweepGrid(
        tuple(n_values),
        tuple(v_values),
        SweepFixed(
            t_f=cfg.t_f,
            omega0=cfg.omega0,
            detuning=cfg.detuning,
            model=model,
            gamma=cfg.gamma,
            grid_points=cfg.grid_points,
            hole_half_width=cfg.hole_half_width,
        ),
        cfg.metric,
    )
    result = run_sweep(grid, seed=cfg.seed)
    if normalize:
        peak = np.nanmax(result.values)
        if peak > 0:
            result.values = result.values / peak
        result.provenance["normalized_to_max"] = float(peak)
    result.to_csv(out / "map.csv", extra_header=_header(cfg))
    _dump_json(out / "map.json", result.to_json(), cfg)


def cmd_adaptive_compare(cfg: RunConfig, out: Path) -> None:
    drive = _drive(cfg)
    times = default_grid(cfg.t_f, cfg.grid_points)
    half = cfg.hole_half_width if cfg.hole_half_width is not None else cfg.omega0 / 2.0
    header = _header(cfg)

    if cfg.flat_size < 1 or cfg.flat_size % 2 == 0:
        raise ConfigError(f"flat_size must be a positive odd integer, got {cfg.flat_size}")
    flat_spec = FqcSpec((cfg.flat_size - 1) // 2, cfg.coupling_v, cfg.gamma)
    adaptive_spec = adaptive_spec_for_size(cfg.adaptive_size, cfg.coupling_v, half, cfg.gamma)
    ref = evolve_nonhermitian(NonHermitianSpec(cfg.gamma, drive), np.array([0.0, 1.0]), times)
    ref.to_csv(out / "reference.csv", extra_header=header)

    payload = {}
    for name, spec in (("flat", flat_spec), ("adaptive", adaptive_spec)):
        series = propagate(build_two_level(spec, drive), cfg.initial_state, times)
        series.to_csv(out / f"{name}.csv", extra_header=header)
        fit = fit_effective_params(series, cfg.t_f)
        payload[name] = {
            "n_fqc": spec.n_levels,
            "fit": fit.to_json(),
            "d2": d2(series, ref, cfg.t_f).to_json(),
        }
    _dump_json(out / "compare.json", payload, cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fqcsim",
        description="Finite quasi-continuum emulation of non-Hermitian dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, help="JSON config file")
        p.add_argument("--out", type=str, default="fqcsim-out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--grid-points", type=int, dest="grid_points")
        p.add_argument("--tf", type=float, dest="t_f")
        p.add_argument("--n", type=int, dest="n_half")
        p.add_argument("--v", type=float, dest="coupling_v")
        p.add_argument("--gamma", type=float)
        p.add_argument("--omega0", type=float)
        p.add_argument("--detuning", type=float)
        p.add_argument("--hole-half-width", type=float, dest="hole_half_width")
        p.add_argument("--initial-state", type=str, dest="initial_state")

    p = sub.add_parser("decay", help="single unstable level versus exponential decay")
    common(p)
    p = sub.add_parser("rabi", help="driven two-level system versus non-Hermitian dynamics")
    common(p)
    p.add_argument("--sidebands", action="store_true")
    p.add_argument("--markov", action="store_true")
    p.add_argument("--count", type=int)
    p = sub.add_parser("sweep", help="suitability map over (N, v), or a size scan")
    common(p)
    p.add_argument("--metric", type=str, choices=("d1", "d2", "fit"))
    p.add_argument("--model", type=str, choices=("decay", "rabi", "adaptive"))
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--n-step", type=int, default=1)
    p.add_argument("--v-min", type=float)
    p.add_argument("--v-max", type=float)
    p.add_argument("--v-step", type=float, default=0.01)
    p.add_argument("--size-scan", action="store_true")
    p.add_argument("--sizes", type=str, help="comma-separated FQC sizes")
    p.add_argument("--adaptive", action="store_true")
    p.add_argument("--normalize", action="store_true",
                   help="rescale the map to its maximum value")
    p = sub.add_parser("sidebands", help="FQC occupation spectrum under driving")
    common(p)
    p = sub.add_parser("markov", help="sampled non-Markovianity measure")
    common(p)
    p.add_argument("--count", type=int)
    p = sub.add_parser("fit", help="effective Rabi frequency and damping rate")
    common(p)
    p = sub.add_parser("adaptive-compare", help="flat versus adaptive FQC at fixed budget")
    common(p)
    p.add_argument("--flat-size", type=int, dest="flat_size")
    p.add_argument("--adaptive-size", type=int, dest="adaptive_size")
    return parser


_COMMAND_DEFAULTS = {
    "decay": {"model": "decay", "t_f": 10.0},
    "rabi": {"model": "rabi", "t_f": 8.0, "omega0": 1.0},
    "sweep": {"model": "decay", "t_f": 10.0},
    "sidebands": {"model": "rabi", "t_f": 8.0, "omega0": 10.0, "n_half": 22},
    "markov": {"model": "rabi", "t_f": 24.0, "omega0": 1.0, "n_half": 25,
               "coupling_v": 0.25, "count": 256},
    "fit": {"model": "rabi", "t_f": 16.0, "omega0": 10.0},
    "adaptive-compare": {"model": "rabi", "t_f": 16.0, "omega0": 10.0},
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data = dict(_COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            file_data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_data, dict):
            raise ConfigError("config file must hold a JSON object")
        data.update(file_data)
    overridable = {f.name for f in dataclasses.fields(RunConfig)}
    for key, value in vars(args).items():
        if key in overridable and value is not None:
            data[key] = value
    if getattr(args, "sizes", None):
        data["sizes"] = [int(s) for s in str(args.sizes).split(",") if s]
    if getattr(args, "model", None):
        data["model"] = args.model
    for axis, (lo, hi, step) in {
        "n_values": ("n_min", "n_max", "n_step"),
        "v_values": ("v_min", "v_max", "v_step"),
    }.items():
        lo_v, hi_v = getattr(args, lo, None), getattr(args, hi, None)
        if lo_v is not None and hi_v is not None:
            st = getattr(args, step)
            if axis == "n_values":
                data[axis] = list(range(lo_v, hi_v + 1, st))
            else:
                n_steps = int(round((hi_v - lo_v) / st))
                data[axis] = [round(lo_v + i * st, 10) for i in range(n_steps + 1)]
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = _outdir(args)
        if args.command == "decay":
            cmd_decay(cfg, out)
        elif args.command == "rabi":
            cmd_rabi(cfg, out, args.sidebands, args.markov)
        elif args.command == "sweep":
            cmd_sweep(cfg, out, args.size_scan, args.adaptive, args.normalize)
        elif args.command == "sidebands":
            cmd_sidebands(cfg, out)
        elif args.command == "markov":
            cmd_markov(cfg, out)
        elif args.command == "fit":
            cmd_fit(cfg, out)
        elif args.command == "adaptive-compare":
            cmd_adaptive_compare(cfg, out)
        else:  # pragma: no cover
            raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
