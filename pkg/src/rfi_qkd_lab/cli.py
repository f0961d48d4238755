"""Command-line front end: simulate, witness, reconstruct, rate, sweep, misalign-scan.

Every numeric field of the run configuration can come from a flat JSON
config file (--config) and be overridden by the flag of the same name.
All floating-point output is printed with 12 significant digits and files
are written deterministically (seeds included), so identical invocations
produce byte-identical outputs.

Exit codes: 0 success (a non-positive rate is still success), 2 I/O
failure, 3 invalid or incomplete input data, 4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .keyrate import (
    ChannelEstimate,
    estimate_channel,
    isotropic_asymptotic_rate,
    optimize_rate,
)
from .states import (
    DensityMatrix,
    MeasurementStats,
    apply_misalignment,
    apply_z_tilt,
    bell_state,
    frame_unitaries,
    isotropic_state,
    measure_joint,
    qber,
    sample_stats,
)
from .tomography import (
    TomographyInput,
    correlators_from_stats,
    expected_settings,
    extract_spectrum,
    reconstruct_state,
)
from .weyl import is_prime, mub_eigenbases
from .witness import c_parameter, max_c_value, separable_bound, witness_verdict

EXIT_OK = 0
EXIT_IO = 2
EXIT_INPUT = 3
EXIT_CONFIG = 4

SWEEP_HEADER = "# rfi-qkd-lab sweep v1"
SCAN_HEADER = "# rfi-qkd-lab misalign-scan v1"


class ConfigError(ValueError):
    pass


class InputError(ValueError):
    pass


def fmt(x: float) -> str:
    """12-significant-digit rendering used for every float we print."""
    return f"{float(x):.12g}"


def _round12(x: float) -> float:
    return float(fmt(x))


@dataclass
class RunConfig:
    d: int = 2
    qber: float = 0.01
    z_tilt_deg: float = 0.0
    frame_seed: int | None = None
    shots: int | str = "exact"
    N: float = 1e7
    eps_sec: float = 1e-10
    eps_ec: float = 1e-20
    ec_efficiency: float = 1.0
    method: str = "both"
    out: str | None = None

    def validate(self) -> None:
        if not is_prime(self.d):
            raise ConfigError(f"d must be prime, got {self.d}")
        if not 0.0 <= self.qber < (self.d - 1) / self.d:
            raise ConfigError(f"qber must lie in [0, {(self.d-1)/self.d}), got {self.qber}")
        if self.z_tilt_deg != 0.0 and self.d != 2:
            raise ConfigError("z_tilt_deg is only supported for d = 2")
        if self.shots != "exact":
            try:
                shots = int(self.shots)
            except (TypeError, ValueError):
                raise ConfigError(f"shots must be 'exact' or a positive integer, got {self.shots!r}")
            if shots < 1:
                raise ConfigError("shots must be >= 1")
        if isinstance(self.N, float) and self.N < 1:
            raise ConfigError("N must be >= 1")
        if not 0.0 < self.eps_ec < self.eps_sec < 1.0:
            raise ConfigError("need 0 < eps_ec < eps_sec < 1")
        if self.ec_efficiency < 1.0:
            raise ConfigError("ec_efficiency must be >= 1.0")
        if self.method not in ("tomographic", "ur", "both"):
            raise ConfigError(f"method must be tomographic|ur|both, got {self.method!r}")

    @property
    def methods(self) -> list[str]:
        return ["tomographic", "ur"] if self.method == "both" else [self.method]


_CONFIG_FIELDS = {f.name for f in fields(RunConfig)}


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in doc.items():
            if key not in _CONFIG_FIELDS:
                raise ConfigError(f"unknown config field {key!r}")
            setattr(cfg, key, value)
    for name in _CONFIG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    cfg.d = int(cfg.d)
    cfg.qber = float(cfg.qber)
    cfg.z_tilt_deg = float(cfg.z_tilt_deg)
    if cfg.frame_seed is not None:
        cfg.frame_seed = int(cfg.frame_seed)
    # N stays unconverted when it denotes a sweep grid (list or comma string)
    if not (isinstance(cfg.N, (list, tuple)) or (isinstance(cfg.N, str) and "," in cfg.N)):
        cfg.N = float(cfg.N)
    cfg.eps_sec = float(cfg.eps_sec)
    cfg.eps_ec = float(cfg.eps_ec)
    cfg.ec_efficiency = float(cfg.ec_efficiency)
    cfg.validate()
    return cfg


def build_channel_state(cfg: RunConfig) -> DensityMatrix:
    """Isotropic noise at the target error rate, then tilt, then misalignment."""
    rho = isotropic_state(cfg.d, cfg.qber)
    if cfg.z_tilt_deg != 0.0:
        rho = apply_z_tilt(rho, math.radians(cfg.z_tilt_deg))
    if cfg.frame_seed is not None:
        u, v = frame_unitaries(cfg.d, cfg.frame_seed)
        rho = apply_misalignment(rho, u, v)
    return rho


def _stats_filename(setting_a: str, setting_b: str) -> str:
    return f"stats_{setting_a}_{setting_b}.json"


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _stats_json(stats: MeasurementStats) -> str:
    doc = stats.to_json_dict()
    doc["probs"] = [[_round12(x) for x in row] for row in doc["probs"]]
    return json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def cmd_simulate(cfg: RunConfig) -> int:
    if not cfg.out:
        raise InputError("simulate requires --out DIRECTORY")
    rho = build_channel_state(cfg)
    bases = dict(mub_eigenbases(cfg.d))
    labels = expected_settings(cfg.d)
    try:
        os.makedirs(cfg.out, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    base_seed = cfg.frame_seed if cfg.frame_seed is not None else 0
    pair_index = 0
    for a in labels:
        for b in labels:
            st = measure_joint(rho, bases[a], bases[b], a, b)
            if cfg.shots != "exact":
                seed = np.random.SeedSequence([int(base_seed) & 0x7FFFFFFF, pair_index]).generate_state(1)[0]
                st = sample_stats(st, int(cfg.shots), int(seed))
            path = os.path.join(cfg.out, _stats_filename(a, b))
            try:
                _write_text(path, _stats_json(st))
            except OSError as exc:
                print(f"error: cannot write {path}: {exc}", file=sys.stderr)
                return EXIT_IO
            pair_index += 1
    return EXIT_OK


def load_stats_dir(path: str) -> TomographyInput:
    try:
        names = sorted(os.listdir(path))
    except OSError as exc:
        raise InputError(f"cannot list stats directory: {exc}")
    stats = []
    for name in names:
        if not (name.startswith("stats_") and name.endswith(".json")):
            continue
        try:
            with open(os.path.join(path, name), "r", encoding="utf-8") as fh:
                stats.append(MeasurementStats.from_json(fh.read()))
        except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
            raise InputError(f"bad stats file {name}: {exc}")
    if not stats:
        raise InputError(f"no stats_*.json files found in {path}")
    d = stats[0].d
    labels = expected_settings(d)
    present = {(s.setting_a, s.setting_b) for s in stats}
    missing = [(a, b) for a in labels for b in labels if (a, b) not in present]
    if missing:
        raise InputError("missing setting pairs: " + ", ".join(f"{a}x{b}" for a, b in missing))
    return TomographyInput.from_list(d, stats)


def cmd_witness(cfg: RunConfig, stats_path: str) -> int:
    inp = load_stats_dir(stats_path)
    table = correlators_from_stats(inp)
    c = c_parameter(table)
    doc = {
        "d": inp.d,
        "C": _round12(c),
        "separable_bound": _round12(separable_bound(inp.d)),
        "max_value": _round12(max_c_value(inp.d)),
        "verdict": witness_verdict(c, inp.d),
    }
    _write_text(cfg.out, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return EXIT_OK


def cmd_reconstruct(cfg: RunConfig, stats_path: str) -> int:
    inp = load_stats_dir(stats_path)
    rec = reconstruct_state(correlators_from_stats(inp))
    rep = extract_spectrum(rec.state)
    doc = rep.to_json_dict()
    doc["lambda"] = [_round12(x) for x in doc["lambda"]]
    doc["residual"] = _round12(doc["residual"])
    doc["repair_distance"] = _round12(rec.repair_distance)
    doc["reliable"] = rec.reliable
    _write_text(cfg.out, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return EXIT_OK


def _rounded_rate_doc(res) -> dict:
    doc = res.to_json_dict()
    doc["rate_per_signal"] = _round12(doc["rate_per_signal"])
    doc["key_length"] = _round12(doc["key_length"])
    doc["terms"] = {k: _round12(v) for k, v in doc["terms"].items()}
    doc["params"] = {k: (_round12(v) if isinstance(v, float) else v) for k, v in doc["params"].items()}
    return doc


def cmd_rate(cfg: RunConfig, stats_path: str) -> int:
    inp = load_stats_dir(stats_path)
    rec = reconstruct_state(correlators_from_stats(inp))
    est = estimate_channel(rec.state)
    results = {}
    for method in cfg.methods:
        res = optimize_rate(
            cfg.N, est, cfg.eps_sec, cfg.eps_ec, method, ec_efficiency=cfg.ec_efficiency
        )
        results[method] = _rounded_rate_doc(res)
    doc = {
        "d": est.d,
        "N": _round12(cfg.N),
        "q_hat": _round12(est.q_hat),
        "bell_residual": _round12(est.bell_residual),
        "reconstruction_reliable": rec.reliable,
        "results": results,
    }
    _write_text(cfg.out, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return EXIT_OK


def _sweep_threads() -> int:
    env = os.environ.get("RFI_QKD_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"RFI_QKD_THREADS must be an integer, got {env!r}")
    return min(4, os.cpu_count() or 1)


def parse_n_grid(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        grid = [float(x) for x in value]
    else:
        try:
            grid = [float(tok) for tok in str(value).split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"bad N grid {value!r}; expected comma-separated numbers")
    if not grid:
        raise ConfigError("empty N grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("N grid must be strictly ascending")
    return grid


def cmd_sweep(cfg: RunConfig, n_grid: list[float]) -> int:
    rho = build_channel_state(cfg)
    est = estimate_channel(rho)
    jobs = [(n_signals, method) for n_signals in n_grid for method in cfg.methods]

    def run(job):
        n_signals, method = job
        try:
            return optimize_rate(
                n_signals, est, cfg.eps_sec, cfg.eps_ec, method, ec_efficiency=cfg.ec_efficiency
            )
        except ValueError:
            return None

    threads = _sweep_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    lines = [SWEEP_HEADER, "N,method,d,rate,n_opt,eps_pa,eps_pe,mu"]
    for (n_signals, method), res in zip(jobs, results):
        if res is None:
            lines.append(f"{fmt(n_signals)},{method},{cfg.d},nan,nan,nan,nan,nan")
            continue
        p = res.params
        lines.append(
            ",".join(
                [
                    fmt(n_signals),
                    method,
                    str(cfg.d),
                    fmt(res.rate_per_signal),
                    fmt(p["n"]),
                    fmt(p["eps_pa"]),
                    fmt(p["eps_pe"]),
                    fmt(p["mu"]),
                ]
            )
        )
    _write_text(cfg.out, "\n".join(lines) + "\n")
    return EXIT_OK


def parse_theta_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("theta grid must be 'start:stop:points' or comma-separated degrees")
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
        if points < 2 or stop <= start:
            raise ConfigError("bad theta grid range")
        return list(np.linspace(start, stop, points))
    try:
        grid = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"bad theta grid {text!r}")
    if not grid:
        raise ConfigError("empty theta grid")
    return grid


def cmd_misalign_scan(cfg: RunConfig, theta_grid: list[float]) -> int:
    """Z-tilt scan for qubits: the observed error rate is scored with the
    isotropic-channel asymptotic rate at that error rate."""
    if cfg.d != 2:
        raise ConfigError("misalign-scan is defined for d = 2 only")
    lines = [SCAN_HEADER, "theta_deg,Q,rate"]
    largest_positive = None
    for theta_deg in theta_grid:
        tilted = apply_z_tilt(bell_state(2), math.radians(theta_deg))
        q = qber(tilted)
        rate = isotropic_asymptotic_rate(2, q) if q < 0.5 else -float("inf")
        if rate > 0:
            largest_positive = theta_deg
        lines.append(f"{fmt(theta_deg)},{fmt(q)},{fmt(rate)}")
    tail = fmt(largest_positive) if largest_positive is not None else "none"
    lines.append(f"# largest_theta_with_positive_rate_deg = {tail}")
    _write_text(cfg.out, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfi-qkd-lab",
        description="Reference-frame-independent qudit QKD simulation and finite-key analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat JSON config file; flags override its fields")
        p.add_argument("--d", type=int, help="prime dimension")
        p.add_argument("--qber", type=float, help="target Z-basis error rate of the channel")
        p.add_argument("--z-tilt-deg", dest="z_tilt_deg", type=float, help="Bob Z-axis tilt in degrees (d=2)")
        p.add_argument("--frame-seed", dest="frame_seed", type=int, help="seed of the Z-commuting misalignment pair")
        p.add_argument("--shots", help="'exact' or samples per setting pair")
        p.add_argument("--N", help="total signal count (rate) or comma-separated grid (sweep)")
        p.add_argument("--eps-sec", dest="eps_sec", type=float, help="total security failure target")
        p.add_argument("--eps-ec", dest="eps_ec", type=float, help="error-correction failure share")
        p.add_argument("--ec-efficiency", dest="ec_efficiency", type=float, help="error-correction inefficiency >= 1")
        p.add_argument("--method", help="rate technique: tomographic | ur | both")
        p.add_argument("--out", help="output path ('-' for stdout); simulate expects a directory")

    p_sim = sub.add_parser("simulate", help="write the (d+1)^2 setting-pair statistics of the channel")
    add_common(p_sim)
    p_wit = sub.add_parser("witness", help="witness value and verdict from statistics")
    add_common(p_wit)
    p_wit.add_argument("--stats", required=True, help="directory of stats_*.json files")
    p_rec = sub.add_parser("reconstruct", help="state reconstruction and spectrum report")
    add_common(p_rec)
    p_rec.add_argument("--stats", required=True, help="directory of stats_*.json files")
    p_rate = sub.add_parser("rate", help="optimized finite-key rate(s) from statistics")
    add_common(p_rate)
    p_rate.add_argument("--stats", required=True, help="directory of stats_*.json files")
    p_sweep = sub.add_parser("sweep", help="rate-vs-N sweep as CSV")
    add_common(p_sweep)
    p_scan = sub.add_parser("misalign-scan", help="Z-tilt scan for d=2 as CSV")
    add_common(p_scan)
    p_scan.add_argument("--theta-grid", dest="theta_grid", default="0:60:121", help="'start:stop:points' in degrees or comma list")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "witness":
            return cmd_witness(cfg, args.stats)
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg, args.stats)
        if args.command == "rate":
            if not isinstance(cfg.N, float):
                raise ConfigError("rate requires a single N, not a grid")
            return cmd_rate(cfg, args.stats)
        if args.command == "sweep":
            return cmd_sweep(cfg, parse_n_grid(cfg.N))
        if args.command == "misalign-scan":
            return cmd_misalign_scan(cfg, parse_theta_grid(args.theta_grid))
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
