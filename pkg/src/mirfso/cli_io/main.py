"""Command-line entry point.

Exit codes: 0 success, 2 configuration or usage error, 3 domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .. import link_model as lm
from ..errors import ConfigError, DomainError, MirfsoError, UsageError
from ..simkit import eye_export
from . import commands
from .config import ScenarioConfig, load_config, parse_config, serialize_config

EXIT_CONFIG = 2
EXIT_DOMAIN = 3


def parse_values(text: str) -> list[float]:
    """Comma-separated numbers and inclusive ``start:stop:step`` ranges."""
    out: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                pieces = [float(p) for p in part.split(":")]
                if len(pieces) != 3:
                    raise ValueError
                a, b, step = pieces
                if step == 0 or (b - a) / step < 0:
                    raise UsageError(f"empty or infinite range {part!r}")
                n = int(np.floor((b - a) / step + 1e-9)) + 1
                out.extend(round(a + i * step, 12) for i in range(n))
            else:
                out.append(float(part))
        except ValueError:
            raise UsageError(f"cannot parse {part!r}; use numbers or start:stop:step") from None
    if not out:
        raise UsageError("empty value list")
    return out


def default_config_text() -> str:
    return resources.files("mirfso").joinpath("data/testbed_defaults.cfg").read_text(encoding="utf-8")


def _load(args) -> ScenarioConfig:
    if args.config and args.testbed_defaults:
        raise UsageError("--config and --testbed-defaults are mutually exclusive")
    if args.config:
        return load_config(args.config)
    if args.testbed_defaults:
        return parse_config(default_config_text())
    return ScenarioConfig()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render(table: commands.Table, fmt: str) -> str:
    if fmt == "json":
        return table.to_json()
    if fmt == "table":
        return table.to_text()
    return table.to_csv()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (section.key = value)")
    common.add_argument(
        "--testbed-defaults", "--paper-defaults", dest="testbed_defaults", action="store_true",
        help="load the shipped testbed constants",
    )
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json", "table"), help="output format")
    common.add_argument("--workers", type=int, default=1, help="Monte Carlo worker processes")

    p = argparse.ArgumentParser(prog="mirfso", description="Mid-infrared FSO link budget and Monte Carlo tools.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("attenuation", parents=[common], help="loss components against distance")
    s.add_argument("--wavelengths", default="1557.7,3998.6,4720", help="nm")
    s.add_argument("--d-max-m", type=float, default=20000.0)
    s.add_argument("--step-m", type=float, default=100.0)

    s = sub.add_parser("per-vs-snr", parents=[common], help="PER against SNR")
    s.add_argument("--snr-db", default="0:16:0.5")
    s.add_argument("--mode", choices=("analytic", "montecarlo"), default="analytic")
    s.add_argument("--n-packets", type=int)

    s = sub.add_parser("moa", parents=[common], help="maximum optical attenuation per PER target")
    s.add_argument("--per", default="1.6e-5,1e-4,1e-3,1e-2,1e-1")

    s = sub.add_parser("link-length", parents=[common], help="maximum link length per wavelength")
    s.add_argument("--wavelengths", default="4720,3998.6,1557.7", help="nm")
    s.add_argument("--per", type=float, default=lm.ERROR_FREE_PER)

    s = sub.add_parser("regime-scan", parents=[common], help="SNR across the noise regimes")
    s.add_argument("--md", default="1,0.5,0.25")
    s.add_argument("--moa-db", default="13:45:2")
    s.add_argument("--montecarlo", action="store_true")
    s.add_argument("--n-packets", type=int, default=10_000)

    s = sub.add_parser("md-scan", parents=[common], help="PER against modulation depth")
    s.add_argument("--md", default="0.005:0.02:0.001")
    s.add_argument("--oa-db", type=float, default=13.0)
    s.add_argument("--montecarlo", action="store_true")
    s.add_argument("--n-packets", type=int)

    s = sub.add_parser("simulate", parents=[common], help="single Monte Carlo transmission run")
    s.add_argument("--oa-db", type=float, required=True)
    s.add_argument("--n-packets", type=int)
    s.add_argument("--p-max", action="store_true", help="transmit at laser.p_max_w instead of laser.p_out_w")
    s.add_argument("--eye", help="write eye-diagram CSV here")
    s.add_argument("--eye-traces", type=int, default=200)

    s = sub.add_parser("config", parents=[common], help="print the resolved configuration")
    return p


def _with_seed(cfg: ScenarioConfig, seed: int | None) -> ScenarioConfig:
    if seed is None:
        return cfg
    return replace(cfg, run=replace(cfg.run, seed=seed))


def run(args) -> int:
    cfg = _with_seed(_load(args), args.seed)
    fmt = args.format
    cmd = args.command
    if cmd == "config":
        _emit(serialize_config(cfg), args.out)
        return 0
    if cmd == "simulate":
        sc, res = commands.cmd_simulate(
            cfg, args.oa_db, args.n_packets, workers=args.workers, use_p_max=args.p_max, eye_traces=args.eye_traces
        )
        doc = res.estimate.to_json_dict()
        doc.update(
            oa_db=sc.oa_db,
            analytic_snr_db=sc.analytic_snr_db,
            measured_snr_db=res.measured_snr_db,
            analytic_per=lm.per_from_snr_db(sc.analytic_snr_db, cfg.run.n_bits),
        )
        if args.eye:
            if res.eye.size == 0:
                raise UsageError("no eye traces recorded; raise --eye-traces")
            eye_export(res.eye, res.sample_rate_hz, args.eye)
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        return 0

    if cmd == "attenuation":
        table = commands.cmd_attenuation(cfg, parse_values(args.wavelengths), args.d_max_m, args.step_m)
    elif cmd == "per-vs-snr":
        table = commands.cmd_per_vs_snr(cfg, parse_values(args.snr_db), args.mode, args.n_packets, workers=args.workers)
    elif cmd == "moa":
        table = commands.cmd_moa(cfg, parse_values(args.per))
    elif cmd == "link-length":
        table = commands.cmd_link_length(cfg, parse_values(args.wavelengths), args.per)
        fmt = fmt or "table"
    elif cmd == "regime-scan":
        table = commands.cmd_regime_scan(
            cfg, parse_values(args.md), parse_values(args.moa_db), args.montecarlo, args.n_packets, workers=args.workers
        )
    elif cmd == "md-scan":
        table = commands.cmd_md_scan(
            cfg, parse_values(args.md), args.oa_db, montecarlo=args.montecarlo, n_packets=args.n_packets,
            workers=args.workers,
        )
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown command {cmd}")
    _emit(_render(table, fmt or "csv"), args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except (ConfigError, UsageError) as exc:
        print(f"mirfso: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"mirfso: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except MirfsoError as exc:
        print(f"mirfso: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
