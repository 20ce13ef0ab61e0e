"""Sweep and reproduction commands. Each returns a :class:`Table` or a dict."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Any, Iterable, Sequence

import numpy as np

from .. import link_model as lm
from ..channel_model import max_link_length_m, total_attenuation
from ..errors import DomainError
from ..simkit import Scenario, simulate_transmission
from .config import ScenarioConfig


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps([dict(zip(self.columns, r)) for r in self.rows], indent=2, default=_json_default) + "\n"

    def to_text(self) -> str:
        cells = [self.columns] + [[_cell(v) for v in r] for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(self.columns))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
        return "\n".join(lines) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, lm.Regime):
        return v.value
    return str(v)


def _json_default(v):
    if isinstance(v, lm.Regime):
        return v.value
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(type(v))


def cmd_attenuation(cfg: ScenarioConfig, wavelengths_nm: Sequence[float], d_max_m: float, step_m: float) -> Table:
    if not step_m > 0:
        raise DomainError("step_m must be positive")
    atm = cfg.atmosphere_model()
    geo = cfg.link_geometry()
    distances = np.arange(0.0, d_max_m + 0.5 * step_m, step_m)
    rows = []
    for wl in wavelengths_nm:
        for d in distances:
            b = total_attenuation(atm, geo, wl, float(d))
            rows.append([float(wl), float(d), *b.as_dict().values()])
    return Table(
        ["wavelength_nm", "distance_m", "aerosol_db", "rayleigh_db", "absorption_db", "scintillation_db", "geometric_db", "total_db"],
        rows,
    )


def _scenario(cfg: ScenarioConfig, hw: lm.LinkHardware, oa_db: float, n_packets: int, seed: int, **kw) -> Scenario:
    return Scenario(hw=hw, noise=cfg.noise_profile(), oa_db=oa_db, n_packets=n_packets, seed=seed, **kw)


def cmd_per_vs_snr(
    cfg: ScenarioConfig,
    snr_values_db: Iterable[float],
    mode: str = "analytic",
    n_packets: int | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> Table:
    """PER against SNR. Monte Carlo points reach each SNR by choosing the attenuation."""
    if mode not in ("analytic", "montecarlo"):
        raise DomainError(f"mode must be analytic or montecarlo, got {mode!r}")
    n_bits = cfg.run.n_bits
    hw = cfg.hardware()
    noise = cfg.noise_profile()
    columns = ["snr_db", "ber", "per_analytic"]
    if mode == "montecarlo":
        columns += ["oa_db", "per_montecarlo", "ci95_low", "ci95_high", "packets"]
    rows = []
    for k, snr in enumerate(snr_values_db):
        ber = lm.ber_from_snr_db(snr)
        row = [float(snr), ber, lm.per_from_ber(ber, n_bits)]
        if mode == "montecarlo":
            oa = lm.attenuation_for_snr_db(snr, hw, noise)
            n = n_packets or cfg.run.n_packets
            res = simulate_transmission(_scenario(cfg, hw, oa, n, (seed if seed is not None else cfg.run.seed) + k), workers)
            e = res.estimate
            row += [oa, e.per, e.ci95_low, e.ci95_high, e.packets_sent]
        rows.append(row)
    return Table(columns, rows)


def cmd_moa(cfg: ScenarioConfig, per_targets: Iterable[float]) -> Table:
    hw = cfg.hardware()
    noise = cfg.noise_profile()
    rows = []
    for p in per_targets:
        r = lm.moa_for_per(p, hw, noise, cfg.run.n_bits)
        rows.append([float(p), r.moa_db, r.snr_required_db, r.reachable])
    return Table(["per_target", "moa_db", "snr_required_db", "reachable"], rows)


def cmd_link_length(cfg: ScenarioConfig, wavelengths_nm: Sequence[float], per_target: float = lm.ERROR_FREE_PER) -> Table:
    budget = lm.moa_for_per(per_target, cfg.hardware(), cfg.noise_profile(), cfg.run.n_bits)
    atm = cfg.atmosphere_model()
    geo = cfg.link_geometry()
    rows = []
    for wl in wavelengths_nm:
        if budget.reachable:
            res = max_link_length_m(atm, geo, wl, budget.moa_db)
            rows.append([float(wl), cfg.atmosphere.visibility_km, budget.moa_db, res.distance_m / 1000.0, res.unbounded])
        else:
            rows.append([float(wl), cfg.atmosphere.visibility_km, budget.moa_db, 0.0, False])
    return Table(["wavelength_nm", "visibility_km", "budget_db", "max_length_km", "unbounded"], rows)


def _mc_regime_point(cfg, hw, oa, n_packets, seed, workers):
    res = simulate_transmission(_scenario(cfg, hw, oa, n_packets, seed), workers)
    return res.measured_snr_db, res.estimate.per


def cmd_regime_scan(
    cfg: ScenarioConfig,
    md_values: Sequence[float],
    moa_values_db: Sequence[float],
    montecarlo: bool = False,
    n_packets: int = 10_000,
    seed: int | None = None,
    workers: int = 1,
) -> Table:
    """SNR and PER across the LAR/HAR transition at the configured laser power."""
    noise = cfg.noise_profile()
    base_seed = cfg.run.seed if seed is None else seed
    columns = ["moa_db", "md", "snr_db", "regime", "per", "crossover_moa_db", "lar_plateau_db"]
    if montecarlo:
        columns += ["snr_montecarlo_db", "per_montecarlo"]
    rows = []
    k = 0
    for md in md_values:
        hw = cfg.hardware(md=md)
        for moa in moa_values_db:
            rep = lm.snr_piecewise_db(moa, hw, noise)
            row = [float(moa), float(md), rep.snr_db, rep.regime, lm.per_from_snr_db(rep.snr_db, cfg.run.n_bits),
                   rep.crossover_moa_db, rep.lar_plateau_db]
            if montecarlo:
                row += list(_mc_regime_point(cfg, hw, moa, n_packets, base_seed + k, workers))
            k += 1
            rows.append(row)
    return Table(columns, rows)


def montecarlo_crossover_db(moa_db: Sequence[float], snr_db: Sequence[float], plateau_points: int = 3, har_points: int = 3):
    """Crossover and HAR slope estimated from a measured SNR-vs-attenuation sweep.

    The plateau is the mean of the ``plateau_points`` lowest-attenuation
    SNRs; a line is fitted through the ``har_points`` highest. Returns
    ``(crossover_db, har_slope_db_per_db)``.
    """
    moa = np.asarray(moa_db, dtype=float)
    snr = np.asarray(snr_db, dtype=float)
    order = np.argsort(moa)
    moa, snr = moa[order], snr[order]
    plateau = snr[:plateau_points].mean()
    slope, intercept = np.polyfit(moa[-har_points:], snr[-har_points:], 1)
    return (plateau - intercept) / slope, slope


def cmd_md_scan(
    cfg: ScenarioConfig,
    md_values: Sequence[float],
    oa_db: float = 13.0,
    per_target: float = lm.ERROR_FREE_PER,
    montecarlo: bool = False,
    n_packets: int | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> Table:
    noise = cfg.noise_profile()
    base_seed = cfg.run.seed if seed is None else seed
    columns = ["md", "snr_db", "per_analytic", "error_free"]
    if montecarlo:
        columns += ["per_montecarlo", "ci95_low", "ci95_high"]
    rows = []
    for k, md in enumerate(md_values):
        if not 0 < md <= 1:
            raise DomainError(f"md must be in (0, 1], got {md}")
        hw = cfg.hardware(md=md)
        snr = lm.snr_at_attenuation_db(oa_db, hw, noise)
        per = lm.per_from_snr_db(snr, cfg.run.n_bits)
        row = [float(md), snr, per, per <= per_target]
        if montecarlo:
            res = simulate_transmission(_scenario(cfg, hw, oa_db, n_packets or cfg.run.n_packets, base_seed + k), workers)
            row += [res.estimate.per, res.estimate.ci95_low, res.estimate.ci95_high]
        rows.append(row)
    return Table(columns, rows)


def cmd_simulate(
    cfg: ScenarioConfig,
    oa_db: float,
    n_packets: int | None = None,
    seed: int | None = None,
    workers: int = 1,
    use_p_max: bool = False,
    eye_traces: int = 200,
):
    hw = cfg.hardware()
    if use_p_max:
        hw = replace(hw, p_out_w=hw.p_max_w)
    sc = _scenario(
        cfg, hw, oa_db, n_packets or cfg.run.n_packets, cfg.run.seed if seed is None else seed, eye_traces=eye_traces
    )
    res = simulate_transmission(sc, workers)
    return sc, res
