"""Command-line harness: validate configs, run scenarios, sweep the
full scenario grid, optimize pumps, and dump span power profiles.

Exit codes: 0 success, 1 configuration/validation error, 2 solver
failure.
"""

import argparse
import concurrent.futures
import json
import os
import sys
import threading
from dataclasses import replace

import numpy as np

from .config import BAND_SETS, ConfigError, load_config
from .fiber import FiberRangeError
from .grid import GridError, build_grid
from .measure import CurveError, CurveRangeError
from .pso import SwarmConfig, trace_to_tsv
from .raman import (ConvergenceError, IntegrationError, RamanPumpSet,
                    no_pumps, propagate, profile_to_tsv)
from .scenario import (FitnessEvaluator, LinkScenario, SolverOptions,
                       evaluate_scenario, optimize_pumps, scenario_cache_key)

_CONFIG_ERRORS = (ConfigError, CurveError, CurveRangeError, GridError,
                  FiberRangeError, ValueError, OSError)
_SOLVER_ERRORS = (ConvergenceError, IntegrationError)


def _add_common(p):
    p.add_argument("--config", required=True, help="scenario configuration file")
    p.add_argument("--out-dir", default="out", help="directory for report files")
    p.add_argument("--seed", type=int, default=None,
                   help="override the configured PSO seed")
    p.add_argument("--threads", type=int, default=1,
                   help="concurrent scenario workers for sweeps")
    p.add_argument("--no-format-correction", action="store_true",
                   help="disable the modulation-format NLI correction")
    p.add_argument("--fast-raman", action="store_true",
                   help="use the triangular Raman profile approximation")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sclink",
        description="Hybrid-amplified multi-band link throughput/power reports")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in [
        ("validate", "check a configuration and report the scenario shape"),
        ("run", "evaluate the configured scenario and write report files"),
        ("sweep", "run the full scenario grid and write a consolidated table"),
        ("optimize", "swarm-optimize pump wavelengths/powers for the scenario"),
        ("dump-profile", "write the solved span power profile as TSV"),
    ]:
        p = sub.add_parser(name, help=desc)
        _add_common(p)
        if name == "dump-profile":
            p.add_argument("--pumps", default="",
                           help="explicit pumps as wl_nm:power_mw,... "
                                "(default: no pumps)")
    return parser


def _load(args):
    cfg = load_config(args.config)
    if args.fast_raman:
        from .fiber import FiberSpec, triangular_raman_table
        cfg.fiber = FiberSpec(
            length_km=cfg.fiber.length_km,
            attenuation_table=cfg.fiber.attenuation_table,
            dispersion_ps_nm_km=cfg.fiber.dispersion_ps_nm_km,
            reference_wavelength_nm=cfg.fiber.reference_wavelength_nm,
            nonlinear_coeff_w_km=cfg.fiber.nonlinear_coeff_w_km,
            raman_table=triangular_raman_table(),
            temperature_k=cfg.fiber.temperature_k,
        )
    if args.no_format_correction:
        cfg.solver = replace(cfg.solver, format_correction=False)
    if args.seed is not None:
        cfg.pso["seed"] = args.seed
    os.makedirs(args.out_dir, exist_ok=True)
    return cfg


def _swarm_for(cfg, pump_count):
    from .scenario import pump_bounds
    return SwarmConfig(
        bounds=pump_bounds(pump_count),
        particle_count=cfg.pso["particles"],
        iteration_cap=cfg.pso["iterations"],
        inertia=cfg.pso["inertia"],
        cognitive=cfg.pso["cognitive"],
        social=cfg.pso["social"],
        seed=cfg.pso["seed"],
    )


class PsoCache:
    """Disk cache of pump optima keyed by scenario-config hash + seed."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        self._data = {}
        if os.path.exists(path):
            with open(path) as fh:
                self._data = json.load(fh)

    def get(self, key):
        with self._lock:
            entry = self._data.get(key)
        if entry is None:
            return None
        return (RamanPumpSet(np.array(entry["wavelengths_nm"]),
                             np.array(entry["powers_mw"])),
                entry["fitness_tbps"])

    def put(self, key, pumps, fitness):
        with self._lock:
            self._data[key] = {
                "wavelengths_nm": list(map(float, pumps.wavelengths_nm)),
                "powers_mw": list(map(float, pumps.powers_mw)),
                "fitness_tbps": float(fitness),
            }
            tmp = self.path + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(self._data, fh, indent=1, sort_keys=True)
            os.replace(tmp, self.path)


def cached_optimize(scenario, pump_count, cfg, cache, fitness_options,
                    seed_candidates=None):
    swarm = _swarm_for(cfg, pump_count)
    key = scenario_cache_key(scenario, pump_count, swarm, fitness_options)
    if seed_candidates:
        import hashlib
        seeds = np.round(np.concatenate(
            [np.concatenate([c.wavelengths_nm, c.powers_mw])
             for c in seed_candidates]), 9)
        key += "-" + hashlib.sha256(seeds.tobytes()).hexdigest()[:8]
    hit = cache.get(key) if cache else None
    if hit is not None:
        return hit[0], hit[1], None
    pumps, result = optimize_pumps(scenario, pump_count, swarm=swarm,
                                   options=fitness_options,
                                   seed_candidates=seed_candidates)
    if cache:
        cache.put(key, pumps, result.best_fitness)
    return pumps, result.best_fitness, result


def _base_scenario(cfg, band_set=None, n_span=None, p_mm=None,
                   pumps=None, name=""):
    grid = cfg.grid
    if band_set is not None and band_set != cfg.band_set:
        grid = build_grid(
            BAND_SETS[band_set](), cfg.grid.channel_spacing_ghz,
            cfg.grid.symbol_rate_gbd,
            float(10.0 * np.log10(cfg.grid.launch_power_mw[0])))
    amps = {b: cfg.amplifiers[b] for b in grid.bands}
    return LinkScenario(
        grid=grid, fiber=cfg.fiber, amplifiers=amps,
        pumps=pumps if pumps is not None else no_pumps(),
        n_span=n_span if n_span is not None else cfg.span_count,
        p_mm_w=p_mm if p_mm is not None else cfg.p_mm_w,
        transceiver_snr_db=cfg.transceiver_snr_db,
        name=name,
    )


def cmd_validate(args):
    cfg = _load(args)
    grid = cfg.grid
    counts = ", ".join(f"{b}:{grid.channel_count(b)}" for b in grid.bands)
    print(f"config ok: {cfg.source_path}")
    print(f"band set {cfg.band_set}, {len(grid)} channels ({counts}), "
          f"{grid.channel_spacing_ghz:.0f} GHz spacing, "
          f"{grid.symbol_rate_gbd:.0f} GBd")
    print(f"fiber {cfg.fiber.length_km:.0f} km, spans {cfg.span_count}, "
          f"pumps {cfg.pump_count}, P_mm {cfg.p_mm_w} W")
    return 0


def _fitness_options(cfg):
    return replace(cfg.solver, step_km=cfg.fitness_step_km,
                   bvp_tol=cfg.fitness_bvp_tol)


def _resolve_pumps(cfg, scenario, pump_count, cache, seed_pool=None):
    if pump_count == 0:
        return no_pumps(), None
    seeds = None
    if seed_pool:
        seeds = [p for c, p in sorted(seed_pool.items()) if c < pump_count]
    pumps, fitness, _ = cached_optimize(
        scenario, pump_count, cfg, cache, _fitness_options(cfg),
        seed_candidates=seeds or None)
    return pumps, fitness


def cmd_run(args):
    cfg = _load(args)
    cache = PsoCache(os.path.join(args.out_dir, "pso_cache.json"))
    scenario = _base_scenario(cfg, name="run")
    pumps, _ = _resolve_pumps(cfg, scenario, cfg.pump_count, cache)
    scenario = replace(scenario, pumps=pumps)
    result = evaluate_scenario(scenario, cfg.pce_curves, cfg.pump_curve,
                               options=cfg.solver)
    sid = f"{cfg.band_set}_ns{scenario.n_span}_np{cfg.pump_count}" \
          f"_pmm{scenario.p_mm_w:g}"
    result.quality.to_tsv(os.path.join(args.out_dir, f"{sid}_quality.tsv"))
    result.ledger.to_tsv(os.path.join(args.out_dir, f"{sid}_ledger.tsv"),
                         scenario_id=sid)
    summary = os.path.join(args.out_dir, f"{sid}_summary.tsv")
    _write_summary(summary, sid, cfg, scenario, result)
    print(f"{sid}: throughput {result.total_throughput_tbps:.2f} Tb/s, "
          f"total power {result.ledger.total_w:.2f} W, "
          f"energy {result.ledger.total_energy_pj_bit:.4f} pJ/bit")
    return 0


def _write_summary(path, sid, cfg, scenario, result):
    with open(path, "w") as fh:
        fh.write("# sclink scenario summary v1\n")
        fh.write("scenario\tband\tthroughput_tbps\tpower_w\tenergy_pj_bit\n")
        led = result.ledger
        for band in led.band_lumped_w:
            band_power = led.n_span * (led.band_lumped_w[band]
                                       + led.band_dra_w[band]
                                       + led.p_mm_per_amp_w)
            fh.write(f"{sid}\t{band}\t"
                     f"{led.band_throughput_tbps[band]!r}\t{band_power!r}\t"
                     f"{led.band_energy_pj_bit[band]!r}\n")
        fh.write(f"{sid}\ttotal\t"
                 f"{result.total_throughput_tbps!r}\t{led.total_w!r}\t"
                 f"{led.total_energy_pj_bit!r}\n")


def cmd_optimize(args):
    cfg = _load(args)
    if cfg.pump_count < 1:
        print("raman.pump_count must be >= 1 for optimize", file=sys.stderr)
        return 1
    scenario = _base_scenario(cfg, name="optimize")
    pumps, result = optimize_pumps(scenario, cfg.pump_count,
                                   swarm=_swarm_for(cfg, cfg.pump_count),
                                   options=_fitness_options(cfg))
    cache = PsoCache(os.path.join(args.out_dir, "pso_cache.json"))
    key = scenario_cache_key(scenario, cfg.pump_count,
                             _swarm_for(cfg, cfg.pump_count),
                             _fitness_options(cfg))
    cache.put(key, pumps, result.best_fitness)
    trace_to_tsv(result, os.path.join(args.out_dir, "pso_trace.tsv"))
    for wl, p in zip(pumps.wavelengths_nm, pumps.powers_mw):
        print(f"pump {wl:.2f} nm  {p:.2f} mW")
    print(f"best fitness {result.best_fitness:.3f} Tb/s "
          f"({result.evaluations} evaluations)")
    return 0


def cmd_dump_profile(args):
    cfg = _load(args)
    pumps = no_pumps()
    if args.pumps:
        wl, pw = [], []
        for token in args.pumps.split(","):
            a, _, b = token.partition(":")
            wl.append(float(a))
            pw.append(float(b))
        pumps = RamanPumpSet(np.array(wl), np.array(pw))
    profile = propagate(cfg.grid, cfg.fiber, pumps,
                        step_km=cfg.solver.step_km,
                        bvp_tol=cfg.solver.bvp_tol,
                        damping=cfg.solver.damping)
    out = os.path.join(args.out_dir, "profile.tsv")
    profile_to_tsv(profile, out, band_labels=cfg.grid.band_labels)
    print(f"profile written to {out}")
    return 0


def _sweep_group(cfg, cache, band_set, n_span):
    """Optimize all pump counts for one (band set, span count) cell."""
    optima = {}
    seed_pool = {}
    scenario = _base_scenario(cfg, band_set=band_set, n_span=n_span,
                              p_mm=0.0)
    for pump_count in sorted(c for c in cfg.sweep["pump_counts"] if c > 0):
        pumps, fitness = _resolve_pumps(cfg, scenario, pump_count, cache,
                                        seed_pool=seed_pool)
        optima[pump_count] = pumps
        seed_pool[pump_count] = pumps
    return (band_set, n_span), optima


def cmd_sweep(args):
    cfg = _load(args)
    cache = PsoCache(os.path.join(args.out_dir, "pso_cache.json"))
    sweep = cfg.sweep

    groups = [(b, n) for b in sweep["band_sets"] for n in sweep["span_counts"]]
    optima = {}
    if args.threads > 1:
        with concurrent.futures.ThreadPoolExecutor(args.threads) as pool:
            futures = [pool.submit(_sweep_group, cfg, cache, b, n)
                       for b, n in groups]
            for fut in futures:
                key, value = fut.result()
                optima[key] = value
    else:
        for b, n in groups:
            key, value = _sweep_group(cfg, cache, b, n)
            optima[key] = value

    rows = []
    baselines = {}
    profiles = {}
    for band_set in sweep["band_sets"]:
        for n_span in sweep["span_counts"]:
            for pump_count in sweep["pump_counts"]:
                sid_base = f"{band_set}_ns{n_span}_np{pump_count}"
                pumps = (optima[(band_set, n_span)][pump_count]
                         if pump_count > 0 else no_pumps())
                for p_mm in sweep["p_mm_values_w"]:
                    sid = f"{sid_base}_pmm{p_mm:g}"
                    scenario = _base_scenario(cfg, band_set=band_set,
                                              n_span=n_span, p_mm=p_mm,
                                              pumps=pumps, name=sid)
                    try:
                        if band_set not in baselines:
                            baselines[band_set] = propagate(
                                scenario.grid, scenario.fiber, None,
                                step_km=cfg.solver.step_km,
                                bvp_tol=cfg.solver.bvp_tol,
                                damping=cfg.solver.damping)
                        pkey = (band_set, n_span, pump_count)
                        if pump_count > 0 and pkey not in profiles:
                            profiles[pkey] = propagate(
                                scenario.grid, scenario.fiber, pumps,
                                step_km=cfg.solver.step_km,
                                bvp_tol=cfg.solver.bvp_tol,
                                damping=cfg.solver.damping)
                        result = evaluate_scenario(
                            scenario, cfg.pce_curves, cfg.pump_curve,
                            options=cfg.solver,
                            baseline_profile=baselines[band_set],
                            pumped_profile=profiles.get(pkey))
                    except Exception as exc:
                        raise RuntimeError(f"scenario {sid} failed: {exc}") from exc
                    rows.append((band_set, n_span, pump_count, p_mm, sid, result))

    out = os.path.join(args.out_dir, "sweep.tsv")
    _write_sweep_table(out, rows)
    print(f"{len(rows)} scenarios -> {out}")
    return 0


def _write_sweep_table(path, rows):
    baselines = {}
    for band_set, n_span, pump_count, p_mm, sid, result in rows:
        if pump_count == 0:
            led = result.ledger
            for band in led.band_lumped_w:
                baselines[(band_set, n_span, p_mm, band)] = \
                    led.band_energy_pj_bit[band]
            baselines[(band_set, n_span, p_mm, "total")] = \
                led.total_energy_pj_bit
    max_total = max(r.ledger.total_w for *_, r in rows)

    with open(path, "w") as fh:
        fh.write("# sclink sweep table v1\n")
        fh.write("scenario\tband_set\tn_span\tpump_count\tp_mm_w\tband\t"
                 "throughput_tbps\tpower_w\tenergy_pj_bit\t"
                 "energy_change_pct\tpower_norm\n")
        for band_set, n_span, pump_count, p_mm, sid, result in rows:
            led = result.ledger
            entries = []
            for band in led.band_lumped_w:
                band_power = led.n_span * (led.band_lumped_w[band]
                                           + led.band_dra_w[band]
                                           + led.p_mm_per_amp_w)
                entries.append((band, led.band_throughput_tbps[band],
                                band_power, led.band_energy_pj_bit[band]))
            entries.append(("total", sum(led.band_throughput_tbps.values()),
                            led.total_w, led.total_energy_pj_bit))
            for band, tbps, power, energy in entries:
                base = baselines.get((band_set, n_span, p_mm, band))
                pct = 0.0 if base is None else 100.0 * (energy - base) / base
                norm = power / max_total if band == "total" else ""
                fh.write(f"{sid}\t{band_set}\t{n_span}\t{pump_count}\t"
                         f"{p_mm:g}\t{band}\t{tbps!r}\t{power!r}\t"
                         f"{energy!r}\t{pct!r}\t"
                         f"{norm if norm == '' else repr(norm)}\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "run": cmd_run,
        "sweep": cmd_sweep,
        "optimize": cmd_optimize,
        "dump-profile": cmd_dump_profile,
    }
    try:
        return handlers[args.command](args)
    except _SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
