"""``wflift`` command line.

Subcommands: curves, certify, solve, sweep, noisy, audit. Each writes one CSV
(``--out``, default stdout). Settings come from flags, optionally on top of a
``key=value`` file given with ``--config``; flags win.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .certificates import CURVE_HEADER, certificate_chain, curve, estimate_delta, fourth_moment_gap
from .errors import CertificateError, NumericalError, ParseError
from .io import parse_ensemble, read_config, write_csv, write_signal
from .lifted_model import SamplingEnsemble, forward_intensity, generate_gaussian_ensemble
from .noise import NOISY_HEADER, add_noise, noisy_experiment
from .oracle import (
    check_lemma3,
    check_lipschitz,
    check_rip,
    check_strong_convexity,
    falsify_regularity,
    sample_neighbourhood,
    DIRECTIONS,
)
from .rng import derive_stream, random_unit_signal
from .solver import TRACE_HEADER, Certified, Fixed, HeuristicRamp, SolveOptions, solve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

SWEEP_HEADER = ("ratio", "trials", "success_rate", "median_iters")
CERTIFY_HEADER = ("field", "value")
AUDIT_HEADER = ("check", "epsilon", "samples", "violations", "min_margin")
SWEEP_SUCCESS = 1e-5
NOISY_LADDER = [30.0, 42.0, 54.0]

DEFAULTS: dict[str, Any] = {
    "n": 16,
    "m": 256,
    "model": "gaussian",
    "seed": 0,
    "delta_grid": "0,0.49,50",
    "snr_db": None,
    "trials": 10,
    "out": "-",
    "step_mode": "ramp",
    "delta": None,
    "mu": 0.1,
    "mu_max": 0.2,
    "tau": 330.0,
    "max_iterations": 2500,
    "stop_tolerance": 1e-10,
    "restarts": 64,
    "iterations": 200,
    "ratios": "2,4,6,8,10",
    "epsilon": "0.1,0.4,0.647",
    "inflation": 1.5,
    "cex_dir": None,
}


class ConfigError(Exception):
    pass


# --- argument handling --------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wflift", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        # defaults are None so that only flags actually given override the config file
        sp.add_argument("--config", help="key=value file; flags override it")
        sp.add_argument("--out", help="output CSV path, '-' for stdout")
        sp.add_argument("--seed", type=int)

    def ensemble_flags(sp):
        sp.add_argument("--n", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--model", help="'gaussian' or 'file:PATH'")

    def step_flags(sp):
        sp.add_argument("--step-mode", choices=("certified", "fixed", "ramp"))
        sp.add_argument("--delta", type=float, help="concentration constant for the certified step")
        sp.add_argument("--mu", type=float)
        sp.add_argument("--mu-max", type=float)
        sp.add_argument("--tau", type=float)
        sp.add_argument("--max-iterations", type=int)
        sp.add_argument("--stop-tolerance", type=float)

    sp = sub.add_parser("curves", help="certificate chain on a delta grid")
    common(sp)
    sp.add_argument("--delta-grid", help="start,stop,points")

    sp = sub.add_parser("certify", help="estimate delta for an ensemble and certify it")
    common(sp)
    ensemble_flags(sp)
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--iterations", type=int)

    sp = sub.add_parser("solve", help="one Wirtinger Flow run; writes the trace")
    common(sp)
    ensemble_flags(sp)
    step_flags(sp)
    sp.add_argument("--snr-db", help="single SNR level for additive noise")
    sp.add_argument("--estimate-out", help="write the final estimate as a signal file")

    sp = sub.add_parser("sweep", help="success rate against oversampling m/n")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--ratios", help="comma-separated m/n ladder")
    sp.add_argument("--trials", type=int)
    step_flags(sp)

    sp = sub.add_parser("noisy", help="noisy recovery over an SNR ladder")
    common(sp)
    ensemble_flags(sp)
    step_flags(sp)
    sp.add_argument("--snr-db", help="comma-separated SNR ladder in dB")
    sp.add_argument("--trials", type=int)

    sp = sub.add_parser("audit", help="random audits of the inequality chain")
    common(sp)
    ensemble_flags(sp)
    sp.add_argument("--trials", type=int, help="samples per check")
    sp.add_argument("--epsilon", help="comma-separated neighbourhood radii")
    sp.add_argument("--delta", type=float, help="ensemble constant (estimated if absent)")
    sp.add_argument("--inflation", type=float)
    sp.add_argument("--cex-dir", help="directory for regularity counterexamples")
    return p


def _settings(ns: argparse.Namespace) -> dict[str, Any]:
    merged = dict(DEFAULTS)
    if ns.config:
        try:
            merged.update(read_config(ns.config))
        except ParseError as exc:
            raise ConfigError(str(exc)) from exc
    merged.update({k: v for k, v in vars(ns).items() if v is not None and k != "config"})
    return merged


def _typed(cfg: dict, key: str, kind):
    value = cfg.get(key)
    if value is None:
        return None
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot read {value!r} as {kind.__name__}") from None


def _floats(cfg: dict, key: str) -> list[float]:
    raw = str(cfg[key])
    try:
        return [float(t) for t in raw.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from None


def _seed(cfg: dict) -> int:
    seed = _typed(cfg, "seed", int)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _ensemble(cfg: dict) -> SamplingEnsemble:
    model = str(cfg["model"])
    if model == "gaussian":
        n, m = _typed(cfg, "n", int), _typed(cfg, "m", int)
        if n < 1 or m < 1:
            raise ConfigError("n and m must be positive")
        return generate_gaussian_ensemble(n, m, _seed(cfg))
    if model.startswith("file:"):
        return parse_ensemble(model[len("file:"):])
    raise ConfigError(f"model must be 'gaussian' or 'file:PATH', got {model!r}")


def _options(cfg: dict) -> SolveOptions:
    mode = cfg["step_mode"]
    try:
        if mode == "certified":
            delta = _typed(cfg, "delta", float)
            if delta is None:
                raise ConfigError("certified step mode needs --delta")
            step = Certified(delta)
        elif mode == "fixed":
            step = Fixed(_typed(cfg, "mu", float))
        elif mode == "ramp":
            step = HeuristicRamp(_typed(cfg, "mu_max", float), _typed(cfg, "tau", float))
        else:
            raise ConfigError(f"unknown step mode {mode!r}")
        return SolveOptions(
            step_mode=step,
            max_iterations=_typed(cfg, "max_iterations", int),
            stop_tolerance=_typed(cfg, "stop_tolerance", float),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --- commands ----------------------------------------------------------------------


def run_curves(cfg: dict) -> None:
    parts = _floats(cfg, "delta_grid")
    if len(parts) != 3 or parts[2] != int(parts[2]):
        raise ConfigError("delta-grid must be start,stop,points")
    try:
        reports = curve(parts[0], parts[1], int(parts[2]))
    except CertificateError as exc:
        raise ConfigError(str(exc)) from exc
    write_csv(CURVE_HEADER, (r.curve_row() for r in reports), cfg["out"])


def run_certify(cfg: dict) -> None:
    ens = _ensemble(cfg)
    est = estimate_delta(
        ens, _typed(cfg, "restarts", int), _typed(cfg, "iterations", int), _seed(cfg)
    )
    rows = [
        ("n", ens.n),
        ("m", ens.m),
        ("delta_estimate", est.delta_estimate),
        ("witness_norm", float(np.linalg.norm(est.witness))),
        ("witness_gap", abs(fourth_moment_gap(ens, est.witness) - est.delta_estimate)),
    ]
    if est.delta_estimate < 0.5:
        report = certificate_chain(est.delta_estimate)
        rows += list(zip(CURVE_HEADER[1:], report.curve_row()[1:]))
        certified = report.valid
    else:
        rows += [(name, math.nan) for name in CURVE_HEADER[1:-2]]
        rows += [("snr_min_db", math.inf), ("valid", False)]
        certified = False
    rows.append(("verdict", "certified" if certified else "out-of-regime"))
    write_csv(CERTIFY_HEADER, rows, cfg["out"])


def run_solve(cfg: dict) -> None:
    ens = _ensemble(cfg)
    opts = _options(cfg)
    seed = _seed(cfg)
    x = random_unit_signal(derive_stream(seed, 1).generator(), ens.n)
    y = forward_intensity(ens, x)
    if cfg.get("snr_db") is not None:
        levels = _floats(cfg, "snr_db")
        if len(levels) != 1:
            raise ConfigError("solve takes a single --snr-db level")
        y, _ = add_noise(y, levels[0], "gaussian_real", derive_stream(seed, 2))
    trace = solve(ens, y, opts, truth=x)
    write_csv(TRACE_HEADER, trace.rows(), cfg["out"])
    if cfg.get("estimate_out"):
        write_signal(trace.final_estimate, cfg["estimate_out"])


def run_sweep(cfg: dict) -> None:
    n = _typed(cfg, "n", int)
    trials = _typed(cfg, "trials", int)
    if n < 1 or trials < 1:
        raise ConfigError("n and trials must be positive")
    seed = _seed(cfg)
    opts = _options(cfg)
    opts = SolveOptions(
        step_mode=opts.step_mode, max_iterations=opts.max_iterations,
        stop_tolerance=SWEEP_SUCCESS,
    )
    rows = []
    for i, ratio in enumerate(_floats(cfg, "ratios")):
        m = max(1, int(round(ratio * n)))
        iters, wins = [], 0
        for t in range(trials):
            stream = derive_stream(seed, i).child(t)
            ens = generate_gaussian_ensemble(n, m, stream.master_seed)
            x = random_unit_signal(stream.child(1).generator(), n)
            try:
                trace = solve(ens, forward_intensity(ens, x), opts, truth=x)
            except NumericalError:
                continue
            if trace.dist[-1] <= SWEEP_SUCCESS:
                wins += 1
                iters.append(trace.iterations)
        rows.append((ratio, trials, wins / trials, float(np.median(iters)) if iters else math.nan))
    write_csv(SWEEP_HEADER, rows, cfg["out"])


def run_noisy(cfg: dict) -> None:
    ens = _ensemble(cfg)
    opts = _options(cfg)
    delta = _typed(cfg, "delta", float)
    if delta is None:
        delta = estimate_delta(ens, seed=_seed(cfg)).delta_estimate
    ladder = _floats(cfg, "snr_db") if cfg.get("snr_db") is not None else NOISY_LADDER
    rows = noisy_experiment(
        ens, ladder, _typed(cfg, "trials", int), opts, _seed(cfg), delta=delta
    )
    write_csv(NOISY_HEADER, (r.as_tuple() for r in rows), cfg["out"])


def run_audit(cfg: dict) -> None:
    ens = _ensemble(cfg)
    seed = _seed(cfg)
    samples = _typed(cfg, "trials", int)
    delta = _typed(cfg, "delta", float)
    if delta is None:
        delta = estimate_delta(ens, seed=seed).delta_estimate
    inflated = delta * _typed(cfg, "inflation", float)
    rows = []
    for j, eps in enumerate(_floats(cfg, "epsilon")):
        margins: dict[str, list[float]] = {}
        for i in range(samples):
            rng = derive_stream(seed, 1000 + j).child(i).generator()
            x = random_unit_signal(rng, ens.n)
            z = sample_neighbourhood(
                x, eps, rng, DIRECTIONS[i % len(DIRECTIONS)], "boundary" if i % 2 == 0 else "uniform"
            )
            results = [*check_lemma3(z, x, eps), *check_rip(ens, z, x, inflated, eps),
                       check_lipschitz(ens, z, x, inflated, eps),
                       check_strong_convexity(ens, z, x, inflated, eps)]
            for r in results:
                margins.setdefault(r.name, []).append(r.margin)
        for name, vals in margins.items():
            v = np.array(vals)
            rows.append((name, eps, samples, int(np.sum(v < -1e-9)), float(v.min())))
    report = certificate_chain(delta) if delta < 0.5 else None
    if report is not None and report.valid:
        cex = falsify_regularity(ens, report, samples, seed, out_dir=cfg.get("cex_dir"))
        # only counterexamples carry a margin, so a clean run reports nan
        rows.append(("regularity", report.epsilon, samples, len(cex),
                     min((c.result.margin for c in cex), default=math.nan)))
    write_csv(AUDIT_HEADER, rows, cfg["out"])


COMMANDS = {
    "curves": run_curves,
    "certify": run_certify,
    "solve": run_solve,
    "sweep": run_sweep,
    "noisy": run_noisy,
    "audit": run_audit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = _parser().parse_args(argv)
    try:
        cfg = _settings(ns)
        COMMANDS[ns.command](cfg)
    except (ConfigError, CertificateError) as exc:
        print(f"wflift: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"wflift: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ParseError) as exc:
        print(f"wflift: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"wflift: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
