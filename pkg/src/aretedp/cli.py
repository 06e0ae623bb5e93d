"""Command-line interface.

One subcommand per task; all data outputs are CSV with a single
'#'-prefixed metadata line (tool version, parameters, grid settings,
seed), or JSON where a certificate or report is the natural shape.  Every
subcommand that draws randomness takes --seed and is bit-reproducible; the
ARETEDP_SEED environment variable overrides the default seed.

Exit codes: 0 success, 2 validation error (message on stderr), 1 internal
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import traceback
from contextlib import contextmanager

import numpy as np

from . import __version__
from .density import (
    GridSpec,
    arete_density_grid,
    cdf_from_density,
    default_grid,
    discretize_laplace,
    lattice_points,
    staircase_density_grid,
)
from .distributions import (
    AreteParams,
    LaplaceParams,
    StaircaseParams,
    sample_arete,
    sample_laplace,
    sample_staircase,
)
from .divisibility import NoiseShareSpec, make_share
from .fedsum import SimConfig, SimMechanism, run_trials
from .mechanisms import Mode, error_table, in_strict_domain, parameterize_arete
from .privacy import analytic_ratio_bound, privacy_loss_curve, staircase_loss_curve
from .rng import RngStream
from .search import Objective, SearchConfig, local_search

SEED_ENV_VAR = "ARETEDP_SEED"


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "0"))


@contextmanager
def _open_output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _meta(command: str, **fields) -> str:
    parts = [f"aretedp {__version__}", f"command={command}"]
    parts += [f"{k}={v}" for k, v in fields.items() if v is not None]
    return "# " + " | ".join(parts)


def _fmt(value) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(value))


def _write_csv(out, meta: str, header: list[str], rows) -> None:
    out.write(meta + "\n")
    writer = csv.writer(out)
    writer.writerow(header)
    writer.writerows(rows)


def _mode(args) -> Mode:
    return Mode.PERMISSIVE if args.permissive else Mode.STRICT


def _mode_label(args) -> str:
    if args.permissive:
        return "permissive (outside the certified domain; verify empirically)"
    return "strict"


def _add_common(p: argparse.ArgumentParser, mechanism_choices=None, sensitivity=True) -> None:
    if mechanism_choices:
        p.add_argument(
            "--mechanism",
            choices=mechanism_choices,
            required=True,
            help="noise mechanism",
        )
    p.add_argument("--eps", type=float, required=True, help="privacy parameter epsilon (dimensionless, > 0)")
    if sensitivity:
        p.add_argument(
            "--sensitivity",
            type=float,
            default=1.0,
            help="query sensitivity (units of the query output; default 1.0)",
        )
    p.add_argument(
        "--permissive",
        action="store_true",
        help="allow Arete parameters below the certified epsilon threshold "
        "(flagged as unverified in output metadata; default: refuse)",
    )
    p.add_argument("-o", "--output", default=None, help="output path (default: stdout)")


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"RNG seed (64-bit integer; default: ${SEED_ENV_VAR} or 0)",
    )


def _seed(args) -> int:
    return _default_seed() if args.seed is None else args.seed


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--step", type=float, default=1e-3, help="grid spacing (query-output units; default 0.001)")
    p.add_argument(
        "--half-width",
        type=float,
        default=None,
        help="grid half-width (query-output units; default: auto-widened until tails are negligible)",
    )


def _grid_for(args, params: AreteParams) -> GridSpec:
    if args.half_width is not None:
        return GridSpec(args.step, args.half_width)
    return default_grid(params, args.sensitivity, step=args.step)


def _side_grid(args, scale: float) -> GridSpec:
    """Grid for Laplace/Staircase outputs: wide enough for negligible tail."""
    if args.half_width is not None:
        return GridSpec(args.step, args.half_width)
    hw = max(30.0 * scale, 2.0 * args.sensitivity + 1.0, 20.0 * args.step)
    return GridSpec(args.step, math.ceil(hw / args.step) * args.step)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_sample(args) -> None:
    seed = _seed(args)
    rng = RngStream(seed)
    if args.mechanism == "arete":
        params = parameterize_arete(args.eps, args.sensitivity, _mode(args))
        values = sample_arete(params, rng, args.n)
        detail = f"alpha={params.alpha:.6g} theta={params.theta:.6g} lam={params.lam:.6g}"
    elif args.mechanism == "laplace":
        scale = args.sensitivity / args.eps
        values = sample_laplace(LaplaceParams(scale), rng, args.n)
        detail = f"scale={scale:.6g}"
    else:
        sc = StaircaseParams(args.eps, args.sensitivity, args.gamma if args.gamma is not None else -1.0)
        values = sample_staircase(sc, rng, args.n)
        detail = f"gamma={sc.gamma:.6g}"
    meta = _meta(
        "sample",
        mechanism=args.mechanism,
        eps=args.eps,
        sensitivity=args.sensitivity,
        mode=_mode_label(args),
        params=detail,
        seed=seed,
    )
    with _open_output(args.output) as out:
        _write_csv(out, meta, ["value"], ([_fmt(v)] for v in values))


def _cmd_shares(args) -> None:
    seed = _seed(args)
    if args.target == "arete":
        target = parameterize_arete(args.eps, args.sensitivity, _mode(args))
        detail = f"alpha={target.alpha:.6g} theta={target.theta:.6g} lam={target.lam:.6g}"
    else:
        target = LaplaceParams(args.sensitivity / args.eps)
        detail = f"scale={target.scale:.6g}"
    spec = NoiseShareSpec(args.participants, target)
    round_rng = RngStream(seed).substream(args.round)
    shares = [make_share(spec, i, round_rng) for i in range(args.participants)]
    meta = _meta(
        "shares",
        target=args.target,
        eps=args.eps,
        sensitivity=args.sensitivity,
        participants=args.participants,
        round=args.round,
        mode=_mode_label(args),
        params=detail,
        seed=seed,
    )
    with _open_output(args.output) as out:
        _write_csv(
            out,
            meta,
            ["participant_index", "value"],
            ([s.participant_index, _fmt(s.value)] for s in shares),
        )


def _density_for_args(args):
    if args.mechanism == "arete":
        params = parameterize_arete(args.eps, args.sensitivity, _mode(args))
        grid = _grid_for(args, params)
        dens = arete_density_grid(params, grid)
        detail = f"alpha={params.alpha:.6g} theta={params.theta:.6g} lam={params.lam:.6g}"
    elif args.mechanism == "laplace":
        scale = args.sensitivity / args.eps
        grid = _side_grid(args, scale)
        dens = discretize_laplace(LaplaceParams(scale), grid)
        detail = f"scale={scale:.6g}"
    else:
        sc = StaircaseParams(args.eps, args.sensitivity, args.gamma if args.gamma is not None else -1.0)
        periods = math.ceil(math.log(1e9) / args.eps) + 2
        if args.half_width is None:
            hw = max(periods * args.sensitivity, 20.0 * args.step)
            grid = GridSpec(args.step, math.ceil(hw / args.step) * args.step)
        else:
            grid = GridSpec(args.step, args.half_width)
        dens = staircase_density_grid(sc, grid)
        detail = f"gamma={sc.gamma:.6g}"
    return dens, grid, detail


def _cmd_density(args) -> None:
    dens, grid, detail = _density_for_args(args)
    meta = _meta(
        "density",
        mechanism=args.mechanism,
        eps=args.eps,
        sensitivity=args.sensitivity,
        mode=_mode_label(args),
        params=detail,
        step=grid.step,
        half_width=grid.half_width,
        truncation_tail=f"{dens.truncation_tail:.3e}",
    )
    x = lattice_points(dens)
    with _open_output(args.output) as out:
        _write_csv(
            out,
            meta,
            ["x", "mass"],
            ([f"{xi:.10g}", f"{mi:.12e}"] for xi, mi in zip(x, dens.masses)),
        )


def _cmd_cdf(args) -> None:
    dens, grid, detail = _density_for_args(args)
    curve = cdf_from_density(dens)
    meta = _meta(
        "cdf",
        mechanism=args.mechanism,
        eps=args.eps,
        sensitivity=args.sensitivity,
        mode=_mode_label(args),
        params=detail,
        step=grid.step,
        half_width=grid.half_width,
        truncation_tail=f"{dens.truncation_tail:.3e}",
    )
    with _open_output(args.output) as out:
        _write_csv(
            out,
            meta,
            ["x", "F"],
            ([f"{xi:.10g}", f"{fi:.12e}"] for xi, fi in curve),
        )


def _cmd_privacy(args) -> None:
    max_shift = args.max_shift if args.max_shift is not None else 2.0 * args.sensitivity
    certificate = {
        "mechanism": args.mechanism,
        "epsilon": args.eps,
        "sensitivity": args.sensitivity,
    }
    if args.mechanism == "staircase":
        shifts = np.linspace(0.0, max_shift, args.points)
        losses = staircase_loss_curve(args.eps, args.sensitivity, shifts)
        certificate.update(
            eps_hat=float(staircase_loss_curve(args.eps, args.sensitivity, [args.sensitivity])[0]),
            certified=True,
            certificate="analytic (Staircase mechanism; loss = ceil(a/sensitivity)*eps)",
        )
        curve_rows = zip(shifts, losses)
    else:
        if args.mechanism == "arete":
            params = parameterize_arete(args.eps, args.sensitivity, _mode(args))
            grid = _grid_for(args, params)
            dens = arete_density_grid(params, grid)
            bound = analytic_ratio_bound(params, args.sensitivity, epsilon=args.eps)
            certificate.update(
                params={"alpha": params.alpha, "theta": params.theta, "lam": params.lam},
                bound_value=bound.bound_value if math.isfinite(bound.bound_value) else None,
                log_bound=bound.log_bound,
                assumptions=[[name, holds] for name, holds in bound.assumptions_checked],
                certified=bound.epsilon_certified,
                mode=_mode_label(args),
            )
        else:
            scale = args.sensitivity / args.eps
            grid = _side_grid(args, scale)
            dens = discretize_laplace(LaplaceParams(scale), grid)
            certificate.update(
                params={"scale": scale},
                certified=True,
                certificate="analytic (Laplace mechanism with scale sensitivity/eps)",
            )
        profile = privacy_loss_curve(dens, max_shift, args.points, sensitivity=args.sensitivity)
        certificate.update(
            eps_hat=profile.eps_hat,
            step_error_estimate=profile.step_error_estimate,
            excluded_range=profile.excluded_range,
            grid={"step": grid.step, "half_width": grid.half_width},
        )
        curve_rows = zip(profile.shifts, profile.losses)

    if args.curve is not None:
        meta = _meta(
            "privacy",
            mechanism=args.mechanism,
            eps=args.eps,
            sensitivity=args.sensitivity,
            max_shift=max_shift,
            points=args.points,
        )
        with _open_output(args.curve) as out:
            _write_csv(out, meta, ["shift", "loss"], ([f"{s:.10g}", f"{l:.10g}"] for s, l in curve_rows))
    with _open_output(args.output) as out:
        json.dump(certificate, out, indent=2)
        out.write("\n")


def _cmd_search(args) -> None:
    seed = _seed(args)
    grid = None
    if args.half_width is not None:
        grid = GridSpec(args.step, args.half_width)
    config = SearchConfig(
        eps_target=args.eps_target,
        sensitivity=args.sensitivity,
        objective=Objective(args.objective),
        max_iters=args.max_iters,
        grid=grid,
        margin=args.margin,
        seed_sweep=not args.no_sweep,
    )
    trace = local_search(config, RngStream(seed))
    if args.trace is not None:
        meta = _meta(
            "search",
            eps_target=args.eps_target,
            sensitivity=args.sensitivity,
            objective=args.objective,
            max_iters=args.max_iters,
            margin=trace.margin,
            seed=seed,
        )
        rows = (
            [
                _fmt(c.params.alpha),
                _fmt(c.params.theta),
                _fmt(c.params.lam),
                _fmt(c.objective_value),
                _fmt(c.eps_hat),
                int(c.feasible),
                int(c.accepted),
            ]
            for c in trace.iterations
        )
        with _open_output(args.trace) as out:
            _write_csv(out, meta, ["alpha", "theta", "lam", "objective", "eps_hat", "feasible", "accepted"], rows)
    result = {
        "eps_target": args.eps_target,
        "sensitivity": args.sensitivity,
        "objective": args.objective,
        "best": {"alpha": trace.best.alpha, "theta": trace.best.theta, "lam": trace.best.lam},
        "best_objective": trace.best_objective,
        "eps_hat": trace.best_eps_hat,
        "eps_hat_refined": trace.eps_hat_refined,
        "margin": trace.margin,
        "feasible": trace.feasible,
        "evaluations": trace.evaluations,
        "mc_expected_abs": trace.mc_expected_abs,
        "laplace_baseline": args.sensitivity / args.eps_target,
        "seed": seed,
    }
    with _open_output(args.output) as out:
        json.dump(result, out, indent=2)
        out.write("\n")


def _cmd_errors(args) -> None:
    seed = _seed(args)
    epsilons = [float(v) for v in args.eps.split(",") if v.strip()]
    rows = error_table(epsilons, args.sensitivity, rng=RngStream(seed), mc_samples=args.samples)
    meta = _meta(
        "errors",
        sensitivity=args.sensitivity,
        samples=args.samples,
        seed=seed,
    )
    with _open_output(args.output) as out:
        _write_csv(
            out,
            meta,
            [
                "epsilon",
                "laplace_expected_abs",
                "arete_bound",
                "arete_mc",
                "staircase_mc",
                "arete_certified_domain",
            ],
            (
                [
                    f"{r.epsilon:g}",
                    _fmt(r.laplace_expected_abs),
                    _fmt(r.arete_bound),
                    _fmt(r.arete_mc),
                    _fmt(r.staircase_mc),
                    int(r.arete_certified_domain),
                ]
                for r in rows
            ),
        )


_SIM_KEYS = {"n", "value_range", "mechanism", "epsilon", "trials", "seed", "participation", "permissive", "values"}


def _cmd_simulate(args) -> None:
    with open(args.config) as fh:
        raw = json.load(fh)
    unknown = set(raw) - _SIM_KEYS
    if unknown:
        raise ValueError(f"unknown simulate config keys: {sorted(unknown)}; allowed: {sorted(_SIM_KEYS)}")
    missing = {"n", "value_range", "mechanism", "epsilon", "trials"} - set(raw)
    if missing:
        raise ValueError(f"simulate config missing keys: {sorted(missing)}")
    values = raw.pop("values", None)
    seed = args.seed if args.seed is not None else raw.get("seed", _default_seed())
    config = SimConfig(
        n=int(raw["n"]),
        value_range=tuple(float(v) for v in raw["value_range"]),
        mechanism=SimMechanism(raw["mechanism"]),
        epsilon=float(raw["epsilon"]),
        trials=int(raw["trials"]),
        seed=int(seed),
        participation=int(raw["participation"]) if raw.get("participation") is not None else None,
        permissive=bool(raw.get("permissive", False)),
    )
    if values is None:
        lo, hi = config.value_range
        values = np.linspace(lo, hi, config.n)
    report = run_trials(config, values)
    if args.per_trial is not None:
        meta = _meta("simulate", mechanism=config.mechanism.value, seed=config.seed, trials=config.trials)
        with _open_output(args.per_trial) as out:
            _write_csv(
                out,
                meta,
                ["trial", "noisy_sum"],
                ([t, _fmt(v)] for t, v in enumerate(report.noisy_sums)),
            )
    payload = {
        "true_sum": report.true_sum,
        "mean_abs_error": report.mean_abs_error,
        "rmse": report.rmse,
        "metadata": report.metadata,
    }
    with _open_output(args.output) as out:
        json.dump(payload, out, indent=2)
        out.write("\n")


def _cmd_report(args) -> None:
    from .report import render_all

    written = render_all(args.out_dir, sensitivity=args.sensitivity, seed=_seed(args))
    for path in written:
        print(path)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aretedp",
        description="Infinitely divisible Arete noise for epsilon-differential privacy: "
        "sampling, noise shares, density grids, privacy-loss certification, parameter "
        "search, and a federated-sum simulator.",
        epilog=f"The {SEED_ENV_VAR} environment variable overrides the default seed (0).",
    )
    parser.add_argument("--version", action="version", version=f"aretedp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw noise samples as CSV rows")
    _add_common(p, ["arete", "laplace", "staircase"])
    p.add_argument("--n", type=int, default=1000, help="number of samples (default 1000)")
    p.add_argument("--gamma", type=float, default=None, help="staircase step split in [0,1] (default e^(-eps/2))")
    _add_seed(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("shares", help="emit one round of per-participant noise shares as CSV")
    p.add_argument("--target", choices=["arete", "laplace"], required=True, help="target central noise law")
    p.add_argument("--eps", type=float, required=True, help="privacy parameter epsilon (dimensionless, > 0)")
    p.add_argument("--sensitivity", type=float, default=1.0, help="query sensitivity (query-output units; default 1.0)")
    p.add_argument("--participants", type=int, required=True, help="number of participants n the noise is split over")
    p.add_argument("--round", type=int, default=0, help="aggregation round index (default 0)")
    p.add_argument("--permissive", action="store_true", help="allow Arete parameters below the certified threshold")
    p.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    _add_seed(p)
    p.set_defaults(func=_cmd_shares)

    for name, func, what in (
        ("density", _cmd_density, "per-bin probability masses"),
        ("cdf", _cmd_cdf, "cumulative distribution"),
    ):
        p = sub.add_parser(name, help=f"emit a discretized noise density's {what} as CSV")
        _add_common(p, ["arete", "laplace", "staircase"])
        p.add_argument("--gamma", type=float, default=None, help="staircase step split in [0,1] (default e^(-eps/2))")
        _add_grid(p)
        p.set_defaults(func=func)

    p = sub.add_parser("privacy", help="privacy-loss curve (CSV) and certificate (JSON)")
    _add_common(p, ["arete", "laplace", "staircase"])
    _add_grid(p)
    p.add_argument("--max-shift", type=float, default=None, help="largest query-output shift (default 2*sensitivity)")
    p.add_argument("--points", type=int, default=81, help="points on the loss curve (default 81)")
    p.add_argument("--curve", default=None, help="write the (shift, loss) curve CSV here ('-' for stdout)")
    p.set_defaults(func=_cmd_privacy)

    p = sub.add_parser("search", help="local search for Arete parameters under an empirical privacy constraint")
    p.add_argument("--eps-target", type=float, required=True, help="target empirical epsilon (dimensionless)")
    p.add_argument("--sensitivity", type=float, default=1.0, help="query sensitivity (query-output units; default 1.0)")
    p.add_argument(
        "--objective",
        choices=[o.value for o in Objective],
        default=Objective.EXPECTED_ABS.value,
        help="objective to minimize (default expected-abs)",
    )
    p.add_argument("--max-iters", type=int, default=400, help="candidate evaluation budget (default 400)")
    p.add_argument("--margin", type=float, default=None, help="feasibility margin below eps-target (default: 2x grid error estimate)")
    p.add_argument("--no-sweep", action="store_true", help="skip the coarse seed sweep before refinement")
    _add_grid(p)
    p.add_argument("--trace", default=None, help="write the candidate trace CSV here")
    p.add_argument("-o", "--output", default=None, help="output path for the result JSON (default: stdout)")
    _add_seed(p)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("errors", help="expected-noise comparison table across epsilons (CSV)")
    p.add_argument("--eps", required=True, help="comma-separated epsilon list, e.g. 24,32,40")
    p.add_argument("--sensitivity", type=float, default=1.0, help="query sensitivity (query-output units; default 1.0)")
    p.add_argument("--samples", type=int, default=100_000, help="Monte Carlo sample count per cell (default 100000)")
    p.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    _add_seed(p)
    p.set_defaults(func=_cmd_errors)

    p = sub.add_parser("simulate", help="run the federated-sum simulator from a JSON config")
    p.add_argument("--config", required=True, help="JSON config file (keys: n, value_range, mechanism, epsilon, trials, seed, participation, permissive, values)")
    p.add_argument("--per-trial", default=None, help="write per-trial noisy sums CSV here")
    p.add_argument("-o", "--output", default=None, help="output path for the report JSON (default: stdout)")
    _add_seed(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("report", help="render the standard figures (PNG) with their data (CSV)")
    p.add_argument("--out-dir", required=True, help="directory to write figures and CSVs into")
    p.add_argument("--sensitivity", type=float, default=1.0, help="query sensitivity (query-output units; default 1.0)")
    _add_seed(p)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
        return 0
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
