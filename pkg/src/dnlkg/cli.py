"""Command-line interface.

Subcommands: ground-state, spectrum, simulate, modulate, ode, shoot,
probe, fit.  Global flags --config (JSON file validated against the
shipped schema), --out-dir and --quiet.  Report-producing paths write
the delimited timeseries, a JSON summary and matplotlib figures into
the run directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

log = logging.getLogger("dnlkg")


def load_config(path, overrides: dict | None = None):
    """Read and schema-validate a RunConfig JSON file."""
    import jsonschema

    from .experiments import RunConfig

    data = json.loads(Path(path).read_text())
    schema = json.loads(
        resources.files("dnlkg").joinpath("data/runconfig.schema.json").read_text()
    )
    jsonschema.validate(data, schema)
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)


def _write_json(path: Path, payload: dict):
    from .reporting import dump_json

    path.parent.mkdir(parents=True, exist_ok=True)
    dump_json(path, payload)
    log.info("wrote %s", path)


def cmd_ground_state(args) -> int:
    from .ground_state import ModelParams, QuadratureConfig, compute_constants

    quad = QuadratureConfig(half_width=args.quad_halfwidth, dx=args.quad_dx)
    consts = compute_constants(ModelParams(alpha=1.0, p=args.p), quad)
    payload = {"c_Q": consts.c_Q, "c_1": consts.c_1, "kappa": consts.kappa, "E_Q": consts.E_Q}
    _write_json(Path(args.out), payload)
    return 0


def cmd_spectrum(args) -> int:
    from .spectrum import compute_spectral_data

    data = compute_spectral_data(args.p, args.alpha, half_width=args.L, n=args.n)
    _write_json(Path(args.out), data.as_dict())
    if args.y_csv:
        path = Path(args.y_csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = ["x,Y"] + [f"{repr(float(x))},{repr(float(y))}" for x, y in zip(data.grid.x, data.Y)]
        path.write_text("\n".join(lines) + "\n")
        log.info("wrote %s", path)
    return 0


def cmd_simulate(args) -> int:
    from .experiments import run_scenario
    from .reporting import write_run

    config = load_config(args.config, {"output_dir": args.out_dir})
    record = run_scenario(config)
    out = Path(config.output_dir) if config.output_dir else None
    if out is None:
        out = Path("runs") / config.scenario
        write_run(record, out)
    if config.snapshot_times:
        _write_snapshots(config, out)
    log.info("classification: %s", record.summary.get("classification"))
    return 0


def _write_snapshots(config, out: Path):
    """Re-evolve the configured initial data, dumping (x, u, v) snapshots."""
    from .experiments import multi_soliton_state, vanishing_run  # noqa: F401
    from .experiments import RunConfig  # noqa: F401
    from .ground_state import eval_Q
    from .solver import FieldState, iterate

    grid = config.grid()
    if config.K >= 1:
        from .experiments import multi_soliton_state

        state = multi_soliton_state(config, grid)
    else:
        amp = config.amplitude if config.amplitude else 0.1
        state = FieldState(0.0, amp * eval_Q(config.p, grid.x), grid.zeros(), grid)
    targets = sorted(t for t in config.snapshot_times if t >= 0)
    snap_dir = out / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)

    def dump(st):
        path = snap_dir / f"state_t{st.t:.4f}.csv"
        lines = ["x,u,v"]
        lines += [
            f"{repr(float(a))},{repr(float(b))},{repr(float(c))}"
            for a, b, c in zip(grid.x, st.u, st.v)
        ]
        path.write_text("\n".join(lines) + "\n")
        log.info("wrote %s", path)

    if targets and targets[0] <= 0:
        dump(state)
        targets = [t for t in targets if t > 0]
    if not targets:
        return
    cfg = config.step_config()
    idx = 0
    for st in iterate(state, cfg):
        if st.t + 1e-12 >= targets[idx]:
            dump(st)
            idx += 1
            if idx >= len(targets):
                break


def cmd_modulate(args) -> int:
    from .grid import Grid1D
    from .modulation import decompose, diagnostics
    from .solver import FieldState
    from .spectrum import cached_spectral_data

    raw = np.loadtxt(args.state, delimiter=",", skiprows=1, ndmin=2)
    x, u, v = raw[:, 0], raw[:, 1], raw[:, 2]
    grid = Grid1D(half_width=float(-x[0]), n=x.size)
    state = FieldState(0.0, u, v, grid)
    sigma = [1 if c == "+" else -1 for c in args.signs]
    spectral = cached_spectral_data(args.p, args.alpha)
    dec = decompose(state, args.K, sigma, [float(z) for z in args.guess.split(",")], spectral)
    diag = diagnostics(dec)
    _write_json(Path(args.out), {"decomposition": dec.as_dict(), "diagnostics": diag.as_dict()})
    return 0


def cmd_ode(args) -> int:
    from .interaction_ode import (
        OdeState,
        exact_profile_y,
        integrate_centers,
        profile_residual,
        tau_profile,
    )

    profile = tau_profile(args.K, args.alpha, args.kappa)
    if args.profile or not args.y0:
        y0 = OdeState(t=args.t0, y=exact_profile_y(args.t0, profile))
    else:
        y0 = OdeState(t=args.t0, y=np.array([float(v) for v in args.y0.split(",")]))
    ts, ys = integrate_centers(y0, args.t1, alpha=args.alpha, kappa=args.kappa)

    out_dir = Path(args.out_dir or "runs/ode")
    out_dir.mkdir(parents=True, exist_ok=True)
    csv = out_dir / "centers.csv"
    header = "t," + ",".join(f"y_{k}" for k in range(1, args.K + 1))
    lines = [header]
    for t, y in zip(ts, ys):
        lines.append(",".join(repr(float(v)) for v in [t, *y]))
    csv.write_text("\n".join(lines) + "\n")
    log.info("wrote %s", csv)

    deviation = max(
        float(np.max(np.abs(y - exact_profile_y(t, profile)))) for t, y in zip(ts, ys)
    )
    gaps = np.diff(ys, axis=1)
    slope = float(np.polyfit(np.log(ts), gaps[:, 0], 1)[0]) if args.K >= 2 else None
    _write_json(
        out_dir / "summary.json",
        {
            "tau": profile.tau.tolist(),
            "gamma": profile.gamma.tolist(),
            "profile_residual_at_t0": profile_residual(args.t0, profile),
            "max_deviation_from_profile": deviation,
            "first_gap_vs_logt_slope": slope,
            "mean_drift": float(ys[-1].mean() - ys[0].mean()),
        },
    )
    return 0


def _run_and_report(args, expected_scenarios) -> int:
    from .experiments import run_scenario

    config = load_config(args.config, {"output_dir": args.out_dir})
    if config.scenario not in expected_scenarios:
        log.error("config scenario %r not usable here", config.scenario)
        return 2
    if config.output_dir is None:
        config = type(config).from_dict(
            dict(config.as_dict(), output_dir=f"runs/{config.scenario}")
        )
    record = run_scenario(config)
    log.info("classification: %s", record.summary.get("classification"))
    if "a_star" in record.summary:
        log.info("threshold amplitude: %.6e", record.summary["a_star"])
    return 0


def cmd_shoot(args) -> int:
    return _run_and_report(
        args, ("single_soliton", "two_soliton_shoot", "k_soliton_shoot")
    )


def cmd_probe(args) -> int:
    return _run_and_report(args, ("same_sign_pair",))


def cmd_fit(args) -> int:
    from .ground_state import compute_constants
    from .experiments import summarize
    from .reporting import load_record, render_figures, validate_record, write_run

    problems = validate_record(args.run_dir)
    if problems:
        for issue in problems:
            log.error("%s", issue)
        return 2
    record = load_record(args.run_dir)
    record.summary = summarize(record, compute_constants(record.config.params))
    write_run(record, args.run_dir)
    figures = render_figures(record, args.run_dir)
    for f in figures:
        log.info("rendered %s", f)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnlkg",
        description="Numerical laboratory for the 1D damped nonlinear Klein-Gordon equation",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=lambda **kw: argparse.ArgumentParser(parents=[common], **kw))

    gs = sub.add_parser("ground-state", help="ground-state interaction constants")
    gs.add_argument("--p", type=float, required=True)
    gs.add_argument("--quad-halfwidth", type=float, default=40.0)
    gs.add_argument("--quad-dx", type=float, default=0.005)
    gs.add_argument("--out", required=True)
    gs.set_defaults(func=cmd_ground_state)

    sp = sub.add_parser("spectrum", help="linearized operator spectrum and rates")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--L", type=float, default=40.0)
    sp.add_argument("--n", type=int, default=8192)
    sp.add_argument("--out", required=True)
    sp.add_argument("--y-csv", default=None, help="also dump eigenfunction samples")
    sp.set_defaults(func=cmd_spectrum)

    sim = sub.add_parser("simulate", help="run a configured scenario")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out-dir", default=None)
    sim.set_defaults(func=cmd_simulate)

    mod = sub.add_parser("modulate", help="decompose a state snapshot")
    mod.add_argument("--state", required=True, help="CSV with columns x,u,v")
    mod.add_argument("--K", type=int, required=True)
    mod.add_argument("--signs", required=True, help="pattern like +- or -+-")
    mod.add_argument("--guess", required=True, help="comma-separated centers")
    mod.add_argument("--p", type=float, default=3.0)
    mod.add_argument("--alpha", type=float, default=1.0)
    mod.add_argument("--out", default="modulation.json")
    mod.set_defaults(func=cmd_modulate)

    ode = sub.add_parser("ode", help="integrate the center system")
    ode.add_argument("--K", type=int, required=True)
    ode.add_argument("--alpha", type=float, required=True)
    ode.add_argument("--kappa", type=float, required=True)
    ode.add_argument("--t0", type=float, required=True)
    ode.add_argument("--t1", type=float, required=True)
    ode.add_argument("--y0", default=None, help="comma-separated initial centers")
    ode.add_argument("--profile", action="store_true", help="start on the exact profile")
    ode.add_argument("--out-dir", default=None)
    ode.set_defaults(func=cmd_ode)

    shoot = sub.add_parser("shoot", help="threshold bisection scenarios")
    shoot.add_argument("--config", required=True)
    shoot.add_argument("--out-dir", default=None)
    shoot.set_defaults(func=cmd_shoot)

    probe = sub.add_parser("probe", help="same-sign pair probe")
    probe.add_argument("--config", required=True)
    probe.add_argument("--out-dir", default=None)
    probe.set_defaults(func=cmd_probe)

    fit = sub.add_parser("fit", help="recompute fits and render figures for a run")
    fit.add_argument("--run-dir", required=True)
    fit.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
