"""
Command-line interface: ``simulate``, ``infer``, ``convergence`` and ``presets``.

Exit status is 2 for unreadable or invalid input and 3 when inference
fails on a valid input (for example an observation record that is
impossible under the model).
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .continuous import posterior, query, query_dense
from .convergence import DEFAULT_DT_LIST, run_convergence
from .discrete import discrete_transition_matrix, forward_backward
from .errors import InferenceError, ModelFileError, ZeroBoundaryFlux, ZeroLikelihood
from .export import write_posterior_csv
from .models import PRESETS, load_model, model_to_dict
from .simulate import (
    ObservationTrace,
    SampledObservations,
    gillespie,
    observe,
    reconstruct,
    sample,
    write_json,
)

EXIT_INPUT = 2
EXIT_INFERENCE = 3


def _out_prefix(path):
    for ext in (".json", ".csv"):
        if path.endswith(ext):
            return path[: -len(ext)]
    return path


def cmd_presets(args):
    for name, (_, desc) in PRESETS.items():
        print(f"preset:{name:<8} {desc}")
    return 0


def cmd_simulate(args):
    model = load_model(args.model)
    traj = gillespie(model, args.horizon, "stationary", args.seed)
    trace = observe(traj, model)
    prefix = _out_prefix(args.out)
    write_json(traj, prefix + ".trajectory.json")
    write_json(trace, prefix + ".trace.json")
    files = [prefix + ".trajectory.json", prefix + ".trace.json"]
    if args.dt is not None:
        sample(trace, args.dt).write_csv(prefix + ".samples.csv")
        files.append(prefix + ".samples.csv")
    print(f"jumps: {len(traj.jump_times)}")
    print(f"observation transitions: {len(trace.transition_times)}")
    if traj.absorbed:
        print("absorbing state reached before horizon")
    for f in files:
        print(f"wrote {f}")
    return 0


def _load_trace(path):
    try:
        with open(path) as fh:
            return ObservationTrace.from_json(json.load(fh))
    except (OSError, ValueError, KeyError) as exc:
        raise ModelFileError(f"cannot read observation trace {path!r}: {exc}") from exc


def cmd_infer(args):
    model = load_model(args.model)
    if args.trace is not None:
        trace = _load_trace(args.trace)
    else:
        try:
            samples = SampledObservations.read_csv(args.samples)
        except (OSError, ValueError, KeyError) as exc:
            raise ModelFileError(f"cannot read samples {args.samples!r}: {exc}") from exc
        trace = reconstruct(samples)
        if args.dt is None and args.grid_dt is None:
            args.dt = samples.dt
    if args.mode == "discrete":
        if args.dt is None:
            raise ModelFileError("--dt is required for discrete mode")
        obs = sample(trace, args.dt)
        post = forward_backward(discrete_transition_matrix(model, args.dt), obs, model)
        write_posterior_csv(args.out, post.times, post.probs)
        print(f"steps: {len(obs.values)}")
    else:
        grid = args.grid_dt if args.grid_dt is not None else args.dt
        if grid is None:
            raise ModelFileError("--grid-dt (or --dt) is required for continuous mode")
        pf = posterior(model, trace)
        times, probs = query_dense(pf, grid)
        write_posterior_csv(args.out, times, probs)
        n = 200
        t0 = time.perf_counter()
        for k in range(n):
            query(pf, trace.horizon * k / (n - 1))
        per = (time.perf_counter() - t0) / n
        print(f"segments: {len(pf.segments)}")
        print(f"per-query seconds: {per:.3e}")
    print(f"wrote {args.out}")
    return 0


def cmd_convergence(args):
    model = load_model(args.model)
    dts = [float(x) for x in args.dt_list.split(",")] if args.dt_list else list(DEFAULT_DT_LIST)
    info = {"source": args.model, "definition": model_to_dict(model)}
    rep = run_convergence(model, args.horizon, args.trials, dts, args.seed,
                          workers=args.workers, model_info=info,
                          exact_trace=args.exact_trace)
    prefix = _out_prefix(args.out)
    with open(prefix + ".json", "w") as fh:
        json.dump(rep.to_json(), fh, indent=1)
        fh.write("\n")
    rep.write_csv(prefix + ".csv")
    print(f"slope: {rep.slope:.4f}")
    print(f"discrete time exponent: {rep.discrete_exponent:.4f}")
    print(f"reruns: {rep.reruns}")
    print(f"wrote {prefix}.json and {prefix}.csv")
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="ctsumproduct",
        description="Posterior inference for partially observed continuous-time Markov chains.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("presets", help="list built-in models").set_defaults(func=cmd_presets)

    s = sub.add_parser("simulate", help="simulate a trajectory and its observation trace")
    s.add_argument("--model", required=True, help="PATH or preset:NAME")
    s.add_argument("--horizon", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dt", type=float, help="also write samples on this grid")
    s.add_argument("--out", default="sim", help="output prefix")
    s.set_defaults(func=cmd_simulate)

    i = sub.add_parser("infer", help="posterior from an observation trace")
    i.add_argument("--model", required=True)
    src = i.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", help="observation trace JSON")
    src.add_argument("--samples", help="sampled observations CSV (t,y)")
    i.add_argument("--mode", choices=["discrete", "continuous"], default="continuous")
    i.add_argument("--dt", type=float)
    i.add_argument("--grid-dt", type=float)
    i.add_argument("--out", default="posterior.csv")
    i.set_defaults(func=cmd_infer)

    c = sub.add_parser("convergence", help="discrete vs continuous convergence study")
    c.add_argument("--model", required=True)
    c.add_argument("--horizon", type=float, default=10.0)
    c.add_argument("--trials", type=int, default=40)
    c.add_argument("--dt-list", help="comma-separated sampling steps")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--workers", type=int, default=None)
    c.add_argument("--exact-trace", action="store_true",
                   help="give the continuous algorithm the simulated trace, not the sampled one")
    c.add_argument("--out", default="convergence")
    c.set_defaults(func=cmd_convergence)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ZeroLikelihood, ZeroBoundaryFlux) as exc:
        print(f"{type(exc).__name__}: {exc} (t={exc.time!r})", file=sys.stderr)
        return EXIT_INFERENCE
    except (InferenceError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
