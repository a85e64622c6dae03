"""Command-line entry point.

Exit status: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import replace
from fractions import Fraction

from . import __version__, _backend
from .automaton import SimParams, Simulation
from .experiments import (
    PRESETS, ConvergenceStudySpec, ResultsIOError, SweepSpec, Topology, convergence_time_study,
    emit_results, results_metadata, sweep_epsilon, trajectory, transition_threshold, write_text,
)
from .lexicon import as_epsilon, word_to_text
from .metrics import write_series_csv
from .network import EdgeListError


class UsageError(Exception):
    pass


def _epsilon(text: str) -> Fraction:
    try:
        return as_epsilon(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"{exc}; valid range is [0, 1] as NUM/DEN or a decimal with at most 6 digits") from None


def _epsilon_list(text: str) -> tuple[Fraction, ...]:
    return tuple(_epsilon(t) for t in text.split(","))


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"values must be positive, got {text!r}")
    return vals


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _default_seed() -> int:
    raw = os.environ.get("LEXNET_SEED")
    if raw is None:
        return 0
    try:
        return _nonneg(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"LEXNET_SEED: {exc}") from None


def _add_topology(p):
    g = p.add_argument_group("topology")
    g.add_argument("--topology", choices=["torus", "edgelist"], default=None,
                   help="interaction graph (default torus)")
    g.add_argument("--width", type=_positive, default=None, help="torus width (>= 3)")
    g.add_argument("--height", type=_positive, default=None, help="torus height (>= 3)")
    g.add_argument("--edges", metavar="PATH", help="edge-list file for --topology edgelist")


def _add_common(p, *, single_length=True):
    p.add_argument("--alphabet", type=_positive, default=None, help="number of symbols s (>= 2)")
    if single_length:
        p.add_argument("--length", type=_positive, default=None, help="word length L")
    else:
        p.add_argument("--length", type=_int_list, default=None, help="word lengths, comma-separated")
    p.add_argument("--schedule", choices=["async", "sequential"], default=None)
    p.add_argument("--permutation", choices=["identity", "random"], default=None,
                   help="sequential update order")
    p.add_argument("--seed", type=_nonneg, default=None, help="RNG seed (default $LEXNET_SEED or 0)")
    p.add_argument("--steps-multiplier", type=_nonneg, default=None, help="run for MULT * n steps")
    p.add_argument("--weighted", action="store_true",
                   help="weight collapse draws by how many neighbours convey each word")
    p.add_argument("--out", metavar="PATH", help="write results here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--timestamp", action="store_true", help="record the wall-clock time in metadata")


def _add_workers(p):
    p.add_argument("--workers", type=_positive, default=None,
                   help="worker processes (default: all cores; 1 runs serially)")


def build_parser() -> argparse.ArgumentParser:
    preset_names = ", ".join(sorted(PRESETS))
    parser = argparse.ArgumentParser(prog="lexnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lexnet {__version__} ({_backend.BACKEND} kernel)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation")
    _add_topology(p)
    _add_common(p)
    p.add_argument("--epsilon", type=_epsilon, default=Fraction(0), help="confusion parameter in [0, 1]")
    p.add_argument("--max-steps", type=_nonneg, default=None, help="exact step budget (overrides multiplier)")
    p.add_argument("--stop", choices=["consensus", "fixed-point", "none"], default="fixed-point",
                   help="stop at E=0, at an exact fixed point, or never")
    p.add_argument("--stride", type=_nonneg, default=0, help="energy sampling stride (default n)")
    p.add_argument("--snapshot", metavar="PATH", help="dump the final configuration")

    p = sub.add_parser("sweep", help=f"final energy versus epsilon (presets: {preset_names})")
    p.add_argument("--preset", choices=sorted(PRESETS), default="fig2-small")
    _add_topology(p)
    _add_common(p, single_length=False)
    p.add_argument("--epsilon", type=_epsilon_list, default=None, help="epsilon grid, comma-separated")
    p.add_argument("--trials", type=_positive, default=None)
    _add_workers(p)

    p = sub.add_parser("trajectory", help=f"averaged E(t) for several epsilons (presets: {preset_names})")
    p.add_argument("--preset", choices=sorted(PRESETS), default="fig2-small",
                   help="topology, alphabet and step budget defaults")
    _add_topology(p)
    _add_common(p)
    p.add_argument("--epsilon", type=_epsilon_list, default=(Fraction(0), Fraction(7, 10), Fraction(4, 5),
                                                              Fraction(9, 10), Fraction(1)))
    p.add_argument("--trials", type=_positive, default=None)
    p.add_argument("--stride", type=_nonneg, default=0, help="sampling stride (default n)")
    _add_workers(p)

    p = sub.add_parser("convergence", help="steps to a fixed point at epsilon=0 versus the proof bound")
    p.add_argument("--family", choices=["random", "torus", "edgelist"], default="random")
    p.add_argument("--sizes", type=_int_list, default=None,
                   help="vertex counts (random) or square sides (torus)")
    p.add_argument("--graphs-per-size", type=_positive, default=4)
    p.add_argument("--edges", metavar="PATH", action="append", default=[], help="edge-list file (repeatable)")
    p.add_argument("--schedule", choices=["async", "sequential", "both"], default="both")
    p.add_argument("--permutation", choices=["identity", "random"], default="random")
    p.add_argument("--length", type=_positive, default=4)
    p.add_argument("--alphabet", type=_positive, default=4)
    p.add_argument("--trials", type=_positive, default=1)
    p.add_argument("--seed", type=_nonneg, default=None)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--timestamp", action="store_true")
    _add_workers(p)

    p = sub.add_parser("verify", help="differential checks of the rule implementations")
    p.add_argument("--cases", type=_positive, default=10_000, help="random single-update cases")
    p.add_argument("--runs", type=_positive, default=50, help="full-run trajectory comparisons")
    p.add_argument("--seed", type=_nonneg, default=None)
    return parser


def _topology(args, base: Topology) -> Topology:
    kind = args.topology or ("edgelist" if args.edges else base.kind)
    if kind == "edgelist":
        if not args.edges:
            raise UsageError("--topology edgelist needs --edges PATH")
        if not os.path.isfile(args.edges):
            raise UsageError(f"cannot read edge-list file {args.edges}")
        return Topology("edgelist", path=args.edges)
    w = args.width or base.width
    h = args.height or args.width or base.height
    if w < 3 or h < 3:
        raise UsageError(f"torus sides must be >= 3, got {w}x{h}")
    return Topology("torus", w, h)


def _meta(args, spec=None, **extra) -> dict:
    if args.timestamp:
        extra["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return results_metadata(spec, **extra)


def _emit(args, text: str) -> None:
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    topo = _topology(args, Topology("torus", 32, 32))
    net = topo.build()
    mult = 500 if args.steps_multiplier is None else args.steps_multiplier
    params = SimParams(
        epsilon=args.epsilon, length=args.length or 8, alphabet=args.alphabet or 10,
        schedule=args.schedule or "async", permutation=args.permutation or "identity",
        seed=args.seed if args.seed is not None else _default_seed(),
        max_steps=args.max_steps if args.max_steps is not None else mult * net.n,
        stop_on_consensus=args.stop != "none", stop_on_fixed_point=args.stop == "fixed-point",
        weighted_collapse=args.weighted, sample_stride=args.stride,
    )
    sim = Simulation(net, params)
    res = sim.run()
    word = word_to_text(res.consensus) if res.consensus is not None else "none"
    summary = (f"graph={net.name} n={net.n} p={sim.initial_distinct} steps={res.steps} "
               f"converged={str(res.converged).lower()} final_energy={res.final_energy!r} consensus={word}")
    if args.snapshot:
        write_text(args.snapshot, res.config.snapshot())
    if args.out:
        if args.format == "csv":
            text = "# " + json.dumps(_meta(args, run=res.metadata), sort_keys=True) + "\n"
            text += write_series_csv([(0, params.seed, params.epsilon, params.length, params.alphabet,
                                       net.n, res.series)])
        else:
            text = json.dumps({"meta": _meta(args, run=res.metadata), "steps": res.steps,
                               "converged": res.converged, "consensus": word,
                               "series": res.series.samples}, sort_keys=True, indent=1) + "\n"
        write_text(args.out, text)
    print(summary)
    return 0


def _sweep_spec(args) -> SweepSpec:
    base = PRESETS[args.preset]
    changes = {"topology": _topology(args, base.topology)}
    for attr, val in (("lengths", args.length), ("alphabet", args.alphabet), ("epsilons", args.epsilon),
                      ("trials", args.trials), ("steps_multiplier", args.steps_multiplier),
                      ("schedule", args.schedule), ("permutation", args.permutation)):
        if val is not None:
            changes[attr] = val
    if args.weighted:
        changes["weighted_collapse"] = True
    changes["base_seed"] = args.seed if args.seed is not None else _default_seed()
    return replace(base, **changes)


def cmd_sweep(args) -> int:
    spec = _sweep_spec(args)
    rows = sweep_epsilon(spec, workers=args.workers)
    thresholds = {str(L): _frac(transition_threshold(rows, L)) for L in spec.lengths}
    text = emit_results(rows, args.format, _meta(args, spec, preset=args.preset, transition=thresholds),
                        columns=rows[0].columns if rows else None)
    _emit(args, text)
    return 0


def _frac(f):
    return None if f is None else f"{f.numerator}/{f.denominator}"


def cmd_trajectory(args) -> int:
    base = PRESETS[args.preset]
    topo = _topology(args, base.topology)
    net = topo.build()
    length = args.length or 32
    mult = base.steps_multiplier if args.steps_multiplier is None else args.steps_multiplier
    trials = args.trials or base.trials
    seed = args.seed if args.seed is not None else _default_seed()
    records = []
    for eps in args.epsilon:
        params = SimParams(epsilon=eps, length=length, alphabet=args.alphabet or base.alphabet,
                           schedule=args.schedule or "async", permutation=args.permutation or "identity",
                           seed=seed, max_steps=mult * net.n, stop_on_consensus=True,
                           weighted_collapse=args.weighted, sample_stride=args.stride)
        traj = trajectory(net, params, trials, workers=args.workers)
        records.append((eps, traj))
    meta = _meta(args, None, command="trajectory", graph=net.name, trials=trials, L=length, seed=seed)
    if args.format == "csv":
        rows = []
        for eps, traj in records:
            for i, (s, series) in enumerate(traj.runs):
                rows.append((i, s, eps, length, traj.params.alphabet, net.n, series))
            rows.append(("mean", seed, eps, length, traj.params.alphabet, net.n, traj.mean))
        text = "# " + json.dumps(meta, sort_keys=True) + "\n" + write_series_csv(rows)
    else:
        text = json.dumps({"meta": meta, "series": [
            {"epsilon": _frac(eps), "mean": traj.mean.samples} for eps, traj in records]},
            sort_keys=True, indent=1) + "\n"
    _emit(args, text)
    return 0


def cmd_convergence(args) -> int:
    schedules = ("sequential", "async") if args.schedule == "both" else (args.schedule,)
    if args.family == "edgelist" and not args.edges:
        raise UsageError("--family edgelist needs at least one --edges PATH")
    for path in args.edges:
        if not os.path.isfile(path):
            raise UsageError(f"cannot read edge-list file {path}")
    default_sizes = tuple(range(3, 31)) if args.family == "random" else (3, 4, 5, 6, 7, 8)
    spec = ConvergenceStudySpec(
        family=args.family, sizes=args.sizes or default_sizes, graphs_per_size=args.graphs_per_size,
        paths=tuple(args.edges), schedules=schedules, trials=args.trials,
        base_seed=args.seed if args.seed is not None else _default_seed(),
        length=args.length, alphabet=args.alphabet, permutation=args.permutation,
    )
    rows = convergence_time_study(spec, workers=args.workers)
    seq = [r for r in rows if r.schedule == "sequential"]
    summary = {
        "runs": len(rows),
        "converged": sum(r.converged for r in rows),
        "sequential_within_bound": sum(r.steps <= r.bound_sequential for r in seq),
        "sequential_runs": len(seq),
    }
    text = emit_results(rows, args.format, _meta(args, spec, summary=summary),
                        columns=rows[0].columns if rows else None)
    _emit(args, text)
    return 0 if summary["converged"] == len(rows) else 1


def cmd_verify(args) -> int:
    from . import verify
    seed = args.seed if args.seed is not None else _default_seed()
    report = verify.run_all(cases=args.cases, runs=args.runs, seed=seed)
    for name, (passed, total, example) in report.items():
        status = "PASS" if passed == total else "FAIL"
        print(f"{status} {name}: {passed}/{total}")
        if example is not None:
            print(f"  counterexample: {example}")
    return 0 if all(p == t for p, t, _ in report.values()) else 1


COMMANDS = {
    "simulate": cmd_simulate, "sweep": cmd_sweep, "trajectory": cmd_trajectory,
    "convergence": cmd_convergence, "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, EdgeListError, ValueError) as exc:
        print(f"lexnet {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ResultsIOError, OSError, RuntimeError) as exc:
        print(f"lexnet {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
