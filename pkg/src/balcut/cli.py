"""Command-line interface.

Exit codes: 0 on success (balanced cut or certificate alike), 2 for input
errors, 3 when an internal guarantee fails. Data goes to stdout (or
``--out``), logs to stderr.
"""

import argparse
import csv
import json
import logging
import math
import secrets
import sys
import time

import numpy as np

from . import __version__
from .driver import (
    RunConfig,
    balcut,
    certify_no_balanced_cut,
    decompose,
    decomposition_to_json,
    mmw_regret_check,
    outcome_to_json,
    trace_to_jsonl,
)
from .errors import BalcutError, ContractViolation, InputError, InvalidParams
from .expsketch import SketchConfig
from .formats import format_edge_list, read_graph
from .reference import generate, random_regular
from .rounding import RoundingConfig
from .selfcheck import expv_vs_dense, jl_distortion, random_regret_sequence, run_facts

log = logging.getLogger("balcut")

EXIT_OK, EXIT_INPUT, EXIT_CONTRACT = 0, 2, 3


def _seed(text):
    if text == "random":
        return secrets.randbits(63)
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer or 'random'") from None


def _add_graph_args(p):
    p.add_argument("--graph", required=True, help="input graph file")
    p.add_argument("--graph-format", choices=("edgelist", "metis"), default="edgelist")
    p.add_argument("--largest-component", action="store_true",
                   help="keep only the largest connected component")


def _add_run_args(p, gamma_required=True):
    p.add_argument("--b", type=float, default=0.5, help="balance parameter in (0, 1/2]")
    p.add_argument("--gamma", type=float, required=gamma_required, default=None)
    p.add_argument("--epsilon", type=float, default=1.0 / 130.0)
    p.add_argument("--t-constant", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--sketch-delta", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--sweep-constant", type=float, default=2048.0)
    p.add_argument("--no-verify", action="store_true",
                   help="return the certificate after T iterations without checking it")
    p.add_argument("--paper-constants", action="store_true")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threads", type=int, default=1)


def _add_output_args(p):
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--trace", default=None, help="write the per-iteration trace as JSON lines")


def build_parser():
    parser = argparse.ArgumentParser(prog="balcut", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"balcut {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="find a balanced sparse cut or a certificate")
    _add_graph_args(p)
    _add_run_args(p)
    _add_output_args(p)

    p = sub.add_parser("certify", help="run and interpret the certificate")
    _add_graph_args(p)
    _add_run_args(p)
    _add_output_args(p)

    p = sub.add_parser("decompose", help="recursive balanced-cut decomposition")
    _add_graph_args(p)
    _add_run_args(p)
    _add_output_args(p)
    p.add_argument("--min-size", type=int, default=4)

    p = sub.add_parser("gen", help="write a generated graph as an edge list")
    p.add_argument("kind")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="generator parameter; lists as comma-separated values")
    p.add_argument("--out", default=None)
    p.add_argument("--planted", default=None, help="write planted cuts as JSON here")

    p = sub.add_parser("selftest", help="randomised checks of the numerical kernels")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=_seed, default=0)

    p = sub.add_parser("bench", help="time fixed-length runs on random regular graphs")
    p.add_argument("--sizes", default="4096,8192,16384,32768,65536")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--max-iter", type=int, default=5)
    p.add_argument("--sketch-delta", type=float, default=0.5)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default=None)
    return parser


def _config(args):
    sketch = None
    if args.sketch_delta is not None or args.threads != 1:
        base = SketchConfig.paper() if args.paper_constants else SketchConfig()
        sketch = SketchConfig(**{**base.__dict__,
                                 "delta": args.sketch_delta or base.delta,
                                 "threads": args.threads})
    kwargs = {}
    if args.t_constant is not None:
        kwargs["t_constant"] = args.t_constant
    return RunConfig(
        b=args.b,
        gamma=args.gamma,
        epsilon=args.epsilon,
        max_iterations=args.max_iter,
        paper_constants=args.paper_constants,
        rng_seed=args.seed,
        sketch=sketch,
        rounding=RoundingConfig(trials=args.trials),
        sweep_constant=args.sweep_constant,
        verify=not args.no_verify,
        **kwargs,
    )


def _emit(args, payload, text):
    body = json.dumps(payload, indent=2) + "\n" if args.format == "json" else text
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _write_trace(args, trace):
    if getattr(args, "trace", None):
        with open(args.trace, "w") as fh:
            fh.write(trace_to_jsonl(trace))


def _outcome_text(out):
    if out.kind == "balanced_cut":
        return (f"balanced cut via {out.via}: {int(out.cut.sum())} vertices, "
                f"conductance {out.conductance:.6g}, balance {out.balance:.4f}, "
                f"{out.iterations} iterations\n")
    phi = "n/a" if out.conductance is None else f"{out.conductance:.6g}"
    return (f"certificate at gamma' = {out.gamma_certified:.6g} "
            f"(verified: {out.verified}), |S| = {int(out.cut.sum())}, conductance(S) {phi}, "
            f"{out.iterations} iterations\n")


def cmd_partition(args):
    cfg = _config(args)
    g = read_graph(args.graph, args.graph_format, args.largest_component)
    log.info("graph: n=%d m=%d; T=%d", g.n, g.m, cfg.iterations(g.n))
    out = balcut(g, cfg)
    _write_trace(args, out.trace)
    _emit(args, outcome_to_json(out, cfg), _outcome_text(out))
    return EXIT_OK


def cmd_certify(args):
    cfg = _config(args)
    g = read_graph(args.graph, args.graph_format, args.largest_component)
    out = balcut(g, cfg)
    _write_trace(args, out.trace)
    payload = outcome_to_json(out, cfg)
    if out.kind == "certificate":
        interp = certify_no_balanced_cut(out, g, cfg.b, cfg.gamma)
        payload["interpretation"] = {
            "balance_ceiling": interp.balance_ceiling,
            "conductance_threshold": interp.conductance_threshold,
            "certificate_mu": interp.certificate_mu,
        }
        text = (_outcome_text(out) + f"every cut of conductance <= {interp.conductance_threshold:.4g} "
                f"has mu <= {interp.balance_ceiling:.4g}\n")
    else:
        payload["interpretation"] = None
        text = _outcome_text(out) + "a balanced cut exists; nothing to certify\n"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_decompose(args):
    cfg = _config(args)
    g = read_graph(args.graph, args.graph_format, args.largest_component)
    leaves = decompose(g, cfg.gamma, cfg, min_size=args.min_size)
    payload = decomposition_to_json(g, leaves)
    text = "".join(f"leaf depth={leaf.depth} size={leaf.vertices.size} "
                   f"certified={leaf.certificate is not None}\n" for leaf in leaves)
    text += f"crossing fraction {payload['crossing_fraction']:.4g}\n"
    _emit(args, payload, text)
    return EXIT_OK


def _parse_value(text):
    if "," in text:
        return [_parse_value(t) for t in text.split(",") if t]
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def cmd_gen(args):
    params = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidParams(f"parameter {item!r} is not KEY=VALUE")
        params[key.replace("-", "_")] = _parse_value(value)
    g, planted = generate(args.kind, **params)
    text = format_edge_list(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.planted:
        with open(args.planted, "w") as fh:
            json.dump({"cuts": [np.flatnonzero(c).tolist() for c in planted]}, fh)
    log.info("generated %s: n=%d m=%d", args.kind, g.n, g.m)
    return EXIT_OK


def cmd_selftest(args):
    rng = np.random.default_rng(args.seed)
    results = []
    worst = run_facts(args.instances, seed=args.seed)
    for name, value in worst.items():
        results.append((f"fact {name}", value <= 1e-10, value))
    e = expv_vs_dense(max(10, args.instances // 10), seed=args.seed)
    results.append(("expv vs dense", e <= 1e-9, e))
    frac = jl_distortion(3, seed=args.seed, n=48)
    results.append(("sketch within 1/64", frac >= 0.99, frac))
    slack = min(mmw_regret_check(*_regret(rng)).slack for _ in range(10))
    results.append(("mmw regret", slack >= -1e-8, slack))
    failed = 0
    for name, ok, value in results:
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.3g}")
    return EXIT_OK if not failed else EXIT_CONTRACT


def _regret(rng):
    n = int(rng.integers(3, 17))
    Ys, d = random_regret_sequence(rng, n, int(rng.integers(1, 21)))
    return Ys, 1.0 / 130.0, d


def run_bench(sizes, degree=3, gamma=0.01, max_iter=5, sketch_delta=0.5, repeats=1, seed=0):
    """Best-of-``repeats`` wall time of fixed-length runs on random regular graphs.

    Each repeat times every size once, so slow phases of a shared machine
    hit all sizes alike. Returns one dict per size.
    """
    graphs = [random_regular(int(n), degree, seed=seed) for n in sizes]
    cfg = RunConfig(b=0.5, gamma=gamma, max_iterations=max_iter, rng_seed=seed,
                    verify=False, sketch=SketchConfig(delta=sketch_delta))
    best = [math.inf] * len(graphs)
    iters = [0] * len(graphs)
    for _ in range(max(1, repeats)):
        for i, g in enumerate(graphs):
            start = time.perf_counter()
            out = balcut(g, cfg)
            best[i] = min(best[i], (time.perf_counter() - start) * 1000.0)
            iters[i] = out.iterations
    return [{"n": g.n, "m": g.m, "gamma": gamma, "iterations": it, "wall_ms": ms}
            for g, it, ms in zip(graphs, iters, best)]


def cmd_bench(args):
    sizes = [int(s) for s in args.sizes.split(",") if s]
    rows = run_bench(sizes, args.degree, args.gamma, args.max_iter, args.sketch_delta,
                     args.repeats, args.seed)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(fh)
    writer.writerow(["n", "m", "gamma", "iterations", "wall_ms"])
    for r in rows:
        writer.writerow([r["n"], r["m"], r["gamma"], r["iterations"], f"{r['wall_ms']:.1f}"])
    if args.out:
        fh.close()
    return EXIT_OK


COMMANDS = {
    "partition": cmd_partition,
    "certify": cmd_certify,
    "decompose": cmd_decompose,
    "gen": cmd_gen,
    "selftest": cmd_selftest,
    "bench": cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        if getattr(args, "trace", None):
            with open(args.trace, "w") as fh:
                fh.write(trace_to_jsonl(exc.trace))
        return EXIT_CONTRACT
    except BalcutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
