"""Command line entry point: ``sarnet run | partition | costs``.

Exit codes: 0 success, 1 validation error, 2 numerical diagnostic,
3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .costs import default_cost_text, dump_cost_table, read_cost_table
from .exceptions import SarnetError
from .network import classify_node, load_tree, read_network, tree_interference
from .estimators import DiffusionSetPartitioner
from .runner import run_scenario, summary_text, write_outputs
from .scenario import bundled_scenario_text, parse_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

logger = logging.getLogger("sarnet")


def cmd_run(args) -> int:
    if args.scenario == "table2":
        text, base_dir = bundled_scenario_text("table2"), None
    else:
        path = Path(args.scenario)
        text, base_dir = path.read_text(encoding="utf-8"), path.parent
    scenario = parse_scenario(text)
    results = run_scenario(scenario, base_dir)
    if args.only_baseline:
        results = {"baseline": results["baseline"]}
    write_outputs(scenario, results, args.output)
    if not args.quiet:
        baseline = results["baseline"]
        for res in results.values():
            print(summary_text(scenario, res, None if res is baseline else baseline))
    return EXIT_NUMERIC if any(r.diagnostics for r in results.values()) else EXIT_OK


def cmd_partition(args) -> int:
    net = read_network(args.graph)
    part = DiffusionSetPartitioner().fit(net)
    weights = None
    source = None
    if args.tree:
        tree = load_tree(Path(args.tree).read_text(encoding="utf-8"))
        weights = tree_interference(net, tree)
        source = "tree"
    elif net.weights:
        weights = {n: net.weight(n) for n in net.nodes}
        source = "file"
    states = None
    if weights is not None and args.t1 is not None and args.t2 is not None:
        states = {n: classify_node(weights[n], args.t1, args.t2).label for n in sorted(net.nodes)}
    elif (args.t1 is None) != (args.t2 is None):
        raise SarnetError("--t1 and --t2 must be given together")

    if args.json:
        doc = {
            "sink": net.sink,
            "sets": part.sets_,
            "depths": {n: part.depths_[n] for n in sorted(net.nodes)},
        }
        if weights is not None:
            doc["weights"] = {n: weights[n] for n in sorted(net.nodes)}
            doc["weight_source"] = source
        if states is not None:
            doc["states"] = states
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    for k, members in enumerate(part.sets_, start=1):
        depth = part.depths_[members[0]]
        print(f"I{k} (depth {depth}): {{{', '.join(members)}}}")
    if states is not None:
        print()
        for n, state in states.items():
            print(f"{n}\t{weights[n]:g}\t{state}")
    return EXIT_OK


def cmd_costs(args) -> int:
    if args.table:
        sys.stdout.write(dump_cost_table(read_cost_table(args.table)))
    else:
        sys.stdout.write(default_cost_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sarnet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and write CSV/report files")
    p.add_argument("scenario", help="scenario file, or 'table2' for the bundled baseline")
    p.add_argument("-o", "--output", default="out", help="output directory (default: out)")
    p.add_argument("--only-baseline", action="store_true", help="skip the scenario's variants")
    p.add_argument("-q", "--quiet", action="store_true", help="do not print summaries")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("partition", help="print the diffusion sets of a graph file")
    p.add_argument("graph")
    p.add_argument("--t1", type=float)
    p.add_argument("--t2", type=float)
    p.add_argument("--tree", help="collection tree file ('parent <child> <parent>' lines)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("costs", help="print a cost table in canonical form")
    p.add_argument("--table", help="cost table file (default: built-in table)")
    p.set_defaults(func=cmd_costs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except SarnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
