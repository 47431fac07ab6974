"""Command-line interface: orbit, extract, simulate, analyze, sweep.

Exit codes: 0 success, 2 parse error, 3 no plan found, 4 missing
measurement setting, 5 size cap exceeded (1 for anything else).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import networks
from .analysis import build_report
from .graphstate import GraphState, SizeCapError, to_dense
from .io import (ParseError, RunConfig, parse_counts, parse_graph,
                 report_to_json, serialize_graph, sha256_file, write_counts)
from .keyrates import simulate_protocol
from .noise import apply_noise, pump_sweep
from .pauli import from_name
from .routing import (NoPlanFoundError, find_bell_multicast_plan, find_ghz_plan,
                      lc_orbit, plan_to_json)

EXIT_PARSE = 2
EXIT_NO_PLAN = 3
EXIT_MISSING_SETTING = 4
EXIT_CAP = 5


def _load_config(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.from_json(args.config)
    else:
        cfg = RunConfig(graph=args.graph or "")
    for name in ("graph", "seed", "out", "protocol", "rounds"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "alice", None) is not None:
        cfg.alice = args.alice
    if getattr(args, "bobs", None):
        cfg.bobs = tuple(int(b) for b in args.bobs.split(","))
    if not cfg.graph:
        raise ParseError("no graph file given (--graph or config)")
    return cfg


def _preparation_frame(graph):
    """Default photonic preparation frame: H on odd modes, Z on even (1-based)."""
    h, z = from_name("H"), from_name("SS")
    return {v: h if v % 2 == 0 else z for v in graph.vertices}


def _extract_plans(cfg: RunConfig):
    graph = parse_graph(cfg.graph)
    parts = cfg.participants()
    prep = _preparation_frame(graph)
    plans = {}
    if cfg.protocol in ("nqkd", "both"):
        plan = find_ghz_plan(graph, parts, preparation_frame=prep)
        if plan is None:
            raise NoPlanFoundError(
                f"no GHZ plan over vertices {sorted(p + 1 for p in parts)}")
        plans["nqkd"] = plan
    if cfg.protocol in ("2qkd", "both"):
        alice = cfg.alice - 1
        bobs = [b - 1 for b in cfg.bobs]
        plans["2qkd"] = _pairwise_plan_set(graph, alice, bobs, prep)
    return graph, plans


def _pairwise_plan_set(graph, alice, bobs, prep):
    """Greedy cover of a spanning link set by multicast plans.

    Tries to cast as many disjoint pairs as possible per copy: first the
    star links (alice, bob) in label order, each time preferring the largest
    simultaneously-castable set, then bridges between unlinked bobs.
    """
    from itertools import combinations

    users = [alice] + sorted(bobs)
    needed = [(min(alice, b), max(alice, b)) for b in sorted(bobs)]
    plans = []
    covered: set[tuple[int, int]] = set()
    # connectivity via union-find over users
    parent = {u: u for u in users}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    def connected():
        return len({find(u) for u in users}) == 1

    candidate_links = needed + [
        (a, b) for a, b in combinations(sorted(users), 2)
        if (a, b) not in needed]
    while not connected():
        best = None
        for size in range(len(users) // 2, 0, -1):
            for combo in combinations(candidate_links, size):
                flat = [v for p in combo for v in p]
                if len(set(flat)) != len(flat):
                    continue
                if all(find(a) == find(b) for a, b in combo):
                    continue
                plan = find_bell_multicast_plan(graph, combo,
                                                preparation_frame=prep)
                if plan is None:
                    continue
                best = plan
                break
            if best:
                break
        if best is None:
            raise NoPlanFoundError(
                f"no Bell multicast plans span users {sorted(u + 1 for u in users)}")
        plans.append(best)
        for a, b in best.pairs:
            covered.add((a, b))
            parent[find(a)] = find(b)
    return plans


def cmd_orbit(args) -> int:
    graph = parse_graph(args.graph)
    if args.cap is not None and graph.n > args.cap:
        raise SizeCapError(f"graph has {graph.n} vertices, above --cap {args.cap}")
    members = lc_orbit(graph)
    print(f"orbit of {args.graph}: {len(members)} members")
    for g in members:
        print("  " + "; ".join(f"{u + 1}-{v + 1}" for u, v in g.edges()))
    return 0


def cmd_extract(args) -> int:
    cfg = _load_config(args)
    graph, plans = _extract_plans(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for proto, planset in plans.items():
        planset = planset if isinstance(planset, list) else [planset]
        for k, plan in enumerate(planset):
            path = out / f"plan_{proto}_{k}.json"
            path.write_text(plan_to_json(plan))
            lcs = " ".join(str(v + 1) for v in plan.lc_sequence) or "(none)"
            bases = " ".join(f"{v + 1}:{b}" for v, b in
                             sorted(plan.nonparticipant_bases.items()))
            print(f"{proto} plan {k}: LC at {lcs}; nonparticipant bases {bases}"
                  f" -> {path}")
    return 0


def _noisy_state(cfg: RunConfig, graph, plans):
    model = cfg.noise_model()
    any_plan = next(iter(plans.values()))
    any_plan = any_plan[0] if isinstance(any_plan, list) else any_plan
    vec = to_dense(GraphState(graph, dict(any_plan.preparation_frame)))
    if (not model.depolarizing and not model.dephasing and not model.bit_flip
            and model.white_noise == 0.0):
        return vec
    return apply_noise(vec, graph.vertices, model).matrix


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    if cfg.seed is None:
        raise ParseError("simulation requires a seed")
    graph, plans = _extract_plans(cfg)
    state = _noisy_state(cfg, graph, plans)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for proto, planset in plans.items():
        planset = planset if isinstance(planset, list) else [planset]
        for k, plan in enumerate(planset):
            tag = proto if proto == "nqkd" else f"bell{k}"
            b1, b2 = simulate_protocol(plan, cfg.rounds, cfg.seed + k,
                                       cfg.type2_fraction, state)
            for suffix, batch in (("type1", b1), ("type2", b2)):
                path = out / f"{tag}_{suffix}.counts"
                write_counts(path, batch, graph.n, seed=cfg.seed,
                             rounds=cfg.rounds)
                print(f"wrote {path} ({batch.total} rounds)")
    return 0


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    graph, plans = _extract_plans(cfg)
    counts_dir = Path(args.counts or cfg.out)
    batches = {}
    hashes = {"graph": sha256_file(cfg.graph)}
    expected = []
    if "nqkd" in plans:
        expected.append(("nqkd", "nqkd", plans["nqkd"]))
    for k, plan in enumerate(plans.get("2qkd", [])):
        expected.append((f"bell{k}", f"bell{k}", plan))
    for tag, key, plan in expected:
        for rt, suffix in (("type-1", "type1"), ("type-2", "type2")):
            path = counts_dir / f"{tag}_{suffix}.counts"
            if not path.exists():
                print(f"missing counts file for setting {key}/{rt}: {path}",
                      file=sys.stderr)
                return EXIT_MISSING_SETTING
            batch = parse_counts(path)
            from .routing import compile_round_settings
            want = compile_round_settings(plan, rt)
            got = batch.setting.basis_string(range(graph.n))
            if got != want.basis_string(graph.vertices):
                print(f"{path}: basis {got} does not match plan setting "
                      f"{want.basis_string(graph.vertices)}", file=sys.stderr)
                return EXIT_MISSING_SETTING
            batches[f"{key}/{rt}"] = batch
            hashes[path.name] = sha256_file(path)
    report = build_report(plans.get("nqkd"), plans.get("2qkd", []), batches,
                          mc_samples=cfg.mc_samples,
                          mc_seed=cfg.seed if cfg.seed is not None else 0)
    text = report_to_json(report, hashes, config_echo=vars(cfg))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(text)
    print(text, end="")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    graph, plans = _extract_plans(cfg)
    plan = plans.get("nqkd")
    if plan is None:
        plan = plans["2qkd"][0]
    lo, hi, steps = cfg.sweep_powers
    if steps < 3:
        raise ParseError("sweep grid must have at least 3 points")
    model = cfg.noise_model()
    result = pump_sweep(plan, model, np.linspace(lo, hi, int(steps)))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["p_mW,akr,rate_hz,keyrate_hz"]
    for p, a, r, k in zip(result.powers, result.akr, result.raw_rates,
                          result.key_rates):
        lines.append(f"{p:.12g},{a:.12g},{r:.12g},{k:.12g}")
    csv_path = out / "sweep.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    summary = {"optimum_power_mw": float(f"{result.optimum_power:.12g}"),
               "optimum_keyrate_hz": float(f"{result.optimum_rate:.12g}")}
    (out / "sweep_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {csv_path}; optimum {result.optimum_power:g} mW "
          f"at {result.optimum_rate:.6g} Hz")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphqcka")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--graph")
        p.add_argument("--config")
        p.add_argument("--out")
        p.add_argument("--protocol", choices=["nqkd", "2qkd", "both"])
        p.add_argument("--alice", type=int)
        p.add_argument("--bobs", help="comma-separated 1-based labels")
        p.add_argument("--rounds", type=int)
        if seed:
            p.add_argument("--seed", type=int)

    p = sub.add_parser("orbit", help="enumerate the local-complementation orbit")
    p.add_argument("--graph", required=True)
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("extract", help="search extraction plans for the roles")
    common(p, seed=False)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("simulate", help="sample protocol rounds to counts files")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="turn counts files into a key-rate report")
    common(p)
    p.add_argument("--counts", help="directory holding counts files")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="pump-power key-rate sweep to CSV")
    common(p, seed=False)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NoPlanFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_PLAN
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
