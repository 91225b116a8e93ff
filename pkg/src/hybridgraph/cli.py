"""Command-line front end.

Subcommands::

    rates     figure tables (boosted fusion, 2D clusters, scheme comparison)
    plan      compile a generation plan to JSON lines
    simulate  Monte Carlo success estimate for a plan file
    factory   three-factory sizing and success sweeps
    verify    oracle verification suite
    compare   Monte Carlo against the closed form for a plan family

Exit codes: 0 success, 1 verification failure, 2 usage error. The seed and
output directory may come from ``HYBRIDGRAPH_SEED`` and
``HYBRIDGRAPH_OUTDIR``; flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analytics as an
from . import emitter as em
from . import montecarlo as mc
from . import verify as vf
from .errors import GraphError, PlanError

ENV_SEED = "HYBRIDGRAPH_SEED"
ENV_OUTDIR = "HYBRIDGRAPH_OUTDIR"

FAMILIES = ("linear", "ghz", "boosted-pair", "cluster2d", "clusterNd", "ring", "encoded-ring")


class UsageError(Exception):
    """Bad flag values that argparse cannot catch on its own."""


# -- argument helpers ----------------------------------------------------------------------
def _count(text: str) -> int:
    """Accept ``100000`` as well as ``1e5``."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(v)


def _int_list(text: str) -> list[int]:
    try:
        return list(an.iter_sweep(text))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _eta(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("eta must lie in [0, 1]")
    return v


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(ENV_SEED)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{ENV_SEED} must be an integer") from None


def _out_path(args, default_name: str | None = None) -> Path | None:
    """Resolve ``-o`` against the output directory; None means stdout."""
    outdir = getattr(args, "outdir", None) or os.environ.get(ENV_OUTDIR)
    name = getattr(args, "output", None)
    if name is None and outdir and default_name:
        name = default_name
    if name is None:
        return None
    path = Path(name)
    if outdir and not path.is_absolute():
        path = Path(outdir) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _emit_text(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        path.write_text(text, newline="")


def _emit_table(rows, args, default_name: str) -> None:
    path = _out_path(args, default_name)
    fmt = args.format or ("json" if path is not None and path.suffix == ".json" else "csv")
    text = an.table_to_csv(rows) if fmt == "csv" else an.table_to_json(rows) + "\n"
    _emit_text(text, path)


def _add_output(p: argparse.ArgumentParser, tables: bool = True) -> None:
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--outdir", help=f"directory for relative outputs (env {ENV_OUTDIR})")
    if tables:
        p.add_argument("--format", choices=("csv", "json"), help="table format (default from extension, else csv)")


# -- commands ----------------------------------------------------------------------------
def cmd_rates(args) -> int:
    grid: dict = {"m_cap": args.m_cap}
    if args.figure in ("5", "9"):
        grid.update(eta_min=args.eta_min, eta_max=args.eta_max, steps=args.steps)
        if args.eta_min >= args.eta_max and args.steps > 1:
            raise UsageError("--eta-min must be below --eta-max")
    if args.figure == "5" and args.m_values:
        grid["m_values"] = args.m_values
    if args.figure == "6":
        grid.update(sizes=args.sizes, etas=args.etas, T_emit=args.t_emit, T_h=args.t_h)
    if args.figure == "9":
        grid["max_ancillas"] = args.max_ancillas
    rows = an.figure_data(f"fig{args.figure}", **grid)
    _emit_table(rows, args, f"fig{args.figure}.csv")
    return 0


def build_plan(family: str, args) -> em.GenerationPlan:
    m = args.m
    if family == "linear":
        if not args.sizes:
            raise UsageError("linear needs --sizes")
        return em.compile_linear(args.sizes)
    if family == "ghz":
        return em.compile_ghz(args.n)
    if family == "boosted-pair":
        return em.compile_boosted_pair(m)
    if family == "cluster2d":
        return em.compile_2d_layers(args.n1, args.n2, m)
    if family == "clusterNd":
        if not args.dims:
            raise UsageError("clusterNd needs --dims")
        return em.compile_cluster_nd(args.dims, m)
    if family == "ring":
        return em.compile_ring(args.k, m)
    if family == "encoded-ring":
        return em.compile_encoded_ring(args.k, args.n1, args.n2, m)
    raise UsageError(f"unknown family {family!r}")


def analytic_probability(plan: em.GenerationPlan, eta: float) -> float:
    """Closed-form success probability for a compiled family."""
    p = plan.params
    fam = plan.family
    if fam in ("linear", "ghz"):
        return 1.0
    if fam == "boosted-pair":
        return an.p_boosted(p["m"], eta)
    if fam == "cluster2d":
        return an.p_cluster_2d(p["n1"], p["n2"], p["m"], eta)
    if fam == "clusterNd":
        return an.p_cluster_ddim(p["dims"], p["m"], eta)
    if fam == "ring":
        return an.p_ring(p["k"], p["m"], eta)
    if fam == "encoded-ring":
        return an.p_ring_encoded(p["k"], p["n1"], eta, p["m"], p["n2"])
    raise UsageError(f"no closed form for family {fam!r}")


def cmd_plan(args) -> int:
    plan = build_plan(args.family, args)
    _emit_text(plan.to_jsonl(), _out_path(args))
    return 0


def cmd_simulate(args) -> int:
    plan = em.read_plan(args.plan)
    loss = mc.LossModel(args.eta, _seed(args), args.substream)
    est = mc.estimate(plan, loss, args.trials, workers=args.workers)
    _emit_text(mc.results_json(plan, loss, est) + "\n", _out_path(args))
    return 0


def cmd_compare(args) -> int:
    plan = build_plan(args.family, args)
    seed = _seed(args)
    rows = []
    for eta in args.etas:
        est = mc.estimate(plan, mc.LossModel(eta, seed, args.substream), args.trials, z=args.z, workers=args.workers)
        exact = analytic_probability(plan, eta)
        rows.append(
            {
                "family": plan.family,
                "eta": eta,
                "trials": est.trials,
                "p_hat": est.p_hat,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "p_exact": exact,
                "within": int(est.contains(exact)),
            }
        )
    _emit_table(rows, args, f"compare-{plan.family}.csv")
    return 0 if all(r["within"] for r in rows) else 1


def _parse_sweep(items: list[str]) -> dict[str, list[int]]:
    out = {}
    for item in items:
        key, _, rng = item.partition("=")
        key = key.strip().upper().replace("_", "")
        if key not in ("NA", "NB") or not rng:
            raise UsageError(f"--sweep expects NA=a..b or NB=a..b, got {item!r}")
        try:
            out[key] = list(an.iter_sweep(rng))
        except ValueError as e:
            raise UsageError(str(e)) from None
    return out


def cmd_factory(args) -> int:
    m = args.m if args.m is not None else an.m_opt(args.eta)
    base = an.FactoryConfig(k=args.k, n1=args.n1, m=m, n2=args.n2, eps=args.epsilon)
    size = an.factory_sizing(base, args.eta, args.strict)
    head = {"k": args.k, "n1": args.n1, "n2": args.n2, "m": m, "eta": args.eta, "epsilon": args.epsilon}
    sweep = _parse_sweep(args.sweep or [])
    if not sweep:
        cfg = an.FactoryConfig(args.k, args.n1, m, args.n2, size["N_A"], size["N_B"], args.epsilon)
        row = {**head, **size, "P_S": an.factory_success(cfg, args.eta, args.strict)}
        rows = [row]
    else:
        nas = sweep.get("NA", [args.na if args.na is not None else size["N_A"]])
        nbs = sweep.get("NB", [args.nb if args.nb is not None else size["N_B"]])
        rows = []
        for na in nas:
            for nb in nbs:
                cfg = an.FactoryConfig(args.k, args.n1, m, args.n2, na, nb, args.epsilon)
                rows.append({**head, "N_A": na, "N_B": nb, "P_S": an.factory_success(cfg, args.eta, args.strict)})
    _emit_table(rows, args, "factory.csv")
    return 0


def cmd_verify(args) -> int:
    reports = vf.run_suite(args.cases, args.max_qubits, _seed(args))
    reports.append(vf.verify_linear(args.max_photons))
    for r in reports:
        print(r.line())
        if not r.ok and r.counterexample is not None:
            print("  counterexample: " + json.dumps(r.counterexample, default=str))
    path = _out_path(args)
    if path is not None:
        path.write_text(vf.report_json(reports) + "\n")
    bad = sum(not r.ok for r in reports)
    print(f"{len(reports) - bad}/{len(reports)} rules passed")
    return 1 if bad else 0


# -- parser ------------------------------------------------------------------------------
def _add_family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--m", type=int, default=1, help="photons per boosted fusion side")
    p.add_argument("--k", type=int, default=3, help="ring length")
    p.add_argument("--n1", type=int, default=2)
    p.add_argument("--n2", type=int, default=1)
    p.add_argument("--n", type=int, default=3, help="GHZ size")
    p.add_argument("--sizes", type=_int_list, help="linear vertex sizes, e.g. 2,1,3")
    p.add_argument("--dims", type=_int_list, help="cluster dimensions, e.g. 3,3,2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridgraph", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="figure data tables")
    p.add_argument("--figure", choices=("5", "6", "9"), required=True)
    p.add_argument("--eta-min", type=_eta, default=0.5)
    p.add_argument("--eta-max", type=_eta, default=1.0)
    p.add_argument("--steps", type=_count, default=101)
    p.add_argument("--m-values", type=_int_list, help="fixed-m columns for figure 5")
    p.add_argument("--sizes", type=_int_list, default=list(range(3, 9)))
    p.add_argument("--etas", type=_float_list, default=[0.90, 0.95, 0.99])
    p.add_argument("--t-emit", type=float, default=1.0)
    p.add_argument("--t-h", type=float, default=0.0)
    p.add_argument("--m-cap", type=int, default=an.M_CAP)
    p.add_argument("--max-ancillas", type=int, default=4096)
    _add_output(p)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("plan", help="compile a generation plan")
    _add_family_args(p)
    _add_output(p, tables=False)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="Monte Carlo estimate for a plan file")
    p.add_argument("plan")
    p.add_argument("--eta", type=_eta, required=True)
    p.add_argument("--trials", type=_count, default=100_000)
    p.add_argument("--seed", type=int, help=f"(env {ENV_SEED})")
    p.add_argument("--substream", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_output(p, tables=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="Monte Carlo against the closed form")
    _add_family_args(p)
    p.add_argument("--etas", type=_float_list, default=[0.9, 0.95, 1.0])
    p.add_argument("--trials", type=_count, default=100_000)
    p.add_argument("--seed", type=int, help=f"(env {ENV_SEED})")
    p.add_argument("--substream", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--z", type=float, default=3.0, help="interval width in standard deviations")
    _add_output(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("factory", help="three-factory sizing")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--n1", type=int, default=4)
    p.add_argument("--n2", type=int, default=1)
    p.add_argument("--eta", type=_eta, default=0.95)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--m", type=int, help="boosting photons (default: optimal for eta)")
    p.add_argument("--na", type=int, help="fixed N_A during an NB sweep")
    p.add_argument("--nb", type=int, help="fixed N_B during an NA sweep")
    p.add_argument("--sweep", action="append", help="NA=a..b or NB=a..b (repeatable)")
    p.add_argument("--strict", action="store_true", help="also charge unfused ring photons in factory A")
    _add_output(p)
    p.set_defaults(func=cmd_factory)

    p = sub.add_parser("verify", help="oracle verification suite")
    p.add_argument("--cases", type=_count, default=500)
    p.add_argument("--max-qubits", type=int, default=8)
    p.add_argument("--max-photons", type=int, default=7)
    p.add_argument("--seed", type=int, help=f"(env {ENV_SEED})")
    _add_output(p, tables=False)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, PlanError, GraphError, ValueError, OSError) as e:
        print(f"hybridgraph {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
