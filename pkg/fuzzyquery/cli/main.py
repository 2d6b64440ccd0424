import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from fuzzyquery.cli.error_handler import run_command
from fuzzyquery.config import settings
from fuzzyquery.core.datasets import load_csv
from fuzzyquery.core.denoise import DenoisedMembershipOracle
from fuzzyquery.core.evaluation import evaluate
from fuzzyquery.core.export_service import ExportService
from fuzzyquery.core.oracle import TargetOracle
from fuzzyquery.core.reduction import membership_oracle_from_similarity
from fuzzyquery.core.solvers import SOLVERS, solve
from fuzzyquery.core.sweep import aggregate, run_sweep
from fuzzyquery.core.synthetic import generate_synthetic
from fuzzyquery.core.targets import build_target, check_sequential_preconditions
from fuzzyquery.errors import ConfigError
from fuzzyquery.schemas.harness import SweepConfig, SyntheticSpec
from fuzzyquery.schemas.oracle import QueryBudget
from fuzzyquery.schemas.reduction import ReductionParams
from fuzzyquery.schemas.solver import SolverConfig
from fuzzyquery.utils.config_loader import config_loader

export_service = ExportService()


def _emit(payload: Dict[str, Any]):
    print(json.dumps(payload, indent=2, default=str))


def cmd_generate(args):
    data = config_loader.load(args.spec) if args.spec else {}
    if args.seed is not None:
        data["seed"] = args.seed
    spec = config_loader.validate(SyntheticSpec, data, source=args.spec or "defaults")
    dataset, labels = generate_synthetic(spec)
    export_service.write_dataset_csv(args.out, dataset, labels)
    _emit({"out": args.out, "n": dataset.n, "d": dataset.d, "k": spec.k})


def cmd_target(args):
    dataset, labels = load_csv(args.data, args.label_column, require_label=args.mode == "hard-labels")
    target = build_target(
        dataset.points,
        args.k,
        args.alpha,
        mode=args.mode,
        labels=labels,
        seed=args.seed,
        max_iter=args.max_iter,
    )
    export_service.write_clustering_json(args.out, target, kind="target", mode=args.mode, alpha=args.alpha)
    _emit({"out": args.out, "n": target.n, "k": target.k, "consistent": target.consistent})


def _solver_config(args) -> SolverConfig:
    data = config_loader.load(args.config) if args.config else {}
    overrides = {"seed": args.seed, "m": args.m, "r": args.r, "alpha": args.alpha, "eta": args.eta}
    data.update({key: value for key, value in overrides.items() if value is not None})
    return config_loader.validate(SolverConfig, data, source=args.config or "command line")


def cmd_solve(args):
    dataset, _ = load_csv(args.data, args.label_column, require_label=False)
    target = export_service.read_clustering_json(args.target)
    cfg = _solver_config(args)
    if args.similarity and args.kappa is not None:
        raise ConfigError("--kappa denoises membership answers and cannot be combined with --similarity")
    budget = QueryBudget(membership=args.max_membership, pair=args.max_pair, triplet=args.max_triplet)

    oracle = TargetOracle(
        target,
        noise_sigma=args.noise_sigma,
        seed=cfg.seed,
        budget=budget,
        record_log=args.query_log is not None,
        supports_repeated_triplets=args.triplets,
    )
    solver_oracle = oracle
    if args.similarity:
        solver_oracle = membership_oracle_from_similarity(oracle, target.k, ReductionParams(seed=cfg.seed))
    elif args.kappa is not None:
        solver_oracle = DenoisedMembershipOracle(oracle, args.kappa)

    if args.solver == "sequential":
        check_sequential_preconditions(target, cfg.eta1, cfg.eta2)
    result = solve(args.solver, dataset.points, solver_oracle, target.k, cfg)
    export_service.write_result_json(args.out, result)
    if args.query_log is not None:
        export_service.write_query_log(args.query_log, oracle.ledger)
    _emit({"out": args.out, "solver": args.solver, "queries": oracle.ledger.counts(), "per_stage": result.per_stage_counts})


def cmd_sweep(args):
    config = config_loader.load_model(args.config, SweepConfig)
    records = run_sweep(config, workers=args.workers)
    export_service.write_records_jsonl(args.out, records)
    failed = sum(1 for record in records if record.status == "failed")
    _emit({"out": args.out, "runs": len(records), "failed": failed})


def cmd_aggregate(args):
    records = export_service.read_records_jsonl(args.records)
    summary = aggregate(records)
    export_service.write_summary_csv(args.out, summary)
    _emit({"out": args.out, "rows": int(summary.shape[0])})


def cmd_evaluate(args):
    target = export_service.read_clustering_json(args.target)
    estimate = export_service.read_clustering_json(args.estimate)
    labels = None
    if args.data is not None:
        _, labels = load_csv(args.data, args.label_column)
    report = evaluate(target, estimate, labels)
    _emit(report.model_dump())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=settings.app_name, description="Query-based fuzzy k-means toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthetic Gaussian dataset to CSV")
    p.add_argument("--spec", help="YAML/JSON synthetic spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("target", help="build a target clustering from a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--mode", choices=["lloyd", "hard-labels"], default="lloyd")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_target)

    p = sub.add_parser("solve", help="run one solver against a target oracle")
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--label-column", default="label", help="dropped from the features when present")
    p.add_argument("--solver", choices=list(SOLVERS), default="two-phase")
    p.add_argument("--config", help="YAML/JSON solver config")
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--kappa", type=float, help="median-of-means denoising at this accuracy")
    p.add_argument("--similarity", action="store_true", help="answer memberships from similarity queries")
    p.add_argument("--triplets", action="store_true", help="oracle accepts repeated-index triplets")
    p.add_argument("--max-membership", type=int)
    p.add_argument("--max-pair", type=int)
    p.add_argument("--max-triplet", type=int)
    p.add_argument("--query-log", help="write every query as JSON lines")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a sweep config to JSONL records")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("aggregate", help="summarize sweep records to CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("evaluate", help="compare an estimate with a target")
    p.add_argument("--target", required=True)
    p.add_argument("--estimate", required=True)
    p.add_argument("--data")
    p.add_argument("--label-column", default="label")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run_command(args.func, args)


if __name__ == "__main__":
    sys.exit(main())
