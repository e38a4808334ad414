"""Command-line front end: ``ingest``, ``stats``, ``rank``, ``eval``.

Each file-producing command writes a run manifest (``<command>.manifest.json``)
recording input digests, parameters and every output file; the manifest is
emitted even when the run fails, with an error summary.  Exit codes: 0
success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .corpus import (
    CleanCorpus,
    TimeWindow,
    apply_filters,
    corpus_stats,
    load_clean_corpus,
    save_clean_corpus,
    slice_window,
)
from .metrics import compare_report, load_truth, write_curves_csv, write_report_json, write_report_tsv
from .network import build_citation_graph, build_hetero_graph, project_institution_graph, transition_operator
from .normalize import AliasTable
from .records import read_records
from .solver import (
    METHOD_IPRANK,
    METHOD_IRANK,
    METHOD_PAGERANK,
    ConvergenceError,
    SolverConfig,
    merge_institution_scores,
    pagerank,
    rank,
    read_table_json,
    split_scores,
    write_table_json,
    write_table_tsv,
)

logger = logging.getLogger("iprank")

DEFAULT_N = tuple(range(10, 101, 10))


class UsageError(Exception):
    """Bad flag combinations detected after argparse."""


def _window_arg(text: str) -> TimeWindow:
    try:
        return TimeWindow.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _n_list_arg(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("N values must be positive integers")
    if values != sorted(set(values)):
        raise argparse.ArgumentTypeError("N values must be strictly increasing")
    return values


def _sha256(path: Path) -> str | None:
    try:
        digest = hashlib.sha256()
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
        return digest.hexdigest()
    except OSError:
        return None


def _write_manifest(
    out_dir: Path,
    command: str,
    inputs: list[tuple[Path, str | None]],
    outputs: list[str],
    params: dict,
    error: str | None = None,
) -> Path:
    manifest = {
        "tool": "iprank",
        "version": __version__,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "inputs": [{"path": str(p), "sha256": d} for p, d in inputs],
        "outputs": outputs,
        "params": params,
        "status": "error" if error else "ok",
        "error": error,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{command}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(alpha=args.alpha, tol=args.tol, max_iters=args.max_iters)


def _resolve_window(corpus: CleanCorpus, window: TimeWindow | None) -> TimeWindow:
    if window is not None:
        return window
    span = corpus.year_span()
    if span is None:
        return TimeWindow(0, 0)
    return TimeWindow(*span)


def cmd_ingest(args: argparse.Namespace) -> None:
    out = Path(args.out)
    out_dir = Path(args.out_dir) if args.out_dir else out.parent
    inputs = [(Path(args.records), _sha256(Path(args.records)))]

    aliases = None
    if args.alias:
        alias_path = Path(args.alias)
        if alias_path.exists():
            inputs.append((alias_path, _sha256(alias_path)))
            aliases = AliasTable.from_path(alias_path)
        else:
            logger.warning("alias file %s not found; heuristic-only normalization", alias_path)

    params = {"alias": args.alias, "out": str(out)}
    try:
        records, parse_errors = read_records(args.records)
        corpus, report = apply_filters(records, aliases)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_clean_corpus(corpus, out)
    except Exception as exc:
        _write_manifest(out_dir, "ingest", inputs, [], params, error=str(exc))
        raise

    _write_manifest(out_dir, "ingest", inputs, [out.name], params)
    print(json.dumps({"parse_errors": len(parse_errors), **report.as_dict()}, indent=2))


def cmd_stats(args: argparse.Namespace) -> None:
    corpus = load_clean_corpus(args.corpus)
    window = _resolve_window(corpus, args.window)
    stats = corpus_stats(slice_window(corpus, window))
    if args.json:
        print(json.dumps({"window": str(window), **stats.as_dict()}, indent=2))
        return
    print(f"window                   {window}")
    print(f"papers                   {stats.n_papers}")
    print(f"papers with references   {stats.n_papers_with_references}")
    print(f"institutions             {stats.n_institutions}")
    print(f"citation links           {stats.n_citation_links}")
    print(f"affiliation links        {stats.n_affiliation_links}")


def _rank_outputs(
    args: argparse.Namespace, corpus: CleanCorpus, out_dir: Path
) -> tuple[list[str], dict]:
    cfg = _solver_config(args)
    window = _resolve_window(corpus, args.window)
    slice_ = slice_window(corpus, window)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []

    def emit(table, stem: str) -> None:
        write_table_tsv(table, out_dir / f"{stem}.tsv")
        write_table_json(table, out_dir / f"{stem}.json", cfg)
        outputs.extend((f"{stem}.tsv", f"{stem}.json"))

    if args.method == "iprank":
        graph = build_hetero_graph(slice_)
        op = transition_operator(graph, citation_share=args.citation_share)
        pr = pagerank(op, cfg)
        paper_scores, inst_scores = split_scores(pr, graph)
        emit(rank(paper_scores, graph.paper_ids, entity_class="paper", method=METHOD_IPRANK),
             "iprank_papers")
        merge_map = {}
        if args.merge:
            table = AliasTable.from_path(args.merge)
            merge_map = {name: table.lookup(name) or name for name in graph.institution_names}
        merged, merged_names = merge_institution_scores(inst_scores, graph.institution_names, merge_map)
        emit(rank(merged, merged_names, entity_class="institution", method=METHOD_IPRANK),
             "iprank_institutions")
    elif args.method == "pagerank":
        graph = build_citation_graph(slice_)
        pr = pagerank(transition_operator(graph), cfg)
        emit(rank(pr, graph.paper_ids, entity_class="paper", method=METHOD_PAGERANK),
             "pagerank_papers")
    else:  # irank
        graph = project_institution_graph(slice_)
        pr = pagerank(transition_operator(graph), cfg)
        emit(rank(pr, graph.institution_names, entity_class="institution", method=METHOD_IRANK),
             "irank_institutions")
    return outputs, {"iterations": pr.iterations_used, "final_residual": pr.final_residual}


def cmd_rank(args: argparse.Namespace) -> None:
    out_dir = Path(args.out_dir) if args.out_dir else Path(".")
    corpus_path = Path(args.corpus)
    inputs = [(corpus_path, _sha256(corpus_path))]
    if args.merge:
        inputs.append((Path(args.merge), _sha256(Path(args.merge))))
    params = {
        "window": str(args.window) if args.window else None,
        "method": args.method,
        "solver": _solver_config(args).as_dict(),
        "citation_share": args.citation_share,
        "merge": args.merge,
    }

    try:
        corpus = load_clean_corpus(corpus_path)
        params["window"] = str(_resolve_window(corpus, args.window))
        outputs, run_info = _rank_outputs(args, corpus, out_dir)
        params.update(run_info)
    except ConvergenceError as exc:
        params["final_residual"] = exc.final_residual
        _write_manifest(out_dir, "rank", inputs, [], params, error=str(exc))
        raise
    except Exception as exc:
        _write_manifest(out_dir, "rank", inputs, [], params, error=str(exc))
        raise

    _write_manifest(out_dir, "rank", inputs, outputs, params)
    logger.info("wrote %d table files to %s", len(outputs), out_dir)


def cmd_eval(args: argparse.Namespace) -> None:
    out_dir = Path(args.out_dir) if args.out_dir else Path(".")
    inputs = [(Path(t), _sha256(Path(t))) for t in args.tables]
    if args.truth:
        inputs.append((Path(args.truth), _sha256(Path(args.truth))))

    metrics = args.metrics.split(",") if args.metrics else None
    params = {
        "tables": list(args.tables),
        "truth": args.truth,
        "metrics": metrics,
        "n": list(args.n),
    }

    try:
        rankings = [read_table_json(t) for t in args.tables]
        truths = []
        if args.truth:
            truth_class = args.truth_class or rankings[0].entity_class
            truths.append(load_truth(args.truth, truth_class))

        if metrics is None:
            metrics = []
            if len(rankings) >= 2:
                metrics.append("spearman")
            if truths:
                metrics.extend(("recall", "precision"))
            params["metrics"] = metrics
        if "spearman" in metrics and len(rankings) < 2:
            raise UsageError("spearman needs two ranking tables")
        if ("recall" in metrics or "precision" in metrics) and not truths:
            raise UsageError("recall/precision need --truth")
        if not metrics:
            raise UsageError("nothing to evaluate: give two tables or a truth file")

        report = compare_report(rankings, truths, args.n, metrics, config=params)
        if not report.cells:
            raise RuntimeError("no valid cells: " + "; ".join(report.errors))
        out_dir.mkdir(parents=True, exist_ok=True)
        write_report_tsv(report, out_dir / "eval_report.tsv")
        write_report_json(report, out_dir / "eval_report.json")
        write_curves_csv(report, out_dir / "eval_curves.csv")
    except UsageError:
        raise
    except Exception as exc:
        _write_manifest(out_dir, "eval", inputs, [], params, error=str(exc))
        raise

    outputs = ["eval_report.tsv", "eval_report.json", "eval_curves.csv"]
    _write_manifest(out_dir, "eval", inputs, outputs, params)
    for line in report.errors:
        logger.warning("skipped cell: %s", line)
    for entry in report.coverage:
        if entry["missing"]:
            logger.warning(
                "%d member(s) of %r are missing from the %s ranking",
                len(entry["missing"]), entry["truth"], entry["method"],
            )
    logger.info("wrote evaluation report to %s", out_dir)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=0.85, help="teleport probability (default 0.85)")
    common.add_argument("--tol", type=float, default=1e-10, help="L1 convergence threshold (default 1e-10)")
    common.add_argument("--max-iters", type=int, default=200, help="iteration cap (default 200)")
    common.add_argument("--seed", type=int, default=None,
                        help="reserved; the default pipeline is deterministic and ignores it")
    common.add_argument("--out-dir", default=None, help="directory for output files and the manifest")

    parser = argparse.ArgumentParser(
        prog="iprank",
        description="Rank papers and institutions over heterogeneous institution-citation networks.",
    )
    parser.add_argument("--version", action="version", version=f"iprank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="clean a raw record file into a corpus store")
    p.add_argument("records", help="line-delimited record file")
    p.add_argument("--alias", default=None, help="alias file (raw<TAB>canonical)")
    p.add_argument("--out", required=True, help="path for the cleaned corpus store")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", parents=[common], help="summary counts for a corpus window")
    p.add_argument("corpus", help="cleaned corpus store")
    p.add_argument("--window", type=_window_arg, default=None, help="inclusive years, start:end")
    p.add_argument("--json", action="store_true", help="print counts as JSON")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("rank", parents=[common], help="compute ranking tables for one method")
    p.add_argument("corpus", help="cleaned corpus store")
    p.add_argument("--window", type=_window_arg, default=None, help="inclusive years, start:end")
    p.add_argument("--method", required=True, choices=("iprank", "pagerank", "irank"))
    p.add_argument("--merge", default=None,
                   help="post-hoc merge file (canonical<TAB>canonical), applied to institution scores")
    p.add_argument("--citation-share", type=float, default=None,
                   help="probability share of a paper's citation edges (default: uniform over all out-edges)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", parents=[common], help="compare rankings and score against ground truth")
    p.add_argument("--tables", nargs="+", required=True, help="ranking table JSON files")
    p.add_argument("--truth", default=None, help="ground-truth file, one identifier per line")
    p.add_argument("--truth-class", default=None, choices=("paper", "institution"))
    p.add_argument("--metrics", default=None, help="comma list from spearman,recall,precision")
    p.add_argument("--n", type=_n_list_arg, default=list(DEFAULT_N),
                   help="comma list of strictly increasing N values (default 10,20,...,100)")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
