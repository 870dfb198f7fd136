"""Command-line entry point: build, ingest-claims, merge, stats, query, intervene, emit-sql.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

from . import io as atlas_io
from .analytics import HubRow
from .builder import BuildConfig, build_atlas, build_from_claims
from .canon import RelLexicon, RelType
from .errors import AtlasError
from .ingest import LoadReport, load_runs, parse_claims_csv, scan_runs_root
from .merge import merge_atlases
from .query import QUERY_KINDS, SQL_KINDS, counterfactual_diff, emit_sql, run_query
from .tables import SccRow, SupportRow
from .views import EdgeView

logger = logging.getLogger("causal_atlas")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2), which we reserve for data errors
        raise UsageError(f"{self.prog}: {message}")


def _rel_set(values: list[str] | None) -> frozenset[RelType] | None:
    if not values:
        return None
    out = set()
    for chunk in values:
        for name in chunk.split(","):
            name = name.strip().upper()
            if not name:
                continue
            try:
                out.add(RelType[name])
            except KeyError:
                raise UsageError(f"unknown relation type {name!r}") from None
    return frozenset(out)


def _config(args, lexicon: RelLexicon | None = None) -> BuildConfig:
    kwargs = dict(
        tau=args.tau,
        rel_whitelist=_rel_set(args.rel_whitelist),
        rel_blacklist=_rel_set(args.rel_blacklist),
        atlas_id=args.atlas_id,
        default_weight=args.default_weight,
        with_scc=not args.no_scc,
    )
    if lexicon is not None:
        kwargs["lexicon"] = lexicon
    try:
        return BuildConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_build_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--out", required=True, type=Path, help="output atlas directory")
    p.add_argument("--tau", type=int, default=1, help="skip LCMs with fewer raw edges")
    p.add_argument("--rel-whitelist", action="append", metavar="TYPES", help="comma-separated RelTypes to keep")
    p.add_argument("--rel-blacklist", action="append", metavar="TYPES", help="comma-separated RelTypes to drop")
    p.add_argument("--atlas-id", default="atlas")
    p.add_argument("--default-weight", type=float, default=1.0)
    p.add_argument("--format", choices=atlas_io.FORMATS, default="parquet")
    p.add_argument("--no-scc", action="store_true", help="skip the SCC table")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    if isinstance(value, tuple):
        return "; ".join(value)
    return "" if value is None else str(value)


def _row_dict(row) -> dict:
    if isinstance(row, (SupportRow, SccRow)):
        d = asdict(row)
    else:
        d = row._asdict()
    return {k: (v.value if hasattr(v, "value") else list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


def _print_rows(rows: list, as_json: bool, out=None) -> None:
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps([_row_dict(r) for r in rows], ensure_ascii=False) + "\n")
        return
    for r in rows:
        d = _row_dict(r)
        if not isinstance(r, SupportRow):
            d.pop("edge_id", None)
        out.write(" | ".join(_fmt(tuple(v) if isinstance(v, list) else v) for v in d.values()) + "\n")


def cmd_build(args) -> int:
    lexicon = RelLexicon.from_file(args.rel_lexicon) if args.rel_lexicon else None
    cfg = _config(args, lexicon)
    report = LoadReport()
    lcms = load_runs(scan_runs_root(args.runs_root), report)
    atlas = build_atlas(lcms, cfg)
    manifest = atlas_io.write_tables(atlas, args.out, args.format)
    print(f"built {args.out}: {len(atlas.nodes)} nodes, {len(atlas.edges)} edges, "
          f"{len(atlas.support)} support rows from {report.files_read} LCM files "
          f"({report.files_failed} skipped); tables: {', '.join(manifest.tables)}")
    return EXIT_OK


def cmd_ingest_claims(args) -> int:
    cfg = _config(args)
    claims = parse_claims_csv(Path(args.csv).read_bytes())
    atlas = build_from_claims(claims, cfg)
    atlas_io.write_tables(atlas, args.out, args.format)
    print(f"ingested {len(claims)} claims into {args.out}: {len(atlas.nodes)} nodes, "
          f"{len(atlas.edges)} edges, {len(atlas.support)} support rows")
    return EXIT_OK


def cmd_merge(args) -> int:
    inputs = []
    for d in args.dirs:
        atlas = atlas_io.read_tables(d)
        aid = atlas.atlas_id or Path(d).name
        if any(aid == other for other, _ in inputs):
            aid = Path(d).name
        inputs.append((aid, atlas))
    try:
        merged = merge_atlases(inputs, prefix_doc_ids=not args.no_doc_prefix, atlas_id=args.atlas_id)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    atlas_io.write_tables(merged, args.out, args.format)
    print(f"merged {len(inputs)} atlases into {args.out}: {len(merged.nodes)} nodes, "
          f"{len(merged.edges)} edges, {len(merged.support)} support rows")
    return EXIT_OK


def cmd_stats(args) -> int:
    doc = atlas_io.stats_report(atlas_io.read_tables(args.dir))
    if args.json:
        sys.stdout.write(atlas_io.dumps_report(doc))
        return EXIT_OK
    disp = doc["display"]
    lines = [
        f"atlas            {doc['atlas_id']}",
        f"nodes            {doc['n_nodes']}",
        f"edges            {doc['n_edges']}",
        f"support rows     {doc['n_support']}",
        f"documents        {doc['n_docs']}",
        f"top hub          {doc['top_hub']}",
        f"top-1 share      {disp['top1_share']}",
        f"top-5 share      {disp['top5_share']}",
        f"p50 / p90 / p99  {disp['p50']} / {disp['p90']} / {disp['p99']}",
        f"tail ratio       {disp['tail_ratio']}",
        "relation mass:",
    ]
    lines += [f"  {r} {p:<3} {n:>6} {m:>10}" for r, p, n, m in disp["rel_mass"]]
    print("\n".join(lines))
    return EXIT_OK


def _edge_id(text: str | None) -> int | None:
    if text is None:
        return None
    try:
        return int(text, 0)
    except ValueError:
        raise UsageError(f"bad edge id {text!r}") from None


def cmd_query(args) -> int:
    if args.kind == "mechanisms" and args.src is None:
        raise UsageError("query mechanisms needs --src")
    if args.kind == "provenance" and args.edge_id is None:
        raise UsageError("query provenance needs --edge-id")
    atlas = atlas_io.read_tables(args.dir)
    rows = run_query(atlas, args.kind, src=args.src, limit=args.limit, edge_id=_edge_id(args.edge_id))
    _print_rows(rows, args.json)
    return EXIT_OK


def _parse_soft(spec: str) -> tuple[str, float]:
    label, sep, lam = spec.rpartition(":")
    if not sep or not label:
        raise UsageError(f"--soft expects LABEL:LAMBDA, got {spec!r}")
    try:
        return label, float(lam)
    except ValueError:
        raise UsageError(f"--soft multiplier {lam!r} is not a number") from None


def cmd_intervene(args) -> int:
    if not args.do_cut and not args.soft:
        raise UsageError("intervene needs --do-cut LABEL or --soft LABEL:LAMBDA")
    if args.then == "mechanisms" and args.src is None:
        raise UsageError("--then mechanisms needs --src")
    atlas = atlas_io.read_tables(args.dir)
    view = EdgeView(atlas)
    for label in args.do_cut or ():
        view = view.do_cut(label)
    for spec in args.soft or ():
        view = view.soft_do(*_parse_soft(spec))
    kwargs = dict(src=args.src, limit=args.limit)
    after = run_query(view, args.then, **kwargs)
    if not args.diff:
        _print_rows(after, args.json)
        return EXIT_OK
    before = run_query(atlas, args.then, **kwargs)
    diff = counterfactual_diff(before, after)
    if args.json:
        print(json.dumps({
            "vanished": [_row_dict(r) for r in diff.vanished],
            "rank_changes": [{"row": _row_dict(r), "old_rank": i, "new_rank": j} for r, i, j in diff.rank_changes],
        }, ensure_ascii=False))
        return EXIT_OK
    print(f"vanished ({len(diff.vanished)}):")
    _print_rows(diff.vanished, False)
    print(f"rank changes ({len(diff.rank_changes)}):")
    for row, i, j in diff.rank_changes:
        label = row.label if isinstance(row, HubRow) else " | ".join(_fmt(v) for v in list(_row_dict(row).values())[1:])
        print(f"  {i} -> {j}: {label}")
    return EXIT_OK


def cmd_emit_sql(args) -> int:
    sys.stdout.write(emit_sql(
        args.kind, limit=args.limit, src=args.src, edge_id=_edge_id(args.edge_id),
        label=args.label, lam=args.lam, parquet_dir=args.parquet_dir,
    ))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="causal-atlas", description="Compile causal models into a queryable causal database.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="compile a runs root of LCM folders")
    b.add_argument("runs_root", type=Path)
    b.add_argument("--rel-lexicon", type=Path, help="phrase,RELTYPE,polarity file replacing the built-in lexicon")
    _add_build_opts(b)
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("ingest-claims", help="compile a claims CSV (cause,effect,doc_id[,sign,method,year])")
    c.add_argument("csv", type=Path)
    _add_build_opts(c)
    c.set_defaults(func=cmd_ingest_claims)

    m = sub.add_parser("merge", help="merge atlas directories into one corpus atlas")
    m.add_argument("dirs", nargs="+", type=Path)
    m.add_argument("-o", "--out", required=True, type=Path)
    m.add_argument("--no-doc-prefix", action="store_true", help="keep doc ids as-is instead of atlas_id::doc_id")
    m.add_argument("--atlas-id", default="corpus")
    m.add_argument("--format", choices=atlas_io.FORMATS, default="parquet")
    m.set_defaults(func=cmd_merge)

    s = sub.add_parser("stats", help="atlas summary")
    s.add_argument("dir", type=Path)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)

    q = sub.add_parser("query", help="run a named query")
    q.add_argument("dir", type=Path)
    q.add_argument("kind", choices=QUERY_KINDS)
    q.add_argument("--src", help="canonical source label (mechanisms)")
    q.add_argument("--limit", type=int)
    q.add_argument("--edge-id", help="edge id (provenance)")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_query)

    i = sub.add_parser("intervene", help="run a query on an intervened view")
    i.add_argument("dir", type=Path)
    i.add_argument("--do-cut", action="append", metavar="LABEL")
    i.add_argument("--soft", action="append", metavar="LABEL:LAMBDA")
    i.add_argument("--then", required=True, choices=[k for k in QUERY_KINDS if k not in ("provenance", "scc")])
    i.add_argument("--src")
    i.add_argument("--limit", type=int, default=10)
    i.add_argument("--diff", action="store_true", help="report vanished rows and rank changes against the baseline")
    i.add_argument("--json", action="store_true")
    i.set_defaults(func=cmd_intervene)

    e = sub.add_parser("emit-sql", help="print the SQL for a query kind")
    e.add_argument("kind", choices=SQL_KINDS)
    e.add_argument("--limit", type=int)
    e.add_argument("--src")
    e.add_argument("--edge-id")
    e.add_argument("--label")
    e.add_argument("--lambda", dest="lam", type=float)
    e.add_argument("--parquet-dir", help="reference tables via read_parquet('<dir>/<table>.parquet')")
    e.set_defaults(func=cmd_emit_sql)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = make_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AtlasError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
