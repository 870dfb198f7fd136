"""Compile local causal models into a queryable causal database."""

from .analytics import (
    AtlasSummary,
    atlas_summary,
    compute_scc,
    concentration,
    hub_ranking,
    quantiles_of,
    relation_mass_breakdown,
    score_quantiles,
    strongly_connected_components,
)
from .builder import BuildConfig, build_atlas, build_from_claims
from .canon import Polarity, RelLexicon, RelType, canon_label, edge_key, hash64, node_id, rel_type
from .errors import AtlasError
from .ingest import load_runs, parse_claims_csv, parse_lcm, scan_runs_root
from .io import read_tables, stats_report, write_tables
from .merge import merge_atlases
from .query import (
    backbone,
    counterfactual_diff,
    do_cut,
    emit_sql,
    mechanisms,
    mutual_influence,
    provenance,
    run_query,
    soft_do,
    two_hop_paths,
)
from .tables import Atlas
from .views import EdgeView

__all__ = [
    "Atlas", "AtlasError", "AtlasSummary", "BuildConfig", "EdgeView", "Polarity", "RelLexicon", "RelType",
    "atlas_summary", "backbone", "build_atlas", "build_from_claims", "canon_label", "compute_scc",
    "concentration", "counterfactual_diff", "do_cut", "edge_key", "emit_sql", "hash64", "hub_ranking", "load_runs",
    "mechanisms", "merge_atlases", "mutual_influence", "node_id", "parse_claims_csv", "parse_lcm", "provenance", "quantiles_of",
    "read_tables", "rel_type", "relation_mass_breakdown", "run_query", "scan_runs_root", "score_quantiles",
    "soft_do", "stats_report", "strongly_connected_components", "two_hop_paths", "write_tables",
]
