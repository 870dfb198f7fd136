"""Readers for LCM run directories, ``scores.csv`` files and claim corpora."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .errors import ClaimsFormatError, LcmFormatError

logger = logging.getLogger(__name__)

SCORES_FILENAME = "scores.csv"

# accepted spellings for LCM JSON keys; first entry is the canonical one
_EDGE_ALIASES = {
    "src": ("src", "source", "cause", "from", "u"),
    "rel": ("rel", "relation", "label", "type", "r"),
    "dst": ("dst", "target", "effect", "to", "v"),
}
_LCM_ALIASES = {
    "edges": ("edges", "links", "triples"),
    "lcm_instance_id": ("lcm_instance_id", "instance_id", "lcm_id", "id"),
    "nodes": ("nodes", "variables", "vertices"),
}


@dataclass(frozen=True, slots=True)
class RawEdge:
    src: str
    rel: str
    dst: str


@dataclass(frozen=True)
class Lcm:
    """One local causal model as read from disk.

    ``nodes`` holds variables listed by the model beyond its edge endpoints
    (the vertex set of the model graph); it may be empty.
    """

    doc_id: str
    lcm_instance_id: str
    focus: str = ""
    edges: tuple[RawEdge, ...] = ()
    score: float | None = None
    score_raw: float | None = None
    coupling: float | None = None
    radius: int | None = None
    model_size: int | None = None
    nodes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScoreRow:
    lcm_instance_id: str
    score: float | None = None
    score_raw: float | None = None
    coupling: float | None = None


@dataclass(frozen=True)
class ClaimRow:
    cause: str
    effect: str
    doc_id: str
    sign: str | None = None
    method: str | None = None
    year: int | None = None


@dataclass(frozen=True)
class DocumentRun:
    doc_id: str
    lcm_paths: tuple[Path, ...]
    scores_path: Path | None = None


@dataclass
class LoadReport:
    files_read: int = 0
    files_failed: int = 0
    edges_dropped: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, msg: str) -> None:
        logger.warning(msg)
        self.warnings.append(msg)


def is_lcm_filename(name: str) -> bool:
    return name.endswith(".lcm.json") or (name.startswith("lcm_") and name.endswith(".json"))


def lcm_stem(name: str) -> str:
    if name.endswith(".lcm.json"):
        return name[: -len(".lcm.json")]
    return name[: -len(".json")] if name.endswith(".json") else name


def scan_runs_root(root: str | Path) -> list[DocumentRun]:
    """One :class:`DocumentRun` per subdirectory holding at least one LCM file."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"runs root {root} is not a readable directory")
    runs = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        lcm_paths = tuple(sorted(p for p in sub.iterdir() if p.is_file() and is_lcm_filename(p.name)))
        if not lcm_paths:
            logger.warning("skipping %s: no LCM files", sub)
            continue
        scores = sub / SCORES_FILENAME
        runs.append(DocumentRun(sub.name, lcm_paths, scores if scores.is_file() else None))
    runs.sort(key=lambda r: r.doc_id)
    return runs


def _pick(obj: dict, aliases: tuple[str, ...]):
    for key in aliases:
        if key in obj:
            return obj[key]
    return None


def _opt_float(value) -> float | None:
    if value is None or value == "":
        return None
    out = float(value)
    if math.isnan(out):
        return None
    return out


def _opt_int(value) -> int | None:
    if value is None or value == "":
        return None
    return int(value)


def parse_lcm(data: bytes, doc_id: str, default_id: str = "") -> Lcm:
    """Parse one LCM JSON document.

    ``doc_id`` (the run folder name) overrides any ``doc_id`` in the file.
    Edge records lacking a source or target are dropped with a warning;
    duplicate edges are kept.
    """
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LcmFormatError(f"invalid LCM JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise LcmFormatError("LCM JSON must be an object")

    lcm_id = _pick(obj, _LCM_ALIASES["lcm_instance_id"])
    lcm_id = str(lcm_id) if lcm_id not in (None, "") else default_id
    if not lcm_id:
        raise LcmFormatError("LCM has no lcm_instance_id and no fallback id")

    edges = []
    for i, rec in enumerate(_pick(obj, _LCM_ALIASES["edges"]) or []):
        if isinstance(rec, (list, tuple)) and len(rec) == 3:
            src, rel, dst = rec
        elif isinstance(rec, dict):
            src, rel, dst = (_pick(rec, _EDGE_ALIASES[k]) for k in ("src", "rel", "dst"))
        else:
            src = rel = dst = None
        if not isinstance(src, str) or not isinstance(dst, str) or not src or not dst:
            logger.warning("%s/%s: dropping edge #%d without src/dst", doc_id, lcm_id, i)
            continue
        edges.append(RawEdge(src, rel if isinstance(rel, str) else "", dst))

    nodes = tuple(n for n in (_pick(obj, _LCM_ALIASES["nodes"]) or []) if isinstance(n, str) and n)
    try:
        return Lcm(
            doc_id=doc_id,
            lcm_instance_id=lcm_id,
            focus=str(obj.get("focus") or ""),
            edges=tuple(edges),
            score=_opt_float(obj.get("score")),
            score_raw=_opt_float(obj.get("score_raw")),
            coupling=_opt_float(obj.get("coupling")),
            radius=_opt_int(obj.get("radius")),
            model_size=_opt_int(obj.get("model_size")),
            nodes=nodes,
        )
    except (TypeError, ValueError) as exc:
        raise LcmFormatError(f"bad metadata field: {exc}") from exc


def parse_scores_csv(data: bytes) -> list[ScoreRow]:
    reader = csv.DictReader(io.StringIO(data.decode("utf-8-sig")))
    if reader.fieldnames is None or "lcm_instance_id" not in reader.fieldnames:
        raise LcmFormatError("scores.csv needs an lcm_instance_id column")
    return [
        ScoreRow(
            lcm_instance_id=row["lcm_instance_id"],
            score=_opt_float(row.get("score")),
            score_raw=_opt_float(row.get("score_raw")),
            coupling=_opt_float(row.get("coupling")),
        )
        for row in reader
        if row.get("lcm_instance_id")
    ]


def attach_scores(lcms: list[Lcm], scores: Iterable[ScoreRow]) -> list[Lcm]:
    """Fill score fields from a scores table. Missing cells leave the LCM's own value."""
    by_id: dict[str, ScoreRow] = {}
    for row in scores:
        if row.lcm_instance_id in by_id:
            logger.warning("duplicate scores row for %s; last row wins", row.lcm_instance_id)
        by_id[row.lcm_instance_id] = row
    known = {m.lcm_instance_id for m in lcms}
    for lcm_id in by_id:
        if lcm_id not in known:
            logger.warning("scores row references unknown LCM %s", lcm_id)
    out = []
    for m in lcms:
        row = by_id.get(m.lcm_instance_id)
        if row is None:
            out.append(m)
            continue
        out.append(
            replace(
                m,
                score=row.score if row.score is not None else m.score,
                score_raw=row.score_raw if row.score_raw is not None else m.score_raw,
                coupling=row.coupling if row.coupling is not None else m.coupling,
            )
        )
    return out


def load_run(run: DocumentRun, report: LoadReport | None = None) -> list[Lcm]:
    """Parse every LCM of a run, attach its scores, sort by instance id."""
    report = report if report is not None else LoadReport()
    lcms = []
    for path in run.lcm_paths:
        try:
            lcms.append(parse_lcm(path.read_bytes(), run.doc_id, default_id=lcm_stem(path.name)))
            report.files_read += 1
        except LcmFormatError as exc:
            report.files_failed += 1
            report.warn(f"{path}: {exc}; file skipped")
    seen: set[str] = set()
    for m in lcms:
        if m.lcm_instance_id in seen:
            report.warn(f"{run.doc_id}: duplicate lcm_instance_id {m.lcm_instance_id}")
        seen.add(m.lcm_instance_id)
    if run.scores_path is not None:
        lcms = attach_scores(lcms, parse_scores_csv(run.scores_path.read_bytes()))
    lcms.sort(key=lambda m: m.lcm_instance_id)
    return lcms


def load_runs(runs: Iterable[DocumentRun], report: LoadReport | None = None) -> list[Lcm]:
    report = report if report is not None else LoadReport()
    out: list[Lcm] = []
    for run in sorted(runs, key=lambda r: r.doc_id):
        out.extend(load_run(run, report))
    return out


CLAIM_REQUIRED = ("cause", "effect", "doc_id")


def parse_claims_csv(data: bytes) -> list[ClaimRow]:
    """Read a claims table with header ``cause,effect,doc_id[,sign,method,year]``.

    Rows with an empty cause or effect are dropped with a warning. Sign and
    method strings are kept verbatim.
    """
    reader = csv.DictReader(io.StringIO(data.decode("utf-8-sig"), newline=""))
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in CLAIM_REQUIRED if c not in header]
    if missing:
        raise ClaimsFormatError(f"claims CSV missing column(s): {', '.join(missing)}")
    reader.fieldnames = header

    rows = []
    for lineno, rec in enumerate(reader, 2):
        cause, effect = (rec.get("cause") or "").strip(), (rec.get("effect") or "").strip()
        if not cause or not effect:
            logger.warning("claims line %d: empty cause or effect; row dropped", lineno)
            continue
        year = (rec.get("year") or "").strip()
        try:
            year_val = int(float(year)) if year else None
        except ValueError:
            logger.warning("claims line %d: unparseable year %r", lineno, year)
            year_val = None
        rows.append(
            ClaimRow(
                cause=cause,
                effect=effect,
                doc_id=(rec.get("doc_id") or "").strip(),
                sign=rec.get("sign") or None,
                method=rec.get("method") or None,
                year=year_val,
            )
        )
    return rows
