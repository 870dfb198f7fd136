"""Atlas persistence (Parquet or CSV plus ``manifest.json``) and JSON stats reports."""

from __future__ import annotations

import contextlib
import csv
import hashlib
import io
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterator

import pyarrow as pa
import pyarrow.parquet as pq

from .analytics import AtlasSummary, RelMassRow, atlas_summary
from .canon import Polarity, RelType
from .errors import AtlasError, CorruptAtlas, VersionError
from .tables import Atlas, EdgeRow, NodeRow, SccRow, SupportRow

SCHEMA_VERSION = 1
MANIFEST = "manifest.json"
LOCK = ".write.lock"
FORMATS = ("parquet", "csv")

NODES_SCHEMA = pa.schema([
    ("node_id", pa.uint64()),
    ("label_canon", pa.string()),
    ("label_examples", pa.string()),
    ("deg_in", pa.int64()),
    ("deg_out", pa.int64()),
])
EDGES_SCHEMA = pa.schema([
    ("edge_id", pa.uint64()),
    ("src_id", pa.uint64()),
    ("dst_id", pa.uint64()),
    ("rel_type", pa.string()),
    ("polarity", pa.string()),
    ("support_lcms", pa.int64()),
    ("support_docs", pa.int64()),
    ("score_sum", pa.float64()),
    ("score_mean", pa.float64()),
    ("score_max", pa.float64()),
    ("pol_mass_inc", pa.float64()),
    ("pol_mass_dec", pa.float64()),
    ("pol_mass_unk", pa.float64()),
    ("controversy", pa.float64()),
])
SUPPORT_SCHEMA = pa.schema([
    ("edge_id", pa.uint64()),
    ("doc_id", pa.string()),
    ("atlas_id", pa.string()),
    ("lcm_instance_id", pa.string()),
    ("score", pa.float64()),
    ("score_raw", pa.float64()),
    ("coupling", pa.float64()),
    ("weight", pa.float64()),
    ("polarity", pa.string()),
    ("year", pa.int64()),
    ("method", pa.string()),
    ("sign", pa.string()),
])
SCC_SCHEMA = pa.schema([
    ("scc_id", pa.int64()),
    ("n_nodes", pa.int64()),
    ("n_edges", pa.int64()),
    ("support_docs", pa.int64()),
    ("top_nodes", pa.string()),
])
SCHEMAS = {
    "atlas_nodes": NODES_SCHEMA,
    "atlas_edges": EDGES_SCHEMA,
    "atlas_edge_support": SUPPORT_SCHEMA,
    "atlas_scc": SCC_SCHEMA,
}


# -- list-in-a-cell encoding ------------------------------------------------------

def join_list(items) -> str:
    """``"; "``-join with ``\\`` escaping ``;`` and itself."""
    return "; ".join(s.replace("\\", "\\\\").replace(";", "\\;") for s in items)


def split_list(text: str | None) -> tuple[str, ...]:
    if not text:
        return ()
    out, cur, i = [], [], 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            cur.append(text[i + 1])
            i += 2
            continue
        if c == ";":
            out.append("".join(cur))
            cur = []
            i += 2 if text[i + 1: i + 2] == " " else 1
            continue
        cur.append(c)
        i += 1
    out.append("".join(cur))
    return tuple(out)


# -- row <-> record ---------------------------------------------------------------

def _records(name: str, atlas: Atlas) -> list[dict[str, Any]]:
    if name == "atlas_nodes":
        return [{**asdict(n), "label_examples": join_list(n.label_examples)} for n in atlas.nodes]
    if name == "atlas_edges":
        return [{**asdict(e), "rel_type": e.rel_type.value, "polarity": e.polarity.value} for e in atlas.edges]
    if name == "atlas_edge_support":
        return [{**asdict(s), "polarity": s.polarity.value} for s in atlas.support]
    return [{**asdict(r), "top_nodes": join_list(r.top_nodes)} for r in atlas.scc or ()]


def _node(r: dict) -> NodeRow:
    return NodeRow(r["node_id"], r["label_canon"], split_list(r["label_examples"]), r["deg_in"], r["deg_out"])


def _edge(r: dict) -> EdgeRow:
    return EdgeRow(**{**r, "rel_type": RelType(r["rel_type"]), "polarity": Polarity(r["polarity"])})


def _support(r: dict) -> SupportRow:
    return SupportRow(**{**r, "polarity": Polarity(r["polarity"])})


def _scc(r: dict) -> SccRow:
    return SccRow(**{**r, "top_nodes": split_list(r["top_nodes"])})


_DECODE = {"atlas_nodes": _node, "atlas_edges": _edge, "atlas_edge_support": _support, "atlas_scc": _scc}
_NULLABLE_STR = {"method", "sign"}


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_bytes(records: list[dict], schema: pa.Schema) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(schema.names)
    for rec in records:
        w.writerow([_csv_cell(rec[c]) for c in schema.names])
    return buf.getvalue().encode("utf-8")


def _parse_cell(text: str, typ: pa.DataType, column: str):
    if pa.types.is_string(typ):
        return None if text == "" and column in _NULLABLE_STR else text
    if text == "":
        return None
    if pa.types.is_floating(typ):
        return float(text)
    return int(text)


def _read_csv(data: bytes, schema: pa.Schema) -> list[dict]:
    reader = csv.reader(io.StringIO(data.decode("utf-8"), newline=""))
    header = next(reader)
    if header != schema.names:
        raise CorruptAtlas(f"unexpected CSV header {header}")
    types = [schema.field(c).type for c in header]
    return [{c: _parse_cell(v, t, c) for c, v, t in zip(header, row, types)} for row in reader]


def _parquet_bytes(records: list[dict], schema: pa.Schema) -> bytes:
    table = pa.Table.from_pylist(records, schema=schema)
    sink = pa.BufferOutputStream()
    pq.write_table(table, sink, compression="zstd")
    return sink.getvalue().to_pybytes()


# -- manifest ---------------------------------------------------------------------

@dataclass
class TableEntry:
    file: str
    rows: int
    sha256: str


@dataclass
class AtlasManifest:
    atlas_id: str
    schema_version: int
    format: str
    tables: dict[str, TableEntry]
    config: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> AtlasManifest:
        raw = json.loads(text)
        return cls(
            atlas_id=raw["atlas_id"],
            schema_version=raw["schema_version"],
            format=raw["format"],
            tables={k: TableEntry(**v) for k, v in raw["tables"].items()},
            config=raw.get("config", {}),
        )


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


@contextlib.contextmanager
def _writer_lock(directory: Path) -> Iterator[None]:
    lock = directory / LOCK
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise AtlasError(f"{directory} is locked by another writer ({lock})") from None
    try:
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def write_tables(atlas: Atlas, directory: str | Path, fmt: str = "parquet") -> AtlasManifest:
    """Write the atlas tables and ``manifest.json`` into ``directory``.

    Each file is written to a temporary name and renamed into place. The SCC
    table is written only when ``atlas.scc`` is set.
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    encode = _parquet_bytes if fmt == "parquet" else _csv_bytes

    with _writer_lock(directory):
        entries: dict[str, TableEntry] = {}
        for name, schema in SCHEMAS.items():
            path = directory / f"{name}.{fmt}"
            if name == "atlas_scc" and atlas.scc is None:
                path.unlink(missing_ok=True)
                continue
            records = _records(name, atlas)
            data = encode(records, schema)
            _atomic_write(path, data)
            entries[name] = TableEntry(path.name, len(records), hashlib.sha256(data).hexdigest())
        manifest = AtlasManifest(atlas.atlas_id, SCHEMA_VERSION, fmt, entries, dict(atlas.config))
        _atomic_write(directory / MANIFEST, manifest.to_json().encode("utf-8"))
    return manifest


def read_manifest(directory: str | Path) -> AtlasManifest:
    path = Path(directory) / MANIFEST
    try:
        manifest = AtlasManifest.from_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptAtlas(f"{path}: unreadable manifest ({exc})") from exc
    if manifest.schema_version != SCHEMA_VERSION:
        raise VersionError(f"{path}: schema_version {manifest.schema_version}, expected {SCHEMA_VERSION}")
    return manifest


def read_tables(directory: str | Path) -> Atlas:
    """Load an atlas written by :func:`write_tables`, verifying digests and integrity."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    loaded: dict[str, list] = {}
    for name, schema in SCHEMAS.items():
        entry = manifest.tables.get(name)
        if entry is None:
            if name != "atlas_scc":
                raise CorruptAtlas(f"{directory}: manifest lists no {name} table")
            continue
        data = (directory / entry.file).read_bytes()
        if hashlib.sha256(data).hexdigest() != entry.sha256:
            raise CorruptAtlas(f"{directory / entry.file}: digest mismatch")
        try:
            if manifest.format == "parquet":
                # the dataset reader behind pq.read_table can abort at interpreter exit on in-memory buffers
                table = pq.ParquetFile(pa.BufferReader(data)).read(use_threads=False)
                if table.schema.names != schema.names:
                    raise CorruptAtlas(f"{entry.file}: unexpected columns {table.schema.names}")
                records = table.to_pylist()
            else:
                records = _read_csv(data, schema)
            rows = [_DECODE[name](r) for r in records]
        except CorruptAtlas:
            raise
        except Exception as exc:
            raise CorruptAtlas(f"{directory / entry.file}: {exc}") from exc
        if len(rows) != entry.rows:
            raise CorruptAtlas(f"{entry.file}: {len(rows)} rows, manifest says {entry.rows}")
        loaded[name] = rows
    return Atlas.from_tables(
        loaded["atlas_nodes"],
        loaded["atlas_edges"],
        loaded["atlas_edge_support"],
        loaded.get("atlas_scc"),
        atlas_id=manifest.atlas_id,
        config=manifest.config,
    )


# -- stats report -----------------------------------------------------------------

def stats_report(atlas: Atlas) -> dict[str, Any]:
    """Atlas summary as a JSON-ready dict with a fixed key order.

    Full-precision numbers sit at the top level; ``display`` repeats them
    rounded the way summary tables print them.
    """
    s = atlas_summary(atlas)
    doc: dict[str, Any] = {"atlas_id": atlas.atlas_id}
    for key, value in asdict(s).items():
        if key != "rel_mass":
            doc[key] = value
    doc["rel_mass"] = [
        {"rel_type": r.rel_type.value, "polarity": r.polarity.value, "n_edges": r.n_edges, "mass": r.mass}
        for r in s.rel_mass
    ]
    doc["display"] = {
        "top1_share": round(s.top1_share, 3),
        "top5_share": round(s.top5_share, 3),
        "p50": round(s.p50, 4),
        "p90": round(s.p90, 3),
        "p99": round(s.p99, 3),
        "tail_ratio": None if s.tail_ratio is None else round(s.tail_ratio, 1),
        "rel_mass": [[r.rel_type.value, r.polarity.value, r.n_edges, round(r.mass, 2)] for r in s.rel_mass],
    }
    return doc


def summary_from_report(doc: dict[str, Any]) -> AtlasSummary:
    fields_ = {k: v for k, v in doc.items() if k not in ("atlas_id", "display", "rel_mass")}
    rel = tuple(
        RelMassRow(RelType(r["rel_type"]), Polarity(r["polarity"]), r["n_edges"], r["mass"])
        for r in doc["rel_mass"]
    )
    return AtlasSummary(**fields_, rel_mass=rel)


def dumps_report(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
