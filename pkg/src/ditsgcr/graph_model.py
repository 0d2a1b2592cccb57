"""Directed temporal transaction graphs.

Edge lists arrive as CSV rows (source account, target account, integer
timestamp). Ingestion assigns dense integer ids in first-seen order and
builds one timeline per node: a list of (t, incoming neighbor ids,
outgoing neighbor ids) entries stored descending by timestamp. Only the
timestamp is kept per transaction; extra columns (amounts, gas, ...) are
ignored. Duplicate rows are kept, each counts as its own transaction.
"""

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

_EMPTY_IDS = np.empty(0, dtype=np.int64)

WEIGHT_MODES = ("count", "recency")


@dataclass(frozen=True)
class EdgeSchema:
    """Zero-based column positions of the edge fields in a CSV row."""

    source: int = 0
    target: int = 1
    timestamp: int = 2

    @property
    def min_columns(self) -> int:
        return max(self.source, self.target, self.timestamp) + 1


@dataclass(eq=False)
class TimelineEntry:
    """One timestamp of a node's history.

    At least one neighbor list is nonempty; duplicate ids mean repeated
    transactions with the same counterparty within the same second.
    Self-loops appear in both lists.
    """

    t: int
    in_neighbors: np.ndarray
    out_neighbors: np.ndarray


@dataclass(eq=False)
class TemporalGraph:
    """A directed multigraph with per-node transaction timelines.

    Node ids are dense ints 0..n_nodes-1, bijective with the original
    account keys via key_to_id / id_to_key. timelines[v] is sorted by
    descending timestamp; isolated nodes never occur (every node comes
    from at least one edge row).
    """

    n_nodes: int
    n_edges: int
    key_to_id: dict
    id_to_key: list
    timelines: list

    def max_timestamp(self):
        """Largest timestamp of any edge, or None for an edgeless graph."""
        tmax = None
        for timeline in self.timelines:
            if timeline:
                t = timeline[0].t
                if tmax is None or t > tmax:
                    tmax = t
        return tmax

    def iter_edges(self):
        """Yield every directed edge as (u, v, t), one tuple per transaction."""
        for u, timeline in enumerate(self.timelines):
            for entry in timeline:
                for v in entry.out_neighbors:
                    yield u, int(v), entry.t


@dataclass
class LabelSet:
    """Binary node labels keyed by node id (1 = malicious)."""

    labels: dict
    skipped_keys: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.labels)


def build_graph(edges) -> TemporalGraph:
    """Build a TemporalGraph from an iterable of (src_key, dst_key, t) tuples.

    Ids are assigned in first-seen order, source field before target field
    within a row. Timestamps must already be validated non-negative ints.
    """
    key_to_id = {}
    id_to_key = []
    per_node = []  # per node: {t: ([in ids], [out ids])}

    def node_id(key):
        i = key_to_id.get(key)
        if i is None:
            i = len(id_to_key)
            key_to_id[key] = i
            id_to_key.append(key)
            per_node.append({})
        return i

    n_edges = 0
    for src_key, dst_key, t in edges:
        u = node_id(src_key)
        v = node_id(dst_key)
        slot_u = per_node[u].get(t)
        if slot_u is None:
            slot_u = ([], [])
            per_node[u][t] = slot_u
        slot_u[1].append(v)
        slot_v = per_node[v].get(t)
        if slot_v is None:
            slot_v = ([], [])
            per_node[v][t] = slot_v
        slot_v[0].append(u)
        n_edges += 1

    timelines = []
    for v in range(len(id_to_key)):
        entries = []
        for t in sorted(per_node[v], reverse=True):
            ins, outs = per_node[v][t]
            entries.append(TimelineEntry(
                t=t,
                in_neighbors=np.asarray(ins, dtype=np.int64) if ins else _EMPTY_IDS,
                out_neighbors=np.asarray(outs, dtype=np.int64) if outs else _EMPTY_IDS,
            ))
        timelines.append(entries)
        per_node[v] = None  # free as we go

    return TemporalGraph(
        n_nodes=len(id_to_key),
        n_edges=n_edges,
        key_to_id=key_to_id,
        id_to_key=id_to_key,
        timelines=timelines,
    )


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _parse_timestamp(raw: str, lineno: int) -> int:
    s = raw.strip()
    try:
        t = int(s)
    except ValueError:
        if _is_number(s):
            raise ValueError(
                f"line {lineno}: fractional timestamp {s!r}, whole seconds required")
        raise ValueError(f"line {lineno}: unparsable timestamp {s!r}")
    if t < 0:
        raise ValueError(f"line {lineno}: negative timestamp {s!r}")
    return t


def _iter_csv_rows(path):
    """Yield (lineno, row) for non-blank rows of a CSV file."""
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not f.strip() for f in row):
                continue
            yield lineno, row


def ingest_csv(path, schema: EdgeSchema = EdgeSchema()) -> TemporalGraph:
    """Stream an edge CSV into a TemporalGraph.

    Parameters
    ----------
    path : str or Path
        CSV with one transaction per row. A header row is detected by a
        non-numeric timestamp field in row 1 and skipped.
    schema : EdgeSchema
        Column positions of source key, target key and timestamp. Extra
        columns are ignored.

    Raises
    ------
    ValueError
        On rows with too few columns, unparsable or negative timestamps,
        or fractional timestamps. The message carries the line number.
    """

    def edge_rows():
        first = True
        for lineno, row in _iter_csv_rows(path):
            if len(row) < schema.min_columns:
                raise ValueError(
                    f"line {lineno}: expected at least {schema.min_columns} "
                    f"columns, got {len(row)}")
            if first:
                first = False
                if not _is_number(row[schema.timestamp].strip()):
                    continue  # header row
            t = _parse_timestamp(row[schema.timestamp], lineno)
            yield row[schema.source].strip(), row[schema.target].strip(), t

    graph = build_graph(edge_rows())
    logger.info("ingested %s: %d nodes, %d edges", path, graph.n_nodes, graph.n_edges)
    return graph


def ingest_labels(path, graph: TemporalGraph) -> LabelSet:
    """Read an account,label CSV and key the labels by node id.

    Labels must be exactly "0" or "1". Accounts absent from the graph are
    skipped and reported via a warning; a header row is detected by a
    non-numeric label field in row 1.
    """
    labels = {}
    skipped = []
    first = True
    for lineno, row in _iter_csv_rows(path):
        if len(row) < 2:
            raise ValueError(f"line {lineno}: expected account,label, got {len(row)} columns")
        key = row[0].strip()
        raw = row[1].strip()
        if first:
            first = False
            if not _is_number(raw):
                continue  # header row
        if raw not in ("0", "1"):
            raise ValueError(f"line {lineno}: label {raw!r} not in {{0,1}}")
        node = graph.key_to_id.get(key)
        if node is None:
            skipped.append(key)
            continue
        labels[node] = int(raw)
    if skipped:
        logger.warning("%d labeled accounts not present in graph, skipped", len(skipped))
    return LabelSet(labels=labels, skipped_keys=skipped)


def adjacency_weights(graph: TemporalGraph, mode: str = "count", alpha: float = 1.0) -> dict:
    """Collapse the multigraph into symmetric edge weights.

    Returns {(u, v): w} with u < v. "count" sums transactions per pair;
    "recency" sums exp(-(T_max - t) / alpha) so old transactions fade.
    Self-loops are excluded; direction is discarded.
    """
    if mode not in WEIGHT_MODES:
        raise ValueError(f"unknown weight mode {mode!r}")
    if mode == "recency" and alpha <= 0:
        raise ValueError("recency weighting needs alpha > 0")
    weights = {}
    tmax = graph.max_timestamp()
    for u, timeline in enumerate(graph.timelines):
        for entry in timeline:
            if mode == "count":
                w = 1.0
            else:
                w = math.exp(-(tmax - entry.t) / alpha)
            for v_raw in entry.out_neighbors:
                v = int(v_raw)
                if v == u:
                    continue  # self-loops stay in timelines only
                key = (u, v) if u < v else (v, u)
                weights[key] = weights.get(key, 0.0) + w
    return weights


def write_edge_csv(graph: TemporalGraph, path, header: bool = True) -> None:
    """Write the graph back out as from,to,timestamp rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["from", "to", "timestamp"])
        for u, v, t in graph.iter_edges():
            writer.writerow([graph.id_to_key[u], graph.id_to_key[v], t])


def write_label_csv(graph: TemporalGraph, labels: LabelSet, path, header: bool = True) -> None:
    """Write account,label rows for every labeled node, ordered by node id."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["account", "label"])
        for node in sorted(labels.labels):
            writer.writerow([graph.id_to_key[node], labels.labels[node]])
