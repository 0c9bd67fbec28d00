"""Dataset file formats: directory layout for node/edge level, JSONL for
graph level. ``load`` after ``save`` reproduces arrays bit for bit (floats
are written with shortest round-trip repr).

Node/edge-level directory:
    hyperedges.txt   one hyperedge per line, whitespace-separated node ids
    features.csv     comma-separated reals, row i = node i
    labels.txt       one integer per line
    sensitive.txt    optional, one 0/1 per line
    meta.json        {"num_nodes": n, "num_classes": C, "name": s}

Graph-level file: UTF-8 lines, each
    {"edges": [[...], ...], "features": [[...], ...], "label": k}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DatasetLoadError
from ..hypergraph import build_hypergraph
from .dataset import Dataset

NODE_FILES = ("hyperedges.txt", "features.csv", "labels.txt", "meta.json")


def _require(path: Path):
    if not path.is_file():
        raise DatasetLoadError(f"{path}: missing file")
    return path


def _parse_int(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DatasetLoadError(f"{where}: not an integer: {token!r}") from None


def load_node_dataset(directory) -> Dataset:
    directory = Path(directory)
    meta_path = _require(directory / "meta.json")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetLoadError(f"{meta_path}: invalid JSON ({exc})") from None
    for key in ("num_nodes", "num_classes", "name"):
        if key not in meta:
            raise DatasetLoadError(f"{meta_path}: missing key {key!r}")
    n = int(meta["num_nodes"])
    num_classes = int(meta["num_classes"])

    edge_path = _require(directory / "hyperedges.txt")
    edges = []
    for ln, line in enumerate(edge_path.read_text().splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            raise DatasetLoadError(f"{edge_path}:{ln}: empty hyperedge")
        members = [_parse_int(t, f"{edge_path}:{ln}") for t in tokens]
        for v in members:
            if not 0 <= v < n:
                raise DatasetLoadError(
                    f"{edge_path}:{ln}: node id {v} outside [0, {n})"
                )
        edges.append(members)

    feat_path = _require(directory / "features.csv")
    rows = []
    width = None
    for ln, line in enumerate(feat_path.read_text().splitlines(), start=1):
        cells = line.split(",")
        try:
            row = [float(c) for c in cells]
        except ValueError:
            raise DatasetLoadError(f"{feat_path}:{ln}: non-numeric feature") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DatasetLoadError(
                f"{feat_path}:{ln}: expected {width} columns, got {len(row)}"
            )
        rows.append(row)
    if len(rows) != n:
        raise DatasetLoadError(
            f"{feat_path}: {len(rows)} rows but meta says num_nodes={n}"
        )
    features = np.array(rows, dtype=np.float64)

    label_path = _require(directory / "labels.txt")
    labels = []
    for ln, line in enumerate(label_path.read_text().splitlines(), start=1):
        labels.append(_parse_int(line.strip(), f"{label_path}:{ln}"))
    if len(labels) != n:
        raise DatasetLoadError(
            f"{label_path}: {len(labels)} rows but meta says num_nodes={n}"
        )
    labels = np.array(labels, dtype=np.int64)
    if len(labels) and (labels.min() < 0 or labels.max() >= num_classes):
        raise DatasetLoadError(
            f"{label_path}: label outside [0, {num_classes})"
        )

    sensitive = None
    sens_path = directory / "sensitive.txt"
    if sens_path.is_file():
        sensitive = []
        for ln, line in enumerate(sens_path.read_text().splitlines(), start=1):
            value = _parse_int(line.strip(), f"{sens_path}:{ln}")
            if value not in (0, 1):
                raise DatasetLoadError(f"{sens_path}:{ln}: sensitive must be 0/1")
            sensitive.append(value)
        if len(sensitive) != n:
            raise DatasetLoadError(f"{sens_path}: expected {n} rows")
        sensitive = np.array(sensitive, dtype=np.int64)

    hg = build_hypergraph(edges, n)
    return Dataset(
        level="node",
        name=str(meta["name"]),
        hypergraphs=[hg],
        features=[features],
        labels=labels,
        num_classes=num_classes,
        sensitive=sensitive,
    )


def _float_repr(x: float) -> str:
    return repr(float(x))


def save_dataset(dataset: Dataset, directory) -> None:
    """Write the node/edge-level directory format; inverse of load."""
    if dataset.level == "graph":
        raise DatasetLoadError("use save_graph_dataset for graph-level data")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    hg = dataset.hypergraph
    lines = [" ".join(map(str, hg.members(e))) for e in range(hg.num_edges)]
    (directory / "hyperedges.txt").write_text("\n".join(lines) + "\n")
    feat_lines = [
        ",".join(_float_repr(v) for v in row) for row in dataset.feature_matrix
    ]
    (directory / "features.csv").write_text("\n".join(feat_lines) + "\n")
    (directory / "labels.txt").write_text(
        "\n".join(str(int(v)) for v in dataset.labels) + "\n"
    )
    if dataset.sensitive is not None:
        (directory / "sensitive.txt").write_text(
            "\n".join(str(int(v)) for v in dataset.sensitive) + "\n"
        )
    meta = {
        "num_nodes": hg.num_nodes,
        "num_classes": dataset.num_classes,
        "name": dataset.name,
    }
    (directory / "meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n")


def load_graph_dataset(path) -> Dataset:
    path = Path(path)
    _require(path)
    hypergraphs, features, labels = [], [], []
    for idx, line in enumerate(path.read_text().splitlines()):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            edges = rec["edges"]
            feats = np.array(rec["features"], dtype=np.float64)
            label = int(rec["label"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DatasetLoadError(f"{path}: malformed record {idx}: {exc}") from None
        if feats.ndim != 2:
            raise DatasetLoadError(f"{path}: record {idx}: features must be 2-D")
        hypergraphs.append(build_hypergraph(edges, feats.shape[0]))
        features.append(feats)
        labels.append(label)
    if not hypergraphs:
        raise DatasetLoadError(f"{path}: no records")
    labels = np.array(labels, dtype=np.int64)
    return Dataset(
        level="graph",
        name=path.stem,
        hypergraphs=hypergraphs,
        features=features,
        labels=labels,
        num_classes=int(labels.max()) + 1,
    )


def save_graph_dataset(dataset: Dataset, path) -> None:
    if dataset.level != "graph":
        raise DatasetLoadError("save_graph_dataset needs a graph-level dataset")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for hg, feats, label in zip(
            dataset.hypergraphs, dataset.features, dataset.labels
        ):
            rec = {
                "edges": hg.edge_list(),
                "features": [[float(v) for v in row] for row in feats],
                "label": int(label),
            }
            fh.write(json.dumps(rec) + "\n")


def dataset_info(path) -> dict:
    """Summary statistics for a dataset path (directory or JSONL file)."""
    path = Path(path)
    if path.is_dir():
        ds = load_node_dataset(path)
        hg = ds.hypergraph
        return {
            "name": ds.name,
            "level": "node/edge",
            "num_nodes": hg.num_nodes,
            "num_edges": hg.num_edges,
            "num_features": int(ds.feature_matrix.shape[1]),
            "num_classes": ds.num_classes,
            "mean_edge_size": float(hg.edge_sizes.mean()) if hg.num_edges else 0.0,
            "has_sensitive": ds.sensitive is not None,
        }
    ds = load_graph_dataset(path)
    sizes = [hg.num_nodes for hg in ds.hypergraphs]
    edge_counts = [hg.num_edges for hg in ds.hypergraphs]
    return {
        "name": ds.name,
        "level": "graph",
        "num_hypergraphs": len(ds.hypergraphs),
        "num_classes": ds.num_classes,
        "avg_nodes": float(np.mean(sizes)),
        "avg_edges": float(np.mean(edge_counts)),
        "num_features": int(ds.features[0].shape[1]),
    }
