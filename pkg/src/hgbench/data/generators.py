"""Synthetic dataset generators.

Three groups:

* ``generate_rhg`` builds single hypergraphs from named structure families
  (pyramid, check-table, wheel, plus seven documented variants whose exact
  constructions are our own parametric rules, marked non-canonical).
* ``knn_hypergraph`` links each row of a tabular dataset to its nearest
  neighbors, the construction used by the fairness datasets.
* ``make_cocitation_like`` fabricates a desk-scale co-citation corpus with
  planted class-homophilic hyperedges and bag-of-words features. It is a
  stand-in with matching shape statistics for environments where the real
  academic hypergraphs are not on disk; point the loaders at a dataset
  directory to use real data instead.
"""

from __future__ import annotations

import numpy as np

from ..errors import HgBenchError
from ..hypergraph import Hypergraph, build_hypergraph
from .dataset import Dataset

# canonical kind order; labels of generated corpora index into this list
RHG10_KINDS = (
    "flower",
    "pyramid",
    "check_table",
    "wheel",
    "lattice",
    "windmill",
    "firm_pyramid",
    "rchecked_table",
    "cycle",
    "fern",
)
RHG3_KINDS = ("pyramid", "check_table", "wheel")


def _gen_wheel(n_target, rng):
    """Hub node in every hyperedge plus consecutive rim arcs of length 2-4."""
    rim = max(4, n_target - 1)
    edges = []
    start = 0
    while start < rim:
        length = int(rng.integers(2, 5))
        arc = [(start + i) % rim + 1 for i in range(length)]
        edges.append([0] + arc)
        start += length
    return edges, rim + 1


def _tree_layers(n_target, rng):
    layers = [[0]]
    total = 1
    while total < n_target:
        nxt = []
        for _ in layers[-1]:
            for _ in range(int(rng.integers(2, 4))):
                if total >= n_target:
                    break
                nxt.append(total)
                total += 1
        if not nxt:
            break
        layers.append(nxt)
    return layers, total


def _gen_pyramid(n_target, rng):
    """Layered tree; one hyperedge per parent covering it and its children."""
    layers, total = _tree_layers(n_target, rng)
    edges = []
    child_iter = {}
    nxt = 1
    for depth in range(len(layers) - 1):
        children = list(layers[depth + 1])
        pos = 0
        for parent in layers[depth]:
            take = int(rng.integers(2, 4))
            group = children[pos : pos + take]
            pos += take
            if group:
                edges.append([parent] + group)
        # any leftover children attach to the last parent of the layer
        if pos < len(children) and edges:
            edges[-1].extend(children[pos:])
    if not edges:
        edges = [[0]]
    return edges, total


def _grid_dims(n_target, rng):
    r = max(2, int(round(np.sqrt(n_target) * rng.uniform(0.8, 1.2))))
    c = max(2, int(round(n_target / r)))
    return r, c


def _gen_check_table(n_target, rng):
    """r x c node grid; hyperedges are the rows and the columns."""
    r, c = _grid_dims(n_target, rng)
    node = lambda i, j: i * c + j
    edges = [[node(i, j) for j in range(c)] for i in range(r)]
    edges += [[node(i, j) for i in range(r)] for j in range(c)]
    return edges, r * c


def _gen_flower(n_target, rng):
    """One center node with disjoint petal hyperedges (non-canonical)."""
    edges = []
    nxt = 1
    while nxt < n_target:
        petal_size = int(rng.integers(3, 6))
        petal = list(range(nxt, min(nxt + petal_size, n_target)))
        nxt += len(petal)
        if petal:
            edges.append([0] + petal)
    return edges or [[0]], max(nxt, 1)


def _gen_lattice(n_target, rng):
    """Grid with one hyperedge per 2x2 block (non-canonical)."""
    r, c = _grid_dims(n_target, rng)
    node = lambda i, j: i * c + j
    edges = [
        [node(i, j), node(i, j + 1), node(i + 1, j), node(i + 1, j + 1)]
        for i in range(r - 1)
        for j in range(c - 1)
    ]
    return edges, r * c


def _gen_windmill(n_target, rng):
    """Blades sharing a common node pair (non-canonical)."""
    edges = []
    nxt = 2
    while nxt < n_target:
        blade_size = int(rng.integers(2, 5))
        blade = list(range(nxt, min(nxt + blade_size, n_target)))
        nxt += len(blade)
        if blade:
            edges.append([0, 1] + blade)
    return edges or [[0, 1]], max(nxt, 2)


def _gen_firm_pyramid(n_target, rng):
    """Pyramid plus one hyperedge tying each full layer (non-canonical)."""
    layers, total = _tree_layers(n_target, rng)
    edges, _ = _gen_pyramid_from_layers(layers)
    for layer in layers[1:]:
        if len(layer) >= 2:
            edges.append(list(layer))
    return edges, total


def _gen_pyramid_from_layers(layers):
    edges = []
    for depth in range(len(layers) - 1):
        children = list(layers[depth + 1])
        per = max(1, len(children) // len(layers[depth]))
        pos = 0
        for i, parent in enumerate(layers[depth]):
            group = children[pos : pos + per] if i < len(layers[depth]) - 1 else children[pos:]
            pos += len(group)
            if group:
                edges.append([parent] + group)
    return edges or [[0]], sum(len(l) for l in layers)


def _gen_rchecked_table(n_target, rng):
    """Check table with every line randomly split in two (non-canonical)."""
    r, c = _grid_dims(n_target, rng)
    node = lambda i, j: i * c + j
    edges = []
    for i in range(r):
        cut = int(rng.integers(1, c))
        edges.append([node(i, j) for j in range(cut)])
        edges.append([node(i, j) for j in range(cut, c)])
    for j in range(c):
        cut = int(rng.integers(1, r))
        edges.append([node(i, j) for i in range(cut)])
        edges.append([node(i, j) for i in range(cut, r)])
    return [e for e in edges if e], r * c


def _gen_cycle(n_target, rng):
    """Ring covered by overlapping arcs of length 3-5 (non-canonical)."""
    n = max(4, n_target)
    edges = []
    start = 0
    while start < n:
        length = int(rng.integers(3, 6))
        edges.append([(start + i) % n for i in range(length)])
        start += length - 1  # overlap by one node to close the chain
    return edges, n


def _gen_fern(n_target, rng):
    """Stem path with leaflet hyperedges along it (non-canonical)."""
    stem_len = max(2, n_target // 3)
    edges = []
    nxt = stem_len
    for i in range(stem_len - 1):
        leaflet_size = int(rng.integers(1, 4))
        leaves = list(range(nxt, min(nxt + leaflet_size, max(n_target, stem_len))))
        nxt += len(leaves)
        edges.append([i, i + 1] + leaves)
    return edges or [[0, 1]], max(nxt, stem_len)


_GENERATORS = {
    "flower": _gen_flower,
    "pyramid": _gen_pyramid,
    "check_table": _gen_check_table,
    "wheel": _gen_wheel,
    "lattice": _gen_lattice,
    "windmill": _gen_windmill,
    "firm_pyramid": _gen_firm_pyramid,
    "rchecked_table": _gen_rchecked_table,
    "cycle": _gen_cycle,
    "fern": _gen_fern,
}

DEGREE_FEATURE_CAP = 8


def rhg_features(hg: Hypergraph, rng, cap: int = DEGREE_FEATURE_CAP,
                 jitter: float = 0.1) -> np.ndarray:
    """Degree one-hot (clamped at ``cap``) plus Gaussian jitter."""
    x = np.zeros((hg.num_nodes, cap + 1))
    pos = np.minimum(hg.node_degrees, cap)
    x[np.arange(hg.num_nodes), pos] = 1.0
    return x + jitter * rng.standard_normal(x.shape)


def generate_rhg(kind: str, n_nodes_target: int, seed) -> tuple[Hypergraph, int]:
    """One structured hypergraph; returns (hypergraph, kind index)."""
    if kind not in _GENERATORS:
        raise HgBenchError(f"unknown RHG kind {kind!r}; known: {sorted(_GENERATORS)}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    edges, num_nodes = _GENERATORS[kind](int(n_nodes_target), rng)
    return build_hypergraph(edges, num_nodes), RHG10_KINDS.index(kind)


def node_size_range(avg_nodes: float) -> tuple[int, int]:
    """Inclusive per-graph node-count range: +-30% of the target average."""
    return int(round(avg_nodes * 0.7)), int(round(avg_nodes * 1.3))


def make_rhg_corpus(kinds=RHG3_KINDS, count: int = 1500, seed: int = 0,
                    avg_nodes: float = 35.5, name: str | None = None) -> Dataset:
    """Graph-level corpus: label = index of the generating structure."""
    rng = np.random.default_rng(seed)
    lo, hi = node_size_range(avg_nodes)
    hypergraphs, features, labels = [], [], []
    for i in range(count):
        label = int(rng.integers(len(kinds)))
        target = int(rng.integers(lo, hi + 1))
        hg, _ = generate_rhg(kinds[label], target, rng)
        hypergraphs.append(hg)
        features.append(rhg_features(hg, rng))
        labels.append(label)
    return Dataset(
        level="graph",
        name=name or f"rhg{len(kinds)}",
        hypergraphs=hypergraphs,
        features=features,
        labels=np.array(labels),
        num_classes=len(kinds),
    )


def knn_hypergraph(feature_table: np.ndarray, labels, k: int = 4,
                   sensitive_col: int = 0, name: str = "knn") -> Dataset:
    """One hyperedge per node: the node plus its k nearest neighbors.

    Distances are Euclidean over the standardized non-sensitive columns;
    ties break toward the lower node index. The sensitive column stays in
    the feature table and becomes the dataset's sensitive attribute.
    """
    x = np.asarray(feature_table, dtype=np.float64)
    n = x.shape[0]
    if not 0 <= sensitive_col < x.shape[1]:
        raise HgBenchError(f"sensitive column {sensitive_col} out of range")
    keep = [c for c in range(x.shape[1]) if c != sensitive_col]
    base = x[:, keep]
    sd = base.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    z = (base - base.mean(axis=0)) / sd
    edges = []
    for v in range(n):
        d = np.sqrt(((z - z[v]) ** 2).sum(axis=1))
        d[v] = np.inf  # self joins explicitly below
        order = np.lexsort((np.arange(n), d))
        edges.append([v] + order[: min(k, n - 1)].tolist())
    sensitive = (x[:, sensitive_col] != 0).astype(np.int64)
    return Dataset(
        level="node",
        name=name,
        hypergraphs=[build_hypergraph(edges, n)],
        features=[x],
        labels=np.asarray(labels, dtype=np.int64),
        num_classes=int(np.max(labels)) + 1,
        sensitive=sensitive,
    )


# -- desk-scale stand-ins with real-corpus shape statistics ------------------

COCITATION_SHAPE = dict(num_nodes=2708, num_edges=1579, num_features=1433,
                        num_classes=7)
COAUTHOR_SHAPE = dict(num_nodes=2708, num_edges=1072, num_features=1433,
                      num_classes=7)


def make_cocitation_like(
    seed: int = 0,
    num_nodes: int = 2708,
    num_edges: int = 1579,
    num_features: int = 1433,
    num_classes: int = 7,
    homophily: float = 0.85,
    topic_word_rate: float = 0.55,
    words_per_doc: float = 18.0,
    mean_edge_size: float = 3.0,
    name: str = "cocitation-like",
) -> Dataset:
    """Planted-partition academic hypergraph with bag-of-words features.

    Hyperedges pick an anchor paper and fill members from the anchor's
    class with probability ``homophily``; each document activates words
    from its class vocabulary with probability ``topic_word_rate`` and
    from the shared background otherwise.
    """
    rng = np.random.default_rng(seed)
    proportions = np.array([0.13, 0.08, 0.15, 0.30, 0.16, 0.11, 0.07])[:num_classes]
    proportions = proportions / proportions.sum()
    labels = rng.choice(num_classes, size=num_nodes, p=proportions)
    class_members = [np.flatnonzero(labels == c) for c in range(num_classes)]

    words_per_class = num_features // (num_classes + 1)
    class_vocab = [
        np.arange(c * words_per_class, (c + 1) * words_per_class)
        for c in range(num_classes)
    ]
    x = np.zeros((num_nodes, num_features))
    for v in range(num_nodes):
        n_words = 1 + rng.poisson(words_per_doc)
        from_topic = rng.random(n_words) < topic_word_rate
        topic_words = rng.choice(class_vocab[labels[v]], size=int(from_topic.sum()))
        bg_words = rng.integers(0, num_features, size=int((~from_topic).sum()))
        x[v, topic_words] = 1.0
        x[v, bg_words] = 1.0

    edges = []
    for _ in range(num_edges):
        anchor = int(rng.integers(num_nodes))
        size = 2 + rng.poisson(mean_edge_size - 2)
        members = {anchor}
        while len(members) < size:
            if rng.random() < homophily:
                pool = class_members[labels[anchor]]
                members.add(int(pool[rng.integers(len(pool))]))
            else:
                members.add(int(rng.integers(num_nodes)))
        edges.append(sorted(members))

    return Dataset(
        level="node",
        name=name,
        hypergraphs=[build_hypergraph(edges, num_nodes)],
        features=[x],
        labels=labels,
        num_classes=num_classes,
    )


def make_coauthor_like(seed: int = 0, name: str = "coauthor-like") -> Dataset:
    """Co-authorship variant: fewer, larger, more homophilic hyperedges."""
    return make_cocitation_like(
        seed=seed,
        num_edges=COAUTHOR_SHAPE["num_edges"],
        homophily=0.9,
        mean_edge_size=4.0,
        name=name,
    )


def make_credit_like(seed: int = 0, num_nodes: int = 1000,
                     num_features: int = 27, name: str = "credit-like") -> Dataset:
    """Tabular credit-risk stand-in with a correlated sensitive attribute.

    Column 0 is the 0/1 sensitive group; the binary label depends on a
    linear risk score plus a group-dependent shift, so fairness gaps are
    present but not degenerate. Build the hypergraph with
    :func:`knn_hypergraph`.
    """
    rng = np.random.default_rng(seed)
    sensitive = (rng.random(num_nodes) < 0.35).astype(np.int64)
    latent = rng.standard_normal((num_nodes, 3))
    cols = [sensitive.astype(np.float64)]
    for j in range(num_features - 1):
        w = rng.standard_normal(3) * 0.8
        noise = rng.standard_normal(num_nodes) * 0.6
        drift = 0.4 * sensitive if j % 5 == 0 else 0.0
        cols.append(latent @ w + noise + drift)
    x = np.column_stack(cols)
    w_y = rng.standard_normal(3)
    logits = latent @ w_y + 0.8 * sensitive + 0.3 * rng.standard_normal(num_nodes)
    labels = (logits > np.median(logits)).astype(np.int64)
    ds = knn_hypergraph(x, labels, k=4, sensitive_col=0, name=name)
    assert np.array_equal(ds.sensitive, sensitive)
    return ds


NAMED_GENERATORS = {
    "cocitation_like": make_cocitation_like,
    "coauthor_like": make_coauthor_like,
    "credit_like": make_credit_like,
    "rhg3": lambda seed=0, count=1500: make_rhg_corpus(RHG3_KINDS, count, seed),
    "rhg10": lambda seed=0, count=2000: make_rhg_corpus(
        RHG10_KINDS, count, seed, avg_nodes=31.3, name="rhg10"
    ),
}
