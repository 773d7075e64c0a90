"""Readers and writers for graph files.

Edge-list format: a header line ``n m`` followed by one ``u v [w]`` line per
edge, 0-indexed and whitespace separated. ``#`` starts a comment. Duplicate
edges are summed.

METIS format: header ``n m [fmt]``, then line ``i`` lists the (1-indexed)
neighbours of vertex ``i``; with ``fmt`` ending in 1 each neighbour is
followed by an edge weight.
"""

import numpy as np

from .errors import GraphFormatError
from .graph import Graph, largest_component


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _int(tok, lineno, what):
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(f"expected integer {what}, got {tok!r}", lineno) from None


def _float(tok, lineno):
    try:
        val = float(tok)
    except ValueError:
        raise GraphFormatError(f"expected weight, got {tok!r}", lineno) from None
    if not val > 0 or not np.isfinite(val):
        raise GraphFormatError(f"weight must be positive, got {tok!r}", lineno)
    return val


def _build(n, tails, heads, weights, keep_largest):
    if keep_largest:
        n, tails, heads, weights, _ = largest_component(n, tails, heads, weights)
    return Graph(n, tails, heads, weights)


def parse_edge_list(text, keep_largest=False):
    lines = _content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphFormatError("empty input", 1) from None
    parts = header.split()
    if len(parts) != 2:
        raise GraphFormatError("header must be 'n m'", lineno)
    n = _int(parts[0], lineno, "n")
    m = _int(parts[1], lineno, "m")
    tails, heads, weights = [], [], []
    for lineno, line in lines:
        tok = line.split()
        if len(tok) not in (2, 3):
            raise GraphFormatError("edge line must be 'u v [w]'", lineno)
        u = _int(tok[0], lineno, "vertex")
        v = _int(tok[1], lineno, "vertex")
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex out of range [0, {n})", lineno)
        if u == v:
            raise GraphFormatError("self-loop", lineno)
        tails.append(u)
        heads.append(v)
        weights.append(_float(tok[2], lineno) if len(tok) == 3 else 1.0)
    if len(tails) != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(tails)}", 1)
    return _build(n, tails, heads, weights, keep_largest)


def parse_metis(text, keep_largest=False):
    # METIS allows empty adjacency lines, so blank lines are significant here
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())
            if not ln.lstrip().startswith("%")]
    while rows and not rows[0][1]:
        rows.pop(0)
    if not rows:
        raise GraphFormatError("empty input", 1)
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) not in (2, 3):
        raise GraphFormatError("header must be 'n m [fmt]'", lineno)
    n = _int(parts[0], lineno, "n")
    weighted = len(parts) == 3 and parts[2].endswith("1")
    adj_rows = rows[1:n + 1]
    if len(adj_rows) < n:
        raise GraphFormatError(f"expected {n} adjacency lines, found {len(adj_rows)}", lineno)
    tails, heads, weights = [], [], []
    for vertex, (lineno, line) in enumerate(adj_rows):
        tok = line.split()
        step = 2 if weighted else 1
        if len(tok) % step:
            raise GraphFormatError("neighbour without weight", lineno)
        for j in range(0, len(tok), step):
            u = _int(tok[j], lineno, "neighbour") - 1
            if not 0 <= u < n:
                raise GraphFormatError(f"neighbour out of range [1, {n}]", lineno)
            if u == vertex:
                raise GraphFormatError("self-loop", lineno)
            if u > vertex:
                tails.append(vertex)
                heads.append(u)
                weights.append(_float(tok[j + 1], lineno) if weighted else 1.0)
    return _build(n, tails, heads, weights, keep_largest)


def read_graph(path, fmt="edgelist", keep_largest=False):
    """Read a graph file; ``fmt`` is ``"edgelist"`` or ``"metis"``."""
    with open(path) as fh:
        text = fh.read()
    if fmt == "metis":
        return parse_metis(text, keep_largest)
    return parse_edge_list(text, keep_largest)


def format_edge_list(g):
    out = [f"{g.n} {g.m}"]
    unit = np.all(g.weights == 1.0)
    for u, v, w in zip(g.tails, g.heads, g.weights):
        out.append(f"{u} {v}" if unit else f"{u} {v} {w:.17g}")
    return "\n".join(out) + "\n"


def write_edge_list(g, path):
    with open(path, "w") as fh:
        fh.write(format_edge_list(g))
