"""Trivalent spatial-graph diagrams and their colorings by a G-family.

A diagram is a combinatorial object: arcs, crossings (the over-arc passes
through, the under-arc is cut), and trivalent vertices.  Arcs separated only
by under-crossings form one topological edge; group elements of a coloring
live on edges, carrier colors on arcs, and transverse-orientation bits on
edges (free exactly on edges whose group element is the identity, shared
across each vertex-connected component of the others).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from foamcocycle.algebra import GFamilyTable


class ParseError(Exception):
    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class Crossing:
    sign: str
    over: str
    under_in: str
    under_out: str


@dataclass(frozen=True)
class Vertex:
    slots: tuple[tuple[str, str], ...]  # three (arc, "head"|"tail") pairs


@dataclass
class GraphDiagram:
    arcs: tuple[str, ...]
    crossings: tuple[Crossing, ...]
    vertices: tuple[Vertex, ...]
    _edges: dict[str, str] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.validate()
        self._edges = self._edge_partition()

    def validate(self) -> None:
        arcset = set(self.arcs)
        if len(arcset) != len(self.arcs):
            raise ParseError("duplicate arc id")
        used: dict[tuple[str, str], str] = {}

        def consume(arc, end, where):
            if arc not in arcset:
                raise ParseError(f"{where} references unknown arc {arc!r}")
            key = (arc, end)
            if key in used:
                raise ParseError(
                    f"{where}: arc end {arc}:{end} already used by {used[key]}"
                )
            used[key] = where

        for i, c in enumerate(self.crossings):
            if c.sign not in "+-":
                raise ParseError(f"crossing {i}: bad sign {c.sign!r}")
            if c.over not in arcset:
                raise ParseError(f"crossing {i} references unknown arc {c.over!r}")
            consume(c.under_in, "head", f"crossing {i}")
            consume(c.under_out, "tail", f"crossing {i}")
        for i, v in enumerate(self.vertices):
            if len(v.slots) != 3:
                raise ParseError(f"vertex {i}: needs exactly 3 slots")
            for arc, end in v.slots:
                if end not in ("head", "tail"):
                    raise ParseError(f"vertex {i}: bad end {end!r}")
                consume(arc, end, f"vertex {i}")
        for arc in self.arcs:
            h = (arc, "head") in used
            t = (arc, "tail") in used
            if h != t:
                raise ParseError(f"arc {arc} has a dangling end")
        # arcs with both ends free are closed circles

    def is_circle(self, arc: str) -> bool:
        for c in self.crossings:
            if arc in (c.under_in, c.under_out):
                return False
        for v in self.vertices:
            if any(a == arc for a, _ in v.slots):
                return False
        return True

    def _edge_partition(self) -> dict[str, str]:
        parent = {a: a for a in self.arcs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                if ry < rx:
                    rx, ry = ry, rx
                parent[ry] = rx

        for c in self.crossings:
            union(c.under_in, c.under_out)
        return {a: find(a) for a in self.arcs}

    def edge_of(self, arc: str) -> str:
        return self._edges[arc]

    def edges(self) -> list[str]:
        return sorted(set(self._edges.values()))


def parse_graph_diagram(text: str) -> GraphDiagram:
    arcs: list[str] = []
    crossings: list[Crossing] = []
    vertices: list[Vertex] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "arc":
            if len(parts) != 2:
                raise ParseError("arc takes one id", lineno)
            arcs.append(parts[1])
        elif kind == "crossing":
            if len(parts) != 5:
                raise ParseError("crossing takes sign, over, under_in, under_out", lineno)
            crossings.append(Crossing(parts[1], parts[2], parts[3], parts[4]))
        elif kind == "vertex":
            if len(parts) != 4:
                raise ParseError("vertex takes three arc ends", lineno)
            slots = []
            for token in parts[1:]:
                if ":" not in token:
                    raise ParseError(f"vertex end {token!r} needs arc:head|tail", lineno)
                arc, end = token.rsplit(":", 1)
                slots.append((arc, end))
            vertices.append(Vertex(tuple(slots)))
        else:
            raise ParseError(f"unknown record {kind!r}", lineno)
    try:
        return GraphDiagram(tuple(arcs), tuple(crossings), tuple(vertices))
    except ParseError:
        raise


def serialize_graph_diagram(d: GraphDiagram) -> str:
    lines = [f"arc {a}" for a in sorted(d.arcs)]
    lines += sorted(
        f"crossing {c.sign} {c.over} {c.under_in} {c.under_out}" for c in d.crossings
    )
    lines += sorted(
        "vertex " + " ".join(f"{a}:{e}" for a, e in v.slots) for v in d.vertices
    )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Coloring:
    """Arc colors (carrier, group) plus one orientation bit per edge."""

    arc_colors: tuple[tuple[str, tuple[int, int]], ...]
    orientations: tuple[tuple[str, int], ...]

    def color(self, arc: str) -> tuple[int, int]:
        return dict(self.arc_colors)[arc]

    def bit(self, edge: str) -> int:
        return dict(self.orientations)[edge]


def _flows(d: GraphDiagram, family: GFamilyTable) -> list[dict[str, int]]:
    """Group assignments per edge satisfying every vertex product condition."""
    group = family.group
    e = group.identity
    edges = d.edges()
    flows = []
    for combo in itertools.product(group.elements(), repeat=len(edges)):
        g = dict(zip(edges, combo))
        ok = True
        for v in d.vertices:
            acc = e
            for arc, end in v.slots:
                ge = g[d.edge_of(arc)]
                acc = group.mul[acc][ge if end == "tail" else group.inverse(ge)]
            if acc != e:
                ok = False
                break
        if ok:
            # the crossing rule conjugates the under-edge group element by
            # the over element; constant-per-edge flow needs them to commute
            for c in d.crossings:
                gu = g[d.edge_of(c.under_in)]
                go = g[d.edge_of(c.over)]
                if group.mul[gu][go] != group.mul[go][gu]:
                    ok = False
                    break
        if ok:
            flows.append(g)
    return flows


def _x_colorings(d: GraphDiagram, family: GFamilyTable, flow: dict[str, int]):
    """All carrier-color assignments consistent with crossings and vertices."""
    # vertices force equality; solve on equality classes
    parent = {a: a for a in d.arcs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in d.vertices:
        for arc, _ in v.slots[1:]:
            parent[find(arc)] = find(v.slots[0][0])
    classes = sorted({find(a) for a in d.arcs})
    class_of = {a: find(a) for a in d.arcs}

    constraints = []
    for c in d.crossings:
        g_over = flow[d.edge_of(c.over)]
        constraints.append(
            (class_of[c.under_in], g_over, class_of[c.over], class_of[c.under_out])
        )

    by_class: dict[str, list] = {cl: [] for cl in classes}
    for con in constraints:
        cin, _g, cover, cout = con
        for cl in (cin, cover, cout):
            by_class[cl].append(con)

    order = classes
    index = {cl: i for i, cl in enumerate(order)}
    n = family.size
    results = []
    assign: list[int | None] = [None] * len(order)

    def consistent(con):
        cin, g, cover, cout = con
        vin, vover, vout = (
            assign[index[cin]],
            assign[index[cover]],
            assign[index[cout]],
        )
        if vin is None or vover is None or vout is None:
            return True
        return family.act(vin, g, vover) == vout

    def search(i):
        if i == len(order):
            results.append(tuple(assign))
            return
        cl = order[i]
        for x in range(n):
            assign[i] = x
            if all(consistent(con) for con in by_class[cl]):
                search(i + 1)
        assign[i] = None

    search(0)
    out = []
    for res in results:
        out.append({a: res[index[class_of[a]]] for a in d.arcs})
    return out


def _orientation_assignments(d: GraphDiagram, family: GFamilyTable, flow):
    """Bit choices: one per identity edge, one shared per nonidentity class.

    Normal orientations on sheets carrying a nontrivial group element must
    agree across every vertex, which ties their bits together; identity
    sheets orient freely.
    """
    e = family.group.identity
    edges = d.edges()
    parent = {ed: ed for ed in edges}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v in d.vertices:
        nonid = [d.edge_of(arc) for arc, _ in v.slots if flow[d.edge_of(arc)] != e]
        for other in nonid[1:]:
            ra, rb = find(nonid[0]), find(other)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[str, list[str]] = {}
    for ed in edges:
        groups.setdefault(find(ed) if flow[ed] != e else f"free:{ed}", []).append(ed)
    keys = sorted(groups)
    for combo in itertools.product((0, 1), repeat=len(keys)):
        bits = {}
        for key, b in zip(keys, combo):
            for ed in groups[key]:
                bits[ed] = b
        yield bits


def enumerate_colorings(d: GraphDiagram, family: GFamilyTable) -> list[Coloring]:
    """The complete duplicate-free list of colorings in canonical order."""
    arcs = sorted(d.arcs)
    edges = d.edges()
    out = []
    for flow in _flows(d, family):
        for xcol in _x_colorings(d, family, flow):
            for bits in _orientation_assignments(d, family, flow):
                out.append(
                    Coloring(
                        tuple((a, (xcol[a], flow[d.edge_of(a)])) for a in arcs),
                        tuple((ed, bits[ed]) for ed in edges),
                    )
                )
    out.sort(key=lambda c: (c.arc_colors, c.orientations))
    return out


def coloring_count(d: GraphDiagram, family: GFamilyTable) -> int:
    return len(enumerate_colorings(d, family))


def verify_coloring(d: GraphDiagram, family: GFamilyTable, col: Coloring) -> bool:
    """Post-hoc check of every crossing and vertex constraint."""
    colors = dict(col.arc_colors)
    group = family.group
    e = group.identity
    for c in d.crossings:
        (xi, gi) = colors[c.under_in]
        (xo, go) = colors[c.over]
        (xu, gu) = colors[c.under_out]
        if family.act(xi, go, xo) != xu:
            return False
        if group.mul[group.mul[group.inverse(go)][gi]][go] != gu:
            return False
    for v in d.vertices:
        xs = {colors[arc][0] for arc, _ in v.slots}
        if len(xs) != 1:
            return False
        acc = e
        for arc, end in v.slots:
            g = colors[arc][1]
            acc = group.mul[acc][g if end == "tail" else group.inverse(g)]
        if acc != e:
            return False
    bits = dict(col.orientations)
    for v in d.vertices:
        nonid_bits = {
            bits[d.edge_of(arc)]
            for arc, _ in v.slots
            if colors[arc][1] != e
        }
        if len(nonid_bits) > 1:
            return False
    return True


def insert_r2(d: GraphDiagram, over_arc: str, under_arc: str) -> GraphDiagram:
    """Detour rewrite: push `under_arc` under `over_arc` twice.

    The under arc is split near its head; whatever consumed that head now
    consumes the new tail piece.  Not applicable to closed circle arcs.
    """
    if under_arc not in d.arcs or over_arc not in d.arcs:
        raise ParseError("insert_r2: unknown arc")
    if d.is_circle(under_arc):
        raise ParseError("insert_r2: under arc must have consumed ends")
    mid, tail = f"{under_arc}.r2m", f"{under_arc}.r2t"
    arcs = tuple(list(d.arcs) + [mid, tail])
    crossings = [
        Crossing(c.sign, c.over, tail if c.under_in == under_arc else c.under_in, c.under_out)
        for c in d.crossings
    ]
    vertices = [
        Vertex(
            tuple(
                (tail, end) if (arc == under_arc and end == "head") else (arc, end)
                for arc, end in v.slots
            )
        )
        for v in d.vertices
    ]
    crossings.append(Crossing("+", over_arc, under_arc, mid))
    crossings.append(Crossing("-", over_arc, mid, tail))
    return GraphDiagram(arcs, tuple(crossings), tuple(vertices))


def relabel(d: GraphDiagram, mapping: dict[str, str]) -> GraphDiagram:
    def m(a):
        return mapping.get(a, a)

    return GraphDiagram(
        tuple(m(a) for a in d.arcs),
        tuple(
            Crossing(c.sign, m(c.over), m(c.under_in), m(c.under_out))
            for c in d.crossings
        ),
        tuple(
            Vertex(tuple((m(a), e) for a, e in v.slots)) for v in d.vertices
        ),
    )
