"""Foam movies: stills, elementary events, coloring propagation, and the
triple-point state sum.

A movie is an initial still plus a sequence of elementary events, each a
local rewrite of the current still.  Stills are combinatorial diagrams that
additionally track the order of over-passages along every arc, which is what
makes locality checks for R2/R3/IV moves meaningful.  Colorings are seeded
on a designated still and propagated both ways; every other still's colors
are forced, and failures are reported with the offending event index.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from foamcocycle.algebra import GFamilyTable
from foamcocycle.diagrams import Crossing, GraphDiagram, Vertex


class MovieError(Exception):
    def __init__(self, message: str, event_index: int | None = None):
        if event_index is not None:
            message = f"event {event_index}: {message}"
        super().__init__(message)
        self.event_index = event_index


@dataclass
class Still:
    """Arcs with ordered over-passages, crossings, and trivalent vertices."""

    arcs: dict[str, list[str]] = field(default_factory=dict)
    crossings: dict[str, Crossing] = field(default_factory=dict)
    vertices: dict[str, tuple[tuple[str, str], ...]] = field(default_factory=dict)

    def copy(self) -> "Still":
        return Still(
            {a: list(p) for a, p in self.arcs.items()},
            dict(self.crossings),
            dict(self.vertices),
        )

    def end_consumers(self) -> dict[tuple[str, str], tuple[str, str]]:
        used: dict[tuple[str, str], tuple[str, str]] = {}
        for cid, c in self.crossings.items():
            used[(c.under_in, "head")] = ("crossing", cid)
            used[(c.under_out, "tail")] = ("crossing", cid)
        for vid, slots in self.vertices.items():
            for arc, end in slots:
                used[(arc, end)] = ("vertex", vid)
        return used

    def check(self) -> None:
        used: dict[tuple[str, str], str] = {}

        def consume(arc, end, where):
            if arc not in self.arcs:
                raise MovieError(f"{where} references unknown arc {arc!r}")
            if (arc, end) in used:
                raise MovieError(f"arc end {arc}:{end} doubly consumed")
            used[(arc, end)] = where

        for cid, c in self.crossings.items():
            if c.over not in self.arcs:
                raise MovieError(f"crossing {cid} over unknown arc")
            if cid not in self.arcs[c.over]:
                raise MovieError(f"crossing {cid} missing from over-arc passages")
            consume(c.under_in, "head", cid)
            consume(c.under_out, "tail", cid)
        for vid, slots in self.vertices.items():
            if len(slots) != 3:
                raise MovieError(f"vertex {vid} needs 3 slots")
            for arc, end in slots:
                consume(arc, end, vid)
        for arc, passages in self.arcs.items():
            h, t = (arc, "head") in used, (arc, "tail") in used
            if h != t:
                raise MovieError(f"arc {arc} has a dangling end")
            for cid in passages:
                c = self.crossings.get(cid)
                if c is None or c.over != arc:
                    raise MovieError(f"arc {arc} lists stale passage {cid}")

    def is_empty(self) -> bool:
        return not self.arcs

    def edge_of(self, arc: str) -> str:
        parent = {a: a for a in self.arcs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for c in self.crossings.values():
            ra, rb = find(c.under_in), find(c.under_out)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        return find(arc)

    def edge_map(self) -> dict[str, str]:
        parent = {a: a for a in self.arcs}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for c in self.crossings.values():
            ra, rb = find(c.under_in), find(c.under_out)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        return {a: find(a) for a in self.arcs}

    def as_graph_diagram(self) -> GraphDiagram:
        return GraphDiagram(
            tuple(sorted(self.arcs)),
            tuple(self.crossings[c] for c in sorted(self.crossings)),
            tuple(Vertex(self.vertices[v]) for v in sorted(self.vertices)),
        )

    def from_graph(d: GraphDiagram) -> "Still":
        still = Still()
        for a in d.arcs:
            still.arcs[a] = []
        for i, c in enumerate(d.crossings):
            cid = f"c{i}"
            still.crossings[cid] = c
            still.arcs[c.over].append(cid)
        for i, v in enumerate(d.vertices):
            still.vertices[f"v{i}"] = v.slots
        return still


@dataclass
class EventEffect:
    """Bookkeeping one event leaves behind for propagation and collection."""

    kind: str
    created: dict[str, str | None] = field(default_factory=dict)  # new -> parent
    removed: set[str] = field(default_factory=set)
    dirty: set[str] = field(default_factory=set)
    renamed: dict[str, str] = field(default_factory=dict)  # new -> old, color kept
    sheet_joins: list[tuple[str, str]] = field(default_factory=list)
    r3: dict | None = None
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Event:
    kind: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return " ".join((self.kind,) + self.args)


def _fresh(still: Still, *names: str) -> None:
    for n in names:
        if n in still.arcs or n in still.crossings or n in still.vertices:
            raise MovieError(f"name {n!r} already in use")


def _retarget_head(still: Still, old: str, new: str) -> None:
    """Whatever consumed old's head now consumes new's head."""
    for cid, c in still.crossings.items():
        if c.under_in == old:
            still.crossings[cid] = replace(c, under_in=new)
            return
    for vid, slots in still.vertices.items():
        for i, (arc, end) in enumerate(slots):
            if arc == old and end == "head":
                still.vertices[vid] = (
                    slots[:i] + ((new, "head"),) + slots[i + 1 :]
                )
                return


def _retarget_tail(still: Still, old: str, new: str) -> None:
    for cid, c in still.crossings.items():
        if c.under_out == old:
            still.crossings[cid] = replace(c, under_out=new)
            return
    for vid, slots in still.vertices.items():
        for i, (arc, end) in enumerate(slots):
            if arc == old and end == "tail":
                still.vertices[vid] = (
                    slots[:i] + ((new, "tail"),) + slots[i + 1 :]
                )
                return


def _reassign_passages(still: Still, cids: list[str], new_over: str) -> None:
    for cid in cids:
        still.crossings[cid] = replace(still.crossings[cid], over=new_over)


def _apply_birth(still: Still, args) -> EventEffect:
    (name,) = args
    _fresh(still, name)
    still.arcs[name] = []
    return EventEffect("birth", created={name: None})


def _apply_death(still: Still, args) -> EventEffect:
    (name,) = args
    if name not in still.arcs:
        raise MovieError(f"death of unknown arc {name!r}")
    if still.arcs[name]:
        raise MovieError(f"death of arc {name!r} with passages")
    consumers = still.end_consumers()
    if (name, "head") in consumers or (name, "tail") in consumers:
        raise MovieError(f"death of non-circle arc {name!r}")
    for c in still.crossings.values():
        if name in (c.under_in, c.under_out, c.over):
            raise MovieError(f"death of arc {name!r} still crossed")
    del still.arcs[name]
    return EventEffect("death", removed={name})


def _apply_saddle(still: Still, args) -> EventEffect:
    arc_a, i_s, arc_b, j_s, name_c, name_d = args
    i, j = int(i_s), int(j_s)
    if arc_a == arc_b:
        raise MovieError("self-saddle not supported; use distinct arcs")
    for arc in (arc_a, arc_b):
        if arc not in still.arcs:
            raise MovieError(f"saddle on unknown arc {arc!r}")
    _fresh(still, name_c, name_d)
    pa, pb = still.arcs[arc_a], still.arcs[arc_b]
    if not (0 <= i <= len(pa)) or not (0 <= j <= len(pb)):
        raise MovieError("saddle cut position out of range")
    # C = tail of A + head of B, D = tail of B + head of A
    still.arcs[name_c] = pa[:i] + pb[j:]
    still.arcs[name_d] = pb[:j] + pa[i:]
    _reassign_passages(still, pa[:i] + pb[j:], name_c)
    _reassign_passages(still, pb[:j] + pa[i:], name_d)
    del still.arcs[arc_a], still.arcs[arc_b]
    _retarget_tail(still, arc_a, name_c)
    _retarget_head(still, arc_b, name_c)
    _retarget_tail(still, arc_b, name_d)
    _retarget_head(still, arc_a, name_d)
    return EventEffect(
        "saddle",
        created={name_c: arc_a, name_d: arc_b},
        removed={arc_a, arc_b},
        renamed={name_c: arc_a, name_d: arc_b},
        sheet_joins=[(arc_a, arc_b)],
        detail={"pair": (arc_a, arc_b)},
    )


def _apply_yb(still: Still, args) -> EventEffect:
    arc, i_s, j_s, v, w, edge_arc, p1, p2, p3 = args
    i, j = int(i_s), int(j_s)
    if arc not in still.arcs:
        raise MovieError(f"yb on unknown arc {arc!r}")
    passages = still.arcs[arc]
    if not (0 <= i <= j <= len(passages)):
        raise MovieError("yb cut positions out of range")
    consumers = still.end_consumers()
    is_circle = (arc, "head") not in consumers and (arc, "tail") not in consumers
    if is_circle:
        # two cut points split a circle into two pieces; p3 is a placeholder
        if p3 != "-":
            raise MovieError("yb on a circle takes '-' for the third piece")
        _fresh(still, v, w, edge_arc, p1, p2)
        still.arcs[p1] = passages[i:j]
        still.arcs[p2] = passages[j:] + passages[:i]
        for name in (p1, p2):
            _reassign_passages(still, still.arcs[name], name)
        del still.arcs[arc]
        still.arcs[edge_arc] = []
        still.vertices[v] = ((p2, "head"), (p1, "tail"), (edge_arc, "tail"))
        still.vertices[w] = ((p1, "head"), (p2, "tail"), (edge_arc, "head"))
        return EventEffect(
            "yb",
            # p1 is the band between the new vertices: a new face
            created={p1: None, p2: arc, edge_arc: None},
            removed={arc},
            renamed={p2: arc},
            detail={"membrane": edge_arc, "vertices": (v, w), "band": p1},
        )
    _fresh(still, v, w, edge_arc, p1, p2, p3)
    still.arcs[p1] = passages[:i]
    still.arcs[p2] = passages[i:j]
    still.arcs[p3] = passages[j:]
    for name in (p1, p2, p3):
        _reassign_passages(still, still.arcs[name], name)
    del still.arcs[arc]
    still.arcs[edge_arc] = []
    _retarget_tail(still, arc, p1)
    _retarget_head(still, arc, p3)
    still.vertices[v] = ((p1, "head"), (p2, "tail"), (edge_arc, "tail"))
    still.vertices[w] = ((p2, "head"), (p3, "tail"), (edge_arc, "head"))
    return EventEffect(
        "yb",
        # p2 is the band between the new vertices: a new face
        created={p1: arc, p2: None, p3: arc, edge_arc: None},
        removed={arc},
        renamed={p1: arc, p3: arc},
        detail={"membrane": edge_arc, "vertices": (v, w), "band": p2},
    )


def _apply_ymerge(still: Still, args) -> EventEffect:
    arc_a, i_s, arc_b, j_s, v, w, edge_arc, a1, a2, b1, b2 = args
    i, j = int(i_s), int(j_s)
    if arc_a == arc_b:
        raise MovieError("ymerge needs two distinct arcs (use yb on one arc)")
    for arc in (arc_a, arc_b):
        if arc not in still.arcs:
            raise MovieError(f"ymerge on unknown arc {arc!r}")
    _fresh(still, v, w, edge_arc, a1, a2, b1, b2)
    pa, pb = still.arcs[arc_a], still.arcs[arc_b]
    if not (0 <= i <= len(pa)) or not (0 <= j <= len(pb)):
        raise MovieError("ymerge cut positions out of range")
    still.arcs[a1], still.arcs[a2] = pa[:i], pa[i:]
    still.arcs[b1], still.arcs[b2] = pb[:j], pb[j:]
    for name in (a1, a2, b1, b2):
        _reassign_passages(still, still.arcs[name], name)
    del still.arcs[arc_a], still.arcs[arc_b]
    still.arcs[edge_arc] = []
    _retarget_tail(still, arc_a, a1)
    _retarget_head(still, arc_a, a2)
    _retarget_tail(still, arc_b, b1)
    _retarget_head(still, arc_b, b2)
    still.vertices[v] = ((a1, "head"), (b1, "head"), (edge_arc, "tail"))
    still.vertices[w] = ((a2, "tail"), (b2, "tail"), (edge_arc, "head"))
    return EventEffect(
        "ymerge",
        created={a1: arc_a, a2: arc_a, b1: arc_b, b2: arc_b, edge_arc: None},
        removed={arc_a, arc_b},
        renamed={a1: arc_a, a2: arc_a, b1: arc_b, b2: arc_b},
        detail={"membrane": edge_arc, "vertices": (v, w), "hosts": (arc_a, arc_b)},
    )


def _merge_arcs(still: Still, first: str, second: str, name: str) -> None:
    """Join first's head to second's tail into one arc called `name`."""
    passages = still.arcs[first] + still.arcs[second]
    del still.arcs[first]
    del still.arcs[second]
    still.arcs[name] = passages
    _reassign_passages(still, passages, name)
    _retarget_tail(still, first, name)
    _retarget_head(still, second, name)


def _apply_yd(still: Still, args) -> EventEffect:
    """Membrane death: the edge and the band arc between its two vertices
    shrink away, and the two outer arcs join into one."""
    edge_arc, inside, merged = args
    consumers = still.end_consumers()
    tail_c = consumers.get((edge_arc, "tail"))
    head_c = consumers.get((edge_arc, "head"))
    if edge_arc not in still.arcs or still.arcs[edge_arc]:
        raise MovieError(f"yd needs a passage-free edge arc, got {edge_arc!r}")
    if (
        tail_c is None
        or head_c is None
        or tail_c[0] != "vertex"
        or head_c[0] != "vertex"
        or tail_c[1] == head_c[1]
    ):
        raise MovieError("yd edge must join two distinct vertices")
    v, w = tail_c[1], head_c[1]
    if inside not in still.arcs or still.arcs[inside]:
        raise MovieError("yd band arc must exist and carry no passages")
    ends = {
        consumers.get((inside, "tail")),
        consumers.get((inside, "head")),
    }
    if ends != {("vertex", v), ("vertex", w)}:
        raise MovieError("yd band arc must run between the edge's two vertices")
    outer = {}
    for vid in (v, w):
        rest = [
            (a, e)
            for a, e in still.vertices[vid]
            if a not in (edge_arc, inside)
        ]
        if len(rest) != 1:
            raise MovieError("yd vertex slots do not resolve")
        outer[vid] = rest[0]
    (oa, ea), (ob, eb) = outer[v], outer[w]
    del still.vertices[v], still.vertices[w]
    del still.arcs[edge_arc], still.arcs[inside]
    _fresh(still, merged)
    removed = {edge_arc, inside, oa, ob}
    if oa == ob:
        still.arcs[merged] = still.arcs.pop(oa)
        _reassign_passages(still, still.arcs[merged], merged)
        joins = []
    elif ea == "head" and eb == "tail":
        _merge_arcs(still, oa, ob, merged)
        joins = [(oa, ob)]
    elif ea == "tail" and eb == "head":
        _merge_arcs(still, ob, oa, merged)
        joins = [(oa, ob)]
    else:
        raise MovieError("yd outer arcs have incompatible orientations")
    return EventEffect(
        "yd",
        created={merged: oa},
        removed=removed,
        renamed={merged: oa},
        sheet_joins=joins,
    )


def _apply_r2p(still: Still, args) -> EventEffect:
    over, i_s, under, k_s, c1, c2, mid, tail, sign = args
    i, k = int(i_s), int(k_s)
    if over == under:
        raise MovieError("r2+ needs distinct over and under arcs")
    for arc in (over, under):
        if arc not in still.arcs:
            raise MovieError(f"r2+ on unknown arc {arc!r}")
    if sign not in "+-":
        raise MovieError("r2+ sign must be + or -")
    _fresh(still, c1, c2, mid, tail)
    if not (0 <= i <= len(still.arcs[over])) or not (0 <= k <= len(still.arcs[under])):
        raise MovieError("r2+ position out of range")
    other = "-" if sign == "+" else "+"
    consumers = still.end_consumers()
    if (under, "head") not in consumers and (under, "tail") not in consumers:
        # closed circle: the complement of the dip is one arc from c2 to c1
        passages = still.arcs.pop(under)
        still.arcs[tail] = passages[k:] + passages[:k]
        still.arcs[mid] = []
        _reassign_passages(still, still.arcs[tail], tail)
        still.crossings[c1] = Crossing(sign, over, tail, mid)
        still.crossings[c2] = Crossing(other, over, mid, tail)
        still.arcs[over][i:i] = [c1, c2]
        return EventEffect(
            "r2+",
            created={mid: under, tail: under},
            removed={under},
            dirty={mid},
            renamed={tail: under},
            detail={"crossings": (c1, c2)},
        )
    moved = still.arcs[under][k:]
    still.arcs[under] = still.arcs[under][:k]
    still.arcs[mid] = []
    still.arcs[tail] = moved
    _reassign_passages(still, moved, tail)
    _retarget_head(still, under, tail)
    still.crossings[c1] = Crossing(sign, over, under, mid)
    still.crossings[c2] = Crossing(other, over, mid, tail)
    still.arcs[over][i:i] = [c1, c2]
    return EventEffect(
        "r2+",
        created={mid: under, tail: under},
        dirty={mid, tail},
        detail={"crossings": (c1, c2)},
    )


def _bigon(still: Still, c1: str, c2: str):
    """Return (first, second) so first.under_out == second.under_in."""
    a, b = still.crossings[c1], still.crossings[c2]
    if a.under_out == b.under_in:
        return c1, c2
    if b.under_out == a.under_in:
        return c2, c1
    raise MovieError("crossings do not share a middle under arc")


def _apply_r2m(still: Still, args) -> EventEffect:
    c1, c2, merged = args
    for c in (c1, c2):
        if c not in still.crossings:
            raise MovieError(f"r2- on unknown crossing {c!r}")
    ca, cb = still.crossings[c1], still.crossings[c2]
    if ca.over != cb.over:
        raise MovieError("r2- crossings have different over arcs")
    over = ca.over
    passages = still.arcs[over]
    ia, ib = passages.index(c1), passages.index(c2)
    if abs(ia - ib) != 1:
        raise MovieError("r2- crossings not adjacent on the over arc")
    if {ca.sign, cb.sign} != {"+", "-"}:
        raise MovieError("r2- needs opposite crossing signs")
    first_id, second_id = _bigon(still, c1, c2)
    first, second = still.crossings[first_id], still.crossings[second_id]
    mid = first.under_out
    if still.arcs[mid]:
        raise MovieError("r2- middle arc carries passages")
    head_arc = second.under_out
    tail_arc = first.under_in
    del still.crossings[c1], still.crossings[c2]
    still.arcs[over] = [p for p in passages if p not in (c1, c2)]
    del still.arcs[mid]
    _fresh(still, merged)
    if tail_arc == head_arc:
        # the strand closes back into a circle
        still.arcs[merged] = still.arcs.pop(tail_arc)
        _reassign_passages(still, still.arcs[merged], merged)
    else:
        _merge_arcs(still, tail_arc, head_arc, merged)
    return EventEffect(
        "r2-",
        created={merged: tail_arc},
        removed={tail_arc, mid, head_arc},
        renamed={merged: tail_arc},
    )


def _apply_r3(still: Still, args) -> EventEffect:
    ctm, ctb, cmb = args[0], args[1], args[2]
    flags = tuple(int(x) for x in args[3:]) if len(args) > 3 else (0, 0, 0, 0)
    if len(flags) != 4:
        raise MovieError("r3 takes zero or four flag bits")
    for c in (ctm, ctb, cmb):
        if c not in still.crossings:
            raise MovieError(f"r3 on unknown crossing {c!r}")
    tm, tb, mb = still.crossings[ctm], still.crossings[ctb], still.crossings[cmb]
    if tm.over != tb.over:
        raise MovieError("r3: top strand must over both ctm and ctb")
    t = tm.over
    tpass = still.arcs[t]
    itm, itb = tpass.index(ctm), tpass.index(ctb)
    if abs(itm - itb) != 1:
        raise MovieError("r3: ctm and ctb not adjacent on the top strand")
    m_in, m_out = tm.under_in, tm.under_out
    if mb.over == m_out:
        m_side = "out"
        if still.arcs[m_out] and still.arcs[m_out][0] != cmb:
            raise MovieError("r3: cmb not vertex-adjacent on middle out")
        if not still.arcs[m_out]:
            raise MovieError("r3: cmb missing from middle strand")
    elif mb.over == m_in:
        m_side = "in"
        if still.arcs[m_in] and still.arcs[m_in][-1] != cmb:
            raise MovieError("r3: cmb not adjacent on middle in")
        if not still.arcs[m_in]:
            raise MovieError("r3: cmb missing from middle strand")
    else:
        raise MovieError("r3: middle strand does not over the bottom")
    if tb.under_out == mb.under_in:
        order = "t-first"
        b_in, b_mid, b_out = tb.under_in, tb.under_out, mb.under_out
    elif mb.under_out == tb.under_in:
        order = "m-first"
        b_in, b_mid, b_out = mb.under_in, mb.under_out, tb.under_out
    else:
        raise MovieError("r3: bottom strand pieces not adjacent")
    if still.arcs[b_mid]:
        raise MovieError("r3: bottom middle arc carries passages")

    before = {
        "t": t,
        "m_in": m_in,
        "m_out": m_out,
        "m_side": m_side,
        "order": order,
        "b_in": b_in,
        "b_mid": b_mid,
        "b_out": b_out,
        "signs": (tm.sign, tb.sign, mb.sign),
        "flags": flags,
        "crossings": (ctm, ctb, cmb),
    }

    # flip the triangle: swap passage order on t, move cmb across ctm on the
    # middle strand, reverse the bottom strand's crossing order
    still.arcs[t][itm], still.arcs[t][itb] = (
        still.arcs[t][itb],
        still.arcs[t][itm],
    )
    if m_side == "out":
        still.arcs[m_out].remove(cmb)
        still.arcs[m_in].append(cmb)
        still.crossings[cmb] = replace(still.crossings[cmb], over=m_in)
        new_m_side = "in"
    else:
        still.arcs[m_in].remove(cmb)
        still.arcs[m_out].insert(0, cmb)
        still.crossings[cmb] = replace(still.crossings[cmb], over=m_out)
        new_m_side = "out"
    if order == "t-first":
        still.crossings[cmb] = replace(
            still.crossings[cmb], under_in=b_in, under_out=b_mid
        )
        still.crossings[ctb] = replace(
            still.crossings[ctb], under_in=b_mid, under_out=b_out
        )
    else:
        still.crossings[ctb] = replace(
            still.crossings[ctb], under_in=b_in, under_out=b_mid
        )
        still.crossings[cmb] = replace(
            still.crossings[cmb], under_in=b_mid, under_out=b_out
        )
    return EventEffect("r3", dirty={b_mid}, r3=before, detail={"new_m_side": new_m_side})


def _apply_r1p(still: Still, args) -> EventEffect:
    arc, i_s, side, sign, head_piece, cid = args
    i = int(i_s)
    if arc not in still.arcs:
        raise MovieError(f"r1+ on unknown arc {arc!r}")
    if side not in ("a", "b") or sign not in "+-":
        raise MovieError("r1+ side must be a|b and sign +|-")
    _fresh(still, head_piece, cid)
    passages = still.arcs[arc]
    if not 0 <= i <= len(passages):
        raise MovieError("r1+ position out of range")
    still.arcs[head_piece] = passages[i:]
    still.arcs[arc] = passages[:i]
    _reassign_passages(still, still.arcs[head_piece], head_piece)
    _retarget_head(still, arc, head_piece)
    over = arc if side == "a" else head_piece
    still.crossings[cid] = Crossing(sign, over, arc, head_piece)
    if side == "a":
        still.arcs[arc].append(cid)
    else:
        still.arcs[head_piece].insert(0, cid)
    return EventEffect(
        "r1+", created={head_piece: arc}, dirty={head_piece}, detail={"crossing": cid}
    )


def _apply_r1m(still: Still, args) -> EventEffect:
    cid, merged = args
    if cid not in still.crossings:
        raise MovieError(f"r1- on unknown crossing {cid!r}")
    c = still.crossings[cid]
    if c.over not in (c.under_in, c.under_out):
        raise MovieError("r1- crossing is not a kink")
    if c.over == c.under_in:
        if still.arcs[c.under_in] and still.arcs[c.under_in][-1] != cid:
            raise MovieError("r1- kink not tight")
    else:
        if still.arcs[c.under_out] and still.arcs[c.under_out][0] != cid:
            raise MovieError("r1- kink not tight")
    del still.crossings[cid]
    for arc in (c.under_in, c.under_out):
        still.arcs[arc] = [p for p in still.arcs[arc] if p != cid]
    _fresh(still, merged)
    _merge_arcs(still, c.under_in, c.under_out, merged)
    return EventEffect(
        "r1-",
        created={merged: c.under_in},
        removed={c.under_in, c.under_out},
        dirty={merged},
    )


def _vertex_other_arc(still: Still, vid: str, exclude: set[str]) -> tuple[str, str]:
    rest = [(a, e) for a, e in still.vertices[vid] if a not in exclude]
    if len(rest) != 1:
        raise MovieError("vertex slot resolution failed")
    return rest[0]


def _apply_iv2(still: Still, args) -> EventEffect:
    """Strand slides past a vertex: two crossings become one."""
    strand, vid, c1, c2, c3, sign, n1, n2, n3 = args
    if vid not in still.vertices:
        raise MovieError(f"iv2 unknown vertex {vid!r}")
    for c in (c1, c2):
        if c not in still.crossings:
            raise MovieError(f"iv2 unknown crossing {c!r}")
    _fresh(still, c3)
    ca, cb = still.crossings[c1], still.crossings[c2]
    over = ca.over == strand
    if over != (cb.over == strand):
        raise MovieError("iv2 crossings disagree on over/under")
    slot_arcs = [a for a, _ in still.vertices[vid]]
    if over:
        # strand passes over two vertex-adjacent arcs; their near pieces are
        # the under pieces consumed by the vertex
        passages = still.arcs[strand]
        i1, i2 = passages.index(c1), passages.index(c2)
        if abs(i1 - i2) != 1:
            raise MovieError("iv2 crossings not adjacent on the strand")
        merged = {}
        near_arcs = set()
        for cid, new_name in ((c1, n1), (c2, n2)):
            c = still.crossings[cid]
            if c.under_in in slot_arcs:
                near, far, near_end = c.under_in, c.under_out, "head"
            elif c.under_out in slot_arcs:
                near, far, near_end = c.under_out, c.under_in, "tail"
            else:
                raise MovieError("iv2 crossing not at the vertex")
            if still.arcs[near]:
                raise MovieError("iv2 near piece carries passages")
            near_arcs.add(near)
            merged[cid] = (near, far, near_end, new_name)
        third = _vertex_other_arc(still, vid, near_arcs)
        created, removed = {}, set()
        for cid, (near, far, near_end, new_name) in merged.items():
            _fresh(still, new_name)
            del still.crossings[cid]
            if near_end == "head":
                # near runs vertex -> crossing, far continues beyond
                _merge_arcs(still, near, far, new_name)
            else:
                _merge_arcs(still, far, near, new_name)
            created[new_name] = far
            removed.update({near, far})
        # cut the third edge near the vertex with the single new crossing
        third_arc, third_end = third
        _fresh(still, n3)
        if third_end == "tail":
            # vertex at the arc's tail; the near piece keeps the vertex slot
            still.arcs[n3] = []
            still.crossings[c3] = Crossing(sign, strand, n3, third_arc)
            still.vertices[vid] = tuple(
                (n3, "tail") if (a, e) == (third_arc, "tail") else (a, e)
                for a, e in still.vertices[vid]
            )
        else:
            still.arcs[n3] = []
            still.crossings[c3] = Crossing(sign, strand, third_arc, n3)
            still.vertices[vid] = tuple(
                (n3, "head") if (a, e) == (third_arc, "head") else (a, e)
                for a, e in still.vertices[vid]
            )
        created[n3] = third_arc
        pos = min(i1, i2)
        still.arcs[strand] = [
            p for p in still.arcs[strand] if p not in (c1, c2)
        ]
        still.arcs[strand].insert(pos, c3)
        renamed = {
            new_name: far for _near, far, _e, new_name in merged.values()
        }
        dirty = set(created) - set(renamed)
        return EventEffect("iv2", created=created, removed=removed, dirty=dirty,
                           renamed=renamed,
                           detail={"vertex": vid, "strand": strand})
    # strand passes under: it is cut twice, becomes cut once under the third
    if ca.under_out == cb.under_in:
        first, second = ca, cb
        cfirst, csecond = c1, c2
    elif cb.under_out == ca.under_in:
        first, second = cb, ca
        cfirst, csecond = c2, c1
    else:
        raise MovieError("iv2 under pieces not adjacent")
    s_a, s_mid, s_b = first.under_in, first.under_out, second.under_out
    if still.arcs[s_mid]:
        raise MovieError("iv2 middle piece carries passages")
    if first.over not in slot_arcs or second.over not in slot_arcs:
        raise MovieError("iv2 over arcs not at the vertex")
    third_arc, third_end = _vertex_other_arc(
        still, vid, {first.over, second.over}
    )
    for c, cid in ((first, cfirst), (second, csecond)):
        plist = still.arcs[c.over]
        endcons = still.end_consumers()
        if endcons.get((c.over, "tail")) == ("vertex", vid):
            if plist[0] != cid:
                raise MovieError("iv2 crossing not vertex-adjacent")
        elif endcons.get((c.over, "head")) == ("vertex", vid):
            if plist[-1] != cid:
                raise MovieError("iv2 crossing not vertex-adjacent")
        else:
            raise MovieError("iv2 over arc not consumed by the vertex")
        plist.remove(cid)
    del still.crossings[cfirst], still.crossings[csecond]
    _fresh(still, n1)
    # s_mid disappears; s_a and the renamed s_b flank the new crossing
    del still.arcs[s_mid]
    still.arcs[n1] = still.arcs.pop(s_b)
    _reassign_passages(still, still.arcs[n1], n1)
    _retarget_head(still, s_b, n1)
    still.crossings[c3] = Crossing(sign, third_arc, s_a, n1)
    endcons = still.end_consumers()
    if endcons.get((third_arc, "tail")) == ("vertex", vid):
        still.arcs[third_arc].insert(0, c3)
    else:
        still.arcs[third_arc].append(c3)
    return EventEffect(
        "iv2",
        created={n1: s_b},
        removed={s_mid, s_b},
        dirty={n1},
        detail={"vertex": vid, "strand": strand},
    )


def _apply_twistv(still: Still, args) -> EventEffect:
    (vid,) = args
    if vid not in still.vertices:
        raise MovieError(f"twist-vertex on unknown vertex {vid!r}")
    return EventEffect("twistv", detail={"vertex": vid})




def _apply_flip(still: Still, args) -> EventEffect:
    """Reverse the orientation of a whole edge (under-glued arc chain).

    Pure presentation bookkeeping: passages reverse and under slots swap.
    Exact for involutory families, where x <| y twice returns x.
    """
    (arc,) = args
    if arc not in still.arcs:
        raise MovieError(f"flip of unknown arc {arc!r}")
    edge = still.edge_of(arc)
    members = {a for a in still.arcs if still.edge_of(a) == edge}
    for a in members:
        still.arcs[a] = list(reversed(still.arcs[a]))
    for cid, c in still.crossings.items():
        if c.under_in in members or c.under_out in members:
            if not (c.under_in in members and c.under_out in members):
                raise MovieError("flip would split an under strand")
            still.crossings[cid] = replace(
                c, under_in=c.under_out, under_out=c.under_in
            )
    for vid, slots in still.vertices.items():
        new = []
        for a, e in slots:
            if a in members:
                new.append((a, "tail" if e == "head" else "head"))
            else:
                new.append((a, e))
        still.vertices[vid] = tuple(new)
    return EventEffect("flip", detail={"edge": sorted(members)})


def _apply_r2s(still: Still, args) -> EventEffect:
    """Self R2: a closed circle dips under itself."""
    arc, k_s, i_s, c1, c2, mid, wrap, sign = args
    k, i = int(k_s), int(i_s)
    if arc not in still.arcs:
        raise MovieError(f"r2s on unknown arc {arc!r}")
    consumers = still.end_consumers()
    if (arc, "head") in consumers or (arc, "tail") in consumers:
        raise MovieError("r2s needs a closed circle")
    if sign not in "+-":
        raise MovieError("r2s sign must be + or -")
    _fresh(still, c1, c2, mid, wrap)
    passages = still.arcs.pop(arc)
    if not 0 <= k <= len(passages):
        raise MovieError("r2s cut position out of range")
    rotated = passages[k:] + passages[:k]
    if not 0 <= i <= len(rotated):
        raise MovieError("r2s over position out of range")
    other = "-" if sign == "+" else "+"
    still.arcs[wrap] = rotated[:i] + [c1, c2] + rotated[i:]
    still.arcs[mid] = []
    _reassign_passages(still, rotated, wrap)
    still.crossings[c1] = Crossing(sign, wrap, wrap, mid)
    still.crossings[c2] = Crossing(other, wrap, mid, wrap)
    return EventEffect(
        "r2s",
        created={mid: arc, wrap: arc},
        removed={arc},
        dirty={mid},
        renamed={wrap: arc},
        detail={"crossings": (c1, c2)},
    )




_APPLIERS = {
    "birth": (_apply_birth, 1),
    "death": (_apply_death, 1),
    "saddle": (_apply_saddle, 6),
    "yb": (_apply_yb, 9),
    "ymerge": (_apply_ymerge, 11),
    "yd": (_apply_yd, 3),
    "r2+": (_apply_r2p, 9),
    "r2-": (_apply_r2m, 3),
    "r3": (_apply_r3, None),
    "r1+": (_apply_r1p, 6),
    "r1-": (_apply_r1m, 2),
    "iv2": (_apply_iv2, 9),
    "twistv": (_apply_twistv, 1),
    "flip": (_apply_flip, 1),
    "r2s": (_apply_r2s, 8),
}


def apply_event(still: Still, ev: Event, index: int | None = None):
    if ev.kind not in _APPLIERS:
        raise MovieError(f"unknown event kind {ev.kind!r}", index)
    fn, arity = _APPLIERS[ev.kind]
    if arity is not None and len(ev.args) != arity:
        raise MovieError(
            f"{ev.kind} takes {arity} arguments, got {len(ev.args)}", index
        )
    out = still.copy()
    try:
        effect = fn(out, ev.args)
        out.check()
    except MovieError as exc:
        if exc.event_index is None:
            raise MovieError(str(exc), index) from None
        raise
    return out, effect


@dataclass
class Movie:
    initial: Still
    events: list[Event]
    seed_index: int = 0

    def replay(self):
        """All stills and event effects; raises MovieError on illegality."""
        stills = [self.initial.copy()]
        effects = []
        for i, ev in enumerate(self.events):
            nxt, effect = apply_event(stills[-1], ev, i)
            stills.append(nxt)
            effects.append(effect)
        return stills, effects


def parse_movie(text: str, resolve=None) -> Movie:
    """Parse the line-based movie format.

    `resolve` maps a path token from an `initial` line to file text; bundled
    movies start from the empty still and do not need it.
    """
    initial = Still()
    events: list[Event] = []
    seed = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "movie":
            continue
        if head == "initial":
            if resolve is None:
                raise MovieError(f"line {lineno}: no resolver for initial still")
            from foamcocycle.diagrams import parse_graph_diagram

            initial = Still.from_graph(parse_graph_diagram(resolve(parts[1])))
            continue
        if head == "seed":
            try:
                seed = int(parts[1])
            except (IndexError, ValueError):
                raise MovieError(f"line {lineno}: bad seed index") from None
            continue
        if head not in _APPLIERS:
            raise MovieError(f"line {lineno}: unknown event {head!r}")
        events.append(Event(head, tuple(parts[1:])))
    return Movie(initial, events, seed)


def serialize_movie(m: Movie) -> str:
    lines = ["movie", f"seed {m.seed_index}"]
    lines.extend(str(ev) for ev in m.events)
    return "\n".join(lines) + "\n"


def validate_movie(m: Movie):
    """Replay every event; returns (stills, effects) on success."""
    stills, effects = m.replay()
    return stills, effects


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        while p != self.parent[p]:
            self.parent[p] = self.parent[self.parent[p]]
            p = self.parent[p]
        self.parent[x] = p
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def build_sheets(stills, effects):
    """Union-find of (still index, edge) keys across event transport.

    A class is one broken sheet of the foam: transverse-orientation bits and
    group elements live here.
    """
    uf = _UnionFind()
    edge_maps = [s.edge_map() for s in stills]
    for k, effect in enumerate(effects):
        em0, em1 = edge_maps[k], edge_maps[k + 1]
        for arc in stills[k + 1].arcs:
            if arc in stills[k].arcs:
                uf.union((k, em0[arc]), (k + 1, em1[arc]))
        for new, parent in effect.created.items():
            if parent is not None and parent in stills[k].arcs:
                uf.union((k, em0[parent]), (k + 1, em1[new]))
        for a, b in effect.sheet_joins:
            uf.union((k, em0[a]), (k, em0[b]))
    return uf, edge_maps


@dataclass
class FoamColoring:
    """Colors of every arc in every still plus per-sheet orientation bits."""

    colors: list[dict[str, tuple[int, int]]]
    sheet_bits: dict
    sheets: _UnionFind
    edge_maps: list[dict[str, str]]

    def bit_at(self, k: int, arc: str) -> int:
        return self.sheet_bits[self.sheets.find((k, self.edge_maps[k][arc]))]


def _solve_still(still: Still, family: GFamilyTable, known: dict, where: int):
    """Fill in arc colors forced by crossing and vertex rules; verify all."""
    group = family.group
    colors = dict(known)
    changed = True
    while changed:
        changed = False
        for c in still.crossings.values():
            ci, co, cu = (
                colors.get(c.under_in),
                colors.get(c.over),
                colors.get(c.under_out),
            )
            if ci is not None and co is not None and cu is None:
                x = family.act(ci[0], co[1], co[0])
                g = group.mul[group.mul[group.inverse(co[1])][ci[1]]][co[1]]
                colors[c.under_out] = (x, g)
                changed = True
            elif cu is not None and co is not None and ci is None:
                x = family.act_inv(cu[0], co[1], co[0])
                g = group.mul[group.mul[co[1]][cu[1]]][group.inverse(co[1])]
                colors[c.under_in] = (x, g)
                changed = True
        for slots in still.vertices.values():
            xs = [colors[a][0] for a, _ in slots if a in colors]
            if xs and any(a not in colors for a, _ in slots):
                # carrier color is shared; group element may stay open until
                # the product rule pins it
                known_g = [(a, e) for a, e in slots if a in colors]
                unknown = [(a, e) for a, e in slots if a not in colors]
                if len(unknown) == 1 and len(known_g) == 2:
                    acc = group.identity
                    (ua, ue) = unknown[0]
                    others = {}
                    # solve prod g_i^{eps_i} = e for the missing slot
                    idx = slots.index(unknown[0])
                    pre, post = slots[:idx], slots[idx + 1 :]
                    lhs = group.identity
                    for a, e in pre:
                        g = colors[a][1]
                        lhs = group.mul[lhs][g if e == "tail" else group.inverse(g)]
                    rhs = group.identity
                    for a, e in post:
                        g = colors[a][1]
                        rhs = group.mul[rhs][g if e == "tail" else group.inverse(g)]
                    # lhs * u^eps * rhs = identity
                    mid = group.mul[group.inverse(rhs)][group.inverse(lhs)]
                    g_u = mid if ue == "tail" else group.inverse(mid)
                    colors[ua] = (xs[0], g_u)
                    changed = True
    missing = [a for a in still.arcs if a not in colors]
    if missing:
        raise MovieError(
            f"propagation underdetermined for arcs {sorted(missing)}", where
        )
    _verify_still(still, family, colors, where)
    return colors


def _verify_still(still: Still, family: GFamilyTable, colors: dict, where: int):
    group = family.group
    for cid, c in still.crossings.items():
        xi, gi = colors[c.under_in]
        xo, go = colors[c.over]
        xu, gu = colors[c.under_out]
        if family.act(xi, go, xo) != xu or (
            group.mul[group.mul[group.inverse(go)][gi]][go] != gu
        ):
            raise MovieError(f"crossing rule fails at {cid}", where)
    for vid, slots in still.vertices.items():
        if len({colors[a][0] for a, _ in slots}) != 1:
            raise MovieError(f"vertex colors disagree at {vid}", where)
        acc = group.identity
        for a, e in slots:
            g = colors[a][1]
            acc = group.mul[acc][g if e == "tail" else group.inverse(g)]
        if acc != group.identity:
            raise MovieError(f"vertex flow fails at {vid}", where)


def propagate_coloring(movie: Movie, family: GFamilyTable, seed) -> FoamColoring:
    """Extend a coloring of the designated still across the whole movie.

    `seed` is a diagrams.Coloring of the designated still.  Colors propagate
    forward and backward; any event whose new arcs are not forced, or whose
    still ends up inconsistent, is reported by index.
    """
    stills, effects = movie.replay()
    k0 = movie.seed_index
    if not 0 <= k0 < len(stills):
        raise MovieError(f"seed still {k0} out of range")
    sheets, edge_maps = build_sheets(stills, effects)

    seed_colors = dict(seed.arc_colors)
    if set(seed_colors) != set(stills[k0].arcs):
        raise MovieError("seed coloring does not match the designated still")
    colors: list = [None] * len(stills)
    colors[k0] = dict(seed_colors)
    _verify_still(stills[k0], family, colors[k0], k0)

    for k in range(k0, len(effects)):
        effect = effects[k]
        nxt = stills[k + 1]
        for a, b in effect.sheet_joins:
            if colors[k][a] != colors[k][b]:
                raise MovieError(
                    f"{effect.kind} joins arcs of different color {a}/{b}", k
                )
        known = {
            a: colors[k][a]
            for a in nxt.arcs
            if a in colors[k] and a not in effect.dirty and a not in effect.created
        }
        for new, old in effect.renamed.items():
            if old in colors[k]:
                known[new] = colors[k][old]
        colors[k + 1] = _solve_still(nxt, family, known, k)
    for k in range(k0, 0, -1):
        effect = effects[k - 1]
        prev = stills[k - 1]
        known = {
            a: colors[k][a]
            for a in prev.arcs
            if a in colors[k]
            and a not in effect.dirty
            and a not in effect.created
            and a not in effect.removed
        }
        for new, old in effect.renamed.items():
            if new in colors[k] and old in prev.arcs:
                known[old] = colors[k][new]
        colors[k - 1] = _solve_still(prev, family, known, k - 1)

    # orientation bits live on sheets and are pinned by the designated still
    e = family.group.identity
    seed_bits = dict(seed.orientations)
    sheet_bits = {}
    em = edge_maps[k0]
    for edge, bit in seed_bits.items():
        sheet_bits[sheets.find((k0, edge))] = bit
    for k, still in enumerate(stills):
        for edge in set(edge_maps[k].values()):
            root = sheets.find((k, edge))
            if root not in sheet_bits:
                raise MovieError(
                    f"sheet through still {k} never meets the designated still"
                )
    fc = FoamColoring(colors, sheet_bits, sheets, edge_maps)
    # vertex normal-consistency in every still
    for k, still in enumerate(stills):
        for vid, slots in still.vertices.items():
            bits = {
                fc.bit_at(k, a) for a, _ in slots if colors[k][a][1] != e
            }
            if len(bits) > 1:
                raise MovieError(f"inconsistent normals at {vid}", k)
    return fc


@dataclass(frozen=True)
class TriplePoint:
    sign: int
    bottom: tuple[int, int]
    middle: tuple[int, int]
    top: tuple[int, int]
    event_index: int


def _r3_triple_point(family, data, colors, bit_t, bit_m, bit_b, k):
    f0, f1, f2, f3 = data["flags"]
    t_color = colors[data["t"]]
    m_in, m_out = colors[data["m_in"]], colors[data["m_out"]]
    b_in, b_mid, b_out = (
        colors[data["b_in"]],
        colors[data["b_mid"]],
        colors[data["b_out"]],
    )
    m_over_color = m_out if data["m_side"] == "out" else m_in

    def act(p, q):
        x = family.act(p[0], q[1], q[0])
        group = family.group
        g = group.mul[group.mul[group.inverse(q[1])][p[1]]][q[1]]
        return (x, g)

    m_source = m_in if (f1 ^ bit_t) == 0 else m_out
    ct = f2 ^ bit_t
    cm = f3 ^ bit_m
    if data["order"] == "t-first":
        quadrant = {
            (0, 0): b_in,
            (1, 0): b_mid,
            (1, 1): b_out,
            (0, 1): act(b_in, m_over_color),
        }
    else:
        quadrant = {
            (0, 0): b_in,
            (0, 1): b_mid,
            (1, 1): b_out,
            (1, 0): act(b_in, t_color),
        }
    p = quadrant[(ct, cm)]
    neg = sum(1 for s in data["signs"] if s == "-") & 1
    parity = f0 ^ neg ^ bit_t ^ bit_m ^ bit_b
    return TriplePoint(1 if parity == 0 else -1, p, m_source, t_color, k)


def collect_triple_points(
    movie: Movie, family: GFamilyTable, fc: FoamColoring
) -> list[TriplePoint]:
    """One signed record per R3 event, colors sampled at the source region."""
    stills, effects = movie.replay()
    out = []
    for k, effect in enumerate(effects):
        if effect.r3 is None:
            continue
        data = effect.r3
        colors = fc.colors[k]
        bit_t = fc.bit_at(k, data["t"])
        bit_m = fc.bit_at(k, data["m_in"])
        bit_b = fc.bit_at(k, data["b_in"])
        out.append(
            _r3_triple_point(family, data, colors, bit_t, bit_m, bit_b, k)
        )
    return out


def movie_trace(movie: Movie, family: GFamilyTable, fc: FoamColoring):
    """Event-level trace records, including zero-valued IV and vertex events."""
    import hashlib
    import json

    stills, effects = movie.replay()
    records = []
    triples = {tp.event_index: tp for tp in collect_triple_points(movie, family, fc)}
    for k, effect in enumerate(effects):
        digest = hashlib.sha256(
            json.dumps(
                {
                    "arcs": sorted(stills[k + 1].arcs),
                    "crossings": sorted(
                        (c.sign, c.over, c.under_in, c.under_out)
                        for c in stills[k + 1].crossings.values()
                    ),
                },
                sort_keys=True,
            ).encode()
        ).hexdigest()[:16]
        rec = {"event": k, "kind": effect.kind, "still": digest}
        if k in triples:
            tp = triples[k]
            rec["triple_point"] = {
                "sign": tp.sign,
                "bottom": list(tp.bottom),
                "middle": list(tp.middle),
                "top": list(tp.top),
            }
        if effect.kind in ("iv2", "iv1", "twistv"):
            rec["gamma_value"] = 0
        records.append(rec)
    return records


class InvariantMultiset:
    """Multiset of coefficient-group values rendered as a polynomial in t."""

    def __init__(self, modulus: int = 3):
        self.modulus = modulus
        self.counts: dict[int, int] = {}

    def add(self, value: int) -> None:
        v = value % self.modulus
        self.counts[v] = self.counts.get(v, 0) + 1

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def polynomial(self) -> str:
        parts = []
        for power in range(self.modulus):
            coeff = self.counts.get(power, 0)
            if power == 0:
                parts.append(str(coeff))
            elif coeff:
                var = "t" if power == 1 else f"t^{power}"
                parts.append(f"{coeff}{var}")
        return " + ".join(parts)

    def as_dict(self) -> dict[str, int]:
        return {str(v): self.counts.get(v, 0) for v in range(self.modulus)}

    def __eq__(self, other):
        return (
            isinstance(other, InvariantMultiset)
            and self.modulus == other.modulus
            and self.as_dict() == other.as_dict()
        )

    def __repr__(self):
        return f"InvariantMultiset({self.polynomial()})"


def cocycle_invariant(movie: Movie, family: GFamilyTable, theta) -> InvariantMultiset:
    """Sum signed theta values per foam coloring and tally the multiset.

    Colorings are enumerated on the designated still and propagated over the
    whole movie; a seed that fails to propagate is a hard error because it
    signals a diagram/movie mismatch.
    """
    from foamcocycle.diagrams import enumerate_colorings

    stills, _ = movie.replay()
    designated = stills[movie.seed_index].as_graph_diagram()
    out = InvariantMultiset()
    for seed in enumerate_colorings(designated, family):
        fc = propagate_coloring(movie, family, seed)
        total = 0
        for tp in collect_triple_points(movie, family, fc):
            total += tp.sign * theta(tp.bottom, tp.middle, tp.top)
        out.add(total)
    return out


def insert_r2_pair(movie: Movie, at: int, over: str, under: str) -> Movie:
    """A cancelling r2+/r2- pair spliced in after event `at`."""
    stills, _ = movie.replay()
    still = stills[at]
    if over not in still.arcs or under not in still.arcs:
        raise MovieError(f"arcs {over!r}/{under!r} not present at event {at}")
    c1, c2 = "rp.c1", "rp.c2"
    mid, tail, merged = "rp.mid", "rp.tail", "rp.merged"
    plus = Event("r2+", (over, "0", under, "0", c1, c2, mid, tail, "+"))
    minus = Event("r2-", (c1, c2, merged))
    renames = {}

    def fix(ev: Event) -> Event:
        return Event(ev.kind, tuple(renames.get(a, a) for a in ev.args))

    renames[under] = merged
    events = (
        movie.events[:at]
        + [plus, minus]
        + [fix(ev) for ev in movie.events[at:]]
    )
    seed = movie.seed_index
    if seed > at:
        seed += 2
    return Movie(movie.initial, events, seed)
