"""Tangle words, their closures, and twist-spin movie compilation.

A tangle is a Morse-word presentation of a trivalent graph in a disk with
two loose ends at the top: `cup`/`cap` for extrema, `x <pos> <o|u>` for
crossings (left strand over or under), `vdown <pos> <l|r>` for a vertex
splitting one strand into two, `vup <pos>` for two strands merging, and
`end` marking the boundary.  Words are planar by construction, which is
what licenses every move the compiler emits.

Closing the two loose ends over the top yields the spatial graph diagram;
spinning the tangle while rotating it n times yields a closed foam whose
movie this module compiles: the cup phase builds the double of the tangle
slice by slice, each twist block drags the doubled tangle through itself
from the south end, and the cap phase mirrors the cup phase.
"""

from __future__ import annotations

from dataclasses import dataclass

from foamcocycle.diagrams import Crossing, GraphDiagram, Vertex


class TangleError(Exception):
    pass


@dataclass(frozen=True)
class TangleOp:
    kind: str
    pos: int = 0
    flag: str = ""


@dataclass
class TangleWord:
    ops: list[TangleOp]

    def crossing_count(self) -> int:
        return sum(1 for op in self.ops if op.kind == "x")


def parse_tangle(text: str) -> TangleWord:
    ops: list[TangleOp] = []
    seen_end = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "tangle":
            continue
        if kind == "end":
            seen_end = True
            continue
        if seen_end:
            raise TangleError(f"line {lineno}: ops after end")
        try:
            if kind in ("cup", "cap", "vup"):
                ops.append(TangleOp(kind, int(parts[1])))
            elif kind == "x":
                if parts[2] not in ("o", "u"):
                    raise TangleError(f"line {lineno}: crossing needs o|u")
                ops.append(TangleOp("x", int(parts[1]), parts[2]))
            elif kind == "vdown":
                if parts[2] not in ("l", "r"):
                    raise TangleError(f"line {lineno}: vdown needs l|r")
                ops.append(TangleOp("vdown", int(parts[1]), parts[2]))
            else:
                raise TangleError(f"line {lineno}: unknown op {kind!r}")
        except (IndexError, ValueError) as exc:
            raise TangleError(f"line {lineno}: malformed op") from exc
    if not seen_end:
        raise TangleError("tangle must finish with 'end'")
    return TangleWord(ops)


def serialize_tangle(word: TangleWord) -> str:
    lines = ["tangle"]
    for op in word.ops:
        if op.flag:
            lines.append(f"{op.kind} {op.pos} {op.flag}")
        else:
            lines.append(f"{op.kind} {op.pos}")
    lines.append("end")
    return "\n".join(lines) + "\n"


@dataclass
class SimulatedTangle:
    """Runs (strand intervals) with their end attachments.

    Attachments: ("joint", id) for cup/cap/closure gluings, ("xin"|"xout",
    crossing) for under slots, ("vin"|"vout", vertex) for vertex slots,
    ("exit", k) for the two boundary ends.  `crossings` maps crossing id to
    (sign, over_run, under_below_run, under_above_run); `vertices` maps
    vertex id to the three incident runs.
    """

    bottom: dict[int, tuple]
    top: dict[int, tuple]
    over_passages: dict[int, list[str]]
    crossings: dict[str, tuple]
    vertices: dict[str, tuple]
    joints: dict[int, tuple[tuple[int, str], tuple[int, str]]]
    exits: tuple[int, int]
    word: TangleWord


def simulate_tangle(word: TangleWord) -> SimulatedTangle:
    bottom: dict[int, tuple] = {}
    top: dict[int, tuple] = {}
    over_passages: dict[int, list[str]] = {}
    crossings: dict[str, tuple] = {}
    vertices: dict[str, tuple] = {}
    joints: dict[int, tuple] = {}
    counters = {"run": 0, "x": 0, "v": 0, "j": 0}

    def new_run(bot):
        rid = counters["run"]
        counters["run"] += 1
        bottom[rid] = bot
        over_passages[rid] = []
        return rid

    strands: list[int] = []
    for opi, op in enumerate(word.ops):
        k = len(strands)
        if op.kind == "cup":
            if not 1 <= op.pos <= k + 1:
                raise TangleError(f"op {opi}: cup position out of range")
            jid = counters["j"]
            counters["j"] += 1
            r1 = new_run(("joint", jid))
            r2 = new_run(("joint", jid))
            joints[jid] = ((r1, "bottom"), (r2, "bottom"))
            strands[op.pos - 1 : op.pos - 1] = [r1, r2]
        elif op.kind == "cap":
            if not 1 <= op.pos <= k - 1:
                raise TangleError(f"op {opi}: cap position out of range")
            r1, r2 = strands[op.pos - 1], strands[op.pos]
            jid = counters["j"]
            counters["j"] += 1
            top[r1] = ("joint", jid)
            top[r2] = ("joint", jid)
            joints[jid] = ((r1, "top"), (r2, "top"))
            del strands[op.pos - 1 : op.pos + 1]
        elif op.kind == "x":
            if not 1 <= op.pos <= k - 1:
                raise TangleError(f"op {opi}: crossing position out of range")
            left, right = strands[op.pos - 1], strands[op.pos]
            cid = f"x{counters['x']}"
            counters["x"] += 1
            over, under = (left, right) if op.flag == "o" else (right, left)
            top[under] = ("xin", cid)
            under_out = new_run(("xout", cid))
            sign = "+" if op.flag == "o" else "-"
            crossings[cid] = (sign, over, under, under_out)
            over_passages[over].append(cid)
            if op.flag == "o":
                strands[op.pos - 1], strands[op.pos] = under_out, over
            else:
                strands[op.pos - 1], strands[op.pos] = over, under_out
        elif op.kind == "vdown":
            if not 1 <= op.pos <= k:
                raise TangleError(f"op {opi}: vdown position out of range")
            vid = f"v{counters['v']}"
            counters["v"] += 1
            host = strands[op.pos - 1]
            top[host] = ("vin", vid)
            r1 = new_run(("vout", vid))
            r2 = new_run(("vout", vid))
            vertices[vid] = (host, r1, r2, op.flag)
            strands[op.pos - 1 : op.pos] = [r1, r2]
        elif op.kind == "vup":
            if not 1 <= op.pos <= k - 1:
                raise TangleError(f"op {opi}: vup position out of range")
            vid = f"v{counters['v']}"
            counters["v"] += 1
            h1, h2 = strands[op.pos - 1], strands[op.pos]
            top[h1] = ("vin", vid)
            top[h2] = ("vin", vid)
            r = new_run(("vout", vid))
            vertices[vid] = (h1, h2, r, "up")
            strands[op.pos - 1 : op.pos + 1] = [r]
        else:
            raise TangleError(f"op {opi}: unknown op {op.kind}")
    if len(strands) != 2:
        raise TangleError(f"tangle must end with 2 strands, got {len(strands)}")
    for i, r in enumerate(strands):
        top[r] = ("exit", i)
    return SimulatedTangle(
        bottom, top, over_passages, crossings, vertices, joints, tuple(strands), word
    )


def _chase_chains(sim: SimulatedTangle, closure_joint: bool):
    """Group runs into arcs and walk each arc once.

    Returns (arc_of_run, walks, arc_ends): walks maps an arc name to its
    ordered (run, upward) traversal; arc_ends maps it to the attachment
    tuples at the walk's start and end (empty for closed circles).
    """
    partners: dict[tuple[int, str], tuple[int, str]] = {}
    for _jid, ((ra, ea), (rb, eb)) in sim.joints.items():
        partners[(ra, ea)] = (rb, eb)
        partners[(rb, eb)] = (ra, ea)
    if closure_joint and sim.exits:
        e1, e2 = sim.exits
        partners[(e1, "top")] = (e2, "top")
        partners[(e2, "top")] = (e1, "top")

    def attachment(run, end):
        return sim.bottom[run] if end == "bottom" else sim.top[run]

    def is_terminal(run, end):
        att = attachment(run, end)
        return att[0] in ("xin", "xout", "vin", "vout") or (
            att[0] == "exit" and not closure_joint
        )

    seen: set[int] = set()
    walks: dict[str, list[tuple[int, bool]]] = {}
    arc_ends: dict[str, list] = {}
    arc_of_run: dict[int, str] = {}
    counter = [0]

    def walk_from(run, end):
        name = f"a{counter[0]}"
        counter[0] += 1
        path = []
        cur, cur_end = run, end
        closed = False
        while True:
            seen.add(cur)
            arc_of_run[cur] = name
            path.append((cur, cur_end == "bottom"))
            far = "top" if cur_end == "bottom" else "bottom"
            if is_terminal(cur, far):
                break
            if (cur, far) not in partners:
                raise TangleError(f"run {cur} has an unattached end")
            nxt, nxt_end = partners[(cur, far)]
            if nxt in seen and (nxt, nxt_end) == (run, end):
                closed = True
                break
            cur, cur_end = nxt, nxt_end
        walks[name] = path
        if closed:
            arc_ends[name] = []
        else:
            last_run, last_up = path[-1]
            far = "top" if last_up else "bottom"
            arc_ends[name] = [attachment(run, end), attachment(last_run, far)]
        return name

    # open chains first, entered at a terminal end; leftovers are circles
    for run in sorted(sim.bottom):
        for end in ("bottom", "top"):
            if run not in seen and is_terminal(run, end):
                walk_from(run, end)
    for run in sorted(sim.bottom):
        if run not in seen:
            walk_from(run, "bottom")
    return arc_of_run, walks, arc_ends


def tangle_to_graph(word: TangleWord) -> GraphDiagram:
    """Close the two loose ends over the top into a graph diagram.

    Arc directions are chosen afterwards, flipping whole arcs so that every
    crossing consumes one arriving and one departing under strand.
    """
    sim = simulate_tangle(word)
    arc_of_run, walks, arc_ends = _chase_chains(sim, closure_joint=True)

    # ports: attachment tuple -> [(arc, at_walk_end?)]
    ports: dict[tuple, list[tuple[str, bool]]] = {}
    for name, ends in arc_ends.items():
        for i, att in enumerate(ends):
            ports.setdefault(att, []).append((name, i == 1))

    # 2-color arc flips: each crossing needs one arrival and one departure
    flip: dict[str, bool] = {}
    import collections

    constraints: dict[str, list[tuple[str, bool]]] = {a: [] for a in walks}
    for cid in sim.crossings:
        (pa, ea_end), = ports[("xin", cid)]
        (pb, eb_end), = ports[("xout", cid)]
        want = ea_end == eb_end  # flip parity required between the two arcs
        constraints[pa].append((pb, want))
        constraints[pb].append((pa, want))
    for start in sorted(walks):
        if start in flip:
            continue
        flip[start] = False
        queue = collections.deque([start])
        while queue:
            cur = queue.popleft()
            for other, want in constraints[cur]:
                needed = flip[cur] ^ want
                if other in flip:
                    if flip[other] != needed:
                        raise TangleError("inconsistent strand orientations")
                else:
                    flip[other] = needed
                    queue.append(other)

    def arrives(name, at_walk_end):
        return at_walk_end ^ flip[name]

    crossings = []
    for cid in sorted(sim.crossings, key=lambda c: int(c[1:])):
        sign, over, _below, _above = sim.crossings[cid]
        (pa, ea_end), = ports[("xin", cid)]
        (pb, eb_end), = ports[("xout", cid)]
        if arrives(pa, ea_end):
            under_in, under_out = pa, pb
        else:
            under_in, under_out = pb, pa
        crossings.append(Crossing(sign, arc_of_run[over], under_in, under_out))
    vertices = []
    for vid in sorted(sim.vertices, key=lambda v: int(v[1:])):
        slots = []
        for att in (("vin", vid), ("vout", vid)):
            for name, at_end in ports.get(att, []):
                slots.append((name, "head" if arrives(name, at_end) else "tail"))
        vertices.append(Vertex(tuple(slots)))
    names = tuple(sorted(walks))
    return GraphDiagram(names, tuple(crossings), tuple(vertices))


from foamcocycle.foam import Event, Movie, Still, apply_event


def mirror_ops(ops: list[TangleOp]) -> list[TangleOp]:
    """Vertical reflection: reversed ops with cups/caps and o/u swapped."""
    out = []
    for op in reversed(ops):
        if op.kind == "cup":
            out.append(TangleOp("cap", op.pos))
        elif op.kind == "cap":
            out.append(TangleOp("cup", op.pos))
        elif op.kind == "x":
            out.append(TangleOp("x", op.pos, "u" if op.flag == "o" else "o"))
        elif op.kind == "vdown":
            out.append(TangleOp("vup", op.pos))
        elif op.kind == "vup":
            out.append(TangleOp("vdown", op.pos, "r"))
        else:
            raise TangleError(f"cannot mirror op {op.kind}")
    return out


def double_graph(word: TangleWord) -> GraphDiagram:
    """The closed double of the tangle: word followed by its reflection."""
    doubled = TangleWord(word.ops + mirror_ops(word.ops))
    sim = simulate_tangle_closed(doubled)
    return _graph_from_sim(sim, closure_joint=False)


def simulate_tangle_closed(word: TangleWord) -> SimulatedTangle:
    """Like simulate_tangle but the word must consume every strand."""
    return _simulate(word, allow_closed=True)


def _simulate(word: TangleWord, allow_closed=False) -> SimulatedTangle:
    bottom: dict[int, tuple] = {}
    top: dict[int, tuple] = {}
    over_passages: dict[int, list[str]] = {}
    crossings: dict[str, tuple] = {}
    vertices: dict[str, tuple] = {}
    joints: dict[int, tuple] = {}
    counters = {"run": 0, "x": 0, "v": 0, "j": 0}

    def new_run(bot):
        rid = counters["run"]
        counters["run"] += 1
        bottom[rid] = bot
        over_passages[rid] = []
        return rid

    strands: list[int] = []
    for opi, op in enumerate(word.ops):
        k = len(strands)
        if op.kind == "cup":
            jid = counters["j"]; counters["j"] += 1
            r1, r2 = new_run(("joint", jid)), new_run(("joint", jid))
            joints[jid] = ((r1, "bottom"), (r2, "bottom"))
            strands[op.pos - 1 : op.pos - 1] = [r1, r2]
        elif op.kind == "cap":
            r1, r2 = strands[op.pos - 1], strands[op.pos]
            jid = counters["j"]; counters["j"] += 1
            top[r1] = ("joint", jid); top[r2] = ("joint", jid)
            joints[jid] = ((r1, "top"), (r2, "top"))
            del strands[op.pos - 1 : op.pos + 1]
        elif op.kind == "x":
            left, right = strands[op.pos - 1], strands[op.pos]
            cid = f"x{counters['x']}"; counters["x"] += 1
            over, under = (left, right) if op.flag == "o" else (right, left)
            top[under] = ("xin", cid)
            under_out = new_run(("xout", cid))
            crossings[cid] = ("+" if op.flag == "o" else "-", over, under, under_out)
            over_passages[over].append(cid)
            if op.flag == "o":
                strands[op.pos - 1], strands[op.pos] = under_out, over
            else:
                strands[op.pos - 1], strands[op.pos] = over, under_out
        elif op.kind == "vdown":
            vid = f"v{counters['v']}"; counters["v"] += 1
            host = strands[op.pos - 1]
            top[host] = ("vin", vid)
            r1, r2 = new_run(("vout", vid)), new_run(("vout", vid))
            vertices[vid] = (host, r1, r2, op.flag)
            strands[op.pos - 1 : op.pos] = [r1, r2]
        elif op.kind == "vup":
            vid = f"v{counters['v']}"; counters["v"] += 1
            h1, h2 = strands[op.pos - 1], strands[op.pos]
            top[h1] = ("vin", vid); top[h2] = ("vin", vid)
            r = new_run(("vout", vid))
            vertices[vid] = (h1, h2, r, "up")
            strands[op.pos - 1 : op.pos + 1] = [r]
    if allow_closed:
        if strands:
            raise TangleError("doubled word must consume all strands")
        exits = ()
    else:
        if len(strands) != 2:
            raise TangleError(f"tangle must end with 2 strands, got {len(strands)}")
        for i, r in enumerate(strands):
            top[r] = ("exit", i)
        exits = tuple(strands)
    return SimulatedTangle(
        bottom, top, over_passages, crossings, vertices, joints, exits, word
    )


def _graph_from_sim(sim: SimulatedTangle, closure_joint: bool) -> GraphDiagram:
    arc_of_run, walks, arc_ends = _chase_chains(sim, closure_joint=closure_joint)
    ports: dict[tuple, list[tuple[str, bool]]] = {}
    for name, ends in arc_ends.items():
        for i, att in enumerate(ends):
            ports.setdefault(att, []).append((name, i == 1))
    import collections

    flip: dict[str, bool] = {}
    constraints: dict[str, list[tuple[str, bool]]] = {a: [] for a in walks}
    for cid in sim.crossings:
        (pa, ea_end), = ports[("xin", cid)]
        (pb, eb_end), = ports[("xout", cid)]
        want = ea_end == eb_end
        constraints[pa].append((pb, want))
        constraints[pb].append((pa, want))
    for start in sorted(walks):
        if start in flip:
            continue
        flip[start] = False
        queue = collections.deque([start])
        while queue:
            cur = queue.popleft()
            for other, want in constraints[cur]:
                needed = flip[cur] ^ want
                if other in flip:
                    if flip[other] != needed:
                        raise TangleError("inconsistent strand orientations")
                else:
                    flip[other] = needed
                    queue.append(other)

    def arrives(name, at_walk_end):
        return at_walk_end ^ flip[name]

    crossings = []
    for cid in sorted(sim.crossings, key=lambda c: int(c[1:])):
        sign, over, _b, _a = sim.crossings[cid]
        (pa, ea_end), = ports[("xin", cid)]
        (pb, eb_end), = ports[("xout", cid)]
        if arrives(pa, ea_end):
            under_in, under_out = pa, pb
        else:
            under_in, under_out = pb, pa
        crossings.append(Crossing(sign, arc_of_run[over], under_in, under_out))
    vertices = []
    for vid in sorted(sim.vertices, key=lambda v: int(v[1:])):
        slots = []
        for att in (("vin", vid), ("vout", vid)):
            for name, at_end in ports.get(att, []):
                slots.append((name, "head" if arrives(name, at_end) else "tail"))
        vertices.append(Vertex(tuple(slots)))
    return GraphDiagram(tuple(sorted(walks)), tuple(crossings), tuple(vertices))


class CompileError(TangleError):
    pass


class DoubleCompiler:
    """Emit movie events building the double of a tangle from the empty still.

    The compiler shadows every arc's passage list with fold tokens spliced
    in: item ("p", cid) is a real passage, ("f", strand) the reflection fold
    of a tangle strand.  Each fold knows which side of it along the arc is
    the unreflected copy ("lo" = toward the tail).  After every event the
    shadow is checked against the real still.
    """

    def __init__(self):
        self.still = Still()
        self.events: list[Event] = []
        self.shadow: dict[str, list] = {}
        self.tside: dict[int, str] = {}
        self.strands: list[int] = []
        self.next_strand = 0
        self.next_arc = 0
        self.xcount = 0
        self.vcount = 0

    # -- plumbing ----------------------------------------------------------
    def fresh(self, prefix="d"):
        name = f"{prefix}{self.next_arc}"
        self.next_arc += 1
        return name

    def emit(self, kind, *args):
        ev = Event(kind, tuple(str(a) for a in args))
        nxt, effect = apply_event(self.still, ev, len(self.events))
        self.events.append(ev)
        self.still = nxt
        return effect

    def check_shadow(self):
        stripped = {
            a: [cid for tag, cid in items if tag == "p"]
            for a, items in self.shadow.items()
        }
        real = {a: list(p) for a, p in self.still.arcs.items()}
        if stripped != real:
            raise CompileError(f"shadow drift: {stripped} vs {real}")

    def locate(self, strand):
        for arc, items in self.shadow.items():
            for i, item in enumerate(items):
                if item == ("f", strand):
                    return arc, i
        raise CompileError(f"fold of strand {strand} lost")

    def realpos(self, arc, idx):
        return sum(1 for tag, _ in self.shadow[arc][:idx] if tag == "p")

    def is_circle(self, arc):
        consumers = self.still.end_consumers()
        return (arc, "head") not in consumers and (arc, "tail") not in consumers

    def flip_edge(self, arc):
        edge = self.still.edge_of(arc)
        members = {a for a in self.still.arcs if self.still.edge_of(a) == edge}
        self.emit("flip", arc)
        for a in members:
            self.shadow[a] = list(reversed(self.shadow[a]))
            for tag, s in self.shadow[a]:
                if tag == "f":
                    self.tside[s] = "hi" if self.tside[s] == "lo" else "lo"
        self.check_shadow()

    def normalize(self, strand, want="lo"):
        """Flip or rotate so the strand's fold has its T side as wanted."""
        arc, idx = self.locate(strand)
        side = self.tside.get(strand)
        if side is None:
            # virgin circle: adopt the wanted orientation outright
            self.tside[strand] = want
            return arc
        if side != want:
            if self.is_circle(arc):
                # rotating a circle's cyclic list reverses nothing; a flip
                # still works and keeps the bookkeeping uniform
                self.flip_edge(arc)
            else:
                self.flip_edge(arc)
        arc, _ = self.locate(strand)
        return arc

    # -- tangle ops ---------------------------------------------------------
    def op_cup(self, pos):
        name = self.fresh()
        self.emit("birth", name)
        s1, s2 = self.next_strand, self.next_strand + 1
        self.next_strand += 2
        self.shadow[name] = [("f", s1), ("f", s2)]
        self.tside[s1] = None
        self.tside[s2] = None
        self.strands[pos - 1 : pos - 1] = [s1, s2]
        self.check_shadow()

    def op_x(self, pos, flag):
        sL, sR = self.strands[pos - 1], self.strands[pos]
        over_s, under_s = (sL, sR) if flag == "o" else (sR, sL)
        cT, cM = f"k{self.xcount}", f"k{self.xcount}m"
        self.xcount += 1
        sign = "+" if flag == "o" else "-"
        arcO, _ = self.locate(over_s)
        arcU, _ = self.locate(under_s)
        if arcO == arcU:
            self._self_crossing(arcO, over_s, under_s, cT, cM, sign)
        else:
            self._plain_crossing(over_s, under_s, cT, cM, sign)
        self.strands[pos - 1], self.strands[pos] = (
            self.strands[pos],
            self.strands[pos - 1],
        )
        self.check_shadow()

    def _self_crossing(self, arc, over_s, under_s, cT, cM, sign):
        if not self.is_circle(arc):
            raise CompileError("self-crossing supported on virgin circles only")
        items = self.shadow[arc]
        iU = items.index(("f", under_s))
        rot = items[iU + 1 :] + items[:iU]
        iO = rot.index(("f", over_s))
        k_real = 0  # a virgin circle has no real passages before the cut
        n_before = sum(1 for tag, _ in rot[:iO] if tag == "p")
        if any(tag == "p" for tag, _ in items):
            raise CompileError("self-crossing on a decorated circle")
        mid, wrap = self.fresh(), self.fresh()
        self.emit("r2s", arc, k_real, n_before, cT, cM, mid, wrap, sign)
        self.shadow[wrap] = rot[:iO] + [("p", cT), ("f", over_s), ("p", cM)] + rot[iO + 1 :]
        self.shadow[mid] = [("f", under_s)]
        del self.shadow[arc]
        self.tside[over_s] = "lo"
        self.tside[under_s] = "lo"
        # remaining virgin folds on the wrap sit after the mirror crossing
        for tag, s in rot[:iO]:
            if tag == "f" and self.tside[s] is None:
                self.tside[s] = "hi"
        for tag, s in rot[iO + 1 :]:
            if tag == "f" and self.tside[s] is None:
                self.tside[s] = "hi"

    def _plain_crossing(self, over_s, under_s, cT, cM, sign):
        arcO = self.normalize(over_s, "lo")
        arcU, iU = self.locate(under_s)
        if arcU == arcO:
            raise CompileError("folds merged unexpectedly")
        U_circle = self.is_circle(arcU)
        if self.tside.get(under_s) is None:
            self.tside[under_s] = "lo"
        elif self.tside[under_s] != "lo" and not U_circle:
            self.flip_edge(arcU)
        elif self.tside[under_s] != "lo" and U_circle:
            self.flip_edge(arcU)
        arcO, iO = self.locate(over_s)
        arcU, iU = self.locate(under_s)
        mid = self.fresh()
        tail = self.fresh()
        kU = self.realpos(arcU, iU)
        iOr = self.realpos(arcO, iO)
        if U_circle:
            self.emit("r2+", arcO, iOr, arcU, kU, cT, cM, mid, tail, sign)
            items = self.shadow[arcU]
            rot = items[iU + 1 :] + items[:iU]
            self.shadow[tail] = rot
            self.shadow[mid] = [("f", under_s)]
            del self.shadow[arcU]
            for tag, s in rot:
                if tag == "f" and self.tside[s] is None:
                    self.tside[s] = "hi"
        else:
            self.emit("r2+", arcO, iOr, arcU, kU, cT, cM, mid, tail, sign)
            items = self.shadow[arcU]
            self.shadow[arcU] = items[:iU]
            self.shadow[tail] = items[iU + 1 :]
            self.shadow[mid] = [("f", under_s)]
        self.tside[under_s] = "lo"
        # place the new passages around the over fold: T crossing on the T side
        itemsO = self.shadow[arcO]
        iO = itemsO.index(("f", over_s))
        self.shadow[arcO] = (
            itemsO[:iO] + [("p", cT), ("f", over_s), ("p", cM)] + itemsO[iO + 1 :]
        )
        self.tside[over_s] = "lo"
        self.check_shadow()

    def op_vdown(self, pos, flag):
        host = self.strands[pos - 1]
        arc = self.normalize(host, "lo")
        arc, idx = self.locate(host)
        vT, vM = f"v{self.vcount}", f"v{self.vcount}m"
        self.vcount += 1
        band_s, memb_s = self.next_strand, self.next_strand + 1
        self.next_strand += 2
        edge_arc = self.fresh()
        if self.is_circle(arc):
            p1, p2 = self.fresh(), self.fresh()
            k = self.realpos(arc, idx)
            self.emit("yb", arc, k, k, vT, vM, edge_arc, p1, p2, "-")
            items = self.shadow[arc]
            # p1 is the empty band between the cuts; p2 wraps the rest
            self.shadow[p1] = [("f", band_s)]
            self.shadow[p2] = (
                items[idx + 1 :] + items[:idx]
            )
            self.shadow[edge_arc] = [("f", memb_s)]
            del self.shadow[arc]
            for tag, s in self.shadow[p2]:
                if tag == "f" and self.tside[s] is None:
                    self.tside[s] = "hi"
        else:
            p1, p2, p3 = self.fresh(), self.fresh(), self.fresh()
            k = self.realpos(arc, idx)
            self.emit("yb", arc, k, k, vT, vM, edge_arc, p1, p2, p3)
            items = self.shadow[arc]
            self.shadow[p1] = items[:idx]
            self.shadow[p2] = [("f", band_s)]
            self.shadow[p3] = items[idx + 1 :]
            self.shadow[edge_arc] = [("f", memb_s)]
            del self.shadow[arc]
        self.tside[band_s] = "lo"
        self.tside[memb_s] = "lo"
        children = [band_s, memb_s] if flag == "l" else [memb_s, band_s]
        self.strands[pos - 1 : pos] = children
        self.check_shadow()

    def op_cap(self, pos):
        sA, sB = self.strands[pos - 1], self.strands[pos]
        arcA = self.normalize(sA, "lo")
        arcB = self.normalize(sB, "hi")
        arcA, iA = self.locate(sA)
        arcB, iB = self.locate(sB)
        if arcA == arcB:
            raise CompileError("cap of a single arc is a reducible tangle")
        C, D = self.fresh(), self.fresh()
        self.emit(
            "saddle", arcA, self.realpos(arcA, iA), arcB, self.realpos(arcB, iB), C, D
        )
        itemsA, itemsB = self.shadow[arcA], self.shadow[arcB]
        self.shadow[C] = itemsA[:iA] + itemsB[iB + 1 :]
        self.shadow[D] = itemsB[:iB] + itemsA[iA + 1 :]
        del self.shadow[arcA], self.shadow[arcB]
        del self.strands[pos - 1 : pos + 1]
        self.tside.pop(sA, None)
        self.tside.pop(sB, None)
        self.check_shadow()

    def run(self, word: TangleWord):
        for op in word.ops:
            if op.kind == "cup":
                self.op_cup(op.pos)
            elif op.kind == "x":
                self.op_x(op.pos, op.flag)
            elif op.kind == "vdown":
                self.op_vdown(op.pos, op.flag)
            elif op.kind == "cap":
                self.op_cap(op.pos)
            else:
                raise CompileError(f"compiler does not handle {op.kind}")
        return self.strands


def compile_double(word: TangleWord) -> DoubleCompiler:
    comp = DoubleCompiler()
    comp.run(word)
    return comp


class TwistDriver:
    """Slide a kink from one axis fold through the mirror half to the other.

    Each crossing of the rotating half is passed twice, once along the
    under strand and once along the over strand; every passage is an
    r2+/r3/r2- burst whose argument variants are probed speculatively and
    validated structurally.  Fold positions are maintained explicitly so
    the dips always stay on the mirror side.
    """

    def __init__(self, comp: DoubleCompiler):
        self.comp = comp
        self.renames: dict[str, str] = {}
        # folds as strand -> (arc, real passage index)
        self.folds: dict[int, tuple[str, int]] = {}
        for s in comp.strands:
            arc, idx = comp.locate(s)
            self.folds[s] = (arc, comp.realpos(arc, idx))

    def sync_comp_shadow(self):
        """Write fold positions back into the compiler's shadow lists."""
        comp = self.comp
        shadow = {a: [("p", c) for c in p] for a, p in comp.still.arcs.items()}
        for s, (arc, ridx) in self.folds.items():
            items = shadow[arc]
            real = 0
            at = len(items)
            for pos, (tag, _v) in enumerate(items):
                if real == ridx:
                    at = pos
                    break
                if tag == "p":
                    real += 1
            else:
                if real != ridx:
                    raise CompileError("fold index out of range")
            shadow[arc] = items[:at] + [("f", s)] + items[at:]
        comp.shadow = shadow
        comp.check_shadow()

    def emit(self, kind, *args):
        comp = self.comp
        before = {a: list(p) for a, p in comp.still.arcs.items()}
        effect = comp.emit(kind, *args)
        self._update_folds(kind, args, before, effect)
        self.sync_comp_shadow()
        return effect

    def _update_folds(self, kind, args, before, effect):
        after = self.comp.still.arcs
        new_folds = {}
        for s, (arc, ridx) in self.folds.items():
            if arc in after:
                old = before[arc]
                new = after[arc]
                if old == new:
                    new_folds[s] = (arc, ridx)
                    continue
                # same arc, passages changed: keep the fold's surviving context
                left = set(old[:ridx])
                right = set(old[ridx:])
                lo = 0
                hi = len(new)
                for i, c in enumerate(new):
                    if c in left:
                        lo = max(lo, i + 1)
                    if c in right:
                        hi = min(hi, i)
                if lo > hi:
                    raise CompileError(f"fold context torn on {arc}")
                if lo == hi:
                    new_folds[s] = (arc, lo)
                else:
                    # fresh passages straddle the old position: keep the fold
                    # against its surviving right context (mirror side rule)
                    new_folds[s] = (arc, hi)
                continue
            # arc vanished: find the surviving arc whose passages still
            # flank the fold's old context
            old = before[arc]
            left = set(old[:ridx])
            right = set(old[ridx:])
            candidates = set(effect.created) | set(effect.renamed)
            fits = []
            for target in sorted(candidates):
                if target not in after:
                    continue
                new = after[target]
                lo, hi = 0, len(new)
                for i, c in enumerate(new):
                    if c in left:
                        lo = max(lo, i + 1)
                    if c in right:
                        hi = min(hi, i)
                if lo > hi:
                    continue
                if (left or right) and not (left | right) & set(new):
                    continue
                fits.append((target, lo if lo == hi else hi))
            if len(fits) != 1:
                # fall back to parent links for featureless folds
                target = None
                for newname, oldname in effect.renamed.items():
                    if oldname == arc and newname in after:
                        target = newname
                if target is None:
                    for newname, parent in effect.created.items():
                        if parent == arc and newname in after:
                            target = newname
                if target is None:
                    raise CompileError(f"fold lost with arc {arc}")
                fits = [(target, 0)]
            new_folds[s] = fits[0]
        self.folds = new_folds

    def probe(self, seqs):
        comp = self.comp
        base_still = comp.still
        for label, events in seqs:
            still = base_still
            ok = True
            for kind, args in events:
                try:
                    still, _ = apply_event(
                        still, Event(kind, tuple(map(str, args))), None
                    )
                except Exception:
                    ok = False
                    break
            if ok:
                for kind, args in events:
                    self.emit(kind, *args)
                return label
        raise CompileError("no passage variant applies")

    # ------------------------------------------------------------------
    def run_twist(self, start_strand=None):
        comp = self.comp
        strands = sorted(self.folds)
        if start_strand is not None:
            start_s = start_strand
        else:
            # the kink travels head-wards; start where the mirror side lies
            # beyond the fold
            los = [s for s in strands if comp.tside[s] == "lo"]
            start_s = los[0] if los else strands[0]
        end_s = [s for s in strands if s != start_s][0]
        if comp.tside[start_s] == "hi":
            arc, _ = self.folds[start_s]
            comp.flip_edge(arc)
            # flip_edge rewrote comp.shadow; refresh our fold table
            self.folds = {}
            for s in strands:
                a, i = comp.locate(s)
                self.folds[s] = (a, comp.realpos(a, i))
        self.kink_birth(start_s)
        steps = 0
        while not self.at_end_fold(end_s):
            if steps > 300:
                raise CompileError("kink runaway")
            steps += 1
            self.advance()
        self.kink_death(end_s)

    def kink_birth(self, strand):
        comp = self.comp
        arc, ridx = self.folds[strand]
        side = comp.tside[strand]
        q = f"q{len(comp.events)}"
        post = comp.fresh()
        if side == "lo":
            self.emit("r1+", arc, ridx, "a", "+", post, q)
        else:
            self.emit("r1+", arc, ridx, "b", "+", post, q)
        self.q = q

    def kink_arcs(self):
        c = self.comp.still.crossings[self.q]
        return c.over, c.under_in, c.under_out

    def travel_arc(self):
        """The arc ahead of the kink (its under_out side by construction)."""
        over, uin, uout = self.kink_arcs()
        return uout if uout != over else uin

    def at_end_fold(self, end_strand):
        comp = self.comp
        arc, ridx = self.folds[end_strand]
        over, uin, uout = self.kink_arcs()
        ahead = self.travel_arc()
        if ahead != arc:
            return False
        # kink enters the fold arc from its tail: clear run up to the fold
        return ridx == 0 or len(comp.still.arcs[arc][:ridx]) == 0

    def advance(self):
        comp = self.comp
        ahead = self.travel_arc()
        passages = comp.still.arcs[ahead]
        consumers = comp.still.end_consumers()
        if passages:
            self.pass_over(passages[0])
            return
        head = consumers.get((ahead, "head"))
        if head is None:
            raise CompileError("kink ran off an open end")
        kind, cid = head
        if kind == "vertex":
            self.pass_vertex(cid)
            return
        c = comp.still.crossings[cid]
        if c.under_in == ahead:
            self.pass_under(cid)
        else:
            raise CompileError("unexpected crossing role ahead of the kink")

    def pass_under(self, cid):
        comp = self.comp
        q = self.q
        over_q, _uin, _uout = self.kink_arcs()
        c = comp.still.crossings[cid]
        O = c.over
        tip = over_q
        tip_cut = comp.still.arcs[tip].index(q) + 1
        c_idx = comp.still.arcs[O].index(cid)
        n1, n2 = f"u{len(comp.events)}a", f"u{len(comp.events)}b"
        m, t = comp.fresh(), comp.fresh()
        merged = comp.fresh()
        fold_limits = self._fold_window(O, c_idx)
        variants = []
        for ins in fold_limits:
            for sgn in (c.sign, "-" if c.sign == "+" else "+"):
                for other in (n2, n1):
                    variants.append(
                        (
                            (ins, sgn, other),
                            [
                                ("r2+", (O, ins, tip, tip_cut, n1, n2, m, t, sgn)),
                                ("r3", (n1, n2, q)),
                                ("r2-", (other, cid, merged)),
                            ],
                        )
                    )
        self.probe(variants)
        survivor = n1 if n1 in comp.still.crossings else n2
        self.renames[cid] = survivor

    def _fold_window(self, O, c_idx):
        """Insertion slots adjacent to c_idx staying on c's side of any fold."""
        slots = [c_idx + 1, c_idx]
        for s, (arc, ridx) in self.folds.items():
            if arc == O:
                if c_idx < ridx:
                    slots = [i for i in slots if i <= ridx]
                else:
                    slots = [i for i in slots if i >= ridx]
        return slots

    def pass_over(self, cid):
        comp = self.comp
        q = self.q
        over_q, _uin, _uout = self.kink_arcs()
        c = comp.still.crossings[cid]
        tip = over_q
        e1, e2 = f"o{len(comp.events)}a", f"o{len(comp.events)}b"
        m, t = comp.fresh(), comp.fresh()
        merged = comp.fresh()
        variants = []
        for under in (c.under_in, c.under_out):
            u_len = len(comp.still.arcs[under])
            cuts = [0, u_len] if u_len else [0]
            for cut in sorted(set(cuts)):
                for ins in (0, 1):
                    for sgn in ("+", "-"):
                        for eo in (e2, e1):
                            variants.append(
                                (
                                    (under, cut, ins, sgn, eo),
                                    [
                                        ("r2+", (tip, ins, under, cut, e1, e2, m, t, sgn)),
                                        ("r3", (q, eo, cid)),
                                        ("r2-", (eo, cid, merged)),
                                    ],
                                )
                            )
        self.probe(variants)
        survivor = e1 if e1 in comp.still.crossings else e2
        self.renames[cid] = survivor

    def pass_vertex(self, vid):
        raise CompileError("vertex passage is handled by the graph driver")

    def kink_death(self, end_strand):
        comp = self.comp
        merged = comp.fresh()
        self.emit("r1-", self.q, merged)
