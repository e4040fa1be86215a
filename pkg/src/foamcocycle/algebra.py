"""Finite groups, G-families of quandles, and their associated quandles.

Everything is table-driven: carriers are small ordered label sets mapped to
dense indices, operations are lookup tables, and every axiom is checked by
exhaustive enumeration.  Tables serialize to a canonical text format so that
golden tests are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class StructuralError(Exception):
    """Malformed table data (wrong arity, out-of-range index, bad header)."""


class AxiomError(Exception):
    """An operation refused to run because its input fails axiom checks."""

    def __init__(self, report: "ValidationReport"):
        super().__init__(report.summary())
        self.report = report


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple
    detail: str

    def __str__(self) -> str:
        return f"{self.axiom} at {self.witness}: {self.detail}"


@dataclass
class ValidationReport:
    """Outcome of an exhaustive axiom check.

    Carries the first counterexample per violated axiom; iteration order is
    table order, so reports are deterministic.
    """

    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, axiom: str, witness: tuple, detail: str) -> None:
        if not any(v.axiom == axiom for v in self.violations):
            self.violations.append(Violation(axiom, witness, detail))

    def summary(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(str(v) for v in self.violations)


def _check_table_shape(table, n: int, what: str) -> None:
    if len(table) != n:
        raise StructuralError(f"{what}: expected {n} rows, got {len(table)}")
    for i, row in enumerate(table):
        if len(row) != n:
            raise StructuralError(f"{what}: row {i} has {len(row)} entries, expected {n}")
        for j, v in enumerate(row):
            if not isinstance(v, int) or not (0 <= v < n):
                raise StructuralError(f"{what}: entry ({i},{j}) = {v!r} out of range")


@dataclass(frozen=True)
class GroupTable:
    """A finite group presented by its multiplication table over index 0..n-1."""

    labels: tuple[str, ...]
    mul: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        _check_table_shape(self.mul, len(self.labels), "group table")

    @property
    def order(self) -> int:
        return len(self.labels)

    def elements(self) -> range:
        return range(self.order)

    def find_identity(self) -> int | None:
        for e in self.elements():
            if all(self.mul[e][x] == x == self.mul[x][e] for x in self.elements()):
                return e
        return None

    @property
    def identity(self) -> int:
        e = self.find_identity()
        if e is None:
            raise AxiomError(validate_group(self))
        return e

    def inverse(self, a: int) -> int:
        e = self.identity
        for b in self.elements():
            if self.mul[a][b] == e == self.mul[b][a]:
                return b
        raise AxiomError(validate_group(self))

    def is_abelian(self) -> bool:
        return all(
            self.mul[a][b] == self.mul[b][a]
            for a in self.elements()
            for b in self.elements()
        )

    @classmethod
    def cyclic(cls, n: int) -> "GroupTable":
        labels = tuple(str(i) for i in range(n))
        mul = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
        return cls(labels, mul)

    @classmethod
    def units_mod(cls, p: int, units: tuple[int, ...]) -> "GroupTable":
        """Multiplicative subgroup of (Z/p)* on the given unit labels."""
        index = {u: i for i, u in enumerate(units)}
        if 1 not in index:
            raise StructuralError("units must contain 1")
        mul = []
        for u in units:
            row = []
            for v in units:
                w = (u * v) % p
                if w not in index:
                    raise StructuralError(f"units not closed: {u}*{v} = {w} mod {p}")
                row.append(index[w])
            mul.append(tuple(row))
        return cls(tuple(str(u) for u in units), tuple(mul))


def validate_group(table: GroupTable) -> ValidationReport:
    """Exhaustively check associativity, two-sided identity, and inverses."""
    report = ValidationReport()
    n = table.order
    rng = range(n)
    for a in rng:
        for b in rng:
            for c in rng:
                if table.mul[table.mul[a][b]][c] != table.mul[a][table.mul[b][c]]:
                    report.add("associativity", (a, b, c), "(ab)c != a(bc)")
                    break
            else:
                continue
            break
        else:
            continue
        break
    e = table.find_identity()
    if e is None:
        report.add("identity", (), "no two-sided identity element")
    else:
        for a in rng:
            if not any(table.mul[a][b] == e == table.mul[b][a] for b in rng):
                report.add("inverse", (a,), "element has no two-sided inverse")
                break
    return report


@dataclass(frozen=True)
class GFamilyTable:
    """A G-family of quandles: one binary operation on X per group element.

    op[g][a][b] is the index of a <|_g b.  The four family axioms
    (idempotence, the exponent law, trivial action of the identity, and
    twisted self-distributivity) are checked by check_gfamily_axioms.
    """

    carrier: tuple[str, ...]
    group: GroupTable
    op: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        if len(self.op) != self.group.order:
            raise StructuralError(
                f"gfamily: {len(self.op)} operation tables for group of order {self.group.order}"
            )
        for g, tab in enumerate(self.op):
            _check_table_shape(tab, len(self.carrier), f"gfamily op[{g}]")

    @property
    def size(self) -> int:
        return len(self.carrier)

    def act(self, a: int, g: int, b: int) -> int:
        """a <|_g b."""
        return self.op[g][a][b]

    def act_inv(self, a: int, g: int, b: int) -> int:
        """The unique c with c <|_g b = a, namely a <|_{g^-1} b."""
        return self.op[self.group.inverse(g)][a][b]


def check_gfamily_axioms(family: GFamilyTable) -> ValidationReport:
    """Exhaustive check of the four G-family axioms, first witness each."""
    report = ValidationReport()
    X = range(family.size)
    G = family.group.elements()
    mul = family.group.mul
    for g in G:
        for a in X:
            if family.act(a, g, a) != a:
                report.add("idempotence", (a, g), "a <|_g a != a")
                break
        else:
            continue
        break
    done = False
    for g in G:
        for h in G:
            for a in X:
                for b in X:
                    if family.act(family.act(a, g, b), h, b) != family.act(a, mul[g][h], b):
                        report.add("exponent", (a, b, g, h), "(a<|_g b)<|_h b != a<|_{gh} b")
                        done = True
                        break
                if done:
                    break
            if done:
                break
        if done:
            break
    e = family.group.find_identity()
    if e is None:
        report.add("identity-action", (), "group has no identity element")
    else:
        done = False
        for a in X:
            for b in X:
                if family.act(a, e, b) != a:
                    report.add("identity-action", (a, b), "a <|_e b != a")
                    done = True
                    break
            if done:
                break
    done = False
    for g in G:
        for h in G:
            hgh = mul[mul[family.group.inverse(h)][g]][h]
            for a in X:
                for b in X:
                    for c in X:
                        lhs = family.act(family.act(a, g, b), h, c)
                        rhs = family.act(family.act(a, h, c), hgh, family.act(b, h, c))
                        if lhs != rhs:
                            report.add(
                                "distributivity",
                                (a, b, c, g, h),
                                "(a<|_g b)<|_h c != (a<|_h c)<|_{h^-1gh}(b<|_h c)",
                            )
                            done = True
                            break
                    if done:
                        break
                if done:
                    break
            if done:
                break
        if done:
            break
    return report


def linear_gfamily(p: int, units: tuple[int, ...]) -> GFamilyTable:
    """The linear family over Z_p: a <|_M b = aM + b - bM for unit scalars M."""
    if p < 2 or any(p % d == 0 for d in range(2, p)):
        raise StructuralError(f"{p} is not prime")
    units = tuple(units)
    for u in units:
        if u % p == 0:
            raise StructuralError(f"{u} is not invertible mod {p}")
    group = GroupTable.units_mod(p, units)
    op = tuple(
        tuple(tuple((a * m + b - b * m) % p for b in range(p)) for a in range(p))
        for m in units
    )
    return GFamilyTable(tuple(str(i) for i in range(p)), group, op)


def r_tilde() -> GFamilyTable:
    """The fixed family X = F_3, G = Z_2 (written additively).

    a <|_0 b = a and a <|_1 b = 2b - a; the multiplicative group {+1, -1}
    of the linear construction is renamed additively as {0, 1}.
    """
    group = GroupTable.cyclic(2)
    op0 = tuple(tuple(a for _b in range(3)) for a in range(3))
    op1 = tuple(tuple((2 * b - a) % 3 for b in range(3)) for a in range(3))
    return GFamilyTable(("0", "1", "2"), group, (op0, op1))


@dataclass(frozen=True)
class QuandleTable:
    """A finite quandle presented by its operation table: op[x][y] = x <| y."""

    labels: tuple[str, ...]
    op: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        _check_table_shape(self.op, len(self.labels), "quandle table")

    @property
    def size(self) -> int:
        return len(self.labels)

    def act(self, x: int, y: int) -> int:
        return self.op[x][y]


def check_quandle_axioms(q: QuandleTable) -> ValidationReport:
    """Idempotence, bijective right translations, self-distributivity."""
    report = ValidationReport()
    n = q.size
    rng = range(n)
    for x in rng:
        if q.op[x][x] != x:
            report.add("idempotence", (x,), "x <| x != x")
            break
    for y in rng:
        seen = {q.op[x][y] for x in rng}
        if len(seen) != n:
            report.add("invertibility", (y,), "right translation by y is not a bijection")
            break
    done = False
    for x in rng:
        for y in rng:
            for z in rng:
                if q.op[q.op[x][y]][z] != q.op[q.op[x][z]][q.op[y][z]]:
                    report.add("distributivity", (x, y, z), "(x<|y)<|z != (x<|z)<|(y<|z)")
                    done = True
                    break
            if done:
                break
        if done:
            break
    return report


def dihedral_quandle(n: int) -> QuandleTable:
    labels = tuple(str(i) for i in range(n))
    op = tuple(tuple((2 * b - a) % n for b in range(n)) for a in range(n))
    return QuandleTable(labels, op)


def associated_quandle(family: GFamilyTable) -> QuandleTable:
    """The quandle on X x G with (a,g) <| (b,h) = (a <|_h b, h^-1 g h).

    Elements are ordered lexicographically by (carrier index, group index).
    Refuses input that fails the family axioms.
    """
    report = check_gfamily_axioms(family)
    if not report.ok:
        raise AxiomError(report)
    pairs = [(a, g) for a in range(family.size) for g in family.group.elements()]
    index = {p: i for i, p in enumerate(pairs)}
    mul = family.group.mul
    inv = family.group.inverse
    op = []
    for (a, g) in pairs:
        row = []
        for (b, h) in pairs:
            row.append(index[(family.act(a, h, b), mul[mul[inv(h)][g]][h])])
        op.append(tuple(row))
    labels = tuple(
        f"({family.carrier[a]},{family.group.labels[g]})" for (a, g) in pairs
    )
    return QuandleTable(labels, tuple(op))


def serialize_group(table: GroupTable) -> str:
    lines = [f"group {table.order}"]
    lines.extend(" ".join(str(v) for v in row) for row in table.mul)
    return "\n".join(lines) + "\n"


def serialize_gfamily(family: GFamilyTable) -> str:
    lines = [f"gfamily {family.size} {family.group.order}"]
    lines.extend(" ".join(str(v) for v in row) for row in family.group.mul)
    for g in family.group.elements():
        lines.extend(" ".join(str(v) for v in row) for row in family.op[g])
    return "\n".join(lines) + "\n"


def _read_rows(tokens: list[list[int]], n: int, start: int, what: str):
    rows = tokens[start : start + n]
    if len(rows) != n:
        raise StructuralError(f"{what}: expected {n} rows")
    return tuple(tuple(row) for row in rows), start + n


def parse_group(text: str) -> GroupTable:
    lines = [ln.split("#")[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("group "):
        raise StructuralError("expected 'group <n>' header")
    try:
        n = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise StructuralError("bad group header") from exc
    try:
        rows = [[int(t) for t in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise StructuralError("non-integer table entry") from exc
    mul, _ = _read_rows(rows, n, 0, "group table")
    return GroupTable(tuple(str(i) for i in range(n)), mul)


def parse_gfamily(text: str) -> GFamilyTable:
    lines = [ln.split("#")[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("gfamily "):
        raise StructuralError("expected 'gfamily <|X|> <|G|>' header")
    parts = lines[0].split()
    try:
        nx, ng = int(parts[1]), int(parts[2])
    except (IndexError, ValueError) as exc:
        raise StructuralError("bad gfamily header") from exc
    try:
        rows = [[int(t) for t in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise StructuralError("non-integer table entry") from exc
    if len(rows) != ng + ng * nx:
        raise StructuralError(
            f"gfamily body: expected {ng + ng * nx} rows, got {len(rows)}"
        )
    gmul = tuple(tuple(row) for row in rows[:ng])
    for row in gmul:
        if len(row) != ng:
            raise StructuralError("group block has wrong row length")
    group = GroupTable(tuple(str(i) for i in range(ng)), gmul)
    op = []
    pos = ng
    for _g in range(ng):
        tab, pos = _read_rows(rows, nx, pos, "gfamily op")
        op.append(tab)
    return GFamilyTable(tuple(str(i) for i in range(nx)), group, tuple(op))


BUILTIN_FAMILIES = {
    "r-tilde": r_tilde,
    "trivial": lambda: linear_gfamily(3, (1,)),
    "one-element": lambda: GFamilyTable(
        ("0",), GroupTable.cyclic(1), (((0,),),)
    ),
}


def family_by_name(name: str) -> GFamilyTable:
    try:
        return BUILTIN_FAMILIES[name]()
    except KeyError:
        raise StructuralError(f"unknown builtin family {name!r}") from None
