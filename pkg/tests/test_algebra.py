import itertools

import pytest

from foamcocycle.algebra import (
    AxiomError,
    GFamilyTable,
    GroupTable,
    QuandleTable,
    StructuralError,
    associated_quandle,
    check_gfamily_axioms,
    check_quandle_axioms,
    dihedral_quandle,
    linear_gfamily,
    parse_gfamily,
    parse_group,
    r_tilde,
    serialize_gfamily,
    serialize_group,
    validate_group,
)


def all_unit_subgroups(p):
    """Every subgroup of (Z/p)*, as tuples of unit representatives."""
    units = [u for u in range(1, p)]
    subgroups = []
    for r in range(1, len(units) + 1):
        for subset in itertools.combinations(units, r):
            if 1 not in subset:
                continue
            closed = all((a * b) % p in subset for a in subset for b in subset)
            if closed:
                subgroups.append(subset)
    return subgroups


def test_z2_is_a_group():
    assert validate_group(GroupTable.cyclic(2)).ok


def test_left_projection_table_fails():
    table = GroupTable(("0", "1"), ((0, 0), (1, 1)))
    report = validate_group(table)
    assert not report.ok
    assert any(v.axiom == "identity" for v in report.violations)


def test_units_mod_three_pass():
    table = GroupTable.units_mod(3, (1, 2))
    assert validate_group(table).ok
    assert table.order == 2


def test_malformed_table_is_structural():
    with pytest.raises(StructuralError):
        GroupTable(("0", "1"), ((0, 1), (1,)))
    with pytest.raises(StructuralError):
        GroupTable(("0", "1"), ((0, 1), (1, 2)))


def test_linear_family_f3_passes():
    fam = linear_gfamily(3, (1, 2))
    assert check_gfamily_axioms(fam).ok


def test_corrupted_family_fails_with_witness():
    fam = r_tilde()
    op = [list(map(list, tab)) for tab in fam.op]
    op[1][0][1] = (op[1][0][1] + 1) % 3
    bad = GFamilyTable(fam.carrier, fam.group, tuple(tuple(tuple(r) for r in t) for t in op))
    report = check_gfamily_axioms(bad)
    assert not report.ok
    assert report.violations[0].witness


def test_constant_action_family_passes():
    group = GroupTable.cyclic(3)
    op = tuple(tuple(tuple(a for _ in range(4)) for a in range(4)) for _ in range(3))
    fam = GFamilyTable(("0", "1", "2", "3"), group, op)
    assert check_gfamily_axioms(fam).ok


def test_linear_family_examples():
    fam = linear_gfamily(3, (1, 2))
    # units (1, 2): index 0 acts trivially, index 1 acts by a |-> 2b - a
    for a in range(3):
        for b in range(3):
            assert fam.act(a, 0, b) == a
            assert fam.act(a, 1, b) == (2 * b - a) % 3


def test_linear_family_p5():
    fam = linear_gfamily(5, (1, 4))
    assert check_gfamily_axioms(fam).ok


def test_linear_family_rejects_bad_units():
    with pytest.raises(StructuralError):
        linear_gfamily(5, (1, 2))  # 2*2 = 4 not in units
    with pytest.raises(StructuralError):
        linear_gfamily(4, (1, 3))  # 4 is not prime


def test_r_tilde_values():
    fam = r_tilde()
    assert fam.act(1, 0, 1) == 1
    assert fam.act(0, 1, 1) == 2  # 2*1 - 0
    assert fam.act(0, 0, 2) == 0
    assert fam.act(2, 0, 1) == 2
    assert check_gfamily_axioms(fam).ok


def test_linear_families_all_unit_subgroups():
    for p in (2, 3, 5, 7):
        for units in all_unit_subgroups(p):
            fam = linear_gfamily(p, units)
            assert check_gfamily_axioms(fam).ok, (p, units)


def test_associated_quandle_r_tilde():
    fam = r_tilde()
    q = associated_quandle(fam)
    # elements in lexicographic (carrier, group) order
    idx = {(a, g): 2 * a + g for a in range(3) for g in range(2)}
    # ((0,1)) <| ((1,1)) = (2,1)
    assert q.act(idx[(0, 1)], idx[(1, 1)]) == idx[(2, 1)]
    # (a,g) <| (a,e) = (a,g)
    for a in range(3):
        for g in range(2):
            assert q.act(idx[(a, g)], idx[(a, 0)]) == idx[(a, g)]
    assert check_quandle_axioms(q).ok


def test_associated_quandle_second_coordinate_conjugates():
    fam = r_tilde()
    q = associated_quandle(fam)
    mul = fam.group.mul
    inv = fam.group.inverse
    pairs = [(a, g) for a in range(3) for g in range(2)]
    for i, (a, g) in enumerate(pairs):
        for j, (b, h) in enumerate(pairs):
            out = pairs[q.act(i, j)]
            assert out[1] == mul[mul[inv(h)][g]][h]
            assert out[1] == g  # abelian G: conjugation is trivial


def test_associated_quandle_of_all_small_linear_families():
    for p in (2, 3, 5):
        for units in all_unit_subgroups(p):
            fam = linear_gfamily(p, units)
            assert check_quandle_axioms(associated_quandle(fam)).ok


def test_associated_quandle_refuses_bad_family():
    fam = r_tilde()
    op = [list(map(list, tab)) for tab in fam.op]
    op[1][2][0] = (op[1][2][0] + 1) % 3
    bad = GFamilyTable(fam.carrier, fam.group, tuple(tuple(tuple(r) for r in t) for t in op))
    with pytest.raises(AxiomError):
        associated_quandle(bad)


def test_left_invertibility_witness():
    # (a <|_g b) <|_{g^-1} b = a is the paper-level inverse construction
    for fam in (r_tilde(), linear_gfamily(5, (1, 2, 3, 4))):
        for g in fam.group.elements():
            for a in range(fam.size):
                for b in range(fam.size):
                    assert fam.act_inv(fam.act(a, g, b), g, b) == a


def test_dihedral_quandle_passes():
    assert check_quandle_axioms(dihedral_quandle(3)).ok


def test_trivial_quandle_passes():
    q = QuandleTable(("0", "1"), ((0, 0), (1, 1)))
    assert check_quandle_axioms(q).ok


def test_quandle_idempotence_mutation_detected():
    q = QuandleTable(("0", "1", "2"), ((1, 2, 1), (2, 1, 0), (1, 0, 2)))
    report = check_quandle_axioms(q)
    assert not report.ok
    assert any(v.axiom == "idempotence" for v in report.violations)


def test_serialization_round_trip():
    fam = r_tilde()
    text = serialize_gfamily(fam)
    again = parse_gfamily(text)
    assert again.op == fam.op
    assert again.group.mul == fam.group.mul
    assert serialize_gfamily(again) == text

    g = GroupTable.cyclic(4)
    assert parse_group(serialize_group(g)).mul == g.mul


def test_parse_rejects_garbage():
    with pytest.raises(StructuralError):
        parse_gfamily("gfamily 3 2\n0 1\n1 0\n")
    with pytest.raises(StructuralError):
        parse_group("nope\n")
