import itertools
from importlib import resources

import pytest

from foamcocycle.algebra import family_by_name, r_tilde
from foamcocycle.diagrams import (
    Coloring,
    ParseError,
    _orientation_assignments,
    coloring_count,
    enumerate_colorings,
    insert_r2,
    parse_graph_diagram,
    relabel,
    serialize_graph_diagram,
    verify_coloring,
)

RT = r_tilde()


def load(name):
    return parse_graph_diagram(
        resources.files("foamcocycle.data").joinpath(name).read_text()
    )


def brute_force_count(d, fam):
    """Independent oracle: filter every raw assignment."""
    arcs = sorted(d.arcs)
    edges = d.edges()
    count = 0
    for xs in itertools.product(range(fam.size), repeat=len(arcs)):
        for gs in itertools.product(list(fam.group.elements()), repeat=len(edges)):
            flow = dict(zip(edges, gs))
            colors = {a: (x, flow[d.edge_of(a)]) for a, x in zip(arcs, xs)}
            ok = True
            for c in d.crossings:
                xi, _ = colors[c.under_in]
                xo, go = colors[c.over]
                xu, _ = colors[c.under_out]
                if fam.act(xi, go, xo) != xu:
                    ok = False
                    break
            if ok:
                for v in d.vertices:
                    if len({colors[a][0] for a, _ in v.slots}) != 1:
                        ok = False
                        break
                    acc = fam.group.identity
                    for a, e in v.slots:
                        g = colors[a][1]
                        acc = fam.group.mul[acc][
                            g if e == "tail" else fam.group.inverse(g)
                        ]
                    if acc != fam.group.identity:
                        ok = False
                        break
            if ok:
                count += sum(1 for _ in _orientation_assignments(d, fam, flow))
    return count


def test_theta0_parses():
    d = load("theta0.graph")
    assert len(d.vertices) == 2
    assert len(d.crossings) == 0
    assert len(d.edges()) == 3


def test_5_2_parses():
    d = load("5_2.graph")
    assert len(d.vertices) == 2
    assert len(d.crossings) == 5
    assert len(d.edges()) == 3


def test_duplicate_end_is_parse_error():
    text = "arc a\narc b\nvertex a:head a:head b:head\n"
    with pytest.raises(ParseError):
        parse_graph_diagram(text)


def test_dangling_end_is_parse_error():
    text = "arc a\narc b\nvertex a:head a:tail b:head\n"
    with pytest.raises(ParseError):
        parse_graph_diagram(text)


def test_unknown_record_reports_line():
    with pytest.raises(ParseError) as err:
        parse_graph_diagram("arc a\nwhat a b\n")
    assert err.value.lineno == 2


def test_theta0_colorings_monochromatic_with_zero_sum_flows():
    d = load("theta0.graph")
    cols = enumerate_colorings(d, RT)
    assert len(cols) == 60  # regression value from first computation
    for c in cols:
        colors = dict(c.arc_colors)
        assert len({x for x, _ in colors.values()}) == 1
        flow = [colors[a][1] for a in sorted(d.arcs)]
        assert sum(flow) % 2 == 0
    assert brute_force_count(d, RT) == 60


def test_5_2_has_84_colorings():
    d = load("5_2.graph")
    cols = enumerate_colorings(d, RT)
    assert len(cols) == 84
    trivial = [
        c for c in cols if len({x for x, _ in dict(c.arc_colors).values()}) == 1
    ]
    assert len(trivial) == 60
    assert all(verify_coloring(d, RT, c) for c in cols)


def test_one_element_family_counts_orientations_only():
    one = family_by_name("one-element")
    assert coloring_count(load("theta0.graph"), one) == 8
    assert coloring_count(load("circle.graph"), one) == 2


def test_circle_count():
    d = load("circle.graph")
    assert coloring_count(d, RT) == 12
    assert brute_force_count(d, RT) == 12


def test_monochromatic_colorings_exist_for_every_carrier_element():
    d = load("5_2.graph")
    cols = enumerate_colorings(d, RT)
    for a in range(3):
        mono = [
            c
            for c in cols
            if all(x == a and g == 0 for x, g in dict(c.arc_colors).values())
        ]
        assert len(mono) == 8  # 2^(number of edges)


def test_r2_insertion_preserves_count():
    d = load("5_2.graph")
    assert coloring_count(insert_r2(d, "s3", "n1"), RT) == 84
    assert coloring_count(insert_r2(d, "n1", "s1"), RT) == 84


def test_relabeling_is_a_bijection_of_colorings():
    d = load("5_2.graph")
    mapping = {a: f"w{i}" for i, a in enumerate(sorted(d.arcs, reverse=True))}
    assert coloring_count(relabel(d, mapping), RT) == coloring_count(d, RT)


def test_canonical_serialization_round_trips():
    d = load("5_2.graph")
    text = serialize_graph_diagram(d)
    again = parse_graph_diagram(text)
    assert serialize_graph_diagram(again) == text
    assert coloring_count(again, RT) == 84


def test_enumeration_is_deterministic():
    d = load("5_2.graph")
    a = enumerate_colorings(d, RT)
    b = enumerate_colorings(d, RT)
    assert a == b
