import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmsquad import canonical, orthopoly, weightfn
from cmsquad.canonical import CanonicalParam


def tables_for(name, n):
    return orthopoly.build_tables(weightfn.BUILTIN[name](), n)


def test_gaussian_small_cases():
    nodes, weights = canonical.gaussian_nodes_weights(tables_for("constant", 1))
    assert nodes[0] == pytest.approx(0.0, abs=1e-15) and weights[0] == pytest.approx(2.0, rel=1e-14)
    nodes, weights = canonical.gaussian_nodes_weights(tables_for("constant", 2))
    assert np.allclose(nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], atol=1e-12)
    assert np.allclose(weights, [1.0, 1.0], atol=1e-12)


def test_legendre_root_brackets():
    n = 5
    nodes = canonical.gaussian_nodes(tables_for("constant", n))
    for i, x in enumerate(nodes, start=1):
        assert -math.cos((2 * i - 1) * math.pi / (2 * n + 1)) <= x <= -math.cos(2 * i * math.pi / (2 * n + 1))


def test_lobatto_small_cases():
    rep = canonical.lobatto_rep(tables_for("constant", 1))
    assert list(rep.nodes) == [-1.0, 1.0] and np.allclose(rep.weights, [1, 1], atol=1e-14)
    rep = canonical.lobatto_rep(tables_for("constant", 2))
    assert np.allclose(rep.nodes, [-1, 0, 1], atol=1e-15)
    assert np.allclose(rep.weights, [1 / 3, 4 / 3, 1 / 3], atol=1e-12)
    assert list(rep.indices) == [1, 2, 1]


def test_even_weight_gives_symmetric_nodes():
    rep = canonical.lobatto_rep(tables_for("bump", 7))
    assert np.allclose(rep.nodes, -rep.nodes[::-1], atol=1e-14)


@pytest.mark.parametrize("name", ["constant", "ramp", "step"])
def test_xi_of_zero_is_gaussian(name):
    tables = tables_for(name, 6)
    assert np.allclose(canonical.xi_nodes(tables, 0.0), canonical.gaussian_nodes(tables), atol=1e-14)


def test_xi_large_a_approaches_eta():
    tables = tables_for("ramp", 6)
    eta = canonical.eta_all(tables)
    for i in range(1, 6):
        assert abs(canonical.xi_of_a(tables, i, 1e8) - eta[i]) < 1e-6
        assert abs(canonical.xi_of_a(tables, i + 1, -1e8) - eta[i]) < 1e-6


@given(a1=st.floats(-50, 50), a2=st.floats(-50, 50))
def test_xi_increasing_in_a_and_interlacing(a1, a2):
    tables = tables_for("ramp", 5)
    if a1 == a2:
        return
    lo, hi = sorted((a1, a2))
    x_lo, x_hi = canonical.xi_nodes(tables, lo), canonical.xi_nodes(tables, hi)
    eta = canonical.eta_all(tables)
    assert np.all(x_lo <= x_hi + 1e-13)  # equal up to roundoff when a1 ~ a2
    for xs in (x_lo, x_hi):
        assert np.all(eta[:-1] < xs) and np.all(xs < eta[1:])


@given(a=st.floats(-20, 20).filter(lambda v: v != 0))
def test_xi_are_roots_of_P(a):
    tables = tables_for("step", 6)
    xs = canonical.xi_nodes(tables, a)
    vals = orthopoly.eval_P(tables, a, xs).value
    assert np.max(np.abs(vals)) <= 1e-10 * max(1.0, abs(a))


def test_param_at_gaussian_and_lobatto_nodes():
    tables = tables_for("ramp", 6)
    for i, x in enumerate(canonical.gaussian_nodes(tables), start=1):
        assert canonical.param_of_x(tables, x) == CanonicalParam(i, 0.0)
    for r, x in enumerate(canonical.lobatto_interior(tables), start=1):
        p = canonical.param_of_x(tables, x)
        assert p.is_lobatto and p.r in (r, r + 1)


@given(x=st.floats(-0.999, 0.999), name=st.sampled_from(["constant", "ramp", "step"]))
def test_param_round_trip(x, name):
    tables = tables_for(name, 7)
    p = canonical.param_of_x(tables, x)
    if p.is_lobatto:
        assert abs(canonical.eta_all(tables)[p.r] - x) <= 1e-10
    else:
        assert abs(canonical.xi_of_a(tables, p.r, p.a) - x) <= 1e-10


def test_single_node_representation_for_n1():
    tables = tables_for("constant", 1)
    rep = canonical.rep_of_x(tables, 0.5)
    assert rep.param.a > 0
    assert np.allclose(rep.nodes, [-1.0, 0.5])
    assert np.allclose(rep.weights, [2 / 3, 4 / 3], atol=1e-14)
    assert rep.weight_at(0.5) == rep.weights[rep.position_of_x()]


@given(x=st.floats(-0.999, 0.999), name=st.sampled_from(["constant", "ramp", "step"]), n=st.integers(1, 12))
def test_rep_structure(x, name, n):
    tables = tables_for(name, n)
    rep = canonical.rep_of_x(tables, x)
    assert x in rep.nodes
    assert np.all(np.diff(rep.nodes) > 0) and np.all(rep.weights > 0)
    assert rep.total_index <= 2 * n + 1
    assert np.array_equal(rep.indices == 1, np.abs(rep.nodes) == 1.0)
    assert abs(rep.weights.sum() - tables.mass) <= 1e-12 * tables.mass
    if rep.param.a > 0:
        assert rep.nodes[0] == -1.0
    if rep.param.a < 0 and not rep.param.is_lobatto:
        assert rep.nodes[-1] == 1.0
    assert canonical.exactness_residual(rep, tables) <= 1e-8


def test_exactness_residual_is_sensitive():
    tables = tables_for("ramp", 4)
    rep = canonical.gaussian_rep(tables)
    assert canonical.exactness_residual(rep, tables) < 1e-12
    bumped = rep.weights.copy()
    bumped[1] += 1e-3
    bad = canonical.CanonicalRep(rep.param, rep.nodes, bumped, rep.indices, rep.n)
    assert canonical.exactness_residual(bad, tables) >= 1e-4


def test_serialized_parameter_is_finite():
    assert CanonicalParam(2, math.inf).serialize() == (1.0, 0.0)
    assert CanonicalParam(2, -4.0).serialize() == (-1.0, -0.25)


def test_rep_csv(tmp_path):
    rep = canonical.rep_of_x(tables_for("step", 3), 0.3)
    path = tmp_path / "rep.csv"
    canonical.write_rep_csv(rep, path)
    lines = path.read_text().splitlines()
    assert lines[1] == "u,weight,index" and len(lines) == 2 + len(rep.nodes)
