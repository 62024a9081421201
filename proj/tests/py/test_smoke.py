import json
import math

import _horizon as hz
import pytest


def test_evaluate_and_gradient():
    assert hz.evaluate("x1^3 + x2", 2, [2.0, 1.0]) == pytest.approx(9.0)
    assert hz.evaluate("indicator(set { x1 >= 0; })", 1, [-1.0]) == math.inf
    g = hz.gradient("x1^3 + x2", 2, [2.0, 0.0])
    assert g == pytest.approx([12.0, 1.0])


def test_subdiff_at_infinity_abs():
    rep = json.loads(hz.subdiff_at_infinity("abs(x1)", 1, seed=3))
    pts = sorted(p[0] for p in rep["limiting"]["points"])
    assert pts == pytest.approx([-1.0, 1.0])
    assert rep["singular"]["rays"] == []


def test_subdiff_at_infinity_exp():
    rep = json.loads(hz.subdiff_at_infinity("exp(x1)", 1))
    assert [p[0] for p in rep["limiting"]["points"]] == pytest.approx([0.0], abs=1e-6)
    assert [r[0] for r in rep["singular"]["rays"]] == pytest.approx([1.0])


def test_normal_cone_hyperbola():
    cone = json.loads(
        hz.normal_cone_at_infinity("set { graph: x2 = 1/x1; }", 2, index_set=[1, 2])
    )
    rays = sorted(tuple(round(c, 2) for c in r) for r in cone["rays"])
    assert rays == [(-1.0, 0.0), (0.0, -1.0)]


def test_lipschitz_and_clarke():
    lip = json.loads(hz.lipschitz_at_infinity("exp(x1)", 1))
    assert lip["verdict"]["verdict"] == "Fails"
    hull = json.loads(hz.clarke_at_infinity("abs(x1)", 1))
    assert sorted(p[0] for p in hull["points"]) == pytest.approx([-1.0, 1.0])
    with pytest.raises(hz.HorizonError):
        hz.clarke_at_infinity("exp(x1)", 1)


def test_optimality_smoke():
    rep = json.loads(hz.check_optimality("exp(x1) + x2^2", "", 2))
    assert rep["diagnosis"] == "ConsistentUnattained"
    assert rep["condition"]["verdict"] == "Holds"


def test_errors_surface_as_python_exceptions():
    with pytest.raises(hz.HorizonError):
        hz.evaluate("x1 +", 1, [0.0])
