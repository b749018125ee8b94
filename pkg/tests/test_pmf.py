from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvxpmf.pmf import (
    KnotSet,
    MixtureWeights,
    Pmf,
    cdf,
    h_process,
    h_values,
    is_convex,
    knots,
    laplacian,
    mixture_compose,
    mixture_decompose,
    norm,
    shift_values,
    triangular,
    truncated_geometric,
)


def test_pmf_validation():
    with pytest.raises(ValueError):
        Pmf([1.0])  # Dirac at 0
    with pytest.raises(ValueError):
        Pmf([0.5, 0.6])
    with pytest.raises(ValueError):
        Pmf([0.5, 0.5, 0.0])  # mass[S] must be positive
    with pytest.raises(ValueError):
        Pmf([1.2, -0.2])
    p = Pmf([0.25, 0.75])
    assert p.S == 1
    with pytest.raises(ValueError):
        p.mass[0] = 0.3


def test_cdf_examples(pmfs):
    F = cdf(Pmf([2 / 3, 1 / 3]))
    np.testing.assert_allclose(F, [2 / 3, 1, 1], atol=1e-15)
    assert cdf(pmfs["p0"])[0] == pytest.approx(11 / 66, abs=1e-15)
    for p in pmfs.values():
        assert cdf(p)[-1] == pytest.approx(1.0, abs=1e-12)
        assert cdf(p).size == p.S + 2


def test_h_process_examples():
    p = Pmf([2 / 3, 1 / 3])
    assert h_process(p, 0) == 0.0
    assert h_process(p, 2) == pytest.approx(5 / 3, abs=1e-15)
    S = p.S
    assert h_process(p, S + 2) - h_process(p, S + 1) == pytest.approx(1.0, abs=1e-15)


def test_h_telescoping(pmfs):
    for p in pmfs.values():
        H = h_values(p, 20)
        F = np.concatenate((cdf(p), np.ones(30)))[:20]
        np.testing.assert_allclose(np.diff(H), F, atol=1e-14)


def test_laplacian_examples():
    assert laplacian(Pmf([1 / 2, 1 / 3, 1 / 6]), 1) == pytest.approx(0.0, abs=1e-15)
    # T_11(10) = 2/132, T_11(11) = T_11(12) = 0
    assert laplacian(triangular(11), 11) == pytest.approx(1 / 66, abs=1e-15)
    p = Pmf([0.5, 0.3, 0.2])
    assert laplacian(p, 4) == 0.0
    assert laplacian(p, 10) == 0.0


def test_knots_and_convexity(pmfs):
    for j in range(2, 15):
        T = triangular(j)
        assert is_convex(T)
        assert knots(T).interior == ()
    assert knots(pmfs["p1"]).interior == (2, 5, 9)
    assert not is_convex(Pmf([0.25, 0.5, 0.25]))
    assert laplacian(Pmf([0.25, 0.5, 0.25]), 1) == pytest.approx(-0.5)
    # interior knot counts quoted for p1..p4
    assert [len(knots(pmfs[k])) for k in ("p1", "p2", "p3", "p4")] == [3, 4, 6, 9]


def test_knotset_boundaries():
    K = KnotSet((2, 5, 9), 10)
    assert K.boundaries == (0, 2, 5, 9, 11)
    assert K.intervals() == [(0, 2), (2, 5), (5, 9), (9, 11)]
    with pytest.raises(ValueError):
        KnotSet((5, 2), 10)
    with pytest.raises(ValueError):
        KnotSet((11,), 10)


def test_triangular_exact():
    for j in (2, 3, 7, 11):
        expect = [Fraction(2 * (j - i), j * (j + 1)) for i in range(j)]
        np.testing.assert_allclose(triangular(j).mass, [float(x) for x in expect], atol=1e-15)
    np.testing.assert_allclose(triangular(3).mass, [1 / 2, 1 / 3, 1 / 6], atol=1e-15)
    np.testing.assert_allclose(triangular(2).mass, [2 / 3, 1 / 3], atol=1e-15)
    np.testing.assert_allclose(triangular(11).mass, [(11 - i) / 66 for i in range(11)], atol=1e-15)
    for bad in (0, 1):
        with pytest.raises(ValueError):
            triangular(bad)


def test_mixture_examples(pmfs):
    w = mixture_decompose(triangular(11))
    assert w[11] == pytest.approx(1.0, abs=1e-12)
    assert sum(w[j] for j in range(1, 11)) == pytest.approx(0.0, abs=1e-12)

    w1 = mixture_decompose(pmfs["p1"])
    for j, v in {2: 1 / 6, 5: 1 / 6, 9: 1 / 2, 11: 1 / 6}.items():
        assert w1[j] == pytest.approx(v, abs=1e-12)
    assert set(w1.as_dict()) == {2, 5, 9, 11}

    w4 = mixture_decompose(pmfs["p4"])
    expect = {2: 1 / 12, 3: 1 / 6, 10: 1 / 6, 11: 1 / 12, **{j: 1 / 12 for j in range(4, 10)}}
    for j, v in expect.items():
        assert w4[j] == pytest.approx(v, abs=1e-12)

    with pytest.raises(ValueError):
        mixture_decompose(Pmf([0.25, 0.5, 0.25]))


def test_truncated_geometric(pmfs):
    p = truncated_geometric(0.5, 10)
    np.testing.assert_allclose(p.mass, pmfs["p5"].mass, atol=1e-15)
    assert p.mass[0] == pytest.approx(0.5 / (1 - 2.0**-11), abs=1e-15)
    assert is_convex(p)
    assert is_convex(truncated_geometric(0.3, 10))
    assert not is_convex(truncated_geometric(0.7, 10))
    # Laplacian at S vanishes exactly when q = 1/2: p(S-1) = 2 p(S)
    assert knots(p).interior == tuple(range(1, 10))
    assert laplacian(p, 10) == pytest.approx(0.0, abs=1e-18)
    assert knots(truncated_geometric(0.4, 10)).interior == tuple(range(1, 11))
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            truncated_geometric(bad, 10)


def test_norm(pmfs):
    assert norm([3, 4], 2) == 5.0
    assert norm([1, -2], np.inf) == 2.0
    for p in pmfs.values():
        assert norm(p.mass, 1) == pytest.approx(1.0, abs=1e-12)


def test_shift_values():
    np.testing.assert_array_equal(shift_values([3, 4, 6], 3), [0, 1, 3])
    with pytest.raises(ValueError):
        shift_values([2, 4], 3)


# weights below the knot tolerance are indistinguishable from 0 by design
weights_strategy = st.lists(
    st.one_of(st.just(0.0), st.floats(1e-4, 1.0)), min_size=2, max_size=14
).filter(
    lambda w: w[-1] > 0.05 and sum(w) > 0.1
)


def _weights(raw):
    w = np.array(raw, dtype=float)
    w[0] = 0.0  # no Dirac component
    return MixtureWeights(w / w.sum())


@settings(max_examples=100, deadline=None)
@given(weights_strategy)
def test_mixture_round_trips(raw):
    w = _weights(raw)
    p = mixture_compose(w)
    w2 = mixture_decompose(p)
    n = max(w.pi.size, w2.pi.size)
    a = np.zeros(n)
    a[: w.pi.size] = w.pi
    b = np.zeros(n)
    b[: w2.pi.size] = w2.pi
    assert np.abs(a - b).max() <= 1e-12
    assert np.abs(mixture_compose(w2).mass - p.mass).max() <= 1e-12


@settings(max_examples=100, deadline=None)
@given(weights_strategy)
def test_convex_pmf_properties(raw):
    w = _weights(raw)
    p = mixture_compose(w)
    # nonincreasing
    assert np.all(np.diff(p.mass) <= 1e-12)
    # knot / weight duality
    K = set(knots(p).interior)
    for j in range(1, p.S + 1):
        assert (j in K) == (w[j] > 1e-10 * j * (j + 1) / 2)
