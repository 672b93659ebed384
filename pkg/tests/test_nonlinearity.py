import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdfronts import CSD, ConfigError, ConfinedLinear, Potential, Reaction
from rdfronts.nonlinearity import H, comparison_reaction, dh_ds, h, kpp_linearization_range


def test_kpp_values(kpp):
    assert kpp.f(0.5) == pytest.approx(0.25)
    assert kpp.F(1.0) == pytest.approx(1.0 / 6.0)
    assert kpp.fprime0 == pytest.approx(1.0)
    assert kpp.lipschitz == pytest.approx(1.0)
    assert kpp.check()["kind"] == "kpp"


def test_bistable_values(cubic):
    assert cubic.F(1.0) == pytest.approx(1.0 / 12.0 - 0.25 / 6.0)
    assert cubic.fprime0 == pytest.approx(-0.25)
    assert cubic.unstable_zero == 0.25
    assert cubic.lipschitz == pytest.approx(0.75)
    diag = cubic.check()
    assert diag["integral"] > 0


def test_zero_extension(kpp, cubic):
    s = np.array([-0.5, -1e-9, 1 + 1e-9, 2.0])
    assert np.all(kpp.f(s) == 0)
    assert np.all(cubic.f(s) == 0)
    assert cubic.F(2.0) == pytest.approx(cubic.F(1.0))


@pytest.mark.parametrize("reaction", [Reaction.kpp(2.0), Reaction.bistable(0.3, 1.5),
                                      Reaction.bistable(0.25).with_floor(1.0)])
def test_antiderivative_matches_f(reaction):
    s = np.linspace(0.01, 0.99, 50)
    e = 1e-6
    fd = (reaction.F(s + e) - reaction.F(s - e)) / (2 * e)
    assert np.max(np.abs(fd - reaction.f(s))) < 1e-6


def test_derivative_matches_f(cubic):
    s = np.linspace(0.01, 0.99, 50)
    e = 1e-6
    fd = (cubic.f(s + e) - cubic.f(s - e)) / (2 * e)
    assert np.max(np.abs(fd - cubic.df(s))) < 1e-8


def test_tabulated_reaction_agrees_with_formula(tmp_path):
    s = np.linspace(0, 1, 201)
    path = tmp_path / "f.csv"
    path.write_text("s,f\n" + "\n".join(f"{a},{a * (a - 0.25) * (1 - a)}" for a in s))
    tab = Reaction.from_csv(path, "bistable")
    exact = Reaction.bistable(0.25)
    t = np.linspace(0, 1, 777)
    assert np.max(np.abs(tab.f(t) - exact.f(t))) < 1e-5
    assert tab.unstable_zero == pytest.approx(0.25, abs=1e-6)
    assert tab.F(1.0) == pytest.approx(exact.F(1.0), abs=1e-6)
    tab.check()


def test_sign_pattern_violations():
    bad = Reaction("kpp", table=((0, 0.5, 1), (0, -0.1, 0)))
    with pytest.raises(ConfigError):
        bad.check()
    with pytest.raises(ConfigError):
        Reaction.bistable(0.6).check()  # integral of f is negative
    with pytest.raises(ConfigError):
        Reaction.bistable(1.2)


def test_linearization_range(kpp):
    eta, theta = kpp_linearization_range(kpp, 0.5)
    assert eta == pytest.approx(0.5)
    assert theta == pytest.approx(0.125)
    with pytest.raises(ConfigError):
        kpp_linearization_range(kpp, 1.5)


@given(st.floats(0.01, 0.99))
def test_linearization_range_inequality(delta):
    kpp = Reaction.kpp()
    eta, _ = kpp_linearization_range(kpp, delta)
    s = np.linspace(0, eta, 200)
    assert np.all(kpp.f(s) >= (1 - delta) * s - 1e-12)


@given(st.floats(0.05, 0.45), st.floats(0.1, 5.0))
def test_comparison_reaction_is_bistable_with_same_theta(theta, m):
    f = comparison_reaction(Reaction.bistable(theta), m)
    s = np.linspace(0, 1, 4001)[1:-1]
    v = f.f(s)
    assert np.all(v[s < theta - 1e-9] < 0)
    assert np.all(v[s > theta + 1e-9] > 0)
    assert f.unstable_zero == pytest.approx(theta, abs=1e-6)


@given(st.floats(0.1, 5.0), st.floats(0.0, 5.0), st.sampled_from(["linear", "cosine"]))
def test_csd_weight(L1, extra, transition):
    het = CSD(L1, L1 + extra, 1.0, transition)
    r = np.linspace(0, L1 + extra + 2, 500)
    w = het.weight(r)
    assert np.all((w >= 0) & (w <= 1))
    assert np.all(w[r <= L1] == 1)
    assert np.all(w[r >= L1 + extra + 1e-12] == 0)
    assert np.all(np.diff(w) <= 1e-15)


def test_heterogeneous_reaction_forms(cubic):
    het = CSD(1.0, 2.0, 3.0)
    r = np.array([0.5, 1.5, 2.5])
    s = np.array([0.6, 0.6, 0.6])
    w = het.weight(r)
    assert np.allclose(h(het, cubic, r, s), w * cubic.f(s) - (1 - w) * 3.0 * s)
    e = 1e-6
    assert np.allclose((H(het, cubic, r, s + e) - H(het, cubic, r, s - e)) / (2 * e), h(het, cubic, r, s))
    assert np.allclose((h(het, cubic, r, s + e) - h(het, cubic, r, s - e)) / (2 * e), dh_ds(het, cubic, r, s))
    conf = ConfinedLinear(0.5, Potential.quadratic())
    assert np.allclose(h(conf, cubic, r, s), cubic.f(s) - 0.5 * r**2 * s)


def test_invalid_parameters():
    with pytest.raises(ConfigError):
        CSD(2.0, 1.0)
    with pytest.raises(ConfigError):
        Reaction("logistic")
    with pytest.raises(ConfigError):
        ConfinedLinear(-1.0, Potential.quadratic())
