import math
import os

import pytest

import bdssd

FIXTURES = os.environ.get("BDSSD_FIXTURES", os.path.join(os.path.dirname(__file__), "..", "..", "data", "fixtures"))


def fixture(name):
    return os.path.join(FIXTURES, name)


def test_load_and_validate():
    k = bdssd.load_chain(fixture("e2.json"))
    assert isinstance(k, bdssd.DiscreteKernel)
    assert k.d == 2
    rep = bdssd.validate(k)
    assert rep["ok"] and rep["ergodic"] and not rep["absorbing_top"]
    assert bdssd.stationary_pmf(k) == pytest.approx([0.25, 0.5, 0.25], abs=1e-15)
    g = bdssd.load_chain(fixture("e2c.json"))
    assert isinstance(g, bdssd.ContinuousGenerator)
    assert bdssd.eigenvalues(g) == pytest.approx([4.0, 2.0, 0.0], abs=1e-12)


def test_exact_classical_and_anti_dual():
    k = bdssd.load_exact_kernel(fixture("e2.json"))
    pair = bdssd.classical_dual(k)
    assert pair["residual"] == "0"
    assert pair["dual"].births == ["3/4", "2/3", "0"]
    cex = bdssd.load_exact_kernel(fixture("cex.json"))
    res = bdssd.anti_dual(cex)
    assert res["residual"] == "0"
    assert bdssd.classical_dual(res["primal"])["dual"] == cex


def test_spectral_dual_and_absorption():
    k = bdssd.load_chain(fixture("e2.json"))
    pair = bdssd.spectral_dual(k)
    assert pair["residual"] < 1e-12
    assert pair["link"][2] == pytest.approx([0.25, 0.5, 0.25])
    d1 = bdssd.DiscreteKernel([0.75], [0.0])
    weights, tail = bdssd.absorption_pmf(d1)
    assert weights[1] == pytest.approx(0.75)
    assert tail < 1e-12
    conv, _ = bdssd.geometric_convolution([0.25])
    assert conv[:5] == pytest.approx(weights[:5], abs=1e-15)
    assert bdssd.pgf_product([0.25], 0.5) == pytest.approx(0.75 * 0.5 / (1 - 0.125))


def test_continuous_laws():
    g = bdssd.ContinuousGenerator([2.0, 2.0], [1.0, 0.0])
    assert bdssd.occupation_laplace(g, [1.0, 1.0]) == pytest.approx(0.4, abs=1e-14)
    assert bdssd.gaussian_split_residual(g, [0.5, 2.0]) < 1e-10
    ts = [0.5, 1.0, 2.0, 4.0]
    a = bdssd.absorption_cdf(g, ts)
    b = bdssd.hypoexponential_cdf([4.0, 1.0], ts)
    assert a == pytest.approx(b, abs=1e-9)
    assert bdssd.hypoexponential_cdf([1.0, 1.0], [1.0])[0] == pytest.approx(1 - 2 * math.exp(-1))


def test_coupled_runs_are_reproducible():
    k = bdssd.load_chain(fixture("e2.json"))
    a = bdssd.run_coupled(k, seed=5, replica=2)
    b = bdssd.run_coupled(k, seed=5, replica=2)
    assert a == b
    assert a["dual"][-1] == 2
    assert sum(a["sojourns"]) == pytest.approx(a["absorption_time"])
    rep = bdssd.monte_carlo_sst(k, 5000, 1)
    assert rep["ks"] < 0.03
    assert rep["p_value"] is not None
    coord = bdssd.monte_carlo_sst(k, 2000, 1, coordinate_dual=True)
    assert coord["max_sojourn_z"] < 5


def test_errors_carry_codes():
    with pytest.raises(bdssd.BdssdError) as info:
        bdssd.load_chain(fixture("missing.json"))
    assert info.value.code == "ParseError"
    with pytest.raises(bdssd.BdssdError) as info:
        bdssd.absorption_pmf(bdssd.load_chain(fixture("e2.json")))
    assert info.value.code == "NoAbsorption"


def test_verify():
    ok, checks = bdssd.verify(fixture("cex.json"))
    assert ok
    names = {c["name"]: c for c in checks}
    assert names["absorption_vs_geometric_convolution"]["status"] == "skipped"
    assert names["pgf_grid"]["status"] == "pass"
