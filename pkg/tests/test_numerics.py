import math

import numpy as np
import pytest
from scipy import integrate as sci_integrate

from smooth_bergman.amplitude import build_pipeline
from smooth_bergman.bergman_numerics import (
    KernelEstimate,
    apply_projection,
    compare_local_global,
    oracle_kernel,
    reproducing_sweep,
    sup_norm_estimate,
)
from smooth_bergman.errors import DomainError, OracleError, QuadratureError
from smooth_bergman.polarize import Weight
from smooth_bergman.quadrature import QuadratureDomain, disk_rule, integrate
from smooth_bergman.sweep import SweepReport, fit_slope

H_SWEEP = [0.1, 0.05, 0.025, 0.0125]


@pytest.fixture(scope="module")
def fock_kernel():
    w = Weight.fock(1, validity_radius=2.0)
    cp, s = build_pipeline(w, 2)
    return cp.phase.polarization, s


# -- quadrature -------------------------------------------------------------


def test_disk_rule_moments():
    rule = disk_rule(1.5, 8, 32, panels=3)
    # int_{|y| < R} |y|^(2k) = pi R^(2k+2) / (k+1)
    for k in range(5):
        assert np.sum(rule.weights * np.abs(rule.nodes) ** (2 * k)) == pytest.approx(
            math.pi * 1.5 ** (2 * k + 2) / (k + 1), rel=1e-13
        )
    assert abs(np.sum(rule.weights * rule.nodes**3)) < 1e-13


def test_integrate_gaussian_two_variables():
    dom = QuadratureDomain.for_h((0j, 0j), 1.0, 0.05)
    res = integrate(lambda y: np.exp(-(abs(y[0]) ** 2 + abs(y[1]) ** 2) / 0.05), dom)
    # each disk carries pi h (1 - exp(-R^2 / h))
    assert res.value.real == pytest.approx((math.pi * 0.05 * (1 - math.exp(-20))) ** 2, rel=1e-12)


def test_integrate_reports_nonconvergence():
    dom = QuadratureDomain((0j,), 1.0, n_radial=2, n_angular=4, panels=1)
    with pytest.raises(QuadratureError):
        integrate(lambda y: np.exp(-abs(y[0] - 0.5) ** 2 / 1e-4), dom, tol=1e-14, max_level=1)


# -- slope fits -------------------------------------------------------------


def test_fit_slope_power_law():
    h = np.array(H_SWEEP)
    fit = fit_slope(h, 3 * h**2)
    assert fit.slope == pytest.approx(2.0)
    assert fit.residual < 1e-12
    assert fit_slope(h, [1e-12] * 4).exact


def test_sweep_csv_format():
    rep = SweepReport.from_errors(H_SWEEP, [1e-2, 2.5e-3, 6.25e-4, 1.5625e-4], threshold=1.7,
                                  metadata={"label": "demo"})
    lines = rep.csv_text().splitlines()
    assert lines[0].startswith("# {")
    assert lines[1] == "h,error,slope,residual"
    assert len(lines) == 6 and rep.passed and rep.slope == pytest.approx(2.0)


# -- projection -------------------------------------------------------------


@pytest.mark.parametrize("x", [0j, 0.25 + 0j, 0.15 + 0.2j])
@pytest.mark.parametrize("k", range(5))
def test_fock_projection_reproduces_monomials(fock_kernel, x, k):
    pol, s = fock_kernel
    q = QuadratureDomain((0j,), 1.2)
    ker = KernelEstimate(s, pol, 0.05)
    assert apply_projection(ker, {(k,): 1}, q, [x]) == pytest.approx(x**k, abs=1e-6)


def test_fock_projection_examples(fock_kernel):
    pol, s = fock_kernel
    q = QuadratureDomain((0j,), 1.2)
    ker = KernelEstimate(s, pol, 0.05)
    assert apply_projection(ker, {(2,): 1}, q, [0.1]) == pytest.approx(0.01, abs=1e-6)
    assert apply_projection(ker, {(0,): 0}, q, [0.1]) == 0
    with pytest.raises(DomainError):
        apply_projection(ker, {(0,): 1}, q, [0.7])
    with pytest.raises(DomainError):
        apply_projection(KernelEstimate(s, pol, 0.2), {(0,): 1}, q, [0.0])


def test_fock_sweep_is_exact(fock_kernel):
    pol, s = fock_kernel
    rep = reproducing_sweep(s, pol, {(0,): 1, (1,): 1}, QuadratureDomain((0j,), 2.0), [0], H_SWEEP)
    assert rep.exact and rep.passed


def test_sweep_needs_geometric_h(fock_kernel):
    pol, s = fock_kernel
    with pytest.raises(ValueError):
        reproducing_sweep(s, pol, {(0,): 1}, QuadratureDomain((0j,), 2.0), [0], H_SWEEP[:3])
    with pytest.raises(ValueError):
        reproducing_sweep(s, pol, {(0,): 1}, QuadratureDomain((0j,), 2.0), [0], [0.1, 0.05, 0.02, 0.01])


def test_quartic_sweep_one_plus_y(quartic):
    cp, s = build_pipeline(quartic, 1)
    rep = reproducing_sweep(s, cp.phase.polarization, {(0,): 1, (1,): 1}, QuadratureDomain((0j,), 1.2), [0], H_SWEEP)
    assert rep.slope >= 0.7


# -- exact-kernel oracle ----------------------------------------------------


def test_oracle_fock_gram_and_diagonal():
    h = 0.1
    orc = oracle_kernel(Weight.fock(1), 12, None, h)
    diag = 1 / orc.scaling**2
    want = [math.pi * h ** (k + 1) * math.factorial(k) for k in range(13)]
    # the auto radius leaves a tail share below 1e-10 of the top moment
    np.testing.assert_allclose(diag, want, rtol=2e-10)
    assert complex(orc([0], [0])) == pytest.approx(1 / (math.pi * h), rel=1e-12)
    x, y = 0.2 + 0.1j, -0.1 + 0.3j
    assert complex(orc([x], [y])) == pytest.approx(np.conj(complex(orc([y], [x]))), abs=1e-12)
    assert complex(orc([x], [y])) == pytest.approx(np.exp(x * np.conj(y) / h) / (math.pi * h), rel=1e-10)


def test_oracle_quartic_radial_density(quartic):
    # K(0, 0) = 1 / int exp(-2 Phi / h) for a radial weight
    for h in (0.1, 0.025):
        norm = math.pi * sci_integrate.quad(lambda t: math.exp(-(t + t * t / 5) / h), 0, np.inf, epsabs=0, epsrel=1e-13)[0]
        orc = oracle_kernel(quartic, 24, None, h)
        assert complex(orc([0], [0])).real == pytest.approx(1 / norm, rel=1e-10)


def test_oracle_reproduces_basis():
    orc = oracle_kernel(Weight.fock(1), 10, None, 0.1)
    assert orc.reproduce({(3,): 1}, [0.2 + 0.1j]) == pytest.approx((0.2 + 0.1j) ** 3, abs=1e-10)


def test_oracle_restrictions():
    with pytest.raises(OracleError):
        oracle_kernel(Weight.fock(2), 4, None, 0.1)
    with pytest.raises(OracleError):
        oracle_kernel(Weight.fock(1), 24, 3.0, 0.1, cond_limit=0.5)


def test_local_global_fock_exact(fock_kernel):
    pol, s = fock_kernel
    rep = compare_local_global(s, pol, [0, 0.1, 0.1 + 0.1j], H_SWEEP, basis_degree=24)
    assert rep.exact


def test_sup_norm_estimate_holomorphic():
    w = Weight.fock(1)
    q = QuadratureDomain((0j,), 1.0)
    rep = sup_norm_estimate(lambda y: np.ones_like(y[0]), lambda y: np.zeros_like(y[0]), w, q, 0.05)
    assert rep.dbar_term == 0.0
    # ||1||^2 = pi h (1 - exp(-1/h)) on the unit disk
    assert rep.l2_term == pytest.approx(math.sqrt(math.pi * 0.05) / 0.05, rel=1e-8)
    assert 0 < rep.measured_constant < 1
