import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from condensate_lab.specfun import (
    BranchedRadical,
    Cut,
    QuadratureError,
    Segment,
    Side,
    contour_integrate,
    ellipk_agm,
    jacobi_sd,
    theta3,
    theta3_dz,
    theta3_reduced,
)


def hyp2f1_K(k, terms=300):
    """Independent oracle: K(k) = (pi/2) 2F1(1/2, 1/2; 1; k^2) by series."""
    m = k * k
    total, term = 0.0, 1.0
    for n in range(terms):
        total += term
        term *= ((n + 0.5) ** 2) / ((n + 1.0) ** 2) * m
    return math.pi / 2.0 * total


class TestEllipK:
    def test_degenerate_modulus(self):
        assert ellipk_agm(0.0) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_sqrt2_over_2_vs_series(self):
        k = math.sqrt(2) / 2
        assert ellipk_agm(k) == pytest.approx(hyp2f1_K(k), rel=1e-13)
        assert ellipk_agm(k) == pytest.approx(1.8540746773013719, rel=1e-14)

    def test_against_scipy(self):
        from scipy.special import ellipk as scipy_K
        for k in (0.1, 0.3, 0.6, 0.9, 0.99):
            assert ellipk_agm(k) == pytest.approx(scipy_K(k * k), rel=1e-13)

    def test_landen_transform_identity(self):
        # ascending Landen: K(sqrt(1-m^2)) = 2 cos^2(theta/2) K(cos theta),
        # m = tan^2(theta/2)
        theta = math.pi / 3
        m = math.tan(theta / 2) ** 2
        lhs = ellipk_agm(math.sqrt(1.0 - m * m))
        rhs = 2.0 * math.cos(theta / 2) ** 2 * ellipk_agm(math.cos(theta))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_landen_companion_identity(self):
        theta = math.pi / 3
        m = math.tan(theta / 2) ** 2
        assert ellipk_agm(math.sin(theta)) == pytest.approx(
            ellipk_agm(m) / math.cos(theta / 2) ** 2, rel=1e-12)

    @pytest.mark.parametrize("k", [1.0, 1.5, -0.1])
    def test_domain_error(self, k):
        with pytest.raises(ValueError):
            ellipk_agm(k)


class TestTheta3:
    def test_periodicity(self):
        z, tau = 0.3 + 0.1j, 2j
        assert abs(theta3(z + 1, tau) - theta3(z, tau)) < 1e-13

    def test_even(self):
        tau = 2j
        for z in (0.4 + 0.2j, -1.3 + 0.05j, 0.77):
            assert abs(theta3(-z, tau) - theta3(z, tau)) < 1e-13

    def test_zero_location(self):
        tau = 2j
        assert abs(theta3((tau + 1) / 2, tau)) < 1e-12

    def test_quasi_periodicity(self):
        z, tau = 0.3 + 0.1j, 2j
        factor = cmath.exp(-1j * math.pi * tau - 2j * math.pi * z)
        assert abs(theta3(z + tau, tau) - factor * theta3(z, tau)) < 1e-12

    def test_against_mpmath(self):
        mp = pytest.importorskip("mpmath")
        for z, tau in ((0.23 + 0.4j, 1.3j), (-0.7 + 0.1j, 0.8j), (0.0, 2j)):
            q = cmath.exp(1j * math.pi * tau)
            ref = complex(mp.jtheta(3, math.pi * z if z.imag == 0 else mp.mpc(math.pi * z), q))
            assert theta3(z, tau) == pytest.approx(ref, rel=1e-12, abs=1e-12)

    def test_derivative_vs_finite_difference(self):
        z, tau = 0.37 + 0.21j, 1.1j
        h = 1e-6
        fd = (theta3(z + h, tau) - theta3(z - h, tau)) / (2 * h)
        assert theta3_dz(z, tau) == pytest.approx(fd, rel=1e-8)

    def test_reduction_identity(self):
        tau = 1.2792615712036562j
        for z in (0.3 + 4.7j, -2.2 - 3.9j, 5.5 + 0.2j):
            val, log_pref = theta3_reduced(z, tau)
            direct = theta3(z, tau)
            assert val * cmath.exp(log_pref) == pytest.approx(direct, rel=1e-11)

    def test_reduction_handles_growing_arguments(self):
        # arguments far outside the cell overflow the raw series but not the
        # reduced one
        tau = 1j
        z = 0.1 + 40j
        with pytest.raises(ValueError):
            theta3(z, tau)
        val, log_pref = theta3_reduced(z, tau)
        assert np.isfinite(abs(val))

    def test_domain_error(self):
        with pytest.raises(ValueError):
            theta3(0.1, -1j)

    @given(st.floats(-2, 2), st.floats(-0.45, 0.45))
    @settings(max_examples=30, deadline=None)
    def test_even_property(self, re, im):
        z = complex(re, im)
        tau = 2j
        assert abs(theta3(-z, tau) - theta3(z, tau)) <= 1e-11 * (1 + abs(theta3(z, tau)))


class TestJacobiSD:
    def test_odd_at_zero(self):
        for k in (0.0, 0.4, 0.95):
            assert jacobi_sd(0.0, k) == 0.0

    def test_trig_degeneration(self):
        assert jacobi_sd(0.7, 0.0) == pytest.approx(math.sin(0.7), abs=1e-14)

    def test_derivative_finite_difference(self):
        # d/du sd = cd nd (via ellipj components); central difference oracle
        u, k, h = 0.5, 0.6, 1e-5
        fd = (jacobi_sd(u + h, k) - jacobi_sd(u - h, k)) / (2 * h)
        from scipy.special import ellipj
        sn, cn, dn, _ = ellipj(u, k * k)
        exact = cn / dn ** 2
        assert fd == pytest.approx(exact, abs=1e-7)
        assert (jacobi_sd(u + h, k) - jacobi_sd(u - h, k)) / (2 * h) == \
            pytest.approx(exact, abs=1e-7)

    def test_against_scipy(self):
        from scipy.special import ellipj
        for k in (0.2, math.cos(math.pi / 4), 0.9):
            K = ellipk_agm(k)
            for u in np.linspace(-4 * K, 4 * K, 41):
                sn, cn, dn, _ = ellipj(u, k * k)
                assert jacobi_sd(u, k) == pytest.approx(sn / dn, abs=1e-11)

    def test_theta_quotient_representation(self):
        # sd(u; k) = -i Theta(0)^2 e^{i pi w} Theta(w + (tau+1)/2)
        #            / (Theta(tau/2) Theta(1/2) Theta(w)),  w = u/(2K),
        # with tau = i K(k')/K(k) and the q^{1/4} absorbed via Theta(tau/2)
        for k in (0.2, math.cos(math.pi / 4), 0.9):
            K = ellipk_agm(k)
            Kp = ellipk_agm(math.sqrt(1 - k * k))
            tau = 1j * Kp / K
            for u in np.linspace(-3.7 * K, 3.7 * K, 17):
                w = u / (2 * K)
                num = -1j * cmath.exp(1j * math.pi * w) * theta3(w + (tau + 1) / 2, tau)
                den = theta3(w, tau)
                quot = theta3(0, tau) ** 2 * num / (theta3(tau / 2, tau)
                                                    * theta3(0.5, tau) * den)
                assert complex(jacobi_sd(u, k)) == pytest.approx(quot, abs=1e-11)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            jacobi_sd(0.3, 1.0)


@pytest.fixture(scope="module")
def radical():
    return BranchedRadical(cmath.exp(1j * math.pi / 4))


class TestBranchedRadical:
    def test_schwarz_symmetry(self, radical):
        z = 0.3 + 0.9j
        assert radical.eval(np.conj(z)) == pytest.approx(
            np.conj(radical.eval(z)), rel=1e-12)

    def test_evenness(self, radical):
        z = 0.3 + 0.9j
        assert radical.eval(-z) == pytest.approx(radical.eval(z), rel=1e-12)

    def test_large_z_expansion(self, radical):
        A = radical.A
        z = 1e3 + 0j
        target = z * z - (A * A + np.conj(A) ** 2) / 2
        assert abs(radical.eval(z) - target) < 1e-6

    def test_symmetries_on_grid(self, radical):
        rng = np.random.default_rng(11)
        z = rng.uniform(-2, 2, 200) + 1j * rng.uniform(-2, 2, 200)
        z = z[np.abs(np.abs(z.imag) - radical.b) > 0.05]
        v = radical.eval_many(z)
        assert np.max(np.abs(radical.eval_many(np.conj(z)) - np.conj(v))) < 1e-12 * np.max(np.abs(v))
        assert np.max(np.abs(radical.eval_many(-z) - v)) < 1e-12 * np.max(np.abs(v))

    def test_on_cut_sides_eta1(self, radical):
        a, b = radical.a, radical.b
        for t in np.linspace(-a, a, 52)[1:-1]:
            plus = radical.eval(complex(t, b), Cut.HORIZONTAL, Side.PLUS)
            minus = radical.eval(complex(t, b), Cut.HORIZONTAL, Side.MINUS)
            assert plus == pytest.approx(-minus, rel=1e-12)

    def test_on_cut_sides_eta3(self, radical):
        r0, th = radical.radius, radical.theta
        for phi in np.linspace(th, math.pi - th, 52)[1:-1]:
            z = r0 * cmath.exp(1j * phi)
            plus = radical.eval(z, Cut.CIRCULAR, Side.PLUS)
            minus = radical.eval(z, Cut.CIRCULAR, Side.MINUS)
            assert plus == pytest.approx(-minus, rel=1e-12)

    def test_boundary_value_vs_offset_limit(self, radical):
        # Richardson-style epsilon check of the explicit branch selection
        b = radical.b
        t = 0.37 * radical.a
        plus = radical.eval(complex(t, b), Cut.HORIZONTAL, Side.PLUS)
        for eps in (1e-6, 1e-8):
            offset = radical.eval(complex(t, b - eps))
            assert abs(offset - plus) < 5e3 * eps

    def test_circular_mode_flips_inside_lens(self, radical):
        z = 0.1 + 0.95j          # inside the upper lens (|z| < 1, Im > b)
        assert abs(z) < radical.radius and z.imag > radical.b
        assert radical.eval(z, Cut.CIRCULAR) == pytest.approx(
            -radical.eval(z, Cut.HORIZONTAL), rel=1e-13)

    def test_circular_mode_matches_outside(self, radical):
        z = 1.4 + 0.2j
        assert radical.eval(z, Cut.CIRCULAR) == pytest.approx(
            radical.eval(z, Cut.HORIZONTAL), rel=1e-13)

    def test_on_cut_requires_side(self, radical):
        with pytest.raises(ValueError):
            radical.eval(complex(0.0, radical.b), Cut.HORIZONTAL, Side.OFF)

    def test_invalid_endpoint(self):
        with pytest.raises(ValueError):
            BranchedRadical(-1.0 + 1.0j)


class TestContourIntegrate:
    def test_constant_integrand(self):
        val, err = contour_integrate(lambda s: np.ones_like(s), (0.2 + 0.1j, 1.5 - 0.4j))
        assert val == pytest.approx(1.3 - 0.5j, abs=1e-13)

    @pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 4, math.pi / 3])
    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_eta1_elliptic_integral(self, theta, r):
        A = r * cmath.exp(1j * theta)
        rad = BranchedRadical(A)

        def f(s):
            return 1.0 / np.array([rad.eval(z, Cut.HORIZONTAL, Side.PLUS) for z in s])

        val, _ = contour_integrate(f, Segment(A, -np.conj(A)), nodes=64)
        target = -ellipk_agm(math.cos(theta)) / r
        assert abs(val - target) < 1e-10 * abs(target)

    @pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 4, math.pi / 3])
    def test_gamma_elliptic_integral(self, theta):
        A = cmath.exp(1j * theta)
        rad = BranchedRadical(A)
        val, _ = contour_integrate(lambda s: 1.0 / rad.eval_many(s),
                                   Segment(-np.conj(A), -A), nodes=64)
        target = -1j * ellipk_agm(math.sin(theta))
        assert abs(val - target) < 1e-10 * abs(target)

    def test_degenerate_segment_rejected(self):
        with pytest.raises(ValueError):
            Segment(1.0 + 0j, 1.0 + 0j)

    def test_minimum_nodes(self):
        with pytest.raises(ValueError):
            contour_integrate(lambda s: s, (0, 1), nodes=4)

    def test_nonconvergence_error(self):
        # interior singularity on the path defeats node doubling
        with pytest.raises(QuadratureError):
            contour_integrate(lambda s: 1.0 / (s - 0.5), (0.0 + 0j, 1.0 + 0j),
                              nodes=16, max_nodes=256)

    def test_error_estimate_reported(self):
        val, err = contour_integrate(lambda s: np.exp(s), (0, 1))
        assert val == pytest.approx(math.e - 1, rel=1e-13)
        assert 0 <= err < 1e-11
