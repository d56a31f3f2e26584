"""Complex special functions and contour quadrature.

Everything the condensate formulas need at the scalar level lives here:
the complete elliptic integral K(k) (via AGM), the genus-one theta series
Theta(z; tau) = sum_n exp(2*pi*i*n*z + pi*i*n^2*tau), the Jacobi elliptic
function sd(u; k), the branched radical

    R(z) = (z - A)^(1/2) (z + conj(A))^(1/2) (z + A)^(1/2) (z - conj(A))^(1/2)

with each factor on its principal branch (analytic off the two horizontal
segments eta1 = [A, -conj(A)] and eta2 = [-A, conj(A)]), the companion
radical S(z) branched along the circular arcs instead, and Gauss-Legendre
quadrature over straight segments with an error estimate from node doubling.

Conventions, fixed once and validated by the identity tests:

* eta1 runs from A to -conj(A) (right to left), eta2 from -A to conj(A)
  (left to right); the plus side of a cut is the left side of its
  orientation, so R_plus on eta1 is the boundary value from below
  (Im z = b-) and R_plus on eta2 the value from above (Im z = -b+).
* The arcs eta3 (upper, A to -conj(A)) and eta4 (lower, -A to conj(A))
  are traversed counterclockwise; their plus side is the exterior of the
  circle |z| = |A|.
* int_{eta1} ds/R_plus = -K(cos theta)/|A| and the gamma-segment integral
  int_{-conj(A)}^{-A} ds/R = -i K(sin theta)/|A|, theta = arg A; these two
  identities pin every sign above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

__all__ = [
    "Side",
    "Cut",
    "Segment",
    "BranchedRadical",
    "QuadratureError",
    "ellipk_agm",
    "theta3",
    "theta3_dz",
    "theta3_reduced",
    "jacobi_sd",
    "gauss_legendre_segment",
    "contour_integrate",
]


class Side(Enum):
    PLUS = "plus"
    MINUS = "minus"
    OFF = "off-contour"


class Cut(Enum):
    HORIZONTAL = "horizontal"   # eta1 and eta2
    CIRCULAR = "circular"       # eta3 and eta4


@dataclass(frozen=True)
class Segment:
    """Oriented straight path with an optional branch-cut side."""

    start: complex
    end: complex
    side: Side = Side.OFF

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("degenerate segment: start == end")

    def point(self, s):
        """Affine parametrization, s in [-1, 1]."""
        mid = 0.5 * (self.start + self.end)
        half = 0.5 * (self.end - self.start)
        return mid + half * s


class QuadratureError(RuntimeError):
    """Node doubling failed to reach the requested tolerance."""


# ---------------------------------------------------------------------------
# complete elliptic integral of the first kind
# ---------------------------------------------------------------------------

def ellipk_agm(k: float) -> float:
    """K(k) in the modulus convention, by the arithmetic-geometric mean.

    Quadratically convergent; terminates at the fixed point in double
    precision.  Requires 0 <= k < 1.
    """
    if not 0.0 <= k < 1.0:
        raise ValueError(f"modulus k={k!r} outside [0, 1)")
    a, b = 1.0, math.sqrt(1.0 - k * k)
    for _ in range(40):
        if abs(a - b) <= 2e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


# ---------------------------------------------------------------------------
# theta series
# ---------------------------------------------------------------------------

_THETA_NMAX = 500


def _theta_nmax(z: complex, tau: complex) -> int:
    """Smallest symmetric truncation with tail below 1e-17.

    Terms decay like exp(-pi Im(tau) n^2 + 2 pi |Im z| n); solve for the n
    beyond which they are negligible.
    """
    t = math.pi * tau.imag
    y = 2.0 * math.pi * abs(z.imag)
    # exp(-t n^2 + y n) < 1e-17  <=>  t n^2 - y n > 39.2
    disc = y * y + 4.0 * t * 39.2
    n = int((y + math.sqrt(disc)) / (2.0 * t)) + 2
    peak = y * y / (4.0 * t)     # largest term exponent, at n = y/(2t)
    if n > _THETA_NMAX or peak > 690.0:
        raise ValueError(
            f"theta series needs n_max={n} (peak exponent {peak:.0f}); "
            "reduce the argument into the fundamental cell first"
        )
    return n


def theta3(z: complex, tau: complex) -> complex:
    """Theta(z; tau) = sum_n exp(2 pi i n z + pi i n^2 tau), Im tau > 0."""
    if tau.imag <= 0.0:
        raise ValueError(f"tau={tau!r} not in the upper half-plane")
    z = complex(z)
    nmax = _theta_nmax(z, tau)
    n = np.arange(1, nmax + 1)
    q_pow = np.exp(1j * math.pi * tau * n * n)
    total = 1.0 + np.sum(q_pow * (np.exp(2j * math.pi * n * z) + np.exp(-2j * math.pi * n * z)))
    return complex(total)


def theta3_dz(z: complex, tau: complex) -> complex:
    """d/dz Theta(z; tau)."""
    if tau.imag <= 0.0:
        raise ValueError(f"tau={tau!r} not in the upper half-plane")
    z = complex(z)
    nmax = _theta_nmax(z, tau)
    n = np.arange(1, nmax + 1)
    q_pow = np.exp(1j * math.pi * tau * n * n)
    total = np.sum(q_pow * 2j * math.pi * n
                   * (np.exp(2j * math.pi * n * z) - np.exp(-2j * math.pi * n * z)))
    return complex(total)


def theta3_reduced(z: complex, tau: complex) -> tuple[complex, complex]:
    """Theta at the lattice-reduced argument, with the unwinding factor.

    Returns (theta_value_at_z0, log_prefactor) where z = z0 + n + m*tau,
    |Im z0 / Im tau| <= 1/2, and

        Theta(z; tau) = exp(log_prefactor) * Theta(z0; tau).

    Splitting off the log keeps arguments like zeta(x, N)/(2 pi), whose
    imaginary part grows like ln(N)/pi, inside the fast-convergence cell;
    the caller combines prefactors before exponentiating.
    """
    if tau.imag <= 0.0:
        raise ValueError(f"tau={tau!r} not in the upper half-plane")
    z = complex(z)
    m = round(z.imag / tau.imag)
    z1 = z - m * tau
    n = round(z1.real)
    z0 = z1 - n
    # Theta(z0 + n + m tau) = exp(-pi i m^2 tau - 2 pi i m z0) Theta(z0)
    log_pref = -1j * math.pi * m * m * tau - 2j * math.pi * m * z0
    return theta3(z0, tau), log_pref


# ---------------------------------------------------------------------------
# Jacobi sd
# ---------------------------------------------------------------------------

def jacobi_sd(u: float, k: float) -> float:
    """sd(u; k) = sn(u; k)/dn(u; k) by the descending AGM/Landen scale.

    DLMF 22.20(ii); real argument, modulus in [0, 1).
    """
    sn, _, dn = _jacobi_sn_cn_dn(u, k)
    return sn / dn


def _jacobi_sn_cn_dn(u: float, k: float) -> tuple[float, float, float]:
    if not 0.0 <= k < 1.0:
        raise ValueError(f"modulus k={k!r} outside [0, 1)")
    if k < 1e-12:
        return math.sin(u), math.cos(u), 1.0
    a = [1.0]
    b = [math.sqrt(1.0 - k * k)]
    c = [k]
    while abs(c[-1]) > 1e-16 and len(a) < 32:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(math.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    n = len(a) - 1
    phi = (2.0 ** n) * a[n] * u
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(max(-1.0, min(1.0, c[i] / a[i] * math.sin(phi)))))
    sn = math.sin(phi)
    cn = math.cos(phi)
    dn = math.sqrt(1.0 - (k * sn) ** 2)
    return sn, cn, dn


# ---------------------------------------------------------------------------
# branched radical
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchedRadical:
    """The genus-one radical with branch points at A, -conj(A), -A, conj(A).

    `_eval` with Cut.HORIZONTAL gives R(z), analytic off eta1 and eta2;
    Cut.CIRCULAR gives S(z), the same square root branched along the arcs
    eta3 and eta4 of the circle |z| = |A| instead.  Both behave like z^2 at
    infinity.
    """

    A: complex

    def __post_init__(self):
        if not (self.A.real > 0.0 and self.A.imag > 0.0):
            raise ValueError(f"endpoint A={self.A!r} must have Re > 0 and Im > 0")

    @property
    def a(self) -> float:
        return self.A.real

    @property
    def b(self) -> float:
        return self.A.imag

    @property
    def theta(self) -> float:
        return math.atan2(self.A.imag, self.A.real)

    @property
    def radius(self) -> float:
        return abs(self.A)

    # -- plain product of principal branches, cut on eta1 and eta2 ---------

    def _product(self, z):
        A = self.A
        Ab = np.conj(A)
        return np.sqrt(z - A) * np.sqrt(z + Ab) * np.sqrt(z + A) * np.sqrt(z - Ab)

    def _on_eta1(self, z, atol) -> bool:
        return abs(z.imag - self.b) <= atol and abs(z.real) < self.a - atol

    def _on_eta2(self, z, atol) -> bool:
        return abs(z.imag + self.b) <= atol and abs(z.real) < self.a - atol

    def _on_arc(self, z, atol) -> bool:
        return abs(abs(z) - self.radius) <= atol and abs(z.imag) > self.b + atol

    def eval(self, z: complex, cut: Cut = Cut.HORIZONTAL, side: Side = Side.OFF,
             atol: float = 1e-13) -> complex:
        """R(z) or S(z); for on-cut z a side must be supplied.

        On-cut boundary values are taken by explicit branch selection of the
        singular factor (exact up to rounding), never by an epsilon offset.
        """
        z = complex(z)
        if cut is Cut.HORIZONTAL:
            if self._on_eta1(z, atol):
                return self._boundary_eta1(z.real, side)
            if self._on_eta2(z, atol):
                return self._boundary_eta2(z.real, side)
            return complex(self._product(z))
        # circular mode: S = -R inside the lens regions between chord and arc
        if self._on_arc(z, atol):
            return self._boundary_arc(z, side)
        if self._on_eta1(z, atol) or self._on_eta2(z, atol):
            # S is analytic across the chords: approaching eta1 from below
            # lies outside the lens where S = +R, so S on the chord equals
            # the R_plus boundary value (same for eta2 from above).
            return (self._boundary_eta1(z.real, Side.PLUS) if z.imag > 0
                    else self._boundary_eta2(z.real, Side.PLUS))
        sign = -1.0 if (abs(z) < self.radius and abs(z.imag) > self.b) else 1.0
        return sign * complex(self._product(z))

    def _boundary_eta1(self, t: float, side: Side) -> complex:
        if side is Side.OFF:
            raise ValueError("z lies on eta1: a boundary side is required")
        a, b, A = self.a, self.b, self.A
        Ab = np.conj(A)
        # factor sqrt(z - A) = sqrt((t - a) + i0^-+): from below -i sqrt(a-t)
        root = -1j * math.sqrt(a - t) if side is Side.PLUS else 1j * math.sqrt(a - t)
        z = t + 1j * b
        rest = math.sqrt(t + a) * np.sqrt(z + A) * np.sqrt(z - Ab)
        return complex(root * rest)

    def _boundary_eta2(self, t: float, side: Side) -> complex:
        if side is Side.OFF:
            raise ValueError("z lies on eta2: a boundary side is required")
        a, b, A = self.a, self.b, self.A
        Ab = np.conj(A)
        # singular factor sqrt(z - conj(A)) = sqrt((t - a) + i0^+-): plus side
        # (above) gives +i sqrt(a-t)
        root = 1j * math.sqrt(a - t) if side is Side.PLUS else -1j * math.sqrt(a - t)
        z = t - 1j * b
        rest = math.sqrt(t + a) * np.sqrt(z - A) * np.sqrt(z + Ab)
        return complex(root * rest)

    def _boundary_arc(self, z: complex, side: Side) -> complex:
        if side is Side.OFF:
            raise ValueError("z lies on eta3/eta4: a boundary side is required")
        r = complex(self._product(z))   # R is analytic on the open arcs
        return r if side is Side.PLUS else -r

    # convenience vectorized off-cut evaluation
    def eval_many(self, z: np.ndarray, cut: Cut = Cut.HORIZONTAL) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = self._product(z)
        if cut is Cut.CIRCULAR:
            flip = (np.abs(z) < self.radius) & (np.abs(z.imag) > self.b)
            out = np.where(flip, -out, out)
        return out


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

_leggauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _leggauss_cache:
        _leggauss_cache[n] = np.polynomial.legendre.leggauss(n)
    return _leggauss_cache[n]


def gauss_legendre_segment(f: Callable[[np.ndarray], np.ndarray],
                           start: complex, end: complex, nodes: int,
                           endpoint_rule: bool = True) -> complex:
    """Single Gauss-Legendre pass over a straight segment.

    With `endpoint_rule` the substitution s = mid + half*sin(pi x / 2) is
    applied first; it turns inverse-square-root endpoint singularities into
    analytic integrands and restores spectral convergence.
    """
    x, w = _leggauss(nodes)
    mid = 0.5 * (start + end)
    half = 0.5 * (end - start)
    if endpoint_rule:
        phi = 0.5 * math.pi * x
        s = mid + half * np.sin(phi)
        ds = half * np.cos(phi) * (0.5 * math.pi) * w
    else:
        s = mid + half * x
        ds = half * w
    return complex(np.sum(f(s) * ds))


def contour_integrate(f: Callable[[np.ndarray], np.ndarray],
                      path: Segment | tuple[complex, complex],
                      nodes: int = 64,
                      rtol: float = 1e-11,
                      max_nodes: int = 4096,
                      endpoint_rule: bool = True) -> tuple[complex, float]:
    """Adaptive-order quadrature along a straight segment.

    Doubles the node count until successive values agree to `rtol`
    (relatively, with a small absolute floor).  Returns (value, error
    estimate).  Raises QuadratureError if `max_nodes` is reached first.
    """
    if isinstance(path, Segment):
        z0, z1 = path.start, path.end
    else:
        z0, z1 = path
    if nodes < 8:
        raise ValueError("nodes must be >= 8")
    prev = gauss_legendre_segment(f, z0, z1, nodes, endpoint_rule)
    n = nodes
    while True:
        n *= 2
        cur = gauss_legendre_segment(f, z0, z1, n, endpoint_rule)
        err = abs(cur - prev)
        scale = max(abs(cur), 1e-30)
        if err <= rtol * scale + 1e-15:
            return cur, err / scale
        if n >= max_nodes:
            raise QuadratureError(
                f"quadrature not converged at {n} nodes (rel err {err / scale:.2e})")
        prev = cur
