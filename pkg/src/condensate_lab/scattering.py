"""Condensate scattering data: eigenvalue sampling, norming constants, boosts.

The generative recipe: N eigenvalues on the segment [-a+ib, a+ib] placed at
the midpoint quantiles of a density rho, norming constants drawn from a
sampling function h at the eigenvalues, explicit time evolution
c_j(t) = c_j(0) exp(2 i t lambda_j^2), Galilean boosts lambda -> lambda - v/2,
and optional injection of a single amplified tracer pole.

rho and h are restricted to real-coefficient polynomials of the horizontal
segment coordinate: near the upper segment rho(z) = P(z - i b), and the
Schwarz-reflected branch P(z + i b) serves the lower half-plane, so that
rho(conj z) = conj(rho(z)) holds identically.  Densities are normalized to
unit mass over [-a, a] at construction time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._jsonfmt import dumps_canonical

__all__ = [
    "DensitySpec",
    "SamplerSpec",
    "CondensateSpec",
    "TracerPole",
    "ScatteringData",
    "TracerPlacementError",
    "sample_eigenvalues",
    "assign_norming_constants",
    "galilean_boost",
    "add_tracer",
    "TRACER_MARGIN_FACTOR",
]

TRACER_MARGIN_FACTOR = 0.15


class TracerPlacementError(ValueError):
    """Tracer pole violates the stand-off margin around the segment."""


@dataclass(frozen=True)
class DensitySpec:
    """Eigenvalue density along the segment, rho(t + ib) = P(t) / norm."""

    kind: str = "uniform"                       # "uniform" | "polynomial"
    coeffs: tuple[float, ...] = (1.0,)          # ascending powers of t

    def __post_init__(self):
        if self.kind not in ("uniform", "polynomial"):
            raise ValueError(f"unknown density kind {self.kind!r}")
        if self.kind == "uniform":
            object.__setattr__(self, "coeffs", (1.0,))
        if not self.coeffs or not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("density coefficients must be finite and non-empty")

    def _norm(self, a: float) -> float:
        P = np.polynomial.Polynomial(self.coeffs)
        mass = float(P.integ()(a) - P.integ()(-a))
        if mass <= 0.0:
            raise ValueError("density has non-positive mass on [-a, a]")
        return mass

    def validate_positive(self, a: float, samples: int = 2001) -> None:
        t = np.linspace(-a, a, samples)
        vals = np.polynomial.Polynomial(self.coeffs)(t)
        if np.min(vals) <= 0.0:
            raise ValueError("density must be strictly positive on (-a, a)")

    def value(self, z: complex, a: float, b: float) -> complex:
        """Analytic continuation off the segment (upper/lower branch)."""
        w = z - 1j * b if np.imag(z) >= 0 else z + 1j * b
        return np.polynomial.Polynomial(self.coeffs)(w) / self._norm(a)

    def cdf(self, x: float, a: float) -> float:
        P = np.polynomial.Polynomial(self.coeffs)
        I = P.integ()
        return float(I(x) - I(-a)) / self._norm(a)


@dataclass(frozen=True)
class SamplerSpec:
    """Norming-constant sampling function h along the segment."""

    kind: str = "constant"                      # "constant" | "polynomial"
    coeffs: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if self.kind not in ("constant", "polynomial"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.kind == "constant" and len(self.coeffs) != 1:
            raise ValueError("constant sampler takes a single coefficient")
        if not self.coeffs or not all(math.isfinite(c) for c in self.coeffs):
            raise ValueError("sampler coefficients must be finite and non-empty")

    def value(self, z: complex, b: float) -> complex:
        w = z - 1j * b if np.imag(z) >= 0 else z + 1j * b
        return complex(np.polynomial.Polynomial(self.coeffs)(w))

    def derivative(self, z: complex, b: float) -> complex:
        w = z - 1j * b if np.imag(z) >= 0 else z + 1j * b
        return complex(np.polynomial.Polynomial(self.coeffs).deriv()(w))

    def validate_nonzero(self, a: float, b: float, eigenvalues: np.ndarray) -> None:
        # at the eigenvalues and at 10x oversampled segment points
        t = np.linspace(-a, a, max(10 * len(eigenvalues), 11))
        P = np.polynomial.Polynomial(self.coeffs)
        vals = np.concatenate([P(np.real(eigenvalues)), P(t)])
        if np.min(np.abs(vals)) == 0.0:
            raise ValueError("sampling function h vanishes on the segment")


@dataclass(frozen=True)
class CondensateSpec:
    """Full generative recipe for an N-soliton condensate."""

    a: float
    b: float
    N: int
    density: DensitySpec = field(default_factory=DensitySpec)
    sampler: SamplerSpec = field(default_factory=SamplerSpec)

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError("a and b must be positive")
        if self.N < 0:
            raise ValueError("N must be non-negative")

    @property
    def endpoint(self) -> complex:
        return complex(self.a, self.b)

    @property
    def theta(self) -> float:
        return math.atan2(self.b, self.a)

    def rho(self, z: complex) -> complex:
        return self.density.value(z, self.a, self.b)

    def h(self, z: complex) -> complex:
        return self.sampler.value(z, self.b)


@dataclass(frozen=True)
class TracerPole:
    lambda_o: complex
    c_o: complex


@dataclass(frozen=True)
class ScatteringData:
    """Reflectionless spectral data (upper half-plane representatives)."""

    a: float
    b: float
    eigenvalues: np.ndarray            # condensate eigenvalues, Im = b
    norming: np.ndarray
    tracer: Optional[TracerPole] = None
    time: float = 0.0

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex)
        cn = np.asarray(self.norming, dtype=complex)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "norming", cn)
        if ev.shape != cn.shape:
            raise ValueError("eigenvalues and norming constants differ in length")
        if ev.size:
            if np.any(ev.imag <= 0):
                raise ValueError("eigenvalues must lie in the upper half-plane")
            if np.any(np.diff(ev.real) <= 0):
                raise ValueError("eigenvalues must be strictly increasing in Re")
            if np.any(np.abs(cn) == 0.0):
                raise ValueError("norming constants must be nonzero")
        if self.tracer is not None and self.tracer.lambda_o.imag <= 0:
            raise ValueError("tracer pole must lie in the upper half-plane")

    @property
    def N(self) -> int:
        return int(self.eigenvalues.size)

    def all_poles(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and norming constants including the tracer, if any."""
        if self.tracer is None:
            return self.eigenvalues, self.norming
        lam = np.append(self.eigenvalues, self.tracer.lambda_o)
        c = np.append(self.norming, self.tracer.c_o)
        return lam, c

    # -- JSON wire format ---------------------------------------------------

    def to_json_dict(self) -> dict:
        def c2(v: complex) -> list[float]:
            return [float(np.real(v)), float(np.imag(v))]

        tracer = None
        if self.tracer is not None:
            tracer = {"lambda_o": c2(self.tracer.lambda_o), "c_o": c2(self.tracer.c_o)}
        return {
            "a": self.a,
            "b": self.b,
            "N": self.N,
            "eigenvalues": [c2(v) for v in self.eigenvalues],
            "norming": [c2(v) for v in self.norming],
            "tracer": tracer,
            "time": self.time,
        }

    def to_json(self) -> str:
        return dumps_canonical(self.to_json_dict())

    @staticmethod
    def from_json(text: str) -> "ScatteringData":
        doc = json.loads(text)
        tracer = None
        if doc.get("tracer") is not None:
            t = doc["tracer"]
            tracer = TracerPole(complex(*t["lambda_o"]), complex(*t["c_o"]))
        return ScatteringData(
            a=float(doc["a"]),
            b=float(doc["b"]),
            eigenvalues=np.array([complex(re, im) for re, im in doc["eigenvalues"]]),
            norming=np.array([complex(re, im) for re, im in doc["norming"]]),
            tracer=tracer,
            time=float(doc["time"]),
        )


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def sample_eigenvalues(spec: CondensateSpec) -> np.ndarray:
    """Midpoint-quantile eigenvalues: CDF(Re lambda_j) = (2j-1)/(2N).

    Bracketed bisection down to 1e-3 followed by Newton to 1e-13; the CDF is
    smooth and strictly monotone, so the hybrid cannot fail on valid input.
    """
    spec.density.validate_positive(spec.a)
    a, N = spec.a, spec.N
    if N == 0:
        return np.empty(0, dtype=complex)
    out = np.empty(N, dtype=float)
    dens = spec.density
    for j in range(1, N + 1):
        target = (2 * j - 1) / (2 * N)
        lo, hi = -a, a
        while hi - lo > 1e-3 * a:
            mid = 0.5 * (lo + hi)
            if dens.cdf(mid, a) < target:
                lo = mid
            else:
                hi = mid
        x = 0.5 * (lo + hi)
        for _ in range(60):
            fval = dens.cdf(x, a) - target
            dval = float(np.real(dens.value(x + 1j * spec.b, a, spec.b)))
            step = fval / dval
            x -= step
            x = min(max(x, -a), a)
            if abs(step) < 1e-13 * max(1.0, a):
                break
        else:
            raise RuntimeError(f"eigenvalue root-finding failed at j={j}")
        out[j - 1] = x
    return out + 1j * spec.b


def assign_norming_constants(spec: CondensateSpec, eigenvalues: np.ndarray,
                             t: float = 0.0) -> np.ndarray:
    """c_j(t) = h(lambda_j) exp(2 i t lambda_j^2)."""
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    spec.sampler.validate_nonzero(spec.a, spec.b, eigenvalues)
    h = np.array([spec.h(l) for l in eigenvalues])
    return h * np.exp(2j * t * eigenvalues ** 2)


def make_scattering_data(spec: CondensateSpec, t: float = 0.0) -> ScatteringData:
    lam = sample_eigenvalues(spec)
    c = assign_norming_constants(spec, lam, t)
    return ScatteringData(a=spec.a, b=spec.b, eigenvalues=lam, norming=c, time=t)


def galilean_boost(data: ScatteringData, v: float) -> ScatteringData:
    """Shift every pole by -v/2; norming constants and time are untouched."""
    tracer = data.tracer
    if tracer is not None:
        tracer = TracerPole(tracer.lambda_o - v / 2.0, tracer.c_o)
    return ScatteringData(
        a=data.a, b=data.b,
        eigenvalues=data.eigenvalues - v / 2.0,
        norming=data.norming,
        tracer=tracer,
        time=data.time,
    )


def _segment_distance(z: complex, data: ScatteringData) -> float:
    """Distance from z to the (possibly boosted) upper segment."""
    if data.N:
        center = 0.5 * (data.eigenvalues[0].real + data.eigenvalues[-1].real)
    else:
        center = 0.0
    x0, x1 = center - data.a, center + data.a
    dx = min(max(z.real, x0), x1)
    return math.hypot(z.real - dx, z.imag - data.b)


def add_tracer(data: ScatteringData, lambda_o: complex, amplitude: float,
               g_at_tracer: complex) -> ScatteringData:
    """Append (lambda_o, c_o) with c_o = amplitude * exp(2 ln(N) Re g(lambda_o)).

    The amplification keeps the tracer's residue O(1) inside the condensate
    window.  Placement is rejected when lambda_o comes within
    TRACER_MARGIN_FACTOR*|A| of the segment.
    """
    if data.tracer is not None:
        raise ValueError("scattering data already carries a tracer pole")
    margin = TRACER_MARGIN_FACTOR * math.hypot(data.a, data.b)
    if _segment_distance(lambda_o, data) < margin:
        raise TracerPlacementError(
            f"tracer at {lambda_o} closer than {margin:.3f} to the segment")
    n = max(data.N, 1)
    c_o = amplitude * math.exp(2.0 * math.log(n) * float(np.real(g_at_tracer)))
    return replace(data, tracer=TracerPole(complex(lambda_o), complex(c_o)))
