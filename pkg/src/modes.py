#!/usr/bin/env python3
"""
Hermite-Gaussian pump modes and y-parity analysis.

HG_mn(x, y, z) = C_mn H_m(x sqrt2/w) H_n(y sqrt2/w) exp(-(x^2+y^2)/w^2)
                 * exp(-i k (x^2+y^2) / 2R) * exp(-i (m+n+1) theta)

with w = w(z), R(z) = (z^2 + z_R^2)/z, theta(z) = arctan(z/z_R) and C_mn fixed
by unit L2 norm on the infinite plane.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

import fields
from simulation_errors import InvalidArgumentError, ZeroFieldError

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12
FREE_SPACE_TOLERANCE = 1e-9
PARITY_THRESHOLD = 1e-6


def _check_index(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 0:
        raise InvalidArgumentError(f"{name} must be a non-negative integer, got {value!r}")


@dataclass(frozen=True)
class BeamSpec:
    """Gaussian beam parameters: waist w, Rayleigh range z_R, wavenumber k, plane z."""
    w: float
    z_R: float
    k: float
    z: float = 0.0
    free_space_consistent: bool = False

    def __post_init__(self):
        for name in ('w', 'z_R', 'k'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise InvalidArgumentError(f"beam {name} must be finite and > 0, got {value!r}")
        if not math.isfinite(self.z):
            raise InvalidArgumentError(f"beam z must be finite, got {self.z!r}")
        if self.free_space_consistent:
            expected = self.k * self.w ** 2 / 2.0
            if abs(self.z_R - expected) > FREE_SPACE_TOLERANCE * expected:
                raise InvalidArgumentError(
                    f"z_R={self.z_R} is not k*w^2/2={expected} within {FREE_SPACE_TOLERANCE}")

    @classmethod
    def from_wavelength(cls, w, wavelength, z=0.0):
        """Free-space beam: k = 2 pi / wavelength, z_R = k w^2 / 2."""
        if not wavelength > 0:
            raise InvalidArgumentError(f"wavelength must be > 0, got {wavelength!r}")
        k = 2.0 * math.pi / wavelength
        return cls(w=w, z_R=k * w ** 2 / 2.0, k=k, z=z, free_space_consistent=True)

    @property
    def width(self):
        return self.w * math.sqrt(1.0 + (self.z / self.z_R) ** 2)

    @property
    def rayleigh_radius(self):
        if self.z == 0.0:
            return math.inf
        return (self.z ** 2 + self.z_R ** 2) / self.z

    @property
    def gouy_phase(self):
        return math.atan(self.z / self.z_R)


@dataclass(frozen=True)
class ModeTerm:
    m: int
    n: int
    coeff: complex

    def __post_init__(self):
        _check_index('m', self.m)
        _check_index('n', self.n)
        object.__setattr__(self, 'coeff', complex(self.coeff))


@dataclass(frozen=True)
class PumpSpec:
    """Normalized superposition of HG modes sharing one beam."""
    beam: BeamSpec
    terms: tuple = field(default_factory=tuple)
    angle: float = 0.0

    def __post_init__(self):
        terms = tuple(t if isinstance(t, ModeTerm) else ModeTerm(*t) for t in self.terms)
        if not terms:
            raise InvalidArgumentError("pump needs at least one mode term")
        total = sum(abs(t.coeff) ** 2 for t in terms)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidArgumentError(
                f"mode coefficients must satisfy sum |c|^2 = 1, got {total:.15g}")
        object.__setattr__(self, 'terms', terms)

    @classmethod
    def normalized(cls, beam, terms, angle=0.0):
        """Build a pump from unnormalized (m, n, coeff) terms."""
        terms = [t if isinstance(t, ModeTerm) else ModeTerm(*t) for t in terms]
        total = math.sqrt(sum(abs(t.coeff) ** 2 for t in terms))
        if total == 0.0:
            raise InvalidArgumentError("mode coefficients are all zero")
        return cls(beam, tuple(ModeTerm(t.m, t.n, t.coeff / total) for t in terms), angle)

    def parity_partner(self):
        """Same pump with m and n exchanged in every term."""
        return PumpSpec(self.beam, tuple(ModeTerm(t.n, t.m, t.coeff) for t in self.terms),
                        self.angle)


def hermite(n, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    _check_index('n', n)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def hg_norm_constant(m, n, width):
    return math.sqrt(2.0 / math.pi) / width / math.sqrt(
        2.0 ** (m + n) * math.factorial(m) * math.factorial(n))


def hg_amplitude(m, n, beam, x, y, angle=0.0):
    """Complex HG_mn amplitude at (x, y) on the plane beam.z.

    `angle` (radians) rotates the mode pattern about the beam axis. The
    envelope uses exp(-(x^2+y^2)/w^2); R is infinite at z = 0, where the
    curvature phase is exactly 1.
    """
    _check_index('m', m)
    _check_index('n', n)
    if not isinstance(beam, BeamSpec):
        raise InvalidArgumentError(f"beam must be a BeamSpec, got {type(beam).__name__}")

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    xr = x * cos_a + y * sin_a
    yr = -x * sin_a + y * cos_a

    width = beam.width
    scale = math.sqrt(2.0) / width
    r2 = x ** 2 + y ** 2
    amplitude = (hg_norm_constant(m, n, width)
                 * hermite(m, xr * scale) * hermite(n, yr * scale)
                 * np.exp(-r2 / width ** 2))

    phase = np.exp(-1j * (m + n + 1) * beam.gouy_phase)
    if beam.z != 0.0:
        phase = phase * np.exp(-1j * beam.k * r2 / (2.0 * beam.rayleigh_radius))
    return amplitude * phase


def pump_field(spec, grid):
    """Sample the pump superposition on `grid`."""
    def superposition(X, Y):
        total = np.zeros(np.broadcast(X, Y).shape, dtype=np.complex128)
        for term in spec.terms:
            total += term.coeff * hg_amplitude(term.m, term.n, spec.beam, X, Y, spec.angle)
        return total

    field_ = fields.sample(superposition, grid)
    logger.debug(f"Pump sampled on {grid.nx}x{grid.ny}, norm={fields.norm(field_):.12f}")
    return field_


def parity_overlap_y(field_):
    """P = <flip_y f, f> / <f, f>: +1 even in y, -1 odd, 0 balanced mixture."""
    power = fields.inner_product(field_, field_).real
    if power == 0.0:
        raise ZeroFieldError("parity of a zero field is undefined")
    return fields.inner_product(fields.flip_y(field_), field_) / power


def parity_decomposition(field_):
    """Split a field into its even and odd parts in y."""
    flipped = fields.flip_y(field_)
    even = field_.with_values((field_.values + flipped.values) / 2.0)
    odd = field_.with_values((field_.values - flipped.values) / 2.0)
    return even, odd


def classify_parity(overlap, threshold=PARITY_THRESHOLD):
    if abs(overlap - 1.0) < threshold:
        return 'even'
    if abs(overlap + 1.0) < threshold:
        return 'odd'
    return 'mixed'
