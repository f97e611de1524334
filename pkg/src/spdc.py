#!/usr/bin/env python3
"""
Two-photon angular spectrum and polarization state of SPDC pairs.

Phi(q_s, q_i) = prefactor * v(q_s + q_i) * sinc(L |q_s - q_i|^2 / 4K)

The prefactor (1/pi) sqrt(2L/K) makes the integral of |Phi|^2 over both
wavevectors equal to 1 for a normalized pump spectrum v.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

import fields
from simulation_errors import InvalidArgumentError, SpectralWindowError

logger = logging.getLogger(__name__)

POLARIZATION_KINDS = ['symmetric_HH', 'antisymmetric_singlet', 'custom']
NORMALIZATION_TOLERANCE = 1e-12
WINDOW_THRESHOLD = 1e-8
DEGENERACY_TOLERANCE = 1e-9

# Default resolution of the relative-wavevector quadrature in phi_norm
DEFAULT_RELATIVE_POINTS = 513
DEFAULT_RELATIVE_U_MAX = 40.0

ExchangeDecomposition = namedtuple('ExchangeDecomposition', ['symmetric', 'antisymmetric', 'weights'])


@dataclass(frozen=True)
class CrystalSpec:
    """Crystal length L and pump wavevector magnitude K_pump, both in SI units."""
    L: float
    K_pump: float
    thin_crystal: bool = False

    def __post_init__(self):
        for name in ('L', 'K_pump'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise InvalidArgumentError(f"crystal {name} must be finite and > 0, got {value!r}")

    @classmethod
    def from_pump_wavelength(cls, L, pump_wavelength, thin_crystal=False):
        if not pump_wavelength > 0:
            raise InvalidArgumentError(f"pump wavelength must be > 0, got {pump_wavelength!r}")
        return cls(L=L, K_pump=2.0 * math.pi / pump_wavelength, thin_crystal=thin_crystal)

    @property
    def prefactor(self):
        return math.sqrt(2.0 * self.L / self.K_pump) / math.pi

    def sinc_factor(self, q_s, q_i):
        """Phase-matching factor; exactly 1 in the thin-crystal limit."""
        q_s = np.asarray(q_s, dtype=float)
        q_i = np.asarray(q_i, dtype=float)
        shape = np.broadcast(q_s[..., 0], q_i[..., 0]).shape
        if self.thin_crystal:
            return np.ones(shape)
        diff2 = np.sum((q_s - q_i) ** 2, axis=-1)
        u = self.L * diff2 / (4.0 * self.K_pump)
        # np.sinc is sin(pi x)/(pi x) with sinc(0) == 1
        return np.sinc(u / math.pi)


def is_degenerate(crystal, K_sum, rtol=DEGENERACY_TOLERANCE):
    """True when k_1 + k_2 matches the pump wavevector magnitude."""
    return abs(K_sum - crystal.K_pump) <= rtol * crystal.K_pump


@dataclass(frozen=True, eq=False)
class PolarizationMatrix:
    """2x2 coefficients C[sigma_s, sigma_i] over the basis (H, V)."""
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=np.complex128)
        if c.shape != (2, 2):
            raise InvalidArgumentError(f"polarization matrix must be 2x2, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidArgumentError("polarization matrix has non-finite entries")
        total = float(np.sum(np.abs(c) ** 2))
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidArgumentError(
                f"polarization matrix must satisfy sum |c|^2 = 1, got {total:.15g}")
        c.flags.writeable = False
        object.__setattr__(self, 'c', c)

    @property
    def transposed(self):
        return self.c.T

    def exchange_overlap(self):
        """sum_ab c[a, b] * conj(c[b, a]); +1 symmetric, -1 antisymmetric."""
        return complex(np.sum(self.c * np.conj(self.c.T)))


def make_polarization(kind, matrix=None):
    """Build a normalized polarization state.

    kind is one of POLARIZATION_KINDS; `matrix` is required for 'custom'.
    """
    if kind == 'symmetric_HH':
        c = [[1.0, 0.0], [0.0, 0.0]]
    elif kind == 'antisymmetric_singlet':
        s = 1.0 / math.sqrt(2.0)
        c = [[0.0, s], [-s, 0.0]]
    elif kind == 'custom':
        if matrix is None:
            raise InvalidArgumentError("custom polarization needs a matrix")
        c = np.array(matrix, dtype=np.complex128)
        if c.shape != (2, 2):
            raise InvalidArgumentError(f"polarization matrix must be 2x2, got shape {c.shape}")
        total = math.sqrt(float(np.sum(np.abs(c) ** 2)))
        if total == 0.0 or not math.isfinite(total):
            raise InvalidArgumentError("polarization matrix must be nonzero and finite")
        c = c / total
    else:
        raise InvalidArgumentError(
            f"Unsupported polarization kind: {kind}. Supported: {', '.join(POLARIZATION_KINDS)}")
    return PolarizationMatrix(c)


def exchange_decompose(p):
    """Split into exchange-symmetric and antisymmetric parts with their weights."""
    if not isinstance(p, PolarizationMatrix):
        p = make_polarization('custom', p)
    sym = (p.c + p.c.T) / 2.0
    antisym = (p.c - p.c.T) / 2.0
    w_sym = float(np.sum(np.abs(sym) ** 2))
    w_anti = float(np.sum(np.abs(antisym) ** 2))
    return ExchangeDecomposition(sym, antisym, (w_sym, w_anti))


def spectral_window_mask(v, threshold=WINDOW_THRESHOLD):
    """Nodes where |v| exceeds threshold * max|v|."""
    magnitude = np.abs(v.values)
    return magnitude > threshold * magnitude.max()


def phi(q_s, q_i, v, crystal):
    """Two-photon angular spectrum at transverse wavevectors q_s, q_i.

    q_s and q_i are arrays whose last axis holds (q_x, q_y). v is the pump
    angular spectrum, interpolated bilinearly at q_s + q_i; points outside
    its grid raise SpectralWindowError instead of extrapolating.
    """
    q_s = np.asarray(q_s, dtype=float)
    q_i = np.asarray(q_i, dtype=float)
    total = q_s + q_i
    inside = fields.covers(v.grid, total[..., 0], total[..., 1])
    if not np.all(inside):
        bad = total[~inside][0] if total.ndim > 1 else total
        raise SpectralWindowError(
            f"q_s + q_i = ({bad[0]:.6g}, {bad[1]:.6g}) 1/m lies outside the pump spectrum window "
            f"(+/-{v.grid.extent_x:.6g}, +/-{v.grid.extent_y:.6g})")
    pump = fields.interpolate(v, total[..., 0], total[..., 1])
    value = crystal.prefactor * pump * crystal.sinc_factor(q_s, q_i)
    return complex(value) if np.ndim(value) == 0 else value


def phi_norm(v, crystal, relative_points=DEFAULT_RELATIVE_POINTS,
             relative_u_max=DEFAULT_RELATIVE_U_MAX):
    """Quadrature of |Phi|^2 over (q_s, q_i).

    Uses Q = q_s + q_i and q = (q_s - q_i)/2 (unit Jacobian), where Phi
    separates into v(Q) * sinc(L q^2 / K). Q runs over the spectral window of
    v; q over a square of half-width sqrt(u_max K / L).
    """
    if crystal.thin_crystal:
        raise InvalidArgumentError("Phi is not normalizable in the thin-crystal limit")
    mask = spectral_window_mask(v)
    pump_power = float(np.sum(np.abs(v.values[mask]) ** 2 * v.grid.weights()[mask]))

    q_max = math.sqrt(relative_u_max * crystal.K_pump / crystal.L)
    rel = fields.make_grid(relative_points, relative_points, q_max, q_max)
    QX, QY = rel.mesh()
    u = crystal.L * (QX ** 2 + QY ** 2) / crystal.K_pump
    relative_power = float(np.sum(np.sinc(u / math.pi) ** 2 * rel.weights()))

    total = crystal.prefactor ** 2 * pump_power * relative_power
    logger.debug(f"|Phi|^2 quadrature: pump={pump_power:.8f}, relative={relative_power:.6g}, "
                 f"total={total:.8f}")
    return total
