#!/usr/bin/env python3
"""
Beam-splitter transformation, biphoton amplitude components and
coincidence rates of the multimode HOM interferometer.

Detection coordinates r_1 = (x_1, y_1) and r_2 = (x_2, y_2) are measured in
the frames of the two output arms; a reflection at the beam splitter mirrors
y. The components are sampled on a 4D grid indexed
[i_1, j_1, i_2, j_2, sigma_1, sigma_2]. The pump W enters through the pair
midpoints, so it is looked up on `fields.midpoint_grid(detection_grid)`.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

import fields
from simulation_errors import (
    AsymmetricGridError,
    CoverageError,
    GridMismatchError,
    InvalidArgumentError,
    ResourceLimitError,
    ZeroBaselineError,
)

logger = logging.getLogger(__name__)

FILTER_SHAPES = ['gaussian', 'rect_lambda']
BS_TOLERANCE = 1e-12
DEFAULT_PLANE_Z = 0.5
DEFAULT_FILTER_CENTER = 702.2e-9
DEFAULT_FILTER_FWHM = 1.0e-9
MAX_ORACLE_PAIRS = 16 ** 4


@dataclass(frozen=True)
class BeamSplitterSpec:
    """Symmetric beam splitter with real amplitudes t and r; reflection adds a factor i."""
    t: float
    r: float

    def __post_init__(self):
        for name in ('t', 'r'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise InvalidArgumentError(f"beam splitter {name} must be in [0, 1], got {value!r}")
        if abs(self.t ** 2 + self.r ** 2 - 1.0) > BS_TOLERANCE:
            raise InvalidArgumentError(
                f"beam splitter must satisfy t^2 + r^2 = 1, got {self.t ** 2 + self.r ** 2:.15g}")

    @classmethod
    def balanced(cls):
        return cls(math.sqrt(0.5), math.sqrt(0.5))

    @classmethod
    def from_transmissivity(cls, transmissivity):
        if not 0.0 <= transmissivity <= 1.0:
            raise InvalidArgumentError(f"transmissivity must be in [0, 1], got {transmissivity!r}")
        return cls(math.sqrt(transmissivity), math.sqrt(1.0 - transmissivity))


@dataclass(frozen=True)
class DetectorSpec:
    """Circular aperture (infinite radius = whole grid) behind an interference filter."""
    aperture_radius: float = math.inf
    center: tuple = (0.0, 0.0)
    filter_fwhm: float = DEFAULT_FILTER_FWHM
    filter_center: float = DEFAULT_FILTER_CENTER
    filter_shape: str = 'gaussian'

    def __post_init__(self):
        for name in ('aperture_radius', 'filter_fwhm', 'filter_center'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or math.isnan(value) or value <= 0:
                raise InvalidArgumentError(f"detector {name} must be > 0, got {value!r}")
        if not math.isfinite(self.filter_fwhm) or not math.isfinite(self.filter_center):
            raise InvalidArgumentError("detector filter quantities must be finite")
        if self.filter_shape not in FILTER_SHAPES:
            raise InvalidArgumentError(
                f"Unsupported filter shape: {self.filter_shape}. Supported: {', '.join(FILTER_SHAPES)}")
        center = tuple(float(c) for c in self.center)
        if len(center) != 2:
            raise InvalidArgumentError(f"detector center must be (x, y), got {self.center!r}")
        object.__setattr__(self, 'center', center)

    @property
    def is_full_aperture(self):
        return math.isinf(self.aperture_radius)

    @property
    def coherence_length(self):
        """l_c = (2 ln2 / pi) * lambda_0^2 / delta_lambda."""
        return (2.0 * math.log(2.0) / math.pi) * self.filter_center ** 2 / self.filter_fwhm


@dataclass(frozen=True, eq=False)
class BiphotonComponents:
    """The four transmission/reflection amplitudes on a 4D detection grid.

    tr and rt hold both photons in arm 1 and arm 2 respectively; tt and rr
    are the two coincidence amplitudes. tr_direct is the first bracket term of
    tr (tr = tr_direct + the same term with the two arm-1 labels exchanged),
    likewise rt_direct.
    """
    grid: fields.Grid2D
    tt: np.ndarray
    rr: np.ndarray
    tr: np.ndarray
    rt: np.ndarray
    tr_direct: np.ndarray
    rt_direct: np.ndarray
    plane_z: float
    K_sum: float


def phase_constant(wavelength):
    """K = k_1 + k_2 for degenerate photons of the given wavelength."""
    return 4.0 * math.pi / wavelength


def effective_filter(det1, det2):
    """Detector whose filter limits the pair bandwidth (the narrower one)."""
    return det1 if det1.filter_fwhm <= det2.filter_fwhm else det2


def bs_transform_spectrum(a_s, a_i, bs):
    """a_1 = t a_s + i r flip_y(a_i); a_2 = t a_i + i r flip_y(a_s)."""
    if a_s.grid != a_i.grid:
        raise GridMismatchError(f"Grid mismatch: {a_s.grid} vs {a_i.grid}")
    a_1 = a_s * bs.t + fields.flip_y(a_i) * (1j * bs.r)
    a_2 = a_i * bs.t + fields.flip_y(a_s) * (1j * bs.r)
    return a_1, a_2


def detection_grid_for(pump_grid):
    """Detection grid whose midpoint grid is `pump_grid` (odd counts only)."""
    if pump_grid.nx % 2 == 0 or pump_grid.ny % 2 == 0:
        raise InvalidArgumentError(
            f"cannot infer a detection grid from even pump counts ({pump_grid.nx}, {pump_grid.ny}); "
            f"pass detection_grid explicitly")
    return fields.make_grid((pump_grid.nx + 1) // 2, (pump_grid.ny + 1) // 2,
                            pump_grid.extent_x, pump_grid.extent_y,
                            pump_grid.center_x, pump_grid.center_y)


def pump_on_midpoints(pump, detection_grid):
    """Pump values on the midpoint grid of `detection_grid`.

    A pump already sampled there is used as is; any other pump grid is
    resampled bilinearly if it covers every midpoint.
    """
    if not detection_grid.is_y_symmetric:
        raise AsymmetricGridError(
            f"detection grid must be centered on y = 0, got center_y={detection_grid.center_y}")
    mid = fields.midpoint_grid(detection_grid)
    if pump.grid == mid:
        return pump.values
    X, Y = mid.mesh()
    inside = fields.covers(pump.grid, X, Y)
    if not np.all(inside):
        raise CoverageError(
            f"pump window (+/-{pump.grid.extent_x:.4g}, +/-{pump.grid.extent_y:.4g}) m does not cover "
            f"detection midpoints (+/-{mid.extent_x:.4g}, +/-{mid.extent_y:.4g}) m")
    logger.debug(f"Resampling pump from {pump.grid.nx}x{pump.grid.ny} onto {mid.nx}x{mid.ny} midpoints")
    return fields.resample(pump, mid).values


def aperture_mask(det, grid):
    """1.0 on nodes inside the detector aperture, 0.0 outside."""
    if det.is_full_aperture:
        return np.ones(grid.shape)
    X, Y = grid.mesh()
    cx, cy = det.center
    if (abs(cx) + det.aperture_radius > grid.extent_x + abs(grid.center_x)
            or abs(cy) + det.aperture_radius > grid.extent_y + abs(grid.center_y)):
        logger.warning(f"Aperture radius {det.aperture_radius:.4g} m at {det.center} "
                       f"extends beyond the detection grid; it is truncated")
    return ((X - cx) ** 2 + (Y - cy) ** 2 <= det.aperture_radius ** 2).astype(float)


def aperture_weights(det, grid):
    return aperture_mask(det, grid) * grid.weights()


def temporal_overlap(delay, det):
    """Indistinguishability envelope g(delay) set by the detector filter.

    gaussian: exp(-(delay/l_c)^2); rect_lambda: sinc(delay * dlambda / lambda_0^2).
    """
    delay = np.asarray(delay, dtype=float)
    if det.filter_shape == 'gaussian':
        g = np.exp(-(delay / det.coherence_length) ** 2)
    else:
        g = np.sinc(delay * det.filter_fwhm / det.filter_center ** 2)
    return float(g) if g.ndim == 0 else g


def _pair_phase(grid, K_sum, plane_z, mirrored):
    # exp{i K/(2Z) [(x1 - x2)^2 + (y1 -/+ y2)^2]} on the 4D grid
    x, y = grid.x, grid.y
    dx2 = (x[:, None] - x[None, :]) ** 2
    if mirrored:
        dy2 = (y[:, None] + y[None, :]) ** 2
    else:
        dy2 = (y[:, None] - y[None, :]) ** 2
    quad = dx2[:, None, :, None] + dy2[None, :, None, :]
    return np.exp(1j * K_sum / (2.0 * plane_z) * quad)


def check_pair_count(grid, max_pairs):
    pairs = (grid.nx * grid.ny) ** 2
    if pairs > max_pairs:
        raise ResourceLimitError(
            f"{grid.nx}x{grid.ny} detection grid gives {pairs} sample pairs, above the cap of {max_pairs}")
    return pairs


def biphoton_components(pump, pol, bs, detection_grid, plane_z=DEFAULT_PLANE_Z, K_sum=None,
                        max_pairs=MAX_ORACLE_PAIRS):
    """Evaluate Psi_tr, Psi_rt, Psi_tt and Psi_rr on the 4D detection grid.

    Psi_tt =  t^2     e^{iK[(x1-x2)^2+(y1-y2)^2]/2Z} W((x1+x2)/2, (y1+y2)/2)  Pi(s1, s2)
    Psi_rr = -r^2     e^{iK[(x1-x2)^2+(y1-y2)^2]/2Z} W((x1+x2)/2, -(y1+y2)/2) Pi(s2, s1)
    Psi_tr =  i t r   e^{iK[(x1-x1')^2+(y1+y1')^2]/2Z}
              [W((x1+x1')/2, (-y1+y1')/2) Pi(s1, s1') + W((x1+x1')/2, (y1-y1')/2) Pi(s1', s1)]
    and Psi_rt likewise in arm 2.
    """
    if not plane_z > 0:
        raise InvalidArgumentError(f"detection plane Z must be > 0, got {plane_z!r}")
    if K_sum is None:
        K_sum = phase_constant(DEFAULT_FILTER_CENTER)
    if not K_sum > 0:
        raise InvalidArgumentError(f"K_sum must be > 0, got {K_sum!r}")
    check_pair_count(detection_grid, max_pairs)

    w_mid = pump_on_midpoints(pump, detection_grid)
    nx, ny = detection_grid.shape
    i = np.arange(nx)
    j = np.arange(ny)
    k_idx = (i[:, None] + i[None, :])[:, None, :, None]
    l_idx = (j[:, None] + j[None, :])[None, :, None, :]
    l_flip = (2 * ny - 2) - l_idx
    # arm-internal midpoints of (-y1 + y1')/2 and (y1 - y1')/2
    l_minus = ((ny - 1 - j)[:, None] + j[None, :])[None, :, None, :]
    l_plus = (2 * ny - 2) - l_minus

    c = pol.c[None, None, None, None, :, :]
    c_t = pol.c.T[None, None, None, None, :, :]

    phase = _pair_phase(detection_grid, K_sum, plane_z, mirrored=False)[..., None, None]
    tt = bs.t ** 2 * phase * w_mid[k_idx, l_idx][..., None, None] * c
    rr = -bs.r ** 2 * phase * w_mid[k_idx, l_flip][..., None, None] * c_t

    phase_arm = _pair_phase(detection_grid, K_sum, plane_z, mirrored=True)[..., None, None]
    tr_direct = 1j * bs.t * bs.r * phase_arm * w_mid[k_idx, l_minus][..., None, None] * c
    tr_swapped = 1j * bs.t * bs.r * phase_arm * w_mid[k_idx, l_plus][..., None, None] * c_t
    tr = tr_direct + tr_swapped

    logger.debug(f"Biphoton components on {nx}x{ny} detection grid, Z={plane_z} m, K={K_sum:.6g} 1/m")
    return BiphotonComponents(
        grid=detection_grid, tt=tt, rr=rr, tr=tr, rt=tr.copy(),
        tr_direct=tr_direct, rt_direct=tr_direct.copy(), plane_z=plane_z, K_sum=K_sum)


def exchange_labels(amplitude):
    """Exchange the two photons: (x1, y1, s1) <-> (x2, -y2, s2), times -1.

    The y sign maps each arm's frame onto the other's mirrored frame; the -1
    is the i*i picked up by a doubly reflected pair.
    """
    return -amplitude.transpose(2, 3, 0, 1, 5, 4)[:, ::-1, :, ::-1]


def _pair_weights(det1, det2, grid):
    w1 = aperture_weights(det1, grid)
    w2 = aperture_weights(det2, grid)
    return w1[:, :, None, None] * w2[None, None, :, :]


def _mixture(a, b, g):
    """g |a + b|^2 + (1 - g)(|a|^2 + |b|^2), summed over polarizations."""
    cross = 2.0 * np.real(a * np.conj(b))
    density = np.abs(a) ** 2 + np.abs(b) ** 2 + g * cross
    return density.sum(axis=(-2, -1))


def rate_from_amplitudes(tt, rr, weights, g):
    """Normalized coincidence rate from sampled tt/rr amplitudes by direct 4D summation."""
    baseline = float(np.sum(weights * _mixture(tt, rr, 0.0)))
    if not baseline > 0.0:
        raise ZeroBaselineError("coincidence baseline is zero for this configuration")
    return float(np.sum(weights * _mixture(tt, rr, g))) / baseline


class CoincidenceModel:
    """Delay-independent part of the coincidence rate, C(delay) = 1 - g(delay) I / A.

    A = sum_sigma integral of |Psi_tt|^2 + |Psi_rr|^2 and
    I = -2 Re sum_sigma integral of Psi_tt Psi_rr^* over both apertures. Both
    depend on the detection points only through their midpoint, so the 4D
    integrals reduce to the midpoint grid weighted by the convolution of the
    two aperture weight maps. The quadratic phase prefactors cancel.
    """

    def __init__(self, pump, pol, bs, det1, det2, detection_grid=None):
        if detection_grid is None:
            detection_grid = detection_grid_for(pump.grid)
        self.detection_grid = detection_grid
        self.filter = effective_filter(det1, det2)

        w_mid = pump_on_midpoints(pump, detection_grid)
        w_flip = w_mid[:, ::-1]
        midpoint_weights = convolve2d(aperture_weights(det1, detection_grid),
                                      aperture_weights(det2, detection_grid), mode='full')

        pol_power = float(np.sum(np.abs(pol.c) ** 2))
        direct = float(np.sum(midpoint_weights * np.abs(w_mid) ** 2))
        mirrored = float(np.sum(midpoint_weights * np.abs(w_flip) ** 2))
        overlap = complex(np.sum(midpoint_weights * w_mid * np.conj(w_flip)))

        self.baseline = pol_power * (bs.t ** 4 * direct + bs.r ** 4 * mirrored)
        self.interference = 2.0 * bs.t ** 2 * bs.r ** 2 * (pol.exchange_overlap() * overlap).real
        if not self.baseline > 0.0:
            raise ZeroBaselineError("coincidence baseline is zero for this configuration")
        logger.debug(f"Coincidence model: A={self.baseline:.6g}, I={self.interference:.6g}, "
                     f"I/A={self.interference / self.baseline:.12f}")

    @property
    def contrast(self):
        return self.interference / self.baseline

    def rate(self, delay):
        return 1.0 - temporal_overlap(delay, self.filter) * self.contrast


def coincidence_rate(pump, pol, bs, det1, det2, delay, detection_grid=None):
    """Normalized coincidence rate at one path delay (baseline A = 1)."""
    return CoincidenceModel(pump, pol, bs, det1, det2, detection_grid).rate(delay)


def coincidence_rate_oracle(pump, pol, bs, det1, det2, delay, detection_grid=None,
                            plane_z=DEFAULT_PLANE_Z, K_sum=None, max_pairs=MAX_ORACLE_PAIRS):
    """Brute-force coincidence rate: direct summation over all 4D detection pairs.

    Partial distinguishability enters as the mixture
    g |Psi_tt + Psi_rr|^2 + (1 - g)(|Psi_tt|^2 + |Psi_rr|^2).
    """
    if detection_grid is None:
        detection_grid = detection_grid_for(pump.grid)
    components = biphoton_components(pump, pol, bs, detection_grid, plane_z, K_sum, max_pairs)
    g = temporal_overlap(delay, effective_filter(det1, det2))
    return rate_from_amplitudes(components.tt, components.rr,
                                _pair_weights(det1, det2, detection_grid), g)


def pair_detection_probabilities(components, det1, det2, delay):
    """Unnormalized pair probabilities: coincidences, both-in-arm-1, both-in-arm-2.

    Same-arm probabilities count each unordered pair once (factor 1/2).
    """
    grid = components.grid
    filt = effective_filter(det1, det2)
    g = temporal_overlap(delay, filt)

    def same_arm(direct, det):
        swapped = direct.transpose(2, 3, 0, 1, 5, 4)
        return 0.5 * float(np.sum(_pair_weights(det, det, grid) * _mixture(direct, swapped, g)))

    coincidence = float(np.sum(_pair_weights(det1, det2, grid) * _mixture(components.tt, components.rr, g)))
    arm1 = same_arm(components.tr_direct, det1)
    arm2 = same_arm(components.rt_direct, det2)
    return {
        'coincidence': coincidence,
        'arm1': arm1,
        'arm2': arm2,
        'total': coincidence + arm1 + arm2,
    }
