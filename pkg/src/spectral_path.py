#!/usr/bin/env python3
"""
Coincidence rates computed from the two-photon angular spectrum.

This route keeps the phase-matching sinc factor: it samples Phi(q_s, q_i) on
a small symmetric wavevector grid, propagates each photon to the detection
plane with exp(-i q^2 Z / 2k), transforms to detection coordinates with an
e^{+i q.rho} kernel and applies the beam splitter:

    Psi_tt(r1, r2) =  t^2 C(s1, s2) psi(r1, r2)
    Psi_rr(r1, r2) = -r^2 C(s2, s1) psi(~r2, ~r1)     (~ mirrors y)

The cost grows as n^5 per axis count n, so grids stay small.
"""

import logging

import numpy as np

import fields
import hom
import spdc
from simulation_errors import AsymmetricGridError, InvalidArgumentError

logger = logging.getLogger(__name__)

DEFAULT_SPECTRAL_POINTS = 11
MAX_SPECTRAL_POINTS = 31


def wavevector_grid(v, points):
    """Symmetric single-photon q grid; q_s + q_i stays inside the spectrum of v."""
    if points % 2 == 0:
        raise InvalidArgumentError(f"spectral grid needs an odd point count, got {points}")
    return fields.make_grid(points, points, v.grid.extent_x / 2.0, v.grid.extent_y / 2.0)


def two_photon_amplitude(pump, crystal, detection_grid, plane_z, k_photon, points=DEFAULT_SPECTRAL_POINTS):
    """psi(r1, r2) on the 4D detection grid, indexed [i1, j1, i2, j2]."""
    if not 3 <= points <= MAX_SPECTRAL_POINTS:
        raise InvalidArgumentError(f"spectral points must be in [3, {MAX_SPECTRAL_POINTS}], got {points}")
    v = fields.angular_spectrum(pump)
    qgrid = wavevector_grid(v, points)
    QX, QY = qgrid.mesh()
    q_s = np.stack([QX, QY], axis=-1)[:, :, None, None, :]
    q_i = np.stack([QX, QY], axis=-1)[None, None, :, :, :]

    spectrum = spdc.phi(q_s, q_i, v, crystal)
    q2 = QX ** 2 + QY ** 2
    propagation = np.exp(-1j * plane_z / (2.0 * k_photon) * (q2[:, :, None, None] + q2[None, None, :, :]))
    spectrum = spectrum * propagation

    fx = fields.fourier_kernel(detection_grid.x, qgrid.x, qgrid.dx, sign=1)
    fy = fields.fourier_kernel(detection_grid.y, qgrid.y, qgrid.dy, sign=1)
    psi = np.einsum('ia,jb,kc,ld,abcd->ijkl', fx, fy, fx, fy, spectrum, optimize=True)
    logger.debug(f"Spectral two-photon amplitude: {points}^4 wavevectors -> "
                 f"{detection_grid.nx}x{detection_grid.ny} detection grid")
    return psi


class SpectralModel:
    """Coincidence rate from Phi-based amplitudes, with the same contract as hom.CoincidenceModel."""

    def __init__(self, pump, crystal, pol, bs, det1, det2, detection_grid,
                 plane_z=hom.DEFAULT_PLANE_Z, K_sum=None, points=DEFAULT_SPECTRAL_POINTS):
        if not detection_grid.is_y_symmetric:
            raise AsymmetricGridError(
                f"detection grid must be centered on y = 0, got center_y={detection_grid.center_y}")
        if K_sum is None:
            K_sum = crystal.K_pump
        if plane_z < 0:
            raise InvalidArgumentError(f"detection plane Z must be >= 0, got {plane_z!r}")
        self.filter = hom.effective_filter(det1, det2)

        psi = two_photon_amplitude(pump, crystal, detection_grid, plane_z, K_sum / 2.0, points)
        psi_exchanged = psi.transpose(2, 3, 0, 1)[:, ::-1, :, ::-1]
        c = pol.c[None, None, None, None, :, :]
        self.tt = bs.t ** 2 * psi[..., None, None] * c
        self.rr = -bs.r ** 2 * psi_exchanged[..., None, None] * pol.c.T[None, None, None, None, :, :]
        self.weights = hom.aperture_weights(det1, detection_grid)[:, :, None, None] \
            * hom.aperture_weights(det2, detection_grid)[None, None, :, :]

    def rate(self, delay):
        return hom.rate_from_amplitudes(self.tt, self.rr, self.weights,
                                        hom.temporal_overlap(delay, self.filter))
