#!/usr/bin/env python3
"""
Unit tests for spdc.py
"""

import math
import unittest

import numpy as np
import pytest
from numpy.testing import assert_allclose

import fields
import modes
import spdc
from simulation_errors import InvalidArgumentError, SpectralWindowError

WAIST = 0.5e-3
PUMP_WAVELENGTH = 351.1e-9


def pump_spectrum(n=33):
    beam = modes.BeamSpec.from_wavelength(WAIST, PUMP_WAVELENGTH)
    grid = fields.make_grid(n, n, 5 * WAIST, 5 * WAIST)
    return fields.angular_spectrum(modes.pump_field(modes.PumpSpec(beam, ((0, 0, 1.0),)), grid))


def crystal(L=2e-3, thin=False):
    return spdc.CrystalSpec.from_pump_wavelength(L, PUMP_WAVELENGTH, thin)


class TestCrystalSpec(unittest.TestCase):
    """Test crystal parameters and phase matching."""

    def test_invalid(self):
        with self.assertRaises(InvalidArgumentError):
            spdc.CrystalSpec(0.0, 1e7)
        with self.assertRaises(InvalidArgumentError):
            spdc.CrystalSpec(1e-3, -1.0)
        with self.assertRaises(InvalidArgumentError):
            spdc.CrystalSpec.from_pump_wavelength(1e-3, 0.0)

    def test_prefactor(self):
        c = crystal()
        self.assertAlmostEqual(c.prefactor, math.sqrt(2 * c.L / c.K_pump) / math.pi, delta=1e-20)

    def test_sinc_factor_is_one_for_equal_wavevectors(self):
        q = np.array([3e4, -1e4])
        self.assertEqual(crystal().sinc_factor(q, q), 1.0)

    def test_sinc_factor_tends_to_one_for_thin_crystals(self):
        q_s, q_i = np.array([1e5, 0.0]), np.array([0.0, 0.0])
        factors = [float(crystal(L).sinc_factor(q_s, q_i)) for L in (2e-3, 2e-4, 2e-5)]
        self.assertTrue(factors[0] < factors[1] < factors[2] <= 1.0)
        self.assertAlmostEqual(factors[2], 1.0, delta=1e-4)

    def test_thin_crystal_forces_unity(self):
        q_s = np.zeros((4, 2))
        q_i = np.full((4, 2), 5e5)
        assert_allclose(crystal(thin=True).sinc_factor(q_s, q_i), np.ones(4))

    def test_degeneracy(self):
        c = crystal()
        self.assertTrue(spdc.is_degenerate(c, 4 * math.pi / (2 * PUMP_WAVELENGTH)))
        self.assertFalse(spdc.is_degenerate(c, 4 * math.pi / 710e-9))


class TestPhi(unittest.TestCase):
    """Test the two-photon angular spectrum."""

    def setUp(self):
        self.v = pump_spectrum()
        self.q_s = np.array([0.1, 0.05]) / WAIST
        self.q_i = np.array([0.2, -0.1]) / WAIST

    def test_equal_wavevectors(self):
        c = crystal()
        total = 2 * self.q_s
        expected = c.prefactor * fields.interpolate(self.v, total[0], total[1])
        self.assertAlmostEqual(spdc.phi(self.q_s, self.q_s, self.v, c), complex(expected), delta=1e-15)

    def test_thin_crystal_value(self):
        c = crystal(thin=True)
        total = self.q_s + self.q_i
        expected = c.prefactor * fields.interpolate(self.v, total[0], total[1])
        self.assertAlmostEqual(spdc.phi(self.q_s, self.q_i, self.v, c), complex(expected), delta=1e-15)

    def test_scalar_query_returns_complex(self):
        value = spdc.phi(self.q_s, self.q_i, self.v, crystal())
        self.assertIsInstance(value, complex)

    def test_finite_crystal_closed_form(self):
        c = crystal()
        # |q_s - q_i|^2 = u * 4K / L puts the sinc argument at u
        offset = np.array([0.1, 0.05]) / WAIST
        for u in (0.5, 1.0, 2.0):
            half = math.sqrt(u * 4 * c.K_pump / c.L) / 2
            q_s = offset / 2 + np.array([half, 0.0])
            q_i = offset / 2 - np.array([half, 0.0])
            expected = c.prefactor * complex(fields.interpolate(self.v, offset[0], offset[1])) * math.sin(u) / u
            value = spdc.phi(q_s, q_i, self.v, c)
            self.assertLess(abs(value - expected), 1e-9 * abs(expected), msg=f"u={u}")

    def test_exchange_symmetry(self):
        rng = np.random.default_rng(2)
        q_s = rng.uniform(-2, 2, size=(50, 2)) / WAIST
        q_i = rng.uniform(-2, 2, size=(50, 2)) / WAIST
        c = crystal()
        np.testing.assert_array_equal(spdc.phi(q_s, q_i, self.v, c), spdc.phi(q_i, q_s, self.v, c))

    def test_outside_window(self):
        far = np.array([self.v.grid.extent_x, 0.0])
        with self.assertRaises(SpectralWindowError):
            spdc.phi(far, far, self.v, crystal())

    def test_window_mask(self):
        mask = spdc.spectral_window_mask(self.v)
        self.assertTrue(mask[16, 16])
        self.assertFalse(mask[0, 0])


class TestPhiNormalization(unittest.TestCase):
    """Test the |Phi|^2 quadrature."""

    @pytest.mark.slow
    def test_normalized_within_two_percent(self):
        v = pump_spectrum(64)
        c = crystal()
        coarse = spdc.phi_norm(v, c)
        self.assertLess(abs(coarse - 1.0), 0.02)
        fine = spdc.phi_norm(v, c, relative_points=1025, relative_u_max=80.0)
        self.assertLess(abs(fine - 1.0), abs(coarse - 1.0))

    def test_matches_direct_sum_over_phi(self):
        v = pump_spectrum(17)
        c = crystal()
        points, u_max = 33, 40.0
        q_max = math.sqrt(u_max * c.K_pump / c.L)
        rel = fields.make_grid(points, points, q_max, q_max)
        QX, QY = v.grid.mesh()
        qx, qy = rel.mesh()
        Q = np.stack([QX, QY], axis=-1)[:, :, None, None, :]
        q = np.stack([qx, qy], axis=-1)[None, None, :, :, :]

        # q_s = Q/2 + q, q_i = Q/2 - q has unit Jacobian
        values = spdc.phi(Q / 2 + q, Q / 2 - q, v, c)
        pump_weights = v.grid.weights() * spdc.spectral_window_mask(v)
        direct = float(np.sum(np.abs(values) ** 2 * pump_weights[:, :, None, None] * rel.weights()[None, None]))

        quadrature = spdc.phi_norm(v, c, relative_points=points, relative_u_max=u_max)
        self.assertAlmostEqual(direct, quadrature, delta=1e-8 * quadrature)

    def test_thin_crystal_not_normalizable(self):
        with self.assertRaises(InvalidArgumentError):
            spdc.phi_norm(pump_spectrum(), crystal(thin=True))


class TestPolarization(unittest.TestCase):
    """Test polarization states."""

    def test_named_states(self):
        assert_allclose(spdc.make_polarization('symmetric_HH').c, [[1, 0], [0, 0]])
        s = 1 / math.sqrt(2)
        assert_allclose(spdc.make_polarization('antisymmetric_singlet').c, [[0, s], [-s, 0]])

    def test_custom_is_normalized(self):
        p = spdc.make_polarization('custom', [[1, 1], [0, 0]])
        assert_allclose(p.c, [[1 / math.sqrt(2), 1 / math.sqrt(2)], [0, 0]], rtol=1e-15)

    def test_invalid(self):
        with self.assertRaises(InvalidArgumentError):
            spdc.make_polarization('custom', [[0, 0], [0, 0]])
        with self.assertRaises(InvalidArgumentError):
            spdc.make_polarization('custom', [[1, 0, 0], [0, 0, 0]])
        with self.assertRaises(InvalidArgumentError):
            spdc.make_polarization('custom')
        with self.assertRaises(InvalidArgumentError):
            spdc.make_polarization('bell')
        with self.assertRaises(InvalidArgumentError):
            spdc.PolarizationMatrix([[1, 1], [0, 0]])

    def test_exchange_overlap(self):
        self.assertAlmostEqual(spdc.make_polarization('symmetric_HH').exchange_overlap(), 1.0)
        self.assertAlmostEqual(spdc.make_polarization('antisymmetric_singlet').exchange_overlap(), -1.0)

    def test_exchange_decompose(self):
        _, _, weights = spdc.exchange_decompose(spdc.make_polarization('symmetric_HH'))
        assert_allclose(weights, (1.0, 0.0))
        _, _, weights = spdc.exchange_decompose(spdc.make_polarization('antisymmetric_singlet'))
        assert_allclose(weights, (0.0, 1.0), atol=1e-15)
        _, _, weights = spdc.exchange_decompose(spdc.make_polarization('custom', [[0, 1], [0, 0]]))
        assert_allclose(weights, (0.5, 0.5))

    def test_exchange_decompose_idempotent(self):
        rng = np.random.default_rng(9)
        p = spdc.make_polarization('custom', rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        sym, antisym, _ = spdc.exchange_decompose(p)
        assert_allclose(spdc.exchange_decompose(sym).weights, (1.0, 0.0), atol=1e-15)
        assert_allclose(spdc.exchange_decompose(antisym).weights, (0.0, 1.0), atol=1e-15)


if __name__ == '__main__':
    unittest.main()
