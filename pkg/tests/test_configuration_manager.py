#!/usr/bin/env python3
"""
Unit tests for configuration_manager.py
"""

import argparse
import math
import os
import tempfile
import unittest
from unittest.mock import patch

import yaml

# Import the module to test
import configuration_manager
import hom


def make_args(**overrides):
    values = {'config': None, 'out': None, 'preset': None, 'seed': None, 'log_file': None}
    values.update(overrides)
    return argparse.Namespace(**values)


class TestValidationFunctions(unittest.TestCase):
    """Test validation functions."""

    def test_validate_positive(self):
        self.assertTrue(configuration_manager.validate_positive(0.5))
        self.assertTrue(configuration_manager.validate_positive(3))
        self.assertFalse(configuration_manager.validate_positive(0))
        self.assertFalse(configuration_manager.validate_positive(-1.0))
        self.assertFalse(configuration_manager.validate_positive(math.inf))
        self.assertFalse(configuration_manager.validate_positive(True))
        self.assertFalse(configuration_manager.validate_positive('1'))

    def test_validate_unit_interval(self):
        self.assertTrue(configuration_manager.validate_unit_interval(0.0))
        self.assertTrue(configuration_manager.validate_unit_interval(1.0))
        self.assertFalse(configuration_manager.validate_unit_interval(1.01))

    def test_validate_impurity(self):
        self.assertTrue(configuration_manager.validate_impurity(0.0))
        self.assertFalse(configuration_manager.validate_impurity(1.0))

    def test_validate_int_at_least(self):
        self.assertTrue(configuration_manager.validate_int_at_least(2, 2))
        self.assertFalse(configuration_manager.validate_int_at_least(1, 2))
        self.assertFalse(configuration_manager.validate_int_at_least(2.0, 2))
        self.assertFalse(configuration_manager.validate_int_at_least(True, 0))


class TestMergeConfig(unittest.TestCase):
    """Test deep merging of configuration layers."""

    def test_partial_section_keeps_defaults(self):
        defaults = configuration_manager.prepare_default_config()
        merged, issues = configuration_manager.merge_config(defaults, {'pump': {'waist_mm': 0.8}})
        self.assertEqual(issues, [])
        self.assertEqual(merged['pump']['waist_mm'], 0.8)
        self.assertEqual(merged['pump']['wavelength_nm'], defaults['pump']['wavelength_nm'])
        # base is not modified
        self.assertEqual(defaults['pump']['waist_mm'], 0.5)

    def test_unknown_keys_are_reported_with_path(self):
        defaults = configuration_manager.prepare_default_config()
        _, issues = configuration_manager.merge_config(defaults, {'pmp': {}, 'pump': {'waist': 1.0}})
        self.assertIn('pmp: unknown key', issues)
        self.assertIn('pump.waist: unknown key', issues)

    def test_null_section_restores_defaults(self):
        defaults = configuration_manager.prepare_default_config()
        merged, issues = configuration_manager.merge_config(defaults, {'detectors': None})
        self.assertEqual(issues, [])
        self.assertEqual(merged['detectors'], defaults['detectors'])

    def test_non_mapping_section(self):
        defaults = configuration_manager.prepare_default_config()
        merged, issues = configuration_manager.merge_config(defaults, {'detectors': 'wide'})
        self.assertEqual(issues, ['detectors: must be a mapping, got str'])
        self.assertEqual(merged['detectors'], defaults['detectors'])


class TestValidateConfig(unittest.TestCase):
    """Test field-level validation."""

    def setUp(self):
        self.config = configuration_manager.prepare_default_config()

    def test_defaults_are_valid(self):
        self.assertEqual(configuration_manager.validate_config(self.config), [])

    def test_field_messages_start_with_path(self):
        self.config['pump']['waist_mm'] = -1.0
        self.config['delay_scan']['steps'] = 1
        issues = configuration_manager.validate_config(self.config)
        self.assertTrue(any(i.startswith('pump.waist_mm: must be a finite number > 0') for i in issues))
        self.assertTrue(any(i.startswith('delay_scan.steps:') for i in issues))

    def test_unsupported_choices(self):
        self.config['polarization']['kind'] = 'bell'
        self.config['detectors']['filter_shape'] = 'lorentzian'
        self.config['hom']['path'] = 'fourier'
        issues = configuration_manager.validate_config(self.config)
        self.assertEqual(len(issues), 3)
        self.assertTrue(issues[0].startswith('polarization.kind: Unsupported polarization kind: bell'))

    def test_custom_polarization_needs_matrix(self):
        self.config['polarization']['kind'] = 'custom'
        self.assertEqual(configuration_manager.validate_config(self.config),
                         ['polarization.matrix: required when polarization.kind is custom'])
        self.config['polarization']['matrix'] = [[[1, 0], [0, 0]], [[0, 0], [1]]]
        self.assertEqual(configuration_manager.validate_config(self.config),
                         ['polarization.matrix: must be [[re, im] x 2] x 2'])
        self.config['polarization']['matrix'] = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
        self.assertEqual(configuration_manager.validate_config(self.config),
                         ['polarization.matrix: must be nonzero'])

    def test_mode_entries(self):
        self.config['pump']['modes'] = [{'m': -1, 'n': 0, 're': 1.0}, {'m': 0, 'n': 1, 'phase': 0.0}]
        issues = configuration_manager.validate_config(self.config)
        self.assertIn('pump.modes[0].m: must be a non-negative integer, got -1', issues)
        self.assertIn('pump.modes[1].phase: unknown key', issues)

    def test_all_zero_modes(self):
        self.config['pump']['modes'] = [{'m': 1, 'n': 0, 're': 0.0, 'im': 0.0}]
        self.assertEqual(configuration_manager.validate_config(self.config),
                         ['pump.modes: mode coefficients are all zero'])

    def test_offset_grid_rejected(self):
        self.config['grid']['center_y_mm'] = 0.1
        issues = configuration_manager.validate_config(self.config)
        self.assertEqual(len(issues), 1)
        self.assertTrue(issues[0].startswith('grid.center_y_mm: must be 0'))

    def test_delay_range(self):
        self.config['delay_scan']['min_um'] = 10.0
        self.config['delay_scan']['max_um'] = 10.0
        issues = configuration_manager.validate_config(self.config)
        self.assertEqual(len(issues), 1)
        self.assertTrue(issues[0].startswith('delay_scan.max_um: must exceed'))


class TestConfigLoading(unittest.TestCase):
    """Test configuration file loading."""

    def write_config(self, temp_dir, data):
        path = os.path.join(temp_dir, 'config.yaml')
        with open(path, 'w', encoding='utf-8') as f:
            if isinstance(data, str):
                f.write(data)
            else:
                yaml.dump(data, f)
        return path

    def test_explicit_file_not_found(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            config, issues = configuration_manager.load_config(os.path.join(temp_dir, 'missing.yaml'))
        self.assertEqual(len(issues), 1)
        self.assertTrue(issues[0].startswith('config: file not found'))
        self.assertIsNotNone(config.get('pump'))

    def test_defaults_without_file(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            cwd = os.getcwd()
            os.chdir(temp_dir)
            try:
                config, issues = configuration_manager.load_config()
            finally:
                os.chdir(cwd)
        self.assertEqual(issues, [])
        self.assertIsNone(config['preset'])
        self.assertEqual(config['grid']['detection_points'], 65)
        self.assertEqual(config['verify']['max_oracle_pairs'], 65536)

    def test_valid_file(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = self.write_config(temp_dir, {
                'pump': {'waist_mm': 0.7, 'modes': [{'m': 0, 'n': 1, 're': 2.0, 'im': 0.0}]},
                'delay_scan': {'steps': 21},
            })
            config, issues = configuration_manager.load_config(path)
        self.assertEqual(issues, [])
        self.assertEqual(config['pump']['waist_mm'], 0.7)
        self.assertEqual(config['delay_scan']['steps'], 21)
        self.assertEqual(config['delay_scan']['min_um'], -1500.0)

    def test_invalid_yaml(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = self.write_config(temp_dir, "invalid: yaml: content: [\n")
            config, issues = configuration_manager.load_config(path)
        self.assertEqual(len(issues), 1)
        self.assertTrue(issues[0].startswith('config: cannot read'))
        self.assertIsNotNone(config.get('pump'))

    def test_top_level_must_be_mapping(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = self.write_config(temp_dir, "- 1\n- 2\n")
            _, issues = configuration_manager.load_config(path)
        self.assertEqual(issues, ['config: top level must be a mapping, got list'])

    def test_empty_file_uses_defaults(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = self.write_config(temp_dir, "")
            config, issues = configuration_manager.load_config(path)
        self.assertEqual(issues, [])
        self.assertEqual(config['polarization']['kind'], 'symmetric_HH')

    def test_unknown_key_in_file(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = self.write_config(temp_dir, {'detectors': {'aperture': 1.0}})
            _, issues = configuration_manager.load_config(path)
        self.assertEqual(issues, ['detectors.aperture: unknown key'])

    def test_builder_errors_carry_section(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = self.write_config(temp_dir, {'beamsplitter': {'t': 0.6, 'r': 0.6}})
            _, issues = configuration_manager.load_config(path)
        self.assertEqual(len(issues), 1)
        self.assertTrue(issues[0].startswith('beamsplitter: '))


class TestPresetMerging(unittest.TestCase):
    """Test preset precedence."""

    def test_preset_from_cli(self):
        config, issues = configuration_manager.load_config(
            os.devnull, make_args(preset='fig5_odd'))
        self.assertEqual(issues, [])
        self.assertEqual(config['preset'], 'fig5_odd')
        self.assertEqual(config['pump']['modes'], [{'m': 0, 'n': 1, 're': 1.0, 'im': 0.0}])
        self.assertEqual(config['polarization']['kind'], 'antisymmetric_singlet')

    def test_file_overrides_preset(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = os.path.join(temp_dir, 'config.yaml')
            with open(path, 'w', encoding='utf-8') as f:
                yaml.dump({'preset': 'fig6_superposition', 'pump': {'angle_deg': 10.0}}, f)
            config, issues = configuration_manager.load_config(path)
        self.assertEqual(issues, [])
        self.assertEqual(config['preset'], 'fig6_superposition')
        self.assertEqual(config['pump']['angle_deg'], 10.0)
        self.assertEqual(config['pump']['modes'], [{'m': 1, 'n': 0, 're': 1.0, 'im': 0.0}])

    def test_cli_preset_beats_file_preset(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = os.path.join(temp_dir, 'config.yaml')
            with open(path, 'w', encoding='utf-8') as f:
                yaml.dump({'preset': 'fig4_odd'}, f)
            config, issues = configuration_manager.load_config(path, make_args(preset='fig4_even'))
        self.assertEqual(issues, [])
        self.assertEqual(config['preset'], 'fig4_even')

    def test_unknown_preset(self):
        _, issues = configuration_manager.load_config(os.devnull, make_args(preset='fig9'))
        self.assertEqual(len(issues), 1)
        self.assertTrue(issues[0].startswith('preset: Unsupported preset: fig9'))


class TestPostProcessing(unittest.TestCase):
    """Test command-line and environment overrides."""

    def setUp(self):
        self.config = configuration_manager.prepare_default_config()

    def test_cli_overrides(self):
        config, issues = configuration_manager.post_process_configuration(
            self.config, make_args(out='/tmp/elsewhere', seed=9, log_file='/tmp/cli.log'))
        self.assertEqual(issues, [])
        self.assertEqual(config['output']['directory'], '/tmp/elsewhere')
        self.assertEqual(config['noise']['seed'], 9)
        self.assertEqual(config['logging']['log_file'], '/tmp/cli.log')

    @patch.dict(os.environ, {configuration_manager.LOG_FILE_ENV: '/tmp/env.log'})
    def test_log_file_priority(self):
        self.config['logging']['log_file'] = '/tmp/config.log'
        config, _ = configuration_manager.post_process_configuration(self.config, make_args())
        self.assertEqual(config['logging']['log_file'], '/tmp/env.log')

        config, _ = configuration_manager.post_process_configuration(config, make_args(log_file='/tmp/cli.log'))
        self.assertEqual(config['logging']['log_file'], '/tmp/cli.log')

    @patch.dict(os.environ, {}, clear=True)
    def test_log_file_from_config(self):
        self.config['logging']['log_file'] = '/tmp/config.log'
        config, _ = configuration_manager.post_process_configuration(self.config, None)
        self.assertEqual(config['logging']['log_file'], '/tmp/config.log')

    def test_seed_zero_is_applied(self):
        self.config['noise']['seed'] = 5
        config, _ = configuration_manager.post_process_configuration(self.config, make_args(seed=0))
        self.assertEqual(config['noise']['seed'], 0)


class TestBuilders(unittest.TestCase):
    """Test construction of simulation objects from a config."""

    def setUp(self):
        self.config = configuration_manager.prepare_default_config()

    def test_pump_coefficients_normalized(self):
        self.config['pump']['modes'] = [{'m': 1, 'n': 0, 're': 1.0, 'im': 0.0},
                                        {'m': 0, 'n': 1, 're': 0.0, 'im': 1.0}]
        self.config['pump']['angle_deg'] = 90.0
        pump = configuration_manager.build_pump(self.config)
        self.assertAlmostEqual(pump.terms[0].coeff, 1 / math.sqrt(2))
        self.assertAlmostEqual(pump.terms[1].coeff, 1j / math.sqrt(2))
        self.assertAlmostEqual(pump.angle, math.pi / 2)
        self.assertAlmostEqual(pump.beam.w, 0.5e-3)

    def test_custom_polarization(self):
        self.config['polarization'] = {'kind': 'custom', 'matrix': [[[0, 0], [3, 0]], [[0, 0], [0, 4]]]}
        pol = configuration_manager.build_polarization(self.config)
        self.assertAlmostEqual(pol.c[0, 1], 0.6)
        self.assertAlmostEqual(pol.c[1, 1], 0.8j)

    def test_detector(self):
        detector = configuration_manager.build_detector(self.config)
        self.assertTrue(detector.is_full_aperture)
        self.assertAlmostEqual(detector.filter_center, 702.2e-9)
        self.config['detectors']['aperture_mm'] = 0.25
        self.assertAlmostEqual(configuration_manager.build_detector(self.config).aperture_radius, 0.25e-3)

    def test_detection_grid(self):
        grid = configuration_manager.build_detection_grid(self.config)
        self.assertEqual(grid.shape, (65, 65))
        self.assertAlmostEqual(grid.extent_x, 2.5e-3)
        self.assertEqual(configuration_manager.build_detection_grid(self.config, points=16).shape, (16, 16))

    def test_scenario(self):
        self.config['preset'] = 'fig4_even'
        scenario = configuration_manager.build_scenario(self.config)
        self.assertEqual(scenario.name, 'fig4_even')
        self.assertAlmostEqual(scenario.plane_z, 0.5)
        self.assertAlmostEqual(scenario.K_sum, hom.phase_constant(702.2e-9))
        self.assertEqual(scenario.path, 'detection_plane')
        self.config['preset'] = None
        self.assertEqual(configuration_manager.build_scenario(self.config).name,
                         configuration_manager.DEFAULT_SCENARIO_NAME)

    def test_scan_config(self):
        self.config['noise']['enabled'] = True
        self.config['noise']['seed'] = 4
        cfg = configuration_manager.build_scan_config(self.config)
        self.assertEqual(cfg.delays.size, 41)
        self.assertEqual(cfg.delays[20], 0.0)
        self.assertAlmostEqual(cfg.delays[-1], 1500e-6)
        self.assertEqual(cfg.noise.seed, 4)
        self.assertEqual(cfg.workers, 1)


if __name__ == '__main__':
    unittest.main()
