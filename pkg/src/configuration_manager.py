#!/usr/bin/env python3
"""
Configuration manager
"""

import copy
import logging
import math
import os
from pathlib import Path

import numpy as np
import yaml

import experiment
import fields
import hom
import modes
import presets
import spdc
from simulation_errors import InvalidArgumentError

# Constants
SUPPORTED_POLARIZATIONS = spdc.POLARIZATION_KINDS
SUPPORTED_FILTER_SHAPES = hom.FILTER_SHAPES
SUPPORTED_PATHS = experiment.SCAN_PATHS
MODE_KEYS = ('m', 'n', 're', 'im')
LOG_FILE_ENV = 'MULTIMODE_HOM_LOG_FILE'
DEFAULT_SCENARIO_NAME = 'custom'

MM = 1e-3
UM = 1e-6
NM = 1e-9

logger = logging.getLogger(__name__)


def prepare_default_config():
    return {
        'preset': None,
        'pump': {
            'waist_mm': 0.5,
            'wavelength_nm': 351.1,
            'z_mm': 0.0,
            'angle_deg': 0.0,
            'modes': [{'m': 1, 'n': 0, 're': 1.0, 'im': 0.0}],
            'mode_impurity': 0.0
        },
        'crystal': {
            'L_mm': 2.0,
            'pump_wavelength_nm': 351.1,
            'thin_crystal': True
        },
        'polarization': {
            'kind': 'symmetric_HH',
            'matrix': None  # [[re, im] x 2] x 2 when kind is custom
        },
        'beamsplitter': {
            't': math.sqrt(0.5),
            'r': math.sqrt(0.5)
        },
        'detectors': {
            'aperture_mm': None,  # None means the whole detection grid
            'filter_fwhm_nm': 1.0,
            'filter_center_nm': 702.2,
            'filter_shape': 'gaussian',
            'plane_z_mm': 500.0
        },
        'grid': {
            'detection_points': 65,
            'extent_waists': 5.0,
            'center_y_mm': 0.0
        },
        'hom': {
            'path': 'detection_plane',
            'spectral_points': 11
        },
        'delay_scan': {
            'min_um': -1500.0,
            'max_um': 1500.0,
            'steps': 41
        },
        'noise': {
            'enabled': False,
            'mean_counts': 1000.0,
            'seed': 0
        },
        'scan': {
            'workers': 1
        },
        'verify': {
            'oracle_points': 16,
            'max_oracle_pairs': hom.MAX_ORACLE_PAIRS,
            'tolerance': 1e-6
        },
        'output': {
            'directory': 'results'
        },
        'logging': {
            'log_file': None  # None means default to temp directory
        }
    }


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def validate_positive(value):
    return _is_number(value) and value > 0


def validate_finite(value):
    return _is_number(value)


def validate_unit_interval(value):
    return _is_number(value) and 0.0 <= value <= 1.0


def validate_impurity(value):
    return _is_number(value) and 0.0 <= value < 1.0


def validate_int_at_least(value, minimum):
    return _is_int(value) and value >= minimum


def merge_config(base, override, path=''):
    """Deep-merge `override` into a copy of `base`.

    Returns (merged, issues). Keys absent from `base` are reported as unknown;
    a None section restores its defaults.
    """
    merged = copy.deepcopy(base)
    issues = []
    for key, value in override.items():
        key_path = f"{path}{key}"
        if key not in base:
            issues.append(f"{key_path}: unknown key")
            continue
        if isinstance(base[key], dict):
            if value is None:
                continue
            if not isinstance(value, dict):
                issues.append(f"{key_path}: must be a mapping, got {type(value).__name__}")
                continue
            merged[key], sub_issues = merge_config(base[key], value, f"{key_path}.")
            issues.extend(sub_issues)
        else:
            merged[key] = copy.deepcopy(value)
    return merged, issues


def _validate_modes(value, issues):
    if not isinstance(value, list) or not value:
        issues.append("pump.modes: must be a non-empty list of {m, n, re, im} entries")
        return
    for idx, term in enumerate(value):
        term_path = f"pump.modes[{idx}]"
        if not isinstance(term, dict):
            issues.append(f"{term_path}: must be a mapping with keys m, n, re, im")
            continue
        for key in term:
            if key not in MODE_KEYS:
                issues.append(f"{term_path}.{key}: unknown key")
        for key in ('m', 'n'):
            if not validate_int_at_least(term.get(key), 0):
                issues.append(f"{term_path}.{key}: must be a non-negative integer, got {term.get(key)!r}")
        for key in ('re', 'im'):
            if not validate_finite(term.get(key, 0.0)):
                issues.append(f"{term_path}.{key}: must be a finite number, got {term.get(key)!r}")
    if not issues and all(t.get('re', 0.0) == 0.0 and t.get('im', 0.0) == 0.0 for t in value):
        issues.append("pump.modes: mode coefficients are all zero")


def _validate_matrix(value, issues):
    if value is None:
        issues.append("polarization.matrix: required when polarization.kind is custom")
        return
    try:
        pairs = np.array(value, dtype=float)
    except (TypeError, ValueError):
        pairs = None
    if pairs is None or pairs.shape != (2, 2, 2):
        issues.append("polarization.matrix: must be [[re, im] x 2] x 2")
    elif not np.all(np.isfinite(pairs)):
        issues.append("polarization.matrix: entries must be finite")
    elif not np.any(pairs):
        issues.append("polarization.matrix: must be nonzero")


def _lookup(config, dotted):
    node = config
    for part in dotted.split('.'):
        node = node[part]
    return node


# (dotted path, validator, requirement)
FIELD_RULES = [
    ('pump.waist_mm', validate_positive, 'a finite number > 0'),
    ('pump.wavelength_nm', validate_positive, 'a finite number > 0'),
    ('pump.z_mm', validate_finite, 'a finite number'),
    ('pump.angle_deg', validate_finite, 'a finite number'),
    ('pump.mode_impurity', validate_impurity, 'a number in [0, 1)'),
    ('crystal.L_mm', validate_positive, 'a finite number > 0'),
    ('crystal.pump_wavelength_nm', validate_positive, 'a finite number > 0'),
    ('crystal.thin_crystal', lambda v: isinstance(v, bool), 'true or false'),
    ('beamsplitter.t', validate_unit_interval, 'a number in [0, 1]'),
    ('beamsplitter.r', validate_unit_interval, 'a number in [0, 1]'),
    ('detectors.aperture_mm', lambda v: v is None or validate_positive(v), 'null or a number > 0'),
    ('detectors.filter_fwhm_nm', validate_positive, 'a finite number > 0'),
    ('detectors.filter_center_nm', validate_positive, 'a finite number > 0'),
    ('detectors.plane_z_mm', validate_positive, 'a finite number > 0'),
    ('grid.detection_points', lambda v: validate_int_at_least(v, 2), 'an integer >= 2'),
    ('grid.extent_waists', validate_positive, 'a finite number > 0'),
    ('hom.spectral_points', lambda v: validate_int_at_least(v, 3) and v % 2 == 1, 'an odd integer >= 3'),
    ('delay_scan.min_um', validate_finite, 'a finite number'),
    ('delay_scan.max_um', validate_finite, 'a finite number'),
    ('delay_scan.steps', lambda v: validate_int_at_least(v, 2), 'an integer >= 2'),
    ('noise.enabled', lambda v: isinstance(v, bool), 'true or false'),
    ('noise.mean_counts', validate_positive, 'a finite number > 0'),
    ('noise.seed', lambda v: validate_int_at_least(v, 0), 'a non-negative integer'),
    ('scan.workers', lambda v: validate_int_at_least(v, 1), 'an integer >= 1'),
    ('verify.oracle_points', lambda v: validate_int_at_least(v, 2), 'an integer >= 2'),
    ('verify.max_oracle_pairs', lambda v: validate_int_at_least(v, 1), 'an integer >= 1'),
    ('verify.tolerance', validate_positive, 'a finite number > 0'),
    ('output.directory', lambda v: isinstance(v, str) and v != '', 'a non-empty path'),
    ('logging.log_file', lambda v: v is None or isinstance(v, str), 'null or a path'),
]


def validate_config(config):
    """Field-level checks; each issue starts with the dotted path of the field."""
    validation_issues = []
    for dotted, validator, requirement in FIELD_RULES:
        value = _lookup(config, dotted)
        if not validator(value):
            validation_issues.append(f"{dotted}: must be {requirement}, got {value!r}")

    _validate_modes(config['pump']['modes'], validation_issues)

    kind = config['polarization']['kind']
    if kind not in SUPPORTED_POLARIZATIONS:
        validation_issues.append(
            f"polarization.kind: Unsupported polarization kind: {kind}. "
            f"Supported: {', '.join(SUPPORTED_POLARIZATIONS)}")
    elif kind == 'custom':
        _validate_matrix(config['polarization']['matrix'], validation_issues)

    shape = config['detectors']['filter_shape']
    if shape not in SUPPORTED_FILTER_SHAPES:
        validation_issues.append(
            f"detectors.filter_shape: Unsupported filter shape: {shape}. "
            f"Supported: {', '.join(SUPPORTED_FILTER_SHAPES)}")

    path = config['hom']['path']
    if path not in SUPPORTED_PATHS:
        validation_issues.append(
            f"hom.path: Unsupported path: {path}. Supported: {', '.join(SUPPORTED_PATHS)}")

    if config['grid']['center_y_mm'] != 0:
        validation_issues.append(
            f"grid.center_y_mm: must be 0 (the detection grid must be symmetric in y), "
            f"got {config['grid']['center_y_mm']!r}")

    scan = config['delay_scan']
    if validate_finite(scan['min_um']) and validate_finite(scan['max_um']) and scan['max_um'] <= scan['min_um']:
        validation_issues.append(
            f"delay_scan.max_um: must exceed delay_scan.min_um ({scan['min_um']}), got {scan['max_um']!r}")

    return validation_issues


def post_process_configuration(config, args):
    # Priority: CLI arg > env var > config file > default
    log_file_path = getattr(args, 'log_file', None) if args else None
    if not log_file_path:
        log_file_path = os.environ.get(LOG_FILE_ENV)
    if not log_file_path:
        log_file_path = config['logging'].get('log_file')
    config['logging']['log_file'] = log_file_path

    if args and getattr(args, 'out', None):
        config['output']['directory'] = args.out
    if args and getattr(args, 'seed', None) is not None:
        config['noise']['seed'] = args.seed

    validation_issues = validate_config(config)
    if not validation_issues:
        # physics-level checks of the assembled objects
        for section, builder in (('pump', build_pump), ('polarization', build_polarization),
                                 ('beamsplitter', build_beamsplitter), ('detectors', build_detector),
                                 ('crystal', build_crystal), ('grid', build_detection_grid)):
            try:
                builder(config)
            except InvalidArgumentError as e:
                validation_issues.append(f"{section}: {e}")

    return config, validation_issues


def _read_user_config(config_path):
    """Returns (user_config, issues)."""
    explicit = config_path is not None
    config_path = Path(config_path) if explicit else Path('config.yaml')

    if not config_path.exists():
        if explicit:
            return {}, [f"config: file not found: {config_path}"]
        logger.debug(f"Config file not found: {config_path}, using defaults")
        return {}, []

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            user_config = yaml.safe_load(f)
    except (OSError, IOError, yaml.YAMLError) as e:
        logger.error(f"Error loading config file {config_path}: {e}")
        return {}, [f"config: cannot read {config_path}: {e}"]

    if user_config is None:
        user_config = {}
    if not isinstance(user_config, dict):
        return {}, [f"config: top level must be a mapping, got {type(user_config).__name__}"]
    logger.info(f"Loaded configuration from {config_path}")
    return user_config, []


def load_config(config_path=None, args=None):
    """Load configuration from YAML file.

    Merge order: defaults < preset < config file < command-line flags.
    Returns (config, validation_issues).
    """
    default_config = prepare_default_config()
    user_config, issues = _read_user_config(config_path)
    if issues:
        return default_config, issues

    preset_name = getattr(args, 'preset', None) if args else None
    if not preset_name:
        preset_name = user_config.get('preset')

    config = default_config
    if preset_name is not None:
        if not isinstance(preset_name, str) or not presets.validate_preset(preset_name):
            return default_config, [
                f"preset: Unsupported preset: {preset_name}. "
                f"Supported: {', '.join(presets.SUPPORTED_PRESETS)}"]
        config, issues = merge_config(config, presets.get_preset(preset_name))
        logger.info(f"Applied preset '{preset_name}'")

    config, merge_issues = merge_config(config, user_config)
    issues.extend(merge_issues)
    config['preset'] = preset_name
    if issues:
        return config, issues

    return post_process_configuration(config, args)


def build_pump(config):
    """PumpSpec from the pump block; mode coefficients are normalized."""
    pump = config['pump']
    beam = modes.BeamSpec.from_wavelength(pump['waist_mm'] * MM, pump['wavelength_nm'] * NM,
                                          pump['z_mm'] * MM)
    terms = [(t['m'], t['n'], complex(t.get('re', 0.0), t.get('im', 0.0))) for t in pump['modes']]
    return modes.PumpSpec.normalized(beam, terms, math.radians(pump['angle_deg']))


def build_polarization(config):
    block = config['polarization']
    matrix = None
    if block['kind'] == 'custom':
        pairs = np.array(block['matrix'], dtype=float)
        matrix = pairs[..., 0] + 1j * pairs[..., 1]
    return spdc.make_polarization(block['kind'], matrix)


def build_beamsplitter(config):
    return hom.BeamSplitterSpec(config['beamsplitter']['t'], config['beamsplitter']['r'])


def build_detector(config):
    block = config['detectors']
    aperture = math.inf if block['aperture_mm'] is None else block['aperture_mm'] * MM
    return hom.DetectorSpec(aperture_radius=aperture,
                            filter_fwhm=block['filter_fwhm_nm'] * NM,
                            filter_center=block['filter_center_nm'] * NM,
                            filter_shape=block['filter_shape'])


def build_crystal(config):
    block = config['crystal']
    return spdc.CrystalSpec.from_pump_wavelength(block['L_mm'] * MM, block['pump_wavelength_nm'] * NM,
                                                 block['thin_crystal'])


def build_detection_grid(config, points=None):
    block = config['grid']
    extent = block['extent_waists'] * config['pump']['waist_mm'] * MM
    n = block['detection_points'] if points is None else points
    return fields.make_grid(n, n, extent, extent, center_y=block['center_y_mm'] * MM)


def build_scenario(config):
    detector = build_detector(config)
    crystal = build_crystal(config)
    K_sum = hom.phase_constant(detector.filter_center)
    if not spdc.is_degenerate(crystal, K_sum):
        logger.info(f"Non-degenerate detection: k1 + k2 = {K_sum:.9g} 1/m, K_pump = {crystal.K_pump:.9g} 1/m")
    return experiment.Scenario(
        name=config['preset'] or DEFAULT_SCENARIO_NAME,
        pump=build_pump(config),
        polarization=build_polarization(config),
        polarization_kind=config['polarization']['kind'],
        bs=build_beamsplitter(config),
        det1=detector,
        det2=detector,
        detection_grid=build_detection_grid(config),
        plane_z=config['detectors']['plane_z_mm'] * MM,
        K_sum=K_sum,
        crystal=crystal,
        path=config['hom']['path'],
        spectral_points=config['hom']['spectral_points'],
        mode_impurity=config['pump']['mode_impurity'],
    )


def build_scan_config(config):
    scan = config['delay_scan']
    noise = None
    if config['noise']['enabled']:
        noise = experiment.NoiseSpec(config['noise']['mean_counts'], config['noise']['seed'])
    return experiment.ScanConfig(
        scenario=build_scenario(config),
        delays=experiment.delay_grid(scan['min_um'] * UM, scan['max_um'] * UM, scan['steps']),
        noise=noise,
        workers=config['scan']['workers'],
    )
