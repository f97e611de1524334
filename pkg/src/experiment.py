#!/usr/bin/env python3
"""
Delay scans of the HOM interferometer.

A scan evaluates the normalized coincidence rate over a list of path-length
differences, optionally adds photon-counting noise and writes the curve as
CSV plus a JSON sidecar echoing the scenario.
"""

import concurrent.futures
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

import numpy as np

import fields
import hom
import modes
import spdc
import spectral_path
from simulation_errors import InsufficientBaselineError, InvalidArgumentError, ZeroBaselineError

logger = logging.getLogger(__name__)

SCAN_PATHS = ['detection_plane', 'spectral']
BASELINE_COHERENCE_LENGTHS = 5.0
# Envelope weight below which far samples count as pure baseline
BASELINE_OVERLAP_TOLERANCE = 1e-10
SPECTRAL_PUMP_POINTS = 33
RANDOM_GENERATOR = 'numpy.random.PCG64'


@dataclass(frozen=True)
class NoiseSpec:
    mean_counts: float
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.mean_counts, (int, float)) or not self.mean_counts > 0:
            raise InvalidArgumentError(f"mean_counts must be > 0, got {self.mean_counts!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InvalidArgumentError(f"seed must be a non-negative integer, got {self.seed!r}")


@dataclass(frozen=True)
class Scenario:
    """Everything that fixes a coincidence curve except the delays."""
    name: str
    pump: modes.PumpSpec
    polarization: spdc.PolarizationMatrix
    bs: hom.BeamSplitterSpec
    det1: hom.DetectorSpec
    det2: hom.DetectorSpec
    detection_grid: fields.Grid2D
    polarization_kind: str = 'custom'
    plane_z: float = hom.DEFAULT_PLANE_Z
    K_sum: Optional[float] = None
    crystal: Optional[spdc.CrystalSpec] = None
    path: str = 'detection_plane'
    spectral_points: int = spectral_path.DEFAULT_SPECTRAL_POINTS
    mode_impurity: float = 0.0

    def __post_init__(self):
        if self.path not in SCAN_PATHS:
            raise InvalidArgumentError(f"Unsupported path: {self.path}. Supported: {', '.join(SCAN_PATHS)}")
        if self.path == 'spectral' and self.crystal is None:
            raise InvalidArgumentError("the spectral path needs a crystal")
        if not 0.0 <= self.mode_impurity < 1.0:
            raise InvalidArgumentError(f"mode_impurity must be in [0, 1), got {self.mode_impurity!r}")

    @property
    def envelope_filter(self):
        return hom.effective_filter(self.det1, self.det2)

    @property
    def coherence_length(self):
        return self.envelope_filter.coherence_length

    def describe(self):
        """JSON-ready echo of the scenario."""
        beam = self.pump.beam
        detector = lambda d: {
            'aperture_radius_m': None if d.is_full_aperture else d.aperture_radius,
            'center_m': list(d.center),
            'filter_fwhm_m': d.filter_fwhm,
            'filter_center_m': d.filter_center,
            'filter_shape': d.filter_shape,
        }
        echo = {
            'name': self.name,
            'pump': {
                'waist_m': beam.w,
                'rayleigh_range_m': beam.z_R,
                'k_per_m': beam.k,
                'z_m': beam.z,
                'angle_rad': self.pump.angle,
                'modes': [{'m': t.m, 'n': t.n, 're': t.coeff.real, 'im': t.coeff.imag}
                          for t in self.pump.terms],
                'mode_impurity': self.mode_impurity,
            },
            'polarization': {
                'kind': self.polarization_kind,
                'matrix': [[[v.real, v.imag] for v in row] for row in self.polarization.c],
            },
            'beamsplitter': {'t': self.bs.t, 'r': self.bs.r},
            'detectors': [detector(self.det1), detector(self.det2)],
            'detection_grid': self.detection_grid.metadata(),
            'plane_z_m': self.plane_z,
            'K_sum_per_m': self.K_sum,
            'path': self.path,
        }
        if self.crystal is not None:
            echo['crystal'] = {'L_m': self.crystal.L, 'K_pump_per_m': self.crystal.K_pump,
                               'thin_crystal': self.crystal.thin_crystal}
        if self.path == 'spectral':
            echo['spectral_points'] = self.spectral_points
        return echo


@dataclass(frozen=True, eq=False)
class ScanConfig:
    scenario: Scenario
    delays: np.ndarray
    noise: Optional[NoiseSpec] = None
    workers: int = 1

    def __post_init__(self):
        delays = np.array(self.delays, dtype=float)
        if delays.ndim != 1 or delays.size == 0:
            raise InvalidArgumentError("delays must be a non-empty 1D sequence")
        if not np.all(np.isfinite(delays)):
            raise InvalidArgumentError("delays must be finite")
        if np.any(np.diff(delays) <= 0):
            raise InvalidArgumentError("delays must be strictly increasing")
        if isinstance(self.workers, bool) or not isinstance(self.workers, int) or self.workers < 1:
            raise InvalidArgumentError(f"workers must be a positive integer, got {self.workers!r}")
        delays.flags.writeable = False
        object.__setattr__(self, 'delays', delays)


@dataclass(frozen=True, eq=False)
class CoincidenceCurve:
    delays: np.ndarray
    rates: np.ndarray
    coherence_length: float
    counts: Optional[np.ndarray] = None
    mean_counts: Optional[float] = None
    envelope_filter: Optional[hom.DetectorSpec] = None
    meta: dict = field(default_factory=dict)

    @property
    def name(self):
        return self.meta.get('scenario', {}).get('name', 'scan')


def delay_grid(min_delay, max_delay, steps):
    """Evenly spaced delays; odd step counts over a symmetric range include 0 exactly."""
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise InvalidArgumentError(f"delay steps must be an integer >= 2, got {steps!r}")
    if not max_delay > min_delay:
        raise InvalidArgumentError(f"delay max ({max_delay}) must exceed min ({min_delay})")
    center = (min_delay + max_delay) / 2.0
    half = (max_delay - min_delay) / 2.0
    return center + half * (np.arange(steps) - (steps - 1) / 2.0) / ((steps - 1) / 2.0)


def build_model(scenario, pump_spec):
    """Delay-independent rate model for one pump."""
    if scenario.path == 'spectral':
        grid = scenario.detection_grid
        pump = modes.pump_field(pump_spec, fields.make_grid(
            SPECTRAL_PUMP_POINTS, SPECTRAL_PUMP_POINTS, grid.extent_x, grid.extent_y))
        detection = fields.make_grid(scenario.spectral_points, scenario.spectral_points,
                                     grid.extent_x, grid.extent_y)
        return spectral_path.SpectralModel(
            pump, scenario.crystal, scenario.polarization, scenario.bs, scenario.det1, scenario.det2,
            detection, scenario.plane_z, scenario.K_sum, scenario.spectral_points)

    pump = modes.pump_field(pump_spec, fields.midpoint_grid(scenario.detection_grid))
    return hom.CoincidenceModel(pump, scenario.polarization, scenario.bs,
                                scenario.det1, scenario.det2, scenario.detection_grid)


def run_scan(cfg):
    """Coincidence curve of cfg.scenario at every configured delay."""
    scenario = cfg.scenario
    logger.info(f"Scanning '{scenario.name}': {cfg.delays.size} delays, path={scenario.path}, "
                f"workers={cfg.workers}")
    model = build_model(scenario, scenario.pump)
    partner = None
    if scenario.mode_impurity > 0.0:
        partner = build_model(scenario, scenario.pump.parity_partner())

    def rate_at(delay):
        rate = model.rate(delay)
        if partner is not None:
            rate = (1.0 - scenario.mode_impurity) * rate + scenario.mode_impurity * partner.rate(delay)
        return rate

    if cfg.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            rates = list(executor.map(rate_at, cfg.delays))
    else:
        rates = [rate_at(d) for d in cfg.delays]
    # rounding can leave an ideal minimum a hair below zero
    rates = np.clip(np.array(rates, dtype=float), 0.0, None)

    curve = CoincidenceCurve(
        delays=cfg.delays.copy(),
        rates=rates,
        coherence_length=scenario.coherence_length,
        envelope_filter=scenario.envelope_filter,
        meta={'scenario': scenario.describe(), 'coherence_length_m': scenario.coherence_length},
    )
    if cfg.noise is not None:
        curve = add_poisson_noise(curve, cfg.noise.mean_counts, cfg.noise.seed)
    logger.info(f"Scan '{scenario.name}' done: C(min)={rates.min():.6f}, C(max)={rates.max():.6f}")
    return curve


def add_poisson_noise(curve, mean_counts, seed):
    """Poisson counts with mean rates * mean_counts from a seeded PCG64 generator."""
    noise = NoiseSpec(mean_counts, seed)
    rng = np.random.Generator(np.random.PCG64(noise.seed))
    counts = rng.poisson(curve.rates * noise.mean_counts)
    meta = dict(curve.meta)
    meta['noise'] = {'mean_counts': noise.mean_counts, 'seed': noise.seed, 'generator': RANDOM_GENERATOR}
    return dataclasses.replace(curve, counts=counts, mean_counts=float(noise.mean_counts), meta=meta)


def _curve_values(curve):
    if curve.counts is not None:
        return np.asarray(curve.counts, dtype=float) / curve.mean_counts
    return np.asarray(curve.rates, dtype=float)


def baseline(curve, baseline_lengths=BASELINE_COHERENCE_LENGTHS):
    """C_baseline from the samples with |delay| >= baseline_lengths * l_c.

    Where the curve's envelope has decayed there (gaussian filters), this is
    the plain mean. A ringing envelope (rect_lambda) still modulates those
    samples, so the baseline is the intercept a of a least-squares fit
    C = a + b * g(delay) over them instead.
    """
    values = _curve_values(curve)
    delays = np.asarray(curve.delays, dtype=float)
    far = np.abs(delays) >= baseline_lengths * curve.coherence_length
    if not np.any(far):
        raise InsufficientBaselineError(
            f"no samples with |delay| >= {baseline_lengths} l_c = "
            f"{baseline_lengths * curve.coherence_length:.6g} m")

    if curve.envelope_filter is None:
        return float(np.mean(values[far]))
    g = np.atleast_1d(hom.temporal_overlap(delays[far], curve.envelope_filter))
    if np.max(np.abs(g)) <= BASELINE_OVERLAP_TOLERANCE:
        return float(np.mean(values[far]))

    design = np.column_stack([np.ones_like(g), g])
    (intercept, slope), _, rank, _ = np.linalg.lstsq(design, values[far], rcond=None)
    if rank < 2:
        raise InsufficientBaselineError(
            f"envelope still rings beyond {baseline_lengths} l_c and the far samples "
            f"do not separate baseline from modulation")
    logger.debug(f"Baseline fit over {int(np.sum(far))} far samples: a={intercept:.12g}, b={slope:.6g}")
    return float(intercept)


def visibility(curve, baseline_lengths=BASELINE_COHERENCE_LENGTHS):
    """V = |C_baseline - C(0)| / C_baseline; noisy curves use counts / mean_counts."""
    delays = np.asarray(curve.delays, dtype=float)
    scale = np.max(np.abs(delays))
    zero = np.flatnonzero(np.abs(delays) <= 1e-12 * scale)
    if zero.size == 0:
        raise InsufficientBaselineError("curve has no sample at zero delay")

    c_base = baseline(curve, baseline_lengths)
    if c_base == 0.0:
        raise ZeroBaselineError("curve baseline is zero")
    return abs(c_base - float(_curve_values(curve)[zero[0]])) / c_base


def write_curve(curve, out_dir, timestamp=None):
    """Write <name>_<timestamp>.csv and .json into out_dir; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if timestamp is None:
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
    stem = f"{curve.name}_{timestamp}"
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"

    columns = [np.asarray(curve.delays) * 1e6, curve.rates]
    header = 'delay_um,rate'
    fmt = ['%.6f', '%.12e']
    if curve.counts is not None:
        columns.append(curve.counts)
        header += ',count'
        fmt.append('%d')

    try:
        vis = visibility(curve)
    except (InsufficientBaselineError, ZeroBaselineError) as e:
        logger.warning(f"Visibility not available for '{curve.name}': {e}")
        vis = None
    sidecar = dict(curve.meta)
    sidecar['visibility'] = vis
    sidecar['csv'] = csv_path.name

    _atomic_write(csv_path, lambda p: np.savetxt(p, np.column_stack(columns), delimiter=',',
                                                 fmt=fmt, header=header, comments=''))
    _atomic_write(json_path, lambda p: p.write_text(json.dumps(sidecar, indent=2), encoding='utf-8'))
    logger.info(f"Curve written to {csv_path} (visibility={vis})")
    return csv_path, json_path


def _atomic_write(path, writer):
    temp_path = path.with_suffix(path.suffix + '.temp')
    try:
        writer(temp_path)
        temp_path.replace(path)
    except OSError as e:
        logger.error(f"Failed to write {path}: {e}")
        if temp_path.exists():
            try:
                temp_path.unlink()
            except OSError as cleanup_error:
                logger.error(f"Failed to cleanup temp file {temp_path}: {cleanup_error}")
        raise
