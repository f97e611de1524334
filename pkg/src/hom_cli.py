#!/usr/bin/env python3
"""
Command-line entry point of the multimode HOM simulator.

Commands:
  scan        coincidence curve over the configured delays, written as CSV + JSON
  overlap     y-parity overlap of the configured pump
  dump-field  pump field (or its angular spectrum) as x,y,re,im rows
  verify      factorized rates against the brute-force oracle and the parity law
"""

import argparse
import logging
import sys
from pathlib import Path

import configuration_manager
import experiment
import fields
import hom
import logging_utils
import modes
import spdc
import spectral_path
from simulation_errors import (
    CoverageError,
    InsufficientBaselineError,
    InvalidArgumentError,
    NonFiniteSampleError,
    ResourceLimitError,
    SpectralWindowError,
    ZeroBaselineError,
    ZeroFieldError,
)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

NUMERIC_ERRORS = (ResourceLimitError, NonFiniteSampleError, CoverageError, SpectralWindowError,
                  ZeroBaselineError, InsufficientBaselineError, ZeroFieldError)

logger = logging.getLogger(__name__)


def _format_overlap_part(value):
    rounded = round(value, 6)
    if rounded == 0.0:
        return '0.000000'
    return f"{rounded:+.6f}"


def format_overlap(overlap):
    """`re,im class`, e.g. `+1.000000,0.000000 even`."""
    return (f"{_format_overlap_part(overlap.real)},{_format_overlap_part(overlap.imag)} "
            f"{modes.classify_parity(overlap)}")


def pump_sampling_grid(config):
    return fields.midpoint_grid(configuration_manager.build_detection_grid(config))


def cmd_scan(config, args):
    scan_config = configuration_manager.build_scan_config(config)
    curve = experiment.run_scan(scan_config)
    csv_path, json_path = experiment.write_curve(curve, config['output']['directory'])
    print(csv_path)
    print(json_path)
    return EXIT_OK


def cmd_overlap(config, args):
    pump = modes.pump_field(configuration_manager.build_pump(config), pump_sampling_grid(config))
    overlap = modes.parity_overlap_y(pump)
    logger.info(f"Parity overlap: {overlap}")
    print(format_overlap(overlap))
    return EXIT_OK


def cmd_dump_field(config, args):
    field_ = modes.pump_field(configuration_manager.build_pump(config), pump_sampling_grid(config))
    kind = 'pump'
    if args.spectrum:
        field_ = fields.angular_spectrum(field_)
        kind = 'spectrum'
    path = args.output
    if path is None:
        name = config['preset'] or configuration_manager.DEFAULT_SCENARIO_NAME
        path = Path(config['output']['directory']) / f"{name}_{kind}.csv"
    print(fields.write_field_csv(field_, path))
    return EXIT_OK


def _parity_scenarios(config):
    """(label, pump, polarization, expected C(0) factor s*P) for the 2x2 scenario matrix."""
    base = configuration_manager.build_pump(config)
    scenarios = []
    for kind, s in (('symmetric_HH', 1.0), ('antisymmetric_singlet', -1.0)):
        pol = spdc.make_polarization(kind)
        for m, n, parity in ((1, 0, 1.0), (0, 1, -1.0)):
            pump = modes.PumpSpec(base.beam, ((m, n, 1.0),))
            scenarios.append((f"{kind}/HG{m}{n}", pump, pol, s * parity))
    return scenarios


def _deviation(value, reference):
    # rates are normalized to the baseline, so deviations below 1 are absolute
    return abs(value - reference) / max(1.0, abs(reference))


def cmd_verify(config, args):
    verify = config['verify']
    bs = configuration_manager.build_beamsplitter(config)
    detector = configuration_manager.build_detector(config)
    plane_z = config['detectors']['plane_z_mm'] * configuration_manager.MM
    K_sum = hom.phase_constant(detector.filter_center)
    law_factor = 2.0 * bs.t ** 2 * bs.r ** 2 / (bs.t ** 4 + bs.r ** 4)

    oracle_grid = configuration_manager.build_detection_grid(config, points=verify['oracle_points'])
    hom.check_pair_count(oracle_grid, verify['max_oracle_pairs'])
    detection_grid = configuration_manager.build_detection_grid(config)
    crystal = configuration_manager.build_crystal(config)
    spectral_points = config['hom']['spectral_points']
    spectral_grid = configuration_manager.build_detection_grid(config, points=spectral_points)

    worst = 0.0
    for label, pump_spec, pol, sign in _parity_scenarios(config):
        oracle_pump = modes.pump_field(pump_spec, fields.midpoint_grid(oracle_grid))
        for delay in (0.0, detector.coherence_length):
            factorized = hom.coincidence_rate(oracle_pump, pol, bs, detector, detector, delay, oracle_grid)
            oracle = hom.coincidence_rate_oracle(oracle_pump, pol, bs, detector, detector, delay,
                                                 oracle_grid, plane_z, K_sum, verify['max_oracle_pairs'])
            deviation = _deviation(factorized, oracle)
            worst = max(worst, deviation)
            print(f"oracle {label} delay={delay:.6e} m: factorized={factorized:.12f} "
                  f"oracle={oracle:.12f} deviation={deviation:.3e}")

        expected = 1.0 - sign * law_factor
        pump = modes.pump_field(pump_spec, fields.midpoint_grid(detection_grid))
        rate = hom.coincidence_rate(pump, pol, bs, detector, detector, 0.0, detection_grid)
        deviation = _deviation(rate, expected)
        worst = max(worst, deviation)
        print(f"parity {label}: C(0)={rate:.12f} expected={expected:.12f} deviation={deviation:.3e}")

        spectral_pump = modes.pump_field(pump_spec, fields.make_grid(
            experiment.SPECTRAL_PUMP_POINTS, experiment.SPECTRAL_PUMP_POINTS,
            spectral_grid.extent_x, spectral_grid.extent_y))
        model = spectral_path.SpectralModel(spectral_pump, crystal, pol, bs, detector, detector,
                                            spectral_grid, plane_z, K_sum, spectral_points)
        rate = model.rate(0.0)
        deviation = _deviation(rate, expected)
        worst = max(worst, deviation)
        print(f"spectral {label}: C(0)={rate:.12f} expected={expected:.12f} deviation={deviation:.3e}")

    print(f"max relative deviation: {worst:.3e}")
    if worst < verify['tolerance']:
        logger.info(f"Verification passed (max deviation {worst:.3e})")
        return EXIT_OK
    logger.error(f"Verification failed: max deviation {worst:.3e} >= {verify['tolerance']:.3e}")
    return EXIT_VERIFY


COMMANDS = {
    'scan': cmd_scan,
    'overlap': cmd_overlap,
    'dump-field': cmd_dump_field,
    'verify': cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        description='Simulate multimode Hong-Ou-Mandel interference of SPDC photon pairs',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python multimode_hom_cli_runner.py --preset fig4_even scan
  python multimode_hom_cli_runner.py --config config.yaml --out results scan
  python multimode_hom_cli_runner.py --preset fig6_superposition overlap
  python multimode_hom_cli_runner.py dump-field --spectrum
  python multimode_hom_cli_runner.py verify
        """
    )
    parser.add_argument('--config',
                        help='Path to configuration file (default: config.yaml if present)')
    parser.add_argument('--out',
                        help='Output directory (overrides output.directory)')
    parser.add_argument('--preset',
                        help='Scenario preset: fig4_even, fig4_odd, fig5_even, fig5_odd, fig6_superposition')
    parser.add_argument('--seed', type=int,
                        help='Noise seed (overrides noise.seed)')
    parser.add_argument('--log-file',
                        help='Path to log file (default: temp directory, can be set via '
                             'MULTIMODE_HOM_LOG_FILE env var)')

    subparsers = parser.add_subparsers(dest='command', required=True)
    subparsers.add_parser('scan', help='Run a delay scan and write the coincidence curve')
    subparsers.add_parser('overlap', help='Print the y-parity overlap of the pump')
    dump = subparsers.add_parser('dump-field', help='Write the pump field as CSV')
    dump.add_argument('--spectrum', action='store_true',
                      help='Write the angular spectrum instead of the near field')
    dump.add_argument('--output',
                      help='CSV path (default: <out>/<scenario>_pump.csv)')
    subparsers.add_parser('verify', help='Cross-check factorized rates against the oracle')
    return parser


def main(argv=None):
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    print(f"starting... args: command={args.command}, config={args.config}, preset={args.preset}",
          file=sys.stderr)

    logging_utils.setup_logging()
    logger.info("=== Multimode HOM Simulator Starting ===")
    logger.info(f"Python version: {sys.version}")
    logger.info(f"Arguments: {vars(args)}")

    config, validation_errors = configuration_manager.load_config(args.config, args)
    if validation_errors:
        for err in validation_errors:
            logger.error(err)
        return EXIT_CONFIG

    logging_utils.setup_logging(config['logging']['log_file'])

    try:
        return COMMANDS[args.command](config, args)
    except InvalidArgumentError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except NUMERIC_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_NUMERIC
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        return EXIT_FATAL


if __name__ == '__main__':
    sys.exit(main())
