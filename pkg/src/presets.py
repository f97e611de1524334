#!/usr/bin/env python3
"""
Named scenario presets.

Each preset is a partial configuration merged over the defaults and under
the user's config file.
"""

import copy

_HG10 = [{'m': 1, 'n': 0, 're': 1.0, 'im': 0.0}]
_HG01 = [{'m': 0, 'n': 1, 're': 1.0, 'im': 0.0}]

PRESETS = {
    'fig4_even': {
        'pump': {'modes': _HG10, 'angle_deg': 0.0},
        'polarization': {'kind': 'symmetric_HH', 'matrix': None},
    },
    'fig4_odd': {
        'pump': {'modes': _HG01, 'angle_deg': 0.0},
        'polarization': {'kind': 'symmetric_HH', 'matrix': None},
    },
    'fig5_even': {
        'pump': {'modes': _HG10, 'angle_deg': 0.0},
        'polarization': {'kind': 'antisymmetric_singlet', 'matrix': None},
    },
    'fig5_odd': {
        'pump': {'modes': _HG01, 'angle_deg': 0.0},
        'polarization': {'kind': 'antisymmetric_singlet', 'matrix': None},
    },
    # HG10 turned by the wire to 45 degrees: (HG10 + HG01) / sqrt(2)
    'fig6_superposition': {
        'pump': {'modes': _HG10, 'angle_deg': 45.0},
        'polarization': {'kind': 'symmetric_HH', 'matrix': None},
    },
}

SUPPORTED_PRESETS = list(PRESETS)


def validate_preset(name):
    return name in PRESETS


def get_preset(name):
    """Deep copy of the named preset's overrides."""
    if not validate_preset(name):
        raise KeyError(f"Unsupported preset: {name}. Supported: {', '.join(SUPPORTED_PRESETS)}")
    return copy.deepcopy(PRESETS[name])
