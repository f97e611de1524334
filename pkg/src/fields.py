#!/usr/bin/env python3
"""
Uniform-grid complex fields on the transverse plane.

Everything else in the simulator is built on these helpers: sampling,
trapezoid quadrature, the angular spectrum (Fourier transform with an
e^{-i q.rho} kernel and a symmetric 1/(2 pi) split) and the y-reflection
applied by the beam splitter.

Field arrays are indexed [i, j] with x along the first axis and y along
the second, i.e. values[i, j] = f(x_i, y_j).
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from simulation_errors import (
    AsymmetricGridError,
    GridMismatchError,
    InvalidArgumentError,
    NonFiniteSampleError,
)

logger = logging.getLogger(__name__)

FIELD_CSV_COLUMNS = 'x,y,re,im'


def _check_count(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    if value < 2:
        raise InvalidArgumentError(f"{name} must be >= 2, got {value}")


def _check_positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be finite and > 0, got {value}")


def _axis(n, spacing, center):
    # (i - (n-1)/2) is exactly antisymmetric, so mirrored nodes are exact negatives
    return (np.arange(n) - (n - 1) / 2.0) * spacing + center


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid of nx by ny nodes spanning center +/- extent on each axis."""
    nx: int
    ny: int
    extent_x: float
    extent_y: float
    center_x: float = 0.0
    center_y: float = 0.0

    def __post_init__(self):
        _check_count('nx', self.nx)
        _check_count('ny', self.ny)
        _check_positive('extent_x', self.extent_x)
        _check_positive('extent_y', self.extent_y)
        for name in ('center_x', 'center_y'):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")

    @property
    def dx(self):
        return 2.0 * self.extent_x / (self.nx - 1)

    @property
    def dy(self):
        return 2.0 * self.extent_y / (self.ny - 1)

    @property
    def x(self):
        return _axis(self.nx, self.dx, self.center_x)

    @property
    def y(self):
        return _axis(self.ny, self.dy, self.center_y)

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def is_y_symmetric(self):
        return self.center_y == 0.0

    def mesh(self):
        """Return (X, Y) coordinate arrays with 'ij' indexing."""
        return np.meshgrid(self.x, self.y, indexing='ij')

    def weights(self):
        """Composite trapezoid weights, shape (nx, ny)."""
        return np.outer(trapezoid_weights(self.nx, self.dx),
                        trapezoid_weights(self.ny, self.dy))

    def metadata(self):
        return {
            'nx': self.nx,
            'ny': self.ny,
            'extent_x': self.extent_x,
            'extent_y': self.extent_y,
            'center_x': self.center_x,
            'center_y': self.center_y,
        }


def trapezoid_weights(n, spacing):
    """1D composite trapezoid weights."""
    w = np.full(n, spacing, dtype=float)
    w[0] = w[-1] = spacing / 2.0
    return w


def make_grid(nx, ny, extent_x, extent_y, center_x=0.0, center_y=0.0):
    """Create a grid with nodes x_i = center_x - extent_x + i*dx."""
    return Grid2D(nx, ny, float(extent_x), float(extent_y), float(center_x), float(center_y))


def midpoint_grid(grid):
    """Grid holding every pair midpoint ((x_i + x_k)/2, (y_j + y_l)/2) of `grid`.

    Index i + k of the returned grid is the midpoint of nodes i and k.
    """
    return make_grid(2 * grid.nx - 1, 2 * grid.ny - 1, grid.extent_x, grid.extent_y,
                     grid.center_x, grid.center_y)


def spectral_grid(grid):
    """Transverse-wavevector grid conjugate to `grid`.

    Same node counts; spacing 2*pi/(n*dx), centered on q = 0. For odd counts the
    nodes coincide with the shifted DFT frequencies.
    """
    qx = math.pi * (grid.nx - 1) / (grid.nx * grid.dx)
    qy = math.pi * (grid.ny - 1) / (grid.ny * grid.dy)
    return make_grid(grid.nx, grid.ny, qx, qy)


@dataclass(frozen=True, eq=False)
class ComplexField2D:
    """Complex samples on a Grid2D. Values are copied and made read-only."""
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise InvalidArgumentError(
                f"values shape {values.shape} does not match grid shape {self.grid.shape}")
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            i, j = (int(k) for k in bad[0])
            raise NonFiniteSampleError(i, j, self.grid.x[i], self.grid.y[j], values[i, j])
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    def with_values(self, values):
        return ComplexField2D(self.grid, values)

    def __add__(self, other):
        _require_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __mul__(self, scalar):
        return self.with_values(self.values * complex(scalar))

    __rmul__ = __mul__


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"Grid mismatch: {a.grid} vs {b.grid}")


def sample(f, grid):
    """Sample a vectorized function f(X, Y) on every node of `grid`."""
    X, Y = grid.mesh()
    with np.errstate(all='ignore'):
        raw = np.asarray(f(X, Y), dtype=np.complex128)
    return ComplexField2D(grid, np.broadcast_to(raw, grid.shape))


def zeros(grid):
    return ComplexField2D(grid, np.zeros(grid.shape, dtype=np.complex128))


def inner_product(a, b):
    """L2 inner product, conjugate-linear in `a`, by composite trapezoid quadrature."""
    _require_same_grid(a, b)
    return complex(np.sum(np.conj(a.values) * b.values * a.grid.weights()))


def norm(field):
    return math.sqrt(max(inner_product(field, field).real, 0.0))


def normalize(field):
    n = norm(field)
    if n == 0.0:
        raise InvalidArgumentError("Cannot normalize a zero field")
    return field.with_values(field.values / n)


def fourier_kernel(out_coords, in_coords, in_spacing, sign=-1):
    """Matrix of exp(sign*i*out*in) * spacing / sqrt(2 pi) for separable transforms."""
    phase = np.outer(out_coords, in_coords)
    return np.exp(sign * 1j * phase) * (in_spacing / math.sqrt(2.0 * math.pi))


def angular_spectrum(field):
    """Angular spectrum v(q) = (1/2pi) * integral of W(rho) e^{-i q.rho} d^2 rho.

    The output lives on `spectral_grid(field.grid)` and preserves the L2 norm.
    """
    grid = field.grid
    qgrid = spectral_grid(grid)
    kx = fourier_kernel(qgrid.x, grid.x, grid.dx)
    ky = fourier_kernel(qgrid.y, grid.y, grid.dy)
    spectrum = kx @ field.values @ ky.T
    logger.debug(f"Angular spectrum on {qgrid.nx}x{qgrid.ny} grid, "
                 f"q extent ({qgrid.extent_x:.4g}, {qgrid.extent_y:.4g}) 1/m")
    return ComplexField2D(qgrid, spectrum)


def flip_y(field):
    """Return the field reflected about y = 0: output(x, y) = input(x, -y)."""
    if not field.grid.is_y_symmetric:
        raise AsymmetricGridError(
            f"flip_y needs a grid centered on y = 0, got center_y={field.grid.center_y}")
    return field.with_values(field.values[:, ::-1])


def covers(grid, x, y, rtol=1e-12):
    """Boolean mask: which (x, y) points lie inside the grid window."""
    tol_x = rtol * grid.extent_x
    tol_y = rtol * grid.extent_y
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return ((np.abs(x - grid.center_x) <= grid.extent_x + tol_x)
            & (np.abs(y - grid.center_y) <= grid.extent_y + tol_y))


def interpolate(field, x, y):
    """Bilinear interpolation of the field at points (x, y).

    Points must lie inside the window; callers check with `covers` and raise
    their own error type.
    """
    grid = field.grid
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    points = np.stack([np.clip(x, grid.x[0], grid.x[-1]), np.clip(y, grid.y[0], grid.y[-1])], axis=-1)
    real = RegularGridInterpolator((grid.x, grid.y), field.values.real, method='linear')
    imag = RegularGridInterpolator((grid.x, grid.y), field.values.imag, method='linear')
    return (real(points) + 1j * imag(points)).reshape(x.shape)


def resample(field, grid):
    """Resample `field` onto `grid`; the caller guarantees coverage."""
    X, Y = grid.mesh()
    return ComplexField2D(grid, interpolate(field, X, Y))


def write_field_csv(field, path):
    """Write `x,y,re,im` rows with a commented grid-metadata header.

    The file is written next to its destination and renamed into place.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    X, Y = field.grid.mesh()
    data = np.column_stack([X.ravel(), Y.ravel(),
                            field.values.real.ravel(), field.values.imag.ravel()])
    meta = ' '.join(f"{k}={v!r}" for k, v in field.grid.metadata().items())
    temp_path = path.with_suffix(path.suffix + '.temp')
    try:
        np.savetxt(temp_path, data, delimiter=',', fmt='%.12e',
                   header=f"{meta}\n{FIELD_CSV_COLUMNS}", comments='# ')
        temp_path.replace(path)
    except OSError:
        if temp_path.exists():
            temp_path.unlink()
        raise
    logger.info(f"Field written to {path}")
    return path
