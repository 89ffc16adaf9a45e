"""Field preparation and the non-decimated 2D wavelet transform.

Coefficients follow the correlation convention

    d[j, l](u) = Σ_k ψ^l_j[k] · X(u + k)      (indices modulo the grid)

so the coefficient at ``u`` covers the wavelet support that starts at ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ArgumentError, ValidationError
from .wavelets import DIRECTIONS, FilterPair, wavelet_2d


@dataclass(frozen=True, eq=False)
class Field2D:
    values: np.ndarray
    grid_spacing: float = 2.8
    name: str = ""
    time: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] < 2 or vals.shape[1] < 2:
            raise ValidationError(f"field must be a 2D grid of at least 2x2, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class CoefficientPyramid:
    """Full-resolution coefficients, ``coeffs[j-1, dir_index]`` is an R'xS' grid.

    ``origin``/``region_shape`` locate the original (unpadded) field inside
    the grid.  ``squared`` marks a periodogram.
    """

    coeffs: np.ndarray
    family_name: str
    origin: tuple[int, int] = (0, 0)
    region_shape: tuple[int, int] | None = None
    squared: bool = False

    @property
    def J(self) -> int:
        return self.coeffs.shape[0]

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.coeffs.shape[2:]

    def grid(self, j: int, direction: str) -> np.ndarray:
        return self.coeffs[j - 1, DIRECTIONS.index(direction)]


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def max_levels(shape: tuple[int, int]) -> int:
    return int(np.log2(min(shape)))


def default_target(shape: tuple[int, int], taper_width: int) -> tuple[int, int]:
    return tuple(next_pow2(n + 2 * taper_width) if taper_width else next_pow2(n) for n in shape)


def _ramp(n: int, width: int, edge: float) -> np.ndarray:
    w = np.ones(n)
    if width:
        k = np.arange(width)
        r = edge + (1.0 - edge) * k / width
        w[:width] = r
        w[n - width :] = np.minimum(w[n - width :], r[::-1])
    return w


def taper_and_pad(
    field: Field2D,
    taper_width: int = 25,
    target: tuple[int, int] | None = None,
    edge_factor: float = 0.0,
) -> tuple[Field2D, tuple[int, int]]:
    """Taper the field edges with a linear ramp and centre it in a zero grid.

    The weight at distance ``k`` from the nearest edge (``k = 0`` being the
    outermost row/column) is ``edge + (1 - edge) * k / taper_width`` for
    ``k < taper_width`` and 1 inside; row and column ramps multiply.

    Returns the padded field and the (row, col) offset of the original.
    """
    R, S = field.shape
    if taper_width < 0 or taper_width > min(R, S) // 2:
        raise ArgumentError(f"taper width {taper_width} outside 0..{min(R, S) // 2}")
    if target is None:
        target = default_target((R, S), taper_width)
    tR, tS = target
    if tR < R or tS < S:
        raise ArgumentError(f"target {target} smaller than field {(R, S)}")
    if not (is_pow2(tR) and is_pow2(tS)):
        raise ArgumentError(f"target dims {target} must be powers of two")
    weights = np.outer(_ramp(R, taper_width, edge_factor), _ramp(S, taper_width, edge_factor))
    out = np.zeros((tR, tS))
    r0, c0 = (tR - R) // 2, (tS - S) // 2
    out[r0 : r0 + R, c0 : c0 + S] = field.values * weights
    return replace(field, values=out), (r0, c0)


def _corr_axis(x: np.ndarray, taps: np.ndarray, step: int, axis: int) -> np.ndarray:
    out = np.zeros_like(x)
    for k, t in enumerate(taps):
        if t != 0.0:
            out += t * np.roll(x, -k * step, axis=axis)
    return out


def fold_onto_grid(taps: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Place 2D taps at the grid origin, wrapping supports longer than the grid."""
    kern = np.zeros(shape)
    r = np.arange(taps.shape[0]) % shape[0]
    c = np.arange(taps.shape[1]) % shape[1]
    np.add.at(kern, (r[:, None], c[None, :]), taps)
    return kern


def _check_levels(shape: tuple[int, int], J: int) -> None:
    if not (is_pow2(shape[0]) and is_pow2(shape[1])):
        raise ArgumentError(f"grid dims {shape} must be powers of two; pad the field first")
    if not 1 <= J <= max_levels(shape):
        raise ArgumentError(f"J={J} not in 1..{max_levels(shape)} for grid {shape}")


def ndwt(
    field: Field2D | np.ndarray,
    J: int,
    filt: FilterPair,
    method: str = "atrous",
    origin: tuple[int, int] = (0, 0),
    region_shape: tuple[int, int] | None = None,
) -> CoefficientPyramid:
    """Periodic non-decimated 2D wavelet transform up to scale ``J``.

    ``method="atrous"`` runs the separable à-trous recursion with dilated
    filters; ``method="fft"`` correlates the field with each full 2D
    wavelet in the Fourier domain.
    """
    x = field.values if isinstance(field, Field2D) else np.asarray(field, dtype=np.float64)
    _check_levels(x.shape, J)
    out = np.empty((J, 3) + x.shape)
    h = np.asarray(filt.low_pass)
    g = np.asarray(filt.high_pass)
    if method == "atrous":
        c = x
        for j in range(1, J + 1):
            step = 2 ** (j - 1)
            lo = _corr_axis(c, h, step, 0)
            hi = _corr_axis(c, g, step, 0)
            out[j - 1, 0] = _corr_axis(lo, g, step, 1)
            out[j - 1, 1] = _corr_axis(hi, h, step, 1)
            out[j - 1, 2] = _corr_axis(hi, g, step, 1)
            c = _corr_axis(lo, h, step, 1)
    elif method == "fft":
        fx = np.fft.rfft2(x)
        for j in range(1, J + 1):
            for di, d in enumerate(DIRECTIONS):
                taps = wavelet_2d(filt, j, d).taps
                kern = fold_onto_grid(taps, x.shape)
                # correlation: multiply by the conjugate spectrum of the kernel
                out[j - 1, di] = np.fft.irfft2(fx * np.conj(np.fft.rfft2(kern)), s=x.shape)
    else:
        raise ArgumentError(f"unknown transform method {method!r}")
    if region_shape is None:
        region_shape = x.shape
    return CoefficientPyramid(
        coeffs=out, family_name=filt.family_name, origin=tuple(origin), region_shape=tuple(region_shape)
    )


def periodogram(pyramid: CoefficientPyramid) -> CoefficientPyramid:
    return replace(pyramid, coeffs=np.square(pyramid.coeffs), squared=True)
