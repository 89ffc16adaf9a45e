"""From raw periodograms to averaged, standardized wavelet spectra."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import ArgumentError, ConfigurationError, DegenerateInputError
from .ndwt import CoefficientPyramid, is_pow2
from .wavelets import DIRECTIONS, OperatorMatrix

SMOOTHER_KINDS = ("box", "shrink", "none")


@dataclass(frozen=True)
class Smoother:
    """Periodogram smoother configuration.

    ``kind="box"`` applies a periodic moving average.  With ``half_width``
    unset the half-width at scale j is ``2**(j+1)`` capped at an eighth of
    the smaller grid dimension.  ``kind="shrink"`` soft-thresholds the
    decimated Haar detail coefficients of each grid at the universal
    threshold.  ``kind="none"`` leaves the periodogram as is.
    """

    kind: str = "box"
    half_width: int | None = None

    def __post_init__(self):
        if self.kind not in SMOOTHER_KINDS:
            raise ConfigurationError(f"unknown smoother {self.kind!r}; expected one of {SMOOTHER_KINDS}")
        if self.half_width is not None and (self.kind != "box" or self.half_width < 0):
            raise ConfigurationError(f"invalid half_width {self.half_width!r} for smoother {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Smoother":
        """Parse ``box``, ``box:4``, ``shrink`` or ``none``."""
        kind, _, arg = text.strip().partition(":")
        if arg:
            try:
                hw = int(arg)
            except ValueError:
                raise ConfigurationError(f"bad smoother half-width in {text!r}") from None
            return cls(kind, hw)
        return cls(kind)

    def describe(self) -> str:
        if self.kind == "box" and self.half_width is not None:
            return f"box:{self.half_width}"
        return self.kind

    def box_half_width(self, j: int, shape: tuple[int, int]) -> int:
        if self.half_width is not None:
            return self.half_width
        return int(min(2 ** (j + 1), min(shape) // 8))


@dataclass(frozen=True, eq=False)
class LocalWaveletSpectrum:
    values: np.ndarray  # (J, 3, R', S')
    smoother: str
    bias_corrected: bool
    origin: tuple[int, int] = (0, 0)
    region_shape: tuple[int, int] | None = None

    @property
    def J(self) -> int:
        return self.values.shape[0]

    def grid(self, j: int, direction: str) -> np.ndarray:
        return self.values[j - 1, DIRECTIONS.index(direction)]

    def direction_average(self, j: int) -> np.ndarray:
        return self.values[j - 1].mean(axis=0)


@dataclass(frozen=True, eq=False)
class AvgSpectrum:
    """Energies ordered scale-major, direction-minor: (s1,h), (s1,v), (s1,d), (s2,h), ..."""

    energies: np.ndarray
    scales: tuple[int, ...]
    standardized: bool = False
    source: str = ""

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=np.float64)
        if e.shape != (3 * len(self.scales),):
            raise ArgumentError(f"{e.size} energies do not match {len(self.scales)} scales x 3 directions")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "scales", tuple(int(s) for s in self.scales))

    def __len__(self) -> int:
        return self.energies.size

    def as_matrix(self) -> np.ndarray:
        return self.energies.reshape(len(self.scales), 3)

    def labels(self) -> list[tuple[int, str]]:
        return [(s, d) for s in self.scales for d in DIRECTIONS]

    def argmax(self) -> tuple[int, str]:
        return self.labels()[int(np.argmax(self.energies))]

    def value(self, scale: int, direction: str) -> float:
        return float(self.energies[3 * self.scales.index(scale) + DIRECTIONS.index(direction)])


def _haar_dwt2(x):
    a = (x[0::2] + x[1::2]) / np.sqrt(2)
    d = (x[0::2] - x[1::2]) / np.sqrt(2)
    ll = (a[:, 0::2] + a[:, 1::2]) / np.sqrt(2)
    lh = (a[:, 0::2] - a[:, 1::2]) / np.sqrt(2)
    hl = (d[:, 0::2] + d[:, 1::2]) / np.sqrt(2)
    hh = (d[:, 0::2] - d[:, 1::2]) / np.sqrt(2)
    return ll, (lh, hl, hh)


def _haar_idwt2(ll, details):
    lh, hl, hh = details
    a = np.empty((ll.shape[0], ll.shape[1] * 2))
    d = np.empty_like(a)
    a[:, 0::2] = (ll + lh) / np.sqrt(2)
    a[:, 1::2] = (ll - lh) / np.sqrt(2)
    d[:, 0::2] = (hl + hh) / np.sqrt(2)
    d[:, 1::2] = (hl - hh) / np.sqrt(2)
    x = np.empty((a.shape[0] * 2, a.shape[1]))
    x[0::2] = (a + d) / np.sqrt(2)
    x[1::2] = (a - d) / np.sqrt(2)
    return x


def _shrink(grid: np.ndarray) -> np.ndarray:
    if not (is_pow2(grid.shape[0]) and is_pow2(grid.shape[1])):
        raise ConfigurationError("shrinkage smoother needs power-of-two grids")
    levels = max(1, int(np.log2(min(grid.shape))) - 2)
    ll = grid
    stack = []
    for _ in range(levels):
        ll, det = _haar_dwt2(ll)
        stack.append(det)
    sigma = np.median(np.abs(stack[0][2])) / 0.6745
    thr = sigma * np.sqrt(2.0 * np.log(grid.size))
    for det in reversed(stack):
        det = tuple(np.sign(c) * np.maximum(np.abs(c) - thr, 0.0) for c in det)
        ll = _haar_idwt2(ll, det)
    return ll


def smooth_periodogram(pgram: CoefficientPyramid, smoother: Smoother = Smoother()) -> CoefficientPyramid:
    out = np.empty_like(pgram.coeffs)
    shape = pgram.grid_shape
    for j in range(1, pgram.J + 1):
        for di in range(3):
            g = pgram.coeffs[j - 1, di]
            if smoother.kind == "none":
                out[j - 1, di] = g
            elif smoother.kind == "box":
                hw = smoother.box_half_width(j, shape)
                out[j - 1, di] = g if hw == 0 else ndimage.uniform_filter(g, size=2 * hw + 1, mode="wrap")
            else:
                out[j - 1, di] = _shrink(g)
    return replace(pgram, coeffs=out)


def bias_correct(
    smoothed: CoefficientPyramid, op: OperatorMatrix, smoother: Smoother | str = "box"
) -> LocalWaveletSpectrum:
    """Apply the inverse operator matrix to the 3J-vector at every location."""
    if smoothed.J != op.J:
        raise ArgumentError(f"pyramid has {smoothed.J} scales but operator matrix has J={op.J}")
    J = smoothed.J
    flat = smoothed.coeffs.reshape(3 * J, -1)
    corrected = (op.inverse @ flat).reshape(smoothed.coeffs.shape)
    desc = smoother.describe() if isinstance(smoother, Smoother) else str(smoother)
    return LocalWaveletSpectrum(
        values=corrected,
        smoother=desc,
        bias_corrected=True,
        origin=smoothed.origin,
        region_shape=smoothed.region_shape,
    )


def average_spectrum(
    spec: LocalWaveletSpectrum,
    region: tuple[int, int, int, int] | None = None,
    source: str = "",
) -> AvgSpectrum:
    """Mean of the local spectrum over ``region = (row0, col0, nrows, ncols)``.

    Defaults to the original field rectangle recorded in ``spec``.
    """
    R, S = spec.values.shape[2:]
    if region is None:
        shape = spec.region_shape or (R, S)
        region = (*spec.origin, *shape)
    r0, c0, nr, nc = region
    if nr <= 0 or nc <= 0:
        raise ArgumentError(f"empty averaging region {region}")
    if r0 < 0 or c0 < 0 or r0 + nr > R or c0 + nc > S:
        raise ArgumentError(f"region {region} exceeds grid {(R, S)}")
    block = spec.values[:, :, r0 : r0 + nr, c0 : c0 + nc]
    energies = block.mean(axis=(2, 3)).reshape(-1)
    return AvgSpectrum(energies=energies, scales=tuple(range(1, spec.J + 1)), source=source)


def default_scales(J: int) -> tuple[int, ...]:
    """Drop the two finest and the two coarsest scales when there are enough."""
    if J >= 5:
        return tuple(range(3, J - 1))
    return tuple(range(1, J + 1))


def select_scales(avg: AvgSpectrum, retained=None) -> AvgSpectrum:
    if retained is None:
        retained = default_scales(max(avg.scales))
    retained = sorted(set(int(s) for s in retained))
    if not retained:
        raise ArgumentError("retained scale set is empty")
    missing = [s for s in retained if s not in avg.scales]
    if missing:
        raise ArgumentError(f"scales {missing} not available (have {list(avg.scales)})")
    m = avg.as_matrix()
    rows = [avg.scales.index(s) for s in retained]
    return replace(avg, energies=m[rows].reshape(-1), scales=tuple(retained))


def standardize(avg: AvgSpectrum) -> AvgSpectrum:
    """Centre on the mean over all entries and divide by the population std."""
    e = avg.energies
    if e.size < 2:
        raise DegenerateInputError("standardization needs at least 2 entries")
    sd = e.std()
    scale = np.abs(e).max()
    if sd == 0.0 or sd <= 1e-13 * scale:
        raise DegenerateInputError("spectrum has zero variance across scales and directions")
    z = (e - e.mean()) / sd
    return replace(avg, energies=z, standardized=True)
