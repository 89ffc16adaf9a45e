"""Synthetic locally stationary 2D wavelet processes with known spectra.

Random numbers come from numpy's PCG64 generator.  The seed is expanded
with ``SeedSequence(seed).spawn(3 * J)`` so each (scale, direction) layer
has its own substream; layer ``3*(j-1) + dir`` always uses the same
substream, whatever the other layers hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ArgumentError, ConfigurationError
from .ndwt import Field2D, fold_onto_grid, is_pow2, max_levels
from .wavelets import DIRECTIONS, FilterPair, OperatorMatrix, autocorr_wavelet_2d, build_filter, wavelet_2d


@dataclass(frozen=True, eq=False)
class SpectrumSpec:
    """Prescribed spectrum: ``layers[(j, l)]`` is a constant or a coarse 2D grid.

    Coarse grids are sampled at cell centres of the unit square and
    interpolated bilinearly (clamped at the borders) onto rescaled
    locations ``z = (r + 0.5) / dims``.
    """

    J: int
    layers: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.J < 1:
            raise ConfigurationError(f"J must be >= 1, got {self.J}")
        clean = {}
        for key, val in self.layers.items():
            j, l = int(key[0]), str(key[1])
            if not 1 <= j <= self.J or l not in DIRECTIONS:
                raise ConfigurationError(f"layer {key!r} outside scales 1..{self.J} x {DIRECTIONS}")
            arr = np.asarray(val, dtype=np.float64)
            if arr.ndim not in (0, 2):
                raise ConfigurationError(f"layer {key!r} must be a scalar or 2D grid")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ConfigurationError(f"layer {key!r} must be finite and non-negative")
            clean[(j, l)] = arr
        object.__setattr__(self, "layers", clean)

    @classmethod
    def constant(cls, J: int, energies: dict) -> "SpectrumSpec":
        return cls(J=J, layers=dict(energies))

    @classmethod
    def from_dict(cls, doc: dict) -> "SpectrumSpec":
        try:
            J = int(doc["J"])
            entries = doc.get("spectrum", []) or []
            layers = {}
            for e in entries:
                key = (int(e["scale"]), str(e["direction"]))
                if "grid" in e:
                    layers[key] = e["grid"]
                else:
                    layers[key] = float(e["energy"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid spectrum spec: {exc}") from exc
        return cls(J=J, layers=layers)

    def is_zero(self) -> bool:
        return all(not np.any(v > 0) for v in self.layers.values())

    def energy_grid(self, j: int, l: str, dims: tuple[int, int]) -> np.ndarray:
        val = self.layers.get((j, l))
        if val is None:
            return np.zeros(dims)
        if val.ndim == 0:
            return np.full(dims, float(val))
        a, b = val.shape
        # coarse cell centres sit at (i + 0.5) / a; map fine centres onto that index space
        ri = (np.arange(dims[0]) + 0.5) / dims[0] * a - 0.5
        ci = (np.arange(dims[1]) + 0.5) / dims[1] * b - 0.5
        rr, cc = np.meshgrid(ri, ci, indexing="ij")
        out = ndimage.map_coordinates(val, [rr, cc], order=1, mode="nearest")
        return np.maximum(out, 0.0)

    def vector_at(self, z: tuple[float, float]) -> np.ndarray:
        """3J-vector of energies at rescaled location ``z`` in (0,1)^2."""
        out = np.zeros(3 * self.J)
        for (j, l), val in self.layers.items():
            if val.ndim == 0:
                e = float(val)
            else:
                a, b = val.shape
                coords = [[z[0] * a - 0.5], [z[1] * b - 0.5]]
                e = float(ndimage.map_coordinates(val, coords, order=1, mode="nearest")[0])
            out[3 * (j - 1) + DIRECTIONS.index(l)] = e
        return out


def simulate(
    spec: SpectrumSpec,
    dims: tuple[int, int],
    seed: int,
    filt: FilterPair | None = None,
    grid_spacing: float = 2.8,
) -> Field2D:
    """Synthesize X(r) = Σ_{j,l,u} sqrt(S_j^l(u/dims)) ξ_{j,u}^l ψ_j^l[r - u] on a torus."""
    filt = filt or build_filter("haar")
    dims = (int(dims[0]), int(dims[1]))
    if not (is_pow2(dims[0]) and is_pow2(dims[1])):
        raise ArgumentError(f"simulation dims {dims} must be powers of two")
    if spec.J > max_levels(dims):
        raise ArgumentError(f"J={spec.J} exceeds log2(min dims)={max_levels(dims)} for {dims}")
    streams = np.random.SeedSequence(seed).spawn(3 * spec.J)
    acc = np.zeros((dims[0], dims[1] // 2 + 1), dtype=np.complex128)
    for (j, l) in sorted(spec.layers, key=lambda k: (k[0], DIRECTIONS.index(k[1]))):
        w = np.sqrt(spec.energy_grid(j, l, dims))
        if not np.any(w):
            continue
        rng = np.random.Generator(np.random.PCG64(streams[3 * (j - 1) + DIRECTIONS.index(l)]))
        amp = w * rng.standard_normal(dims)
        kern = fold_onto_grid(wavelet_2d(filt, j, l).taps, dims)
        acc += np.fft.rfft2(amp) * np.fft.rfft2(kern)
    values = np.fft.irfft2(acc, s=dims)
    return Field2D(values=values, grid_spacing=grid_spacing, name=f"ls2w-seed{seed}")


def _autocorr_table(J: int, filt: FilterPair) -> tuple[np.ndarray, int]:
    """Stack of all 2D autocorrelation wavelets on the common lag grid."""
    m = autocorr_wavelet_2d(J, "d", filt).max_lag
    table = np.zeros((3 * J, 2 * m + 1, 2 * m + 1))
    for j in range(1, J + 1):
        for di, l in enumerate(DIRECTIONS):
            v = autocorr_wavelet_2d(j, l, filt).values
            c = (v.shape[0] - 1) // 2
            table[3 * (j - 1) + di, m - c : m + c + 1, m - c : m + c + 1] = v
    return table, m


def autocov_from_spectrum(
    spec: SpectrumSpec,
    z: tuple[float, float] = (0.5, 0.5),
    lags=None,
    filt: FilterPair | None = None,
) -> np.ndarray:
    """Local autocovariance c(z, τ) = Σ_{j,l} S_j^l(z) Ψ_j^l(τ).

    With ``lags=None`` returns the full lag grid, a (2M+1)x(2M+1) array whose
    centre is lag (0, 0).  Otherwise ``lags`` is a sequence of (τ1, τ2)
    pairs and one value per pair is returned.
    """
    filt = filt or build_filter("haar")
    table, m = _autocorr_table(spec.J, filt)
    c = np.tensordot(spec.vector_at(z), table, axes=1)
    if lags is None:
        return c
    lags = np.atleast_2d(np.asarray(lags, dtype=int))
    if np.any(np.abs(lags) > m):
        raise ArgumentError(f"lags outside autocorrelation support |τ| <= {m}")
    return c[lags[:, 0] + m, lags[:, 1] + m]


def spectrum_from_autocov(c: np.ndarray, op: OperatorMatrix, filt: FilterPair | None = None) -> np.ndarray:
    """Invert the autocovariance: S = A^{-1} b with b_{(i,m)} = Σ_τ c(τ) Ψ_i^m(τ).

    ``c`` is a square lag grid centred on lag 0 covering the supports of all
    scales up to ``op.J``; the result is the 3J-vector in operator order.
    """
    filt = filt or build_filter(op.family_name)
    c = np.asarray(c, dtype=np.float64)
    table, m = _autocorr_table(op.J, filt)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2 == 0:
        raise ArgumentError(f"autocovariance must be an odd square lag grid, got shape {c.shape}")
    mc = (c.shape[0] - 1) // 2
    if mc < m:
        raise ArgumentError(f"lag grid half-width {mc} smaller than support {m} for J={op.J}")
    c = c[mc - m : mc + m + 1, mc - m : mc + m + 1]
    b = np.tensordot(table, c, axes=([1, 2], [0, 1]))
    return op.inverse @ b
