"""Discrete wavelets, autocorrelation wavelets and the bias-correction operator.

Axis convention used throughout the package: axis 0 runs along rows
(North-South), axis 1 along columns (East-West).  The horizontal wavelet
applies the father filter along axis 0 and the mother filter along axis 1,
the vertical wavelet the reverse, and the diagonal wavelet uses the mother
filter on both axes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, ConfigurationError, EstimationError

logger = logging.getLogger(__name__)

DIRECTIONS = ("h", "v", "d")
DIR_INDEX = {d: i for i, d in enumerate(DIRECTIONS)}

# (axis-0 kind, axis-1 kind) for every 2D direction
_SEPARABLE = {"h": ("father", "mother"), "v": ("mother", "father"), "d": ("mother", "mother")}

COND_LIMIT = 1e12

_SQ3 = math.sqrt(3.0)
# low-pass taps scaled to sum 2 (integers for Haar); the orthonormal filter
# is this divided by sqrt(2)
_DILATION = {
    "haar": (1.0, 1.0),
    # extremal-phase Daubechies, two vanishing moments
    "d4": tuple(c / 4 for c in (1 + _SQ3, 3 + _SQ3, 3 - _SQ3, 1 - _SQ3)),
}
_LOW_PASS = {k: tuple(c / math.sqrt(2.0) for c in v) for k, v in _DILATION.items()}


def _qmf(h):
    n = len(h)
    return tuple((-1) ** k * h[n - 1 - k] for k in range(n))


@dataclass(frozen=True)
class FilterPair:
    low_pass: tuple[float, ...]
    high_pass: tuple[float, ...]
    family_name: str

    @property
    def n_taps(self) -> int:
        return len(self.low_pass)


@dataclass(frozen=True, eq=False)
class DiscreteWavelet1D:
    scale: int
    kind: str  # "mother" or "father"
    taps: np.ndarray

    @property
    def length(self) -> int:
        return self.taps.size


@dataclass(frozen=True, eq=False)
class Wavelet2D:
    scale: int
    direction: str
    taps: np.ndarray  # L_j x L_j, indexed [axis-0 offset, axis-1 offset]


@dataclass(frozen=True, eq=False)
class AutocorrWavelet:
    """Autocorrelation wavelet sampled on lags ``-(L-1) .. L-1`` per axis.

    ``values[k]`` (1D) or ``values[k1, k2]`` (2D) holds the lag
    ``k - (L - 1)``; ``kind`` is ``"mother"``/``"father"`` in 1D and a
    direction in 2D.
    """

    scale: int
    kind: str
    values: np.ndarray

    @property
    def max_lag(self) -> int:
        return (self.values.shape[0] - 1) // 2

    def at(self, *lag: int) -> float:
        if len(lag) != self.values.ndim:
            raise ArgumentError(f"expected {self.values.ndim} lag components, got {len(lag)}")
        m = self.max_lag
        if any(abs(t) > m for t in lag):
            return 0.0
        return float(self.values[tuple(t + m for t in lag)])


def build_filter(family_name: str) -> FilterPair:
    """Return the orthonormal quadrature-mirror filter pair for ``family_name``.

    Supported families: ``"haar"`` and ``"d4"``.  The high-pass filter is
    ``g[k] = (-1)**k * h[N-1-k]`` so that Haar gives ``(1/√2, -1/√2)``.
    """
    key = family_name.lower()
    if key in ("db1",):
        key = "haar"
    if key in ("db2",):
        key = "d4"
    if key not in _LOW_PASS:
        raise ConfigurationError(
            f"unknown wavelet family {family_name!r}; supported: {sorted(_LOW_PASS)}"
        )
    h = _LOW_PASS[key]
    return FilterPair(low_pass=h, high_pass=_qmf(h), family_name=key)


def support_length(filt: FilterPair, j: int) -> int:
    return (2**j - 1) * (filt.n_taps - 1) + 1


def _upsample(taps: np.ndarray, factor: int) -> np.ndarray:
    out = np.zeros((taps.size - 1) * factor + 1)
    out[::factor] = taps
    return out


@lru_cache(maxsize=None)
def _raw_cascade(filt: FilterPair, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized (mother, father) taps, i.e. ``2**(j/2)`` times the wavelets."""
    if filt.family_name in _DILATION:
        h = np.asarray(_DILATION[filt.family_name])
    else:
        h = np.asarray(filt.low_pass, dtype=float) * math.sqrt(2.0)
    g = np.asarray(_qmf(tuple(h)))
    if j == 1:
        return g, h
    _, phi = _raw_cascade(filt, j - 1)
    step = 2 ** (j - 1)
    return np.convolve(phi, _upsample(g, step)), np.convolve(phi, _upsample(h, step))


def _cascade(filt: FilterPair, j: int) -> tuple[np.ndarray, np.ndarray]:
    """(mother, father) taps at scale ``j`` by the dilation recursion.

    The recursion runs on sum-2 filters and is normalized once at the end,
    which keeps Haar taps exact.
    """
    psi, phi = _raw_cascade(filt, j)
    norm = 2.0 ** (-j / 2)
    return psi * norm, phi * norm


def discrete_wavelet(filt: FilterPair, j: int, kind: str = "mother") -> DiscreteWavelet1D:
    if j < 1:
        raise ArgumentError(f"scale must be >= 1, got {j}")
    if kind not in ("mother", "father"):
        raise ArgumentError(f"kind must be 'mother' or 'father', got {kind!r}")
    psi, phi = _cascade(filt, j)
    taps = psi if kind == "mother" else phi
    taps = taps.copy()
    taps.setflags(write=False)
    return DiscreteWavelet1D(scale=j, kind=kind, taps=taps)


def wavelet_2d(filt: FilterPair, j: int, direction: str) -> Wavelet2D:
    if direction not in _SEPARABLE:
        raise ArgumentError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    k0, k1 = _SEPARABLE[direction]
    taps = np.outer(discrete_wavelet(filt, j, k0).taps, discrete_wavelet(filt, j, k1).taps)
    taps.setflags(write=False)
    return Wavelet2D(scale=j, direction=direction, taps=taps)


def autocorr_wavelet_1d(wavelet: DiscreteWavelet1D) -> AutocorrWavelet:
    vals = np.correlate(wavelet.taps, wavelet.taps, mode="full")
    # exact symmetry; np.correlate may differ in the last bit between τ and -τ
    vals = 0.5 * (vals + vals[::-1])
    vals.setflags(write=False)
    return AutocorrWavelet(scale=wavelet.scale, kind=wavelet.kind, values=vals)


def autocorr_wavelet_2d(j: int, direction: str, filt: FilterPair) -> AutocorrWavelet:
    if direction not in _SEPARABLE:
        raise ArgumentError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    k0, k1 = _SEPARABLE[direction]
    a0 = autocorr_wavelet_1d(discrete_wavelet(filt, j, k0)).values
    a1 = autocorr_wavelet_1d(discrete_wavelet(filt, j, k1)).values
    vals = np.outer(a0, a1)
    vals.setflags(write=False)
    return AutocorrWavelet(scale=j, kind=direction, values=vals)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Gram matrix of 2D autocorrelation wavelets and its inverse.

    Row/column ``3*(j-1) + DIR_INDEX[l]`` corresponds to scale ``j`` and
    direction ``l``.
    """

    J: int
    family_name: str
    entries: np.ndarray
    inverse: np.ndarray
    condition: float

    @staticmethod
    def index(j: int, direction: str) -> int:
        return 3 * (j - 1) + DIR_INDEX[direction]


def _padded_autocorrs(filt: FilterPair, J: int) -> tuple[np.ndarray, np.ndarray]:
    """1D autocorrelations of mother/father at scales 1..J on a common lag grid."""
    m = support_length(filt, J) - 1
    mothers = np.zeros((J, 2 * m + 1))
    fathers = np.zeros((J, 2 * m + 1))
    for j in range(1, J + 1):
        for out, kind in ((mothers, "mother"), (fathers, "father")):
            v = autocorr_wavelet_1d(discrete_wavelet(filt, j, kind)).values
            c = (v.size - 1) // 2
            out[j - 1, m - c : m + c + 1] = v
    return mothers, fathers


def operator_matrix(J: int, filt: FilterPair) -> OperatorMatrix:
    """Build A[(i,l),(j,m)] = Σ_τ Ψ_i^l(τ) Ψ_j^m(τ) and invert it.

    Separability reduces the 2D lag sum to a product of two 1D inner
    products, one per axis.
    """
    if not 1 <= J <= 12:
        raise ArgumentError(f"J must lie in 1..12, got {J}")
    mothers, fathers = _padded_autocorrs(filt, J)
    rows = {"mother": mothers, "father": fathers}
    gram = {
        (a, b): rows[a] @ rows[b].T for a in ("mother", "father") for b in ("mother", "father")
    }
    A = np.empty((3 * J, 3 * J))
    for l, (l0, l1) in _SEPARABLE.items():
        for m, (m0, m1) in _SEPARABLE.items():
            block = gram[(l0, m0)] * gram[(l1, m1)]
            A[DIR_INDEX[l] :: 3, DIR_INDEX[m] :: 3] = block
    A = 0.5 * (A + A.T)

    cond = float(np.linalg.cond(A))
    logger.debug("operator matrix J=%d family=%s cond=%.3e", J, filt.family_name, cond)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise EstimationError(f"operator matrix is numerically singular (condition estimate {cond:.3e})")
    try:
        chol = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(f"operator matrix not positive definite (cond {cond:.3e})") from exc
    eye = np.eye(3 * J)
    linv = np.linalg.solve(chol, eye)
    inv = linv.T @ linv
    inv = 0.5 * (inv + inv.T)
    resid = np.abs(A @ inv - eye).max()
    if resid >= 1e-8:
        raise EstimationError(f"operator inverse residual {resid:.3e} exceeds 1e-8 (cond {cond:.3e})")
    A.setflags(write=False)
    inv.setflags(write=False)
    return OperatorMatrix(J=J, family_name=filt.family_name, entries=A, inverse=inv, condition=cond)


@lru_cache(maxsize=32)
def cached_operator(J: int, family_name: str) -> OperatorMatrix:
    return operator_matrix(J, build_filter(family_name))
