"""Field -> averaged spectrum pipeline used by the CLI and the verification driver."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import WavespecError
from .lws import (
    AvgSpectrum,
    LocalWaveletSpectrum,
    Smoother,
    average_spectrum,
    bias_correct,
    default_scales,
    select_scales,
    smooth_periodogram,
    standardize,
)
from .ndwt import Field2D, max_levels, ndwt, periodogram, taper_and_pad
from .wavelets import build_filter, cached_operator


@dataclass(frozen=True)
class PipelineParams:
    taper: int = 25
    dims: tuple[int, int] | None = None
    family: str = "haar"
    levels: int | None = None
    scales: tuple[int, ...] | None = None
    smoother: Smoother = field(default_factory=Smoother)
    edge_factor: float = 0.0
    standardize: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["smoother"] = self.smoother.describe()
        d["dims"] = list(self.dims) if self.dims else None
        d["scales"] = list(self.scales) if self.scales else None
        return d


class StageError(WavespecError):
    """Wraps a library error with the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: WavespecError):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except WavespecError as exc:
        raise StageError(name, exc) from exc


def local_spectrum(field: Field2D, params: PipelineParams) -> LocalWaveletSpectrum:
    filt = _stage("configure", build_filter, params.family)
    padded, origin = _stage("taper_and_pad", taper_and_pad, field, params.taper, params.dims, params.edge_factor)
    J = params.levels or max_levels(padded.shape)
    pyr = _stage("ndwt", ndwt, padded, J, filt, origin=origin, region_shape=field.shape)
    pgram = periodogram(pyr)
    smoothed = _stage("smooth", smooth_periodogram, pgram, params.smoother)
    op = _stage("operator_matrix", cached_operator, J, filt.family_name)
    return _stage("bias_correct", bias_correct, smoothed, op, params.smoother)


def field_spectrum(field: Field2D, params: PipelineParams, source: str = "") -> AvgSpectrum:
    """Full chain: taper/pad, NDWT, periodogram, smooth, correct, average, select, standardize."""
    lws = local_spectrum(field, params)
    avg = _stage("average", average_spectrum, lws, source=source)
    scales = params.scales or default_scales(lws.J)
    avg = _stage("select_scales", select_scales, avg, scales)
    if params.standardize:
        avg = _stage("standardize", standardize, avg)
    return avg


def raw_average(field: Field2D, params: PipelineParams) -> np.ndarray:
    """Averaged corrected spectrum over all scales, unselected and unstandardized."""
    return average_spectrum(local_spectrum(field, params)).energies
