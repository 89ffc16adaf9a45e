"""Local wavelet spectra of 2D fields and LDA-based ensemble verification."""

from .errors import (
    ArgumentError,
    ConfigurationError,
    DegenerateInputError,
    EstimationError,
    FormatError,
    ValidationError,
    WavespecError,
)
from .wavelets import (
    DIRECTIONS,
    AutocorrWavelet,
    DiscreteWavelet1D,
    FilterPair,
    OperatorMatrix,
    Wavelet2D,
    autocorr_wavelet_1d,
    autocorr_wavelet_2d,
    build_filter,
    discrete_wavelet,
    operator_matrix,
    wavelet_2d,
)
from .ndwt import CoefficientPyramid, Field2D, ndwt, periodogram, taper_and_pad
from .lws import (
    AvgSpectrum,
    LocalWaveletSpectrum,
    Smoother,
    average_spectrum,
    bias_correct,
    select_scales,
    smooth_periodogram,
    standardize,
)
from .simulate import SpectrumSpec, autocov_from_spectrum, simulate, spectrum_from_autocov
from .lda import LDAModel, fit_lda, log_likelihood, log_likelihoods, posterior
from .verify import (
    AttributionResult,
    ClassedDataset,
    Scores,
    VerificationReport,
    attribution,
    cross_validate,
    scores,
)

__version__ = "0.1.0"
