"""Fisher linear discriminant analysis with a pooled Gaussian class model."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, EstimationError

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
_rank_warned = False
_LOG2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class LDAModel:
    """Discriminant directions plus per-subspace class statistics.

    ``vectors[:, k]`` is the k-th direction, normalized so that
    ``v' S_W v = 1`` for the scatter it was fitted on.  ``means`` holds the
    class means in the full projected space; ``within_cov`` the pooled
    within-class covariance there (any leading block is the covariance of
    the corresponding subspace).
    """

    vectors: np.ndarray  # (p, K)
    ratios: np.ndarray  # (K,)
    classes: tuple
    means: np.ndarray  # (N_c, K)
    within_cov: np.ndarray  # (K, K)
    log_priors: np.ndarray  # (N_c,)

    @property
    def n_vectors(self) -> int:
        return self.vectors.shape[1]


def _class_stats(X: np.ndarray, y: np.ndarray, classes) -> tuple[np.ndarray, np.ndarray, int]:
    """Class means, pooled within-class scatter and its degrees of freedom."""
    index = {c: k for k, c in enumerate(classes)}
    idx = np.array([index[c] for c in y.tolist()])
    means = np.stack([X[idx == k].mean(axis=0) for k in range(len(classes))])
    resid = X - means[idx]
    return means, resid.T @ resid, X.shape[0] - len(classes)


def _whitener(S: np.ndarray) -> np.ndarray:
    """Columns span the numerical range of ``S`` and satisfy ``W' S W = I``.

    Directions whose variance falls below ``RANK_TOL`` times the largest are
    dropped; standardized spectra always lose one (their entries sum to 0).
    """
    global _rank_warned
    evals, evecs = np.linalg.eigh(0.5 * (S + S.T))
    top = evals[-1] if evals.size else 0.0
    if not np.isfinite(top) or top <= 0.0:
        raise EstimationError("within-class covariance is zero or non-finite")
    keep = evals > RANK_TOL * top
    if not keep.all():
        # one lost rank is expected for standardized data; only more is news
        unexpected = (~keep).sum() > 1 and not _rank_warned
        log = logger.warning if unexpected else logger.debug
        _rank_warned = _rank_warned or unexpected
        log("within-class covariance has rank %d of %d; dropping null directions", keep.sum(), S.shape[0])
    return evecs[:, keep] / np.sqrt(evals[keep])


def fit_lda(X, y, fit_classes=None) -> LDAModel:
    """Fit discriminant directions and class statistics.

    Directions solve ``S_B v = λ S_W v`` using only rows whose label is in
    ``fit_classes`` (all classes by default); class means and the pooled
    within-class covariance are then computed in the projected space from
    every row, so a class left out of the direction fit still gets a mean.
    Priors are uniform.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ArgumentError(f"data shape {X.shape} does not match {y.shape[0]} labels")
    classes = tuple(np.unique(y).tolist())
    if len(classes) < 2:
        raise EstimationError("LDA needs at least 2 classes")

    if fit_classes is None:
        Xf, yf, fclasses = X, y, classes
    else:
        fclasses = tuple(sorted(set(fit_classes)))
        mask = np.isin(y, fclasses)
        Xf, yf = X[mask], y[mask]
        if len(fclasses) < 2:
            raise EstimationError("direction fit needs at least 2 classes")
    means_f, scatter, dof = _class_stats(Xf, yf, fclasses)
    if dof <= 0:
        raise EstimationError("no within-class degrees of freedom")
    Sw = scatter / dof
    counts = np.array([(yf == c).sum() for c in fclasses], dtype=float)
    centred = means_f - Xf.mean(axis=0)
    Sb = (centred * counts[:, None]).T @ centred / (len(fclasses) - 1)

    # symmetric whitening of S_W, then an ordinary symmetric eigensolve
    Wh = _whitener(Sw)
    M = Wh.T @ Sb @ Wh
    M = 0.5 * (M + M.T)
    evals, evecs = np.linalg.eigh(M)
    order = np.argsort(evals)[::-1]
    K = min(len(fclasses) - 1, Wh.shape[1])
    order = order[:K]
    V = Wh @ evecs[:, order]
    # deterministic sign: largest-magnitude component positive
    signs = np.sign(V[np.argmax(np.abs(V), axis=0), np.arange(K)])
    signs[signs == 0] = 1.0
    V = V * signs

    Z = X @ V
    means, wscatter, wdof = _class_stats(Z, y, classes)
    if wdof <= 0:
        raise EstimationError("no within-class degrees of freedom in projected space")
    W = wscatter / wdof
    W = 0.5 * (W + W.T)
    return LDAModel(
        vectors=V,
        ratios=np.maximum(evals[order], 0.0),
        classes=classes,
        means=means,
        within_cov=W,
        log_priors=np.full(len(classes), -np.log(len(classes))),
    )


def _check_nvec(model: LDAModel, n_vec: int) -> None:
    if not 1 <= n_vec <= model.n_vectors:
        raise ArgumentError(f"n_vec={n_vec} outside 1..{model.n_vectors}")


def log_likelihoods(model: LDAModel, X, n_vec: int) -> np.ndarray:
    """log p(x | C_i) for every row of ``X`` and every class; shape (n, N_c)."""
    _check_nvec(model, n_vec)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Z = X @ model.vectors[:, :n_vec]
    W = model.within_cov[:n_vec, :n_vec]
    try:
        L = np.linalg.cholesky(W)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(f"projected within-class covariance singular for n_vec={n_vec}") from exc
    logdet = 2.0 * np.log(np.diag(L)).sum()
    diff = Z[:, None, :] - model.means[None, :, :n_vec]  # (n, N_c, k)
    sol = np.linalg.solve(L, diff.reshape(-1, n_vec).T).T.reshape(diff.shape)
    maha = np.einsum("nck,nck->nc", sol, sol)
    return -0.5 * (n_vec * _LOG2PI + logdet + maha)


def log_likelihood(model: LDAModel, x, i: int, n_vec: int) -> float:
    """Gaussian log-density of ``x`` under class index ``i`` in the first ``n_vec`` directions."""
    return float(log_likelihoods(model, x, n_vec)[0, i])


def posterior_from_loglik(ll: np.ndarray, log_priors: np.ndarray) -> np.ndarray:
    a = ll + log_priors
    a = a - a.max(axis=-1, keepdims=True)
    e = np.exp(a)
    return e / e.sum(axis=-1, keepdims=True)


def posterior(model: LDAModel, x, n_vec: int) -> np.ndarray:
    """Class posterior probabilities; a vector for one point, (n, N_c) for many."""
    X = np.asarray(x, dtype=np.float64)
    post = posterior_from_loglik(log_likelihoods(model, X, n_vec), model.log_priors)
    return post[0] if X.ndim == 1 else post
