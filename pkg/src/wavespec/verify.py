"""Cross-validated log-likelihood scores and posterior attribution of ensembles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DegenerateInputError, EstimationError, ValidationError
from .lda import fit_lda, log_likelihoods, posterior_from_loglik

DEFAULT_NB = 50


@dataclass(frozen=True, eq=False)
class ClassedDataset:
    """Ensemble members ``members[i, j]`` and one observation ``observations[i]`` per class."""

    members: np.ndarray  # (N_c, N_e, p)
    observations: np.ndarray  # (N_c, p)
    labels: tuple = ()
    dates: tuple = ()
    types: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.members, dtype=np.float64)
        o = np.asarray(self.observations, dtype=np.float64)
        if m.ndim != 3:
            raise ValidationError(f"members must be (classes, members, features), got {m.shape}")
        n_c, n_e, p = m.shape
        if o.shape != (n_c, p):
            raise ValidationError(f"observations shape {o.shape} != {(n_c, p)}")
        if n_c < 2 or n_e < 2:
            raise ValidationError(f"need >= 2 classes and >= 2 members, got {n_c} x {n_e}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(o))):
            raise ValidationError("dataset contains non-finite values")
        object.__setattr__(self, "members", m)
        object.__setattr__(self, "observations", o)
        labels = tuple(self.labels) or tuple(f"C{i + 1}" for i in range(n_c))
        if len(labels) != n_c:
            raise ValidationError(f"{len(labels)} labels for {n_c} classes")
        object.__setattr__(self, "labels", labels)

    @property
    def n_classes(self) -> int:
        return self.members.shape[0]

    @property
    def n_members(self) -> int:
        return self.members.shape[1]

    @property
    def n_features(self) -> int:
        return self.members.shape[2]


@dataclass(frozen=True)
class Scores:
    n_vec: int
    s_ref: float
    s_perf: np.ndarray  # (N_b,)
    s_obs: float
    skill_perf: np.ndarray  # (N_b,)
    skill_obs: float


@dataclass(frozen=True, eq=False)
class VerificationReport:
    """Cross-validation tables.

    ``loglik_members[b, n, i, k] = log p_b(m_k^(j_b) | C_i)`` and
    ``loglik_obs[b, n, i, k] = log p_b(o_k | C_i)`` for subspace size
    ``nvecs[n]``; diagonals (i == k) give the perfect-forecast and
    observation terms.
    """

    nvecs: tuple[int, ...]
    holdout: np.ndarray  # (N_b, N_c)
    loglik_members: np.ndarray
    loglik_obs: np.ndarray
    seed: int
    scores: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.holdout.shape[0]

    def posteriors(self, n: int, which: str = "members") -> np.ndarray:
        """p_b(C_i | x_k) as (N_b, i, k); each column over i sums to one."""
        ll = self.loglik_members if which == "members" else self.loglik_obs
        table = ll[:, n]  # (N_b, i, k)
        n_c = table.shape[1]
        post = posterior_from_loglik(np.swapaxes(table, 1, 2), np.full(n_c, -np.log(n_c)))
        return np.swapaxes(post, 1, 2)


@dataclass(frozen=True, eq=False)
class AttributionResult:
    """Posterior matrices ``p_b(C_i | x_k)`` averaged over samples, per subspace size.

    ``members[n]`` / ``observations[n]`` are N_c x N_c (rows i, columns k);
    ``correct_members[b, n]`` is Σ_i p_b(C_i | m_i^(j_b)) / N_c.
    """

    nvecs: tuple[int, ...]
    leave_class_out: bool
    members: np.ndarray  # (n_nvec, N_c, N_c)
    observations: np.ndarray
    correct_members: np.ndarray  # (N_b, n_nvec)
    correct_obs: np.ndarray

    def mean_correct(self, which: str = "members") -> np.ndarray:
        arr = self.correct_members if which == "members" else self.correct_obs
        return arr.mean(axis=0)


def holdout_indices(n_samples: int, n_classes: int, n_members: int, seed: int) -> np.ndarray:
    """One uniform member index per class per sample, from per-sample PCG64 substreams."""
    streams = np.random.SeedSequence(seed).spawn(n_samples)
    return np.stack(
        [np.random.Generator(np.random.PCG64(s)).integers(0, n_members, size=n_classes) for s in streams]
    )


def _training_set(data: ClassedDataset, held: np.ndarray):
    n_c, n_e, _ = data.members.shape
    keep = np.ones((n_c, n_e), dtype=bool)
    keep[np.arange(n_c), held] = False
    X = data.members[keep]
    y = np.repeat(np.arange(n_c), n_e - 1)
    return X, y


def _check_nvecs(nvecs, limit: int) -> tuple[int, ...]:
    nvecs = tuple(sorted(set(int(n) for n in nvecs)))
    if not nvecs:
        raise ArgumentError("no subspace sizes requested")
    bad = [n for n in nvecs if not 1 <= n <= limit]
    if bad:
        raise ArgumentError(f"subspace sizes {bad} outside 1..{limit}")
    return nvecs


def max_nvec(data: ClassedDataset, leave_class_out: bool = False) -> int:
    return min(data.n_classes - 1 - int(leave_class_out), data.n_features)


def cross_validate(data: ClassedDataset, n_samples: int = DEFAULT_NB, nvecs=None, seed: int = 0) -> VerificationReport:
    if data.n_members < 3:
        raise ValidationError("cross-validation needs at least 3 members per class")
    if n_samples < 1:
        raise ArgumentError("need at least one cross-validation sample")
    nvecs = _check_nvecs(nvecs or range(1, max_nvec(data) + 1), max_nvec(data))
    n_c = data.n_classes
    held = holdout_indices(n_samples, n_c, data.n_members, seed)
    ll_m = np.empty((n_samples, len(nvecs), n_c, n_c))
    ll_o = np.empty_like(ll_m)
    for b in range(n_samples):
        X, y = _training_set(data, held[b])
        try:
            model = fit_lda(X, y)
        except EstimationError as exc:
            raise EstimationError(f"sample b={b}: {exc}") from exc
        test = data.members[np.arange(n_c), held[b]]
        for n, k in enumerate(nvecs):
            try:
                ll_m[b, n] = log_likelihoods(model, test, k).T
                ll_o[b, n] = log_likelihoods(model, data.observations, k).T
            except EstimationError as exc:
                raise EstimationError(f"sample b={b}, n_vec={k}: {exc}") from exc
    report = VerificationReport(nvecs=nvecs, holdout=held, loglik_members=ll_m, loglik_obs=ll_o, seed=seed)
    for n, k in enumerate(nvecs):
        report.scores[k] = scores(ll_m[:, n], ll_o[:, n], n_vec=k)
    return report


def scores(loglik_members, loglik_obs, n_vec: int = 0) -> Scores:
    """Reference, perfect-forecast and observation log scores plus skills.

    ``loglik_members[b, i, k] = log p_b(m_k | C_i)``; ``loglik_obs`` is
    either the same shape (only the diagonal is used) or ``[b, i]`` with
    ``log p_b(o_i | C_i)``.
    """
    lm = np.asarray(loglik_members, dtype=np.float64)
    lo = np.asarray(loglik_obs, dtype=np.float64)
    if lm.ndim == 2:
        lm = lm[None]
    n_b, n_c, _ = lm.shape
    diag = np.arange(n_c)
    if lo.ndim == 3 or (lo.ndim == 2 and n_b == 1 and lo.shape == (n_c, n_c)):
        lo = lo.reshape(n_b, n_c, n_c)[:, diag, diag]
    lo = lo.reshape(n_b, n_c)
    off = ~np.eye(n_c, dtype=bool)
    s_ref = lm[:, off].sum() / (n_c * (n_c - 1) * n_b)
    s_perf = lm[:, diag, diag].sum(axis=1) / n_c
    s_obs = lo.sum() / (n_c * n_b)
    if not np.all(np.isfinite([s_ref, s_obs, *s_perf])):
        raise EstimationError("non-finite score")
    if s_ref == 0.0:
        raise DegenerateInputError("reference score is zero; skill undefined")
    return Scores(
        n_vec=n_vec,
        s_ref=float(s_ref),
        s_perf=s_perf,
        s_obs=float(s_obs),
        skill_perf=1.0 - s_perf / s_ref,
        skill_obs=float(1.0 - s_obs / s_ref),
    )


def attribution(
    data: ClassedDataset,
    n_samples: int = DEFAULT_NB,
    nvecs=None,
    seed: int = 0,
    leave_class_out: bool = False,
) -> AttributionResult:
    """Posterior attribution of held-out members and observations.

    With ``leave_class_out`` the directions used to score class i's data are
    fitted without class i; class means and the pooled covariance are then
    recomputed for all classes in that subspace.  Holdout draws match
    :func:`cross_validate` for the same seed.
    """
    if data.n_members < 3:
        raise ValidationError("cross-validation needs at least 3 members per class")
    limit = max_nvec(data, leave_class_out)
    if limit < 1:
        raise ArgumentError("too few classes for leave-class-out attribution")
    nvecs = _check_nvecs(nvecs or range(1, limit + 1), limit)
    n_c = data.n_classes
    held = holdout_indices(n_samples, n_c, data.n_members, seed)
    post_m = np.empty((n_samples, len(nvecs), n_c, n_c))  # [b, n, i, k]
    post_o = np.empty_like(post_m)
    for b in range(n_samples):
        X, y = _training_set(data, held[b])
        test = data.members[np.arange(n_c), held[b]]
        models = (
            [fit_lda(X, y, fit_classes=[c for c in range(n_c) if c != k]) for k in range(n_c)]
            if leave_class_out
            else [fit_lda(X, y)]
        )
        for n, nv in enumerate(nvecs):
            for k in range(n_c):
                model = models[k] if leave_class_out else models[0]
                try:
                    pm = posterior_from_loglik(log_likelihoods(model, test[k], nv), model.log_priors)
                    po = posterior_from_loglik(log_likelihoods(model, data.observations[k], nv), model.log_priors)
                except EstimationError as exc:
                    raise EstimationError(f"sample b={b}, n_vec={nv}, class {k}: {exc}") from exc
                post_m[b, n, :, k] = pm[0]
                post_o[b, n, :, k] = po[0]
    diag = np.arange(n_c)
    return AttributionResult(
        nvecs=nvecs,
        leave_class_out=leave_class_out,
        members=post_m.mean(axis=0),
        observations=post_o.mean(axis=0),
        correct_members=post_m[:, :, diag, diag].mean(axis=2),
        correct_obs=post_o[:, :, diag, diag].mean(axis=2),
    )
