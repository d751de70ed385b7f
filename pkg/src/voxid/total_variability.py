"""Low-rank total-variability model: the mean supervector is offset by
T @ w where w is a standard-normal latent factor per utterance. Training
is EM over a set of utterance statistics; extraction is the posterior
mean of w given one utterance's statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DimensionMismatch, NumericalFailure, RankTooLarge
from .speaker_models import BaumWelchStats, Ubm, build_supervector, variance_supervector


@dataclass(frozen=True)
class TotalVariabilityModel:
    m: np.ndarray         # (C*k,) UBM mean supervector
    sigma: np.ndarray     # (C*k,) UBM variances in supervector layout
    t_matrix: np.ndarray  # (C*k, R)
    num_components: int
    dim_k: int

    def __post_init__(self):
        for name in ("m", "sigma", "t_matrix"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        ck = self.num_components * self.dim_k
        if self.m.shape != (ck,) or self.sigma.shape != (ck,):
            raise DimensionMismatch("supervector layout mismatch")
        if self.t_matrix.ndim != 2 or self.t_matrix.shape[0] != ck:
            raise DimensionMismatch("t_matrix rows must equal C*k")
        if not (1 <= self.rank_R < ck):
            raise RankTooLarge(f"rank {self.rank_R} not in [1, {ck})")
        if np.any(self.sigma <= 0.0) or not np.all(np.isfinite(self.t_matrix)):
            raise DimensionMismatch("invalid sigma or t_matrix")

    @property
    def rank_R(self) -> int:
        return self.t_matrix.shape[1]


@dataclass(frozen=True)
class IVector:
    w: np.ndarray  # (R,)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise DimensionMismatch("i-vector must be a finite 1-D vector")
        object.__setattr__(self, "w", w)


def init_tv(ubm: Ubm, rank_R: int, rng_seed: int = 0) -> TotalVariabilityModel:
    """Seeded random initialization of the variability matrix."""
    m = build_supervector(ubm).values
    sigma = variance_supervector(ubm)
    ck = m.size
    if rank_R >= ck:
        raise RankTooLarge(f"rank {rank_R} >= supervector size {ck}")
    rng = np.random.default_rng(rng_seed)
    scale = 0.1 * float(np.mean(np.sqrt(sigma)))
    t = rng.standard_normal((ck, rank_R)) * scale
    return TotalVariabilityModel(
        m=m, sigma=sigma, t_matrix=t,
        num_components=ubm.gmm.num_components, dim_k=ubm.gmm.dim_k,
    )


def _expand_counts(n: np.ndarray, dim_k: int) -> np.ndarray:
    """Repeat each component's count across its k supervector rows."""
    return np.repeat(n, dim_k)


def _posterior(stats: BaumWelchStats, tv: TotalVariabilityModel):
    """Posterior precision (Cholesky factor) and mean of w for one utterance."""
    if stats.first.shape != (tv.num_components, tv.dim_k):
        raise DimensionMismatch("stats not dimensioned against this model")
    n_exp = _expand_counts(stats.zeroth, tv.dim_k)
    f_centered = stats.first.reshape(-1) - n_exp * tv.m

    t_over_sigma = tv.t_matrix / tv.sigma[:, None]
    precision = np.eye(tv.rank_R) + tv.t_matrix.T @ (t_over_sigma * n_exp[:, None])
    precision = 0.5 * (precision + precision.T)
    try:
        factor = cho_factor(precision, lower=True)
    except (LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"posterior precision not SPD: {exc}") from exc
    mean = cho_solve(factor, t_over_sigma.T @ f_centered)
    return factor, mean, f_centered


def extract_ivector(stats: BaumWelchStats, tv: TotalVariabilityModel) -> IVector:
    """Posterior-mean latent factor for one utterance's statistics."""
    _, mean, _ = _posterior(stats, tv)
    return IVector(w=mean)


def train_tv(stats_set, tv: TotalVariabilityModel, iterations: int = 10
             ) -> TotalVariabilityModel:
    """EM re-estimation of the variability matrix; m and sigma stay fixed.

    E-step accumulates, per component c, A_c = sum_u N_c(u) (L_u^-1 +
    w_u w_u^T) and B = sum_u F_centered(u) w_u^T; the M-step solves
    T_c A_c = B_c one component at a time.
    """
    stats_list = list(stats_set)
    if not stats_list:
        raise DimensionMismatch("empty stats collection")
    c, k, r = tv.num_components, tv.dim_k, tv.rank_R

    t = tv.t_matrix
    for _ in range(iterations):
        model = TotalVariabilityModel(
            m=tv.m, sigma=tv.sigma, t_matrix=t,
            num_components=c, dim_k=k,
        )
        a = np.zeros((c, r, r))
        b = np.zeros((c * k, r))
        for stats in stats_list:
            factor, w_mean, f_centered = _posterior(stats, model)
            cov = cho_solve(factor, np.eye(r))
            second_moment = cov + np.outer(w_mean, w_mean)
            a += stats.zeroth[:, None, None] * second_moment[None, :, :]
            b += np.outer(f_centered, w_mean)

        t = np.empty_like(t)
        for comp in range(c):
            rows = slice(comp * k, (comp + 1) * k)
            a_c = 0.5 * (a[comp] + a[comp].T)
            try:
                factor = cho_factor(a_c, lower=True)
                t[rows] = cho_solve(factor, b[rows].T).T
            except (LinAlgError, ValueError) as exc:
                raise NumericalFailure(
                    f"M-step solve failed for component {comp}: {exc}"
                ) from exc

    return TotalVariabilityModel(
        m=tv.m, sigma=tv.sigma, t_matrix=t, num_components=c, dim_k=k,
    )
