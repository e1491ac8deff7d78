"""Achievable sum-rate evaluation for full (already normalized) transceivers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LN2 = np.log(2.0)


class EvaluationError(RuntimeError):
    """The rate expression is undefined for these filters."""


@dataclass(frozen=True)
class LinkFilters:
    """Full per-user filters: f[u] is (N_t, N_s) with ||f[u]||_F^2 = P_t / U,
    w[u] is (N_r, N_s)."""

    f: list[np.ndarray]
    w: list[np.ndarray]


def snr_to_power(snr_db: float, sigma_n2: float) -> float:
    """Total transmit power for a system SNR (dB) at noise variance sigma_n2."""
    return sigma_n2 * 10.0 ** (snr_db / 10.0)


def _combiner_basis(w: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the combiner's numerically resolvable column space.

    The per-user rate is invariant under right-multiplication of W_u by any
    invertible matrix, so it can be evaluated in an orthonormal basis, where
    the noise covariance is a multiple of the identity no matter how ill
    conditioned the combiner is. Directions whose singular values sit at
    roundoff level relative to the largest carry no usable combining gain
    (they arise when nearly parallel steering vectors are selected) and are
    dropped; a combiner with no resolvable direction at all is rejected.
    """
    u, s, _ = np.linalg.svd(w, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        raise EvaluationError("combiner is zero")
    keep = s > max(w.shape) * np.finfo(float).eps * s[0]
    return u[:, keep]


def _logdet_hermitian(a: np.ndarray) -> float:
    """log det of a Hermitian positive definite matrix via Cholesky."""
    try:
        chol = np.linalg.cholesky(0.5 * (a + a.conj().T))
    except np.linalg.LinAlgError as exc:
        raise EvaluationError("covariance is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diagonal(chol).real)))


def sum_rate(
    channels: list[np.ndarray],
    filters: LinkFilters,
    sigma_n2: float,
    n_s: int,
) -> float:
    """Achievable sum rate in bit/s/Hz: sum_u log2 det(I + C_u^{-1} R_u).

    C_u collects noise plus cross-user interference after combining and R_u
    the intended signal, both carrying the 1/N_s symbol covariance factor.
    The two log-determinants are evaluated separately in the log domain and
    in an orthonormal basis of each combiner's resolvable column space,
    which leaves the rate unchanged for well-conditioned combiners but keeps
    C_u positive definite when combiner columns become nearly parallel.
    """
    n_users = len(channels)
    if not (len(filters.f) == len(filters.w) == n_users):
        raise ValueError("channels and filters must describe the same user set")

    f_stack = np.concatenate(filters.f, axis=1)  # (N_t, U * N_s)
    total = 0.0
    for u in range(n_users):
        q_u = _combiner_basis(filters.w[u])
        received = (q_u.conj().T @ channels[u] @ f_stack) / np.sqrt(n_s)
        blocks = received.reshape(q_u.shape[1], n_users, n_s)
        signal = blocks[:, u, :]
        r_u = signal @ signal.conj().T
        all_streams = np.einsum("iuk,luk->il", blocks, blocks.conj())
        c_u = sigma_n2 * np.eye(q_u.shape[1]) + (all_streams - r_u)
        # det(C+R) >= det(C) holds exactly; the max() only absorbs roundoff.
        total += max(0.0, _logdet_hermitian(c_u + r_u) - _logdet_hermitian(c_u))
    return total / _LN2
