"""Outer-layer (slow-timescale) filter design.

Three strategies: covariance matrix eigenfilters from statistical CSI, and
two geometric selections (power-dominant and semi-orthogonal) that pick
steering vectors out of the array manifold using exact macroscopic CSI.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import CovariancePair

_HERMITIAN_RTOL = 1e-10

# A residual below this fraction of the path's own weighted norm (squared) is
# numerical noise left by the projections, i.e. the path is a duplicate of
# the selected span. Clustered manifolds are routinely ill conditioned as a
# whole when all paths are requested, and the selection must still complete
# there, so only genuinely null residuals abort it.
_SPS_DEGENERATE_RTOL = 1e-24


class RankDeficiencyError(RuntimeError):
    """Semi-orthogonal selection ran out of linearly independent paths."""


@dataclass(frozen=True)
class OuterFilters:
    """Per-user outer filter pair: f_o is (N_t, M_t), w_o is (N_r, M_r)."""

    f_o: np.ndarray
    w_o: np.ndarray
    method: str


def _top_eigenvectors(cov: np.ndarray, m: int) -> np.ndarray:
    if m > cov.shape[0]:
        raise ValueError(f"cannot extract {m} eigenvectors from a {cov.shape[0]}-dim covariance")
    hermitian_gap = np.linalg.norm(cov - cov.conj().T)
    if hermitian_gap > _HERMITIAN_RTOL * max(np.linalg.norm(cov), 1e-300):
        raise ValueError("covariance matrix is not Hermitian")
    _, vecs = np.linalg.eigh(cov)  # eigenvalues ascending
    return vecs[:, ::-1][:, :m]


def cme(cov: CovariancePair, m_t: int, m_r: int) -> OuterFilters:
    """Covariance matrix eigenfilter: dominant eigenvectors of each covariance.

    f_o holds the m_t leading eigenvectors of the uplink covariance and w_o
    the m_r leading eigenvectors of the downlink covariance, in descending
    eigenvalue order. Columns are orthonormal.
    """
    return OuterFilters(
        f_o=_top_eigenvectors(cov.c_ul, m_t),
        w_o=_top_eigenvectors(cov.c_dl, m_r),
        method="cme",
    )


def pps_indices(powers: np.ndarray, m: int) -> np.ndarray:
    """Indices of the m strongest paths, descending power, ties to lowest index."""
    powers = np.asarray(powers, dtype=float)
    if m > powers.shape[0]:
        raise ValueError(f"requested {m} paths but only {powers.shape[0]} available")
    order = np.argsort(-powers, kind="stable")
    return order[:m]


def pps(manifold: np.ndarray, powers: np.ndarray, m: int) -> np.ndarray:
    """Power-dominant path selection: manifold columns of the m strongest paths."""
    return manifold[:, pps_indices(powers, m)]


def sps_indices(manifold: np.ndarray, powers: np.ndarray, m: int) -> np.ndarray:
    """Greedy semi-orthogonal path selection.

    At step i every remaining power-weighted steering vector is projected
    onto the orthogonal complement of the directions picked so far, and the
    path with the largest residual norm wins. The previously selected
    residuals are mutually orthogonal, so subtracting their projections in a
    single pass implements the complement projection exactly.
    """
    powers = np.asarray(powers, dtype=float)
    n_paths = manifold.shape[1]
    if m > n_paths:
        raise ValueError(f"requested {m} paths but only {n_paths} available")

    weighted = manifold * powers[None, :]
    init_norms2 = np.sum(np.abs(weighted) ** 2, axis=0)

    selected: list[int] = []
    basis: list[np.ndarray] = []  # residuals g_(1..i-1) at their selection step
    remaining = np.ones(n_paths, dtype=bool)
    for _ in range(m):
        residual = weighted.copy()
        for g in basis:
            residual -= np.outer(g, (g.conj() @ weighted) / np.vdot(g, g).real)
        norms2 = np.sum(np.abs(residual) ** 2, axis=0)
        usable = remaining & (norms2 > _SPS_DEGENERATE_RTOL * init_norms2)
        if not np.any(usable):
            raise RankDeficiencyError(
                f"only {len(selected)} of {m} requested paths are linearly independent"
            )
        norms2[~usable] = -1.0
        pick = int(np.argmax(norms2))
        selected.append(pick)
        basis.append(residual[:, pick])
        remaining[pick] = False
    return np.asarray(selected, dtype=int)


def sps(manifold: np.ndarray, powers: np.ndarray, m: int) -> np.ndarray:
    """Semi-orthogonal path selection: manifold columns in selection order."""
    return manifold[:, sps_indices(manifold, powers, m)]


def path_outer_filters(
    a_t: np.ndarray,
    a_r: np.ndarray,
    powers: np.ndarray,
    m_t: int,
    m_r: int,
    method: str,
) -> OuterFilters:
    """Build both outer filters from partial CSI with ``pps`` or ``sps``."""
    select = {"pps": pps, "sps": sps}.get(method)
    if select is None:
        raise ValueError(f"unknown path-selection method {method!r}")
    return OuterFilters(
        f_o=select(a_t, powers, m_t),
        w_o=select(a_r, powers, m_r),
        method=method,
    )
