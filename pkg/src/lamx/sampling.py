"""Seeded random streams, Gaussian draws and covariance square roots.

Every stream is a Philox (counter-based) generator keyed by a
:class:`numpy.random.SeedSequence`.  A tuple ``key`` selects an independent
child stream of the same master seed, so a simulation can address the draws
of replication ``(i, j)`` directly without consuming anything else.
"""

from __future__ import annotations

import numpy as np

from .errors import AssumptionError, InputError

EIG_FLOOR = 1e-12


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the child stream ``key`` of master ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def draw_xi(L: int, d: int, seed: int, *key: int, antithetic: bool = False) -> np.ndarray:
    """``L x d`` matrix of i.i.d. standard normals.

    With ``antithetic=True`` the second half of the rows is the negation of the
    first half (``L`` must then be even).
    """
    if L < 1 or d < 1:
        raise InputError(f"need L >= 1 and d >= 1, got L={L}, d={d}")
    rng = make_rng(seed, *key)
    if not antithetic:
        return rng.standard_normal((L, d))
    if L % 2:
        raise InputError("antithetic draws need an even L")
    half = rng.standard_normal((L // 2, d))
    return np.vstack([half, -half])


def check_covariance(sigma, name: str = "Sigma") -> np.ndarray:
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InputError(f"{name} must be a square matrix, got shape {sigma.shape}")
    if not np.all(np.isfinite(sigma)):
        raise InputError(f"{name} has non-finite entries")
    if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-12):
        raise InputError(f"{name} is not symmetric")
    return 0.5 * (sigma + sigma.T)


def sym_sqrt(sigma, name: str = "Sigma") -> np.ndarray:
    """Symmetric square root of a positive definite matrix via ``eigh``.

    Raises :class:`AssumptionError` when the smallest eigenvalue is at or
    below ``1e-12`` (the covariance must be invertible).
    """
    sigma = check_covariance(sigma, name)
    w, v = np.linalg.eigh(sigma)
    if w[0] <= EIG_FLOOR:
        raise AssumptionError(
            f"{name} not invertible (smallest eigenvalue {w[0]:.3g})",
            assumption="Assumption 3",
            eigenvalues=w,
        )
    return (v * np.sqrt(w)) @ v.T


def mvn_sample(mean, sigma, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` rows from N(mean, sigma) built as ``mean + xi @ sigma^{1/2}``."""
    mean = np.asarray(mean, dtype=float)
    root = sym_sqrt(sigma)
    if root.shape[0] != mean.shape[0]:
        raise InputError("mean and covariance dimensions differ")
    return mean + rng.standard_normal((n, mean.shape[0])) @ root
