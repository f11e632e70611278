"""Two-mode Wigner function of truncated states and the phase-space route to P++.

Normalization: W integrates to 1 over both complex planes, so the vacuum has
W(0, 0) = (2/pi)^2. The quadrature x_phi corresponds to Re(alpha e^{-i phi}).
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import GridTooCoarse, TruncationTooCoarse
from .fock_oracle import TruncatedTwoModeState, displacement_matrix, simpson_weights


def displaced_parity(alpha: complex, dim: int, extra: int = 60, tol: float = 1e-10) -> np.ndarray:
    """``<m| D(alpha) Pi D(alpha)^dag |n>`` for ``m, n < dim``.

    The inner parity sum runs over ``dim + extra`` Fock states; the row-norm
    weight lost beyond that must stay below ``tol``.
    """
    big = dim + extra
    D = displacement_matrix(alpha, big)[:dim, :]
    leak = float(np.max(1.0 - (np.abs(D) ** 2).sum(axis=1)))
    if leak > tol:
        raise TruncationTooCoarse(f"|alpha| = {abs(alpha):.3g} too large for inner cutoff {big}")
    parity = (-1.0) ** np.arange(big)
    return (D * parity[None, :]) @ D.conj().T


def wigner_value(rho: TruncatedTwoModeState, alpha1: complex, alpha2: complex) -> float:
    d = rho.dim
    P1 = displaced_parity(alpha1, d)
    P2 = displaced_parity(alpha2, d)
    val = np.einsum("abcd,ca,db->", rho.matrix, P1, P2)
    return (2.0 / math.pi) ** 2 * float(val.real)


def wigner_kernels(alpha: np.ndarray, dim: int) -> np.ndarray:
    """``K[m, n, ...]`` with single-mode ``W(alpha) = sum_{n,m} rho[n, m] K[m, n](alpha)``.

    Laguerre form: for m >= n,
    K[m, n] = (2/pi) (-1)^n sqrt(n!/m!) (2 alpha)^(m-n) e^{-2|alpha|^2} L_n^(m-n)(4|alpha|^2),
    and K[n, m] = conj(K[m, n]).
    """
    alpha = np.asarray(alpha, dtype=complex)
    a2 = np.abs(alpha) ** 2
    gauss = np.exp(-2.0 * a2)
    K = np.zeros((dim, dim) + alpha.shape, dtype=complex)
    for n in range(dim):
        for m in range(n, dim):
            k = m - n
            pref = (2.0 / math.pi) * (-1.0) ** n * math.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
            val = pref * (2.0 * alpha) ** k * gauss * eval_genlaguerre(n, k, 4.0 * a2)
            K[m, n] = val
            if m != n:
                K[n, m] = val.conj()
    return K


def half_plane_integrals(phi: float, dim: int, extent: float, n_half: int = 120) -> np.ndarray:
    """``I[m, n] = int d^2 alpha F(alpha, phi) K[m, n](alpha)`` over the half plane
    Re(alpha e^{-i phi}) >= 0, on a Simpson grid of the rotated coordinates."""
    if n_half % 2:
        n_half += 1
    u = np.linspace(0.0, extent, n_half + 1)
    v = np.linspace(-extent, extent, 2 * n_half + 1)
    h = extent / n_half
    beta = u[:, None] + 1j * v[None, :]
    K = wigner_kernels(np.exp(1j * phi) * beta, dim)
    wu = simpson_weights(u.size, h)
    wv = simpson_weights(v.size, h)
    return np.einsum("mnuv,u,v->mn", K, wu, wv)


def p_plus_plus_via_wigner(
    rho: TruncatedTwoModeState,
    phi1: float,
    phi2: float,
    extent: Optional[float] = None,
    n_half: int = 120,
    tol: float = 5e-3,
) -> float:
    """Integral of W(alpha1, alpha2) F(alpha1, phi1) F(alpha2, phi2) over phase space.

    The indicator factorizes across modes, so the 4-D integral is the contraction of
    rho with two single-mode half-plane integrals of the Wigner kernels.
    """
    d = rho.dim
    if extent is None:
        nbar = max(rho.mean_photons(1), rho.mean_photons(2))
        extent = 7.0 * math.sqrt(2.0 * nbar + 1.0) / 2.0
    # normalization: two half planes make the full plane
    I1 = half_plane_integrals(phi1, d, extent, n_half)
    I1c = half_plane_integrals(phi1 + math.pi, d, extent, n_half)
    I2 = half_plane_integrals(phi2, d, extent, n_half)
    I2c = half_plane_integrals(phi2 + math.pi, d, extent, n_half)
    norm = np.einsum("abcd,ca,db->", rho.matrix, I1 + I1c, I2 + I2c).real
    if abs(norm - rho.trace()) > tol:
        raise GridTooCoarse(f"Wigner function integrates to {norm!r} on the phase-space grid")
    return float(np.einsum("abcd,ca,db->", rho.matrix, I1, I2).real)


def wigner_slice(
    rho: TruncatedTwoModeState, xs: np.ndarray, ys: np.ndarray, phase2: float = 0.0
) -> np.ndarray:
    """W(x, e^{i phase2} y) for real x, y on a grid (one phase-aligned 2-D slice)."""
    d = rho.dim
    P1 = [displaced_parity(complex(x), d) for x in xs]
    P2 = [displaced_parity(complex(y) * np.exp(1j * phase2), d) for y in ys]
    out = np.empty((len(xs), len(ys)))
    for i, p1 in enumerate(P1):
        half = np.einsum("abcd,ca->bd", rho.matrix, p1)
        for j, p2 in enumerate(P2):
            out[i, j] = np.einsum("bd,db->", half, p2).real
    return (2.0 / math.pi) ** 2 * out
