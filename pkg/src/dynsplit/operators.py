"""Discretized building blocks on the interval (0, beta).

The interior state lives on the uniform grid ``x_j = j * beta / nx`` for
``j = 1, ..., nx - 1``; the two endpoint values are carried separately as a
length-2 boundary vector ``v = (v_left, v_right)``.

All functions take and return plain ``numpy`` arrays and never modify their
inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ContractError, UnsupportedDimensionError

BOUNDARY_DIM = 2


@dataclass(frozen=True)
class DomainParams:
    """Diffusivity ``c``, interval length ``beta`` and number of grid divisions ``nx``."""

    c: float
    beta: float
    nx: int

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ContractError(f"c must be positive and finite, got {self.c!r}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ContractError(f"beta must be positive and finite, got {self.beta!r}")
        nx = self.nx
        if isinstance(nx, bool) or not isinstance(nx, (int, np.integer)):
            raise ContractError(f"nx must be an integer, got {nx!r}")
        if nx < 4 or nx & (nx - 1):
            raise ContractError(f"nx must be a power of two >= 4, got {nx}")

    @property
    def n_interior(self) -> int:
        return self.nx - 1

    @cached_property
    def x(self) -> np.ndarray:
        """Interior grid nodes."""
        x = np.arange(1, self.nx) * (self.beta / self.nx)
        x.flags.writeable = False
        return x

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Decay rates ``c (k pi / beta)^2`` of the sine modes k = 1..nx-1."""
        k = np.arange(1, self.nx)
        lam = self.c * (k * np.pi / self.beta) ** 2
        lam.flags.writeable = False
        return lam


def _as_grid(g, p: DomainParams, name="g") -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (p.n_interior,):
        raise ContractError(
            f"{name} must have shape ({p.n_interior},) for nx={p.nx}, got {g.shape}"
        )
    return g


def _as_boundary(v, name="v") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ContractError(f"{name} must be a vector, got shape {v.shape}")
    return v


def _as_matrix(B, name="B") -> np.ndarray:
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ContractError(f"{name} must be a square matrix, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise ContractError(f"{name} has non-finite entries")
    return B


def _odd_sine_sums(a: np.ndarray) -> np.ndarray:
    # sum_{j=1}^{n-1} a_j sin(k j pi / n) for k = 1..n-1, via a real FFT of the
    # odd extension (0, a, 0, -reversed(a)) of length 2n.
    n = a.shape[-1] + 1
    ext = np.zeros(2 * n)
    ext[1:n] = a
    ext[n + 1:] = -a[::-1]
    return -0.5 * np.fft.rfft(ext).imag[1:n]


def dst_forward(g, p: DomainParams) -> np.ndarray:
    """Sine coefficients of the grid function ``g``.

    ``coeffs[k-1] = (2/nx) * sum_j g[j-1] * sin(k pi j / nx)``, so that
    ``g`` is recovered as the expansion ``sum_k coeffs[k-1] sin(k pi x / beta)``
    sampled on the grid.
    """
    g = _as_grid(g, p)
    return (2.0 / p.nx) * _odd_sine_sums(g)


def dst_inverse(s, p: DomainParams) -> np.ndarray:
    """Evaluate the sine expansion with coefficients ``s`` on the interior grid."""
    s = _as_grid(s, p, name="s")
    return _odd_sine_sums(s)


def heat_propagate(g, t: float, p: DomainParams) -> np.ndarray:
    """Apply the Dirichlet heat semigroup ``T0(t)`` to the grid function ``g``."""
    if not t >= 0:
        raise ContractError(f"heat_propagate needs t >= 0, got {t!r}")
    coeffs = dst_forward(g, p)
    return dst_inverse(coeffs * np.exp(-p.eigenvalues * t), p)


# Scaled argument norm bound and Taylor degree: 2**31 / 31! ~ 3e-25.  A
# larger bound means fewer squarings, which keeps the relative error near
# 1e-14 even for ill-conditioned arguments of norm ~100.
_EXPM_THETA = 2.0
_EXPM_DEGREE = 30


def matrix_exp(B, t: float = 1.0) -> np.ndarray:
    """``exp(t B)`` by scaling and squaring around a truncated Taylor series.

    The mean eigenvalue ``mu = tr(tB)/d`` is split off first
    (``exp(tB) = e^mu exp(tB - mu I)``) to shrink the argument norm.
    """
    B = _as_matrix(B)
    if not math.isfinite(t):
        raise ContractError(f"t must be finite, got {t!r}")
    A = t * B
    d = A.shape[0]
    if d == 0:
        return np.eye(0)
    mu = np.trace(A) / d
    A = A - mu * np.eye(d)
    norm = np.abs(A).sum(axis=0).max()
    squarings = 0
    if norm > _EXPM_THETA:
        squarings = int(math.ceil(math.log2(norm / _EXPM_THETA)))
    A = A / 2.0**squarings

    # Horner evaluation of sum_{m<=N} A^m / m!
    E = np.eye(d)
    for m in range(_EXPM_DEGREE, 0, -1):
        E = np.eye(d) + (A @ E) / m
    for _ in range(squarings):
        E = E @ E
    return math.exp(mu) * E


def boundary_propagate(v, t: float, B) -> np.ndarray:
    """Apply ``S(t) = exp(t B)`` to the boundary vector ``v``."""
    v = _as_boundary(v)
    B = _as_matrix(B)
    if B.shape[0] != v.shape[0]:
        raise ContractError(f"B is {B.shape} but v has length {v.shape[0]}")
    return matrix_exp(B, t) @ v


def apply_boundary_matrix(v, B) -> np.ndarray:
    """``B v``."""
    v = _as_boundary(v)
    B = _as_matrix(B)
    if B.shape[0] != v.shape[0]:
        raise ContractError(f"B is {B.shape} but v has length {v.shape[0]}")
    return B @ v


def dirichlet_lift(v, p: DomainParams) -> np.ndarray:
    """Affine interpolant on the interior grid with endpoint values ``v = (a, b)``.

    This is the harmonic extension ``D0(a, b)(r) = b r / beta + a (beta - r) / beta``.
    """
    v = _as_boundary(v)
    if v.shape[0] != BOUNDARY_DIM:
        raise UnsupportedDimensionError(
            f"the Dirichlet lift is only defined for d=2, got d={v.shape[0]}"
        )
    x = p.x
    return v[1] * x / p.beta + v[0] * (p.beta - x) / p.beta
