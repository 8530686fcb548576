"""Splitting schemes for the heat equation with dynamical boundary conditions.

The coupled state ``(u, v)`` is moved to triangular coordinates
``(w, v) = (u - D0 v, v)`` in which the generator splits into three parts
with explicitly known flows:

* ``T1(t)``: ``w <- T0(t) w`` (homogeneous Dirichlet heat flow),
* ``T2(t)``: ``w <- w - t D0 B v`` (feeding the boundary dynamics in),
* ``T3(t)``: ``v <- exp(t B) v`` (boundary ODE).

A scheme composes these flows over one step of length ``tau``.
"""

from __future__ import annotations

import enum
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, UnsupportedSchemeError
from .operators import (
    BOUNDARY_DIM,
    DomainParams,
    _as_boundary,
    _as_grid,
    _as_matrix,
    apply_boundary_matrix,
    boundary_propagate,
    dirichlet_lift,
    dst_forward,
    dst_inverse,
    heat_propagate,
    matrix_exp,
)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class CoupledState:
    """Interior values ``u`` on the grid and boundary values ``v``."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u))
        object.__setattr__(self, "v", _frozen(self.v))
        if self.u.ndim != 1 or self.v.shape != (BOUNDARY_DIM,):
            raise ContractError(
                f"bad state shapes u={self.u.shape}, v={self.v.shape}"
            )

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])


@dataclass(frozen=True)
class TriangularState:
    """Zero-trace component ``w = u - D0 v`` together with ``v``."""

    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(self.w))
        object.__setattr__(self, "v", _frozen(self.v))
        if self.w.ndim != 1 or self.v.shape != (BOUNDARY_DIM,):
            raise ContractError(
                f"bad state shapes w={self.w.shape}, v={self.v.shape}"
            )

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.w, self.v])


class SchemeKind(str, enum.Enum):
    LIE = "lie"
    STRANG = "strang"
    WEIGHTED = "weighted"
    NAIVE_LIE = "naive"


@dataclass(frozen=True)
class Scheme:
    kind: SchemeKind
    theta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.kind is SchemeKind.WEIGHTED:
            if not 0.0 <= self.theta <= 1.0:
                raise ContractError(f"theta must lie in [0, 1], got {self.theta!r}")
            object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def weighted(cls, theta: float) -> "Scheme":
        return cls(SchemeKind.WEIGHTED, theta)

    @property
    def label(self) -> str:
        if self.kind is SchemeKind.WEIGHTED:
            return f"weighted({self.theta:g})"
        return self.kind.value


LIE = Scheme(SchemeKind.LIE)
STRANG = Scheme(SchemeKind.STRANG)
NAIVE_LIE = Scheme(SchemeKind.NAIVE_LIE)


@dataclass(frozen=True)
class Problem:
    """Heat equation on (0, beta) coupled to ``v' = B v`` on the boundary."""

    params: DomainParams
    B: np.ndarray
    u0: np.ndarray
    v0: np.ndarray
    t_max: float

    def __post_init__(self):
        B = _as_matrix(self.B)
        if B.shape != (BOUNDARY_DIM, BOUNDARY_DIM):
            raise ContractError(f"B must be 2x2, got {B.shape}")
        object.__setattr__(self, "B", _frozen(B))
        object.__setattr__(self, "u0", _frozen(_as_grid(self.u0, self.params, "u0")))
        v0 = _as_boundary(self.v0, "v0")
        if v0.shape != (BOUNDARY_DIM,):
            raise ContractError(f"v0 must have length 2, got {v0.shape}")
        object.__setattr__(self, "v0", _frozen(v0))
        if not (np.isfinite(self.u0).all() and np.isfinite(self.v0).all()):
            raise ContractError("initial data must be finite")
        if not (np.isfinite(self.t_max) and self.t_max > 0):
            raise ContractError(f"t_max must be positive, got {self.t_max!r}")

    @property
    def initial_state(self) -> CoupledState:
        return CoupledState(self.u0, self.v0)


# -- coordinate changes --------------------------------------------------------


def to_triangular(s: CoupledState, p: DomainParams) -> TriangularState:
    u = _as_grid(s.u, p, "u")
    return TriangularState(u - dirichlet_lift(s.v, p), s.v)


def from_triangular(s: TriangularState, p: DomainParams) -> CoupledState:
    w = _as_grid(s.w, p, "w")
    return CoupledState(w + dirichlet_lift(s.v, p), s.v)


# -- sub-flows -----------------------------------------------------------------


def apply_T1(s: TriangularState, t: float, p: DomainParams) -> TriangularState:
    return TriangularState(heat_propagate(s.w, t, p), s.v)


def apply_T2(s: TriangularState, t: float, B, p: DomainParams) -> TriangularState:
    shift = dirichlet_lift(apply_boundary_matrix(s.v, B), p)
    return TriangularState(_as_grid(s.w, p, "w") - t * shift, s.v)


def apply_T3(s: TriangularState, t: float, B) -> TriangularState:
    return TriangularState(s.w, boundary_propagate(s.v, t, B))


def _check_tau(tau):
    if not tau > 0:
        raise ContractError(f"time step must be positive, got {tau!r}")


def _lie(s, tau, B, p):
    return apply_T1(apply_T2(apply_T3(s, tau, B), tau, B, p), tau, p)


def _reverse_lie(s, tau, B, p):
    return apply_T3(apply_T2(apply_T1(s, tau, p), tau, B, p), tau, B)


def _strang(s, tau, B, p):
    s = apply_T1(s, tau / 2, p)
    s = apply_T3(s, tau / 2, B)
    s = apply_T2(s, tau, B, p)
    s = apply_T3(s, tau / 2, B)
    return apply_T1(s, tau / 2, p)


def step(scheme: Scheme, s: TriangularState, tau: float, B, p: DomainParams) -> TriangularState:
    """One step of ``scheme`` as the literal composition of the sub-flows.

    Operator products act right to left, so the Lie step ``T1 T2 T3`` applies
    the boundary flow first.  The weighted step is the convex combination of
    the Lie step and the reversed Lie step.
    """
    _check_tau(tau)
    kind = scheme.kind
    if kind is SchemeKind.LIE:
        return _lie(s, tau, B, p)
    if kind is SchemeKind.STRANG:
        return _strang(s, tau, B, p)
    if kind is SchemeKind.WEIGHTED:
        theta = scheme.theta
        a = _lie(s, tau, B, p)
        b = _reverse_lie(s, tau, B, p)
        return TriangularState(theta * a.w + (1 - theta) * b.w,
                               theta * a.v + (1 - theta) * b.v)
    if kind is SchemeKind.NAIVE_LIE:
        return to_triangular(step_naive(from_triangular(s, p), tau, B, p), p)
    raise UnsupportedSchemeError(f"unknown scheme {scheme!r}")


def coupling_block(scheme: Scheme, tau: float, y, B, p: DomainParams) -> np.ndarray:
    """The off-diagonal block ``V(tau)`` of a one-step operator applied to ``y``."""
    kind = scheme.kind
    if kind is SchemeKind.LIE:
        By = apply_boundary_matrix(boundary_propagate(y, tau, B), B)
        return -tau * heat_propagate(dirichlet_lift(By, p), tau, p)
    if kind is SchemeKind.STRANG:
        By = apply_boundary_matrix(boundary_propagate(y, tau / 2, B), B)
        return -tau * heat_propagate(dirichlet_lift(By, p), tau / 2, p)
    if kind is SchemeKind.WEIGHTED:
        theta = scheme.theta
        late = apply_boundary_matrix(boundary_propagate(y, tau, B), B)
        late = heat_propagate(dirichlet_lift(late, p), tau, p)
        early = dirichlet_lift(apply_boundary_matrix(y, B), p)
        return -tau * (theta * late + (1 - theta) * early)
    raise UnsupportedSchemeError(f"{scheme.label} has no closed-form coupling block")


def step_closed_form(scheme: Scheme, s: TriangularState, tau: float, B, p: DomainParams) -> TriangularState:
    """One step via the block form ``w <- T0(tau) w + V(tau) v``, ``v <- S(tau) v``."""
    _check_tau(tau)
    V = coupling_block(scheme, tau, s.v, B, p)
    return TriangularState(heat_propagate(s.w, tau, p) + V,
                           boundary_propagate(s.v, tau, B))


def step_naive(s: CoupledState, tau: float, B, p: DomainParams) -> CoupledState:
    """Boundary ODE first, then the heat equation with boundary data frozen at the new value.

    The interior solve starts from the unmodified ``u``; with constant
    boundary data the heat step is exact as ``T0(tau)(u - D0 v1) + D0 v1``.
    """
    _check_tau(tau)
    v1 = boundary_propagate(s.v, tau, B)
    lift = dirichlet_lift(v1, p)
    u1 = heat_propagate(_as_grid(s.u, p, "u") - lift, tau, p) + lift
    return CoupledState(u1, v1)


# -- trajectories --------------------------------------------------------------


def _check_nt(nt):
    if isinstance(nt, bool) or not isinstance(nt, (int, np.integer)) or nt < 1:
        raise ContractError(f"number of steps must be a positive integer, got {nt!r}")


def iterate(prob: Problem, scheme: Scheme, nt: int) -> Iterator[CoupledState]:
    """Yield the initial state followed by the ``nt`` stepped states."""
    _check_nt(nt)
    p, B = prob.params, prob.B
    tau = prob.t_max / nt
    state = prob.initial_state
    yield state
    if scheme.kind is SchemeKind.NAIVE_LIE:
        for _ in range(nt):
            state = step_naive(state, tau, B, p)
            yield state
        return
    tri = to_triangular(state, p)
    for _ in range(nt):
        tri = step(scheme, tri, tau, B, p)
        yield from_triangular(tri, p)


def run(prob: Problem, scheme: Scheme, nt: int) -> list[CoupledState]:
    """Full trajectory ``[u_0, u_1, ..., u_nt]`` with ``tau = t_max / nt``."""
    return list(iterate(prob, scheme, nt))


class _SpectralStepper:
    # The same sub-flows as above, acting on the sine coefficients of w.
    # T1 is then diagonal and the lift has two fixed spectra, so a step
    # costs O(nx) with no transforms.

    def __init__(self, p: DomainParams, B, tau: float):
        self.p = p
        self.B = np.asarray(B, dtype=float)
        self.tau = tau
        self.decay = np.exp(-p.eigenvalues * tau)
        self.half_decay = np.exp(-p.eigenvalues * (tau / 2))
        self.S = matrix_exp(self.B, tau)
        self.S_half = matrix_exp(self.B, tau / 2)
        self.lift_left = dst_forward(dirichlet_lift([1.0, 0.0], p), p)
        self.lift_right = dst_forward(dirichlet_lift([0.0, 1.0], p), p)

    def lift(self, a):
        return a[0] * self.lift_left + a[1] * self.lift_right

    def lie(self, wh, v):
        v = self.S @ v
        wh = wh - self.tau * self.lift(self.B @ v)
        return self.decay * wh, v

    def reverse_lie(self, wh, v):
        wh = self.decay * wh
        wh = wh - self.tau * self.lift(self.B @ v)
        return wh, self.S @ v

    def strang(self, wh, v):
        wh = self.half_decay * wh
        v = self.S_half @ v
        wh = wh - self.tau * self.lift(self.B @ v)
        v = self.S_half @ v
        return self.half_decay * wh, v

    def naive(self, wh, v):
        v1 = self.S @ v
        return self.decay * (wh + self.lift(v - v1)), v1


def run_final(prob: Problem, scheme: Scheme, nt: int) -> CoupledState:
    """Terminal state of :func:`run`, without storing the trajectory.

    Steps are taken in sine-coefficient space; the result agrees with
    ``run(prob, scheme, nt)[-1]`` up to transform round-off.
    """
    _check_nt(nt)
    p = prob.params
    stepper = _SpectralStepper(p, prob.B, prob.t_max / nt)
    wh = dst_forward(prob.u0 - dirichlet_lift(prob.v0, p), p)
    v = np.array(prob.v0, dtype=float)
    kind = scheme.kind
    if kind is SchemeKind.WEIGHTED:
        theta = scheme.theta
        for _ in range(nt):
            wa, va = stepper.lie(wh, v)
            wb, vb = stepper.reverse_lie(wh, v)
            wh = theta * wa + (1 - theta) * wb
            v = theta * va + (1 - theta) * vb
    else:
        advance = {
            SchemeKind.LIE: stepper.lie,
            SchemeKind.STRANG: stepper.strang,
            SchemeKind.NAIVE_LIE: stepper.naive,
        }[kind]
        for _ in range(nt):
            wh, v = advance(wh, v)
    return from_triangular(TriangularState(dst_inverse(wh, p), v), p)


def apply_Vn(scheme: Scheme, n: int, t: float, y, B, p: DomainParams) -> np.ndarray:
    """``V_n(t/n) y = sum_{j<n} T0((n-1-j) tau) V(tau) S(j tau) y`` with ``tau = t/n``.

    This is the coupling block of the n-step operator.
    """
    if scheme.kind is SchemeKind.NAIVE_LIE:
        raise UnsupportedSchemeError("the naive scheme has no coupling-block form")
    _check_nt(n)
    if not t > 0:
        raise ContractError(f"t must be positive, got {t!r}")
    tau = t / n
    total = np.zeros(p.n_interior)
    for j in range(n):
        term = coupling_block(scheme, tau, boundary_propagate(y, j * tau, B), B, p)
        total += heat_propagate(term, (n - 1 - j) * tau, p)
    return total
