"""Exact and reference solutions, error measurement and order estimation."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractError, DivisionDomainError, FitError
from .operators import (
    DomainParams,
    apply_boundary_matrix,
    boundary_propagate,
    dirichlet_lift,
    heat_propagate,
)
from .splitting import CoupledState, Problem, Scheme, apply_Vn, run_final

# -- closed-form solutions -----------------------------------------------------


def exact_solution_example1(t: float, p: DomainParams) -> CoupledState:
    """``u(t, x) = exp(-t/4) cos(x/2) + exp(t) sinh(x)`` on (0, pi)."""
    if not (math.isclose(p.beta, math.pi, rel_tol=1e-14) and p.c == 1.0):
        raise ConfigurationError(
            f"example 1 lives on (0, pi) with c = 1, got beta={p.beta}, c={p.c}"
        )
    if not t >= 0:
        raise ContractError(f"t must be nonnegative, got {t!r}")
    x = p.x
    u = np.exp(-t / 4) * np.cos(x / 2) + np.exp(t) * np.sinh(x)
    v = np.array([np.exp(-t / 4), np.exp(t) * np.sinh(np.pi)])
    return CoupledState(u, v)


def exact_boundary_example2(t: float, c3: float, c4: float) -> np.ndarray:
    """Harmonic-oscillator boundary values starting from ``(1, -c4)``."""
    if not c3 > 0:
        raise ConfigurationError(f"c3 must be positive, got {c3!r}")
    r = math.sqrt(c3)
    return np.array([
        math.cos(r * t) - (c4 / r) * math.sin(r * t),
        -r * math.sin(r * t) - c4 * math.cos(r * t),
    ])


# -- experiment description ----------------------------------------------------


@dataclass(frozen=True)
class Exact:
    """Compare against ``solution(t_max, params)``."""

    solution: Callable[[float, DomainParams], CoupledState] = exact_solution_example1


@dataclass(frozen=True)
class FineRun:
    """Compare against the same scheme run with ``nt_fine`` steps."""

    nt_fine: int


def steps_for(tau: float, t_max: float) -> int:
    nt = round(t_max / tau)
    if nt < 1 or not math.isclose(nt * tau, t_max, rel_tol=1e-12):
        raise ConfigurationError(f"tau={tau!r} does not divide t_max={t_max!r}")
    return nt


def dyadic_taus(t_max: float, k_min: int, k_max: int) -> list[float]:
    """``t_max * 2**-k`` for ``k = k_min..k_max`` (coarse to fine)."""
    if k_min > k_max or k_min < 0:
        raise ConfigurationError(f"bad dyadic range {k_min}..{k_max}")
    return [t_max * 2.0**-k for k in range(k_min, k_max + 1)]


@dataclass(frozen=True)
class ExperimentSpec:
    problem: Problem
    scheme: Scheme
    tau_list: Sequence[float]
    reference: Exact | FineRun

    def __post_init__(self):
        taus = [float(t) for t in self.tau_list]
        if not taus or any(not t > 0 for t in taus):
            raise ConfigurationError("tau_list must contain positive step sizes")
        counts = [steps_for(t, self.problem.t_max) for t in taus]
        object.__setattr__(self, "tau_list", tuple(taus))
        if isinstance(self.reference, FineRun):
            if self.reference.nt_fine <= max(counts):
                raise ConfigurationError(
                    f"nt_fine={self.reference.nt_fine} must exceed every coarse step "
                    f"count (max {max(counts)})"
                )

    @property
    def step_counts(self) -> list[int]:
        return [steps_for(t, self.problem.t_max) for t in self.tau_list]


def reference_solution(spec: ExperimentSpec) -> CoupledState:
    ref = spec.reference
    prob = spec.problem
    if isinstance(ref, Exact):
        return ref.solution(prob.t_max, prob.params)
    if isinstance(ref, FineRun):
        return run_final(prob, spec.scheme, ref.nt_fine)
    raise ConfigurationError(f"unknown reference mode {ref!r}")


def relative_error(numeric: CoupledState, reference: CoupledState) -> float:
    """Euclidean norm of the stacked difference ``(u, v)`` relative to the reference."""
    a = numeric.as_vector()
    b = reference.as_vector()
    if a.shape != b.shape:
        raise ContractError(f"state sizes differ: {a.shape} vs {b.shape}")
    denom = np.linalg.norm(b)
    if denom == 0:
        raise DivisionDomainError("reference state has zero norm")
    return float(np.linalg.norm(a - b) / denom)


# -- convolution oracle --------------------------------------------------------


def simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def convolution_oracle(t: float, y, n_quad: int, B, p: DomainParams) -> np.ndarray:
    """Composite Simpson approximation of ``int_0^t T0(t-s) D0 S(s) B y ds``."""
    if n_quad < 2 or n_quad % 2:
        raise ContractError(f"n_quad must be even and >= 2, got {n_quad}")
    if not t >= 0:
        raise ContractError(f"t must be nonnegative, got {t!r}")
    out = np.zeros(p.n_interior)
    if t == 0:
        return out
    By = apply_boundary_matrix(y, B)
    nodes = np.linspace(0.0, t, n_quad + 1)
    weights = simpson_weights(n_quad, t / n_quad)
    for s, wt in zip(nodes, weights):
        integrand = dirichlet_lift(boundary_propagate(By, s, B), p)
        out += wt * heat_propagate(integrand, t - s, p)
    return out


def vn_rate_check(scheme: Scheme, t: float, y, n_list: Sequence[int], B, p: DomainParams,
                  n_quad: int = 512) -> list[tuple[int, float]]:
    """Grid 2-norm of ``V_n(t/n) y + int_0^t T0(t-s) D0 S(s) B y ds`` for each n."""
    integral = convolution_oracle(t, y, n_quad, B, p)
    return [(n, float(np.linalg.norm(apply_Vn(scheme, n, t, y, B, p) + integral)))
            for n in n_list]


# -- order fitting -------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    """``(tau, error)`` pairs (coarse to fine) and the fitted log-log line."""

    entries: tuple[tuple[float, float], ...]
    fit_window: tuple[int, int]
    slope: float
    intercept: float
    scheme: Scheme | None = field(default=None, compare=False)

    def in_window(self, i: int) -> bool:
        return self.fit_window[0] <= i <= self.fit_window[1]


def _check_window(window, n):
    lo, hi = window
    if not (0 <= lo <= hi < n):
        raise FitError(f"fit window {window} outside 0..{n - 1}")
    return lo, hi


def fit_order(entries: Sequence[tuple[float, float]], window=None) -> tuple[float, float]:
    """Least-squares line through ``(log tau, log error)`` over ``window`` (inclusive indices).

    Returns ``(slope, intercept)``; the slope is the observed order.
    """
    entries = list(entries)
    if window is None:
        window = (0, len(entries) - 1)
    lo, hi = _check_window(window, len(entries))
    sel = entries[lo:hi + 1]
    if len(sel) < 2:
        raise FitError(f"need at least 2 points to fit, window {window} has {len(sel)}")
    tau = np.array([e[0] for e in sel], dtype=float)
    err = np.array([e[1] for e in sel], dtype=float)
    if np.any(~np.isfinite(err)) or np.any(err <= 0) or np.any(tau <= 0):
        raise FitError("errors and step sizes in the fit window must be positive and finite")
    if np.unique(tau).size < 2:
        raise FitError("fit window needs at least two distinct step sizes")
    slope, intercept = np.polyfit(np.log(tau), np.log(err), 1)
    return float(slope), float(intercept)


def detect_plateau(entries: Sequence[tuple[float, float]], threshold: float = 0.2) -> tuple[int, int]:
    """Longest coarse-side window over which the error keeps decreasing.

    Each refinement ``tau_i -> tau_{i+1}`` must reduce ``log(error)`` by at
    least ``threshold * log(tau_i / tau_{i+1})``, i.e. the given fraction of
    what a first-order method gains.  The window stops at the last point
    that still satisfies this.  With fewer than 3 entries, or when even the
    first refinement fails, the full range is returned.
    """
    n = len(entries)
    full = (0, n - 1)
    if n < 3:
        return full
    last = 0
    for i in range(n - 1):
        (t0, e0), (t1, e1) = entries[i], entries[i + 1]
        if not (e0 > 0 and e1 > 0 and t0 > t1 > 0):
            break
        if math.log(e0) - math.log(e1) < threshold * math.log(t0 / t1):
            break
        last = i + 1
    if last < 1:
        return full
    return (0, last)


def split_window(entries: Sequence[tuple[float, float]], log_tau_split: float, side: str) -> tuple[int, int]:
    """Indices with ``ln tau`` above (``side='coarse'``) or below (``'fine'``) a threshold."""
    if side not in ("coarse", "fine"):
        raise ContractError(f"side must be 'coarse' or 'fine', got {side!r}")
    idx = [i for i, (tau, _) in enumerate(entries)
           if (math.log(tau) > log_tau_split if side == "coarse" else math.log(tau) < log_tau_split)]
    if not idx:
        raise FitError(f"no step sizes on the {side} side of ln(tau) = {log_tau_split}")
    return (idx[0], idx[-1])


def measure_errors(spec: ExperimentSpec) -> list[tuple[float, float]]:
    """Relative error at ``t_max`` for each step size of the sweep, coarse to fine."""
    ref = reference_solution(spec)
    pairs = []
    for tau, nt in sorted(zip(spec.tau_list, spec.step_counts), reverse=True):
        pairs.append((tau, relative_error(run_final(spec.problem, spec.scheme, nt), ref)))
    return pairs


def convergence_study(spec: ExperimentSpec, window=None, threshold: float = 0.2) -> ConvergenceReport:
    """Run the sweep and fit the observed order.

    Without an explicit ``window`` the fit uses :func:`detect_plateau`.
    """
    entries = measure_errors(spec)
    if window is None:
        window = detect_plateau(entries, threshold)
    window = _check_window(window, len(entries))
    slope, intercept = fit_order(entries, window)
    return ConvergenceReport(tuple(entries), window, slope, intercept, spec.scheme)
