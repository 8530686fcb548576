"""The two reference problems: exponential and oscillating boundary dynamics."""

from __future__ import annotations

import numpy as np

from .operators import DomainParams
from .splitting import Problem

EXAMPLE1_B = ((-0.25, 0.0), (0.0, 1.0))

# heat diffusivity, initial amplitude, oscillator stiffness, initial right value
EXAMPLE2_CONSTANTS = {"c1": 0.1, "c2": 9.0, "c3": 10.0, "c4": 0.1}


def example1_problem(nx: int = 32768, t_max: float = 2.0) -> Problem:
    """u_t = u_xx on (0, pi); left value decays at rate 1/4, right value grows at rate 1.

    Initial data ``cos(x/2) + sinh(x)`` is compatible with the boundary values.
    """
    p = DomainParams(c=1.0, beta=np.pi, nx=nx)
    u0 = np.cos(p.x / 2) + np.sinh(p.x)
    v0 = np.array([1.0, np.sinh(np.pi)])
    return Problem(p, np.array(EXAMPLE1_B), u0, v0, t_max)


def example2_problem(nx: int = 128, t_max: float = 2.0, c1=0.1, c2=9.0, c3=10.0, c4=0.1) -> Problem:
    """u_t = c1 u_xx on (0, 1) with a harmonic oscillator ``v' = [[0, 1], [-c3, 0]] v`` on the boundary.

    The Gaussian initial profile ``c2 exp(-c3 (x - 1/2)^2)`` does not match
    the boundary values ``(1, -c4)``.
    """
    p = DomainParams(c=c1, beta=1.0, nx=nx)
    u0 = c2 * np.exp(-c3 * (p.x - 0.5) ** 2)
    B = np.array([[0.0, 1.0], [-c3, 0.0]])
    return Problem(p, B, u0, np.array([1.0, -c4]), t_max)
