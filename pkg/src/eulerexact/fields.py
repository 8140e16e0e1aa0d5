"""Exact solution fields and derived quantities.

The 3D family transports the shape function along the similarity variable:

    rho = f(s) / (a^2 b)
    u1  = (a'/a) x - (xi/a^2) y
    u2  = (xi/a^2) x + (a'/a) y
    u3  = (b'/b) z

with the planar analogue dropping u3 and using eta.  Because the velocity is
linear in space its Laplacian vanishes identically, so the same fields solve
the viscous momentum equation for any viscosity; the curl is the uniform
vector (0, 0, 2 xi / a^2).

:class:`GeneralMassFamily` generalizes the swirl xi/a^2 to an arbitrary
function G(t) and the shape to an arbitrary nonnegative profile; that family
satisfies the continuity equation alone (momentum generally fails) and exists
to exercise the mass-residual check in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .emden import EmdenState2D, EmdenState3D
from .profiles import DensityProfile, PhysParams, similarity_eta, similarity_s

__all__ = [
    "FieldSample",
    "FieldSample2D",
    "Field3D",
    "Field2D",
    "GeneralMassFamily",
]


@dataclass(frozen=True)
class FieldSample:
    """Primitive variables at one 3D space-time point."""

    rho: float
    u1: float
    u2: float
    u3: float
    s: float
    pressure: float


@dataclass(frozen=True)
class FieldSample2D:
    """Primitive variables at one planar space-time point."""

    rho: float
    u1: float
    u2: float
    eta: float
    pressure: float


@dataclass(frozen=True)
class Field3D:
    """The exact 3D field frozen at one scale-factor snapshot."""

    params: PhysParams
    profile: DensityProfile
    state: EmdenState3D

    @classmethod
    def from_params(cls, params: PhysParams, state: EmdenState3D) -> "Field3D":
        return cls(params, DensityProfile(params), state)

    def at_state(self, state: EmdenState3D) -> "Field3D":
        """Same family, different snapshot."""
        return Field3D(self.params, self.profile, state)

    def eval(self, x: float, y: float, z: float) -> FieldSample:
        p, st = self.params, self.state
        a, b = st.a, st.b
        s = similarity_s(x, y, z, a, b)
        rho = self.profile.value(s) / (a * a * b)
        swirl = p.xi / (a * a)
        stretch = st.a_dot / a
        u1 = stretch * x - swirl * y
        u2 = swirl * x + stretch * y
        u3 = st.b_dot / b * z
        return FieldSample(rho, u1, u2, u3, s, p.K * rho**p.gamma)

    def eval_grid(self, x, y, z) -> dict[str, np.ndarray]:
        """Vectorized :meth:`eval` over broadcastable coordinate arrays."""
        p, st = self.params, self.state
        a, b = st.a, st.b
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        s = (x * x + y * y) / (a * a) + (z * z) / (b * b)
        rho = self.profile.value_many(s) / (a * a * b)
        swirl = p.xi / (a * a)
        stretch = st.a_dot / a
        zero = np.zeros(np.broadcast_shapes(x.shape, y.shape, z.shape))
        return {
            "rho": rho + zero,
            "u1": stretch * x - swirl * y + zero,
            "u2": swirl * x + stretch * y + zero,
            "u3": st.b_dot / b * z + zero,
            "s": s + zero,
            "p": p.K * rho**p.gamma + zero,
        }

    def vorticity(self, x: float, y: float, z: float) -> tuple[float, float, float]:
        """curl(u); uniform (0, 0, 2 xi / a^2) for this family."""
        a = self.state.a
        return (0.0, 0.0, 2.0 * self.params.xi / (a * a))

    def velocity_laplacian(self, x: float, y: float, z: float) -> tuple[float, float, float]:
        """Identically zero: u is linear in space."""
        return (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Field2D:
    """The exact planar field frozen at one scale-factor snapshot."""

    params: PhysParams
    profile: DensityProfile
    state: EmdenState2D

    @classmethod
    def from_params(cls, params: PhysParams, state: EmdenState2D) -> "Field2D":
        return cls(params, DensityProfile(params), state)

    def eval(self, x: float, y: float) -> FieldSample2D:
        p, st = self.params, self.state
        a = st.a
        eta = similarity_eta(x, y, a)
        rho = self.profile.value(eta) / (a * a)
        swirl = p.xi / (a * a)
        stretch = st.a_dot / a
        u1 = stretch * x - swirl * y
        u2 = swirl * x + stretch * y
        return FieldSample2D(rho, u1, u2, eta, p.K * rho**p.gamma)

    def eval_grid(self, x, y) -> dict[str, np.ndarray]:
        p, st = self.params, self.state
        a = st.a
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        eta = (x * x + y * y) / (a * a)
        rho = self.profile.value_many(eta) / (a * a)
        swirl = p.xi / (a * a)
        stretch = st.a_dot / a
        zero = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        return {
            "rho": rho + zero,
            "u1": stretch * x - swirl * y + zero,
            "u2": swirl * x + stretch * y + zero,
            "eta": eta + zero,
            "p": p.K * rho**p.gamma + zero,
        }

    def vorticity(self, x: float, y: float) -> float:
        """Scalar curl; uniform 2 xi / a^2."""
        a = self.state.a
        return 2.0 * self.params.xi / (a * a)

    def velocity_laplacian(self, x: float, y: float) -> tuple[float, float]:
        return (0.0, 0.0)


@dataclass(frozen=True)
class GeneralMassFamily:
    """Continuity-only family with arbitrary C1 handles.

    ``a``/``b`` must be positive on queried times and come with their exact
    time derivatives (``a_dot``/``b_dot``) so no numeric differentiation of
    user callables ever enters a residual check.  Pressure is not defined for
    this family; samples carry NaN there.
    """

    f: Callable[[float], float]
    G: Callable[[float], float]
    a: Callable[[float], float]
    a_dot: Callable[[float], float]
    b: Callable[[float], float]
    b_dot: Callable[[float], float]

    def eval(self, t: float, x: float, y: float, z: float) -> FieldSample:
        av, bv = self.a(t), self.b(t)
        s = similarity_s(x, y, z, av, bv)
        fs = self.f(s)
        if fs < 0.0:
            raise ValueError(f"profile handle must be nonnegative, got f({s}) = {fs}")
        rho = fs / (av * av * bv)
        g = self.G(t)
        stretch = self.a_dot(t) / av
        u1 = stretch * x - g * y
        u2 = g * x + stretch * y
        u3 = self.b_dot(t) / bv * z
        return FieldSample(rho, u1, u2, u3, s, math.nan)
