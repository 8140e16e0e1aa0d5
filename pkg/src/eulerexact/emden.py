"""Scale-factor dynamics.

The scale factors obey a coupled second-order system (an Emden-type system):

    a'' = xi^2 / a^3 + lam / (a^(2 gamma - 1) b^(gamma - 1))
    b'' =              lam / (a^(2 gamma - 2) b^gamma)

and in the planar case the single equation

    a'' = xi^2 / a^3 + lam / a^(2 gamma - 1).

Both conserve a first integral (see :func:`energy_3d` / :func:`energy_2d`;
the formulas are verified symbolically in the test suite).  Integration is
done with an adaptive embedded Runge-Kutta pair driven step by step so that
collapse of a scale factor (a or b reaching a small positive floor) can be
detected and located by root bracketing on the dense output.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import DOP853, RK45, OdeSolution
from scipy.optimize import brentq

from .profiles import PhysParams

__all__ = [
    "EmdenState3D",
    "EmdenState2D",
    "Termination",
    "Trajectory",
    "emden_rhs_3d",
    "emden_rhs_2d",
    "energy_3d",
    "energy_2d",
    "integrate",
    "advance",
]

_METHODS = {"RK45": RK45, "DOP853": DOP853}

# On solver failure, a component this far below its initial value with inward
# velocity is treated as a collapse rather than a generic step failure.
_COLLAPSE_RATIO = 1e-3


@dataclass(frozen=True)
class EmdenState3D:
    """Snapshot (t, a, a', b, b') with a > 0 and b > 0."""

    t: float
    a: float
    a_dot: float
    b: float
    b_dot: float

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError(f"scale factors must be positive: a={self.a}, b={self.b}")


@dataclass(frozen=True)
class EmdenState2D:
    """Snapshot (t, a, a') with a > 0."""

    t: float
    a: float
    a_dot: float

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise ValueError(f"scale factor must be positive: a={self.a}")


def emden_rhs_3d(state: EmdenState3D, p: PhysParams) -> tuple[float, float, float, float]:
    """Right-hand side (a', a'', b', b'') of the 3D scale-factor system."""
    a, b, g = state.a, state.b, p.gamma
    a_ddot = p.xi * p.xi / a**3 + p.lam / (a ** (2.0 * g - 1.0) * b ** (g - 1.0))
    b_ddot = p.lam / (a ** (2.0 * g - 2.0) * b**g)
    return (state.a_dot, a_ddot, state.b_dot, b_ddot)


def emden_rhs_2d(state: EmdenState2D, p: PhysParams) -> tuple[float, float]:
    """Right-hand side (a', a'') of the planar scale-factor equation."""
    a = state.a
    a_ddot = p.xi * p.xi / a**3 + p.lam / a ** (2.0 * p.gamma - 1.0)
    return (state.a_dot, a_ddot)


def energy_3d(state: EmdenState3D, p: PhysParams) -> float:
    """Conserved first integral of the 3D system.

    The b-kinetic term carries weight 1/4 (not 1/2) because the b equation
    sources the lam potential at half the strength of the a equation; with
    that weight d/dt of the value below vanishes along exact solutions.
    """
    a, ad, b, bd = state.a, state.a_dot, state.b, state.b_dot
    kinetic = 0.5 * ad * ad + 0.25 * bd * bd + p.xi * p.xi / (2.0 * a * a)
    if p.is_isothermal:
        return kinetic - p.lam * math.log(a) - 0.5 * p.lam * math.log(b)
    g = p.gamma
    return kinetic + p.lam / (2.0 * g - 2.0) * a ** (2.0 - 2.0 * g) * b ** (1.0 - g)


def energy_2d(state: EmdenState2D, p: PhysParams) -> float:
    """Conserved first integral of the planar equation."""
    a, ad = state.a, state.a_dot
    kinetic = 0.5 * ad * ad + p.xi * p.xi / (2.0 * a * a)
    if p.is_isothermal:
        return kinetic - p.lam * math.log(a)
    g = p.gamma
    return kinetic + p.lam / (2.0 * g - 2.0) * a ** (2.0 - 2.0 * g)


@dataclass(frozen=True)
class Termination:
    """How an integration ended.

    kind is one of ``reached_t_end``, ``blowup``, ``step_failure``.  For
    ``blowup``, ``t_est`` locates the floor crossing, ``which`` names the
    collapsing factor and ``bracket_width`` is the width of the bracketing
    interval used to locate it (not a rigorous error bound).
    """

    kind: str
    t_est: float | None = None
    which: str | None = None
    bracket_width: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v not in (None, "")}


@dataclass
class Trajectory:
    """Integration output: ordered state samples plus a termination record.

    ``states`` holds samples at the caller-requested times (or at the accepted
    step points when no times were requested); :meth:`state_at` evaluates the
    dense interpolant anywhere inside the integrated span.
    """

    params: PhysParams
    dim: int
    initial_state: EmdenState3D | EmdenState2D
    states: list
    termination: Termination
    t_span: tuple[float, float]
    _dense: OdeSolution | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        ts = [st.t for st in self.states]
        if any(t1 >= t2 for t1, t2 in zip(ts, ts[1:])):
            raise ValueError("trajectory sample times must be strictly increasing")

    def state_at(self, t: float):
        """Dense-output state at time t within the integrated span."""
        t0, t1 = self.t_span
        if not t0 <= t <= t1:
            raise ValueError(f"t={t} outside integrated span [{t0}, {t1}]")
        if t == t0:
            return self.initial_state
        if self._dense is None:
            raise ValueError("no dense output available (no step was accepted)")
        y = self._dense(t)
        return _state_from_vec(self.dim, t, y)

    def energies(self) -> list[float]:
        e = energy_3d if self.dim == 3 else energy_2d
        return [e(st, self.params) for st in self.states]

    def jsonl_lines(self) -> list[str]:
        lines = []
        e = energy_3d if self.dim == 3 else energy_2d
        for st in self.states:
            rec = {"t": st.t, "a": st.a, "a_dot": st.a_dot}
            if self.dim == 3:
                rec["b"] = st.b
                rec["b_dot"] = st.b_dot
            rec["energy"] = e(st, self.params)
            lines.append(json.dumps(rec))
        lines.append(json.dumps({"termination": self.termination.to_dict()}))
        return lines

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(self.jsonl_lines()) + "\n")


def _state_from_vec(dim: int, t: float, y) -> EmdenState3D | EmdenState2D:
    if dim == 3:
        return EmdenState3D(t, float(y[0]), float(y[1]), float(y[2]), float(y[3]))
    return EmdenState2D(t, float(y[0]), float(y[1]))


def _rhs_vec(p: PhysParams, dim: int):
    g = p.gamma
    xi2 = p.xi * p.xi
    lam = p.lam
    if dim == 3:
        nan = np.full(4, np.nan)

        def rhs(t, y):
            a, ad, b, bd = y
            # Trial evaluations outside the domain poison the step so the
            # error controller rejects it and shrinks the step size.
            if a <= 0.0 or b <= 0.0:
                return nan
            return np.array([
                ad,
                xi2 / a**3 + lam / (a ** (2.0 * g - 1.0) * b ** (g - 1.0)),
                bd,
                lam / (a ** (2.0 * g - 2.0) * b**g),
            ])
    else:
        nan = np.full(2, np.nan)

        def rhs(t, y):
            a, ad = y
            if a <= 0.0:
                return nan
            return np.array([ad, xi2 / a**3 + lam / a ** (2.0 * g - 1.0)])

    return rhs


def _floor_crossing(dense, t_lo, t_hi, floors, rel_tol):
    """Locate the earliest floor crossing of any monitored component.

    Returns (t_est, component_index, bracket_width) or None.  The step is
    scanned at interior samples so a dip below the floor inside the step is
    not missed.
    """
    tt = np.linspace(t_lo, t_hi, 9)
    yy = dense(tt)
    best = None
    for comp, floor in floors:
        vals = yy[comp]
        below = np.nonzero(vals <= floor)[0]
        if below.size == 0:
            continue
        i = below[0]
        lo = tt[i - 1] if i > 0 else t_lo
        hi = tt[i]
        if i == 0:
            # crossing happened exactly at the step start; accepted states are
            # above the floor, so treat the start as the estimate
            t_est, width = lo, 0.0
        else:
            rt = max(rel_tol, 8.9e-16)
            t_est = brentq(lambda q: float(dense(q)[comp]) - floor, lo, hi,
                           xtol=1e-300, rtol=rt)
            width = rt * abs(t_est)
        if best is None or t_est < best[0]:
            best = (t_est, comp, width)
    return best


def integrate(
    p: PhysParams,
    initial_state: EmdenState3D | EmdenState2D,
    t_end: float,
    *,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    max_steps: int = 1_000_000,
    dense_times: Sequence[float] | None = None,
    eps_blow: float | None = None,
    method: str = "RK45",
) -> Trajectory:
    """Integrate the scale-factor system from ``initial_state`` to ``t_end``.

    Terminates early with a ``blowup`` record when a scale factor crosses the
    collapse floor (``eps_blow`` absolute, default ``1e-10`` times the
    component's initial value); the crossing time is located by root
    bracketing on the dense output to within ``rel_tol * |t|``.  A step-size
    underflow while a component is collapsing is also reported as blowup; any
    other failure (including ``max_steps`` exhaustion) is a ``step_failure``.
    """
    if isinstance(initial_state, EmdenState3D):
        dim = 3
        y0 = np.array([initial_state.a, initial_state.a_dot,
                       initial_state.b, initial_state.b_dot])
        comp_names = {0: "a", 2: "b"}
    elif isinstance(initial_state, EmdenState2D):
        dim = 2
        y0 = np.array([initial_state.a, initial_state.a_dot])
        comp_names = {0: "a"}
    else:
        raise TypeError(f"unsupported state type: {type(initial_state)!r}")

    t0 = initial_state.t
    if not t_end > t0:
        raise ValueError(f"t_end={t_end} must exceed the initial time {t0}")
    if not (0.0 < rel_tol < 1.0 and 0.0 < abs_tol < 1.0):
        raise ValueError("tolerances must lie in (0, 1)")
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(_METHODS)}")
    if dense_times is not None:
        dense_times = [float(t) for t in dense_times]
        if any(t1 >= t2 for t1, t2 in zip(dense_times, dense_times[1:])):
            raise ValueError("dense_times must be strictly increasing")
        if dense_times and (dense_times[0] < t0 or dense_times[-1] > t_end):
            raise ValueError("dense_times must lie within [t0, t_end]")

    floors = [(comp, eps_blow if eps_blow is not None else 1e-10 * y0[comp])
              for comp in comp_names]

    solver = _METHODS[method](_rhs_vec(p, dim), t0, y0, t_end,
                              rtol=rel_tol, atol=abs_tol)
    ts: list[float] = [t0]
    interpolants: list = []
    termination = None
    t_stop = t_end
    nsteps = 0

    with warnings.catch_warnings():
        # scipy warns when shrinking steps hit the representable minimum;
        # that situation is diagnosed explicitly below
        warnings.simplefilter("ignore")
        while solver.status == "running":
            if nsteps >= max_steps:
                termination = Termination("step_failure",
                                          detail=f"max_steps={max_steps} exhausted")
                t_stop = solver.t
                break
            t_prev = solver.t
            solver.step()
            nsteps += 1
            if solver.status == "failed":
                termination = _diagnose_failure(solver, y0, comp_names)
                t_stop = solver.t
                break
            dense = solver.dense_output()
            interpolants.append(dense)
            ts.append(solver.t)
            hit = _floor_crossing(dense, t_prev, solver.t, floors, rel_tol)
            if hit is not None:
                t_est, comp, width = hit
                termination = Termination("blowup", t_est=t_est,
                                          which=comp_names[comp],
                                          bracket_width=width)
                t_stop = t_est
                break

    if termination is None:
        termination = Termination("reached_t_end")
        t_stop = solver.t

    sol = OdeSolution(ts, interpolants) if interpolants else None

    if dense_times is not None:
        sample_times = [t for t in dense_times if t0 <= t <= t_stop]
    else:
        sample_times = [t for t in ts if t <= t_stop]
        if termination.kind == "blowup" and (not sample_times or sample_times[-1] < t_stop):
            sample_times.append(t_stop)

    states = []
    for t in sample_times:
        if t == t0:
            states.append(initial_state)
        else:
            states.append(_state_from_vec(dim, t, sol(t)))

    return Trajectory(params=p, dim=dim, initial_state=initial_state,
                      states=states, termination=termination,
                      t_span=(t0, t_stop), _dense=sol)


def _diagnose_failure(solver, y0, comp_names) -> Termination:
    y = solver.y
    for comp, name in comp_names.items():
        value, velocity = y[comp], y[comp + 1]
        if value < _COLLAPSE_RATIO * y0[comp] and velocity < 0.0:
            # time scale left before reaching zero bounds the location error
            return Termination("blowup", t_est=solver.t, which=name,
                               bracket_width=abs(value / velocity),
                               detail="step size underflow during collapse")
    return Termination("step_failure", t_est=solver.t,
                       detail="adaptive step size underflow")


def advance(
    p: PhysParams,
    state: EmdenState3D | EmdenState2D,
    dt: float,
    n_substeps: int | None = None,
) -> EmdenState3D | EmdenState2D:
    """Propagate a snapshot by dt with fixed-step classic RK4 substeps.

    The default substep count keeps the propagation error around 1e-20 for
    |dt| up to 1e-2, far below second-order stencil truncation; this is the
    time-shift engine for finite-difference residual checks.
    """
    if dt == 0.0:
        return state
    if isinstance(state, EmdenState3D):
        dim, y = 3, np.array([state.a, state.a_dot, state.b, state.b_dot])
    else:
        dim, y = 2, np.array([state.a, state.a_dot])
    if n_substeps is None:
        n_substeps = max(8, int(abs(dt) / 1e-4) + 1)
    rhs = _rhs_vec(p, dim)
    h = dt / n_substeps
    t = state.t
    for _ in range(n_substeps):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        if np.any(np.isnan(k1)) or np.any(np.isnan(k4)):
            raise ValueError("advance stepped at or past a collapsed state")
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return _state_from_vec(dim, state.t + dt, y)
