"""Implicit time stepping with elastic-collision resolution.

The smooth forward step maps (q_k, v_k, p_k) to the next triple:

    p_{k+1} = d2(q_k, v_k, h)
    q_{k+1} = v_k
    solve for (v_{k+1}, lambda):
        d1(q_{k+1}, v_{k+1}, h) + p_{k+1} = sum_mu lambda_mu omega^mu(q_{k+1})
        omega_dplus(q_{k+1}, v_{k+1}) = 0

When the candidate q_{k+1} leaves the admissible set, the offending
configuration is deleted and the collision is resolved in four phases, each a
square Newton system:

    A: find the impact fraction alpha, the boundary point q~ (replacing v_k)
       and multipliers, from d1(q_k, ., alpha h) + p_k in the constraint span,
       the discrete constraint at sub-step alpha h, and c(q~) = 0.
    B: transfer the momentum to the boundary, p~ = E^T d2(q_k, q~, alpha h),
       then find the post-impact configuration v~ and multipliers from energy
       matching d3 = d3, the boundary-projected momentum balance, and the
       discrete constraint at sub-step (1 - alpha) h.
    C: p_{k+1} = d2(q~, v~, (1-alpha) h), q_{k+1} = v~.
    D: the usual constrained solve for (v_{k+1}, lambda) at the full step.

The momentum-transfer condition in phase B is overdetermined when read as an
equation in the full cotangent space (n equations for an (n-1)-dimensional
unknown); applying the boundary restriction to both sides turns it into the
closed-form assignment above, and the discarded normal component is recorded
on the event as `compat_residual`.

The energy equation in phase B is quadratic-like with a penetrating and a
reflecting root; the solve starts from the Euclidean reflection of the
incoming discrete velocity and the converged root is accepted only if the
post-impact direction re-enters the interior.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from .discretization import DiscreteLagrangian, initial_discretize
from .errors import (
    AlphaOutOfRange,
    NewtonFailure,
    PersistentPenetration,
    RootSelectionAmbiguous,
)
from .geometry import MechanicalModel, boundary_frame, pullback_cotangent, push_cotangent
from .numerics import DEFAULT_NEWTON_OPTIONS, NewtonOptions, newton_solve

log = logging.getLogger("nhvi.integrator")

# |c| below this counts as admissible; avoids impact solves on round-off
GRAZING_TOL = 1e-12
# resolved impact fraction must lie in (ALPHA_MARGIN, 1 - ALPHA_MARGIN)
ALPHA_MARGIN = 1e-6


@dataclass(slots=True)
class State:
    """One node of the discrete trajectory.

    `v` is the next-configuration slot of the scheme (a point of the
    configuration space, not a velocity); `lam` holds the constraint
    multipliers of the solve that produced this node (zeros at k = 0, empty
    for unconstrained models).
    """

    k: int
    t: float
    q: np.ndarray
    v: np.ndarray
    p: np.ndarray
    lam: np.ndarray


@dataclass(slots=True)
class ImpactEvent:
    """Resolved elastic collision within step k."""

    k: int
    alpha: float
    t_impact: float
    q_tilde: np.ndarray
    v_tilde: np.ndarray
    p_tilde: np.ndarray  # boundary covector, length n-1
    lambda_A: np.ndarray
    lambda_B: np.ndarray
    compat_residual: float  # discarded normal momentum, diagnostic only
    energy_jump: float


@dataclass
class SolverStats:
    """Per-solve Newton record, kept as parallel lists (one entry per solve)."""

    ks: List[int] = field(default_factory=list)
    phases: List[str] = field(default_factory=list)
    iterations: List[int] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)

    def record(self, k: int, phase: str, iterations: int, residual: float) -> None:
        self.ks.append(k)
        self.phases.append(phase)
        self.iterations.append(iterations)
        self.residuals.append(residual)

    def __len__(self) -> int:
        return len(self.ks)


@dataclass
class Trajectory:
    states: List[State]
    impacts: List[ImpactEvent]
    h: float
    solver_stats: SolverStats

    def impact_for_step(self, k: int) -> Optional[ImpactEvent]:
        for ev in self.impacts:
            if ev.k == k:
                return ev
        return None


class MinusStepResult(NamedTuple):
    q_prev: np.ndarray
    p_prev: np.ndarray
    v_slot: np.ndarray
    lam: np.ndarray


def _require_converged(res, phase: str, k: int, t: float):
    if not res.converged:
        raise NewtonFailure(
            f"{phase} solve stalled at residual {res.residual_norm:.3e} "
            f"(step {k}, t={t:.6g})",
            k=k,
            t=t,
            residual_norm=res.residual_norm,
            phase=phase,
        )


def _step_system(Ld: DiscreteLagrangian, model: MechanicalModel, q_base, p_base, h):
    """Residual and (when available) analytic Jacobian for the implicit block

        d1(q_base, v, h) + p_base - omega(q_base)^T lam = 0
        omega(q_base) . (v - q_base)/h = 0

    over the unknown z = [v, lam].  The base point is fixed, so the
    constraint matrix is evaluated once.
    """
    n = model.n
    m = model.m_con
    d1 = Ld.d1
    if m:
        om = model.omega(q_base)
        omT = om.T
        ri = model.retract_inverse

        def residual(z):
            v = z[:n]
            r1 = d1(q_base, v, h) + p_base - omT @ z[n:]
            return np.concatenate([r1, om @ ri(q_base, v, h)])

    else:

        def residual(z):
            return d1(q_base, z, h) + p_base

    jac = None
    if Ld.d1_dv is not None and model.uses_default_retraction:
        d1_dv = Ld.d1_dv
        if m:
            om_h = om / h

            def jac(z):
                J = np.zeros((n + m, n + m))
                J[:n, :n] = d1_dv(q_base, z[:n], h)
                J[:n, n:] = -omT
                J[n:, :n] = om_h
                return J

        else:

            def jac(z):
                return d1_dv(q_base, z, h)

    return residual, jac


def _step_plus_impl(Ld, model, state: State, h, opts):
    p_next = Ld.d2(state.q, state.v, h)
    q_next = state.v
    residual, jac = _step_system(Ld, model, q_next, p_next, h)
    z0 = np.concatenate([2.0 * state.v - state.q, state.lam])
    res = newton_solve(residual, z0, opts, jac)
    _require_converged(res, "step", state.k, state.t)
    n = model.n
    new_state = State(
        k=state.k + 1,
        t=state.t + h,
        q=q_next,
        v=res.x[:n],
        p=p_next,
        lam=res.x[n:],
    )
    return new_state, res


def step_plus(
    Ld: DiscreteLagrangian,
    model: MechanicalModel,
    state: State,
    h: float,
    opts: NewtonOptions = DEFAULT_NEWTON_OPTIONS,
) -> State:
    """Advance one smooth forward step; raises NewtonFailure on stall."""
    new_state, _ = _step_plus_impl(Ld, model, state, h, opts)
    return new_state


def step_minus(
    Ld: DiscreteLagrangian,
    model: MechanicalModel,
    q_next: np.ndarray,
    p_next: np.ndarray,
    h: float,
    opts: NewtonOptions = DEFAULT_NEWTON_OPTIONS,
) -> MinusStepResult:
    """One backward step: recover the previous node from (q_{k+1}, p_{k+1}).

    Solves p_{k+1} - d2(u, q_{k+1}, h) in the constraint span together with
    the backward discrete constraint, then reads off q_k = u and
    p_k = -d1(u, q_{k+1}, h).  Exact inverse of the forward step for
    unconstrained systems.
    """
    n = model.n
    m = model.m_con
    if m:
        om = model.omega(q_next)
        omT = om.T
        ri = model.retract_inverse

        def residual(z):
            u = z[:n]
            r1 = p_next - Ld.d2(u, q_next, h) - omT @ z[n:]
            return np.concatenate([r1, -(om @ ri(q_next, u, h))])

    else:

        def residual(z):
            return p_next - Ld.d2(z, q_next, h)

    z0 = np.concatenate([q_next, np.zeros(m)])
    res = newton_solve(residual, z0, opts)
    _require_converged(res, "step-minus", -1, math.nan)
    u = res.x[:n]
    return MinusStepResult(
        q_prev=u, p_prev=-Ld.d1(u, q_next, h), v_slot=u, lam=res.x[n:]
    )


def _impact_a_residual(Ld, model, q_k, p_k, event, h) -> float:
    """Infinity norm of the phase-A equations at the stored impact data."""
    s1 = event.alpha * h
    r1 = Ld.d1(q_k, event.q_tilde, s1) + p_k - model.omega(q_k).T @ event.lambda_A
    parts = [float(np.max(np.abs(r1))), abs(model.boundary_gap(event.q_tilde))]
    if model.m_con:
        r2 = model.omega(q_k) @ model.retract_inverse(q_k, event.q_tilde, s1)
        parts.append(float(np.max(np.abs(r2))))
    return max(parts)


def _impact_b_residual(Ld, model, q_k, event, h) -> float:
    """Infinity norm of the phase-B equations at the stored impact data."""
    s1 = event.alpha * h
    s2 = (1.0 - event.alpha) * h
    d3_pre = Ld.d3(q_k, event.q_tilde, s1)
    force = Ld.d1(event.q_tilde, event.v_tilde, s2)
    if model.m_con:
        force = force - model.omega(event.q_tilde).T @ event.lambda_B
    E = np.asarray(model.tangent_basis(event.q_tilde), dtype=float)
    parts = [abs(d3_pre - Ld.d3(event.q_tilde, event.v_tilde, s2))]
    if model.n > 1:
        parts.append(float(np.max(np.abs(E.T @ force + event.p_tilde))))
    if model.m_con:
        r3 = model.omega(event.q_tilde) @ model.retract_inverse(
            event.q_tilde, event.v_tilde, s2
        )
        parts.append(float(np.max(np.abs(r3))))
    return max(parts)


def _attempt_impact(Ld, model, q_k, p_k, h, rejected_q, opts, k, t_k):
    n = model.n
    m = model.m_con
    ri = model.retract_inverse
    om_k = model.omega(q_k)
    omT_k = om_k.T
    gap = model.boundary_gap
    # With the default retraction the phases are solved over discrete
    # velocities w (configurations reconstructed as q + s w): forming
    # (v - q)/s from a solved v costs five digits at impact sub-steps.
    wform = model.uses_default_retraction

    # PHASE A: impact fraction, boundary point and multipliers.
    if wform:

        def residual_a(z):
            alpha = z[0]
            w = z[1 : 1 + n]
            s = alpha * h
            r1 = Ld.d1_w(q_k, w, s) + p_k - omT_k @ z[1 + n :]
            parts = [r1]
            if m:
                parts.append(om_k @ w)
            parts.append(np.array([gap(q_k + s * w)]))
            return np.concatenate(parts)

        first_guess = (rejected_q - q_k) / h

    else:

        def residual_a(z):
            alpha = z[0]
            v = z[1 : 1 + n]
            s = alpha * h
            r1 = Ld.d1(q_k, v, s) + p_k - omT_k @ z[1 + n :]
            parts = [r1]
            if m:
                parts.append(om_k @ ri(q_k, v, s))
            parts.append(np.array([gap(v)]))
            return np.concatenate(parts)

    c_k = gap(q_k)
    alpha0 = c_k / (c_k - gap(rejected_q))
    if not wform:
        first_guess = q_k + alpha0 * (rejected_q - q_k)
    z0 = np.concatenate([[alpha0], first_guess, np.zeros(m)])
    res_a = newton_solve(residual_a, z0, opts)
    _require_converged(res_a, "impact-A", k, t_k)
    alpha = float(res_a.x[0])
    if not ALPHA_MARGIN < alpha < 1.0 - ALPHA_MARGIN:
        raise AlphaOutOfRange(
            f"impact fraction {alpha:.6g} outside (0, 1) at step {k}, t={t_k:.6g}"
        )
    s1 = alpha * h
    lambda_a = res_a.x[1 + n :]
    if wform:
        w_in = res_a.x[1 : 1 + n]
        q_tilde = q_k + s1 * w_in
    else:
        q_tilde = res_a.x[1 : 1 + n]
        w_in = ri(q_k, q_tilde, s1)

    # PHASE B: momentum transfer and post-impact configuration.
    frame = boundary_frame(model, q_tilde)
    d2_pre = Ld.d2_w(q_k, w_in, s1) if wform else Ld.d2(q_k, q_tilde, s1)
    p_tilde = pullback_cotangent(frame, d2_pre)
    compat_residual = float(np.max(np.abs(push_cotangent(frame, p_tilde) - d2_pre)))
    d3_pre = Ld.d3_w(q_k, w_in, s1) if wform else Ld.d3(q_k, q_tilde, s1)
    s2 = (1.0 - alpha) * h
    ET = frame.E.T
    om_t = model.omega(q_tilde)
    omT_t = om_t.T

    if wform:

        def residual_b(z):
            u = z[:n]
            force = Ld.d1_w(q_tilde, u, s2)
            if m:
                force = force - omT_t @ z[n:]
            parts = [
                np.array([d3_pre - Ld.d3_w(q_tilde, u, s2)]),
                ET @ force + p_tilde,
            ]
            if m:
                parts.append(om_t @ u)
            return np.concatenate(parts)

        def unknown_from_velocity(u):
            return u

    else:

        def residual_b(z):
            vt = z[:n]
            force = Ld.d1(q_tilde, vt, s2)
            if m:
                force = force - omT_t @ z[n:]
            parts = [
                np.array([d3_pre - Ld.d3(q_tilde, vt, s2)]),
                ET @ force + p_tilde,
            ]
            if m:
                parts.append(om_t @ ri(q_tilde, vt, s2))
            return np.concatenate(parts)

        def unknown_from_velocity(u):
            return q_tilde + s2 * u

    nhat = frame.normal / np.linalg.norm(frame.normal)
    w_refl = w_in - 2.0 * float(nhat @ w_in) * nhat
    # The reflected guess selects the bouncing energy root for unconstrained
    # models.  With constraints the admissible directions can be transverse
    # to the boundary tangent, in which case the physical root reverses the
    # whole constrained velocity; try that basin before giving up.
    res_b = None
    w_out = None
    outgoing = -np.inf
    for w_guess in (w_refl, -w_in):
        z0 = np.concatenate([unknown_from_velocity(w_guess), np.zeros(m)])
        candidate = newton_solve(residual_b, z0, opts)
        if not candidate.converged:
            continue
        u = candidate.x[:n] if wform else ri(q_tilde, candidate.x[:n], s2)
        rate = float(frame.normal @ u)
        if rate > 0.0:
            res_b = candidate
            w_out = u
            outgoing = rate
            break
        if res_b is None:
            res_b = candidate
            w_out = u
        outgoing = max(outgoing, rate)
    if res_b is None:
        raise NewtonFailure(
            f"impact-B solve stalled from both velocity guesses "
            f"(step {k}, t={t_k:.6g})",
            k=k,
            t=t_k,
            phase="impact-B",
        )
    if outgoing <= 0.0:
        raise RootSelectionAmbiguous(
            f"post-impact root does not re-enter the admissible set "
            f"(normal rate {outgoing:.3e}) at step {k}, t={t_k:.6g}"
        )
    lambda_b = res_b.x[n:]
    v_tilde = q_tilde + s2 * w_out if wform else res_b.x[:n]
    energy_jump = (
        abs(d3_pre - Ld.d3_w(q_tilde, w_out, s2))
        if wform
        else abs(d3_pre - Ld.d3(q_tilde, v_tilde, s2))
    )

    # PHASE C: momentum and configuration after the second sub-step.
    p_next = Ld.d2_w(q_tilde, w_out, s2) if wform else Ld.d2(q_tilde, v_tilde, s2)
    q_next = v_tilde

    # PHASE D: full-step constrained solve from the post-impact node.
    residual_d, jac_d = _step_system(Ld, model, q_next, p_next, h)
    z0 = np.concatenate([v_tilde + h * w_out, lambda_b])
    res_d = newton_solve(residual_d, z0, opts, jac_d)
    _require_converged(res_d, "impact-D", k, t_k)

    event = ImpactEvent(
        k=k,
        alpha=alpha,
        t_impact=t_k + alpha * h,
        q_tilde=q_tilde,
        v_tilde=v_tilde,
        p_tilde=p_tilde,
        lambda_A=lambda_a,
        lambda_B=lambda_b,
        compat_residual=compat_residual,
        energy_jump=energy_jump,
    )
    new_state = State(
        k=k + 1,
        t=t_k + h,
        q=q_next,
        v=res_d.x[:n],
        p=p_next,
        lam=res_d.x[n:],
    )
    # Stats record the residuals of the configuration-form equations at the
    # stored solution, so diagnostics can recompute them from the trajectory
    # alone and get bit-identical values.
    records = [
        (k, "impact-A", res_a.iterations, _impact_a_residual(Ld, model, q_k, p_k, event, h)),
        (k, "impact-B", res_b.iterations, _impact_b_residual(Ld, model, q_k, event, h)),
        (k, "impact-D", res_d.iterations, res_d.residual_norm),
    ]
    return event, new_state, records


def _resolve_impact_impl(Ld, model, q_k, p_k, h, rejected_q, opts, k, t_k):
    if model.boundary_gap(rejected_q) >= 0:
        raise ValueError("rejected configuration does not penetrate the boundary")
    if model.boundary_gap(q_k) <= 0:
        raise ValueError("impact resolution requires an interior pre-impact node")
    event, state, records = _attempt_impact(
        Ld, model, q_k, p_k, h, rejected_q, opts, k, t_k
    )
    if model.boundary_gap(state.q) < -GRAZING_TOL:
        # One retry keyed to the doubly-rejected point; its interpolated
        # alpha guess can select an earlier boundary crossing.
        event, state, records = _attempt_impact(
            Ld, model, q_k, p_k, h, state.q, opts, k, t_k
        )
        if model.boundary_gap(state.q) < -GRAZING_TOL:
            raise PersistentPenetration(
                f"post-impact configuration still penetrates after retry "
                f"(step {k}, t={t_k:.6g}, gap {model.boundary_gap(state.q):.3e})"
            )
    if log.isEnabledFor(logging.DEBUG):
        log.debug(
            "impact at k=%d: alpha=%.6f t=%.6g energy_jump=%.3e compat=%.3e",
            k,
            event.alpha,
            event.t_impact,
            event.energy_jump,
            event.compat_residual,
        )
    return event, state, records


def resolve_impact(
    Ld: DiscreteLagrangian,
    model: MechanicalModel,
    q_k: np.ndarray,
    p_k: np.ndarray,
    h: float,
    rejected_q: np.ndarray,
    opts: NewtonOptions = DEFAULT_NEWTON_OPTIONS,
    k: int = 0,
    t_k: float = 0.0,
):
    """Resolve one elastic collision; returns (ImpactEvent, next State)."""
    event, state, _ = _resolve_impact_impl(
        Ld, model, q_k, p_k, h, rejected_q, opts, k, t_k
    )
    return event, state


def simulate(
    Ld: DiscreteLagrangian,
    model: MechanicalModel,
    q0_cont: np.ndarray,
    v0_cont: np.ndarray,
    t0: float,
    t_final: float,
    h: float,
    opts: NewtonOptions = DEFAULT_NEWTON_OPTIONS,
) -> Trajectory:
    """Run the forward scheme on [t0, t_final] with elastic collisions.

    Each iteration checks the admissibility of the candidate configuration
    q_{k+1} = v_k before the smooth solve; a penetrating candidate is deleted
    and the impact is resolved instead (at most one collision per step, with
    the phase-A node replacing the deleted v_k in the stored trajectory).
    """
    if t_final <= t0:
        raise ValueError("t_final must exceed t0")
    if h <= 0:
        raise ValueError("timestep must be positive")
    n_steps = round((t_final - t0) / h)
    if n_steps < 1:
        raise ValueError("time span must cover at least one step")

    q0, v0, p0 = initial_discretize(model, Ld.rule, q0_cont, v0_cont, h)
    states = [State(k=0, t=t0, q=q0, v=v0, p=p0, lam=np.zeros(model.m_con))]
    impacts: List[ImpactEvent] = []
    stats = SolverStats()
    gap = model.boundary_gap

    for k in range(n_steps):
        state = states[k]
        if gap(state.v) < -GRAZING_TOL:
            event, new_state, records = _resolve_impact_impl(
                Ld, model, state.q, state.p, h, state.v, opts, k, state.t
            )
            # the penetrating v_k is deleted; the phase-A boundary node is
            # the actual trajectory value of this slot.  The record of the
            # solve that produced the deleted value no longer corresponds to
            # stored data, so it is marked rejected.
            if stats.phases:
                stats.phases[-1] += "-rejected"
            state.v = event.q_tilde
            state.lam = event.lambda_A
            impacts.append(event)
            states.append(new_state)
            for rec in records:
                stats.record(*rec)
        else:
            new_state, res = _step_plus_impl(Ld, model, state, h, opts)
            states.append(new_state)
            stats.record(k, "step", res.iterations, res.residual_norm)

    return Trajectory(states=states, impacts=impacts, h=h, solver_stats=stats)
