"""Discrete Lagrangians, their partials, and discrete constraint maps.

Two quadrature rules are supported.  The midpoint rule evaluates the
continuous Lagrangian at the segment midpoint,

    Ld(q, v, h) = h * L((q + v) / 2, (v - q) / h),

and the retraction-left rule evaluates it at the base point,

    Ld(q, v, h) = h * L(q, (v - q) / h).

Here (q, v) are two configurations one step apart; v is the *next
configuration*, not a velocity.  The partials d1 (w.r.t. q), d2 (w.r.t. v)
and d3 (w.r.t. h) are assembled analytically by the chain rule from the
model's Lagrangian partials: they sit inside Newton residuals, where
finite differences of finite differences would square the noise.

The timestep is a live argument everywhere because impact resolution
evaluates the same objects on the sub-steps alpha*h and (1-alpha)*h.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, InvalidInitialState
from .geometry import MechanicalModel
from .numerics import as_vector

RULES = ("midpoint", "retraction-left")


class DiscreteLagrangian:
    """Evaluator for Ld(q, v, h) and its three partial derivatives.

    When the model carries Hessian blocks, `d1_dv` provides the analytic
    Jacobian of d1 with respect to the second configuration slot, which the
    integrator uses to build exact Newton Jacobians for smooth steps.
    """

    def __init__(self, model: MechanicalModel, rule: str):
        if rule not in RULES:
            raise ValueError(f"unknown discretization rule {rule!r}; expected one of {RULES}")
        self.rule = rule
        self.model = model

        L = model.lagrangian
        Lq = model.dL_dq
        Lv = model.dL_dv

        if rule == "midpoint":

            def _eval(q, v, h):
                w = (v - q) / h
                mid = 0.5 * (q + v)
                return h * L(mid, w)

            def _d1(q, v, h):
                w = (v - q) / h
                mid = 0.5 * (q + v)
                return (0.5 * h) * Lq(mid, w) - Lv(mid, w)

            def _d2(q, v, h):
                w = (v - q) / h
                mid = 0.5 * (q + v)
                return (0.5 * h) * Lq(mid, w) + Lv(mid, w)

            def _d3(q, v, h):
                w = (v - q) / h
                mid = 0.5 * (q + v)
                return L(mid, w) - float(Lv(mid, w) @ w)

            def _d1_w(q, w, h):
                mid = q + (0.5 * h) * w
                return (0.5 * h) * Lq(mid, w) - Lv(mid, w)

            def _d2_w(q, w, h):
                mid = q + (0.5 * h) * w
                return (0.5 * h) * Lq(mid, w) + Lv(mid, w)

            def _d3_w(q, w, h):
                mid = q + (0.5 * h) * w
                return L(mid, w) - float(Lv(mid, w) @ w)

        else:  # retraction-left

            def _eval(q, v, h):
                w = (v - q) / h
                return h * L(q, w)

            def _d1(q, v, h):
                w = (v - q) / h
                return h * Lq(q, w) - Lv(q, w)

            def _d2(q, v, h):
                w = (v - q) / h
                return Lv(q, w)

            def _d3(q, v, h):
                w = (v - q) / h
                return L(q, w) - float(Lv(q, w) @ w)

            def _d1_w(q, w, h):
                return h * Lq(q, w) - Lv(q, w)

            def _d2_w(q, w, h):
                return Lv(q, w)

            def _d3_w(q, w, h):
                return L(q, w) - float(Lv(q, w) @ w)

        self.eval = _eval
        self.d1 = _d1
        self.d2 = _d2
        self.d3 = _d3
        # velocity-form partials: same quantities over (q, w, h) with the
        # second configuration v = q + h w implicit.  The implicit solvers
        # use these at impact sub-steps, where forming (v - q)/h from a
        # reconstructed v would lose five digits to cancellation.
        self.d1_w = _d1_w
        self.d2_w = _d2_w
        self.d3_w = _d3_w

        if model.d2L is not None:
            hess = model.d2L
            if rule == "midpoint":

                def _d1_dv(q, v, h):
                    w = (v - q) / h
                    mid = 0.5 * (q + v)
                    lqq, lqv, lvv = hess(mid, w)
                    return 0.25 * h * lqq + 0.5 * lqv - 0.5 * lqv.T - lvv / h

            else:

                def _d1_dv(q, v, h):
                    w = (v - q) / h
                    lqq, lqv, lvv = hess(q, w)
                    return lqv - lvv / h

            self.d1_dv = _d1_dv
        else:
            self.d1_dv = None


def make_discrete_lagrangian(model: MechanicalModel, rule: str) -> DiscreteLagrangian:
    return DiscreteLagrangian(model, rule)


def omega_dplus(model: MechanicalModel, q: np.ndarray, v: np.ndarray, h: float) -> np.ndarray:
    """Constraint one-forms evaluated on the discrete velocity from q to v.

    Zero iff the configuration pair lies in the forward discrete constraint
    distribution.  Returns an empty vector for unconstrained models.
    """
    if model.m_con == 0:
        return np.empty(0)
    return model.omega(q) @ model.retract_inverse(q, v, h)


def omega_dminus(model: MechanicalModel, v: np.ndarray, q: np.ndarray, h: float) -> np.ndarray:
    """Backward discrete constraint map: sign-flipped omega_dplus with the
    base point in the second slot."""
    return -omega_dplus(model, q, v, h)


def discrete_energy(Ld: DiscreteLagrangian, q: np.ndarray, v: np.ndarray, h: float) -> float:
    """Energy diagnostic -d3(q, v, h).

    Equals dL/dv . w - L evaluated at the rule's base point with the
    discrete velocity w = (v - q)/h.  This is the quantity the elastic
    impact conditions match exactly across a collision, so it is the right
    conserved diagnostic (continuous energy at a reconstructed velocity is
    not).
    """
    return -Ld.d3(q, v, h)


def initial_discretize(
    model: MechanicalModel,
    rule: str,
    q0_cont: np.ndarray,
    v0_cont: np.ndarray,
    h: float,
):
    """Convert continuous initial conditions (q(0), v(0)) to discrete ones.

    Midpoint rule centers the first segment on q(0):

        q_0 = q(0) - (h/2) v(0),  v_0 = q(0) + (h/2) v(0).

    The retraction-left rule keeps the base point and retracts the scaled
    velocity: q_0 = q(0), v_0 = q(0) + h v(0).

    Returns (q_0, v_0, p_0) with p_0 = d2(q_0, v_0, h).
    """
    q0_cont = as_vector(q0_cont, "q(0)")
    v0_cont = as_vector(v0_cont, "v(0)")
    if q0_cont.shape != (model.n,) or v0_cont.shape != (model.n,):
        raise DimensionMismatch(
            f"initial condition shapes {q0_cont.shape}, {v0_cont.shape} "
            f"do not match model dimension {model.n}"
        )
    if model.boundary_gap(q0_cont) <= 0:
        raise InvalidInitialState(
            f"q(0)={q0_cont} is not in the interior of the admissible set"
        )
    if rule == "midpoint":
        q0 = q0_cont - 0.5 * h * v0_cont
        v0 = q0_cont + 0.5 * h * v0_cont
    elif rule == "retraction-left":
        q0 = q0_cont.copy()
        v0 = q0_cont + h * v0_cont
    else:
        raise ValueError(f"unknown discretization rule {rule!r}; expected one of {RULES}")
    for label, point in (("q_0", q0), ("v_0", v0)):
        if model.boundary_gap(point) < -1e-12:
            raise InvalidInitialState(
                f"discretized {label}={point} leaves the admissible set"
            )
    Ld = DiscreteLagrangian(model, rule)
    p0 = Ld.d2(q0, v0, h)
    return q0, v0, p0
