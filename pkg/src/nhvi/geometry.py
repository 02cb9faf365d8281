"""Mechanical-model interface: configuration data, constraints, boundary geometry.

A model bundles everything the integrator needs about one system: the
Lagrangian and its velocity/position partials, the constraint one-forms, a
scalar gap function describing the admissible set (positive inside, zero on
the collision surface, negative outside), the tangent-basis/projection pair
on the boundary, and the retraction realizing discrete velocities.

The boundary tangent basis E (n x (n-1)) and the projection P ((n-1) x n) are
model data, not derived quantities: the impact map depends on which left
inverse is chosen, so each model ships its own closed-form pair.  Boundary
covectors are stored as coefficient tuples against the dual basis of E's
columns, which makes the cotangent transfer maps plain matrix transposes:
pull-back is E^T and push-forward is P^T.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .errors import DegenerateFrame, NotOnBoundary
from .numerics import fd_jacobian

# |c(q)| below this counts as "on the boundary" for frame assembly
FRAME_GAP_TOL = 1e-8
# P.E must equal the identity to this tolerance, else the frame is degenerate
FRAME_IDENTITY_TOL = 1e-10


def default_retract_inverse(q: np.ndarray, v: np.ndarray, h: float) -> np.ndarray:
    """Difference-quotient discrete velocity (v - q) / h."""
    return (v - q) / h


@dataclass(frozen=True)
class MechanicalModel:
    """Immutable descriptor of one mechanical system.

    Callable fields take/return plain float64 arrays.  `d2L`, when present,
    returns the Hessian blocks (Lqq, Lqv, Lvv) of the Lagrangian, where
    Lqv[i, j] = d(dL/dq_i)/dv_j; the integrator uses them to assemble
    analytic Newton Jacobians for the smooth steps.  `uses_default_retraction`
    tells the integrator the discrete velocity is the plain difference
    quotient, which that Jacobian assembly relies on.
    """

    name: str
    n: int
    m_con: int
    coordinate_names: Sequence[str]
    lagrangian: Callable[[np.ndarray, np.ndarray], float]
    dL_dq: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dL_dv: Callable[[np.ndarray, np.ndarray], np.ndarray]
    omega: Callable[[np.ndarray], np.ndarray]
    boundary_gap: Callable[[np.ndarray], float]
    boundary_gap_grad: Callable[[np.ndarray], np.ndarray]
    tangent_basis: Callable[[np.ndarray], np.ndarray]
    projection: Callable[[np.ndarray], np.ndarray]
    retract_inverse: Callable[[np.ndarray, np.ndarray, float], np.ndarray] = (
        default_retract_inverse
    )
    params: Dict[str, float] = field(default_factory=dict)
    d2L: Optional[
        Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
    ] = None
    uses_default_retraction: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("configuration dimension must be at least 1")
        if self.m_con < 0:
            raise ValueError("number of constraint one-forms must be non-negative")
        if len(self.coordinate_names) != self.n:
            raise ValueError("coordinate_names must have length n")


def fd_partials(
    lagrangian: Callable[[np.ndarray, np.ndarray], float], eps: float = 1e-7
):
    """Finite-difference dL/dq and dL/dv for models without analytic partials."""

    def dL_dq(q, v):
        return fd_jacobian(lambda qq: np.array([lagrangian(qq, v)]), q, eps)[0]

    def dL_dv(q, v):
        return fd_jacobian(lambda vv: np.array([lagrangian(q, vv)]), v, eps)[0]

    return dL_dq, dL_dv


@dataclass(frozen=True)
class BoundaryFrame:
    """Tangent basis, projection and outward data at one boundary point."""

    q_tilde: np.ndarray
    E: np.ndarray  # n x (n-1), columns span the boundary tangent space
    P: np.ndarray  # (n-1) x n, left inverse of E
    normal: np.ndarray  # gradient of the gap function at q_tilde


def boundary_frame(model: MechanicalModel, q_tilde: np.ndarray) -> BoundaryFrame:
    """Assemble and validate the boundary frame at q_tilde.

    Raises NotOnBoundary if |c(q_tilde)| exceeds the frame tolerance and
    DegenerateFrame if P.E differs from the identity (e.g. at a star-shape
    corner where the edge function is not differentiable).
    """
    c = model.boundary_gap(q_tilde)
    if abs(c) > FRAME_GAP_TOL:
        raise NotOnBoundary(
            f"gap {c:.3e} at {q_tilde} exceeds boundary tolerance {FRAME_GAP_TOL:.0e}"
        )
    E = np.asarray(model.tangent_basis(q_tilde), dtype=float)
    P = np.asarray(model.projection(q_tilde), dtype=float)
    n = model.n
    if E.shape != (n, n - 1) or P.shape != (n - 1, n):
        raise DegenerateFrame(
            f"frame shapes E{E.shape}, P{P.shape} inconsistent with n={n}"
        )
    pe = P @ E
    if pe.size and np.max(np.abs(pe - np.eye(n - 1))) > FRAME_IDENTITY_TOL:
        raise DegenerateFrame(
            f"projection is not a left inverse of the tangent basis at {q_tilde}"
        )
    return BoundaryFrame(
        q_tilde=np.asarray(q_tilde, dtype=float),
        E=E,
        P=P,
        normal=np.asarray(model.boundary_gap_grad(q_tilde), dtype=float),
    )


def pullback_cotangent(frame: BoundaryFrame, p: np.ndarray) -> np.ndarray:
    """Restrict a configuration-space covector to the boundary: E^T p.

    The result is the coefficient tuple of the restricted covector against
    the dual basis of E's columns.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (frame.E.shape[0],):
        raise ValueError(f"covector length {p.shape} does not match n={frame.E.shape[0]}")
    return frame.E.T @ p


def push_cotangent(frame: BoundaryFrame, p_tilde: np.ndarray) -> np.ndarray:
    """Extend a boundary covector to configuration space: P^T p_tilde.

    pullback_cotangent(frame, push_cotangent(frame, p)) is the identity.
    """
    p_tilde = np.asarray(p_tilde, dtype=float)
    if p_tilde.shape != (frame.P.shape[0],):
        raise ValueError(
            f"boundary covector length {p_tilde.shape} does not match n-1={frame.P.shape[0]}"
        )
    return frame.P.T @ p_tilde


def omega_rank_deficiency(model: MechanicalModel, q: np.ndarray, tol: float = 1e-10) -> int:
    """Number of missing rows of rank in omega(q); 0 means full row rank."""
    if model.m_con == 0:
        return 0
    om = np.asarray(model.omega(q), dtype=float)
    rank = np.linalg.matrix_rank(om, tol=tol)
    return model.m_con - int(rank)


def transversality_margin(model: MechanicalModel, frame: BoundaryFrame) -> float:
    """Distance of the gap gradient from the boundary tangent span.

    A margin near zero means the level set is tangent to its own tangent
    basis, i.e. the boundary data is inconsistent.
    """
    coeffs, *_ = np.linalg.lstsq(frame.E, frame.normal, rcond=None)
    residual = frame.normal - frame.E @ coeffs
    return float(np.linalg.norm(residual))
