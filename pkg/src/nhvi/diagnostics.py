"""Post-hoc trajectory analysis: energy series, residuals, run summaries.

Everything here recomputes its quantities from the stored trajectory rather
than trusting values cached by the integrator, so the report doubles as an
honesty check on the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .discretization import DiscreteLagrangian, discrete_energy, omega_dplus
from .geometry import MechanicalModel
from .integrator import Trajectory, _impact_a_residual, _impact_b_residual


@dataclass
class RunReport:
    impact_count: int
    impact_times: List[float]
    energy_initial: float
    energy_final: float
    energy_drift_rel: float
    max_constraint_residual: float
    min_boundary_gap: float
    newton_iter_stats: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "impact_count": self.impact_count,
            "impact_times": list(self.impact_times),
            "energy_initial": self.energy_initial,
            "energy_final": self.energy_final,
            "energy_drift_rel": self.energy_drift_rel,
            "max_constraint_residual": self.max_constraint_residual,
            "min_boundary_gap": self.min_boundary_gap,
            "newton_iter_stats": dict(self.newton_iter_stats),
        }


def _impact_map(traj: Trajectory):
    return {ev.k: ev for ev in traj.impacts}


def energy_series(traj: Trajectory, Ld: DiscreteLagrangian) -> List[Tuple[float, float]]:
    """Discrete energy -d3 at every trajectory node, impact nodes included.

    States whose step contained a collision are evaluated on their actual
    sub-step alpha*h, and the boundary node contributes an extra sample at
    the impact time with sub-step (1-alpha)*h.
    """
    if not traj.states:
        raise ValueError("trajectory has no states")
    h = traj.h
    events = _impact_map(traj)
    series: List[Tuple[float, float]] = []
    for st in traj.states:
        ev = events.get(st.k)
        if ev is not None:
            s1 = ev.alpha * h
            series.append((st.t, discrete_energy(Ld, st.q, st.v, s1)))
            s2 = (1.0 - ev.alpha) * h
            series.append(
                (ev.t_impact, discrete_energy(Ld, ev.q_tilde, ev.v_tilde, s2))
            )
        else:
            series.append((st.t, discrete_energy(Ld, st.q, st.v, h)))
    return series


def build_report(
    traj: Trajectory, Ld: DiscreteLagrangian, model: MechanicalModel
) -> RunReport:
    """Aggregate energy behavior, constraint residuals and solver statistics."""
    series = energy_series(traj, Ld)
    energies = np.array([e for _, e in series])
    e0 = float(energies[0])
    drift = float(np.max(np.abs(energies - e0))) / max(1.0, abs(e0))

    h = traj.h
    events = _impact_map(traj)
    max_residual = 0.0
    if model.m_con:
        for st in traj.states[1:]:
            ev = events.get(st.k)
            s = ev.alpha * h if ev is not None else h
            r = float(np.max(np.abs(omega_dplus(model, st.q, st.v, s))))
            if r > max_residual:
                max_residual = r
        for ev in traj.impacts:
            r = float(
                np.max(
                    np.abs(
                        omega_dplus(
                            model, ev.q_tilde, ev.v_tilde, (1.0 - ev.alpha) * h
                        )
                    )
                )
            )
            if r > max_residual:
                max_residual = r

    min_gap = min(model.boundary_gap(st.q) for st in traj.states)

    iters = traj.solver_stats.iterations
    stats = {
        "mean": float(np.mean(iters)) if iters else 0.0,
        "max": float(max(iters)) if iters else 0.0,
    }

    return RunReport(
        impact_count=len(traj.impacts),
        impact_times=[ev.t_impact for ev in traj.impacts],
        energy_initial=e0,
        energy_final=float(energies[-1]),
        energy_drift_rel=drift,
        max_constraint_residual=max_residual,
        min_boundary_gap=float(min_gap),
        newton_iter_stats=stats,
    )


def recompute_solve_residuals(
    traj: Trajectory, Ld: DiscreteLagrangian, model: MechanicalModel
) -> np.ndarray:
    """Re-evaluate every recorded solve residual from the stored trajectory.

    Returns one infinity norm per solver_stats entry, computed from the
    stored states and events alone; comparing against the stored values
    verifies the integrator recorded what it actually achieved.
    """
    h = traj.h
    events = _impact_map(traj)
    out = np.empty(len(traj.solver_stats))

    def full_step_residual(k):
        nxt = traj.states[k + 1]
        r1 = Ld.d1(nxt.q, nxt.v, h) + nxt.p - model.omega(nxt.q).T @ nxt.lam
        parts = [np.max(np.abs(r1))]
        if model.m_con:
            parts.append(np.max(np.abs(omega_dplus(model, nxt.q, nxt.v, h))))
        return float(max(parts))

    for i, (k, phase) in enumerate(
        zip(traj.solver_stats.ks, traj.solver_stats.phases)
    ):
        if phase.endswith("-rejected"):
            # this solve produced a configuration that a later impact
            # deleted; there is nothing left to recompute it from
            out[i] = traj.solver_stats.residuals[i]
        elif phase in ("step", "impact-D"):
            out[i] = full_step_residual(k)
        elif phase == "impact-A":
            out[i] = _impact_a_residual(
                Ld, model, traj.states[k].q, traj.states[k].p, events[k], h
            )
        elif phase == "impact-B":
            out[i] = _impact_b_residual(Ld, model, traj.states[k].q, events[k], h)
        else:
            raise ValueError(f"unknown solver phase {phase!r}")
    return out
