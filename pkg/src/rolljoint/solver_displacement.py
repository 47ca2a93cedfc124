"""Displacement-actuation solver.

Desired tendon lengths are generally not exactly reachable (pulling one
tendon releases the other), so the tensions are found by gradient descent on
the squared length error, with the equilibrium re-established after every
tension update.  The length-vs-tension Jacobian comes from an impulse test:
unit tension perturbations are pushed through the same block recursion the
equilibrium solver uses, and the resulting contact-point shifts are
contracted with the tendon-segment derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ContactRolloffError,
    NoConvergenceError,
    TensionFloorError,
)
from .mechanism import SIDES, Configuration, MechanismDesign, tendon_lengths
from .solver_tension import (
    SolverOptions,
    _back_substitute,
    _boundary_solve,
    _eliminate,
    solve_tension,
)
from .statics import all_joint_geometry, assemble_blocks, residual, residual_norm


@dataclass(frozen=True)
class DisplacementOptions:
    alpha: Optional[float] = None   # step size; default 1 / ||J||_F^2
    grad_tol: float = 1e-10
    max_outer_iters: int = 500
    tension_floor: float = 1e-3     # tendons cannot push
    alpha_growth: float = 1.2
    backtrack_factor: float = 0.5
    max_backtracks: int = 40
    inner: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if self.alpha is not None and self.alpha <= 0.0:
            raise ValueError("step size must be positive")
        if self.tension_floor <= 0.0:
            raise ValueError("tension floor must be positive")


@dataclass(frozen=True)
class DisplacementReport:
    outer_iterations: int
    converged: bool
    gradient_norm: float
    objective: float
    achieved_lengths: tuple[float, float]
    target_lengths: tuple[float, float]
    final_residual_norm: float
    inner_iterations: int
    backtrack_count: int
    objective_history: tuple[float, ...] = ()


def _impulse_response(design: MechanismDesign, config: Configuration, tau, loads):
    """Joint sensitivities (ds, df per unit tension impulse) and the geometry
    needed to turn them into length sensitivities."""
    geoms = all_joint_geometry(design, config)
    blocks = assemble_blocks(design, config, tau, loads, geoms=geoms)
    rhs = [np.vstack([np.zeros((3, 2)), -blk.F]) for blk in blocks]
    p_list, q_rhs, prod, acc, _ = _eliminate(blocks, rhs)
    solution = _boundary_solve(prod, acc)
    etas, _ = _back_substitute(p_list, q_rhs, solution[3:])
    # etas: (joints, 3, 2); row 0 is ds per unit (tau_l, tau_r) impulse
    return etas[:, 0, :], etas[:, 1:, :], geoms


def tendon_jacobian(
    design: MechanismDesign,
    config: Configuration,
    tau,
    loads=(),
) -> np.ndarray:
    """2x2 Jacobian of (l_left, l_right) with respect to (tau_l, tau_r).

    The configuration must already be an equilibrium for `tau`; the impulse
    responses are only meaningful around a balanced state.
    """
    jac, _, _ = _jacobian_with_sensitivity(design, config, tau, loads)
    return jac


def _jacobian_with_sensitivity(design, config, tau, loads):
    tau = np.asarray(tau, dtype=float)
    rows = residual(design, config, tau, loads)
    if residual_norm(rows, np.inf) > 1e-6:
        raise ValueError("tendon_jacobian requires an equilibrium configuration")
    ds_sens, df_sens, geoms = _impulse_response(design, config, tau, loads)
    jac = np.zeros((2, 2))
    for row, side in enumerate(SIDES):
        for j, geom in enumerate(geoms):
            seg = geom.v[side]
            jac[row] += float(seg.unit @ seg.d_vec) * ds_sens[j]
    return jac, ds_sens, df_sens


def solve_displacement(
    design: MechanismDesign,
    l_des,
    loads=(),
    tau_init=(1.0, 1.0),
    opts: Optional[DisplacementOptions] = None,
) -> tuple[np.ndarray, Configuration, DisplacementReport]:
    """Find tensions whose equilibrium best matches the desired tendon lengths."""
    opts = opts or DisplacementOptions()
    l_des = np.asarray(l_des, dtype=float)
    tau = np.asarray(tau_init, dtype=float)
    floor = opts.tension_floor
    if np.any(tau < floor):
        raise ValueError("initial tensions must be at or above the tension floor")

    config, inner_rep = solve_tension(design, tau, loads, opts=opts.inner)
    inner_iters = inner_rep.iterations
    lengths = tendon_lengths(design, config)
    error = lengths - l_des
    objective = 0.5 * float(error @ error)
    history = [objective]
    alpha = opts.alpha
    backtracks = 0

    for outer in range(opts.max_outer_iters + 1):
        jac, ds_sens, df_sens = _jacobian_with_sensitivity(design, config, tau, loads)
        grad = error @ jac
        grad_norm = float(np.linalg.norm(grad))
        jac_norm = float(np.linalg.norm(jac))
        scale = max(1.0, float(np.linalg.norm(error)) * jac_norm)
        if grad_norm <= opts.grad_tol * scale:
            report = DisplacementReport(
                outer_iterations=outer,
                converged=True,
                gradient_norm=grad_norm,
                objective=objective,
                achieved_lengths=tuple(lengths),
                target_lengths=tuple(l_des),
                final_residual_norm=inner_rep.final_residual_norm,
                inner_iterations=inner_iters,
                backtrack_count=backtracks,
                objective_history=tuple(history),
            )
            return tau, config, report
        if outer == opts.max_outer_iters:
            break
        if alpha is None:
            alpha = 1.0 / max(jac_norm**2, 1e-30)

        accepted = False
        for _ in range(opts.max_backtracks + 1):
            tau_trial = np.maximum(tau - alpha * grad, floor)
            step = tau_trial - tau
            if not np.any(step):
                if np.all(tau <= floor):
                    raise TensionFloorError(
                        "descent pinned both tensions at the floor",
                        configuration=config,
                    )
                break
            s_ws = config.s + ds_sens @ step
            f_ws = config.f + df_sens @ step
            warm = Configuration.from_unknowns(
                design, _clamp_into_domains(design, s_ws), f_ws
            )
            try:
                config_trial, rep_trial = solve_tension(
                    design, tau_trial, loads, init=warm, opts=opts.inner
                )
            except (ContactRolloffError, NoConvergenceError):
                alpha *= opts.backtrack_factor
                backtracks += 1
                continue
            inner_iters += rep_trial.iterations
            lengths_trial = tendon_lengths(design, config_trial)
            error_trial = lengths_trial - l_des
            objective_trial = 0.5 * float(error_trial @ error_trial)
            if objective_trial <= objective * (1.0 + 1e-14) + 1e-300:
                tau, config, inner_rep = tau_trial, config_trial, rep_trial
                lengths, error, objective = lengths_trial, error_trial, objective_trial
                alpha *= opts.alpha_growth
                accepted = True
                break
            alpha *= opts.backtrack_factor
            backtracks += 1
        history.append(objective)
        if not accepted:
            break

    report = DisplacementReport(
        outer_iterations=len(history) - 1,
        converged=False,
        gradient_norm=float(np.linalg.norm(error @ _safe_jacobian(design, config, tau, loads))),
        objective=objective,
        achieved_lengths=tuple(lengths),
        target_lengths=tuple(l_des),
        final_residual_norm=inner_rep.final_residual_norm,
        inner_iterations=inner_iters,
        backtrack_count=backtracks,
        objective_history=tuple(history),
    )
    raise NoConvergenceError(
        "displacement descent did not reach the gradient tolerance",
        report=report,
        configuration=config,
    )


def _safe_jacobian(design, config, tau, loads) -> np.ndarray:
    try:
        return tendon_jacobian(design, config, tau, loads)
    except Exception:
        return np.zeros((2, 2))


def _clamp_into_domains(design: MechanismDesign, s: np.ndarray) -> np.ndarray:
    out = np.array(s, dtype=float)
    for j in range(design.joint_count):
        lo, hi = design.joint_domain(j)
        out[j] = min(max(out[j], lo), hi)
    return out
