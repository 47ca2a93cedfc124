"""Recursive Newton solver for tension-actuated equilibrium.

Each iteration assembles the per-link blocks, eliminates them forward into a
single 6x6 boundary system (base pose fixed, no joint unknowns past the tip),
solves it, back-substitutes for every joint update and applies a backtracking
line search on the scaled residual norm.  Interior links cost one 3x3
inversion each; the boundary solve is the only 6x6 operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContactRolloffError, NoConvergenceError, SingularBlockError
from .loads import check_targets
from .mechanism import Configuration, MechanismDesign
from .statics import LinkBlocks, assemble_blocks, residual, residual_norm

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class SolverOptions:
    tol_residual: float = 1e-9      # scaled residual infinity norm [N]
    max_iters: int = 100
    line_search: bool = True
    backtrack_factor: float = 0.5
    max_backtracks: int = 20
    s_clamp: bool = True

    def __post_init__(self):
        if self.tol_residual <= 0.0 or self.max_iters < 1:
            raise ValueError("tolerance must be positive and max_iters >= 1")


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_residual_norm: float
    backtrack_count: int
    clamped_joints: tuple[int, ...]
    converged: bool
    residual_history: tuple[float, ...] = ()
    inversions_3x3: int = 0
    solves_6x6: int = 0


@dataclass(frozen=True)
class NewtonStep:
    ds: np.ndarray
    df: np.ndarray
    d_xi_tip: np.ndarray
    inversions_3x3: int
    solves_6x6: int


def _checked_inverse(matrix: np.ndarray, what: str) -> np.ndarray:
    row_scale = np.abs(matrix).max(axis=1)
    if np.any(row_scale == 0.0) or not np.all(np.isfinite(row_scale)):
        raise SingularBlockError(f"singular {what}")
    balanced = matrix / row_scale[:, None]
    col_scale = np.abs(balanced).max(axis=0)
    if np.any(col_scale == 0.0):
        raise SingularBlockError(f"singular {what}")
    try:
        cond = np.linalg.cond(balanced / col_scale[None, :])
        out = np.linalg.inv(matrix)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"singular {what}") from exc
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularBlockError(f"ill-conditioned {what} (cond {cond:.2e})")
    return out


def _equilibrated_solve(matrix: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    """Solve after one row/column equilibration pass; mixed units (mm, rad, N)
    otherwise inflate the conditioning estimate for purely notational reasons."""
    row_scale = np.abs(matrix).max(axis=1)
    if not np.all(np.isfinite(row_scale)) or np.any(row_scale == 0.0):
        raise SingularBlockError(f"singular {what}")
    balanced = matrix / row_scale[:, None]
    col_scale = np.abs(balanced).max(axis=0)
    if np.any(col_scale == 0.0):
        raise SingularBlockError(f"singular {what}")
    balanced = balanced / col_scale[None, :]
    try:
        cond = np.linalg.cond(balanced)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"singular {what}") from exc
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularBlockError(f"ill-conditioned {what} (cond {cond:.2e})")
    solution = np.linalg.solve(balanced, rhs / row_scale[:, None])
    return solution / col_scale[:, None]


def _eliminate(blocks: list[LinkBlocks], rhs: list[np.ndarray]):
    """Forward pass of the block recursion.

    Returns per-link propagators P_k, the propagated per-link inputs Q_k r_k,
    the accumulated product P = P_tip ... P_1 and accumulated input, plus the
    interior 3x3 inversion count.
    """
    width = rhs[0].shape[1]
    prod = np.eye(6)
    acc = np.zeros((6, width))
    p_list: list[np.ndarray] = []
    q_rhs: list[np.ndarray] = []
    inversions = 0
    last = len(blocks) - 1
    for k, blk in enumerate(blocks):
        if k == last:
            d_inv = np.eye(3)
        else:
            d_inv = _checked_inverse(blk.D, f"D block at link {k + 1}")
            inversions += 1
        q_mat = np.zeros((6, 6))
        q_mat[:3, :3] = np.eye(3)
        q_mat[3:, :3] = -d_inv @ blk.C
        q_mat[3:, 3:] = d_inv
        left = np.zeros((6, 6))
        left[:3, :3] = blk.A
        left[:3, 3:] = blk.B
        left[3:, 3:] = blk.E
        p_mat = -q_mat @ left
        qr = q_mat @ rhs[k]
        acc = p_mat @ acc + qr
        prod = p_mat @ prod
        p_list.append(p_mat)
        q_rhs.append(qr)
    return p_list, q_rhs, prod, acc, inversions


def _boundary_solve(prod: np.ndarray, acc: np.ndarray) -> np.ndarray:
    """Solve for (d_xi_tip, d_eta_base) from the accumulated recursion."""
    boundary = np.zeros((6, 6))
    boundary[:3, :3] = np.eye(3)
    boundary[:, 3:] = -prod[:, 3:]
    return _equilibrated_solve(boundary, acc, "boundary system")


def _back_substitute(
    p_list: list[np.ndarray], q_rhs: list[np.ndarray], eta_base: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Recover every joint update from the base update; returns the stacked
    joint updates (joints, 3, width) and the tip pose perturbation."""
    width = eta_base.shape[1]
    state = np.zeros((6, width))
    state[3:] = eta_base
    etas = [eta_base]
    for k in range(len(p_list)):
        state = p_list[k] @ state + q_rhs[k]
        if k < len(p_list) - 1:
            etas.append(state[3:])
    return np.array(etas), state[:3]


def newton_step(
    design: MechanismDesign,
    config: Configuration,
    tau,
    loads=(),
    blocks: Optional[list[LinkBlocks]] = None,
) -> NewtonStep:
    """One full-length update of all joint unknowns at the current state."""
    if blocks is None:
        blocks = assemble_blocks(design, config, tau, loads)
    rhs = [np.concatenate([np.zeros(3), -blk.h]).reshape(6, 1) for blk in blocks]
    p_list, q_rhs, prod, acc, inversions = _eliminate(blocks, rhs)
    solution = _boundary_solve(prod, acc)
    etas, d_xi_tip = _back_substitute(p_list, q_rhs, solution[3:])
    return NewtonStep(
        ds=etas[:, 0, 0],
        df=etas[:, 1:, 0],
        d_xi_tip=d_xi_tip[:, 0],
        inversions_3x3=inversions,
        solves_6x6=1,
    )


def initial_forces(design: MechanismDesign, s: np.ndarray, tau, loads=()) -> np.ndarray:
    """Least-squares contact forces for fixed contact points.

    The balance is affine in the contact forces, so this is one small linear
    least-squares fit.  Starting Newton from all-zero forces instead puts the
    iterate on a nearly singular manifold where the first step degenerates.
    """
    joints = design.joint_count
    config = Configuration.from_unknowns(design, s, np.zeros((joints, 2)))
    blocks = assemble_blocks(design, config, tau, loads)
    scale = np.array([1.0 / design.characteristic_length, 1.0, 1.0])
    coeff = np.zeros((3 * joints, 2 * joints))
    rhs = np.zeros(3 * joints)
    for k in range(1, design.n):
        blk = blocks[k - 1]
        row = 3 * (k - 1)
        rhs[row:row + 3] = -blk.h * scale
        coeff[row:row + 3, 2 * (k - 1):2 * k] += blk.E[:, 1:] * scale[:, None]
        if k <= design.n - 2:
            coeff[row:row + 3, 2 * k:2 * k + 2] += blk.D[:, 1:] * scale[:, None]
    fit, *_ = np.linalg.lstsq(coeff, rhs, rcond=None)
    return fit.reshape(joints, 2)


def default_initial_state(design: MechanismDesign, tau, loads=()) -> tuple[np.ndarray, np.ndarray]:
    """Contact points at the mating-domain midpoints, forces from the affine fit."""
    s = design.joint_midpoints()
    return s, initial_forces(design, s, tau, loads)


def _clamp_s(design: MechanismDesign, s: np.ndarray) -> tuple[np.ndarray, list[int]]:
    clamped = []
    out = s.copy()
    for j in range(design.joint_count):
        lo, hi = design.joint_domain(j)
        if out[j] < lo or out[j] > hi:
            clamped.append(j)
            out[j] = min(max(out[j], lo), hi)
    return out, clamped


def _pinned_joints(design: MechanismDesign, s: np.ndarray) -> list[int]:
    pinned = []
    for j in range(design.joint_count):
        lo, hi = design.joint_domain(j)
        slack = 1e-9 * (hi - lo)
        if s[j] <= lo + slack or s[j] >= hi - slack:
            pinned.append(j)
    return pinned


def solve_tension(
    design: MechanismDesign,
    tau,
    loads=(),
    init: Optional[Configuration] = None,
    opts: Optional[SolverOptions] = None,
) -> tuple[Configuration, SolveReport]:
    """Find the equilibrium configuration under the given tendon tensions."""
    opts = opts or SolverOptions()
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0.0):
        raise ValueError("tendon tensions must be positive")
    check_targets(loads, design.n)

    if init is not None:
        s, _ = _clamp_s(design, np.array(init.s, dtype=float))
        f = np.array(init.f, dtype=float)
    else:
        s, f = default_initial_state(design, tau, loads)

    history: list[float] = []
    clamped_all: set[int] = set()
    backtracks = 0
    inversions = 0
    boundary_solves = 0
    iterations = 0

    config = Configuration.from_unknowns(design, s, f)
    rows = residual(design, config, tau, loads)
    norm_inf = residual_norm(rows, np.inf)
    history.append(norm_inf)

    while norm_inf > opts.tol_residual:
        if iterations >= opts.max_iters:
            report = _report(
                iterations, norm_inf, backtracks, clamped_all, False,
                history, inversions, boundary_solves,
            )
            raise NoConvergenceError(
                f"no convergence after {iterations} iterations "
                f"(residual {norm_inf:.3e})",
                report=report,
                configuration=config,
            )
        step = newton_step(design, config, tau, loads)
        inversions += step.inversions_3x3
        boundary_solves += step.solves_6x6
        iterations += 1

        norm_2 = residual_norm(rows, 2)
        scale = 1.0
        accepted = False
        for _ in range(opts.max_backtracks + 1):
            s_trial = s + scale * step.ds
            if opts.s_clamp:
                s_trial, clamped = _clamp_s(design, s_trial)
            else:
                clamped = []
            f_trial = f + scale * step.df
            trial = Configuration.from_unknowns(design, s_trial, f_trial)
            rows_trial = residual(design, trial, tau, loads)
            trial_2 = residual_norm(rows_trial, 2)
            if (not opts.line_search) or trial_2 < norm_2 or trial_2 <= opts.tol_residual:
                accepted = True
                break
            scale *= opts.backtrack_factor
            backtracks += 1
        if not accepted:
            report = _report(
                iterations, norm_inf, backtracks, clamped_all, False,
                history, inversions, boundary_solves,
            )
            pinned = _pinned_joints(design, s)
            if pinned:
                raise ContactRolloffError(
                    f"stalled with contact pinned at a domain boundary "
                    f"for joints {pinned}",
                    report=report,
                    configuration=config,
                )
            raise NoConvergenceError(
                "line search stalled without residual decrease",
                report=report,
                configuration=config,
            )
        s, f, config, rows = s_trial, f_trial, trial, rows_trial
        clamped_all.update(clamped)
        norm_inf = residual_norm(rows, np.inf)
        history.append(norm_inf)

    report = _report(
        iterations, norm_inf, backtracks, clamped_all, True,
        history, inversions, boundary_solves,
    )
    pinned = _pinned_joints(design, s)
    if pinned:
        raise ContactRolloffError(
            f"converged with contact at domain boundary for joints {pinned}",
            report=report,
            configuration=config,
        )
    return config, report


def _report(iterations, norm_inf, backtracks, clamped_all, converged, history,
            inversions, boundary_solves) -> SolveReport:
    return SolveReport(
        iterations=iterations,
        final_residual_norm=norm_inf,
        backtrack_count=backtracks,
        clamped_joints=tuple(sorted(clamped_all)),
        converged=converged,
        residual_history=tuple(history),
        inversions_3x3=inversions,
        solves_6x6=boundary_solves,
    )
