"""Test-side oracles: dense assemblies that avoid the recursive elimination."""

import numpy as np

from rolljoint.statics import assemble_blocks


def dense_newton_step(design, config, tau, loads=()):
    """Newton update solved from the fully stacked block system with one
    dense LU, no forward elimination; same linearization, independent path.

    Unknowns: [xi_1..xi_{n-1} | eta_0..eta_{n-2}], each 3 wide.
    """
    blocks = assemble_blocks(design, config, tau, loads)
    n = design.n
    joints = n - 1
    dim = 6 * joints
    mat = np.zeros((dim, dim))
    rhs = np.zeros(dim)

    def xi_col(k):      # pose perturbation of link k, k in 1..n-1
        return 3 * (k - 1)

    def eta_col(j):     # joint unknowns of joint j, j in 0..n-2
        return 3 * joints + 3 * j

    for k in range(1, n):
        blk = blocks[k - 1]
        row1 = 6 * (k - 1)
        row2 = row1 + 3
        mat[row1:row1 + 3, xi_col(k):xi_col(k) + 3] += np.eye(3)
        if k >= 2:
            mat[row1:row1 + 3, xi_col(k - 1):xi_col(k - 1) + 3] += blk.A
        mat[row1:row1 + 3, eta_col(k - 1):eta_col(k - 1) + 3] += blk.B
        mat[row2:row2 + 3, xi_col(k):xi_col(k) + 3] += blk.C
        if k <= n - 2:
            mat[row2:row2 + 3, eta_col(k):eta_col(k) + 3] += blk.D
        mat[row2:row2 + 3, eta_col(k - 1):eta_col(k - 1) + 3] += blk.E
        rhs[row2:row2 + 3] = -blk.h

    solution = np.linalg.solve(mat, rhs)
    etas = solution[3 * joints:].reshape(joints, 3)
    return etas[:, 0], etas[:, 1:]
