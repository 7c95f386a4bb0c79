"""Exact rational oracle for the characteristic function of one small tuple.

The tuple lives on ``C^2`` with ``d = 2``. Its row is

    T = V - e_1 delta gammaInf^*,

where ``V`` maps the unit vector ``u = (3/5, 0, 0, 4/5)`` of ``C^4`` to ``e_2``
and kills ``u^perp``, ``gammaInf = [f_2, f_3, w]`` frames ``u^perp`` with
``w = (4/5, 0, 0, -3/5)``, and ``delta = [1/2, 0, 1/3]``. Everything below is
computed with sympy from the defining formulas, using these hand-picked
frames instead of the SVD frames of the library. Frame choices change
``b_T`` only by constant unitaries, so the comparison uses the frame-free
quantities ``b_T(z) b_T(w)^*`` (``p = 1``) and the singular values of ``b_T(z)``.
"""

from __future__ import annotations

import sympy as sp

R = sp.Rational


def instance():
    u = sp.Matrix([R(3, 5), 0, 0, R(4, 5)])
    w = sp.Matrix([R(4, 5), 0, 0, R(-3, 5)])
    f2 = sp.Matrix([0, 1, 0, 0])
    f3 = sp.Matrix([0, 0, 1, 0])
    e1 = sp.Matrix([1, 0])
    e2 = sp.Matrix([0, 1])
    gamma_inf = sp.Matrix.hstack(f2, f3, w)
    delta = sp.Matrix([[R(1, 2), 0, R(1, 3)]])
    V = e2 * u.T
    row = V - e1 * delta * gamma_inf.T
    return row, V, e1, gamma_inf, delta


def blocks(row):
    return [row[:, 0:2], row[:, 2:4]]


def b_T(z):
    """Exact ``b_T(z)`` (``1 x 3``) in the hand-picked frames."""
    row, V, g0, ginf, delta = instance()
    T1, T2 = blocks(row)
    zc = [sp.conjugate(c) for c in z]
    Gamma = (sp.eye(2) - (zc[0] * T1 + zc[1] * T2)).inv() * g0
    D = Gamma.H * g0
    zrow = sp.Matrix.hstack(z[0] * sp.eye(2), z[1] * sp.eye(2))
    bV = D.inv() * (Gamma.H * zrow * ginf)
    # scalar-output Frostman shift: D_{delta^*}^{-1} (bV + delta)(I + delta^* bV)^{-1} D_delta
    Dd = sp.sqrt(1 - (delta * delta.H)[0, 0])
    DdelI = sp.eye(3) - delta.H * delta
    # D_delta = sqrt(I - delta^* delta) has eigenvalue Dd on delta^* and 1 elsewhere
    P = delta.H * delta / (delta * delta.H)[0, 0]
    D_delta = Dd * P + (sp.eye(3) - P)
    assert sp.simplify(D_delta * D_delta - DdelI) == sp.zeros(3, 3)
    return sp.simplify((bV + delta) * (sp.eye(3) + delta.H * bV).inv() * D_delta / Dd)


POINTS = [
    (R(0), R(0)),
    (R(1, 3), R(1, 4)),
    (R(-1, 2), sp.I / 3),
    (sp.I / 5, R(2, 5)),
]


if __name__ == "__main__":
    vals = [b_T(z) for z in POINTS]
    print("gram")
    for a in vals:
        print([complex(sp.N((a * b.H)[0, 0], 30)) for b in vals])
    print("norms")
    print([float(sp.re(sp.N(sp.sqrt((a * a.H)[0, 0]), 30))) for a in vals])
