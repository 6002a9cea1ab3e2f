"""Independent oracles used only by the test suite.

Each reimplements a fact by a different algorithm than the package:
convex membership by basic-solution enumeration with Gaussian elimination,
and the syntactic U(e) over-approximation of the reachable state set.
"""

import itertools
from fractions import Fraction

import procalc as pc
from procalc.theory import ZERO_SUBDIST, sorted_gens


def _gauss_solve(rows, rhs):
    """Solve a square rational system exactly; None if singular."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [v - f * w for v, w in zip(a[i], a[col])]
    return [a[i][n] for i in range(n)]


def convex_member_bruteforce(point, gens):
    """Membership of a subdistribution in the down-closed convex hull of
    ``gens`` plus the all-deadlock point, by enumerating basic feasible
    solutions of the equality system with explicit slacks."""
    point = dict(point)
    gens = [dict(g) for g in gens]
    coords = sorted_gens(set(point).union(*[set(g) for g in gens]) if gens else set(point))
    k, m = len(gens), len(coords)
    # columns: lambda_1..k, one slack per coordinate, one mass slack
    cols = []
    for j in range(k):
        cols.append([gens[j].get(x, Fraction(0)) for x in coords] + [Fraction(1)])
    for ci in range(m):
        cols.append([Fraction(-int(i == ci)) for i in range(m)] + [Fraction(0)])
    cols.append([Fraction(0)] * m + [Fraction(1)])
    rhs = [point.get(x, Fraction(0)) for x in coords] + [Fraction(1)]
    nrows = m + 1
    for basis in itertools.combinations(range(len(cols)), nrows):
        rows = [[cols[j][i] for j in basis] for i in range(nrows)]
        sol = _gauss_solve(rows, rhs)
        if sol is not None and all(v >= 0 for v in sol):
            return True
    return False


def u_set(e):
    """Syntactic over-approximation of the reachable expressions."""
    if isinstance(e, (pc.Var, pc.Zero)):
        return {e}
    if isinstance(e, pc.Prefix):
        return {e} | u_set(e.body)
    if isinstance(e, pc.Op):
        out = {e}
        for a in e.args:
            out |= u_set(a)
        return out
    if isinstance(e, pc.Mu):
        return {e} | {
            pc.guarded_subst_exp(f, e, e.var) for f in u_set(e.body)
        }
    raise TypeError(e)
