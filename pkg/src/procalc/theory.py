"""Branching theories and their free-algebra normal forms.

Five built-in theories parametrise the branching type of a process:

* ``sl`` -- semilattices with bottom (finite sets),
* ``cm`` -- commutative monoids (finite multisets),
* ``gs`` -- guarded semilattices over a fixed atom set (if-then-else tables),
* ``ca`` -- pointed convex algebras (subprobability distributions),
* ``cs`` -- pointed convex semilattices (finitely generated convex sets
  of subdistributions, kept as minimal generator sets).

All numeric data is exact (`fractions.Fraction`); normal forms are hashable
values with structural equality deciding equality of free-algebra elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional


class TheoryError(ValueError):
    """Ill-formed term, invalid parameter, or backend mismatch."""


# ---------------------------------------------------------------------------
# generic ordering of generators (used wherever sets must be walked
# deterministically: term readings, BFS target extraction, printing)

def generator_key(g):
    if g is None:
        return ("0",)
    if hasattr(g, "sort_key"):
        return ("k",) + tuple(g.sort_key())
    if isinstance(g, bool):
        return ("b", g)
    if isinstance(g, int):
        return ("i", g)
    if isinstance(g, Fraction):
        return ("q", g)
    if isinstance(g, str):
        return ("s", g)
    if isinstance(g, tuple):
        return ("t", tuple(generator_key(x) for x in g))
    if isinstance(g, frozenset):
        return ("f", tuple(sorted(generator_key(x) for x in g)))
    return ("r", repr(g))


def sorted_gens(gens):
    return sorted(gens, key=generator_key)


# ---------------------------------------------------------------------------
# terms over a generator set

@dataclass(frozen=True)
class TGen:
    gen: object


@dataclass(frozen=True)
class TConst0:
    pass


CONST0 = TConst0()


@dataclass(frozen=True)
class TOp:
    """Binary choice node; param is None (plain), frozenset (guard),
    or Fraction (probability)."""
    param: object
    args: tuple

    def __post_init__(self):
        if len(self.args) != 2:
            raise TheoryError("choice operations are binary")


# ---------------------------------------------------------------------------
# axiom schemas (shared by the proof checker, the skew-associativity
# classifier, and the soundness tests)

@dataclass(frozen=True)
class AVar:
    name: str


@dataclass(frozen=True)
class AZero:
    pass


@dataclass(frozen=True)
class AOp:
    family: str  # "plus" | "gplus" | "pplus"
    param: Optional[tuple]  # symbolic parameter expression, None for plain +
    left: object
    right: object


@dataclass(frozen=True)
class Axiom:
    name: str
    lhs: object
    rhs: object
    side: Optional[str] = None  # "pq<1" for the nested convex re-association


def param_symbols(expr):
    """Free parameter symbols of a symbolic guard/probability expression."""
    if expr is None:
        return set()
    tag = expr[0]
    if tag in ("gsym", "psym"):
        return {expr[1]}
    if tag in ("gfull", "pconst"):
        return set()
    out = set()
    for sub in expr[1:]:
        out |= param_symbols(sub)
    return out


def eval_param(expr, env, atoms=None):
    """Evaluate a symbolic parameter expression under an assignment."""
    tag = expr[0]
    if tag == "gsym" or tag == "psym":
        return env[expr[1]]
    if tag == "gfull":
        return frozenset(atoms)
    if tag == "gneg":
        return frozenset(atoms) - eval_param(expr[1], env, atoms)
    if tag == "gand":
        return eval_param(expr[1], env, atoms) & eval_param(expr[2], env, atoms)
    if tag == "pconst":
        return expr[1]
    if tag == "pneg":
        return 1 - eval_param(expr[1], env)
    if tag == "pmul":
        return eval_param(expr[1], env) * eval_param(expr[2], env)
    if tag == "pca4":
        p = eval_param(expr[1], env)
        q = eval_param(expr[2], env)
        if p * q == 1:
            raise TheoryError("re-association parameter undefined for pq = 1")
        return q * (1 - p) / (1 - p * q)
    raise TheoryError(f"unknown parameter expression {expr!r}")


def axiom_side_ok(ax, env):
    if ax.side is None:
        return True
    if ax.side == "pq<1":
        return env["p"] * env["q"] != 1
    raise TheoryError(f"unknown side condition {ax.side!r}")


_X, _Y, _Z = AVar("x"), AVar("y"), AVar("z")


def _plus(l, r):
    return AOp("plus", None, l, r)


def _gplus(p, l, r):
    return AOp("gplus", p, l, r)


def _pplus(p, l, r):
    return AOp("pplus", p, l, r)


_B = ("gsym", "b")
_C = ("gsym", "c")
_P = ("psym", "p")
_Q = ("psym", "q")

SL_AXIOMS = (
    Axiom("SL1", _plus(_X, AZero()), _X),
    Axiom("SL2", _plus(_X, _X), _X),
    Axiom("SL3", _plus(_X, _Y), _plus(_Y, _X)),
    Axiom("SL4", _plus(_X, _plus(_Y, _Z)), _plus(_plus(_X, _Y), _Z)),
)

CM_AXIOMS = (
    Axiom("CM1", _plus(_X, AZero()), _X),
    Axiom("CM2", _plus(_X, _Y), _plus(_Y, _X)),
    Axiom("CM3", _plus(_X, _plus(_Y, _Z)), _plus(_plus(_X, _Y), _Z)),
)

GS_AXIOMS = (
    Axiom("GS1", _gplus(_B, _X, _X), _X),
    Axiom("GS2", _gplus(("gfull",), _X, _Y), _X),
    Axiom("GS3", _gplus(_B, _X, _Y), _gplus(("gneg", _B), _Y, _X)),
    Axiom(
        "GS4",
        _gplus(_C, _gplus(_B, _X, _Y), _Z),
        _gplus(("gand", _B, _C), _X, _gplus(_C, _Y, _Z)),
    ),
)

CA_AXIOMS = (
    Axiom("CA1", _pplus(_P, _X, _X), _X),
    Axiom("CA2", _pplus(("pconst", Fraction(1)), _X, _Y), _X),
    Axiom("CA3", _pplus(_P, _X, _Y), _pplus(("pneg", _P), _Y, _X)),
    Axiom(
        "CA4",
        _pplus(_Q, _pplus(_P, _X, _Y), _Z),
        _pplus(("pmul", _P, _Q), _X, _pplus(("pca4", _P, _Q), _Y, _Z)),
        side="pq<1",
    ),
)

CS_AXIOMS = SL_AXIOMS + CA_AXIOMS + (
    Axiom(
        "D",
        _pplus(_P, _plus(_X, _Y), _Z),
        _plus(_pplus(_P, _X, _Z), _pplus(_P, _Y, _Z)),
    ),
)


# ---------------------------------------------------------------------------
# exact linear feasibility (used by the convex-set backend)

def feasible(rows, rhs):
    """Decide whether ``A x = b`` has a solution with ``x >= 0``.

    Phase-1 simplex with Bland's rule over exact rationals; ``rows`` is the
    list of rows of A, ``rhs`` the right-hand side b.
    """
    m = len(rows)
    n = len(rows[0]) if rows else 0
    tab = []
    b = []
    for i in range(m):
        row = [Fraction(v) for v in rows[i]]
        bi = Fraction(rhs[i])
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        # append artificial columns (identity)
        row += [Fraction(int(j == i)) for j in range(m)]
        tab.append(row)
        b.append(bi)
    basis = [n + i for i in range(m)]
    total = n + m

    def reduced_costs():
        # minimise the sum of artificials: c_j = 1 for artificials else 0
        rc = []
        for j in range(total):
            c = Fraction(1 if j >= n else 0)
            for i in range(m):
                if basis[i] >= n:
                    c -= tab[i][j]
            rc.append(c)
        return rc

    while True:
        rc = reduced_costs()
        enter = next((j for j in range(total) if rc[j] < 0), None)
        if enter is None:
            break
        ratios = [
            (b[i] / tab[i][enter], basis[i], i)
            for i in range(m)
            if tab[i][enter] > 0
        ]
        if not ratios:
            break  # unbounded cannot happen in phase 1, guard anyway
        _, _, piv = min(ratios)
        pv = tab[piv][enter]
        tab[piv] = [v / pv for v in tab[piv]]
        b[piv] /= pv
        for i in range(m):
            if i != piv and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [v - f * w for v, w in zip(tab[i], tab[piv])]
                b[i] -= f * b[piv]
        basis[piv] = enter
    value = sum(b[i] for i in range(m) if basis[i] >= n)
    return value == 0


# subdistributions are stored as frozensets of (generator, positive mass)

def _subdist(d):
    total = Fraction(0)
    for g, mass in d.items():
        if mass < 0:
            raise TheoryError("negative mass")
        total += mass
    if total > 1:
        raise TheoryError("total mass exceeds 1")
    return frozenset((g, m) for g, m in d.items() if m != 0)


def _merge_scaled(parts):
    """Combine [(weight, subdist)] into one subdistribution dict."""
    out = {}
    for w, sub in parts:
        if w == 0:
            continue
        for g, m in sub:
            out[g] = out.get(g, Fraction(0)) + w * m
    return {g: m for g, m in out.items() if m != 0}


ZERO_SUBDIST = frozenset()


def in_lower_hull(point, gens):
    """Membership of ``point`` in the down-closed convex hull of ``gens``
    together with the all-deadlock subdistribution.

    Exact feasibility of: exists lambda >= 0 with sum(lambda) <= 1 and
    sum(lambda_i * gen_i) >= point coordinate-wise.
    """
    point = dict(point)
    gens = [dict(g) for g in gens]
    coords = sorted_gens(set(point) | set().union(*map(set, gens)) if gens else set(point))
    k = len(gens)
    m = len(coords)
    # columns: lambda_1..k, slack per coordinate, slack for mass
    rows = []
    rhs = []
    for ci, x in enumerate(coords):
        row = [g.get(x, Fraction(0)) for g in gens]
        row += [Fraction(-int(j == ci)) for j in range(m)]
        row.append(Fraction(0))
        rows.append(row)
        rhs.append(point.get(x, Fraction(0)))
    rows.append([Fraction(1)] * k + [Fraction(0)] * m + [Fraction(1)])
    rhs.append(Fraction(1))
    return feasible(rows, rhs)


def canonical_convex_set(points):
    """Minimal generator set of a down-closed convex set of subdistributions.

    Always contains the all-deadlock subdistribution; every other kept
    generator lies outside the down-closed hull of the rest.
    """
    pts = set(points)
    pts.add(ZERO_SUBDIST)
    keep = sorted_gens(pts)
    for g in list(keep):
        if g == ZERO_SUBDIST:
            continue
        others = [o for o in keep if o != g and o != ZERO_SUBDIST]
        if in_lower_hull(g, others):
            keep.remove(g)
    return frozenset(keep)


# ---------------------------------------------------------------------------
# theory backends

class Theory:
    """A branching theory together with its normal-form backend."""

    id: str
    axioms: tuple
    binary_families: frozenset
    param_kinds: frozenset  # subset of {"plain", "guard", "prob"}
    atoms: tuple = ()

    # -- normal-form interface -------------------------------------------
    def bottom(self):
        raise NotImplementedError

    def unit(self, g):
        raise NotImplementedError

    def op_apply(self, param, args):
        raise NotImplementedError

    def nf_map(self, nf, f):
        raise NotImplementedError

    def nf_flatten(self, nf):
        raise NotImplementedError

    def generators(self, nf):
        raise NotImplementedError

    def term_of_nf(self, nf):
        raise NotImplementedError

    # -- shared helpers ---------------------------------------------------
    def nf_equal(self, a, b):
        return a == b

    def eval_term(self, t):
        if isinstance(t, TGen):
            return self.unit(t.gen)
        if isinstance(t, TConst0):
            return self.bottom()
        if isinstance(t, TOp):
            return self.op_apply(t.param, [self.eval_term(a) for a in t.args])
        raise TheoryError(f"not a term: {t!r}")

    def check_param(self, param):
        if param is None:
            if "plain" not in self.param_kinds:
                raise TheoryError(f"theory {self.id} has no unparametrised choice")
        elif isinstance(param, frozenset):
            if "guard" not in self.param_kinds:
                raise TheoryError(f"theory {self.id} has no guarded choice")
            if not param <= set(self.atoms):
                raise TheoryError(f"guard {sorted(param)} not within declared atoms")
        elif isinstance(param, Fraction):
            if "prob" not in self.param_kinds:
                raise TheoryError(f"theory {self.id} has no probabilistic choice")
            if not 0 <= param <= 1:
                raise TheoryError(f"probability {param} outside [0, 1]")
        else:
            raise TheoryError(f"bad choice parameter {param!r}")

    def __repr__(self):
        return f"<theory {self.id}>"

    def __eq__(self, other):
        return isinstance(other, Theory) and self.id == other.id and self.atoms == other.atoms

    def __hash__(self):
        return hash((self.id, self.atoms))


class Semilattice(Theory):
    id = "sl"
    axioms = SL_AXIOMS
    binary_families = frozenset({"plus"})
    param_kinds = frozenset({"plain"})

    def bottom(self):
        return frozenset()

    def unit(self, g):
        return frozenset({g})

    def op_apply(self, param, args):
        self.check_param(param)
        return args[0] | args[1]

    def nf_map(self, nf, f):
        return frozenset(f(g) for g in nf)

    def nf_flatten(self, nf):
        out = frozenset()
        for inner in nf:
            out |= inner
        return out

    def generators(self, nf):
        return set(nf)

    def term_of_nf(self, nf):
        gens = sorted_gens(nf)
        if not gens:
            return CONST0
        t = TGen(gens[0])
        for g in gens[1:]:
            t = TOp(None, (t, TGen(g)))
        return t


class CommutativeMonoid(Theory):
    id = "cm"
    axioms = CM_AXIOMS
    binary_families = frozenset({"plus"})
    param_kinds = frozenset({"plain"})

    def bottom(self):
        return frozenset()

    def unit(self, g):
        return frozenset({(g, 1)})

    def op_apply(self, param, args):
        self.check_param(param)
        out = {}
        for nf in args:
            for g, n in nf:
                out[g] = out.get(g, 0) + n
        return frozenset(out.items())

    def nf_map(self, nf, f):
        out = {}
        for g, n in nf:
            h = f(g)
            out[h] = out.get(h, 0) + n
        return frozenset(out.items())

    def nf_flatten(self, nf):
        out = {}
        for inner, n in nf:
            for g, k in inner:
                out[g] = out.get(g, 0) + n * k
        return frozenset(out.items())

    def generators(self, nf):
        return {g for g, _ in nf}

    def term_of_nf(self, nf):
        gens = []
        for g, n in sorted_gens(nf):
            gens.extend([g] * n)
        if not gens:
            return CONST0
        t = TGen(gens[0])
        for g in gens[1:]:
            t = TOp(None, (t, TGen(g)))
        return t


class GuardedSemilattice(Theory):
    """If-then-else tables over a fixed, ordered atom set.

    A normal form is a tuple aligned with the atom order whose entries are
    either a generator or None (the deadlock point).
    """

    id = "gs"
    axioms = GS_AXIOMS
    binary_families = frozenset({"gplus"})
    param_kinds = frozenset({"guard"})

    def __init__(self, atoms):
        atoms = tuple(atoms)
        if not atoms:
            raise TheoryError("guarded semilattices need a nonempty atom set")
        if len(set(atoms)) != len(atoms):
            raise TheoryError("duplicate atoms")
        self.atoms = atoms

    def bottom(self):
        return (None,) * len(self.atoms)

    def unit(self, g):
        return (g,) * len(self.atoms)

    def op_apply(self, param, args):
        self.check_param(param)
        l, r = args
        return tuple(
            l[i] if atom in param else r[i] for i, atom in enumerate(self.atoms)
        )

    def nf_map(self, nf, f):
        return tuple(None if e is None else f(e) for e in nf)

    def nf_flatten(self, nf):
        return tuple(
            None if inner is None else inner[i] for i, inner in enumerate(nf)
        )

    def generators(self, nf):
        return {e for e in nf if e is not None}

    def term_of_nf(self, nf):
        # group atoms by value, classes ordered by first occurrence
        classes = []
        for i, atom in enumerate(self.atoms):
            for value, guard in classes:
                if value == nf[i]:
                    guard.append(atom)
                    break
            else:
                classes.append((nf[i], [atom]))

        def leaf(value):
            return CONST0 if value is None else TGen(value)

        t = leaf(classes[-1][0])
        for value, guard in reversed(classes[:-1]):
            t = TOp(frozenset(guard), (leaf(value), t))
        return t


class ConvexAlgebra(Theory):
    """Subprobability distributions with exact rational masses; missing mass
    is deadlock."""

    id = "ca"
    axioms = CA_AXIOMS
    binary_families = frozenset({"pplus"})
    param_kinds = frozenset({"prob"})

    def bottom(self):
        return ZERO_SUBDIST

    def unit(self, g):
        return frozenset({(g, Fraction(1))})

    def op_apply(self, param, args):
        self.check_param(param)
        return _subdist(_merge_scaled([(param, args[0]), (1 - param, args[1])]))

    def nf_map(self, nf, f):
        out = {}
        for g, m in nf:
            h = f(g)
            out[h] = out.get(h, Fraction(0)) + m
        return _subdist(out)

    def nf_flatten(self, nf):
        return _subdist(_merge_scaled([(m, inner) for inner, m in nf]))

    def generators(self, nf):
        return {g for g, _ in nf}

    def term_of_nf(self, nf):
        items = sorted_gens(nf)
        deficit = 1 - sum(m for _, m in items)

        def build(items, deficit):
            if not items:
                return CONST0
            (g, mass), rest = items[0], items[1:]
            tail_mass = sum(m for _, m in rest) + deficit
            if tail_mass == 0:
                return TGen(g)
            weight = mass / (mass + tail_mass)
            return TOp(weight, (TGen(g), build(rest, deficit)))

        return build(items, deficit)


class ConvexSemilattice(Theory):
    """Finitely generated down-closed convex sets of subdistributions, kept
    as minimal generator sets that always include the all-deadlock point."""

    id = "cs"
    axioms = CS_AXIOMS
    binary_families = frozenset({"plus", "pplus"})
    param_kinds = frozenset({"plain", "prob"})

    def bottom(self):
        return frozenset({ZERO_SUBDIST})

    def unit(self, g):
        return frozenset({ZERO_SUBDIST, frozenset({(g, Fraction(1))})})

    def op_apply(self, param, args):
        self.check_param(param)
        l, r = args
        if param is None:
            return canonical_convex_set(l | r)
        combos = {
            _subdist(_merge_scaled([(param, a), (1 - param, b)]))
            for a in l
            for b in r
        }
        return canonical_convex_set(combos)

    def nf_map(self, nf, f):
        ca = ConvexAlgebra()
        return canonical_convex_set({ca.nf_map(sub, f) for sub in nf})

    def nf_flatten(self, nf):
        points = set()
        for theta in nf:
            inner_sets = sorted_gens([u for u, _ in theta])
            masses = dict(theta)
            gen_lists = [sorted_gens(u) for u in inner_sets]
            for choice in itertools.product(*gen_lists):
                points.add(
                    _subdist(
                        _merge_scaled(
                            [(masses[u], sub) for u, sub in zip(inner_sets, choice)]
                        )
                    )
                )
        return canonical_convex_set(points)

    def generators(self, nf):
        out = set()
        for sub in nf:
            out |= {g for g, _ in sub}
        return out

    def term_of_nf(self, nf):
        ca = ConvexAlgebra()
        readings = [ca.term_of_nf(sub) for sub in sorted_gens(nf)]
        t = readings[0]
        for r in readings[1:]:
            t = TOp(None, (t, r))
        return t


# ---------------------------------------------------------------------------
# registry and classifier

def make_theory(name, atoms=None):
    name = name.lower()
    if name == "sl":
        return Semilattice()
    if name == "cm":
        return CommutativeMonoid()
    if name == "gs":
        if not atoms:
            raise TheoryError("theory gs requires --atoms")
        return GuardedSemilattice(atoms)
    if name == "ca":
        return ConvexAlgebra()
    if name == "cs":
        return ConvexSemilattice()
    raise TheoryError(f"unknown theory {name!r}")


THEORY_NAMES = ("sl", "cm", "gs", "ca", "cs")


def _skew_shape(lhs, rhs):
    """Return the operation-family pair covered by an axiom of the shape
    sigma1(x, tau1(y, z)) = tau2(sigma2(x, y), z), if it has it."""
    if not (isinstance(lhs, AOp) and isinstance(rhs, AOp)):
        return None
    if not (isinstance(lhs.left, AVar) and isinstance(lhs.right, AOp)):
        return None
    inner_l = lhs.right
    if not (isinstance(inner_l.left, AVar) and isinstance(inner_l.right, AVar)):
        return None
    if not (isinstance(rhs.left, AOp) and isinstance(rhs.right, AVar)):
        return None
    inner_r = rhs.left
    if not (isinstance(inner_r.left, AVar) and isinstance(inner_r.right, AVar)):
        return None
    names = (lhs.left.name, inner_l.left.name, inner_l.right.name)
    if len(set(names)) != 3:
        return None
    if (inner_r.left.name, inner_r.right.name, rhs.right.name) != names:
        return None
    return (lhs.family, inner_l.family)


def is_skew_associative(theory):
    """Syntactic scan: every nested pair of binary choices must re-associate
    via some axiom of the theory."""
    covered = set()
    for ax in theory.axioms:
        for l, r in ((ax.lhs, ax.rhs), (ax.rhs, ax.lhs)):
            shape = _skew_shape(l, r)
            if shape is not None:
                covered.add(shape)
    fams = theory.binary_families
    return all((f1, f2) in covered for f1 in fams for f2 in fams)
