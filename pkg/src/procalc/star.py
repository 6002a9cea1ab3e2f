"""The star fragment: iteration expressions, their direct semantics, and
syntactic derivative operators.

Star expressions ``0 | 1 | a | e +_s f | e;f | e^(s)`` translate into the
full calculus via a reserved continuation variable (spelled ``$unit``); their
behaviour can also be computed directly, with a termination transition in
place of the continuation.  The two routes agree up to renaming outputs of
the continuation variable to termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import syntax
from .semantics import Out, Step, TICK, Tick, reachable, disjoint_union
from .equivalence import check_states
from .syntax import (Mu, Op, ParseError, Prefix, TokenStream, Var, ZERO,
                     all_names, fresh_name, is_guarded, parse_param,
                     render_param, substitute)
from .theory import TheoryError

UNIT_VAR = "$unit"


# ---------------------------------------------------------------------------
# abstract syntax

class SExp:
    def sort_key(self):
        return ("sexp", self.star_unparse())

    def star_unparse(self):
        return unparse_sexp(self)


@dataclass(frozen=True)
class SZero(SExp):
    pass


@dataclass(frozen=True)
class SOne(SExp):
    pass


@dataclass(frozen=True)
class SAct(SExp):
    action: str


@dataclass(frozen=True)
class SChoice(SExp):
    param: object
    left: SExp
    right: SExp


@dataclass(frozen=True)
class SSeq(SExp):
    left: SExp
    right: SExp


@dataclass(frozen=True)
class SStar(SExp):
    param: object
    body: SExp


SZERO, SONE = SZero(), SOne()


# ---------------------------------------------------------------------------
# parser / printer

def parse_sexp(text, theory, gkat=False, actions=None):
    ts = TokenStream(text)
    use = syntax.NameUse(actions)
    e = _parse_schoice(ts, theory, use, gkat)
    t = ts.peek()
    if t[0] != "eof":
        raise ParseError(f"trailing input {t[1]!r}", t[2])
    return e


def _parse_schoice(ts, theory, use, gkat):
    e = _parse_sseq(ts, theory, use, gkat)
    while ts.at("+"):
        ts.next()
        if ts.at("["):
            param = parse_param(ts, theory)
        else:
            param = None
            theory.check_param(None)
        e = SChoice(param, e, _parse_sseq(ts, theory, use, gkat))
    return e


def _parse_sseq(ts, theory, use, gkat):
    e = _parse_spost(ts, theory, use, gkat)
    while ts.at(";"):
        ts.next()
        e = SSeq(e, _parse_spost(ts, theory, use, gkat))
    return e


def _parse_spost(ts, theory, use, gkat):
    e = _parse_satom(ts, theory, use, gkat)
    while ts.at("^"):
        ts.next()
        if ts.at("*"):
            ts.next()
            param = None
            theory.check_param(None)
        else:
            param = parse_param(ts, theory)
        e = SStar(param, e)
    return e


def _parse_satom(ts, theory, use, gkat):
    kind, val, pos = ts.next()
    if kind == "num" and val == "0":
        return SZERO
    if kind == "num" and val == "1":
        return SONE
    if kind == "(":
        e = _parse_schoice(ts, theory, use, gkat)
        ts.expect(")")
        return e
    if kind == "ident":
        if gkat and val == "test":
            guard = parse_param(ts, theory)
            if not isinstance(guard, frozenset):
                raise ParseError("test expects a guard", pos)
            return SChoice(guard, SONE, SZERO)
        use.see_action(val, pos)
        return SAct(val)
    raise ParseError(f"unexpected token {val!r}", pos)


_CHOICE, _SEQ, _POST = 0, 1, 2


def unparse_sexp(e):
    return _sunparse(e, _CHOICE)


def _sunparse(e, level):
    if isinstance(e, SZero):
        return "0"
    if isinstance(e, SOne):
        return "1"
    if isinstance(e, SAct):
        return e.action
    if isinstance(e, SChoice):
        s = f"{_sunparse(e.left, _CHOICE)} +{render_param(e.param)} {_sunparse(e.right, _SEQ)}"
        return f"({s})" if level > _CHOICE else s
    if isinstance(e, SSeq):
        s = f"{_sunparse(e.left, _SEQ)} ; {_sunparse(e.right, _POST)}"
        return f"({s})" if level > _SEQ else s
    if isinstance(e, SStar):
        suffix = "^*" if e.param is None else f"^{render_param(e.param)}"
        return f"{_sunparse(e.body, _POST)}{suffix}"
    raise TypeError(f"not a star expression: {e!r}")


# ---------------------------------------------------------------------------
# translation into the full calculus

def translate(s):
    if isinstance(s, SZero):
        return ZERO
    if isinstance(s, SOne):
        return Var(UNIT_VAR)
    if isinstance(s, SAct):
        return Prefix(s.action, Var(UNIT_VAR))
    if isinstance(s, SChoice):
        return Op(s.param, (translate(s.left), translate(s.right)))
    if isinstance(s, SSeq):
        return substitute(translate(s.left), {UNIT_VAR: translate(s.right)})
    if isinstance(s, SStar):
        body = translate(s.body)
        v = fresh_name(all_names(body))
        return Mu(v, Op(s.param, (substitute(body, {UNIT_VAR: Var(v)}), Var(UNIT_VAR))))
    raise TypeError(f"not a star expression: {s!r}")


def is_guarded_star(s):
    """Productivity of iteration: the loop body may not terminate
    immediately."""
    return is_guarded(UNIT_VAR, translate(s))


# ---------------------------------------------------------------------------
# direct semantics

def lstep(s, theory):
    if isinstance(s, SZero):
        return theory.bottom()
    if isinstance(s, SOne):
        return theory.unit(TICK)
    if isinstance(s, SAct):
        return theory.unit(Step(s.action, SONE))
    if isinstance(s, SChoice):
        return theory.op_apply(
            s.param, [lstep(s.left, theory), lstep(s.right, theory)]
        )
    if isinstance(s, SSeq):
        nf = lstep(s.left, theory)

        def leaf(t):
            if isinstance(t, Tick):
                return lstep(s.right, theory)
            if isinstance(t, Step):
                return theory.unit(Step(t.action, SSeq(t.target, s.right)))
            raise TheoryError("star expressions have no free outputs")

        return theory.nf_flatten(theory.nf_map(nf, leaf))
    if isinstance(s, SStar):
        nf = lstep(s.body, theory)

        def leaf(t):
            if isinstance(t, Tick):
                return theory.bottom()
            if isinstance(t, Step):
                return theory.unit(Step(t.action, SSeq(t.target, s)))
            raise TheoryError("star expressions have no free outputs")

        looped = theory.nf_flatten(theory.nf_map(nf, leaf))
        return theory.op_apply(s.param, [looped, theory.unit(TICK)])
    raise TypeError(f"not a star expression: {s!r}")


def star_reachable(s, theory, cap=10000):
    return reachable(s, theory, cap, stepper=lambda x: lstep(x, theory))


def star_equivalent(s1, s2, theory, cap=10000):
    c = disjoint_union(
        star_reachable(s1, theory, cap), star_reachable(s2, theory, cap)
    )
    return check_states(c, "as0", "bs0")


def tick_mass(s, theory):
    """Total termination mass of the one-step behaviour (convex theories)."""
    nf = lstep(s, theory)
    if theory.id == "ca":
        return sum((m for g, m in nf if isinstance(g, Tick)), Fraction(0))
    raise TheoryError("tick mass only defined for ca")


# ---------------------------------------------------------------------------
# fixpoint axioms of iteration

def _star_axiom_sides(name, exps, params):
    def need(*keys):
        for k in keys:
            if k not in exps:
                raise TheoryError(f"{name} needs expression {k!r}")

    sigma = params.get("sigma")
    tau = params.get("tau")
    if name == "E1":
        need("e")
        e = exps["e"]
        return [(SSeq(SONE, e), e), (SSeq(e, SONE), e)], None
    if name == "E2":
        need("e")
        return [(SSeq(SZERO, exps["e"]), SZERO)], None
    if name == "E3":
        need("e1", "e2", "e3")
        e1, e2, e3 = exps["e1"], exps["e2"], exps["e3"]
        return [(SSeq(SSeq(e1, e2), e3), SSeq(e1, SSeq(e2, e3)))], None
    if name == "E4":
        need("e")
        e = exps["e"]
        return [
            (SStar(sigma, SChoice(tau, e, SONE)), SStar(sigma, SChoice(tau, e, SZERO)))
        ], None
    if name == "E5":
        need("e")
        e = exps["e"]
        star = SStar(sigma, e)
        return [(star, SChoice(sigma, SSeq(e, star), SONE))], ("guarded", e)
    if name == "E6":
        need("g", "e", "f")
        g, e, f = exps["g"], exps["e"], exps["f"]
        premise = (g, SChoice(sigma, SSeq(e, g), f))
        conclusion = (g, SSeq(SStar(sigma, e), f))
        return [premise, conclusion], ("guarded", e)
    raise TheoryError(f"unknown star axiom {name!r}")


@dataclass
class EStarResult:
    ok: bool
    side_condition_ok: bool
    detail: str


def check_estar_instance(name, theory, exps, params=None, cap=10000,
                         ignore_side_conditions=False):
    """Semantic validity of one instance of a star fixpoint axiom; side
    conditions are checked syntactically first (unless explicitly ignored,
    for exploring unsound instances)."""
    sides, condition = _star_axiom_sides(name, exps, params or {})
    if condition is not None and not ignore_side_conditions:
        kind, e = condition
        if kind == "guarded" and not is_guarded_star(e):
            return EStarResult(False, False, "loop body is not guarded")
    for l, r in sides:
        cert = star_equivalent(l, r, theory, cap)
        if not cert.equivalent:
            return EStarResult(False, True, cert.detail)
    return EStarResult(True, True, "instance holds")


# ---------------------------------------------------------------------------
# syntactic derivatives (set and guarded theories)

def output_guard(s, theory):
    """Immediate termination: a boolean for sl, the atom set on which the
    expression ticks for gs."""
    nf = lstep(s, theory)
    if theory.id == "sl":
        return TICK in nf
    if theory.id == "gs":
        return frozenset(
            atom for atom, entry in zip(theory.atoms, nf) if entry == TICK
        )
    raise TheoryError("output guards are defined for sl and gs only")


def partial_derivative(s, theory):
    """One-step syntactic derivative; sound for sl and gs star expressions."""
    if theory.id == "sl":
        return _deriv_sl(s, theory)
    if theory.id == "gs":
        return _deriv_gs(s, theory)
    raise TheoryError("derivatives are defined for sl and gs only")


def _deriv_sl(s, theory):
    if isinstance(s, (SZero, SOne)):
        return SZERO
    if isinstance(s, SAct):
        return s
    if isinstance(s, SChoice):
        if s.param is not None:
            raise TheoryError("guarded choice in an sl expression")
        return SChoice(None, _deriv_sl(s.left, theory), _deriv_sl(s.right, theory))
    if isinstance(s, SSeq):
        de_f = SSeq(_deriv_sl(s.left, theory), s.right)
        if output_guard(s.left, theory):
            return SChoice(None, de_f, _deriv_sl(s.right, theory))
        return de_f
    if isinstance(s, SStar):
        return SSeq(_deriv_sl(s.body, theory), s)
    raise TypeError(f"not a star expression: {s!r}")


def _deriv_gs(s, theory):
    if isinstance(s, (SZero, SOne)):
        return SZERO
    if isinstance(s, SAct):
        return s
    if isinstance(s, SChoice):
        if not isinstance(s.param, frozenset):
            raise TheoryError("unguarded choice in a gs expression")
        return SChoice(
            s.param, _deriv_gs(s.left, theory), _deriv_gs(s.right, theory)
        )
    if isinstance(s, SSeq):
        b = output_guard(s.left, theory)
        return SChoice(
            b, _deriv_gs(s.right, theory), SSeq(_deriv_gs(s.left, theory), s.right)
        )
    if isinstance(s, SStar):
        b = output_guard(s.body, theory)
        return SChoice(b, SZERO, SSeq(_deriv_gs(s.body, theory), s))
    raise TypeError(f"not a star expression: {s!r}")
