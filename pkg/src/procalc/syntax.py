"""Process terms: abstract syntax, parser, printer, substitution.

Surface grammar (theory decides how choice parameters read):

    term   := sum
    sum    := item ('+' ('[' param ']')? item)*        # left-associative
    item   := 'mu' IDENT '.' sum                        # extends maximally right
            | IDENT '.' item                            # action prefix
            | '0' | IDENT | '(' sum ')'

Guards are space-separated atom lists (``+[a1 a2]``, ``[]`` is the empty
guard); probabilities are integers or fractions (``+[1/2]``).  Recursion
variables introduced internally live in the reserved ``%`` namespace, which
the tokenizer cannot produce, so freshness never clashes with user input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .theory import TheoryError


class ParseError(ValueError):
    def __init__(self, message, pos=None):
        super().__init__(message if pos is None else f"{message} (at {pos})")
        self.pos = pos


# ---------------------------------------------------------------------------
# abstract syntax

class Exp:
    def sort_key(self):
        return ("exp", unparse(self))


@dataclass(frozen=True)
class Zero(Exp):
    pass


@dataclass(frozen=True)
class Var(Exp):
    name: str


@dataclass(frozen=True)
class Op(Exp):
    """Binary choice; param is None, a frozenset guard, or a Fraction."""
    param: object
    args: tuple


@dataclass(frozen=True)
class Prefix(Exp):
    action: str
    body: Exp


@dataclass(frozen=True)
class Mu(Exp):
    var: str
    body: Exp


ZERO = Zero()


def children(e):
    if isinstance(e, Op):
        return e.args
    if isinstance(e, (Prefix, Mu)):
        return (e.body,)
    return ()


def rebuild(e, kids):
    if isinstance(e, Op):
        return Op(e.param, tuple(kids))
    if isinstance(e, Prefix):
        return Prefix(e.action, kids[0])
    if isinstance(e, Mu):
        return Mu(e.var, kids[0])
    return e


# ---------------------------------------------------------------------------
# variables

@lru_cache(maxsize=None)
def free_vars(e):
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Zero):
        return frozenset()
    if isinstance(e, Prefix):
        return free_vars(e.body)
    if isinstance(e, Mu):
        return free_vars(e.body) - {e.var}
    if isinstance(e, Op):
        out = frozenset()
        for a in e.args:
            out |= free_vars(a)
        return out
    raise TypeError(f"not an expression: {e!r}")


@lru_cache(maxsize=None)
def bound_vars(e):
    if isinstance(e, Mu):
        return bound_vars(e.body) | {e.var}
    out = frozenset()
    for c in children(e):
        out |= bound_vars(c)
    return out


@dataclass(frozen=True)
class VarInfo:
    free: frozenset
    bound: frozenset


def var_info(e):
    return VarInfo(free_vars(e), bound_vars(e))


def all_names(e):
    return free_vars(e) | bound_vars(e)


def fresh_name(avoid):
    k = 0
    while f"%{k}" in avoid:
        k += 1
    return f"%{k}"


def is_guarded(v, e):
    """Every free occurrence of v in e sits under an action prefix."""
    if isinstance(e, Var):
        return e.name != v
    if isinstance(e, Zero):
        return True
    if isinstance(e, Prefix):
        return True
    if isinstance(e, Mu):
        return True if e.var == v else is_guarded(v, e.body)
    if isinstance(e, Op):
        return all(is_guarded(v, a) for a in e.args)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# substitution

def substitute(e, bindings):
    """Simultaneous capture-avoiding substitution of expressions for free
    variables.  Bound variables are alpha-renamed into the reserved ``%``
    namespace when they would capture."""
    bindings = {v: f for v, f in bindings.items() if f != Var(v)}
    if not bindings:
        return e
    avoid = set(all_names(e))
    for f in bindings.values():
        avoid |= all_names(f)
    return _subst(e, bindings, avoid)


def _subst(e, bnd, avoid):
    if isinstance(e, Var):
        return bnd.get(e.name, e)
    if isinstance(e, Zero):
        return e
    if isinstance(e, (Prefix, Op)):
        kids = [_subst(c, bnd, avoid) for c in children(e)]
        if all(k is c for k, c in zip(kids, children(e))):
            return e
        return rebuild(e, kids)
    if isinstance(e, Mu):
        fv = free_vars(e.body)
        live = {v: f for v, f in bnd.items() if v != e.var and v in fv}
        if not live:
            return e
        u, body = e.var, e.body
        if any(u in free_vars(f) for f in live.values()):
            w = fresh_name(avoid)
            avoid.add(w)
            body = _subst(body, {u: Var(w)}, avoid)
            u = w
        return Mu(u, _subst(body, live, avoid))
    raise TypeError(f"not an expression: {e!r}")


def guarded_subst_exp(e, g, v):
    """Guarded syntactic substitution e[g//v]: unguarded occurrences of v
    become 0, guarded ones (under a prefix) become g."""
    avoid = set(all_names(e)) | set(all_names(g))

    def go(e):
        if isinstance(e, Var):
            return ZERO if e.name == v else e
        if isinstance(e, Zero):
            return e
        if isinstance(e, Prefix):
            return Prefix(e.action, substitute(e.body, {v: g}))
        if isinstance(e, Op):
            return Op(e.param, tuple(go(a) for a in e.args))
        if isinstance(e, Mu):
            if e.var == v or v not in free_vars(e.body):
                return e
            u, body = e.var, e.body
            if u in free_vars(g):
                w = fresh_name(avoid)
                avoid.add(w)
                body = _subst(body, {u: Var(w)}, set(avoid))
                u = w
            return Mu(u, go(body))
        raise TypeError(f"not an expression: {e!r}")

    return go(e)


def alpha_eq(e, f):
    return _alpha(e, f, {}, {}, [0])


def _alpha(e, f, env_e, env_f, ctr):
    if type(e) is not type(f):
        return False
    if isinstance(e, Var):
        return env_e.get(e.name, e.name) == env_f.get(f.name, f.name)
    if isinstance(e, Zero):
        return True
    if isinstance(e, Prefix):
        return e.action == f.action and _alpha(e.body, f.body, env_e, env_f, ctr)
    if isinstance(e, Op):
        return e.param == f.param and all(
            _alpha(a, b, env_e, env_f, ctr) for a, b in zip(e.args, f.args)
        )
    if isinstance(e, Mu):
        mark = ctr[0]
        ctr[0] += 1
        return _alpha(
            e.body, f.body, {**env_e, e.var: mark}, {**env_f, f.var: mark}, ctr
        )
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# tokenizer (shared with the star fragment)

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_']*)|(\d+)|([+.()\[\]/;^*=])|(\S))")


def tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        ident, num, punct, bad = m.groups()
        if bad:
            raise ParseError(f"unexpected character {bad!r}", m.start(4))
        if ident:
            toks.append(("ident", ident, m.start(1)))
        elif num:
            toks.append(("num", num, m.start(2)))
        else:
            toks.append((punct, punct, m.start(3)))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class TokenStream:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        if t[0] != "eof":
            self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1]!r}", t[2])
        return t

    def at(self, kind):
        return self.peek()[0] == kind


def parse_param(ts, theory):
    """Parse the contents of ``[...]`` after a choice or star."""
    ts.expect("[")
    kinds = theory.param_kinds
    if "guard" in kinds:
        atoms = []
        while ts.at("ident") or ts.at("num"):
            atoms.append(ts.next()[1])
        ts.expect("]")
        guard = frozenset(atoms)
        theory.check_param(guard)
        return guard
    # probability
    t = ts.expect("num")
    num = int(t[1])
    den = 1
    if ts.at("/"):
        ts.next()
        den = int(ts.expect("num")[1])
        if den == 0:
            raise ParseError("zero denominator", t[2])
    prob = Fraction(num, den)
    ts.expect("]")
    theory.check_param(prob)
    return prob


class NameUse:
    """Tracks identifiers used as actions vs variables in one input."""

    def __init__(self, actions=None):
        self.declared = frozenset(actions) if actions else None
        self.actions = set(actions) if actions else set()
        self.variables = set()

    def see_action(self, name, pos):
        if name in self.variables:
            raise ParseError(f"{name!r} used both as action and variable", pos)
        if self.declared is not None and name not in self.declared:
            raise ParseError(f"undeclared action {name!r}", pos)
        self.actions.add(name)

    def see_variable(self, name, pos):
        if name in self.actions:
            raise ParseError(f"{name!r} used both as action and variable", pos)
        self.variables.add(name)


def parse_exp(text, theory, actions=None, names=None):
    ts = TokenStream(text)
    use = names if names is not None else NameUse(actions)
    e = _parse_sum(ts, theory, use)
    t = ts.peek()
    if t[0] != "eof":
        raise ParseError(f"trailing input {t[1]!r}", t[2])
    return e


def _parse_sum(ts, theory, use):
    e = _parse_item(ts, theory, use)
    while ts.at("+"):
        ts.next()
        if ts.at("["):
            param = parse_param(ts, theory)
        else:
            param = None
            theory.check_param(None)
        f = _parse_item(ts, theory, use)
        e = Op(param, (e, f))
    return e


def _parse_item(ts, theory, use):
    t = ts.next()
    kind, val, pos = t
    if kind == "num" and val == "0":
        return ZERO
    if kind == "(":
        e = _parse_sum(ts, theory, use)
        ts.expect(")")
        return e
    if kind == "ident":
        if val == "mu":
            v = ts.expect("ident")[1]
            use.see_variable(v, pos)
            ts.expect(".")
            return Mu(v, _parse_sum(ts, theory, use))
        if ts.at("."):
            ts.next()
            use.see_action(val, pos)
            return Prefix(val, _parse_item(ts, theory, use))
        use.see_variable(val, pos)
        return Var(val)
    raise ParseError(f"unexpected token {val!r}", pos)


# ---------------------------------------------------------------------------
# printer

def render_param(param):
    if param is None:
        return ""
    if isinstance(param, frozenset):
        return "[" + " ".join(sorted(param)) + "]"
    if isinstance(param, Fraction):
        return f"[{param.numerator}]" if param.denominator == 1 else f"[{param}]"
    raise TheoryError(f"bad choice parameter {param!r}")


_SUM, _ITEM = 0, 1


def unparse(e):
    return _unparse(e, _SUM)


def _unparse(e, level):
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Prefix):
        return f"{e.action}.{_unparse(e.body, _ITEM)}"
    if isinstance(e, Mu):
        s = f"mu {e.var}. {_unparse(e.body, _SUM)}"
        return f"({s})" if level > _SUM else s
    if isinstance(e, Op):
        # a mu on the left of a sum must be bracketed: it binds rightward
        l = _unparse(e.args[0], _ITEM if isinstance(e.args[0], Mu) else _SUM)
        r = _unparse(e.args[1], _ITEM)
        s = f"{l} +{render_param(e.param)} {r}"
        return f"({s})" if level > _SUM else s
    raise TypeError(f"not an expression: {e!r}")


def validate(e, theory):
    """Check choice parameters against the theory's signature."""
    if isinstance(e, Op):
        theory.check_param(e.param)
    for c in children(e):
        validate(c, theory)
    return e
