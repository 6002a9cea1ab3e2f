"""Checker for equational proofs over a theory's axioms plus the three
fixpoint rules.

A proof is a list of numbered lines; each line asserts an equation between
two process terms and is justified by a rule:

* ``refl``, ``sym``/``trans`` (referencing earlier lines),
* ``axiom`` -- an instance of a named theory axiom, applied at a position,
* ``cong`` -- an earlier line applied at a position,
* ``subst`` -- a substitution instance of an earlier line,
* ``r1`` -- fixpoint unfolding ``mu v. e = e[mu v. e // v]``,
* ``r2`` -- alpha-renaming of the recursion binder to a fresh variable,
* ``r3`` -- uniqueness of guarded fixpoints: from ``g = e[g/v]`` with ``v``
  guarded in ``e``, conclude ``g = mu v. e``.

The last line must match the goal.  Rules applied at a position or cited via
``sym`` may be used in either orientation; rejection reports the first bad
line and a reason.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import syntax
from .syntax import (Exp, Mu, Op, Prefix, Var, Zero, children, free_vars,
                     guarded_subst_exp, is_guarded, substitute)
from .theory import (AOp, AVar, AZero, TheoryError, axiom_side_ok, eval_param,
                     make_theory, param_symbols)


@dataclass
class ProofStep:
    rule: str
    lhs: Exp
    rhs: Exp
    at: tuple = ()
    name: str = None  # axiom name
    refs: tuple = ()  # cited earlier lines (1-based)
    var: str = None  # r3 recursion variable
    body: Exp = None  # r3 witness body
    bindings: dict = None  # subst instantiation


@dataclass
class Proof:
    theory: object
    goal: tuple  # (lhs, rhs)
    steps: list


@dataclass
class Verdict:
    accepted: bool
    reason: str = "ok"
    step: int = None  # 1-based index of the offending line

    def __bool__(self):
        return self.accepted


class BadStep(Exception):
    pass


# ---------------------------------------------------------------------------
# matching axiom schemas against expressions

def _family_of(param):
    if param is None:
        return "plus"
    if isinstance(param, frozenset):
        return "gplus"
    if isinstance(param, Fraction):
        return "pplus"
    raise TheoryError(f"bad parameter {param!r}")


def _match(schema, e, menv, penv, theory):
    if isinstance(schema, AVar):
        if schema.name in menv:
            return menv[schema.name] == e
        menv[schema.name] = e
        return True
    if isinstance(schema, AZero):
        return isinstance(e, Zero)
    if isinstance(schema, AOp):
        if not isinstance(e, Op) or _family_of(e.param) != schema.family:
            return False
        if schema.param is not None:
            if schema.param[0] in ("gsym", "psym"):
                name = schema.param[1]
                if name in penv:
                    if penv[name] != e.param:
                        return False
                else:
                    penv[name] = e.param
            else:
                if param_symbols(schema.param) - set(penv):
                    return False
                try:
                    value = eval_param(schema.param, penv, theory.atoms)
                except TheoryError:
                    return False
                if value != e.param:
                    return False
        return _match(schema.left, e.args[0], menv, penv, theory) and _match(
            schema.right, e.args[1], menv, penv, theory
        )
    raise TheoryError(f"bad schema {schema!r}")


def _instantiate(schema, menv, penv, theory):
    if isinstance(schema, AVar):
        return menv[schema.name]
    if isinstance(schema, AZero):
        return syntax.ZERO
    if isinstance(schema, AOp):
        param = None
        if schema.param is not None:
            param = eval_param(schema.param, penv, theory.atoms)
            theory.check_param(param)
        return Op(
            param,
            (
                _instantiate(schema.left, menv, penv, theory),
                _instantiate(schema.right, menv, penv, theory),
            ),
        )
    raise TheoryError(f"bad schema {schema!r}")


def axiom_instance(ax, lhs, rhs, theory):
    """Does lhs = rhs instantiate the axiom, in either orientation?"""
    for a, b in ((lhs, rhs), (rhs, lhs)):
        menv, penv = {}, {}
        if not _match(ax.lhs, a, menv, penv, theory):
            continue
        try:
            if not axiom_side_ok(ax, penv):
                continue
            if _instantiate(ax.rhs, menv, penv, theory) == b:
                return True
        except TheoryError:
            continue
    return False


# ---------------------------------------------------------------------------
# positions

def _split_at(lhs, rhs, at):
    """Navigate both sides along ``at``, requiring identical context."""
    for idx in at:
        cl, cr = children(lhs), children(rhs)
        if type(lhs) is not type(rhs) or len(cl) != len(cr):
            raise BadStep("sides differ outside the rewrite position")
        if isinstance(lhs, Op) and lhs.param != rhs.param:
            raise BadStep("sides differ outside the rewrite position")
        if isinstance(lhs, Prefix) and lhs.action != rhs.action:
            raise BadStep("sides differ outside the rewrite position")
        if isinstance(lhs, Mu) and lhs.var != rhs.var:
            raise BadStep("sides differ outside the rewrite position")
        if not 0 <= idx < len(cl):
            raise BadStep(f"no subterm at position {list(at)}")
        for i in range(len(cl)):
            if i != idx and cl[i] != cr[i]:
                raise BadStep("sides differ outside the rewrite position")
        lhs, rhs = cl[idx], cr[idx]
    return lhs, rhs


# ---------------------------------------------------------------------------
# rules

def _cited(proof, step, k):
    if not isinstance(k, int) or not 1 <= k < step:
        raise BadStep(f"reference to line {k} is out of range")
    return proof.steps[k - 1]


def _r1_pair(lhs, rhs):
    for a, b in ((lhs, rhs), (rhs, lhs)):
        if isinstance(a, Mu) and guarded_subst_exp(a.body, a, a.var) == b:
            return True
    return False


def _r2_pair(lhs, rhs):
    for a, b in ((lhs, rhs), (rhs, lhs)):
        if not (isinstance(a, Mu) and isinstance(b, Mu)):
            continue
        w = b.var
        if w in free_vars(a.body) and w != a.var:
            continue
        if substitute(a.body, {a.var: Var(w)}) == b.body:
            return True
    return False


def _check_step(proof, idx):
    step = proof.steps[idx]
    n = idx + 1
    rule = step.rule
    theory = proof.theory

    if rule == "refl":
        if step.lhs != step.rhs:
            raise BadStep("sides of refl differ")
        return
    if rule == "sym":
        cited = _cited_line(proof, n, step.refs)
        if not (cited.lhs == step.rhs and cited.rhs == step.lhs):
            raise BadStep("sym does not flip the cited line")
        return
    if rule == "trans":
        if len(step.refs) != 2:
            raise BadStep("trans cites two lines")
        a = _cited_line(proof, n, step.refs[:1])
        b = _cited_line(proof, n, step.refs[1:])
        if not (a.lhs == step.lhs and a.rhs == b.lhs and b.rhs == step.rhs):
            raise BadStep("trans lines do not compose")
        return
    if rule == "subst":
        cited = _cited_line(proof, n, step.refs)
        bnd = step.bindings or {}
        if substitute(cited.lhs, bnd) != step.lhs or substitute(cited.rhs, bnd) != step.rhs:
            raise BadStep("not a substitution instance of the cited line")
        return

    l, r = _split_at(step.lhs, step.rhs, step.at)
    if rule == "axiom":
        ax = next((a for a in theory.axioms if a.name == step.name), None)
        if ax is None:
            raise BadStep(f"theory {theory.id} has no axiom {step.name!r}")
        if not axiom_instance(ax, l, r, theory):
            raise BadStep(f"not an instance of {step.name}")
        return
    if rule == "cong":
        cited = _cited_line(proof, n, step.refs)
        if not ((cited.lhs == l and cited.rhs == r) or (cited.lhs == r and cited.rhs == l)):
            raise BadStep("rewrite position does not match the cited line")
        return
    if rule == "r1":
        if not _r1_pair(l, r):
            raise BadStep("not a fixpoint unfolding")
        return
    if rule == "r2":
        if not _r2_pair(l, r):
            raise BadStep("not a fresh renaming of the binder")
        return
    if rule == "r3":
        if step.at:
            raise BadStep("r3 applies at the root only")
        if step.var is None or step.body is None:
            raise BadStep("r3 needs a recursion variable and body")
        v, e = step.var, step.body
        if not is_guarded(v, e):
            raise BadStep(f"{v!r} is not guarded in the witness body")
        g, fix = l, r
        if fix != Mu(v, e):
            raise BadStep("conclusion is not the fixpoint of the witness")
        unfolded = substitute(e, {v: g})
        cited = _cited_line(proof, n, step.refs)
        if not (
            (cited.lhs == g and cited.rhs == unfolded)
            or (cited.lhs == unfolded and cited.rhs == g)
        ):
            raise BadStep("premise g = e[g/v] is not the cited line")
        return
    raise BadStep(f"unknown rule {rule!r}")


def _cited_line(proof, n, refs):
    if len(refs) != 1:
        raise BadStep("rule cites exactly one line")
    return _cited(proof, n, refs[0])


def check_proof(proof):
    if not proof.steps:
        return Verdict(False, "empty proof", None)
    for idx in range(len(proof.steps)):
        try:
            _check_step(proof, idx)
        except BadStep as err:
            return Verdict(False, str(err), idx + 1)
    last = proof.steps[-1]
    if (last.lhs, last.rhs) != proof.goal:
        return Verdict(False, "last line is not the goal", len(proof.steps))
    return Verdict(True)


# ---------------------------------------------------------------------------
# JSON interchange

def parse_proof(data, actions=None):
    theory = make_theory(data["theory"], data.get("atoms"))
    use = syntax.NameUse(actions)

    def term(text):
        return syntax.parse_exp(text, theory, names=use)

    goal = (term(data["goal"][0]), term(data["goal"][1]))
    steps = []
    for raw in data["steps"]:
        refs = raw.get("refs", [])
        if "ref" in raw:
            refs = [raw["ref"]]
        bindings = None
        if "bindings" in raw:
            bindings = {v: term(t) for v, t in raw["bindings"].items()}
        steps.append(
            ProofStep(
                rule=raw["rule"],
                lhs=term(raw["lhs"]),
                rhs=term(raw["rhs"]),
                at=tuple(raw.get("at", [])),
                name=raw.get("name"),
                refs=tuple(refs),
                var=raw.get("var"),
                body=term(raw["body"]) if "body" in raw else None,
                bindings=bindings,
            )
        )
    return Proof(theory, goal, steps)


def load_proof(text, actions=None):
    return parse_proof(json.loads(text), actions)
