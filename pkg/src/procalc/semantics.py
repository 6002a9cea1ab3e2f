"""Operational semantics: one-step behaviour and reachable coalgebras.

The one-step map sends a closed-enough process term to a normal form over
*transitions*: outputs ``Out(v)``, action steps ``Step(a, target)``, and (for
the star fragment) successful termination ``Tick()``.  Recursion unfolds via
the guarded substitution on behaviours: unguarded occurrences of the recursion
variable collapse to deadlock, guarded ones are rewired to the fixpoint term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import syntax
from .syntax import Exp, Mu, Op, Prefix, Var, Zero, substitute
from .theory import (CONST0, TConst0, TGen, TOp, Theory, TheoryError,
                     generator_key, make_theory, sorted_gens)


class StateCapExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# transitions

@dataclass(frozen=True)
class Out:
    var: str

    def sort_key(self):
        return ("out", self.var)


@dataclass(frozen=True)
class Tick:
    def sort_key(self):
        return ("tick",)


@dataclass(frozen=True)
class Step:
    action: str
    target: object  # Exp, star expression, or state id

    def sort_key(self):
        return ("act", self.action, generator_key(self.target))


TICK = Tick()


# ---------------------------------------------------------------------------
# one-step semantics

def step(e, theory):
    if isinstance(e, Zero):
        return theory.bottom()
    if isinstance(e, Var):
        return theory.unit(Out(e.name))
    if isinstance(e, Prefix):
        return theory.unit(Step(e.action, e.body))
    if isinstance(e, Op):
        return theory.op_apply(e.param, [step(a, theory) for a in e.args])
    if isinstance(e, Mu):
        return gsubst_bm(step(e.body, theory), e, e.var, theory)
    raise TypeError(f"not an expression: {e!r}")


def gsubst_bm(nf, g, v, theory):
    """Guarded substitution on behaviours: Out(v) becomes deadlock, step
    targets get g substituted for v."""

    def leaf(t):
        if isinstance(t, Out) and t.var == v:
            return theory.bottom()
        if isinstance(t, Step):
            return theory.unit(Step(t.action, substitute(t.target, {v: g})))
        return theory.unit(t)

    return theory.nf_flatten(theory.nf_map(nf, leaf))


# ---------------------------------------------------------------------------
# coalgebras

@dataclass
class Coalgebra:
    theory: Theory
    states: tuple  # state ids, "s0", "s1", ...
    structure: dict  # state id -> normal form over transitions with id targets
    labels: dict = field(default_factory=dict)  # state id -> source term


def reachable(e, theory, cap=10000, stepper=None):
    """Breadth-first construction of the reachable subcoalgebra from e."""
    stepper = stepper or (lambda x: step(x, theory))
    index = {e: 0}
    order = [e]
    raw = []
    i = 0
    while i < len(order):
        nf = stepper(order[i])
        raw.append(nf)
        for g in sorted_gens(theory.generators(nf)):
            if isinstance(g, Step) and g.target not in index:
                if len(order) >= cap:
                    raise StateCapExceeded(f"more than {cap} reachable states")
                index[g.target] = len(order)
                order.append(g.target)
        i += 1

    def rename(t):
        if isinstance(t, Step):
            return Step(t.action, f"s{index[t.target]}")
        return t

    states = tuple(f"s{j}" for j in range(len(order)))
    structure = {f"s{j}": theory.nf_map(raw[j], rename) for j in range(len(order))}
    labels = {f"s{j}": order[j] for j in range(len(order))}
    return Coalgebra(theory, states, structure, labels)


def disjoint_union(c1, c2, tag1="a", tag2="b"):
    if c1.theory != c2.theory:
        raise TheoryError("coalgebras over different theories")

    def relabel(c, tag):
        ren = {s: f"{tag}{s}" for s in c.states}

        def f(t):
            return Step(t.action, ren[t.target]) if isinstance(t, Step) else t

        structure = {ren[s]: c.theory.nf_map(c.structure[s], f) for s in c.states}
        labels = {ren[s]: c.labels.get(s) for s in c.states}
        return tuple(ren[s] for s in c.states), structure, labels

    s1, st1, l1 = relabel(c1, tag1)
    s2, st2, l2 = relabel(c2, tag2)
    return Coalgebra(c1.theory, s1 + s2, {**st1, **st2}, {**l1, **l2})


# ---------------------------------------------------------------------------
# rendering structure terms as surface text

def render_sterm(t):
    """Canonical term reading of a normal form, in surface syntax.  Step
    targets may be state ids, expressions, or star expressions."""
    return _render(t, 0)


def _render_target(x):
    if isinstance(x, Exp):
        return syntax.unparse(x)
    if hasattr(x, "star_unparse"):
        return x.star_unparse()
    return str(x)


def _render(t, level):
    if isinstance(t, TConst0):
        return "0"
    if isinstance(t, TGen):
        g = t.gen
        if isinstance(g, Out):
            return g.var
        if isinstance(g, Tick):
            return "1"
        target = _render_target(g.target)
        if any(ch in target for ch in " +;^"):
            target = f"({target})"
        return f"{g.action}.{target}"
    if isinstance(t, TOp):
        l = _render(t.args[0], 0)
        r = _render(t.args[1], 1)
        s = f"{l} +{syntax.render_param(t.param)} {r}"
        return f"({s})" if level > 0 else s
    raise TheoryError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# JSON interchange

def _sterm_to_json(t):
    if isinstance(t, TConst0):
        return {"const": "0"}
    if isinstance(t, TGen):
        g = t.gen
        if isinstance(g, Out):
            return {"out": g.var}
        if isinstance(g, Tick):
            return {"tick": True}
        if isinstance(g, Step):
            return {"act": g.action, "to": g.target}
        raise TheoryError(f"cannot serialise generator {g!r}")
    if isinstance(t, TOp):
        node = {"op": "+"}
        if isinstance(t.param, frozenset):
            node["guard"] = sorted(t.param)
        elif isinstance(t.param, Fraction):
            node["prob"] = str(t.param)
        node["args"] = [_sterm_to_json(a) for a in t.args]
        return node
    raise TheoryError(f"not a term: {t!r}")


def _sterm_from_json(d):
    if "const" in d:
        return CONST0
    if "out" in d:
        return TGen(Out(d["out"]))
    if "tick" in d:
        return TGen(TICK)
    if "act" in d:
        return TGen(Step(d["act"], d["to"]))
    if "op" in d:
        if "guard" in d:
            param = frozenset(d["guard"])
        elif "prob" in d:
            param = Fraction(d["prob"])
        else:
            param = None
        args = tuple(_sterm_from_json(a) for a in d["args"])
        return TOp(param, args)
    raise TheoryError(f"bad structure term {d!r}")


def coalgebra_to_dict(c):
    out = {"theory": c.theory.id}
    if c.theory.atoms:
        out["atoms"] = list(c.theory.atoms)
    out["states"] = list(c.states)
    out["structure"] = {
        s: _sterm_to_json(c.theory.term_of_nf(c.structure[s])) for s in c.states
    }
    return out


def coalgebra_to_json(c):
    return json.dumps(coalgebra_to_dict(c), indent=2)


def coalgebra_from_dict(d):
    theory = make_theory(d["theory"], d.get("atoms"))
    states = tuple(d["states"])
    structure = {}
    for s in states:
        t = _sterm_from_json(d["structure"][s])
        _check_targets(t, set(states))
        structure[s] = theory.eval_term(t)
    return Coalgebra(theory, states, structure)


def _check_targets(t, states):
    if isinstance(t, TGen) and isinstance(t.gen, Step):
        if t.gen.target not in states:
            raise TheoryError(f"unknown target state {t.gen.target!r}")
    if isinstance(t, TOp):
        for a in t.args:
            _check_targets(a, states)


def coalgebra_from_json(text):
    return coalgebra_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# DOT export

def _edges(c, s):
    """Deterministic edge list for one state: (label, kind, endpoint)."""
    th = c.theory
    nf = c.structure[s]
    out = []
    if th.id in ("sl", "cm"):
        for g in sorted_gens(th.generators(nf)):
            if isinstance(g, Step):
                out.append((g.action, "step", g.target))
            elif isinstance(g, Out):
                out.append((g.var, "out", g.var))
            else:
                out.append(("tick", "tick", None))
    elif th.id == "gs":
        seen = {}
        for i, atom in enumerate(th.atoms):
            if nf[i] is not None:
                seen.setdefault(nf[i], []).append(atom)
        for g in sorted_gens(seen):
            guard = "{" + " ".join(seen[g]) + "}"
            if isinstance(g, Step):
                out.append((f"{guard}|{g.action}", "step", g.target))
            elif isinstance(g, Out):
                out.append((f"{guard}|{g.var}", "out", g.var))
            else:
                out.append((f"{guard}|tick", "tick", None))
    else:
        subs = [nf] if th.id == "ca" else sorted_gens(nf)
        seen = set()
        for sub in subs:
            for g, mass in sorted_gens(sub):
                if isinstance(g, Step):
                    item = (f"{mass}|{g.action}", "step", g.target)
                elif isinstance(g, Out):
                    item = (f"{mass}|{g.var}", "out", g.var)
                else:
                    item = (f"{mass}|tick", "tick", None)
                if item not in seen:
                    seen.add(item)
                    out.append(item)
    return out


def coalgebra_to_dot(c):
    lines = ["digraph lts {"]
    outs = set()
    ticks = False
    edges = []
    for s in c.states:
        for label, kind, end in _edges(c, s):
            if kind == "step":
                edges.append(f'  "{s}" -> "{end}" [label="{label}"];')
            elif kind == "out":
                outs.add(end)
                edges.append(
                    f'  "{s}" -> "var_{end}" [label="{label}", arrowhead="normalnormal"];'
                )
            else:
                ticks = True
                edges.append(
                    f'  "{s}" -> "tick" [label="{label}", arrowhead="normalnormal"];'
                )
    for s in c.states:
        lines.append(f'  "{s}" [shape=circle];')
    for v in sorted(outs):
        lines.append(f'  "var_{v}" [shape=none, label="{v}"];')
    if ticks:
        lines.append('  "tick" [shape=none, label="ok"];')
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"
