"""Command-line front end.

Exit codes: 0 success (equivalent / accepted), 10 not equivalent, 11 proof
rejected, 1 parse or validation error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import axioms, equivalence, semantics, solver, star, syntax, theory as th


def _add_common(p):
    p.add_argument("--theory", default="sl", choices=th.THEORY_NAMES)
    p.add_argument("--atoms", default=None, help="comma-separated atoms (gs)")
    p.add_argument("--actions", default=None, help="comma-separated action names")
    p.add_argument("--format", default="text", choices=("json", "dot", "text"))
    p.add_argument("--gkat", action="store_true", help="enable test[...] sugar")
    p.add_argument("--cap", type=int, default=10000, help="state cap for lts construction")
    p.add_argument("--seed", type=int, default=None, help="accepted for reproducibility; unused")


def build_parser():
    ap = argparse.ArgumentParser(prog="procalc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("step", help="one-step behaviour of a term")
    _add_common(p)
    p.add_argument("term")

    p = sub.add_parser("lts", help="reachable coalgebra of a term")
    _add_common(p)
    p.add_argument("term")

    p = sub.add_parser("equiv", help="bisimilarity of two terms")
    _add_common(p)
    p.add_argument("term1")
    p.add_argument("term2")

    p = sub.add_parser("solve", help="solve an equation system or coalgebra file")
    _add_common(p)
    p.add_argument("file")
    p.add_argument("--state", default=None, help="synthesize this state only")

    p = sub.add_parser("prove", help="check an equational proof")
    _add_common(p)
    p.add_argument("file")

    p = sub.add_parser("skew", help="skew-associativity of the theory")
    _add_common(p)

    p = sub.add_parser("star", help="star fragment commands")
    star_sub = p.add_subparsers(dest="star_command", required=True)

    q = star_sub.add_parser("step")
    _add_common(q)
    q.add_argument("term")

    q = star_sub.add_parser("lts")
    _add_common(q)
    q.add_argument("term")

    q = star_sub.add_parser("equiv")
    _add_common(q)
    q.add_argument("term1")
    q.add_argument("term2")

    q = star_sub.add_parser("estar")
    _add_common(q)
    q.add_argument("axiom", choices=("E1", "E2", "E3", "E4", "E5", "E6"))
    q.add_argument("--exp", action="append", default=[], metavar="NAME=TERM")
    q.add_argument("--sigma", default=None)
    q.add_argument("--tau", default=None)

    q = star_sub.add_parser("deriv")
    _add_common(q)
    q.add_argument("term")

    return ap


def _theory(args):
    atoms = args.atoms.split(",") if args.atoms else None
    return th.make_theory(args.theory, atoms)


def _actions(args):
    return args.actions.split(",") if args.actions else None


def _param_text(text, theory):
    if text is None:
        return None
    if text in ("", "*"):
        theory.check_param(None)
        return None
    if "guard" in theory.param_kinds:
        guard = frozenset(x for x in text.replace(",", " ").split() if x)
        theory.check_param(guard)
        return guard
    prob = Fraction(text)
    theory.check_param(prob)
    return prob


def _emit_nf(nf, theory, fmt):
    t = theory.term_of_nf(nf)
    if fmt == "json":
        print(json.dumps(semantics._sterm_to_json(_stringify_targets(t))))
    else:
        print(semantics.render_sterm(t))


def _stringify_targets(t):
    from .theory import TGen, TOp

    if isinstance(t, TGen) and isinstance(t.gen, semantics.Step):
        return TGen(semantics.Step(t.gen.action, semantics._render_target(t.gen.target)))
    if isinstance(t, TOp):
        return TOp(t.param, tuple(_stringify_targets(a) for a in t.args))
    return t


def _emit_coalgebra(c, fmt):
    if fmt == "json":
        print(semantics.coalgebra_to_json(c))
    elif fmt == "dot":
        sys.stdout.write(semantics.coalgebra_to_dot(c))
    else:
        for s in c.states:
            t = c.theory.term_of_nf(c.structure[s])
            print(f"{s} = {semantics.render_sterm(t)}")


def run(argv=None):
    args = build_parser().parse_args(argv)
    theory = _theory(args)
    actions = _actions(args)

    if args.command == "step":
        e = syntax.parse_exp(args.term, theory, actions)
        _emit_nf(semantics.step(e, theory), theory, args.format)
        return 0

    if args.command == "lts":
        e = syntax.parse_exp(args.term, theory, actions)
        _emit_coalgebra(semantics.reachable(e, theory, args.cap), args.format)
        return 0

    if args.command == "equiv":
        use = syntax.NameUse(actions)
        e1 = syntax.parse_exp(args.term1, theory, names=use)
        e2 = syntax.parse_exp(args.term2, theory, names=use)
        cert = equivalence.equivalent(e1, e2, theory, args.cap)
        print(("equivalent: " if cert.equivalent else "not equivalent: ") + cert.detail)
        return 0 if cert.equivalent else 10

    if args.command == "solve":
        with open(args.file) as fh:
            text = fh.read()
        if text.lstrip().startswith("{"):
            c = semantics.coalgebra_from_json(text)
            system = solver.associated_system(c)
        else:
            system = solver.parse_system(text, theory, actions)
        phi = solver.solve(system)
        if args.state is not None:
            names = dict(zip(system.variables, system.variables))
            if args.state not in phi:
                # state ids may have been renamed; map positionally
                if text.lstrip().startswith("{") and args.state in c.states:
                    pos = list(c.states).index(args.state)
                    print(syntax.unparse(phi[system.variables[pos]]))
                    return 0
                raise syntax.ParseError(f"unknown state {args.state!r}")
            print(syntax.unparse(phi[args.state]))
            return 0
        for x in system.variables:
            print(f"{x} = {syntax.unparse(phi[x])}")
        return 0

    if args.command == "prove":
        with open(args.file) as fh:
            proof = axioms.load_proof(fh.read(), actions)
        verdict = axioms.check_proof(proof)
        if verdict.accepted:
            print("accepted")
            return 0
        where = "" if verdict.step is None else f" at step {verdict.step}"
        print(f"rejected{where}: {verdict.reason}")
        return 11

    if args.command == "skew":
        answer = th.is_skew_associative(theory)
        print("skew-associative" if answer else "not skew-associative")
        return 0

    if args.command == "star":
        return run_star(args, theory, actions)

    raise AssertionError("unreachable")


def run_star(args, theory, actions):
    cmd = args.star_command

    if cmd == "step":
        s = star.parse_sexp(args.term, theory, args.gkat, actions)
        _emit_nf(star.lstep(s, theory), theory, args.format)
        return 0

    if cmd == "lts":
        s = star.parse_sexp(args.term, theory, args.gkat, actions)
        _emit_coalgebra(star.star_reachable(s, theory, args.cap), args.format)
        return 0

    if cmd == "equiv":
        s1 = star.parse_sexp(args.term1, theory, args.gkat, actions)
        s2 = star.parse_sexp(args.term2, theory, args.gkat, actions)
        cert = star.star_equivalent(s1, s2, theory, args.cap)
        msg = ("equivalent: " if cert.equivalent else "not equivalent: ") + cert.detail
        if not cert.equivalent and theory.id == "ca":
            m1 = star.tick_mass(s1, theory)
            m2 = star.tick_mass(s2, theory)
            msg += f" (termination mass {m1} vs {m2})"
        print(msg)
        return 0 if cert.equivalent else 10

    if cmd == "estar":
        exps = {}
        for item in args.exp:
            if "=" not in item:
                raise syntax.ParseError(f"--exp expects NAME=TERM, got {item!r}")
            name, text = item.split("=", 1)
            exps[name.strip()] = star.parse_sexp(text, theory, args.gkat, actions)
        params = {
            "sigma": _param_text(args.sigma, theory),
            "tau": _param_text(args.tau, theory),
        }
        result = star.check_estar_instance(args.axiom, theory, exps, params, args.cap)
        if result.ok:
            print(f"{args.axiom} instance holds")
            return 0
        kind = "side condition fails" if not result.side_condition_ok else "instance fails"
        print(f"{args.axiom} {kind}: {result.detail}")
        return 10

    if cmd == "deriv":
        s = star.parse_sexp(args.term, theory, args.gkat, actions)
        d = star.partial_derivative(s, theory)
        guard = star.output_guard(s, theory)
        if theory.id == "sl":
            shown = "yes" if guard else "no"
        else:
            shown = "{" + " ".join(sorted(guard)) + "}"
        print(f"derivative: {star.unparse_sexp(d)}")
        print(f"outputs: {shown}")
        return 0

    raise AssertionError("unreachable")


def main():
    try:
        sys.exit(run())
    except (syntax.ParseError, th.TheoryError, solver.UnguardedSystem) as err:
        print(f"error: {err}", file=sys.stderr)
        sys.exit(1)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        sys.exit(1)
    except semantics.StateCapExceeded as err:
        print(f"error: {err}", file=sys.stderr)
        sys.exit(2)
    except SystemExit:
        raise
    except Exception as err:  # pragma: no cover - defensive
        print(f"internal error: {err}", file=sys.stderr)
        sys.exit(2)
