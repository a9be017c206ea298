"""Command-line front end.

Machines are named by a file path (table text, or an s-expression starting
with ``(``) or by a builtin such as ``builtin:self-loop``,
``builtin:halts-at-5``, ``builtin:lib:parity`` or ``builtin:fixed-point``.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

from indeplab import combinators as cb
from indeplab import constructions as c
from indeplab import diagonal as d
from indeplab import sexpr
from indeplab import suites
from indeplab import theory as th
from indeplab import tm

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class DomainError(Exception):
    pass


class UsageError(Exception):
    pass


# -- argument helpers --------------------------------------------------------------

BUILTINS = {
    "halt-only": c.halt_only,
    "self-loop": c.self_loop,
    "move-right": c.move_right,
    "ping-pong": c.ping_pong,
    "goldbach": c.build_goldbach_demo,
    "fixed-point": lambda: c.build_fixed_point()[0],
}


def load_any(ref: str) -> tm.Machine:
    if ref.startswith("builtin:"):
        name = ref[len("builtin:"):]
        if name.startswith("halts-at-") and name[9:].isdigit():
            return c.halts_at(int(name[9:]))
        if name.startswith("lib:"):
            try:
                return cb.Library(name[4:])
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        if name not in BUILTINS:
            raise UsageError(f"unknown builtin {name!r}; expected one of {sorted(BUILTINS)}, halts-at-K, lib:NAME")
        return BUILTINS[name]()
    try:
        text = Path(ref).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {ref}: {exc.strerror}") from None
    if text.lstrip().startswith("("):
        try:
            return tm.machine_from_sexpr(sexpr.loads(text.strip()))
        except (sexpr.SExprError, ValueError, KeyError, TypeError) as exc:
            raise DomainError(f"{ref}: {exc}") from None
    return tm.validate_machine(tm.parse_machine(text))


def bits(value: str) -> str:
    if any(ch not in "01" for ch in value):
        raise argparse.ArgumentTypeError(f"not a binary string: {value!r}")
    return value


def nat(value: str) -> int:
    try:
        n = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a natural number: {value!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"not a natural number: {value!r}")
    return n


def parse_table(path: str) -> dict[str, str]:
    """Lines ``<bits> -> 0|1``; an empty left side is the empty string."""
    table = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        left, sep, right = line.partition("->")
        left, right = left.strip(), right.strip()
        if not sep or right not in ("0", "1") or any(ch not in "01" for ch in left):
            raise DomainError(f"{path}:{lineno}: expected '<bits> -> 0|1'")
        if left in table:
            raise DomainError(f"{path}:{lineno}: duplicate row for {left!r}")
        table[left] = right
    return table


def parse_code(text: str) -> int:
    text = text.strip()
    if text.startswith("@"):
        text = Path(text[1:]).read_text().strip()
    try:
        return int(text, 0)
    except ValueError:
        raise UsageError(f"not a natural number: {text[:40]!r}") from None


def evaluator(args) -> d.DiagonalEvaluator:
    m0 = c.build_O(load_any(args.m0), args.w)
    seeds = {}
    for spec in args.member or ():
        n, sep, ref = spec.partition(":")
        if not sep or not n.isdigit():
            raise UsageError(f"--member expects N:MACHINE, got {spec!r}")
        try:
            seeds[int(n)] = d.make_quadruplet(m0, load_any(ref))
        except ValueError as exc:
            raise DomainError(f"member {n}: {exc}") from None
    return d.DiagonalEvaluator(m0, seeds, args.budget)


def machine_text(m: tm.Machine) -> str:
    return sexpr.dumps(m.sexpr()) + "\n"


# -- verbs ------------------------------------------------------------------------------

def trace_run(m: tm.MachineDescription, s: str, budget: int) -> list[str]:
    lines = []
    cfg = tm.start_configuration(m, s)
    while not m.is_halted((cfg.state, cfg.head, cfg.tape)):
        if cfg.steps == budget:
            lines.append(f"Budget-Exhausted steps={cfg.steps}")
            return lines
        read = cfg.read()
        _, write, move = m.delta[(cfg.state, read)]
        lines.append(f"step {cfg.steps + 1}: state={cfg.state} head={cfg.head} read={read} write={write} move={move}")
        cfg = tm.step(m, cfg)
    out = m.output((cfg.state, cfg.head, cfg.tape))
    lines.append(f"Halted steps={cfg.steps} output={out}")
    return lines


def cmd_validate(args):
    m = load_any(args.machine)
    return ["valid", f"states={len(m.states)}"] if isinstance(m, tm.MachineDescription) else ["valid"]


def cmd_run(args):
    m = load_any(args.machine)
    budget = args.budget if args.budget is not None else tm.safety_budget()
    if args.trace:
        if not isinstance(m, tm.MachineDescription):
            raise UsageError("--trace needs a table machine")
        return trace_run(m, args.input, budget)
    return [tm.run_bounded(m, args.input, budget).describe()]


def cmd_profile(args):
    rows = tm.time_complexity_profile(load_any(args.machine), args.max_len, args.budget)
    return [f"{r.length}\t{r.max_steps}\t{r.witness}" for r in rows]


def cmd_race(args):
    m = load_any(args.machine)
    return [c.race(m, args.input, args.budget if args.budget is not None else 10**5).describe()]


def cmd_build_o(args):
    o = c.build_O(load_any(args.machine), args.w)
    return [machine_text(o).rstrip(), f"profile {c.threshold_profile(o, args.max_len).describe()}"]


def cmd_build_q(args):
    return [machine_text(c.build_Q(load_any(args.m1), load_any(args.m2), args.w)).rstrip()]


def cmd_patch(args):
    try:
        p = cb.Patch(load_any(args.base), parse_table(args.table), args.m)
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    return [machine_text(p).rstrip()]


def cmd_almost_eq(args):
    a = c.LanguageView(load_any(args.a), args.budget)
    b = c.LanguageView(load_any(args.b), args.budget)
    return [c.almost_equal(a, b, args.max_len).describe()]


def cmd_enumerate(args):
    return [f"{k}\t{p.text()}" for k, p in itertools.islice(th.theorems(args.start), args.count)]


def cmd_encode(args):
    try:
        q = d.make_quadruplet(c.build_O(load_any(args.m0), args.w), load_any(args.m2))
        n = d.t_encode(q)
    except (ValueError, d.EncodingError) as exc:
        raise DomainError(str(exc)) from None
    return [f"bits={n.bit_length()}", hex(n)]


def cmd_decode(args):
    q = d.t_decode(parse_code(args.code))
    if q is None:
        return ["non-code"]
    return [f"{name}\t{text}" for name, text in zip(("m1", "m2", "p1", "p2"), q.components())]


def _range(args):
    if args.start > args.stop:
        raise UsageError("--from must not exceed --to")
    return range(args.start, args.stop + 1)


def cmd_tmo(args):
    ev = evaluator(args)
    return [
        f"{n}\tmember:{int(d.h_membership(n, ev))}\tT:{d.t_m0_eval(n, ev)}\tf:{d.f_eval(n, ev)}"
        for n in _range(args)
    ]


def cmd_f(args):
    ev = evaluator(args)
    return [f"{n}\tf:{d.f_eval(n, ev)}" for n in _range(args)]


def cmd_switch(args):
    ev = evaluator(args)
    u = d.build_theorem2_switch(load_any(args.t_l0), ev)
    return [f"{n}\tU:{tm.decide(u, tm.num_bits(n), args.budget)}" for n in _range(args)]


def cmd_compare(args):
    m = d.build_comparator(load_any(args.t_m), load_any(args.t_l0))
    return [f"{n}\tM:{tm.decide(m, tm.num_bits(n), args.budget)}" for n in _range(args)]


def cmd_demo_goldbach(args):
    m = c.build_goldbach_demo()
    budget = args.budget if args.budget is not None else 10**4
    lines = [f"run {tm.run_bounded(m, '0', budget).describe()}"]
    lines.append(f"race {c.race(m, '0', budget).describe()}")
    return lines


def cmd_verify(args):
    suite = suites.ALIASES.get(args.suite, args.suite)
    names = list(suites.SUITES) if suite == "all" else [suite]
    lines, ok = [], True
    for name in names:
        fn = suites.SUITES[name]
        kwargs = {}
        if args.max_len is not None and name in ("threshold", "patches", "switches"):
            kwargs["max_len"] = args.max_len
        if args.seed is not None and name in ("threshold", "patches", "diagonal", "encoding"):
            kwargs["seed"] = args.seed
        tally = fn(**kwargs)
        ok &= tally.ok
        for prop, (passed, total) in tally.items():
            lines.append(f"{name}\t{prop}\t{passed}/{total}\t{'PASS' if passed == total else 'FAIL'}")
    if not ok:
        raise DomainError("\n".join(lines) + "\ninvariant violations found")
    return lines


# -- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="indeplab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True, metavar="verb")

    def verb(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(fn=fn)
        sp.add_argument("--budget", type=nat, help="step budget")
        sp.add_argument("--out", help="write the report to this file instead of stdout")
        return sp

    def diag(sp):
        sp.add_argument("--m0", required=True, help="machine M; M0 is its threshold machine O<M,w>")
        sp.add_argument("--w", type=bits, default="")
        sp.add_argument("--member", action="append", metavar="N:MACHINE",
                        help="seed code point N with the quadruplet built from MACHINE as M2")
        sp.add_argument("--from", dest="start", type=nat, default=0)
        sp.add_argument("--to", dest="stop", type=nat, default=20)

    sp = verb("validate", cmd_validate, "check a machine file")
    sp.add_argument("machine")

    sp = verb("run", cmd_run, "run a machine on one input")
    sp.add_argument("machine")
    sp.add_argument("--input", type=bits, default="")
    sp.add_argument("--trace", action="store_true", help="one line per step")

    sp = verb("profile", cmd_profile, "worst-case steps per input length")
    sp.add_argument("machine")
    sp.add_argument("--max-len", type=nat, default=8)

    sp = verb("race", cmd_race, "simulate against a refutation search")
    sp.add_argument("machine")
    sp.add_argument("--input", type=bits, default="")

    sp = verb("build-o", cmd_build_o, "threshold machine O<M,w>")
    sp.add_argument("machine")
    sp.add_argument("--w", type=bits, default="")
    sp.add_argument("--max-len", type=nat, default=10)

    sp = verb("build-q", cmd_build_q, "switch machine Q<M1,M2,w>")
    sp.add_argument("m1")
    sp.add_argument("m2")
    sp.add_argument("--w", type=bits, default="")

    sp = verb("patch", cmd_patch, "override a decider below length m")
    sp.add_argument("base")
    sp.add_argument("table", help="file of '<bits> -> 0|1' lines")
    sp.add_argument("--m", type=nat, required=True)

    sp = verb("almost-eq", cmd_almost_eq, "probe whether two deciders agree on long strings")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--max-len", type=nat, default=8)

    sp = verb("enumerate", cmd_enumerate, "list enumerated theorems")
    sp.add_argument("--start", type=nat, default=0)
    sp.add_argument("--count", type=nat, default=10)

    sp = verb("encode", cmd_encode, "code of the certified quadruplet for M0 after M2")
    sp.add_argument("m0", help="machine M; M0 is O<M,w>")
    sp.add_argument("m2")
    sp.add_argument("--w", type=bits, default="")

    sp = verb("decode", cmd_decode, "decode a natural (decimal, 0x hex, or @file)")
    sp.add_argument("code")

    diag(verb("tmo", cmd_tmo, "dump member, T and f over a range"))
    diag(verb("f", cmd_f, "the switch function over a range"))
    sp = verb("switch", cmd_switch, "the flipping decider U over a range")
    diag(sp)
    sp.add_argument("--t-l0", required=True)

    sp = verb("compare", cmd_compare, "1 where two deciders agree on numerals")
    sp.add_argument("t_m")
    sp.add_argument("t_l0")
    sp.add_argument("--from", dest="start", type=nat, default=0)
    sp.add_argument("--to", dest="stop", type=nat, default=20)

    verb("demo-goldbach", cmd_demo_goldbach, "run and race the even-number searcher")

    sp = verb("verify", cmd_verify, "run invariant suites")
    sp.add_argument("--suite", choices=["all", *suites.SUITES, *suites.ALIASES], default="all")
    sp.add_argument("--max-len", type=nat)
    sp.add_argument("--seed", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        lines = args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, tm.MachineError, tm.BudgetExceeded, d.DiagonalError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    text = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
