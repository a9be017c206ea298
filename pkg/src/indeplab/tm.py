"""Single-tape deterministic Turing machines over the alphabet {0, 1, _, >}.

Two kinds of machine share one stepping interface (:class:`Machine`):

* :class:`MachineDescription` is a literal transition table.
* Composite machines (see :mod:`indeplab.combinators`) simulate other
  machines and charge one outer step per simulated inner step plus a bounded
  amount of bookkeeping.

A machine configuration is an immutable, hashable value.  Equal
configurations of the same machine have identical futures, which is what the
cycle certificates in :mod:`indeplab.theory` rely on.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Mapping

from indeplab import sexpr

BLANK = "_"
LEFT_END = ">"
ALPHABET = ("0", "1", BLANK, LEFT_END)
MOVES = {"L": -1, "S": 0, "R": 1}

DEFAULT_SAFETY_BUDGET = 10**6
MAX_PROFILE_LEN = 16


def safety_budget() -> int:
    """Default step guard, overridable through ``INDEPLAB_SAFETY_BUDGET``."""
    raw = os.environ.get("INDEPLAB_SAFETY_BUDGET")
    if raw is None:
        return DEFAULT_SAFETY_BUDGET
    value = int(raw)
    if value < 0:
        raise ValueError("INDEPLAB_SAFETY_BUDGET must be non-negative")
    return value


# -- binary strings ---------------------------------------------------------

def check_bits(s: str) -> str:
    if any(c not in "01" for c in s):
        raise ValueError(f"not a binary string: {s!r}")
    return s


def string_num(s: str) -> int:
    """Positional value of a bit string; the empty string is 0."""
    value = 0
    for c in check_bits(s):
        value = 2 * value + (c == "1")
    return value


def num_bits(n: int) -> str:
    """Canonical binary numeral for ``n`` (no leading zeros, 0 -> "")."""
    if n < 0:
        raise ValueError("negative number")
    return format(n, "b") if n else ""


def strings_of_length(n: int) -> Iterator[str]:
    for t in itertools.product("01", repeat=n):
        yield "".join(t)


def strings_up_to(n: int) -> Iterator[str]:
    for k in range(n + 1):
        yield from strings_of_length(k)


def shortlex_rank(s: str) -> int:
    """Position of ``s`` in the order "", "0", "1", "00", ..."""
    return (1 << len(s)) - 1 + string_num(s)


def shortlex_unrank(i: int) -> str:
    n = (i + 1).bit_length() - 1
    return format(i + 1 - (1 << n), "b").zfill(n) if n else ""


# -- the machine interface ---------------------------------------------------

class Machine:
    """Common stepping interface.

    Subclasses implement ``initial``, ``advance``, ``is_halted``, ``output``
    and ``sexpr``.  Equality and hashing go through the canonical
    serialization.
    """

    def initial(self, s: str) -> Any:
        raise NotImplementedError

    def advance(self, cfg: Any) -> Any:
        raise NotImplementedError

    def is_halted(self, cfg: Any) -> bool:
        raise NotImplementedError

    def output(self, cfg: Any) -> str:
        raise NotImplementedError

    def sexpr(self) -> tuple:
        raise NotImplementedError

    def text(self) -> str:
        cached = self.__dict__.get("_text")
        if cached is None:
            cached = sexpr.dumps(self.sexpr())
            object.__setattr__(self, "_text", cached)
        return cached

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Machine) and self.text() == other.text()

    def __hash__(self) -> int:
        return hash(self.text())

    def __repr__(self) -> str:
        t = self.text()
        return f"<{type(self).__name__} {t if len(t) < 80 else t[:77] + '...'}>"


_PARSERS: dict[str, Callable[[tuple], Machine]] = {}


def register(tag: str):
    """Class decorator binding a serialization tag to ``cls.from_sexpr``."""

    def deco(cls):
        _PARSERS[tag] = cls.from_sexpr
        return cls

    return deco


def machine_from_sexpr(x) -> Machine:
    if not isinstance(x, tuple) or not x or not isinstance(x[0], str):
        raise ValueError("not a machine expression")
    try:
        parse = _PARSERS[x[0]]
    except KeyError:
        raise ValueError(f"unknown machine tag {x[0]!r}") from None
    m = parse(x)
    if m.sexpr() != x:
        raise ValueError("non-canonical machine expression")
    return m


class MachineError(ValueError):
    """Raised when a description violates machine constraints.

    ``violations`` holds one ``(code, detail)`` pair per broken constraint.
    """

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = violations
        super().__init__("; ".join(f"{code}: {detail}" for code, detail in violations))


@dataclass(frozen=True)
class RawMachine:
    """Unvalidated machine as read from a file."""

    name: str
    transitions: Mapping[tuple[str, str], tuple[str, str, str]]
    start: str | None
    halt: str | None


@register("tm")
class MachineDescription(Machine):
    """A validated 5-tuple.  Build through :func:`validate_machine`.

    Internal configurations are ``(state, head, tape)`` where ``tape`` is the
    string of cells from cell 0 with trailing blanks stripped.
    """

    def __init__(self, states, transitions, start, halt, name="machine"):
        self.states = tuple(sorted(states))
        self.delta = dict(transitions)
        self.start = start
        self.halt = halt
        self.name = name

    def sexpr(self) -> tuple:
        rows = tuple(
            (q, a, *self.delta[(q, a)]) for q in self.states for a in ALPHABET
        )
        return ("tm", self.start, self.halt, rows)

    @classmethod
    def from_sexpr(cls, x) -> "MachineDescription":
        if not (isinstance(x, tuple) and len(x) == 4 and x[0] == "tm"):
            raise ValueError("not a tm expression")
        _, start, halt, rows = x
        trans = {}
        for row in rows:
            if len(row) != 5:
                raise ValueError("bad transition row")
            q, a, p, b, d = row
            if (q, a) in trans:
                raise MachineError([("duplicate-transition", f"{q} {a}")])
            trans[(q, a)] = (p, b, d)
        return validate_machine(RawMachine("machine", trans, start, halt))

    def initial(self, s: str):
        return (self.start, 0, (LEFT_END + check_bits(s)))

    def advance(self, cfg):
        state, head, tape = cfg
        sym = tape[head] if head < len(tape) else BLANK
        nxt, write, move = self.delta[(state, sym)]
        if head < len(tape):
            if write != sym:
                tape = tape[:head] + write + tape[head + 1:]
                if head == len(tape) - 1:
                    tape = tape.rstrip(BLANK)
        elif write != BLANK:
            tape = tape + BLANK * (head - len(tape)) + write
        return (nxt, head + MOVES[move], tape)

    def is_halted(self, cfg) -> bool:
        return cfg[0] == self.halt

    def output(self, cfg) -> str:
        return cfg[2][1:]

    def to_text(self) -> str:
        lines = [f"machine {self.name}"]
        for q in self.states:
            for a in ALPHABET:
                p, b, d = self.delta[(q, a)]
                lines.append(f"{q} {a} -> {p} {b} {d}")
        lines.append(f"start {self.start}")
        lines.append(f"halt {self.halt}")
        return "\n".join(lines) + "\n"


# -- file format and validation ----------------------------------------------

def parse_machine(text: str) -> RawMachine:
    name, start, halt = "machine", None, None
    trans: dict[tuple[str, str], tuple[str, str, str]] = {}
    errors: list[tuple[str, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "machine" and len(parts) == 2:
            name = parts[1]
        elif parts[0] == "start" and len(parts) == 2:
            start = parts[1]
        elif parts[0] == "halt" and len(parts) == 2:
            halt = parts[1]
        elif len(parts) == 6 and parts[2] == "->":
            q, a, _, p, b, d = parts
            for sym in (a, b):
                if sym not in ALPHABET:
                    errors.append(("unknown-symbol", f"line {lineno}: {sym!r}"))
            if d not in MOVES:
                errors.append(("unknown-move", f"line {lineno}: {d!r}"))
            if (q, a) in trans:
                errors.append(("duplicate-transition", f"line {lineno}: {q} {a}"))
            trans[(q, a)] = (p, b, d)
        else:
            errors.append(("syntax", f"line {lineno}: {line!r}"))
    if errors:
        raise MachineError(errors)
    return RawMachine(name, trans, start, halt)


def validate_machine(desc: RawMachine) -> MachineDescription:
    errors: list[tuple[str, str]] = []
    trans = desc.transitions
    states = {q for q, _ in trans} | {p for p, _, _ in trans.values()}
    if desc.start is None:
        errors.append(("missing-start", "no start line"))
    else:
        states.add(desc.start)
    if desc.halt is None:
        errors.append(("missing-halt", "no halt line"))
    else:
        states.add(desc.halt)
    for q in sorted(states):
        for a in ALPHABET:
            if (q, a) not in trans:
                errors.append(("non-total", f"no transition for ({q}, {a})"))
    for (q, a), (p, b, d) in sorted(trans.items()):
        if a not in ALPHABET or b not in ALPHABET or d not in MOVES:
            errors.append(("unknown-symbol", f"({q}, {a}) -> ({p}, {b}, {d})"))
            continue
        if q == desc.halt:
            if (p, b, d) != (q, a, "S"):
                errors.append(("halt-state", f"halt state must self-loop on {a} with S"))
        elif a == LEFT_END:
            if b != LEFT_END or d != "R":
                errors.append(("left-end", f"({q}, >) must write > and move R"))
        elif b == LEFT_END:
            errors.append(("left-end", f"({q}, {a}) writes > on an ordinary cell"))
    for q in sorted(states):
        if q == desc.halt:
            continue
        if all(trans.get((q, a)) == (q, a, "S") for a in ALPHABET):
            errors.append(("duplicate-halt", f"state {q} behaves like the halt state"))
    if errors:
        raise MachineError(errors)
    return MachineDescription(states, trans, desc.start, desc.halt, desc.name)


def load_machine(path) -> MachineDescription:
    with open(path) as fh:
        return validate_machine(parse_machine(fh.read()))


# -- stepping -------------------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    """Instantaneous description of a table machine plus its step counter."""

    state: str
    tape: str
    head: int
    steps: int = 0

    def read(self) -> str:
        return self.tape[self.head] if self.head < len(self.tape) else BLANK

    def cell(self, i: int) -> str:
        return self.tape[i] if i < len(self.tape) else BLANK


def start_configuration(m: MachineDescription, s: str) -> Configuration:
    state, head, tape = m.initial(s)
    return Configuration(state, tape, head, 0)


def step(m: MachineDescription, c: Configuration) -> Configuration:
    state, head, tape = m.advance((c.state, c.head, c.tape))
    return Configuration(state, tape, head, c.steps + 1)


@dataclass(frozen=True)
class RunOutcome:
    halted: bool
    steps: int
    output: str | None = None

    @property
    def kind(self) -> str:
        return "Halted" if self.halted else "Budget-Exhausted"

    def describe(self) -> str:
        if self.halted:
            return f"Halted steps={self.steps} output={self.output}"
        return f"Budget-Exhausted steps={self.steps}"


def iterate(m: Machine, s: str, budget: int) -> Iterator[Any]:
    """Yield configurations 0..k where k is the halt step or ``budget``."""
    cfg = m.initial(s)
    yield cfg
    for _ in range(budget):
        if m.is_halted(cfg):
            return
        cfg = m.advance(cfg)
        yield cfg


def run_bounded(m: Machine, s: str, budget: int) -> RunOutcome:
    if budget < 0:
        raise ValueError("budget must be non-negative")
    cfg = m.initial(s)
    halted, advance = m.is_halted, m.advance
    steps = 0
    while not halted(cfg):
        if steps == budget:
            return RunOutcome(False, steps)
        cfg = advance(cfg)
        steps += 1
    return RunOutcome(True, steps, m.output(cfg))


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, input: str | None = None):
        super().__init__(message)
        self.input = input


def run_total(m: Machine, s: str, budget: int | None = None) -> RunOutcome:
    """Run a machine expected to halt; exhausting the guard is an error."""
    budget = safety_budget() if budget is None else budget
    out = run_bounded(m, s, budget)
    if not out.halted:
        raise BudgetExceeded(f"no halt within {budget} steps on input {s!r}", s)
    return out


def decide(m: Machine, s: str, budget: int | None = None) -> int:
    """Run a decider and read its answer bit."""
    out = run_total(m, s, budget).output
    if out not in ("0", "1"):
        raise ValueError(f"decider produced non-bit output {out!r} on {s!r}")
    return int(out)


@dataclass(frozen=True)
class ProfileRow:
    length: int
    max_steps: int
    witness: str


def time_complexity_profile(m: Machine, max_len: int, budget: int | None = None) -> list[ProfileRow]:
    """Worst-case step count per input length, by exhaustive enumeration."""
    if not 0 <= max_len <= MAX_PROFILE_LEN:
        raise ValueError(f"max_len must lie in 0..{MAX_PROFILE_LEN}")
    budget = safety_budget() if budget is None else budget
    rows = []
    for n in range(max_len + 1):
        best, witness = -1, ""
        for s in strings_of_length(n):
            steps = run_total(m, s, budget).steps
            if steps > best:
                best, witness = steps, s
        rows.append(ProfileRow(n, best, witness))
    return rows


# -- dovetailing -------------------------------------------------------------

@dataclass(frozen=True)
class DovetailResult:
    task: int
    value: Any
    rounds: int


def dovetail(tasks: Iterable[Iterator[Any]], round_budget: int | None = None) -> DovetailResult | None:
    """Advance each task one step per round, in order, until one finishes.

    A task is an iterator; each ``next`` call is one step and the task
    finishes when it raises ``StopIteration`` (its ``value`` is the result).
    Within a round lower-numbered tasks step first, so they win ties.
    Returns ``None`` when ``round_budget`` rounds pass without a finisher.
    """
    tasks = list(tasks)
    rounds = itertools.count(1) if round_budget is None else range(1, round_budget + 1)
    for r in rounds:
        for i, task in enumerate(tasks):
            try:
                next(task)
            except StopIteration as stop:
                return DovetailResult(i, stop.value, r)
    return None


def simulation_task(m: Machine, s: str) -> Iterator[None]:
    """Resumable simulation; finishes with the halt step count.

    Resume ``r`` performs step ``r``, so a machine halting at step h >= 1
    finishes on resume h (and on resume 1 if it starts halted).
    """
    cfg = m.initial(s)
    steps = 0
    if m.is_halted(cfg):
        return steps
    while True:
        cfg = m.advance(cfg)
        steps += 1
        if m.is_halted(cfg):
            return steps
        yield


def config_sexpr(cfg: Any):
    if isinstance(cfg, tuple):
        return tuple(config_sexpr(c) for c in cfg)
    if isinstance(cfg, (int, str)):
        return cfg
    raise TypeError(f"unserializable configuration component {cfg!r}")

