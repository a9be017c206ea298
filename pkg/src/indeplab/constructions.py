"""Machine builders: the racer, the self-searching machine, thresholds,
switches, finite patches and almost-equality probes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from indeplab import sexpr, theory, tm
from indeplab.combinators import Composite, Patch, Switch, Threshold
from indeplab.tm import Machine, MachineDescription, register


# -- sample table machines ----------------------------------------------------

def _table(name, rows, start="q0", halt="h") -> MachineDescription:
    trans = {("h", a): ("h", a, "S") for a in tm.ALPHABET}
    trans.update(rows)
    return tm.validate_machine(tm.RawMachine(name, trans, start, halt))


def halt_only() -> MachineDescription:
    return _table("halt-only", {}, start="h")


def self_loop() -> MachineDescription:
    rows = {("q0", ">"): ("q0", ">", "R")}
    rows.update({("q0", a): ("q0", a, "S") for a in "01_"})
    return _table("self-loop", rows)


def move_right() -> MachineDescription:
    """Walk right over the input and halt on the first blank."""
    rows = {
        ("q0", ">"): ("q1", ">", "R"),
        ("q1", ">"): ("q1", ">", "R"),
        ("q1", "0"): ("q1", "0", "R"),
        ("q1", "1"): ("q1", "1", "R"),
        ("q1", "_"): ("h", "_", "S"),
    }
    rows.update({("q0", a): ("q1", a, "S") for a in "01_"})
    return _table("move-right", rows)


def ping_pong() -> MachineDescription:
    rows = {("q0", ">"): ("q1", ">", "R"), ("q1", ">"): ("q1", ">", "R"), ("q2", ">"): ("q2", ">", "R")}
    for a in "01_":
        rows[("q0", a)] = ("q1", a, "S")
        rows[("q1", a)] = ("q2", a, "S")
        rows[("q2", a)] = ("q1", a, "S")
    return _table("ping-pong", rows)


def halts_at(k: int) -> MachineDescription:
    """Moves right ``k`` times then halts, on every input."""
    if k == 0:
        return halt_only()
    states = [f"q{i}" for i in range(k)] + ["h"]
    rows = {}
    for i in range(k):
        for a in tm.ALPHABET:
            rows[(states[i], a)] = (states[i + 1], a, "R")
    return _table(f"halts-at-{k}", rows)


# -- the racer ----------------------------------------------------------------

@dataclass(frozen=True)
class RacerVerdict:
    kind: str  # "Accept", "Reject" or "StillRunning"
    value: int  # halt step, proof index, or rounds spent
    rounds: int

    def describe(self) -> str:
        if self.kind == "StillRunning":
            return f"StillRunning rounds={self.rounds}"
        label = {"Accept": "halt-step", "Reject": "proof-index"}[self.kind]
        return f"{self.kind} {label}={self.value} rounds={self.rounds}"


def _refutation_task(m: Machine, w: str) -> Iterator[None]:
    target = theory.NotHalts(m, w)
    for k in itertools.count():
        if theory.enumerate_theorems(k).subject == target:
            return k
        yield


def race(m: Machine, w: str, round_budget: int) -> RacerVerdict:
    """Simulate ``m`` on ``w`` while scanning theorems for a refutation.

    Each round performs one simulation step and then checks one enumerated
    theorem.
    """
    if round_budget < 0:
        raise ValueError("round budget must be non-negative")
    result = tm.dovetail([tm.simulation_task(m, w), _refutation_task(m, w)], round_budget)
    if result is None:
        return RacerVerdict("StillRunning", round_budget, round_budget)
    kind = "Accept" if result.task == 0 else "Reject"
    return RacerVerdict(kind, result.value, result.rounds)


# -- the self-searching machine ---------------------------------------------------

HOLE = "@"
SEARCHER_BLUEPRINT = '("diag" @ "")'


@register("diag")
class ProofSearcher(Composite):
    """Scan the theorem enumeration for a refutation of a fixed target.

    The target is obtained by substituting the quoted blueprint into its own
    hole.  With :data:`SEARCHER_BLUEPRINT` that reproduces this very machine,
    so the searcher looks for a proof that it does not halt on ``w``.
    Each step inspects one theorem; the theorem index is part of the
    configuration, so configurations never repeat.
    """

    def __init__(self, blueprint: str, w: str = ""):
        self.blueprint = blueprint
        self.w = tm.check_bits(w)
        self._target = None

    def sexpr(self):
        return ("diag", self.blueprint, self.w)

    @classmethod
    def from_sexpr(cls, x):
        _, blueprint, w = x
        return cls(blueprint, w)

    def target(self) -> Machine:
        if self._target is None:
            text = self.blueprint.replace(HOLE, sexpr.dumps(self.blueprint), 1)
            self._target = tm.machine_from_sexpr(sexpr.loads(text))
        return self._target

    def initial(self, s):
        tm.check_bits(s)
        return ("search", 0)

    def advance(self, cfg):
        k = cfg[1]
        goal = theory.NotHalts(self.target(), self.w)
        if theory.enumerate_theorems(k).subject == goal:
            return ("halt", "")
        return ("search", k + 1)


class FixedPointError(RuntimeError):
    pass


def build_fixed_point() -> tuple[ProofSearcher, str]:
    w_h = ""
    m_h = ProofSearcher(SEARCHER_BLUEPRINT, w_h)
    if m_h.target() != m_h:
        raise FixedPointError("self-description does not reproduce the machine")
    return m_h, w_h


# -- thresholds and switches ------------------------------------------------------

def build_O(m: Machine, w: str) -> Threshold:
    return Threshold(m, w)


@dataclass(frozen=True)
class ThresholdProfile:
    kind: str  # "AllOnes" or "StepThreshold"
    m: int | None = None

    def describe(self) -> str:
        return "AllOnes" if self.kind == "AllOnes" else f"StepThreshold({self.m})"


class ThresholdViolation(ValueError):
    pass


def threshold_profile(o: Machine, max_len: int) -> ThresholdProfile:
    """Classify a threshold machine from one input per length.

    Outputs of a threshold machine depend only on input length, so the
    all-zeros string stands in for its length.
    """
    bits = [tm.decide(o, "0" * n) for n in range(max_len + 1)]
    if all(bits):
        return ThresholdProfile("AllOnes")
    first = bits.index(0)
    if any(bits[first:]):
        raise ThresholdViolation(f"output pattern {bits} is not monotone: 1 after 0")
    return ThresholdProfile("StepThreshold", first)


def build_Q(m1: Machine, m2: Machine, w: str) -> Switch:
    return Switch(m1, m2, w)


# -- language views ----------------------------------------------------------------

@dataclass(frozen=True)
class LanguageView:
    """The language ``{s | decider(s) = 1}`` of a total bit-valued decider."""

    decider: Machine
    budget: int | None = None

    def __contains__(self, s: str) -> bool:
        return tm.decide(self.decider, s, self.budget) == 1

    def bit(self, s: str) -> int:
        return tm.decide(self.decider, s, self.budget)


def patch_language(base: LanguageView, table: Mapping[str, int | str], m: int) -> LanguageView:
    table = {s: str(v) for s, v in table.items()}
    return LanguageView(Patch(base.decider, table, m), base.budget)


@dataclass(frozen=True)
class EqualBeyond:
    m: int

    def describe(self) -> str:
        return f"Equal-beyond({self.m})"


@dataclass(frozen=True)
class Divergent:
    witnesses: tuple[str, ...] = field(default=())

    def describe(self) -> str:
        return f"Divergent({len(self.witnesses)} witnesses)"


def almost_equal(a: LanguageView, b: LanguageView, probe_len: int):
    """Probe whether two languages agree on all long enough strings.

    Divergent if they disagree at either of the two longest probed lengths;
    otherwise the least m beyond which no disagreement was seen.
    """
    if not 0 <= probe_len <= tm.MAX_PROFILE_LEN:
        raise ValueError(f"probe_len must lie in 0..{tm.MAX_PROFILE_LEN}")
    diffs = [s for s in tm.strings_up_to(probe_len) if a.bit(s) != b.bit(s)]
    if any(len(s) >= probe_len - 1 for s in diffs):
        return Divergent(tuple(diffs))
    return EqualBeyond(max((len(s) + 1 for s in diffs), default=0))


# -- the Goldbach demo -----------------------------------------------------------------

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def goldbach_pair(n: int) -> tuple[int, int] | None:
    """Least odd-prime split of an even ``n`` (None if there is none)."""
    for p in range(3, n // 2 + 1, 2):
        if is_prime(p) and is_prime(n - p):
            return p, n - p
    return None


@register("goldbach")
class GoldbachSearcher(Composite):
    """Halts at once unless the input has length 1; then hunts for an even
    n > 4 with no odd-prime split, testing one candidate prime per step."""

    def sexpr(self):
        return ("goldbach",)

    @classmethod
    def from_sexpr(cls, x):
        return cls()

    def initial(self, s):
        if len(tm.check_bits(s)) != 1:
            return ("halt", "")
        return ("search", 6, 3)

    def advance(self, cfg):
        _, n, p = cfg
        if p > n // 2:
            return ("halt", tm.num_bits(n))
        if is_prime(p) and is_prime(n - p):
            return ("search", n + 2, 3)
        return ("search", n, p + 2)


def build_goldbach_demo() -> GoldbachSearcher:
    return GoldbachSearcher()
