"""A small certificate calculus about machine behaviour.

Sentences (:class:`Halts`, :class:`NotHalts`, :class:`TimeBound`,
:class:`PointwiseEqual`) are proved by certificates that a terminating
checker can verify:

* a halting run is proved by replaying its full configuration trace;
* non-halting is proved by a repeated configuration (prefix, cycle);
* a time bound is proved by the structural derivation of the machine's
  construction (see :mod:`indeplab.combinators`);
* ``M0(M2(s)) = M1(s)`` is proved only by provenance: M1 must literally be
  ``Compose(M0, M2)`` and M2 must carry a derivation (hence be total).

The theory is sound and deliberately incomplete: nothing about a machine
whose configurations never repeat and never halt can be proved.
"""

from __future__ import annotations

import bisect
import functools
from dataclasses import dataclass
from typing import Any, Iterator, Union

from indeplab import combinators, sexpr, tm
from indeplab.tm import Machine


# -- sentences ----------------------------------------------------------------

@dataclass(frozen=True)
class Halts:
    machine: Machine
    w: str

    def sexpr(self):
        return ("halts", self.machine.sexpr(), self.w)


@dataclass(frozen=True)
class NotHalts:
    machine: Machine
    w: str

    def sexpr(self):
        return ("nothalts", self.machine.sexpr(), self.w)


@dataclass(frozen=True)
class TimeBound:
    """t_M(n) <= a * n**k + b for every input length n."""

    machine: Machine
    a: int
    k: int
    b: int

    def sexpr(self):
        return ("timebound", self.machine.sexpr(), self.a, self.k, self.b)


@dataclass(frozen=True)
class PointwiseEqual:
    """``m1`` is total and equals ``m0`` applied to the output of ``m2``."""

    m1: Machine
    m2: Machine
    m0: Machine

    def sexpr(self):
        return ("pweq", self.m1.sexpr(), self.m2.sexpr(), self.m0.sexpr())


Statement = Union[Halts, NotHalts, TimeBound, PointwiseEqual]


# -- certificates --------------------------------------------------------------

@dataclass(frozen=True)
class HaltTrace:
    steps: int
    trace: tuple  # serialized configurations 0..steps

    def sexpr(self):
        return ("trace", self.steps, self.trace)


@dataclass(frozen=True)
class CycleCertificate:
    prefix: int
    cycle: int

    def sexpr(self):
        return ("cycle", self.prefix, self.cycle)

    @property
    def span(self) -> int:
        return self.prefix + self.cycle


@dataclass(frozen=True)
class TimeBoundCertificate:
    derivation: tuple

    def sexpr(self):
        return ("derivation", self.derivation)


@dataclass(frozen=True)
class EqualityCertificate:
    totality: tuple  # derivation for m2
    composer: str = "compose"

    def sexpr(self):
        return ("provenance", self.composer, self.totality)


Certificate = Union[HaltTrace, CycleCertificate, TimeBoundCertificate, EqualityCertificate]


@dataclass(frozen=True)
class Proof:
    subject: Statement
    certificate: Certificate

    def sexpr(self):
        return ("proof", self.subject.sexpr(), self.certificate.sexpr())

    def text(self) -> str:
        return sexpr.dumps(self.sexpr())


class ParseError(ValueError):
    pass


def statement_from_sexpr(x) -> Statement:
    try:
        tag = x[0]
        if tag == "halts":
            _, m, w = x
            return Halts(tm.machine_from_sexpr(m), tm.check_bits(w))
        if tag == "nothalts":
            _, m, w = x
            return NotHalts(tm.machine_from_sexpr(m), tm.check_bits(w))
        if tag == "timebound":
            _, m, a, k, b = x
            if not all(isinstance(v, int) and v >= 0 for v in (a, k, b)):
                raise ParseError("bound coefficients must be natural numbers")
            return TimeBound(tm.machine_from_sexpr(m), a, k, b)
        if tag == "pweq":
            _, m1, m2, m0 = x
            return PointwiseEqual(*(tm.machine_from_sexpr(v) for v in (m1, m2, m0)))
    except (ValueError, TypeError, IndexError, KeyError) as exc:
        raise ParseError(f"malformed statement: {exc}") from exc
    raise ParseError(f"unknown statement tag {x[0]!r}")


def certificate_from_sexpr(x) -> Certificate:
    try:
        tag = x[0]
        if tag == "trace":
            _, steps, trace = x
            return HaltTrace(steps, trace)
        if tag == "cycle":
            _, prefix, cycle = x
            return CycleCertificate(prefix, cycle)
        if tag == "derivation":
            _, d = x
            return TimeBoundCertificate(d)
        if tag == "provenance":
            _, composer, d = x
            return EqualityCertificate(d, composer)
    except (ValueError, TypeError, IndexError) as exc:
        raise ParseError(f"malformed certificate: {exc}") from exc
    raise ParseError(f"unknown certificate tag {x[0]!r}")


def proof_from_sexpr(x) -> Proof:
    if not (isinstance(x, tuple) and len(x) == 3 and x[0] == "proof"):
        raise ParseError("not a proof expression")
    return Proof(statement_from_sexpr(x[1]), certificate_from_sexpr(x[2]))


def loads_proof(text: str) -> Proof:
    try:
        return proof_from_sexpr(sexpr.loads(text))
    except sexpr.SExprError as exc:
        raise ParseError(str(exc)) from exc


# -- checking -------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: str = "ok"

    def __bool__(self) -> bool:
        return self.accepted


ACCEPT = Verdict(True)


def _reject(reason: str) -> Verdict:
    return Verdict(False, reason)


def _is_nat(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


def check_proof(statement: Statement, proof: Proof) -> Verdict:
    """Decide whether ``proof`` proves ``statement``.  Always terminates."""
    if proof.subject != statement:
        return _reject("subject-mismatch")
    cert = proof.certificate
    if isinstance(statement, Halts):
        if not isinstance(cert, HaltTrace):
            return _reject("kind-mismatch")
        return _check_trace(statement, cert)
    if isinstance(statement, NotHalts):
        if not isinstance(cert, CycleCertificate):
            return _reject("kind-mismatch")
        return _check_cycle(statement, cert)
    if isinstance(statement, TimeBound):
        if not isinstance(cert, TimeBoundCertificate):
            return _reject("kind-mismatch")
        derived = combinators.derive(statement.machine)
        if derived is None:
            return _reject("uncertified-machine")
        if cert.derivation != derived:
            return _reject("derivation-mismatch")
        if not combinators.dominated(derived[1], statement.a, statement.k, statement.b):
            return _reject("bound-exceeded")
        return ACCEPT
    if isinstance(statement, PointwiseEqual):
        if not isinstance(cert, EqualityCertificate):
            return _reject("kind-mismatch")
        if cert.composer != "compose":
            return _reject("malformed")
        if statement.m1 != combinators.Compose(statement.m0, statement.m2):
            return _reject("not-a-composition")
        derived = combinators.derive(statement.m2)
        if derived is None:
            return _reject("uncertified-totality")
        if cert.totality != derived:
            return _reject("derivation-mismatch")
        return ACCEPT
    return _reject("malformed")


def _check_trace(st: Halts, cert: HaltTrace) -> Verdict:
    if not _is_nat(cert.steps) or not isinstance(cert.trace, tuple):
        return _reject("malformed")
    if len(cert.trace) != cert.steps + 1:
        return _reject("trace-length")
    m = st.machine
    cfg = m.initial(st.w)
    for i, recorded in enumerate(cert.trace):
        if tm.config_sexpr(cfg) != recorded:
            return _reject("trace-mismatch")
        halted = m.is_halted(cfg)
        if i < cert.steps:
            if halted:
                return _reject("halted-early")
            cfg = m.advance(cfg)
        elif not halted:
            return _reject("not-halted")
    return ACCEPT


def _check_cycle(st: NotHalts, cert: CycleCertificate) -> Verdict:
    if not (_is_nat(cert.prefix) and _is_nat(cert.cycle)) or cert.cycle < 1:
        return _reject("malformed")
    m = st.machine
    cfg = m.initial(st.w)
    anchor = None
    for t in range(cert.prefix + cert.cycle + 1):
        if t == cert.prefix:
            anchor = cfg
        if m.is_halted(cfg):
            return _reject("halted")
        if t < cert.prefix + cert.cycle:
            cfg = m.advance(cfg)
    if cfg != anchor:
        return _reject("no-repeat")
    return ACCEPT


# -- proof search ----------------------------------------------------------------

def certify_halting(m: Machine, w: str, budget: int) -> Proof | None:
    trace = []
    cfg = None
    for cfg in tm.iterate(m, w, budget):
        trace.append(tm.config_sexpr(cfg))
    if cfg is None or not m.is_halted(cfg):
        return None
    return Proof(Halts(m, w), HaltTrace(len(trace) - 1, tuple(trace)))


def find_nonhalting_proof(m: Machine, w: str, search_budget: int) -> Proof | None:
    """Look for the first repeated configuration within the budget."""
    seen: dict[Any, int] = {}
    for t, cfg in enumerate(tm.iterate(m, w, search_budget)):
        if m.is_halted(cfg):
            return None
        first = seen.setdefault(cfg, t)
        if first != t:
            return Proof(NotHalts(m, w), CycleCertificate(first, t - first))
    return None


def certify_time_bound(m: Machine) -> Proof | None:
    d = combinators.derive(m)
    if d is None:
        return None
    a, k, b = combinators.dominating_monomial(d[1])
    return Proof(TimeBound(m, a, k, b), TimeBoundCertificate(d))


def certify_composition(m0: Machine, m2: Machine) -> Proof | None:
    d = combinators.derive(m2)
    if d is None:
        return None
    m1 = combinators.Compose(m0, m2)
    return Proof(PointwiseEqual(m1, m2, m0), EqualityCertificate(d))


# -- the enumerated fragment --------------------------------------------------------
#
# Theorems about halting behaviour of table machines are enumerated in
# classes of increasing weight.  A candidate (machine i, input rank j, span p)
# has weight i + j + p; the class of weight W is finite, and inside a class
# accepted pairs are ordered by (length, text) of their serialization.

_SYMBOLS = ("0", "1", tm.BLANK)
_MOVE_ORDER = ("S", "R", "L")


def _machines_with(n: int) -> int:
    return ((n + 1) * ((n + 1) * 9) ** 3) ** n


def machine_at(index: int) -> tm.MachineDescription:
    """The ``index``-th machine of the canonical enumeration.

    Index 0 is the machine that starts in its halt state.  Then come all
    machines with one working state, then two, and so on; within a size the
    index is a mixed-radix numeral over the transition choices, least
    significant first.  Index 1 is the one-state machine that stays put
    forever.
    """
    if index < 0:
        raise ValueError("negative index")
    n, rest = 0, index
    while rest >= _machines_with(n):
        rest -= _machines_with(n)
        n += 1
    states = [f"q{j}" for j in range(n)]
    targets = states + ["h"]
    trans = {("h", a): ("h", a, "S") for a in tm.ALPHABET}
    for q in states:
        rest, t = divmod(rest, n + 1)
        trans[(q, tm.LEFT_END)] = (targets[t], tm.LEFT_END, "R")
        for a in _SYMBOLS:
            rest, opt = divmod(rest, (n + 1) * 9)
            t, opt = divmod(opt, 9)
            wi, mi = divmod(opt, 3)
            writes = (a,) + tuple(x for x in _SYMBOLS if x != a)
            trans[(q, a)] = (targets[t], writes[wi], _MOVE_ORDER[mi])
    start = states[0] if states else "h"
    return tm.validate_machine(tm.RawMachine(f"m{index}", trans, start, "h"))


@functools.lru_cache(maxsize=None)
def _machine(index: int) -> tm.MachineDescription:
    return machine_at(index)


_traces: dict[tuple[int, int], list] = {}


def _configs(i: int, j: int, upto: int) -> list:
    """Configurations 0..upto (or until halt) of machine i on input rank j."""
    cfgs = _traces.get((i, j))
    m = _machine(i)
    if cfgs is None:
        cfgs = _traces[(i, j)] = [m.initial(tm.shortlex_unrank(j))]
    while len(cfgs) <= upto and not m.is_halted(cfgs[-1]):
        cfgs.append(m.advance(cfgs[-1]))
    return cfgs


def _class_candidates(weight: int) -> Iterator[Proof]:
    for i in range(weight + 1):
        m = _machine(i)
        for j in range(weight - i + 1):
            p = weight - i - j
            cfgs = _configs(i, j, p)
            w = tm.shortlex_unrank(j)
            if len(cfgs) == p + 1 and m.is_halted(cfgs[p]) and (p == 0 or not m.is_halted(cfgs[p - 1])):
                trace = tuple(tm.config_sexpr(c) for c in cfgs)
                yield Proof(Halts(m, w), HaltTrace(p, trace))
            if len(cfgs) <= p:
                continue
            if m.is_halted(cfgs[p]):
                continue
            for prefix in range(p):
                if cfgs[prefix] == cfgs[p]:
                    yield Proof(NotHalts(m, w), CycleCertificate(prefix, p - prefix))


@functools.lru_cache(maxsize=None)
def theorem_class(weight: int) -> tuple[Proof, ...]:
    found = [(len(t), t, pr) for pr in _class_candidates(weight) for t in (pr.text(),)]
    found.sort(key=lambda x: (x[0], x[1]))
    return tuple(pr for _, _, pr in found)


_offsets: list[int] = [0]


def enumerate_theorems(k: int) -> Proof:
    """The k-th accepted (statement, proof) pair of the enumeration."""
    if k < 0:
        raise ValueError("index must be non-negative")
    while _offsets[-1] <= k:
        _offsets.append(_offsets[-1] + len(theorem_class(len(_offsets) - 1)))
    w = bisect.bisect_right(_offsets, k) - 1
    return theorem_class(w)[k - _offsets[w]]


def theorems(start: int = 0) -> Iterator[tuple[int, Proof]]:
    k = start
    while True:
        yield k, enumerate_theorems(k)
        k += 1
