"""Quadruplet codes, the certified language L_M0, the diagonal function T_M0,
the switch function f and the two machines built on top of f."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from indeplab import sexpr, theory, tm
from indeplab.combinators import Composite, Compose
from indeplab.theory import PointwiseEqual, Proof, TimeBound
from indeplab.tm import Machine, register


@dataclass(frozen=True)
class Quadruplet:
    m1: Machine
    m2: Machine
    p1: Proof  # TimeBound(m1, ...)
    p2: Proof  # PointwiseEqual(m1, m2, M0)

    def components(self) -> tuple[str, str, str, str]:
        return (self.m1.text(), self.m2.text(), self.p1.text(), self.p2.text())

    def sexpr(self):
        return ("quad", self.m1.sexpr(), self.m2.sexpr(), self.p1.sexpr(), self.p2.sexpr())


def make_quadruplet(m0: Machine, m2: Machine) -> Quadruplet:
    """The certified quadruplet for ``Compose(m0, m2)``; m2 must be certified."""
    p2 = theory.certify_composition(m0, m2)
    if p2 is None:
        raise ValueError("m2 has no totality derivation")
    m1 = p2.subject.m1
    p1 = theory.certify_time_bound(m1)
    if p1 is None:
        raise ValueError("composition has no time-bound derivation")
    return Quadruplet(m1, m2, p1, p2)


# -- encoding --------------------------------------------------------------------

MAGIC = b"\x01QD"


class EncodingError(ValueError):
    pass


def _varint(n: int) -> bytes:
    out = bytearray()
    while True:
        byte, n = n & 0x7F, n >> 7
        out.append(byte | (0x80 if n else 0))
        if not n:
            return bytes(out)


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    value = shift = 0
    while True:
        if pos >= len(buf):
            raise EncodingError("truncated length")
        byte = buf[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        shift += 7
        if not byte & 0x80:
            if byte == 0 and shift > 7:
                raise EncodingError("non-minimal length")
            return value, pos


def pack(q: Quadruplet) -> int:
    """Code a quadruplet without checking its proofs."""
    payload = bytearray(MAGIC)
    for part in q.components():
        raw = part.encode()
        payload += _varint(len(raw)) + raw
    return int.from_bytes(payload, "big")


def t_encode(q: Quadruplet) -> int:
    """Code a quadruplet whose embedded proofs check.  Codes are >= 1."""
    if not isinstance(q.p1.subject, TimeBound) or q.p1.subject.machine != q.m1:
        raise EncodingError("p1 must prove a time bound for m1")
    if not isinstance(q.p2.subject, PointwiseEqual) or (q.p2.subject.m1, q.p2.subject.m2) != (q.m1, q.m2):
        raise EncodingError("p2 must prove the composition identity for (m1, m2)")
    for name, p in (("p1", q.p1), ("p2", q.p2)):
        verdict = theory.check_proof(p.subject, p)
        if not verdict:
            raise EncodingError(f"{name} rejected: {verdict.reason}")
    return pack(q)


def t_decode(n: int) -> Quadruplet | None:
    """Inverse of :func:`pack` on its range; None marks a non-code."""
    if n <= 0:
        return None
    buf = n.to_bytes((n.bit_length() + 7) // 8, "big")
    if not buf.startswith(MAGIC):
        return None
    pos, parts = len(MAGIC), []
    try:
        for _ in range(4):
            size, pos = _read_varint(buf, pos)
            if pos + size > len(buf):
                return None
            parts.append(buf[pos:pos + size].decode())
            pos += size
        if pos != len(buf):
            return None
        m1, m2 = (tm.machine_from_sexpr(sexpr.loads(p)) for p in parts[:2])
        p1, p2 = (theory.loads_proof(p) for p in parts[2:])
    except (EncodingError, ValueError, TypeError, IndexError, UnicodeDecodeError):
        return None
    q = Quadruplet(m1, m2, p1, p2)
    if q.components() != tuple(parts):
        return None
    return q


def is_code(n: int) -> bool:
    return t_decode(n) is not None


# -- the evaluator ---------------------------------------------------------------------

class DiagonalError(RuntimeError):
    pass


class SoundnessError(AssertionError):
    pass


@dataclass
class Membership:
    member: bool
    failures: dict[str, str] = field(default_factory=dict)

    def describe(self) -> str:
        if self.member:
            return "member"
        return "; ".join(f"{k}: {v}" for k, v in self.failures.items())


class DiagonalEvaluator:
    """Memoized T_M0, membership and f relative to a switch machine ``m0``.

    ``seeds`` maps chosen small numbers to quadruplets; those numbers are
    decoded through the table instead of :func:`t_decode`.  Genuine codes are
    far too large to reach by counting up from 0.
    """

    def __init__(self, m0: Machine, seeds: Mapping[int, Quadruplet] | None = None, budget: int | None = None):
        self.m0 = m0
        self.seeds = dict(sorted((seeds or {}).items()))
        self.budget = budget
        self.memo: list[int] = [0]
        self.membership_cache: dict[int, Membership] = {}

    def sexpr(self):
        return ("ev", self.m0.sexpr(), tuple((n, q.sexpr()) for n, q in self.seeds.items()))

    @classmethod
    def from_sexpr(cls, x) -> "DiagonalEvaluator":
        _, m0, rows = x
        seeds = {}
        for n, (_, m1, m2, p1, p2) in rows:
            seeds[n] = Quadruplet(
                tm.machine_from_sexpr(m1), tm.machine_from_sexpr(m2),
                theory.proof_from_sexpr(p1), theory.proof_from_sexpr(p2),
            )
        return cls(tm.machine_from_sexpr(m0), seeds)

    def lookup(self, n: int) -> Quadruplet | None:
        if n in self.seeds:
            return self.seeds[n]
        return t_decode(n)


def check_membership(q: Quadruplet | None, m0: Machine) -> Membership:
    if q is None:
        return Membership(False, {"code": "non-code"})
    failures = {}
    s1 = q.p1.subject
    if not (isinstance(s1, TimeBound) and s1.machine == q.m1):
        failures["p1"] = "subject-mismatch"
    else:
        v = theory.check_proof(s1, q.p1)
        if not v:
            failures["p1"] = v.reason
    s2 = q.p2.subject
    if s2 != PointwiseEqual(q.m1, q.m2, m0):
        failures["p2"] = "subject-mismatch"
    else:
        v = theory.check_proof(s2, q.p2)
        if not v:
            failures["p2"] = v.reason
    return Membership(not failures, failures)


def membership(n: int, ev: DiagonalEvaluator) -> Membership:
    cached = ev.membership_cache.get(n)
    if cached is None:
        cached = ev.membership_cache[n] = check_membership(ev.lookup(n), ev.m0)
    return cached


def h_membership(n: int, ev: DiagonalEvaluator) -> bool:
    return membership(n, ev).member


def m2_value(q: Quadruplet, n: int, budget: int | None = None) -> int:
    """Value of M2 on n: the length of its output on the numeral of n."""
    try:
        out = tm.run_total(q.m2, tm.num_bits(n), budget)
    except tm.BudgetExceeded as exc:
        raise DiagonalError(f"M2 of member {n} exceeded the safety budget") from exc
    return len(out.output)


def t_m0_eval(n: int, ev: DiagonalEvaluator) -> int:
    if n < 0:
        raise ValueError("negative argument")
    memo = ev.memo
    while len(memo) <= n:
        i = len(memo)
        value = memo[-1] + 1
        if h_membership(i, ev):
            value = max(value, 1 + m2_value(ev.lookup(i), i, ev.budget))
        memo.append(value)
    return memo[n]


def f_eval(n: int, ev: DiagonalEvaluator) -> int:
    return tm.decide(ev.m0, "0" * t_m0_eval(n, ev), ev.budget)


# -- machines over the evaluator ---------------------------------------------------------

def _evaluator(x) -> DiagonalEvaluator:
    return DiagonalEvaluator.from_sexpr(x)


@register("tm0")
class DiagonalWrapper(Composite):
    """Outputs ``"0" * T_M0(num(s))``; the value convention of M2 machines."""

    def __init__(self, ev: DiagonalEvaluator):
        self.ev = ev

    def sexpr(self):
        return ("tm0", self.ev.sexpr())

    @classmethod
    def from_sexpr(cls, x):
        return cls(_evaluator(x[1]))

    def initial(self, s):
        return ("count", t_m0_eval(tm.string_num(s), self.ev), 0)

    def advance(self, cfg):
        _, t, i = cfg
        if i == t:
            return ("halt", "0" * t)
        return ("count", t, i + 1)


@register("U")
class SwitchedDecider(Composite):
    """U(n) = T_L0(n) when f(n) = 1, else 1 - T_L0(n)."""

    def __init__(self, t_l0: Machine, ev: DiagonalEvaluator):
        self.t_l0, self.ev = t_l0, ev

    def sexpr(self):
        return ("U", self.t_l0.sexpr(), self.ev.sexpr())

    @classmethod
    def from_sexpr(cls, x):
        return cls(tm.machine_from_sexpr(x[1]), _evaluator(x[2]))

    def initial(self, s):
        t = t_m0_eval(tm.string_num(s), self.ev)
        return ("f", s, self.ev.m0.initial("0" * t))

    def advance(self, cfg):
        if cfg[0] == "f":
            _, s, c = cfg
            if self.ev.m0.is_halted(c):
                return ("l0", self.ev.m0.output(c) == "1", self.t_l0.initial(s))
            return ("f", s, self.ev.m0.advance(c))
        _, keep, c = cfg
        if self.t_l0.is_halted(c):
            bit = self.t_l0.output(c)
            return ("halt", bit if keep else {"0": "1", "1": "0"}.get(bit, bit))
        return ("l0", keep, self.t_l0.advance(c))


@register("cmp")
class Comparator(Composite):
    """1 iff ``t_m`` and ``t_l0`` give the same output."""

    def __init__(self, t_m: Machine, t_l0: Machine):
        self.t_m, self.t_l0 = t_m, t_l0

    def sexpr(self):
        return ("cmp", self.t_m.sexpr(), self.t_l0.sexpr())

    @classmethod
    def from_sexpr(cls, x):
        return cls(tm.machine_from_sexpr(x[1]), tm.machine_from_sexpr(x[2]))

    def initial(self, s):
        return ("a", s, self.t_m.initial(s))

    def advance(self, cfg):
        if cfg[0] == "a":
            _, s, c = cfg
            if self.t_m.is_halted(c):
                return ("b", self.t_m.output(c), self.t_l0.initial(s))
            return ("a", s, self.t_m.advance(c))
        _, first, c = cfg
        if self.t_l0.is_halted(c):
            return ("halt", "1" if self.t_l0.output(c) == first else "0")
        return ("b", first, self.t_l0.advance(c))


def build_theorem2_switch(t_l0: Machine, ev: DiagonalEvaluator) -> SwitchedDecider:
    return SwitchedDecider(t_l0, ev)


def build_comparator(t_m: Machine, t_l0: Machine) -> Comparator:
    return Comparator(t_m, t_l0)


@register("not")
class Complement(Composite):
    """Flip the bit produced by ``inner``."""

    def __init__(self, inner: Machine):
        self.inner = inner

    def sexpr(self):
        return ("not", self.inner.sexpr())

    @classmethod
    def from_sexpr(cls, x):
        return cls(tm.machine_from_sexpr(x[1]))

    def initial(self, s):
        return ("run", self.inner.initial(s))

    def advance(self, cfg):
        c = cfg[1]
        if self.inner.is_halted(c):
            return ("halt", {"0": "1", "1": "0"}.get(self.inner.output(c), ""))
        return ("run", self.inner.advance(c))


# -- the self-reference check -----------------------------------------------------------------

@dataclass(frozen=True)
class RejectionReport:
    code: int
    failures: dict
    arithmetic_contradiction: bool

    def describe(self) -> str:
        names = ", ".join(f"{k} ({v})" for k, v in self.failures.items())
        return f"rejected code-bits={self.code.bit_length()} failing={names} contradiction-check={'ok' if self.arithmetic_contradiction else 'FAILED'}"


def reject_self_reference(candidate: Quadruplet, ev: DiagonalEvaluator, probe: int = 50) -> RejectionReport:
    """Confirm that a quadruplet whose M2 is the T_M0 wrapper is not in L_M0.

    Also checks the arithmetic that makes membership impossible: accepting
    such an n would force T(n) >= 1 + T(n) for the wrapper's own value.
    """
    if not isinstance(candidate.m2, DiagonalWrapper):
        raise ValueError("candidate m2 must be the diagonal wrapper")
    code = pack(candidate)
    result = check_membership(candidate, ev.m0)
    if result.member:
        raise SoundnessError(f"self-referential quadruplet {code} accepted")
    arithmetic = all(1 + t_m0_eval(n, ev) > t_m0_eval(n, ev) for n in range(probe + 1))
    return RejectionReport(code, dict(result.failures), arithmetic)


def self_reference_forgeries(ev: DiagonalEvaluator) -> list[tuple[str, Quadruplet]]:
    """Five attempts to smuggle the wrapper into L_M0."""
    from indeplab.combinators import Const, Library

    m0 = ev.m0
    wrapper = DiagonalWrapper(ev)
    m1 = Compose(m0, wrapper)
    honest = make_quadruplet(m0, Library("echo"))
    fake_bound = Proof(TimeBound(m1, 2, 1, 2), theory.TimeBoundCertificate(honest.p1.certificate.derivation))
    valid_p1_machine = Const("0")
    valid_p1 = theory.certify_time_bound(valid_p1_machine)
    stmt = PointwiseEqual(m1, wrapper, m0)
    return [
        ("fabricated-p2", Quadruplet(m1, wrapper, fake_bound, Proof(stmt, theory.EqualityCertificate(("fabricated",))))),
        ("subject-mismatch", Quadruplet(valid_p1_machine, wrapper, valid_p1, honest.p2)),
        ("borrowed-totality", Quadruplet(m1, wrapper, fake_bound, Proof(stmt, honest.p2.certificate))),
        ("wrong-kind", Quadruplet(m1, wrapper, fake_bound, Proof(stmt, theory.CycleCertificate(0, 1)))),
        ("unchecked-claim", Quadruplet(valid_p1_machine, wrapper, valid_p1,
                                       Proof(PointwiseEqual(valid_p1_machine, wrapper, m0), theory.EqualityCertificate(())))),
    ]
