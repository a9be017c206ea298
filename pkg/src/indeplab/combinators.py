"""Composite machines and their structural time-bound derivations.

Every composite here is a :class:`~indeplab.tm.Machine` whose configuration
is a plain tuple, so nested simulations stay hashable and comparable.  Halted
configurations are always ``("halt", output)``.

A *bound* is a pair of polynomials with non-negative integer coefficients
(lowest degree first): the step count and the output length, both as
functions of the input length.  :func:`derive` computes the derivation tree
for a machine purely from how it was assembled; a machine containing any
uncertified part (a raw table, an exponential library routine, a searcher)
gets ``None``.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

from indeplab import tm
from indeplab.tm import Machine, check_bits, register

Poly = tuple


# -- polynomial arithmetic ---------------------------------------------------

def _trim(p) -> Poly:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return tuple(p) if p else (0,)


def padd(*ps) -> Poly:
    n = max(len(p) for p in ps)
    return _trim(sum(p[i] for p in ps if i < len(p)) for i in range(n))


def pmax(p, q) -> Poly:
    """Coefficient-wise max; dominates both arguments for n >= 0."""
    n = max(len(p), len(q))
    return _trim(max(p[i] if i < len(p) else 0, q[i] if i < len(q) else 0) for i in range(n))


def pmul(p, q) -> Poly:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return _trim(out)


def pcompose(p, q) -> Poly:
    """p(q(n))."""
    out: Poly = (0,)
    power: Poly = (1,)
    for c in p:
        out = padd(out, pmul((c,), power))
        power = pmul(power, q)
    return out


def peval(p, n: int) -> int:
    value = 0
    for c in reversed(p):
        value = value * n + c
    return value


def dominating_monomial(p) -> tuple[int, int, int]:
    """Smallest ``(a, k, b)`` with ``p(n) <= a*n**k + b`` for all n >= 0."""
    p = _trim(p)
    return sum(p[1:]), len(p) - 1, p[0]


def dominated(p, a: int, k: int, b: int) -> bool:
    a0, k0, b0 = dominating_monomial(p)
    return k0 <= k and a0 <= a and b0 <= b


class Bound(NamedTuple):
    time: Poly
    outlen: Poly


# -- composite base ------------------------------------------------------------

class Composite(Machine):
    def is_halted(self, cfg) -> bool:
        return cfg[0] == "halt"

    def output(self, cfg) -> str:
        return cfg[1]

    def bound(self) -> Bound | None:
        """Bound of this node given its children's bounds, or None."""
        return None

    def children(self) -> tuple[Machine, ...]:
        return ()


def _parse_child(x) -> Machine:
    return tm.machine_from_sexpr(x)


@register("const")
class Const(Composite):
    """Write a fixed string, ignoring the input."""

    def __init__(self, bits: str):
        self.bits = check_bits(bits)

    def sexpr(self):
        return ("const", self.bits)

    @classmethod
    def from_sexpr(cls, x):
        _, bits = x
        return cls(bits)

    def initial(self, s):
        check_bits(s)
        return ("w", 0)

    def advance(self, cfg):
        i = cfg[1]
        return ("halt", self.bits) if i == len(self.bits) else ("w", i + 1)

    def bound(self):
        return Bound((len(self.bits) + 1,), (len(self.bits),))


class LibraryRoutine(NamedTuple):
    fn: Callable[[str], str]
    cost: Callable[[str], int]
    bound: Bound | None


def _leading(s: str) -> str:
    return s[:1] or "0"


LIBRARY: dict[str, LibraryRoutine] = {
    "echo": LibraryRoutine(lambda s: s, lambda s: len(s) + 1, Bound((1, 1), (0, 1))),
    "parity": LibraryRoutine(lambda s: s[-1:] or "0", lambda s: len(s) + 1, Bound((1, 1), (1,))),
    "leading": LibraryRoutine(_leading, lambda s: 2, Bound((2,), (1,))),
    "popcount-parity": LibraryRoutine(
        lambda s: str(s.count("1") % 2), lambda s: len(s) + 1, Bound((1, 1), (1,))
    ),
    "even-length": LibraryRoutine(
        lambda s: "1" if len(s) % 2 == 0 else "0", lambda s: len(s) + 1, Bound((1, 1), (1,))
    ),
    "palindrome": LibraryRoutine(
        lambda s: "1" if s == s[::-1] else "0", lambda s: len(s) * len(s) + 1, Bound((1, 0, 1), (1,))
    ),
    # Re-index strings as naturals: the shortlex rank of s, as a numeral.
    "rank-numeral": LibraryRoutine(
        lambda s: tm.num_bits(tm.shortlex_rank(s)), lambda s: len(s) + 1, Bound((1, 1), (1, 1))
    ),
    # Deliberately exponential; carries no certificate.
    "slow-parity": LibraryRoutine(lambda s: s[-1:] or "0", lambda s: 2 ** len(s), None),
    "unary": LibraryRoutine(lambda s: "0" * tm.string_num(s), lambda s: tm.string_num(s) + 1, None),
}


@register("lib")
class Library(Composite):
    """A named routine whose cost is charged one step at a time."""

    def __init__(self, name: str):
        if name not in LIBRARY:
            raise ValueError(f"unknown library routine {name!r}")
        self.name = name
        self._routine = LIBRARY[name]

    def sexpr(self):
        return ("lib", self.name)

    @classmethod
    def from_sexpr(cls, x):
        _, name = x
        return cls(name)

    def initial(self, s):
        return ("run", check_bits(s), 0)

    def advance(self, cfg):
        _, s, i = cfg
        if i + 1 >= self._routine.cost(s):
            return ("halt", self._routine.fn(s))
        return ("run", s, i + 1)

    def bound(self):
        return self._routine.bound


@register("O")
class Threshold(Composite):
    """On input s: simulate ``inner`` on ``w`` for ``len(s)`` steps.

    Outputs "0" if the simulation halted within ``len(s)`` steps, else "1".
    The scan of ``s`` costs ``len(s) + 1`` steps and the simulation at most
    ``len(s) + 1``, so the run takes at most ``2*len(s) + 2`` steps whatever
    ``inner`` is.
    """

    def __init__(self, inner: Machine, w: str):
        self.inner = inner
        self.w = check_bits(w)

    def sexpr(self):
        return ("O", self.inner.sexpr(), self.w)

    @classmethod
    def from_sexpr(cls, x):
        _, inner, w = x
        return cls(_parse_child(inner), w)

    def initial(self, s):
        return ("scan", check_bits(s), 0)

    def advance(self, cfg):
        if cfg[0] == "scan":
            _, s, i = cfg
            if i < len(s):
                return ("scan", s, i + 1)
            return ("sim", len(s), 0, self.inner.initial(self.w))
        _, n, k, c = cfg
        if self.inner.is_halted(c):
            return ("halt", "0")
        if k == n:
            return ("halt", "1")
        return ("sim", n, k + 1, self.inner.advance(c))

    def bound(self):
        return Bound((2, 2), (1,))


@register("Q")
class Switch(Composite):
    """Answer 1 while ``O<m1, w>`` says 1; otherwise defer to ``m2``."""

    def __init__(self, m1: Machine, m2: Machine, w: str):
        self.m1, self.m2, self.w = m1, m2, check_bits(w)
        self.threshold = Threshold(m1, w)

    def sexpr(self):
        return ("Q", self.m1.sexpr(), self.m2.sexpr(), self.w)

    @classmethod
    def from_sexpr(cls, x):
        _, m1, m2, w = x
        return cls(_parse_child(m1), _parse_child(m2), w)

    def children(self):
        return (self.threshold, self.m2)

    def initial(self, s):
        return ("o", s, self.threshold.initial(s))

    def advance(self, cfg):
        if cfg[0] == "o":
            _, s, c = cfg
            o = self.threshold
            if o.is_halted(c):
                return ("halt", "1") if o.output(c) == "1" else ("m2", self.m2.initial(s))
            return ("o", s, o.advance(c))
        c = cfg[1]
        if self.m2.is_halted(c):
            return ("halt", self.m2.output(c))
        return ("m2", self.m2.advance(c))

    def bound_from(self, o: Bound, m2: Bound) -> Bound:
        return Bound(padd(o.time, m2.time, (2,)), pmax(m2.outlen, (1,)))


@register("patch")
class Patch(Composite):
    """Table lookup below length ``m``, ``base`` at or above it."""

    def __init__(self, base: Machine, table: dict[str, str], m: int):
        expected = set(tm.strings_up_to(m - 1)) if m > 0 else set()
        if set(table) != expected:
            raise ValueError(f"table must cover exactly the strings shorter than {m}")
        if any(v not in ("0", "1") for v in table.values()):
            raise ValueError("table values must be bits")
        self.base, self.m = base, m
        self.table = dict(sorted(table.items(), key=lambda kv: tm.shortlex_rank(kv[0])))

    def sexpr(self):
        return ("patch", self.base.sexpr(), tuple(self.table.items()), self.m)

    @classmethod
    def from_sexpr(cls, x):
        _, base, rows, m = x
        return cls(_parse_child(base), dict(rows), m)

    def children(self):
        return (self.base,)

    def initial(self, s):
        return ("look", check_bits(s), 0)

    def advance(self, cfg):
        if cfg[0] == "look":
            _, s, i = cfg
            if i < min(len(s), self.m):
                return ("look", s, i + 1)
            if len(s) < self.m:
                return ("halt", self.table[s])
            return ("base", self.base.initial(s))
        c = cfg[1]
        if self.base.is_halted(c):
            return ("halt", self.base.output(c))
        return ("base", self.base.advance(c))

    def bound_from(self, base: Bound) -> Bound:
        return Bound(padd(base.time, (self.m + 2,)), pmax(base.outlen, (1,)))


@register("compose")
class Compose(Composite):
    """Run ``inner`` on s, then ``outer`` on inner's output."""

    def __init__(self, outer: Machine, inner: Machine):
        self.outer, self.inner = outer, inner

    def sexpr(self):
        return ("compose", self.outer.sexpr(), self.inner.sexpr())

    @classmethod
    def from_sexpr(cls, x):
        _, outer, inner = x
        return cls(_parse_child(outer), _parse_child(inner))

    def children(self):
        return (self.outer, self.inner)

    def initial(self, s):
        return ("in", self.inner.initial(s))

    def advance(self, cfg):
        if cfg[0] == "in":
            c = cfg[1]
            if self.inner.is_halted(c):
                return ("out", self.outer.initial(self.inner.output(c)))
            return ("in", self.inner.advance(c))
        c = cfg[1]
        if self.outer.is_halted(c):
            return ("halt", self.outer.output(c))
        return ("out", self.outer.advance(c))

    def bound_from(self, outer: Bound, inner: Bound) -> Bound:
        return Bound(
            padd(inner.time, pcompose(outer.time, inner.outlen), (2,)),
            pcompose(outer.outlen, inner.outlen),
        )


# -- derivations ----------------------------------------------------------------

def derive(m: Machine):
    """Derivation tree ``(tag, time, outlen, children)`` or None."""
    if not isinstance(m, Composite):
        return None
    subs = []
    for child in m.children():
        d = derive(child)
        if d is None:
            return None
        subs.append(d)
    if subs:
        b = m.bound_from(*(Bound(d[1], d[2]) for d in subs))
    else:
        b = m.bound()
        if b is None:
            return None
    return (m.sexpr()[0], tuple(b.time), tuple(b.outlen), tuple(subs))


def bound_of(m: Machine) -> Bound | None:
    d = derive(m)
    return None if d is None else Bound(d[1], d[2])
