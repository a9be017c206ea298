"""Invariant suites behind ``indeplab verify``.

Each suite returns an ordered mapping ``property -> [passed, total]``.
"""

from __future__ import annotations

import random
from collections import OrderedDict

from indeplab import combinators as cb
from indeplab import constructions as c
from indeplab import diagonal as d
from indeplab import theory as th
from indeplab import tm

HALT_STEPS = (0, 1, 3, 5, 17)
DECIDERS = ("parity", "leading", "popcount-parity", "even-length", "palindrome")


class Tally(OrderedDict):
    def check(self, name: str, ok: bool) -> None:
        row = self.setdefault(name, [0, 0])
        row[0] += bool(ok)
        row[1] += 1

    @property
    def ok(self) -> bool:
        return all(p == t for p, t in self.values())


def threshold_pairs(seed: int = 0, count: int = 10) -> list[tuple[tm.Machine, str, int | None]]:
    """(machine, w, halt step or None) pairs covering every step in HALT_STEPS
    and both kinds of non-halting machine."""
    rng = random.Random(seed)
    pairs: list[tuple[tm.Machine, str, int | None]] = [(c.self_loop(), "", None), (c.ping_pong(), "1", None)]
    pairs += [(c.halts_at(k), "", k) for k in HALT_STEPS]
    while len(pairs) < count:
        k = rng.choice(HALT_STEPS)
        w = "".join(rng.choice("01") for _ in range(rng.randint(0, 4)))
        pairs.append((c.halts_at(k), w, k))
    return pairs


def threshold(max_len: int = 8, seed: int = 0, bound_len: int = 64) -> Tally:
    t = Tally()
    for m, w, halt in threshold_pairs(seed):
        o = c.build_O(m, w)
        outs = {s: tm.decide(o, s) for s in tm.strings_up_to(max_len)}
        by_len = {}
        for s, v in outs.items():
            by_len.setdefault(len(s), set()).add(v)
        t.check("length-determinism", all(len(v) == 1 for v in by_len.values()))
        bits = [by_len[n].pop() for n in range(max_len + 1)]
        t.check("monotone", all(not (bits[j] and not bits[i]) for i in range(len(bits)) for j in range(i, len(bits))))
        expected = [1 if halt is None or n < halt else 0 for n in range(max_len + 1)]
        t.check("threshold-rule", bits == expected)
        prof = c.threshold_profile(o, max_len)
        if halt is None or halt > max_len:
            t.check("profile", prof == c.ThresholdProfile("AllOnes"))
        else:
            t.check("profile", prof == c.ThresholdProfile("StepThreshold", halt))
        proof = th.certify_time_bound(o)
        t.check("certificate", proof is not None and th.check_proof(proof.subject, proof).accepted)
        st = proof.subject
        t.check(
            "steps-within-bound",
            all(tm.run_total(o, "0" * n).steps <= st.a * n ** st.k + st.b for n in range(bound_len + 1)),
        )
    return t


def random_patch(rng: random.Random, max_m: int = 4):
    base = cb.Library(rng.choice(DECIDERS))
    m = rng.randint(0, max_m)
    table = {s: rng.choice("01") for s in tm.strings_up_to(m - 1)} if m else {}
    return base, table, m


def patches(max_len: int = 8, seed: int = 0, patches: int = 100, triples: int = 50) -> Tally:
    rng = random.Random(seed)
    t = Tally()
    for _ in range(patches):
        base, table, m = random_patch(rng)
        view = c.LanguageView(base)
        patched = c.patch_language(view, table, m)
        t.check(
            "patch-extension",
            all(patched.bit(s) == (int(table[s]) if len(s) < m else view.bit(s)) for s in tm.strings_up_to(max_len)),
        )
        verdict = c.almost_equal(patched, view, max_len)
        t.check("equal-beyond-m", isinstance(verdict, c.EqualBeyond) and verdict.m <= m)
        bb, pb = cb.bound_of(base), cb.bound_of(patched.decider)
        extra = cb.padd(pb.time, tuple(-x for x in bb.time))
        t.check("constant-overhead", all(x == 0 for x in extra[1:]))
    views = []
    for _ in range(triples * 3):
        base, table, m = random_patch(rng)
        views.append(c.patch_language(c.LanguageView(base), table, m))

    def eq(a, b):
        return isinstance(c.almost_equal(a, b, max_len), c.EqualBeyond)

    for i in range(triples):
        a, b, x = views[3 * i: 3 * i + 3]
        t.check("reflexive", eq(a, a))
        t.check("symmetric", eq(a, b) == eq(b, a))
        t.check("transitive", not (eq(a, b) and eq(b, x)) or eq(a, x))
    return t


def switches(max_len: int = 8) -> Tally:
    t = Tally()
    m_h, w_h = c.build_fixed_point()
    for name in DECIDERS:
        m1 = cb.Library(name)
        q = c.build_Q(m_h, m1, w_h)
        o = c.build_O(m_h, w_h)
        t.check(
            "hand-composed",
            all(tm.decide(q, s) == (1 if tm.decide(o, s) else tm.decide(m1, s)) for s in tm.strings_up_to(max_len)),
        )
        q5 = c.build_Q(c.halts_at(5), m1, "")
        verdict = c.almost_equal(c.LanguageView(q5), c.LanguageView(m1), max_len)
        t.check("threshold-5-equal", isinstance(verdict, c.EqualBeyond) and verdict.m <= 5)
    return t


def seeded_evaluator(m0, values: dict[int, int]) -> d.DiagonalEvaluator:
    seeds = {n: d.make_quadruplet(m0, cb.Const("0" * v)) for n, v in values.items()}
    return d.DiagonalEvaluator(m0, seeds)


def brute_t(n: int, ev: d.DiagonalEvaluator) -> int:
    """Unmemoised recurrence, for cross-checking."""
    value = 0
    for i in range(1, n + 1):
        value += 1
        if d.h_membership(i, ev):
            value = max(value, 1 + d.m2_value(ev.lookup(i), i, ev.budget))
    return value


def diagonal(limit: int = 200, seed: int = 0) -> Tally:
    rng = random.Random(seed)
    t = Tally()
    m0 = c.build_O(c.halts_at(5), "")
    plain = d.DiagonalEvaluator(m0)
    values = {rng.randint(1, limit): rng.randint(0, 3 * limit) for _ in range(3)}
    seeded = seeded_evaluator(m0, values)
    for ev in (plain, seeded):
        memo = [d.t_m0_eval(n, ev) for n in range(limit + 1)]
        t.check("strictly-increasing", all(a < b for a, b in zip(memo, memo[1:])))
        t.check("memo-equals-brute", memo == [brute_t(n, ev) for n in range(limit + 1)])
        f = [d.f_eval(n, ev) for n in range(limit + 1)]
        t.check("f-bits", set(f) <= {0, 1})
        t.check("f-monotone", f == sorted(f, reverse=True))
    t.check("no-code-identity", [d.t_m0_eval(n, plain) for n in range(limit + 1)] == list(range(limit + 1)))
    for name, q in d.self_reference_forgeries(plain):
        report = d.reject_self_reference(q, plain)
        t.check("forgery-rejected", bool(report.failures) and report.arithmetic_contradiction)
    return t


def flipping(limit: int = 200) -> Tally:
    t = Tally()
    ev = d.DiagonalEvaluator(c.build_O(c.halts_at(5), ""))
    f = [d.f_eval(n, ev) for n in range(limit + 1)]
    for name in ("parity", "popcount-parity", "palindrome"):
        t_l0 = cb.Library(name)
        u = d.build_theorem2_switch(t_l0, ev)
        cmp_ = d.build_comparator(u, t_l0)
        for n in range(limit + 1):
            s = tm.num_bits(n)
            base = tm.decide(t_l0, s)
            t.check("switch-iff", (tm.decide(u, s) == base) == (f[n] == 1))
            t.check("comparator-is-f", tm.decide(cmp_, s) == f[n])
    return t


def random_quadruplet(rng: random.Random, m0: tm.Machine) -> d.Quadruplet:
    def gen(depth):
        roll = rng.randrange(5 if depth else 3)
        if roll == 0:
            return cb.Library(rng.choice(("echo",) + DECIDERS))
        if roll == 1:
            return cb.Const("".join(rng.choice("01") for _ in range(rng.randint(0, 6))))
        if roll == 2:
            return c.build_O(c.halts_at(rng.randint(0, 6)), "")
        if roll == 3:
            base, table, m = random_patch(rng, 2)
            return cb.Patch(base, table, m)
        return cb.Compose(gen(depth - 1), gen(depth - 1))

    return d.make_quadruplet(m0, gen(2))


def encoding(samples: int = 500, seed: int = 0) -> Tally:
    rng = random.Random(seed)
    t = Tally()
    m0 = c.build_O(c.halts_at(5), "")
    for _ in range(samples):
        q = random_quadruplet(rng, m0)
        n = d.t_encode(q)
        t.check("round-trip", d.t_decode(n) == q and d.t_encode(d.t_decode(n)) == n)
    t.check("zero-non-code", d.t_decode(0) is None)
    for _ in range(samples):
        n = rng.randrange(10**6)
        q = d.t_decode(n)
        t.check("small-naturals", q is None or d.pack(q) == n)
    return t


def theory(count: int = 1000) -> Tally:
    t = Tally()
    seen: dict[tuple, str] = {}
    for k, proof in th.theorems():
        if k >= count:
            break
        st, cert = proof.subject, proof.certificate
        t.check("checks", th.check_proof(st, proof).accepted)
        if isinstance(st, th.Halts):
            out = tm.run_bounded(st.machine, st.w, cert.steps)
            t.check("halts-at-step", out.halted and out.steps == cert.steps)
            kind = "halts"
        else:
            span = cert.prefix + cert.cycle
            t.check("refutation-runs-out", not tm.run_bounded(st.machine, st.w, 10 * span).halted)
            kind = "not-halts"
        key = (st.machine, st.w)
        t.check("consistent", seen.setdefault(key, kind) == kind)
    return t


SUITES = {
    "threshold": threshold,
    "patches": patches,
    "switches": switches,
    "diagonal": diagonal,
    "flipping": flipping,
    "encoding": encoding,
    "theory": theory,
}

# Older spellings still accepted on the command line.
ALIASES = {"lemma2": "threshold", "lemma4": "patches"}
