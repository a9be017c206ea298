"""Acceptance criteria, one test each.

Every test records a single ``PASS``/``FAIL`` line, printed in the terminal
summary (and immediately when run with ``-s``).
"""

import random

import pytest

import conftest
from indeplab import combinators as cb
from indeplab import constructions as c
from indeplab import diagonal as d
from indeplab import theory as th
from indeplab import tm

from oracles import simulate, t_m0_brute

# Plain-Python references for the library deciders.
REFERENCE = {
    "parity": lambda s: int(s[-1:] == "1"),
    "leading": lambda s: int(s[:1] == "1"),
    "popcount-parity": lambda s: s.count("1") % 2,
    "even-length": lambda s: int(len(s) % 2 == 0),
    "palindrome": lambda s: int(s == s[::-1]),
}


def all_strings(max_len):
    out = [""]
    for n in range(1, max_len + 1):
        out += [format(i, f"0{n}b") for i in range(2 ** n)]
    return out


def numeral(n):
    return bin(n)[2:] if n else ""


def oracle_run(m, w, budget):
    return simulate(m.delta, m.start, m.halt, w, budget)


@pytest.fixture
def report():
    lines = []

    def record(number, title, violations, detail=""):
        status = "PASS" if not violations else "FAIL"
        line = f"{status} criterion {number}: {title}" + (f" [{detail}]" if detail else "")
        if violations:
            line += f" violations={violations[:3]}"
        print(line)
        lines.append(line)
        conftest.ACCEPTANCE_LINES.append(line)
        assert not violations, line

    return record


# 1 ------------------------------------------------------------------------------

def threshold_pairs():
    pairs = [(c.self_loop(), ""), (c.ping_pong(), "01")]
    pairs += [(c.halts_at(k), w) for k, w in [(0, ""), (1, "1"), (3, ""), (5, "10"), (17, ""), (3, "0110"), (5, ""), (1, "")]]
    return pairs


def test_criterion_1_threshold_machines(report):
    violations = []
    pairs = threshold_pairs()
    halt_steps = set()
    for m, w in pairs:
        halted, steps, _ = oracle_run(m, w, 1000)
        halt = steps if halted else None
        halt_steps.add(halt)
        o = c.build_O(m, w)
        outs = {s: tm.decide(o, s) for s in all_strings(8)}
        for s, v in outs.items():
            expected = 1 if halt is None or len(s) < halt else 0
            if v != expected:
                violations.append(("threshold", m.name, w, s))
            if outs["0" * len(s)] != v:
                violations.append(("length-determinism", m.name, s))
        by_len = [outs["0" * n] for n in range(9)]
        if any(by_len[j] > by_len[i] for i in range(9) for j in range(i, 9)):
            violations.append(("monotone", m.name))
        proof = th.certify_time_bound(o)
        st = proof.subject
        if not th.check_proof(st, proof).accepted or st.k != 1:
            violations.append(("certificate", m.name))
        for n in range(65):
            if tm.run_total(o, "0" * n).steps > st.a * n + st.b:
                violations.append(("steps", m.name, n))
    assert halt_steps == {None, 0, 1, 3, 5, 17}
    report(1, "threshold machine items over 10 pairs", violations, f"{len(pairs)} pairs")


# 2 ------------------------------------------------------------------------------

def test_criterion_2_racer(report):
    violations = []
    for m, w in [(c.halt_only(), ""), (c.halts_at(1), ""), (c.halts_at(3), "1"), (c.halts_at(17), ""), (c.move_right(), "101")]:
        _, steps, _ = oracle_run(m, w, 1000)
        for _ in range(2):
            v = c.race(m, w, 1000)
            if (v.kind, v.value) != ("Accept", steps):
                violations.append(("accept", m.name, w, v))
    count = 0
    for k, p in th.theorems():
        if count == 8:
            break
        st = p.subject
        if not isinstance(st, th.NotHalts):
            continue
        first = next(j for j, q in th.theorems() if q.subject == st)
        for _ in range(2):
            v = c.race(st.machine, st.w, 10 ** 4)
            if (v.kind, v.value) != ("Reject", first):
                violations.append(("reject", k, v))
        count += 1
    m_h, w_h = c.build_fixed_point()
    runs = [c.race(m_h, w_h, 10 ** 5) for _ in range(2)]
    if any(v != c.RacerVerdict("StillRunning", 10 ** 5, 10 ** 5) for v in runs):
        violations.append(("fixed-point", runs))
    if th.find_nonhalting_proof(m_h, w_h, 10 ** 5) is not None:
        violations.append("fixed-point refutation found")
    if tm.run_bounded(m_h, w_h, 10 ** 5).halted:
        violations.append("fixed-point halted")
    report(2, "racer accept/reject/still-running", violations)


# 3 ------------------------------------------------------------------------------

def random_patch(rng):
    name = rng.choice(sorted(REFERENCE))
    m = rng.randint(0, 4)
    table = {s: rng.choice("01") for s in all_strings(m - 1)} if m else {}
    return name, table, m


def patched_ref(name, table, m):
    return lambda s: int(table[s]) if len(s) < m else REFERENCE[name](s)


def test_criterion_3_patches_and_almost_equality(report):
    rng = random.Random(3)
    violations = []
    strings = all_strings(8)
    for i in range(100):
        name, table, m = random_patch(rng)
        base = c.LanguageView(cb.Library(name))
        view = c.patch_language(base, table, m)
        ref = patched_ref(name, table, m)
        if any(view.bit(s) != ref(s) for s in strings):
            violations.append(("extension", i))
        verdict = c.almost_equal(view, base, 8)
        if not (isinstance(verdict, c.EqualBeyond) and verdict.m <= m):
            violations.append(("equal-beyond", i, verdict))
    views = []
    for _ in range(150):
        name, table, m = random_patch(rng)
        views.append(c.patch_language(c.LanguageView(cb.Library(name)), table, m))

    def eq(a, b):
        return isinstance(c.almost_equal(a, b, 8), c.EqualBeyond)

    for i in range(50):
        a, b, x = views[3 * i: 3 * i + 3]
        if not eq(a, a):
            violations.append(("reflexive", i))
        if eq(a, b) != eq(b, a):
            violations.append(("symmetric", i))
        if eq(a, b) and eq(b, x) and not eq(a, x):
            violations.append(("transitive", i))
    report(3, "100 patches and 50 equivalence triples", violations)


# 4 ------------------------------------------------------------------------------

def test_criterion_4_switch_composition(report):
    violations = []
    m_h, w_h = c.build_fixed_point()
    strings = all_strings(8)
    for name in sorted(REFERENCE):
        m1 = cb.Library(name)
        q = c.build_Q(m_h, m1, w_h)
        for s in strings:
            o_bit = 0 if tm.run_bounded(m_h, w_h, len(s)).halted else 1
            expected = 1 if o_bit else REFERENCE[name](s)
            if tm.decide(q, s) != expected:
                violations.append(("compose", name, s))
        q5 = c.build_Q(c.halts_at(5), m1, "")
        expected = max((len(s) + 1 for s in strings if len(s) < 5 and REFERENCE[name](s) == 0), default=0)
        verdict = c.almost_equal(c.LanguageView(q5), c.LanguageView(m1), 8)
        if verdict != c.EqualBeyond(expected) or expected > 5:
            violations.append(("threshold-5", name, verdict))
    report(4, "switch composition with 5 deciders", violations)


# 5 ------------------------------------------------------------------------------

def test_criterion_5_diagonal_function(report):
    violations = []
    m0 = c.build_O(c.halts_at(5), "")
    plain = d.DiagonalEvaluator(m0)
    memo = [d.t_m0_eval(n, plain) for n in range(201)]
    if memo != list(range(201)):
        violations.append("no-code identity")
    m2s = {17: cb.Const("0" * 60), 90: cb.Library("echo"), 150: cb.Compose(cb.Library("echo"), cb.Const("1" * 400))}
    value = {17: lambda n: 60, 90: lambda n: len(numeral(n)), 150: lambda n: 400}
    seeded = d.DiagonalEvaluator(m0, {n: d.make_quadruplet(m0, m2) for n, m2 in m2s.items()})
    memo2 = [d.t_m0_eval(n, seeded) for n in range(201)]
    brute = [t_m0_brute(n, m2s.__contains__, lambda k: value[k](k)) for n in range(201)]
    if memo2 != brute:
        violations.append("memo vs brute")
    for name, seq in (("plain", memo), ("seeded", memo2)):
        violations += [(name, n) for n in range(1, 201) if not seq[n - 1] < seq[n]]
    if memo2[17] != 61 or memo2[150] != 401:
        violations.append(("jumps", memo2[17], memo2[150]))
    report(5, "diagonal function monotone and matches brute force", violations)


# 6 ------------------------------------------------------------------------------

def test_criterion_6_self_reference_rejected(report):
    violations = []
    m0 = c.build_O(c.halts_at(5), "")
    ev = d.DiagonalEvaluator(m0, {12: d.make_quadruplet(m0, cb.Const("0" * 30))})
    forgeries = d.self_reference_forgeries(ev)
    if len(forgeries) != 5:
        violations.append(("count", len(forgeries)))
    for name, q in forgeries:
        report_ = d.reject_self_reference(q, ev)
        if not report_.failures or d.h_membership(report_.code, ev):
            violations.append(("accepted", name))
        if not all(isinstance(v, str) and v for v in report_.failures.values()):
            violations.append(("unnamed", name))
        if not report_.arithmetic_contradiction:
            violations.append(("arithmetic", name))
    violations += [n for n in range(201) if not 1 + d.t_m0_eval(n, ev) > d.t_m0_eval(n, ev)]
    report(6, "5 self-referential forgeries rejected", violations)


# 7 ------------------------------------------------------------------------------

def test_criterion_7_flipping_decider(report):
    violations = []
    ev = d.DiagonalEvaluator(c.build_O(c.halts_at(5), ""))
    f = [1 if n < 5 else 0 for n in range(201)]
    if [d.f_eval(n, ev) for n in range(201)] != f:
        violations.append("f")
    for name in ("parity", "popcount-parity", "palindrome"):
        t_l0 = cb.Library(name)
        u = d.build_theorem2_switch(t_l0, ev)
        cmp_ = d.build_comparator(u, t_l0)
        for n in range(201):
            s = numeral(n)
            if (tm.decide(u, s) == REFERENCE[name](s)) != (f[n] == 1):
                violations.append(("switch", name, n))
            if tm.decide(cmp_, s) != f[n]:
                violations.append(("comparator", name, n))
    report(7, "switch and comparator over n <= 200", violations)


# 8 ------------------------------------------------------------------------------

def random_m2(rng, depth=2):
    roll = rng.randrange(5 if depth else 3)
    if roll == 0:
        return cb.Library(rng.choice(["echo", *sorted(REFERENCE)]))
    if roll == 1:
        return cb.Const("".join(rng.choice("01") for _ in range(rng.randint(0, 8))))
    if roll == 2:
        return c.build_O(c.halts_at(rng.randint(0, 7)), "".join(rng.choice("01") for _ in range(rng.randint(0, 3))))
    if roll == 3:
        name, table, m = random_patch(rng)
        return cb.Patch(cb.Library(name), table, m)
    return cb.Compose(random_m2(rng, depth - 1), random_m2(rng, depth - 1))


def test_criterion_8_encoding(report):
    rng = random.Random(8)
    violations = []
    m0 = c.build_O(c.halts_at(5), "")
    for i in range(500):
        q = d.make_quadruplet(m0, random_m2(rng))
        n = d.t_encode(q)
        back = d.t_decode(n)
        if back != q or tuple(back.components()) != tuple(q.components()) or d.t_encode(back) != n:
            violations.append(("round-trip", i))
    if d.t_decode(0) is not None:
        violations.append("zero")
    for _ in range(500):
        n = rng.randrange(10 ** 6)
        q = d.t_decode(n)
        if q is not None and d.t_encode(q) != n:
            violations.append(("small", n))
    report(8, "500 round trips and 500 small naturals", violations)


# 9 ------------------------------------------------------------------------------

def test_criterion_9_theory_soundness(report):
    violations = []
    kinds = {}
    counts = {"halts": 0, "nothalts": 0}
    for k, proof in th.theorems():
        if k == 1000:
            break
        st, cert = proof.subject, proof.certificate
        m = st.machine
        if isinstance(st, th.Halts):
            halted, steps, _ = oracle_run(m, st.w, cert.steps + 1)
            if not halted or steps != cert.steps:
                violations.append(("halts", k))
            kind = "halts"
        else:
            halted, _, _ = oracle_run(m, st.w, 10 * (cert.prefix + cert.cycle))
            if halted:
                violations.append(("nothalts", k))
            kind = "nothalts"
        counts[kind] += 1
        key = (m.sexpr(), st.w)
        if kinds.setdefault(key, kind) != kind:
            violations.append(("both", k))
    report(9, "first 1000 theorems are sound", violations, f"halts={counts['halts']} nothalts={counts['nothalts']}")
