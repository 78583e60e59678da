"""Named property suites with deterministic, replayable reports.

Every suite takes (seed, cases, precision, depth) and returns a plain dict:
identical inputs produce byte-identical JSON.  A failing check appends a
self-contained counterexample payload (all inputs serialized) and the suite
keeps going, so one run reports every broken property it finds.
"""

from __future__ import annotations

import random
from collections import Counter

from . import balls as B
from . import chain as C
from . import extension as E
from . import field as F
from . import isotopies as I
from . import samples as SA
from . import sequences as S

DEFAULT_CASES = 200


def _report(suite, seed, params, checks, failures):
    return {
        "schema_version": 1,
        "suite": suite,
        "seed": seed,
        "params": params,
        "checks": dict(sorted(checks.items())),
        "failures": failures,
        "passed": not failures,
    }


class _Run:
    def __init__(self):
        self.checks = Counter()
        self.failures = []

    def ok(self, name):
        self.checks[name] += 1

    def fail(self, name, case, **payload):
        self.checks[name] += 1
        self.failures.append({"check": name, "case": case, "inputs": payload})

    def check(self, name, cond, case, **payload):
        if cond:
            self.ok(name)
        else:
            self.fail(name, case, **payload)


def _int_oracle_valuation(n: int, p: int) -> int:
    v = 0
    while n and n % p == 0:
        n //= p
        v += 1
    return v


def suite_ultrametric(seed=0, cases=DEFAULT_CASES, precision=32, depth=12):
    """Norm axioms on random pairs, per backend, with an integer oracle."""
    run = _Run()
    for backend in SA.STANDARD_BACKENDS:
        rng = random.Random(f"{seed}:{backend.label}")
        for i in range(cases):
            a = SA.random_element(backend, precision, rng)
            b = SA.random_element(backend, precision, rng)
            na, nb = F.norm_exp(a), F.norm_exp(b)
            ns = F.norm_exp(F.add(a, b))
            payload = {"a": F.to_json(a), "b": F.to_json(b), "backend": backend.label}
            run.check("ultrametric-bound", ns <= max(na, nb), i, **payload)
            if na != nb:
                run.check("strict-max", ns == max(na, nb), i, **payload)
            if not (a.zero or b.zero):
                nm = F.norm_exp(F.mul(a, b))
                run.check("multiplicative", nm.exp == na.exp + nb.exp, i, **payload)
        # cross-check against trial division on plain integers
        if backend.kind == F.QP:
            for i in range(cases // 10):
                n = rng.randint(1, 10**9)
                v = _int_oracle_valuation(n, backend.p)
                x = F.from_integer(n, backend, precision)
                run.check(
                    "integer-oracle",
                    F.norm_exp(x) == F.NormExp(-v),
                    i,
                    n=n,
                    backend=backend.label,
                )
    return _report(
        "ultrametric", seed, {"cases": cases, "precision": precision}, run.checks, run.failures
    )


def suite_fraction_roundtrip(seed=0, cases=DEFAULT_CASES, precision=32, depth=12):
    """Both compositions of the fraction transform are the identity."""
    run = _Run()
    for backend in (SA.QP3, SA.QP5):
        rng = random.Random(f"{seed}:{backend.label}")
        for i in range(cases):
            y = SA.random_proper_fractions(backend, precision, rng)
            payload = {"y": S.seq_to_json(y), "backend": backend.label}
            x = C.from_fractions(y, depth)
            run.check(
                "pullback-membership",
                S.membership(x, "mono_to_one_inf", depth).yes,
                i,
                **payload,
            )
            run.check(
                "remainder-identity", C.remainder_identity_holds(x, y, depth), i, **payload
            )
            y2 = C.to_fractions(x, depth)
            run.check("fraction-roundtrip", S.seq_agrees(y2, y, depth), i, **payload)
            x2 = C.from_fractions(y2, depth)
            run.check("increment-roundtrip", S.seq_agrees(x2, x, depth), i, **payload)
    return _report(
        "fraction_roundtrip",
        seed,
        {"cases": cases, "precision": precision, "depth": depth},
        run.checks,
        run.failures,
    )


def suite_sum_roundtrip(seed=0, cases=DEFAULT_CASES, precision=32, depth=12):
    """partial_sums and differences invert each other; image conditions hold."""
    run = _Run()
    for backend in (SA.QP3, SA.QP5):
        rng = random.Random(f"{seed}:{backend.label}")
        for i in range(cases):
            x = SA.random_c0_vector(backend, precision, rng, geometric_tail=bool(i % 2))
            payload = {"x": S.seq_to_json(x), "backend": backend.label}
            y = S.partial_sums(x)
            run.check(
                "differences-inverts", S.seq_agrees(S.differences(y), x, depth), i, **payload
            )
            x2 = S.differences(y)
            run.check(
                "sums-invert", S.seq_agrees(S.partial_sums(x2), y, depth), i, **payload
            )
        for i in range(cases // 4):
            x = (
                SA.bouncing_never_one_vector(backend, precision, rng)
                if i % 2
                else SA.random_monotone_increments(backend, precision, rng, depth=depth, unit_sums=True)
            )
            payload = {"x": S.seq_to_json(x), "backend": backend.label}
            y = C.to_sums(x, depth)
            run.check("image-sup-one", S.sup_norm(y) == F.NormExp(0), i, **payload)
            nz = all(not y.coordinate(k).zero for k in range(1, depth + 1))
            run.check("image-nonzero", nz, i, **payload)
            run.check(
                "image-limit-one",
                F.agrees(y.tail.limit(backend), F.one(backend, precision)),
                i,
                **payload,
            )
            run.check("sum-roundtrip", S.seq_agrees(C.from_sums(y, depth), x, depth), i, **payload)
    return _report(
        "sum_roundtrip",
        seed,
        {"cases": cases, "precision": precision, "depth": depth},
        run.checks,
        run.failures,
    )


def suite_field_ball(seed=0, cases=DEFAULT_CASES, precision=32, depth=12, levels=12, indices=10_000):
    """The field <-> punctured ball map: round trips, image, injectivity."""
    run = _Run()
    for backend in (SA.QP3, SA.QP5):
        rng = random.Random(f"{seed}:{backend.label}")
        unit = F.one(backend, precision)
        for i in range(cases):
            x = SA.random_element(backend, precision, rng, vmin=-5, vmax=5)
            payload = {"x": F.to_json(x), "backend": backend.label}
            y = B.field_to_ball(x, levels, precision)
            in_ball = F.norm_le_exp(y, 0)
            apart = not F.sub(y, unit).zero
            run.check("image-in-punctured-ball", in_ball and apart, i, **payload)
            run.check(
                "roundtrip", F.agrees(B.ball_to_field(y, levels, precision), x), i, **payload
            )
    # brute-force injectivity of the index pairing: the flat index i names the
    # source ball and pairing resolves to an (annulus, residue) target; all
    # targets must be pairwise distinct
    p = SA.QP3.p
    targets = {divmod(i, p - 1) for i in range(indices)}
    run.check("pairing-injective", len(targets) == indices, 0, indices=indices)
    # and the enumerated partitions really are disjoint families
    fpart, bpart, _ = B.matched_partitions(40, SA.QP3, 16)
    try:
        fpart.validate_disjoint()
        bpart.validate_disjoint()
        run.ok("partitions-disjoint")
    except B.NotDisjoint:
        run.fail("partitions-disjoint", 0)
    return _report(
        "field_ball",
        seed,
        {"cases": cases, "levels": levels, "indices": indices},
        run.checks,
        run.failures,
    )


def suite_extension(seed=0, cases=DEFAULT_CASES, precision=24, depth=12, n_max=6):
    """The staged extension on the fixture catalog."""
    run = _Run()
    rng = random.Random(seed)
    for idx, inst in enumerate(SA.extension_catalog(precision)):
        res = E.extend(inst.function, inst.space, n_max)
        g = res.function
        payload = {"instance": inst.name}
        # restriction exactness on sampled domain points
        exact = True
        for mball, value in inst.function.pieces:
            draw = SA.unitball_sampler(mball, precision, rng)
            for _ in range(5):
                if not F.agrees(g.eval(draw()), value):
                    exact = False
        run.check("restriction-exact", exact, idx, **payload)
        # per-stage Cauchy bound at the exact advertised rate
        for s in res.stages[1:]:
            lim = inst.function.bound_exp - (s.n - 1)
            run.check(
                "stage-bound",
                s.step_diff.exp is None or s.step_diff.exp <= lim,
                idx,
                stage=s.n,
                **payload,
            )
        # global bound via sampled carrier points
        bounded = True
        for cb in inst.space.carrier:
            draw = SA.unitball_sampler(cb, precision, rng)
            for _ in range(10):
                if not F.norm_le_exp(g.eval(draw()), inst.function.bound_exp):
                    bounded = False
        run.check("image-bounded", bounded, idx, **payload)
        # the stage-1 region contains the domain
        u1, region = E.extend_step(inst.function, inst.space, 1, precision)
        covers = all(
            any(B.ball_relation(mb, rb) in (B.BallRelation.A_IN_B, B.BallRelation.EQUAL) for rb in region.balls)
            for mb, _ in inst.function.pieces
        )
        run.check("stage-region-covers-domain", covers, idx, **payload)
        # |u_1 - f| <= c/p on the domain
        close = True
        for mball, value in inst.function.pieces:
            draw = SA.unitball_sampler(mball, precision, rng)
            for _ in range(3):
                gap = F.sub(u1.eval(draw()), value)
                if not F.norm_le_exp(gap, inst.function.bound_exp - 1):
                    close = False
        run.check("stage-one-close-on-domain", close, idx, **payload)
    return _report(
        "extension", seed, {"n_max": n_max, "precision": precision}, run.checks, run.failures
    )


def suite_isotopy(seed=0, cases=DEFAULT_CASES, precision=24, depth=12):
    """Identity at time zero, exact inverses, support contracts, push-off."""
    run = _Run()
    backend = SA.QP3
    rng = random.Random(seed)
    unit = F.one(backend, precision)
    pi = F.uniformizer(backend, precision)
    push = I.push_slice_isotopy(backend, precision)
    origin_push = I.push_origin_isotopy(backend, precision)
    steps = I.step_scaling_isotopy(backend, precision)
    scaled = I.conjugate_scale(origin_push, pi)
    q1 = S.basis_vector(backend, 1, precision)

    for i in range(cases):
        x = SA.random_slice_vector(backend, precision, rng)
        t = SA.random_time(backend, precision, rng)
        payload = {"x": S.seq_to_json(x), "t": F.to_json(t)}
        run.check("slice-time-zero-id", S.seq_agrees(push.eval(x, F.zero(backend)), x, depth), i, **payload)
        y = push.eval(x, t)
        run.check("slice-inverse", S.seq_agrees(push.inv(y, t), x, depth), i, **payload)
        img1 = push.eval(x, unit)
        run.check("push-off-avoids-base", not S.seq_agrees(img1, q1, depth), i, **payload)

        z = SA.random_unitball_vector(backend, precision, rng)
        run.check(
            "origin-time-zero-id",
            S.seq_agrees(origin_push.eval(z, F.zero(backend)), z, depth),
            i,
            z=S.seq_to_json(z),
        )
        w = origin_push.eval(z, t)
        run.check("origin-inverse", S.seq_agrees(origin_push.inv(w, t), z, depth), i, z=S.seq_to_json(z))
        run.check(
            "origin-ball-preserved", S.sup_norm(w) <= F.NormExp(0), i, z=S.seq_to_json(z)
        )
    # support contracts: points outside stay put at every sampled time
    for i in range(cases // 4):
        t = SA.random_time(backend, precision, rng)
        big = S.vector_of(
            [F.from_digits(backend, -1 - rng.randint(0, 2), [rng.randrange(1, 3)] + [0] * (precision - 1))]
            + [SA.random_element(backend, precision, rng, vmin=0, vmax=3) for _ in range(3)]
        )
        run.check(
            "origin-support", S.seq_agrees(origin_push.eval(big, t), big, depth), i, big=S.seq_to_json(big)
        )
        outside_r = S.vector_of([unit] + [SA.random_element(backend, precision, rng, vmin=0, vmax=3) for _ in range(3)])
        run.check(
            "scaled-support", S.seq_agrees(scaled.eval(outside_r, t), outside_r, depth), i,
            x=S.seq_to_json(outside_r),
        )
        inside_r = S.vector_of([F.mul(pi, SA.random_element(backend, precision, rng, vmin=1, vmax=3))])
        w2 = scaled.eval(inside_r, t)
        run.check(
            "scaled-inverse", S.seq_agrees(scaled.inv(w2, t), inside_r, depth), i,
            x=S.seq_to_json(inside_r),
        )
    # the base point has a sampled preimage at time 1
    pre = push.inv(q1, unit)
    run.check("push-off-preimage", S.seq_agrees(push.eval(pre, unit), q1, depth), 0)
    run.check("push-off-moves-base", not S.seq_agrees(push.eval(q1, unit), q1, depth), 0)
    # origin pushed off
    img0 = origin_push.eval(S.zeros_vector(backend), unit)
    run.check("origin-pushed-off", not S.sup_norm(img0).is_zero, 0)
    # step scaling: identity at zero and unit times, inverse exact
    for i in range(cases // 4):
        v = SA.random_unitball_vector(backend, precision, rng)
        run.check("steps-time-zero-id", S.seq_agrees(steps.eval(v, F.zero(backend)), v, depth), i)
        u = SA.random_unit(backend, precision, rng)
        run.check("steps-unit-time-id", S.seq_agrees(steps.eval(v, u), v, depth), i)
        t = F.pow_int(pi, rng.randint(1, 5))
        w3 = steps.eval(v, t)
        run.check("steps-inverse", S.seq_agrees(steps.inv(w3, t), v, depth), i)
    # fiberwise combination honors its endpoint contracts
    family = I.fiber_family(origin_push)
    iso = family(pi)
    x1 = SA.random_unitball_vector(backend, precision, rng)
    y2 = SA.random_unitball_vector(backend, precision, rng)
    pair = (x1, y2)
    out0 = iso.eval(pair, F.zero(backend))
    run.check("fiber-time-zero-id", S.seq_agrees(out0[0], x1, depth) and out0[1] is y2, 0)
    at_origin = iso.eval((x1, S.zeros_vector(backend)), unit)
    run.check(
        "fiber-origin-full-push",
        S.seq_agrees(at_origin[0], origin_push.eval(x1, unit), depth),
        0,
    )
    return _report(
        "isotopy", seed, {"cases": cases, "precision": precision}, run.checks, run.failures
    )


def suite_left_product(seed=0, cases=DEFAULT_CASES, precision=24, depth=12, k_max=5):
    """Finite reduction of the ladder product and its factor counts."""
    run = _Run()
    backend = SA.QP3
    rng = random.Random(seed)
    unit = F.one(backend, precision)
    pi = F.uniformizer(backend, precision)
    factor_at, stabilized = I.push_slice_factors(backend, precision)
    for i in range(cases):
        x = SA.random_slice_vector(backend, precision, rng)
        t = F.pow_int(pi, rng.randint(1, 6))  # |t| < 1
        got, count = I.left_product(factor_at, t, x, stabilized)
        single = factor_at(0).eval(x, F.div(t, F.sub(unit, pi)))
        run.check(
            "small-time-single-factor", S.seq_agrees(got, single, depth), i, x=S.seq_to_json(x)
        )
    for k in range(k_max + 1):
        for i in range(cases // 10):
            x = SA.random_slice_vector(backend, precision, rng)
            t = (
                SA.random_unit(backend, precision, rng)
                if k == 0
                else F.sub(unit, F.mul(SA.random_unit(backend, precision, rng), F.pow_int(pi, k)))
            )
            gap = F.sub(unit, t)
            if gap.zero or gap.valuation != k:
                continue  # the random unit landed outside the annulus
            _, count = I.left_product(factor_at, t, x, stabilized)
            run.check("annulus-factor-count", count == k + 1, i, k=k, t=F.to_json(t))
    return _report(
        "left_product", seed, {"cases": cases, "k_max": k_max}, run.checks, run.failures
    )


def suite_separation(seed=0, cases=DEFAULT_CASES, precision=24, depth=12):
    """Ball trichotomy, certified set distances, and the separating map."""
    run = _Run()
    rng = random.Random(seed)
    for backend in (SA.QP3, SA.FL3):
        for i in range(cases):
            a = SA.random_ball(backend, precision, rng)
            b = SA.random_ball(backend, precision, rng)
            rel = B.ball_relation(a, b)
            payload = {"a": B.ball_to_json(a), "b": B.ball_to_json(b), "backend": backend.label}
            # trichotomy cross-check by sampling: no partial overlap
            draw = SA.unitball_sampler(a, precision, rng)
            inside = sum(1 for _ in range(8) if b.contains(draw()))
            if rel is B.BallRelation.DISJOINT:
                run.check("trichotomy", inside == 0, i, **payload)
            elif rel in (B.BallRelation.A_IN_B, B.BallRelation.EQUAL):
                run.check("trichotomy", inside == 8, i, **payload)
            else:
                run.check("trichotomy", True, i, **payload)
    backend = SA.QP3
    unit = F.one(backend, precision)
    z = F.zero(backend)
    for i in range(cases // 5):
        e = -rng.randint(1, 4)
        centers = [z, unit, F.from_integer(2, backend, precision)]
        rng.shuffle(centers)
        parts = [B.Partition((B.BallSpec(c, e),)) for c in centers]
        d12 = B.set_min_distance(parts[0], parts[1])
        run.check(
            "bound-below-witness",
            d12 <= B.min_center_distance(parts[0], parts[1]),
            i,
            e=e,
        )
        values = [z, unit, F.from_integer(2, backend, precision)]
        sets = list(zip(parts, values))
        r_exp = e - 1
        for j, (part, value) in enumerate(sets):
            probe = SA.unitball_sampler(part.balls[0], precision, rng)()
            got = B.urysohn(sets, probe, r_exp)
            run.check("urysohn-exact-value", F.agrees(got, value), i, j=j)
            # local constancy at scale r: perturb within p^r_exp
            wiggle = F.add(
                probe,
                F.mul(
                    SA.random_element(backend, precision, rng, vmin=0, vmax=2),
                    F.pow_int(F.uniformizer(backend, precision), -r_exp),
                ),
            )
            run.check(
                "urysohn-locally-constant",
                F.agrees(B.urysohn(sets, wiggle, r_exp), got),
                i,
                j=j,
            )
        far = F.from_digits(backend, -2, [1] + [0] * (precision - 1))
        run.check(
            "urysohn-default", F.agrees(B.urysohn(sets, far, r_exp), values[-1]), i
        )
    # self-intersection raises
    try:
        B.set_min_distance(parts[0], parts[0])
        run.fail("not-disjoint-raises", 0)
    except B.NotDisjoint:
        run.ok("not-disjoint-raises")
    return _report(
        "separation", seed, {"cases": cases, "precision": precision}, run.checks, run.failures
    )


def suite_step_scaling(seed=0, cases=DEFAULT_CASES, precision=24, depth=12):
    """The counterexample family: identity endpoints, divergent inverses."""
    run = _Run()
    backend = SA.QP3
    rng = random.Random(seed)
    steps = I.step_scaling_isotopy(backend, precision)
    for i in range(cases // 2):
        v = SA.random_unitball_vector(backend, precision, rng)
        run.check(
            "time-zero-id", S.seq_agrees(steps.eval(v, F.zero(backend)), v, depth), i
        )
    # along the witness the inputs shrink but the inverse images stay unit
    for n in range(1, 9):
        t, y = I.step_scaling_witness(backend, n, precision)
        run.check("witness-inputs-shrink", S.sup_norm(y) == F.NormExp(-n), n)
        back = steps.inv(y, t)
        run.check("witness-inverse-unit-norm", S.sup_norm(back) == F.NormExp(0), n)
    return _report(
        "step_scaling", seed, {"cases": cases}, run.checks, run.failures
    )


SUITES = {
    "ultrametric": suite_ultrametric,
    "fraction_roundtrip": suite_fraction_roundtrip,
    "sum_roundtrip": suite_sum_roundtrip,
    "field_ball": suite_field_ball,
    "extension": suite_extension,
    "isotopy": suite_isotopy,
    "left_product": suite_left_product,
    "separation": suite_separation,
    "step_scaling": suite_step_scaling,
}


def run_suite(name: str, seed=0, cases=DEFAULT_CASES, precision=32, depth=12) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](seed=seed, cases=cases, precision=precision, depth=depth)


def merge_reports(reports: list[dict]) -> dict:
    """Order-independent aggregation of suite reports."""
    merged = {
        "schema_version": 1,
        "suites": sorted(r["suite"] for r in reports),
        "total_checks": sum(sum(r["checks"].values()) for r in reports),
        "total_failures": sum(len(r["failures"]) for r in reports),
        "passed": all(r["passed"] for r in reports),
    }
    return merged
