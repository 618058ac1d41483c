"""Registry of verification checks shared by the CLI and the test suite.

Each check takes a validated parameter dict and returns an ``Outcome``; the
driver in ``run_check`` adds identification, seeding, timing and error
handling and produces the report dict documented in the README.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import arch, gsp4, local_unramified as lu, satake, siegel
from .exact_algebra import rat_str
from .gsp4 import QuadExtData, V5Vector
from .padic import PrimeCtx

SCHEMA = 1
STATUSES = ("pass", "fail", "error")


class ParamError(ValueError):
    """Raised for malformed check descriptors."""


@dataclass
class Outcome:
    passed: bool
    lhs: object = None
    rhs: object = None
    max_discrepancy: object = 0
    witness: object = None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    func: Callable[[dict, int], Outcome]
    defaults: dict
    summary: str


REGISTRY: dict[str, CheckSpec] = {}


def register(check_id: str, summary: str, **defaults):
    def deco(func):
        REGISTRY[check_id] = CheckSpec(check_id, func, defaults, summary)
        return func
    return deco


# ---------------------------------------------------------------------------
# parameter coercion

def _int_list(x) -> list[int]:
    if isinstance(x, bool):
        raise ParamError(f"expected integer(s), got {x!r}")
    if isinstance(x, int):
        return [x]
    if isinstance(x, (list, tuple)) and x and all(isinstance(v, int) and not isinstance(v, bool) for v in x):
        return list(x)
    raise ParamError(f"expected an integer or a non-empty list of integers, got {x!r}")


def _float_list(x) -> list[float]:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return [float(x)]
    if isinstance(x, (list, tuple)) and x and all(isinstance(v, (int, float)) for v in x):
        return [float(v) for v in x]
    raise ParamError(f"expected a number or a non-empty list of numbers, got {x!r}")


def _int(x, name: str, lo: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParamError(f"{name} must be an integer, got {x!r}")
    if lo is not None and x < lo:
        raise ParamError(f"{name} must be >= {lo}, got {x}")
    return x


def _pos(x, name: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not x > 0:
        raise ParamError(f"{name} must be a positive number, got {x!r}")
    return float(x)


def _primes(x) -> list[int]:
    ps = _int_list(x)
    for p in ps:
        PrimeCtx(p)  # raises on non-primes
    return ps


def _discs(x) -> list[int]:
    ds = _int_list(x)
    for d in ds:
        QuadExtData(d)
    return ds


def validate(check_id: str, params: dict | None) -> dict:
    """Defaults merged with ``params``; unknown keys are rejected."""
    if check_id not in REGISTRY:
        raise ParamError(f"unknown check id {check_id!r}; known: {', '.join(sorted(REGISTRY))}")
    spec = REGISTRY[check_id]
    params = dict(params or {})
    unknown = sorted(set(params) - set(spec.defaults))
    if unknown:
        raise ParamError(f"check {check_id!r} does not take parameter(s) {unknown}; "
                         f"accepted: {sorted(spec.defaults)}")
    out = dict(spec.defaults)
    out.update(params)
    return out


# ---------------------------------------------------------------------------
# JSON-friendly values

def jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, (str, int)):
        return x
    if isinstance(x, Fraction):
        return rat_str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(float(x.real)), jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    return repr(x)


# ---------------------------------------------------------------------------
# running

def error_report(check_id, params, seed, message: str) -> dict:
    return {"schema": SCHEMA, "check_id": check_id, "status": "error", "params": jsonable(params),
            "seed": seed, "lhs": None, "rhs": None, "max_discrepancy": None, "witness": None,
            "details": {"error": message} if message else {}, "runtime_ms": None}


def run_check(check_id: str, params: dict | None = None, seed: int = 0, timing: bool = False) -> dict:
    """Run one check and return its report dict (never raises)."""
    t0 = time.perf_counter()
    base = error_report(check_id, params, seed, "")
    try:
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ParamError(f"seed must be an integer, got {seed!r}")
        full = validate(check_id, params)
        base["params"] = jsonable(full)
        out = REGISTRY[check_id].func(full, seed)
        base.update(status="pass" if out.passed else "fail", lhs=jsonable(out.lhs), rhs=jsonable(out.rhs),
                    max_discrepancy=jsonable(out.max_discrepancy), witness=jsonable(out.witness),
                    details=jsonable(out.details))
        if not out.passed and out.witness is None:
            base["witness"] = "no witness recorded"
    except Exception as exc:  # reported, not raised
        base["details"] = {"error": f"{type(exc).__name__}: {exc}"}
    if timing:
        base["runtime_ms"] = round((time.perf_counter() - t0) * 1000, 1)
    return base


# ---------------------------------------------------------------------------
# Satake side

@register("macdonald", "torus sums against the spin L-factor, coefficientwise in Q",
          p=[2, 3, 5, 7], K=8, numeric=["2", "1/2", "3"])
def check_macdonald(prm: dict, seed: int) -> Outcome:
    ps = _primes(prm["p"])
    K = _int(prm["K"], "K", 0)
    num = prm["numeric"]
    if num is not None and (not isinstance(num, list) or len(num) != 3):
        raise ParamError("numeric must be null or a list [x_a, x_b, w] of rationals")
    per_p = {}
    witness = None
    for p in ps:
        ctx = PrimeCtx(p)
        rep = satake.verify_macdonald(satake.SYMBOLIC, ctx, K)
        entry = {"symbolic": rep.ok}
        if not rep.ok and witness is None:
            witness = {"p": p, "assignment": "symbolic", **rep.mismatch}
        if num is not None:
            assign = satake.SatakeAssignment(*(Fraction(x) for x in num))
            nrep = satake.verify_macdonald(assign, ctx, K)
            entry["numeric"] = nrep.ok
            if not nrep.ok and witness is None:
                witness = {"p": p, "assignment": num, **nrep.mismatch}
        per_p[str(p)] = entry
    ctx = PrimeCtx(ps[0])
    low = min(K, 2)
    lhs = satake.torus_sum("weighted", satake.SYMBOLIC, ctx, low)
    rhs = satake.central_factor(satake.SYMBOLIC, ctx, low) * satake.spin_l_factor(satake.SYMBOLIC, ctx, low)
    return Outcome(witness is None, lhs=lhs, rhs=rhs, max_discrepancy=0 if witness is None else 1,
                   witness=witness, details={"per_p": per_p, "summary_order": low, "summary_p": ps[0]})


@register("ib-ip", "Borel and Siegel unipotent volumes by counting against the closed forms",
          p=[2, 3, 5], bound=4, shape=3)
def check_ib_ip(prm: dict, seed: int) -> Outcome:
    ps = _primes(prm["p"])
    bound = _int(prm["bound"], "bound", 0)
    shape = _int(prm["shape"], "shape", 0)
    n_b = n_p = 0
    witness = None
    for p in ps:
        ctx = PrimeCtx(p)
        for t in satake.integral_torus_upto(bound):
            c, f = satake.ib_by_counting(t, ctx), satake.ib_formula(t, ctx)
            n_b += 1
            if c != f and witness is None:
                witness = {"kind": "I_B", "p": p, "u": list(t.u), "counting": c, "formula": f}
        for a in range(shape + 1):
            for b in range(shape + 1):
                m2 = gsp4.mat([[Fraction(p) ** a, 0], [0, Fraction(p) ** b]])
                c, f = satake.ip_by_counting(m2, ctx), satake.ip_formula(m2, ctx)
                n_p += 1
                if c != f and witness is None:
                    witness = {"kind": "I_P", "p": p, "shape": [a, b], "counting": c, "formula": f}
    sample = satake.TorusElt.of(1, 0, 1, 0)
    ctx = PrimeCtx(ps[0])
    return Outcome(witness is None, lhs=satake.ib_by_counting(sample, ctx), rhs=satake.ib_formula(sample, ctx),
                   max_discrepancy=0 if witness is None else 1, witness=witness,
                   details={"torus_elements": n_b, "divisor_shapes": n_p,
                            "summary": f"I_B at u=(1,0,1,0), p={ps[0]}"})


@register("factorization", "number of factorizations of t into t_A, t_B, t_C, t_D",
          p=3, bound=12)
def check_factorization(prm: dict, seed: int) -> Outcome:
    _primes(prm["p"])
    bound = _int(prm["bound"], "bound", 0)
    n = 0
    witness = None
    for t in satake.integral_torus_upto(bound):
        n += 1
        c = satake.factorization_count(t)
        if c != t.val + 1:
            witness = {"u": list(t.u), "count": c, "expected": t.val + 1}
            break
    return Outcome(witness is None, lhs=n if witness is None else witness["count"],
                   rhs=n if witness is None else witness["expected"],
                   max_discrepancy=0 if witness is None else 1, witness=witness,
                   details={"elements": n})


# ---------------------------------------------------------------------------
# local unramified side

def _unimodular_levi(rng: random.Random) -> gsp4.GSpElement:
    """Random element of M(Z) from a word in elementary GL2(Z) matrices."""
    a = gsp4.identity(2)
    gens = [((1, 1), (0, 1)), ((1, 0), (1, 1)), ((0, 1), (1, 0)), ((1, -1), (0, 1)), ((-1, 0), (0, 1))]
    for _ in range(rng.randint(1, 6)):
        a = gsp4.mat_mul(a, gsp4.mat(tuple(Fraction(x) for x in r) for r in rng.choice(gens)))
    return gsp4.siegel_levi(a, rng.choice([1, -1]))


def _levi_label(m: gsp4.GSpElement) -> dict:
    return {"matrix": [[rat_str(x) for x in r] for r in m.mat], "nu": rat_str(m.nu)}


@register("alpha-chi", "character sum alpha_{chi,p} against the closed form Delta_0",
          p=[2, 3, 5], D=[-1, -2, 2, 3, 5, -7], bound=3, samples=50, tol=1e-9)
def check_alpha_chi(prm: dict, seed: int) -> Outcome:
    ps, ds = _primes(prm["p"]), _discs(prm["D"])
    bound = _int(prm["bound"], "bound", 0)
    samples = _int(prm["samples"], "samples", 0)
    tol = _pos(prm["tol"], "tol")
    rng = random.Random(seed)
    worst, count, witness = 0.0, 0, None
    for p in ps:
        ctx = PrimeCtx(p)
        for D in ds:
            ext = QuadExtData(D)
            elems = []
            for orient in ("minus", "plus"):
                for c in lu.enumerate_levi_cosets(ext, ctx, bound, orient):
                    elems.append(("coset", c.element(p)))
                    elems.append(("coset*M(Z)", c.element(p) * _unimodular_levi(rng)))
            for _ in range(samples):
                elems.append(("random", lu.random_levi(ctx, rng)))
            for kind, m in elems:
                a = lu.alpha_chi_p(m, ext, ctx)
                d = float(lu.delta0(m, ext, ctx))
                err = abs(a - d)
                count += 1
                worst = max(worst, err)
                if err >= tol and witness is None:
                    witness = {"p": p, "D": D, "kind": kind, "element": _levi_label(m),
                               "character_sum": a, "delta0": d}
    return Outcome(witness is None, lhs="alpha_chi_p (character sum)", rhs="Delta_0 (closed form)",
                   max_discrepancy=worst, witness=witness, details={"elements": count})


def _lemma_grid(p: int, alpha_range, delta_range):
    """Levi elements (p^delta, 0; -b, p^alpha) (+) its nu-transpose-inverse, lambda = 1."""
    for al in alpha_range:
        for de in delta_range:
            bs = [Fraction(b) for b in range(p ** max(al, 0))] + [Fraction(1, p)]
            for b in bs:
                mt = gsp4.mat([[Fraction(p) ** de, 0], [-b, Fraction(p) ** al]])
                nu = Fraction(p) ** (al + de)
                mb = gsp4.mat_scale(nu, gsp4.mat_T(gsp4.mat_inv(mt)))
                yield (al, de, b), gsp4.make_gsp(gsp4.block_diag(mt, mb))


@register("unipotent-lemma", "unipotent character integral equals p^alpha or 0 by the congruence",
          p=[2, 3, 5], D=[-1, -2, 2, 3, 5, -7], alpha=[-1, 3], delta=[0, 2], tol=1e-9)
def check_unipotent_lemma(prm: dict, seed: int) -> Outcome:
    ps, ds = _primes(prm["p"]), _discs(prm["D"])
    tol = _pos(prm["tol"], "tol")
    ar, dr = _int_list(prm["alpha"]), _int_list(prm["delta"])
    if len(ar) != 2 or len(dr) != 2 or dr[0] < 0:
        raise ParamError("alpha and delta are inclusive ranges [lo, hi] with delta >= 0")
    orients = ("minus", "plus")
    worst = {o: 0.0 for o in orients}
    fails = {o: 0 for o in orients}
    first = {o: None for o in orients}
    n = 0
    for p in ps:
        ctx = PrimeCtx(p)
        for D in ds:
            ext = QuadExtData(D)
            for (al, de, b), g in _lemma_grid(p, range(ar[0], ar[1] + 1), range(dr[0], dr[1] + 1)):
                val = lu.unipotent_integral(g, ext, ctx)
                n += 1
                for o in orients:
                    pred = float(lu.lemma_prediction(g, ext, ctx, o))
                    err = abs(val - pred)
                    worst[o] = max(worst[o], err)
                    if err >= tol:
                        fails[o] += 1
                        if first[o] is None:
                            first[o] = {"p": p, "D": D, "alpha": al, "delta": de, "b": b,
                                        "integral": val, "predicted": pred, "orientation": o}
    holding = [o for o in orients if fails[o] == 0]
    passed = bool(holding)
    best = holding[0] if holding else min(orients, key=lambda o: fails[o])
    return Outcome(passed, lhs="unipotent character integral", rhs=f"p^alpha or 0 ({best} orientation)",
                   max_discrepancy=worst[best], witness=None if passed else first[best],
                   details={"elements": n, "orientation": best,
                            "failures_by_orientation": fails,
                            "first_failure_other": first["plus" if best == "minus" else "minus"]})


DEFAULT_BIJECTION_PAIRS = [[5, -1], [3, -1], [3, 3], [2, -1], [2, 2], [2, -7], [2, 5], [2, -3],
                           [3, -2], [7, -1], [5, 5], [3, 5]]


@register("bijection", "torus cosets of GL*_{2,L} against Levi cosets with integrand match",
          pairs=DEFAULT_BIJECTION_PAIRS, bound=3)
def check_bijection(prm: dict, seed: int) -> Outcome:
    pairs = prm["pairs"]
    if not isinstance(pairs, list) or not pairs or any(not isinstance(x, list) or len(x) != 2 for x in pairs):
        raise ParamError("pairs must be a non-empty list of [p, D]")
    bound = _int(prm["bound"], "bound", 0)
    per_pair = {}
    witness = None
    orient_ok = {"minus": True, "plus": True}
    integrand_bad = 0
    for p, D in pairs:
        _primes(p), _discs(D)
        ctx, ext = PrimeCtx(p), QuadExtData(D)
        torus = lu.enumerate_torus_L_cosets(ext, ctx, bound)
        tset = {lu.torus_coset_as_levi(img) for img in torus}
        entry = {"type": lu.prime_type(ext, p), "torus_cosets": len(tset)}
        for o in orient_ok:
            lset = set(lu.enumerate_levi_cosets(ext, ctx, bound, o))
            same = lset == tset
            entry[o] = same
            if not same:
                orient_ok[o] = False
                entry[f"{o}_only_levi"] = [list(c.key()) for c in sorted(lset - tset)][:5]
                entry[f"{o}_only_torus"] = [list(c.key()) for c in sorted(tset - lset)][:5]
        for img in torus:
            a, b = lu.integrand_sides(img, ext, ctx)
            if a != b:
                integrand_bad += 1
                if witness is None:
                    witness = {"p": p, "D": D, "coset": list(img.coset), "delta_P_side": a, "delta_BL_side": b}
        for c in lu.enumerate_levi_cosets(ext, ctx, bound, "minus"):
            g = lu.proof_witness(c, ext, ctx)
            if not lu.in_torus_image(g, ext) and witness is None:
                witness = {"p": p, "D": D, "coset": list(c.key()), "problem": "witness outside torus image"}
        per_pair[f"{p},{D}"] = entry
    holding = [o for o in ("minus", "plus") if orient_ok[o]]
    if not holding and witness is None:
        bad = next(k for k, e in per_pair.items() if not e["minus"])
        witness = {"pair": bad, **per_pair[bad]}
    passed = bool(holding) and witness is None
    return Outcome(passed, lhs="torus cosets", rhs="Levi cosets",
                   max_discrepancy=0 if passed else 1, witness=witness,
                   details={"orientation": holding[0] if holding else None,
                            "orientations_matching": holding, "integrand_mismatches": integrand_bad,
                            "pairs": per_pair})


@register("orbits", "orbit sizes of GL*_{2,L}(F_p) on lines of F_p^4",
          p=[3, 5], D=[-1, 1])
def check_orbits(prm: dict, seed: int) -> Outcome:
    ps, ds = _primes(prm["p"]), _discs(prm["D"])
    res, witness = {}, None
    for p in ps:
        for D in ds:
            ext, ctx = QuadExtData(D), PrimeCtx(p)
            sizes = gsp4.line_orbits_mod_p(ext, ctx)
            kind = lu.prime_type(ext, p)
            expected = 3 if kind == "split" else 1
            total = (p ** 4 - 1) // (p - 1)
            res[f"{p},{D}"] = {"type": kind, "orbit_sizes": sizes, "expected_orbits": expected}
            if (len(sizes) != expected or sum(sizes) != total) and witness is None:
                witness = {"p": p, "D": D, "orbit_sizes": sizes, "expected_orbits": expected}
    return Outcome(witness is None, lhs={k: len(v["orbit_sizes"]) for k, v in res.items()},
                   rhs={k: v["expected_orbits"] for k, v in res.items()},
                   max_discrepancy=0 if witness is None else 1, witness=witness, details=res)


# lattice_coords only depends on the branch, so any D of each branch selects the lattice
_INTEGRAL, _HALF_B2 = QuadExtData(-1), QuadExtData(-3)


@register("stabilizer", "v_D fixed by embedded GL*_{2,L}; V5(Z) stable under GSp4(Z)",
          D=[-1, -2, 2, 3, 5, -7], samples=50, words=100)
def check_stabilizer(prm: dict, seed: int) -> Outcome:
    ds = _discs(prm["D"])
    samples = _int(prm["samples"], "samples", 0)
    words = _int(prm["words"], "words", 0)
    rng = random.Random(seed)
    witness = None
    branches = set()
    for D in ds:
        ext = QuadExtData(D)
        branches.add(ext.branch)
        v = gsp4.make_v_D(ext)
        for _ in range(samples):
            u = gsp4.random_gl2l(ext, rng)
            g = gsp4.embed_gl2L(u, ext)
            if gsp4.act_v5(v, g) != v and witness is None:
                witness = {"D": D, "kind": "stabilizer", "element": _levi_label(g)}
    # basis of V5(Z), plus the extra generator of the lattice with B2 in (1/2)Z
    probes = [(V5Vector.of(*r), _INTEGRAL) for r in np.eye(5, dtype=int).tolist()]
    probes.append((V5Vector.of(0, 0, Fraction(1, 2), 0, 0), _HALF_B2))
    for _ in range(words):
        g = gsp4.random_gsp4z(rng)
        if not gsp4.is_integral_matrix(g.mat) or abs(g.nu) != 1:
            witness = witness or {"kind": "word", "element": _levi_label(g)}
            continue
        for v, lat in probes:
            img = gsp4.act_v5(v, g)
            if not img.is_integral(lat) and witness is None:
                witness = {"kind": "integrality", "vector": list(v.coords), "element": _levi_label(g)}
    return Outcome(witness is None, lhs="v_D g, v g", rhs="v_D, V5(Z)",
                   max_discrepancy=0 if witness is None else 1, witness=witness,
                   details={"branches": sorted(branches), "embedded_per_D": samples, "words": words})


# ---------------------------------------------------------------------------
# archimedean side

def _random_rational_v5(rng: random.Random) -> V5Vector:
    return V5Vector.of(*(Fraction(rng.randint(-50, 50), rng.randint(1, 12)) for _ in range(5)))


@register("w-identity", "|(w, v)|^2 = |v|^2 - (v, v) exactly, plus the float identities around w",
          samples=1000, k_samples=50, tol=1e-10)
def check_w_identity(prm: dict, seed: int) -> Outcome:
    n = _int(prm["samples"], "samples", 1)
    nk = _int(prm["k_samples"], "k_samples", 0)
    tol = _pos(prm["tol"], "tol")
    rng = random.Random(seed)
    nrng = np.random.default_rng(seed)
    witness = None
    exact_bad = 0
    for _ in range(n):
        v = _random_rational_v5(rng)
        lhs, rhs = arch.w_pairing_identity_check(v)
        if lhs != rhs:
            exact_bad += 1
            witness = witness or {"vector": list(v.coords), "lhs": lhs, "rhs": rhs}
    iso = arch.w_isotropy()
    if iso != (0, 0) and witness is None:
        witness = {"isotropy": list(iso)}
    float_worst = 0.0
    for _ in range(nk):
        k = arch.random_k_infty(nrng)
        float_worst = max(float_worst, arch.w_k_defect(k))
        g = arch.random_parabolic(nrng)
        Z, _ = arch.act_H2(g, arch.SiegelPoint.i())
        a, b = arch.rstarginv(g), arch.rstarginv_expected(Z)
        float_worst = max(float_worst, max(abs(x - y) for x, y in zip(a.coords, b.coords)))
        v = V5Vector.of(*(rng.randint(-3, 3) for _ in range(5)))
        l, r = arch.gv_pairing_check(g, v)
        float_worst = max(float_worst, abs(l - r) / max(1.0, abs(r)))
    if float_worst >= tol and witness is None:
        witness = {"float_defect": float_worst}
    return Outcome(witness is None, lhs="|(w, v)|^2", rhs="|v|^2 - (v, v)", max_discrepancy=exact_bad,
                   witness=witness, details={"vectors": n, "isotropy": list(iso),
                                             "float_identities_max_defect": float_worst})


@register("contour", "contour integral on Im z = y against e^{-2 pi y} (-2 pi i)^r / (r-1)!",
          r=[2, 6, 8, 10], y=[0.5, 1.0, 2.0], tol=1e-6, cutoff=None)
def check_contour(prm: dict, seed: int) -> Outcome:
    rs, ys = _int_list(prm["r"]), _float_list(prm["y"])
    tol = _pos(prm["tol"], "tol")
    cutoff = None if prm["cutoff"] is None else _pos(prm["cutoff"], "cutoff")
    worst, witness, table = 0.0, None, {}
    for r in rs:
        for y in ys:
            num, closed = arch.contour_integral_check(r, y, cutoff)
            err = abs(num - closed) / abs(closed)
            table[f"r={r},y={y}"] = err
            worst = max(worst, err)
            if err >= tol and witness is None:
                witness = {"r": r, "y": y, "numeric": num, "closed": closed, "relative_error": err}
    r0, y0 = rs[0], ys[0]
    return Outcome(witness is None, lhs=arch.contour_numeric(r0, y0, cutoff), rhs=arch.contour_closed(r0, y0),
                   max_discrepancy=worst, witness=witness, details={"relative_errors": table})


@register("f-infty", "section f_infinity by quadrature against the closed form",
          samples=20, s=[0.75, 1.0, 1.5], tol=1e-8)
def check_f_infty(prm: dict, seed: int) -> Outcome:
    n = _int(prm["samples"], "samples", 1)
    ss = _float_list(prm["s"])
    tol = _pos(prm["tol"], "tol")
    nrng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    k_worst = 0.0
    for i in range(n):
        g = arch.random_parabolic(nrng)
        for s in ss:
            num, closed = arch.f_infty_check(g, s)
            err = abs(num - closed) / abs(closed)
            worst = max(worst, err)
            if err >= tol and witness is None:
                witness = {"sample": i, "s": s, "g": g.tolist(), "numeric": num, "closed": closed}
        k = arch.random_k_infty(nrng)
        a, b = arch.f_infty_numeric(g @ k, ss[0]), arch.f_infty_numeric(g, ss[0])
        k_worst = max(k_worst, abs(a - b) / abs(b))
    if k_worst >= tol and witness is None:
        witness = {"right_K_invariance_defect": k_worst}
    g0 = np.eye(4)
    return Outcome(witness is None, lhs=arch.f_infty_numeric(g0, ss[0]),
                   rhs=arch.f_infty_closed(arch.SiegelPoint.i(), ss[0]),
                   max_discrepancy=worst, witness=witness,
                   details={"samples": n, "right_K_invariance_defect": k_worst})


def i_infty_constant(D: int) -> float:
    """(1/2) Gamma(3/2) (4 pi c)^-3/2 with c = |D|, or |D| - 1/4 when D = 1 mod 4."""
    c = abs(D) - (0.25 if D % 4 == 1 else 0.0)
    return 0.5 * math.gamma(1.5) * (4 * math.pi * c) ** -1.5


@register("i-infty-gamma", "archimedean triple integral over its Gamma-factor closed form",
          r=6, D=[-1, -7], s=[0.75, 1.0, 1.25], tol=1e-4)
def check_i_infty_gamma(prm: dict, seed: int) -> Outcome:
    r = _int(prm["r"], "r", 6)
    ds = _discs(prm["D"])
    ss = _float_list(prm["s"])
    tol = _pos(prm["tol"], "tol")
    worst, witness, res = 0.0, None, {}
    for D in ds:
        out = arch.i_infty_gamma_check(r, ss, D)
        const = i_infty_constant(D)
        dev = max(abs(v / const - 1) for v in out["ratios"].values())
        res[str(D)] = {"ratios": out["ratios"], "relative_spread": out["relative_spread"],
                       "analytic_constant": const, "deviation_from_constant": dev}
        worst = max(worst, out["relative_spread"])
        if (out["relative_spread"] >= tol or dev >= tol) and witness is None:
            witness = {"D": D, **res[str(D)]}
    D0 = str(ds[0])
    return Outcome(witness is None, lhs=res[D0]["ratios"], rhs=res[D0]["analytic_constant"],
                   max_discrepancy=worst, witness=witness, details=res)


# ---------------------------------------------------------------------------
# the lattice sum

GAMMAS = {
    "inversion": arch.J4F,
    "translation": np.block([[np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]])], [np.zeros((2, 2)), np.eye(2)]]),
    "unit-translation": np.block([[np.eye(2), np.array([[1.0, 0.0], [0.0, 0.0]])],
                                  [np.zeros((2, 2)), np.eye(2)]]),
    "levi": np.block([[np.array([[1.0, 1.0], [0.0, 1.0]]), np.zeros((2, 2))],
                      [np.zeros((2, 2)), np.array([[1.0, 0.0], [-1.0, 1.0]])]]),
}


def _siegel_point(z) -> arch.SiegelPoint:
    """Z from [z11, z12, z22] with entries [re, im]."""
    if not isinstance(z, list) or len(z) != 3 or any(not isinstance(e, list) or len(e) != 2 for e in z):
        raise ParamError("Z must be [z11, z12, z22] with each entry [re, im]")
    c = [complex(e[0], e[1]) for e in z]
    Z = arch.SiegelPoint(np.array([[c[0], c[1]], [c[1], c[2]]]))
    if np.linalg.eigvalsh(Z.Y).min() <= 0:
        raise ParamError("Im Z must be positive definite")
    return Z


@register("pd-modularity", "P_D(gamma Z) j(gamma, Z)^-r against P_D(Z) within the tail bound",
          D=-1, r=10, Z=[[0, 2], [0, 0], [0, 2]], gamma="inversion", radius=12.0, tol=1e-3,
          convention=None)
def check_pd_modularity(prm: dict, seed: int) -> Outcome:
    D = _int(prm["D"], "D")
    if D >= 0:
        raise ParamError("D must be negative")
    QuadExtData(D)
    r = _int(prm["r"], "r", 6)
    Z = _siegel_point(prm["Z"])
    if prm["gamma"] not in GAMMAS:
        raise ParamError(f"gamma must be one of {sorted(GAMMAS)}")
    gamma = GAMMAS[prm["gamma"]]
    radius = _pos(prm["radius"], "radius")
    tol = _pos(prm["tol"], "tol")
    conv = prm["convention"]
    if conv not in (None, "generic", "scaled"):
        raise ParamError("convention must be null, 'generic' or 'scaled'")
    res = siegel.modularity_check(D, r, Z, gamma, radius, conv)
    transport = siegel.shell_transport_check(siegel.enumerate_shell(D, radius, conv), gamma)
    passed = res["rel_defect"] < tol and res["abs_defect"] <= res["allowed"] and transport["ok"]
    witness = None if passed else {"Z": prm["Z"], "gamma": prm["gamma"], **res, "transport": transport}
    return Outcome(passed, lhs=res["transformed"], rhs=res["value"], max_discrepancy=res["rel_defect"],
                   witness=witness, details={**res, "transport": transport,
                                             "convention": conv or siegel.default_convention(D)})


@register("shell-convention", "both D = 1 mod 4 shell conventions under integral translations",
          D=-7, r=10, Z=[[0.0, 1.0], [0.2, 0.0], [0.0, 0.8]], radius=[8.0, 16.0], gamma="unit-translation")
def check_shell_convention(prm: dict, seed: int) -> Outcome:
    D = _int(prm["D"], "D")
    if D >= 0:
        raise ParamError("D must be negative")
    QuadExtData(D)
    r = _int(prm["r"], "r", 6)
    Z = _siegel_point(prm["Z"])
    radii = sorted(_pos(x, "radius") for x in _float_list(prm["radius"]))
    if prm["gamma"] not in GAMMAS:
        raise ParamError(f"gamma must be one of {sorted(GAMMAS)}")
    gamma = GAMMAS[prm["gamma"]]
    res, witness = {}, None
    for conv in ("generic", "scaled"):
        entry = {"radii": radii, "values": [], "abs_defects": [], "allowed": []}
        for R in radii:
            m = siegel.modularity_check(D, r, Z, gamma, R, conv)
            entry["values"].append(m["value"])
            entry["abs_defects"].append(m["abs_defect"])
            entry["allowed"].append(m["allowed"])
        shell = siegel.enumerate_shell(D, radii[-1], conv)
        t = siegel.shell_transport_check(shell, gamma)
        entry.update(shell_size=len(shell), transport_ok=t["ok"],
                     q_values=sorted({siegel.q_of(row) for row in shell.coords}))
        res[conv] = entry
        ok = t["ok"] and all(d <= a for d, a in zip(entry["abs_defects"], entry["allowed"]))
        if not ok and witness is None:
            witness = {"convention": conv, **entry}
    return Outcome(witness is None, lhs=res["generic"]["values"][-1], rhs=res["scaled"]["values"][-1],
                   max_discrepancy=max(v["abs_defects"][-1] for v in res.values()), witness=witness,
                   details={**res, "default": siegel.default_convention(D)})


# ---------------------------------------------------------------------------

FLAG_KEYS = {"p": "p", "disc": "D", "order": "K", "weight": "r", "radius": "radius", "tol": "tol"}


def check_ids() -> list[str]:
    return list(REGISTRY)
