"""Black-box identity testing over indexable point sets, and the verification suites that
exercise every construction at desk scale."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Callable, Sequence

from . import linalg
from .field import Field, FieldError, smallest_prime_at_least
from .generators import (GridReducer, HittingSet, PointSet, certify_monomial_map,
                         commutative_generator, gen_to_hitting_set, hash_range, hashing_generator,
                         hplusfs_generator, ks_total_degree_map, pairwise_hash_family,
                         required_prime_bound, sv_generator, unknown_order_field_bound,
                         unknown_order_generator)
from .models import (DiagonalCircuit, MatrixRoabp, Roabp, Smabp, partial_derivative_dim,
                     random_model, smabp_to_roabp)
from .poly import (BudgetExceeded, PolyMap, SparsePoly, UniPoly, binom_vec, compose,
                   hasse_derivative, shift)
from .rank import (application_matrix, check_code_distance, coefficient_rank,
                   coefficient_vector, concentration_support, condense, dual_rs_parity,
                   is_rank_concentrated, isolating_family, lg_floor, monomial_grid,
                   partial_id, partial_id_valid, recipe_spec, support, transfer_matrix,
                   wronskian_rank)

GENERIC_RETRIES = 8
# prime used for generic-point checks (rank over F(t, s) instantiated at random points)
GENERIC_PRIME = (1 << 61) - 1


@dataclass
class PitVerdict:
    verdict: str  # "zero" or "nonzero"
    witness: list | None
    points_tried: int
    mode: str
    index: int | None = None

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness,
                "points_tried": self.points_tried, "mode": self.mode, "index": self.index}


def pit_blackbox(oracle: Callable[[list], int], hitting: PointSet, budget: int | None = None,
                 mode: str = "deterministic-hitting-set") -> PitVerdict:
    """Nonzero at the first point where the oracle is nonzero; zero only after the whole set.

    With a budget, raises BudgetExceeded instead of answering once that many points are spent.
    """
    tried = 0
    for i in range(hitting.size):
        if budget is not None and tried >= budget:
            raise BudgetExceeded(f"no witness among the first {budget} of {hitting.size} points")
        x = hitting.point(i)
        tried += 1
        if oracle(x) % hitting.field.p:
            return PitVerdict("nonzero", list(x), tried, mode, i)
    return PitVerdict("zero", None, tried, mode, None)


class GridSet(PointSet):
    """The product grid {0..d}^n: hits every nonzero polynomial of individual degree <= d."""

    def __init__(self, field: Field, n: int, d: int):
        if field.p < d + 1:
            raise FieldError(f"F_{field.p} has fewer than {d + 1} elements")
        self.field, self.n, self.d = field, n, d
        self.size = (d + 1) ** n

    def point(self, index: int) -> list[int]:
        if not 0 <= index < self.size:
            raise IndexError(index)
        out = [0] * self.n
        for v in range(self.n - 1, -1, -1):
            index, out[v] = divmod(index, self.d + 1)
        return out


def grid_oracle_set(field: Field, n: int, d: int) -> GridSet:
    return GridSet(field, n, d)


class RandomSet(PointSet):
    """Seeded uniform points (Schwartz-Zippel); a zero verdict is only probabilistic."""

    def __init__(self, field: Field, n: int, size: int, seed: int):
        self.field, self.n, self.size, self.seed = field, n, size, seed

    def point(self, index: int) -> list[int]:
        rng = random.Random(f"{self.seed}:{index}")
        return [rng.randrange(self.field.p) for _ in range(self.n)]


def random_trials(p: int, degree: int, eps_bits: int = 40) -> int:
    """Points needed for error <= 2^-eps_bits when each point errs with probability deg/p."""
    if degree <= 0:
        return 1
    if degree >= p:
        raise FieldError(f"F_{p} is too small for degree {degree} random testing")
    return max(1, math.ceil(eps_bits / math.log2(p / degree)))


def support_monomial_exists(f: SparsePoly, ell: int) -> bool:
    return any(support(a) <= ell for a in f.terms)


def model_oracle(model) -> Callable[[list], int]:
    if isinstance(model, MatrixRoabp):
        def oracle(x):
            return next((v for row in model.eval_matrix(x) for v in row if v), 0)
        return oracle
    return model


def model_arity(model) -> int:
    return model.nvars if isinstance(model, Smabp) else model.n


def hitting_set_for(model) -> HittingSet:
    """The theorem-backed hitting set for a model, in the model's own field.

    ROABPs (scalar or matrix) use the unknown-order generator, SMABPs go through their
    width-2r multilinear ROABP, diagonal circuits use the hashing pipeline with the grid
    reducer and the width bound sum(d_i + 1).
    """
    field = model.field
    if isinstance(model, (Roabp, MatrixRoabp)):
        g = _unknown_order(field.p, model.n, model.d, model.r)
        return gen_to_hitting_set(g, [model.d - 1] * model.n)
    if isinstance(model, Smabp):
        ro = smabp_to_roabp(model)
        g = _unknown_order(field.p, ro.n, ro.d, ro.r)
        return gen_to_hitting_set(g, [1] * ro.n)
    if isinstance(model, DiagonalCircuit):
        deg = model.degree
        width = sum(k + 1 for _, k in model.terms) or 1
        g = hplusfs_generator(field, model.n, deg + 1, width, max(1, lg_floor(width)), GridReducer())
        return gen_to_hitting_set(g, [deg] * model.n)
    raise TypeError(f"no hitting set for {type(model).__name__}")


def pit(model, mode: str = "grid", seed: int | None = None, budget: int | None = None) -> PitVerdict:
    oracle = model_oracle(model)
    n = model_arity(model)
    field = model.field
    if mode == "grid":
        d = _ind_degree_bound(model)
        return pit_blackbox(oracle, grid_oracle_set(field, n, d), budget, "grid-oracle")
    if mode == "hitting":
        return pit_blackbox(oracle, hitting_set_for(model), budget)
    if mode == "random":
        if seed is None:
            raise ValueError("random mode needs an explicit seed")
        deg = _total_degree_bound(model)
        pts = RandomSet(field, n, random_trials(field.p, deg), seed)
        return pit_blackbox(oracle, pts, budget, "randomized")
    raise ValueError(f"unknown mode {mode!r}")


def _ind_degree_bound(model) -> int:
    if isinstance(model, (Roabp, MatrixRoabp)):
        return model.d - 1
    if isinstance(model, Smabp):
        return 1
    return model.degree


def _total_degree_bound(model) -> int:
    if isinstance(model, (Roabp, MatrixRoabp)):
        return model.n * (model.d - 1)
    if isinstance(model, Smabp):
        return model.d
    return model.degree


@lru_cache(maxsize=32)
def _unknown_order(p: int, N: int, d: int, r: int, with_sv: bool = True):
    return unknown_order_generator(Field(p), N, d, r, with_sv)


# ---------------------------------------------------------------------------------------------
# verification suites


@dataclass
class SuiteReport:
    suite: str
    cases: int
    failures: list
    params: dict
    seed: int
    elapsed: float = 0.0
    retries: int = 0
    notes: list = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "cases": self.cases,
                "failures": self.failures, "params": self.params, "seed": self.seed,
                "elapsed_s": round(self.elapsed, 3), "generic_retries": self.retries,
                "notes": self.notes}


class ParameterError(ValueError):
    pass


@dataclass
class Suite:
    name: str
    cases: Callable  # (params, trials, seed) -> list of JSON-able case keys
    run: Callable  # (key, params) -> (ok, detail, retries)
    defaults: dict
    trials: int
    generic: bool
    capped: bool = True  # desk-scale caps guard suites that expand multivariate polynomials


SUITES: dict[str, Suite] = {}
CAPS = {"max_n": 6, "max_r": 4, "max_d": 4}


def _suite(name: str, defaults: dict, trials: int = 0, generic: bool = False, capped: bool = True):
    def wrap(cls):
        SUITES[name] = Suite(name, cls.cases, cls.run, defaults, trials, generic, capped)
        return cls
    return wrap


def _seeded_cases(name: str, trials: int, seed: int) -> list:
    return [{"case": i, "seed": f"{name}:{seed}:{i}"} for i in range(trials)]


def _generic(check: Callable[[random.Random], tuple], key_seed: str) -> tuple:
    """Run a generic-point check with up to GENERIC_RETRIES fresh points."""
    detail = None
    for attempt in range(GENERIC_RETRIES):
        ok, detail = check(random.Random(f"{key_seed}#{attempt}"))
        if ok:
            return True, detail, attempt
    return False, detail, GENERIC_RETRIES


def _rand_poly(rng: random.Random, field: Field, n: int, d: int, density: float = 0.5,
               allowed=None) -> SparsePoly:
    terms = {}
    for a in product(range(d), repeat=n):
        if allowed is not None and not allowed(a):
            continue
        if rng.random() < density:
            terms[a] = rng.randrange(field.p)
    return SparsePoly(field, n, terms)


def _rand_unipoly(rng: random.Random, field: Field, d: int) -> UniPoly:
    return UniPoly(field, [rng.randrange(field.p) for _ in range(rng.randint(0, d) + 1)])


@_suite("transfer", {"primes": [101, 2], "max_n": 3, "max_d": 4}, trials=500)
class _Transfer:
    """Shift/transfer identities, Hasse composition laws, T(a) T(-a) = I."""

    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("transfer", trials, seed)

    @staticmethod
    def run(key, params):
        rng = random.Random(key["seed"])
        p = params["primes"][key["case"] % len(params["primes"])]
        F = Field(p)
        n = rng.randint(1, params["max_n"])
        d = rng.randint(1, params["max_d"])
        f = _rand_poly(rng, F, n, d)
        alpha = [rng.randrange(p) for _ in range(n)]
        a = tuple(rng.randrange(d) for _ in range(n))
        b = tuple(rng.randrange(d) for _ in range(n))
        bad = []
        # coefficient vector of f(x + alpha) = T(alpha) times that of f
        T = transfer_matrix(F, n, d, "all", alpha)
        cv = coefficient_vector(f, d)
        lhs = coefficient_vector(shift(f, alpha), d)
        if lhs != [sum(x * y for x, y in zip(row, cv)) % p for row in T]:
            bad.append("transfer")
        # coefficient of x^a in f(x + t) is the Hasse derivative d_{x^a} f at t
        sym = shift(f)
        coeff_in_t = {}
        for e, c in sym.terms.items():
            if e[:n] == a:
                coeff_in_t[e[n:]] = c
        if SparsePoly(F, n, coeff_in_t) != hasse_derivative(f, a):
            bad.append("hasse-shift")
        # d_{x^a} d_{x^b} = binom(a + b, a) d_{x^{a+b}}
        ab = tuple(x + y for x, y in zip(a, b))
        if hasse_derivative(hasse_derivative(f, b), a) != hasse_derivative(f, ab).scale(binom_vec(ab, a, p)):
            bad.append("hasse-compose")
        # disjoint blocks: derivative in x1 then in the rest equals the joint derivative
        if n >= 2:
            a1 = (a[0],) + (0,) * (n - 1)
            a2 = (0,) + a[1:]
            if hasse_derivative(hasse_derivative(f, a1), a2) != hasse_derivative(f, a):
                bad.append("hasse-blocks")
        if shift(shift(f, alpha), [-x for x in alpha]) != f:
            bad.append("shift-inverse")
        Tm = transfer_matrix(F, n, d, "all", [-x for x in alpha])
        if _matmul_mod(T, Tm, p) != linalg.identity(len(T)):
            bad.append("T(a)T(-a)")
        return not bad, {"p": p, "n": n, "d": d, "failed": bad}, 0


def _matmul_mod(A, B, p):
    import numpy as np
    if len(A) * p * p < (1 << 62):
        return (np.array(A, dtype=np.int64) @ np.array(B, dtype=np.int64) % p).tolist()
    return linalg.matmul(A, B, p)


@_suite("code", {"instances": [[2, 2, 2], [2, 3, 2], [3, 2, 2], [2, 2, 3]], "p": 101}, capped=False)
class _Code:
    """Every r columns of T_r(1) are independent."""

    @staticmethod
    def cases(params, trials, seed):
        return [{"n": n, "d": d, "r": r} for n, d, r in params["instances"]]

    @staticmethod
    def run(key, params):
        F = Field(params["p"])
        n, d, r = key["n"], key["d"], key["r"]
        H = transfer_matrix(F, n, d, ("rank", r), [1] * n)
        ok = check_code_distance(H, r, F.p)
        return ok, {"rows": len(H), "cols": len(H[0]), "subsets": math.comb(len(H[0]), r)}, 0


@_suite("condenser", {"p": 101, "max_r": 3, "max_m": 8}, trials=200, capped=False)
class _Condenser:
    """Dual-RS rank condensers preserve rank at some cube point; the negative control with a
    repeated weight on an adversarial matrix loses rank at every point."""

    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("condenser", trials, seed) + [{"control": True}]

    @staticmethod
    def run(key, params):
        F = Field(params["p"])
        if key.get("control"):
            return _Condenser.control(F)
        rng = random.Random(key["seed"])
        r = rng.randint(1, params["max_r"])
        m = rng.randint(r, params["max_m"])
        k = rng.randint(1, 4)
        H = dual_rs_parity(F, r, m)
        spec = recipe_spec(F, H, r)
        if not spec.code_ok() or not spec.weights_distinct():
            return False, {"error": "spec violates the recipe hypotheses"}, 0
        s = rng.randint(0, r)
        A = [[rng.randrange(F.p) for _ in range(s)] for _ in range(m)]
        B = [[rng.randrange(F.p) for _ in range(k)] for _ in range(s)]
        M = linalg.matmul(A, B, F.p) if s else [[0] * k for _ in range(m)]
        rep = condense(spec, M)
        return rep.preserved, {"r": r, "m": m, **rep.to_json()}, 0

    @staticmethod
    def control(F):
        r, m = 2, 4
        H = dual_rs_parity(F, r, m)
        v = linalg.nullspace(H, F.p)[0]
        M = [[x] for x in v]
        same = recipe_spec(F, H, r, weights=[(1,)] * m)
        distinct = recipe_spec(F, H, r)
        lost = condense(same, M)
        kept = condense(distinct, M)
        ok = (not same.weights_distinct()) and not lost.preserved and kept.preserved
        return ok, {"control": True, "repeated": lost.to_json(), "distinct": kept.to_json()}, 0


@_suite("wronskian", {"p": 101, "max_r": 4, "max_d": 5}, trials=200, capped=False)
class _Wronskian:
    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("wronskian", trials, seed)

    @staticmethod
    def run(key, params):
        rng = random.Random(key["seed"])
        F = Field(params["p"])
        r = rng.randint(1, params["max_r"])
        d = rng.randint(1, params["max_d"])
        if F.p <= r * d:
            raise ParameterError(f"need p > r*d = {r * d}")
        fs = [_rand_unipoly(rng, F, d) for _ in range(r)]
        if r >= 2 and rng.random() < 0.4:
            # force a dependency
            c = [rng.randrange(F.p) for _ in range(r - 1)]
            acc = UniPoly(F, [])
            for ci, f in zip(c, fs):
                acc = acc + f * ci
            fs[-1] = acc
        w, c = wronskian_rank(fs), coefficient_rank(fs)
        return w == c, {"r": r, "d": d, "wronskian": w, "coefficient": c}, 0


@_suite("isolating", {"primes": [2, 3, 101], "max_n": 3, "max_size": 4, "d": 3}, capped=False)
class _Isolating:
    """Application matrix of the isolating family is unit lower triangular under pi."""

    @staticmethod
    def cases(params, trials, seed):
        out = []
        for p in params["primes"]:
            for n in range(1, params["max_n"] + 1):
                out.append({"p": p, "n": n})
        return out

    @staticmethod
    def run(key, params):
        F = Field(key["p"])
        d = params["d"]
        monos = list(product(range(d), repeat=key["n"]))
        checked = 0
        for size in range(1, params["max_size"] + 1):
            for S in combinations(monos, size):
                pi, ops = isolating_family(F, S, d)
                A = application_matrix(ops, S, pi)
                checked += 1
                for i in range(size):
                    if A[i][i] != 1 or any(A[i][j] for j in range(i)):
                        return False, {"monomials": [list(b) for b in S], "matrix": A}, 0
                    if len(ops[i].variables()) > lg_floor(i + 1):
                        return False, {"monomials": [list(b) for b in S], "op": i}, 0
        return True, {"sets": checked}, 0


@_suite("partial-id", {"max_n": 6, "max_r": 8, "crosscheck_n": 3, "sample": 300}, capped=False)
class _PartialId:
    """Exhaustive over binary families via the bitmask kernel, plus kernel/generic agreement."""

    @staticmethod
    def cases(params, trials, seed):
        out = []
        for n in range(1, params["max_n"] + 1):
            for r in range(1, min(params["max_r"], 1 << n) + 1):
                out.append({"n": n, "r": r})
        out.append({"crosscheck": True, "seed": f"partial-id:{seed}:x"})
        return out

    @staticmethod
    def run(key, params):
        from . import _pidkernel
        if not key.get("crosscheck"):
            count, bad, first = _pidkernel.exhaustive(key["n"], key["r"])
            return bad == 0, {"families": count, "bad": bad,
                              "first_bad": [v for v in range(1 << key["n"]) if first >> v & 1]}, 0
        checked = 0
        for n in range(1, params["crosscheck_n"] + 1):
            for r in range(1, min(params["max_r"], 1 << n) + 1):
                for fam in combinations(range(1 << n), r):
                    checked += 1
                    if not _PartialId.agree(fam, n):
                        return False, {"family": list(fam), "n": n}, 0
        rng = random.Random(key["seed"])
        for n in range(params["crosscheck_n"] + 1, params["max_n"] + 1):
            for _ in range(params["sample"]):
                r = rng.randint(1, params["max_r"])
                fam = sorted(rng.sample(range(1 << n), r))
                checked += 1
                if not _PartialId.agree(fam, n):
                    return False, {"family": fam, "n": n}, 0
        return True, {"crosschecked": checked}, 0

    @staticmethod
    def agree(fam, n):
        from . import _pidkernel
        strings = [tuple(v >> c & 1 for c in range(n)) for v in fam]
        i0, S = partial_id(strings)
        if not partial_id_valid(strings, i0, S):
            return False
        v0, S2 = _pidkernel.solve_family(fam, n)
        return v0 == fam[i0] and S2 == S


def _commutative_instance(rng: random.Random, F: Field, n: int, d: int, r: int, sparse: bool) -> Roabp:
    order = list(range(n))
    rng.shuffle(order)
    layers = []
    for _ in range(n):
        L = [[() for _ in range(r)] for _ in range(r)]
        for a in range(r):
            L[a][a] = tuple((rng.randrange(F.p) if not sparse or rng.random() < 0.5 else 0)
                            for _ in range(d))
        layers.append(L)
    left = tuple(rng.randrange(F.p) for _ in range(r))
    right = tuple(rng.randrange(F.p) for _ in range(r))
    return Roabp(F, n, d, r, tuple(order), tuple(layers), left, right, commutative=True)


@_suite("commutative", {"p": 1000003, "max_n": 4, "max_d": 3, "max_r": 2, "budget": 200000},
        trials=200, generic=True)
class _Commutative:
    """SV-shifted support-floor(lg r^2) concentration of diagonal-layer commutative ROABPs, and
    a witness in the commutative hitting set for every nonzero instance."""

    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("commutative", trials, seed)

    @staticmethod
    def run(key, params):
        rng = random.Random(key["seed"])
        F = Field(params["p"])
        n = rng.randint(1, params["max_n"])
        d = rng.randint(2, params["max_d"])
        r = rng.randint(1, params["max_r"])
        sparse = key["case"] % 2 == 1
        m = _commutative_instance(rng, F, n, d, r, sparse)
        ell = lg_floor(r * r)
        fvec = [e for row in m.matrix.expand() for e in row]
        g = sv_generator(F, n, ell + 1)

        def check(prng):
            alpha = g.evaluate(g.sample_point(prng))
            return is_rank_concentrated(fvec, ell, alpha, d), {"alpha": alpha}
        ok, detail, retries = _generic(check, key["seed"])
        info = {"n": n, "d": d, "r": r, "sparse": sparse, "concentrated": ok}
        f = m.expand()
        if f.is_zero():
            info["zero_instance"] = True
            return ok, info, retries
        H = gen_to_hitting_set(commutative_generator(F, n, d, r), [d - 1] * n)
        try:
            v = pit_blackbox(m, H, params["budget"])
        except BudgetExceeded as e:
            return False, {**info, "hitting": str(e)}, retries
        info.update(witness_index=v.index, hitting_size=H.size)
        return ok and v.verdict == "nonzero", info, retries


def _sparse_roabp(rng: random.Random, F: Field, n: int, d: int, r: int, density: float) -> Roabp:
    order = list(range(n))
    rng.shuffle(order)

    def entry():
        return tuple(rng.randrange(1, F.p) if rng.random() < density else 0 for _ in range(d))
    layers = [[[entry() for _ in range(r)] for _ in range(r)] for _ in range(n)]
    left = tuple(rng.randrange(F.p) if rng.random() < density else 0 for _ in range(r))
    right = tuple(rng.randrange(F.p) if rng.random() < density else 0 for _ in range(r))
    return Roabp(F, n, d, r, tuple(order), tuple(layers), left, right)


@_suite("unknown-order", {"N": 4, "d": 2, "r": 2, "all_orders": True, "budget": 200000,
                          "corrupt": False}, trials=100)
class _UnknownOrder:
    """The unknown-order hitting set finds a witness for nonzero ROABPs under every order,
    agreeing with the grid oracle. corrupt=True drops the SV part (expected to fail)."""

    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("unknown-order", trials, seed)

    @staticmethod
    def run(key, params):
        rng = random.Random(key["seed"])
        d = params["d"]
        if params["corrupt"]:
            # r = 4 without the SV part; N <= 2 keeps the KS base at desk scale
            N = 1 if key["case"] % 2 == 0 else 2
            r = 4
        else:
            N, r = params["N"], params["r"]
        P = smallest_prime_at_least(unknown_order_field_bound(N, d, r))
        F = Field(P)
        g = _unknown_order(P, N, d, r, not params["corrupt"])
        H = gen_to_hitting_set(g, [d - 1] * N)
        grid = grid_oracle_set(F, N, d - 1)
        for _ in range(64):
            density = 1.0 if key["case"] % 2 == 0 else 0.5
            m = _sparse_roabp(rng, F, N, d, r, density)
            if N == 1 and params["corrupt"]:
                # f = x1, a width-1 ROABP
                m = Roabp(F, 1, 2, 1, (0,), ((((0, 1),),),), (1,), (1,))
            if not m.expand().is_zero():
                break
        else:
            return False, {"error": "no nonzero instance sampled"}, 0
        orders = list(permutations(range(N))) if params["all_orders"] else [tuple(m.order)]
        worst = 0
        for order in orders:
            mo = m.with_order(order)
            ref = pit_blackbox(mo, grid, None, "grid-oracle")
            try:
                v = pit_blackbox(mo, H, params["budget"])
            except BudgetExceeded:
                v = PitVerdict("zero", None, params["budget"], "budget-exhausted")
            worst = max(worst, v.points_tried)
            if v.verdict != "nonzero" or ref.verdict != "nonzero":
                return False, {"N": N, "r": r, "order": list(order), "hitting": v.to_json(),
                               "grid": ref.to_json(), "p": P}, 0
        return True, {"N": N, "r": r, "orders": len(orders), "max_points": worst, "p": P}, 0


@_suite("hashing", {"p": 10007, "min_n": 3, "max_n": 5, "max_d": 3, "max_r": 2, "ell": 2},
        trials=50)
class _Hashing:
    """f o G^H(y, y^(d n^2), eta_h) at a good hash member h: nonzero, and equal to the
    expansion of the reconstructed m-variable ROABP with layers M'_j."""

    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("hashing", trials, seed)

    @staticmethod
    def instance(rng, F, n, d, r, S):
        # diagonal layers; variables in S get a zero constant term so every monomial
        # contains all of S, and the minimal-support monomials have support exactly S
        for _ in range(200):
            layers = []
            for v in range(n):
                L = [[() for _ in range(r)] for _ in range(r)]
                for a in range(r):
                    cs = [rng.randrange(F.p) for _ in range(d)]
                    if v in S:
                        cs[0] = 0
                    L[a][a] = tuple(cs)
                layers.append(L)
            left = tuple(rng.randrange(1, F.p) for _ in range(r))
            right = tuple(rng.randrange(1, F.p) for _ in range(r))
            m = Roabp(F, n, d, r, tuple(range(n)), tuple(layers), left, right, commutative=True)
            f = m.expand()
            if any(set(i for i, e in enumerate(a) if e) == set(S) for a in f.terms):
                return m, f
        raise ArithmeticError("could not plant a support-|S| monomial")

    @staticmethod
    def run(key, params):
        from .field import lagrange_indicator
        rng = random.Random(key["seed"])
        F = Field(params["p"])
        p = F.p
        n = rng.randint(params["min_n"], params["max_n"])
        d = rng.randint(2, params["max_d"])
        r = rng.randint(1, params["max_r"])
        ell = params["ell"]
        S = sorted(rng.sample(range(n), rng.randint(1, ell)))
        m_roabp, f = _Hashing.instance(rng, F, n, d, r, S)
        fam = pairwise_hash_family(n, ell)
        m = hash_range(ell)
        gh = hashing_generator(F, n, m, ell, fam)
        h = fam.good_member(S)
        D = d * n * n
        # f o G^H with u <- eta_h, then z_j <- y_j^D
        spec = gh.specialize({2 * m: h})
        comps = []
        for c in spec.materialize():
            terms = {}
            for a, v in c.terms.items():
                k = tuple(a[j] + D * a[m + j] for j in range(m))
                terms[k] = (terms.get(k, 0) + v) % p
            comps.append(SparsePoly(F, m, terms))
        lhs = compose(f, PolyMap(m, tuple(comps)))
        if lhs.is_zero():
            return False, {"n": n, "S": S, "h": h, "error": "f o G^H vanished"}, 0
        # x_k <- L_k(y^D) y on the bucket variable of k (SV with l = 1 at z = y^D)
        nodes = F.elements(n + 1)
        phi = []
        for k in range(n):
            L = lagrange_indicator(F, nodes, k + 1)
            yD = UniPoly(F, [0] * D + [1])
            phi.append(L.compose(yD) * UniPoly.x(F))
        pi = list(range(m))
        rng.shuffle(pi)
        pos = {b: j for j, b in enumerate(pi)}
        sigma = sorted(range(n), key=lambda v: (pos[fam(h, v)], v))
        layer_of = {v: i for i, v in enumerate(m_roabp.order)}
        new_layers = []
        for j in range(m):
            prod_m = [[UniPoly(F, [int(a == b)]) for b in range(r)] for a in range(r)]
            for v in sigma:
                if fam(h, v) != pi[j]:
                    continue
                Lv = m_roabp.layers[layer_of[v]]
                Mv = [[UniPoly(F, e).compose(phi[v]) for e in row] for row in Lv]
                prod_m = [[sum((prod_m[a][c] * Mv[c][b] for c in range(r)), UniPoly(F, []))
                           for b in range(r)] for a in range(r)]
            new_layers.append(prod_m)
        dprime = max(max((e.degree for row in Lj for e in row), default=0) for Lj in new_layers) + 1
        if dprime > d * d * n ** 4:
            return False, {"error": f"layer degree {dprime - 1} not < d^2 n^4"}, 0
        # sparse expansion of left * prod_j M'_j(y_{pi(j)}) * right (a dense one is too large)
        row = [SparsePoly.const(F, m, c) for c in m_roabp.left]
        for j, Lj in enumerate(new_layers):
            Mj = [[SparsePoly(F, m, {tuple(k if i == pi[j] else 0 for i in range(m)): c
                                     for k, c in enumerate(e.coeffs) if c}) for e in er] for er in Lj]
            row = [sum((row[a] * Mj[a][b] for a in range(r)), SparsePoly.zero(F, m))
                   for b in range(r)]
        rhs = sum((v.scale(c) for v, c in zip(row, m_roabp.right)), SparsePoly.zero(F, m))
        return lhs == rhs, {"n": n, "d": d, "r": r, "S": S, "h": h, "m": m, "terms": len(lhs)}, 0


@_suite("concentration", {"p": GENERIC_PRIME, "max_n": 3, "max_d": 3, "max_r": 4}, trials=60,
        generic=True)
class _Concentration:
    """Three checks rotating by case: shift by an n-wise map (support floor(lg r)), the merge
    step (support l + k at the joined point) and the known-basis reduce step."""

    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("concentration", trials, seed)

    @staticmethod
    def run(key, params):
        kind = ("shift", "merge", "known-basis")[key["case"] % 3]
        return getattr(_Concentration, kind.replace("-", "_"))(key, params)

    @staticmethod
    def shift(key, params):
        rng = random.Random(key["seed"])
        F = Field(params["p"])
        n = rng.randint(1, params["max_n"])
        d = rng.randint(2, params["max_d"])
        r = rng.randint(1, params["max_r"])
        fvec = [_rand_poly(rng, F, n, d, 0.6) for _ in range(r)]
        g = sv_generator(F, n, n)
        if not certify_monomial_map(g, "ell-wise", d, ell=n):
            return False, {"error": "SV map failed certification"}, 0

        def check(prng):
            alpha = g.evaluate(g.sample_point(prng))
            return is_rank_concentrated(fvec, lg_floor(r), alpha, d), {}
        ok, detail, retries = _generic(check, key["seed"])
        return ok, {"check": "shift", "n": n, "d": d, "r": r}, retries

    @staticmethod
    def merge(key, params):
        rng = random.Random(key["seed"])
        F = Field(params["p"])
        n1, n2 = rng.randint(1, 2), rng.randint(1, 2)
        d = rng.randint(2, params["max_d"])
        r = rng.randint(1, 2)
        A = random_model("matrix-roabp", n1, d, r, rng.randrange(1 << 30), F)
        B = random_model("matrix-roabp", n2, d, r, rng.randrange(1 << 30), F)
        small = [0, 1]
        alpha = [rng.choice(small) for _ in range(n1)]
        beta = [rng.choice(small) for _ in range(n2)]
        FA, FB = A.expand(), B.expand()
        fa = [e for row in FA for e in row]
        fb = [e for row in FB for e in row]
        la = concentration_support(fa, alpha, d)
        lb = concentration_support(fb, beta, d)
        n = n1 + n2
        FA2 = [[e.embed(n, range(n1)) for e in row] for row in FA]
        FB2 = [[e.embed(n, range(n1, n)) for e in row] for row in FB]
        prod_m = [[sum((FA2[a][c] * FB2[c][b] for c in range(r)), SparsePoly.zero(F, n))
                   for b in range(r)] for a in range(r)]
        ok = is_rank_concentrated([e for row in prod_m for e in row], la + lb, alpha + beta, d)
        return ok, {"check": "merge", "ell": la, "k": lb}, 0

    @staticmethod
    def known_basis(key, params):
        rng = random.Random(key["seed"])
        F = Field(params["p"])
        n = rng.randint(2, params["max_n"])
        d = rng.randint(2, params["max_d"])
        r = rng.randint(1, params["max_r"])
        ell = rng.randint(1, n - 1)
        fvec = [_rand_poly(rng, F, n, d, 0.7, lambda a: support(a) <= ell) for _ in range(r)]
        zero = [0] * n
        if not is_rank_concentrated(fvec, ell, zero, d):
            return False, {"error": "start point not concentrated"}, 0
        g = ks_total_degree_map(F, n, d * ell)

        def check(prng):
            u = prng.randrange(F.p)
            pt = [prng.randrange(F.p) for _ in g.t_block] + [
                prng.randrange(g.s_nodes[v]) for v in g.s_block]
            alpha = [u * x % F.p for x in g.evaluate(pt)]
            return is_rank_concentrated(fvec, lg_floor(r), alpha, d), {}
        ok, detail, retries = _generic(check, key["seed"])
        return ok, {"check": "known-basis", "n": n, "d": d, "r": r, "ell": ell,
                    "ks_modulus": g.q}, retries


@_suite("smabp", {"p": 101, "max_n": 3, "max_d": 3, "max_r": 3}, trials=50)
class _Smabp:
    """The width-2r ROABP conversion expands to the SMABP's polynomial."""

    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("smabp", trials, seed)

    @staticmethod
    def run(key, params):
        rng = random.Random(key["seed"])
        F = Field(params["p"])
        n = rng.randint(1, params["max_n"])
        d = rng.randint(1, params["max_d"])
        r = rng.randint(1, params["max_r"])
        s = random_model("smabp", n, d, r, rng.randrange(1 << 30), F)
        ro = smabp_to_roabp(s)
        ok = ro.expand() == s.expand() and ro.r == 2 * r and ro.d == 2
        return ok, {"n": n, "d": d, "r": r}, 0


@_suite("diagonal", {"p": 1000003, "max_n": 5, "max_d": 4, "max_s": 4, "budget": 100000},
        trials=100)
class _Diagonal:
    """Nonzero diagonal circuits have a nonzero monomial of support <= floor(lg dim), and the
    hashing pipeline with the grid reducer finds a witness."""

    @staticmethod
    def cases(params, trials, seed):
        return _seeded_cases("diagonal", trials, seed)

    @staticmethod
    def run(key, params):
        rng = random.Random(key["seed"])
        n = rng.randint(1, params["max_n"])
        d = rng.randint(1, params["max_d"])
        s = rng.randint(1, params["max_s"])
        F = Field(params["p"])
        for _ in range(64):
            terms = []
            for _ in range(s):
                cs = [rng.randrange(F.p) if rng.random() < 0.6 else 0 for _ in range(n + 1)]
                terms.append((tuple(cs), rng.randint(1, d)))
            c = DiagonalCircuit(F, n, tuple(terms))
            f = c.expand()
            if not f.is_zero():
                break
        else:
            return False, {"error": "no nonzero instance sampled"}, 0
        dim = partial_derivative_dim(f)
        ell = lg_floor(dim)
        info = {"n": n, "d": d, "s": s, "dim": dim, "ell": ell}
        if not support_monomial_exists(f, ell):
            return False, {**info, "error": "no small-support monomial"}, 0
        deg = c.degree
        g = hplusfs_generator(F, n, deg + 1, dim, max(1, ell), GridReducer())
        bounds = [deg] * n
        need = required_prime_bound(g, bounds)
        if need > F.p:
            F = Field(smallest_prime_at_least(need))
            c = DiagonalCircuit(F, n, c.terms)
            g = hplusfs_generator(F, n, deg + 1, dim, max(1, ell), GridReducer())
        H = gen_to_hitting_set(g, bounds)
        try:
            v = pit_blackbox(c, H, params["budget"])
        except BudgetExceeded as e:
            return False, {**info, "error": str(e)}, 0
        return v.verdict == "nonzero", {**info, "witness_index": v.index}, 0


def size_oracle(kind: str, n: int, d: int, r: int, field: Field, g=None) -> int:
    """Hitting-set size from closed-form per-seed degrees (f of individual degree < d)."""
    b = n * (d - 1)  # sum of the individual degree bounds
    if kind == "commutative":
        ell = 1 + 2 * lg_floor(r * r)
        return (b + 1) ** ell * (n * b + 1) ** ell
    if kind == "unknown-order":
        Np = 1 << (n - 1).bit_length()
        copies = lg_floor(Np)
        q = _unknown_order(field.p, n, d, r).certificate["ks_modulus"]
        ell = lg_floor(r * r) + 1
        # SV components beyond n are projected away, but their z-degree is still Np
        return (b + 1) ** copies * ((q - 1) * b + 1) ** (2 * copies) * (b + 1) ** ell * (Np * b + 1) ** ell
    if kind == "hplusfs":
        # scan the materialized components directly
        comps = g.materialize()
        size = 1
        for v in range(len(g.seeds)):
            Dv = sum((d - 1) * max((a[v] for a in c.terms), default=0) for c in comps)
            size *= Dv + 1
        return size
    raise ValueError(kind)


@_suite("size", {"commutative": [[4, 3, 2], [2, 2, 1], [3, 2, 2]],
                 "unknown-order": [[4, 2, 2], [2, 2, 1], [3, 2, 2]],
                 "hplusfs": [[5, 5, 4], [3, 2, 2]], "p": 1000003})
class _Size:
    """Reported sizes equal the product of per-seed (degree + 1) computed independently, and are
    monotone in n, d, r."""

    @staticmethod
    def cases(params, trials, seed):
        out = [{"kind": k, "ndr": list(t)} for k in ("commutative", "unknown-order", "hplusfs")
               for t in params[k]]
        out.append({"monotone": True})
        return out

    @staticmethod
    def build(kind, n, d, r, p):
        if kind == "commutative":
            F = Field(p)
            g = commutative_generator(F, n, d, r)
        elif kind == "unknown-order":
            P = smallest_prime_at_least(unknown_order_field_bound(n, d, r))
            F = Field(P)
            g = _unknown_order(P, n, d, r)
        else:
            F = Field(p)
            ell = max(1, lg_floor(r))
            g = hplusfs_generator(F, n, d, r, ell, GridReducer())
        return F, g, gen_to_hitting_set(g, [d - 1] * n)

    @staticmethod
    def run(key, params):
        if key.get("monotone"):
            return _Size.monotone(params)
        kind, (n, d, r) = key["kind"], key["ndr"]
        F, g, H = _Size.build(kind, n, d, r, params["p"])
        expect = size_oracle(kind, n, d, r, F, g)
        return H.size == expect, {"kind": kind, "n": n, "d": d, "r": r, "size": str(H.size),
                                  "oracle": str(expect)}, 0

    @staticmethod
    def monotone(params):
        p = params["p"]
        bad = []
        base = (2, 2, 1)
        for kind in ("commutative", "hplusfs"):
            for axis in range(3):
                sizes = []
                for k in range(3):
                    ndr = list(base)
                    ndr[axis] += k
                    sizes.append(_Size.build(kind, *ndr, p)[2].size)
                if any(a > b for a, b in zip(sizes, sizes[1:])):
                    bad.append({"kind": kind, "axis": "ndr"[axis], "sizes": [str(s) for s in sizes]})
        return not bad, {"violations": bad}, 0


def _check_caps(name: str, params: dict, override: bool):
    if override or not SUITES[name].capped:
        return
    for cap, limit in CAPS.items():
        for k in (cap, cap.replace("max_", "")):
            v = params.get(k)
            if isinstance(v, int) and not isinstance(v, bool) and v > limit:
                raise ParameterError(f"{name}: {k}={v} exceeds the desk-scale cap {limit} "
                                     "(pass override to allow)")


def suite_params(suite: str, params: dict | None = None) -> dict:
    if suite not in SUITES:
        raise ParameterError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    out = dict(SUITES[suite].defaults)
    out.update(params or {})
    return out


def verify_theorem(suite: str, params: dict | None = None, trials: int | None = None,
                   seed: int = 0, override: bool = False) -> SuiteReport:
    """Run one suite; every failure record carries the case key that replays it."""
    full = suite_params(suite, params)
    _check_caps(suite, params or {}, override)
    s = SUITES[suite]
    t0 = time.perf_counter()
    keys = s.cases(full, trials if trials is not None else s.trials, seed)
    failures, retries = [], 0
    for key in keys:
        ok, detail, used = s.run(key, full)
        retries += used
        if not ok:
            failures.append({"case": key, "detail": detail})
    report = SuiteReport(suite, len(keys), failures, full, seed, time.perf_counter() - t0, retries)
    if s.generic:
        report.notes.append(f"generic-point checks retried up to {GENERIC_RETRIES} times")
    if suite == "commutative":
        report.notes.append("instances are diagonal-layer commutative ROABPs (a stand-in sampler)")
    return report


def replay(suite: str, failure: dict, params: dict | None = None) -> tuple:
    """Re-run a single case from a failure record: (ok, detail, retries)."""
    full = suite_params(suite, params)
    return SUITES[suite].run(failure["case"], full)
