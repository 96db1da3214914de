"""Production coefficient engines for spin-decorated triangulation series.

All engines share the boundary-word convention of `maps.combmap`: the word
w_1..w_p lists the root-face vertex spins starting at the target of the root
edge and walking away from the root vertex, so the root edge joins w_p (root
vertex) to w_1 (target).  Under this reading the mixed Dobrushin series
S(x, y) = sum_{p,q >= 1} Z_{+^p -^q} x^p y^q (rooted on the interface edge)
and the pure series Z+(x) = sum_p Z_{+^p} x^p close under peeling the root
edge, which is the system iterated by `solve_dobrushin`.  The specializations
[y] S(x, y) and [x] S(x, y) enter exactly as resolved in CONVENTIONS.md: the
system reproduces the brute-force oracle through every tested order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import Scalar, as_scalar, format_scalar
from .maps import min_degree, oracle_Q
from .series import (
    BivSeries,
    FixedPointSpec,
    NotContractive,
    TSeries,
    solve_fixed_point,
    tseries_from_biv,
)


class SeedMissing(KeyError):
    """Length-1/2 boundary series requested before solve_dobrushin ran."""


def _inv(s: Scalar) -> Scalar:
    return as_scalar(Fraction(1)) / s if not isinstance(s, Fraction) else Fraction(1) / s


# ---------------------------------------------------------------------------
# the Dobrushin system: mixed words +^p -^q with two catalytic variables
# ---------------------------------------------------------------------------

@dataclass
class DobrushinTable:
    """Joint solution of the two peeling equations, with extracted slices."""

    nu: Scalar
    order: int
    mixed: BivSeries          # S(x, y): words +^p -^q with p, q >= 1
    zplus: BivSeries          # Z+(x): pure words +^p, stored at y-degree 0
    z_plus: TSeries = field(init=False)        # Z_+  = [x] Z+(x)
    z_plusplus: TSeries = field(init=False)    # Z_++ = [x^2] Z+(x)
    z_plusminus: TSeries = field(init=False)   # Z_+- = [x y] S(x, y)

    def __post_init__(self) -> None:
        self.z_plus = self.zplus.extract_tseries(1, 0)
        self.z_plusplus = self.zplus.extract_tseries(2, 0)
        self.z_plusminus = self.mixed.extract_tseries(1, 1)

    def zplus_slice(self, p: int) -> TSeries:
        return self.zplus.extract_tseries(p, 0)

    def zplus_in_y(self) -> BivSeries:
        return self.zplus.swap_xy()


def _dobrushin_update(nu: Scalar):
    t = 1  # t-power shorthand for mul_monomial calls

    def update(state: dict, order: int) -> dict:
        M: BivSeries = state["mixed"]
        Z: BivSeries = state["zplus"]
        m1_of_y = M.coeff_of_x(1)                     # [x] S, a series in y
        m1_of_x = M.coeff_of_y(1)                     # [y] S, a series in x
        z_in_y = Z.swap_xy()
        z1 = Z.coeff_of_x(1)                          # Z_+ as a plain t-series

        xy = BivSeries.monomial(nu, order, M.dx, M.dy, 1, 1, 1)
        new_m = (
            xy
            + (M * Z).mul_monomial(t, -1, 0)
            + (M * z_in_y).mul_monomial(t, 0, -1)
            + (M - m1_of_y.mul_monomial(0, 1, 0)).mul_monomial(t, -1, 0)
            + (M - m1_of_x.mul_monomial(0, 0, 1)).mul_monomial(t, 0, -1)
        )

        x2 = BivSeries.monomial(nu, order, Z.dx, Z.dy, 1, 2, 0, nu)
        new_z = (
            x2
            + (Z * Z).mul_monomial(t, -1, 0, nu)
            + (Z - z1.mul_monomial(0, 1, 0)).mul_monomial(t, -1, 0, nu)
            + m1_of_x.mul_monomial(t, 0, 0, nu)
        )
        return {"mixed": new_m, "zplus": new_z}

    return update


def solve_dobrushin(nu: Scalar, order: int, caps: int | None = None) -> DobrushinTable:
    """Solve the two-equation system to the given t-order.

    Catalytic degrees are capped at `caps` (default: the t-order, which the
    Euler support bound makes unreachable, so DegreeOverflow only fires on a
    transcription bug).
    """
    nu = as_scalar(nu)
    if not nu > 0:
        raise ValueError("nu must be positive")
    if order < 1:
        raise ValueError("order must be >= 1")
    # intermediate products reach x-degree (order + 6) / 2 before division
    d = caps if caps is not None else max(order, (order + 7) // 2)
    spec = FixedPointSpec(
        zero={
            "mixed": BivSeries.zero(nu, 0, d, d),
            "zplus": BivSeries.zero(nu, 0, d, d),
        },
        update=_dobrushin_update(nu),
    )
    sol = solve_fixed_point(spec, order)
    return DobrushinTable(nu, order, sol["mixed"], sol["zplus"])


# ---------------------------------------------------------------------------
# arbitrary boundary words via root-edge deletion
# ---------------------------------------------------------------------------

def _word_refs(word: str, p_max: int) -> list:
    """Right-hand-side structure of the root-edge deletion identity.

    Returns (monochromatic_root, inserted_words, split_pairs): inserted words
    longer than p_max are pruned (they cannot contribute below the working
    order), encoded as None.
    """
    p = len(word)
    mono = word[0] == word[-1]
    inserted = []
    for c in "+-":
        w = c + word
        inserted.append(w if len(w) <= p_max else None)
    splits = [(word[:i], word[i - 1:]) for i in range(1, p + 1)]
    return mono, inserted, splits


class WordTable:
    """Demand-populated table of boundary-word series at one (nu, order)."""

    def __init__(self, nu: Scalar, order: int, dobrushin: DobrushinTable | None = None):
        self.nu = as_scalar(nu)
        self.order = order
        self.p_max = max(2, (order + 3) // 2)
        self.entries: dict[str, TSeries] = {}
        if dobrushin is not None:
            self.seed_from(dobrushin)

    def seed_from(self, table: DobrushinTable) -> None:
        if table.nu != self.nu or table.order < self.order:
            raise ValueError("Dobrushin table must match nu and reach the order")
        z1 = table.z_plus.with_order(self.order)
        z2 = table.z_plusplus.with_order(self.order)
        zpm = table.z_plusminus.with_order(self.order)
        self.entries.update({"+": z1, "-": z1, "++": z2, "--": z2, "+-": zpm, "-+": zpm})

    def _key(self, word: str) -> str:
        flipped = word.translate(str.maketrans("+-", "-+"))
        return min(word, flipped)

    def series(self, word: str) -> TSeries:
        if len(word) <= 2:
            try:
                return self.entries[word]
            except KeyError:
                raise SeedMissing("length-1/2 words must be seeded from solve_dobrushin")
        if len(word) > self.p_max:
            return TSeries.zero(self.nu, self.order)
        key = self._key(word)
        if key not in self.entries:
            self._solve_closure(key)
        return self.entries[key]

    def _closure(self, word: str) -> list[str]:
        todo = [word]
        out: list[str] = []
        seen = set()
        while todo:
            w = todo.pop()
            if w in seen or w in self.entries or len(w) > self.p_max or len(w) <= 2:
                continue
            seen.add(w)
            out.append(w)
            _, inserted, splits = _word_refs(w, self.p_max)
            for ref in inserted:
                if ref is not None:
                    todo.append(self._key(ref))
            for a, b in splits:
                todo.append(self._key(a))
                todo.append(self._key(b))
        return out

    def _solve_closure(self, word: str) -> None:
        unknowns = self._closure(word)
        if not unknowns:
            return
        nu = self.nu
        refs = {w: _word_refs(w, self.p_max) for w in unknowns}
        known = self.entries
        unknown_set = set(unknowns)

        def update(state: dict, order: int) -> dict:
            def lookup(w: str | None) -> TSeries:
                if w is None:
                    return TSeries.zero(nu, order)
                k = self._key(w)
                if k in unknown_set:
                    return state[k]
                if len(k) > self.p_max:
                    return TSeries.zero(nu, order)
                entry = known.get(k)
                if entry is None:
                    raise SeedMissing(f"word {k} missing: seed the table from solve_dobrushin")
                return entry.with_order(order)

            out = {}
            for w in unknowns:
                mono, inserted, splits = refs[w]
                weight = nu if mono else Fraction(1)
                total = TSeries.zero(nu, order)
                for ref in inserted:
                    total = total + lookup(ref)
                for a, b in splits:
                    total = total + lookup(a) * lookup(b)
                out[w] = total.shift(1).scale(weight)
            return out

        zero = {w: TSeries.zero(nu, 0) for w in unknowns}
        sol = solve_fixed_point(FixedPointSpec(zero=zero, update=update), self.order)
        self.entries.update(sol)


def solve_word(omega: str, nu: Scalar, order: int, table: WordTable) -> TSeries:
    """Z_omega for |omega| >= 3 by the raw root-edge deletion identity."""
    if len(omega) < 3:
        raise ValueError("words of length 1 and 2 are seeds, not solved")
    if table.nu != as_scalar(nu) or table.order < order:
        raise ValueError("word table does not match nu / order")
    return table.series(omega).with_order(order)


# ---------------------------------------------------------------------------
# sphere series
# ---------------------------------------------------------------------------

def sphere_series(nu: Scalar, order: int, table: DobrushinTable | None = None) -> TSeries:
    """The sphere partition series from the 1- and 2-gon slices.

    The root-edge opening bijection sends sphere triangulations rooted on a
    non-loop to 2-gon triangulations *other than* the bare edge (closing the
    bare edge leaves a single edge on the sphere, which has no triangular
    face), so the edge-triangulation terms nu*t and t are removed from the
    2-gon slices before recombining.
    """
    nu = as_scalar(nu)
    if table is None:
        table = solve_dobrushin(nu, order + 1)
    if table.order < order + 1:
        raise ValueError("Dobrushin table must be solved to order + 1")
    inv_nu = _inv(nu)
    z1 = table.z_plus
    mono_pp = TSeries.monomial(nu, table.order, 1, nu)
    mono_pm = TSeries.monomial(nu, table.order, 1)
    combo = ((table.z_plusplus - mono_pp).scale(inv_nu)
             + (table.z_plusminus - mono_pm)
             + (z1 * z1).scale(inv_nu))
    return combo.shift(-1).scale(Fraction(2)).with_order(order)


# ---------------------------------------------------------------------------
# the algebraic substitution series U(t^3)
# ---------------------------------------------------------------------------

def _u_factors(nu: Scalar, u: TSeries) -> tuple[TSeries, TSeries]:
    """The two polynomial factors of the U equation, evaluated at u."""
    one = Fraction(1)
    n = nu
    lin = u.scale(1 + n) - TSeries.monomial(n, u.order, 0, Fraction(2))
    u2 = u * u
    u3 = u2 * u
    quart = (
        u3.scale(8 * n * (1 + n) ** 2)
        - u2.scale((11 * n + 13) * (n + one))
        + u.scale(2 * (n + 3) * (2 * n + 1))
        - TSeries.monomial(n, u.order, 0, 4 * n)
    )
    return lin, quart


def solve_U(nu: Scalar, order: int) -> TSeries:
    """The unique series in t^3 with zero constant term solving the cubic-root
    substitution equation; each iteration gains three t-orders."""
    nu = as_scalar(nu)
    if not nu > 0:
        raise ValueError("nu must be positive")

    def update(state: dict, work: int) -> dict:
        u = state["U"]
        lin, quart = _u_factors(nu, u)
        denom = (lin * quart).inverse()
        one_minus_2u = TSeries.monomial(nu, work, 0) - u.scale(Fraction(2))
        rhs = (one_minus_2u * one_minus_2u * denom).scale(32 * nu ** 3).shift(3)
        return {"U": rhs}

    spec = FixedPointSpec(zero={"U": TSeries.zero(nu, 0)}, update=update, min_gain=3)
    return solve_fixed_point(spec, order)["U"]


def check_U(u: TSeries, order: int | None = None) -> TSeries:
    """Residual 32 nu^3 (1-2U)^2 t^3 - U (...) (...), identically 0 for the solution."""
    nu = u.nu
    order = u.order if order is None else order
    lin, quart = _u_factors(nu, u)
    one_minus_2u = TSeries.monomial(nu, u.order, 0) - u.scale(Fraction(2))
    lhs = (one_minus_2u * one_minus_2u).scale(32 * nu ** 3).shift(3)
    rhs = u * lin * quart
    return (lhs - rhs).with_order(order)


# ---------------------------------------------------------------------------
# the one-catalytic-variable equation and its uses
# ---------------------------------------------------------------------------

def _catalytic_combination(v: BivSeries, z1: TSeries, z2: TSeries) -> BivSeries:
    """Residual of the one-catalytic-variable equation, in the normalization
    V(y) = sum_p t^p Z_{+^p} y^p (every term polynomial, no divisions).

    The equation appears in four renderings in the source material; only the
    coefficient-recursion rendering is free of typos, which this function
    transcribes.  It was certified term-by-term against the brute-force
    oracle series; see CONVENTIONS.md.  Identically zero when V, Z_1, Z_2 are
    the genuine series, for every nu (at nu = 1 the cubic and several linear
    terms vanish but the residual check stays meaningful).
    """
    nu = v.nu
    one = Fraction(1)
    order, dx, dy = v.order, v.dx, v.dy

    def mono(k: int, j: int, c: Scalar) -> BivSeries:
        return BivSeries.monomial(nu, order, dx, dy, k, 0, j, c)

    def from_t(s: TSeries) -> BivSeries:
        out = BivSeries(nu, order, dx, dy)
        out.coeffs = {(k, 0, 0): c for k, c in s.coeffs.items() if k <= order}
        return out

    z1b = from_t(z1)
    z2b = from_t(z2)
    v_sq = v * v
    v_cu = v_sq * v
    c = nu * (one - nu)

    return (
        v.scale(-2 * c)
        + z1b.mul_monomial(1, 0, 1, 2 * c)                   # 2 nu (1-nu) t Z1 y
        + (z1b * z1b).mul_monomial(2, 0, 2, 2 * c)           # (1-nu) 2 nu (t Z1)^2 y^2
        + z2b.mul_monomial(2, 0, 2, 2 * c)                   # (1-nu) 2 nu t^2 Z2 y^2
        - z1b.mul_monomial(1, 0, 2, (one - nu) * (nu + 2))   # -(1-nu)(nu+2) t Z1 y^2
        - z1b.mul_monomial(4, 0, 3, 2 * nu * nu)             # -nu t^3 (2 nu t Z1) y^3
        + mono(3, 3, nu * (nu - one))                        # -nu t^3 (-nu+1) y^3
        - mono(3, 4, nu * (nu - one))                        # -t^3 nu (nu-1) y^4
        + mono(6, 5, nu * nu)                                # nu^2 t^6 y^5
        + v.mul_monomial(3, 0, 3, nu * (2 * nu - 3))         # nu t^3 (2nu-3) y^3 V
        + v.mul_monomial(0, 0, 2, nu - one)                  # (nu - 1) y^2 V
        + v.mul_monomial(3, 0, 2, 2 * nu * nu)               # 2 nu^2 t^3 y^2 V
        - v.mul_monomial(0, 0, 1, (nu - one) * (nu + 2))     # -(nu-1)(nu+2) y V
        - (z1b * v).mul_monomial(1, 0, 1, 2 * nu * (nu - one))  # -(nu-1) 2 nu t Z1 y V
        + v_sq.mul_monomial(3, 0, 2, nu * nu)                # nu^2 t^3 y^2 V^2
        - v_sq.mul_monomial(0, 0, 1, (nu + 2) * (nu - one))  # -(nu+2)(nu-1) y V^2
        + v_sq.scale(4 * nu * (nu - one))                    # 4 nu (nu-1) V^2
        + v_cu.scale(2 * nu * (nu - one))                    # 2 nu (nu-1) V^3
    )


@dataclass
class CatalyticReport:
    nu: Scalar
    order: int
    degenerate: bool
    residual: BivSeries

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()

    def to_json(self) -> dict:
        return {
            "nu": format_scalar(self.nu),
            "order": self.order,
            "degenerate": self.degenerate,
            "residual_zero": self.ok,
            "residual_terms": len(self.residual.coeffs),
        }


def _v_normalized(table: DobrushinTable, order: int, dy: int, extra: dict | None = None) -> BivSeries:
    """V(y) = sum_p t^p Z_{+^p} y^p from the solved pure-boundary slices."""
    v = BivSeries(table.nu, order, 0, dy)
    for (k, i, j), c in table.zplus.coeffs.items():
        kk = k + i
        if kk <= order:
            v.coeffs[(kk, 0, i)] = c
    return v


def verify_catalytic(nu: Scalar, order: int, table: DobrushinTable) -> CatalyticReport:
    """Evaluate the one-catalytic-variable equation on the solved system.

    Returns the residual through the requested t-order, over all y-degrees.
    At nu = 1 the factor 1-nu kills the equation's normal-form left side and
    the check degenerates to the surviving polynomial side (still a strict
    identity); the report flags this.
    """
    nu = as_scalar(nu)
    if table.nu != nu or table.order < order + 2:
        raise ValueError("table must be solved to order + 2 at the same nu")
    work = order + 2
    v = _v_normalized(table, work, work + 9)
    z1 = table.z_plus.with_order(work)
    z2 = table.z_plusplus.with_order(work)
    residual = _catalytic_combination(v, z1, z2).with_order(order)
    return CatalyticReport(nu, order, degenerate=(nu == 1), residual=residual)


def zplus_recursion(p: int, nu: Scalar, order: int, table: DobrushinTable) -> TSeries:
    """Z_{+^p} for p >= 3 rebuilt from Z_+ and Z_++ alone, via the
    y^p-coefficient extraction of the one-catalytic-variable equation.

    The equation degenerates at nu = 1 (every term carries a 1-nu factor that
    survives the extraction), so that value is rejected.
    """
    nu = as_scalar(nu)
    if p < 3:
        raise ValueError("recursion applies to p >= 3")
    if nu == 1:
        raise ValueError("the y^p recursion degenerates at nu = 1")
    # the t^p Z_p normalization costs p working orders at the top
    work = order + p
    if table.nu != nu or table.order < work:
        raise ValueError(f"table must be solved to order+p = {work} at the same nu")
    z1 = table.z_plus.with_order(work)
    z2 = table.z_plusplus.with_order(work)
    inv_c = _inv(2 * nu * (Fraction(1) - nu))
    zs: dict[int, TSeries] = {1: z1, 2: z2}
    for q in range(3, p + 1):
        v = BivSeries(nu, work, 0, 3 * q + 6)
        for r, s in zs.items():
            for k, cc in s.coeffs.items():
                if k + r <= work:
                    v.coeffs[(k + r, 0, r)] = cc
        combo = _catalytic_combination(v, z1, z2)
        # with t^q Z_q missing, the y^q defect is exactly 2 nu (1-nu) t^q Z_q
        defect = combo.extract_tseries(0, q)
        zs[q] = defect.scale(inv_c).shift(-q)
    return zs[p].with_order(order)


# ---------------------------------------------------------------------------
# identities against the non-simple-boundary series
# ---------------------------------------------------------------------------

@dataclass
class IdentityResult:
    name: str
    ok: bool
    checked_to: int
    first_fail: int | None = None

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "checked_to": self.checked_to,
                "first_fail": self.first_fail}


def check_q_identities(nu: Scalar, order: int, oracle_cap: int = 9) -> list[IdentityResult]:
    """Cross-check the engine Z-series against brute-force Q-series.

    Q3 - Q1 Q2 removes exactly the maps whose root edge is a boundary loop;
    the boundary walks that are pinched away from the root edge contribute a
    further 2 Q1 (Q2 - Q1^2) before what is left is the simple-boundary sum
    Z_+++ + 3 Z_++-.  (The shorter form without that term, as sometimes
    quoted, fails at the first order with a pinched non-root boundary; the
    corrected form is the one consistent with the Z_++ formula below, which
    holds verbatim.)
    """
    nu = as_scalar(nu)
    n = min(order, oracle_cap)
    q1 = oracle_Q(1, nu, n)
    q2 = oracle_Q(2, nu, n)
    q3 = oracle_Q(3, nu, n)
    table = solve_dobrushin(nu, n)
    words = WordTable(nu, n, table)
    z_ppp = words.series("+++")
    z_ppm = words.series("++-")

    results = []

    def record(name: str, lhs: TSeries, rhs: TSeries) -> None:
        fail = lhs.first_difference(rhs, n)
        results.append(IdentityResult(name, fail is None, n, fail))

    record("Q1 = nu t Q2", q1, q2.shift(1).scale(nu))
    record("Q1 = Z_+", q1, table.z_plus.with_order(n))
    record("Z_++ + Z_+- = Q2 - Q1^2",
           table.z_plusplus.with_order(n) + table.z_plusminus.with_order(n),
           q2 - q1 * q1)
    record("Z_+++ + 3 Z_++- = Q3 - Q1 Q2 - 2 Q1 (Q2 - Q1^2)",
           z_ppp + z_ppm.scale(Fraction(3)),
           q3 - q1 * q2 - (q1 * (q2 - q1 * q1)).scale(Fraction(2)))
    if nu != 1:
        inv_1mn = _inv(Fraction(1) - nu)
        rhs = (
            TSeries.monomial(nu, n, 1, 2 * nu * inv_1mn)
            + q3.shift(1).scale(nu * inv_1mn)
            - q1.shift(-1).scale(inv_1mn)
            - q1 * q1
        )
        record("Z_++ in Q1, Q3", table.z_plusplus.with_order(n), rhs)
    return results
