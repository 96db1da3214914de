"""Random generation of spin-decorated triangulations.

Three samplers share one dart-level builder: an exact finite-size sampler
(recursive decomposition with size-conditioned coefficient weights), a
Boltzmann peeling sampler at or below the critical fugacity, and an edge-flip
plus heat-bath Markov chain for sizes beyond exact reach.

Case selection is exact for exact scalars: a uniform variate is drawn lazily
bit by bit as a shrinking dyadic interval and compared against cumulative
weights with exact arithmetic, so no case probability is ever rounded.  Every
sample records its seed; replicas derive independent streams by hashing.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .criticality import CriticalData, eval_series_interval
from .exactnum import Interval, Scalar, as_scalar, format_scalar, scalar_to_float
from .maps.combmap import CombMap, spins_to_word, word_to_spins
from .partition import DobrushinTable, WordTable, solve_dobrushin

RNG_ALGORITHM = "python-mt19937/sha256-derived-streams"

VALIDATE_BUILDS = True


class CoefficientsMissing(ValueError):
    pass


class StepCapExceeded(RuntimeError):
    pass


class EvaluationTooCoarse(RuntimeError):
    pass


def derive_seed(seed: int, stream: int | str) -> int:
    digest = hashlib.sha256(f"{seed}:{stream}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# ---------------------------------------------------------------------------
# exact weighted choice via lazily refined dyadic uniform
# ---------------------------------------------------------------------------

def pick_weighted(weights: list[Scalar], rng: random.Random) -> int:
    """Index i with probability weights[i]/sum, exactly, for exact scalars.

    A uniform variate on [0, total) is represented as the dyadic interval
    [lo, lo+1)/2^k * total and refined one random bit at a time until it fits
    inside a single cumulative segment; all comparisons are exact.
    """
    cum: list[Scalar] = []
    acc: Scalar = Fraction(0)
    for w in weights:
        if w < 0:
            raise ValueError("negative weight")
        acc = acc + w
        cum.append(acc)
    total = acc
    if not total > 0:
        raise ValueError("all weights vanish")
    lo = 0
    k = 0
    while True:
        scale = 1 << k
        u_lo = lo * total
        u_hi = (lo + 1) * total
        # first segment whose upper cumulative strictly exceeds u_lo
        for i, c in enumerate(cum):
            sc = scale * c
            if sc > u_lo:
                if u_hi <= sc:
                    return i
                break
        lo = (lo << 1) | rng.getrandbits(1)
        k += 1


def bernoulli(p: Scalar, rng: random.Random) -> bool:
    """True with exact probability min(1, p)."""
    if p >= 1:
        return True
    return pick_weighted([as_scalar(p), 1 - as_scalar(p)], rng) == 0


# ---------------------------------------------------------------------------
# dart-level builder for peeling reconstructions
# ---------------------------------------------------------------------------

@dataclass
class _Piece:
    """A triangulation of the p-gon under construction.

    Spins are stored per dart (constant on each vertex); `boundary` caches
    the root-face cycle in phi order, starting at alpha[root].
    """

    alpha: list[int]
    sigma: list[int]
    root: int
    spin: list[int]

    def to_map(self) -> CombMap:
        m = CombMap(tuple(self.alpha), tuple(self.sigma), self.root)
        vo = m.vertex_of()
        spins = [0] * (max(vo) + 1)
        for d, v in enumerate(vo):
            spins[v] = self.spin[d]
        return CombMap(m.alpha, m.sigma, m.root, tuple(spins))

    def root_face_cycle(self) -> list[int]:
        start = self.alpha[self.root]
        cyc = [start]
        d = self.sigma[self.alpha[start]]
        while d != start:
            cyc.append(d)
            d = self.sigma[self.alpha[d]]
        return cyc

    def word(self) -> str:
        cyc = self.root_face_cycle()
        order = [cyc[0]] + cyc[:0:-1]
        return spins_to_word(self.spin[d] for d in order)


def _edge_piece(w1: int, w2: int) -> _Piece:
    # single edge: dart 0 = root (from the w2 vertex to the w1 vertex)
    return _Piece(alpha=[1, 0], sigma=[0, 1], root=0, spin=[w2, w1])


def _attach_new_vertex(inner: _Piece) -> _Piece:
    """Inverse peeling, new-vertex case: inner has word c w, result has word w.

    Adds the root edge of the result across the corner at the new vertex c,
    so the triangle (w_p, c, w_1) becomes an internal face.
    """
    p1 = inner
    cyc = p1.root_face_cycle()          # [rbar, y1 .. yp], tail(y_j) = w_{p+1-j}
    rbar, ys = cyc[0], cyc[1:]
    p = len(ys)
    if p < 1:
        raise ValueError("inner word must have length >= 2")
    n = len(p1.alpha)
    d1, d2 = n, n + 1                   # new root edge darts: d1 at w_p, d2 at w_1
    alpha = p1.alpha + [d2, d1]
    sigma = p1.sigma + [0, 0]
    spin = p1.spin + [p1.spin[ys[0]], p1.spin[ys[-1]]]
    rootp = p1.root
    if p == 1:
        sigma[d1] = d2                  # new root face is the loop face [d2]
        sigma[d2] = ys[0]
        sigma[rootp] = d1
    else:
        sigma[d1] = ys[0]               # phi(d2) = y1
        sigma[d2] = ys[-1]              # phi(d1) = yp
        sigma[rootp] = d1               # phi(rbar) = d1
        sigma[alpha[ys[-2]]] = d2       # phi(y_{p-1}) = d2
    return _finish(_Piece(alpha, sigma, d1, spin))


def _attach_split(left: _Piece, right: _Piece) -> _Piece:
    """Inverse peeling, boundary-vertex case.

    left has word w_1..w_i, right has word w_i..w_p; the pieces share the
    vertex w_i and the result has word w_1..w_p with a fresh root edge from
    w_p to w_1; the triangle (w_p, w_1, w_i) is made of the new edge and the
    two pieces' root edges.
    """
    off = len(left.alpha)
    alpha = left.alpha + [d + off for d in right.alpha]
    sigma = left.sigma + [d + off for d in right.sigma]
    spin = left.spin + right.spin
    cyc1 = left.root_face_cycle()
    rbar1, us = cyc1[0], cyc1[1:]
    cyc2 = [d + off for d in right.root_face_cycle()]
    rbar2, ss = cyc2[0], cyc2[1:]
    r1 = left.root
    r2 = right.root + off
    n = len(alpha)
    d1, d2 = n, n + 1
    alpha += [d2, d1]
    sigma += [0, 0]
    w1_spin = left.spin[rbar1]
    wp_spin = spin[ss[0]] if ss else spin[rbar2]
    spin += [wp_spin, w1_spin]
    # triangle [d1, rbar1, rbar2]
    sigma[d2] = rbar1
    sigma[r1] = rbar2
    sigma[r2] = d1
    # new root face [d2] + ss + us
    cycle = [d2] + ss + us
    for x, y in zip(cycle, cycle[1:] + cycle[:1]):
        sigma[alpha[x]] = y
    return _finish(_Piece(alpha, sigma, d1, spin))


def _finish(piece: _Piece) -> _Piece:
    if VALIDATE_BUILDS:
        m = piece.to_map()
        m.validate("pgon", len(piece.root_face_cycle()))
    return piece


def _compact(alpha: list[int], sigma: list[int], spin: list[int], root: int,
             dead: set[int]) -> CombMap:
    """Drop deleted darts and renumber; returns the rooted map with spins."""
    keep = [d for d in range(len(alpha)) if d not in dead]
    new = {d: i for i, d in enumerate(keep)}
    a = tuple(new[alpha[d]] for d in keep)
    s = tuple(new[sigma[d]] for d in keep)
    m = CombMap(a, s, new[root])
    vo = m.vertex_of()
    spins = [0] * (max(vo) + 1)
    for d in keep:
        spins[vo[new[d]]] = spin[d]
    return CombMap(a, s, new[root], tuple(spins))


def _close_2gon(piece: _Piece) -> CombMap:
    """Sew the two boundary edges of a 2-gon into one sphere edge."""
    cyc = piece.root_face_cycle()
    if len(cyc) != 2:
        raise ValueError("need a 2-gon")
    rbar, u1 = cyc
    alpha = list(piece.alpha)
    sigma = list(piece.sigma)
    root = piece.root
    inner2 = alpha[u1]
    # splice the boundary darts out of their rotations
    for d in (rbar, u1):
        prev = sigma.index(d)
        sigma[prev] = sigma[d]
    alpha[root] = inner2
    alpha[inner2] = root
    return _compact(alpha, sigma, piece.spin, root, {rbar, u1})


def _close_loop_pair(p1: _Piece, p2: _Piece) -> CombMap:
    """Sew two 1-gons along their boundary loops into a loop-rooted sphere."""
    off = len(p1.alpha)
    alpha = p1.alpha + [d + off for d in p2.alpha]
    sigma = p1.sigma + [d + off for d in p2.sigma]
    spin = p1.spin + p2.spin
    r1 = p1.root
    rb1 = p1.alpha[r1]
    r2 = p2.root + off
    rb2 = alpha[r2]
    # cross-splice the two vertex rotations, deleting the outer loop sides
    b1 = sigma.index(rb1)
    a1 = sigma[rb1]
    b2 = sigma.index(rb2)
    a2 = sigma[rb2]
    sigma[b1] = a2
    sigma[b2] = a1
    alpha[r1] = r2
    alpha[r2] = r1
    return _compact(alpha, sigma, spin, r1, {rb1, rb2})


# ---------------------------------------------------------------------------
# decision-tree sampling shared by the exact and Boltzmann samplers
# ---------------------------------------------------------------------------

@dataclass
class _Node:
    case: tuple
    children: list


def _case_structure(word: str) -> list[tuple]:
    """All peeling cases of a word: ('edge',), ('insert', c), ('split', i)."""
    p = len(word)
    cases: list[tuple] = []
    if p == 2:
        cases.append(("edge",))
    for c in "+-":
        cases.append(("insert", c))
    for i in range(1, p + 1):
        cases.append(("split", i))
    return cases


def _child_words(word: str, case: tuple) -> list[str]:
    if case[0] == "edge":
        return []
    if case[0] == "insert":
        return [case[1] + word]
    i = case[1]
    return [word[:i], word[i - 1:]]


def _build_from_tree(root: _Node, word: str) -> _Piece:
    # iterative post-order construction
    done: dict[int, _Piece] = {}
    stack: list[tuple[_Node, str, bool]] = [(root, word, False)]
    while stack:
        node, w, expanded = stack.pop()
        if expanded:
            kids = [done.pop(id(ch)) for ch in node.children]
            if node.case[0] == "edge":
                s = word_to_spins(w)
                done[id(node)] = _edge_piece(s[0], s[1])
            elif node.case[0] == "insert":
                done[id(node)] = _attach_new_vertex(kids[0])
            else:
                done[id(node)] = _attach_split(kids[0], kids[1])
        else:
            stack.append((node, w, True))
            for ch, cw in zip(node.children, _child_words(w, node.case)):
                stack.append((ch, cw, False))
    piece = done[id(root)]
    if VALIDATE_BUILDS and piece.word() != w0_normalize(word):
        raise AssertionError("reconstructed boundary word mismatch")
    return piece


def w0_normalize(word: str) -> str:
    return spins_to_word(word_to_spins(word))


# ---------------------------------------------------------------------------
# exact sampler
# ---------------------------------------------------------------------------

class ExactSamplerContext:
    """Coefficient tables for size-conditioned exact sampling at one nu."""

    def __init__(self, nu: Scalar, max_edges: int):
        self.nu = as_scalar(nu)
        self.order = max_edges
        table = solve_dobrushin(self.nu, self.order)
        self.words = WordTable(self.nu, self.order, table)
        self.table = table

    def coeff(self, word: str, n: int) -> Scalar:
        if n < 0 or n > self.order:
            return Fraction(0)
        if len(word) <= 2:
            return self.words.series(word).coeff(n) if len(word) > 0 else Fraction(0)
        if len(word) > self.words.p_max:
            return Fraction(0)
        return self.words.series(word).coeff(n)

    def case_weights(self, word: str, n: int) -> tuple[list[tuple], list[Scalar], list[list[tuple]]]:
        """Cases, weights and per-case child (word, size) assignments."""
        nu = self.nu
        p = len(word)
        mono = nu if word[0] == word[-1] else Fraction(1)
        cases: list[tuple] = []
        weights: list[Scalar] = []
        payload: list[list[tuple]] = []
        if p == 2 and n == 1:
            cases.append(("edge",))
            weights.append(mono)
            payload.append([])
        for c in "+-":
            w = self.coeff(c + word, n - 1)
            if w:
                cases.append(("insert", c))
                weights.append(mono * w)
                payload.append([(c + word, n - 1)])
        for i in range(1, p + 1):
            wl, wr = word[:i], word[i - 1:]
            for n1 in range(0, n):
                c1 = self.coeff(wl, n1)
                if not c1:
                    continue
                c2 = self.coeff(wr, n - 1 - n1)
                if not c2:
                    continue
                cases.append(("split", i, n1))
                weights.append(mono * c1 * c2)
                payload.append([(wl, n1), (wr, n - 1 - n1)])
        return cases, weights, payload


def _sample_gon_exact(ctx: ExactSamplerContext, word: str, n: int,
                      rng: random.Random) -> _Piece:
    target = ctx.coeff(word, n)
    if not target:
        raise CoefficientsMissing(f"[t^{n}] Z_{word} = 0")

    def make_node(w: str, size: int) -> _Node:
        cases, weights, payload = ctx.case_weights(w, size)
        total: Scalar = Fraction(0)
        for x in weights:
            total = total + x
        if total != ctx.coeff(w, size):
            raise AssertionError("peeling case weights do not sum to the coefficient")
        k = pick_weighted(weights, rng)
        case = cases[k]
        children = [make_node(cw, cn) for cw, cn in payload[k]]
        return _Node(("split", case[1]) if case[0] == "split" else case, children)

    tree = make_node(word, n)
    return _build_from_tree(tree, word)


def exact_sample(nu: Scalar, n: int, seed: int,
                 ctx: ExactSamplerContext | None = None) -> CombMap:
    """A spin-decorated sphere triangulation with 3n edges, exactly from the
    size-n Gibbs law: the root edge is classified loop/non-loop through the
    sphere relation, the corresponding gon is sampled by recursive peeling
    with coefficient weights, and the boundary is sewn back up."""
    nu = as_scalar(nu)
    size = 3 * n + 1
    if ctx is None:
        ctx = ExactSamplerContext(nu, size)
    if ctx.order < size:
        raise CoefficientsMissing("context solved to insufficient order")
    rng = random.Random(derive_seed(seed, "exact"))
    inv_nu = 1 / nu if isinstance(nu, Fraction) else nu.inverse()

    w_pp = ctx.coeff("++", size) * inv_nu
    w_pm = ctx.coeff("+-", size)
    z1 = ctx.words.series("+")
    w_loop: Scalar = Fraction(0)
    loop_splits: list[tuple[int, Scalar]] = []
    for k1 in range(2, size - 1):
        c1 = z1.coeff(k1)
        c2 = z1.coeff(size - k1)
        if c1 and c2:
            w = c1 * c2 * inv_nu
            loop_splits.append((k1, w))
            w_loop = w_loop + w

    case = pick_weighted([w_pp, w_pm, w_loop], rng)
    if case == 0:
        piece = _sample_gon_exact(ctx, "++", size, rng)
        result = _close_2gon(piece)
    elif case == 1:
        piece = _sample_gon_exact(ctx, "+-", size, rng)
        result = _close_2gon(piece)
    else:
        k = pick_weighted([w for _, w in loop_splits], rng)
        k1 = loop_splits[k][0]
        piece1 = _sample_gon_exact(ctx, "+", k1, rng)
        piece2 = _sample_gon_exact(ctx, "+", size - k1, rng)
        result = _close_loop_pair(piece1, piece2)
    if pick_weighted([Fraction(1), Fraction(1)], rng) == 1:
        result = result.flipped_spins()
    if VALIDATE_BUILDS:
        result.validate("sphere")
        if result.n_edges != 3 * n:
            raise AssertionError("sampled map has wrong size")
    return result


# ---------------------------------------------------------------------------
# Boltzmann sampler
# ---------------------------------------------------------------------------

class BoltzmannContext:
    """Evaluations Z_omega(t) for peeling at fugacity t <= t_nu.

    Values come from the word-series table: a geometric tail bound at
    rational t strictly below t_nu, or the power-law tail model at t_nu.
    Case probabilities are renormalized to sum to one; the discrepancy is
    logged and must stay below `tolerance`.
    """

    def __init__(self, nu: Scalar, t: Interval, series_order: int = 30,
                 alpha: Fraction | None = None, length_cap: int = 12,
                 tolerance: float = 1e-3):
        self.nu = as_scalar(nu)
        self.t = t
        self.order = series_order
        self.alpha = alpha
        self.length_cap = length_cap
        self.tolerance = tolerance
        table = solve_dobrushin(self.nu, series_order)
        self.words = WordTable(self.nu, series_order, table)
        self._values: dict[str, Fraction] = {}
        self.max_discrepancy = 0.0

    def value(self, word: str) -> Fraction:
        v = self._values.get(word)
        if v is None:
            series = self.words.series(word)
            iv = eval_series_interval(series, self.t, self.alpha)
            v = iv.mid
            self._values[word] = v
        return v

    def case_distribution(self, word: str) -> tuple[list[tuple], list[Fraction]]:
        nu = self.nu
        p = len(word)
        mono = nu if word[0] == word[-1] else Fraction(1)
        t_mid = self.t.mid
        mono_f = scalar_to_float(mono, 96).mid
        cases: list[tuple] = []
        weights: list[Fraction] = []
        if p == 2:
            cases.append(("edge",))
            weights.append(mono_f * t_mid)
        for c in "+-":
            w = c + word
            if len(w) <= self.length_cap:
                cases.append(("insert", c))
                weights.append(mono_f * t_mid * self.value(w))
        for i in range(1, p + 1):
            cases.append(("split", i))
            weights.append(mono_f * t_mid * self.value(word[:i]) * self.value(word[i - 1:]))
        total = sum(weights)
        target = self.value(word)
        discrepancy = abs(float(total - target)) / abs(float(target))
        self.max_discrepancy = max(self.max_discrepancy, discrepancy)
        if discrepancy > self.tolerance:
            raise EvaluationTooCoarse(
                f"case weights off by {discrepancy:.2e} at word {word}")
        # absorb the discrepancy into the largest case
        imax = max(range(len(weights)), key=lambda i: weights[i])
        weights[imax] = weights[imax] + (target - total)
        if weights[imax] < 0:
            raise EvaluationTooCoarse("renormalization produced a negative weight")
        return cases, weights


def boltzmann_sample(omega: str, nu: Scalar, ctx: BoltzmannContext, seed: int,
                     step_cap: int = 4000) -> CombMap:
    """A Boltzmann triangulation with boundary word omega at the context's
    fugacity, by recursive peeling; raises StepCapExceeded on runaway runs."""
    rng = random.Random(derive_seed(seed, "boltzmann"))
    steps = 0

    root = _Node((), [])
    work = [(root, omega)]
    while work:
        node, w = work.pop()
        steps += 1
        if steps > step_cap:
            raise StepCapExceeded(f"peeling exceeded {step_cap} steps")
        if len(w) > ctx.length_cap:
            raise StepCapExceeded(f"boundary length exceeded {ctx.length_cap}")
        cases, weights = ctx.case_distribution(w)
        k = pick_weighted(weights, rng)
        node.case = cases[k]
        node.children = [_Node((), []) for _ in _child_words(w, cases[k])]
        for ch, cw in zip(node.children, _child_words(w, cases[k])):
            work.append((ch, cw))

    piece = _build_from_tree(root, omega)
    m = piece.to_map()
    if VALIDATE_BUILDS:
        m.validate("pgon", len(omega))
    return m


# ---------------------------------------------------------------------------
# Markov chain sampler
# ---------------------------------------------------------------------------

@dataclass
class McmcState:
    alpha: list[int]
    sigma: list[int]
    root: int
    spin: list[int]            # per dart, constant on vertices
    mono: int                  # maintained incrementally

    def to_map(self) -> CombMap:
        m = CombMap(tuple(self.alpha), tuple(self.sigma), self.root)
        vo = m.vertex_of()
        spins = [0] * (max(vo) + 1)
        for d, v in enumerate(vo):
            spins[v] = self.spin[d]
        return CombMap(m.alpha, m.sigma, m.root, tuple(spins))

    def recompute_mono(self) -> int:
        vo = CombMap(tuple(self.alpha), tuple(self.sigma), self.root).vertex_of()
        m = 0
        for d in range(len(self.alpha)):
            e = self.alpha[d]
            if d < e and self.spin[d] == self.spin[e]:
                m += 1
        return m


def _fan_triangulation(n: int) -> tuple[list[int], list[int]]:
    """A deterministic 3n-edge type-I triangulation: n-fold loop-with-pendant
    spheres are awkward, so build the n = 1 double triangle and grow it by
    repeated vertex insertion into a face (each insertion adds 3 edges)."""
    alpha = [1, 0, 3, 2, 5, 4]
    sigma = [5, 2, 1, 4, 3, 0]   # double triangle: faces (0 2 4) and (1 5 3)
    m = CombMap(tuple(alpha), tuple(sigma), 0)
    m.validate("sphere")
    for _ in range(n - 1):
        alpha, sigma = _insert_vertex_in_face(alpha, sigma)
    return alpha, sigma


def _insert_vertex_in_face(alpha: list[int], sigma: list[int]) -> tuple[list[int], list[int]]:
    """Subdivide the face containing the highest dart into three triangles."""
    m = CombMap(tuple(alpha), tuple(sigma), 0)
    face = max(m.faces(), key=lambda cyc: max(cyc))
    if len(face) != 3:
        raise ValueError("expected a triangle")
    x, y, z = face
    n = len(alpha)
    px, qx, py, qy, pz, qz = n, n + 1, n + 2, n + 3, n + 4, n + 5
    alpha = alpha + [qx, px, qy, py, qz, pz]
    sigma = sigma + [0] * 6
    # spokes p_* run from the face corners to the new vertex; the three new
    # triangles are [x, p_y, q_x], [y, p_z, q_y], [z, p_x, q_z]
    sigma[alpha[x]] = py
    sigma[py] = y
    sigma[alpha[y]] = pz
    sigma[pz] = z
    sigma[alpha[z]] = px
    sigma[px] = x
    sigma[qy] = qx
    sigma[qx] = qz
    sigma[qz] = qy
    mm = CombMap(tuple(alpha), tuple(sigma), 0)
    mm.validate("sphere")
    return alpha, sigma


def mcmc_sample(nu: Scalar, n: int, steps: int, seed: int,
                validate_every: int = 10_000,
                collector=None) -> CombMap:
    """Heat-bath spins + edge flips + uniform re-rooting targeting the
    size-3n Gibbs law; detailed balance holds move by move (the re-rooting
    proposal is symmetric on rooted maps and the law only depends on the
    unrooted content, so it mixes rootings without changing the target)."""
    nu = as_scalar(nu)
    rng = random.Random(derive_seed(seed, "mcmc"))
    alpha, sigma = _fan_triangulation(n)
    state = McmcState(alpha, sigma, 0, [1] * len(alpha), 0)
    state.mono = state.recompute_mono()

    for step in range(steps):
        _heat_bath(state, nu, rng)
        _flip_move(state, nu, rng)
        state.root = rng.randrange(len(state.alpha))
        if collector is not None:
            collector(state)
        if validate_every and (step + 1) % validate_every == 0:
            state.to_map().validate("sphere")
            if state.mono != state.recompute_mono():
                raise AssertionError("incremental monochromatic count drifted")
    return state.to_map()


def _vertices(state: McmcState) -> list[list[int]]:
    n = len(state.alpha)
    seen = [False] * n
    out = []
    for d in range(n):
        if seen[d]:
            continue
        cyc = []
        e = d
        while not seen[e]:
            seen[e] = True
            cyc.append(e)
            e = state.sigma[e]
        out.append(cyc)
    return out


def _heat_bath(state: McmcState, nu: Scalar, rng: random.Random) -> None:
    verts = _vertices(state)
    cyc = verts[rng.randrange(len(verts))]
    darts = set(cyc)
    k_plus = k_minus = loops = 0
    for d in cyc:
        e = state.alpha[d]
        if e in darts:
            loops += 1          # counted twice over the cycle
            continue
        if state.spin[e] == 1:
            k_plus += 1
        else:
            k_minus += 1
    w_plus = nu ** k_plus
    w_minus = nu ** k_minus
    new_spin = 1 if pick_weighted([w_plus, w_minus], rng) == 0 else -1
    old_spin = state.spin[cyc[0]]
    if new_spin != old_spin:
        delta = (k_plus - k_minus) * (1 if new_spin == 1 else -1)
        state.mono += delta
        for d in cyc:
            state.spin[d] = new_spin


def _flip_move(state: McmcState, nu: Scalar, rng: random.Random) -> None:
    n = len(state.alpha)
    g = rng.randrange(n)
    gb = state.alpha[g]
    sigma, alpha = state.sigma, state.alpha

    def phi(d):
        return sigma[alpha[d]]

    x1 = phi(g)
    x2 = phi(x1)
    if phi(x2) != g:
        raise AssertionError("face of degree != 3")
    y1 = phi(gb)
    y2 = phi(y1)
    if {g, x1, x2} == {gb, y1, y2}:
        return  # the two sides of the edge bound the same face: unflippable
    spin_c = state.spin[x2]
    spin_d = state.spin[y2]
    spin_a = state.spin[y1]     # tail of g
    spin_b = state.spin[x1]     # head of g
    delta = (1 if spin_c == spin_d else 0) - (1 if spin_a == spin_b else 0)
    if delta and not bernoulli(nu ** delta, rng):
        return
    saved = (list(sigma), state.mono)
    # faces after the flip: [g, y2, x1] and [gb, x2, y1], with g now c -> d
    for cycle in ((g, y2, x1), (gb, x2, y1)):
        for u, v in zip(cycle, cycle[1:] + cycle[:1]):
            sigma[alpha[u]] = v
    state.spin[g] = spin_c
    state.spin[gb] = spin_d
    state.mono += delta
    try:
        state.to_map().validate("sphere")
    except Exception:
        state.sigma[:] = saved[0]
        state.mono = saved[1]
        state.spin[g] = spin_a
        state.spin[gb] = spin_b


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

@dataclass
class SampleStats:
    count: int
    root_degree: dict[int, int] = field(default_factory=dict)
    hull_perimeter_1: dict[int, int] = field(default_factory=dict)
    ball_volumes: dict[int, list[int]] = field(default_factory=dict)
    mono_fraction: list[float] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "root_degree": {str(k): v for k, v in sorted(self.root_degree.items())},
            "hull_perimeter_1": {str(k): v for k, v in sorted(self.hull_perimeter_1.items())},
            "ball_volumes": {str(r): v for r, v in sorted(self.ball_volumes.items())},
            "mono_fraction_mean": (sum(self.mono_fraction) / len(self.mono_fraction)
                                   if self.mono_fraction else None),
            "meta": self.meta,
        }


def vertex_distances(m: CombMap) -> list[int]:
    vo = m.vertex_of()
    nv = max(vo) + 1
    adj: list[set[int]] = [set() for _ in range(nv)]
    for u, v in m.edges_as_vertex_pairs():
        adj[u].add(v)
        adj[v].add(u)
    root = vo[m.root]
    dist = [-1] * nv
    dist[root] = 0
    queue = [root]
    while queue:
        nxt = []
        for u in queue:
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        queue = nxt
    return dist


def ball_face_counts(m: CombMap, r_max: int) -> list[int]:
    """|B_R| for R = 1..r_max: faces with a vertex at distance < R."""
    vo = m.vertex_of()
    dist = vertex_distances(m)
    faces = m.faces()
    out = []
    for r in range(1, r_max + 1):
        count = 0
        for cyc in faces:
            if any(dist[vo[d]] < r for d in cyc):
                count += 1
        out.append(count)
    return out


def root_degree(m: CombMap) -> int:
    vo = m.vertex_of()
    root_v = vo[m.root]
    return sum(1 for d in range(m.n_darts) if vo[d] == root_v)


def hull_perimeter_radius1(m: CombMap) -> int:
    """Perimeter of the radius-1 hull: faces at the root vertex, plus every
    complement component except the largest (by face count)."""
    vo = m.vertex_of()
    root_v = vo[m.root]
    faces = m.faces()
    face_id = {}
    for i, cyc in enumerate(faces):
        for d in cyc:
            face_id[d] = i
    in_ball = [any(vo[d] == root_v for d in cyc) for cyc in faces]
    outside = [i for i in range(len(faces)) if not in_ball[i]]
    if not outside:
        return 0
    # face adjacency across edges, restricted to outside faces
    comp = {i: -1 for i in outside}
    comps: list[list[int]] = []
    for start in outside:
        if comp[start] >= 0:
            continue
        cid = len(comps)
        comps.append([])
        stack = [start]
        comp[start] = cid
        while stack:
            f = stack.pop()
            comps[cid].append(f)
            for d in faces[f]:
                g = face_id[m.alpha[d]]
                if not in_ball[g] and comp[g] < 0:
                    comp[g] = cid
                    stack.append(g)
    keep = max(range(len(comps)), key=lambda c: (len(comps[c]), -c))
    hull_faces = set(range(len(faces))) - {f for f in comps[keep]}
    per = 0
    for f in hull_faces:
        for d in faces[f]:
            if face_id[m.alpha[d]] not in hull_faces:
                per += 1
    return per


def collect_stats(samples: list[CombMap], r_max: int = 4, meta: dict | None = None) -> SampleStats:
    stats = SampleStats(count=len(samples), meta=meta or {})
    for r in range(1, r_max + 1):
        stats.ball_volumes[r] = []
    for m in samples:
        deg = root_degree(m)
        stats.root_degree[deg] = stats.root_degree.get(deg, 0) + 1
        per = hull_perimeter_radius1(m)
        stats.hull_perimeter_1[per] = stats.hull_perimeter_1.get(per, 0) + 1
        for r, count in zip(range(1, r_max + 1), ball_face_counts(m, r_max)):
            stats.ball_volumes[r].append(count)
        stats.mono_fraction.append(m.monochromatic_count() / m.n_edges)
    return stats
