"""Brute-force reference coefficients from exhaustive map enumeration.

Coefficients are assembled as histograms over the monochromatic-edge count m:
for each enumerated map every spin assignment is visited explicitly (2^V full
assignments, bucketed by the induced boundary pattern), so no generating
function machinery is shared with the series engines being tested.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from ..exactnum import Scalar, as_scalar
from ..series import TSeries
from .combmap import spins_to_word
from .enumerate import DEFAULT_CAP, CapExceeded, enumerate_maps


def min_degree(p: int) -> int:
    """Least edge count of a triangulation of the p-gon."""
    if p == 1:
        return 2
    if p == 2:
        return 1
    return 2 * p - 3


@lru_cache(maxsize=None)
def _map_data(kind: str, p: int, n_edges: int, cap: int):
    """Per-map (edge endpoint pairs, vertex count, boundary vertices)."""
    out = []
    for m in enumerate_maps(n_edges, kind, p if kind != "sphere" else None, cap=cap):
        edges = m.edges_as_vertex_pairs()
        bverts = m.boundary_vertices() if kind != "sphere" else []
        out.append((tuple(edges), m.n_vertices(), tuple(bverts)))
    return tuple(out)


@lru_cache(maxsize=None)
def _histograms(kind: str, p: int, n_edges: int, cap: int):
    """m-histograms per boundary word (or a single histogram for free spins).

    For kind "pgon" returns {word: [count of assignments with m mono edges]}
    where interior spins run free and the word fixes the boundary.  For
    "sphere" and "nonsimple" all spins run free and the key is "".
    """
    hists: dict[str, list[int]] = {}
    for edges, n_vertices, bverts in _map_data(kind, p, n_edges, cap):
        masks = [(1 << u) | (1 << v) if u != v else 0 for u, v in edges]
        n_edges_total = len(edges)
        for s in range(1 << n_vertices):
            m = n_edges_total - sum((s & mk).bit_count() & 1 for mk in masks)
            if kind == "pgon":
                word = spins_to_word(1 if (s >> b) & 1 else -1 for b in bverts)
            else:
                word = ""
            hist = hists.get(word)
            if hist is None:
                hist = [0] * (n_edges_total + 1)
                hists[word] = hist
            hist[m] += 1
    return hists


def _eval_hist(hist: list[int], nu: Scalar) -> Scalar:
    total: Scalar = Fraction(0)
    power: Scalar = Fraction(1)
    for count in hist:
        if count:
            total = total + count * power
        power = power * nu
    return total


def oracle_series(omega: str, nu: Scalar, order: int, cap: int = DEFAULT_CAP) -> TSeries:
    """Z_omega by brute force: boundary spins fixed by the word, interior summed."""
    if order > cap:
        raise CapExceeded(f"order {order} exceeds oracle cap {cap}")
    nu = as_scalar(nu)
    p = len(omega)
    coeffs = {}
    for n in range(1, order + 1):
        if (2 * n - p) % 3:
            continue
        hists = _histograms("pgon", p, n, cap)
        hist = hists.get(omega)
        if hist is None:
            continue
        c = _eval_hist(hist, nu)
        if c:
            coeffs[n] = c
    return TSeries(nu, order, coeffs)


def oracle_sphere(nu: Scalar, order: int, cap: int = DEFAULT_CAP) -> TSeries:
    """The sphere partition series: every spin assignment of every vertex."""
    if order > cap:
        raise CapExceeded(f"order {order} exceeds oracle cap {cap}")
    nu = as_scalar(nu)
    coeffs = {}
    for n in range(3, order + 1):
        if n % 3:
            continue
        hists = _histograms("sphere", 0, n, cap)
        if "" not in hists:
            continue
        c = _eval_hist(hists[""], nu)
        if c:
            coeffs[n] = c
    return TSeries(nu, order, coeffs)


def oracle_Q(p: int, nu: Scalar, order: int, cap: int = DEFAULT_CAP) -> TSeries:
    """Boundary-of-degree-p series with free spins and the global 1/2 factor."""
    if order > cap:
        raise CapExceeded(f"order {order} exceeds oracle cap {cap}")
    nu = as_scalar(nu)
    coeffs = {}
    for n in range(1, order + 1):
        if (2 * n - p) % 3:
            continue
        hists = _histograms("nonsimple", p, n, cap)
        if "" not in hists:
            continue
        c = _eval_hist(hists[""], nu) * Fraction(1, 2)
        if c:
            coeffs[n] = c
    return TSeries(nu, order, coeffs)


def count_maps(kind: str, p: int, n_edges: int, cap: int = DEFAULT_CAP) -> int:
    """Number of unspun rooted maps of the given kind and size."""
    return len(_map_data(kind, p, n_edges, cap))
