"""Attacks an eavesdropper can actually run, and the statistics around them.

The quotient attacks decide "definitely not 1" by testing a word's image
in an abelian or class-2 nilpotent quotient of the public group, which is
an exact integer lattice membership problem.  The yes-part brute force
enumerates products of conjugated relators at desk scale.  Everything here
is sound: a definite verdict is never wrong, and Inconclusive is always a
legal answer.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from scipy.special import gammaincc

from .keygen import KeyPair
from .presentations import Presentation, SymmetrizedSet, symmetrize, word_problem
from .tietze import apply_substitution
from .words import (Rng, Word, exponent_vector, free_reduce, invert,
                    random_reduced_word)

DEFINITELY_NONTRIVIAL = "DefinitelyNonTrivial"
TRIVIAL_CERTIFIED = "TrivialCertified"
INCONCLUSIVE = "Inconclusive"


class DimensionMismatch(Exception):
    pass


class EmptyCorpus(Exception):
    pass


@dataclass(frozen=True)
class AttackVerdict:
    kind: str
    evidence: str = ""

    def __str__(self) -> str:
        return self.kind


class IntegerLattice:
    """Integer row span with exact membership testing.

    Rows are kept in column-echelon form (one pivot column per row, zeros
    to the left of each pivot), maintained with extended-gcd row
    operations.  No floating point anywhere.
    """

    def __init__(self, dim: int, rows=()):
        self.dim = dim
        self._rows: list[list[int]] = []
        self._pivot_row: dict[int, int] = {}  # pivot column -> row index
        for r in rows:
            self.add(r)

    def __len__(self) -> int:
        return len(self._rows)

    def add(self, vec) -> None:
        vec = list(vec)
        if len(vec) != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {len(vec)}")
        for j in range(self.dim):
            if not vec[j]:
                continue
            p = self._pivot_row.get(j)
            if p is None:
                if vec[j] < 0:
                    vec = [-x for x in vec]
                self._pivot_row[j] = len(self._rows)
                self._rows.append(vec)
                return
            row = self._rows[p]
            a, b = row[j], vec[j]
            if b % a == 0:
                q = b // a
                for t in range(j, self.dim):
                    vec[t] -= q * row[t]
            else:
                x, y, g = _xgcd(a, b)
                ag, bg = a // g, b // g
                for t in range(j, self.dim):
                    rt, vt = row[t], vec[t]
                    row[t] = x * rt + y * vt
                    vec[t] = ag * vt - bg * rt

    def __contains__(self, vec) -> bool:
        vec = list(vec)
        if len(vec) != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {len(vec)}")
        for j in range(self.dim):
            if not vec[j]:
                continue
            p = self._pivot_row.get(j)
            if p is None:
                return False
            row = self._rows[p]
            if vec[j] % row[j]:
                return False
            q = vec[j] // row[j]
            for t in range(j, self.dim):
                vec[t] -= q * row[t]
        return True


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    return x, y, g


def lattice_membership(lattice: IntegerLattice, target) -> bool:
    return tuple(target) in lattice


@lru_cache(maxsize=64)
def _abelian_lattice(p: Presentation) -> IntegerLattice:
    return IntegerLattice(p.k, (exponent_vector(r, p.k) for r in p.relators))


def abelian_attack(p: Presentation, w) -> AttackVerdict:
    """Image-in-abelianization test: sound for NonTrivial, never for Trivial."""
    e = exponent_vector(w, p.k)
    if e in _abelian_lattice(p):
        return AttackVerdict(INCONCLUSIVE, "exponent vector lies in the relator lattice")
    return AttackVerdict(DEFINITELY_NONTRIVIAL,
                         f"exponent vector {e} outside the relator lattice")


# -- class-2 nilpotent quotient --------------------------------------------

@dataclass(frozen=True)
class Class2Coords:
    """Normal form exponents in the free class-2 nilpotent group.

    e are the generator exponents; c[(i,j)] for i<j (flattened) is the
    exponent of the basic commutator [x_i, x_j] with [a,b] = a⁻¹b⁻¹ab.
    """

    e: tuple
    c: tuple

    def flat(self) -> tuple:
        return self.e + self.c


def _pair_index(k: int):
    idx = {}
    n = 0
    for i in range(1, k):
        for j in range(i + 1, k + 1):
            idx[(i, j)] = n
            n += 1
    return idx, n


def class2_coords(w, k: int) -> Class2Coords:
    """One left-to-right collection pass.

    Reading letter x_i^eps past the accumulated tail multiplies the
    commutator coordinates: c_ij -= eps * e_j for every j > i, then
    e_i += eps.
    """
    idx, n = _pair_index(k)
    e = [0] * (k + 1)
    c = [0] * n
    for s in w:
        i = abs(s)
        if not 1 <= i <= k:
            raise IndexError(f"generator {i} out of range 1..{k}")
        eps = 1 if s > 0 else -1
        for j in range(i + 1, k + 1):
            if e[j]:
                c[idx[(i, j)]] -= eps * e[j]
        e[i] += eps
    return Class2Coords(tuple(e[1:]), tuple(c))


def _bracket(u, v, idx, n) -> list:
    """B(u,v)[(i,j)] = u_i v_j - u_j v_i: the commutator bilinear form."""
    out = [0] * n
    for (i, j), t in idx.items():
        out[t] = u[i - 1] * v[j - 1] - u[j - 1] * v[i - 1]
    return out


def _mixed(u, v, idx, n) -> list:
    """B'(u,v)[(i,j)] = -u_j v_i: the cross term of the collection law."""
    out = [0] * n
    for (i, j), t in idx.items():
        out[t] = -u[j - 1] * v[i - 1]
    return out


@lru_cache(maxsize=16)
def _class2_lattice(p: Presentation) -> IntegerLattice:
    """Z-span containing the class-2 image of the relators' normal closure.

    Generated by the relator coordinates, the brackets of each relator
    exponent vector with every unit vector (conjugation), and the pairwise
    collection cross terms (products and inverses).
    """
    k = p.k
    idx, n = _pair_index(k)
    lat = IntegerLattice(k + n)
    zeros_e = (0,) * k
    evs = []
    for r in p.relators:
        coords = class2_coords(r, k)
        evs.append(coords.e)
        lat.add(coords.e + coords.c)
    units = [tuple(1 if t == a else 0 for t in range(k)) for a in range(k)]
    for ev in evs:
        for u in units:
            lat.add(zeros_e + tuple(_bracket(u, ev, idx, n)))
    for ev1 in evs:
        for ev2 in evs:
            lat.add(zeros_e + tuple(_mixed(ev1, ev2, idx, n)))
    return lat


def nilpotent2_attack(p: Presentation, w) -> AttackVerdict:
    """Image in the class-2 nilpotent quotient, via exact lattice membership.

    The lattice over-approximates the image of the relators' normal
    closure modulo weight-3 commutators, so NonTrivial verdicts are sound.
    """
    coords = class2_coords(w, p.k)
    if coords.flat() in _class2_lattice(p):
        return AttackVerdict(INCONCLUSIVE, "class-2 coordinates lie in the closure lattice")
    return AttackVerdict(DEFINITELY_NONTRIVIAL,
                         "class-2 coordinates outside the closure lattice")


# -- yes-part enumeration ---------------------------------------------------

@dataclass(frozen=True)
class EnumerationBudget:
    max_factors: int = 3
    max_conj_len: int = 1
    max_states: int = 20000


def _cyclic_canonical(w: Word) -> Word:
    """Least rotation of the cyclically reduced word and of its inverse."""
    core, _ = _cyc(w)
    if not core:
        return ()
    best = None
    for cand in (core, invert(core)):
        doubled = cand + cand
        n = len(cand)
        for s in range(n):
            rot = doubled[s:s + n]
            if best is None or rot < best:
                best = rot
    return best


def _cyc(w):
    from .words import cyclic_reduce
    return cyclic_reduce(w)


def _conjugators(k: int, max_len: int):
    yield ()
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for base in frontier:
            for g in range(1, k + 1):
                for s in (g, -g):
                    if base and base[-1] == -s:
                        continue
                    word = base + (s,)
                    nxt.append(word)
                    yield word
        frontier = nxt


def enumerate_yes(p: Presentation, w, budget: EnumerationBudget = EnumerationBudget()) -> AttackVerdict:
    """Breadth-first search for w as a product of conjugated relators.

    States are canonical cyclic forms, so a hit certifies w up to
    conjugacy, which is enough for triviality.  Exhausting the budget
    yields Inconclusive; this attack never claims NonTrivial.
    """
    target = _cyclic_canonical(free_reduce(w))
    factors = []
    seen_factors = set()
    for m in symmetrize(p):
        for c in _conjugators(p.k, budget.max_conj_len):
            f = free_reduce(c + m + invert(c))
            if f and f not in seen_factors:
                seen_factors.add(f)
                factors.append(f)
    start = ()
    if target == start:
        return AttackVerdict(TRIVIAL_CERTIFIED, "word is freely trivial")
    states = {start: ()}
    frontier = [start]
    explored = 0
    for depth in range(1, budget.max_factors + 1):
        nxt = []
        for state in frontier:
            for fi, f in enumerate(factors):
                prod = _cyclic_canonical(free_reduce(state + f))
                explored += 1
                if prod == target:
                    path = states[state] + (fi,)
                    derivation = " * ".join(str(factors[t]) for t in path)
                    return AttackVerdict(
                        TRIVIAL_CERTIFIED,
                        f"depth {depth}: product of {len(path)} conjugated relators: {derivation}")
                if prod not in states:
                    states[prod] = states[state] + (fi,)
                    nxt.append(prod)
                if explored >= budget.max_states:
                    return AttackVerdict(INCONCLUSIVE,
                                         f"budget exhausted after {explored} states")
        frontier = nxt
    return AttackVerdict(INCONCLUSIVE,
                         f"no derivation within {budget.max_factors} factors "
                         f"({explored} states)")


# -- statistics -------------------------------------------------------------

def _subword_counts(corpus, n: int) -> dict:
    counts: dict[tuple, int] = {}
    for w in corpus:
        for i in range(len(w) - n + 1):
            g = tuple(w[i:i + n])
            counts[g] = counts.get(g, 0) + 1
    return counts


def freq_test(corpus_a, corpus_b, max_sub: int = 3) -> dict:
    """Two-sample chi-square on n-gram counts for n = 1..max_sub.

    Cells whose pooled expected count falls below 5 are merged into a
    single rest cell.  Returns {n: (statistic, dof, p_value)}.
    """
    corpus_a, corpus_b = list(corpus_a), list(corpus_b)
    if not corpus_a or not corpus_b:
        raise EmptyCorpus("both corpora must be non-empty")
    results = {}
    for n in range(1, max_sub + 1):
        ca = _subword_counts(corpus_a, n)
        cb = _subword_counts(corpus_b, n)
        total_a = sum(ca.values())
        total_b = sum(cb.values())
        if total_a == 0 or total_b == 0:
            results[n] = (0.0, 0, 1.0)
            continue
        grams = set(ca) | set(cb)
        total = total_a + total_b
        cells = []
        rest = [0, 0]
        for g in grams:
            oa, ob = ca.get(g, 0), cb.get(g, 0)
            if (oa + ob) * min(total_a, total_b) / total < 5:
                rest[0] += oa
                rest[1] += ob
            else:
                cells.append((oa, ob))
        if rest[0] + rest[1]:
            cells.append(tuple(rest))
        stat = 0.0
        for oa, ob in cells:
            pooled = (oa + ob) / total
            ea, eb = pooled * total_a, pooled * total_b
            if ea > 0:
                stat += (oa - ea) ** 2 / ea
            if eb > 0:
                stat += (ob - eb) ** 2 / eb
        dof = max(len(cells) - 1, 1)
        p = float(gammaincc(dof / 2, stat / 2))
        results[n] = (stat, dof, p)
    return results


def estimate_nontrivial_rate(keypair: KeyPair, length: int, samples: int, rng: Rng) -> float:
    """Fraction of uniform reduced words of the given length over the public
    generators that the private side decides are not 1."""
    if samples <= 0:
        raise ValueError("need at least one sample")
    k = keypair.public.presentation.k
    priv = keypair.private
    hits = 0
    for _ in range(samples):
        w = random_reduced_word(rng, k, length)
        image = apply_substitution(priv.psi, w)
        if not word_problem(priv.presentation, image).trivial:
            hits += 1
    return hits / samples
