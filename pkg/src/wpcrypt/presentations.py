"""Group presentations, small cancellation checking, and Dehn's algorithm.

A presentation is a generator count plus a list of cyclically reduced
relators.  The word problem is decided by Dehn's algorithm, which is a
correct decision procedure whenever the symmetrized relator set satisfies
the metric condition C'(1/6): every piece u occurring as a prefix of a
member r has |u| < |r|/6.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Optional

from .words import Rng, Word, cyclic_reduce, free_reduce, invert, random_reduced_word

# Anchor length for the Dehn subword index.  Members longer than 2*ANCHOR
# are located by their first ANCHOR letters and verified by extension.
_ANCHOR = 6
# Prefix window used to sort symmetrized members for piece computation;
# ties beyond the window fall back to full comparison.
_SORT_WINDOW = 128


class NotSmallCancellation(Exception):
    """Presentation failed the C'(1/6) precondition of Dehn's algorithm."""

    def __init__(self, report: "SmallCancellationReport"):
        self.report = report
        w = report.witness
        detail = f"max piece {report.max_piece_length}"
        if w is not None:
            detail += f", witness piece {w[0]} shared by {w[1]} and {w[2]}"
        super().__init__(f"presentation is not C'({report.lam}): {detail}")


@dataclass(frozen=True)
class Presentation:
    """Generators 1..k and a tuple of cyclically reduced, non-empty relators.

    Relators are normalized on construction: freely and cyclically reduced
    (the conjugating prefix is discarded, which leaves the normal closure
    unchanged).  A relator that reduces to the empty word is rejected.
    """

    k: int
    relators: tuple

    def __init__(self, k: int, relators: Iterable = ()):
        if k < 0:
            raise ValueError("negative generator count")
        normalized = []
        for r in relators:
            core, _ = cyclic_reduce(tuple(r))
            if not core:
                raise ValueError("relator reduces to the empty word")
            for s in core:
                if not 1 <= abs(s) <= k:
                    raise IndexError(f"letter {s} outside generators 1..{k}")
            normalized.append(core)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "relators", tuple(normalized))

    def total_relator_length(self) -> int:
        return sum(len(r) for r in self.relators)


@dataclass(frozen=True)
class SmallCancellationReport:
    max_piece_length: int
    witness: Optional[tuple]  # (piece, member1, member2)
    satisfies_lambda: bool
    lam: Fraction
    tiny_members: int = 0  # members of length <= 2; they ruin Dehn reach


@dataclass(frozen=True)
class WpVerdict:
    trivial: bool
    steps: int

    def __str__(self) -> str:
        return "TRIVIAL" if self.trivial else "NONTRIVIAL"


class _Family:
    """One cyclic word: all rotations of `word`, reached through `doubled`."""

    __slots__ = ("word", "doubled", "period")

    def __init__(self, word: Word):
        self.word = word
        self.doubled = word + word
        self.period = _min_period(word)

    def rotation(self, start: int) -> Word:
        return self.doubled[start:start + len(self.word)]


def _min_period(word: Word) -> int:
    n = len(word)
    doubled = word + word
    for p in range(1, n):
        if doubled[p:p + n] == word:
            return p
    return n


def _is_rotation(a: Word, fam: _Family) -> bool:
    if len(a) != len(fam.word):
        return False
    n = len(a)
    d = fam.doubled
    return any(d[s:s + n] == a for s in range(n))


class SymmetrizedSet:
    """Closure of a relator set under inversion and cyclic rotation.

    Members are stored virtually as (family, start) pairs so that a long
    relator does not materialize every rotation; they compare and iterate
    as ordinary word tuples.
    """

    def __init__(self, relators: Iterable = ()):
        self.families: list[_Family] = []
        for r in relators:
            core, _ = cyclic_reduce(tuple(r))
            if not core:
                continue
            for w in (core, invert(core)):
                if not any(_is_rotation(w, f) for f in self.families):
                    self.families.append(_Family(w))
        self._size = sum(f.period for f in self.families)
        self._index = None
        self._max_len = max((len(f.word) for f in self.families), default=0)

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self._size > 0

    def __contains__(self, w) -> bool:
        w = tuple(w)
        return any(_is_rotation(w, f) for f in self.families)

    def __iter__(self) -> Iterator[Word]:
        for f in self.families:
            for s in range(f.period):
                yield f.rotation(s)

    def members(self) -> list:
        return sorted(self)

    # -- Dehn matching ------------------------------------------------

    def _build_index(self):
        groups: dict[int, dict] = {}
        for f in self.families:
            n = len(f.word)
            half = n // 2 + 1
            a = min(half, _ANCHOR)
            bucket = groups.setdefault(a, {})
            for s in range(f.period):
                anchor = f.doubled[s:s + a]
                bucket.setdefault(anchor, []).append((f, s, n, half))
        self._index = sorted(groups.items())

    def best_match_at(self, w, pos: int):
        """Longest over-half relator prefix starting at position pos of w.

        Returns (piece_length, family, start, member_length) or None.  Ties
        on piece length break toward the lexicographically smallest member.
        """
        if self._index is None:
            self._build_index()
        avail = len(w) - pos
        best = None
        for a, bucket in self._index:
            if a > avail:
                continue
            anchor = tuple(w[pos:pos + a])
            for fam, start, n, half in bucket.get(anchor, ()):
                d = fam.doubled
                mu = a
                top = min(n, avail)
                while mu < top and d[start + mu] == w[pos + mu]:
                    mu += 1
                if mu < half:
                    continue
                if best is None or mu > best[0] or (
                    mu == best[0]
                    and d[start:start + n] < best[1].doubled[best[2]:best[2] + best[3]]
                ):
                    best = (mu, fam, start, n)
        return best

    @property
    def max_member_length(self) -> int:
        return self._max_len


@lru_cache(maxsize=256)
def symmetrize(p: Presentation) -> SymmetrizedSet:
    """Smallest symmetrized set containing the relators of p."""
    return SymmetrizedSet(p.relators)


def _sorted_entries(s: SymmetrizedSet) -> list:
    entries = []
    for f in s.families:
        n = len(f.word)
        for start in range(f.period):
            key = f.doubled[start:start + min(n, _SORT_WINDOW)]
            entries.append((key, f, start, n))
    entries.sort(key=lambda e: e[0])
    # refine runs whose sort window coincides (rare, long members only)
    i = 0
    while i < len(entries):
        j = i + 1
        while j < len(entries) and entries[j][0] == entries[i][0] and len(entries[i][0]) == _SORT_WINDOW:
            j += 1
        if j - i > 1:
            entries[i:j] = sorted(entries[i:j], key=lambda e: e[1].rotation(e[2]))
        i = j
    return entries


def _lcp(e1, e2) -> int:
    _, f1, s1, n1 = e1
    _, f2, s2, n2 = e2
    d1, d2 = f1.doubled, f2.doubled
    top = min(n1, n2)
    i = 0
    while i < top and d1[s1 + i] == d2[s2 + i]:
        i += 1
    return i


def max_piece(s: SymmetrizedSet, lam: Fraction = Fraction(1, 6)) -> SmallCancellationReport:
    """Longest common prefix between distinct members, and the C'(lam) verdict.

    Sorting the members puts each one next to the member it shares the
    longest prefix with, so only adjacent pairs need comparing.
    """
    tiny = sum(1 for f in s.families for _ in range(f.period) if len(f.word) <= 2)
    entries = _sorted_entries(s)
    if len(entries) < 2:
        return SmallCancellationReport(0, None, True, lam, tiny)
    best_len = 0
    best_pair = None
    satisfies = True
    lcps = [_lcp(entries[i], entries[i + 1]) for i in range(len(entries) - 1)]
    for i, entry in enumerate(entries):
        p = 0
        if i > 0:
            p = max(p, lcps[i - 1])
        if i < len(lcps):
            p = max(p, lcps[i])
        n = entry[3]
        if p * lam.denominator >= n * lam.numerator:
            satisfies = False
        if p > best_len:
            best_len = p
            nb = i - 1 if i > 0 and lcps[i - 1] == p else i + 1
            best_pair = (entry, entries[nb])
    witness = None
    if best_pair is not None and best_len > 0:
        m1 = best_pair[0][1].rotation(best_pair[0][2])
        m2 = best_pair[1][1].rotation(best_pair[1][2])
        witness = (m1[:best_len], m1, m2)
    return SmallCancellationReport(best_len, witness, satisfies, lam, tiny)


@lru_cache(maxsize=256)
def verify_c_prime(p: Presentation, lam: Fraction = Fraction(1, 6)) -> SmallCancellationReport:
    return max_piece(symmetrize(p), lam)


def _local_reduce(w: list, seam: int) -> int:
    """Cancel inverse pairs around position seam of w, in place.

    Returns the leftmost index touched, so the caller knows where a new
    match could earliest appear.
    """
    i = seam
    while 0 < i <= len(w) - 1 and w[i - 1] == -w[i]:
        del w[i - 1:i + 1]
        i -= 1
    return i


def dehn_reduce(s: SymmetrizedSet, w) -> tuple[Word, int]:
    """Greedy Dehn reduction of w against the symmetrized set s.

    Repeatedly: freely reduce, keep only the cyclically reduced core, and
    replace the leftmost subword u that is more than half of some member
    r = u·v by v⁻¹ (longest u at a position wins, then the smallest r).
    Every replacement strictly shortens the word; the scan resumes just
    left of the edit and a final full pass confirms a stall before the
    loop gives up.
    """
    word = list(free_reduce(w))
    steps = 0
    if not s:
        core, _ = cyclic_reduce(tuple(word))
        return core, 0
    back = min(s.max_member_length, 64)
    scan_from = 0
    confirmed = False
    while True:
        word = list(cyclic_reduce(tuple(word))[0])
        if not word:
            break
        hit = None
        for pos in range(scan_from, len(word)):
            hit = s.best_match_at(word, pos)
            if hit is not None:
                mu, fam, start, n = hit
                replacement = invert(fam.doubled[start + mu:start + n])
                word[pos:pos + mu] = replacement
                seam = _local_reduce(word, pos + len(replacement))
                _local_reduce(word, pos)
                steps += 1
                scan_from = max(0, min(pos, seam) - back)
                confirmed = False
                break
        if hit is None:
            if scan_from == 0 or confirmed:
                break
            # nothing right of the resume point: one exact pass from the top
            scan_from = 0
            confirmed = True
    return tuple(word), steps


def word_problem(p: Presentation, w) -> WpVerdict:
    """Decide triviality of w in the group presented by p via Dehn's algorithm.

    Refuses to answer unless p passes C'(1/6); the check is cached per
    presentation.
    """
    report = verify_c_prime(p, Fraction(1, 6))
    if not report.satisfies_lambda:
        raise NotSmallCancellation(report)
    reduced, steps = dehn_reduce(symmetrize(p), w)
    return WpVerdict(trivial=not reduced, steps=steps)


def random_presentation(rng: Rng, k_range: tuple[int, int], m_range: tuple[int, int],
                        length_range: tuple[int, int]) -> Presentation:
    """Random presentation: k generators, m independent random relators."""
    k = rng.randint(*k_range)
    m = rng.randint(*m_range)
    relators = []
    while len(relators) < m:
        w = random_reduced_word(rng, k, rng.randint(*length_range))
        core, _ = cyclic_reduce(w)
        if core:
            relators.append(core)
    return Presentation(k, relators)
