"""Free-group word algebra over signed integer letters.

A word is a tuple of nonzero ints: ``3`` is the third generator, ``-3`` its
inverse.  The empty tuple is the identity.  All functions return fresh,
freely reduced tuples; nothing here mutates its arguments.
"""
from __future__ import annotations

from typing import Iterable, Sequence

Word = tuple  # tuple[int, ...]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    """Stafford mix13 finalizer, the output stage of splitmix64."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """Deterministic splitmix64 stream.

    Same seed, same sequence, on every platform; no OS entropy is ever
    consulted.  Child streams for parallel work come from :meth:`derive`.
    """

    __slots__ = ("_seed", "_state")

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._state = self._seed

    @property
    def seed(self) -> int:
        return self._seed

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def below(self, n: int) -> int:
        """Uniform int in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError(f"below() needs n >= 1, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform int in the closed interval [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        return lo + self.below(hi - lo + 1)

    def choice(self, seq: Sequence):
        return seq[self.below(len(seq))]

    def shuffle(self, xs: list) -> None:
        for i in range(len(xs) - 1, 0, -1):
            j = self.below(i + 1)
            xs[i], xs[j] = xs[j], xs[i]

    def derive(self, index: int) -> "Rng":
        """Independent child stream for the given index.

        Deterministic in (seed, index); does not advance this stream.
        """
        return Rng(_mix64(self._seed ^ _mix64((index + 1) * _GOLDEN)))


def free_reduce(w: Iterable[int]) -> Word:
    """Cancel adjacent inverse pairs until none remain (single stack pass)."""
    out: list[int] = []
    push = out.append
    pop = out.pop
    for s in w:
        if out and out[-1] == -s:
            pop()
        else:
            push(s)
    return tuple(out)


def invert(w: Sequence[int]) -> Word:
    return tuple(-s for s in reversed(w))


def concat(*ws: Sequence[int]) -> Word:
    """Freely reduced concatenation."""
    joined: list[int] = []
    for w in ws:
        joined.extend(w)
    return free_reduce(joined)


def cyclic_reduce(w: Sequence[int]) -> tuple[Word, Word]:
    """Split w into (core, prefix) with prefix·core·prefix⁻¹ ≃ w.

    The core is cyclically reduced: its first letter is not the inverse of
    its last.
    """
    r = free_reduce(w)
    i, j = 0, len(r)
    while j - i >= 2 and r[i] == -r[j - 1]:
        i += 1
        j -= 1
    return r[i:j], r[:i]


def commutator(a: Sequence[int], b: Sequence[int]) -> Word:
    """[a, b] = a⁻¹ b⁻¹ a b, freely reduced."""
    return free_reduce(invert(a) + invert(b) + tuple(a) + tuple(b))


def exponent_vector(w: Sequence[int], k: int) -> tuple:
    """Per-generator exponent sums of w, as a length-k tuple."""
    e = [0] * k
    for s in w:
        i = abs(s)
        if not 1 <= i <= k:
            raise IndexError(f"generator {i} out of range 1..{k}")
        e[i - 1] += 1 if s > 0 else -1
    return tuple(e)


def _decode_symbol(code: int) -> int:
    # 0 -> +1, 1 -> -1, 2 -> +2, 3 -> -2, ...
    i = code // 2 + 1
    return i if code % 2 == 0 else -i


def _encode_symbol(letter: int) -> int:
    return (abs(letter) - 1) * 2 + (0 if letter > 0 else 1)


def random_reduced_word(rng: Rng, k: int, n: int) -> Word:
    """Uniform reduced word of length exactly n over k generators.

    First letter uniform over the 2k signed symbols, every later letter
    uniform over the 2k-1 symbols that do not cancel its predecessor.
    """
    if k < 1:
        raise ValueError("need at least one generator")
    if n < 0:
        raise ValueError("negative length")
    if n == 0:
        return ()
    letters = [_decode_symbol(rng.below(2 * k))]
    for _ in range(n - 1):
        forbidden = _encode_symbol(-letters[-1])
        code = rng.below(2 * k - 1)
        if code >= forbidden:
            code += 1
        letters.append(_decode_symbol(code))
    return tuple(letters)


def _zero_exponent_length_exists(k: int, lo: int, hi: int) -> bool:
    # Reduced words with zero exponent vector have even length; length 2 is
    # impossible, and with a single generator only the empty word qualifies.
    for n in range(lo, hi + 1):
        if n == 0:
            return True
        if k >= 2 and n % 2 == 0 and n >= 4:
            return True
    return False


def random_commutator_word(rng: Rng, k: int, len_range: tuple[int, int]) -> Word:
    """Random reduced word with zero exponent sum on every generator.

    Draws a random reduced word, then repairs its exponent vector: flip the
    sign of a random occurrence of an offending generator (moves that
    exponent by 2), inserting one balancing letter first when the exponent
    is odd.  Restarts from a fresh word if the length drifts out of range
    or after 1000 repair rounds.
    """
    lo, hi = len_range
    if lo > hi or lo < 0:
        raise ValueError(f"bad length range [{lo}, {hi}]")
    if not _zero_exponent_length_exists(k, lo, hi):
        raise ValueError(f"no zero-exponent word of length in [{lo}, {hi}] over {k} generators")
    while True:
        w = list(random_reduced_word(rng, k, rng.randint(lo, hi)))
        for _ in range(1000):
            w = list(free_reduce(w))
            if not lo <= len(w) <= hi:
                break
            e = exponent_vector(w, k)
            bad = [i + 1 for i, v in enumerate(e) if v]
            if not bad:
                return tuple(w)
            i = rng.choice(bad)
            v = e[i - 1]
            if v % 2:
                pos = rng.below(len(w) + 1)
                w.insert(pos, -i if v > 0 else i)
                continue
            target = i if v > 0 else -i
            hits = [p for p, s in enumerate(w) if s == target]
            w[rng.choice(hits)] = -target
