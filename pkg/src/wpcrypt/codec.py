"""Bit transport: 1-bits as words trivial in the public group, 0-bits as
random commutator-subgroup words, both wrapped as [x', u] and shuffled.

Shuffling repeatedly inserts cancelling pairs, rewrites two-letter chunks
through the short public relators, and freely reduces, so the transmitted
word equals the original in the public group but no longer displays the
relator factors it was built from.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil

from .keygen import ProtocolParams, PrivateKey, PublicKey
from .presentations import Presentation, SymmetrizedSet, word_problem
from .tietze import MissingEntry, apply_substitution
from .words import (Rng, Word, commutator, exponent_vector, free_reduce, invert,
                    random_commutator_word, random_reduced_word)


class NoShortRelators(Exception):
    """Public key lacks the length-3/4 relators the codec rewrites with."""


@dataclass(frozen=True)
class Ciphertext:
    words: tuple  # one Word per plaintext bit


@lru_cache(maxsize=64)
def _rewrite_table(pres: Presentation) -> dict:
    """Two-letter chunk -> candidate replacements, from short relators.

    For every symmetrized member m of length 3 or 4, the leading pair
    m[0:2] may be replaced by invert(m[2:]): both sides are equal in the
    group, and rotations/inverses of the relators cover every two-letter
    chunk of each short relator in every reading.
    """
    shorts = [r for r in pres.relators if len(r) in (3, 4)]
    if not shorts:
        raise NoShortRelators("public presentation has no relators of length 3 or 4")
    table: dict[tuple, list] = {}
    for member in SymmetrizedSet(shorts):
        repl = invert(member[2:])
        bucket = table.setdefault(member[:2], [])
        if repl not in bucket:
            bucket.append(repl)
    for bucket in table.values():
        bucket.sort()
    return table


def shuffle(pub: PublicKey, w, rounds: int, rng: Rng, p: int) -> Word:
    """`rounds` passes of insert / rewrite / clean-up over w, then reduce.

    Each pass inserts ceil(2p/k) cancelling generator pairs at random
    spots, scans left to right replacing any two-letter chunk found in the
    rewrite table (random choice among candidates, resuming after the
    replacement), and removes the inserted pairs that no replacement
    consumed.  Only the final result is freely reduced: reducing between
    passes lets seam cancellations cascade and grinds words whose value is
    1 all the way down to the empty word, which would both advertise the
    bit and defeat the point of shuffling.  The group value of w never
    changes.
    """
    table = _rewrite_table(pub.presentation)
    k = pub.presentation.k
    inserts = ceil(2 * p / k)
    word = list(w)
    for _ in range(rounds):
        fresh = [False] * len(word)
        for _ in range(inserts):
            pos = rng.below(len(word) + 1)
            g = rng.randint(1, k)
            pair = (g, -g) if rng.below(2) else (-g, g)
            word[pos:pos] = pair
            fresh[pos:pos] = (True, True)
        out: list[int] = []
        out_fresh: list[bool] = []
        i = 0
        n = len(word)
        while i < n:
            if i + 1 < n:
                cands = table.get((word[i], word[i + 1]))
                if cands:
                    repl = cands[rng.below(len(cands))]
                    out.extend(repl)
                    out_fresh.extend([False] * len(repl))
                    i += 2
                    continue
            out.append(word[i])
            out_fresh.append(fresh[i])
            i += 1
        word = []
        i = 0
        n = len(out)
        while i < n:
            if (i + 1 < n and out_fresh[i] and out_fresh[i + 1]
                    and out[i] == -out[i + 1]):
                i += 2
                continue
            word.append(out[i])
            i += 1
    return free_reduce(word)


def _symmetrized_short_members(pub: PublicKey) -> list:
    table = _rewrite_table(pub.presentation)
    members = set()
    for pair, bucket in table.items():
        for repl in bucket:
            members.add(pair + invert(repl))
    return sorted(members)


def encode_one(pub: PublicKey, rng: Rng, params: ProtocolParams) -> Word:
    """A word equal to 1 in the public group, shaped like [x', u].

    u is a product of p short symmetrized relators, each optionally
    conjugated by one or two letters, then shuffled; the commutator wrap
    matches the shape of the 0-encoding and the whole word is shuffled
    again.
    """
    members = _symmetrized_short_members(pub)
    k = pub.presentation.k
    p = rng.randint(*params.p_range)
    while True:
        parts: list[int] = []
        for _ in range(p):
            m = members[rng.below(len(members))]
            c = random_reduced_word(rng, k, rng.below(3))
            parts.extend(c + m + invert(c))
        u = shuffle(pub, free_reduce(parts), p, rng, p)
        w = commutator((pub.special,), u)
        if w:
            break
    return shuffle(pub, w, ceil(len(w) / 2), rng, p)


def _zero_core(pub: PublicKey, rng: Rng, params: ProtocolParams) -> tuple[Word, int]:
    """The unshuffled 0-encoding [x', u] and the drawn length of u.

    u is redrawn until its ends do not interact with x', so the wrapped
    word has length exactly 2|u| + 2.
    """
    k = pub.presentation.k
    x = pub.special
    while True:
        u = random_commutator_word(rng, k, params.u_len_range)
        if u and abs(u[0]) != x and abs(u[-1]) != x:
            return commutator((x,), u), len(u)


def encode_zero(pub: PublicKey, rng: Rng, params: ProtocolParams) -> Word:
    """A word almost surely not equal to 1: [x', u] for a random
    commutator-subgroup word u, shuffled like the 1-encoding."""
    p = rng.randint(*params.p_range)
    w, _ = _zero_core(pub, rng, params)
    return shuffle(pub, w, ceil(len(w) / 2), rng, p)


def encrypt(pub: PublicKey, bits: str, master_seed: int,
            params: ProtocolParams | None = None) -> Ciphertext:
    """Encode a 0/1 string, one word per bit.

    Bit i uses the child stream derive(master_seed, i), so the result is
    independent of evaluation order and reproducible bit by bit.
    """
    params = params or ProtocolParams()
    base = Rng(master_seed)
    words = []
    for i, b in enumerate(bits):
        if b not in "01":
            raise ValueError(f"plaintext must be 0/1, found {b!r} at index {i}")
        rng = base.derive(i)
        words.append(encode_one(pub, rng, params) if b == "1"
                     else encode_zero(pub, rng, params))
    return Ciphertext(tuple(words))


def decrypt(priv: PrivateKey, ct: Ciphertext) -> str:
    """Recover bits: substitute each word into the private generators and
    solve the word problem there.  Trivial means 1, otherwise 0."""
    out = []
    for w in ct.words:
        for s in w:
            if not 1 <= abs(s) <= priv.k_pub:
                raise MissingEntry(f"ciphertext letter {s} outside public generators")
        image = apply_substitution(priv.psi, w)
        verdict = word_problem(priv.presentation, image)
        out.append("1" if verdict.trivial else "0")
    return "".join(out)
