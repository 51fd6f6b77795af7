"""Key generation: seed presentation, diffusion, abridging, special relator.

The private side is a random C'(1/6) presentation plus the substitution
table realizing the inverse of the diffusion isomorphism.  The public side
is the diffused presentation with most relators discarded and one extra
relation forcing the special generator into the commutator subgroup.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .presentations import (Presentation, SymmetrizedSet, random_presentation,
                            symmetrize, verify_c_prime)
from .tietze import DegenerateRelator, TietzeSession, apply_substitution
from .words import Rng, Word, cyclic_reduce, free_reduce, invert, random_reduced_word


class RetryExhausted(Exception):
    def __init__(self, stage: str, attempts: int, failures: dict):
        self.stage = stage
        self.attempts = attempts
        self.failures = dict(failures)
        detail = ", ".join(f"{k}={v}" for k, v in sorted(failures.items())) or "none"
        super().__init__(f"{stage}: gave up after {attempts} attempts ({detail})")


class ConstraintUnsatisfiable(Exception):
    """No relator subset meets the public short-relator constraint."""


@dataclass(frozen=True)
class ProtocolParams:
    """All tunables of the scheme, with working defaults.

    relator_len_range defaults to (31, 37) rather than the often-quoted
    (12, 20): at 10-30 relators over 10-20 generators, random words of
    length 12-20 almost never satisfy C'(1/6) (measured ~0.7% per draw),
    so key generation cannot complete there.  `short_relator_variant()`
    exposes the short lengths for experiments.
    """

    k_range: tuple = (10, 20)
    m_range: tuple = (10, 30)
    relator_len_range: tuple = (31, 37)
    t1_relator_len_range: tuple = (12, 20)
    mixing_moves: int = 50
    t1_percent: int = 12           # share of the mixing moves that are T1
    t4prime_premix_factor: int = 2  # premix move count = factor * relator count
    special_commutators: int = 10   # M
    target_short_fraction: float = 0.30
    discard_fraction: float = 0.70
    min_short_fraction_public: float = 0.50
    p_range: tuple = (5, 12)
    u_len_range: tuple = (65, 85)
    retry_cap: int = 50
    max_psi_entry: int = 4096
    pad_trivial_group: bool = False

    @classmethod
    def short_relator_variant(cls) -> "ProtocolParams":
        return cls(relator_len_range=(12, 20))


@dataclass(frozen=True)
class PublicKey:
    presentation: Presentation
    special: int  # index of the wrapped generator x'

    def short_relators(self) -> tuple:
        return tuple(r for r in self.presentation.relators if len(r) in (3, 4))


@dataclass(frozen=True)
class PrivateKey:
    presentation: Presentation       # seed relators + special-relator preimage
    special: int
    psi: dict = field(compare=False)  # public generator -> word over private generators
    k_pub: int = 0

    def symmetrized(self) -> SymmetrizedSet:
        return symmetrize(self.presentation)


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    private: PrivateKey


def generate_seed_presentation(rng: Rng, params: ProtocolParams) -> Presentation:
    """Random presentation, redrawn until it satisfies C'(1/6)."""
    failures = {"not_small_cancellation": 0}
    for attempt in range(params.retry_cap):
        p = random_presentation(rng, params.k_range, params.m_range,
                                params.relator_len_range)
        if verify_c_prime(p).satisfies_lambda:
            return p
        failures["not_small_cancellation"] += 1
    raise RetryExhausted("seed presentation", params.retry_cap, failures)


def _premix(session: TietzeSession, rng: Rng, params: ProtocolParams) -> None:
    moves = params.t4prime_premix_factor * len(session.current.relators)
    n = len(session.current.relators)
    done = 0
    while done < moves:
        roll = rng.below(10)
        try:
            if roll < 7 and n >= 2:
                i = rng.below(n)
                j = rng.below(n - 1)
                if j >= i:
                    j += 1
                kind = "mul_right" if rng.below(2) else "mul_left"
                session.t4_prime(kind, i, j, sign=1 if rng.below(2) else -1)
            elif roll < 8:
                session.t4_prime("invert", rng.below(n))
            else:
                g = rng.randint(1, session.current.k)
                session.t4_prime("conjugate", rng.below(n),
                                 gen=g if rng.below(2) else -g)
        except DegenerateRelator:
            continue
        done += 1


def _mix(session: TietzeSession, rng: Rng, params: ProtocolParams) -> None:
    """The budgeted interleaving of T1 and T3 moves.

    T1 words and the extending letters of T3 moves are drawn over the seed
    generators.  Keeping the substitution entries inside the seed alphabet
    bounds their growth, which both caps decryption cost (linear in the
    entry lengths) and keeps the special-relator preimage short enough for
    the final C'(1/6) check to have a real chance.
    """
    k0 = session.original.k
    for _ in range(params.mixing_moves):
        if rng.below(100) < params.t1_percent:
            length = rng.randint(params.t1_relator_len_range[0] - 1,
                                 params.t1_relator_len_range[1] - 1)
            session.t1_introduce(random_reduced_word(rng, k0, length))
        else:
            i = rng.randint(1, session.current.k)
            if rng.below(10) == 0:
                session.t3_nielsen("invert", i)
                continue
            j = rng.randint(1, k0)
            while j == i:
                j = rng.randint(1, k0)
            session.t3_nielsen("right" if rng.below(2) else "left", i, j,
                               sign=1 if rng.below(2) else -1)


def _short_fraction(p: Presentation) -> float:
    if not p.relators:
        return 0.0
    return sum(1 for r in p.relators if len(r) <= 4) / len(p.relators)


def _break_windows(r: Word, k0: int, carve: int) -> list:
    """Cyclic offsets where `carve` consecutive letters are all seed letters."""
    n = len(r)
    doubled = r + r
    return [s for s in range(n)
            if all(abs(doubled[s + t]) <= k0 for t in range(carve))]


def _break_until_short(session: TietzeSession, rng: Rng, params: ProtocolParams) -> None:
    k0 = session.original.k
    while _short_fraction(session.current) < params.target_short_fraction:
        candidates = []
        for idx, r in enumerate(session.current.relators):
            if len(r) < 5:
                continue
            windows = _break_windows(r, k0, 3)
            if windows:
                candidates.append((idx, windows))
        if not candidates:
            raise ConstraintUnsatisfiable("no breakable relator left")
        idx, windows = rng.choice(candidates)
        session.break_relator(idx, split=rng.choice(windows), carve=3)


def _discard(session: TietzeSession, rng: Rng, params: ProtocolParams) -> Presentation:
    relators = session.current.relators
    n = len(relators)
    keep = round((1.0 - params.discard_fraction) * n)
    keep = max(keep, 1)
    need_short = math.ceil(params.min_short_fraction_public * keep)
    indices = list(range(n))
    for _ in range(1000):
        rng.shuffle(indices)
        chosen = sorted(indices[:keep])
        shorts = sum(1 for i in chosen if len(relators[i]) <= 4)
        if shorts >= max(need_short, 1):
            return Presentation(session.current.k, (relators[i] for i in chosen))
    raise ConstraintUnsatisfiable(
        f"no {keep}-relator subset with >= {need_short} short relators found")


def mix_and_abridge(rng: Rng, seed: Presentation,
                    params: ProtocolParams) -> tuple[TietzeSession, Presentation]:
    """Diffuse the seed presentation and discard most relators.

    Returns the live session (whose psi realizes the inverse isomorphism)
    and the abridged public presentation.
    """
    session = TietzeSession(seed, params.max_psi_entry)
    _premix(session, rng, params)
    if params.pad_trivial_group:
        session.pad_with_trivial_group(rng)
    _mix(session, rng, params)
    _break_until_short(session, rng, params)
    return session, _discard(session, rng, params)


def _draw_special_factor(rng: Rng, k: int, special: int) -> Word:
    while True:
        w = random_reduced_word(rng, k, rng.randint(1, 2))
        if all(abs(s) != special for s in w):
            return w


def add_special_relator(rng: Rng, session: TietzeSession, abridged: Presentation,
                        m_commutators: int) -> tuple[Presentation, int, Presentation]:
    """Append x' = prod of M commutators [x', w_j] to the public presentation.

    Returns (public presentation, special index, private presentation); the
    private one is the session's original presentation extended by the
    substituted preimage of the new relation.
    """
    if abridged.k < 2:
        raise ValueError("abridged presentation needs at least 2 generators")
    special = rng.randint(1, abridged.k)
    parts: list[int] = [-special]
    for _ in range(m_commutators):
        w = _draw_special_factor(rng, abridged.k, special)
        parts.extend((-special,) + invert(w) + (special,) + w)
    relator = free_reduce(parts)
    public = Presentation(abridged.k, abridged.relators + (relator,))
    preimage, _ = cyclic_reduce(apply_substitution(session.psi, relator))
    if not preimage:
        raise DegenerateRelator("special relator substitutes to the empty word")
    original = session.original
    final = Presentation(original.k, original.relators + (preimage,))
    return public, special, final


def _collides_with_seed(public: Presentation, seed: Presentation) -> bool:
    seen = set(seed.relators) | {invert(r) for r in seed.relators}
    return any(r in seen for r in public.relators)


def keygen(rng: Rng, params: ProtocolParams | None = None) -> KeyPair:
    """Full pipeline with restart-on-failure, bounded by params.retry_cap."""
    params = params or ProtocolParams()
    failures: dict[str, int] = {}

    def note(reason: str):
        failures[reason] = failures.get(reason, 0) + 1

    for attempt in range(params.retry_cap):
        try:
            seed = generate_seed_presentation(rng, params)
        except RetryExhausted as exc:
            raise RetryExhausted("keygen", attempt + 1,
                                 {**failures, **exc.failures}) from exc
        try:
            session, abridged = mix_and_abridge(rng, seed, params)
            public_pres, special, final = add_special_relator(
                rng, session, abridged, params.special_commutators)
        except (ConstraintUnsatisfiable, DegenerateRelator) as exc:
            note(type(exc).__name__)
            continue
        if not verify_c_prime(final, Fraction(1, 6)).satisfies_lambda:
            note("final_not_small_cancellation")
            continue
        if _collides_with_seed(public_pres, seed):
            note("seed_relator_leaked")
            continue
        private = PrivateKey(presentation=final, special=special,
                             psi=dict(session.psi), k_pub=public_pres.k)
        private.symmetrized()  # warm the cache the decrypt path uses
        return KeyPair(PublicKey(public_pres, special), private)
    raise RetryExhausted("keygen", params.retry_cap, failures)
