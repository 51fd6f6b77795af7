"""Isomorphism-preserving presentation moves with an inverse-map table.

A TietzeSession owns a presentation being transformed and a substitution
table psi mapping every current generator to a word over the ORIGINAL
generators.  psi realizes the inverse isomorphism: any word trivial in the
current presentation substitutes to a word trivial in the original one.

Supported moves: introducing a generator with a defining relator (T1),
elementary free-group automorphisms (T3), relator rewriting inside the
same normal closure (T4'), relator breaking, and free-product padding by
a presentation of the trivial group.  Cancelling a generator (T2) is not
implemented; nothing downstream needs it.
"""
from __future__ import annotations

from .presentations import Presentation
from .words import Rng, Word, cyclic_reduce, free_reduce, invert


class EmptyIntroduction(Exception):
    """T1 with a word that freely reduces to nothing."""


class DegenerateRelator(Exception):
    """A relator move produced the empty word; the move is refused."""


class MissingEntry(Exception):
    """Substitution hit a generator without a table entry."""


class KeyTooLarge(Exception):
    """A substitution entry outgrew the configured cap."""


class TooShort(Exception):
    """Relator too short to break."""


# Presentations of the trivial group used for free-product padding.
# Preset 0 is the classic balanced pair x y x^-1 = y^2, y x y^-1 = x^2.
TRIVIAL_GROUP_PRESETS = (
    ((1, 2, -1, -2, -2), (2, 1, -2, -1, -1)),
)


def apply_substitution(psi: dict, w) -> Word:
    """Letterwise substitution through the table, freely reduced."""
    out: list[int] = []
    for s in w:
        entry = psi.get(abs(s))
        if entry is None:
            raise MissingEntry(f"no substitution entry for generator {abs(s)}")
        out.extend(entry if s > 0 else invert(entry))
    return free_reduce(out)


class TietzeSession:
    def __init__(self, start: Presentation, max_entry: int = 4096):
        self.original = start
        self.current = start
        self.max_entry = max_entry
        self.psi: dict[int, Word] = {i: (i,) for i in range(1, start.k + 1)}
        self.history: list[tuple] = []

    # -- internals ------------------------------------------------------

    def _set_entry(self, gen: int, word: Word) -> None:
        if len(word) > self.max_entry:
            raise KeyTooLarge(
                f"substitution entry for generator {gen} has {len(word)} letters "
                f"(cap {self.max_entry})")
        self.psi[gen] = word

    def _replace_relators(self, relators) -> None:
        self.current = Presentation(self.current.k, relators)

    def _check_gen(self, i: int) -> None:
        if not 1 <= i <= self.current.k:
            raise IndexError(f"generator {i} out of range 1..{self.current.k}")

    # -- moves ------------------------------------------------------------

    def t1_introduce(self, s) -> int:
        """Add generator y with defining relator y·s⁻¹; returns y's index.

        psi(y) is the substituted image of s, so the new relator maps to
        the empty word over the original generators.
        """
        s = free_reduce(s)
        if not s:
            raise EmptyIntroduction("cannot introduce a generator equal to the empty word")
        for letter in s:
            self._check_gen(abs(letter))
        y = self.current.k + 1
        relator = (y,) + invert(s)
        image = apply_substitution(self.psi, s)
        self.current = Presentation(y, self.current.relators + (relator,))
        self._set_entry(y, image)
        self.history.append(("t1", s))
        return y

    def t3_nielsen(self, kind: str, i: int, j: int | None = None, sign: int = 1) -> None:
        """Apply an elementary automorphism to every relator.

        kind "right": x_i -> x_i·x_j^sign;  "left": x_i -> x_j^sign·x_i;
        kind "invert": x_i -> x_i⁻¹.  psi is updated through the inverse
        automorphism, so only entry i changes.
        """
        self._check_gen(i)
        if kind == "invert":
            image = (-i,)
            self._set_entry(i, invert(self.psi[i]))
        elif kind in ("right", "left"):
            if j is None or sign not in (1, -1):
                raise ValueError("right/left moves need j and sign ±1")
            self._check_gen(j)
            if i == j:
                raise IndexError("Nielsen move needs i != j")
            image = (i, j * sign) if kind == "right" else (j * sign, i)
            other = self.psi[j] if sign < 0 else invert(self.psi[j])
            mine = self.psi[i]
            new = free_reduce(mine + other) if kind == "right" else free_reduce(other + mine)
            self._set_entry(i, new)
        else:
            raise ValueError(f"unknown Nielsen move {kind!r}")

        def phi(word):
            out = []
            for s in word:
                if abs(s) == i:
                    out.extend(image if s > 0 else invert(image))
                else:
                    out.append(s)
            return free_reduce(out)

        self._replace_relators(phi(r) for r in self.current.relators)
        self.history.append(("t3", kind, i, j, sign))

    def t4_prime(self, kind: str, i: int, j: int | None = None,
                 sign: int = 1, gen: int | None = None) -> None:
        """Rewrite relator i inside the same normal closure; psi is untouched.

        kind "invert": r_i -> r_i⁻¹;  "mul_right"/"mul_left": multiply by
        r_j^sign;  "conjugate": r_i -> x_gen^-sign · r_i · x_gen^sign.
        """
        rel = list(self.current.relators)
        if not 0 <= i < len(rel):
            raise IndexError(f"relator index {i} out of range")
        if kind == "invert":
            new = invert(rel[i])
        elif kind in ("mul_right", "mul_left"):
            if j is None or j == i or not 0 <= j < len(rel):
                raise IndexError("product move needs a distinct valid relator index")
            other = rel[j] if sign > 0 else invert(rel[j])
            new = free_reduce(rel[i] + other) if kind == "mul_right" else free_reduce(other + rel[i])
        elif kind == "conjugate":
            if gen is None:
                raise ValueError("conjugation move needs a generator")
            self._check_gen(abs(gen))
            new = free_reduce((-gen,) + rel[i] + (gen,))
        else:
            raise ValueError(f"unknown relator move {kind!r}")
        core, _ = cyclic_reduce(new)
        if not core:
            raise DegenerateRelator("move would produce an empty relator")
        rel[i] = core
        self._replace_relators(rel)
        self.history.append(("t4", kind, i, j, sign, gen))

    def break_relator(self, index: int, split: int = 0, carve: int = 2) -> int:
        """Carve a short prefix off relator `index` into a new generator.

        Rotates the (cyclic) relator to `split`, introduces y equal to the
        first `carve` letters u, and replaces the relator u·u' by y·u'.
        Returns the new generator index.
        """
        rel = list(self.current.relators)
        if not 0 <= index < len(rel):
            raise IndexError(f"relator index {index} out of range")
        r = rel[index]
        if len(r) < 5:
            raise TooShort(f"relator of length {len(r)} cannot be broken")
        if carve not in (2, 3):
            raise ValueError("carve length must be 2 or 3")
        split %= len(r)
        rotated = r[split:] + r[:split]
        u, rest = rotated[:carve], rotated[carve:]
        y = self.t1_introduce(u)
        rel = list(self.current.relators)  # includes the new defining relator
        rel[index] = (y,) + rest
        self._replace_relators(rel)
        self.history.append(("break", index, split, carve))
        return y

    def pad_with_trivial_group(self, rng: Rng, preset: int = 0) -> None:
        """Free-product padding: fresh generators presenting the trivial group.

        The new generators are trivial in the original group, so their psi
        entries are empty words.  Mixing them into the rest of the
        presentation is the caller's job.
        """
        relators = TRIVIAL_GROUP_PRESETS[preset]
        base = self.current.k
        q = max(abs(s) for r in relators for s in r)
        shifted = [tuple(s + base if s > 0 else s - base for s in r) for r in relators]
        rng.shuffle(shifted)
        self.current = Presentation(base + q, self.current.relators + tuple(shifted))
        for g in range(base + 1, base + q + 1):
            self._set_entry(g, ())
        self.history.append(("pad", preset))

    def snapshot(self) -> tuple[Presentation, dict]:
        return self.current, dict(self.psi)
