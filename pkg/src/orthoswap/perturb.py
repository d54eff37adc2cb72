"""
Random 2x2 cross swaps.

A swap turns the pattern ``[[1, 0], [0, 1]]`` at rows (i1, i2) and columns
(j1, j2) into ``[[0, 1], [1, 0]]``. Every row and column weight is unchanged.

Randomness comes from a self-contained xoshiro256** stream seeded through
splitmix64, so a 64-bit seed gives the same draws on every platform and
Python version.

Swap sampling is row-first: two distinct rows are drawn uniformly, then j1
uniformly from the columns only the first row covers and j2 from those only
the second covers. This is *not* uniform over all admissible quadruples;
row pairs with small symmetric difference are over-represented.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gf2 import BitMatrix, bits_of

_MASK64 = (1 << 64) - 1


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Xoshiro256:
    """xoshiro256** 1.0 (Blackman & Vigna)."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        sm = self.seed
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self.s = s

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection of the biased tail."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def getstate(self) -> tuple[int, ...]:
        return tuple(self.s)

    def setstate(self, state) -> None:
        self.s = list(state)


class NoValidSwapError(RuntimeError):
    pass


class InvalidSwapError(ValueError):
    pass


@dataclass(frozen=True)
class CrossSwap:
    i1: int
    j1: int
    i2: int
    j2: int

    def is_valid_for(self, h: BitMatrix) -> bool:
        if self.i1 == self.i2 or self.j1 == self.j2:
            return False
        try:
            return (
                h[self.i1, self.j1] == 1
                and h[self.i2, self.j2] == 1
                and h[self.i1, self.j2] == 0
                and h[self.i2, self.j1] == 0
            )
        except IndexError:
            return False

    def mirrored(self) -> "CrossSwap":
        """The swap that undoes this one on the swapped matrix."""
        return CrossSwap(self.i1, self.j2, self.i2, self.j1)

    @classmethod
    def parse(cls, text: str) -> "CrossSwap":
        parts = [int(t) for t in text.replace(" ", "").split(",")]
        if len(parts) != 4:
            raise ValueError("swap must be 'i1,j1,i2,j2'")
        return cls(*parts)


def sample_cross_swap(h: BitMatrix, rng: Xoshiro256, max_attempts: int | None = None) -> CrossSwap:
    if h.nrows < 2 or h.ncols < 2:
        raise NoValidSwapError("matrix needs at least 2 rows and 2 columns")
    if max_attempts is None:
        max_attempts = 128 * h.nrows
    for _ in range(max_attempts):
        i1 = rng.below(h.nrows)
        i2 = rng.below(h.nrows - 1)
        if i2 >= i1:
            i2 += 1
        only1 = h.rows[i1] & ~h.rows[i2]
        only2 = h.rows[i2] & ~h.rows[i1]
        if not only1 or not only2:
            continue
        c1 = bits_of(only1)
        c2 = bits_of(only2)
        j1 = c1[rng.below(len(c1))]
        j2 = c2[rng.below(len(c2))]
        return CrossSwap(i1, j1, i2, j2)
    raise NoValidSwapError(f"no valid swap found in {max_attempts} attempts")


def apply_cross_swap(h: BitMatrix, sw: CrossSwap) -> BitMatrix:
    if not sw.is_valid_for(h):
        raise InvalidSwapError(f"{sw} is not a valid cross swap for this matrix")
    out = h.copy()
    flip = (1 << sw.j1) | (1 << sw.j2)
    out.rows[sw.i1] ^= flip
    out.rows[sw.i2] ^= flip
    return out
