"""
128-bit xorshift generator with seeds computed up front.

xorshift has no cheap skip-ahead, so substreams are independent seeds drawn
from the MRG32k3a master stream before any sampling starts.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..exceptions import ConfigurationError
from . import constants as C
from .mrg32k3a import box_muller


@dataclass(frozen=True)
class XorshiftState:
    words: Tuple[int, int, int, int]

    def __post_init__(self):
        words = tuple(int(w) & C.XORSHIFT_MASK for w in self.words)
        if len(words) != C.XORSHIFT_WORDS:
            raise ConfigurationError(f"xorshift128 state needs {C.XORSHIFT_WORDS} words")
        if not any(words):
            raise ConfigurationError('xorshift128 state must not be all zero')
        object.__setattr__(self, 'words', words)


def _step(words):
    a, b, c = C.XORSHIFT_SHIFTS
    x, y, z, w = words
    t = (x ^ (x << a)) & C.XORSHIFT_MASK
    w_new = (w ^ (w >> c)) ^ (t ^ (t >> b))
    return (y, z, w, w_new), w_new


def to_unit(word: int) -> float:
    """32-bit word to a uniform strictly inside (0, 1)."""
    return (word + 0.5) * C.XORSHIFT_NORM


class Xorshift128:
    """Scalar stream; next_gaussian follows the same Box-Muller contract as Mrg32k3a."""

    def __init__(self, state: XorshiftState):
        self.state = state
        self._spare = None

    def copy(self) -> 'Xorshift128':
        other = Xorshift128(self.state)
        other._spare = self._spare
        return other

    def next_word(self) -> int:
        words, out = _step(self.state.words)
        self.state = XorshiftState(words)
        return out

    def next_uniform(self) -> float:
        return to_unit(self.next_word())

    def next_gaussian(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self.next_uniform()
        u2 = self.next_uniform()
        z0, z1 = box_muller(u1, u2)
        self._spare = z1
        return z0

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.next_uniform() for _ in range(n)], dtype=np.float64)

    def normals(self, n: int) -> np.ndarray:
        return np.array([self.next_gaussian() for _ in range(n)], dtype=np.float64)

    def __repr__(self):
        return f"Xorshift128({self.state.words})"


def xorshift_make_seeds(master_seed: int, stream_count: int) -> List[XorshiftState]:
    """
    Seeds for ``stream_count`` xorshift streams.

    Stream i takes draws 4i..4i+3 of MRG32k3a master stream ``master_seed``,
    scaled to 32-bit words. An all-zero result (probability about 2**-128)
    is replaced by the index-tagged fallback word so every state is valid.
    """
    from .streams import Mrg32k3aBank, StreamPartition

    if stream_count < 1:
        raise ConfigurationError(f"stream_count must be >= 1, got {stream_count}")
    bank = Mrg32k3aBank.from_partition(StreamPartition(master_seed, stream_count, C.XORSHIFT_WORDS))
    draws = bank.uniforms(C.XORSHIFT_WORDS)
    words = np.floor(draws * 2.0 ** 32).astype(np.uint64) & C.XORSHIFT_MASK
    seeds = []
    for i, row in enumerate(words.tolist()):
        if not any(row):
            row = [i + 1, 0, 0, 0]
        seeds.append(XorshiftState(tuple(row)))
    return seeds
