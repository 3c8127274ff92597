"""
Partitioned substreams and vectorised stream banks.

A bank holds one generator state per population element and advances all of
them in lockstep with numpy, so a bank of n streams produces exactly what n
scalar streams would, bit for bit. Banks are split into contiguous chunks for
the worker pool and concatenated back afterwards; a state is only ever
touched by the worker holding its chunk.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ConfigurationError
from . import constants as C
from .mrg32k3a import Mrg32k3a, Mrg32k3aState, box_muller, jump_matrices, seed_state
from .xorshift import Xorshift128, XorshiftState, xorshift_make_seeds

logger = logging.getLogger(__name__)

GENERATORS = ('mrg32k3a', 'xorshift')


@dataclass(frozen=True)
class StreamPartition:
    """stream i owns draws [i * block_length, (i + 1) * block_length) of master stream ``master_seed``."""

    master_seed: int
    stream_count: int
    block_length: int = C.DEFAULT_BLOCK_LENGTH

    def __post_init__(self):
        if self.stream_count < 1:
            raise ConfigurationError(f"stream_count must be >= 1, got {self.stream_count}")
        if self.block_length < 1:
            raise ConfigurationError(f"block_length must be >= 1, got {self.block_length}")
        if self.master_seed < 0:
            raise ConfigurationError(f"master_seed must be non-negative, got {self.master_seed}")
        if self.stream_count * self.block_length > C.MRG_SEED_SPACING:
            raise ConfigurationError(
                f"{self.stream_count} streams of {self.block_length} draws overrun the master stream"
            )

    def block_start(self, index: int) -> int:
        return index * self.block_length


def _mul_mod(a: int, b: np.ndarray, m: int) -> np.ndarray:
    # a, b < 2**32; split a so every product stays below 2**63
    a_hi, a_lo = divmod(int(a), 1 << 16)
    return (((a_hi * b) % m) * (1 << 16) + a_lo * b) % m


def _mat_vec_rows(mat, rows: np.ndarray, m: int) -> np.ndarray:
    out = np.empty_like(rows)
    for i in range(3):
        acc = np.zeros(rows.shape[0], dtype=np.int64)
        for k in range(3):
            if mat[i][k]:
                acc = (acc + _mul_mod(mat[i][k], rows[:, k], m)) % m
        out[:, i] = acc
    return out


def _partition_arrays(partition: StreamPartition) -> Tuple[np.ndarray, np.ndarray]:
    """Start states of every substream, filled by doubling: block [f, 2f) = A**(f*L) block [0, f)."""
    n = partition.stream_count
    start = seed_state(partition.master_seed)
    s1 = np.empty((n, 3), dtype=np.int64)
    s2 = np.empty((n, 3), dtype=np.int64)
    s1[0] = start.s1
    s2[0] = start.s2
    filled = 1
    while filled < n:
        count = min(filled, n - filled)
        j1, j2 = jump_matrices(filled * partition.block_length)
        s1[filled:filled + count] = _mat_vec_rows(j1, s1[:count], C.MRG_M1)
        s2[filled:filled + count] = _mat_vec_rows(j2, s2[:count], C.MRG_M2)
        filled += count
    return s1, s2


def make_substreams(partition: StreamPartition) -> List[Mrg32k3aState]:
    """Per-stream start states; stream i equals skip_ahead(seed_state(master_seed), i * block_length)."""
    s1, s2 = _partition_arrays(partition)
    return [Mrg32k3aState(tuple(a), tuple(b)) for a, b in zip(s1.tolist(), s2.tolist())]


class StreamBank:
    """
    Lockstep bank of per-element streams.

    Subclasses keep their generator words in ``self._arrays`` (row i belongs
    to stream i) and implement ``_advance`` for one step of the selected rows.
    """

    def __init__(self, arrays: dict, spare=None, has_spare=None):
        self._arrays = arrays
        n = len(self)
        self._spare = np.zeros(n, dtype=np.float64) if spare is None else spare
        self._has_spare = np.zeros(n, dtype=bool) if has_spare is None else has_spare

    def __len__(self):
        return next(iter(self._arrays.values())).shape[0]

    def _advance(self, rows=None) -> np.ndarray:
        raise NotImplementedError

    def _rebuild(self, arrays, spare, has_spare) -> 'StreamBank':
        return type(self)(arrays, spare, has_spare)

    def uniforms(self, count: int = None) -> np.ndarray:
        """One uniform per stream (shape (n,)), or ``count`` per stream (shape (n, count))."""
        if count is None:
            return self._advance()
        out = np.empty((len(self), count), dtype=np.float64)
        for j in range(count):
            out[:, j] = self._advance()
        return out

    def normals(self, count: int = None) -> np.ndarray:
        """Box-Muller normals with a per-stream cached spare, matching the scalar streams."""
        n = len(self)
        out = np.empty((n, 1 if count is None else count), dtype=np.float64)
        for j in range(out.shape[1]):
            have = self._has_spare
            if not have.any():
                u1 = self._advance()
                u2 = self._advance()
                z0, z1 = box_muller(u1, u2)
                out[:, j] = z0
                self._spare = z1
            else:
                need = ~have
                out[have, j] = self._spare[have]
                if need.any():
                    u1 = self._advance(need)
                    u2 = self._advance(need)
                    z0, z1 = box_muller(u1, u2)
                    out[need, j] = z0
                    self._spare[need] = z1
            self._has_spare = ~have
        return out[:, 0] if count is None else out

    def __getitem__(self, key: slice) -> 'StreamBank':
        if not isinstance(key, slice):
            raise TypeError('StreamBank supports contiguous slices only')
        arrays = {name: arr[key].copy() for name, arr in self._arrays.items()}
        return self._rebuild(arrays, self._spare[key].copy(), self._has_spare[key].copy())

    def split(self, bounds: Sequence[Tuple[int, int]]) -> List['StreamBank']:
        return [self[start:stop] for start, stop in bounds]

    @classmethod
    def concatenate(cls, banks: Sequence['StreamBank']) -> 'StreamBank':
        first = banks[0]
        arrays = {
            name: np.concatenate([b._arrays[name] for b in banks]) for name in first._arrays
        }
        spare = np.concatenate([b._spare for b in banks])
        has_spare = np.concatenate([b._has_spare for b in banks])
        return first._rebuild(arrays, spare, has_spare)

    def copy(self) -> 'StreamBank':
        return self[:]

    def fingerprint(self) -> Tuple:
        """Hashable snapshot of every stream, including cached spares."""
        return (
            tuple(arr.tobytes() for _, arr in sorted(self._arrays.items())),
            self._spare.tobytes(),
            self._has_spare.tobytes(),
        )


class Mrg32k3aBank(StreamBank):
    def __init__(self, arrays, spare=None, has_spare=None):
        if not isinstance(arrays, dict):
            arrays = self._arrays_from_states(arrays)
        super().__init__(arrays, spare, has_spare)

    @staticmethod
    def _arrays_from_states(states: Sequence[Mrg32k3aState]) -> dict:
        s1 = np.array([s.s1 for s in states], dtype=np.int64).reshape(-1, 3)
        s2 = np.array([s.s2 for s in states], dtype=np.int64).reshape(-1, 3)
        return {'s1': s1, 's2': s2}

    @classmethod
    def from_partition(cls, partition: StreamPartition) -> 'Mrg32k3aBank':
        s1, s2 = _partition_arrays(partition)
        return cls({'s1': s1, 's2': s2})

    def states(self) -> List[Mrg32k3aState]:
        return [
            Mrg32k3aState(tuple(a), tuple(b))
            for a, b in zip(self._arrays['s1'].tolist(), self._arrays['s2'].tolist())
        ]

    def _advance(self, rows=None) -> np.ndarray:
        s1 = self._arrays['s1']
        s2 = self._arrays['s2']
        if rows is not None:
            sub1, sub2 = s1[rows], s2[rows]
        else:
            sub1, sub2 = s1, s2
        p1 = (C.MRG_A12 * sub1[:, 1] - C.MRG_A13N * sub1[:, 0]) % C.MRG_M1
        p2 = (C.MRG_A21 * sub2[:, 2] - C.MRG_A23N * sub2[:, 0]) % C.MRG_M2
        sub1[:, :2] = sub1[:, 1:].copy()
        sub1[:, 2] = p1
        sub2[:, :2] = sub2[:, 1:].copy()
        sub2[:, 2] = p2
        if rows is not None:
            s1[rows] = sub1
            s2[rows] = sub2
        diff = p1 - p2
        diff = np.where(diff <= 0, diff + C.MRG_M1, diff)
        return diff * C.MRG_NORM


class XorshiftBank(StreamBank):
    def __init__(self, arrays, spare=None, has_spare=None):
        if not isinstance(arrays, dict):
            words = np.array([s.words for s in arrays], dtype=np.uint32).reshape(-1, C.XORSHIFT_WORDS)
            arrays = {'words': words}
        super().__init__(arrays, spare, has_spare)

    def states(self) -> List[XorshiftState]:
        return [XorshiftState(tuple(row)) for row in self._arrays['words'].tolist()]

    def _advance(self, rows=None) -> np.ndarray:
        a, b, c = C.XORSHIFT_SHIFTS
        words = self._arrays['words']
        sub = words[rows] if rows is not None else words
        x = sub[:, 0]
        w = sub[:, 3]
        t = x ^ (x << np.uint32(a))
        w_new = (w ^ (w >> np.uint32(c))) ^ (t ^ (t >> np.uint32(b)))
        sub[:, :3] = sub[:, 1:].copy()
        sub[:, 3] = w_new
        if rows is not None:
            words[rows] = sub
        return (w_new.astype(np.float64) + 0.5) * C.XORSHIFT_NORM


Coordinator = Union[Mrg32k3a, Xorshift128]


def build_streams(generator: str, master_seed: int, count: int,
                  block_length: int = C.DEFAULT_BLOCK_LENGTH) -> Tuple[StreamBank, Coordinator]:
    """
    ``count`` element streams plus one coordinator stream (stream index ``count``).

    The coordinator supplies the draws shared by the whole population:
    exchange parity and acceptance, resampling uniforms.
    """
    if generator not in GENERATORS:
        raise ConfigurationError(f"Unknown generator '{generator}'; choose from {', '.join(GENERATORS)}")
    if count < 1:
        raise ConfigurationError(f"Stream count must be >= 1, got {count}")
    logger.debug(f"Building {count}+1 {generator} streams from master seed {master_seed}")
    if generator == 'mrg32k3a':
        bank = Mrg32k3aBank.from_partition(StreamPartition(master_seed, count + 1, block_length))
        coordinator = Mrg32k3a(bank[count:count + 1].states()[0])
        return bank[:count], coordinator
    seeds = xorshift_make_seeds(master_seed, count + 1)
    return XorshiftBank(seeds[:count]), Xorshift128(seeds[count])
