"""
MRG32k3a combined multiple recursive generator.

A scalar, pure-Python stream (exact integer arithmetic) used for the
coordinator draws and as the reference the vectorised banks are checked
against, plus O(log n) skip-ahead by square-and-multiply on the two 3x3
transition matrices.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..exceptions import ConfigurationError
from . import constants as C

logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple[int, int, int], Tuple[int, int, int], Tuple[int, int, int]]


@dataclass(frozen=True)
class Mrg32k3aState:
    """Six residues: s1 modulo m1 and s2 modulo m2, oldest first."""

    s1: Tuple[int, int, int]
    s2: Tuple[int, int, int]

    def __post_init__(self):
        s1 = tuple(int(v) for v in self.s1)
        s2 = tuple(int(v) for v in self.s2)
        if len(s1) != 3 or len(s2) != 3:
            raise ConfigurationError('MRG32k3a state needs two triples')
        if any(v < 0 or v >= C.MRG_M1 for v in s1) or not any(s1):
            raise ConfigurationError(f"Invalid MRG32k3a s1 triple: {s1}")
        if any(v < 0 or v >= C.MRG_M2 for v in s2) or not any(s2):
            raise ConfigurationError(f"Invalid MRG32k3a s2 triple: {s2}")
        object.__setattr__(self, 's1', s1)
        object.__setattr__(self, 's2', s2)

    @classmethod
    def default(cls) -> 'Mrg32k3aState':
        seed = C.MRG_DEFAULT_SEED
        return cls(seed[:3], seed[3:])

    def as_tuple(self) -> Tuple[int, ...]:
        return self.s1 + self.s2


def _step(state: Mrg32k3aState) -> Tuple[Mrg32k3aState, float]:
    s10, s11, s12 = state.s1
    s20, s21, s22 = state.s2
    p1 = (C.MRG_A12 * s11 - C.MRG_A13N * s10) % C.MRG_M1
    p2 = (C.MRG_A21 * s22 - C.MRG_A23N * s20) % C.MRG_M2
    diff = p1 - p2
    if diff <= 0:
        diff += C.MRG_M1
    new = Mrg32k3aState.__new__(Mrg32k3aState)
    object.__setattr__(new, 's1', (s11, s12, p1))
    object.__setattr__(new, 's2', (s21, s22, p2))
    return new, diff * C.MRG_NORM


def next_uniform(state: Mrg32k3aState) -> Tuple[float, Mrg32k3aState]:
    """One recurrence step. Returns the output in (0, 1) and the new state."""
    new, u = _step(state)
    return u, new


def mat_mul_mod(a: Matrix, b: Matrix, m: int) -> Matrix:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) % m for j in range(3))
        for i in range(3)
    )


def mat_vec_mod(a: Matrix, v: Tuple[int, int, int], m: int) -> Tuple[int, int, int]:
    return tuple(sum(a[i][k] * v[k] for k in range(3)) % m for i in range(3))


def mat_pow_mod(a: Matrix, n: int, m: int) -> Matrix:
    """a**n mod m by binary exponentiation."""
    result = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    base = a
    while n > 0:
        if n & 1:
            result = mat_mul_mod(base, result, m)
        base = mat_mul_mod(base, base, m)
        n >>= 1
    return result


def jump_matrices(n: int) -> Tuple[Matrix, Matrix]:
    if n < 0:
        raise ConfigurationError(f"Skip distance must be non-negative, got {n}")
    return mat_pow_mod(C.MRG_A1, n, C.MRG_M1), mat_pow_mod(C.MRG_A2, n, C.MRG_M2)


def skip_ahead(state: Mrg32k3aState, n: int) -> Mrg32k3aState:
    """State after n calls of next_uniform, in O(log n) matrix products."""
    if n == 0:
        return state
    j1, j2 = jump_matrices(n)
    return Mrg32k3aState(mat_vec_mod(j1, state.s1, C.MRG_M1), mat_vec_mod(j2, state.s2, C.MRG_M2))


def seed_state(master_seed: int) -> Mrg32k3aState:
    """Start of master stream ``master_seed``: the default state moved on by seed * 2**127."""
    master_seed = int(master_seed)
    if master_seed < 0:
        raise ConfigurationError(f"Master seed must be non-negative, got {master_seed}")
    return skip_ahead(Mrg32k3aState.default(), master_seed * C.MRG_SEED_SPACING)


class Mrg32k3a:
    """
    Mutable scalar MRG32k3a stream.

    next_gaussian uses Box-Muller: a call with no cached spare consumes two
    uniforms and caches the second normal; the following call consumes none.
    """

    def __init__(self, state: Mrg32k3aState = None):
        self.state = state if state is not None else Mrg32k3aState.default()
        self._spare = None

    @classmethod
    def from_seed(cls, master_seed: int) -> 'Mrg32k3a':
        return cls(seed_state(master_seed))

    def copy(self) -> 'Mrg32k3a':
        other = Mrg32k3a(self.state)
        other._spare = self._spare
        return other

    def next_uniform(self) -> float:
        self.state, u = _step(self.state)
        return u

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

    def skip(self, n: int):
        self.state = skip_ahead(self.state, n)

    def __repr__(self):
        return f"Mrg32k3a({self.state.as_tuple()})"


def box_muller(u1, u2):
    """Two uniforms in (0,1) to two independent standard normals."""
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * np.asarray(u2, dtype=np.float64)
    z0 = r * np.cos(theta)
    z1 = r * np.sin(theta)
    if np.ndim(z0) == 0:
        return float(z0), float(z1)
    return z0, z1
