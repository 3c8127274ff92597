from .mrg32k3a import Mrg32k3a, Mrg32k3aState, next_uniform, seed_state, skip_ahead
from .streams import (
    GENERATORS,
    Mrg32k3aBank,
    StreamBank,
    StreamPartition,
    XorshiftBank,
    build_streams,
    make_substreams,
)
from .xorshift import Xorshift128, XorshiftState, xorshift_make_seeds


def next_gaussian(stream) -> float:
    return stream.next_gaussian()


__all__ = [
    'GENERATORS', 'Mrg32k3a', 'Mrg32k3aBank', 'Mrg32k3aState', 'StreamBank', 'StreamPartition',
    'Xorshift128', 'XorshiftBank', 'XorshiftState', 'build_streams', 'make_substreams',
    'next_gaussian', 'next_uniform', 'seed_state', 'skip_ahead', 'xorshift_make_seeds',
]
