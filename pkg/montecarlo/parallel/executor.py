"""
Data-parallel map over a population.

A population is a structure of arrays (one row per element) plus one stream
per element. ``par_map`` cuts it into contiguous chunks, runs the kernel on
each chunk in a thread pool (numpy releases the GIL in the heavy loops) and
stitches the chunks back in order. Kernels are vectorised over their chunk
and purely elementwise, so the output does not depend on the chunking.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import ConfigurationError, ElementKernelError, MonteCarloError
from ..prng import StreamBank

logger = logging.getLogger(__name__)

Kernel = Callable[[Dict[str, np.ndarray], StreamBank], Dict[str, np.ndarray]]


@dataclass
class Population:
    items: Dict[str, np.ndarray]
    streams: StreamBank
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.streams)
        for name, arr in self.items.items():
            if arr.shape[0] != n:
                raise ConfigurationError(f"Population field '{name}' has {arr.shape[0]} rows, expected {n}")

    def __len__(self):
        return len(self.streams)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.items[name]


def chunk_bounds(n: int, workers: int) -> List[Tuple[int, int]]:
    workers = max(1, min(workers, n)) if n else 1
    edges = np.linspace(0, n, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


class WorkerPool:
    """Thread pool kept open for the length of a run; ``workers=1`` runs inline."""

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {workers}")
        self.workers = workers
        self._executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self):
        if self.workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix='popmc')
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def run(self, fn: Callable, tasks: List) -> List:
        if self._executor is None or len(tasks) <= 1:
            return [_capture(fn, task) for task in tasks]
        return list(self._executor.map(lambda task: _capture(fn, task), tasks))

    def map(self, population: Population, kernel: Kernel) -> Population:
        return par_map(population, kernel, self.workers, pool=self)


def _capture(fn, task):
    try:
        return fn(*task), None
    except Exception as exc:  # re-raised in index order by the caller
        return None, exc


def par_map(population: Population, kernel: Kernel, workers: int = 1,
            pool: Optional[WorkerPool] = None) -> Population:
    """
    Apply ``kernel(items_chunk, streams_chunk)`` to every element.

    The kernel returns the new item arrays for its chunk and may advance its
    streams. On failure the lowest failing element is raised as an
    ElementKernelError carrying its global index, whatever the chunking.
    """
    n = len(population)
    bounds = chunk_bounds(n, workers)
    tasks = []
    for start, stop in bounds:
        chunk = {name: arr[start:stop] for name, arr in population.items.items()}
        tasks.append((chunk, population.streams[start:stop]))

    owned = pool is None
    pool = pool or WorkerPool(workers).__enter__()
    try:
        results = pool.run(kernel, tasks)
    finally:
        if owned:
            pool.close()

    for (start, stop), (_, exc) in zip(bounds, results):
        if exc is None:
            continue
        if isinstance(exc, ElementKernelError):
            logger.error(f"Kernel failed at element {start + exc.index}: {exc.reason}")
            raise ElementKernelError(start + exc.index, exc.reason) from exc
        if isinstance(exc, MonteCarloError):
            logger.error(f"Kernel failed in chunk starting at element {start}: {exc}")
            raise exc
        index, cause = _first_failing_element(population, kernel, start, stop, exc)
        logger.error(f"Kernel failed at element {index}: {cause!r}")
        raise ElementKernelError(index, repr(cause)) from cause

    outputs = [out for out, _ in results]
    items = {name: np.concatenate([out[name] for out in outputs]) for name in outputs[0]}
    streams = StreamBank.concatenate([streams for _, streams in tasks])
    return Population(items, streams, dict(population.meta))


def _first_failing_element(population: Population, kernel: Kernel, start: int, stop: int,
                           chunk_error: Exception) -> Tuple[int, Exception]:
    """
    Replay a failed chunk one element at a time on fresh copies of its
    streams and return the lowest element that raises. Falls back to the
    chunk start when no single element fails on its own.
    """
    for i in range(start, stop):
        item = {name: arr[i:i + 1] for name, arr in population.items.items()}
        try:
            kernel(item, population.streams[i:i + 1])
        except Exception as exc:
            return i, exc
    return start, chunk_error
