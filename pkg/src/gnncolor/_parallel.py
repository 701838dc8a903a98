"""Worker-count plumbing shared by the numba kernels."""
import warnings
from contextlib import contextmanager

import numba
import numpy as np

# numba falls back to another threading layer on its own; the notice is noise
warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB")


@numba.njit(cache=True)
def chunk_bounds(n, nchunks):
    """Split ``range(n)`` into ``nchunks`` contiguous, near-equal pieces."""
    b = np.empty(nchunks + 1, np.int64)
    for c in range(nchunks + 1):
        b[c] = (n * c) // nchunks
    return b


def available_threads() -> int:
    return numba.config.NUMBA_NUM_THREADS


@contextmanager
def use_workers(workers: int):
    """Run the enclosed numba parallel regions on ``workers`` threads.

    Requests above the configured thread pool are clamped; the work is still
    split into ``workers`` chunks so results never depend on the clamp.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    prev = numba.get_num_threads()
    numba.set_num_threads(min(workers, available_threads()))
    try:
        yield
    finally:
        numba.set_num_threads(prev)
