"""Worker pools and per-sample random streams shared by the batch drivers."""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

RNG_NAME = "numpy.random.PCG64(SeedSequence([seed, index]))"


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index``; identical whatever the scheduling."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(index)])))


def worker_count() -> int:
    """Thread cap from ``OIMLAB_THREADS``, else the CPU count."""
    env = os.environ.get("OIMLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"OIMLAB_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def ordered_map(fn, items):
    """``map`` over a thread pool; results keep input order.

    The RK4 kernel releases the GIL, so integration batches scale with threads.
    """
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
