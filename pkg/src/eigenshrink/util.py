"""Seed derivation, bounded parallelism, and output plumbing shared across modules.

Reproducibility contract: every randomized operation takes one master seed
and derives per-task streams as SeedSequence((seed, *path)), where `path` is
a component index followed by a replicate/block index. Results are reduced
in task-index order, so outputs do not depend on the degree of parallelism.
"""

import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# component indices used in seed paths (recorded in CLI metadata)
COMP_BOOT = 1
COMP_CV = 2
COMP_ORACLE = 3
COMP_BENCH = 4
COMP_HCIZ = 5
COMP_SIGMA = 6
COMP_LDA = 7

SEED_SCHEME = "SeedSequence((seed, component, index))"

THREADS_ENV = "EIGENSHRINK_THREADS"


def rng_from(seed, *path) -> np.random.Generator:
    """Generator for the stream identified by (seed, *path)."""
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(i) for i in path)))


def thread_count() -> int:
    """Parallelism cap from the environment; 1 (serial) when unset or invalid."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """Map `fn` over `items`, preserving order.

    Runs in a thread pool when the environment allows more than one worker.
    Each item must carry its own RNG stream; the index-ordered result list
    makes downstream reductions independent of scheduling.
    """
    workers = thread_count()
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def fmt_float(x) -> str:
    """Render a float with 17 significant digits (round-trip safe)."""
    return format(float(x), ".17g")


def atomic_write_text(path, text: str) -> None:
    """Write text so the target is either complete or absent."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    """Deterministic JSON text (sorted keys, newline-terminated)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
