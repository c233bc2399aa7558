"""Bounded parallel execution of independent shards.

Shards run in threads behind a semaphore sized by ``settings.workers``;
results come back in shard order so callers merge them deterministically.
"""

import asyncio
import logging
from typing import Callable, List, Optional, Sequence, TypeVar

from app.config import get_settings

logger = logging.getLogger(__name__)

S = TypeVar("S")
R = TypeVar("R")


async def gather_shards(fn: Callable[[S], R], shards: Sequence[S], workers: Optional[int] = None) -> List[R]:
    limit = max(1, workers or get_settings().workers)
    semaphore = asyncio.Semaphore(limit)

    async def _run(shard: S) -> R:
        async with semaphore:
            return await asyncio.to_thread(fn, shard)

    return list(await asyncio.gather(*(_run(shard) for shard in shards)))


def map_shards(fn: Callable[[S], R], shards: Sequence[S], workers: Optional[int] = None) -> List[R]:
    workers = workers or get_settings().workers
    if workers <= 1 or len(shards) <= 1:
        return [fn(shard) for shard in shards]
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        logger.debug("running %d shards on %d workers", len(shards), workers)
        return asyncio.run(gather_shards(fn, shards, workers))
    # already inside an event loop: stay sequential
    return [fn(shard) for shard in shards]


def chunk(items: Sequence[S], pieces: int) -> List[Sequence[S]]:
    """Split into at most ``pieces`` contiguous, order-preserving chunks."""
    pieces = max(1, min(pieces, len(items)))
    size, extra = divmod(len(items), pieces)
    out, start = [], 0
    for i in range(pieces):
        end = start + size + (1 if i < extra else 0)
        out.append(items[start:end])
        start = end
    return out
