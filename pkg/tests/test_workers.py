import threading

from app.config import override_settings
from app.services.lifts import free_N, pairs_graphic_N, satisfies_star
from app.services.matroids import circuits, uniform
from app.services.workers import chunk, gather_shards, map_shards


def test_chunk_is_contiguous_and_ordered():
    assert chunk([1, 2, 3, 4, 5, 6, 7], 3) == [[1, 2, 3], [4, 5], [6, 7]]
    assert chunk([1, 2], 5) == [[1], [2]]
    assert chunk([], 3) == [[]]


async def test_gather_shards_keeps_shard_order():
    results = await gather_shards(lambda x: x * x, [3, 1, 2], workers=2)
    assert results == [9, 1, 4]


async def test_map_shards_stays_in_caller_thread_inside_a_loop():
    caller = threading.get_ident()
    seen = map_shards(lambda _: threading.get_ident(), [1, 2, 3], workers=4)
    assert seen == [caller] * 3


def test_map_shards_with_threads():
    assert map_shards(sum, [[1, 2], [3], [4, 5, 6]], workers=3) == [3, 3, 15]


def test_star_verdict_does_not_depend_on_workers():
    base = uniform(1, 4)
    family = circuits(base)
    sequential = [satisfies_star(base, space) for space in (free_N(family), pairs_graphic_N(family))]
    override_settings(workers=4)
    family.perfect_cache = None
    parallel = [satisfies_star(base, space) for space in (free_N(family), pairs_graphic_N(family))]
    assert parallel == sequential
    assert [v.passed for v in parallel] == [False, True]
