"""Labelled matroid catalog inspection for liftforge.

Enumerates every labelled matroid on small ground sets, prints the counts per
rank and compares the totals with the published sequence. Useful after
changing the basis-family search or its sharding, and for timing the catalog
at a given worker count.
"""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional

from app import configure_logging
from app.config import override_settings
from app.services.lab import PUBLISHED_COUNTS, catalog_counts

DEFAULT_MAX_SIZE = 4
DEFAULT_WORKERS = 1


@dataclass
class CatalogRow:
    size: int
    by_rank: Dict[int, int]
    total: int
    published: Optional[int]
    seconds: float

    @property
    def matches(self) -> bool:
        return self.published is None or self.total == self.published


def collect(max_size: int) -> List[CatalogRow]:
    rows = []
    for m in range(max_size + 1):
        clock = time.perf_counter()
        counts = catalog_counts(m)
        rows.append(
            CatalogRow(
                size=m,
                by_rank=counts,
                total=sum(counts.values()),
                published=PUBLISHED_COUNTS[m] if m < len(PUBLISHED_COUNTS) else None,
                seconds=round(time.perf_counter() - clock, 3),
            )
        )
    return rows


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Count labelled matroids on small ground sets")
    parser.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE, help="Largest ground set to enumerate")
    parser.add_argument("--workers", type=int, default=DEFAULT_WORKERS, help="Parallel shards for the search")
    parser.add_argument("--output", type=Path, default=None, help="Write the rows as JSON to this file")
    parser.add_argument("--quiet", action="store_true", help="Only report mismatches")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.max_size < 0:
        raise SystemExit("--max-size must be >= 0")
    configure_logging()
    override_settings(workers=args.workers)

    rows = collect(args.max_size)
    for row in rows:
        if args.quiet and row.matches:
            continue
        status = "ok" if row.matches else "MISMATCH"
        print(f"m={row.size} total={row.total} published={row.published} {status} ({row.seconds}s) {row.by_rank}")
    if args.output:
        args.output.write_text(json.dumps([asdict(row) for row in rows], indent=2) + "\n", encoding="utf-8")
    return 0 if all(row.matches for row in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
