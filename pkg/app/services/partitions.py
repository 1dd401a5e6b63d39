# app/services/partitions.py

"""
Families of bipartitions. Members are generated lazily in a fixed order:
subset families in ascending mask value, contiguous blocks by length then position.
"""

import logging
from itertools import islice
from math import comb
from typing import Iterator, List, Optional, Sequence, Tuple

from app.errors import ContractViolation
from app.models.schemas import Bipartition, PartitionFamily, validated
from app.services.state import make_bipartition

logger = logging.getLogger(__name__)


def next_combination(mask: int) -> int:
    """Next larger integer with the same number of set bits."""
    lowest = mask & -mask
    ripple = mask + lowest
    return ripple | (((mask ^ ripple) >> 2) // lowest)


def _subset_masks(n: int, m: int) -> Iterator[int]:
    mask = (1 << m) - 1
    limit = 1 << n
    while mask < limit:
        yield mask
        mask = next_combination(mask)


def _block_masks(n: int, max_len: int) -> Iterator[int]:
    for length in range(1, max_len + 1):
        block = (1 << length) - 1
        for start in range(n - length + 1):
            yield block << start


def balanced_bipartitions(n: int) -> PartitionFamily:
    """Every subset of n // 2 sites; complementary subsets both appear for even n."""
    return validated(PartitionFamily, kind="balanced", n=n)


def contiguous_blocks(n: int, max_len: int) -> PartitionFamily:
    return validated(PartitionFamily, kind="contiguous", n=n, size=max_len)


def fixed_size(n: int, m: int) -> PartitionFamily:
    return validated(PartitionFamily, kind="fixed_size", n=n, size=m)


def explicit(n: int, masks: Sequence[int]) -> PartitionFamily:
    for mask in masks:
        make_bipartition(n, mask)
    return validated(PartitionFamily, kind="explicit", n=n, masks=tuple(masks))


def family_size(family: PartitionFamily) -> int:
    if family.kind == "balanced":
        return comb(family.n, family.n // 2)
    if family.kind == "fixed_size":
        return comb(family.n, family.size)
    if family.kind == "contiguous":
        return sum(family.n - length + 1 for length in range(1, family.size + 1))
    return len(family.masks)


def _raw_masks(family: PartitionFamily) -> Iterator[int]:
    if family.kind == "balanced":
        return _subset_masks(family.n, family.n // 2)
    if family.kind == "fixed_size":
        return _subset_masks(family.n, family.size)
    if family.kind == "contiguous":
        return _block_masks(family.n, family.size)
    return iter(family.masks)


def family_iter(family: PartitionFamily, start: int = 0, stop: Optional[int] = None) -> Iterator[Bipartition]:
    """Members in enumeration order; [start, stop) selects a disjoint range for one consumer."""
    for mask in islice(_raw_masks(family), start, stop):
        yield Bipartition(n=family.n, mask=mask)


def family_chunks(family: PartitionFamily, chunks: int) -> List[Tuple[int, int]]:
    """Splits the enumeration into at most `chunks` contiguous index ranges."""
    total = family_size(family)
    chunks = max(1, min(chunks, total))
    bounds = [total * i // chunks for i in range(chunks + 1)]
    return list(zip(bounds[:-1], bounds[1:]))


def read_mask_lines(lines: Sequence[str], n: int) -> PartitionFamily:
    """One binary mask per line, site 0 rightmost; blank lines and '#' comments skipped."""
    masks = []
    for number, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            masks.append(int(text, 2))
        except ValueError:
            raise ContractViolation(f"line {number}: {text!r} is not a binary mask")
    return explicit(n, masks)


def parse_partition_spec(spec: str, n: int) -> PartitionFamily:
    """balanced | contiguous:<L> | size:<m> | file:<path>"""
    kind, _, argument = spec.partition(":")
    try:
        if kind == "balanced" and not argument:
            return balanced_bipartitions(n)
        if kind == "contiguous":
            return contiguous_blocks(n, int(argument) if argument else n // 2)
        if kind == "size":
            return fixed_size(n, int(argument))
        if kind == "file" and argument:
            with open(argument, "r", encoding="utf-8") as handle:
                return read_mask_lines(handle.readlines(), n)
    except (ValueError, OSError) as e:
        raise ContractViolation(f"bad partition spec {spec!r}: {e}") from e
    raise ContractViolation(f"unknown partition spec {spec!r}; expected balanced, contiguous:<L>, size:<m> or file:<path>")
