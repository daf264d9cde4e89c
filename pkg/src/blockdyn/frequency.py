"""Embedding counts, occurrence counts and pattern frequencies.

Frequencies are taken over the anchored embedding set {g in F : E + g
within F}; there is no wraparound, so boundary deficits are visible and
exactly quantifiable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

from .group import Point, Shape, folner_box, point_add
from .symbolic import AlphabetStack, Block, Corpus, sample_bernoulli

if TYPE_CHECKING:
    from .measures import CylinderMeasure


def embedding_anchors(outer: Shape, inner: Shape) -> tuple[Point, ...]:
    """Anchors g in outer with inner + g contained in outer, sorted."""
    if outer.dim != inner.dim:
        raise ValueError("dimension mismatch")
    pts = outer.points
    inner_pts = inner.sorted_points
    return tuple(
        g
        for g in outer.sorted_points
        if all(point_add(p, g) in pts for p in inner_pts)
    )


def count_embeddings(outer: Shape, inner: Shape) -> int:
    """|{g in outer : inner + g within outer}|."""
    return len(embedding_anchors(outer, inner))


def pattern_counts(block: Block, inner: Shape, depth: int) -> dict[tuple[int, ...], int]:
    """Occurrence counts of every pattern on inner x rows[1..depth] in one scan.

    Keys are row-major symbol tuples relative to the sorted points of
    ``inner``, i.e. exactly ``Block.symbols`` of the re-based patterns.
    """
    if not 1 <= depth <= block.depth:
        raise ValueError(f"depth must lie in 1..{block.depth}, got {depth}")
    counts: dict[tuple[int, ...], int] = {}
    inner_pts = inner.sorted_points
    for g in embedding_anchors(block.shape, inner):
        moved = [point_add(p, g) for p in inner_pts]
        key = tuple(block.get(q, r) for r in range(1, depth + 1) for q in moved)
        counts[key] = counts.get(key, 0) + 1
    return counts


@lru_cache(maxsize=512)
def freq_table(block: Block, inner: Shape, depth: int) -> dict[tuple[int, ...], Fraction]:
    """Frequencies of all patterns on inner x rows[1..depth] inside ``block``.

    Empty when no translate of ``inner`` embeds.  Values sum to exactly 1
    otherwise.
    """
    counts = pattern_counts(block, inner, depth)
    total = sum(counts.values())
    if total == 0:
        return {}
    return {key: Fraction(c, total) for key, c in counts.items()}


def count_occurrences(block: Block, pattern: Block) -> int:
    """|{g in shape(B) : shape(C) + g within shape(B), B reads C at g}|."""
    if pattern.depth > block.depth:
        raise ValueError("pattern deeper than block")
    if pattern.sizes != block.sizes[: pattern.depth]:
        raise ValueError("alphabet stack mismatch")
    counts = pattern_counts(block, pattern.shape, pattern.depth)
    return counts.get(pattern.symbols, 0)


def freq(block: Block, pattern: Block) -> Fraction:
    """Occurrence count divided by the embedding count; 0 when nothing embeds."""
    if pattern.depth > block.depth:
        raise ValueError("pattern deeper than block")
    if pattern.sizes != block.sizes[: pattern.depth]:
        raise ValueError("alphabet stack mismatch")
    table = freq_table(block, pattern.shape, pattern.depth)
    if not table:
        return Fraction(0)
    return table.get(pattern.symbols, Fraction(0))


@dataclass(frozen=True)
class TypicalBlock:
    """Search outcome: a block whose pattern frequencies track a target."""

    block: Block
    deviation: Fraction
    candidates_tried: int


def corpus_subblocks(corpus: Corpus, window: Shape, depth: int) -> Iterator[Block]:
    """All re-based patterns with domain window x rows[1..depth], in corpus
    order then anchor order."""
    from .symbolic import subblock_at

    for block in corpus.blocks:
        if not block.shape.points:
            continue
        lo, hi = block.shape.bounds()
        wlo, whi = window.bounds()
        anchors = Shape.box(
            tuple(a - b for a, b in zip(lo, wlo)),
            tuple(a - b for a, b in zip(hi, whi)),
        )
        for g in anchors.sorted_points:
            sub = subblock_at(block, window, g, depth)
            if sub is not None:
                yield sub


def bernoulli_stream(
    window: Shape,
    stack: AlphabetStack,
    probabilities: Sequence[Sequence[object]],
    seed: int,
) -> Iterator[Block]:
    """Infinite stream of seeded i.i.d. blocks (seed advances per candidate)."""
    i = 0
    while True:
        yield sample_bernoulli(window, stack, probabilities, seed + 7919 * i)
        i += 1


def find_typical_block(
    target: "CylinderMeasure",
    window: Shape,
    depth: int,
    eps: Fraction,
    source: Corpus | Iterable[Block],
    budget: int = 100,
) -> TypicalBlock | None:
    """Search for a block on window x rows[1..depth] whose frequencies are
    uniformly eps-close to the target at every level up to ``depth``.

    Candidates are drawn from the source in order (corpus scan order for a
    Corpus, iteration order otherwise) until one qualifies or the budget
    of candidate blocks is exhausted; exhaustion returns None.
    """
    if target.depth < depth:
        raise ValueError("target depth is smaller than the requested depth")
    eps = Fraction(eps)
    candidates: Iterable[Block]
    if isinstance(source, Corpus):
        candidates = corpus_subblocks(source, window, depth)
    else:
        candidates = iter(source)
    tried = 0
    for cand in candidates:
        if tried >= budget:
            break
        tried += 1
        if cand.shape != window or cand.depth < depth:
            raise ValueError("candidate does not live on the requested domain")
        worst = Fraction(0)
        ok = True
        for level in range(1, depth + 1):
            base = folner_box(level, window.dim)
            table = freq_table(cand, base, level)
            marg = target.marginal(base, level)
            for key in set(table) | set(marg):
                dev = abs(table.get(key, Fraction(0)) - marg.get(key, Fraction(0)))
                if dev > worst:
                    worst = dev
                if worst >= eps:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return TypicalBlock(block=cand, deviation=worst, candidates_tried=tried)
    return None
