"""Array-form blocks over Z^d, corpora and pattern families.

A block assigns a symbol to every cell of shape x rows[1..k]; row j draws
its symbols from the j-th alphabet of a stack.  Blocks are immutable and
hashable so they can key measures and form families.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .group import Point, Shape, folner_box, point_add, point_neg, translate


@dataclass(frozen=True)
class AlphabetStack:
    """Alphabet sizes per row; row j uses symbols {0, ..., sizes[j-1] - 1}."""

    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.sizes:
            raise ValueError("stack needs at least one row")
        if any(s < 1 for s in self.sizes):
            raise ValueError("alphabet sizes must be positive")

    @property
    def depth(self) -> int:
        return len(self.sizes)

    def prefix(self, j: int) -> AlphabetStack:
        if not 1 <= j <= self.depth:
            raise ValueError(f"depth {j} outside stack of depth {self.depth}")
        return AlphabetStack(self.sizes[:j])


@dataclass(frozen=True)
class Block:
    """A symbol assignment on shape x rows[1..depth].

    ``symbols`` is stored row-major: row 1 over the lexicographically
    sorted shape points, then row 2, and so on.  ``sizes`` is the alphabet
    stack prefix the entries are validated against.  |B| conventionally
    means the cardinality of the shape, not of the full domain.
    """

    shape: Shape
    depth: int
    sizes: tuple[int, ...]
    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if len(self.sizes) != self.depth:
            raise ValueError("one alphabet size per row is required")
        if len(self.symbols) != len(self.shape) * self.depth:
            raise ValueError("entry count does not match shape x depth")
        for r in range(self.depth):
            size = self.sizes[r]
            row = self.symbols[r * len(self.shape) : (r + 1) * len(self.shape)]
            if any(not 0 <= s < size for s in row):
                raise ValueError(f"row {r + 1} entry outside alphabet of size {size}")

    @classmethod
    def from_function(
        cls,
        shape: Shape,
        depth: int,
        sizes: Sequence[int],
        fn: Callable[[Point, int], int],
    ) -> Block:
        """Build a block from fn(point, row) with row in 1..depth."""
        pts = shape.sorted_points
        symbols = tuple(fn(p, r) for r in range(1, depth + 1) for p in pts)
        return cls(shape, depth, tuple(sizes), symbols)

    @classmethod
    def constant(cls, shape: Shape, depth: int, sizes: Sequence[int], value: int = 0) -> Block:
        return cls(shape, depth, tuple(sizes), (value,) * (len(shape) * depth))

    def get(self, p: Point, row: int) -> int:
        """Entry at cell (p, row); row is 1-based."""
        return self.symbols[(row - 1) * len(self.shape) + self.shape.index[p]]

    def row(self, row: int) -> tuple[int, ...]:
        n = len(self.shape)
        return self.symbols[(row - 1) * n : (row - 1) * n + n]

    @property
    def dim(self) -> int:
        return self.shape.dim

    def __len__(self) -> int:
        return len(self.shape)


def restrict(block: Block, e: Shape, depth: int | None = None) -> Block:
    """Restriction of a block to a sub-shape and a row prefix."""
    j = block.depth if depth is None else depth
    if not e.issubset(block.shape):
        raise ValueError("restriction target is not a subset of the block shape")
    if not 0 <= j <= block.depth:
        raise ValueError(f"depth {j} exceeds block depth {block.depth}")
    pts = e.sorted_points
    symbols = tuple(block.get(p, r) for r in range(1, j + 1) for p in pts)
    return Block(e, j, block.sizes[:j], symbols)


def block_translate(block: Block, g: Sequence[int]) -> Block:
    """The same entries moved to shape + g."""
    new_shape = translate(block.shape, g)
    gp = tuple(int(c) for c in g)
    pts = new_shape.sorted_points
    symbols = tuple(
        block.get(point_add(p, point_neg(gp)), r)
        for r in range(1, block.depth + 1)
        for p in pts
    )
    return Block(new_shape, block.depth, block.sizes, symbols)


def subblock_at(block: Block, f: Shape, g: Sequence[int], depth: int) -> Block | None:
    """The pattern of ``block`` read at f + g, re-based to f; None if f + g
    does not fit inside the block shape."""
    gp = tuple(int(c) for c in g)
    if len(gp) != block.dim or f.dim != block.dim:
        raise ValueError("dimension mismatch")
    if not 0 <= depth <= block.depth:
        raise ValueError(f"depth {depth} exceeds block depth {block.depth}")
    outer = block.shape.points
    pts = f.sorted_points
    moved = [point_add(p, gp) for p in pts]
    if any(q not in outer for q in moved):
        return None
    symbols = tuple(block.get(q, r) for r in range(1, depth + 1) for q in moved)
    return Block(f, depth, block.sizes[:depth], symbols)


@dataclass(frozen=True)
class Corpus:
    """A finite list of full-depth blocks standing in for a system's language."""

    stack: AlphabetStack
    blocks: tuple[Block, ...]

    def __post_init__(self) -> None:
        dims = {b.dim for b in self.blocks}
        if len(dims) > 1:
            raise ValueError("corpus blocks must share a dimension")
        for b in self.blocks:
            if b.sizes != self.stack.sizes:
                raise ValueError("corpus block does not carry the full stack")

    @property
    def dim(self) -> int:
        if not self.blocks:
            raise ValueError("empty corpus has no dimension")
        return self.blocks[0].dim


@dataclass(frozen=True)
class BlockFamily:
    """Distinct blocks with domain base x rows[1..level], sorted by entries."""

    level: int
    base: Shape
    blocks: tuple[Block, ...]

    def __post_init__(self) -> None:
        for b in self.blocks:
            if b.shape != self.base or b.depth != self.level:
                raise ValueError("family member with wrong domain")
        keys = [b.symbols for b in self.blocks]
        if keys != sorted(set(keys)):
            raise ValueError("family members must be distinct and sorted")

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[Block]:
        return iter(self.blocks)


def enumerate_family(corpus: Corpus, k: int) -> BlockFamily:
    """All distinct patterns with domain F_k x rows[1..k] observed in the corpus.

    Scans every admissible translate of the Folner box F_k = [-k, k]^d inside
    every corpus block; the result is ordered lexicographically on entries.
    """
    if not corpus.blocks:
        raise ValueError("cannot enumerate a family from an empty corpus")
    if not 1 <= k <= corpus.stack.depth:
        raise ValueError(f"level {k} outside stack of depth {corpus.stack.depth}")
    dim = corpus.dim
    base = folner_box(k, dim)
    seen: set[tuple[int, ...]] = set()
    base_pts = base.sorted_points
    for block in corpus.blocks:
        outer = block.shape.points
        if not outer:
            continue
        lo, hi = block.shape.bounds()
        blo, bhi = base.bounds()
        anchor_box = Shape.box(
            tuple(a - b for a, b in zip(lo, blo)),
            tuple(a - b for a, b in zip(hi, bhi)),
        )
        for g in anchor_box.sorted_points:
            moved = [point_add(p, g) for p in base_pts]
            if any(q not in outer for q in moved):
                continue
            key = tuple(block.get(q, r) for r in range(1, k + 1) for q in moved)
            seen.add(key)
    sizes = corpus.stack.sizes[:k]
    blocks = tuple(Block(base, k, sizes, key) for key in sorted(seen))
    return BlockFamily(k, base, blocks)


def enumerate_full_family(
    stack: AlphabetStack,
    k: int,
    dim: int,
    forbidden: Sequence[Block] = (),
    cap: int = 10**6,
) -> BlockFamily:
    """Exhaustive family of all locally admissible patterns on F_k x rows[1..k].

    Candidates containing a translate of any forbidden pattern are dropped
    (a local check only).  Refuses to enumerate more than ``cap`` candidates.
    """
    if not 1 <= k <= stack.depth:
        raise ValueError(f"level {k} outside stack of depth {stack.depth}")
    base = folner_box(k, dim)
    total = 1
    for j in range(k):
        total *= stack.sizes[j] ** len(base)
        if total > cap:
            raise ValueError(f"exhaustive enumeration would exceed {cap} candidates")
    sizes = stack.sizes[:k]
    cells = len(base)

    def symbol_rows(row: int) -> Iterator[tuple[int, ...]]:
        size = sizes[row]
        values: list[tuple[int, ...]] = [()]
        for _ in range(cells):
            values = [v + (s,) for v in values for s in range(size)]
        return iter(values)

    combos: list[tuple[int, ...]] = [()]
    for r in range(k):
        combos = [c + row for c in combos for row in symbol_rows(r)]
    blocks = []
    for key in sorted(combos):
        cand = Block(base, k, sizes, key)
        if forbidden and _contains_any(cand, forbidden):
            continue
        blocks.append(cand)
    return BlockFamily(k, base, tuple(blocks))


def _contains_any(block: Block, patterns: Sequence[Block]) -> bool:
    for pat in patterns:
        if pat.depth > block.depth:
            continue
        lo, hi = block.shape.bounds()
        plo, phi = pat.shape.bounds()
        anchors = Shape.box(
            tuple(a - b for a, b in zip(lo, plo)),
            tuple(a - b for a, b in zip(hi, phi)),
        )
        for g in anchors.sorted_points:
            sub = subblock_at(block, pat.shape, g, pat.depth)
            if sub is not None and sub.symbols == pat.symbols:
                return True
    return False


def sample_bernoulli(
    window: Shape,
    stack: AlphabetStack,
    probabilities: Sequence[Sequence[object]],
    seed: int,
) -> Block:
    """Seeded i.i.d. block: cell (p, j) drawn from the row-j distribution.

    The same seed always yields the same block (cells filled row-major in
    lexicographic point order).
    """
    thresholds = _cumulative(stack, probabilities)
    rng = random.Random(seed)
    pts = window.sorted_points
    symbols: list[int] = []
    for row in range(stack.depth):
        cum = thresholds[row]
        for _ in pts:
            u = rng.random()
            s = 0
            while s < len(cum) - 1 and u >= cum[s]:
                s += 1
            symbols.append(s)
    return Block(window, stack.depth, stack.sizes, tuple(symbols))


def _cumulative(
    stack: AlphabetStack, probabilities: Sequence[Sequence[object]]
) -> list[list[float]]:
    if len(probabilities) != stack.depth:
        raise ValueError("one probability vector per row is required")
    out: list[list[float]] = []
    for row, probs in enumerate(probabilities):
        if len(probs) != stack.sizes[row]:
            raise ValueError(f"row {row + 1} needs {stack.sizes[row]} probabilities")
        vals = [float(p) for p in probs]
        if any(v < 0 for v in vals):
            raise ValueError("probabilities must be non-negative")
        total = sum(vals)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"row {row + 1} probabilities sum to {total}, not 1")
        cum: list[float] = []
        acc = 0.0
        for v in vals:
            acc += v
            cum.append(acc)
        cum[-1] = 1.0
        out.append(cum)
    return out


def sample_markov(
    window: Shape,
    stack: AlphabetStack,
    initial: Sequence[object],
    transition: Sequence[Sequence[object]],
    seed: int,
) -> Block:
    """Seeded Markov chain along a one-dimensional window (depth-1 stacks only)."""
    if window.dim != 1:
        raise ValueError("Markov sampling is only supported in dimension 1")
    if stack.depth != 1:
        raise ValueError("Markov sampling is only supported for depth-1 stacks")
    n = stack.sizes[0]
    init = [float(p) for p in initial]
    if len(init) != n or abs(sum(init) - 1.0) > 1e-9 or any(v < 0 for v in init):
        raise ValueError("malformed initial distribution")
    rows = [[float(p) for p in row] for row in transition]
    if len(rows) != n or any(
        len(r) != n or abs(sum(r) - 1.0) > 1e-9 or any(v < 0 for v in r) for r in rows
    ):
        raise ValueError("malformed transition matrix")
    rng = random.Random(seed)

    def draw(dist: list[float]) -> int:
        u = rng.random()
        acc = 0.0
        for i, v in enumerate(dist):
            acc += v
            if u < acc or i == len(dist) - 1:
                return i
        return len(dist) - 1

    symbols: list[int] = []
    state: int | None = None
    for _ in window.sorted_points:
        state = draw(init) if state is None else draw(rows[state])
        symbols.append(state)
    return Block(window, 1, stack.sizes, tuple(symbols))
