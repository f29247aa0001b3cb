"""Plain-text layout pool documents.

A document is a sequence of blocks separated by one blank line::

    layout L1
    A . D X
    . . . .
    Y D . .
    . . Z T

Glyphs: ``A`` start, ``T`` target, ``D`` ditch, an uppercase item id, ``.`` free.
Lines starting with ``#`` are ignored by the parser (and not re-emitted).
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import List, Sequence, Union

from .env import Layout, LayoutError

_RESERVED = {"A", "T", "D", "."}


class LayoutFormatError(ValueError):
    """The pool document cannot be parsed."""


def parse_layouts(text: str) -> List[Layout]:
    lines = [ln.rstrip() for ln in text.splitlines() if not ln.lstrip().startswith("#")]
    blocks, cur = [], []
    for ln in lines:
        if ln.strip():
            cur.append(ln)
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    if not blocks:
        raise LayoutFormatError("empty pool")

    pool = []
    seen = set()
    for block in blocks:
        header = block[0].split()
        if len(header) != 2 or header[0] != "layout":
            raise LayoutFormatError(f"expected 'layout <id>' header, got {block[0]!r}")
        layout_id = header[1]
        if layout_id in seen:
            raise LayoutFormatError(f"duplicate layout id {layout_id!r}")
        seen.add(layout_id)
        pool.append(_parse_grid(layout_id, [row.split() for row in block[1:]]))
    return pool


def _parse_grid(layout_id: str, rows: List[List[str]]) -> Layout:
    if not rows:
        raise LayoutFormatError(f"layout {layout_id!r}: no grid rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise LayoutFormatError(f"layout {layout_id!r}: rows have unequal length")
    start = target = None
    ditches, items = set(), {}
    for r, row in enumerate(rows):
        for c, g in enumerate(row):
            if len(g) != 1 or not (g in _RESERVED or g.isupper()):
                raise LayoutFormatError(f"layout {layout_id!r}: bad glyph {g!r} at {(r, c)}")
            if g == "A":
                if start is not None:
                    raise LayoutFormatError(f"layout {layout_id!r}: more than one start")
                start = (r, c)
            elif g == "T":
                if target is not None:
                    raise LayoutFormatError(f"layout {layout_id!r}: more than one target")
                target = (r, c)
            elif g == "D":
                ditches.add((r, c))
            elif g != ".":
                if g in items:
                    raise LayoutFormatError(f"layout {layout_id!r}: item {g} placed twice")
                items[g] = (r, c)
    if start is None or target is None:
        raise LayoutFormatError(f"layout {layout_id!r}: needs exactly one A and one T")
    return Layout(width, len(rows), start, target, frozenset(ditches), items, layout_id)


def format_layout(layout: Layout) -> str:
    grid = [["." for _ in range(layout.width)] for _ in range(layout.height)]
    for r, c in layout.ditches:
        grid[r][c] = "D"
    for k, (r, c) in layout.item_cells.items():
        if len(k) != 1 or k in _RESERVED or not k.isupper():
            raise LayoutError(f"item id {k!r} has no single-glyph form")
        grid[r][c] = k
    grid[layout.start[0]][layout.start[1]] = "A"
    grid[layout.target[0]][layout.target[1]] = "T"
    return "\n".join([f"layout {layout.layout_id}"] + [" ".join(row) for row in grid])


def format_layouts(pool: Sequence[Layout]) -> str:
    return "\n\n".join(format_layout(l) for l in pool) + "\n"


def load_layout_pool(source: Union[str, Path, None] = None) -> List[Layout]:
    """Load a pool from a path, from document text, or (``None``) the bundled default pool."""
    if source is None:
        text = resources.files("camiq").joinpath("data/layouts.txt").read_text()
    elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = source
    return parse_layouts(text)


def default_pool() -> List[Layout]:
    return load_layout_pool(None)
