"""Wang tiles as a two-dimensional lattice gas.

Tile ids are free-form tokens in files; inside a :class:`TilingGrid` every
cell holds the tile's index in its :class:`Tileset` (``HOLE`` for unassigned
cells).  Rows run north to south: cell ``(x, y)`` has its northern
neighbour at ``(x, y - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Patch
from .errors import BudgetError, ContractError, ParseError

HOLE = -1


@dataclass(frozen=True)
class Tile:
    id: str
    north: int
    east: int
    south: int
    west: int


@dataclass(frozen=True)
class Tileset:
    tiles: tuple[Tile, ...]

    def __post_init__(self):
        if not self.tiles:
            raise ContractError("a tileset needs at least one tile")
        ids = [t.id for t in self.tiles]
        if len(set(ids)) != len(ids):
            raise ContractError("tile ids must be unique")

    def __len__(self):
        return len(self.tiles)

    def index(self, tile_id: str) -> int:
        for k, t in enumerate(self.tiles):
            if t.id == tile_id:
                return k
        raise ContractError(f"unknown tile id {tile_id!r}")

    @property
    def colors(self) -> int:
        return 1 + max(max(t.north, t.east, t.south, t.west) for t in self.tiles)

    def edge_arrays(self):
        n = np.array([t.north for t in self.tiles])
        e = np.array([t.east for t in self.tiles])
        s = np.array([t.south for t in self.tiles])
        w = np.array([t.west for t in self.tiles])
        return n, e, s, w


def load_tileset(text: str) -> Tileset:
    """Parse ``T <id> <north> <east> <south> <west>`` lines; ``#`` starts a comment."""
    tiles = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "T" or len(parts) != 6:
            raise ParseError(f"expected 'T <id> <north> <east> <south> <west>', got {line!r}", lineno)
        tid = parts[1]
        if tid in seen:
            raise ParseError(f"duplicate tile id {tid!r} (first on line {seen[tid]})", lineno)
        try:
            colors = [int(c) for c in parts[2:]]
        except ValueError:
            raise ParseError(f"colors must be integers in {line!r}", lineno) from None
        if min(colors) < 0:
            raise ParseError("colors must be non-negative", lineno)
        seen[tid] = lineno
        tiles.append(Tile(tid, *colors))
    if not tiles:
        raise ParseError("tileset is empty")
    return Tileset(tuple(tiles))


def dump_tileset(tileset: Tileset) -> str:
    return "".join(f"T {t.id} {t.north} {t.east} {t.south} {t.west}\n" for t in tileset.tiles)


@dataclass(frozen=True, eq=False)
class TilingGrid:
    tileset: Tileset
    x0: int
    y0: int
    cells: np.ndarray = field(repr=False)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def complete(self) -> bool:
        return not np.any(self.cells == HOLE)

    @classmethod
    def filled(cls, tileset: Tileset, width: int, height: int, tile: int = 0, x0: int = 0, y0: int = 0):
        return cls(tileset, x0, y0, np.full((height, width), tile, dtype=np.int64))

    @classmethod
    def empty(cls, tileset: Tileset, width: int, height: int, x0: int = 0, y0: int = 0):
        return cls.filled(tileset, width, height, HOLE, x0, y0)

    def with_cell(self, x: int, y: int, tile: int) -> "TilingGrid":
        cells = self.cells.copy()
        cells[y - self.y0, x - self.x0] = tile
        return TilingGrid(self.tileset, self.x0, self.y0, cells)

    def translated(self, dx: int, dy: int) -> "TilingGrid":
        return TilingGrid(self.tileset, self.x0 + dx, self.y0 + dy, self.cells.copy())

    def __eq__(self, other):
        return (
            isinstance(other, TilingGrid)
            and (self.x0, self.y0) == (other.x0, other.y0)
            and self.tileset == other.tileset
            and np.array_equal(self.cells, other.cells)
        )


def load_grid(text: str, tileset: Tileset) -> TilingGrid:
    """Header ``G <width> <height> <x0> <y0>`` then ``height`` rows of ids or ``.``."""
    rows = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "G" or len(parts) != 5:
                raise ParseError("expected header 'G <width> <height> <x0> <y0>'", lineno)
            try:
                header = tuple(int(v) for v in parts[1:])
            except ValueError:
                raise ParseError("grid header values must be integers", lineno) from None
            continue
        if len(parts) != header[0]:
            raise ParseError(f"row has {len(parts)} cells, expected {header[0]}", lineno)
        row = []
        for tok in parts:
            if tok == ".":
                row.append(HOLE)
            else:
                try:
                    row.append(tileset.index(tok))
                except ContractError as exc:
                    raise ParseError(str(exc), lineno) from None
        rows.append(row)
    if header is None:
        raise ParseError("missing grid header")
    w, h, x0, y0 = header
    if len(rows) != h:
        raise ParseError(f"expected {h} rows, found {len(rows)}")
    return TilingGrid(tileset, x0, y0, np.asarray(rows, dtype=np.int64).reshape(h, w))


def dump_grid(grid: TilingGrid) -> str:
    lines = [f"G {grid.width} {grid.height} {grid.x0} {grid.y0}"]
    for row in grid.cells:
        lines.append(" ".join("." if c == HOLE else grid.tileset.tiles[c].id for c in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BrokenBond:
    a: tuple[int, int]
    b: tuple[int, int]
    direction: str


def verify_tiling(grid: TilingGrid) -> list[BrokenBond]:
    """Adjacent pairs whose shared edge colours differ (each unordered pair once)."""
    if not grid.complete:
        raise ContractError("grid has holes; complete the region first")
    n, e, s, w = grid.tileset.edge_arrays()
    c = grid.cells
    bad = []
    horiz = e[c[:, :-1]] != w[c[:, 1:]]
    for yy, xx in zip(*np.nonzero(horiz)):
        x, y = grid.x0 + int(xx), grid.y0 + int(yy)
        bad.append(BrokenBond((x, y), (x + 1, y), "east"))
    vert = s[c[:-1, :]] != n[c[1:, :]]
    for yy, xx in zip(*np.nonzero(vert)):
        x, y = grid.x0 + int(xx), grid.y0 + int(yy)
        bad.append(BrokenBond((x, y), (x, y + 1), "south"))
    return sorted(bad, key=lambda b: (b.a[1], b.a[0], b.direction))


def tiling_energy(grid: TilingGrid, chemical: dict[int, float] | None = None) -> float:
    """Matching-rule energy (one per broken bond) minus ``eps`` per favoured tile."""
    energy = float(len(verify_tiling(grid)))
    for tile, eps in (chemical or {}).items():
        energy -= eps * int(np.sum(grid.cells == tile))
    return energy


@dataclass(frozen=True)
class Completion:
    grid: TilingGrid | None
    nodes: int

    @property
    def satisfiable(self) -> bool:
        return self.grid is not None


def complete_region(grid: TilingGrid, max_cells: int = 1000, max_nodes: int = 1_000_000) -> Completion:
    """Fill the holes of ``grid`` so that no bond is broken, or certify that none exists.

    Depth-first search on the most constrained hole (ties in row-major order),
    trying tiles in tileset order.  Exceeding ``max_nodes`` raises
    :class:`BudgetError`, which is not an unsatisfiability verdict.
    """
    h, w = grid.cells.shape
    if h * w > max_cells:
        raise BudgetError(f"region of {h * w} cells exceeds {max_cells}")
    n, e, s, wst = grid.tileset.edge_arrays()
    cells = grid.cells.copy()
    ntiles = len(grid.tileset)

    # fixed cells must already agree with one another
    fixed = cells != HOLE
    for y in range(h):
        for x in range(w):
            if not fixed[y, x]:
                continue
            t = cells[y, x]
            if x + 1 < w and fixed[y, x + 1] and e[t] != wst[cells[y, x + 1]]:
                return Completion(None, 0)
            if y + 1 < h and fixed[y + 1, x] and s[t] != n[cells[y + 1, x]]:
                return Completion(None, 0)

    def candidates(y, x):
        ok = np.ones(ntiles, dtype=bool)
        if y > 0 and cells[y - 1, x] != HOLE:
            ok &= n == s[cells[y - 1, x]]
        if y + 1 < h and cells[y + 1, x] != HOLE:
            ok &= s == n[cells[y + 1, x]]
        if x > 0 and cells[y, x - 1] != HOLE:
            ok &= wst == e[cells[y, x - 1]]
        if x + 1 < w and cells[y, x + 1] != HOLE:
            ok &= e == wst[cells[y, x + 1]]
        return np.flatnonzero(ok)

    nodes = 0

    def solve() -> bool:
        nonlocal nodes
        holes = np.argwhere(cells == HOLE)
        if len(holes) == 0:
            return True
        best, best_c = None, None
        for y, x in holes:
            c = candidates(y, x)
            if best_c is None or len(c) < len(best_c):
                best, best_c = (y, x), c
                if len(c) == 0:
                    return False
        y, x = best
        for t in best_c:
            nodes += 1
            if nodes > max_nodes:
                raise BudgetError(f"search exceeded {max_nodes} nodes")
            cells[y, x] = t
            if solve():
                return True
        cells[y, x] = HOLE
        return False

    if solve():
        return Completion(TilingGrid(grid.tileset, grid.x0, grid.y0, cells), nodes)
    return Completion(None, nodes)


def count_patch_2d(grid: TilingGrid, patch: Patch) -> int:
    """Fully contained translates of a 2D patch of tile indices, offsets ``(dx, dy)``."""
    if not grid.complete:
        raise ContractError("grid has holes")
    if patch.dim != 2:
        raise ContractError("count_patch_2d needs a 2D patch")
    px = max(o[0] for o in patch.offsets)
    py = max(o[1] for o in patch.offsets)
    nx, ny = grid.width - px, grid.height - py
    if nx <= 0 or ny <= 0:
        return 0
    hit = np.ones((ny, nx), dtype=bool)
    for (dx, dy), tile in patch.cells:
        hit &= grid.cells[dy : dy + ny, dx : dx + nx] == tile
    return int(hit.sum())


def parse_patch_2d(text: str, tileset: Tileset) -> Patch:
    """``"dx,dy:id;dx,dy:id"``, or a bare tile id for a single-cell patch."""
    text = text.strip()
    if ":" not in text:
        return Patch.from_cells([((0, 0), tileset.index(text))])
    cells = []
    for item in text.split(";"):
        try:
            pos, tid = item.split(":")
            dx, dy = (int(v) for v in pos.split(","))
        except ValueError:
            raise ParseError(f"bad 2D patch cell {item!r}") from None
        cells.append(((dx, dy), tileset.index(tid.strip())))
    return Patch.from_cells(cells)
