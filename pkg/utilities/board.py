"""Rules of the reduced game: white king + white rook against a lone black king on an m x n board.

Columns run 1..m left to right, rows 1..n bottom to top. Only Black can ever be in
check, so legality reduces to three things: distinct squares, kings apart, and
"White to move while Black is in check" never happening.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from typing import Callable, Optional

KING_STEPS = tuple(
    (dc, dr) for dc in (-1, 0, 1) for dr in (-1, 0, 1) if (dc, dr) != (0, 0)
)
ROOK_RAYS = ((1, 0), (-1, 0), (0, 1), (0, -1))

# the text grammar uses one letter per column
MAX_LETTER_COLUMNS = 26


class DegenerateBoardError(ValueError):
    pass


class IllegalPositionError(ValueError):
    pass


class IllegalMoveError(ValueError):
    pass


class PositionSyntaxError(ValueError):
    pass


class Side(IntEnum):
    WHITE = 0
    BLACK = 1

    def other(self) -> "Side":
        return Side.BLACK if self == Side.WHITE else Side.WHITE


class Piece(Enum):
    KING = "K"
    ROOK = "R"


class TerminalKind(Enum):
    CHECKMATE = "checkmate"
    STALEMATE = "stalemate"
    ROOK_CAPTURED = "rook-captured"
    ONGOING = "ongoing"


@dataclass(frozen=True, slots=True)
class Dims:
    m: int  # columns
    n: int  # rows

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DegenerateBoardError(f"Board {self.m}x{self.n}: both sides must be at least 1")
        # two kings need a pair of squares at Chebyshev distance >= 2
        if max(self.m, self.n) < 3:
            raise DegenerateBoardError(f"Board {self.m}x{self.n} admits no legal placement")

    @property
    def squares(self) -> int:
        return self.m * self.n

    def contains(self, sq: "Square") -> bool:
        return 1 <= sq.col <= self.m and 1 <= sq.row <= self.n

    def __str__(self) -> str:
        return f"{self.m}x{self.n}"


@dataclass(frozen=True, order=True, slots=True)
class Square:
    col: int
    row: int

    def step(self, dc: int, dr: int) -> "Square":
        return Square(self.col + dc, self.row + dr)

    @property
    def name(self) -> str:
        if not 1 <= self.col <= MAX_LETTER_COLUMNS:
            raise PositionSyntaxError(f"Column {self.col} has no letter name")
        return f"{chr(ord('a') + self.col - 1)}{self.row}"

    @classmethod
    def parse(cls, text: str) -> "Square":
        match = re.fullmatch(r"([a-zA-Z])(\d+)", text.strip())
        if not match:
            raise PositionSyntaxError(f"Bad square '{text}'")
        return cls(ord(match.group(1).lower()) - ord("a") + 1, int(match.group(2)))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Position:
    wk: Square
    wr: Optional[Square]
    bk: Square
    stm: Side

    def squares(self) -> tuple[Square, ...]:
        return (self.wk, self.bk) if self.wr is None else (self.wk, self.wr, self.bk)


@dataclass(frozen=True, slots=True)
class Move:
    piece: Piece
    from_sq: Square
    to_sq: Square
    captures_rook: bool = False

    def sort_key(self) -> tuple[int, int, int, int]:
        return (self.from_sq.col, self.from_sq.row, self.to_sq.col, self.to_sq.row)

    @property
    def text(self) -> str:
        return f"{self.piece.value}{self.to_sq.name}"

    def __str__(self) -> str:
        suffix = "x" if self.captures_rook else "-"
        return f"{self.piece.value}{self.from_sq.name}{suffix}{self.to_sq.name}"


def chebyshev(a: Square, b: Square) -> int:
    return max(abs(a.col - b.col), abs(a.row - b.row))


def _strictly_between(k: int, lo: int, hi: int) -> bool:
    return min(lo, hi) < k < max(lo, hi)


def rook_attacks(rook: Square, target: Square, wk: Square) -> bool:
    """Rook hits target along a rank or file; the white king is the only possible blocker."""
    if rook == target:
        return False
    if rook.col == target.col:
        return not (wk.col == rook.col and _strictly_between(wk.row, rook.row, target.row))
    if rook.row == target.row:
        return not (wk.row == rook.row and _strictly_between(wk.col, rook.col, target.col))
    return False


def in_check(pos: Position) -> bool:
    return pos.wr is not None and rook_attacks(pos.wr, pos.bk, pos.wk)


def legal_position(pos: Position, dims: Dims) -> bool:
    squares = pos.squares()
    if not all(dims.contains(sq) for sq in squares):
        return False
    if len(set(squares)) != len(squares):
        return False
    if chebyshev(pos.wk, pos.bk) < 2:
        return False
    return not (pos.stm == Side.WHITE and in_check(pos))


def _require_legal(pos: Position, dims: Dims) -> None:
    if not legal_position(pos, dims):
        raise IllegalPositionError(f"Illegal position on {dims}: {pos}")


def _white_moves(pos: Position, dims: Dims) -> list[Move]:
    moves = []
    for dc, dr in KING_STEPS:
        to = pos.wk.step(dc, dr)
        if dims.contains(to) and chebyshev(to, pos.bk) >= 2 and to != pos.wr:
            moves.append(Move(Piece.KING, pos.wk, to))

    if pos.wr is not None:
        for dc, dr in ROOK_RAYS:
            to = pos.wr.step(dc, dr)
            # stops before whichever king is met first
            while dims.contains(to) and to != pos.wk and to != pos.bk:
                moves.append(Move(Piece.ROOK, pos.wr, to))
                to = to.step(dc, dr)
    return moves


def _black_moves(pos: Position, dims: Dims) -> list[Move]:
    moves = []
    for dc, dr in KING_STEPS:
        to = pos.bk.step(dc, dr)
        if not dims.contains(to) or chebyshev(to, pos.wk) < 2:
            continue
        if to == pos.wr:
            if chebyshev(pos.wr, pos.wk) >= 2:
                moves.append(Move(Piece.KING, pos.bk, to, captures_rook=True))
        elif pos.wr is None or not rook_attacks(pos.wr, to, pos.wk):
            moves.append(Move(Piece.KING, pos.bk, to))
    return moves


def generate_moves(pos: Position, dims: Dims) -> list[Move]:
    """All legal moves for the side to move, sorted by (from.col, from.row, to.col, to.row)."""
    _require_legal(pos, dims)
    if pos.stm == Side.WHITE:
        moves = _white_moves(pos, dims)
    else:
        moves = _black_moves(pos, dims)
    return sorted(moves, key=Move.sort_key)


def _relocate(pos: Position, mv: Move) -> Position:
    if pos.stm == Side.BLACK:
        wr = None if mv.captures_rook else pos.wr
        return Position(pos.wk, wr, mv.to_sq, Side.WHITE)
    if mv.piece == Piece.KING:
        return replace(pos, wk=mv.to_sq, stm=Side.BLACK)
    return replace(pos, wr=mv.to_sq, stm=Side.BLACK)


def apply_move(pos: Position, mv: Move, dims: Dims) -> Position:
    if mv not in generate_moves(pos, dims):
        raise IllegalMoveError(f"Move {mv} is not legal in {pos}")
    return _relocate(pos, mv)


def successors(pos: Position, dims: Dims) -> list[tuple[Move, Position]]:
    """(move, resulting position) pairs in move order."""
    return [(mv, _relocate(pos, mv)) for mv in generate_moves(pos, dims)]


def classify_terminal(pos: Position, dims: Dims) -> TerminalKind:
    _require_legal(pos, dims)
    if pos.wr is None:
        return TerminalKind.ROOK_CAPTURED
    if pos.stm == Side.BLACK and not _black_moves(pos, dims):
        return TerminalKind.CHECKMATE if in_check(pos) else TerminalKind.STALEMATE
    return TerminalKind.ONGOING


# --- Board symmetries ---

SquareMap = Callable[[Square], Square]


def mirror_columns(dims: Dims) -> SquareMap:
    return lambda sq: Square(dims.m + 1 - sq.col, sq.row)


def mirror_rows(dims: Dims) -> SquareMap:
    return lambda sq: Square(sq.col, dims.n + 1 - sq.row)


def transpose(dims: Dims) -> SquareMap:
    if dims.m != dims.n:
        raise ValueError(f"Transpose needs a square board, got {dims}")
    return lambda sq: Square(sq.row, sq.col)


def symmetries(dims: Dims) -> list[SquareMap]:
    maps = [mirror_columns(dims), mirror_rows(dims)]
    if dims.m == dims.n:
        maps.append(transpose(dims))
    return maps


def map_position(pos: Position, f: SquareMap) -> Position:
    return Position(f(pos.wk), None if pos.wr is None else f(pos.wr), f(pos.bk), pos.stm)


def map_move(mv: Move, f: SquareMap) -> Move:
    return Move(mv.piece, f(mv.from_sq), f(mv.to_sq), mv.captures_rook)


# --- Text grammar: "<m>x<n> WK<sq> WR<sq>|WR- BK<sq> <w|b>" ---

_POSITION_RE = re.compile(
    r"(\d+)x(\d+)\s+WK([a-z]\d+)\s+WR(?:([a-z]\d+)|-)\s+BK([a-z]\d+)\s+([wb])",
    re.IGNORECASE,
)
_MOVE_RE = re.compile(r"([KR])([a-z]\d+)", re.IGNORECASE)


def parse_position(text: str) -> tuple[Dims, Position]:
    """Parse the position grammar; squares must lie on the board, legality is not checked."""
    match = _POSITION_RE.fullmatch(" ".join(text.split()))
    if not match:
        raise PositionSyntaxError(
            f"Cannot parse '{text}', expected e.g. '3x8 WKb2 WRc1 BKb7 w'"
        )
    m, n, wk, wr, bk, side = match.groups()
    dims = Dims(int(m), int(n))
    if dims.m > MAX_LETTER_COLUMNS:
        raise PositionSyntaxError(f"Text positions support at most {MAX_LETTER_COLUMNS} columns")
    pos = Position(
        wk=Square.parse(wk),
        wr=None if wr is None else Square.parse(wr),
        bk=Square.parse(bk),
        stm=Side.WHITE if side.lower() == "w" else Side.BLACK,
    )
    for sq in pos.squares():
        if not dims.contains(sq):
            raise PositionSyntaxError(f"Square {sq.name} is off the {dims} board")
    return dims, pos


def format_position(dims: Dims, pos: Position) -> str:
    wr = "-" if pos.wr is None else pos.wr.name
    side = "w" if pos.stm == Side.WHITE else "b"
    return f"{dims} WK{pos.wk.name} WR{wr} BK{pos.bk.name} {side}"


def parse_move_text(text: str) -> tuple[Piece, Square]:
    """'Ka3' / 'Rc5' -> (piece, destination)."""
    match = _MOVE_RE.fullmatch(text.strip())
    if not match:
        raise PositionSyntaxError(f"Bad move '{text}', expected e.g. 'Ka3' or 'Rc5'")
    return Piece(match.group(1).upper()), Square.parse(match.group(2))


def render_board(dims: Dims, pos: Position) -> str:
    """Plain diagram, top row first: K/R white, k black, . empty."""
    marks = {pos.wk: "K", pos.bk: "k"}
    if pos.wr is not None:
        marks[pos.wr] = "R"
    lines = []
    for row in range(dims.n, 0, -1):
        cells = " ".join(marks.get(Square(col, row), ".") for col in range(1, dims.m + 1))
        lines.append(f"{row:>3} {cells}")
    if dims.m <= MAX_LETTER_COLUMNS:
        lines.append("    " + " ".join(chr(ord("a") + c) for c in range(dims.m)))
    return "\n".join(lines)
