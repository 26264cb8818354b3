from pathlib import Path
from typing import Callable

from utilities import dependencies
from utilities.board import (
    Dims,
    Position,
    PositionSyntaxError,
    Side,
    TerminalKind,
    classify_terminal,
    format_position,
    parse_move_text,
    render_board,
    successors,
)
from utilities.tablebase import DRAW, Tablebase, ValueKind
from tools.probing import open_position

QUIT_WORDS = {"quit", "exit", "q"}


def _plural(count: int) -> str:
    return "move" if count == 1 else "moves"


class PlaySession:
    """Text session: the user moves for one side, the engine answers from the tablebase."""

    def __init__(self, tb: Tablebase, pos: Position, read: Callable[[str], str] = input, write: Callable[[str], None] = print):
        self.tb = tb
        self.dims: Dims = tb.dims
        self.pos = pos
        self.read = read
        self.write = write
        self.user_moves = 0
        self.white_moves = 0

    def _status(self) -> str:
        moves = self.tb.dtm_moves(self.pos)
        if moves is None:
            return "draw"
        return f"mate in {moves} White {_plural(moves)}"

    def _finished(self) -> bool:
        kind = classify_terminal(self.pos, self.dims)
        if kind == TerminalKind.CHECKMATE:
            self.write(f"checkmate, {self.white_moves} {_plural(self.white_moves)}")
            return True
        if kind in (TerminalKind.STALEMATE, TerminalKind.ROOK_CAPTURED):
            self.write(f"draw ({kind.value})")
            return True
        if self.tb.value(self.pos).kind == ValueKind.DRAW and not successors(self.pos, self.dims):
            self.write("draw (no legal move)")
            return True
        return False

    def _user_move(self) -> bool:
        """Read until a legal move is played; False when the user quits."""
        legal = successors(self.pos, self.dims)
        while True:
            try:
                text = self.read("your move> ").strip()
            except EOFError:
                text = ""
            if text.lower() in QUIT_WORDS or text == "":
                self.write("bye")
                return False
            try:
                piece, target = parse_move_text(text)
            except PositionSyntaxError as e:
                self.write(f"Error: {e}")
                continue
            match = next(((mv, nxt) for mv, nxt in legal if mv.piece == piece and mv.to_sq == target), None)
            if match is None:
                self.write(f"Illegal move '{text}', try again")
                continue
            self._advance(match[1])
            self.user_moves += 1
            return True

    def _advance(self, nxt: Position) -> None:
        if self.pos.stm == Side.WHITE:
            self.white_moves += 1
        self.pos = nxt

    def _engine_move(self) -> None:
        legal = successors(self.pos, self.dims)
        if self.tb.value(self.pos).is_win:
            best = self.tb.best_move(self.pos)
            mv, nxt = next((m, p) for m, p in legal if m == best)
        else:
            # drawn: first move that keeps the draw
            mv, nxt = next((m, p) for m, p in legal if self.tb.word(p) >= DRAW)
        self._advance(nxt)
        self.write(f"engine: {mv}")

    def run(self) -> int:
        user_side = self.pos.stm
        self.write(render_board(self.dims, self.pos))
        self.write(f"{format_position(self.dims, self.pos)}: {self._status()}")
        while not self._finished():
            if self.pos.stm == user_side:
                if not self._user_move():
                    return 0
            else:
                self._engine_move()
                self.write(render_board(self.dims, self.pos))
                self.write(f"{format_position(self.dims, self.pos)}: {self._status()}")
        return 0


def play(tb_path: Path, text: str) -> int:
    try:
        tb, pos = open_position(tb_path, text)
    except (ValueError, OSError) as e:
        return dependencies.fail(e)
    return PlaySession(tb, pos).run()


def _run(args) -> int:
    return play(args.tablebase, args.position)


def register(subparsers):
    parser = subparsers.add_parser("play", help="Play interactively against the tablebase")
    parser.add_argument("tablebase", type=Path)
    parser.add_argument("position")
    parser.set_defaults(handler=_run)
