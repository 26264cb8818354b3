from pathlib import Path

from utilities import dependencies
from utilities.board import (
    Position,
    Side,
    format_position,
    legal_position,
    parse_position,
    render_board,
)
from utilities.storage import load
from utilities.tablebase import DimsMismatchError, Tablebase, ValueKind


def open_position(tb_path: Path, text: str) -> tuple[Tablebase, Position]:
    tb = load(dependencies.check_path(tb_path))
    dims, pos = parse_position(text)
    if dims != tb.dims:
        raise DimsMismatchError(f"Position is on {dims}, tablebase is {tb.dims}")
    if not legal_position(pos, dims):
        raise ValueError(f"Illegal position: {format_position(dims, pos)}")
    return tb, pos


def query_position(tb_path: Path, text: str) -> int:
    """Print the value of one position and, when White is winning, the best move."""
    try:
        tb, pos = open_position(tb_path, text)
    except (ValueError, OSError) as e:
        return dependencies.fail(e)

    value = tb.value(pos)
    keyvalues = [f"position={format_position(tb.dims, pos)}", f"value={value.kind.value}"]
    if value.kind == ValueKind.DRAW:
        summary = "draw"
    elif value.plies == 0:
        summary = "mate, 0"
        keyvalues.append("dtm=0")
    else:
        moves = tb.dtm_moves(pos)
        best = tb.best_move(pos)
        side = "White" if pos.stm == Side.WHITE else "Black"
        summary = f"win, mate in {moves} White move(s); best for {side}: {best}"
        keyvalues += [f"dtm={moves}", f"plies={value.plies}", f"best={best}"]

    dependencies.emit(f"{render_board(tb.dims, pos)}\n{summary}", keyvalues)
    return 0


def best_line(tb_path: Path, text: str) -> int:
    """Print the optimal line from a winning position down to mate."""
    try:
        tb, pos = open_position(tb_path, text)
        moves = tb.line(pos)
    except (ValueError, OSError) as e:
        return dependencies.fail(e)

    text_out = _numbered(moves, pos.stm)
    keyvalues = [f"length={len(moves)}", f"dtm={tb.dtm_moves(pos)}", "line=" + " ".join(str(m) for m in moves)]
    dependencies.emit(text_out, keyvalues)
    return 0


def _numbered(moves, first: Side) -> str:
    """'1. Ka2-b3 Kb7-a7' style rows; a Black-to-move start opens with '1... '."""
    rows, number, i = [], 1, 0
    if first == Side.BLACK and moves:
        rows.append(f"{number}... {moves[0]}")
        number, i = 2, 1
    while i < len(moves):
        pair = " ".join(str(m) for m in moves[i:i + 2])
        rows.append(f"{number}. {pair}")
        number, i = number + 1, i + 2
    return "\n".join(rows) + "\n#"


def _run_query(args) -> int:
    return query_position(args.tablebase, args.position)


def _run_bestline(args) -> int:
    return best_line(args.tablebase, args.position)


def register(subparsers):
    query = subparsers.add_parser("query", help="Value and best move of one position")
    query.add_argument("tablebase", type=Path)
    query.add_argument("position", help="e.g. '3x8 WKa3 WRa1 BKa6 w'")
    query.set_defaults(handler=_run_query)

    line = subparsers.add_parser("bestline", help="Optimal line from a winning position")
    line.add_argument("tablebase", type=Path)
    line.add_argument("position")
    line.set_defaults(handler=_run_bestline)
