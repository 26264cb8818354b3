import itertools
import logging

import pytest

from utilities.board import (
    DegenerateBoardError,
    Dims,
    IllegalMoveError,
    IllegalPositionError,
    Move,
    Piece,
    Position,
    PositionSyntaxError,
    Side,
    Square,
    TerminalKind,
    apply_move,
    classify_terminal,
    format_position,
    generate_moves,
    in_check,
    legal_position,
    map_move,
    map_position,
    parse_move_text,
    parse_position,
    rook_attacks,
    successors,
    symmetries,
)

logger = logging.getLogger("test_board")

W, B = Side.WHITE, Side.BLACK


def sq(col, row):
    return Square(col, row)


def pos(wk, wr, bk, stm):
    return Position(sq(*wk), None if wr is None else sq(*wr), sq(*bk), stm)


def all_candidates(dims: Dims):
    squares = [Square(c, r) for c in range(1, dims.m + 1) for r in range(1, dims.n + 1)]
    for wk, bk in itertools.permutations(squares, 2):
        for wr in squares + [None]:
            if wr in (wk, bk):
                continue
            for stm in (W, B):
                yield Position(wk, wr, bk, stm)


def legal_positions(dims: Dims):
    return [p for p in all_candidates(dims) if legal_position(p, dims)]


# --- Розміри дошки ---

def test_dims_rejects_degenerate():
    for m, n in [(0, 5), (5, 0), (2, 2), (1, 2)]:
        with pytest.raises(DegenerateBoardError):
            Dims(m, n)


def test_dims_accepts_narrow_boards():
    assert Dims(1, 3).squares == 3
    assert str(Dims(3, 8)) == "3x8"


# --- Шах ---

def test_in_check_blocked_by_white_king():
    assert not in_check(pos((1, 3), (1, 1), (1, 6), W)), "Білий король на вертикалі має закривати туру"


def test_in_check_open_file():
    assert in_check(pos((2, 3), (1, 1), (1, 6), B))


def test_in_check_no_shared_line():
    assert not in_check(pos((2, 3), (3, 1), (1, 6), B))


def test_in_check_without_rook():
    assert not in_check(pos((2, 3), None, (1, 6), B))


def test_rook_does_not_attack_its_own_square():
    assert not rook_attacks(sq(2, 2), sq(2, 2), sq(4, 4))


# --- Легальність ---

def test_adjacent_kings_illegal():
    assert not legal_position(pos((1, 1), (3, 5), (1, 2), W), Dims(3, 8))


def test_white_to_move_with_black_in_check_illegal():
    assert not legal_position(pos((2, 3), (1, 1), (1, 6), W), Dims(3, 8))


def test_black_to_move_in_check_legal():
    assert legal_position(pos((2, 3), (1, 1), (1, 6), B), Dims(3, 8))


def test_overlapping_pieces_illegal():
    assert not legal_position(pos((1, 1), (1, 1), (3, 5), W), Dims(3, 8))


def test_out_of_bounds_illegal():
    assert not legal_position(pos((1, 1), (4, 1), (3, 5), W), Dims(3, 8))


# --- Генерація ходів ---

def test_black_confined_to_first_column():
    """Чорний король може ходити тільки вгору чи вниз першою вертикаллю"""
    moves = generate_moves(pos((1, 3), (2, 1), (1, 6), B), Dims(3, 8))
    logger.info("confined moves: %s", [str(m) for m in moves])
    assert [m.to_sq for m in moves] == [sq(1, 5), sq(1, 7)]


def test_boxed_king_has_no_moves():
    assert generate_moves(pos((1, 1), None, (1, 3), B), Dims(1, 3)) == []


def test_corner_mate_has_no_moves():
    p = pos((2, 1), (3, 3), (1, 3), B)
    assert in_check(p)
    assert generate_moves(p, Dims(3, 3)) == []


def test_rook_cannot_pass_or_land_on_kings():
    p = pos((1, 3), (1, 1), (1, 6), W)
    rook_targets = {m.to_sq for m in generate_moves(p, Dims(3, 8)) if m.piece == Piece.ROOK}
    assert rook_targets == {sq(1, 2), sq(2, 1), sq(3, 1)}


def test_black_captures_undefended_rook_only():
    dims = Dims(4, 4)
    undefended = generate_moves(pos((4, 4), (2, 2), (1, 1), B), dims)
    assert Move(Piece.KING, sq(1, 1), sq(2, 2), captures_rook=True) in undefended

    defended = generate_moves(pos((3, 3), (2, 2), (1, 1), B), dims)
    assert Move(Piece.KING, sq(1, 1), sq(2, 2), captures_rook=True) not in defended


def test_moves_sorted_and_unique():
    dims = Dims(4, 5)
    for p in legal_positions(dims)[::37]:
        moves = generate_moves(p, dims)
        assert moves == sorted(moves, key=Move.sort_key)
        assert len(set(moves)) == len(moves)


def test_generate_moves_rejects_illegal():
    with pytest.raises(IllegalPositionError):
        generate_moves(pos((1, 1), (3, 5), (1, 2), W), Dims(3, 8))


def test_every_move_yields_legal_position():
    """Замкненість: будь-який згенерований хід веде до легальної позиції, чорні не стають під шах"""
    dims = Dims(3, 4)
    for p in legal_positions(dims):
        for mv, nxt in successors(p, dims):
            assert legal_position(nxt, dims), f"{p} --{mv}--> {nxt} нелегальна"
            assert nxt.stm == p.stm.other()


# --- Виконання ходу ---

def test_apply_rook_lift():
    dims = Dims(3, 8)
    p = pos((1, 3), (1, 1), (1, 6), W)
    nxt = apply_move(p, Move(Piece.ROOK, sq(1, 1), sq(2, 1)), dims)
    assert nxt == pos((1, 3), (2, 1), (1, 6), B)


def test_apply_capture_clears_rook():
    nxt = apply_move(
        pos((4, 4), (2, 2), (1, 1), B),
        Move(Piece.KING, sq(1, 1), sq(2, 2), captures_rook=True),
        Dims(4, 4),
    )
    assert nxt.wr is None and nxt.stm == W
    assert classify_terminal(nxt, Dims(4, 4)) == TerminalKind.ROOK_CAPTURED


def test_apply_rejects_foreign_move():
    with pytest.raises(IllegalMoveError):
        apply_move(pos((1, 3), (1, 1), (1, 6), W), Move(Piece.ROOK, sq(1, 1), sq(1, 8)), Dims(3, 8))


# --- Класифікація ---

def test_classify_checkmate():
    assert classify_terminal(pos((2, 1), (3, 3), (1, 3), B), Dims(3, 3)) == TerminalKind.CHECKMATE


def test_classify_ongoing():
    assert classify_terminal(pos((1, 1), (3, 2), (1, 3), B), Dims(3, 3)) == TerminalKind.ONGOING


def test_classify_stalemate():
    # король у куті, усі поля під боєм, шаху немає
    p = pos((1, 3), (2, 3), (1, 1), B)
    assert not in_check(p)
    assert classify_terminal(p, Dims(3, 3)) == TerminalKind.STALEMATE


def test_classify_rook_captured():
    assert classify_terminal(pos((1, 1), None, (3, 3), W), Dims(3, 3)) == TerminalKind.ROOK_CAPTURED


@pytest.mark.parametrize("dims", [Dims(2, n) for n in (3, 4, 7)] + [Dims(m, 2) for m in (3, 5)])
def test_no_checkmate_on_width_two(dims):
    mates = [p for p in legal_positions(dims) if classify_terminal(p, dims) == TerminalKind.CHECKMATE]
    assert mates == [], f"На {dims} знайдено мат: {mates[:3]}"


# --- Симетрії ---

@pytest.mark.parametrize("dims", [Dims(4, 4), Dims(3, 5)])
def test_symmetry_equivariance(dims):
    maps = symmetries(dims)
    assert len(maps) == (3 if dims.m == dims.n else 2)
    for p in legal_positions(dims)[::7]:
        moves = generate_moves(p, dims)
        for f in maps:
            image = map_position(p, f)
            assert legal_position(image, dims)
            assert set(generate_moves(image, dims)) == {map_move(m, f) for m in moves}
            assert classify_terminal(image, dims) == classify_terminal(p, dims)


# --- Текстовий формат ---

def test_parse_position_example():
    dims, p = parse_position("3x8 WKb2 WRc1 BKb7 w")
    assert dims == Dims(3, 8)
    assert p == pos((2, 2), (3, 1), (2, 7), W)


def test_parse_captured_rook_and_normalization():
    dims, p = parse_position("  4X4   wkA1 wr-  bkd4 B ")
    assert p.wr is None and p.stm == B
    assert format_position(dims, p) == "4x4 WKa1 WR- BKd4 b"


def test_format_parse_idempotent():
    text = format_position(*parse_position("3x8 WKa3 WRa1 BKa6 w"))
    assert format_position(*parse_position(text)) == text


@pytest.mark.parametrize("text", ["3x8 WKa1 WRa1", "3x8 WKz1 WRa1 BKa6 w", "3x8 WKa9 WRa1 BKa6 w", "hello"])
def test_parse_position_errors(text):
    with pytest.raises(PositionSyntaxError):
        parse_position(text)


def test_parse_move_text():
    assert parse_move_text("Ka3") == (Piece.KING, sq(1, 3))
    assert parse_move_text("rc5") == (Piece.ROOK, sq(3, 5))
    with pytest.raises(PositionSyntaxError):
        parse_move_text("Qa1")
