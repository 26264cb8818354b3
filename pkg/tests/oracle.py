"""Незалежний оракул: пошук уперед з мемоізацією, без жодного коду з tablebase.py."""
from functools import lru_cache
from typing import Optional

from utilities.board import (
    Dims,
    Position,
    Side,
    TerminalKind,
    classify_terminal,
    successors,
)


def depth_limit(dims: Dims) -> int:
    return 2 * (dims.m + dims.n + 5)


@lru_cache(maxsize=None)
def wins_within(pos: Position, dims: Dims, plies: int) -> bool:
    """Чи форсують білі мат не більше ніж за ``plies`` півходів."""
    kind = classify_terminal(pos, dims)
    if kind == TerminalKind.CHECKMATE:
        return True
    if kind != TerminalKind.ONGOING or plies == 0:
        return False
    replies = [nxt for _, nxt in successors(pos, dims)]
    if not replies:
        return False
    if pos.stm == Side.WHITE:
        return any(wins_within(nxt, dims, plies - 1) for nxt in replies)
    return all(wins_within(nxt, dims, plies - 1) for nxt in replies)


def oracle_plies(pos: Position, dims: Dims) -> Optional[int]:
    """Найменша кількість півходів до мату або None (нічия в межах глибини)."""
    for plies in range(depth_limit(dims) + 1):
        if wins_within(pos, dims, plies):
            return plies
    return None
