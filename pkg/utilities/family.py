"""Stacked configurations on a three-column board and the closed-form mate bounds claimed for them.

A configuration puts the black king on column x, the white king on column y
and the rook on column z. The black king sits b rows below the top edge, the
white king a rows below the black king, the rook c rows above the bottom edge.
"""
from __future__ import annotations

import itertools
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from config import settings
from utilities.board import (
    Dims,
    Position,
    Side,
    Square,
    legal_position,
)
from utilities.tablebase import DimsMismatchError, Tablebase

logger = logging.getLogger("rookmate.family")

WIDTH = 3
COLUMNS = (1, 2, 3)
ALL_TRIPLES = tuple(itertools.product(COLUMNS, repeat=3))

Triple = tuple[int, int, int]


class FamilyGeometryError(ValueError):
    pass


class FamilyDrawError(ValueError):
    pass


def mirror_triple(t: Triple) -> Triple:
    return tuple(WIDTH + 1 - col for col in t)


def triple_name(t: Triple) -> str:
    return "f_{%d,%d,%d}" % t


@dataclass(frozen=True, order=True)
class FamilyConfig:
    x: int  # black king column
    y: int  # white king column
    z: int  # rook column
    a: int  # rows from the black king down to the white king
    b: int  # rows from the black king up to the top edge
    c: int = 0  # rows from the rook down to the bottom edge

    def __post_init__(self):
        for col in (self.x, self.y, self.z):
            if col not in COLUMNS:
                raise FamilyGeometryError(f"Column {col} is off the three-column board")
        if min(self.a, self.b, self.c) < 0:
            raise FamilyGeometryError(f"Distances must be non-negative: {self}")

    @property
    def triple(self) -> Triple:
        return (self.x, self.y, self.z)

    def min_height(self) -> int:
        return self.a + self.b + self.c + 2

    def is_interior(self, n: int) -> bool:
        """At least one empty row between the rook and the white king."""
        return n >= self.min_height() + 1

    def mirrored(self) -> "FamilyConfig":
        x, y, z = mirror_triple(self.triple)
        return FamilyConfig(x, y, z, self.a, self.b, self.c)

    def __str__(self) -> str:
        return f"{triple_name(self.triple)}(a={self.a}, b={self.b}, c={self.c})"


def _place(cfg: FamilyConfig, n: int) -> Position:
    bk_row = n - cfg.b
    wk_row = bk_row - cfg.a
    wr_row = 1 + cfg.c
    if bk_row > n or wk_row <= wr_row:
        raise FamilyGeometryError(f"{cfg} needs at least {cfg.min_height()} rows, board has {n}")
    return Position(
        wk=Square(cfg.y, wk_row),
        wr=Square(cfg.z, wr_row),
        bk=Square(cfg.x, bk_row),
        stm=Side.WHITE,
    )


def encode_family(cfg: FamilyConfig, n: int) -> Position:
    """White-to-move position of ``cfg`` on a 3 x n board."""
    pos = _place(cfg, n)
    if not legal_position(pos, Dims(WIDTH, n)):
        raise FamilyGeometryError(f"{cfg} is not a legal White-to-move position on 3x{n}")
    return pos


def classify_stacked(pos: Position, dims: Dims) -> Optional[FamilyConfig]:
    """Inverse of ``encode_family``; None when the position is not in stacked order."""
    if dims.m != WIDTH or pos.wr is None:
        return None
    if not pos.bk.row >= pos.wk.row > pos.wr.row:
        return None
    return FamilyConfig(
        x=pos.bk.col,
        y=pos.wk.col,
        z=pos.wr.col,
        a=pos.bk.row - pos.wk.row,
        b=dims.n - pos.bk.row,
        c=pos.wr.row - 1,
    )


def iter_configs(n: int, triples=ALL_TRIPLES, interior_only: bool = False) -> Iterator[FamilyConfig]:
    """Every configuration of ``triples`` that encodes legally on 3 x n, in sorted order."""
    for x, y, z in triples:
        for a in range(n):
            for b in range(n - a):
                for c in range(n - a - b - 1):
                    cfg = FamilyConfig(x, y, z, a, b, c)
                    if interior_only and not cfg.is_interior(n):
                        continue
                    try:
                        encode_family(cfg, n)
                    except FamilyGeometryError:
                        continue
                    yield cfg


def f(tb: Tablebase, cfg: FamilyConfig) -> int:
    """White moves to mate from the configuration on the tablebase's board."""
    if tb.dims.m != WIDTH:
        raise DimsMismatchError(f"Family values need a 3-column tablebase, got {tb.dims}")
    pos = encode_family(cfg, tb.dims.n)
    moves = tb.dtm_moves(pos)
    if moves is None:
        raise FamilyDrawError(f"{cfg} is a draw on {tb.dims}")
    return moves


# --- Claimed closed forms ---

class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"
    ANY = "any"

    def matches(self, a: int) -> bool:
        if self == Parity.ANY:
            return True
        return a % 2 == (0 if self == Parity.EVEN else 1)

    @classmethod
    def of(cls, a: int) -> "Parity":
        return cls.EVEN if a % 2 == 0 else cls.ODD


class Case(BaseModel):
    """One guarded piece: ``a + b + k`` (or a fixed ``value``) for a of the given parity in [a_min, a_max]."""

    parity: Parity = Parity.ANY
    a_min: int = Field(default=0, ge=0)
    a_max: Optional[int] = Field(default=None, ge=0)
    k: Optional[int] = Field(default=None, ge=-4, le=4)
    value: Optional[int] = Field(default=None, ge=0)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _one_expression(self) -> "Case":
        if (self.k is None) == (self.value is None):
            raise ValueError("a case needs exactly one of 'k' and 'value'")
        if self.a_max is not None and self.a_max < self.a_min:
            raise ValueError(f"a_max {self.a_max} below a_min {self.a_min}")
        return self

    def matches(self, a: int) -> bool:
        if a < self.a_min or (self.a_max is not None and a > self.a_max):
            return False
        return self.parity.matches(a)

    def evaluate(self, a: int, b: int) -> int:
        return self.value if self.value is not None else a + b + self.k

    def _first_match(self, lo: int, hi: Optional[int], parity: Parity) -> Optional[int]:
        for a in (lo, lo + 1):
            if hi is not None and a > hi:
                return None
            if parity.matches(a) and self.parity.matches(a):
                return a
        return None

    def overlaps(self, other: "Case") -> bool:
        lo = max(self.a_min, other.a_min)
        caps = [c for c in (self.a_max, other.a_max) if c is not None]
        hi = min(caps) if caps else None
        return self._first_match(lo, hi, other.parity) is not None

    def describe(self) -> str:
        expr = str(self.value) if self.value is not None else (
            "a+b" if self.k == 0 else f"a+b{self.k:+d}"
        )
        if self.a_max is not None and self.a_max == self.a_min:
            return f"{expr}, a = {self.a_min}"
        guard = "" if self.parity == Parity.ANY else f"a is {self.parity.value} and "
        upper = "" if self.a_max is None else f" and a ≤ {self.a_max}"
        return f"{expr}, {guard}a ≥ {self.a_min}{upper}"


class Formula(BaseModel):
    family: Triple
    cases: list[Case]

    model_config = {"frozen": True}

    @field_validator("family")
    @classmethod
    def _columns(cls, value: Triple) -> Triple:
        if any(col not in COLUMNS for col in value):
            raise ValueError(f"family columns must be 1..3, got {value}")
        return value

    @model_validator(mode="after")
    def _disjoint(self) -> "Formula":
        for left, right in itertools.combinations(self.cases, 2):
            if left.overlaps(right):
                raise ValueError(
                    f"{triple_name(self.family)}: cases '{left.describe()}' and "
                    f"'{right.describe()}' overlap"
                )
        return self

    def case_for(self, a: int) -> Optional[Case]:
        return next((case for case in self.cases if case.matches(a)), None)

    def value(self, a: int, b: int) -> Optional[int]:
        case = self.case_for(a)
        return None if case is None else case.evaluate(a, b)

    def describe(self) -> str:
        return f"{triple_name(self.family)}(a,b) ≤ " + "; ".join(c.describe() for c in self.cases)


class ClaimTable(BaseModel):
    formulas: list[Formula]

    @model_validator(mode="after")
    def _unique(self) -> "ClaimTable":
        seen: set[Triple] = set()
        for formula in self.formulas:
            key = min(formula.family, mirror_triple(formula.family))
            if key in seen:
                raise ValueError(f"{triple_name(formula.family)} is listed twice (directly or mirrored)")
            seen.add(key)
        return self

    def __len__(self) -> int:
        return len(self.formulas)

    def lookup(self, family: Triple) -> Optional[Formula]:
        """Formula for ``family`` or for its column mirror."""
        for formula in self.formulas:
            if formula.family == family or formula.family == mirror_triple(family):
                return formula
        return None

    def bound(self, cfg: FamilyConfig) -> Optional[int]:
        formula = self.lookup(cfg.triple)
        return None if formula is None else formula.value(cfg.a, cfg.b)

    def with_shift(self, family: Triple, delta: int) -> "ClaimTable":
        """Copy with every ``k`` of one family moved by ``delta``."""
        formulas = []
        for formula in self.formulas:
            if formula.family == family:
                cases = [
                    case.model_copy(update={"k": case.k + delta}) if case.k is not None else case
                    for case in formula.cases
                ]
                formula = Formula(family=formula.family, cases=cases)
            formulas.append(formula)
        return ClaimTable(formulas=formulas)


def claimed_bound(table: ClaimTable, cfg: FamilyConfig) -> Optional[int]:
    return table.bound(cfg)


def load_claims(path: Path | str | None = None) -> ClaimTable:
    path = Path(path or settings.CLAIMS_FILE)
    with open(path, "r", encoding="utf-8") as f_in:
        return ClaimTable.model_validate(json.load(f_in))


def perturbed(table: ClaimTable) -> ClaimTable:
    """The claim set with the first family's constant lowered by one."""
    return table.with_shift(table.formulas[0].family, -1)


# --- Claim sweep ---

@dataclass
class FamilyStats:
    family: Triple
    cells: int = 0
    equal: int = 0
    violations: list[tuple[FamilyConfig, int, int]] = field(default_factory=list)

    @property
    def attained(self) -> bool:
        return self.equal > 0


@dataclass
class ClaimReport:
    n: int
    families: dict[Triple, FamilyStats]
    illegal_triples: list[Triple]
    coverage_gaps: list[Triple]
    unguarded: list[FamilyConfig]
    draws: list[FamilyConfig]
    c_dependent: list[tuple[FamilyConfig, list[int]]]
    mirror_mismatches: list[tuple[FamilyConfig, int, int]]
    tight_cells: int
    tight_exceptions: list[tuple[FamilyConfig, int, int]]
    positions_over: list[Position]

    @property
    def violations(self) -> int:
        return sum(len(s.violations) for s in self.families.values())

    @property
    def unattained(self) -> list[Triple]:
        return [t for t, s in self.families.items() if s.cells and not s.attained]

    @property
    def ok(self) -> bool:
        return not (
            self.violations
            or self.coverage_gaps
            or self.unguarded
            or self.draws
            or self.c_dependent
            or self.mirror_mismatches
            or self.unattained
        )

    def to_text(self) -> str:
        lines = [f"Claim sweep on 3x{self.n}"]
        for triple, stats in sorted(self.families.items()):
            mark = "ok" if not stats.violations else f"{len(stats.violations)} VIOLATIONS"
            lines.append(
                f"  {triple_name(triple)}: {stats.cells} cells, equality at {stats.equal}, {mark}"
            )
            for cfg, value, bound in stats.violations[:10]:
                lines.append(f"    {cfg}: f = {value} > {bound}")
        if self.illegal_triples:
            names = ", ".join(triple_name(t) for t in self.illegal_triples)
            lines.append(f"Inherently illegal (rook's open file hits the black king): {names}")
        for triple in self.coverage_gaps:
            lines.append(f"Not covered by any claim: {triple_name(triple)}")
        for cfg in self.unguarded:
            lines.append(f"No guard matches: {cfg}")
        for cfg in self.draws:
            lines.append(f"Unexpected draw: {cfg}")
        for cfg, values in self.c_dependent:
            lines.append(f"Depends on c: {cfg} takes values {values}")
        for cfg, value, other in self.mirror_mismatches:
            lines.append(f"Mirror mismatch: {cfg} = {value}, mirrored = {other}")
        lines.append(
            f"Rook directly below the white king: {self.tight_cells} cells, "
            f"{len(self.tight_exceptions)} above the claimed bound"
        )
        for cfg, value, bound in self.tight_exceptions[:10]:
            lines.append(f"    {cfg}: f = {value}, claim {bound}")
        lines.append(f"Winning positions needing more than {self.n + 2} moves: {len(self.positions_over)}")
        if self.unattained:
            names = ", ".join(triple_name(t) for t in self.unattained)
            lines.append(f"Bound never attained: {names}")
        lines.append("Result: " + ("all claims hold" if self.ok else "claims FAILED"))
        return "\n".join(lines)

    def to_keyvalues(self) -> list[str]:
        lines = [f"n={self.n}"]
        for triple, stats in sorted(self.families.items()):
            key = "".join(map(str, triple))
            lines.append(f"family.{key}.cells={stats.cells}")
            lines.append(f"family.{key}.equal={stats.equal}")
            lines.append(f"family.{key}.violations={len(stats.violations)}")
        lines += [
            f"violations={self.violations}",
            f"illegal_triples={' '.join(''.join(map(str, t)) for t in self.illegal_triples)}",
            f"coverage_gaps={len(self.coverage_gaps)}",
            f"unguarded={len(self.unguarded)}",
            f"draws={len(self.draws)}",
            f"c_dependent={len(self.c_dependent)}",
            f"mirror_mismatches={len(self.mirror_mismatches)}",
            f"tight_cells={self.tight_cells}",
            f"tight_exceptions={len(self.tight_exceptions)}",
            f"positions_over={len(self.positions_over)}",
            f"ok={str(self.ok).lower()}",
        ]
        return lines


def verify_claims(tb: Tablebase, table: ClaimTable) -> ClaimReport:
    """Check every legal stacked configuration on the tablebase's 3 x n board against ``table``.

    Interior configurations are held to the claims; configurations with the rook
    directly below the white king are collected as the exceptional set.
    """
    if tb.dims.m != WIDTH:
        raise DimsMismatchError(f"Claim sweep needs a 3-column tablebase, got {tb.dims}")
    n = tb.dims.n
    families = {formula.family: FamilyStats(formula.family) for formula in table.formulas}
    legal_triples: set[Triple] = set()
    unguarded, draws, tight_exceptions = [], [], []
    tight_cells = 0
    values: dict[FamilyConfig, int] = {}
    by_c: dict[FamilyConfig, set[int]] = defaultdict(set)

    for cfg in iter_configs(n):
        legal_triples.add(cfg.triple)
        formula = table.lookup(cfg.triple)
        try:
            value = f(tb, cfg)
        except FamilyDrawError:
            draws.append(cfg)
            continue
        values[cfg] = value
        if formula is None:
            continue
        bound = formula.value(cfg.a, cfg.b)
        if not cfg.is_interior(n):
            tight_cells += 1
            if bound is not None and value > bound:
                tight_exceptions.append((cfg, value, bound))
            continue
        by_c[FamilyConfig(cfg.x, cfg.y, cfg.z, cfg.a, cfg.b)].add(value)
        if bound is None:
            unguarded.append(cfg)
            continue
        stats = families[formula.family]
        stats.cells += 1
        if value > bound:
            stats.violations.append((cfg, value, bound))
        elif value == bound:
            stats.equal += 1

    mirror_mismatches = []
    for cfg, value in values.items():
        other = values.get(cfg.mirrored())
        if other is not None and other != value and cfg < cfg.mirrored():
            mirror_mismatches.append((cfg, value, other))

    report = ClaimReport(
        n=n,
        families=families,
        illegal_triples=[t for t in ALL_TRIPLES if t not in legal_triples],
        coverage_gaps=sorted(t for t in legal_triples if table.lookup(t) is None),
        unguarded=unguarded,
        draws=draws,
        c_dependent=[(cfg, sorted(v)) for cfg, v in sorted(by_c.items()) if len(v) > 1],
        mirror_mismatches=mirror_mismatches,
        tight_cells=tight_cells,
        tight_exceptions=tight_exceptions,
        positions_over=tb.positions_over(n + 2),
    )
    logger.info(
        f"Claim sweep on 3x{n}: {sum(s.cells for s in families.values())} cells, "
        f"{report.violations} violations"
    )
    return report
