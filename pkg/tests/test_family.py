import json
import logging

import pytest
from pydantic import ValidationError

from utilities.board import Dims, Position, Side, Square
from utilities.family import (
    ALL_TRIPLES,
    Case,
    ClaimTable,
    FamilyConfig,
    FamilyGeometryError,
    Formula,
    Parity,
    claimed_bound,
    classify_stacked,
    encode_family,
    f,
    iter_configs,
    load_claims,
    mirror_triple,
    perturbed,
    triple_name,
    verify_claims,
)
from utilities.tablebase import DimsMismatchError

logger = logging.getLogger("test_family")


@pytest.fixture(scope="module")
def claims():
    return load_claims()


# --- Геометрія конфігурацій ---

def test_encode_example():
    pos = encode_family(FamilyConfig(1, 3, 2, a=0, b=1), 3)
    assert pos == Position(wk=Square(3, 2), wr=Square(2, 1), bk=Square(1, 2), stm=Side.WHITE)


def test_encode_rows_from_edges():
    pos = encode_family(FamilyConfig(1, 1, 2, a=3, b=2, c=1), 8)
    assert pos.bk == Square(1, 6)
    assert pos.wk == Square(1, 3)
    assert pos.wr == Square(2, 2)


def test_encode_rejects_too_short_board():
    with pytest.raises(FamilyGeometryError):
        encode_family(FamilyConfig(1, 1, 2, a=5, b=3), 8)


def test_encode_rejects_check_on_open_file():
    """Тура на вертикалі чорного короля без заслону: білі не можуть бути на ході"""
    with pytest.raises(FamilyGeometryError):
        encode_family(FamilyConfig(2, 1, 2, a=2, b=1), 8)


def test_encode_rejects_adjacent_kings():
    with pytest.raises(FamilyGeometryError):
        encode_family(FamilyConfig(1, 2, 3, a=1, b=1), 8)


def test_config_validation():
    with pytest.raises(FamilyGeometryError):
        FamilyConfig(4, 1, 1, a=2, b=0)
    with pytest.raises(FamilyGeometryError):
        FamilyConfig(1, 1, 1, a=-1, b=0)


def test_classify_stacked_inverts_encode():
    for cfg in iter_configs(7):
        assert classify_stacked(encode_family(cfg, 7), Dims(3, 7)) == cfg


def test_classify_stacked_rejects_other_orders():
    dims = Dims(3, 8)
    assert classify_stacked(Position(Square(1, 1), Square(2, 5), Square(1, 8), Side.BLACK), dims) is None
    assert classify_stacked(Position(Square(1, 3), None, Square(1, 8), Side.WHITE), dims) is None
    assert classify_stacked(Position(Square(1, 3), Square(2, 1), Square(1, 8), Side.WHITE), Dims(4, 8)) is None


def test_interior_needs_a_free_row():
    cfg = FamilyConfig(1, 1, 2, a=3, b=2)
    assert cfg.min_height() == 7
    assert not cfg.is_interior(7)
    assert cfg.is_interior(8)


def test_mirror():
    assert mirror_triple((1, 1, 2)) == (3, 3, 2)
    assert FamilyConfig(1, 2, 3, a=2, b=1).mirrored() == FamilyConfig(3, 2, 1, a=2, b=1)
    assert triple_name((1, 3, 2)) == "f_{1,3,2}"


# --- Значення f ---

@pytest.mark.parametrize("b", range(0, 5))
def test_rook_swing_mates_at_once(tablebase, b):
    """f_{1,3,2}(0, b) = 1: тура переходить на першу вертикаль і матує"""
    assert f(tablebase(3, 8), FamilyConfig(1, 3, 2, a=0, b=b)) == 1


def test_f_example(tablebase):
    assert f(tablebase(3, 8), FamilyConfig(1, 1, 2, a=3, b=2)) == 5


def test_f_needs_three_columns(tablebase):
    with pytest.raises(DimsMismatchError):
        f(tablebase(4, 4), FamilyConfig(1, 1, 2, a=2, b=0))


# --- Модель тверджень ---

@pytest.mark.parametrize(
    "cfg,bound",
    [
        (FamilyConfig(1, 1, 1, a=4, b=3), 8),
        (FamilyConfig(2, 2, 2, a=3, b=0), 3),
        (FamilyConfig(1, 1, 1, a=1, b=5), None),
        (FamilyConfig(3, 3, 3, a=4, b=3), 8),
        (FamilyConfig(1, 3, 2, a=0, b=4), 1),
    ],
)
def test_claimed_bound(claims, cfg, bound):
    assert claimed_bound(claims, cfg) == bound


def test_claims_cover_all_legal_triples(claims):
    assert len(claims) == 11
    covered = {t for formula in claims.formulas for t in (formula.family, mirror_triple(formula.family))}
    legal = {cfg.triple for cfg in iter_configs(8)}
    assert len(legal) == 21
    assert covered == legal


def test_case_needs_exactly_one_expression():
    with pytest.raises(ValidationError):
        Case(parity=Parity.EVEN, a_min=2)
    with pytest.raises(ValidationError):
        Case(parity=Parity.EVEN, a_min=2, k=1, value=3)
    with pytest.raises(ValidationError):
        Case(a_min=2, k=7)


def test_overlapping_cases_rejected():
    with pytest.raises(ValidationError, match="overlap"):
        Formula(family=(1, 1, 1), cases=[Case(a_min=2, k=1), Case(parity=Parity.ODD, a_min=5, k=0)])


def test_disjoint_parities_accepted():
    formula = Formula(
        family=(1, 1, 2),
        cases=[Case(parity=Parity.EVEN, a_min=2, k=1), Case(parity=Parity.ODD, a_min=3, k=0)],
    )
    assert formula.value(4, 1) == 6
    assert formula.value(5, 1) == 6
    assert formula.value(3, 0) == 3
    assert formula.value(1, 0) is None


def test_duplicate_family_rejected():
    case = Case(a_min=2, k=1)
    with pytest.raises(ValidationError, match="twice"):
        ClaimTable(formulas=[Formula(family=(1, 1, 2), cases=[case]), Formula(family=(3, 3, 2), cases=[case])])


def test_load_claims_from_file(tmp_path):
    path = tmp_path / "claims.json"
    path.write_text(json.dumps({"formulas": [{"family": [2, 2, 1], "cases": [{"a_min": 2, "k": 1}]}]}))
    table = load_claims(path)
    assert table.bound(FamilyConfig(2, 2, 3, a=2, b=2)) == 5


def test_perturbed_lowers_first_family(claims):
    shifted = perturbed(claims)
    cfg = FamilyConfig(1, 1, 1, a=4, b=3)
    assert claimed_bound(shifted, cfg) == claimed_bound(claims, cfg) - 1
    other = FamilyConfig(2, 2, 1, a=4, b=3)
    assert claimed_bound(shifted, other) == claimed_bound(claims, other)


def test_case_describe():
    assert Case(parity=Parity.EVEN, a_min=2, k=1).describe() == "a+b+1, a is even and a ≥ 2"
    assert Case(a_min=0, a_max=0, value=1).describe() == "1, a = 0"


# --- Перевірка тверджень ---

@pytest.mark.parametrize("n", [8, 12])
def test_claims_hold(tablebase, claims, n):
    report = verify_claims(tablebase(3, n), claims)
    logger.info(report.to_text())
    assert report.violations == 0, report.to_text()
    assert report.ok, report.to_text()
    assert report.positions_over == []


def test_inherently_illegal_triples(tablebase, claims):
    report = verify_claims(tablebase(3, 8), claims)
    assert (2, 1, 2) in report.illegal_triples
    assert len(report.illegal_triples) == len(ALL_TRIPLES) - 21
    assert all(t[0] == t[2] != t[1] for t in report.illegal_triples)


def test_sweep_flags_perturbed_claims(tablebase, claims):
    report = verify_claims(tablebase(3, 8), perturbed(claims))
    assert not report.ok
    assert report.families[(1, 1, 1)].violations


def test_sweep_reports_coverage_gaps(tablebase, claims):
    partial = ClaimTable(formulas=claims.formulas[1:])
    report = verify_claims(tablebase(3, 8), partial)
    assert report.coverage_gaps == [(1, 1, 1), (3, 3, 3)]
    assert not report.ok


def test_sweep_needs_three_columns(tablebase, claims):
    with pytest.raises(DimsMismatchError):
        verify_claims(tablebase(4, 5), claims)


def test_values_independent_of_c(tablebase):
    tb = tablebase(3, 10)
    for cfg in iter_configs(10, interior_only=True):
        if cfg.c == 0:
            continue
        assert f(tb, cfg) == f(tb, FamilyConfig(cfg.x, cfg.y, cfg.z, cfg.a, cfg.b)), str(cfg)


def test_values_mirror_invariant(tablebase):
    tb = tablebase(3, 8)
    for cfg in iter_configs(8):
        assert tb.word(encode_family(cfg, 8)) == tb.word(encode_family(cfg.mirrored(), 8))


def test_values_stable_in_n(tablebase):
    """Внутрішня клітинка має однакове значення на дошках 3x8 і 3x10"""
    small, large = tablebase(3, 8), tablebase(3, 10)
    for cfg in iter_configs(8, interior_only=True):
        assert f(small, cfg) == f(large, cfg), str(cfg)


def test_report_output(tablebase, claims):
    report = verify_claims(tablebase(3, 8), claims)
    text = report.to_text()
    assert "f_{1,1,1}" in text
    assert "Inherently illegal" in text
    assert text.endswith("all claims hold")
    keyvalues = report.to_keyvalues()
    assert keyvalues[0] == "n=8"
    assert "violations=0" in keyvalues
    assert "ok=true" in keyvalues
    assert "positions_over=0" in keyvalues
