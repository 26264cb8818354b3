from pathlib import Path
from typing import Optional

from config import settings
from utilities import dependencies
from utilities.board import Dims
from utilities.family import ClaimTable, WIDTH, load_claims, perturbed, verify_claims
from utilities.induction import Window, fit_table, prove
from utilities.storage import default_store


def family_verify(n: int, claims: Optional[Path] = None) -> int:
    """Sweep every stacked configuration on 3 x n against the claimed bounds."""
    try:
        table = load_claims(claims)
        tb = default_store().get_or_build(Dims(WIDTH, n), settings.RKTB_WORKERS)
        report = verify_claims(tb, table)
    except (ValueError, OSError) as e:
        return dependencies.fail(e)

    dependencies.emit(report.to_text(), report.to_keyvalues())
    return 0 if report.ok else 1


def _formulas(source: str, claims: Optional[Path], perturb: bool) -> ClaimTable:
    table = load_claims(claims)
    if source == "fit":
        dependencies.logger.info(f"Fitting {len(table)} families on 3x{settings.FIT_HEIGHT}")
        fit_tb = default_store().get_or_build(Dims(WIDTH, settings.FIT_HEIGHT), settings.RKTB_WORKERS)
        table = fit_table(fit_tb, [formula.family for formula in table.formulas])
    if perturb:
        table = perturbed(table)
    return table


def prove_claims(
    n: Optional[int] = None,
    source: str = "claims",
    claims: Optional[Path] = None,
    perturb: bool = False,
    window: Optional[Window] = None,
) -> int:
    """Run base case, edge strip, window step and stabilization for the formula set."""
    n = n or settings.VERIFY_HEIGHT
    try:
        table = _formulas(source, claims, perturb)
        tb = default_store().get_or_build(Dims(WIDTH, n), settings.RKTB_WORKERS)
        report = prove(table, tb, window)
    except (ValueError, OSError) as e:
        return dependencies.fail(e)

    if source == "fit":
        formulas = "\n".join(formula.describe() for formula in table.formulas)
        dependencies.emit(f"Fitted formulas:\n{formulas}", [f"source={source}"])
    dependencies.emit(report.to_text(), report.to_keyvalues())
    return 0 if report.certified else 1


def _run_family_verify(args) -> int:
    return family_verify(args.n, args.claims)


def _run_prove(args) -> int:
    window = Window(
        args.a0 if args.a0 is not None else settings.WINDOW_A0,
        args.b0 if args.b0 is not None else settings.WINDOW_B0,
        args.window if args.window is not None else settings.WINDOW_SIZE,
    )
    return prove_claims(args.n, args.source, args.claims, args.perturb, window)


def register(subparsers):
    verify = subparsers.add_parser("family-verify", help="Check the 3 x n claims against a tablebase")
    verify.add_argument("n", type=int, help="board height")
    verify.add_argument("--claims", type=Path, help="claim table (JSON)")
    verify.set_defaults(handler=_run_family_verify)

    proof = subparsers.add_parser("prove", help="Certify the 3 x n formulas by induction on a+b")
    proof.add_argument("n", type=int, nargs="?", help="verification height (default from settings)")
    proof.add_argument("--source", choices=["claims", "fit"], default="claims")
    proof.add_argument("--claims", type=Path, help="claim table (JSON)")
    proof.add_argument("--perturb", action="store_true", help="lower one constant by 1 (must fail)")
    proof.add_argument("--window", type=int, help="window size W")
    proof.add_argument("--a0", type=int)
    proof.add_argument("--b0", type=int)
    proof.set_defaults(handler=_run_prove)
