from pathlib import Path

from config import settings
from utilities import dependencies
from utilities.board import DegenerateBoardError, Dims
from utilities.storage import save
from utilities.tablebase import NoWinsError, build


def build_tablebase(m: int, n: int, out: Path) -> int:
    """Solve the m x n board, write it as an RKTB file and print its totals."""
    try:
        dims = Dims(m, n)
    except DegenerateBoardError as e:
        return dependencies.fail(e, status=2)

    try:
        tb = build(dims, settings.RKTB_WORKERS)
        out = dependencies.check_path(out, check_existence=False)
        out.parent.mkdir(parents=True, exist_ok=True)
        save(tb, out)
    except (ValueError, OSError) as e:
        return dependencies.fail(e)

    meta = tb.meta
    lines = [
        f"Board {dims}: {meta.wins} wins, {meta.draws} draws, {meta.illegal} illegal "
        f"({meta.iterations} plies of retrograde analysis)",
        f"Saved to {out} ({dependencies.format_size(out.stat().st_size)})",
    ]
    keyvalues = [
        f"dims={dims}",
        f"wins={meta.wins}",
        f"draws={meta.draws}",
        f"illegal={meta.illegal}",
        f"iterations={meta.iterations}",
    ]
    try:
        result = tb.max_dtm()
    except NoWinsError:
        lines.append("No winning position: no wins")
        keyvalues.append("max_dtm=none")
    else:
        lines.append(f"Max DTM: {result.u_moves} moves")
        keyvalues.append(f"max_dtm={result.u_moves}")
        if result.u_moves > 2 * (m + n):
            dependencies.logger.warning(
                f"U({m},{n}) = {result.u_moves} exceeds the 2(m+n) envelope"
            )
    dependencies.emit("\n".join(lines), keyvalues)
    return 0


def _run(args) -> int:
    return build_tablebase(args.m, args.n, args.out)


def register(subparsers):
    parser = subparsers.add_parser("build", help="Solve one board and write an RKTB file")
    parser.add_argument("m", type=int, help="columns")
    parser.add_argument("n", type=int, help="rows")
    parser.add_argument("out", type=Path, help="output file")
    parser.set_defaults(handler=_run)
