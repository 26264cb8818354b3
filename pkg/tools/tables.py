import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from config import settings
from utilities import dependencies
from utilities.board import DegenerateBoardError, Dims
from utilities.storage import TablebaseStore, default_store
from utilities.tablebase import NoWinsError

# (m, n) -> published U(m, n), always keyed with m <= n
Published = dict[tuple[int, int], int]

CONJECTURE_EXCEPTIONS = {(4, 4): 7}


def load_published(path: Path | str | None = None) -> Published:
    path = Path(path or settings.PUBLISHED_FILE)
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    return {(int(m), int(n)): int(u) for m, row in raw.items() for n, u in row.items()}


@dataclass
class Cell:
    m: int
    n: int
    u: Optional[int] = None  # None: no wins, or no legal placement at all
    skipped: bool = False
    published: Optional[int] = None

    @property
    def mismatch(self) -> bool:
        return self.published is not None and not self.skipped and self.u != self.published


def _cells(m_range: range, n_range: range) -> list[tuple[int, int]]:
    """Requested boards normalized to m <= n (U is symmetric under transpose), deduplicated."""
    seen = set()
    for m in m_range:
        for n in n_range:
            seen.add((min(m, n), max(m, n)))
    return sorted(seen)


def compute_cells(
    m_range: range,
    n_range: range,
    store: TablebaseStore | None = None,
    published: Published | None = None,
) -> dict[tuple[int, int], Cell]:
    store = store or default_store()
    published = load_published() if published is None else published
    cells = {}
    for m, n in _cells(m_range, n_range):
        cell = Cell(m, n, published=published.get((m, n)))
        if m * n > settings.TABLE_SQUARE_BUDGET:
            dependencies.logger.warning(
                f"Skipping {m}x{n}: {m * n} squares exceed the budget of {settings.TABLE_SQUARE_BUDGET}"
            )
            cell.skipped = True
        else:
            try:
                tb = store.get_or_build(Dims(m, n), settings.RKTB_WORKERS)
                cell.u = tb.max_dtm().u_moves
            except DegenerateBoardError as e:
                dependencies.logger.warning(f"Skipping {m}x{n}: {e}")
            except NoWinsError:
                pass
        cells[(m, n)] = cell
    return cells


def render_table(cells: dict[tuple[int, int], Cell]) -> str:
    """Grid of U(m,n): '-' below the diagonal, '*' marks values with no published counterpart."""
    rows_m = sorted({m for m, _ in cells})
    cols_n = sorted({n for _, n in cells})
    width = 5
    lines = ["m\\n".ljust(width) + "".join(str(n).rjust(width) for n in cols_n)]
    for m in rows_m:
        row = [str(m).ljust(width)]
        for n in cols_n:
            cell = cells.get((m, n))
            if n < m:
                text = "-"
            elif cell is None:
                text = ""
            elif cell.skipped:
                text = "?"
            elif cell.u is None:
                text = "none"
            else:
                text = str(cell.u) + ("" if cell.published is not None else "*")
                if cell.mismatch:
                    text += "!"
            row.append(text.rjust(width))
        lines.append("".join(row))
    lines.append("* not in the published table   ? over the square budget   ! differs from the published value")
    return "\n".join(lines)


def show_table(m_range: range, n_range: range) -> int:
    """Compute U(m,n) over the ranges and compare with the published table."""
    try:
        cells = compute_cells(m_range, n_range)
    except (ValueError, OSError) as e:
        return dependencies.fail(e)

    mismatches = [c for c in cells.values() if c.mismatch]
    keyvalues = []
    for (m, n), cell in sorted(cells.items()):
        value = "skipped" if cell.skipped else ("none" if cell.u is None else cell.u)
        keyvalues.append(f"U.{m}.{n}={value}")
    keyvalues.append(f"mismatches={len(mismatches)}")
    dependencies.emit(render_table(cells), keyvalues)
    for cell in mismatches:
        dependencies.logger.error(f"U({cell.m},{cell.n}) = {cell.u}, published {cell.published}")
    return 1 if mismatches else 0


def expected_u(m: int, n: int) -> int:
    return CONJECTURE_EXCEPTIONS.get((m, n), m + n)


def check_conjecture(m_range: range, n_range: range) -> int:
    """U(m,n) = m+n for m, n >= 4 except (4,4) = 7.

    Disagreement on a published board fails; on an unpublished board it is flagged only.
    """
    try:
        cells = compute_cells(
            range(max(m_range.start, 4), max(m_range.stop, 4)),
            range(max(n_range.start, 4), max(n_range.stop, 4)),
        )
    except (ValueError, OSError) as e:
        return dependencies.fail(e)

    lines, keyvalues = [], []
    failed = flagged = checked = 0
    for (m, n), cell in sorted(cells.items()):
        if cell.skipped:
            lines.append(f"{m}x{n}: skipped (over the square budget)")
            keyvalues.append(f"conjecture.{m}.{n}=skipped")
            continue
        checked += 1
        want = expected_u(m, n)
        if cell.u == want:
            status = "holds"
        elif cell.published is not None:
            status = "FAILS"
            failed += 1
        else:
            status = "flagged"
            flagged += 1
        lines.append(f"{m}x{n}: U = {cell.u}, conjecture {want}: {status}")
        keyvalues.append(f"conjecture.{m}.{n}={status.lower()}")
    keyvalues += [f"checked={checked}", f"failed={failed}", f"flagged={flagged}"]
    lines.append(f"{checked} boards checked, {failed} counterexamples, {flagged} flagged")
    dependencies.emit("\n".join(lines), keyvalues)
    return 1 if failed else 0


def _ranges(args) -> tuple[range, range]:
    return dependencies.parse_range(args.m), dependencies.parse_range(args.n)


def _run_table(args) -> int:
    try:
        m_range, n_range = _ranges(args)
    except ValueError as e:
        return dependencies.fail(e, status=2)
    return show_table(m_range, n_range)


def _run_conjecture(args) -> int:
    try:
        m_range, n_range = _ranges(args)
    except ValueError as e:
        return dependencies.fail(e, status=2)
    return check_conjecture(m_range, n_range)


def register(subparsers):
    table = subparsers.add_parser("table", help="Reproduce the table of U(m,n)")
    table.add_argument("--m", default="3-8", help="column range, e.g. 3-8")
    table.add_argument("--n", default="3-13", help="row range, e.g. 3-13")
    table.set_defaults(handler=_run_table)

    conj = subparsers.add_parser("conjecture", help="Check U(m,n) = m+n for m, n >= 4")
    conj.add_argument("--m", default="4-8")
    conj.add_argument("--n", default="4-13")
    conj.set_defaults(handler=_run_conjecture)
