"""Text pixmaps of a configuration: '1' and '2' for item cells, '.' for empty."""

from pathlib import Path
from typing import Dict, Optional, Union

from halfpack.core.model import Configuration, ItemType
from halfpack.utils.errors import ContractViolation, SnapshotFormatError
from halfpack.utils.log import get_logger

logger = get_logger(__name__)

_GLYPHS = {0: ".", 1: "1", 2: "2"}


def render_snapshot(config: Configuration, cells_per_row: int) -> str:
    """
    Render cells 0 .. rightmost extent as rows of ``cells_per_row`` glyphs.

    The last row is padded with '.' to full width; nothing past the row
    holding the rightmost occupied cell is emitted, so an empty
    configuration renders as the empty string.
    """
    if cells_per_row < 1:
        raise ContractViolation(f"cells_per_row must be >= 1, got {cells_per_row}")

    extent = config.rightmost_extent
    if extent == 0:
        return ""
    rows = -(-extent // cells_per_row)
    kinds = config.kinds(rows * cells_per_row).tolist()
    line = "".join(_GLYPHS[k] for k in kinds)
    return "\n".join(
        line[row * cells_per_row:(row + 1) * cells_per_row] for row in range(rows)
    )


def parse_snapshot(text: str, source: str = "<snapshot>") -> Configuration:
    """
    Rebuild a configuration from a pixmap.

    Lines starting with '#' are comments; line breaks are ignored. Each run
    of '2' glyphs is read as consecutive 2-items, so it must have even length.

    Raises:
        SnapshotFormatError: On an unknown glyph or an odd run of '2' cells
    """
    cells = []
    for line_no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        for glyph in stripped:
            if glyph not in "12.":
                raise SnapshotFormatError(
                    f"Unknown glyph {glyph!r} in {source} line {line_no}",
                    suggestion="Use '1', '2' and '.' only.",
                )
            cells.append(glyph)

    layout = []
    cell = 0
    while cell < len(cells):
        glyph = cells[cell]
        if glyph == "1":
            layout.append((ItemType.ONE, cell))
            cell += 1
        elif glyph == "2":
            if cell + 1 >= len(cells) or cells[cell + 1] != "2":
                raise SnapshotFormatError(
                    f"Unpaired 2-item cell at index {cell} in {source}",
                    details="Runs of '2' must have even length.",
                )
            layout.append((ItemType.TWO, cell))
            cell += 2
        else:
            cell += 1
    return Configuration.from_layout(layout)


def load_snapshot(path: Union[str, Path]) -> Configuration:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SnapshotFormatError(f"Cannot read snapshot {path}", details=str(e))
    config = parse_snapshot(text, source=str(path))
    logger.debug("loaded %d items from %s", len(config), path)
    return config


def save_snapshot(
    config: Configuration,
    path: Union[str, Path],
    cells_per_row: int = 100,
    header: Optional[Dict[str, object]] = None,
) -> Path:
    """Write a pixmap with optional '# key=value' header lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {key}={value}" for key, value in (header or {}).items()]
    body = render_snapshot(config, cells_per_row)
    if body:
        lines.append(body)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
