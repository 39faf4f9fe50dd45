"""
Event traces: record every applied event of a run, and replay a trace
against a fresh configuration to certify its first-fit placements.

A trace is a few ``# key=value`` header lines followed by CSV rows
``eventIndex,clock,ARR|DEP,typeOrItemId,placementStart`` (placementStart
empty for departures). Clocks are written with ``repr`` so they read back
bit-exactly.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Union

from halfpack import __version__
from halfpack.core.engine import DeltaRecord, EventKind, InitKind, opposite_layout
from halfpack.core.gap_index import naive_leftmost_fit
from halfpack.core.model import Configuration, ItemType, ModelParams
from halfpack.core.render import load_snapshot
from halfpack.utils.errors import HalfpackError, OutputError, TraceFormatError
from halfpack.utils.log import get_logger
from halfpack.utils.validators import ValidationResult

logger = get_logger(__name__)

TRACE_FORMAT = 1


class TraceWriter:
    """Streams DeltaRecords to a trace file; use as ``on_event`` callback."""

    def __init__(self, path: Union[str, Path], header: Dict[str, object]):
        self.path = Path(path)
        self.count = 0
        self._header = {"format": TRACE_FORMAT, "version": __version__, **header}
        self._file: Optional[TextIO] = None
        self._writer = None

    def __enter__(self) -> "TraceWriter":
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._file = self.path.open("w", encoding="utf-8", newline="")
        except OSError as e:
            raise OutputError(f"Cannot write trace {self.path}", details=str(e)) from e
        for key, value in self._header.items():
            self._file.write(f"# {key}={'' if value is None else value}\n")
        self._writer = csv.writer(self._file, lineterminator="\n")
        return self

    def __exit__(self, *exc):
        if self._file is not None:
            self._file.close()
            self._file = None
        return False

    def __call__(self, delta: DeltaRecord):
        self.write(delta)

    def write(self, delta: DeltaRecord):
        event = delta.event
        if event.kind is EventKind.ARRIVAL:
            row = [delta.index, repr(delta.clock), "ARR", int(event.item_type), delta.placement]
        else:
            row = [delta.index, repr(delta.clock), "DEP", event.item_id, ""]
        self._writer.writerow(row)
        self.count += 1


@dataclass
class Mismatch:
    line: int
    event_index: int
    recorded: int
    recomputed: int


@dataclass
class ReplayReport(ValidationResult):
    """Outcome of replaying a trace; clean means no errors and no mismatches."""
    events: int = 0
    header: Dict[str, str] = field(default_factory=dict)
    mismatches: List[Mismatch] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return self.ok and not self.mismatches


def read_header(path: Union[str, Path]) -> Dict[str, str]:
    header = {}
    with Path(path).open(encoding="utf-8") as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            if key:
                header[key.strip()] = value.strip()
    return header


def initial_configuration(header: Dict[str, str]) -> Configuration:
    """Rebuild the starting configuration a trace header describes."""
    kind = InitKind(header.get("init") or InitKind.EMPTY.value)
    if kind is InitKind.EMPTY:
        return Configuration()
    if kind is InitKind.OPPOSITE:
        try:
            params = ModelParams.from_p1(float(header["r"]), float(header["p1"]))
        except (KeyError, ValueError) as e:
            raise TraceFormatError(
                "Opposite-start trace needs numeric r and p1 header lines", details=str(e)
            ) from e
        return opposite_layout(params)
    if not header.get("snapshot"):
        raise TraceFormatError("Snapshot-start trace names no snapshot file")
    return load_snapshot(header["snapshot"])


def replay_trace(path: Union[str, Path]) -> ReplayReport:
    """
    Re-execute a trace with a plain first-fit scan.

    Every arrival's recorded start is compared with the recomputed one;
    after a mismatch the recorded placement is followed when its cells are
    free, so later records stay comparable. Malformed lines are reported
    with their line number and skipped.
    """
    path = Path(path)
    if not path.is_file():
        raise TraceFormatError(f"Trace file not found: {path}")

    header = read_header(path)
    report = ReplayReport(valid=True, header=header)
    try:
        config = initial_configuration(header)
    except (HalfpackError, ValueError) as e:
        report.valid = False
        report.errors.append(f"Cannot rebuild initial state: {e}")
        return report

    last_index = -1
    last_clock = -math.inf
    with path.open(encoding="utf-8", newline="") as f:
        for line_no, row in enumerate(csv.reader(f), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if row[0].strip() == "eventIndex":
                continue
            try:
                index, clock, kind, ref, placement = _parse_row(row)
            except ValueError as e:
                report.errors.append(f"line {line_no}: {e}")
                continue

            if index <= last_index:
                report.errors.append(f"line {line_no}: event index {index} not increasing")
            if clock < last_clock:
                report.errors.append(f"line {line_no}: clock {clock!r} goes backwards")
            last_index, last_clock = index, clock
            report.events += 1

            if kind == "DEP":
                if ref not in config.items:
                    report.errors.append(f"line {line_no}: departure of unknown item {ref}")
                    continue
                config.remove(ref)
                continue

            item_type = ItemType(ref)
            expected = naive_leftmost_fit(config.kinds(config.rightmost_extent), item_type.size)
            start = expected
            if placement != expected:
                report.mismatches.append(Mismatch(
                    line=line_no, event_index=index, recorded=placement, recomputed=expected,
                ))
                if config.is_free(placement, item_type.size):
                    start = placement
            config.insert(item_type, start)

    report.valid = not report.errors
    logger.debug(
        "replayed %d events from %s: %d mismatches, %d errors",
        report.events, path, len(report.mismatches), len(report.errors),
    )
    return report


def _parse_row(row: List[str]):
    if len(row) != 5:
        raise ValueError(f"expected 5 fields, got {len(row)}")
    index = int(row[0])
    clock = float(row[1])
    kind = row[2].strip()
    if kind not in ("ARR", "DEP"):
        raise ValueError(f"unknown event kind {kind!r}")
    ref = int(row[3])
    if kind == "ARR":
        if ref not in (1, 2):
            raise ValueError(f"unknown item type {ref}")
        placement = int(row[4])
        if placement < 0:
            raise ValueError(f"negative placement {placement}")
        return index, clock, kind, ref, placement
    if row[4].strip():
        raise ValueError("departure rows carry no placement")
    return index, clock, kind, ref, None
