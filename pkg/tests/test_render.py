"""Tests for snapshot pixmaps."""

import pytest

from halfpack.core.engine import opposite_layout
from halfpack.core.model import Configuration, ItemType, ModelParams
from halfpack.core.render import load_snapshot, parse_snapshot, render_snapshot, save_snapshot
from halfpack.utils.errors import ContractViolation, SnapshotFormatError


def test_render_small_layout():
    config = Configuration.from_layout([(ItemType.ONE, 0), (ItemType.TWO, 1)])
    assert render_snapshot(config, 4) == "122."


def test_render_opposite_start():
    config = opposite_layout(ModelParams.from_p1(4, 0.5))
    assert render_snapshot(config, 6) == "222211"


def test_render_wraps_rows():
    config = opposite_layout(ModelParams.from_p1(4, 0.5))
    assert render_snapshot(config, 4) == "2222\n11.."


def test_render_empty():
    assert render_snapshot(Configuration(), 10) == ""


def test_render_rejects_zero_width():
    with pytest.raises(ContractViolation):
        render_snapshot(Configuration(), 0)


def test_parse_ignores_comments_and_breaks():
    config = parse_snapshot("# time=1.0\n# r=4\n12\n2.\n1\n")
    assert config.layout() == [(0, 1, 0), (1, 2, 1), (2, 1, 4)]


def test_parse_odd_two_run():
    with pytest.raises(SnapshotFormatError):
        parse_snapshot("1222.")


def test_parse_adjacent_two_items():
    config = parse_snapshot("2222")
    assert [start for _, _, start in config.layout()] == [0, 2]


def test_parse_unknown_glyph():
    with pytest.raises(SnapshotFormatError):
        parse_snapshot("12x")


def test_saved_snapshot_reloads(tmp_path, rng, make_random_config):
    for k in range(20):
        config = make_random_config(rng, 90)
        path = save_snapshot(config, tmp_path / f"s{k}.txt", cells_per_row=7, header={"k": k})
        reloaded = load_snapshot(path)
        assert [(t, s) for _, t, s in reloaded.layout()] == [(t, s) for _, t, s in config.layout()]


def test_missing_snapshot_file(tmp_path):
    with pytest.raises(SnapshotFormatError):
        load_snapshot(tmp_path / "nope.txt")
