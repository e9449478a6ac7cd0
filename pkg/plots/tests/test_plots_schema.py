"""Schema validation tests: a conforming file parses; every mutation is
rejected with the offending column named."""

import pytest

from regret_plots import EXPECTED_HEADER, SchemaError, read_results

HEADER = ",".join(EXPECTED_HEADER)

GOOD_ROWS = [
    "bobw,2,100,0,50,12.5,0,3,40",
    "bobw,2,100,0,100,20,1,3,90",
    "bobw,2,100,1,50,10,0,2,38",
    "bobw,2,100,1,100,18.25,0,2,85",
]


def write(tmp_path, lines, name="results.csv"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


class TestValidFiles:
    def test_round_trip(self, tmp_path):
        table = read_results(write(tmp_path, [HEADER] + GOOD_ROWS))
        assert table.algos == ["bobw"]
        assert table.checkpoints("bobw") == [50, 100]
        assert list(table.regrets_at("bobw", 50)) == [12.5, 10.0]

    def test_header_only(self, tmp_path):
        table = read_results(write(tmp_path, [HEADER]))
        assert table.rows == [] and table.algos == []

    def test_two_algorithms(self, tmp_path):
        rows = GOOD_ROWS + ["ucb_delayed,2,100,0,50,30,0,0,0",
                            "ucb_delayed,2,100,0,100,55,0,0,0"]
        table = read_results(write(tmp_path, [HEADER] + rows))
        assert table.algos == ["bobw", "ucb_delayed"]


class TestRejection:
    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            read_results(tmp_path / "absent.csv")

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SchemaError, match="missing header"):
            read_results(path)

    def test_renamed_header_column_is_named(self, tmp_path):
        bad = HEADER.replace("regret", "reward")
        with pytest.raises(SchemaError, match="'reward' \\(expected 'regret'\\)"):
            read_results(write(tmp_path, [bad] + GOOD_ROWS))

    def test_dropped_header_column_is_named(self, tmp_path):
        bad = HEADER.replace(",cum_outstanding", "")
        with pytest.raises(SchemaError, match="cum_outstanding"):
            read_results(write(tmp_path, [bad]))

    def test_extra_header_column_is_named(self, tmp_path):
        with pytest.raises(SchemaError, match="'note' \\(unexpected extra\\)"):
            read_results(write(tmp_path, [HEADER + ",note"]))

    @pytest.mark.parametrize(
        "row, column",
        [
            (",2,100,0,50,12.5,0,3,40", "algo"),
            ("bobw,1,100,0,50,12.5,0,3,40", "K"),
            ("bobw,x,100,0,50,12.5,0,3,40", "K"),
            ("bobw,2,0,0,50,12.5,0,3,40", "T"),
            ("bobw,2,100,-1,50,12.5,0,3,40", "seed"),
            ("bobw,2,100,0,0,12.5,0,3,40", "checkpoint"),
            ("bobw,2,100,0,200,12.5,0,3,40", "checkpoint"),
            ("bobw,2,100,0,50,oops,0,3,40", "regret"),
            ("bobw,2,100,0,50,inf,0,3,40", "regret"),
            ("bobw,2,100,0,50,12.5,-1,3,40", "skips"),
            ("bobw,2,100,0,50,12.5,0,-3,40", "sigma_hat_max"),
            ("bobw,2,100,0,50,12.5,0,3,1.5", "cum_outstanding"),
        ],
    )
    def test_bad_cell_names_column(self, tmp_path, row, column):
        with pytest.raises(SchemaError, match=f"column '{column}'"):
            read_results(write(tmp_path, [HEADER, row]))

    def test_wrong_field_count(self, tmp_path):
        with pytest.raises(SchemaError, match="8 fields"):
            read_results(write(tmp_path, [HEADER, "bobw,2,100,0,50,12.5,0,3"]))
