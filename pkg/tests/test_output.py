import math

import pytest

from kfwave.measure import discrete_measure, partition
from kfwave.output import (
    read_csv,
    write_csv,
    write_json,
    write_measure_csv,
    write_partition_csv,
)


class TestCsvWriter:
    def test_floats_round_trip_losslessly(self, tmp_path):
        values = [0.1, 1 / 3, math.pi, 1e-17, 123456.789]
        path = write_csv(tmp_path / "vals.csv", [("v", values)], ["meta"])
        _, cols, meta = read_csv(path)
        assert [float(s) for s in cols["v"]] == values
        assert meta == ["meta"]

    def test_unequal_columns_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "x.csv", [("a", [1]), ("b", [1, 2])], [])

    def test_rewrite_is_byte_identical(self, tmp_path):
        cols = [("a", [1, 2]), ("b", [0.5, 2 / 3])]
        p1 = write_csv(tmp_path / "one.csv", cols, ["m"])
        first = p1.read_bytes()
        p1 = write_csv(tmp_path / "one.csv", cols, ["m"])
        assert p1.read_bytes() == first


class TestWordDumps:
    def test_partition_dump_schema(self, cantor, tmp_path):
        part = partition(cantor, 3)
        path = write_partition_csv(part, tmp_path / "part.csv")
        header, cols, _ = read_csv(path)
        assert header == ["word", "lo", "hi", "mass"]
        assert cols["word"][0] == "111"
        assert math.fsum(float(m) for m in cols["mass"]) == pytest.approx(1.0)

    def test_measure_dump_matches_atoms(self, cantor, tmp_path):
        dm = discrete_measure(cantor, 3)
        path = write_measure_csv(dm, tmp_path / "atoms.csv")
        _, cols, _ = read_csv(path)
        assert [float(v) for v in cols["lo"]] == list(dm.positions)
        assert [float(v) for v in cols["mass"]] == list(dm.masses)

    def test_json_writer_sorted_and_stable(self, tmp_path):
        payload = {"b": 1, "a": [1.5, 2.5]}
        p = write_json(tmp_path / "r.json", payload)
        text = p.read_text()
        assert text.index('"a"') < text.index('"b"')
        write_json(tmp_path / "r.json", payload)
        assert p.read_text() == text
