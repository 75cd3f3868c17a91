import pandas as pd
import pytest

from src.utils.csv_writer import CSVWriter, emit_csv, load_records_csv, record_columns

from .conftest import make_record

HEADER = (
    "algorithm,trial,snr_db,ssr,rate_user_1,rate_user_2,rate_user_3,"
    "leak_user_1,leak_user_2,leak_user_3,interf_power,wiretap_power,wall_ms"
)


@pytest.fixture
def records():
    # deliberately out of order
    return [
        make_record(algorithm, trial, snr, ssr=(trial + 1) / 3.0 + snr / 7.0)
        for trial in (1, 0)
        for snr in (20.0, 0.0, 10.0)
        for algorithm in ("nn", "conventional")
    ]


class TestCSVWriter:
    def test_line_count_and_header(self, records, tmp_path):
        path = emit_csv(records, tmp_path / "records.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 13
        assert lines[0] == HEADER
        assert record_columns(3) == HEADER.split(",")

    def test_unix_line_endings(self, records, tmp_path):
        raw = emit_csv(records, tmp_path / "records.csv").read_bytes()
        assert b"\r\n" not in raw
        assert raw.endswith(b"\n")

    def test_sorted_by_algorithm_snr_trial(self, records, tmp_path):
        df = pd.read_csv(emit_csv(records, tmp_path / "records.csv"))
        keys = list(zip(df["algorithm"], df["snr_db"], df["trial"]))
        assert keys == sorted(keys)
        assert keys[0] == ("conventional", 0.0, 0)

    def test_values_survive_a_round_trip(self, records, tmp_path):
        df = load_records_csv(emit_csv(records, tmp_path / "records.csv"))
        by_key = {(r.algorithm.value, r.snr_db, r.trial): r for r in records}
        for row in df.itertuples(index=False):
            record = by_key[(row.algorithm, row.snr_db, row.trial)]
            assert row.ssr == pytest.approx(record.ssr, rel=1e-12)
            assert row.interf_power == pytest.approx(record.interference_power, rel=1e-12)
            assert row.rate_user_2 == pytest.approx(record.rates[1], rel=1e-12)

    def test_creates_parent_directory(self, records, tmp_path):
        path = emit_csv(records, tmp_path / "nested" / "out" / "records.csv")
        assert path.is_file()

    def test_empty_records_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            CSVWriter().save_records([], tmp_path / "records.csv")

    def test_user_count_must_agree(self, tmp_path):
        mixed = [make_record("nn", 0, 0.0, users=3), make_record("nn", 1, 0.0, users=2)]
        with pytest.raises(ValueError):
            emit_csv(mixed, tmp_path / "records.csv")


class TestLoadRecords:
    def test_external_curves(self, tmp_path):
        path = tmp_path / "external.csv"
        path.write_text("algorithm,snr_db,ssr\nwslm,0,1.5\nwslm,10,3.0\n", encoding="utf-8")
        df = load_records_csv(path)
        assert list(df["algorithm"]) == ["wslm", "wslm"]

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("algorithm,snr\nnn,0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="snr_db"):
            load_records_csv(path)
