import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from alphamatch.cli import main
from alphamatch.core import TimeSeries
from alphamatch.detection import coverage_experiment, gaussian_noise, inject, limit_template, periodic_surrogate
from alphamatch.ingest import read_series, write_series
from alphamatch.matcher import alpha_profile, match_curve
from alphamatch.selection import discriminate, partition, select_template


@pytest.fixture
def noise_csv(tmp_path):
    p = tmp_path / "a.csv"
    write_series(gaussian_noise(200, 1.0, seed=3), p)
    return p


@pytest.fixture(scope="module")
def vowels(tmp_path_factory):
    d = tmp_path_factory.mktemp("vowels")
    paths = []
    for c, name in zip(range(1, 6), "aeiou"):
        p = d / f"{name}.wav"
        write_series(periodic_surrogate(c, 5000, seed=0), p)
        paths.append(p)
    return paths


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_curve_self_match(noise_csv, tmp_path):
    out = tmp_path / "curve.csv"
    argv = ["curve", "--template", str(noise_csv), "--data", str(noise_csv),
            "--min-len", "10", "--max-len", "50", "--output", str(out)]
    assert main(argv) == 0
    rows = read_rows(out)
    assert rows[0] == ["length", "a→a"]
    assert len(rows) - 1 == 41
    assert all(int(count) >= 1 for _, count in rows[1:])
    lib = match_curve(read_series(noise_csv).samples, read_series(noise_csv), 10, 50)
    assert [(int(k), int(c)) for k, c in rows[1:]] == list(lib.points)


def test_curve_json(noise_csv, tmp_path):
    out = tmp_path / "curve.json"
    assert main(["curve", "--template", str(noise_csv), "--data", str(noise_csv),
                 "--min-len", "5", "--max-len", "9", "--step", "2", "--output", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert [k for k, _ in obj[0]["points"]] == [5, 7, 9]


def test_match_matches_library(tmp_path):
    data = np.random.default_rng(0).standard_normal(60)
    data[20:30] = 0.0
    write_series(TimeSeries(data), tmp_path / "d.csv")
    write_series(TimeSeries(data[:5]), tmp_path / "t.csv")
    out = tmp_path / "m.csv"
    assert main(["match", "--template", str(tmp_path / "t.csv"), "--data", str(tmp_path / "d.csv"),
                 "--output", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == ["lag", "alpha_n"]
    expected = alpha_profile(data[:5], data).values
    assert len(rows) - 1 == expected.size
    for (lag, value), want in zip(rows[1:], expected):
        if np.isnan(want):
            assert value == ""
        else:
            assert float(value) == want
    assert rows[22][1] == ""  # window 21..25 is silent


def test_select_matches_library(tmp_path):
    series = periodic_surrogate(3, 2500, seed=2)
    write_series(series, tmp_path / "v.json")
    out, report = tmp_path / "sel.json", tmp_path / "rep.json"
    argv = ["select", "--data", str(tmp_path / "v.json"), "--partitions", "5", "--partition-len", "500",
            "--max-len", "60", "--output", str(out), "--report", str(report)]
    assert main(argv) == 0
    chosen = select_template(series, partition(series, 5, 500), 10, 60)
    rep = json.loads(report.read_text())
    assert rep["partition_index"] == chosen.partition_index
    assert rep["scores"] == list(chosen.scores)
    assert np.array_equal(read_series(out).samples, chosen.samples)


def test_discriminate_surrogates(vowels, tmp_path):
    out, curves = tmp_path / "rep.json", tmp_path / "curves.csv"
    argv = ["discriminate", "--data", *map(str, vowels), "--output", str(out), "--curves", str(curves)]
    assert main(argv) == 0
    report = json.loads(out.read_text())
    assert [c["source"] for c in report["classes"]] == list("aeiou")
    for cls in report["classes"]:
        assert cls["minimal_length"] is not None and cls["minimal_length"] <= 64

    classes = {p.stem: read_series(p) for p in vowels}
    _, lib = discriminate(classes)
    for cls in report["classes"]:
        assert cls["minimal_length"] == lib[cls["source"]].minimal_length
        assert cls["self_curve"]["points"] == [list(p) for p in lib[cls["source"]].self_curve.points]
    rows = read_rows(curves)
    assert len(rows[0]) == 1 + 25
    assert rows[0][1] == "a→a"
    assert [int(r[0]) for r in rows[1:]] == list(range(10, 201))


def test_discriminate_threads_do_not_change_output(vowels, tmp_path):
    outs = []
    for n in ("1", "4"):
        out, curves = tmp_path / f"r{n}.json", tmp_path / f"c{n}.csv"
        assert main(["discriminate", "--threads", n, "--data", *map(str, vowels[:3]),
                     "--max-len", "80", "--output", str(out), "--curves", str(curves)]) == 0
        outs.append((out.read_bytes(), curves.read_bytes()))
    assert outs[0] == outs[1]


def test_synth_noise_and_inject(tmp_path):
    out = tmp_path / "n.csv"
    assert main(["synth", "--length", "100", "--sigma", "2", "--seed", "9", "--output", str(out)]) == 0
    assert read_series(out).samples.tolist() == gaussian_noise(100, 2.0, 9).samples.tolist()

    write_series(TimeSeries([1.0, 2.0, 3.0]), tmp_path / "f.csv")
    out = tmp_path / "inj.json"
    assert main(["synth", "--length", "50", "--seed", "1", "--inject", str(tmp_path / "f.csv"),
                 "--alpha", "0.14", "--offset", "10", "--output", str(out)]) == 0
    expected = inject(gaussian_noise(50, 1.0, 1), [1.0, 2.0, 3.0], 0.14, 10)
    assert read_series(out) == expected


def test_synth_surrogate(tmp_path):
    out = tmp_path / "s.wav"
    assert main(["synth", "--kind", "surrogate", "--class-id", "2", "--length", "300", "--output", str(out)]) == 0
    series = read_series(out)
    assert series.sample_rate == 11250
    ref = periodic_surrogate(2, 300).samples
    assert np.max(np.abs(series.samples - ref)) <= 1 / 32768


def test_synth_bad_class_is_contract_error(tmp_path, capsys):
    assert main(["synth", "--kind", "surrogate", "--class-id", "9", "--length", "10",
                 "--output", str(tmp_path / "x.csv")]) == 1
    assert "class_id" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_detect_limit(tmp_path):
    out = tmp_path / "d.json"
    assert main(["detect-limit", "--trials", "200", "--seed", "4", "--output", str(out)]) == 0
    obj = json.loads(out.read_text())
    lib = coverage_experiment(limit_template(0.045, 64), 0.14, 200, 4)
    assert obj["delta_alpha"] == pytest.approx(0.045, rel=1e-12)
    assert obj["threshold"] == pytest.approx(0.135, abs=1e-9)
    assert obj["trials"] == 200
    assert obj["coverage_1sigma"] == lib.coverage_1sigma
    assert obj["coverage_3sigma"] == lib.coverage_3sigma


def test_default_output_dir_from_env(noise_csv, tmp_path, monkeypatch):
    target = tmp_path / "outdir"
    target.mkdir()
    monkeypatch.setenv("ALPHAMATCH_OUTPUT_DIR", str(target))
    assert main(["synth", "--length", "10"]) == 0
    assert (target / "synth.csv").exists()


def test_unknown_flag_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["curve", "--bogus"])
    assert exc.value.code == 1
    assert "usage:" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["curve", "--template", "x.csv", "--data", "x.csv", "--threshold", "0.3"],
                                  ["synth", "--length", "0"],
                                  []])
def test_bad_option_values_exit_1(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_missing_file_exit_2(tmp_path, capsys):
    assert main(["match", "--template", str(tmp_path / "none.csv"), "--data", str(tmp_path / "none.csv")]) == 2
    assert "I/O error" in capsys.readouterr().err


def test_parse_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1\nfoo\n")
    assert main(["match", "--template", str(bad), "--data", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_precondition_violation_exit_1(noise_csv, tmp_path):
    out = tmp_path / "c.csv"
    # template as long as the data
    assert main(["curve", "--template", str(noise_csv), "--data", str(noise_csv),
                 "--min-len", "10", "--max-len", "200", "--output", str(out)]) == 1
    assert not out.exists()


def test_byte_identical_reruns(noise_csv, tmp_path):
    blobs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        out.mkdir()
        assert main(["synth", "--length", "300", "--seed", "5", "--output", str(out / "s.csv")]) == 0
        assert main(["curve", "--template", str(noise_csv), "--data", str(out / "s.csv"),
                     "--max-len", "40", "--output", str(out / "c.csv")]) == 0
        assert main(["detect-limit", "--trials", "50", "--output", str(out / "d.json")]) == 0
        blobs.append([(out / n).read_bytes() for n in ("s.csv", "c.csv", "d.json")])
    assert blobs[0] == blobs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "alphamatch", "--nope"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "usage" in proc.stderr
    proc = subprocess.run([sys.executable, "-m", "alphamatch", "synth", "--length", "5",
                           "--output", str(tmp_path / "x.json")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
