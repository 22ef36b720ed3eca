import json
import os

import numpy as np
import pytest

from cazacsearch.cli import main
from cazacsearch.correlate import read_grid
from cazacsearch.families import bjorck, zadoff_chu
from cazacsearch.seqcore import key_of, read_sequences, verify_cazac, write_sequences


def _write(path, xs):
    with open(path, "w") as fh:
        write_sequences(fh, xs)
    return str(path)


def _read(path):
    with open(path) as fh:
        return read_sequences(fh)


@pytest.mark.parametrize("argv", [
    ["generate", "zadoff-chu", "7"],
    ["generate", "p4", "8"],
    ["generate", "wiener", "9", "--k", "2"],
    ["generate", "bjorck", "13"],
])
def test_generate_writes_verified_sequence(tmp_path, argv):
    out = tmp_path / "x.txt"
    assert main(argv + ["-o", str(out)]) == 0
    text = out.read_text()
    assert "pass=true" in text
    (x,) = _read(out)
    assert len(x) == int(argv[2])
    assert verify_cazac(x, 1e-12).passed


def test_generate_to_stdout(capsys):
    assert main(["generate", "bjorck", "7"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# family=bjorck n=7")
    assert "pass=true" in out


@pytest.mark.parametrize("argv", [
    ["generate", "zadoff-chu", "8"],
    ["generate", "bjorck", "9"],
    ["generate", "wiener", "9", "--k", "3"],
])
def test_generate_invalid_spec_is_input_error(argv, capsys):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_unwritable_output_is_exit_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["generate", "bjorck", "7", "-o", str(blocker / "x.txt")]) == 3


def test_missing_seed_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["search", "7", "--trials", "10", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_search_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["search", "7", "--trials", "300", "--seed", "1", "--out", str(out)]) == 0
    assert "unique=" in capsys.readouterr().out
    doc = json.loads((out / "report.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["plan"]["n"] == 7 and doc["plan"]["seed"] == 1
    rep = doc["report"]
    assert rep["converged"] + rep["non_converged"] == 300
    assert doc["verdict"]["verdict"] in ("likely-finite", "likely-infinite", "inconclusive")
    sols = _read(out / "solutions.txt")
    assert len(sols) == rep["unique"]
    assert all(verify_cazac(x, 1e-8).passed for x in sols)
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "search" and man["seed"] == 1
    assert set(man["outputs"]) == {str(out / "solutions.txt"), str(out / "report.json")}


def test_search_with_too_few_trials_has_no_verdict(tmp_path):
    out = tmp_path / "run"
    assert main(["search", "5", "--trials", "20", "--seed", "1", "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["verdict"]["verdict"] is None


def test_stats_single_sequence(tmp_path):
    src = _write(tmp_path / "s.txt", [np.array([1, 1, 1, -1], dtype=complex)])
    out = tmp_path / "stats.csv"
    assert main(["stats", src, "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "source,kind,label,n,psl,isl,cazac"
    row = lines[1].split(",")
    assert row[1] == "sequence" and row[3] == "4"
    assert float(row[4]) == 0.25 and float(row[5]) == 0.125
    assert row[6] == "true"
    medians = [l for l in lines if ",summary,median," in l]
    assert len(medians) == 1 and float(medians[0].split(",")[4]) == 0.25


def test_stats_references_for_prime_length(tmp_path):
    src = _write(tmp_path / "s.txt", [bjorck(11)])
    out = tmp_path / "stats.csv"
    assert main(["stats", src, "-o", str(out)]) == 0
    refs = [l.split(",") for l in out.read_text().splitlines() if ",reference," in l]
    assert {r[2] for r in refs} == {"zadoff-chu", "bjorck"}
    assert main(["stats", src, "--no-references", "-o", str(out)]) == 0
    assert ",reference," not in out.read_text()


def test_stats_empty_input_gives_header_only(tmp_path):
    src = tmp_path / "empty.txt"
    src.write_text("# nothing here\n")
    out = tmp_path / "stats.csv"
    assert main(["stats", str(src), "-o", str(out)]) == 0
    assert out.read_text() == "source,kind,label,n,psl,isl,cazac\n"


def test_stats_malformed_input(tmp_path, capsys):
    src = tmp_path / "bad.txt"
    src.write_text("1,0,abc,0\n")
    assert main(["stats", str(src)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_missing_input_file(tmp_path):
    assert main(["stats", str(tmp_path / "nope.txt")]) == 2


def test_ambiguity_periodic_zadoff_chu(tmp_path, capsys):
    src = _write(tmp_path / "zc.txt", [zadoff_chu(43)])
    out = tmp_path / "grid.txt"
    assert main(["ambiguity", src, "--kind", "periodic", "-o", str(out)]) == 0
    assert "max_off_origin" in capsys.readouterr().out
    with open(out) as fh:
        kind, mag = read_grid(fh)
    assert kind == "periodic" and mag.shape == (43, 43)
    assert mag[0, 0] == pytest.approx(1.0)
    # zero everywhere on the delay axis away from the origin
    assert np.max(mag[1:, 0]) < 1e-7


def test_ambiguity_rejects_multiple_sequences(tmp_path):
    src = _write(tmp_path / "two.txt", [zadoff_chu(7), bjorck(7)])
    assert main(["ambiguity", src, "-o", str(tmp_path / "g.txt")]) == 2


def test_orbit_of_bjorck7(tmp_path, capsys):
    src = _write(tmp_path / "b.txt", [bjorck(7)])
    out = tmp_path / "orbit.txt"
    assert main(["orbit", src, "-o", str(out)]) == 0
    count = int(capsys.readouterr().out.strip().split("=")[1])
    members = _read(out)
    assert count == len(members) <= 252
    assert len({key_of(x) for x in members}) == count


def test_orbit_rejects_non_cazac(tmp_path):
    src = _write(tmp_path / "ones.txt", [np.ones(5, dtype=complex)])
    assert main(["orbit", src, "-o", str(tmp_path / "o.txt")]) == 2


def test_filter_is_idempotent(tmp_path, capsys):
    src = _write(tmp_path / "mix.txt", [bjorck(7), zadoff_chu(7)])
    known, new = tmp_path / "known.txt", tmp_path / "new.txt"
    assert main(["filter", src, "--known", str(known), "--new", str(new)]) == 0
    assert "known=2 new=0" in capsys.readouterr().out
    known2, new2 = tmp_path / "known2.txt", tmp_path / "new2.txt"
    assert main(["filter", str(known), "--known", str(known2), "--new", str(new2)]) == 0
    assert [key_of(x) for x in _read(known2)] == [key_of(x) for x in _read(known)]
    assert _read(new2) == []


def test_rerun_is_byte_identical_across_workers(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["search", "6", "--trials", "600", "--seed", "11",
                 "--out", "run", "--workers", "1"]) == 0
    first = {p: open(p, "rb").read() for p in ("run/solutions.txt", "run/report.json")}
    assert main(["rerun", "run/manifest.json", "--workers", "3"]) == 0
    for p, data in first.items():
        assert open(p, "rb").read() == data


def test_rerun_detects_tampering(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["generate", "bjorck", "7", "-o", "b.txt", "--manifest", "m.json"]) == 0
    doc = json.loads(open("m.json").read())
    (path,) = doc["outputs"]
    doc["outputs"][path] = "0" * 64
    with open("m.json", "w") as fh:
        json.dump(doc, fh)
    assert main(["rerun", "m.json"]) == 2


def test_rerun_missing_manifest(tmp_path):
    assert main(["rerun", str(tmp_path / "none.json")]) == 2
