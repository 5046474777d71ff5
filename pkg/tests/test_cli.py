import io
import json
import os

import pandas as pd
import pytest

from src.cli import main, parse_measure
from src.exception import DomainError


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def _table(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text))


def test_partitions(capsys):
    code, out = _run(capsys, "partitions", "--ell", "2")
    assert code == 0
    table = _table(out.out)
    assert list(table.columns) == ["partition", "cycle_count", "genus", "is_noncrossing", "is_double_tree"]
    assert sorted(table["genus"]) == [0, 0, 1]
    crossing = table[table["partition"] == "(1,3)(2,4)"].iloc[0]
    assert crossing["genus"] == 1 and not crossing["is_noncrossing"] and not crossing["is_double_tree"]

    code, out = _run(capsys, "partitions", "--ell", "4", "--genus", "1")
    assert code == 0 and len(_table(out.out)) == 70


def test_partitions_exit_codes(capsys):
    assert _run(capsys, "partitions", "--ell", "0")[0] == 1
    code, out = _run(capsys, "partitions", "--ell", "9")
    assert code == 2
    assert "--max-ell" in out.err


def test_json_format(capsys):
    code, out = _run(capsys, "partitions", "--ell", "1", "--format", "json")
    assert code == 0
    rows = json.loads(out.out)["rows"]
    assert rows == [{"partition": "(1,2)", "cycle_count": 2, "genus": 0,
                     "is_noncrossing": True, "is_double_tree": True}]


def test_moments(capsys):
    code, out = _run(capsys, "moments", "--ell", "1", "2", "--N", "100", "--b", "10")
    assert code == 0
    table = _table(out.out)
    assert table["ell"].tolist() == [1, 2]
    assert table["correction_fraction"].tolist() == ["0", "100/441"]

    _, out = _run(capsys, "moments", "--ell", "1", "--N", "100", "--b", "10", "--mode", "regular")
    assert _table(out.out)["exact_fraction"].tolist() == ["1990/21"]

    _, out = _run(capsys, "moments", "--ell", "1", "--N", "100", "--b", "10", "--sigma2", "1/2")
    assert _table(out.out)["exact"].tolist() == [50.0]


def test_moments_usage_errors(capsys):
    assert _run(capsys, "moments", "--N", "10")[0] == 1
    assert _run(capsys, "moments", "--ell", "1", "--N", "10", "--b", "-1")[0] == 1


def test_limit(capsys):
    _, out = _run(capsys, "limit", "--ell", "2", "--c", "1")
    assert _table(out.out)["value"].tolist() == [0.25]
    _, out = _run(capsys, "limit", "--ell", "1", "--c", "1")
    assert _table(out.out)["value"].tolist() == [0.0]

    code, out = _run(capsys, "limit", "--ell", "4", "--c", "1", "--samples", "20000", "--per-partition")
    assert code == 0
    table = _table(out.out)
    worked = table[table["partition"] == "(1,5)(2,8)(3,7)(4,6)"].iloc[0]
    assert abs(worked["contribution"] - 3.0 / 16.0) < 4 * worked["integral_stderr"] / 16.0 + 1e-3

    _, serial = _run(capsys, "limit", "--ell", "3", "--c", "1", "--samples", "5000", "--threads", "1")
    _, pooled = _run(capsys, "limit", "--ell", "3", "--c", "1", "--samples", "5000", "--threads", "2")
    assert serial.out == pooled.out


def test_convolve(capsys, tmp_path):
    code, out = _run(capsys, "convolve", "semicircle", "atoms:{0: 1}", "--grid-lo", "-1", "--grid-hi", "1",
                     "--grid-n", "5", "--threads", "1", "--out", str(tmp_path))
    assert code == 0
    report = json.loads(out.out)
    assert report["atoms"] == [] and report["max_residual"] < 1e-9
    assert os.path.exists(tmp_path / "density.csv")
    assert os.path.exists(tmp_path / "atoms.json")


def test_typeb(capsys, tmp_path):
    code, out = _run(capsys, "typeb", "semicircle", "--theta", "2", "--grid-n", "61", "--threads", "1",
                     "--out", str(tmp_path))
    assert code == 0
    report = json.loads(out.out)
    assert len(report["nu_atoms"]) == 1
    assert report["nu_atoms"][0][0] == pytest.approx(2.5)

    assert _run(capsys, "typeb", "semicircle", "--out", str(tmp_path))[0] == 1
    assert _run(capsys, "typeb", "semicircle", "--theta", "2", "--base-nu", "rademacher",
                "--out", str(tmp_path))[0] == 1


def test_bad_measure_spec(capsys, tmp_path):
    code, out = _run(capsys, "convolve", "bogus", "semicircle", "--out", str(tmp_path))
    assert code == 1
    assert "bogus" in out.err


def test_parse_measure():
    assert parse_measure("semicircle:2").param("sigma") == 2.0
    assert parse_measure("atoms:-1/0.25,1/0.75").atoms == ((-1.0, 0.25), (1.0, 0.75))
    assert parse_measure("atoms:{0: 0.5, 3: 0.5}").atoms == ((0.0, 0.5), (3.0, 0.5))
    assert parse_measure("wigner-nu:1,1,2,3").atoms == ((-2.0, 0.25), (2.0, 0.25))
    with pytest.raises(DomainError):
        parse_measure("atoms:0-1")
    with pytest.raises(DomainError):
        parse_measure("wigner-nu:3,1,1,2")


def _simulate(capsys, out_dir, *extra):
    return _run(capsys, "simulate", "--N", "30", "--b", "3", "--reps", "4", "--seed", "2", "--threads", "1",
                "--out", str(out_dir), *extra)


def test_simulate_and_qq(capsys, tmp_path):
    code, out = _simulate(capsys, tmp_path / "a")
    assert code == 0
    report = json.loads(out.out)
    assert report["realizations"] == os.path.join(str(tmp_path / "a"), "realizations.csv")
    _simulate(capsys, tmp_path / "b")
    first = (tmp_path / "a" / "realizations.csv").read_bytes()
    assert first == (tmp_path / "b" / "realizations.csv").read_bytes()

    code, out = _run(capsys, "qq", str(tmp_path / "a" / "realizations.csv"),
                     str(tmp_path / "b" / "realizations.csv"))
    assert code == 0
    table = _table(out.out)
    assert len(table) == 4
    assert (table["sample"] == table["baseline"]).all()

    code, _ = _run(capsys, "qq", str(tmp_path / "a" / "realizations.csv"),
                   str(tmp_path / "b" / "realizations.csv"), "--column", "missing")
    assert code == 1


def test_simulate_rejects_subcritical_theta(capsys, tmp_path):
    assert _simulate(capsys, tmp_path, "--theta", "0.5")[0] == 1
