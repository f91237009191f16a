#!/usr/bin/env python3
"""
测试命令行: 规范 JSON、子命令串联与退出码
"""

import json
import math

import pytest

from funcspace import Additive, Const, ExpChar, GFunction
from group_core import lattice
from main import EXIT_FAILED, EXIT_INPUT, EXIT_OK, canonical_json, main, parse_seeds

Z = lattice(1)


def write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def fixture(f, g, h):
    return {"group": Z.to_json(), "functions": {"f": f.to_json(), "g": g.to_json(), "h": h.to_json()}}


def test_canonical_json():
    text = canonical_json({"b": 1.0, "a": [float("inf"), 0.1], "c": {"z": None, "y": True}})
    assert text == '{"a":[null,0.10000000000000001],"b":1,"c":{"y":true,"z":null}}'
    assert canonical_json({"x": 2, "y": [1, 2]}) == canonical_json({"y": [1, 2], "x": 2})


def test_parse_seeds():
    assert parse_seeds("1..4") == [1, 2, 3, 4]
    assert parse_seeds("5,7") == [5, 7]


def test_construct_then_deviation(tmp_path, capsys):
    """情形 8 的零槽构造在扫描下 ψ = 0"""
    params = write(tmp_path / "params.json", {
        "beta": 0.0,
        "a": Additive((1.0,)).to_json(),
        "m": Const(1.0).to_json(),
    })
    out = tmp_path / "triple.json"
    assert main(["construct", "--case", "8", "--params", params, "--out", str(out)]) == EXIT_OK
    constructed = json.loads(out.read_text(encoding="utf-8"))
    assert constructed["meta"]["case_id"] == 8
    capsys.readouterr()

    assert main(["deviation", "--funcs", str(out), "--schedule", "8,16,32"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["sup"] == 0
    assert report["radius"] == 32


def test_deviation_output_is_deterministic(tmp_path, capsys):
    x = GFunction(Z, Additive((1.0,)))
    path = write(tmp_path / "f.json", fixture(x, x, GFunction(Z, Const(0.5))))
    main(["deviation", "--funcs", path, "--schedule", "4,8,16"])
    first = capsys.readouterr().out
    main(["deviation", "--funcs", path, "--schedule", "4,8,16"])
    assert capsys.readouterr().out == first


def test_classify_two_to_the_x(tmp_path, capsys):
    M = GFunction(Z, ExpChar((math.log(2),)))
    path = write(tmp_path / "exp.json", fixture(M, GFunction(Z, Const(1.0)), M - 1.0))
    assert main(["classify", "--funcs", path]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"]["case"] == 7


def test_classify_unbounded_exits_1(tmp_path, capsys):
    x = GFunction(Z, Additive((1.0,)))
    path = write(tmp_path / "bad.json", fixture(x, x, x))
    assert main(["classify", "--funcs", path, "--schedule", "16,32,64"]) == EXIT_FAILED
    report = json.loads(capsys.readouterr().out)
    assert "unclassified" in report["verdict"]


def test_hyers_command(tmp_path, capsys):
    path = write(tmp_path / "line.json", {"function": Additive((2.0,)).to_json()})
    assert main(["hyers", "--func", path]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["coeffs"][0][0] == pytest.approx(2.0)


def test_verify_command(tmp_path, capsys):
    x = GFunction(Z, Additive((1.0,)))
    triple = write(tmp_path / "t.json", fixture(x * x * 0.5, GFunction(Z, Const(1.0)), x))
    params = write(tmp_path / "p.json", {"a": Additive((1.0,)).to_json(), "m": Const(1.0).to_json()})
    assert main(["verify", "--case", "8", "--params", params, "--funcs", triple, "--schedule", "8,16,32"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["cases"] == [8]


def test_input_errors_exit_2(tmp_path, capsys):
    bad = write(tmp_path / "bad.json", {"functions": {"f": {"op": "spline"}, "g": {"op": "zero"},
                                                      "h": {"op": "zero"}}})
    assert main(["deviation", "--funcs", bad]) == EXIT_INPUT
    assert "MalformedInput" in capsys.readouterr().err

    assert main(["deviation", "--funcs", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert main(["deviation", "--funcs", bad, "--schedule", "16,x"]) == EXIT_INPUT
    assert main(["oracle", "finite", "--group", "Q8"]) == EXIT_INPUT
    assert main(["frobnicate"]) == EXIT_INPUT


def test_oracle_finite(capsys):
    assert main(["oracle", "finite", "--group", "S3", "--trials", "3", "--seed", "1"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and report["group"] == "S3"


def test_oracle_roundtrip_writes_jsonl(capsys):
    assert main(["oracle", "roundtrip", "--case", "1", "--seeds", "1,2"]) == EXIT_OK
    captured = capsys.readouterr()
    lines = captured.out.strip().splitlines()
    assert [json.loads(line)["seed"] for line in lines] == [1, 2]
    assert '"ok":true' in captured.err
