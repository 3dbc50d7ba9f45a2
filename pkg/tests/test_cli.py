"""CLI subcommands, exit codes, and output round trips."""

from __future__ import annotations

import json

import pytest

from isrm.cli import run
from isrm.trace import serialize_trace

from conftest import ev, t100_events


@pytest.fixture
def t100_trace_file(tmp_path):
    path = tmp_path / "t100.jsonl"
    path.write_text(serialize_trace(t100_events()), encoding="utf-8")
    return path


def write_config(tmp_path, requirements=(), **extra):
    config = {
        "span": {"start": 0, "end": 100, "label": "T100"},
        "classes": [{"id": 0, "severity_cutoff": "moderate"}],
        "requirements": list(requirements),
    }
    config.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


def lambda0_requirement(threshold):
    return {
        "id": "R-lambda0",
        "metric": "failure_intensity[0]",
        "direction": "at_most",
        "threshold": threshold,
    }


def test_validate_ok(tmp_path, t100_trace_file, capsys):
    config = write_config(tmp_path)
    code = run(["validate", "--config", str(config), "--trace", str(t100_trace_file)])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] is True
    assert len(out["intervals"]) == 9


def test_validate_table_format(tmp_path, t100_trace_file, capsys):
    config = write_config(tmp_path)
    code = run(
        ["validate", "--config", str(config), "--trace", str(t100_trace_file), "--format", "table"]
    )
    assert code == 0
    assert "RUNNING" in capsys.readouterr().out


def test_assess_met_exit_zero(tmp_path, t100_trace_file, capsys):
    config = write_config(tmp_path, [lambda0_requirement(0.05)])
    code = run(["assess", "--config", str(config), "--trace", str(t100_trace_file)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "met"
    assert payload["report"]["reliability"]["0"]["failure_intensity"] == 0.02
    assert payload["assessments"][0]["verdict"] == "met"


def test_assess_violated_exit_one(tmp_path, t100_trace_file, capsys):
    config = write_config(tmp_path, [lambda0_requirement(1e-4)])
    code = run(["assess", "--config", str(config), "--trace", str(t100_trace_file)])
    assert code == 1
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "violated"


def test_invalid_trace_exit_two(tmp_path, capsys):
    # SS while RUNNING is structurally fine but illegal in the transition table
    lines = serialize_trace([ev(0, "ISS"), ev(1, "RST")])
    lines += '{"t":5.0,"kind":"SS","support_tag":{"schedule":"planned","purpose":"adaptive"}}\n'
    trace_path = tmp_path / "bad.jsonl"
    trace_path.write_text(lines, encoding="utf-8")
    config = write_config(tmp_path)
    code = run(["validate", "--config", str(config), "--trace", str(trace_path)])
    assert code == 2
    assert "illegal" in capsys.readouterr().err.lower()


def test_config_error_exit_three(tmp_path, t100_trace_file, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"classes": [{"id": -1}]}', encoding="utf-8")
    code = run(["measure", "--config", str(bad), "--trace", str(t100_trace_file)])
    assert code == 3
    assert "config error" in capsys.readouterr().err


def test_missing_span_is_config_error(t100_trace_file, capsys):
    code = run(["measure", "--trace", str(t100_trace_file)])
    assert code == 3
    assert "span" in capsys.readouterr().err


def test_span_override_flags(t100_trace_file, capsys):
    code = run(
        [
            "measure",
            "--trace",
            str(t100_trace_file),
            "--span-start",
            "0",
            "--span-end",
            "100",
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["span"]["duration_hours"] == 100.0
    # universal class is synthesized even without a config
    assert report["reliability"]["0"]["count"] == 2


def test_measure_output_is_byte_stable(tmp_path, t100_trace_file):
    config = write_config(tmp_path)
    out_a = tmp_path / "a.json"
    out_b = tmp_path / "b.json"
    assert run(["measure", "--config", str(config), "--trace", str(t100_trace_file), "--out", str(out_a)]) == 0
    assert run(["measure", "--config", str(config), "--trace", str(t100_trace_file), "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_strict_parse_flag(tmp_path):
    trace_path = tmp_path / "extra.jsonl"
    trace_path.write_text('{"t":0,"kind":"ISS","extra_field":1}\n', encoding="utf-8")
    config = write_config(tmp_path)
    code = run(["validate", "--config", str(config), "--trace", str(trace_path), "--strict"])
    assert code == 2
    lax = write_config(tmp_path, options={"strict_parse": False})
    code = run(["validate", "--config", str(lax), "--trace", str(trace_path)])
    assert code == 0


def test_simulate_then_validate(tmp_path, capsys):
    sim_config = tmp_path / "sim.json"
    sim_config.write_text(
        json.dumps(
            {
                "span_hours": 200.0,
                "class_rates": {"0": 0.05},
                "fraction_terminal": 0.3,
                "seed": 17,
            }
        ),
        encoding="utf-8",
    )
    trace_path = tmp_path / "sim.jsonl"
    truth_path = tmp_path / "truth.json"
    code = run(
        [
            "simulate",
            "--config",
            str(sim_config),
            "--out",
            str(trace_path),
            "--ground-truth",
            str(truth_path),
        ]
    )
    assert code == 0
    truth = json.loads(truth_path.read_text())
    assert truth["seed"] == 17

    code = run(
        ["validate", "--trace", str(trace_path), "--span-start", "0", "--span-end", "200"]
    )
    assert code == 0


def test_simulate_invalid_config_exit_three(tmp_path, capsys):
    sim_config = tmp_path / "sim.json"
    sim_config.write_text('{"span_hours": -1}', encoding="utf-8")
    assert run(["simulate", "--config", str(sim_config)]) == 3


def test_report_round_trip(tmp_path, t100_trace_file, capsys):
    config = write_config(tmp_path, [lambda0_requirement(0.05)])
    report_path = tmp_path / "assessed.json"
    assert (
        run(
            [
                "assess",
                "--config",
                str(config),
                "--trace",
                str(t100_trace_file),
                "--out",
                str(report_path),
            ]
        )
        == 0
    )
    csv_path = tmp_path / "metrics.csv"
    figures_dir = tmp_path / "figs"
    code = run(
        [
            "report",
            str(report_path),
            "--csv",
            str(csv_path),
            "--figures",
            str(figures_dir),
        ]
    )
    assert code == 0
    table = capsys.readouterr().out
    assert "Requirement assessment" in table
    assert "MET" in table
    assert csv_path.exists()
    assert (figures_dir / "failure_timeline.png").exists()
    assert (figures_dir / "availability.png").exists()


def test_assess_echoes_traceability_requirements(tmp_path, t100_trace_file, capsys):
    config = write_config(
        tmp_path,
        [
            {
                "id": "C-12",
                "kind": "capability",
                "text": "the service answers health probes",
            },
            lambda0_requirement(0.05) | {"traces_to": ["C-12"]},
        ],
    )
    code = run(["assess", "--config", str(config), "--trace", str(t100_trace_file)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["traceability"][0]["id"] == "C-12"
    assert payload["assessments"][0]["requirement_id"] == "R-lambda0"


def test_report_rejects_non_report(tmp_path):
    not_report = tmp_path / "x.json"
    not_report.write_text('{"hello": 1}', encoding="utf-8")
    assert run(["report", str(not_report)]) == 3


def test_report_json_format_echoes_canonically(tmp_path, t100_trace_file, capsys):
    config = write_config(tmp_path)
    report_path = tmp_path / "measured.json"
    run(["measure", "--config", str(config), "--trace", str(t100_trace_file), "--out", str(report_path)])
    code = run(["report", str(report_path), "--format", "json"])
    assert code == 0
    echoed = capsys.readouterr().out
    assert echoed == report_path.read_text()
