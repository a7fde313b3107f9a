"""Exit codes, JSON shapes, and byte determinism of the command line."""

import json

import pytest

from padyn import acceptance, cli


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_residues_emits_group_table(capsys):
    code, out, err = run_cli(capsys, "residues", "--p", "5", "--n", "2")
    assert code == 0
    payload = json.loads(out)
    assert payload["p"] == 5 and payload["n"] == 2
    assert payload["group"]["order"] == 4
    assert payload["group"]["representatives"] == ["1", "2", "5", "10"]
    assert "order 4" in err


def test_non_prime_is_a_usage_error(capsys):
    code, out, err = run_cli(capsys, "residues", "--p", "4", "--n", "2")
    assert code == 2
    assert out == ""
    assert "not prime" in err


def test_unknown_subcommand_is_a_usage_error(capsys):
    assert cli.run(["frobnicate"]) == 2


def test_unknown_group_tag_is_a_usage_error(capsys):
    code, out, err = run_cli(capsys, "flows", "--group", "nope")
    assert code == 2
    assert "unknown group tag" in err


def test_identical_invocations_are_byte_identical(capsys):
    _, first, _ = run_cli(capsys, "residues", "--p", "7", "--n", "3")
    _, second, _ = run_cli(capsys, "residues", "--p", "7", "--n", "3")
    assert first == second
    _, first, _ = run_cli(capsys, "proj", "collapse")
    _, second, _ = run_cli(capsys, "proj", "collapse")
    assert first == second


def test_flows_reports_two_multiplicative_subflows(capsys):
    code, out, err = run_cli(capsys, "flows", "--group", "gm")
    assert code == 0
    payload = json.loads(out)
    assert len(payload["minimal_subflows"]) == 2
    assert "sizes [4, 4]" in err


def test_borel_flow_group_table(capsys):
    code, out, _ = run_cli(capsys, "borel", "--p", "5", "--n", "3")
    assert code == 0
    payload = json.loads(out)
    assert payload["order"] == 3
    assert payload["idempotent_check"] and payload["iso_to_residue_group"]


def test_iwasawa_default_and_custom_entries(capsys):
    code, out, _ = run_cli(capsys, "iwasawa")
    assert code == 0
    payload = json.loads(out)
    assert payload["exact"] is True
    assert payload["integral_factor"] == [["1", "0"], ["5", "1"]]
    assert payload["triangular_factor"] == [["1/5", "0"], ["0", "5"]]

    code, out, _ = run_cli(capsys, "iwasawa", "--entries", "2 3 1 2")
    assert code == 0
    assert json.loads(out)["exact"] is True


def test_iwasawa_rejects_bad_input(capsys):
    code, _, err = run_cli(capsys, "iwasawa", "--entries", "1 0 0 2")
    assert code == 2
    assert "determinant" in err
    code, _, err = run_cli(capsys, "iwasawa", "--entries", "1 2 3")
    assert code == 2
    assert "four rationals" in err


def test_minimal_flow_report(capsys):
    code, out, _ = run_cli(capsys, "minimal-flow")
    assert code == 0
    payload = json.loads(out)
    assert payload["size"] == 480
    assert payload["strongly_connected"] and payload["idempotent"]


def test_ellis_report(capsys):
    code, out, _ = run_cli(capsys, "ellis")
    assert code == 0
    payload = json.loads(out)
    assert payload["order"] == 4
    assert all(entry["iso_to_flow_group"] for entry in payload["iso_checks"])


def test_proj_report_shapes(capsys):
    code, out, _ = run_cli(capsys, "proj", "collapse")
    assert code == 0
    payload = json.loads(out)
    assert payload["states"] == 150 and payload["collapsed"] is True
    assert payload["collapsed_type"] == "Near(inf, class 1)"

    code, out, _ = run_cli(capsys, "proj", "minimal")
    assert code == 0
    payload = json.loads(out)
    assert sorted(payload) == [
        "boundary_flags",
        "collapsed_type",
        "proximal",
        "states",
        "strongly_connected",
    ]
    assert payload["states"] == 120
    assert payload["strongly_connected"] and payload["proximal"]


def test_verify_single_check_reports_without_timings(capsys, monkeypatch):
    monkeypatch.setenv("PADYN_SEED", "12345")
    code, out, err = run_cli(capsys, "verify", "--check", "affine-flows")
    assert code == 0
    payload = json.loads(out)
    assert payload["seed"] == 12345
    assert payload["config"] == {"p": 5, "n": 2, "m": 1, "w": 2, "ladder_gap": 8}
    assert payload["passed"] is True
    (entry,) = payload["checks"]
    assert entry["check"] == "affine-flows"
    assert "seconds" not in entry and "within_budget" not in entry
    assert "affine-flows: pass" in err


def test_verify_seed_env_must_be_integer(capsys, monkeypatch):
    monkeypatch.setenv("PADYN_SEED", "soon")
    code, _, err = run_cli(capsys, "verify", "--check", "affine-flows")
    assert code == 2
    assert "PADYN_SEED" in err


def test_verify_rejects_unknown_check(capsys):
    assert cli.run(["verify", "--check", "bogus"]) == 2


def test_verify_all_fails_with_exit_one(capsys, monkeypatch):
    def ok(*args, **kwargs):
        return {"passed": True, "seconds": 0.0}

    def bad(*args, **kwargs):
        return {"passed": False, "seconds": 0.0}

    for name in (
        "check_residue_oracle",
        "check_type_roundtrip",
        "check_affine_flows",
        "check_borel_flow_groups",
        "check_iwasawa_and_rewrite",
        "check_ellis_tower",
        "check_projective_collapse",
        "check_projective_minimality",
        "check_ladder_stability",
    ):
        monkeypatch.setattr(acceptance, name, ok)
    monkeypatch.setattr(acceptance, "check_main_flow", bad)
    code, out, err = run_cli(capsys, "verify", "--all")
    assert code == 1
    payload = json.loads(out)
    assert payload["passed"] is False
    flags = {entry["check"]: entry["passed"] for entry in payload["checks"]}
    assert flags["main-flow"] is False
    assert sum(1 for value in flags.values() if value) == 9
    assert "main-flow: FAIL" in err
