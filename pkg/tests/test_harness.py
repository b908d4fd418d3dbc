import pytest

from delottery_sim import (
    ProtocolError,
    ReportError,
    emit_report,
    load_report,
    parse_scenario,
    report_csv_bytes,
    report_json_bytes,
    run_many,
    run_once,
    verify_report,
)
from delottery_sim.harness import _AGGREGATE_KEYS, _SINGLE_KEYS, SCHEMA

TWO_PLAYERS = parse_scenario(
    """
    name = pair
    rounds = 4
    guess_space_size = 4
    [player]
    seed_material = alice
    [player]
    seed_material = bob
    shares = 2
    """
)

SOLO = parse_scenario(
    """
    name = solo
    rounds = 3
    guess_space_size = 1
    [player]
    seed_material = alice
    """
)


def test_run_once_is_deterministic():
    a = run_once(TWO_PLAYERS, seed=1)
    b = run_once(TWO_PLAYERS, seed=1)
    assert report_json_bytes(a) == report_json_bytes(b)
    c = run_once(TWO_PLAYERS, seed=2)
    assert report_json_bytes(a) != report_json_bytes(c)


def test_elapsed_time_never_serialized():
    rep = run_once(TWO_PLAYERS, seed=1)
    assert rep.elapsed > 0
    assert b"elapsed" not in report_json_bytes(rep)


def test_single_report_key_order_is_fixed():
    rep = run_once(TWO_PLAYERS, seed=1)
    assert tuple(rep.data.keys()) == _SINGLE_KEYS
    assert rep.data["schema"] == SCHEMA
    assert rep.data["kind"] == "single"
    assert verify_report(rep.data) == []


def test_solo_player_wins_every_round_and_keeps_balance():
    rep = run_once(SOLO, seed=5)
    d = rep.data
    assert d["winner_histogram"] == {"alice": 3}
    assert d["winners_per_round"] == [[0], [0], [0]]
    # fee is price // 10^12 == 0 at the default price, and the whole pool
    # (the player's own stake) comes straight back
    assert d["final_balances"]["alice"] == 100_000_000
    assert d["conservation_residual"] == 0
    assert d["chi_square"] is None  # one player: uniformity is meaningless


def test_run_many_single_seed_equals_run_once():
    many = run_many(TWO_PLAYERS, 1)
    one = run_once(TWO_PLAYERS, TWO_PLAYERS.base_seed)
    assert report_json_bytes(many) == report_json_bytes(one)
    with pytest.raises(ProtocolError):
        run_many(TWO_PLAYERS, 0)


def test_run_many_pools_histograms():
    agg = run_many(TWO_PLAYERS, 3)
    d = agg.data
    assert tuple(d.keys()) == _AGGREGATE_KEYS
    assert d["kind"] == "aggregate"
    singles = [run_once(TWO_PLAYERS, TWO_PLAYERS.base_seed + i) for i in range(3)]
    for name in ("alice", "bob"):
        assert d["winner_histogram"][name] == sum(
            s.data["winner_histogram"][name] for s in singles
        )
    assert [e["seed"] for e in d["per_seed"]] == [0, 1, 2]
    assert d["residuals_zero"] is True
    assert d["failing"] is False
    assert verify_report(d) == []


def test_fault_hook_breaks_conservation_and_flags_report():
    def hook(ledger, round_index):
        ledger.fee_sink += 1  # money from nowhere

    rep = run_once(TWO_PLAYERS, seed=1, fault_hook=hook)
    assert rep.data["conservation_residual"] != 0
    assert any("residual" in p for p in verify_report(rep.data))

    agg = run_many(TWO_PLAYERS, 2, fault_hook=hook)
    assert agg.data["failing"] is True
    assert agg.data["residuals_zero"] is False
    assert any("failing" in p for p in verify_report(agg.data))


def test_emit_and_load_round_trip(tmp_path):
    rep = run_once(TWO_PLAYERS, seed=1)
    out = tmp_path / "report.json"
    emit_report(rep, out)
    assert load_report(out) == rep.data
    assert out.read_bytes() == report_json_bytes(rep)
    with pytest.raises(ReportError):
        emit_report(rep, tmp_path / "nope" / "report.json")
    with pytest.raises(ReportError):
        load_report(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{truncated")
    with pytest.raises(ReportError):
        load_report(bad)
    with pytest.raises(ReportError):
        emit_report(rep, out, fmt="yaml")


def test_csv_has_one_row_per_player():
    rep = run_once(TWO_PLAYERS, seed=1)
    lines = report_csv_bytes(rep).decode().strip().split("\n")
    assert lines[0] == "name,address_hex,final_balance,wins"
    assert len(lines) == 3
    assert lines[1].startswith("alice,")
    wins = int(lines[2].rsplit(",", 1)[1])
    assert wins == rep.data["winner_histogram"]["bob"]

    agg = run_many(TWO_PLAYERS, 2)
    lines = report_csv_bytes(agg).decode().strip().split("\n")
    assert lines[0] == "name,address_hex,total_wins"
    assert len(lines) == 3


def test_json_emitter_rejects_unknown_types():
    with pytest.raises(ReportError):
        report_json_bytes({"oops": object()})


def test_verify_report_catches_mangling():
    rep = run_once(TWO_PLAYERS, seed=1)
    good = rep.data

    assert verify_report("not a dict") == ["report root must be an object"]
    assert any("schema" in p for p in verify_report({**good, "schema": "v0"}))
    assert any("kind" in p for p in verify_report({**good, "kind": "other"}))
    truncated = dict(good)
    del truncated["fee_sink"]
    assert any("fee_sink" in p for p in verify_report(truncated))
    assert any(
        "residual" in p
        for p in verify_report({**good, "conservation_residual": 7})
    )
    orphaned = {**good, "identities": {"alice": good["identities"]["alice"]}}
    assert any("identities" in p for p in verify_report(orphaned))


def test_broke_player_is_rejected_but_run_completes():
    sc = parse_scenario(
        """
        name = broke
        rounds = 2
        [player]
        seed_material = alice
        [player]
        seed_material = pauper
        balance = 10
        """
    )
    rep = run_once(sc, seed=3)
    d = rep.data
    assert d["conservation_residual"] == 0
    # the pauper can neither post the deposit nor buy a share
    assert sum("pauper" in r for r in d["rejections"]) == 4
    assert d["winner_histogram"]["pauper"] == 0
    assert d["final_balances"]["pauper"] == 10


def test_no_reveals_aborts_every_round():
    sc = parse_scenario(
        """
        name = silent
        rounds = 2
        [player]
        seed_material = alice
        reveals = no
        [player]
        seed_material = bob
        reveals = no
        """
    )
    rep = run_once(sc, seed=1)
    d = rep.data
    assert d["winners_per_round"] == [None, None]
    assert d["winner_histogram"] == {"alice": 0, "bob": 0}
    assert d["conservation_residual"] == 0
    assert d["chi_square"] is None  # zero total wins: nothing to test
