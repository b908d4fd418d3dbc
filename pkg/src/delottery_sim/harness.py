"""Scenario runner: seeded end-to-end simulations and report emission.

run_once drives `rounds` consecutive lottery events on a single ledger,
walking every phase on a fixed tick schedule. All strategy randomness
(uniform guesses, secret keys, proposer sampling) comes from counter-mode
streams keyed by (seed, round index, purpose tag), so a (scenario, seed)
pair fully determines every byte of the resulting report. Per-player
protocol rejections (say, a balance too small for the deposit) are
recorded in the report and never abort the run.

run_many executes seeds base_seed .. base_seed+n-1 and folds them into
an aggregate in seed order. Seeds are share-nothing and could fan out to
workers; the fold itself stays sequential and deterministic.

Reports serialize through a purpose-built emitter: floats are printed
with 17 significant digits and dict order is fixed at construction, so
re-emitting a report is byte-identical and golden files diff cleanly.
Wall-clock time is tracked on the RunReport object but deliberately kept
out of the serialized form, which would otherwise never be reproducible.
"""

import json
import time
from dataclasses import dataclass

from . import stats
from .adversary import (
    MODE_COMMIT_REVEAL,
    MODE_NAIVE,
    NodeAttacker,
    SybilAttacker,
    run_commit_reveal_mode_round,
    run_naive_mode_round,
    sybil_admission_trial,
    sybil_spawn,
)
from .chain import Ledger, create_account, mine_block, solve_pow
from .errors import ProtocolError, ReportError
from .lottery import (
    LotteryState,
    add_player,
    admission_challenge,
    begin_betting,
    begin_key_upload,
    buy_shares,
    deploy,
    enter_buffer,
    reveal_key,
    settle,
    upload_key,
    winning_share_count,
)
from .prng import Stream
from .scenario import (
    NodeAttackerSpec,
    PlayerSpec,
    STRATEGY_FIXED,
    STRATEGY_UNIFORM,
    Scenario,
    SybilAttackerSpec,
)

SCHEMA = "delottery-sim/report/v1"

# transaction-node accounts use an unprintable prefix that scenario
# seed_material strings cannot collide with
_MINER_MATERIAL = b"\x00/txnode/honest"
_ATTACKER_NODE_PREFIX = b"\x00/txnode/"


@dataclass
class RunReport:
    data: dict
    elapsed: float  # wall seconds; intentionally absent from the serialized form


@dataclass(slots=True)
class _Entry:
    name: str
    address: bytes
    spec: PlayerSpec
    is_colluder: bool = False


def _tick(ledger: Ledger, miner: bytes) -> None:
    """Mine whatever is pending (if anything) and advance one tick."""
    if ledger.pending:
        events = list(ledger.pending)
        ledger.pending.clear()
        mine_block(ledger, miner, events)
    ledger.advance_clock()


def _sample_guesses(entry: _Entry, seed: int, round_index: int, space: int) -> list:
    spec = entry.spec
    if spec.guess_strategy == STRATEGY_FIXED:
        return list(spec.guesses)
    stream = Stream(seed, round_index, b"guess/" + entry.name.encode())
    return [stream.below(space) for _ in range(spec.shares)]


def _player_key(entry: _Entry, seed: int, round_index: int) -> int:
    return Stream(seed, round_index, b"key/" + entry.name.encode()).next_i64()


def run_once(sc: Scenario, seed: int, fault_hook=None) -> RunReport:
    """Execute one seeded run of the scenario; deterministic per (sc, seed)."""
    t0 = time.perf_counter()
    cfg = sc.config
    ledger = Ledger()
    miner = create_account(ledger, _MINER_MATERIAL, 0, is_transaction_node=True).address

    player_specs = list(sc.players)
    colluder_name = None
    node_attacker = None
    sybil_attacker = None
    sybil_spec = None
    if isinstance(sc.attacker, NodeAttackerSpec):
        a = sc.attacker
        strategy = STRATEGY_FIXED if a.guesses else STRATEGY_UNIFORM
        player_specs.append(
            PlayerSpec(a.seed_material, a.balance, a.shares, strategy, list(a.guesses), a.reveals)
        )
        colluder_name = a.seed_material

    roster = []
    for spec in player_specs:
        acct = create_account(ledger, spec.seed_material.encode(), spec.balance)
        roster.append(
            _Entry(spec.seed_material, acct.address, spec, spec.seed_material == colluder_name)
        )

    if isinstance(sc.attacker, NodeAttackerSpec):
        a = sc.attacker
        node_acct = create_account(
            ledger, _ATTACKER_NODE_PREFIX + a.seed_material.encode(), 0,
            is_transaction_node=True,
        )
        colluder_addr = next(e.address for e in roster if e.is_colluder)
        node_attacker = NodeAttacker(
            node_acct.address, colluder_addr, [], a.mining_share,
            subset_rule=a.subset_rule, futility_cap=a.futility_cap,
        )
    elif isinstance(sc.attacker, SybilAttackerSpec):
        sybil_spec = sc.attacker
        controller = create_account(ledger, sybil_spec.seed_material.encode(), 0)
        sybil_attacker = SybilAttacker(
            controller.address, sybil_spec.fake_count, sybil_spec.budget
        )

    histogram = {e.name: 0 for e in roster}
    winners_per_round: list = []
    rejections: list[str] = []
    attacker_wins = 0
    withhold_count = 0
    sybil_admitted = 0
    sybil_spend = 0
    admitted_identities: dict[str, str] = {}

    for r in range(sc.rounds):
        state = deploy(ledger, roster[0].address, cfg, ledger.clock)
        for entry in roster[1:]:
            proof = solve_pow(admission_challenge(state, entry.address), cfg.pow_difficulty)
            add_player(state, entry.address, proof, set(state.active_certifiers), ledger.clock)
        if sybil_attacker is not None:
            fakes = sybil_spawn(
                ledger, sybil_attacker, sybil_spec.fake_count,
                start_salt=r * sybil_spec.fake_count,
            )
            admitted, spent = sybil_admission_trial(
                state, fakes, sybil_spec.certifier_policy, sybil_spec.budget
            )
            sybil_admitted += admitted
            sybil_spend += spent
            for fake in fakes:
                if fake in state.players:
                    admitted_identities[fake.hex()] = sybil_attacker.controller.hex()
        _tick(ledger, miner)

        begin_key_upload(state, ledger.clock)
        keys: dict[bytes, int] = {}
        if sc.rng_mode == MODE_COMMIT_REVEAL:
            for entry in roster:
                key = _player_key(entry, seed, r)
                try:
                    upload_key(state, entry.address, key, ledger.clock)
                    keys[entry.address] = key
                except ProtocolError as exc:
                    rejections.append(f"round {r}: upload {entry.name}: {exc}")
        while ledger.clock <= state.round.commit_deadline:
            _tick(ledger, miner)

        begin_betting(state, ledger.clock)
        for entry in roster:
            guesses = _sample_guesses(entry, seed, r, cfg.guess_space_size)
            try:
                buy_shares(state, entry.address, guesses, ledger.clock)
            except ProtocolError as exc:
                guesses = []
                rejections.append(f"round {r}: bet {entry.name}: {exc}")
            if entry.is_colluder:
                node_attacker.guesses = guesses
        while ledger.clock <= state.betting_close:
            _tick(ledger, miner)

        enter_buffer(state, ledger.clock)
        if sc.rng_mode == MODE_COMMIT_REVEAL:
            for entry in roster:
                if entry.spec.reveals and entry.address in keys:
                    try:
                        reveal_key(state, entry.address, keys[entry.address], ledger.clock)
                    except ProtocolError as exc:
                        rejections.append(f"round {r}: reveal {entry.name}: {exc}")
        while ledger.clock <= state.round.reveal_deadline:
            _tick(ledger, miner)

        proposer_stream = Stream(seed, r, b"proposer")
        sender = roster[0].address
        if sc.rng_mode == MODE_NAIVE:
            outcome = run_naive_mode_round(
                state, node_attacker, miner, proposer_stream, sender
            )
        else:
            outcome = run_commit_reveal_mode_round(
                state, node_attacker, miner, proposer_stream, sender
            )
        settle(state)
        winners_per_round.append(
            sorted(outcome.winners) if outcome.winners is not None else None
        )
        for entry in roster:
            if winning_share_count(state, entry.address) > 0:
                histogram[entry.name] += 1
        if node_attacker is not None:
            attacker_wins += 1 if outcome.attacker_won else 0
            withhold_count += outcome.withheld
        if fault_hook is not None:
            fault_hook(ledger, r)
        _tick(ledger, miner)

    residual = ledger.conservation_residual()
    chi = None
    if len(roster) >= 2 and sum(histogram.values()) > 0:
        statistic, passed, df = stats.chi_square_uniform(list(histogram.values()))
        chi = {"statistic": statistic, "df": df, "pass": passed}

    attack = None
    if node_attacker is not None:
        attack = {
            "mode": sc.rng_mode,
            "mining_share": float(node_attacker.mining_share),
            "attacker_wins": attacker_wins,
            "total_rounds": sc.rounds,
            "withhold_count": withhold_count,
        }
    sybil = None
    if sybil_attacker is not None:
        sybil = {
            "sybil_admitted": sybil_admitted,
            "sybil_spend": sybil_spend,
            "certifier_policy": sybil_spec.certifier_policy,
            "controller": sybil_attacker.controller.hex(),
            "admitted_identities": admitted_identities,
        }

    data = {
        "schema": SCHEMA,
        "kind": "single",
        "scenario": sc.name,
        "seed": seed,
        "rounds": sc.rounds,
        "rng_mode": sc.rng_mode,
        "pool_mode": cfg.pool_mode,
        "players": [e.name for e in roster],
        "identities": {e.name: e.address.hex() for e in roster},
        "winner_histogram": dict(histogram),
        "final_balances": {e.name: ledger.balance_of(e.address) for e in roster},
        "winners_per_round": winners_per_round,
        "conservation_residual": residual,
        "fee_sink": ledger.fee_sink,
        "stranded_escrow": sum(ledger.escrow.values()),
        "chain_height": ledger.chain[-1].height,
        "chi_square": chi,
        "attack": attack,
        "sybil": sybil,
        "rejections": rejections,
    }
    return RunReport(data, time.perf_counter() - t0)


def run_many(sc: Scenario, n_seeds: int, fault_hook=None) -> RunReport:
    """Run seeds base_seed..base_seed+n-1 and fold; n=1 returns the single report."""
    if n_seeds < 1:
        raise ProtocolError("n_seeds must be >= 1")
    t0 = time.perf_counter()
    reports = [run_once(sc, sc.base_seed + i, fault_hook) for i in range(n_seeds)]
    if n_seeds == 1:
        return reports[0]

    histogram = {name: 0 for name in reports[0].data["players"]}
    per_seed = []
    chi_pass_count = 0
    chi_seen = False
    attacker_wins = 0
    total_rounds = 0
    withhold_count = 0
    sybil_admitted = 0
    sybil_spend = 0
    admitted_identities: dict[str, str] = {}
    residuals_zero = True
    for rep in reports:
        d = rep.data
        for name, wins in d["winner_histogram"].items():
            histogram[name] += wins
        if d["conservation_residual"] != 0:
            residuals_zero = False
        chi = d["chi_square"]
        if chi is not None:
            chi_seen = True
            chi_pass_count += 1 if chi["pass"] else 0
        entry = {
            "seed": d["seed"],
            "conservation_residual": d["conservation_residual"],
            "chi_square_statistic": None if chi is None else chi["statistic"],
            "chi_square_pass": None if chi is None else chi["pass"],
            "fee_sink": d["fee_sink"],
        }
        if d["attack"] is not None:
            attacker_wins += d["attack"]["attacker_wins"]
            total_rounds += d["attack"]["total_rounds"]
            withhold_count += d["attack"]["withhold_count"]
            entry["attacker_wins"] = d["attack"]["attacker_wins"]
            entry["withhold_count"] = d["attack"]["withhold_count"]
        if d["sybil"] is not None:
            sybil_admitted += d["sybil"]["sybil_admitted"]
            sybil_spend += d["sybil"]["sybil_spend"]
            admitted_identities.update(d["sybil"]["admitted_identities"])
            entry["sybil_admitted"] = d["sybil"]["sybil_admitted"]
            entry["sybil_spend"] = d["sybil"]["sybil_spend"]
        per_seed.append(entry)

    first = reports[0].data
    attack = None
    if first["attack"] is not None:
        rate = attacker_wins / total_rounds
        attack = {
            "mode": first["attack"]["mode"],
            "mining_share": first["attack"]["mining_share"],
            "attacker_wins": attacker_wins,
            "total_rounds": total_rounds,
            "withhold_count": withhold_count,
            "rate": rate,
            "standard_error": stats.binomial_sigma(rate, total_rounds),
        }
    sybil = None
    if first["sybil"] is not None:
        sybil = {
            "sybil_admitted": sybil_admitted,
            "sybil_spend": sybil_spend,
            "certifier_policy": first["sybil"]["certifier_policy"],
            "controller": first["sybil"]["controller"],
            "admitted_identities": admitted_identities,
        }
    data = {
        "schema": SCHEMA,
        "kind": "aggregate",
        "scenario": sc.name,
        "n_seeds": n_seeds,
        "base_seed": sc.base_seed,
        "rounds_per_seed": sc.rounds,
        "rng_mode": sc.rng_mode,
        "pool_mode": sc.config.pool_mode,
        "players": list(first["players"]),
        "identities": dict(first["identities"]),
        "winner_histogram": histogram,
        "per_seed": per_seed,
        "residuals_zero": residuals_zero,
        "chi_square_pass_count": chi_pass_count if chi_seen else None,
        "attack": attack,
        "sybil": sybil,
        "failing": not residuals_zero,
    }
    return RunReport(data, time.perf_counter() - t0)


# --- emission ---------------------------------------------------------------

def _format_value(value, pieces: list, indent: int) -> None:
    pad = "  " * indent
    if value is None:
        pieces.append("null")
    elif value is True:
        pieces.append("true")
    elif value is False:
        pieces.append("false")
    elif isinstance(value, float):
        pieces.append(format(value, ".17g"))
    elif isinstance(value, int):
        pieces.append(str(value))
    elif isinstance(value, str):
        pieces.append(json.dumps(value))
    elif isinstance(value, dict):
        if not value:
            pieces.append("{}")
            return
        pieces.append("{\n")
        items = list(value.items())
        for i, (key, val) in enumerate(items):
            pieces.append(f"{pad}  {json.dumps(str(key))}: ")
            _format_value(val, pieces, indent + 1)
            pieces.append(",\n" if i + 1 < len(items) else "\n")
        pieces.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if not value:
            pieces.append("[]")
            return
        pieces.append("[\n")
        seq = list(value)
        for i, val in enumerate(seq):
            pieces.append(pad + "  ")
            _format_value(val, pieces, indent + 1)
            pieces.append(",\n" if i + 1 < len(seq) else "\n")
        pieces.append(pad + "]")
    else:
        raise ReportError(f"cannot serialize {type(value).__name__}")


def report_json_bytes(report) -> bytes:
    """Deterministic JSON: fixed key order, floats at 17 significant digits."""
    data = report.data if isinstance(report, RunReport) else report
    pieces: list[str] = []
    _format_value(data, pieces, 0)
    pieces.append("\n")
    return "".join(pieces).encode("utf-8")


def report_csv_bytes(report) -> bytes:
    """Per-player table: one header plus one row per player."""
    data = report.data if isinstance(report, RunReport) else report
    histogram = data["winner_histogram"]
    identities = data["identities"]
    lines = []
    if data["kind"] == "single":
        lines.append("name,address_hex,final_balance,wins")
        balances = data["final_balances"]
        for name in data["players"]:
            lines.append(f"{name},{identities[name]},{balances[name]},{histogram[name]}")
    else:
        lines.append("name,address_hex,total_wins")
        for name in data["players"]:
            lines.append(f"{name},{identities[name]},{histogram[name]}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def emit_report(report, out_path, fmt: str = "json") -> None:
    if fmt == "json":
        payload = report_json_bytes(report)
    elif fmt == "csv":
        payload = report_csv_bytes(report)
    else:
        raise ReportError(f"unknown report format {fmt!r}")
    try:
        with open(out_path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise ReportError(f"cannot write report {out_path}: {exc}") from None


def load_report(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return json.loads(fh.read().decode("utf-8"))
    except OSError as exc:
        raise ReportError(f"cannot read report {path}: {exc}") from None
    except ValueError as exc:
        raise ReportError(f"report {path} is not valid JSON: {exc}") from None


_SINGLE_KEYS = (
    "schema", "kind", "scenario", "seed", "rounds", "rng_mode", "pool_mode",
    "players", "identities", "winner_histogram", "final_balances",
    "winners_per_round", "conservation_residual", "fee_sink",
    "stranded_escrow", "chain_height", "chi_square", "attack", "sybil",
    "rejections",
)
_AGGREGATE_KEYS = (
    "schema", "kind", "scenario", "n_seeds", "base_seed", "rounds_per_seed",
    "rng_mode", "pool_mode", "players", "identities", "winner_histogram",
    "per_seed", "residuals_zero", "chi_square_pass_count", "attack", "sybil",
    "failing",
)


def verify_report(data: dict) -> list:
    """Re-check schema and conservation; returns a list of failure strings."""
    problems = []
    if not isinstance(data, dict):
        return ["report root must be an object"]
    if data.get("schema") != SCHEMA:
        problems.append(f"schema must be {SCHEMA!r}, got {data.get('schema')!r}")
    kind = data.get("kind")
    if kind == "single":
        expected = _SINGLE_KEYS
    elif kind == "aggregate":
        expected = _AGGREGATE_KEYS
    else:
        return problems + [f"kind must be single or aggregate, got {kind!r}"]
    for key in expected:
        if key not in data:
            problems.append(f"missing key {key!r}")
    if problems:
        return problems
    if kind == "single":
        if data["conservation_residual"] != 0:
            problems.append(
                f"conservation residual is {data['conservation_residual']}, expected 0"
            )
    else:
        if not data["residuals_zero"]:
            problems.append("residuals_zero is false")
        for entry in data["per_seed"]:
            if entry.get("conservation_residual") != 0:
                problems.append(
                    f"seed {entry.get('seed')}: residual {entry.get('conservation_residual')}"
                )
        if data["failing"]:
            problems.append("aggregate is flagged failing")
    names = data["players"]
    for field_name in ("identities", "winner_histogram"):
        missing = [n for n in names if n not in data[field_name]]
        if missing:
            problems.append(f"{field_name} missing players: {missing}")
    return problems
