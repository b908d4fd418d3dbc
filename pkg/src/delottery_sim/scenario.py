"""Declarative scenario files: a flat, line-oriented key = value format.

The grammar is deliberately tiny so golden files diff cleanly and the
parser has no ambiguity to resolve:

    # comments run from '#' to end of line; blank lines are skipped
    name = honest-small          # global keys first
    rounds = 20
    [player]                     # each [player] section adds one player
    seed_material = alice
    shares = 1
    [attacker]                   # at most one attacker section
    kind = node
    mining_share = 3/10

Global keys: name, rounds, base_seed, rng_mode, and the lottery config
knobs (share_price, security_factor, cert_cap, bet_duration,
buffer_duration, guess_space_size, winning_draws, pool_mode,
pow_difficulty_bits, cert_eviction). Player keys: seed_material,
balance, shares, guess_strategy (uniform | fixed), guesses (comma list,
fixed strategy only), reveals (yes | no). Attacker keys depend on kind:
node takes seed_material, balance, mining_share, shares, guesses,
subset_rule, futility_cap, reveals; sybil takes seed_material,
fake_count, budget, certifier_policy (honest-refuse | rubberstamp).

Every parse or validation failure names the offending line or field.
"""

import os
from dataclasses import dataclass, field
from fractions import Fraction

from .adversary import CERT_HONEST_REFUSE, CERT_RUBBERSTAMP, MODE_NAIVE, RNG_MODES
from .errors import ConfigError, ScenarioError
from .lottery import LotteryConfig

STRATEGY_UNIFORM = "uniform"
STRATEGY_FIXED = "fixed"

_GLOBAL_KEYS = frozenset(
    (
        "name",
        "rounds",
        "base_seed",
        "rng_mode",
        "share_price",
        "security_factor",
        "cert_cap",
        "bet_duration",
        "buffer_duration",
        "guess_space_size",
        "winning_draws",
        "pool_mode",
        "pow_difficulty_bits",
        "cert_eviction",
    )
)
_PLAYER_KEYS = frozenset(
    ("seed_material", "balance", "shares", "guess_strategy", "guesses", "reveals")
)
_ATTACKER_KEYS = frozenset(
    (
        "kind",
        "seed_material",
        "balance",
        "mining_share",
        "shares",
        "guesses",
        "subset_rule",
        "futility_cap",
        "reveals",
        "fake_count",
        "budget",
        "certifier_policy",
    )
)

DEFAULT_BALANCE = 100_000_000


@dataclass
class PlayerSpec:
    seed_material: str
    balance: int = DEFAULT_BALANCE
    shares: int = 1
    guess_strategy: str = STRATEGY_UNIFORM
    guesses: list = field(default_factory=list)
    reveals: bool = True


@dataclass
class NodeAttackerSpec:
    seed_material: str = "attacker"
    balance: int = DEFAULT_BALANCE
    mining_share: Fraction = Fraction(3, 10)
    shares: int = 1
    guesses: list = field(default_factory=list)  # empty: uniform per round
    subset_rule: bool = False
    futility_cap: int = 16
    reveals: bool = True
    kind: str = "node"


@dataclass
class SybilAttackerSpec:
    seed_material: str = "sybil-controller"
    fake_count: int = 10
    budget: int = 1_000_000
    certifier_policy: str = CERT_HONEST_REFUSE
    kind: str = "sybil"


@dataclass
class Scenario:
    name: str
    config: LotteryConfig
    players: list
    attacker: object = None
    rng_mode: str = "commit-reveal"
    rounds: int = 1
    base_seed: int = 0


def _parse_int(raw: str, line_no: int, key: str) -> int:
    try:
        return int(raw, 0)
    except ValueError:
        raise ScenarioError(f"line {line_no}: {key} expects an integer, got {raw!r}") from None


def _parse_fraction(raw: str, line_no: int, key: str) -> Fraction:
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"line {line_no}: {key} expects a rational, got {raw!r}") from None


def _parse_bool(raw: str, line_no: int, key: str) -> bool:
    low = raw.lower()
    if low in ("yes", "true", "1"):
        return True
    if low in ("no", "false", "0"):
        return False
    raise ScenarioError(f"line {line_no}: {key} expects yes or no, got {raw!r}")


def _parse_int_list(raw: str, line_no: int, key: str) -> list:
    if not raw.strip():
        return []
    return [_parse_int(part.strip(), line_no, key) for part in raw.split(",")]


def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    """Parse scenario text; raises ScenarioError with a line number."""
    top: dict = {}
    players: list[dict] = []
    attacker: dict | None = None
    section: dict | None = None
    section_kind = "global"
    for line_no, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.split("#", 1)[0].strip()  # comments run to end of line
        if not line:
            continue
        if line == "[player]":
            section = {}
            section_kind = "player"
            players.append(section)
            continue
        if line == "[attacker]":
            if attacker is not None:
                raise ScenarioError(f"line {line_no}: only one [attacker] section allowed")
            section = {}
            section_kind = "attacker"
            attacker = section
            continue
        if line.startswith("["):
            raise ScenarioError(f"line {line_no}: unknown section {line}")
        if "=" not in line:
            raise ScenarioError(f"line {line_no}: expected key = value, got {raw_line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        allowed = {
            "global": _GLOBAL_KEYS,
            "player": _PLAYER_KEYS,
            "attacker": _ATTACKER_KEYS,
        }[section_kind]
        if key not in allowed:
            raise ScenarioError(f"line {line_no}: unknown {section_kind} key {key!r}")
        target = top if section_kind == "global" else section
        if key in target:
            raise ScenarioError(f"line {line_no}: duplicate key {key!r}")
        target[key] = (value, line_no)
    return _build_scenario(top, players, attacker, default_name)


def _take(section: dict, key: str, parse, default):
    if key not in section:
        return default
    value, line_no = section.pop(key)
    return parse(value, line_no, key)


def _str_value(raw: str, line_no: int, key: str) -> str:
    if not raw:
        raise ScenarioError(f"line {line_no}: {key} must not be empty")
    return raw


def _build_scenario(top, players, attacker, default_name) -> Scenario:
    name = _take(top, "name", _str_value, default_name)
    rounds = _take(top, "rounds", _parse_int, 1)
    base_seed = _take(top, "base_seed", _parse_int, 0)
    rng_mode = _take(top, "rng_mode", _str_value, "commit-reveal")
    if rng_mode not in RNG_MODES:
        raise ScenarioError(f"rng_mode must be one of {', '.join(RNG_MODES)}, got {rng_mode!r}")
    if rounds < 1:
        raise ScenarioError("rounds must be >= 1")
    config = LotteryConfig()
    config.share_price = _take(top, "share_price", _parse_int, config.share_price)
    config.security_factor = _take(
        top, "security_factor", _parse_fraction, config.security_factor
    )
    config.cert_cap = _take(top, "cert_cap", _parse_int, config.cert_cap)
    config.bet_duration = _take(top, "bet_duration", _parse_int, config.bet_duration)
    config.buffer_duration = _take(
        top, "buffer_duration", _parse_int, config.buffer_duration
    )
    config.guess_space_size = _take(
        top, "guess_space_size", _parse_int, config.guess_space_size
    )
    config.winning_draws = _take(top, "winning_draws", _parse_int, config.winning_draws)
    config.pool_mode = _take(top, "pool_mode", _str_value, config.pool_mode)
    bits = _take(top, "pow_difficulty_bits", _parse_int, 256)
    if not 1 <= bits <= 256:
        raise ScenarioError("pow_difficulty_bits must be in [1, 256]")
    config.pow_difficulty = 1 << bits
    config.cert_eviction = _take(top, "cert_eviction", _str_value, config.cert_eviction)
    try:
        config.validate()
    except ConfigError as exc:
        raise ScenarioError(str(exc)) from None

    if not players:
        raise ScenarioError("scenario needs at least one [player] section")
    player_specs = [_build_player(section, i) for i, section in enumerate(players)]

    attacker_spec = None
    if attacker is not None:
        attacker_spec = _build_attacker(attacker)

    scenario = Scenario(
        name, config, player_specs, attacker_spec, rng_mode, rounds, base_seed
    )
    _validate_scenario(scenario)
    return scenario


def _build_player(section: dict, index: int) -> PlayerSpec:
    spec = PlayerSpec(
        seed_material=_take(section, "seed_material", _str_value, f"player-{index}"),
        balance=_take(section, "balance", _parse_int, DEFAULT_BALANCE),
        shares=_take(section, "shares", _parse_int, 1),
        guess_strategy=_take(section, "guess_strategy", _str_value, STRATEGY_UNIFORM),
        guesses=_take(section, "guesses", _parse_int_list, []),
        reveals=_take(section, "reveals", _parse_bool, True),
    )
    _reject_leftovers(section)
    return spec


def _build_attacker(section: dict):
    kind = _take(section, "kind", _str_value, "node")
    if kind == "node":
        spec = NodeAttackerSpec(
            seed_material=_take(section, "seed_material", _str_value, "attacker"),
            balance=_take(section, "balance", _parse_int, DEFAULT_BALANCE),
            mining_share=_take(section, "mining_share", _parse_fraction, Fraction(3, 10)),
            shares=_take(section, "shares", _parse_int, 1),
            guesses=_take(section, "guesses", _parse_int_list, []),
            subset_rule=_take(section, "subset_rule", _parse_bool, False),
            futility_cap=_take(section, "futility_cap", _parse_int, 16),
            reveals=_take(section, "reveals", _parse_bool, True),
        )
    elif kind == "sybil":
        spec = SybilAttackerSpec(
            seed_material=_take(section, "seed_material", _str_value, "sybil-controller"),
            fake_count=_take(section, "fake_count", _parse_int, 10),
            budget=_take(section, "budget", _parse_int, 1_000_000),
            certifier_policy=_take(
                section, "certifier_policy", _str_value, CERT_HONEST_REFUSE
            ),
        )
    else:
        raise ScenarioError(f"attacker kind must be node or sybil, got {kind!r}")
    _reject_leftovers(section)
    return spec


def _reject_leftovers(section: dict) -> None:
    for key, (_, line_no) in section.items():
        raise ScenarioError(f"line {line_no}: key {key!r} not valid for this section kind")


def _validate_scenario(sc: Scenario) -> None:
    cfg = sc.config
    names = [p.seed_material for p in sc.players]
    if sc.attacker is not None:
        names.append(sc.attacker.seed_material)
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise ScenarioError(f"seed_material values must be distinct: {sorted(dupes)}")

    def check_bets(label: str, strategy: str, guesses: list, shares: int) -> None:
        if strategy not in (STRATEGY_UNIFORM, STRATEGY_FIXED):
            raise ScenarioError(f"{label}: guess_strategy must be uniform or fixed")
        if strategy == STRATEGY_FIXED:
            if not guesses:
                raise ScenarioError(f"{label}: fixed strategy needs a guesses list")
            if len(guesses) != shares:
                raise ScenarioError(
                    f"{label}: fixed strategy lists {len(guesses)} guesses for {shares} shares"
                )
        elif guesses:
            raise ScenarioError(f"{label}: guesses list requires guess_strategy = fixed")
        for g in guesses:
            if not 0 <= g < cfg.guess_space_size:
                raise ScenarioError(
                    f"{label}: guess {g} outside [0, {cfg.guess_space_size})"
                )
        if shares < 0:
            raise ScenarioError(f"{label}: shares must be >= 0")

    for p in sc.players:
        check_bets(p.seed_material, p.guess_strategy, p.guesses, p.shares)
        if p.balance < 0:
            raise ScenarioError(f"{p.seed_material}: balance must be >= 0")
    atk = sc.attacker
    if isinstance(atk, NodeAttackerSpec):
        strategy = STRATEGY_FIXED if atk.guesses else STRATEGY_UNIFORM
        check_bets(atk.seed_material, strategy, atk.guesses, atk.shares)
        if not 0 <= atk.mining_share <= 1:
            raise ScenarioError("mining_share must lie in [0, 1]")
        if atk.futility_cap < 0:
            raise ScenarioError("futility_cap must be >= 0")
        if sc.rng_mode == MODE_NAIVE and atk.shares == 0 and atk.mining_share == 1:
            raise ScenarioError(
                "naive mode with mining_share 1 and no attacker shares never terminates"
            )
    elif isinstance(atk, SybilAttackerSpec):
        if atk.fake_count < 0 or atk.budget < 0:
            raise ScenarioError("fake_count and budget must be >= 0")
        if atk.certifier_policy not in (CERT_HONEST_REFUSE, CERT_RUBBERSTAMP):
            raise ScenarioError(
                f"certifier_policy must be {CERT_HONEST_REFUSE} or {CERT_RUBBERSTAMP}"
            )


def load_scenario(path) -> Scenario:
    """Read and parse a scenario file; the default name is the file stem."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    stem = os.path.splitext(os.path.basename(str(path)))[0]
    return parse_scenario(text, default_name=stem)
