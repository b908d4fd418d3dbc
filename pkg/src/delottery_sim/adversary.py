"""Executable attacker models: block withholding and identity flooding.

The node attack targets a lottery whose randomness is the hash of the
block carrying the draw event. A transaction node controlling a fraction
q of block proposals previews each candidate block, derives the winning
set it would imply, and publishes only favorable ones; an unfavorable
draw is withheld (the proposer ships its block without the draw event)
and re-mined next tick by a freshly sampled proposer. Under commit-reveal
randomness the same node can still delay inclusion, but the winning set
is fixed by the finalized round output, so withholding buys nothing.

The favorability predicate defaults to intersection (any winning share is
a prize worth publishing): include iff g intersects W. The stricter
subset rule (include only when every attacker guess wins) is available as
a flag; an attacker with no shares withholds everything under either
rule.

The Sybil attack floods admission with fake identities derived from one
controller secret and distinct salts. Each admission attempt pays its
proof of work out of an off-ledger attempt budget, one unit per hash
attempt, so the expected cost per admitted fake scales inversely with the
difficulty target. Certifier behavior is a policy knob: honest certifiers
refuse to vote for unknown identities (nothing gets in at any budget),
rubberstamping certifiers wave everything through until the budget runs
dry.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from . import lottery, randao
from .chain import Ledger, PowProof, create_account, mine_block, preview_block
from .errors import AdmissionRejected, DuplicateAddress, ProtocolError
from .hashing import H, digest_int, le8
from .prng import Stream

MODE_NAIVE = "naive"
MODE_COMMIT_REVEAL = "commit-reveal"
RNG_MODES = (MODE_NAIVE, MODE_COMMIT_REVEAL)

CERT_HONEST_REFUSE = "honest-refuse"
CERT_RUBBERSTAMP = "rubberstamp"

# naive mode retries until a favorable draw lands, which is almost surely
# finite; the cap only guards against misconfigured zero-chance scenarios
NAIVE_RETRY_LIMIT = 100_000


@dataclass
class NodeAttacker:
    """A block-proposing node colluding with one enrolled player."""

    address: bytes
    colluder: bytes
    guesses: list
    mining_share: Fraction
    subset_rule: bool = False
    futility_cap: int = 16  # commit-reveal mode: stop stalling after this many blocks

    def __post_init__(self):
        self.mining_share = Fraction(self.mining_share)
        if not 0 <= self.mining_share <= 1:
            raise ProtocolError("mining_share must lie in [0, 1]")


@dataclass
class SybilAttacker:
    controller: bytes
    fake_count: int
    budget: int
    spawned: list = field(default_factory=list)  # (salt, address) audit trail


@dataclass(slots=True)
class RoundOutcome:
    winners: set
    attacker_won: bool
    withheld: int


def node_attack_filter(
    pow_events: list,
    lottery_event,
    attacker_guesses,
    winners_if_included,
    subset_rule: bool = False,
) -> list:
    """The withholding move: keep the draw event only if it pays.

    Returns pow_events plus the lottery event when the attacker's guesses
    make the would-be winning set favorable, else pow_events unchanged.
    """
    gs = set(attacker_guesses)
    wins = set(winners_if_included)
    favorable = bool(gs) and (gs <= wins if subset_rule else bool(gs & wins))
    if favorable:
        return list(pow_events) + [lottery_event]
    return list(pow_events)


def _proposer_is_attacker(attacker: NodeAttacker, stream: Stream) -> bool:
    q = attacker.mining_share
    return stream.chance(q.numerator, q.denominator)


def run_naive_mode_round(
    state: lottery.LotteryState,
    attacker: NodeAttacker | None,
    honest_miner: bytes,
    stream: Stream,
    sender: bytes,
) -> RoundOutcome:
    """Resolve one naive-randomness draw under possible withholding.

    The winning set derives from the hash of the block that carries the
    draw event. Each tick a proposer is sampled by mining share; the
    attacker previews the candidate block and withholds unfavorable ones
    (publishing an empty block in that slot), so the draw re-mines next
    tick with a fresh hash. Honest proposers include unconditionally, and
    an attacker holding no shares has nothing to gain and lets the draw
    through.
    """
    ledger = state.ledger
    cfg = state.config
    withheld = 0
    filtering = attacker is not None and bool(attacker.guesses)
    while True:
        event = ledger.make_event(
            "draw", sender, {"instance": state.instance_id, "attempt": withheld}
        )
        if filtering and _proposer_is_attacker(attacker, stream):
            miner = attacker.address
            candidate = preview_block(ledger, [event], miner)
            w_if = lottery.derive_winners(
                candidate.hash, cfg.winning_draws, cfg.guess_space_size
            )
            kept = node_attack_filter(
                [], event, attacker.guesses, w_if, attacker.subset_rule
            )
            if not kept:
                mine_block(ledger, miner, [])  # withhold: slot ships empty
                ledger.advance_clock()
                withheld += 1
                if withheld > NAIVE_RETRY_LIMIT:
                    raise ProtocolError("withholding never found a favorable draw")
                continue
        else:
            miner = honest_miner
        block = mine_block(ledger, miner, [event])
        ledger.advance_clock()
        winners = lottery.draw(state, ledger.clock, seed=block.hash)
        won = (
            attacker is not None
            and lottery.winning_share_count(state, attacker.colluder) > 0
        )
        return RoundOutcome(winners, won, withheld)


def run_commit_reveal_mode_round(
    state: lottery.LotteryState,
    attacker: NodeAttacker | None,
    honest_miner: bytes,
    stream: Stream,
    sender: bytes,
) -> RoundOutcome:
    """Resolve one commit-reveal draw; withholding can only stall it.

    The round output is already determined by the reveals, so the
    attacker previews a winning set that no re-mine can change. Stalling
    stops at the futility cap (or the first honest proposer).
    """
    ledger = state.ledger
    cfg = state.config
    output = randao.peek_output(state.round, excluded=frozenset(state.banned))
    fixed_w = (
        lottery.derive_winners(output, cfg.winning_draws, cfg.guess_space_size)
        if output is not None
        else None
    )
    withheld = 0
    filtering = attacker is not None and bool(attacker.guesses) and fixed_w is not None
    while True:
        event = ledger.make_event(
            "draw", sender, {"instance": state.instance_id, "attempt": withheld}
        )
        if (
            filtering
            and withheld < attacker.futility_cap
            and _proposer_is_attacker(attacker, stream)
        ):
            kept = node_attack_filter(
                [], event, attacker.guesses, fixed_w, attacker.subset_rule
            )
            if not kept:
                mine_block(ledger, attacker.address, [])
                ledger.advance_clock()
                withheld += 1
                continue
            miner = attacker.address
        else:
            miner = honest_miner
        mine_block(ledger, miner, [event])
        ledger.advance_clock()
        winners = lottery.draw(state, ledger.clock)
        won = (
            attacker is not None
            and winners is not None
            and lottery.winning_share_count(state, attacker.colluder) > 0
        )
        return RoundOutcome(winners, won, withheld)


def sybil_seed_material(controller_secret: bytes, salt: int) -> bytes:
    return controller_secret + b"/sybil/" + le8(salt)


def sybil_spawn(ledger: Ledger, attacker: SybilAttacker, n: int, start_salt: int = 0) -> list:
    """Derive n fake identities from the controller secret and distinct salts.

    Spawning is deterministic: the same salt always yields the same
    address, and re-spawning an existing salt returns the registered
    account rather than failing.
    """
    if n > attacker.fake_count:
        raise ProtocolError(f"attacker declared only {attacker.fake_count} fakes")
    secret = ledger.account(attacker.controller).secret
    fakes = []
    for salt in range(start_salt, start_salt + n):
        material = sybil_seed_material(secret, salt)
        try:
            acct = create_account(ledger, material, 0)
        except DuplicateAddress:
            acct = ledger.account(H(H(material)))
        fakes.append(acct.address)
        if (salt, acct.address) not in attacker.spawned:
            attacker.spawned.append((salt, acct.address))
    return fakes


def bounded_pow(challenge: bytes, difficulty: int, max_attempts: int) -> tuple:
    """Nonce search that gives up after max_attempts hashes.

    Returns (proof or None, attempts actually burned). Mirrors the
    unbounded solver: nonces from 0, one hash per attempt.
    """
    attempts = 0
    nonce = 0
    while attempts < max_attempts:
        attempts += 1
        if digest_int(H(challenge + le8(nonce))) < difficulty:
            return PowProof(challenge, nonce, difficulty), attempts
        nonce += 1
    return None, attempts


def sybil_admission_trial(
    state: lottery.LotteryState,
    fakes: list,
    certifier_policy: str,
    pow_budget: int,
) -> tuple:
    """Attempt admission for each fake; returns (admitted, spent).

    Every hash attempt costs one budget unit. A fake whose proof of work
    cannot finish inside the remaining budget burns what is left and the
    rest of the list is skipped. Honest certifiers refuse to vote for
    identities they cannot vouch for, so nothing is admitted no matter
    the spend; rubberstamping certifiers approve whatever shows up.
    """
    if certifier_policy not in (CERT_HONEST_REFUSE, CERT_RUBBERSTAMP):
        raise ProtocolError(f"unknown certifier policy {certifier_policy!r}")
    admitted = 0
    spent = 0
    for fake in fakes:
        remaining = pow_budget - spent
        if remaining <= 0:
            break
        challenge = lottery.admission_challenge(state, fake)
        proof, attempts = bounded_pow(challenge, state.config.pow_difficulty, remaining)
        spent += attempts
        if proof is None:
            break
        votes = (
            set(state.active_certifiers)
            if certifier_policy == CERT_RUBBERSTAMP
            else set()
        )
        try:
            lottery.add_player(state, fake, proof, votes, state.ledger.clock)
        except AdmissionRejected:
            continue
        admitted += 1
    return admitted, spent
