"""The lottery state machine: admission, deposits, betting, draw, settlement.

One lottery event walks seven phases in order:

    Deployed -> Enrolling -> KeyUpload -> Betting -> Buffer -> Drawn -> Settled

Enrollment admits players that pass a proof-of-work and are certified by
every member of the bounded active-certifier set A. During KeyUpload each
player escrows a balance-scaled deposit with a hash commitment to a secret
value. Betting sells shares (guesses over a finite guess space) against a
fixed share price plus a 1e-12 transaction fee routed to the fee sink.
Buffer is the reveal window. The draw folds the revealed values of
non-banned players into a 32-byte seed and derives the winning set W from
it; settlement splits the prize pool over winning shares.

Timing: the key-upload and betting windows are each `bet_duration` ticks
long and the buffer is `buffer_duration` ticks. The underlying randomness
round is opened with its reveal deadline at the end of the buffer, and
reveals are additionally gated to the Buffer phase so nobody can reveal
while bets are still open.

Two prize-pool accountings are supported. "consistent" (default) refunds
honest revealers' deposits at the draw and pays winners from forfeitures
plus stake money; total funds are conserved with no stranded escrow.
"literal" consumes the deposits of non-banned revealers into the pool
(forfeitures included via phi) and leaves stake money frozen in escrow,
which mirrors the source accounting at the cost of stranding funds; the
stranded amount is tracked so audits stay exact.

The deploying host is recorded for audit only: no operation takes a
host-only path, so the host has exactly zero privilege after deployment.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import randao
from .chain import Ledger, PowProof, verify_pow
from .errors import (
    AdmissionRejected,
    ConfigError,
    NoEntropy,
    PhaseError,
    ProtocolError,
)
from .hashing import H, MAX_TARGET, digest_int, le8

PHASES = ("Deployed", "Enrolling", "KeyUpload", "Betting", "Buffer", "Drawn", "Settled")
DEPLOYED, ENROLLING, KEY_UPLOAD, BETTING, BUFFER, DRAWN, SETTLED = PHASES

POOL_CONSISTENT = "consistent"
POOL_LITERAL = "literal"

EVICT_RECENT = "recent"  # replace the most recently joined certifier (as specified)
EVICT_OLDEST = "oldest"  # alternate FIFO rotation

FEE_RATIO_DENOMINATOR = 10**12


@dataclass
class LotteryConfig:
    share_price: int = 1_000_000
    security_factor: Fraction = Fraction(3, 2)
    cert_cap: int = 3
    fee_ratio_denominator: int = FEE_RATIO_DENOMINATOR
    bet_duration: int = 2
    buffer_duration: int = 2
    guess_space_size: int = 10
    winning_draws: int = 1
    pool_mode: str = POOL_CONSISTENT
    pow_difficulty: int = MAX_TARGET
    cert_eviction: str = EVICT_RECENT

    def validate(self) -> None:
        k = Fraction(self.security_factor)
        if not Fraction(1) < k < Fraction(2):
            raise ConfigError(f"security_factor must lie in the open interval (1, 2), got {k}")
        if self.share_price < 0:
            raise ConfigError("share_price must be >= 0")
        if self.cert_cap < 1:
            raise ConfigError("cert_cap must be >= 1")
        if self.fee_ratio_denominator != FEE_RATIO_DENOMINATOR:
            raise ConfigError("fee ratio denominator is fixed at 10^12")
        if self.bet_duration < 1 or self.buffer_duration < 1:
            raise ConfigError("bet_duration and buffer_duration must be >= 1 tick")
        if self.guess_space_size < 1:
            raise ConfigError("guess_space_size must be >= 1")
        if not 1 <= self.winning_draws <= self.guess_space_size:
            raise ConfigError("winning_draws must be in [1, guess_space_size]")
        if self.pool_mode not in (POOL_CONSISTENT, POOL_LITERAL):
            raise ConfigError(f"unknown pool_mode {self.pool_mode!r}")
        if not 0 < self.pow_difficulty <= MAX_TARGET:
            raise ConfigError("pow_difficulty target must be in (0, 2^256]")
        if self.cert_eviction not in (EVICT_RECENT, EVICT_OLDEST):
            raise ConfigError(f"unknown cert_eviction {self.cert_eviction!r}")


@dataclass(slots=True)
class PlayerRecord:
    address: bytes
    guesses: list = field(default_factory=list)
    deposit: int = 0
    auth: bool = False
    joined_at: int = 0
    joined_seq: int = 0
    banned: bool = False
    stake_paid: int = 0
    fees_paid: int = 0
    revealed: bool = False
    deposit_refunded: int = 0
    deposit_forfeited: int = 0
    payout: int = 0


class LotteryState:
    """All mutable state of one lottery event, bound to a ledger."""

    def __init__(self, ledger: Ledger, host: bytes, config: LotteryConfig, now: int):
        self.ledger = ledger
        self.config = config
        self.host = host  # audit only; grants no capability
        self.instance_id = ledger.next_lottery_id()
        self.deployed_at = now
        self.phase = DEPLOYED
        self.phase_history = [DEPLOYED]
        self.players: dict[bytes, PlayerRecord] = {}
        self.active_certifiers: list[bytes] = []
        self.banned: set[bytes] = set()
        self.round: randao.RngRound | None = None
        self.betting_close: int | None = None
        self.winners: set[int] | None = None
        self.no_entropy = False
        self.held_deposits: dict[bytes, int] = {}
        self.pool_at_settle = 0
        self.winning_share_total = 0
        self._join_seq = 0

    @property
    def phi_bucket(self) -> str:
        return f"phi:{self.instance_id}"

    @property
    def stake_bucket(self) -> str:
        return f"stake:{self.instance_id}"

    @property
    def phi(self) -> int:
        return self.ledger.escrow.get(self.phi_bucket, 0)

    @property
    def stake_pool(self) -> int:
        return self.ledger.escrow.get(self.stake_bucket, 0)

    @property
    def stranded(self) -> int:
        """Stake money frozen by literal-mode settlement; zero otherwise."""
        if self.phase == SETTLED and self.config.pool_mode == POOL_LITERAL:
            return self.stake_pool
        return 0

    def eligible(self) -> list[bytes]:
        """P minus B, in join order."""
        return [a for a in self.players if a not in self.banned]

    def _advance(self, to_phase: str) -> None:
        if PHASES.index(to_phase) != PHASES.index(self.phase) + 1:
            raise PhaseError(f"cannot move {self.phase} -> {to_phase}")
        self.phase = to_phase
        self.phase_history.append(to_phase)

    def _require(self, phase: str) -> None:
        if self.phase != phase:
            raise PhaseError(f"operation requires phase {phase}, state is {self.phase}")


def compute_deposit(share_price: int, security_factor, player_balance: int) -> int:
    """Deposit owed by a player: floor(max(s * 10^ln(k), f / k)) atomic units.

    The price term uses 64-bit floats for the transcendental; the balance
    term is exact rational arithmetic, and the floor is applied once to
    whichever term wins. k = 1 is accepted here (the identity case used in
    tests); configs enforce the open interval (1, 2).
    """
    k = Fraction(security_factor)
    if not Fraction(1) <= k < Fraction(2):
        raise ConfigError(f"security factor must lie in [1, 2), got {k}")
    if share_price < 0 or player_balance < 0:
        raise ProtocolError("share price and balance must be >= 0")
    price_term = share_price * 10.0 ** math.log(float(k))
    balance_term = Fraction(player_balance) / k
    if balance_term >= price_term:
        return balance_term.numerator // balance_term.denominator
    return math.floor(price_term)


def deploy(ledger: Ledger, host: bytes, config: LotteryConfig, now: int) -> LotteryState:
    """Start a lottery event; the host becomes an ordinary enrolled player."""
    config.validate()
    if ledger.account(host).is_transaction_node:
        raise ProtocolError("transaction nodes cannot play")
    state = LotteryState(ledger, host, config, now)
    state._advance(ENROLLING)
    state.players[host] = PlayerRecord(
        host, auth=True, joined_at=now, joined_seq=state._join_seq
    )
    state._join_seq += 1
    state.active_certifiers.append(host)
    return state


def admission_challenge(state: LotteryState, candidate: bytes) -> bytes:
    """PoW challenge binding a candidate to this lottery instance."""
    return H(b"join" + le8(state.instance_id) + candidate)


def add_player(
    state: LotteryState,
    candidate: bytes,
    pow_proof: PowProof,
    cert_votes: set,
    now: int,
) -> None:
    """Admit a candidate: valid PoW plus a vote from every active certifier.

    When the certifier set is at capacity, the admitted candidate replaces
    the member with the latest join time (or the earliest, under the
    alternate "oldest" rotation).
    """
    state._require(ENROLLING)
    if state.ledger.account(candidate).is_transaction_node:
        raise ProtocolError("transaction nodes cannot play")
    if candidate in state.players:
        raise AdmissionRejected("candidate already enrolled")
    if (
        pow_proof.challenge != admission_challenge(state, candidate)
        or pow_proof.difficulty != state.config.pow_difficulty
        or not verify_pow(pow_proof)
    ):
        raise AdmissionRejected("proof of work invalid for this candidate")
    voters = list(state.active_certifiers)
    if not set(voters) <= set(cert_votes):
        raise AdmissionRejected("certification incomplete: every active certifier must vote")
    state.ledger.emit(
        "join_request",
        candidate,
        {"instance": state.instance_id, "pow_nonce": pow_proof.nonce},
    )
    for voter in voters:
        state.ledger.emit(
            "certify", voter, {"instance": state.instance_id, "candidate": candidate}
        )
    record = PlayerRecord(
        candidate, auth=True, joined_at=now, joined_seq=state._join_seq
    )
    state._join_seq += 1
    state.players[candidate] = record
    certs = state.active_certifiers
    if len(certs) == state.config.cert_cap:
        key = lambda a: (state.players[a].joined_at, state.players[a].joined_seq)
        evict = (
            max(certs, key=key)
            if state.config.cert_eviction == EVICT_RECENT
            else min(certs, key=key)
        )
        certs[certs.index(evict)] = candidate
    else:
        certs.append(candidate)


def ban_player(state: LotteryState, player: bytes) -> None:
    """Mark an account illegal: out of A, keys unused, guesses score zero."""
    if state.phase in (DRAWN, SETTLED):
        raise PhaseError("cannot ban after the draw")
    record = state.players.get(player)
    if record is None:
        raise ProtocolError("player not enrolled")
    state.banned.add(player)
    record.banned = True
    if player in state.active_certifiers:
        state.active_certifiers.remove(player)


def begin_key_upload(state: LotteryState, now: int) -> None:
    """Open the randomness round; commits close after bet_duration ticks."""
    state._require(ENROLLING)
    state._advance(KEY_UPLOAD)
    cfg = state.config
    # reveal deadline lands at the end of the buffer; lottery-level gating
    # keeps actual reveals inside the Buffer phase
    state.round = randao.open_round(
        state.ledger, now, cfg.bet_duration, cfg.bet_duration + cfg.buffer_duration
    )
    state.betting_close = state.round.commit_deadline + cfg.bet_duration


def upload_key(state: LotteryState, player: bytes, key: int, now: int) -> int:
    """Commit to a secret key and escrow the balance-scaled deposit d_i."""
    state._require(KEY_UPLOAD)
    record = state.players.get(player)
    if record is None or record.banned:
        raise ProtocolError("player not enrolled or banned")
    cfg = state.config
    deposit = compute_deposit(
        cfg.share_price, cfg.security_factor, state.ledger.balance_of(player)
    )
    randao.commit(
        state.ledger, state.round, player, randao.commit_hash_for(key), deposit, now
    )
    record.deposit = deposit
    return deposit


def begin_betting(state: LotteryState, now: int) -> None:
    state._require(KEY_UPLOAD)
    if now <= state.round.commit_deadline:
        raise PhaseError("key-upload window still open")
    state._advance(BETTING)


def buy_shares(state: LotteryState, player: bytes, guesses, now: int) -> None:
    """Buy len(guesses) shares; price plus fee per share, atomically."""
    state._require(BETTING)
    record = state.players.get(player)
    if record is None or record.banned:
        raise ProtocolError("player not enrolled or banned")
    guesses = list(guesses)
    for g in guesses:
        if not 0 <= g < state.config.guess_space_size:
            raise ProtocolError(f"guess {g} outside [0, {state.config.guess_space_size})")
    if now > state.betting_close:
        raise PhaseError(f"betting closed after tick {state.betting_close}")
    m = len(guesses)
    if m == 0:
        return
    price = state.config.share_price
    fee = price // state.config.fee_ratio_denominator
    cost = m * (price + fee)
    if state.ledger.balance_of(player) < cost:
        raise ProtocolError(f"balance below {cost} for {m} shares")
    state.ledger.to_escrow(player, state.stake_bucket, m * price)
    state.ledger.debit(player, m * fee)
    state.ledger.fee_sink += m * fee
    record.guesses.extend(guesses)
    record.stake_paid += m * price
    record.fees_paid += m * fee
    state.ledger.emit(
        "buy_shares",
        player,
        {"instance": state.instance_id, "count": m, "guesses": guesses},
    )


def enter_buffer(state: LotteryState, now: int) -> None:
    """Close betting; the buffer doubles as the reveal window."""
    state._require(BETTING)
    if now <= state.betting_close:
        raise PhaseError(f"betting stays open through tick {state.betting_close}")
    state._advance(BUFFER)


def reveal_key(state: LotteryState, player: bytes, key: int, now: int) -> None:
    state._require(BUFFER)
    record = state.players.get(player)
    if record is None or record.banned:
        raise ProtocolError("player not enrolled or banned")
    randao.reveal(state.ledger, state.round, player, key, now)
    record.revealed = True


def derive_winners(seed: bytes, count: int, space: int) -> set:
    """Map a 32-byte seed to `count` distinct values in [0, space).

    Counter-mode hashing: candidate i is H(seed || le8(i)) taken mod the
    space size, with duplicates rejected until the set is full.
    """
    if not 1 <= count <= space:
        raise ProtocolError("winning draw count must be in [1, space]")
    winners: set[int] = set()
    counter = 0
    while len(winners) < count:
        winners.add(digest_int(H(seed + le8(counter))) % space)
        counter += 1
    return winners


def draw(state: LotteryState, now: int, seed: bytes | None = None) -> set | None:
    """Finalize randomness and fix the winning set W.

    With `seed` given (naive block-hash mode) the commit-reveal round is
    bypassed: any stray deposits are returned and W derives from the seed.
    Otherwise the round is finalized over non-banned committers; banned
    and silent committers forfeit their deposits into phi. A round with no
    valid reveals aborts: the event still passes through Drawn (winners
    absent) so settlement can run the full-refund path.
    """
    state._require(BUFFER)
    if now <= state.round.reveal_deadline:
        raise PhaseError(f"buffer runs until tick {state.round.reveal_deadline}")
    ledger = state.ledger
    if seed is not None:
        if state.round.commitments:
            # entropy unused in this mode; treat every deposit as returnable
            for addr in sorted(state.round.commitments):
                ledger.from_escrow(
                    state.round.bucket, addr, state.round.commitments[addr].deposit
                )
            state.round.state = randao.FINALIZED
        state.winners = derive_winners(
            seed, state.config.winning_draws, state.config.guess_space_size
        )
        state._advance(DRAWN)
        return state.winners
    refund_now = state.config.pool_mode == POOL_CONSISTENT
    try:
        output, refunds, forfeited = randao.finalize(
            ledger,
            state.round,
            now,
            excluded=frozenset(state.banned),
            apply_refunds=refund_now,
        )
    except NoEntropy:
        # the abort already pushed every deposit back; mirror that on records
        for addr, commitment in state.round.commitments.items():
            record = state.players.get(addr)
            if record is not None:
                record.deposit_refunded = commitment.deposit
        state.no_entropy = True
        state.winners = None
        state._advance(DRAWN)
        return None
    for addr, commitment in state.round.commitments.items():
        record = state.players.get(addr)
        if record is None:
            continue
        if addr in refunds:
            if refund_now:
                record.deposit_refunded = refunds[addr]
        else:
            record.deposit_forfeited = commitment.deposit
    if forfeited:
        ledger.escrow_move(state.round.bucket, state.phi_bucket, forfeited)
    if not refund_now:
        state.held_deposits = dict(refunds)
    state.winners = derive_winners(
        output, state.config.winning_draws, state.config.guess_space_size
    )
    state._advance(DRAWN)
    return state.winners


def compute_prize_pool(state: LotteryState) -> int:
    """Pool r: phi plus held deposits (literal) or phi plus stakes (consistent)."""
    if state.phase not in (DRAWN, SETTLED):
        raise PhaseError("prize pool is defined once the draw has happened")
    if state.config.pool_mode == POOL_LITERAL:
        return state.phi + sum(
            d for a, d in state.held_deposits.items() if a not in state.banned
        )
    return state.phi + state.stake_pool


def winning_share_count(state: LotteryState, player: bytes) -> int:
    record = state.players[player]
    if record.banned or state.winners is None:
        return 0
    return sum(1 for g in record.guesses if g in state.winners)


def settle(state: LotteryState) -> dict:
    """Distribute the pool over winning shares; returns address -> payout.

    With no winning shares the pool's phi portion rolls to the fee sink and
    stakes are refunded (consistent mode) or left frozen (literal mode).
    An aborted draw refunds deposits and stakes in full in either mode.
    Integer division remainders always route to the fee sink, so the payout
    identity sum(payouts) + remainder == pool is exact.
    """
    state._require(DRAWN)
    ledger = state.ledger
    if state.no_entropy:
        # full-refund path: deposits came back at the abort, stakes here
        for addr, record in state.players.items():
            if record.stake_paid:
                ledger.from_escrow(state.stake_bucket, addr, record.stake_paid)
        state._advance(SETTLED)
        return {}
    pool = compute_prize_pool(state)
    state.pool_at_settle = pool
    counts = {a: winning_share_count(state, a) for a in state.eligible()}
    total_winning = sum(counts.values())
    state.winning_share_total = total_winning
    payouts: dict[bytes, int] = {}
    literal = state.config.pool_mode == POOL_LITERAL
    if total_winning > 0:
        pool_bucket = f"pool:{state.instance_id}"
        if state.phi:
            ledger.escrow_move(state.phi_bucket, pool_bucket, state.phi)
        if literal:
            held = sum(d for a, d in state.held_deposits.items() if a not in state.banned)
            if held:
                ledger.escrow_move(state.round.bucket, pool_bucket, held)
        else:
            if state.stake_pool:
                ledger.escrow_move(state.stake_bucket, pool_bucket, state.stake_pool)
        paid = 0
        for addr in state.players:
            shares = counts.get(addr, 0)
            if shares:
                amount = shares * pool // total_winning
                ledger.from_escrow(pool_bucket, addr, amount)
                state.players[addr].payout = amount
                payouts[addr] = amount
                paid += amount
        if pool - paid:
            ledger.escrow_to_sink(pool_bucket, pool - paid)
    else:
        if state.phi:
            ledger.escrow_to_sink(state.phi_bucket, state.phi)
        if literal:
            held = sum(d for a, d in state.held_deposits.items() if a not in state.banned)
            if held:
                ledger.escrow_move(state.round.bucket, f"pool:{state.instance_id}", held)
                ledger.escrow_to_sink(f"pool:{state.instance_id}", held)
        else:
            for addr, record in state.players.items():
                if record.stake_paid:
                    ledger.from_escrow(state.stake_bucket, addr, record.stake_paid)
    if literal:
        # deposits of banned revealers never became refundable; capture them
        leftover = ledger.escrow.get(state.round.bucket, 0) if state.round else 0
        if leftover:
            ledger.escrow_to_sink(state.round.bucket, leftover)
    state._advance(SETTLED)
    return payouts


def settlement_report(state: LotteryState) -> str:
    """Newline-delimited: address_hex,shares,winning_shares,payout,deposit_refunded,final_balance."""
    lines = []
    for addr in sorted(state.players):
        r = state.players[addr]
        lines.append(
            f"{addr.hex()},{len(r.guesses)},{winning_share_count(state, addr)},"
            f"{r.payout},{r.deposit_refunded},{state.ledger.balance_of(addr)}"
        )
    return "\n".join(lines) + "\n" if lines else ""
