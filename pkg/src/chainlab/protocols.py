"""Blackboard execution engine and the concrete one-way protocols.

Players send fixed-length messages in ascending order; after player i's
message, instance i's index (and, in the augmented variant, its prefix) is
revealed to the board at no cost. Message functions only ever see a board
snapshot from before their own turn, which enforces one-way causality by
construction.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

from .errors import InvalidParameterError, ProtocolContractError
from .model import BitString, ChainInstance, Transcript


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from labeled parts (hash-based, platform independent)."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class SharedRandomness:
    """Public randomness: every player derives identical values per label."""

    seed: int

    def stream(self, label: str) -> random.Random:
        return random.Random(derive_seed("shared", self.seed, label))

    def bits(self, label: str, count: int) -> BitString:
        rng = self.stream(label)
        return BitString(tuple(rng.randrange(2) for _ in range(count)))

    def permutation(self, label: str, n: int) -> tuple[int, ...]:
        """A permutation of 1..n; entry i-1 is the image of position i."""
        values = list(range(1, n + 1))
        self.stream(label).shuffle(values)
        return tuple(values)

    def positions(self, label: str, count: int, n: int) -> tuple[int, ...]:
        """`count` distinct positions in 1..n, sorted."""
        return tuple(sorted(self.stream(label).sample(range(1, n + 1), count)))

    def coin(self, label: str) -> int:
        return self.stream(label).randrange(2)


@dataclass(frozen=True)
class Board:
    """Immutable blackboard snapshot: messages plus freely revealed items."""

    messages: tuple[tuple[int, BitString], ...] = ()
    revealed: tuple[tuple, ...] = ()

    def message(self, i: int) -> BitString:
        for player, msg in self.messages:
            if player == i:
                return msg
        raise KeyError(f"no message from player {i} on the board")

    def index(self, i: int) -> int:
        for kind, inst, value in self.revealed:
            if kind == "index" and inst == i:
                return value
        raise KeyError(f"index {i} not revealed yet")

    def prefix(self, i: int) -> BitString:
        for kind, inst, value in self.revealed:
            if kind == "prefix" and inst == i:
                return value
        raise KeyError(f"prefix {i} not revealed yet")

    def with_message(self, player: int, msg: BitString) -> "Board":
        return Board(self.messages + ((player, msg),), self.revealed)

    def with_revealed(self, kind: str, inst: int, value) -> "Board":
        return Board(self.messages, self.revealed + ((kind, inst, value),))


@dataclass(frozen=True)
class PlayerView:
    """Private input of one sending player."""

    string: BitString
    prev_index: int | None = None
    prev_prefix: BitString | None = None


@dataclass(frozen=True)
class DecodeView:
    """Private input of the output player."""

    index: int
    prefix: BitString | None = None


MessageFn = Callable[[int, PlayerView, Board, SharedRandomness], BitString]
DecodeFn = Callable[[Board, DecodeView, SharedRandomness], int]


@dataclass(frozen=True)
class ProtocolSpec:
    """A one-way blackboard protocol with declared, input-independent message lengths."""

    name: str
    n: int
    k: int
    message_lengths: tuple[int, ...]
    message_fn: MessageFn
    decode_fn: DecodeFn
    params: Mapping[str, Any] = field(default_factory=dict)
    simulator: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "message_lengths", tuple(self.message_lengths))
        object.__setattr__(self, "params", dict(self.params))
        if len(self.message_lengths) != self.k:
            raise InvalidParameterError("need one declared message length per player")

    @property
    def total_bits(self) -> int:
        return sum(self.message_lengths)


@dataclass(frozen=True)
class RunResult:
    transcript: Transcript
    output: int
    correct: bool
    total_bits: int


def _run(protocol: ProtocolSpec, inst: ChainInstance, shared: SharedRandomness, aug: bool) -> RunResult:
    if protocol.n != inst.n or protocol.k != inst.k:
        raise ProtocolContractError(
            f"protocol declared for (n={protocol.n}, k={protocol.k}) "
            f"got instance (n={inst.n}, k={inst.k})"
        )
    board = Board()
    for i in range(1, inst.k + 1):
        view = PlayerView(
            string=inst.strings[i - 1],
            prev_index=inst.indices[i - 2] if i > 1 else None,
            prev_prefix=inst.prefix_for(i - 1) if (aug and i > 1) else None,
        )
        msg = protocol.message_fn(i, view, board, shared)
        if not isinstance(msg, BitString) or len(msg) != protocol.message_lengths[i - 1]:
            raise ProtocolContractError(
                f"player {i} declared {protocol.message_lengths[i - 1]} bits, "
                f"sent {len(msg) if isinstance(msg, BitString) else msg!r}"
            )
        board = board.with_message(i, msg).with_revealed("index", i, inst.indices[i - 1])
        if aug:
            board = board.with_revealed("prefix", i, inst.prefix_for(i))
    decode_view = DecodeView(
        index=inst.indices[-1],
        prefix=inst.prefix_for(inst.k) if aug else None,
    )
    output = int(protocol.decode_fn(board, decode_view, shared))
    if output not in (0, 1):
        raise ProtocolContractError(f"decode must output a bit, got {output}")
    transcript = Transcript(messages=board.messages, revealed=board.revealed, output=output)
    return RunResult(
        transcript=transcript,
        output=output,
        correct=output == inst.answer,
        total_bits=protocol.total_bits,
    )


def run_chain_protocol(protocol: ProtocolSpec, inst: ChainInstance, shared: SharedRandomness) -> RunResult:
    """Execute players 1..k in order; only indices are revealed for free."""
    return _run(protocol, inst, shared, aug=False)


def run_aug_chain_protocol(protocol: ProtocolSpec, inst: ChainInstance, shared: SharedRandomness) -> RunResult:
    """Augmented variant: each index reveal also places the instance's prefix
    on the board, and every player additionally holds the previous prefix."""
    return _run(protocol, inst, shared, aug=True)


def trivial_forward_protocol(n: int, k: int, mode: str = "all") -> ProtocolSpec:
    """Forward whole strings so the decoder can read the last indexed bit.

    mode "all": every player sends its string (k*n bits). mode "last-only":
    only player k sends (n bits); under the one-way order no earlier player
    can know which string will be indexed last, so this is the cheapest
    single-sender variant.
    """
    if mode not in ("all", "last-only"):
        raise InvalidParameterError(f"mode must be 'all' or 'last-only', got {mode!r}")
    if mode == "all":
        lengths = (n,) * k
    else:
        lengths = (0,) * (k - 1) + (n,)

    def message(i: int, view: PlayerView, board: Board, shared: SharedRandomness) -> BitString:
        if mode == "last-only" and i < k:
            return BitString(())
        return BitString(view.string.bits)

    def decode(board: Board, view: DecodeView, shared: SharedRandomness) -> int:
        return board.message(k).bit(view.index)

    return ProtocolSpec(
        name="trivial-forward", n=n, k=k, message_lengths=lengths,
        message_fn=message, decode_fn=decode, params={"mode": mode},
    )


def sampled_bits_protocol(n: int, k: int, m: int) -> ProtocolSpec:
    """Each player publishes its string at m publicly sampled positions.

    The decoder reads the last string's bit if its index was sampled, then
    scans the other instances in instance order for a sampled index, and
    falls back to a shared coin.
    """
    if not 0 <= m <= n:
        raise InvalidParameterError(f"m must lie in 0..n, got {m}")

    def published(i: int, shared: SharedRandomness) -> tuple[int, ...]:
        return shared.positions(f"sampled-bits/positions/{i}", m, n)

    def message(i: int, view: PlayerView, board: Board, shared: SharedRandomness) -> BitString:
        return BitString(tuple(view.string.bit(pos) for pos in published(i, shared)))

    def decode(board: Board, view: DecodeView, shared: SharedRandomness) -> int:
        order = [k] + list(range(1, k))
        for i in order:
            sigma = view.index if i == k else board.index(i)
            positions = published(i, shared)
            if sigma in positions:
                return board.message(i).bit(positions.index(sigma) + 1)
        return shared.coin("sampled-bits/fallback")

    return ProtocolSpec(
        name="sampled-bits", n=n, k=k, message_lengths=(m,) * k,
        message_fn=message, decode_fn=decode, params={"m": m},
    )


def index_majority_encode(
    x: BitString, mask: BitString, perm: Sequence[int], block_size: int
) -> BitString:
    """Randomize the string with the shared mask and permutation, then emit
    one majority bit per contiguous block (ties go to 0)."""
    n = len(x)
    if len(mask) != n:
        raise InvalidParameterError("mask length must match string length")
    if block_size < 1 or n % block_size != 0:
        raise InvalidParameterError(f"block size {block_size} must divide n={n}")
    if sorted(perm) != list(range(1, n + 1)):
        raise InvalidParameterError("perm must be a permutation of 1..n")
    randomized = [0] * n
    for i in range(1, n + 1):
        randomized[perm[i - 1] - 1] = x.bit(i) ^ mask.bit(i)
    blocks = n // block_size
    out = []
    for j in range(blocks):
        count = sum(randomized[j * block_size : (j + 1) * block_size])
        out.append(1 if 2 * count > block_size else 0)
    return BitString(tuple(out))


def index_majority_decode(
    summary: BitString, sigma: int, mask: BitString, perm: Sequence[int], block_size: int
) -> int:
    """Read the majority bit of the block holding the permuted index and undo the mask."""
    n = len(mask)
    if len(summary) * block_size != n:
        raise InvalidParameterError(
            f"summary length {len(summary)} inconsistent with n={n}, block size {block_size}"
        )
    p = perm[sigma - 1]
    block = (p - 1) // block_size + 1
    return summary.bit(block) ^ mask.bit(sigma)


def chained_majority_protocol(n: int, k: int, block_size: int) -> ProtocolSpec:
    """Every player runs the block-majority encoding with fresh shared
    randomness; the decoder recovers one guess per instance and outputs the
    majority of the guesses (ties go to a shared coin)."""
    if block_size < 1 or n % block_size != 0:
        raise InvalidParameterError(f"block size {block_size} must divide n={n}")

    def mask_for(i: int, shared: SharedRandomness) -> BitString:
        return shared.bits(f"majority/mask/{i}", n)

    def perm_for(i: int, shared: SharedRandomness) -> tuple[int, ...]:
        return shared.permutation(f"majority/perm/{i}", n)

    def message(i: int, view: PlayerView, board: Board, shared: SharedRandomness) -> BitString:
        return index_majority_encode(view.string, mask_for(i, shared), perm_for(i, shared), block_size)

    def decode(board: Board, view: DecodeView, shared: SharedRandomness) -> int:
        guesses = [
            index_majority_decode(
                board.message(i), board.index(i), mask_for(i, shared), perm_for(i, shared), block_size
            )
            for i in range(1, k + 1)
        ]
        ones = sum(guesses)
        if 2 * ones > k:
            return 1
        if 2 * ones < k:
            return 0
        return shared.coin("majority/tie")

    return ProtocolSpec(
        name="chained-majority", n=n, k=k, message_lengths=(n // block_size,) * k,
        message_fn=message, decode_fn=decode, params={"B": block_size},
        simulator="majority",
    )


def index_majority_protocol(n: int, block_size: int) -> ProtocolSpec:
    """Single-instance block-majority protocol; identical runs to the chained
    protocol at k=1 under equal seeds."""
    return replace(chained_majority_protocol(n, 1, block_size), name="index-majority")


def truncation_protocol(n: int, k: int, t: int) -> ProtocolSpec:
    """Deterministic family for entropy accounting: each player sends its
    first t bits; the decoder reads any index that landed inside a sent
    prefix (last instance first), else outputs 0."""
    if not 0 <= t <= n:
        raise InvalidParameterError(f"t must lie in 0..n, got {t}")

    def message(i: int, view: PlayerView, board: Board, shared: SharedRandomness) -> BitString:
        return BitString(view.string.bits[:t])

    def decode(board: Board, view: DecodeView, shared: SharedRandomness) -> int:
        if view.index <= t:
            return board.message(k).bit(view.index)
        for i in range(1, k):
            sigma = board.index(i)
            if sigma <= t:
                return board.message(i).bit(sigma)
        return 0

    return ProtocolSpec(
        name="truncation", n=n, k=k, message_lengths=(t,) * k,
        message_fn=message, decode_fn=decode, params={"t": t},
    )


def constant_protocol(n: int, k: int, bit: int = 0) -> ProtocolSpec:
    """Zero-communication baseline: everyone silent, decoder outputs `bit`."""
    if bit not in (0, 1):
        raise InvalidParameterError(f"bit must be 0 or 1, got {bit}")

    def message(i: int, view: PlayerView, board: Board, shared: SharedRandomness) -> BitString:
        return BitString(())

    def decode(board: Board, view: DecodeView, shared: SharedRandomness) -> int:
        return bit

    return ProtocolSpec(
        name="constant", n=n, k=k, message_lengths=(0,) * k,
        message_fn=message, decode_fn=decode, params={"bit": bit},
    )


def _build_trivial(n, k, params):
    return trivial_forward_protocol(n, k, mode=params.get("mode", "all"))


def _build_sampled(n, k, params):
    if "m" not in params:
        raise InvalidParameterError("sampled-bits requires parameter m")
    return sampled_bits_protocol(n, k, int(params["m"]))


def _build_index_majority(n, k, params):
    if k != 1:
        raise InvalidParameterError(f"index-majority is a single-instance protocol, got k={k}")
    if "B" not in params:
        raise InvalidParameterError("index-majority requires parameter B")
    return index_majority_protocol(n, int(params["B"]))


def _build_chained_majority(n, k, params):
    if "B" not in params:
        raise InvalidParameterError("chained-majority requires parameter B")
    return chained_majority_protocol(n, k, int(params["B"]))


def _build_truncation(n, k, params):
    if "t" not in params:
        raise InvalidParameterError("truncation requires parameter t")
    return truncation_protocol(n, k, int(params["t"]))


PROTOCOLS = {
    "trivial-forward": (_build_trivial, {"mode"}),
    "sampled-bits": (_build_sampled, {"m"}),
    "index-majority": (_build_index_majority, {"B"}),
    "chained-majority": (_build_chained_majority, {"B"}),
    "truncation": (_build_truncation, {"t"}),
}


def build_protocol(name: str, n: int, k: int, params: Mapping[str, Any] | None = None) -> ProtocolSpec:
    """Construct a registered protocol from its name and flat parameter map."""
    if name not in PROTOCOLS:
        raise InvalidParameterError(
            f"unknown protocol {name!r}; registered: {sorted(PROTOCOLS)}"
        )
    params = dict(params or {})
    builder, allowed = PROTOCOLS[name]
    unknown = set(params) - allowed
    if unknown:
        raise InvalidParameterError(f"unknown parameters for {name}: {sorted(unknown)}")
    return builder(n, k, params)
