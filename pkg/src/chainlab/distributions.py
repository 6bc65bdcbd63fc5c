"""Samplers and exact probability tables for the hard input distributions.

Two equivalent formulations of the biased index input are implemented: the
direct one (draw the answer bit, then a conditioned string/index pair) and
the structured one (draw a support set T, place the half-weight set inside
it, draw the index from T). Their exact (Y, rho) tables must coincide, and
the package verifies that they do.
"""
from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import InvalidParameterError, ResourceLimitError
from .model import AugChainInstance, BalancedString, ChainInstance, enumerate_balanced

DEFAULT_ENUMERATION_BUDGET = 10_000_000


@dataclass(frozen=True)
class BiasParam:
    """Answer-bit bias; the answer is 1 with probability 1/2 + theta."""

    theta: Fraction

    def __post_init__(self):
        theta = Fraction(self.theta)
        object.__setattr__(self, "theta", theta)
        if abs(theta) > Fraction(1, 2):
            raise InvalidParameterError(f"|theta| must be <= 1/2, got {theta}")


@dataclass(frozen=True)
class BiasedIndexSample:
    """One draw of the biased index input.

    `pool` is the restricted support set the index is drawn from and `chosen`
    the half-size subset fixed to the biased value; both are only present for
    draws from the structured formulation. Positions are 1-based.
    """

    answer: int
    string: BalancedString
    index: int
    pool: frozenset[int] | None = None
    chosen: frozenset[int] | None = None


@dataclass(frozen=True)
class SupportTable:
    """Exact finite distribution over (string, index) outcomes."""

    entries: tuple[tuple[tuple[BalancedString, int], Fraction], ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.entries, key=lambda e: (e[0][0].text, e[0][1])))
        object.__setattr__(self, "entries", ordered)
        if any(p < 0 for _, p in ordered):
            raise InvalidParameterError("probabilities must be nonnegative")
        if sum(p for _, p in ordered) != 1:
            raise InvalidParameterError("support table must sum to exactly 1")

    @property
    def total(self) -> Fraction:
        return sum((p for _, p in self.entries), Fraction(0))

    def as_dict(self) -> dict[tuple[BalancedString, int], Fraction]:
        return dict(self.entries)

    def probability(self, string: BalancedString, index: int) -> Fraction:
        return self.as_dict().get((string, index), Fraction(0))

    def tv_distance(self, other: "SupportTable") -> Fraction:
        mine, theirs = self.as_dict(), other.as_dict()
        keys = set(mine) | set(theirs)
        return sum(
            (abs(mine.get(k, Fraction(0)) - theirs.get(k, Fraction(0))) for k in keys),
            Fraction(0),
        ) / 2

    def to_csv_rows(self) -> list[list]:
        rows = [["outcome_Y", "outcome_rho", "prob_num", "prob_den"]]
        for (y, rho), p in self.entries:
            rows.append([y.text, rho, p.numerator, p.denominator])
        return rows

    def write_csv(self, fileobj) -> None:
        writer = csv.writer(fileobj, lineterminator="\n")
        writer.writerows(self.to_csv_rows())


def bias_grid(n: int) -> list[Fraction]:
    """All biases realizable by an integer support-set size, sorted ascending.

    Support sets of size b between n/2 and n realize theta = (n-b)/(2b);
    both signs are included.
    """
    if n < 2 or n % 2 != 0:
        raise InvalidParameterError(f"n must be even and >= 2, got {n}")
    positive = {Fraction(n - b, 2 * b) for b in range(n // 2, n + 1)}
    return sorted(positive | {-t for t in positive})


def structured_pool_size(n: int, theta) -> int:
    """The support-set size b = n/(1+2|theta|); errors off-grid with the nearest grid values."""
    theta = BiasParam(Fraction(theta)).theta
    b = Fraction(n) / (1 + 2 * abs(theta))
    if b.denominator != 1:
        grid = bias_grid(n)
        below = max((t for t in grid if t < theta), default=grid[0])
        above = min((t for t in grid if t > theta), default=grid[-1])
        raise InvalidParameterError(
            f"theta={theta} is off the bias grid for n={n} "
            f"(n/(1+2|theta|) = {b} is not an integer); nearest grid values: {below}, {above}"
        )
    return int(b)


def _sample_conditioned(n: int, pos: int, value: int, rng: random.Random) -> BalancedString:
    """Uniform balanced string with the given bit at 1-based `pos`, without rejection.

    The remaining n/2 - value ones are a uniform subset of the other n-1
    positions, giving the exact conditional law in bounded time.
    """
    others = [i for i in range(1, n + 1) if i != pos]
    ones = set(rng.sample(others, n // 2 - value))
    bits = [0] * n
    bits[pos - 1] = value
    for i in ones:
        bits[i - 1] = 1
    return BalancedString(tuple(bits))


def sample_chain(n: int, k: int, rng: random.Random, aug: bool = False) -> ChainInstance:
    """Draw one chained-index instance: uniform answer bit, then independent
    conditioned (string, index) pairs."""
    if n < 2 or n % 2 != 0:
        raise InvalidParameterError(f"n must be even and >= 2, got {n}")
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    z = rng.randrange(2)
    strings = []
    indices = []
    for _ in range(k):
        sigma = rng.randrange(1, n + 1)
        strings.append(_sample_conditioned(n, sigma, z, rng))
        indices.append(sigma)
    cls = AugChainInstance if aug else ChainInstance
    return cls(n=n, k=k, strings=tuple(strings), indices=tuple(indices), answer=z)


def _bernoulli(p: Fraction, rng: random.Random) -> int:
    return 1 if rng.randrange(p.denominator) < p.numerator else 0


def sample_biased_direct(n: int, theta, rng: random.Random) -> BiasedIndexSample:
    """Draw from the direct formulation: biased answer bit, then a conditioned pair."""
    if n < 2 or n % 2 != 0:
        raise InvalidParameterError(f"n must be even and >= 2, got {n}")
    theta = BiasParam(Fraction(theta)).theta
    w = _bernoulli(Fraction(1, 2) + theta, rng)
    rho = rng.randrange(1, n + 1)
    y = _sample_conditioned(n, rho, w, rng)
    return BiasedIndexSample(answer=w, string=y, index=rho)


def sample_biased_structured(n: int, theta, rng: random.Random) -> BiasedIndexSample:
    """Draw from the structured formulation (grid biases only).

    For theta >= 0 the chosen half-set is set to 1 inside the pool; for
    theta < 0 the roles of the two bit values swap.
    """
    if n < 2 or n % 2 != 0:
        raise InvalidParameterError(f"n must be even and >= 2, got {n}")
    theta = Fraction(theta)
    b = structured_pool_size(n, theta)
    pool = sorted(rng.sample(range(1, n + 1), b))
    chosen = sorted(rng.sample(pool, n // 2))
    chosen_set = set(chosen)
    if theta >= 0:
        bits = tuple(1 if i in chosen_set else 0 for i in range(1, n + 1))
    else:
        bits = tuple(0 if i in chosen_set else 1 for i in range(1, n + 1))
    y = BalancedString(bits)
    rho = pool[rng.randrange(b)]
    return BiasedIndexSample(
        answer=y.bit(rho),
        string=y,
        index=rho,
        pool=frozenset(pool),
        chosen=frozenset(chosen),
    )


def pmf_biased_index(n: int, theta, y: BalancedString, rho: int) -> Fraction:
    """Exact probability of (y, rho) under the biased index input distribution."""
    theta = BiasParam(Fraction(theta)).theta
    if len(y) != n or n % 2 != 0:
        raise InvalidParameterError(f"string length {len(y)} does not match even n={n}")
    if y.ones() != n // 2:
        raise InvalidParameterError(f"'{y.text}' is not balanced")
    if not 1 <= rho <= n:
        raise IndexError(f"index {rho} out of range for n={n}")
    numerator = 1 + 2 * theta if y.bit(rho) == 1 else 1 - 2 * theta
    return Fraction(numerator) / (n * math.comb(n, n // 2))


def _direct_table(n: int, theta: Fraction) -> dict[tuple[BalancedString, int], Fraction]:
    strings = list(enumerate_balanced(n))
    table: dict[tuple[BalancedString, int], Fraction] = {}
    for w in (0, 1):
        valid = [(y, rho) for y in strings for rho in range(1, n + 1) if y.bit(rho) == w]
        p_w = Fraction(1, 2) + theta if w == 1 else Fraction(1, 2) - theta
        if p_w == 0:
            continue
        share = p_w / len(valid)
        for key in valid:
            table[key] = table.get(key, Fraction(0)) + share
    return table


def _structured_table(n: int, theta: Fraction) -> dict[tuple[BalancedString, int], Fraction]:
    b = structured_pool_size(n, theta)
    half = n // 2
    weights: dict[tuple[BalancedString, int], int] = {}
    for pool in combinations(range(1, n + 1), b):
        for chosen in combinations(pool, half):
            chosen_set = set(chosen)
            if theta >= 0:
                bits = tuple(1 if i in chosen_set else 0 for i in range(1, n + 1))
            else:
                bits = tuple(0 if i in chosen_set else 1 for i in range(1, n + 1))
            y = BalancedString(bits)
            for rho in pool:
                key = (y, rho)
                weights[key] = weights.get(key, 0) + 1
    total = math.comb(n, b) * math.comb(b, half) * b
    return {key: Fraction(w, total) for key, w in weights.items()}


def enumerate_support(
    n: int,
    theta,
    variant: str = "direct",
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> SupportTable:
    """Exact marginal table of (string, index) under either formulation."""
    if n < 2 or n % 2 != 0:
        raise InvalidParameterError(f"n must be even and >= 2, got {n}")
    theta = BiasParam(Fraction(theta)).theta
    if variant == "direct":
        required = math.comb(n, n // 2) * n
        if required > budget:
            raise ResourceLimitError(
                f"direct enumeration needs {required} points, budget is {budget}",
                required=required,
                budget=budget,
            )
        table = _direct_table(n, theta)
    elif variant == "structured":
        b = structured_pool_size(n, theta)
        required = math.comb(n, b) * math.comb(b, n // 2) * b
        if required > budget:
            raise ResourceLimitError(
                f"structured enumeration needs {required} points, budget is {budget}",
                required=required,
                budget=budget,
            )
        table = _structured_table(n, theta)
    else:
        raise InvalidParameterError(f"variant must be 'direct' or 'structured', got {variant!r}")
    return SupportTable(tuple(table.items()))
