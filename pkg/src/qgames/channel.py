"""Games as communication over a classical noisy channel.

The input symbols are strategy pairs ``(alpha_j, beta_k)``; the output symbols
are measurement results. Any single-measurement quantum game is reproduced by
the channel whose transition probabilities are its Born probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .engine import PD_OUTCOMES, GameSpec, OutcomeMap, PayoffMatrix, output_state
from .errors import InvariantViolation, ValidationError
from .linalg import bitstring_labels, measure_probs

TOL_STOCH = 1e-12
TOL_FACTOR = 1e-9
TOL_TIE = 1e-9


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Row-stochastic ``probs[j*m + k, i] = P(m_i | alpha_j, beta_k)``."""

    row_names: tuple[str, ...]
    col_names: tuple[str, ...]
    outputs: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64)
        n, m, r = len(self.row_names), len(self.col_names), len(self.outputs)
        if probs.shape != (n * m, r):
            raise ValidationError("channel", f"expected shape {(n * m, r)}, got {probs.shape}")
        if len(set(self.outputs)) != r:
            raise ValidationError("channel.outputs", "output labels must be distinct")
        if np.any(probs < -TOL_STOCH) or np.any(probs > 1 + TOL_STOCH):
            raise InvariantViolation("channel has entries outside [0, 1]")
        sums = probs.sum(axis=1)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > TOL_STOCH:
            raise InvariantViolation(f"channel is not row-stochastic: max |row sum - 1| = {worst:.3e}")
        probs = np.clip(probs, 0.0, 1.0)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        for attr in ("row_names", "col_names", "outputs"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))

    @property
    def n(self) -> int:
        return len(self.row_names)

    @property
    def m(self) -> int:
        return len(self.col_names)

    @property
    def inputs(self) -> list[str]:
        return [f"({a},{b})" for a in self.row_names for b in self.col_names]

    def row(self, j: int, k: int) -> np.ndarray:
        return self.probs[j * self.m + k]

    def to_dict(self) -> dict:
        return {
            "inputs": self.inputs,
            "rows": list(self.row_names),
            "cols": list(self.col_names),
            "outputs": list(self.outputs),
            "probs": self.probs.tolist(),
        }


def channel_from_game(spec: GameSpec) -> ChannelMatrix:
    probs = np.array([
        measure_probs(output_state(spec, j, k), spec.basis)
        for j in range(spec.n) for k in range(spec.m)
    ])
    return ChannelMatrix(spec.row_names, spec.col_names, spec.basis.labels, probs)


def expected_payoffs_channel(ch: ChannelMatrix, outcomes: OutcomeMap) -> PayoffMatrix:
    if outcomes.size != len(ch.outputs):
        raise ValidationError("outcomes", f"{outcomes.size} outcomes for {len(ch.outputs)} channel outputs")
    cells = np.stack([ch.probs @ outcomes.values_a, ch.probs @ outcomes.values_b], axis=-1)
    return PayoffMatrix(cells.reshape(ch.n, ch.m, 2), ch.row_names, ch.col_names)


class NoiseKind(str, Enum):
    CORRELATED_FLIP = "correlated_flip"
    INDEPENDENT_FLIP = "independent_flip"


@dataclass(frozen=True)
class BitChannelSpec:
    kind: NoiseKind
    epsilon: float
    bits_per_player: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        eps = float(self.epsilon)
        if not 0.0 <= eps <= 1.0:
            raise ValidationError("epsilon", f"must lie in [0, 1], got {eps}")
        if not 1 <= self.bits_per_player <= 4:
            raise ValidationError("bits_per_player", f"must be in 1..4, got {self.bits_per_player}")
        object.__setattr__(self, "epsilon", eps)


def bit_channel(spec: BitChannelSpec) -> ChannelMatrix:
    """Each player sends a ``mu``-bit word; output is the received ``2*mu``-bit string.

    ``correlated_flip`` flips every bit with probability ``epsilon`` and none
    otherwise. ``independent_flip`` flips each bit on its own with probability
    ``epsilon``. Bit value 0 is named ``I`` (no flip) and 1 is ``F`` for ``mu = 1``.
    """
    mu = spec.bits_per_player
    words = bitstring_labels(mu)
    names = ["I", "F"] if mu == 1 else words
    outputs = bitstring_labels(2 * mu)
    size = 2 ** (2 * mu)
    eps = spec.epsilon
    # sent and received words as integers; distance = number of flipped bits
    sent = np.arange(size)[:, None]
    recv = np.arange(size)[None, :]
    flipped = np.vectorize(lambda x: bin(x).count("1"))(sent ^ recv)
    if spec.kind is NoiseKind.CORRELATED_FLIP:
        probs = np.where(flipped == 0, 1.0 - eps, 0.0) + np.where(flipped == 2 * mu, eps, 0.0)
    else:
        probs = eps**flipped * (1.0 - eps) ** (2 * mu - flipped)
    return ChannelMatrix(tuple(names), tuple(names), tuple(outputs), probs)


@dataclass(frozen=True)
class RowFactorization:
    input: str
    factorizable: bool
    max_deviation: float


@dataclass(frozen=True)
class FactorizationReport:
    rows: tuple[RowFactorization, ...]

    @property
    def correlated(self) -> bool:
        return any(not r.factorizable for r in self.rows)

    @property
    def max_deviation(self) -> float:
        return max(r.max_deviation for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "correlated": self.correlated,
            "max_deviation": self.max_deviation,
            "rows": [
                {"input": r.input, "factorizable": r.factorizable, "max_deviation": r.max_deviation}
                for r in self.rows
            ],
        }


def factorization_test(ch: ChannelMatrix, split: int | None = None, tol: float = TOL_FACTOR) -> FactorizationReport:
    """Check, per input, whether the output law is the product of its A- and B-marginals.

    Output labels are split into an A-part (first ``split`` characters) and a
    B-part (the rest); ``split`` defaults to half the label length.
    """
    lengths = {len(lbl) for lbl in ch.outputs}
    if len(lengths) != 1:
        raise ValidationError("channel.outputs", "labels must share one length to split into (A, B) parts")
    length = lengths.pop()
    if split is None:
        if length % 2:
            raise ValidationError("channel.outputs", f"cannot halve labels of length {length}")
        split = length // 2
    if not 0 < split < length:
        raise ValidationError("split", f"must lie strictly inside label length {length}")
    a_parts = sorted({lbl[:split] for lbl in ch.outputs})
    b_parts = sorted({lbl[split:] for lbl in ch.outputs})
    a_idx = [a_parts.index(lbl[:split]) for lbl in ch.outputs]
    b_idx = [b_parts.index(lbl[split:]) for lbl in ch.outputs]
    joint = np.zeros((ch.probs.shape[0], len(a_parts), len(b_parts)))
    for col, (ia, ib) in enumerate(zip(a_idx, b_idx)):
        joint[:, ia, ib] = ch.probs[:, col]
    rows = []
    for name, tab in zip(ch.inputs, joint):
        product = np.outer(tab.sum(axis=1), tab.sum(axis=0))
        dev = float(np.max(np.abs(tab - product)))
        rows.append(RowFactorization(name, dev <= tol, dev))
    return FactorizationReport(tuple(rows))


@dataclass(frozen=True)
class MixedProfile:
    """Alice flips (defects) with probability ``p``, Bob with ``q``."""

    p: float
    q: float

    def __post_init__(self) -> None:
        for nm in ("p", "q"):
            v = float(getattr(self, nm))
            if not 0.0 <= v <= 1.0:
                raise ValidationError(nm, f"must lie in [0, 1], got {v}")
            object.__setattr__(self, nm, v)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps <= 1.0:
        raise ValidationError("epsilon", f"must lie in [0, 1], got {eps}")
    return eps


def mixed_joint_probs(prof: MixedProfile, eps: float) -> np.ndarray:
    """Received-symbol probabilities ``P(I,I), P(I,F), P(F,I), P(F,F)`` over correlated-flip noise."""
    eps = _check_eps(eps)
    p, q = prof.p, prof.q
    return np.array([
        (1 - p) * (1 - q) * (1 - eps) + p * q * eps,
        q * (1 - p) * (1 - eps) + p * (1 - q) * eps,
        p * (1 - q) * (1 - eps) + q * (1 - p) * eps,
        p * q * (1 - eps) + (1 - p) * (1 - q) * eps,
    ])


def mixed_payoff(prof: MixedProfile, eps: float) -> tuple[float, float]:
    """Closed-form expected PD payoffs of the mixed game over correlated-flip noise."""
    eps = _check_eps(eps)
    p, q = prof.p, prof.q
    o_a = (3 + 2 * p - 3 * q - p * q) * (1 - eps) + (1 - p + 4 * q - p * q) * eps
    o_b = (3 + 2 * q - 3 * p - p * q) * (1 - eps) + (1 - q + 4 * p - p * q) * eps
    return o_a, o_b


def mixed_payoff_via_probs(prof: MixedProfile, eps: float, outcomes: OutcomeMap = PD_OUTCOMES) -> tuple[float, float]:
    """Expected payoffs as ``sum P(cell) * omega(cell)`` for any four-result outcome map."""
    if outcomes.size != 4:
        raise ValidationError("outcomes", "the mixed flip game has four measurement results")
    return outcomes.expectation(mixed_joint_probs(prof, eps))


def payoff_slope(eps: float, other: float, player: str = "A", outcomes: OutcomeMap | None = None) -> float:
    """Derivative of a player's expected payoff with respect to their own flip probability.

    Payoffs are linear in the player's own probability, so the slope does not
    depend on it. With PD weights the slope is ``2 - other - 3*eps``.
    """
    eps = _check_eps(eps)
    if outcomes is None:
        return 2.0 - other - 3.0 * eps
    who = 0 if player in ("A", 0) else 1
    if who == 0:
        hi, lo = MixedProfile(1.0, other), MixedProfile(0.0, other)
    else:
        hi, lo = MixedProfile(other, 1.0), MixedProfile(other, 0.0)
    return mixed_payoff_via_probs(hi, eps, outcomes)[who] - mixed_payoff_via_probs(lo, eps, outcomes)[who]


@dataclass(frozen=True)
class BestResponse:
    """Best-response set for the own flip probability: ``{lo}`` if ``lo == hi`` else ``[lo, hi]``."""

    lo: float
    hi: float
    slope: float

    @property
    def indifferent(self) -> bool:
        return self.lo != self.hi


def mixed_best_response(eps: float, other: float, player: str = "A",
                        outcomes: OutcomeMap | None = None, tol: float = TOL_TIE) -> BestResponse:
    slope = payoff_slope(eps, other, player, outcomes)
    if slope > tol:
        return BestResponse(1.0, 1.0, slope)
    if slope < -tol:
        return BestResponse(0.0, 0.0, slope)
    return BestResponse(0.0, 1.0, slope)


def prescribed_rule(eps: float) -> MixedProfile:
    """The symmetric profile ``p = q = 1 - eps``."""
    return MixedProfile(1.0 - eps, 1.0 - eps)


def derivative_rule(eps: float) -> MixedProfile:
    """Symmetric equilibrium from the slope ``2 - q - 3*eps``: ``p = q = clip(2 - 3*eps, 0, 1)``.

    For ``eps < 1/3`` both flip, for ``eps > 2/3`` neither does, and in between
    each player is exactly indifferent at ``q = 2 - 3*eps``.
    """
    v = min(1.0, max(0.0, 2.0 - 3.0 * eps))
    return MixedProfile(v, v)


# "paper" is the CLI-facing alias of the prescribed profile
RULES: dict[str, Callable[[float], MixedProfile]] = {
    "paper": prescribed_rule,
    "prescribed": prescribed_rule,
    "derivative": derivative_rule,
}


def sweep_epsilon(rule: str | Callable[[float], MixedProfile] = "prescribed", grid: int = 101,
                  outcomes: OutcomeMap | None = None) -> np.ndarray:
    """Rows ``(eps, <O_A>, <O_B>)`` on a uniform grid over ``[0, 1]``."""
    if grid < 2:
        raise ValidationError("grid", f"need at least 2 points, got {grid}")
    profile_of = RULES[rule] if isinstance(rule, str) else rule
    rows = []
    for eps in np.linspace(0.0, 1.0, grid):
        prof = profile_of(float(eps))
        if outcomes is None:
            o_a, o_b = mixed_payoff(prof, eps)
        else:
            o_a, o_b = mixed_payoff_via_probs(prof, eps, outcomes)
        rows.append((eps, o_a, o_b))
    return np.array(rows)

