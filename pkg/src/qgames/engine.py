"""Playable two-player games: input state, strategy sets, measurement, outcomes.

A :class:`GameSpec` bundles the four ingredients; :func:`expected_payoffs`
turns it into the n x m matrix of expected outcome tuples, which is the game
the players actually analyse.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .linalg import (
    GATES,
    DensityMatrix,
    MeasurementBasis,
    StateVector,
    UnitaryOperator,
    apply,
    density_from_pure,
    measure_probs,
    measure_probs_mixed,
    tensor,
)


class Scope(str, Enum):
    LOCAL_A = "local_A"
    LOCAL_B = "local_B"
    JOINT = "joint"


@dataclass(frozen=True, eq=False)
class Strategy:
    """A named unitary; local operators are stored at subsystem dimension."""

    name: str
    op: UnitaryOperator
    scope: Scope = Scope.JOINT

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", Scope(self.scope))

    def lifted(self, dims: tuple[int, int]) -> UnitaryOperator:
        d_a, d_b = dims
        want = {Scope.JOINT: d_a * d_b, Scope.LOCAL_A: d_a, Scope.LOCAL_B: d_b}[self.scope]
        if self.op.dim != want:
            raise ValidationError(
                f"strategy {self.name!r}",
                f"{self.scope.value} operator has dim {self.op.dim}, expected {want}",
            )
        if self.scope is Scope.LOCAL_A:
            return tensor(self.op, UnitaryOperator.identity(d_b))
        if self.scope is Scope.LOCAL_B:
            return tensor(UnitaryOperator.identity(d_a), self.op)
        return self.op


@dataclass(frozen=True, eq=False)
class OutcomeMap:
    """Payoff ``(values_a[i], values_b[i])`` awarded for measurement result ``i``."""

    values_a: np.ndarray
    values_b: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.values_a, dtype=np.float64)
        b = np.array(self.values_b, dtype=np.float64)
        if a.ndim != 1 or a.shape != b.shape:
            raise ValidationError("outcomes", f"mismatched payoff vectors {a.shape} vs {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("outcomes", "payoffs must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "values_a", a)
        object.__setattr__(self, "values_b", b)

    @property
    def size(self) -> int:
        return self.values_a.shape[0]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> OutcomeMap:
        arr = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def expectation(self, probs: np.ndarray) -> tuple[float, float]:
        return float(probs @ self.values_a), float(probs @ self.values_b)


# (0,0)->(3,3), (0,1)->(0,5), (1,0)->(5,0), (1,1)->(1,1)
PD_OUTCOMES = OutcomeMap.from_pairs([(3, 3), (0, 5), (5, 0), (1, 1)])


@dataclass(frozen=True, eq=False)
class PayoffMatrix:
    """``cells[j, k] = (payoff_A, payoff_B)`` for Alice's ``j`` against Bob's ``k``."""

    cells: np.ndarray
    row_names: tuple[str, ...]
    col_names: tuple[str, ...]

    def __post_init__(self) -> None:
        cells = np.array(self.cells, dtype=np.float64)
        if cells.ndim != 3 or cells.shape[2] != 2:
            raise ValidationError("payoffs", f"expected shape (n, m, 2), got {cells.shape}")
        if cells.shape[:2] != (len(self.row_names), len(self.col_names)):
            raise ValidationError("payoffs", "row/column names do not match matrix shape")
        if not np.all(np.isfinite(cells)):
            raise ValidationError("payoffs", "payoffs must be finite")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "row_names", tuple(self.row_names))
        object.__setattr__(self, "col_names", tuple(self.col_names))

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    @property
    def m(self) -> int:
        return self.cells.shape[1]

    def player(self, who: str | int) -> np.ndarray:
        """The n x m payoff array of player ``"A"``/``0`` or ``"B"``/``1``."""
        return self.cells[:, :, player_index(who)]

    def cell_ids(self) -> Iterator[tuple[int, int]]:
        for j in range(self.n):
            for k in range(self.m):
                yield (j, k)

    def cell_name(self, cell: tuple[int, int]) -> str:
        j, k = cell
        return f"({self.row_names[j]},{self.col_names[k]})"

    def max_abs_diff(self, other: PayoffMatrix) -> float:
        if self.cells.shape != other.cells.shape:
            raise ValidationError("payoffs", f"shape {self.cells.shape} vs {other.cells.shape}")
        return float(np.max(np.abs(self.cells - other.cells)))

    def relabeled(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> PayoffMatrix:
        """Matrix whose row ``j`` is this matrix's row ``row_perm[j]`` (same for columns)."""
        rp, cp = list(row_perm), list(col_perm)
        return PayoffMatrix(
            self.cells[np.ix_(rp, cp)],
            tuple(self.row_names[i] for i in rp),
            tuple(self.col_names[i] for i in cp),
        )

    def to_dict(self) -> dict:
        return {
            "rows": list(self.row_names),
            "cols": list(self.col_names),
            "payoff_A": self.player(0).tolist(),
            "payoff_B": self.player(1).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> PayoffMatrix:
        cells = np.stack([np.asarray(d["payoff_A"], float), np.asarray(d["payoff_B"], float)], axis=-1)
        return cls(cells, tuple(d["rows"]), tuple(d["cols"]))


def player_index(who: str | int) -> int:
    if who in (0, "A", "a", "alice", "Alice"):
        return 0
    if who in (1, "B", "b", "bob", "Bob"):
        return 1
    raise ValidationError("player", f"unknown player {who!r}")


@dataclass(frozen=True, eq=False)
class GameSpec:
    """Input state, two finite strategy sets, one projective measurement, outcome map.

    ``input_state`` may be a pure :class:`StateVector` or a :class:`DensityMatrix`.
    When ``entangler`` is set the output is ``E^dag B A E psi``; otherwise ``B A psi``.
    """

    input_state: StateVector | DensityMatrix
    alice_ops: tuple[Strategy, ...]
    bob_ops: tuple[Strategy, ...]
    basis: MeasurementBasis
    outcomes: OutcomeMap
    dims: tuple[int, int] = (2, 2)
    entangler: UnitaryOperator | None = None
    name: str = "game"

    def __post_init__(self) -> None:
        object.__setattr__(self, "alice_ops", tuple(self.alice_ops))
        object.__setattr__(self, "bob_ops", tuple(self.bob_ops))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        joint = self.dims[0] * self.dims[1]
        if not self.alice_ops or not self.bob_ops:
            raise ValidationError("strategies", "both strategy sets must be nonempty")
        for who, ops in (("alice_ops", self.alice_ops), ("bob_ops", self.bob_ops)):
            names = [s.name for s in ops]
            if len(set(names)) != len(names):
                raise ValidationError(who, f"duplicate strategy names {names}")
        if self.input_state.dim != joint:
            raise ValidationError("input_state", f"dim {self.input_state.dim} != {joint} = d_A * d_B")
        if self.basis.dim != joint:
            raise ValidationError("measurement", f"dim {self.basis.dim} != {joint}")
        if self.outcomes.size != joint:
            raise ValidationError("outcomes", f"{self.outcomes.size} outcomes for {joint} results")
        if self.entangler is not None and self.entangler.dim != joint:
            raise ValidationError("entangler", f"dim {self.entangler.dim} != {joint}")
        # lift eagerly so scope/dim errors surface at construction
        _ = self.lifted_alice, self.lifted_bob

    @property
    def n(self) -> int:
        return len(self.alice_ops)

    @property
    def m(self) -> int:
        return len(self.bob_ops)

    @cached_property
    def lifted_alice(self) -> tuple[UnitaryOperator, ...]:
        return tuple(s.lifted(self.dims) for s in self.alice_ops)

    @cached_property
    def lifted_bob(self) -> tuple[UnitaryOperator, ...]:
        return tuple(s.lifted(self.dims) for s in self.bob_ops)

    @property
    def row_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.alice_ops)

    @property
    def col_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.bob_ops)

    @property
    def is_mixed(self) -> bool:
        return isinstance(self.input_state, DensityMatrix)

    def with_input(self, state: StateVector | DensityMatrix) -> GameSpec:
        return GameSpec(state, self.alice_ops, self.bob_ops, self.basis, self.outcomes,
                        self.dims, self.entangler, self.name)

    def joint_ops(self, j: int, k: int) -> list[UnitaryOperator]:
        """Operators in application order for cell ``(j, k)``."""
        if not (0 <= j < self.n and 0 <= k < self.m):
            raise IndexError(f"cell ({j}, {k}) outside {self.n} x {self.m} strategy sets")
        seq = [self.lifted_alice[j], self.lifted_bob[k]]
        if self.entangler is not None:
            seq = [self.entangler, *seq, self.entangler.dagger()]
        return seq


def output_state(spec: GameSpec, j: int, k: int) -> StateVector:
    if spec.is_mixed:
        raise ValidationError("input_state", "mixed input; use output_density")
    psi = spec.input_state
    for u in spec.joint_ops(j, k):
        psi = apply(u, psi)
    return psi


def output_density(spec: GameSpec, j: int, k: int) -> DensityMatrix:
    rho = spec.input_state
    if isinstance(rho, StateVector):
        rho = density_from_pure(rho)
    for u in spec.joint_ops(j, k):
        rho = rho.evolve(u)
    return rho


def _assemble(spec: GameSpec, probs_of) -> PayoffMatrix:
    cells = np.empty((spec.n, spec.m, 2))
    for j in range(spec.n):
        for k in range(spec.m):
            cells[j, k] = spec.outcomes.expectation(probs_of(j, k))
    return PayoffMatrix(cells, spec.row_names, spec.col_names)


def expected_payoffs(spec: GameSpec) -> PayoffMatrix:
    """Expected outcome tuple ``sum_i omega_i p_i`` for every strategy pair."""
    if spec.is_mixed:
        return expected_payoffs_mixed_state(spec)
    return _assemble(spec, lambda j, k: measure_probs(output_state(spec, j, k), spec.basis))


def expected_payoffs_mixed_state(spec: GameSpec, rho: DensityMatrix | None = None) -> PayoffMatrix:
    """Same contract as :func:`expected_payoffs` with operators acting as ``U rho U^dag``.

    ``rho`` overrides the spec's input state when given.
    """
    if rho is not None:
        spec = spec.with_input(rho)
    return _assemble(spec, lambda j, k: measure_probs_mixed(output_density(spec, j, k), spec.basis))


def ewl_conjugate(
    entangler: UnitaryOperator | np.ndarray,
    ops: Sequence[UnitaryOperator],
) -> list[UnitaryOperator]:
    """``E^dag U E`` for each joint operator ``U``."""
    if not isinstance(entangler, UnitaryOperator):
        try:
            entangler = UnitaryOperator(np.asarray(entangler))
        except ValidationError as exc:
            raise ValidationError("entangler", exc.message) from None
    e, e_dag = entangler.entries, entangler.entries.conj().T
    out = []
    for op in ops:
        if op.dim != entangler.dim:
            raise ValidationError("operator", f"dim {op.dim} does not match entangler dim {entangler.dim}")
        out.append(UnitaryOperator(e_dag @ op.entries @ e))
    return out


def conjugated_spec(spec: GameSpec) -> GameSpec:
    """Equivalent game without entangler whose strategies are the conjugated joint operators."""
    if spec.entangler is None:
        return spec
    names_a, names_b = spec.row_names, spec.col_names
    alice = [Strategy(nm, op, Scope.JOINT)
             for nm, op in zip(names_a, ewl_conjugate(spec.entangler, spec.lifted_alice))]
    bob = [Strategy(nm, op, Scope.JOINT)
           for nm, op in zip(names_b, ewl_conjugate(spec.entangler, spec.lifted_bob))]
    return GameSpec(spec.input_state, tuple(alice), tuple(bob), spec.basis, spec.outcomes,
                    spec.dims, None, spec.name)


@dataclass(frozen=True)
class DephasingChannel:
    """Off-diagonal suppression: coherences scale by ``1 - lam``; ``lam = 1`` fully dephases."""

    lam: float

    def __post_init__(self) -> None:
        lam = float(self.lam)
        if not 0.0 <= lam <= 1.0:
            raise ValidationError("dephasing.lambda", f"must lie in [0, 1], got {lam}")
        object.__setattr__(self, "lam", lam)


def dephase(rho: DensityMatrix, ch: DephasingChannel, basis: MeasurementBasis) -> DensityMatrix:
    if rho.dim != basis.dim:
        raise ValidationError("dephasing", f"basis dim {basis.dim} does not match density dim {rho.dim}")
    r = rho.entries
    b = basis.basis_change.entries if basis.basis_change is not None else None
    if b is not None:
        r = b.conj().T @ r @ b
    scale = np.full(r.shape, 1.0 - ch.lam)
    np.fill_diagonal(scale, 1.0)
    r = r * scale
    if b is not None:
        r = b @ r @ b.conj().T
        r = (r + r.conj().T) / 2
    return DensityMatrix(r)


def flip_game(input_state: StateVector | DensityMatrix, outcomes: OutcomeMap = PD_OUTCOMES,
              name: str = "flip") -> GameSpec:
    """Two qubits, each player chooses ``I`` (don't flip) or ``F`` (flip) on their own qubit."""
    ident, flip = UnitaryOperator(GATES["I"]), UnitaryOperator(GATES["X"])
    return GameSpec(
        input_state,
        (Strategy("I", ident, Scope.LOCAL_A), Strategy("F", flip, Scope.LOCAL_A)),
        (Strategy("I", ident, Scope.LOCAL_B), Strategy("F", flip, Scope.LOCAL_B)),
        MeasurementBasis.computational(2, 2),
        outcomes,
        (2, 2),
        name=name,
    )

