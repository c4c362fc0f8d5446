"""Induced preferences, game-form classification, pure Nash equilibria and
one-parameter region analysis of expected payoff matrices.

Cells of a 2 x 2 matrix are named ``O1..O4`` row-major::

    A\\B   I    F
     I    O1   O2
     F    O3   O4
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .engine import GameSpec, PayoffMatrix, expected_payoffs, player_index
from .linalg import StateVector

TOL_TIE = 1e-9

Cell = tuple[int, int]


@dataclass(frozen=True)
class PreferenceOrdering:
    """One player's ranking of cells, best first; cells in a group are tied."""

    player: str
    groups: tuple[tuple[Cell, ...], ...]
    n_cols: int

    @property
    def ranking(self) -> tuple[Cell, ...]:
        return tuple(c for g in self.groups for c in g)

    @property
    def ties(self) -> tuple[tuple[Cell, ...], ...]:
        return tuple(g for g in self.groups if len(g) > 1)

    @property
    def is_strict(self) -> bool:
        return not self.ties

    def index_of(self, cell: Cell) -> int:
        """1-based row-major ``O`` index of ``cell``."""
        return cell[0] * self.n_cols + cell[1] + 1

    def o_indices(self) -> tuple[int, ...]:
        return tuple(self.index_of(c) for c in self.ranking)

    def __str__(self) -> str:
        return " > ".join(" = ".join(f"O{self.index_of(c)}" for c in g) for g in self.groups)

    def to_dict(self) -> dict:
        return {
            "player": self.player,
            "ordering": str(self),
            "groups": [[list(c) for c in g] for g in self.groups],
        }

    @classmethod
    def from_dict(cls, d: dict, n_cols: int) -> PreferenceOrdering:
        groups = tuple(tuple(tuple(c) for c in g) for g in d["groups"])
        return cls(d["player"], groups, n_cols)


def ordering_of(pm: PayoffMatrix, player: str | int, tol: float = TOL_TIE) -> PreferenceOrdering:
    """Cells sorted by the player's payoff, descending; near-equal payoffs grouped."""
    who = player_index(player)
    vals = pm.player(who)
    cells = sorted(pm.cell_ids(), key=lambda c: (-vals[c], c))
    groups: list[list[Cell]] = []
    prev = None
    for c in cells:
        if prev is not None and prev - vals[c] <= tol:
            groups[-1].append(c)
        else:
            groups.append([c])
        prev = vals[c]
    return PreferenceOrdering("AB"[who], tuple(tuple(sorted(g)) for g in groups), pm.m)


class FormLabel(str, Enum):
    PRISONERS_DILEMMA = "PrisonersDilemma"
    CHICKEN = "Chicken"
    OTHER = "Other"
    DEGENERATE = "Degenerate"


# best-first O indices for (Alice, Bob)
NAMED_FORMS: dict[FormLabel, tuple[tuple[int, ...], tuple[int, ...]]] = {
    FormLabel.PRISONERS_DILEMMA: ((3, 1, 4, 2), (2, 1, 4, 3)),
    FormLabel.CHICKEN: ((3, 1, 2, 4), (2, 1, 3, 4)),
}

# swapping both players' strategy labels maps O1<->O4 and O2<->O3
_SWAP_BOTH = {1: 4, 2: 3, 3: 2, 4: 1}


@dataclass(frozen=True)
class GameForm:
    label: FormLabel
    signature: tuple[PreferenceOrdering, PreferenceOrdering]
    relabeled: bool = False

    @property
    def name(self) -> str:
        if self.label is FormLabel.OTHER:
            return f"Other(A: {self.signature[0]}; B: {self.signature[1]})"
        suffix = " [strategies relabeled]" if self.relabeled else ""
        return f"{self.label.value}{suffix}"

    def __str__(self) -> str:
        return self.name

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "name": self.name,
            "relabeled": self.relabeled,
            "signature": [o.to_dict() for o in self.signature],
        }


def _strict_extensions(order: PreferenceOrdering) -> list[tuple[int, ...]]:
    per_group = [list(itertools.permutations(order.index_of(c) for c in g)) for g in order.groups]
    return [tuple(i for part in combo for i in part) for combo in itertools.product(*per_group)]


def _match(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[FormLabel, bool] | None:
    for label, (pat_a, pat_b) in NAMED_FORMS.items():
        if a == pat_a and b == pat_b:
            return label, False
    swapped_a = tuple(_SWAP_BOTH[i] for i in a)
    swapped_b = tuple(_SWAP_BOTH[i] for i in b)
    for label, (pat_a, pat_b) in NAMED_FORMS.items():
        if swapped_a == pat_a and swapped_b == pat_b:
            return label, True
    return None


def classify(pm: PayoffMatrix, tol: float = TOL_TIE) -> GameForm:
    """Name the game form of a 2 x 2 payoff matrix.

    Named forms are matched as given and after swapping both players'
    strategy labels together (``relabeled=True``). If a tie could be broken
    either way into a named form, the result is ``Degenerate``.
    """
    sig = (ordering_of(pm, "A", tol), ordering_of(pm, "B", tol))
    if (pm.n, pm.m) != (2, 2):
        return GameForm(FormLabel.OTHER, sig)
    if sig[0].is_strict and sig[1].is_strict:
        hit = _match(sig[0].o_indices(), sig[1].o_indices())
        if hit is None:
            return GameForm(FormLabel.OTHER, sig)
        return GameForm(hit[0], sig, hit[1])
    for a in _strict_extensions(sig[0]):
        for b in _strict_extensions(sig[1]):
            if _match(a, b) is not None:
                return GameForm(FormLabel.DEGENERATE, sig)
    return GameForm(FormLabel.OTHER, sig)


def pure_nash(pm: PayoffMatrix, tol: float = TOL_TIE) -> list[Cell]:
    """Cells where each player's payoff is a weak best response to the other's choice."""
    a, b = pm.player(0), pm.player(1)
    best_a = a.max(axis=0)  # over Alice's rows, per column
    best_b = b.max(axis=1)  # over Bob's columns, per row
    return [(j, k) for j, k in pm.cell_ids()
            if a[j, k] >= best_a[k] - tol and b[j, k] >= best_b[j] - tol]


@dataclass(frozen=True, eq=False)
class ParametricFamily:
    """Input states ``sqrt(p)|x> + sqrt(1-p)|y>`` over measurement eigenstates ``x != y``."""

    x_label: str
    y_label: str
    skeleton: GameSpec

    def __post_init__(self) -> None:
        if self.x_label == self.y_label:
            raise ValidationError("family", "x_label and y_label must differ")
        if self.skeleton.is_mixed:
            raise ValidationError("family", "skeleton must use a pure input state")
        self.skeleton.basis.index(self.x_label)
        self.skeleton.basis.index(self.y_label)

    def state_at(self, p: float) -> StateVector:
        if not 0.0 <= p <= 1.0:
            raise ValidationError("family.p", f"must lie in [0, 1], got {p}")
        basis = self.skeleton.basis
        vec = np.sqrt(p) * basis.eigenstate(self.x_label) + np.sqrt(1.0 - p) * basis.eigenstate(self.y_label)
        return StateVector(vec)

    def spec_at(self, p: float) -> GameSpec:
        return self.skeleton.with_input(self.state_at(p))

    def payoffs_at(self, p: float) -> PayoffMatrix:
        return expected_payoffs(self.spec_at(p))


class NonAffineFamily(ValidationError):
    pass


def affine_coefficients(fam: ParametricFamily, tol: float = TOL_TIE) -> tuple[np.ndarray, np.ndarray]:
    """Intercepts and slopes ``(c0, c1)`` of every payoff cell as a function of ``p``.

    Coefficients come from the endpoints ``p = 0, 1``; interior points must lie
    on the resulting lines within ``tol``.
    """
    c0 = fam.payoffs_at(0.0).cells
    c1 = fam.payoffs_at(1.0).cells - c0
    for t in (0.25, 0.5, 0.75):
        dev = np.abs(fam.payoffs_at(t).cells - (c0 + c1 * t))
        worst = float(dev.max())
        if worst > tol:
            j, k, who = np.unravel_index(int(dev.argmax()), dev.shape)
            raise NonAffineFamily(
                "family",
                f"payoffs are not affine in p: player {'AB'[who]} cell ({j},{k}) "
                f"deviates by {worst:.3e} at p={t}",
            )
    return c0, c1


@dataclass(frozen=True)
class Region:
    lo: float
    hi: float
    ordering_a: PreferenceOrdering
    ordering_b: PreferenceOrdering
    form: GameForm

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def to_dict(self) -> dict:
        return {
            "interval": [self.lo, self.hi],
            "ordering_A": self.ordering_a.to_dict(),
            "ordering_B": self.ordering_b.to_dict(),
            "form": self.form.to_dict(),
        }


@dataclass(frozen=True)
class RegionReport:
    breakpoints: tuple[float, ...]
    regions: tuple[Region, ...]

    def region_at(self, p: float) -> Region:
        for r in self.regions:
            if r.lo < p < r.hi:
                return r
        raise ValueError(f"p={p} is a breakpoint or outside (0, 1)")

    def within(self, lo: float, hi: float) -> tuple[Region, ...]:
        """Regions lying inside ``[lo, hi]``."""
        return tuple(r for r in self.regions if r.lo >= lo - TOL_TIE and r.hi <= hi + TOL_TIE)

    def to_dict(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "regions": [r.to_dict() for r in self.regions]}


def _line_crossings(c0: np.ndarray, c1: np.ndarray, tol: float) -> list[float]:
    out = []
    flat0, flat1 = c0.ravel(), c1.ravel()
    for i, j in itertools.combinations(range(flat0.size), 2):
        dslope = flat1[i] - flat1[j]
        if abs(dslope) <= tol:
            continue
        p = (flat0[j] - flat0[i]) / dslope
        if tol < p < 1.0 - tol:
            out.append(float(p))
    return out


def _payoffs_from_lines(c0: np.ndarray, c1: np.ndarray, p: float, like: PayoffMatrix) -> PayoffMatrix:
    return PayoffMatrix(c0 + c1 * p, like.row_names, like.col_names)


def region_analysis(fam: ParametricFamily, tol: float = TOL_TIE) -> RegionReport:
    """Split ``(0, 1)`` at every crossing of two payoff lines of the same player."""
    c0, c1 = affine_coefficients(fam, tol)
    crossings = sorted(
        _line_crossings(c0[:, :, 0], c1[:, :, 0], tol) + _line_crossings(c0[:, :, 1], c1[:, :, 1], tol)
    )
    breakpoints: list[float] = []
    for p in crossings:
        if not breakpoints or p - breakpoints[-1] > tol:
            breakpoints.append(p)
    template = fam.payoffs_at(0.0)
    edges = [0.0, *breakpoints, 1.0]
    regions = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        pm = _payoffs_from_lines(c0, c1, 0.5 * (lo + hi), template)
        regions.append(Region(lo, hi, ordering_of(pm, "A", tol), ordering_of(pm, "B", tol), classify(pm, tol)))
    return RegionReport(tuple(breakpoints), tuple(regions))


def emit_payoff_curves(fam: ParametricFamily, player: str | int, grid: int) -> np.ndarray:
    """Rows ``(p, O1, O2, ...)`` of one player's payoffs on a uniform grid over ``[0, 1]``."""
    if grid < 2:
        raise ValidationError("grid", f"need at least 2 points, got {grid}")
    c0, c1 = affine_coefficients(fam)
    who = player_index(player)
    ps = np.linspace(0.0, 1.0, grid)
    vals = c0[:, :, who].ravel()[None, :] + ps[:, None] * c1[:, :, who].ravel()[None, :]
    return np.column_stack([ps, vals])


def positive_affine(pm: PayoffMatrix, player: str | int, scale: float, shift: float) -> PayoffMatrix:
    """Apply ``v -> scale * v + shift`` to one player's payoffs."""
    if scale <= 0:
        raise ValidationError("scale", "must be positive")
    cells = pm.cells.copy()
    who = player_index(player)
    cells[:, :, who] = scale * cells[:, :, who] + shift
    return PayoffMatrix(cells, pm.row_names, pm.col_names)


def cell_labels(pm: PayoffMatrix, cells: Sequence[Cell]) -> list[str]:
    return [pm.cell_name(c) for c in cells]
