"""Scenario documents: JSON descriptions of playable games.

Structure is checked against ``scenario.schema.json``; semantics (unitarity,
normalization, label consistency) are checked while building the
:class:`~qgames.engine.GameSpec`. Every failure is a
:class:`~qgames.errors.ValidationError` naming the offending field.
"""

from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .analysis import ParametricFamily
from .channel import BitChannelSpec
from .engine import DephasingChannel, GameSpec, OutcomeMap, Scope, Strategy
from .errors import ValidationError
from .linalg import GATES, MeasurementBasis, StateVector, UnitaryOperator, product_labels

TOL_PARSE_NORM = 1e-9

_SQRT = re.compile(r"^(-?)\s*sqrt\((.+)\)$")


def parse_real(value: Any, field: str = "value") -> float:
    """Number or string: ``"3/5"``, ``"-0.25"``, ``"sqrt(2/5)"``, ``"-sqrt(1/2)"``."""
    if isinstance(value, bool):
        raise ValidationError(field, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        text = value.strip()
        m = _SQRT.match(text)
        try:
            if m:
                radicand = Fraction(m.group(2).replace(" ", ""))
                if radicand < 0:
                    raise ValidationError(field, f"negative radicand in {value!r}")
                out = math.sqrt(radicand) * (-1.0 if m.group(1) else 1.0)
            else:
                out = float(Fraction(text.replace(" ", "")))
        except (ValueError, ZeroDivisionError):
            raise ValidationError(field, f"cannot parse number {value!r}") from None
    else:
        raise ValidationError(field, f"expected a number, got {value!r}")
    if not math.isfinite(out):
        raise ValidationError(field, f"non-finite number {value!r}")
    return out


def parse_complex(value: Any, field: str = "value") -> complex:
    if isinstance(value, dict):
        return complex(parse_real(value["re"], f"{field}.re"), parse_real(value.get("im", 0), f"{field}.im"))
    return complex(parse_real(value, field), 0.0)


def parse_matrix(rows: Any, field: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows or any(not isinstance(r, list) for r in rows):
        raise ValidationError(field, "matrix must be a nonempty list of rows")
    width = len(rows)
    if any(len(r) != width for r in rows):
        raise ValidationError(field, f"matrix must be square ({width} rows)")
    return np.array([[parse_complex(x, f"{field}[{i}][{j}]") for j, x in enumerate(r)]
                     for i, r in enumerate(rows)], dtype=np.complex128)


def parse_unitary(rows: Any, field: str) -> UnitaryOperator:
    try:
        return UnitaryOperator(parse_matrix(rows, field))
    except ValidationError as exc:
        if exc.field == "operator":
            raise ValidationError(field, exc.message) from None
        raise


@lru_cache(maxsize=None)
def _schema_text() -> str:
    return resources.files("qgames").joinpath("scenario.schema.json").read_text(encoding="utf-8")


def scenario_schema(strict: bool = True) -> dict:
    schema = json.loads(_schema_text())
    if not strict:
        _relax(schema)
    return schema


def _relax(node: Any) -> None:
    if isinstance(node, dict):
        if node.get("additionalProperties") is False:
            del node["additionalProperties"]
        for v in node.values():
            _relax(v)
    elif isinstance(node, list):
        for v in node:
            _relax(v)


def _path(err: jsonschema.ValidationError) -> str:
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<document>"


@dataclass(frozen=True, eq=False)
class ScenarioDocument:
    """A validated scenario: the raw document plus the objects it describes."""

    raw: dict
    name: str
    dims: tuple[int, int]
    spec: GameSpec | None
    family: ParametricFamily | None
    family_p: float | None
    dephasing: DephasingChannel | None
    classical_noise: BitChannelSpec | None

    @property
    def outcomes(self) -> OutcomeMap:
        return self.skeleton.outcomes

    @property
    def skeleton(self) -> GameSpec:
        if self.spec is not None:
            return self.spec
        assert self.family is not None
        return self.family.skeleton

    def game(self, p: float | None = None) -> GameSpec:
        """The playable game; for a family, evaluated at ``p`` (or the document default)."""
        if self.family is not None and (p is not None or self.spec is None):
            p = self.family_p if p is None else p
            if p is None:
                raise ValidationError("family.p", "no parameter given and the family has no default p")
            return self.family.spec_at(p)
        if p is not None:
            raise ValidationError("family", "a parameter was given but the scenario declares no family")
        assert self.spec is not None
        return self.spec


def parse_scenario(text: str | bytes, strict: bool = True) -> ScenarioDocument:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValidationError("<document>", f"not UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError("<document>", f"invalid JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(scenario_schema(strict))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ValidationError(_path(err), err.message)
    return build_scenario(doc)


def build_scenario(doc: dict) -> ScenarioDocument:
    doc = copy.deepcopy(doc)
    d_a, d_b = doc["subsystem_dims"]
    joint = d_a * d_b

    meas = doc.get("measurement", {})
    labels = meas.get("labels") or product_labels(d_a, d_b)
    if len(labels) != joint:
        raise ValidationError("measurement.labels", f"{len(labels)} labels for joint dimension {joint}")
    change = parse_unitary(meas["basis_change"], "measurement.basis_change") if "basis_change" in meas else None
    if change is not None and change.dim != joint:
        raise ValidationError("measurement.basis_change", f"dim {change.dim} != {joint}")
    basis = MeasurementBasis(tuple(labels), change)

    outcomes_raw = doc["outcomes"]
    missing = [lbl for lbl in labels if lbl not in outcomes_raw]
    extra = [lbl for lbl in outcomes_raw if lbl not in labels]
    if missing or extra:
        raise ValidationError("outcomes", f"labels missing {missing} / unknown {extra}")
    outcomes = OutcomeMap.from_pairs([
        (parse_real(outcomes_raw[lbl][0], f"outcomes.{lbl}[0]"), parse_real(outcomes_raw[lbl][1], f"outcomes.{lbl}[1]"))
        for lbl in labels
    ])

    alice = _strategies(doc["alice_ops"], "alice_ops", Scope.LOCAL_A, (d_a, d_b))
    bob = _strategies(doc["bob_ops"], "bob_ops", Scope.LOCAL_B, (d_a, d_b))
    entangler = None
    if doc.get("entangler") is not None:
        entangler = parse_unitary(doc["entangler"], "entangler")
        if entangler.dim != joint:
            raise ValidationError("entangler", f"dim {entangler.dim} != {joint}")

    psi = _input_state(doc["input_state"], basis) if "input_state" in doc else None
    fam_raw = doc.get("family")
    if psi is None and fam_raw is None:
        raise ValidationError("input_state", "required unless a family is declared")
    if psi is not None:
        skeleton_state = psi
    elif fam_raw["x_label"] in labels:
        # the family supplies the input; any valid state serves for the skeleton
        skeleton_state = StateVector(basis.eigenstate(fam_raw["x_label"]))
    else:
        raise ValidationError("family.x_label", f"unknown basis label {fam_raw['x_label']!r}")
    skeleton = GameSpec(skeleton_state, alice, bob, basis, outcomes, (d_a, d_b), entangler, doc["name"])
    spec = skeleton if psi is not None else None

    family = family_p = None
    if fam_raw is not None:
        for key in ("x_label", "y_label"):
            if fam_raw[key] not in labels:
                raise ValidationError(f"family.{key}", f"unknown basis label {fam_raw[key]!r}")
        family = ParametricFamily(fam_raw["x_label"], fam_raw["y_label"], skeleton)
        if "p" in fam_raw:
            family_p = parse_real(fam_raw["p"], "family.p")
            if not 0.0 <= family_p <= 1.0:
                raise ValidationError("family.p", f"must lie in [0, 1], got {family_p}")

    dephasing = None
    if "dephasing" in doc:
        dephasing = DephasingChannel(parse_real(doc["dephasing"]["lambda"], "dephasing.lambda"))

    noise = None
    if "classical_noise" in doc:
        cn = doc["classical_noise"]
        mu = cn.get("bits_per_player", 1)
        noise = BitChannelSpec(cn["kind"], parse_real(cn["epsilon"], "classical_noise.epsilon"), mu)
        if 2 ** (2 * mu) != joint:
            raise ValidationError("classical_noise.bits_per_player",
                                  f"{mu} bits per player gives {2 ** (2 * mu)} outputs, game has {joint}")

    return ScenarioDocument(doc, doc["name"], (d_a, d_b), spec, family, family_p, dephasing, noise)


def _strategies(items: list, field: str, default_scope: Scope, dims: tuple[int, int]) -> tuple[Strategy, ...]:
    out = []
    for i, item in enumerate(items):
        where = f"{field}[{i}] ({item.get('name')!r})"
        scope = Scope(item.get("scope", default_scope.value))
        if "gate" in item:
            op = UnitaryOperator(GATES[item["gate"]])
        else:
            op = parse_unitary(item["matrix"], where)
        strat = Strategy(item["name"], op, scope)
        try:
            strat.lifted(dims)
        except ValidationError as exc:
            raise ValidationError(where, exc.message) from None
        out.append(strat)
    return tuple(out)


def _input_state(entries: list, basis: MeasurementBasis) -> StateVector:
    coeffs = np.zeros(basis.dim, dtype=np.complex128)
    seen = set()
    for i, e in enumerate(entries):
        where = f"input_state[{i}]"
        lbl = e["label"]
        if lbl not in basis.labels:
            raise ValidationError(f"{where}.label", f"unknown basis label {lbl!r}")
        if lbl in seen:
            raise ValidationError(f"{where}.label", f"duplicate label {lbl!r}")
        seen.add(lbl)
        if "amp" in e:
            amp = parse_complex(e["amp"], f"{where}.amp")
        else:
            prob = parse_real(e["prob"], f"{where}.prob")
            if prob < 0:
                raise ValidationError(f"{where}.prob", f"negative probability {prob}")
            amp = math.sqrt(prob) * e.get("sign", 1)
        coeffs[basis.index(lbl)] = amp
    norm2 = float(np.sum(np.abs(coeffs) ** 2))
    if abs(norm2 - 1.0) > TOL_PARSE_NORM:
        raise ValidationError("input_state", f"not normalized: sum |amp|^2 = {norm2!r}")
    coeffs /= math.sqrt(norm2)
    if basis.basis_change is not None:
        coeffs = basis.basis_change.entries @ coeffs
    return StateVector(coeffs)


BUNDLED = "scenarios"


def bundled_names() -> list[str]:
    root = resources.files("qgames").joinpath(BUNDLED)
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(ref: str | Path, strict: bool = True) -> ScenarioDocument:
    """Load a scenario from a file path, or by name from the bundled set."""
    path = Path(ref)
    if path.is_file():
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise ValidationError(str(path), f"cannot read: {exc}") from None
        return parse_scenario(data, strict)
    name = str(ref)
    if name.endswith(".json"):
        name = name[:-5]
    if name in bundled_names():
        return parse_scenario(resources.files("qgames").joinpath(BUNDLED, f"{name}.json").read_bytes(), strict)
    raise ValidationError(str(ref), "no such file or bundled scenario")
