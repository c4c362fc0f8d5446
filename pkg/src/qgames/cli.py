"""Command-line entry point: ``qgames <subcommand> <scenario> [options]``.

Exit codes: 0 success, 2 validation or I/O error, 3 numerical-invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis, channel, engine
from .analysis import PreferenceOrdering
from .engine import PayoffMatrix
from .errors import InvariantViolation, ValidationError
from .linalg import density_from_pure
from .scenario import ScenarioDocument, bundled_names, load_scenario

SUBCOMMANDS = ("payoff", "classify", "nash", "regions", "curves", "channel", "mixed-sweep", "dephase-check")

TOL_REPRODUCTION = 1e-10
TOL_DEPHASE = 1e-12

EXIT_OK, EXIT_VALIDATION, EXIT_INVARIANT = 0, 2, 3


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class Table:
    header: list[str]
    rows: list[list]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()

    def to_text(self) -> str:
        cells = [self.header] + [[fmt_short(v) for v in row] for row in self.rows]
        widths = [max(len(str(r[i])) for r in cells) for i in range(len(self.header))]
        lines = ["  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"header": self.header, "rows": [[_jsonable(v) for v in r] for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> Table:
        return cls(list(d["header"]), [list(r) for r in d["rows"]])


def fmt_short(v) -> str:
    if isinstance(v, (float, np.floating)):
        # display only: hide rounding residue such as 1.8e-33
        return f"{0.0 if abs(v) < 1e-14 else float(v):.6g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class RunReport:
    """Everything one CLI run computed; serializes to JSON and back."""

    subcommand: str
    scenario: str
    payoffs: PayoffMatrix | None = None
    orderings: tuple[PreferenceOrdering, PreferenceOrdering] | None = None
    form: dict | None = None
    nash: list[tuple[int, int]] | None = None
    regions: dict | None = None
    channel: dict | None = None
    extra: dict = field(default_factory=dict)
    table: Table | None = None

    def to_dict(self) -> dict:
        d: dict = {"subcommand": self.subcommand, "scenario": self.scenario}
        if self.payoffs is not None:
            d["payoffs"] = self.payoffs.to_dict()
        if self.orderings is not None:
            d["orderings"] = [o.to_dict() for o in self.orderings]
        if self.form is not None:
            d["form"] = self.form
        if self.nash is not None:
            d["nash"] = [list(c) for c in self.nash]
        if self.regions is not None:
            d["regions"] = self.regions
        if self.channel is not None:
            d["channel"] = self.channel
        if self.extra:
            d["extra"] = self.extra
        if self.table is not None:
            d["table"] = self.table.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        payoffs = PayoffMatrix.from_dict(d["payoffs"]) if "payoffs" in d else None
        orderings = None
        if "orderings" in d:
            n_cols = len(d["payoffs"]["cols"]) if "payoffs" in d else 2
            a, b = (PreferenceOrdering.from_dict(o, n_cols) for o in d["orderings"])
            orderings = (a, b)
        return cls(
            subcommand=d["subcommand"],
            scenario=d["scenario"],
            payoffs=payoffs,
            orderings=orderings,
            form=d.get("form"),
            nash=[tuple(c) for c in d["nash"]] if "nash" in d else None,
            regions=d.get("regions"),
            channel=d.get("channel"),
            extra=d.get("extra", {}),
            table=Table.from_dict(d["table"]) if "table" in d else None,
        )

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        return cls.from_dict(json.loads(text))


def payoff_table(pm: PayoffMatrix) -> Table:
    return Table(["row", "col", "payoff_A", "payoff_B"],
                 [[pm.row_names[j], pm.col_names[k], pm.cells[j, k, 0], pm.cells[j, k, 1]] for j, k in pm.cell_ids()])


def render_matrix(pm: PayoffMatrix) -> str:
    head = ["A\\B", *pm.col_names]
    body = [[pm.row_names[j], *(f"({fmt_short(pm.cells[j, k, 0])}, {fmt_short(pm.cells[j, k, 1])})"
                                 for k in range(pm.m))] for j in range(pm.n)]
    widths = [max(len(r[i]) for r in [head, *body]) for i in range(len(head))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in [head, *body])


def _game_payoffs(doc: ScenarioDocument, param: float | None) -> PayoffMatrix:
    spec = doc.game(param)
    if doc.dephasing is not None:
        rho = engine.dephase(density_from_pure(spec.input_state), doc.dephasing, spec.basis)
        return engine.expected_payoffs_mixed_state(spec, rho)
    return engine.expected_payoffs(spec)


def cmd_payoff(doc: ScenarioDocument, args: argparse.Namespace) -> RunReport:
    pm = _game_payoffs(doc, args.param)
    return RunReport("payoff", doc.name, payoffs=pm, table=payoff_table(pm))


def cmd_classify(doc: ScenarioDocument, args: argparse.Namespace) -> RunReport:
    pm = _game_payoffs(doc, args.param)
    oa, ob = analysis.ordering_of(pm, "A"), analysis.ordering_of(pm, "B")
    form = analysis.classify(pm)
    table = Table(["player", "ordering", "form"], [["A", str(oa), form.name], ["B", str(ob), form.name]])
    return RunReport("classify", doc.name, payoffs=pm, orderings=(oa, ob), form=form.to_dict(), table=table)


def cmd_nash(doc: ScenarioDocument, args: argparse.Namespace) -> RunReport:
    pm = _game_payoffs(doc, args.param)
    eq = analysis.pure_nash(pm)
    table = Table(["row", "col", "payoff_A", "payoff_B"],
                  [[pm.row_names[j], pm.col_names[k], pm.cells[j, k, 0], pm.cells[j, k, 1]] for j, k in eq])
    return RunReport("nash", doc.name, payoffs=pm, nash=eq, table=table)


def _require_family(doc: ScenarioDocument, sub: str) -> analysis.ParametricFamily:
    if doc.family is None:
        raise ValidationError("family", f"subcommand '{sub}' needs a scenario that declares a family")
    return doc.family


def cmd_regions(doc: ScenarioDocument, args: argparse.Namespace) -> RunReport:
    rep = analysis.region_analysis(_require_family(doc, "regions"))
    table = Table(["lo", "hi", "ordering_A", "ordering_B", "form"],
                  [[r.lo, r.hi, str(r.ordering_a), str(r.ordering_b), r.form.name] for r in rep.regions])
    return RunReport("regions", doc.name, regions=rep.to_dict(), table=table)


def cmd_curves(doc: ScenarioDocument, args: argparse.Namespace) -> RunReport:
    fam = _require_family(doc, "curves")
    a = analysis.emit_payoff_curves(fam, "A", args.grid)
    b = analysis.emit_payoff_curves(fam, "B", args.grid)
    cells = a.shape[1] - 1
    header = ["p", *(f"A_O{i + 1}" for i in range(cells)), *(f"B_O{i + 1}" for i in range(cells))]
    rows = [[*ra, *rb[1:]] for ra, rb in zip(a.tolist(), b.tolist())]
    return RunReport("curves", doc.name, table=Table(header, rows))


def cmd_channel(doc: ScenarioDocument, args: argparse.Namespace) -> RunReport:
    out: dict = {}
    table = None
    payoffs = None
    if doc.spec is not None or doc.family is not None:
        spec = doc.game(args.param if doc.classical_noise is None else None)
        ch = channel.channel_from_game(spec)
        quantum = engine.expected_payoffs(spec)
        via_channel = channel.expected_payoffs_channel(ch, spec.outcomes)
        diff = quantum.max_abs_diff(via_channel)
        out["game_channel"] = ch.to_dict()
        out["game_factorization"] = _factorization(ch)
        out["reproduction_max_diff"] = diff
        payoffs = via_channel
        table = Table(["input", *ch.outputs], [[name, *row] for name, row in zip(ch.inputs, ch.probs.tolist())])
        if diff >= TOL_REPRODUCTION:
            raise InvariantViolation(f"channel does not reproduce the game: max difference {diff:.3e}")
    if doc.classical_noise is not None:
        spec_b = doc.classical_noise
        if args.param is not None:
            spec_b = channel.BitChannelSpec(spec_b.kind, args.param, spec_b.bits_per_player)
        ch = channel.bit_channel(spec_b)
        payoffs = channel.expected_payoffs_channel(ch, doc.outcomes)
        out["noise"] = {"kind": spec_b.kind.value, "epsilon": spec_b.epsilon,
                        "bits_per_player": spec_b.bits_per_player}
        out["noise_channel"] = ch.to_dict()
        out["noise_factorization"] = _factorization(ch)
        table = Table(["input", *ch.outputs], [[name, *row] for name, row in zip(ch.inputs, ch.probs.tolist())])
    return RunReport("channel", doc.name, payoffs=payoffs, channel=out, table=table)


def _factorization(ch: channel.ChannelMatrix) -> dict:
    try:
        return channel.factorization_test(ch).to_dict()
    except ValidationError as exc:
        return {"error": str(exc)}


def cmd_mixed_sweep(doc: ScenarioDocument, args: argparse.Namespace) -> RunReport:
    if doc.outcomes.size != 4:
        raise ValidationError("outcomes", "mixed-sweep needs a game with four measurement results")
    data = channel.sweep_epsilon(args.rule, args.grid, doc.outcomes)
    table = Table(["epsilon", "payoff_A", "payoff_B"], data.tolist())
    peak = int(np.argmax(data[:, 1]))
    return RunReport("mixed-sweep", doc.name, table=table,
                     extra={"rule": args.rule, "max_payoff_A": float(data[peak, 1]),
                            "argmax_epsilon": float(data[peak, 0])})


def cmd_dephase_check(doc: ScenarioDocument, args: argparse.Namespace) -> RunReport:
    spec = doc.game(args.param)
    rho = density_from_pure(spec.input_state) if not spec.is_mixed else spec.input_state
    mats = {lam: engine.expected_payoffs_mixed_state(
        spec, engine.dephase(rho, engine.DephasingChannel(lam), spec.basis)) for lam in (0.0, 1.0)}
    diff = mats[0.0].max_abs_diff(mats[1.0])
    rows = [[lam, pm.row_names[j], pm.col_names[k], pm.cells[j, k, 0], pm.cells[j, k, 1]]
            for lam, pm in mats.items() for j, k in pm.cell_ids()]
    return RunReport("dephase-check", doc.name, payoffs=mats[1.0],
                     table=Table(["lambda", "row", "col", "payoff_A", "payoff_B"], rows),
                     extra={"payoffs_lambda_0": mats[0.0].to_dict(), "max_abs_diff": diff,
                            "invariant": diff <= TOL_DEPHASE})


HANDLERS = {
    "payoff": cmd_payoff,
    "classify": cmd_classify,
    "nash": cmd_nash,
    "regions": cmd_regions,
    "curves": cmd_curves,
    "channel": cmd_channel,
    "mixed-sweep": cmd_mixed_sweep,
    "dephase-check": cmd_dephase_check,
}


def render_text(rep: RunReport) -> str:
    parts = [f"# {rep.subcommand}: {rep.scenario}"]
    if rep.payoffs is not None and rep.subcommand != "channel":
        parts.append(render_matrix(rep.payoffs))
    if rep.orderings is not None:
        parts += [f"Alice: {rep.orderings[0]}", f"Bob:   {rep.orderings[1]}"]
    if rep.form is not None:
        parts.append(f"form: {rep.form['name']}")
    if rep.nash is not None and rep.payoffs is not None:
        names = analysis.cell_labels(rep.payoffs, rep.nash)
        parts.append("pure Nash: " + (", ".join(names) if names else "none"))
    if rep.regions is not None:
        parts.append("breakpoints: " + ", ".join(fmt_short(b) for b in rep.regions["breakpoints"]))
    if rep.table is not None and rep.subcommand in ("regions", "curves", "channel", "mixed-sweep", "dephase-check"):
        parts.append(rep.table.to_text())
    if rep.channel is not None:
        ch = rep.channel
        if "reproduction_max_diff" in ch:
            parts.append(f"game channel reproduces payoffs: max diff {ch['reproduction_max_diff']:.3e}")
            parts.append(f"game channel correlated: {ch['game_factorization'].get('correlated')}")
        if "noise" in ch:
            n = ch["noise"]
            parts.append(f"{n['kind']} channel, epsilon={fmt_short(n['epsilon'])}, "
                         f"correlated: {ch['noise_factorization'].get('correlated')}")
        if rep.payoffs is not None:
            parts.append(render_matrix(rep.payoffs))
    for key, val in rep.extra.items():
        if not isinstance(val, dict):
            parts.append(f"{key}: {fmt_short(val) if isinstance(val, float) else val}")
    return "\n".join(parts) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qgames", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("scenario", help=f"scenario JSON path or bundled name ({', '.join(bundled_names())})")
    ap.add_argument("--out", type=Path, help="directory for <scenario>.<subcommand>.csv/.json outputs")
    ap.add_argument("--grid", type=int, default=101, help="grid size for curves and mixed-sweep (default 101)")
    ap.add_argument("--format", choices=("csv", "json", "table"), default="table", help="stdout format")
    ap.add_argument("--rule", choices=("paper", "prescribed", "derivative"), default="paper",
                    help="mixed-sweep profile: p = q = 1 - eps ('paper'/'prescribed') or the slope-based "
                         "symmetric equilibrium ('derivative')")
    ap.add_argument("--param", type=_param, default=None,
                    help="family parameter p, or channel epsilon for scenarios with classical noise")
    ap.add_argument("--strict", action="store_true", help="reject unknown fields in the scenario")
    return ap


def _param(text: str) -> float:
    from .scenario import parse_real

    try:
        return parse_real(text, "--param")
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(exc.message) from None


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        doc = load_scenario(args.scenario, strict=args.strict)
        rep = HANDLERS[args.subcommand](doc, args)
        if args.out is not None:
            write_outputs(rep, args.out)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.format == "json":
        stdout.write(rep.to_json())
    elif args.format == "csv":
        stdout.write(rep.table.to_csv() if rep.table is not None else "")
    else:
        stdout.write(render_text(rep))
    return EXIT_OK


def write_outputs(rep: RunReport, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{rep.scenario}.{rep.subcommand}"
    written = []
    if rep.table is not None:
        path = out_dir / f"{stem}.csv"
        path.write_text(rep.table.to_csv(), encoding="utf-8", newline="")
        written.append(path)
    path = out_dir / f"{stem}.json"
    path.write_text(rep.to_json(), encoding="utf-8", newline="")
    written.append(path)
    return written


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
