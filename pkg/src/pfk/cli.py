"""``pfk`` command-line driver.

Exit codes: 0 when everything checked, 1 when something was checked and
failed, 2 for usage, I/O, parse and elaboration problems.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from pfk import __version__
from pfk.errors import MissingParameter, PfkError, TransferFailure
from pfk.rewriting import DEFAULT_MAX_STEPS, ReductionBudget

OK, FAILED, USAGE = 0, 1, 2


@dataclass
class Record:
    name: str
    kind: str
    status: str  # pass / fail / error
    cause: str | None = None
    position: str | None = None


@dataclass
class Report:
    command: list
    records: list = field(default_factory=list)
    exit_code: int = OK
    extra: dict = field(default_factory=dict)

    def add(self, *args, **kw) -> Record:
        r = Record(*args, **kw)
        self.records.append(r)
        return r

    def error(self, e: Exception, name="", kind=None, position=None) -> "Report":
        cause = f"{type(e).__name__}: {e}"
        self.add(name, kind or type(e).__name__, "error", cause, position)
        self.exit_code = USAGE
        return self

    def finish(self) -> "Report":
        if self.exit_code == OK and any(r.status != "pass" for r in self.records):
            self.exit_code = FAILED
        return self

    def summary(self) -> dict:
        count = lambda s: sum(r.status == s for r in self.records)
        return {"total": len(self.records), "passed": count("pass"), "failed": count("fail"), "errors": count("error")}

    def to_json(self) -> str:
        doc = {
            "tool_version": __version__,
            "command": self.command,
            "records": [asdict(r) for r in self.records],
            "summary": self.summary(),
            "exit_code": self.exit_code,
            **self.extra,
        }
        return json.dumps(doc, indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        lines = []
        for r in self.records:
            parts = [r.status.upper(), r.kind, r.name]
            if r.cause:
                where = f"{r.position}: " if r.position else ""
                parts.append(f"[{where}{r.cause}]")
            lines.append(" ".join(p for p in parts if p))
        s = self.summary()
        lines.append(f"# {s['passed']} passed, {s['failed']} failed, {s['errors']} errors; exit {self.exit_code}")
        return "\n".join(lines)


# -- commands -----------------------------------------------------------------------


def _budget(args) -> ReductionBudget:
    return ReductionBudget(args.budget)


def cmd_check(args) -> Report:
    from pfk.surface import item_name, load_items
    from pfk.typecheck import Elaborator, Theory

    rep = Report(["check", *args.files])
    try:
        loaded = load_items(args.files)
    except PfkError as e:
        return rep.error(e)
    if loaded.prelude:
        from pfk.prelude import prelude_signature

        base = prelude_signature()
        theory = Theory(base.entries, prelude_size=len(base.entries))
    else:
        theory = Theory()
    el = Elaborator(theory, _budget(args))
    for loc in loaded.items:
        kind, name = type(loc.item).__name__, item_name(loc.item)
        try:
            el.add_item(loc.item)
        except PfkError as e:
            rep.add(name, kind, "fail", f"{e.kind}: {e.message}", loc.where())
        else:
            rep.add(name, kind, "pass")
    return rep.finish()


def _load_interp_inputs(args, rep: Report):
    """Source and target theories plus the parameter map, or None after an error."""
    from pfk.interp import ParamMap
    from pfk.surface import load_theory, parse_param_map

    budget = _budget(args)
    stage = "source"
    try:
        src = load_theory([args.source], budget=budget)
        stage = "target"
        tgt = load_theory([args.target], budget=budget)
        stage = "parameters"
        text = Path(args.params).read_text(encoding="utf-8")
        params = ParamMap.from_raw(parse_param_map(text, args.params), src)
    except OSError as e:
        rep.error(e, stage)
        return None
    except MissingParameter as e:
        rep.error(e.in_file(args.params), e.constant)
        return None
    except PfkError as e:
        rep.error(e, stage)
        return None
    return src, tgt, params


def _obligation_records(rep: Report, obligations):
    for ob in obligations:
        rep.add(ob.subject, ob.kind, "pass" if ob.passed else "fail", ob.cause)


def _run_obligations(rep, src, tgt, params, budget, include_prelude=False) -> bool:
    from pfk.interp import check_interpretation

    try:
        obs = check_interpretation(src, tgt, params, budget, include_prelude=include_prelude)
    except MissingParameter as e:
        rep.error(e, e.constant)
        return False
    _obligation_records(rep, obs)
    return all(o.passed for o in obs)


def cmd_interp(args) -> Report:
    rep = Report(["interp", args.source, args.target, args.params])
    loaded = _load_interp_inputs(args, rep)
    if loaded is None:
        return rep
    _run_obligations(rep, *loaded, _budget(args))
    return rep.finish()


def cmd_selftest(args) -> Report:
    from pfk.prelude import verify_prelude

    rep = Report(["selftest"])
    _obligation_records(rep, verify_prelude(_budget(args)))
    return rep.finish()


def emitted_text(target_path: str, records) -> str:
    from pfk.surface import print_item

    lines = ["(; Generated by pfk transfer. ;)", f"require {Path(target_path).stem}.", ""]
    for r in records:
        for item in r.emitted:
            lines.append(print_item(item))
            lines.append("")
    return "\n".join(lines)


def cmd_transfer(args) -> Report:
    from pfk.interp import transfer_items
    from pfk.surface import load_items

    rep = Report(["transfer", args.source, args.target, args.params, args.theorems, "--out", args.out])
    if args.assume_checked:
        rep.command.append("--assume-checked")
    loaded = _load_interp_inputs(args, rep)
    if loaded is None:
        return rep
    src, tgt, params = loaded
    budget = _budget(args)
    if not args.assume_checked and not _run_obligations(rep, src, tgt, params, budget):
        return rep.finish()
    try:
        base = set(load_items([args.source]).files)
        items = [loc.item for loc in load_items([args.theorems]).items if loc.path not in base]
    except PfkError as e:
        return rep.error(e, "theorems")
    try:
        records, _ = transfer_items(src, tgt, params, items, budget)
    except TransferFailure as e:
        rep.add("", "Transfer", "fail", f"{e.kind}: {e}")
        return rep.finish()
    except PfkError as e:
        return rep.error(e, "theorems", position=args.theorems)
    for r in records:
        rep.add(r.name, "Transfer" + r.kind, "pass")
    try:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(emitted_text(args.target, records), encoding="utf-8")
    except OSError as e:
        return rep.error(e, "output")
    rep.extra["output"] = args.out
    return rep.finish()


def cmd_proptest(args) -> Report:
    from pfk.properties import run_all

    rep = Report(["proptest", "--seed", str(args.seed), "--scale", str(args.scale)])
    for r in run_all(seed=args.seed, scale=args.scale):
        cause = None
        if r.failures:
            cause = f"{len(r.failures)} of {r.total} failed; first: {r.failures[0]!r}"
        rep.add(r.name, "Property", "pass" if r.ok else "fail", cause)
    return rep.finish()


def cmd_prelude(args) -> Report:
    from pfk.prelude import write_reference_files

    rep = Report(["prelude", "--out", args.out])
    try:
        for p in write_reference_files(args.out):
            rep.add(str(p), "Written", "pass")
    except OSError as e:
        return rep.error(e, "output")
    return rep.finish()


# -- argument parsing ---------------------------------------------------------------------


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=_positive, default=DEFAULT_MAX_STEPS, help="reduction step limit per check")
    common.add_argument("--format", choices=("text", "json"), default="text", help="report format")

    p = argparse.ArgumentParser(prog="pfk", description="Check theories and interpretations between them.")
    p.add_argument("--version", action="version", version=f"pfk {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="parse, elaborate and check .pfk files")
    c.add_argument("files", nargs="+")
    c.set_defaults(func=cmd_check)

    def interp_args(q):
        q.add_argument("source", help="source theory (.pfk)")
        q.add_argument("target", help="target theory (.pfk)")
        q.add_argument("params", help="parameter map (.pfm)")

    i = sub.add_parser("interp", parents=[common], help="check the obligations of an interpretation")
    interp_args(i)
    i.set_defaults(func=cmd_interp)

    t = sub.add_parser("transfer", parents=[common], help="translate a theorem file into the target theory")
    interp_args(t)
    t.add_argument("theorems", help="theorem file over the source theory (.pfk)")
    t.add_argument("--out", required=True, help="where to write the translated .pfk file")
    t.add_argument("--assume-checked", action="store_true", help="skip re-checking the interpretation obligations")
    t.set_defaults(func=cmd_transfer)

    s = sub.add_parser("selftest", parents=[common], help="check the prelude's self-interpretation")
    s.set_defaults(func=cmd_selftest)

    pt = sub.add_parser("proptest", parents=[common], help="run the randomised property suites")
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--scale", type=float, default=1.0, help="multiplier on the default sample counts")
    pt.set_defaults(func=cmd_proptest)

    pr = sub.add_parser("prelude", parents=[common], help="write the reference prelude.pfk and prelude.pfm")
    pr.add_argument("--out", default=".", help="directory to write into")
    pr.set_defaults(func=cmd_prelude)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE
    report = args.func(args)
    print(report.to_json() if args.format == "json" else report.to_text())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
