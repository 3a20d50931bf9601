"""Command-line front end.

Exit codes: 0 success or property holds, 1 property fails (a witness is
written), 2 usage, parse or configuration error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .automata import enumerate_contexts, realized_contexts, synthesize
from .core import Event, Program
from .errors import CapExceeded, ConfigError, NotAnExecution, UspecError
from .lang import (AxiomSet, bind, classify, parse_axioms, parse_program, parse_trace,
                   print_axiom_set, print_prefix, print_program, print_trace)
from .meta import check_extensibility, check_refinability, witness_program
from .opmodel import (LoopStats, OperationalModel, analyze, operational_loop, state_footprint,
                      t_violation)
from .oracle import enumerate_valid_graphs, equivalence_check, iter_valid_traces
from .uhb import is_valid, is_valid_trace, load_graph

SCHEMA = 1


# -- helpers ------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}") from None


def _axioms(path: str) -> AxiomSet:
    return parse_axioms(_read(path), path)


def _program(path: str) -> Program:
    return parse_program(_read(path), path)


def _trace(path: str, program: Program, axiom_set: AxiomSet):
    return parse_trace(_read(path), program, axiom_set.stages, path)


def _line(trace) -> str:
    return " ".join(e.token for e in trace)


class _Out:
    def __init__(self, args):
        self.json = getattr(args, "out", "text") == "json"
        self.witness_dir = Path(getattr(args, "witness_dir", "witnesses"))
        self.written: list[str] = []

    def emit(self, text: str, obj: dict):
        if self.json:
            obj = {"schema": SCHEMA, **obj}
            if self.written:
                obj["witness_files"] = self.written
            sys.stdout.write(json.dumps(obj, indent=1, sort_keys=True) + "\n")
        else:
            sys.stdout.write(text if text.endswith("\n") or not text else text + "\n")
            for w in self.written:
                sys.stdout.write(f"witness: {w}\n")

    def witness(self, name: str, content: str) -> str:
        self.witness_dir.mkdir(parents=True, exist_ok=True)
        p = self.witness_dir / name
        p.write_text(content if content.endswith("\n") else content + "\n", encoding="utf-8")
        self.written.append(str(p))
        return str(p)


def _check_t(t: int):
    if t < 1:
        raise ConfigError("--t must be at least 1")


# -- commands -----------------------------------------------------------------


def cmd_parse(args) -> int:
    out = _Out(args)
    text = _read(args.file)
    if args.file.endswith(".uprog"):
        prog = parse_program(text, args.file)
        out.emit(print_program(prog), {"kind": "program", "cores": prog.num_cores,
                                       "streams": [list(s) for s in prog.streams],
                                       "operations": list(prog.domain.names)})
    else:
        s = parse_axioms(text, args.file)
        out.emit(print_axiom_set(s), {"kind": "axioms", "stages": list(s.stages.names),
                                      "predicates": [p.name for p in s.predicates],
                                      "axioms": [a.name for a in s.axioms]})
    return 0


def cmd_classify(args) -> int:
    out = _Out(args)
    s = _axioms(args.axioms)
    rows = []
    for ax in s.axioms:
        r = classify(ax)
        r["prefix"] = print_prefix(ax.quantifiers)
        r["contexts"] = len(enumerate_contexts(ax))
        rows.append(r)
    lines = [f"{'axiom':<12} {'arity':>5} {'universal':>9} {'pred-free':>9} {'contexts':>8}  prefix"]
    for r in rows:
        lines.append(f"{r['name']:<12} {r['arity']:>5} {str(r['universal']).lower():>9} "
                     f"{str(r['predicate_free']).lower():>9} {r['contexts']:>8}  {r['prefix']}")
    out.emit("\n".join(lines), {"axioms": rows})
    return 0


def cmd_validate(args) -> int:
    out = _Out(args)
    s = _axioms(args.axioms)
    prog = _program(args.program)
    bound = bind(s, prog)
    if args.graph:
        gtext = _read(args.graph)
        g = load_graph(gtext, prog)
        try:
            v = is_valid(g, prog, bound)
            desc, valid = v.describe(), v.valid
        except NotAnExecution as e:
            v, desc, valid = None, f"not an execution: {e}", False
        if not valid:
            out.witness("validate.uprog", print_program(prog))
            out.witness("validate-graph.json", g.to_json())
    else:
        tr = _trace(args.trace, prog, bound)
        v = is_valid_trace(tr, prog, bound)
        desc, valid = v.describe(), v.valid
        if not valid:
            out.witness("validate.uprog", print_program(prog))
            out.witness("validate.utrace", print_trace(tr))
    obj = {"command": "validate", "valid": valid, "verdict": desc}
    if v is not None and not v.valid:
        obj["axiom"] = v.axiom
        obj["assignment"] = {k: str(i) for k, i in v.assignment or ()}
    out.emit(desc, obj)
    return 0 if valid else 1


def cmd_check_refinable(args) -> int:
    out = _Out(args)
    s = _axioms(args.axioms)
    dom = _program(args.domain)
    r = check_refinability(s, dom, args.cap)
    obj = {"command": "check-refinable", "refinable": r.refinable,
           "programs_checked": r.programs_checked}
    if r.refinable:
        out.emit(f"refinable ({r.programs_checked} programs checked)", obj)
        return 0
    w = r.witness
    out.witness("refinability.uprog", print_program(w.program))
    out.witness("refinability-graph.json", w.graph.to_json())
    out.witness("refinability.utrace", print_trace(w.linearization))
    obj["witness"] = {"edges": len(w.graph.edges), "instructions": w.program.size(),
                      "linearization": _line(w.linearization)}
    out.emit(f"not refinable: a valid graph with {len(w.graph.edges)} edges over "
             f"{w.program.size()} instructions has the invalid linearization\n"
             f"  {_line(w.linearization)}", obj)
    return 1


def _ext_witness(out: _Out, s: AxiomSet, dom: Program, w) -> dict:
    bound = bind(s, dom)
    ax = bound.axiom(w.axiom)
    prog, tr = witness_program(w, ax, bound, dom)
    out.witness("extensibility.uprog", print_program(prog))
    out.witness("extensibility.utrace", print_trace(tr))
    out.witness("extensibility.json", json.dumps({
        "schema": SCHEMA, "axiom": w.axiom, "context": w.context.as_dict(),
        "context_id": w.context.id, "subset": list(w.subset), "word": w.word_text()},
        indent=1, sort_keys=True))
    return {"axiom": w.axiom, "context": w.context.as_dict(), "subset": list(w.subset),
            "word": w.word_text()}


def cmd_check_extensible(args) -> int:
    out = _Out(args)
    s = _axioms(args.axioms)
    dom = _program(args.domain)
    r = check_extensibility(s, dom)
    obj = {"command": "check-extensible", "extensible": r.extensible,
           "axioms": {n: ok for n, ok in r.per_axiom}}
    lines = [f"{n}: {'extensible' if ok else 'not extensible'}" for n, ok in r.per_axiom]
    if r.witness is not None:
        obj["witness"] = _ext_witness(out, s, dom, r.witness)
        w = r.witness
        lines.append(f"witness: {w.axiom} under {w.context.describe()}, prefix "
                     f"{{{', '.join(w.subset)}}}, rejected word {w.word_text()}")
    out.emit("\n".join(lines), obj)
    return 0 if r.extensible else 1


def cmd_check_re(args) -> int:
    out = _Out(args)
    s = _axioms(args.axioms)
    dom = _program(args.domain)
    nonuni = [a.name for a in s.axioms if not a.universal]
    obj: dict = {"command": "check-re", "universal": not nonuni}
    lines = []
    if nonuni:
        obj.update(member=False, non_universal=nonuni)
        out.witness("re.json", json.dumps({"schema": SCHEMA, "non_universal": nonuni}, indent=1))
        out.emit(f"not in the fragment: {', '.join(nonuni)} not universal", obj)
        return 1
    ext = check_extensibility(s, dom)
    ref = check_refinability(s, dom, args.cap)
    obj.update(extensible=ext.extensible, refinable=ref.refinable,
               member=ext.extensible and ref.refinable)
    lines.append(f"universal: true\nextensible: {str(ext.extensible).lower()}\n"
                 f"refinable: {str(ref.refinable).lower()}")
    if ext.witness is not None:
        obj["extensibility_witness"] = _ext_witness(out, s, dom, ext.witness)
    if ref.witness is not None:
        w = ref.witness
        out.witness("refinability.uprog", print_program(w.program))
        out.witness("refinability-graph.json", w.graph.to_json())
        out.witness("refinability.utrace", print_trace(w.linearization))
        obj["refinability_witness"] = {"linearization": _line(w.linearization)}
    lines.append(f"member: {str(obj['member']).lower()}")
    out.emit("\n".join(lines), obj)
    return 0 if obj["member"] else 1


def cmd_synth(args) -> int:
    s = _axioms(args.axioms)
    dom = _program(args.domain) if args.domain else None
    if dom is not None:
        s = bind(s, dom)
    axioms = [s.axiom(args.axiom)] if args.axiom else list(s.axioms)
    autos, skipped = [], []
    for ax in axioms:
        if not ax.universal:
            skipped.append(ax.name)
            continue
        if args.context == "all":
            ids = None
        elif args.context is None:
            ids = None
            if dom is not None:
                realized = realized_contexts(ax, s, dom.domain)
                ids = [c.id for c in enumerate_contexts(ax) if c.values in realized]
        else:
            try:
                ids = [int(args.context)]
            except ValueError:
                raise ConfigError(f"--context takes an integer id or 'all', not {args.context!r}") from None
        autos.extend(synthesize(s, ax, None, ids))
    fmt = args.out
    if fmt == "json":
        sys.stdout.write(json.dumps({"schema": SCHEMA, "automata": [a.to_json() for a in autos],
                                     "skipped": skipped}, indent=1, sort_keys=True) + "\n")
    elif fmt == "dot":
        sys.stdout.write("".join(a.to_dot() for a in autos))
    else:
        for a in autos:
            sys.stdout.write(f"{a.name} context {a.context.id} {a.context.describe()}: "
                             f"{a.num_states} states, {len(a.accepting)} accepting, "
                             f"{len(a.alphabet)} events\n")
        for n in skipped:
            sys.stdout.write(f"{n}: skipped (not universal)\n")
    return 0


def _sim_worker(ax_text, prog_text, t, bounded, counting, first_token):
    s = parse_axioms(ax_text)
    prog = parse_program(prog_text)
    model = OperationalModel(s, prog, t, bounded, counting)
    first = next(e for e in model.events if e.token == first_token)
    r = model.explore(first=first)
    return [_line(tr) for tr in r.traces], r.stats.as_dict()


def _merge_stats(parts: Sequence[dict]) -> dict:
    total = LoopStats().as_dict()
    for p in parts:
        for k, v in p.items():
            total[k] = max(total[k], v) if k.startswith("peak") else total[k] + v
    return total


def _simulate(args, s: AxiomSet, prog: Program) -> tuple[list[str], dict]:
    if args.mode == "random":
        r = operational_loop(s, prog, args.t, "random", args.seed, args.count, args.bounded,
                             args.counting)
        return [_line(tr) for tr in r.traces], r.stats.as_dict()
    if args.jobs > 1:
        model = OperationalModel(s, prog, args.t, args.bounded, args.counting)
        root = model.initial()
        firsts = [] if root.mon is None and args.bounded else \
            [model.events[e].token for e, _ in model.successors(root)]
        if firsts:
            ax_text, prog_text = print_axiom_set(s), print_program(prog)
            with ProcessPoolExecutor(args.jobs) as pool:
                parts = list(pool.map(_sim_worker, *zip(*[
                    (ax_text, prog_text, args.t, args.bounded, args.counting, f) for f in firsts])))
            return [ln for p in parts for ln in p[0]], _merge_stats([p[1] for p in parts])
    r = operational_loop(s, prog, args.t, "exhaustive", bounded=args.bounded,
                         counting=args.counting)
    return [_line(tr) for tr in r.traces], r.stats.as_dict()


def cmd_simulate(args) -> int:
    _check_t(args.t)
    out = _Out(args)
    s = _axioms(args.axioms)
    prog = _program(args.program)
    lines, stats = _simulate(args, s, prog)
    stats["traces"] = len(lines)
    summary = {"command": "simulate", "mode": args.mode, "t": args.t, "bounded": args.bounded,
               "stats": stats, "footprint": state_footprint(s, args.t, prog.num_cores)}
    if args.mode == "random":
        summary["seed"] = args.seed
        summary["count"] = args.count
    if args.summary:
        Path(args.summary).write_text(json.dumps({"schema": SCHEMA, **summary}, indent=1,
                                                 sort_keys=True) + "\n", encoding="utf-8")
    if out.json:
        out.emit("", {**summary, "traces": lines})
    else:
        sys.stdout.write("".join(ln + "\n" for ln in lines))
        if not args.summary:
            sys.stderr.write(json.dumps({"schema": SCHEMA, **summary}, sort_keys=True) + "\n")
    return 0


def cmd_check_trace(args) -> int:
    out = _Out(args)
    s = _axioms(args.axioms)
    prog = _program(args.program)
    bound = bind(s, prog)
    tr = _trace(args.trace, prog, bound)
    v = is_valid_trace(tr, prog, bound)
    obj = {"command": "check-trace", "valid": v.valid, "verdict": v.describe()}
    lines = [f"validity: {v.describe()}"]
    ok = v.valid
    if args.t is not None:
        _check_t(args.t)
        viol = t_violation(tr, prog, args.t)
        obj["t"] = args.t
        obj["t_bounded"] = viol is None
        a = analyze(tr, prog)
        obj["pfxend"] = {str(i): a.pfxend[i] for i in a.instrs}
        lines.append(f"{args.t}-bounded: " + ("yes" if viol is None else f"no ({viol.describe()})"))
        ok = ok and viol is None
        if bound.universal or args.bounded:
            acc, idx, why = OperationalModel(s, prog, args.t, args.bounded).run_trace(tr)
            obj["model_accepts"] = acc
            lines.append("model: accepts" if acc else f"model: refuses at event {idx} ({why})")
            ok = ok and acc
    obj["ok"] = ok
    if not ok:
        out.witness("check-trace.uprog", print_program(prog))
        out.witness("check-trace.utrace", print_trace(tr))
    out.emit("\n".join(lines), obj)
    return 0 if ok else 1


def cmd_verify_equivalence(args) -> int:
    _check_t(args.t)
    out = _Out(args)
    s = _axioms(args.axioms)
    prog = _program(args.program)
    valid = None
    if args.jobs > 1:
        valid = set(_oracle_traces(args, s, prog))
    r = equivalence_check(s, prog, args.t, cap=args.cap, bounded=args.bounded, valid=valid)
    obj = {"command": "verify-equivalence", **r.to_json()}
    obj.pop("schema")
    if not r.equivalent:
        out.witness("equivalence.uprog", print_program(prog))
        for name, ts in (("unsound", r.unsound), ("missing", r.missing), ("extra", r.extra)):
            if ts:
                out.witness(f"equivalence-{name}.utrace", "".join(_line(t) + "\n" for t in ts))
    text = (f"{'equivalent' if r.equivalent else 'not equivalent'}: model {r.model_count} traces, "
            f"oracle {r.oracle_count} t-bounded valid traces, unsound {len(r.unsound)}, "
            f"missing {len(r.missing)}, unbounded {len(r.extra)}")
    out.emit(text, obj)
    return 0 if r.equivalent else 1


def _oracle_worker(ax_text, prog_text, cap, first_token):
    s = parse_axioms(ax_text)
    prog = parse_program(prog_text)
    first = next(e for e in prog_events(s, prog) if e.token == first_token)
    return [_line(t) for t in iter_valid_traces(s, prog, cap, first)]


def prog_events(s: AxiomSet, prog: Program) -> list[Event]:
    return sorted((Event(i, st) for i in prog.instrs() for st in s.stages.names),
                  key=lambda e: e.sort_key)


def _oracle_traces(args, s: AxiomSet, prog: Program):
    if args.jobs > 1 and prog.size():
        firsts = [e.token for e in prog_events(s, prog)]
        ax_text, prog_text = print_axiom_set(s), print_program(prog)
        with ProcessPoolExecutor(args.jobs) as pool:
            parts = pool.map(_oracle_worker, *zip(*[(ax_text, prog_text, args.cap, f) for f in firsts]))
            lines = [ln for p in parts for ln in p]
        bound = bind(s, prog)
        return [parse_trace(ln, prog, bound.stages) for ln in lines]
    return list(iter_valid_traces(s, prog, args.cap))


def cmd_oracle(args) -> int:
    out = _Out(args)
    s = _axioms(args.axioms)
    prog = _program(args.program)
    if args.graphs:
        gs = enumerate_valid_graphs(s, prog, args.cap)
        if out.json:
            out.emit("", {"command": "oracle", "graphs": [json.loads(g.to_json()) for g in gs]})
        else:
            sys.stdout.write("".join(g.to_dot(f"g{k}") for k, g in enumerate(gs)))
        return 0
    traces = _oracle_traces(args, s, prog)
    if out.json:
        out.emit("", {"command": "oracle", "count": len(traces), "traces": [_line(t) for t in traces]})
    else:
        sys.stdout.write("".join(_line(t) + "\n" for t in traces))
    return 0


REPORT_FIELDS = ["t", "model_traces", "oracle_traces", "equivalent", "nodes", "pruned_by_monitor",
                 "pruned_by_t", "peak_in_progress", "peak_monitors"]


def cmd_report(args) -> int:
    from .plotting import plot_pruning, plot_trace_counts

    out = _Out(args)
    s = _axioms(args.axioms)
    prog = _program(args.program)
    ts = sorted(set(args.t))
    for t in ts:
        _check_t(t)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    valid = None
    try:
        valid = set(iter_valid_traces(s, prog, args.cap))
    except CapExceeded:
        valid = None
    rows = []
    for t in ts:
        r = operational_loop(s, prog, t, bounded=args.bounded, counting=args.counting)
        row = {"t": t, "model_traces": len(r.traces), "oracle_traces": "", "equivalent": ""}
        if valid is not None:
            rep = equivalence_check(s, prog, t, model=r.traces, valid=valid)
            row["oracle_traces"] = rep.oracle_count
            row["equivalent"] = str(rep.equivalent).lower()
        st = r.stats.as_dict()
        for k in REPORT_FIELDS[4:]:
            row[k] = st[k]
        rows.append(row)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    csv_path = outdir / "report.csv"
    csv_path.write_text(buf.getvalue(), encoding="utf-8")
    title = f"{Path(args.axioms).stem} / {Path(args.program).stem}"
    f1 = plot_trace_counts(rows, outdir / "traces.png", title)
    f2 = plot_pruning(rows, outdir / "pruning.png", title)
    files = [str(csv_path), str(f1), str(f2)]
    if out.json:
        out.emit("", {"command": "report", "rows": rows, "files": files})
    else:
        sys.stdout.write(buf.getvalue())
    return 0


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", choices=["text", "json"], default="text",
                        help="output format (default: text)")
    common.add_argument("--witness-dir", default="witnesses",
                        help="where failing verdicts write replayable witnesses")
    jobs = argparse.ArgumentParser(add_help=False)
    jobs.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p = argparse.ArgumentParser(prog="uspecop", description="Axiomatic microarchitecture "
                                "specifications: checks, monitor synthesis and trace models.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("parse", parents=[common], help="parse and pretty-print a .uspec or .uprog file")
    q.add_argument("file")
    q.set_defaults(func=cmd_parse)

    q = sub.add_parser("classify", parents=[common], help="quantifier structure of each axiom")
    q.add_argument("axioms")
    q.set_defaults(func=cmd_classify)

    q = sub.add_parser("validate", parents=[common], help="validate a graph or trace")
    q.add_argument("axioms")
    q.add_argument("program")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--graph", help="graph file (.json or .dot)")
    g.add_argument("--trace", help="trace file (.utrace)")
    q.set_defaults(func=cmd_validate)

    for name, func, meta, hlp in (
            ("check-refinable", cmd_check_refinable, "program-or-domain",
             "search for a valid graph with an invalid linearization"),
            ("check-extensible", cmd_check_extensible, "domain",
             "check that valid prefixes compose with valid residuals"),
            ("check-re", cmd_check_re, "domain", "universal, refinable and extensible")):
        q = sub.add_parser(name, parents=[common], help=hlp)
        q.add_argument("axioms")
        q.add_argument("domain", metavar=meta)
        if func is not cmd_check_extensible:
            q.add_argument("--cap", type=int, default=None,
                           help="largest event count for poset search")
        q.set_defaults(func=func)

    q = sub.add_parser("synth", help="synthesise axiom automata")
    q.add_argument("axioms")
    q.add_argument("--axiom", help="only this axiom")
    q.add_argument("--context", help="context id or 'all' (default: consistent with --domain, "
                   "else all)")
    q.add_argument("--domain", help="program whose operations define consistent contexts")
    q.add_argument("--out", choices=["text", "dot", "json"], default="text")
    q.set_defaults(func=cmd_synth)

    q = sub.add_parser("simulate", parents=[common, jobs], help="run the operational model")
    q.add_argument("axioms")
    q.add_argument("program")
    q.add_argument("--t", type=int, required=True)
    q.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--count", type=int, default=100)
    q.add_argument("--bounded", action="store_true",
                   help="one static monitor bank (needed for non-universal axioms)")
    q.add_argument("--counting", choices=["distinct", "pairs"], default="distinct")
    q.add_argument("--summary", help="write the JSON summary here")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("check-trace", parents=[common], help="validity, t-boundedness, model acceptance")
    q.add_argument("axioms")
    q.add_argument("program")
    q.add_argument("trace")
    q.add_argument("--t", type=int)
    q.add_argument("--bounded", action="store_true")
    q.set_defaults(func=cmd_check_trace)

    q = sub.add_parser("verify-equivalence", parents=[common, jobs],
                       help="compare model traces with the brute-force oracle")
    q.add_argument("axioms")
    q.add_argument("program")
    q.add_argument("--t", type=int, required=True)
    q.add_argument("--bounded", action="store_true")
    q.add_argument("--cap", type=int, default=None, help="oracle event cap (default 9)")
    q.set_defaults(func=cmd_verify_equivalence)

    q = sub.add_parser("oracle", parents=[common, jobs], help="enumerate valid traces or graphs")
    q.add_argument("axioms")
    q.add_argument("program")
    q.add_argument("--graphs", action="store_true")
    q.add_argument("--cap", type=int, default=None)
    q.set_defaults(func=cmd_oracle)

    q = sub.add_parser("report", parents=[common], help="CSV table and figures across t")
    q.add_argument("axioms")
    q.add_argument("program")
    q.add_argument("--t", type=int, nargs="+", default=[1, 2, 3])
    q.add_argument("--outdir", default="report")
    q.add_argument("--bounded", action="store_true")
    q.add_argument("--counting", choices=["distinct", "pairs"], default="distinct")
    q.add_argument("--cap", type=int, default=None)
    q.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and 2
    try:
        return args.func(args)
    except CapExceeded as e:
        sys.stderr.write(f"error: {e}\n")
        return 3
    except (ConfigError, UspecError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except RecursionError:
        sys.stderr.write("error: input too deep\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
