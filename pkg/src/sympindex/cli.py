"""Command-line front end.

Exit status: 0 pass, 1 check failure, 2 usage or parse error, 3 precision,
4 scan exhausted.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cij import (DEFAULT_DELTA, DEFAULT_EPS, DEFAULT_SCAN_LIMIT, AbstractJumpInstance, JumpInstance,
                  dual_certificate, solve_abstract, solve_paths, verify_certificate)
from .errors import IndexToolError, InconsistentData, ParseError
from .iteration import index_at, mean_index, nullity_at
from .ledger import (PrimeCharacteristic, is_good_iterate, is_perfect, multiplicity_report,
                     resonance_residuals)
from .modelfile import (_relation_parse, _rot_parse, content_hash, dumps, emit_certificate, emit_model,
                        parse_certificate, parse_model)
from .models import EllipsoidSpec, ellipsoid
from .rotation import LinearForm


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _load(path: str):
    text = _read(path)
    return parse_model(text), content_hash(text)


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


def cmd_index(args) -> int:
    model, _ = _load(args.model)
    chars = {c.label: c for c in model.characteristics}
    if args.orbit not in chars:
        raise ParseError(f"no characteristic named {args.orbit!r}; have {', '.join(chars)}")
    c = chars[args.orbit]
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["m", "i_maslov", "i_viterbo", "nullity", "iterate"])
        for m in range(1, args.max + 1):
            i = index_at(c.germ, m)
            w.writerow([m, i, i - model.n, nullity_at(c.germ, m), "good" if is_good_iterate(c, m) else "bad"])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_mean(args) -> int:
    model, _ = _load(args.model)
    rels = model.all_relations()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["name", "mean", "approx", "sign"])
    for c in model.characteristics:
        mi = mean_index(c.germ, rels)
        w.writerow([c.label, str(mi.value), f"{mi.approx():.12g}", mi.sign])
    return 0


def _instance(model, args) -> JumpInstance:
    return JumpInstance(model.germs, model.n, args.delta, args.eps, args.mbar, model.all_relations())


def cmd_jump(args) -> int:
    model, digest = _load(args.model)
    inst = _instance(model, args)
    certs = solve_paths(inst, args.count, args.scan_limit, args.workers)
    dual = dual_certificate(inst, certs[0], args.scan_limit, args.workers) if args.dual else None
    record = emit_certificate(certs[0], digest, __version__, dual)
    if len(certs) > 1:
        record["additional"] = [emit_certificate(c, digest, __version__) for c in certs[1:]]
    _write(args.out, dumps(record))
    return 0


def cmd_verify(args) -> int:
    text = _read(args.model)
    model, digest = parse_model(text), content_hash(text)
    cert, raw = parse_certificate(_read(args.certificate))
    if raw.get("model_sha256") not in (None, digest):
        raise InconsistentData("certificate was produced for a different model file")
    inst = JumpInstance(model.germs, model.n, cert.delta, cert.eps, cert.mbar, model.all_relations())
    records = [cert] + [parse_certificate(r)[0] for r in raw.get("additional", [])]
    if "dual" in raw:
        records.append(parse_certificate({**raw["dual"], "format": raw["format"]})[0])
    ok = True
    for c in records:
        report = verify_certificate(inst, c)
        for chk in report.checks:
            print(f"N={c.N}\t{chk.name}\t{'PASS' if chk.ok else 'FAIL'}\t{chk.detail}")
        ok = ok and report.ok
    return 0 if ok else 1


def cmd_resonance(args) -> int:
    model, _ = _load(args.model)
    res = resonance_residuals(model, args.tol)
    print(f"r_plus\t{res.r_plus:.3e}")
    print(f"r_minus\t{res.r_minus:.3e}")
    print(f"admissible\t{'yes' if res.admissible else 'no'}")
    return 0 if res.admissible else 1


def cmd_perfect(args) -> int:
    model, _ = _load(args.model)
    res = is_perfect(model)
    if res.perfect:
        print("perfect")
        return 0
    print("not perfect")
    for label, m, i in res.violations[:50]:
        print(f"{label}\tm={m}\ti={i}")
    return 1


def report_table(rep) -> str:
    lines = [f"window [{rep.window[0]}, {rep.window[1]}]  N = {rep.N}  dual N = {rep.N_dual}  eps = {rep.eps}"]
    c, d = rep.counts, rep.dual_counts
    lines.append(f"counts at chi: plus e/o {c.plus_even}/{c.plus_odd}  minus e/o {c.minus_even}/{c.minus_odd}")
    lines.append(f"counts at 1-chi: plus e/o {d.plus_even}/{d.plus_odd}  minus e/o {d.minus_even}/{d.minus_odd}")
    a = rep.alternating
    lines.append(f"alternating sums: morse {a.morse_side} {a.direction} betti {a.betti_side}")
    if rep.identity_gap:
        lines.append(f"count identity gap: {rep.identity_gap}")
    for chk in rep.checks:
        lines.append(f"  {chk.name:<24} {'PASS' if chk.ok else 'FAIL'}  {chk.detail}")
    lines.append(f"lower bound {rep.bound}; non-hyperbolic: {', '.join(rep.non_hyperbolic) or 'none'}")
    return "\n".join(lines) + "\n"


def report_record(rep, digest: str) -> dict:
    c, d = rep.counts, rep.dual_counts
    return {
        "tool_version": __version__,
        "model_sha256": digest,
        "window": list(rep.window),
        "N": rep.N,
        "N_dual": rep.N_dual,
        "eps": str(rep.eps),
        "morse_numbers": {str(p): v for p, v in rep.morse.items() if v},
        "alternating": {"morse": rep.alternating.morse_side, "betti": rep.alternating.betti_side,
                        "direction": rep.alternating.direction},
        "counts": {"plus_even": c.plus_even, "plus_odd": c.plus_odd, "minus_even": c.minus_even, "minus_odd": c.minus_odd},
        "dual_counts": {"plus_even": d.plus_even, "plus_odd": d.plus_odd, "minus_even": d.minus_even,
                        "minus_odd": d.minus_odd},
        "identity_gap": rep.identity_gap,
        "bound": rep.bound,
        "non_hyperbolic": list(rep.non_hyperbolic),
        "extra": rep.extra,
        "checks": [{"name": x.name, "ok": x.ok, "detail": x.detail} for x in rep.checks],
    }


def cmd_report(args) -> int:
    model, digest = _load(args.model)
    rep = multiplicity_report(model, args.delta, args.eps, args.scan_limit, args.workers)
    sys.stdout.write(report_table(rep))
    if args.json:
        _write(args.json, dumps(report_record(rep, digest)))
    return 0 if rep.ok else 1


def cmd_ellipsoid(args) -> int:
    model = ellipsoid(EllipsoidSpec(tuple(args.axes)), args.digits)
    _write(args.out, dumps(emit_model(model)))
    return 0


def _abstract_instance(data: dict) -> AbstractJumpInstance:
    table = {str(k): _rot_parse(v) for k, v in (data.get("rotations") or {}).items()}
    rels = tuple(_relation_parse(r, table) for r in data.get("relations", []))
    try:
        rows = []
        for row in data["alphas"]:
            forms = []
            for a in row:
                if isinstance(a, (int, str)):
                    forms.append(LinearForm.of(Fraction(a)))
                    continue
                terms = [(table[name], Fraction(c)) for c, name in a.get("terms", [])]
                forms.append(LinearForm.build(Fraction(a.get("const", 0)), terms))
            rows.append(tuple(forms))
        return AbstractJumpInstance(tuple(int(b) for b in data["betas"]), tuple(rows),
                                    Fraction(data.get("delta", DEFAULT_DELTA)), Fraction(data.get("eps", DEFAULT_EPS)),
                                    rels, int(data.get("guard", 0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad abstract instance: {exc}") from exc


def cmd_abstract(args) -> int:
    try:
        data = json.loads(_read(args.instance))
    except json.JSONDecodeError as exc:
        raise ParseError(f"instance file is not valid JSON: {exc}") from exc
    inst = _abstract_instance(data)
    sols = solve_abstract(inst, args.count, args.scan_limit, args.workers)
    out = [{"N": s.N, "m": list(s.m), "Delta": list(s.deltas), "chi": list(s.chi)} for s in sols]
    _write(args.out, dumps({"tool_version": __version__, "solutions": out}))
    return 0


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=_frac, default=DEFAULT_DELTA)
    p.add_argument("--eps", type=_frac, default=DEFAULT_EPS)
    p.add_argument("--scan-limit", type=int, default=DEFAULT_SCAN_LIMIT)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sympindex", description="Iterated Maslov-type indices and common index jumps.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="iterate table as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--orbit", required=True)
    p.add_argument("--max", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("mean", help="mean indices and their signs")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("jump", help="search for jump certificates")
    p.add_argument("--model", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--mbar", type=int)
    p.add_argument("--dual", action="store_true", help="also emit the opposite-vertex certificate")
    p.add_argument("--out")
    _solver_flags(p)
    p.set_defaults(func=cmd_jump)

    p = sub.add_parser("verify", help="re-check a certificate against its model")
    p.add_argument("--model", required=True)
    p.add_argument("--certificate", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("resonance", help="resonance residuals")
    p.add_argument("--model", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("perfect", help="scan good iterates for forbidden indices")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_perfect)

    p = sub.add_parser("report", help="multiplicity report")
    p.add_argument("--model", required=True)
    p.add_argument("--json")
    _solver_flags(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("ellipsoid", help="emit an ellipsoid model file")
    p.add_argument("--axes", nargs="+", required=True)
    p.add_argument("--digits", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ellipsoid)

    p = sub.add_parser("abstract-jump", help="integer jump problem from beta/alpha data")
    p.add_argument("--instance", required=True)
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--out")
    _solver_flags(p)
    p.set_defaults(func=cmd_abstract)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IndexToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
