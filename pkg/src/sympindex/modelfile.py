"""JSON model and certificate files.

Rotation numbers live in a named table so that declared relations can refer
to them; blocks and relations use the names.  ``emit_model`` output is the
canonical form and ``parse_model(emit_model(m))`` reproduces ``m``.
"""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from math import lcm
from typing import Any

from .cij import CheckResult, JumpCertificate
from .errors import InconsistentData, ParseError
from .iteration import PathGerm
from .ledger import SurfaceModel
from .normal_form import D, N1, N2, NormalForm, OffCircle, R
from .rotation import LinearForm, RotationNumber, relation

MODEL_FORMAT = "sympindex-model"
CERT_FORMAT = "sympindex-certificate"


def _rot_json(r: RotationNumber) -> dict:
    if r.is_rational:
        return {"type": "rational", "p": r.p, "q": r.q}
    return {"type": "irrational", "decimal": r.decimal, "digits": r.digits}


def _rot_parse(obj: Any) -> RotationNumber:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ParseError(f"bad rotation number {obj!r}")
    try:
        if obj["type"] == "rational":
            return RotationNumber.rational(int(obj["p"]), int(obj["q"]))
        if obj["type"] == "irrational":
            return RotationNumber.irrational(str(obj["decimal"]), int(obj["digits"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"bad rotation number {obj!r}") from exc
    raise ParseError(f"unknown rotation type {obj['type']!r}")


class _Names:
    def __init__(self) -> None:
        self.table: dict[str, RotationNumber] = {}
        self.by_value: dict[RotationNumber, str] = {}

    def name(self, r: RotationNumber) -> str:
        if r not in self.by_value:
            key = f"rho{len(self.table) + 1}"
            self.table[key] = r
            self.by_value[r] = key
        return self.by_value[r]


def _block_json(b, names: _Names) -> dict:
    if isinstance(b, N1):
        return {"kind": "N1", "lambda": b.lam, "b": b.b}
    if isinstance(b, D):
        return {"kind": "D", "sign": b.sign}
    if isinstance(b, R):
        return {"kind": "R", "rho": names.name(b.rho)}
    if isinstance(b, N2):
        return {"kind": "N2", "rho": names.name(b.rho), "nontrivial": b.nontrivial}
    return {"kind": "OffCircle", "half_dim": b.half_dim}


def _relation_json(form: LinearForm, names: _Names) -> dict:
    # form = 0 written as sum(c * rho) = value with integer c
    scale = lcm(form.const.denominator, *(k.denominator for _, k in form.terms))
    terms = [[int(k * scale), names.name(r)] for r, k in form.terms]
    return {"terms": terms, "value": int(-form.const * scale)}


def emit_model(model: SurfaceModel) -> dict:
    names = _Names()
    chars = []
    for c in model.characteristics:
        g = c.germ
        chars.append({
            "name": g.label,
            "initial_index": g.initial_index,
            "blocks": [_block_json(b, names) for b in g.end_form.blocks],
            "relations": [_relation_json(r, names) for r in g.relations],
        })
    rels = [_relation_json(r, names) for r in model.relations]
    meta = {"name": model.name}
    if "axes" in model.annotations:
        meta["axes"] = list(model.annotations["axes"])
    return {
        "format": MODEL_FORMAT,
        "version": 1,
        "n": model.n,
        "rotations": {k: _rot_json(v) for k, v in names.table.items()},
        "relations": rels,
        "characteristics": chars,
        "metadata": meta,
    }


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _lookup(table: dict, ref: Any) -> RotationNumber:
    if isinstance(ref, str):
        if ref not in table:
            raise ParseError(f"unknown rotation name {ref!r}")
        return table[ref]
    return _rot_parse(ref)


def _block_parse(obj: Any, table: dict):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError(f"bad block {obj!r}")
    kind = obj["kind"]
    try:
        if kind == "N1":
            return N1(int(obj["lambda"]), int(obj["b"]))
        if kind == "D":
            return D(int(obj["sign"]))
        if kind == "R":
            return R(_lookup(table, obj["rho"]))
        if kind == "N2":
            return N2(_lookup(table, obj["rho"]), bool(obj["nontrivial"]))
        if kind == "OffCircle":
            return OffCircle(int(obj["half_dim"]))
    except KeyError as exc:
        raise ParseError(f"block {obj!r} is missing {exc}") from exc
    raise ParseError(f"unknown block kind {kind!r}")


def _relation_parse(obj: Any, table: dict) -> LinearForm:
    try:
        terms = [(int(c), _lookup(table, ref)) for c, ref in obj["terms"]]
        value = obj["value"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad relation {obj!r}") from exc
    if isinstance(value, float):
        raise ParseError("relation values must be integers or exact fractions")
    form = relation(terms, Fraction(value))
    if form.is_exact:
        if form.const != 0:
            raise InconsistentData(f"relation {obj!r} reduces to a false constant identity")
    return form


def parse_model(data: dict | str | bytes) -> SurfaceModel:
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("model file must hold a JSON object")
    if data.get("format", MODEL_FORMAT) != MODEL_FORMAT:
        raise ParseError(f"unexpected format tag {data.get('format')!r}")
    try:
        n = int(data["n"])
        raw_chars = data["characteristics"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"model file is missing {exc}") from exc
    table = {str(k): _rot_parse(v) for k, v in (data.get("rotations") or {}).items()}
    rels = tuple(_relation_parse(r, table) for r in data.get("relations", []))
    germs = []
    for k, c in enumerate(raw_chars):
        try:
            blocks = [_block_parse(b, table) for b in c["blocks"]]
            own = tuple(_relation_parse(r, table) for r in c.get("relations", []))
            germs.append(PathGerm(int(c["initial_index"]), NormalForm(blocks), str(c.get("name", f"y{k + 1}")), own))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"characteristic {k + 1}: bad entry {exc}") from exc
    meta = data.get("metadata") or {}
    model = SurfaceModel.from_germs(n, germs, rels, name=str(meta.get("name", "")))
    if "axes" in meta:
        model.annotations["axes"] = list(meta["axes"])
    return model


def content_hash(text: str | bytes) -> str:
    if isinstance(text, str):
        text = text.encode("utf-8")
    return hashlib.sha256(text).hexdigest()


def emit_certificate(cert: JumpCertificate, model_hash: str, version: str, dual: JumpCertificate | None = None) -> dict:
    def one(c: JumpCertificate) -> dict:
        return {
            "N": c.N,
            "chi": list(c.chi),
            "m": list(c.m),
            "Delta": list(c.deltas),
            "q_table": [list(r) for r in c.q_table],
            "mbar": c.mbar,
            "delta": str(c.delta),
            "eps": str(c.eps),
            "eps_achieved": c.eps_achieved,
            "checks": [{"name": x.name, "ok": x.ok, "detail": x.detail} for x in c.checks],
        }

    out = {"format": CERT_FORMAT, "tool_version": version, "model_sha256": model_hash, **one(cert)}
    if dual is not None:
        out["dual"] = one(dual)
    return out


def parse_certificate(data: dict | str) -> tuple[JumpCertificate, dict]:
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"certificate is not valid JSON: {exc}") from exc
    if data.get("format") != CERT_FORMAT:
        raise ParseError("not a certificate file")

    def one(d: dict) -> JumpCertificate:
        try:
            return JumpCertificate(int(d["N"]), tuple(int(x) for x in d["chi"]), tuple(int(x) for x in d["m"]),
                                   tuple(int(x) for x in d["Delta"]), tuple(tuple(int(y) for y in r) for r in d["q_table"]),
                                   int(d["mbar"]), Fraction(d["delta"]), Fraction(d["eps"]), float(d["eps_achieved"]),
                                   tuple(CheckResult(x["name"], bool(x["ok"]), x.get("detail", "")) for x in d["checks"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"certificate field missing or malformed: {exc}") from exc

    return one(data), data
