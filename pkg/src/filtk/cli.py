"""Command-line surface: load JSON inputs, run checks, emit reports.

Exit codes: 0 for pass/feasible, 1 for a failed check or an infeasibility
where success was expected, 2 for input errors.  ``--json`` switches the
report to a deterministic machine-readable document (sorted keys, no
timestamps), so identical inputs produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import caselib
from .ckk import BlockMatrix, filtered_k, realize_space_random
from .diagram import (
    DiagramHom,
    DiagramModule,
    DiagramShape,
    check_rrz_like,
    check_six_term_exact,
    generic_shape,
    is_module_isomorphism,
    reduced_from_full,
    check_exact_r_module,
    solve_hom,
    unit_group,
    validate_module,
    verify_hom,
)
from .fgab import GroupHom
from .finspace import FiniteSpace, builtin_space
from .intlin import IntMatrix, smith_normal_form


class InputError(Exception):
    """A malformed or unreadable input; exits with status 2."""


def _read_json(path: str, what: str) -> object:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{what}: file not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON in {path}: {exc}")


def _int_matrix(doc: object, where: str) -> IntMatrix:
    if not isinstance(doc, list) or not all(isinstance(r, list) for r in doc):
        raise InputError(f"{where}: expected a row-major array of integer rows")
    for i, row in enumerate(doc):
        for j, x in enumerate(row):
            if not isinstance(x, int):
                raise InputError(f"{where}[{i}][{j}]: expected an integer, got {x!r}")
    return IntMatrix(len(doc), len(doc[0]) if doc else 0, doc)


def _load_space(spec: str) -> FiniteSpace:
    try:
        return builtin_space(spec)
    except KeyError:
        doc = _read_json(spec, "--space")
        if not isinstance(doc, dict) or "points" not in doc or "opens" not in doc:
            raise InputError("--space: expected fields 'points' and 'opens'")
        try:
            return FiniteSpace(doc["points"], doc["opens"])
        except ValueError as exc:
            raise InputError(f"--space: {exc}")


def _shape_for_space(space_spec: Optional[str], space: Optional[FiniteSpace]) -> DiagramShape:
    if space_spec == "CSP":
        return caselib.load_shape("csp")
    if space_spec == "S21":
        return caselib.load_shape("s21")
    if space is None:
        raise InputError("a space is required (pass --space)")
    return generic_shape(space, name="generic")


def _load_module(path: str) -> DiagramModule:
    doc = _read_json(path, "--module")
    if not isinstance(doc, dict) or "shape" not in doc:
        raise InputError("--module: expected an object with a 'shape' field")
    try:
        return DiagramModule.from_doc(doc, shape_lookup=caselib.shape_lookup)
    except (KeyError, ValueError) as exc:
        raise InputError(f"--module: {exc}")


def _load_block_matrix(path: str, space_spec: Optional[str]) -> BlockMatrix:
    doc = _read_json(path, "--matrix")
    if not isinstance(doc, dict):
        raise InputError("--matrix: expected an object")
    for fld in ("blocks", "entries"):
        if fld not in doc:
            raise InputError(f"--matrix: missing field '{fld}'")
    blocks = doc["blocks"]
    for fld in ("order", "sizes"):
        if fld not in blocks:
            raise InputError(f"--matrix: missing field 'blocks.{fld}'")
    space = _load_space(space_spec) if space_spec else None
    if space is None:
        if "space" not in doc:
            raise InputError("--matrix: no 'space' field and no --space flag")
        space = FiniteSpace(doc["space"]["points"], doc["space"]["opens"])
    try:
        return BlockMatrix(
            space=space,
            order=tuple(blocks["order"]),
            sizes={p: int(n) for p, n in blocks["sizes"].items()},
            entries=_int_matrix(doc["entries"], "--matrix entries"),
        )
    except ValueError as exc:
        raise InputError(f"--matrix: {exc}")


def _emit(doc: dict, text: str, args) -> None:
    if args.json:
        payload = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        print(payload)
    else:
        print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")


def _report_exit(ok: bool) -> int:
    return 0 if ok else 1


# -- verbs ---------------------------------------------------------------------


def cmd_snf(args) -> int:
    m = _int_matrix(_read_json(args.infile, "--in"), "--in")
    dec = smith_normal_form(m)
    doc = {
        "command": "snf",
        "U": dec.U.to_lists(),
        "S": dec.S.to_lists(),
        "V": dec.V.to_lists(),
        "invariant_factors": dec.invariant_factors(),
        "ok": True,
    }
    text = "\n".join([
        f"invariant factors: {dec.invariant_factors()}",
        f"S = {dec.S.to_lists()}",
    ])
    _emit(doc, text, args)
    return 0


def cmd_ck_k(args) -> int:
    a = _load_block_matrix(args.matrix, args.space)
    shape = _shape_for_space(args.space, a.space)
    module = filtered_k(a, shape)
    groups = {
        f"{c}_{d}": module.group(c, d).describe()
        for (c, d) in shape.vertices()
    }
    shape_ref = {"CSP": "csp", "S21": "s21"}.get(args.space or "")
    doc = {
        "command": "ck-k",
        "ok": True,
        "groups": groups,
        "module": module.to_doc(shape_ref=shape_ref),
    }
    text = "\n".join(f"{label}: {value}" for label, value in sorted(groups.items()))
    _emit(doc, text, args)
    return 0


def cmd_check_exact(args) -> int:
    module = _load_module(args.module)
    reports = [validate_module(module), check_six_term_exact(module)]
    ok = all(r.ok for r in reports)
    doc = {
        "command": "check-exact",
        "ok": ok,
        "failures": [m for r in reports for m in r.failures],
        "checks": sum(r.checked for r in reports),
    }
    _emit(doc, "\n".join(r.summary() for r in reports), args)
    return _report_exit(ok)


def cmd_check_rrz(args) -> int:
    module = _load_module(args.module)
    rep = check_rrz_like(module)
    doc = {"command": "check-rrz", "ok": rep.ok, "failures": rep.failures,
           "checks": rep.checked}
    _emit(doc, rep.summary(), args)
    return _report_exit(rep.ok)


def _hom_from_doc(doc: dict) -> DiagramHom:
    def resolve(ref, what):
        if isinstance(ref, str):
            if ref == "csp_N":
                return caselib.build_n()
            try:
                return caselib.load_table(ref)
            except KeyError:
                raise InputError(f"{what}: unknown built-in module {ref!r}")
        return DiagramModule.from_doc(ref, shape_lookup=caselib.shape_lookup)

    src = resolve(doc.get("src"), "hom src")
    dst = resolve(doc.get("dst"), "hom dst")
    fill = doc.get("fill", "zero")
    components = {}
    for v in src.shape.vertices():
        label = f"{v[0]}_{v[1]}"
        if label in doc.get("components", {}):
            mat = _int_matrix(doc["components"][label], f"components.{label}")
        elif fill == "identity":
            mat = IntMatrix.identity(src.group(*v).generators)
        else:
            mat = IntMatrix.zeros(dst.group(*v).generators, src.group(*v).generators)
        components[v] = GroupHom(src.group(*v), dst.group(*v), mat)
    return DiagramHom(src=src, dst=dst, components=components)


def cmd_verify_hom(args) -> int:
    doc_in = _read_json(args.hom, "--hom")
    if not isinstance(doc_in, dict):
        raise InputError("--hom: expected an object")
    hom = _hom_from_doc(doc_in)
    rep = verify_hom(hom)
    iso = rep.ok and is_module_isomorphism(hom)
    doc = {"command": "verify-hom", "ok": rep.ok, "isomorphism": iso,
           "failures": rep.failures, "checks": rep.checked}
    _emit(doc, rep.summary() + f"\nisomorphism: {iso}", args)
    return _report_exit(rep.ok)


def cmd_solve_hom(args) -> int:
    modules = [(m if isinstance(m, DiagramModule) else _load_module(m))
               for m in (args.modules or [])]
    if len(modules) != 2:
        raise InputError("solve-hom needs exactly two --module arguments (src, dst)")
    src, dst = modules
    pins = {}
    if args.pins:
        pin_doc = _read_json(args.pins, "--pins")
        if not isinstance(pin_doc, dict):
            raise InputError("--pins: expected an object of vertex -> matrix")
        for label, rows in pin_doc.items():
            c, _, d = label.rpartition("_")
            v = (c, int(d))
            pins[v] = GroupHom(src.group(*v), dst.group(*v),
                               _int_matrix(rows, f"pins.{label}"))
    res = solve_hom(src, dst, pins)
    if res.feasible:
        comp_doc = {
            f"{v[0]}_{v[1]}": h.matrix.to_lists()
            for v, h in sorted(res.hom.components.items())
        }
        doc = {"command": "solve-hom", "ok": True, "feasible": True,
               "components": comp_doc,
               "homogeneous_rank": len(res.homogeneous)}
        _emit(doc, "feasible", args)
        return 0
    doc = {"command": "solve-hom", "ok": False, "feasible": False,
           "certificate": res.infeasible.describe()}
    _emit(doc, f"infeasible: {res.infeasible.describe()}", args)
    return 1


def cmd_reduced(args) -> int:
    module = _load_module(args.module)
    red = reduced_from_full(module)
    rep = check_exact_r_module(red)
    groups = {}
    for x in sorted(red.space.points):
        groups[x] = {
            "odd": red.odd[x].describe(),
            "boundary": red.boundary[x].describe(),
            "open": red.open_[x].describe(),
        }
    doc = {"command": "reduced", "ok": rep.ok, "groups": groups,
           "failures": rep.failures}
    text = "\n".join(f"{x}: K1={g['odd']}, K0(boundary)={g['boundary']}, K0(open)={g['open']}"
                     for x, g in sorted(groups.items()))
    _emit(doc, text + "\n" + rep.summary(), args)
    return _report_exit(rep.ok)


def cmd_unit_group(args) -> int:
    module = _load_module(args.module)
    red = reduced_from_full(module)
    group = unit_group(red)
    free, torsion = group.invariant_factors()
    doc = {"command": "unit-group", "ok": True,
           "free_rank": free, "torsion": list(torsion),
           "description": group.describe()}
    _emit(doc, f"unit-class group: {group.describe()}", args)
    return 0


def cmd_verify_counterexample(args) -> int:
    rep = caselib.verify_counterexample()
    doc = {"command": "verify-counterexample"}
    doc.update(rep.to_doc())
    _emit(doc, rep.render(), args)
    return _report_exit(rep.ok)


def cmd_verify_pseudocircle(args) -> int:
    if args.module:
        module = _load_module(args.module)
        runs = [("module", module)]
    else:
        shape = caselib.load_shape("s21")
        runs = []
        base = args.seed if args.seed is not None else 0
        for k in range(args.count):
            a = realize_space_random(shape.space, max_block=args.max_block, seed=base + k)
            runs.append((f"seed {base + k}", filtered_k(a, shape)))
    all_ok = True
    docs = []
    texts = []
    for label, module in runs:
        rep = caselib.verify_pseudocircle_steps(module)
        all_ok = all_ok and rep.ok
        entry = {"input": label}
        entry.update(rep.to_doc())
        docs.append(entry)
        texts.append(f"== {label}\n{rep.render()}")
    doc = {"command": "verify-pseudocircle", "ok": all_ok, "runs": docs}
    _emit(doc, "\n".join(texts), args)
    return _report_exit(all_ok)


def cmd_dump_shape(args) -> int:
    if args.space in ("CSP", "S21"):
        shape = caselib.load_shape({"CSP": "csp", "S21": "s21"}[args.space])
    else:
        shape = generic_shape(_load_space(args.space), name="generic")
    doc = {"command": "dump-shape", "ok": True, "shape": shape.to_doc()}
    text = json.dumps(shape.to_doc(), sort_keys=True, indent=1)
    _emit(doc, text, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="filtk",
        description="Exact ideal-filtered K-theory computations over finite T0-spaces",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="emit a machine-readable report")
        p.add_argument("--out", help="also write the JSON report/payload to this path")

    p = sub.add_parser("snf", help="Smith normal form of an integer matrix")
    p.add_argument("--in", dest="infile", required=True, help="row-major integer matrix JSON")
    common(p)
    p.set_defaults(func=cmd_snf)

    p = sub.add_parser("ck-k", help="filtered K-theory of a block matrix")
    p.add_argument("--space", help="built-in name (CSP, S21) or space JSON path")
    p.add_argument("--matrix", required=True, help="block matrix JSON path")
    common(p)
    p.set_defaults(func=cmd_ck_k)

    p = sub.add_parser("check-exact", help="validate a module and check six-term exactness")
    p.add_argument("--module", required=True)
    common(p)
    p.set_defaults(func=cmd_check_exact)

    p = sub.add_parser("check-rrz", help="check that even-to-odd connecting maps vanish")
    p.add_argument("--module", required=True)
    common(p)
    p.set_defaults(func=cmd_check_rrz)

    p = sub.add_parser("verify-hom", help="verify naturality of a component family")
    p.add_argument("--hom", required=True, help="hom JSON: src, dst, components, fill")
    common(p)
    p.set_defaults(func=cmd_verify_hom)

    p = sub.add_parser("solve-hom", help="complete pinned components to a natural family")
    p.add_argument("--module", dest="modules", action="append",
                   help="source then destination module JSON (twice)")
    p.add_argument("--pins", help="JSON of pinned components vertex -> matrix")
    common(p)
    p.set_defaults(func=cmd_solve_hom)

    p = sub.add_parser("reduced", help="extract and check the reduced invariant")
    p.add_argument("--module", required=True)
    common(p)
    p.set_defaults(func=cmd_reduced)

    p = sub.add_parser("unit-group", help="unit-class group of the reduced invariant")
    p.add_argument("--module", required=True)
    common(p)
    p.set_defaults(func=cmd_unit_group)

    p = sub.add_parser("verify-counterexample",
                       help="run the embedded non-lifting verification")
    common(p)
    p.set_defaults(func=cmd_verify_counterexample)

    p = sub.add_parser("verify-pseudocircle",
                       help="run the reduction battery over the pseudo-circle")
    p.add_argument("--module", help="module JSON to check (instead of random data)")
    p.add_argument("--seed", type=int, help="first seed for random realizations")
    p.add_argument("--count", type=int, default=1, help="number of seeded runs")
    p.add_argument("--max-block", type=int, default=2, dest="max_block")
    common(p)
    p.set_defaults(func=cmd_verify_pseudocircle)

    p = sub.add_parser("dump-shape", help="emit a shape as JSON")
    p.add_argument("--space", required=True, help="CSP, S21, or a space JSON path")
    common(p)
    p.set_defaults(func=cmd_dump_shape)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
