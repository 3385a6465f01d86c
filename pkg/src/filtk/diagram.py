"""Six-term diagram shapes and modules over finite T0-spaces.

A shape is a quiver on the connected locally closed carriers of a space, with
arrow kinds i (ideal inclusion), r (quotient restriction), and d (boundary,
degree-flipping), plus declared relations and declared six-term check
contexts.  A module assigns a presented abelian group to every vertex
(carrier, degree) and a matrix to every arrow instance.

Shapes are data: the two featured shapes are transcribed resources, and a
complete "generic" shape can be generated for any space.  Code never guesses
arrows beyond what a shape declares; composite maps are evaluated along
declared or resolved arrow paths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .fgab import (
    DirectSum,
    GroupHom,
    HomInfeasible,
    HomSolution,
    MatEquation,
    MatTerm,
    MatrixVar,
    PresentedGroup,
    canonical_form,
    direct_sum,
    cokernel,
    homs_equal,
    hom_solve,
    image,
    in_relation_span,
    is_exact_at,
    is_injective,
    is_isomorphism,
    is_surjective,
    is_well_defined,
    kernel,
)
from .finspace import FiniteSpace, builtin_space, carrier_name
from .intlin import IntMatrix, Solution, solve_linear


# -- shape ---------------------------------------------------------------------


@dataclass(frozen=True)
class Arrow:
    kind: str  # 'i', 'r', or 'd'
    src: str
    dst: str

    def __post_init__(self):
        if self.kind not in ("i", "r", "d"):
            raise ValueError(f"unknown arrow kind {self.kind!r}")

    @property
    def key(self) -> str:
        return f"{self.kind}:{self.src}>{self.dst}"

    def flips_degree(self) -> bool:
        return self.kind == "d"


Path = Tuple[str, ...]              # sequence of arrow keys, first applied first
PathCombo = Tuple[Tuple[int, Path], ...]  # integer combination of parallel paths


@dataclass(frozen=True)
class Relation:
    """A declared identity between integer combinations of parallel paths."""

    lhs: PathCombo
    rhs: PathCombo  # empty tuple encodes the zero map
    degrees: Tuple[int, ...] = (0, 1)
    note: str = ""


@dataclass(frozen=True)
class SixTermContext:
    """A declared exactness context: U open in Y, quotient Q = Y minus U.

    ``delta`` holds, for each (quotient component, ideal component) pair, the
    path combination that evaluates the connecting map block.  Missing pairs
    are zero blocks.
    """

    ideal: FrozenSet[str]
    total: FrozenSet[str]
    delta: Dict[Tuple[str, str], PathCombo] = field(default_factory=dict)

    @property
    def quotient(self) -> FrozenSet[str]:
        return self.total - self.ideal

    @property
    def label(self) -> str:
        return f"({carrier_name(self.ideal)} in {carrier_name(self.total)})"


class DiagramShape:
    def __init__(self, space: FiniteSpace, arrows: Sequence[Arrow],
                 relations: Sequence[Relation] = (),
                 contexts: Sequence[SixTermContext] = (),
                 name: str = ""):
        self.space = space
        self.name = name
        self.carriers: Dict[str, FrozenSet[str]] = {
            lc.name: lc.carrier for lc in space.locally_closed_connected()
        }
        for a in arrows:
            for end in (a.src, a.dst):
                if end not in self.carriers:
                    raise ValueError(f"arrow {a.key} references unknown carrier {end!r}")
        self.arrows: Tuple[Arrow, ...] = tuple(arrows)
        self.arrow_by_key: Dict[str, Arrow] = {a.key: a for a in self.arrows}
        if len(self.arrow_by_key) != len(self.arrows):
            raise ValueError("duplicate arrows in shape")
        self.relations: Tuple[Relation, ...] = tuple(relations)
        self.contexts: Tuple[SixTermContext, ...] = tuple(contexts)
        for ctx in self.contexts:
            if not space.is_relatively_open(ctx.ideal, ctx.total):
                raise ValueError(f"context {ctx.label}: ideal is not relatively open")
            if not ctx.ideal or ctx.ideal == ctx.total:
                raise ValueError(f"context {ctx.label}: ideal must be proper and nonempty")
        self._even_paths: Dict[Tuple[str, str], Optional[Path]] = {}

    # -- vertices and instances -----------------------------------------------

    def carrier_names(self) -> List[str]:
        return sorted(self.carriers, key=lambda n: (len(self.carriers[n]), n))

    def vertices(self) -> List[Tuple[str, int]]:
        return [(n, j) for n in self.carrier_names() for j in (0, 1)]

    def out_vertex(self, arrow: Arrow, src_degree: int) -> Tuple[str, int]:
        return (arrow.dst, src_degree ^ 1 if arrow.flips_degree() else src_degree)

    def arrow_instances(self) -> List[Tuple[Arrow, int]]:
        return [(a, j) for a in self.arrows for j in (0, 1)]

    # -- canonical even (degree-preserving) composites ---------------------------

    def resolve_even_path(self, src: str, dst: str) -> Optional[Path]:
        """Arrow path realizing the canonical inclusion/restriction src -> dst.

        Valid when one carrier contains the other; the path is accepted when
        its surviving subset equals src & dst, which pins the composite to the
        canonical map.  Returns None when the quiver offers no such path.
        """
        if src == dst:
            return ()
        keypair = (src, dst)
        if keypair in self._even_paths:
            return self._even_paths[keypair]
        s_set, t_set = self.carriers[src], self.carriers[dst]
        goal = s_set & t_set
        best: Optional[Path] = None
        seen = {(src, s_set)}
        frontier: List[Tuple[str, FrozenSet[str], Path]] = [(src, s_set, ())]
        while frontier and best is None:
            nxt: List[Tuple[str, FrozenSet[str], Path]] = []
            for cur, surv, path in frontier:
                for a in self.arrows:
                    if a.src != cur or a.kind == "d":
                        continue
                    nsurv = surv & self.carriers[a.dst]
                    if not nsurv:
                        continue
                    npath = path + (a.key,)
                    if a.dst == dst and nsurv == goal:
                        best = npath
                        break
                    state = (a.dst, nsurv)
                    if state not in seen:
                        seen.add(state)
                        nxt.append((a.dst, nsurv, npath))
                if best is not None:
                    break
            frontier = nxt
        self._even_paths[keypair] = best
        return best

    # -- serialization -----------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "space": json.loads(self.space.to_json()),
            "name": self.name,
            "arrows": [[a.kind, a.src, a.dst] for a in self.arrows],
            "relations": [
                {
                    "degrees": list(rel.degrees),
                    "lhs": _combo_to_doc(rel.lhs),
                    "rhs": _combo_to_doc(rel.rhs),
                    "note": rel.note,
                }
                for rel in self.relations
            ],
            "contexts": [
                {
                    "ideal": sorted(ctx.ideal),
                    "total": sorted(ctx.total),
                    "delta": {
                        f"{e}>{c}": _combo_to_doc(combo)
                        for (e, c), combo in sorted(ctx.delta.items())
                    },
                }
                for ctx in self.contexts
            ],
        }

    @staticmethod
    def from_doc(doc: dict) -> "DiagramShape":
        space = FiniteSpace(doc["space"]["points"], doc["space"]["opens"])
        arrows = [Arrow(k, s, d) for k, s, d in doc["arrows"]]
        relations = [
            Relation(
                lhs=_combo_from_doc(rel["lhs"]),
                rhs=_combo_from_doc(rel["rhs"]),
                degrees=tuple(rel["degrees"]),
                note=rel.get("note", ""),
            )
            for rel in doc.get("relations", [])
        ]
        contexts = []
        for c in doc.get("contexts", []):
            delta = {}
            for key, combo in c.get("delta", {}).items():
                e, _, cc = key.partition(">")
                delta[(e, cc)] = _combo_from_doc(combo)
            contexts.append(
                SixTermContext(ideal=frozenset(c["ideal"]), total=frozenset(c["total"]), delta=delta)
            )
        return DiagramShape(space, arrows, relations, contexts, name=doc.get("name", ""))


def _combo_to_doc(combo: PathCombo) -> list:
    return [[coeff, [step for step in path]] for coeff, path in combo]


def _combo_from_doc(doc: Sequence) -> PathCombo:
    return tuple((int(coeff), tuple(path)) for coeff, path in doc)


def generic_shape(space: FiniteSpace, name: str = "") -> DiagramShape:
    """The complete shape of a space: one arrow per canonical i/r/d map.

    i arrows join nested carriers with relatively open smaller member;
    r arrows join a carrier to a relatively closed complement-of-open part;
    d arrows realize every minimal connecting map between carriers whose
    union is again a connected locally closed set.
    """
    carriers = {lc.name: lc.carrier for lc in space.locally_closed_connected()}
    names = sorted(carriers, key=lambda n: (len(carriers[n]), n))
    arrows: List[Arrow] = []
    for a in names:
        for b in names:
            if a == b:
                continue
            sa, sb = carriers[a], carriers[b]
            if sa < sb and space.is_relatively_open(sa, sb):
                arrows.append(Arrow("i", a, b))
            if sb < sa and space.is_relatively_open(sa - sb, sa):
                arrows.append(Arrow("r", a, b))
    for e in names:
        for c in names:
            se, sc = carriers[e], carriers[c]
            if se & sc:
                continue
            union = se | sc
            if not space.is_locally_closed(union):
                continue
            if not space.is_connected_subset(union):
                continue
            if space.is_relatively_open(sc, union):
                arrows.append(Arrow("d", e, c))
    contexts: List[SixTermContext] = []
    for y in names:
        sy = carriers[y]
        for u in space.relative_opens(sy):
            if not u or u == sy:
                continue
            delta: Dict[Tuple[str, str], PathCombo] = {}
            for ec in space.components(sy - u):
                for cc in space.components(u):
                    union = ec | cc
                    if space.is_connected_subset(union) and space.is_locally_closed(union):
                        dkey = Arrow("d", carrier_name(ec), carrier_name(cc)).key
                        delta[(carrier_name(ec), carrier_name(cc))] = ((1, (dkey,)),)
            contexts.append(SixTermContext(ideal=u, total=sy, delta=delta))
    return DiagramShape(space, arrows, relations=(), contexts=contexts, name=name)


# -- modules ---------------------------------------------------------------------


class DiagramModule:
    """Groups on the vertices of a shape and matrices on its arrow instances.

    Missing groups are trivial and missing maps are zero, so sparse tables
    stay sparse.  ``side`` is 'left' for ordinary modules; 'right' modules
    (used for dualization) carry their arrow maps in the opposite direction.
    """

    def __init__(self, shape: DiagramShape,
                 groups: Dict[Tuple[str, int], PresentedGroup],
                 maps: Dict[Tuple[str, int], IntMatrix],
                 side: str = "left",
                 provenance: Optional["Provenance"] = None,
                 name: str = ""):
        if side not in ("left", "right"):
            raise ValueError(f"unknown module side {side!r}")
        self.shape = shape
        self.side = side
        self.name = name
        self.provenance = provenance
        self.groups: Dict[Tuple[str, int], PresentedGroup] = {}
        for (carrier, deg), g in groups.items():
            if carrier not in shape.carriers:
                raise ValueError(f"group given at unknown carrier {carrier!r}")
            if deg not in (0, 1):
                raise ValueError(f"bad degree {deg}")
            if g.generators:
                self.groups[(carrier, deg)] = g
        self.maps: Dict[Tuple[str, int], IntMatrix] = {}
        for (key, deg), mat in maps.items():
            arrow = shape.arrow_by_key.get(key)
            if arrow is None:
                raise ValueError(f"map given for unknown arrow {key!r}")
            dom, cod = self._ends(arrow, deg)
            dg, cg = self.group(*dom), self.group(*cod)
            if mat.rows != cg.generators or mat.cols != dg.generators:
                raise ValueError(
                    f"map {key}@{deg} is {mat.rows}x{mat.cols}, expected "
                    f"{cg.generators}x{dg.generators}"
                )
            if not mat.is_zero():
                self.maps[(key, deg)] = mat

    def _ends(self, arrow: Arrow, deg: int) -> Tuple[Tuple[str, int], Tuple[str, int]]:
        src = (arrow.src, deg)
        dst = self.shape.out_vertex(arrow, deg)
        if self.side == "left":
            return src, dst
        return dst, src

    def group(self, carrier: str, deg: int) -> PresentedGroup:
        return self.groups.get((carrier, deg), PresentedGroup.trivial())

    def hom(self, key: str, deg: int) -> GroupHom:
        arrow = self.shape.arrow_by_key[key]
        dom, cod = self._ends(arrow, deg)
        dg, cg = self.group(*dom), self.group(*cod)
        mat = self.maps.get((key, deg))
        if mat is None:
            mat = IntMatrix.zeros(cg.generators, dg.generators)
        return GroupHom(dg, cg, mat)

    def vertices_with_groups(self) -> List[Tuple[str, int]]:
        return sorted(self.groups, key=lambda v: (v[1], len(self.shape.carriers[v[0]]), v[0]))

    def is_zero(self) -> bool:
        return not self.groups

    # -- serialization -------------------------------------------------------

    def to_doc(self, shape_ref: Optional[str] = None) -> dict:
        doc = {
            "shape": shape_ref if shape_ref else self.shape.to_doc(),
            "side": self.side,
            "name": self.name,
            "groups": {
                f"{c}_{d}": {"gens": g.generators, "rels": g.relations.to_lists()}
                for (c, d), g in sorted(self.groups.items())
            },
            "maps": {
                f"{key}@{deg}": mat.to_lists()
                for (key, deg), mat in sorted(self.maps.items())
            },
        }
        if self.provenance is not None:
            doc["provenance"] = self.provenance.to_doc()
        return doc

    @staticmethod
    def from_doc(doc: dict, shape: Optional[DiagramShape] = None,
                 shape_lookup=None) -> "DiagramModule":
        if shape is None:
            ref = doc["shape"]
            if isinstance(ref, str):
                if shape_lookup is None:
                    raise ValueError("module document references a named shape; pass shape_lookup")
                shape = shape_lookup(ref)
            else:
                shape = DiagramShape.from_doc(ref)
        groups = {}
        for label, g in doc.get("groups", {}).items():
            c, _, d = label.rpartition("_")
            gens = g["gens"]
            rel_rows = g["rels"]
            if rel_rows and rel_rows[0]:
                rel = IntMatrix(gens, len(rel_rows[0]), rel_rows)
            else:
                rel = IntMatrix.zeros(gens, 0)
            groups[(c, int(d))] = PresentedGroup(gens, rel)
        maps = {}
        for label, rows in doc.get("maps", {}).items():
            key, _, deg = label.rpartition("@")
            mat = IntMatrix(len(rows), len(rows[0]) if rows else 0, rows)
            maps[(key, int(deg))] = mat
        prov = Provenance.from_doc(doc["provenance"]) if "provenance" in doc else None
        return DiagramModule(shape, groups, maps, side=doc.get("side", "left"),
                             provenance=prov, name=doc.get("name", ""))


@dataclass(frozen=True)
class Provenance:
    """Generator (or cogenerator) path data pinning a module to one corner.

    For each supported vertex, ``paths[vertex]`` holds one signed path
    combination per basis element: combinations of paths from the corner for
    projective-type (left) tables, of paths to the corner for injective-type
    (right) tables.
    """

    corner: Tuple[str, int]
    paths: Dict[Tuple[str, int], Tuple[PathCombo, ...]]

    def to_doc(self) -> dict:
        return {
            "corner": f"{self.corner[0]}_{self.corner[1]}",
            "paths": {
                f"{c}_{d}": [_combo_to_doc(combo) for combo in combos]
                for (c, d), combos in sorted(self.paths.items())
            },
        }

    @staticmethod
    def from_doc(doc: dict) -> "Provenance":
        c, _, d = doc["corner"].rpartition("_")
        paths = {}
        for label, plist in doc.get("paths", {}).items():
            cc, _, dd = label.rpartition("_")
            paths[(cc, int(dd))] = tuple(_combo_from_doc(combo) for combo in plist)
        return Provenance(corner=(c, int(d)), paths=paths)


# -- path evaluation ---------------------------------------------------------------


def path_hom(module: DiagramModule, path: Path, start: Tuple[str, int]) -> GroupHom:
    """Compose the module maps along a quiver path (left modules only)."""
    if module.side != "left":
        raise ValueError("path evaluation is defined for left modules")
    carrier, deg = start
    acc = GroupHom.identity(module.group(carrier, deg))
    for key in path:
        arrow = module.shape.arrow_by_key[key]
        if arrow.src != carrier:
            raise ValueError(f"path step {key} does not start at {carrier!r}")
        step = module.hom(key, deg)
        acc = step.compose(acc)
        carrier, deg = module.shape.out_vertex(arrow, deg)
    return acc


def combo_hom(module: DiagramModule, combo: PathCombo, start: Tuple[str, int],
              end: Tuple[str, int]) -> GroupHom:
    """Evaluate an integer combination of parallel paths from start to end."""
    dom = module.group(*start)
    cod = module.group(*end)
    total = IntMatrix.zeros(cod.generators, dom.generators)
    for coeff, path in combo:
        h = path_hom(module, path, start)
        if h.cod.generators != cod.generators:
            raise ValueError("combo path does not end at the stated vertex")
        total = total + h.matrix.scale(coeff)
    return GroupHom(dom, cod, total)


def path_end(shape: DiagramShape, path: Path, start: Tuple[str, int]) -> Tuple[str, int]:
    carrier, deg = start
    for key in path:
        arrow = shape.arrow_by_key[key]
        if arrow.src != carrier:
            raise ValueError(f"path step {key} does not start at {carrier!r}")
        carrier, deg = shape.out_vertex(arrow, deg)
    return (carrier, deg)


# -- assembled (possibly disconnected) vertex groups --------------------------------


@dataclass(frozen=True)
class Assembled:
    subset: FrozenSet[str]
    degree: int
    parts: Tuple[str, ...]          # component carrier names, sorted
    sum: DirectSum

    @property
    def group(self) -> PresentedGroup:
        return self.sum.group


def assemble_vertex(module: DiagramModule, subset: FrozenSet[str], degree: int) -> Assembled:
    comps = module.shape.space.components(subset) if subset else []
    names = [carrier_name(c) for c in comps]
    summands = [module.group(n, degree) for n in names]
    return Assembled(subset=frozenset(subset), degree=degree, parts=tuple(names),
                     sum=direct_sum(summands))


def assemble_even(module: DiagramModule, src: Assembled, dst: Assembled) -> GroupHom:
    """Canonical degree-preserving map between assembled vertices.

    Blocks exist between nested components and are resolved along quiver
    paths; non-nested component pairs contribute zero blocks.
    """
    shape = module.shape
    blocks: List[List[IntMatrix]] = []
    for t in dst.parts:
        row = []
        tset = shape.carriers[t]
        for s in src.parts:
            sset = shape.carriers[s]
            sg = module.group(s, src.degree)
            tg = module.group(t, dst.degree)
            if sset <= tset or tset <= sset:
                path = shape.resolve_even_path(s, t)
                if path is None:
                    raise ValueError(f"no quiver path for canonical map {s} -> {t}")
                row.append(path_hom(module, path, (s, src.degree)).matrix)
            else:
                row.append(IntMatrix.zeros(tg.generators, sg.generators))
        blocks.append(row)
    mat = IntMatrix.block(blocks) if blocks and src.parts else IntMatrix.zeros(
        dst.group.generators, src.group.generators)
    if not dst.parts:
        mat = IntMatrix.zeros(0, src.group.generators)
    return GroupHom(src.group, dst.group, mat)


def assemble_delta(module: DiagramModule, ctx: SixTermContext,
                   src: Assembled, dst: Assembled) -> GroupHom:
    """Connecting map of a declared context, from quotient to ideal side."""
    blocks: List[List[IntMatrix]] = []
    for c in dst.parts:
        row = []
        cg = module.group(c, dst.degree)
        for e in src.parts:
            eg = module.group(e, src.degree)
            combo = ctx.delta.get((e, c))
            if combo is None:
                row.append(IntMatrix.zeros(cg.generators, eg.generators))
            else:
                row.append(combo_hom(module, combo, (e, src.degree), (c, dst.degree)).matrix)
        blocks.append(row)
    mat = IntMatrix.block(blocks) if blocks and src.parts else IntMatrix.zeros(
        dst.group.generators, src.group.generators)
    if not dst.parts:
        mat = IntMatrix.zeros(0, src.group.generators)
    return GroupHom(src.group, dst.group, mat)


@dataclass(frozen=True)
class ContextMaps:
    """The six maps of one context: i, r, d in each degree."""

    ctx: SixTermContext
    inc: Tuple[GroupHom, GroupHom]   # U_j -> Y_j
    res: Tuple[GroupHom, GroupHom]   # Y_j -> Q_j
    bdy: Tuple[GroupHom, GroupHom]   # Q_j -> U_{1-j}


def context_maps(module: DiagramModule, ctx: SixTermContext) -> ContextMaps:
    u = [assemble_vertex(module, ctx.ideal, j) for j in (0, 1)]
    y = [assemble_vertex(module, ctx.total, j) for j in (0, 1)]
    q = [assemble_vertex(module, ctx.quotient, j) for j in (0, 1)]
    inc = tuple(assemble_even(module, u[j], y[j]) for j in (0, 1))
    res = tuple(assemble_even(module, y[j], q[j]) for j in (0, 1))
    bdy = tuple(assemble_delta(module, ctx, q[j], u[1 - j]) for j in (0, 1))
    return ContextMaps(ctx=ctx, inc=inc, res=res, bdy=bdy)  # type: ignore[arg-type]


# -- reports ----------------------------------------------------------------------


@dataclass
class Report:
    title: str
    failures: List[str] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, message: str) -> None:
        self.failures.append(message)

    def merge(self, other: "Report") -> None:
        self.failures.extend(f"{other.title}: {m}" for m in other.failures)
        self.checked += other.checked

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        lines = [f"[{status}] {self.title} ({self.checked} checks)"]
        lines.extend(f"  - {m}" for m in self.failures)
        return "\n".join(lines)


# -- module validation ---------------------------------------------------------------


def validate_module(module: DiagramModule) -> Report:
    """Check arrow well-definedness and every declared shape relation."""
    rep = Report(title=f"validate {module.name or 'module'}")
    for arrow, deg in module.shape.arrow_instances():
        h = module.hom(arrow.key, deg)
        rep.checked += 1
        wd = is_well_defined(h)
        if not wd.ok:
            rep.fail(f"map {arrow.key}@{deg} is not well defined (relation column {wd.certificate})")
    if module.side != "left":
        return rep
    for idx, rel in enumerate(module.shape.relations):
        for deg in rel.degrees:
            start, end = _relation_ends(module.shape, rel, deg)
            lhs = combo_hom(module, rel.lhs, start, end)
            rhs = combo_hom(module, rel.rhs, start, end) if rel.rhs else GroupHom.zero(lhs.dom, lhs.cod)
            rep.checked += 1
            if not homs_equal(lhs, rhs):
                note = f" ({rel.note})" if rel.note else ""
                rep.fail(f"relation {idx}{note} fails in degree {deg}")
    return rep


def _relation_ends(shape: DiagramShape, rel: Relation, deg: int):
    combo = rel.lhs if rel.lhs else rel.rhs
    first_path = combo[0][1]
    if not first_path:
        raise ValueError("relation contains an empty path")
    start = (shape.arrow_by_key[first_path[0]].src, deg)
    end = path_end(shape, first_path, start)
    for side in (rel.lhs, rel.rhs):
        for _, path in side:
            if path and (shape.arrow_by_key[path[0]].src, deg) != start:
                raise ValueError("relation paths have different sources")
            if path and path_end(shape, path, start) != end:
                raise ValueError("relation paths have different targets")
    return start, end


def check_six_term_exact(module: DiagramModule) -> Report:
    """Exactness of every declared context at all six positions."""
    rep = Report(title=f"six-term exactness of {module.name or 'module'}")
    for ctx in module.shape.contexts:
        maps = context_maps(module, ctx)
        # cyclic order: U0 -i> Y0 -r> Q0 -d> U1 -i> Y1 -r> Q1 -d> U0
        chain = [
            ("U0", maps.bdy[1], maps.inc[0]),
            ("Y0", maps.inc[0], maps.res[0]),
            ("Q0", maps.res[0], maps.bdy[0]),
            ("U1", maps.bdy[0], maps.inc[1]),
            ("Y1", maps.inc[1], maps.res[1]),
            ("Q1", maps.res[1], maps.bdy[1]),
        ]
        for pos, f, g in chain:
            rep.checked += 1
            if not is_exact_at(f, g):
                rep.fail(f"context {ctx.label} is not exact at {pos}")
    return rep


def check_rrz_like(module: DiagramModule) -> Report:
    """Vanishing of every even-to-odd connecting map."""
    rep = Report(title=f"real-rank-zero-like check of {module.name or 'module'}")
    for ctx in module.shape.contexts:
        q0 = assemble_vertex(module, ctx.quotient, 0)
        u1 = assemble_vertex(module, ctx.ideal, 1)
        bdy = assemble_delta(module, ctx, q0, u1)
        rep.checked += 1
        if not bdy.is_zero():
            rep.fail(f"context {ctx.label}: even-to-odd connecting map is nonzero")
    for arrow in module.shape.arrows:
        if arrow.kind != "d":
            continue
        rep.checked += 1
        if not module.hom(arrow.key, 0).is_zero():
            rep.fail(f"arrow {arrow.key}@0 (even to odd) is nonzero")
    return rep


# -- homomorphisms of modules ----------------------------------------------------------


@dataclass
class DiagramHom:
    src: DiagramModule
    dst: DiagramModule
    components: Dict[Tuple[str, int], GroupHom]

    def component(self, carrier: str, deg: int) -> GroupHom:
        h = self.components.get((carrier, deg))
        if h is not None:
            return h
        return GroupHom.zero(self.src.group(carrier, deg), self.dst.group(carrier, deg))


def verify_hom(h: DiagramHom) -> Report:
    """Check every naturality square of a module homomorphism."""
    rep = Report(title="naturality")
    if h.src.shape is not h.dst.shape and h.src.shape.to_doc() != h.dst.shape.to_doc():
        rep.fail("source and destination live over different shapes")
        return rep
    for v in sorted(set(h.src.groups) | set(h.dst.groups) | set(h.components)):
        comp = h.component(*v)
        rep.checked += 1
        if comp.dom.generators != h.src.group(*v).generators or \
           comp.cod.generators != h.dst.group(*v).generators:
            rep.fail(f"component at {v} has wrong shape")
            return rep
        wd = is_well_defined(comp)
        if not wd.ok:
            rep.fail(f"component at {v} is not well defined")
    for arrow, deg in h.src.shape.arrow_instances():
        iv = (arrow.src, deg)
        ov = h.src.shape.out_vertex(arrow, deg)
        left = h.component(*ov).compose(h.src.hom(arrow.key, deg))
        right = h.dst.hom(arrow.key, deg).compose(h.component(*iv))
        rep.checked += 1
        if not homs_equal(left, right):
            rep.fail(f"naturality fails at arrow {arrow.key}@{deg}")
    return rep


def is_module_isomorphism(h: DiagramHom) -> bool:
    if not verify_hom(h).ok:
        return False
    for v in sorted(set(h.src.groups) | set(h.dst.groups)):
        if not is_isomorphism(h.component(*v)):
            return False
    return True


@dataclass(frozen=True)
class SolveHomResult:
    hom: Optional[DiagramHom]
    homogeneous: Tuple[Dict[Tuple[str, int], IntMatrix], ...] = ()
    infeasible: Optional[HomInfeasible] = None

    @property
    def feasible(self) -> bool:
        return self.hom is not None


def solve_hom(src: DiagramModule, dst: DiagramModule,
              pins: Optional[Dict[Tuple[str, int], GroupHom]] = None) -> SolveHomResult:
    """Complete a partial component family to a natural transformation.

    Unknown components are solved for simultaneously; the result carries the
    homogeneous solution space so callers can certify uniqueness.  Returns an
    infeasibility certificate naming the violated naturality square otherwise.
    """
    pins = dict(pins or {})
    for v, h in pins.items():
        wd = is_well_defined(h)
        if not wd.ok:
            raise ValueError(f"pinned component at {v} is not well defined")
        if h.dom.generators != src.group(*v).generators or \
           h.cod.generators != dst.group(*v).generators:
            raise ValueError(f"pinned component at {v} has wrong shape")
    vertices = sorted(set(src.groups) | set(dst.groups))
    unknowns = [v for v in vertices if v not in pins]
    variables = [
        MatrixVar(name=_vname(v), rows=dst.group(*v).generators, cols=src.group(*v).generators)
        for v in unknowns
    ]
    unknown_set = set(unknowns)
    equations = []
    for arrow, deg in src.shape.arrow_instances():
        iv = (arrow.src, deg)
        ov = src.shape.out_vertex(arrow, deg)
        src_map = src.hom(arrow.key, deg).matrix
        dst_map = dst.hom(arrow.key, deg).matrix
        rows = dst.group(*ov).generators
        cols = src.group(*iv).generators
        if rows == 0 or cols == 0:
            continue
        terms = []
        rhs = IntMatrix.zeros(rows, cols)
        if ov in unknown_set:
            terms.append(MatTerm(var=_vname(ov), right=src_map))
        else:
            pinned = pins.get(ov)
            mat = pinned.matrix if pinned is not None else IntMatrix.zeros(
                dst.group(*ov).generators, src.group(*ov).generators)
            rhs = rhs - (mat @ src_map)
        if iv in unknown_set:
            terms.append(MatTerm(var=_vname(iv), left=-dst_map))
        else:
            pinned = pins.get(iv)
            mat = pinned.matrix if pinned is not None else IntMatrix.zeros(
                dst.group(*iv).generators, src.group(*iv).generators)
            rhs = rhs + (dst_map @ mat)
        rels = dst.group(*ov).relations
        equations.append(MatEquation(
            terms=tuple(terms), rhs=rhs,
            modulus=rels if rels.cols else None,
            label=f"square {arrow.key}@{deg}",
        ))
    res = hom_solve(variables, equations)
    if isinstance(res, HomInfeasible):
        return SolveHomResult(hom=None, infeasible=res)
    components = dict(pins)
    for v in unknowns:
        components[v] = GroupHom(src.group(*v), dst.group(*v), res.assignment[_vname(v)])
    homogeneous = tuple(
        {v: h[_vname(v)] for v in unknowns} for h in res.homogeneous
    )
    return SolveHomResult(hom=DiagramHom(src=src, dst=dst, components=components),
                          homogeneous=homogeneous)


def _vname(v: Tuple[str, int]) -> str:
    return f"X[{v[0]}_{v[1]}]"


# -- structural operations ----------------------------------------------------------


def suspend(module: DiagramModule) -> DiagramModule:
    """Degree flip; an involution because every shape here is degree symmetric."""
    groups = {(c, 1 - d): g for (c, d), g in module.groups.items()}
    maps = {(key, 1 - d): mat for (key, d), mat in module.maps.items()}
    prov = None
    if module.provenance is not None:
        prov = Provenance(
            corner=(module.provenance.corner[0], 1 - module.provenance.corner[1]),
            paths={(c, 1 - d): p for (c, d), p in module.provenance.paths.items()},
        )
    return DiagramModule(module.shape, groups, maps, side=module.side, provenance=prov,
                         name=f"S({module.name})" if module.name else "")


def module_direct_sum(parts: Sequence[DiagramModule]) -> DiagramModule:
    if not parts:
        raise ValueError("empty direct sum of modules")
    shape = parts[0].shape
    side = parts[0].side
    groups = {}
    maps = {}
    for v in shape.vertices():
        summands = [p.group(*v) for p in parts]
        total = direct_sum(summands).group
        if total.generators:
            groups[v] = total
    for arrow, deg in shape.arrow_instances():
        mats = [p.hom(arrow.key, deg).matrix for p in parts]
        maps[(arrow.key, deg)] = IntMatrix.block_diagonal(mats)
    return DiagramModule(shape, groups, maps, side=side,
                         name=" + ".join(p.name for p in parts if p.name))


def quotient_module(h: DiagramHom) -> DiagramModule:
    """Vertexwise cokernel of a verified module homomorphism."""
    dst = h.dst
    groups = {}
    for v in sorted(set(dst.groups) | set(h.src.groups)):
        comp = h.component(*v)
        coker, _ = cokernel(comp)
        groups[v] = coker
    maps = {k: mat for k, mat in dst.maps.items()}
    return DiagramModule(dst.shape, groups, maps, side=dst.side,
                         name=f"{dst.name}/{h.src.name}" if dst.name else "")


def kernel_module(h: DiagramHom) -> DiagramModule:
    """Vertexwise kernel of a verified module homomorphism, with induced maps."""
    src = h.src
    groups: Dict[Tuple[str, int], PresentedGroup] = {}
    bases: Dict[Tuple[str, int], IntMatrix] = {}
    for v in src.shape.vertices():
        comp = h.component(*v)
        ker, incl = kernel(comp)
        groups[v] = ker
        bases[v] = incl.matrix
    maps = {}
    for arrow, deg in src.shape.arrow_instances():
        iv = (arrow.src, deg)
        ov = src.shape.out_vertex(arrow, deg)
        image_cols = src.hom(arrow.key, deg).matrix @ bases[iv]
        target = bases[ov].hstack(src.group(*ov).relations)
        res = solve_linear(target, image_cols)
        if not isinstance(res, Solution):  # pragma: no cover - naturality guarantees this
            raise RuntimeError(f"kernel is not preserved along {arrow.key}@{deg}")
        coeff = res.particular.submatrix(range(bases[ov].cols), range(image_cols.cols))
        maps[(arrow.key, deg)] = coeff
    return DiagramModule(src.shape, groups, maps, side=src.side,
                         name=f"ker({src.name})" if src.name else "")


def canonicalize_module(module: DiagramModule) -> DiagramModule:
    """Rewrite every vertex group in invariant-factor form, transporting maps."""
    forms = {v: canonical_form(module.group(*v)) for v in module.shape.vertices()}
    groups = {v: forms[v].group for v in module.shape.vertices() if forms[v].group.generators}
    maps = {}
    for arrow, deg in module.shape.arrow_instances():
        iv = (arrow.src, deg)
        ov = module.shape.out_vertex(arrow, deg)
        dv, cv = (iv, ov) if module.side == "left" else (ov, iv)
        h = module.hom(arrow.key, deg)
        mat = forms[cv].to_canonical.matrix @ h.matrix @ forms[dv].from_canonical.matrix
        maps[(arrow.key, deg)] = mat
    return DiagramModule(module.shape, groups, maps, side=module.side, name=module.name)


# -- tensor, dual, extension --------------------------------------------------------


def tensor_with_group(p: DiagramModule, g: PresentedGroup) -> DiagramModule:
    """Vertexwise tensor of a free-table module with a coefficient group.

    Generators are ordered basis-major: (basis index, coefficient generator).
    Arrow matrices act on the table factor (Kronecker with the identity on g).
    """
    groups = {}
    maps = {}
    for v, grp in p.groups.items():
        if not grp.is_free():
            raise ValueError(f"tensor table has torsion at {v}")
        rank = grp.generators
        gens = rank * g.generators
        rel = IntMatrix.block_diagonal([g.relations] * rank) if rank else IntMatrix.zeros(0, 0)
        groups[v] = PresentedGroup(gens, rel)
    for (key, deg), mat in p.maps.items():
        maps[(key, deg)] = _kron_with_identity(mat, g.generators)
    return DiagramModule(p.shape, groups, maps, side=p.side, provenance=p.provenance,
                         name=f"{p.name} (x) {g.describe()}" if p.name else "")


def _kron_with_identity(mat: IntMatrix, block: int) -> IntMatrix:
    out = [[0] * (mat.cols * block) for _ in range(mat.rows * block)]
    for i in range(mat.rows):
        for j in range(mat.cols):
            v = mat.data[i][j]
            if v == 0:
                continue
            for k in range(block):
                out[i * block + k][j * block + k] = v
    return IntMatrix(mat.rows * block, mat.cols * block, out)


def dualize(q: DiagramModule) -> DiagramModule:
    """Integer dual of a free-table module: transpose all maps, flip the side."""
    for v, grp in q.groups.items():
        if not grp.is_free():
            raise ValueError(f"dualization requires free groups; torsion at {v}")
    side = "left" if q.side == "right" else "right"
    maps = {key: mat.transpose() for key, mat in q.maps.items()}
    return DiagramModule(q.shape, dict(q.groups), maps, side=side, provenance=q.provenance,
                         name=f"dual({q.name})" if q.name else "")


def hom_into_group(q: DiagramModule, g: PresentedGroup) -> DiagramModule:
    """Hom(Q, g) for a free right-table Q: a left module with G-power vertices."""
    if q.side != "right":
        raise ValueError("hom_into_group expects a right-module table")
    groups = {}
    maps = {}
    for v, grp in q.groups.items():
        if not grp.is_free():
            raise ValueError(f"hom table has torsion at {v}")
        rank = grp.generators
        gens = rank * g.generators
        rel = IntMatrix.block_diagonal([g.relations] * rank) if rank else IntMatrix.zeros(0, 0)
        groups[v] = PresentedGroup(gens, rel)
    for (key, deg), mat in q.maps.items():
        maps[(key, deg)] = _kron_with_identity(mat.transpose(), g.generators)
    return DiagramModule(q.shape, groups, maps, side="left", provenance=q.provenance,
                         name=f"Hom({q.name}, {g.describe()})" if q.name else "")


def extend_from_corner(p: DiagramModule, target: DiagramModule,
                       phi: GroupHom) -> DiagramHom:
    """Extend a corner map uniquely along generator provenance.

    ``p`` must be a tensor of a provenance-carrying table with phi's domain;
    the extension evaluates every basis path in the target and is then checked
    for naturality, failing loudly when the declared relations conflict.
    """
    if p.provenance is None:
        raise ValueError("module lacks generator provenance")
    corner = p.provenance.corner
    if phi.cod.generators != target.group(*corner).generators:
        raise ValueError("corner map does not land in the target corner group")
    components: Dict[Tuple[str, int], GroupHom] = {}
    for v in p.shape.vertices():
        pg = p.group(*v)
        tg = target.group(*v)
        if pg.generators == 0:
            continue
        combos = p.provenance.paths.get(v)
        if combos is None:
            raise ValueError(f"provenance missing for populated vertex {v}")
        cols: Optional[IntMatrix] = None
        for combo in combos:
            transport = combo_hom(target, combo, corner, v).matrix @ phi.matrix
            cols = transport if cols is None else cols.hstack(transport)
        assert cols is not None
        if cols.cols != pg.generators:
            raise ValueError(f"provenance width mismatch at {v}")
        components[v] = GroupHom(pg, tg, cols)
    hom = DiagramHom(src=p, dst=target, components=components)
    rep = verify_hom(hom)
    if not rep.ok:
        raise ValueError("corner extension is inconsistent: " + "; ".join(rep.failures))
    return hom


def co_extend_to_corner(source: DiagramModule, l: DiagramModule,
                        psi: GroupHom) -> DiagramHom:
    """Co-extend a corner map into an injective-type Hom table.

    ``l`` must be hom_into_group(Q, psi.cod) for a provenance-carrying right
    table Q whose basis paths run from each vertex to the corner.
    """
    if l.provenance is None:
        raise ValueError("target lacks cogenerator provenance")
    corner = l.provenance.corner
    if psi.dom.generators != source.group(*corner).generators:
        raise ValueError("corner map does not start at the source corner group")
    components: Dict[Tuple[str, int], GroupHom] = {}
    for v in l.shape.vertices():
        lg = l.group(*v)
        sg = source.group(*v)
        if lg.generators == 0:
            continue
        combos = l.provenance.paths.get(v)
        if combos is None:
            raise ValueError(f"provenance missing for populated vertex {v}")
        rows: Optional[IntMatrix] = None
        for combo in combos:
            block = psi.matrix @ combo_hom(source, combo, v, corner).matrix
            rows = block if rows is None else rows.vstack(block)
        assert rows is not None
        if rows.rows != lg.generators:
            raise ValueError(f"provenance height mismatch at {v}")
        components[v] = GroupHom(sg, lg, rows)
    hom = DiagramHom(src=source, dst=l, components=components)
    rep = verify_hom(hom)
    if not rep.ok:
        raise ValueError("corner co-extension is inconsistent: " + "; ".join(rep.failures))
    return hom


# -- reduced invariant ---------------------------------------------------------------


@dataclass
class ReducedInvariant:
    """Per-point data: K1 of the point, K0 of its boundary and smallest open."""

    space: FiniteSpace
    odd: Dict[str, PresentedGroup]
    boundary: Dict[str, PresentedGroup]
    open_: Dict[str, PresentedGroup]
    delta: Dict[str, GroupHom]            # odd(x) -> boundary(x)
    iota: Dict[str, GroupHom]             # boundary(x) -> open(x)
    rho: Dict[Tuple[str, str], GroupHom]  # open(y) -> boundary(x) for y -> x

    def is_zero(self) -> bool:
        return all(g.is_trivial() for g in list(self.odd.values()) + list(self.open_.values()))


def reduced_from_full(module: DiagramModule) -> ReducedInvariant:
    """Extract the reduced invariant from a full diagram module."""
    space = module.shape.space
    odd = {}
    boundary = {}
    open_ = {}
    delta = {}
    iota = {}
    rho = {}
    assembled_boundary = {}
    for x in space.points:
        tilde = space.smallest_open(x)
        bset = space.boundary(x)
        x_name = carrier_name({x})
        tilde_asm = assemble_vertex(module, tilde, 0)
        b_asm = assemble_vertex(module, bset, 0)
        assembled_boundary[x] = b_asm
        odd[x] = module.group(x_name, 1)
        boundary[x] = b_asm.group
        open_[x] = tilde_asm.group
        iota[x] = assemble_even(module, b_asm, tilde_asm)
        if bset:
            ctx = _find_context(module.shape, bset, tilde)
            point_asm = assemble_vertex(module, frozenset({x}), 1)
            delta[x] = assemble_delta(module, ctx, point_asm, b_asm)
        else:
            delta[x] = GroupHom.zero(odd[x], boundary[x])
    for x in space.points:
        for y in space.specialization_arrows(x):
            y_asm = assemble_vertex(module, space.smallest_open(y), 0)
            rho[(y, x)] = assemble_even(module, y_asm, assembled_boundary[x])
    return ReducedInvariant(space=space, odd=odd, boundary=boundary, open_=open_,
                            delta=delta, iota=iota, rho=rho)


def _find_context(shape: DiagramShape, ideal: FrozenSet[str], total: FrozenSet[str]) -> SixTermContext:
    for ctx in shape.contexts:
        if ctx.ideal == ideal and ctx.total == total:
            return ctx
    raise ValueError(
        f"shape declares no context ({carrier_name(ideal)} in {carrier_name(total)})"
    )


def check_exact_r_module(red: ReducedInvariant) -> Report:
    """Per-point exactness plus the path-pair coexactness presentation."""
    rep = Report(title="reduced-invariant exactness")
    space = red.space
    for x in space.points:
        rep.checked += 1
        if not is_exact_at(red.delta[x], red.iota[x]):
            rep.fail(f"point {x}: odd -> boundary -> open is not exact")
        sources = space.specialization_arrows(x)
        if not sources:
            rep.checked += 1
            if not red.boundary[x].is_trivial():
                rep.fail(f"point {x}: empty boundary carries a nontrivial group")
            continue
        summands = [red.open_[y] for y in sources]
        target_sum = direct_sum(summands)
        v_blocks = [red.rho[(y, x)].matrix for y in sources]
        v = GroupHom(target_sum.group, red.boundary[x],
                     IntMatrix.block([v_blocks]))
        rep.checked += 1
        if not is_surjective(v):
            rep.fail(f"point {x}: boundary is not covered by the incoming opens")
        pairs = space.distinct_path_pairs(x)
        pair_summands = [red.open_[p[0]] for p, _ in pairs]
        pair_sum = direct_sum(pair_summands) if pairs else direct_sum([])
        cols = []
        for (p, q) in pairs:
            col = [IntMatrix.zeros(red.open_[y].generators, red.open_[p[0]].generators)
                   for y in sources]
            for path, sign in ((p, 1), (q, -1)):
                chain = _open_chain(red, path)
                idx = sources.index(path[-2])
                col[idx] = col[idx] + chain.matrix.scale(sign)
            cols.append(col)
        if pairs:
            u = GroupHom(pair_sum.group, target_sum.group,
                         IntMatrix.block([[cols[k][i] for k in range(len(pairs))]
                                          for i in range(len(sources))]))
        else:
            u = GroupHom.zero(pair_sum.group, target_sum.group)
        rep.checked += 1
        if not is_exact_at(u, v):
            rep.fail(f"point {x}: path-pair presentation of the boundary is not exact")
    return rep


def _open_chain(red: ReducedInvariant, path: Tuple[str, ...]) -> GroupHom:
    """Composite open(s) -> open(y) along a specialization path s -> ... -> y -> x."""
    acc = GroupHom.identity(red.open_[path[0]])
    for i in range(len(path) - 2):
        y, x = path[i], path[i + 1]
        step = red.iota[x].compose(red.rho[(y, x)])
        acc = step.compose(acc)
    return acc


def unit_group(red: ReducedInvariant) -> PresentedGroup:
    """K0 of the whole algebra, presented as the colimit of the point opens.

    Generators come from every open(x); each arrow y -> x glues a copy of
    open(y) to its image in open(x).  Equivalently this is the cokernel of the
    difference map collecting all pairs of comparisons, presented with one
    relation block per arrow.
    """
    space = red.space
    points = sorted(space.points)
    offsets = {}
    total = 0
    for x in points:
        offsets[x] = total
        total += red.open_[x].generators
    rel_blocks = [IntMatrix.block_diagonal([red.open_[x].relations for x in points])] if points else []
    cols: List[List[int]] = []
    for x in points:
        for y in space.specialization_arrows(x):
            glue = red.iota[x].compose(red.rho[(y, x)]).matrix
            for g in range(red.open_[y].generators):
                col = [0] * total
                col[offsets[y] + g] -= 1
                for i in range(glue.rows):
                    col[offsets[x] + i] += glue.data[i][g]
                cols.append(col)
    glue_mat = IntMatrix(total, len(cols), [[c[i] for c in cols] for i in range(total)]) \
        if cols else IntMatrix.zeros(total, 0)
    relations = rel_blocks[0].hstack(glue_mat) if rel_blocks else glue_mat
    return PresentedGroup(total, relations)
