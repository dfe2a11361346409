"""Line-oriented text format for surfaces, cycles and Veech group generators.

::

    # comments start with '#'
    FIELD
    -2 0 1 ; 1 2            # min_poly coefficients (constant first) ; root interval
    POLYGON
    0, 0
    1, 0
    1/2 + 1/2*r, 1/2*r     # "x, y" field literals
    GLUE
    0.0 <-> 1.4            # polygon.edge pairs
    MARK
    0 1                    # vertex class ids with cone angle 2 pi
    CYCLE w
    0.0 : 1                # edge (oriented as its polygon edge) : integer weight
    GENERATOR T
    1, 1 ; 0, 1            # matrix rows

Polygons are numbered by order of appearance.  ``FIELD`` may be ``QQ``.
Serializing writes cycle weights on class representatives, so
``dumps(loads(dumps(x))) == dumps(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .numfield import QQ, Field, FieldError, Vec, field_create
from .surface import EdgeRef, Polygon, RelativeCycle, SurfaceError, TranslationSurface
from .veech import GroupElement


class SurfaceFileError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


@dataclass
class SurfaceFile:
    surface: TranslationSurface
    cycles: dict = field(default_factory=dict)
    generators: list = field(default_factory=list)


def _field_line(fld: Field) -> str:
    if fld.degree == 1:
        return "QQ"
    return fld.literal()


def _parse_field(text, line):
    if text.strip() == "QQ":
        return QQ
    try:
        poly, interval = text.split(";")
        coeffs = [Fraction(c) for c in poly.split()]
        lo, hi = (Fraction(c) for c in interval.split())
        if len(coeffs) == 2 and coeffs == [0, 1]:
            return QQ
        return field_create(coeffs, (lo, hi))
    except (ValueError, FieldError) as e:
        raise SurfaceFileError(f"bad FIELD line {text!r}: {e}", line) from None


def _parse_pair(fld, text, line):
    try:
        x, y = text.split(",")
        return fld.parse(x.strip()), fld.parse(y.strip())
    except (ValueError, FieldError) as e:
        raise SurfaceFileError(f"bad coordinate pair {text!r}: {e}", line) from None


def _parse_ref(text, line):
    try:
        return EdgeRef.parse(text.strip())
    except ValueError:
        raise SurfaceFileError(f"bad edge reference {text!r}", line) from None


def loads(text: str) -> SurfaceFile:
    fld = None
    polygons = []
    gluing = {}
    marks = []
    cycles = {}
    gens = []
    section = None
    name = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head in ("FIELD", "POLYGON", "GLUE", "MARK", "CYCLE", "GENERATOR"):
            section = head
            name = rest.strip() or None
            if head != "FIELD" and fld is None:
                raise SurfaceFileError("FIELD must come first", lineno)
            if head == "POLYGON":
                polygons.append([])
            elif head == "CYCLE":
                if not name:
                    raise SurfaceFileError("CYCLE needs a name", lineno)
                if name in cycles:
                    raise SurfaceFileError(f"duplicate cycle {name}", lineno)
                cycles[name] = {}
            elif head == "GENERATOR":
                gens.append((name or f"g{len(gens)}", None, lineno))
            continue
        if section is None:
            raise SurfaceFileError(f"content outside a section: {line!r}", lineno)
        if section == "FIELD":
            if fld is not None:
                raise SurfaceFileError("FIELD given twice", lineno)
            fld = _parse_field(line, lineno)
        elif section == "POLYGON":
            polygons[-1].append(Vec(*_parse_pair(fld, line, lineno)))
        elif section == "GLUE":
            a, sep, b = line.partition("<->")
            if not sep:
                raise SurfaceFileError(f"expected 'p.e <-> q.f', got {line!r}", lineno)
            a, b = _parse_ref(a, lineno), _parse_ref(b, lineno)
            if a in gluing or b in gluing:
                raise SurfaceFileError(f"edge glued twice in {line!r}", lineno)
            gluing[a] = b
            gluing[b] = a
        elif section == "MARK":
            try:
                marks.extend(int(t) for t in line.split())
            except ValueError:
                raise SurfaceFileError(f"bad MARK line {line!r}", lineno) from None
        elif section == "CYCLE":
            ref, sep, wt = line.partition(":")
            try:
                w = int(wt)
            except ValueError:
                raise SurfaceFileError(f"bad weight in {line!r}", lineno) from None
            ref = _parse_ref(ref, lineno)
            cycles[name][ref] = cycles[name].get(ref, 0) + w
        elif section == "GENERATOR":
            gname, rows, gl = gens[-1]
            if rows is not None:
                raise SurfaceFileError("GENERATOR takes a single line", lineno)
            try:
                r0, r1 = line.split(";")
            except ValueError:
                raise SurfaceFileError(f"expected 'a, b ; c, d', got {line!r}", lineno) from None
            rows = [_parse_pair(fld, r0, lineno), _parse_pair(fld, r1, lineno)]
            gens[-1] = (gname, rows, gl)
    if fld is None:
        raise SurfaceFileError("missing FIELD section")
    if not polygons:
        raise SurfaceFileError("no POLYGON section")
    try:
        polys = [Polygon(vs, fld) for vs in polygons]
        half = {a: b for a, b in gluing.items() if a < b}
        surface = TranslationSurface(polys, half, marks)
        out_cycles = {}
        for cname, mapping in cycles.items():
            for ref in mapping:
                if ref not in surface.class_of:
                    raise SurfaceFileError(f"cycle {cname}: edge {ref} does not exist")
            out_cycles[cname] = RelativeCycle.from_edges(surface, mapping)
    except SurfaceError as e:
        raise SurfaceFileError(f"{type(e).__name__}: {e}") from e
    generators = []
    for gname, rows, gl in gens:
        if rows is None:
            raise SurfaceFileError(f"generator {gname} has no matrix", gl)
        try:
            generators.append(GroupElement.from_rows(rows, gname, fld))
        except ValueError as e:
            raise SurfaceFileError(f"generator {gname}: {e}", gl) from None
    return SurfaceFile(surface, out_cycles, generators)


def dumps(surface: TranslationSurface, cycles=None, generators=(), title=None) -> str:
    lines = []
    if title:
        lines.append(f"# {title}")
    lines += ["FIELD", _field_line(surface.field)]
    for poly in surface.polygons:
        lines.append("POLYGON")
        lines += [f"{v.x.literal()}, {v.y.literal()}" for v in poly.vertices]
    lines.append("GLUE")
    for r in surface.edge_classes:
        lines.append(f"{r} <-> {surface.gluing[r]}")
    if surface.marked_input:
        lines += ["MARK", " ".join(str(m) for m in surface.marked_input)]
    for cname, w in (cycles or {}).items():
        lines.append(f"CYCLE {cname}")
        lines += [f"{surface.edge_classes[c]} : {wt}" for c, wt in w.weights]
    for g in generators:
        lines.append(f"GENERATOR {'*'.join(g.word) if g.word else ''}".rstrip())
        a, b, c, d = g.entries()
        lines.append(f"{a.literal()}, {b.literal()} ; {c.literal()}, {d.literal()}")
    return "\n".join(lines) + "\n"


def load(path) -> SurfaceFile:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump_bundle(bundle) -> str:
    return dumps(bundle.surface, bundle.cycles, bundle.veech_generators, title=bundle.name)
