import logging
import re
from fractions import Fraction
from functools import singledispatch
from typing import Iterator, List, Sequence, Tuple

from .bands import FramedPLKnot
from .dependencies import DomainError
from .homology import HomologyContext
from .immersion import ImmersionData
from .schemas import (
    BandClassReport,
    BandReport,
    CatalogReport,
    CobordantReport,
    GroupElementModel,
    GroupReport,
    HomologyReport,
    IsotropyReport,
    PsiReport,
    RealizeReport,
    ValidationReport,
    VerificationReport,
    XBundleReport,
)
from .triangulation import Triangulation

logger = logging.getLogger(__name__)

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")
_CYCLE = re.compile(r"\(([1-4]*)\)")


class ParseError(DomainError):
    def __init__(self, message: str, line_number: int = 0):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}" if line_number else message)


def log_command(verb: str, target: str):
    logger.info(f"Received {verb} command for {target}")


def _content_lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    """Numbered, comment-stripped, non-blank lines split into tokens"""
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            yield number, tokens


def _int(token: str, number: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {token!r}", number) from None


def _keyword(tokens: List[str], keyword: str, number: int) -> int:
    if len(tokens) != 2 or tokens[0] != keyword:
        raise ParseError(f"expected '{keyword} <integer>', got {' '.join(tokens)!r}", number)
    return _int(tokens[1], number, keyword)


# triangulations

def parse_triangulation(text: str, name: str = "") -> Triangulation:
    """`dim <2|3>`, `vertices <V>`, then one top simplex per line"""
    lines = _content_lines(text)
    header = [next(lines, None), next(lines, None)]
    if header[0] is None or header[1] is None:
        raise ParseError("a triangulation starts with 'dim' and 'vertices' lines", 1)
    dim = _keyword(header[0][1], "dim", header[0][0])
    if dim not in (2, 3):
        raise ParseError(f"dimension must be 2 or 3, got {dim}", header[0][0])
    vertices = _keyword(header[1][1], "vertices", header[1][0])
    if vertices <= 0:
        raise ParseError(f"vertex count must be positive, got {vertices}", header[1][0])

    simplices = []
    for number, tokens in lines:
        if len(tokens) != dim + 1:
            raise ParseError(f"a top simplex has {dim + 1} vertices, got {len(tokens)}", number)
        simplex = [_int(t, number, "vertex") for t in tokens]
        for v in simplex:
            if not 0 <= v < vertices:
                raise ParseError(f"vertex {v} outside 0..{vertices - 1}", number)
        simplices.append(simplex)
    if not simplices:
        raise ParseError("no top simplices")
    return Triangulation.from_simplices(dim, simplices, vertex_count=vertices, name=name)


# immersions

def parse_immersion(text: str, ctx: HomologyContext, label: str = "") -> ImmersionData:
    """`chi <k>`, then `triangle a b c` and `edge a b` lines naming simplices of the manifold"""
    cx = ctx.complex
    index = ctx.triangulation.face_index
    triangles, edges = set(), set()
    chi = None
    for number, tokens in _content_lines(text):
        kind = tokens[0]
        if kind == "chi":
            if chi is not None:
                raise ParseError("chi given twice", number)
            chi = _keyword(tokens, "chi", number)
            if not 0 <= chi < 8:
                raise ParseError(f"chi must be in 0..7, got {chi}", number)
            continue
        arity = {"triangle": 3, "edge": 2}.get(kind)
        if arity is None:
            raise ParseError(f"unknown record {kind!r}", number)
        if len(tokens) != arity + 1:
            raise ParseError(f"{kind} needs {arity} vertices", number)
        simplex = tuple(sorted(_int(t, number, "vertex") for t in tokens[1:]))
        if simplex not in index[arity - 1]:
            raise ParseError(f"{kind} {list(simplex)} is not a simplex of {ctx.triangulation.label}", number)
        target = triangles if arity == 3 else edges
        # repeated simplices cancel mod 2
        target.symmetric_difference_update({simplex})
    if chi is None:
        raise ParseError("missing 'chi' line")
    return ImmersionData(
        image_chain=cx.chain(2, sorted(triangles)),
        double_locus=cx.chain(1, sorted(edges)),
        n=chi,
        label=label,
    )


def format_immersion(ctx: HomologyContext, imm: ImmersionData) -> str:
    cx = ctx.complex
    lines = [f"chi {imm.n}"]
    lines.extend("triangle " + " ".join(map(str, t)) for t in cx.simplices_of(2, imm.image_chain))
    lines.extend("edge " + " ".join(map(str, e)) for e in cx.simplices_of(1, imm.double_locus))
    return "\n".join(lines) + "\n"


# framed knots

def parse_rational(token: str, number: int = 0) -> Fraction:
    if not _RATIONAL.match(token):
        raise ParseError(f"expected an integer or num/den, got {token!r}", number)
    try:
        return Fraction(token)
    except ZeroDivisionError:
        raise ParseError(f"zero denominator in {token!r}", number) from None


def _format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_knot(text: str) -> FramedPLKnot:
    """`return_sign <+1|-1>`, then `p x y z f fx fy fz` per vertex"""
    lines = _content_lines(text)
    first = next(lines, None)
    if first is None:
        raise ParseError("empty knot file")
    number, tokens = first
    if len(tokens) != 2 or tokens[0] != "return_sign" or tokens[1] not in ("+1", "-1", "1"):
        raise ParseError("expected 'return_sign +1' or 'return_sign -1'", number)
    return_sign = int(tokens[1])

    points, framing = [], []
    for number, tokens in lines:
        if len(tokens) != 8 or tokens[0] != "p" or tokens[4] != "f":
            raise ParseError("expected 'p x y z f fx fy fz'", number)
        points.append(tuple(parse_rational(t, number) for t in tokens[1:4]))
        framing.append(tuple(parse_rational(t, number) for t in tokens[5:8]))
    if len(points) < 3:
        raise ParseError(f"a knot needs at least 3 vertices, got {len(points)}")
    return FramedPLKnot(tuple(points), tuple(framing), return_sign)


def format_knot(knot: FramedPLKnot) -> str:
    lines = [f"return_sign {'+1' if knot.return_sign == 1 else '-1'}"]
    for p, f in zip(knot.points, knot.framing):
        lines.append("p " + " ".join(map(_format_rational, p)) + " f " + " ".join(map(_format_rational, f)))
    return "\n".join(lines) + "\n"


# permutations of {1,2,3,4}

def parse_permutation(text: str) -> Tuple[int, ...]:
    """Cycle notation such as (13)(24), `()` or `e`, or one-line notation such as 2341"""
    notation = text.replace(" ", "")
    if notation in ("", "e", "id", "()"):
        return (1, 2, 3, 4)
    if notation.startswith("("):
        if _CYCLE.sub("", notation):
            raise ParseError(f"malformed cycle notation {text!r}")
        image = {v: v for v in range(1, 5)}
        seen = set()
        for cycle in _CYCLE.findall(notation):
            values = [int(c) for c in cycle]
            if seen & set(values) or len(set(values)) != len(values):
                raise ParseError(f"cycles in {text!r} are not disjoint")
            seen.update(values)
            for a, b in zip(values, values[1:] + values[:1]):
                image[a] = b
        return tuple(image[v] for v in range(1, 5))
    if len(notation) != 4 or sorted(notation) != ["1", "2", "3", "4"]:
        raise ParseError(f"{text!r} is not a permutation of 1234")
    return tuple(int(c) for c in notation)


def format_permutation(perm: Sequence[int]) -> str:
    seen, cycles = set(), []
    for start in range(1, 5):
        if start in seen or perm[start - 1] == start:
            continue
        cycle, v = [], start
        while v not in seen:
            seen.add(v)
            cycle.append(v)
            v = perm[v - 1]
        cycles.append("(" + "".join(map(str, cycle)) + ")")
    return "".join(cycles) or "()"


# text renderers

def _element(e: GroupElementModel) -> str:
    return f"({e.h or '-'}, {e.d or '-'}, {e.n})"


def _structure(factors: Sequence[int]) -> str:
    return " x ".join(f"Z/{f}" for f in factors) or "trivial"


def _simplex(s: Sequence[int]) -> str:
    return "-".join(map(str, s))


@singledispatch
def render_text(report) -> str:
    raise TypeError(f"no text renderer for {type(report).__name__}")


@render_text.register
def _(report: ValidationReport) -> str:
    lines = [
        f"valid: {'yes' if report.valid else 'no'}",
        f"dimension: {report.dim}",
        f"vertices: {report.vertex_count}",
        f"top simplices: {report.top_simplex_count}",
    ]
    if report.euler_characteristic is not None:
        lines.append(f"euler characteristic: {report.euler_characteristic}")
    if report.orientable is not None:
        lines.append(f"orientable: {'yes' if report.orientable else 'no'}")
    for issue in report.issues:
        where = f" at {issue.simplex}" if issue.simplex is not None else ""
        lines.append(f"  [{issue.code}] {issue.message}{where}")
    return "\n".join(lines)


@render_text.register
def _(report: HomologyReport) -> str:
    lines = [
        f"manifold: {report.manifold} ({report.context_hash})",
        f"orientable: {'yes' if report.orientable else 'no'}",
        "betti (mod 2): " + " ".join(map(str, report.betti)),
        f"w1: {report.w1 or '-'}",
    ]
    for basis in report.bases:
        lines.append(f"H{basis.dimension} basis:")
        for i, cycle in enumerate(basis.cycles):
            lines.append(f"  [{i}] " + " ".join(_simplex(s) for s in cycle))
    if report.pairing:
        lines.append("intersection pairing H2 x H2 -> H1:")
        lines.extend(f"  e{p.i} . e{p.j} = {p.product or '-'}" for p in report.pairing)
    return "\n".join(lines)


@render_text.register
def _(report: VerificationReport) -> str:
    mode = report.mode.value
    if report.samples is not None:
        mode += f" ({report.samples} samples, seed {report.seed})"
    lines = [f"verification: {'passed' if report.passed else 'FAILED'} [{mode}] order {report.order}"]
    for check in report.checks:
        line = f"  {check.name:<24} {'ok' if check.passed else 'FAIL'} ({check.checked} checked)"
        if check.counterexample:
            line += " counterexample " + " ".join(_element(e) for e in check.counterexample)
        lines.append(line)
    return "\n".join(lines)


@render_text.register
def _(report: GroupReport) -> str:
    lines = [
        f"manifold: {report.manifold} ({report.context_hash})",
        f"variant: {report.variant.value} (n mod {report.modulus})",
        f"dim H2 = {report.dim_h2}, dim H1 = {report.dim_h1}",
        f"order: {report.order}",
        f"structure: {_structure(report.structure)}",
        f"exponent: {report.exponent}",
        f"ball subgroup order: {report.disk_subgroup_order}",
    ]
    if report.verification is not None:
        lines.append(render_text(report.verification))
    if report.cayley_csv is not None:
        lines.append("cayley table:")
        lines.append(report.cayley_csv.rstrip("\n"))
    return "\n".join(lines)


def _basis_lines(title: str, cycles) -> List[str]:
    lines = [f"{title}:"]
    lines.extend(f"  [{i}] " + " ".join(_simplex(s) for s in cycle) for i, cycle in enumerate(cycles))
    return lines


@render_text.register
def _(report: PsiReport) -> str:
    lines = [
        f"manifold: {report.manifold} ({report.context_hash})",
        f"immersion: {report.label}",
        f"variant: {report.variant.value}",
        f"psi = {_element(report.element)}",
    ]
    lines.extend(_basis_lines(f"H{report.h_basis.dimension} basis", report.h_basis.cycles))
    lines.extend(_basis_lines(f"H{report.d_basis.dimension} basis", report.d_basis.cycles))
    return "\n".join(lines)


@render_text.register
def _(report: CobordantReport) -> str:
    return "\n".join([
        f"manifold: {report.manifold} ({report.context_hash})",
        f"first:  {_element(report.first)}",
        f"second: {_element(report.second)}",
        f"cobordant: {'yes' if report.cobordant else 'no'}",
    ])


@render_text.register
def _(report: RealizeReport) -> str:
    lines = [
        f"manifold: {report.manifold} ({report.context_hash})",
        f"target: {_element(report.target)}",
        "components:",
    ]
    for c in report.components:
        lines.append(f"  {c.kind.value:<12} {c.surface or '':<12} n share {c.n_share}")
    if not report.components:
        lines.append("  (empty immersion)")
    lines.append(f"round trip: {_element(report.round_trip)}")
    lines.append(report.immersion.rstrip("\n"))
    return "\n".join(lines)


@render_text.register
def _(report: BandReport) -> str:
    return "\n".join([
        f"knot: {report.source} ({report.vertex_count} vertices)",
        f"band: {'Moebius band' if report.mobius else 'annulus'} ({report.boundary_components} boundary components)",
        f"epsilon: {report.epsilon}",
        f"half twists: {report.half_twists}",
        f"half twists mod 4: {report.half_twists_mod4}",
    ])


@render_text.register
def _(report: BandClassReport) -> str:
    lines = [
        f"core orientable in M: {'yes' if report.core_orientable_in_m else 'no'}",
        f"odd self-homotopy: {'yes' if report.odd_self_homotopy else 'no'}",
        f"regular homotopy classes: {report.class_count}",
    ]
    lines.extend("  {" + ", ".join(group) + "}" for group in report.classes)
    for group in report.reparametrized:
        lines.append("  up to reparametrization: " + " ~ ".join(group))
    for c in report.comparisons:
        lines.append(f"  twist {c.first:+d} vs {c.second:+d}: {c.relation.value}")
    return "\n".join(lines)


@render_text.register
def _(report: XBundleReport) -> str:
    lines = [f"{'monodromy':<10} {'bundle':<7} {'orientable':<11} {'fig 8':<6} fiber 8 substitution"]
    for r in report.rows:
        fiber = f"{r.fiber8_surface} in {r.fiber8_neighborhood}" if r.fiber8_surface else "-"
        lines.append(
            f"{r.monodromy:<10} L{r.index:<6} {'yes' if r.orientable else 'no':<11} "
            f"{'yes' if r.preserves_figure8 else 'no':<6} {fiber}"
        )
    return "\n".join(lines)


@render_text.register
def _(report: IsotropyReport) -> str:
    return "\n".join([
        f"surface: {report.surface} ({'orientable' if report.orientable else 'non-orientable'})",
        f"parity: {report.parity.value}",
        f"dim H1: {report.dim_h1}",
        f"w1: {report.w1 or '-'}",
        "isotropy: {" + ", ".join(v or "-" for v in report.subgroup) + "}",
        f"regular homotopy classes: {report.class_count}",
    ])


@render_text.register
def _(report: CatalogReport) -> str:
    lines = [f"{'name':<8} {'dim':<4} {'orientable':<11} {'betti':<12} {'variant':<14} {'order':<6} structure"]
    for r in report.rows:
        lines.append(
            f"{r.name:<8} {r.dim:<4} {'yes' if r.orientable else 'no':<11} {' '.join(map(str, r.betti)):<12} "
            f"{r.variant.value if r.variant else '-':<14} {r.order if r.order is not None else '-':<6} "
            f"{_structure(r.structure) if r.structure is not None else '-'}"
        )
    return "\n".join(lines)
