import importlib
import logging
from fractions import Fraction

import pytest

utils = importlib.import_module("cobordism.utils")
bands = importlib.import_module("cobordism.bands")
cobordgroup = importlib.import_module("cobordism.cobordgroup")
immersion = importlib.import_module("cobordism.immersion")
schemas = importlib.import_module("cobordism.schemas")

ParseError = utils.ParseError

CYCLES = {
    (1, 2, 3, 4): "()",
    (2, 3, 4, 1): "(1234)",
    (3, 4, 1, 2): "(13)(24)",
    (4, 1, 2, 3): "(1432)",
    (2, 1, 4, 3): "(12)(34)",
    (1, 4, 3, 2): "(24)",
    (4, 3, 2, 1): "(14)(23)",
    (3, 2, 1, 4): "(13)",
}


def test_log_command(caplog):
    with caplog.at_level(logging.INFO, logger="cobordism.utils"):
        utils.log_command("group", "catalog:RP2xS1")
    assert "Received group command for catalog:RP2xS1" in caplog.text


def test_parse_error_carries_the_line_number():
    err = ParseError("bad record", 3)
    assert err.line_number == 3
    assert str(err) == "line 3: bad record"
    assert str(ParseError("no body")) == "no body"


def test_parse_triangulation_reads_the_written_form(catalog):
    T = catalog("RP2xS1")
    again = utils.parse_triangulation("# saved copy\n" + T.to_text(), name="copy")
    assert again == T
    assert again.label == "copy"
    assert again.context_hash == T.context_hash


@pytest.mark.parametrize(
    "text, line, message",
    [
        ("", 1, "starts with"),
        ("dim 4\nvertices 5\n0 1 2 3 4\n", 1, "dimension"),
        ("dim 2\nverts 3\n0 1 2\n", 2, "vertices"),
        ("dim 2\nvertices 4\n0 1 2\n0 1\n", 4, "3 vertices"),
        ("dim 2\nvertices 3\n0 1 3\n", 3, "outside 0..2"),
        ("dim 2\nvertices 3\n0 1 x\n", 3, "integer"),
    ],
)
def test_parse_triangulation_errors(text, line, message):
    with pytest.raises(ParseError, match=message) as info:
        utils.parse_triangulation(text)
    assert info.value.line_number == line


def test_parse_triangulation_needs_simplices():
    with pytest.raises(ParseError, match="no top simplices"):
        utils.parse_triangulation("dim 2\nvertices 3\n")


def _fiber_text(catalog, chi=0):
    lines = [f"chi {chi}", "# layer zero fiber"]
    lines.extend("triangle " + " ".join(map(str, t)) for t in catalog("S2").top_simplices)
    return "\n".join(lines) + "\n"


def test_parse_immersion_reads_a_fiber(context, catalog):
    ctx = context("S2twS1")
    G = cobordgroup.CobordismGroup.from_context(ctx)
    imm = utils.parse_immersion(_fiber_text(catalog), ctx, label="fiber")
    assert imm.label == "fiber"
    assert imm.n == 0
    assert immersion.psi(G, imm) == G.element("1", "0", 0)


def test_repeated_simplices_cancel(context, catalog):
    ctx = context("S2twS1")
    first = " ".join(map(str, catalog("S2").top_simplices[0]))
    text = _fiber_text(catalog) + f"triangle {first}\ntriangle {first}\nedge 0 2\nedge 2 0\n"
    imm = utils.parse_immersion(text, ctx)
    assert imm.image_chain == utils.parse_immersion(_fiber_text(catalog), ctx).image_chain
    assert imm.double_locus.is_zero()


@pytest.mark.parametrize(
    "body, line, message",
    [
        ("chi 0\nsquare 0 1 2 3\n", 2, "unknown record"),
        ("chi 0\ntriangle 0 1\n", 2, "needs 3 vertices"),
        ("chi 0\nedge 0 0\n", 2, "not a simplex"),
        ("chi 0\nchi 1\n", 2, "twice"),
        ("chi 8\n", 1, "0..7"),
        ("chi zero\n", 1, "integer"),
    ],
)
def test_parse_immersion_errors(context, body, line, message):
    with pytest.raises(ParseError, match=message) as info:
        utils.parse_immersion(body, context("S2twS1"))
    assert info.value.line_number == line


def test_parse_immersion_needs_chi(context):
    with pytest.raises(ParseError, match="missing 'chi'"):
        utils.parse_immersion("edge 0 2\n", context("S2twS1"))


def test_formatted_immersion_parses_back(context):
    ctx = context("RP2xS1")
    G = cobordgroup.CobordismGroup.from_context(ctx)
    imm = immersion.realize(G, G.element("11", "01", 1))
    again = utils.parse_immersion(utils.format_immersion(ctx, imm), ctx, label=imm.label)
    assert again == imm


def test_parse_rational():
    assert utils.parse_rational("3/4") == Fraction(3, 4)
    assert utils.parse_rational("-2") == -2
    assert utils.parse_rational("+1/2") == Fraction(1, 2)
    with pytest.raises(ParseError, match="num/den"):
        utils.parse_rational("0.5", 7)
    with pytest.raises(ParseError, match="zero denominator"):
        utils.parse_rational("1/0")


def test_knot_file_round_trip():
    knot = bands.twisted_circle(1)
    text = utils.format_knot(knot)
    assert text.startswith("return_sign -1\n")
    assert utils.parse_knot(text) == knot


def test_knot_file_errors():
    with pytest.raises(ParseError, match="return_sign"):
        utils.parse_knot("return_sign 2\n")
    with pytest.raises(ParseError, match="empty"):
        utils.parse_knot("# nothing\n")
    text = "return_sign +1\np 0 0 0 f 0 0 1\np 1 0 0.5 f 0 0 1\n"
    with pytest.raises(ParseError) as info:
        utils.parse_knot(text)
    assert info.value.line_number == 3
    with pytest.raises(ParseError, match="at least 3"):
        utils.parse_knot("return_sign +1\np 0 0 0 f 0 0 1\np 1 0 0 f 0 0 1\n")
    with pytest.raises(ParseError, match="expected 'p x y z"):
        utils.parse_knot("return_sign +1\np 0 0 0 0 0 1\n")


def test_permutation_notation():
    for perm, cycles in CYCLES.items():
        assert utils.format_permutation(perm) == cycles
        assert utils.parse_permutation(cycles) == perm
        assert utils.parse_permutation("".join(map(str, perm))) == perm
    assert utils.parse_permutation("e") == (1, 2, 3, 4)
    assert utils.parse_permutation("(13) (24)") == (3, 4, 1, 2)


@pytest.mark.parametrize("text", ["(12)(23)", "(15)", "1224", "12345", "(11)"])
def test_bad_permutations(text):
    with pytest.raises(ParseError):
        utils.parse_permutation(text)


def test_render_text_needs_a_known_report():
    with pytest.raises(TypeError):
        utils.render_text(object())


def test_render_group_report():
    report = schemas.GroupReport(
        manifold="RP2xS1", context_hash="abc", variant=schemas.Variant.NONORIENTABLE, modulus=2,
        dim_h2=2, dim_h1=2, order=32, structure=[2, 2, 2, 4], exponent=4, disk_subgroup_order=2,
    )
    text = utils.render_text(report)
    assert "order: 32" in text
    assert "structure: Z/2 x Z/2 x Z/2 x Z/4" in text
