import importlib
import time

import numpy as np
import pytest

cobordgroup = importlib.import_module("cobordism.cobordgroup")
schemas = importlib.import_module("cobordism.schemas")
homology = importlib.import_module("cobordism.homology")
dependencies = importlib.import_module("cobordism.dependencies")

Variant = schemas.Variant
VerificationMode = schemas.VerificationMode

NONORIENTABLE = {"S2twS1": 8, "RP2xS1": 32, "KxS1": 128}
ORIENTABLE = {"S3": 8, "S2xS1": 32, "T3": 512}
STRUCTURE = {
    "S2twS1": [2, 2, 2],
    "RP2xS1": [2, 2, 2, 4],
    "KxS1": [2, 2, 2, 2, 2, 4],
    "S3": [8],
    "S2xS1": [2, 2, 8],
    "T3": [2, 2, 2, 2, 2, 2, 8],
}


@pytest.fixture
def group(context):
    def _group(name, variant=None):
        return cobordgroup.CobordismGroup.from_context(context(name), variant)
    return _group


@pytest.mark.parametrize("name", sorted({**NONORIENTABLE, **ORIENTABLE}))
def test_order_formula(group, context, name):
    G = group(name)
    ctx = context(name)
    assert G.order == {**NONORIENTABLE, **ORIENTABLE}[name]
    assert G.order == (1 << ctx.betti[2]) * (1 << ctx.betti[1]) * G.modulus
    assert cobordgroup.group_order(G) == G.order


def test_twisted_bundle_is_smaller_than_the_product(group, context):
    twisted, product = group("S2twS1"), group("S2xS1")
    # same mod 2 Betti numbers, different third factor
    assert context("S2twS1").betti == context("S2xS1").betti
    assert twisted.variant == Variant.NONORIENTABLE and product.variant == Variant.ORIENTABLE
    assert (twisted.order, product.order) == (8, 32)


def test_variant_must_match_orientability(group):
    with pytest.raises(cobordgroup.GroupError):
        group("RP2xS1", Variant.ORIENTABLE)
    with pytest.raises(cobordgroup.GroupError):
        group("T3", Variant.NONORIENTABLE)


def test_surfaces_have_no_group(context):
    with pytest.raises(cobordgroup.GroupError, match="3-manifolds"):
        cobordgroup.CobordismGroup.from_context(context("K2"))


@pytest.mark.parametrize("name", sorted(NONORIENTABLE))
def test_exhaustive_axioms_nonorientable(group, name):
    started = time.perf_counter()
    report = cobordgroup.verify_axioms(group(name), VerificationMode.EXHAUSTIVE)
    assert report.passed, [c for c in report.checks if not c.passed]
    assert report.mode == VerificationMode.EXHAUSTIVE
    assert [c.name for c in report.checks] == [
        "identity", "inverse", "commutativity", "associativity", "projection_homomorphism", "kernel_untwisted",
    ]
    assert time.perf_counter() - started < 5


@pytest.mark.parametrize("name", sorted(ORIENTABLE))
def test_exhaustive_axioms_orientable(group, name):
    assert cobordgroup.verify_axioms(group(name), VerificationMode.EXHAUSTIVE).passed


@pytest.mark.parametrize("name", sorted(STRUCTURE))
def test_structure_and_exponent(group, name):
    G = group(name)
    factors = cobordgroup.structure(G)
    assert factors == STRUCTURE[name]
    product = 1
    for f in factors:
        product *= f
    assert product == G.order
    assert cobordgroup.exponent(G) == max(factors)


@pytest.mark.parametrize("name", sorted({**NONORIENTABLE, **ORIENTABLE}))
def test_third_factor_order(group, name):
    G = group(name)
    ball = G.element("0" * G.dim_h2, "0" * G.dim_h1, 1)
    expected = 2 if G.variant == Variant.NONORIENTABLE else 8
    assert cobordgroup.order_of(G, ball) == expected
    assert len(cobordgroup.disk_subgroup(G)) == expected


def test_squares_carry_the_self_intersection(group, context):
    G = group("RP2xS1")
    for a in G.elements():
        square = cobordgroup.compose(G, a, a)
        assert square.h.is_zero()
        assert square.d == homology.intersect_H2(context("RP2xS1"), a.h, a.h)
        assert square.n == 0


def test_inverse_and_power(group):
    G = group("KxS1")
    for a in G.elements():
        assert cobordgroup.compose(G, a, cobordgroup.inverse(G, a)) == G.identity()
        assert cobordgroup.power(G, a, cobordgroup.order_of(G, a)) == G.identity()
        assert cobordgroup.power(G, a, -1) == cobordgroup.inverse(G, a)
        assert cobordgroup.power(G, a, 0) == G.identity()


def test_elements_are_lexicographic(group):
    G = group("S2twS1")
    labels = [repr(a) for a in G.elements()]
    assert labels == [
        "(0, 0, 0)", "(0, 0, 1)", "(0, 1, 0)", "(0, 1, 1)",
        "(1, 0, 0)", "(1, 0, 1)", "(1, 1, 0)", "(1, 1, 1)",
    ]
    for code, a in enumerate(G.elements()):
        assert G.code(a) == code
        assert G.from_model(a.to_model()) == a


def test_element_validation(group):
    G = group("RP2xS1")
    with pytest.raises(cobordgroup.GroupError):
        G.element("1", "00", 0)
    with pytest.raises(cobordgroup.GroupError):
        G.element("00", "00", 2)
    with pytest.raises(cobordgroup.GroupError):
        G.from_code(G.order)
    foreign = group("KxS1").identity()
    with pytest.raises(cobordgroup.GroupError, match="belongs to manifold"):
        cobordgroup.compose(G, G.identity(), foreign)


def test_cayley_table_and_csv(group):
    G = group("S2twS1")
    table = cobordgroup.cayley_table(G)
    assert table.shape == (8, 8)
    assert (table == table.T).all()
    assert (table[0] == np.arange(8)).all()
    csv_text = cobordgroup.cayley_csv(G, 64)
    rows = csv_text.strip().split("\n")
    assert len(rows) == 9
    assert rows[0].split(",")[:3] == ["*", "0|0|0", "0|0|1"]
    with pytest.raises(cobordgroup.GroupError):
        cobordgroup.cayley_csv(group("T3"), 64)


def test_cayley_table_respects_the_bound(group, monkeypatch):
    monkeypatch.setenv("COBORDISM_EXHAUSTIVE_BOUND", "16")
    with pytest.raises(cobordgroup.GroupError, match="exhaustive bound"):
        cobordgroup.cayley_table(group("RP2xS1"))


def test_sampled_verification_is_seeded(group):
    G = group("T3")
    first = cobordgroup.verify_axioms(G, VerificationMode.SAMPLED, samples=500, seed=7)
    second = cobordgroup.verify_axioms(G, VerificationMode.SAMPLED, samples=500, seed=7)
    assert first.passed
    assert first.samples == 500 and first.seed == 7
    assert first == second


def test_sampled_verification_uses_configured_defaults(group, monkeypatch):
    monkeypatch.setenv("COBORDISM_SAMPLE_COUNT", "300")
    monkeypatch.setenv("COBORDISM_SAMPLE_SEED", "11")
    report = cobordgroup.verify_axioms(group("KxS1"), VerificationMode.SAMPLED)
    assert (report.samples, report.seed) == (300, 11)
    assert all(c.checked == 300 for c in report.checks)


@pytest.mark.parametrize("dims", [(6, 6), (8, 8)])
def test_synthetic_groups_beyond_the_catalog(dims):
    dim_h2, dim_h1 = dims
    G = cobordgroup.synthetic_group(dim_h2, dim_h1, seed=3)
    assert G.order == 1 << (dim_h2 + dim_h1 + 1)
    assert G.order > dependencies.get_exhaustive_bound()
    assert G.ctx is None
    report = cobordgroup.verify_axioms(G, VerificationMode.SAMPLED, samples=2000, seed=1)
    assert report.passed


def test_asymmetric_pairing_breaks_commutativity(group):
    G = group("RP2xS1")
    broken = cobordgroup.with_pairing(G, [[0, 1], [0, 0]])
    report = cobordgroup.verify_axioms(broken, VerificationMode.EXHAUSTIVE)
    assert not report.passed
    failed = {c.name: c for c in report.checks if not c.passed}
    assert set(failed) == {"commutativity"}
    assert len(failed["commutativity"].counterexample) == 2


def test_structure_bound(group, monkeypatch):
    monkeypatch.setenv("COBORDISM_STRUCTURE_BOUND", "100")
    with pytest.raises(cobordgroup.GroupError, match="structure bound"):
        cobordgroup.structure(group("T3"))


@pytest.mark.parametrize("name", sorted({**NONORIENTABLE, **ORIENTABLE}))
def test_element_orders_divide_the_group_order(group, name):
    G = group(name)
    kills = 4 if G.variant == Variant.NONORIENTABLE else 16
    for a in G.elements():
        assert G.order % cobordgroup.order_of(G, a) == 0
        assert cobordgroup.power(G, a, kills) == G.identity()


@pytest.mark.parametrize("name, n", [("RP2xS1", 2), ("RP2xS1", 3), ("T3", 8), ("T3", 9)])
def test_serialized_elements_must_be_reduced(group, name, n):
    G = group(name)
    model = schemas.GroupElementModel(h="0" * G.dim_h2, d="0" * G.dim_h1, n=n)
    with pytest.raises(cobordgroup.GroupError, match=f"outside Z/{G.modulus}"):
        G.from_model(model)
    top = model.model_copy(update={"n": G.modulus - 1})
    assert G.from_model(top).n == G.modulus - 1
