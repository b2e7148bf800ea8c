import importlib
import json

import pytest

main = importlib.import_module("cobordism.main")
schemas = importlib.import_module("cobordism.schemas")
triangulation = importlib.import_module("cobordism.triangulation")


class TestCompleteFlow:
    @pytest.fixture(autouse=True)
    def setup(self, capsys, write_file):
        self.capsys = capsys
        self.write_file = write_file

    def run(self, *argv):
        code = main.run(list(argv))
        out, err = self.capsys.readouterr()
        return code, out, err

    def run_json(self, model, *argv):
        code, out, _ = self.run(*argv, "--format", "json")
        assert code == 0
        report = model.model_validate_json(out)
        # the dump reproduces the output byte for byte
        assert report.model_dump_json(indent=2) + "\n" == out
        return report

    def test_group_of_the_twisted_sphere_bundle(self):
        code, out, _ = self.run("group", "--manifold", "catalog:S2twS1")
        assert code == 0
        assert "order: 8" in out
        assert "structure: Z/2 x Z/2 x Z/2" in out
        assert "verification: passed [exhaustive] order 8" in out

    def test_json_reports_are_deterministic(self):
        argv = ("group", "--manifold", "catalog:RP2xS1", "--cayley")
        first = self.run_json(schemas.GroupReport, *argv)
        second = self.run_json(schemas.GroupReport, *argv)
        assert first == second
        assert first.order == 32
        assert first.structure == [2, 2, 2, 4]
        assert first.verification.passed
        assert first.cayley_csv.count("\n") == 33

    def test_orientable_comparison(self):
        report = self.run_json(schemas.GroupReport, "group", "--manifold", "catalog:S2xS1")
        assert report.variant == schemas.Variant.ORIENTABLE
        assert (report.order, report.disk_subgroup_order) == (32, 8)

    def test_immersion_flow(self, catalog):
        # 1. A fiber sphere and the empty immersion in the twisted bundle
        fiber = ["chi 0"] + ["triangle " + " ".join(map(str, t)) for t in catalog("S2").top_simplices]
        fiber_path = self.write_file("fiber.imm", "\n".join(fiber) + "\n")
        empty_path = self.write_file("empty.imm", "chi 0\n")

        # 2. Its invariant
        report = self.run_json(schemas.PsiReport, "psi", "--manifold", "catalog:S2twS1", "--immersion", fiber_path)
        assert (report.element.h, report.element.d, report.element.n) == ("1", "0", 0)
        assert report.label == "fiber"

        # 3. It is not cobordant to the empty immersion
        code, out, _ = self.run("cobordant", "--manifold", "catalog:S2twS1", "--first", fiber_path, "--second", empty_path)
        assert code == 0
        assert "cobordant: no" in out

        # 4. Realize a full element and read the immersion back
        report = self.run_json(schemas.RealizeReport, "realize", "--manifold", "catalog:S2twS1",
                               "--h", "1", "--d", "1", "--n", "1")
        assert report.round_trip == report.target
        kinds = [c.kind for c in report.components]
        assert schemas.ComponentKind.KINKED_TUBE in kinds
        realized_path = self.write_file("realized.imm", report.immersion)
        report = self.run_json(schemas.PsiReport, "psi", "--manifold", "catalog:S2twS1", "--immersion", realized_path)
        assert (report.element.h, report.element.d, report.element.n) == ("1", "1", 1)

    def test_manifold_from_a_file(self, catalog):
        path = self.write_file("rp2.tri", catalog("RP2").to_text())
        report = self.run_json(schemas.ValidationReport, "validate", "--manifold", path)
        assert report.valid
        assert report.euler_characteristic == 1
        assert report.orientable is False

    def test_invalid_triangulation_exits_with_one(self):
        path = self.write_file("disk.tri", "dim 2\nvertices 4\n0 1 2\n0 2 3\n")
        code, out, _ = self.run("validate", "--manifold", path)
        assert code == 1
        assert "valid: no" in out
        assert "open_face" in out

    def test_domain_errors_exit_with_one(self):
        code, out, err = self.run("group", "--manifold", "catalog:RP3")
        assert code == 1
        assert out == ""
        assert err.startswith("error: unknown catalog manifold")

        code, _, err = self.run("group", "--manifold", "catalog:T3", "--cayley", "--no-verify")
        assert code == 1
        assert "Cayley CSV" in err

        path = self.write_file("bad.imm", "chi 0\nsquare 0 1 2 3\n")
        code, _, err = self.run("psi", "--manifold", "catalog:S2twS1", "--immersion", path)
        assert code == 1
        assert "line 2" in err

    def test_usage_errors_exit_with_two(self):
        assert self.run("group")[0] == 2
        assert self.run("frobnicate")[0] == 2
        assert self.run("band", "--twists", "1", "--knot", "k.txt")[0] == 2

    def test_verification_modes(self, monkeypatch):
        report = self.run_json(schemas.VerificationReport, "verify", "--manifold", "catalog:T3",
                               "--mode", "sampled", "--samples", "100", "--seed", "3")
        assert report.passed
        assert (report.samples, report.seed) == (100, 3)

        monkeypatch.setenv("COBORDISM_EXHAUSTIVE_BOUND", "16")
        report = self.run_json(schemas.VerificationReport, "verify", "--manifold", "catalog:RP2xS1")
        assert report.mode == schemas.VerificationMode.SAMPLED

    def test_bands(self, write_file):
        report = self.run_json(schemas.BandReport, "band", "--twists", "3")
        assert report.half_twists == 3
        assert report.half_twists_mod4 == 3
        assert report.mobius
        assert report.boundary_components == 1

        knot = "return_sign +1\n" + "".join(
            f"p {x} {y} 0 f 0 0 1\n" for x, y in ((0, 0), (2, 0), (2, 2), (0, 2))
        )
        path = write_file("flat.knot", knot)
        code, out, _ = self.run("band", "--knot", path, "--epsilon", "1/4")
        assert code == 0
        assert "half twists: 0" in out
        assert "epsilon: 1/4" in out

        report = self.run_json(schemas.BandClassReport, "classify-bands", "--core-nonorientable",
                               "--compare", "0", "2", "--compare", "1", "-1", "--compare", "0", "1")
        assert report.class_count == 3
        assert [c.relation for c in report.comparisons] == [
            schemas.BandRelation.EQUIVALENT_UP_TO_REPARAMETRIZATION,
            schemas.BandRelation.EQUIVALENT,
            schemas.BandRelation.INCOMPARABLE,
        ]

        code, _, err = self.run("classify-bands", "--odd", "--ambient-orientable")
        assert code == 1
        assert err.startswith("error:")

    def test_x_bundles(self):
        report = self.run_json(schemas.XBundleReport, "x-bundle")
        assert [r.index for r in report.rows] == list(range(8))
        assert report.rows[2].monodromy == "(13)(24)"
        assert report.rows[2].fiber8_surface == "Klein bottle"

        report = self.run_json(schemas.XBundleReport, "x-bundle", "--monodromy", "(13)")
        assert [(r.index, r.orientable, r.preserves_figure8) for r in report.rows] == [(7, False, False)]

    def test_isotropy(self):
        report = self.run_json(schemas.IsotropyReport, "isotropy", "--surface", "catalog:K2h2", "--parity", "odd")
        assert report.class_count == 32
        assert len(report.subgroup) == 2

        code, _, err = self.run("isotropy", "--surface", "catalog:T2", "--parity", "odd")
        assert code == 1
        assert "orientable" in err

    def test_homology_and_catalog(self):
        report = self.run_json(schemas.HomologyReport, "homology", "--manifold", "catalog:RP2xS1")
        assert report.betti == [1, 2, 2, 1]
        assert len(report.pairing) == 4
        assert report.w1 != "00"

        report = self.run_json(schemas.CatalogReport, "catalog")
        assert [r.name for r in report.rows] == list(triangulation.CATALOG_NAMES)
        orders = {r.name: r.order for r in report.rows if r.order is not None}
        assert orders == {"S3": 8, "S2xS1": 32, "S2twS1": 8, "RP2xS1": 32, "KxS1": 128, "T3": 512}

    def test_text_catalog_lists_every_manifold(self):
        code, out, _ = self.run("catalog")
        assert code == 0
        for name in triangulation.CATALOG_NAMES:
            assert name in out
        with pytest.raises(ValueError):
            json.loads(out)
