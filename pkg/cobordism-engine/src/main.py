"""
Command-line front end of the cobordism engine.

Every verb builds a pydantic report and prints it as a text table or as
JSON. Exit codes: 0 success, 1 domain errors, 2 usage errors.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel

from .bands import (
    BandFlags,
    BandModel,
    boundary_curves,
    bands_equivalent,
    classify_bands,
    classify_x_bundle,
    default_epsilon,
    half_twists,
    kink_isotropy,
    preserves_figure8,
    twisted_circle,
    x_bundle_elements,
)
from .cobordgroup import (
    CobordismGroup,
    cayley_csv,
    disk_subgroup,
    exponent,
    structure,
    verify_axioms,
)
from .dependencies import DomainError, get_context, get_exhaustive_bound, get_log_level, get_settings
from .homology import HomologyContext
from .immersion import psi, realize
from .schemas import (
    BandClassReport,
    BandComparison,
    BandReport,
    BasisModel,
    CatalogReport,
    CatalogRow,
    CobordantReport,
    GroupReport,
    HomologyReport,
    IsotropyReport,
    OutputFormat,
    PairingEntry,
    Parity,
    PsiReport,
    RealizeReport,
    Variant,
    VerificationMode,
    XBundleReport,
    XBundleRow,
)
from .telemetry import add_span_attributes, create_span, init_tracer, mark_span_error
from .triangulation import CATALOG_NAMES, Triangulation, catalog, validate
from .utils import (
    ParseError,
    format_immersion,
    format_permutation,
    log_command,
    parse_immersion,
    parse_knot,
    parse_permutation,
    parse_rational,
    parse_triangulation,
    render_text,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
CATALOG_PREFIX = "catalog:"


# inputs

def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def load_manifold(reference: str) -> Triangulation:
    """`catalog:NAME` or a path to a triangulation file"""
    if reference.startswith(CATALOG_PREFIX):
        return catalog(reference[len(CATALOG_PREFIX):])
    return parse_triangulation(_read(reference), name=Path(reference).stem)


def _group(ctx: HomologyContext, variant: Optional[str]) -> CobordismGroup:
    return CobordismGroup.from_context(ctx, Variant(variant) if variant else None)


def _basis(ctx: HomologyContext, k: int) -> BasisModel:
    cycles = [[list(s) for s in ctx.complex.simplices_of(k, z)] for z in ctx.bases[k]]
    return BasisModel(dimension=k, cycles=cycles)


def _verification(G: CobordismGroup, mode: str, samples: Optional[int], seed: Optional[int]):
    mode = mode or "auto"
    if mode == "auto":
        bound = get_exhaustive_bound()
        if G.order > bound:
            logger.warning(f"Order {G.order} exceeds the exhaustive bound {bound}; sampling instead")
            mode = VerificationMode.SAMPLED
        else:
            mode = VerificationMode.EXHAUSTIVE
    return verify_axioms(G, VerificationMode(mode), samples=samples, seed=seed)


# verbs

def cmd_validate(args) -> BaseModel:
    return validate(load_manifold(args.manifold))


def cmd_homology(args) -> BaseModel:
    T = load_manifold(args.manifold)
    ctx = get_context(T)
    pairing = []
    if ctx.pairing_table is not None:
        pairing = [
            PairingEntry(i=i, j=j, product=ctx.pairing_table[i][j].to_string())
            for i in range(ctx.betti[2]) for j in range(ctx.betti[2])
        ]
    return HomologyReport(
        manifold=T.label,
        context_hash=ctx.context_hash,
        dim=ctx.dim,
        orientable=ctx.orientable,
        betti=list(ctx.betti),
        bases=[_basis(ctx, k) for k in range(ctx.dim + 1)],
        w1=ctx.w1_vector.to_string(),
        pairing=pairing,
    )


def cmd_group(args) -> BaseModel:
    T = load_manifold(args.manifold)
    G = _group(get_context(T), args.variant)
    settings = get_settings()
    verification = None if args.no_verify else _verification(G, "auto", None, None)
    return GroupReport(
        manifold=T.label,
        context_hash=G.context_hash,
        variant=G.variant,
        modulus=G.modulus,
        dim_h2=G.dim_h2,
        dim_h1=G.dim_h1,
        order=G.order,
        structure=structure(G),
        exponent=exponent(G),
        disk_subgroup_order=len(disk_subgroup(G)),
        verification=verification,
        cayley_csv=cayley_csv(G, settings.cayley_csv_bound) if args.cayley else None,
    )


def cmd_verify(args) -> BaseModel:
    T = load_manifold(args.manifold)
    G = _group(get_context(T), args.variant)
    return _verification(G, args.mode, args.samples, args.seed)


def cmd_psi(args) -> BaseModel:
    T = load_manifold(args.manifold)
    ctx = get_context(T)
    G = _group(ctx, args.variant)
    imm = parse_immersion(_read(args.immersion), ctx, label=Path(args.immersion).stem)
    return PsiReport(
        manifold=T.label,
        context_hash=ctx.context_hash,
        label=imm.label,
        variant=G.variant,
        element=psi(G, imm).to_model(),
        h_basis=_basis(ctx, 2),
        d_basis=_basis(ctx, 1),
    )


def cmd_cobordant(args) -> BaseModel:
    T = load_manifold(args.manifold)
    ctx = get_context(T)
    G = _group(ctx, args.variant)
    a = psi(G, parse_immersion(_read(args.first), ctx, label=Path(args.first).stem))
    b = psi(G, parse_immersion(_read(args.second), ctx, label=Path(args.second).stem))
    return CobordantReport(
        manifold=T.label,
        context_hash=ctx.context_hash,
        first=a.to_model(),
        second=b.to_model(),
        cobordant=a == b,
    )


def cmd_realize(args) -> BaseModel:
    T = load_manifold(args.manifold)
    ctx = get_context(T)
    G = _group(ctx, args.variant)
    target = G.element(args.h if args.h is not None else "0" * G.dim_h2,
                       args.d if args.d is not None else "0" * G.dim_h1,
                       args.n)
    imm = realize(G, target)
    return RealizeReport(
        manifold=T.label,
        context_hash=ctx.context_hash,
        target=target.to_model(),
        components=[c.to_model() for c in imm.components],
        immersion=format_immersion(ctx, imm),
        round_trip=psi(G, imm).to_model(),
    )


def cmd_band(args) -> BaseModel:
    if args.knot is not None:
        knot = parse_knot(_read(args.knot))
        source = Path(args.knot).stem
    else:
        knot = twisted_circle(args.twists)
        source = f"twisted circle ({args.twists:+d})"
    epsilon = parse_rational(args.epsilon) if args.epsilon else default_epsilon(knot)
    twists = half_twists(knot, epsilon)
    return BandReport(
        source=source,
        vertex_count=len(knot),
        return_sign=knot.return_sign,
        mobius=knot.mobius,
        boundary_components=len(boundary_curves(knot, epsilon)),
        epsilon=str(epsilon),
        half_twists=twists,
        half_twists_mod4=twists % 4,
    )


def cmd_classify_bands(args) -> BaseModel:
    flags = BandFlags(
        core_orientable_in_m=not args.core_nonorientable,
        odd_self_homotopy=args.odd,
        ambient_orientable=args.ambient_orientable,
    )
    result = classify_bands(flags)
    comparisons = [
        BandComparison(first=a, second=b, relation=bands_equivalent(BandModel(a, flags), BandModel(b, flags)))
        for a, b in (args.compare or [])
    ]
    return BandClassReport(
        core_orientable_in_m=flags.core_orientable_in_m,
        odd_self_homotopy=flags.odd_self_homotopy,
        ambient_orientable=flags.ambient_orientable,
        class_count=result.class_count,
        classes=result.classes,
        reparametrized=result.reparametrized,
        comparisons=comparisons,
    )


def cmd_x_bundle(args) -> BaseModel:
    perms = [parse_permutation(args.monodromy)] if args.monodromy else x_bundle_elements()
    rows = []
    for perm in perms:
        result = classify_x_bundle(perm)
        rows.append(XBundleRow(
            monodromy=format_permutation(perm),
            index=result.index,
            orientable=result.orientable,
            preserves_figure8=preserves_figure8(perm),
            fiber8_surface=result.fiber8[0] if result.fiber8 else None,
            fiber8_neighborhood=result.fiber8[1] if result.fiber8 else None,
        ))
    return XBundleReport(rows=rows)


def cmd_isotropy(args) -> BaseModel:
    F = load_manifold(args.surface)
    parity = Parity(args.parity)
    result = kink_isotropy(F, parity)
    ctx = get_context(F)
    return IsotropyReport(
        surface=F.label,
        parity=parity,
        orientable=ctx.orientable,
        dim_h1=ctx.betti[1],
        w1=result.w1.to_string(),
        subgroup=[v.to_string() for v in result.subgroup],
        class_count=result.class_count,
    )


def catalog_report() -> CatalogReport:
    rows = []
    for name in CATALOG_NAMES:
        T = catalog(name)
        ctx = get_context(T)
        row = CatalogRow(name=name, dim=T.dim, orientable=ctx.orientable, betti=list(ctx.betti))
        if T.dim == 3:
            G = CobordismGroup.from_context(ctx)
            row = row.model_copy(update={"variant": G.variant, "order": G.order, "structure": structure(G)})
        rows.append(row)
    return CatalogReport(rows=rows)


def cmd_catalog(args) -> BaseModel:
    return catalog_report()


COMMANDS = {
    "validate": cmd_validate,
    "homology": cmd_homology,
    "group": cmd_group,
    "psi": cmd_psi,
    "cobordant": cmd_cobordant,
    "realize": cmd_realize,
    "band": cmd_band,
    "classify-bands": cmd_classify_bands,
    "x-bundle": cmd_x_bundle,
    "isotropy": cmd_isotropy,
    "catalog": cmd_catalog,
    "verify": cmd_verify,
}


# argument parsing

def _build_arg_parser() -> argparse.ArgumentParser:
    """Create the CLI argument parser with one subcommand per verb."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.TEXT.value,
                        help="Human table or machine-readable JSON")
    common.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level on stderr")

    manifold = argparse.ArgumentParser(add_help=False)
    manifold.add_argument("--manifold", required=True,
                          help="Triangulation file or catalog:NAME (" + ", ".join(CATALOG_NAMES) + ")")

    variant = argparse.ArgumentParser(add_help=False)
    variant.add_argument("--variant", choices=[v.value for v in Variant],
                         help="Group variant; defaults to the one matching the manifold's orientability")

    parser = argparse.ArgumentParser(prog="cobordism", description="Cobordism groups of surface immersions in 3-manifolds")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="command")

    sub.add_parser("validate", parents=[common, manifold], help="Check that a triangulation is a closed manifold")
    sub.add_parser("homology", parents=[common, manifold], help="Mod 2 homology bases, w1 and intersection pairing")

    p = sub.add_parser("group", parents=[common, manifold, variant], help="Order and structure of the cobordism group")
    p.add_argument("--cayley", action="store_true", help="Include the Cayley table as CSV")
    p.add_argument("--no-verify", action="store_true", help="Skip the group axiom checks")

    p = sub.add_parser("verify", parents=[common, manifold, variant], help="Check the group axioms")
    p.add_argument("--mode", choices=["auto"] + [m.value for m in VerificationMode], default="auto")
    p.add_argument("--samples", type=int, help="Random triples in sampled mode")
    p.add_argument("--seed", type=int, help="Seed for sampled mode")

    p = sub.add_parser("psi", parents=[common, manifold, variant], help="Invariant of an immersion file")
    p.add_argument("--immersion", required=True, help="Immersion file")

    p = sub.add_parser("cobordant", parents=[common, manifold, variant], help="Compare two immersion files")
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)

    p = sub.add_parser("realize", parents=[common, manifold, variant], help="Immersion data for a group element")
    p.add_argument("--h", help="H2 coordinates as a 0/1 string")
    p.add_argument("--d", help="H1 coordinates as a 0/1 string")
    p.add_argument("--n", type=int, default=0, help="Third coordinate")

    p = sub.add_parser("band", parents=[common], help="Half twists of a framed knot")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--knot", help="Framed knot file")
    source.add_argument("--twists", type=int, help="Generated round circle with this many half twists")
    p.add_argument("--epsilon", help="Boundary offset as num/den")

    p = sub.add_parser("classify-bands", parents=[common], help="Regular homotopy classes of bands")
    p.add_argument("--core-nonorientable", action="store_true", help="The core reverses orientation of M")
    p.add_argument("--odd", action="store_true", help="The core admits an odd self-homotopy")
    p.add_argument("--ambient-orientable", action="store_true", help="M is orientable")
    p.add_argument("--compare", nargs=2, type=int, action="append", metavar=("TWIST1", "TWIST2"),
                   help="Compare two twist values (repeatable)")

    p = sub.add_parser("x-bundle", parents=[common], help="Figure X bundles by monodromy")
    p.add_argument("--monodromy", help="Permutation of 1234 in cycle or one-line notation; all eight when omitted")

    p = sub.add_parser("isotropy", parents=[common], help="Kink action isotropy on a surface")
    p.add_argument("--surface", required=True, help="Surface triangulation file or catalog:NAME")
    p.add_argument("--parity", choices=[q.value for q in Parity], default=Parity.EVEN.value)

    sub.add_parser("catalog", parents=[common], help="Summary of the built-in manifolds")
    return parser


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else get_log_level()
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def _emit(report: BaseModel, fmt: str) -> None:
    if fmt == OutputFormat.JSON.value:
        print(report.model_dump_json(indent=2))
    else:
        print(render_text(report))


def run(argv: Optional[List[str]] = None) -> int:
    parser = _build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    _configure_logging(args.verbose)
    init_tracer()
    target = getattr(args, "manifold", None) or getattr(args, "surface", None) or getattr(args, "knot", None) or "-"
    log_command(args.verb, target)

    with create_span(f"cli.{args.verb}", {"target": target, "format": args.format}):
        try:
            report = COMMANDS[args.verb](args)
        except DomainError as exc:
            mark_span_error(exc)
            logger.debug(f"{args.verb} failed: {exc}")
            print(f"error: {exc}", file=sys.stderr)
            return 1
        except Exception as exc:
            mark_span_error(exc)
            logger.exception(f"Unexpected failure in {args.verb}")
            print(f"error: {exc}", file=sys.stderr)
            return 1
        add_span_attributes({"report": type(report).__name__})
        _emit(report, args.format)

    if getattr(report, "valid", True) is False or getattr(report, "passed", True) is False:
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
