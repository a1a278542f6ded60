//! Builds a couple of small quadratic Lie algebras and prints what the
//! library can say about them.

use exactlin::{format_rational, int, Mat};
use quadlie::doublecentral::{
    check_context, extract_double_data, g_metric_existence, MetricVerdict, DEFAULT_METRIC_SEED,
};
use quadlie::extensions::{
    build_central_extension, classify_kernel, extension_geometry, fitting_split_extension,
    isotropic_kernel_geometry, reduce_mixed_kernel, splitting_map,
};
use quadlie::liealg::{
    inner_witness, skew_derivation_basis, structure_report, LieAlgebra, LinMap,
    QuadraticLieAlgebra, StructureData, SymBilinearForm,
};
use quadlie::nilpotent2::{builtin_example, two_step_to_matrix_algebra, FixtureKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // sl2 in the basis (h, e, f): [h,e] = 2e, [h,f] = -2f, [e,f] = h,
    // with the trace form of the defining representation.
    let mut data = StructureData::zeros(3).with_labels(&["h", "e", "f"]);
    data.set_bracket(0, 1, 1, int(2));
    data.set_bracket(0, 2, 2, int(-2));
    data.set_bracket(1, 2, 0, int(1));
    let alg = data.validate()?;
    let form = SymBilinearForm::new(Mat::from_int_rows(&[&[8, 0, 0], &[0, 0, 4], &[0, 4, 0]]))?;
    let q = QuadraticLieAlgebra::new(alg, form)?;

    let report = structure_report(q.alg());
    println!("sl2: dim {}, perfect: {}", q.dim(), report.is_perfect);
    println!("  center dim {}", report.center.dim());

    let skew = skew_derivation_basis(&q);
    println!("  skew derivations: dim {}", skew.len());
    for d in &skew {
        match inner_witness(q.alg(), d) {
            Some(x) => {
                let coords: Vec<String> = x.iter().map(format_rational).collect();
                println!("  inner, witness ({})", coords.join(", "));
            }
            None => println!("  not inner"),
        }
    }

    // degenerate forms are rejected up front
    let bad = SymBilinearForm::new(Mat::from_int_rows(&[&[1, 0], &[0, 0]]))?;
    match QuadraticLieAlgebra::new(LieAlgebra::abelian(2), bad) {
        Err(e) => println!("abelian(2) with rank-1 form: {e}"),
        Ok(_) => unreachable!(),
    }

    // a central extension of sl2 by the inner derivation ad(e)
    let d = LinMap::new(q.alg().ad_basis(1));
    let ext = build_central_extension(q.clone(), vec![d])?;
    println!(
        "sl2 extended by ad(e): dim {}, kernel dim {}",
        ext.total().dim(),
        ext.r()
    );
    match splitting_map(&ext) {
        Some(tau) => {
            let row: Vec<String> = (0..3).map(|j| format_rational(&tau.matrix[(0, j)])).collect();
            println!("  splits, tau = ({})", row.join(", "));
        }
        None => println!("  does not split"),
    }

    // hyperbolic plane over a line: T is nilpotent, the kernel is isotropic
    let line = QuadraticLieAlgebra::new(
        LieAlgebra::abelian(1),
        SymBilinearForm::new(Mat::identity(1))?,
    )?;
    let ext2 = build_central_extension(line, vec![LinMap::new(Mat::zeros(1, 1))])?;
    let metric = SymBilinearForm::new(Mat::from_int_rows(&[&[0, 1], &[1, 0]]))?;
    let geom = extension_geometry(&ext2, metric)?;
    let class = classify_kernel(&geom, &ext2);
    println!(
        "hyperbolic line: kernel class {:?}, Fitting index {}",
        class.tag,
        geom.m()
    );
    let split = fitting_split_extension(&geom, &ext2);
    println!(
        "  Fitting halves: dim q = {}, dim n = {}",
        split.q.dim(),
        split.n_ideal.dim()
    );
    let iso = isotropic_kernel_geometry(&geom, &ext2)?;
    println!(
        "  base as extension of a {}-dim quotient by Ker T",
        iso.a_perp_algebra.dim()
    );

    // a mixed kernel: one null direction paired into the base, one
    // self-paired central line that splits off orthogonally
    let plane = QuadraticLieAlgebra::new(
        LieAlgebra::abelian(2),
        SymBilinearForm::new(Mat::identity(2))?,
    )?;
    let zero2 = || LinMap::new(Mat::zeros(2, 2));
    let ext3 = build_central_extension(plane, vec![zero2(), zero2()])?;
    let metric3 = SymBilinearForm::new(Mat::from_int_rows(&[
        &[1, 0, 1, 0],
        &[0, 1, 0, 0],
        &[1, 0, 0, 0],
        &[0, 0, 0, 1],
    ]))?;
    let geom3 = extension_geometry(&ext3, metric3)?;
    let class3 = classify_kernel(&geom3, &ext3);
    println!("mixed fixture: kernel class {:?}", class3.tag);
    let red = reduce_mixed_kernel(&ext3, &geom3)?;
    println!(
        "  split off U of dim {}, sub-extension kernel dim {}",
        red.u.dim(),
        red.sub.r()
    );

    // the two-step correspondence: peel the 6-dim nilpotent fixture down to
    // three cross-product matrices, then rebuild its 9-dim extension
    let n6 = match builtin_example("N6")?.kind {
        FixtureKind::Quadratic(q) => q,
        _ => unreachable!("N6 is quadratic"),
    };
    let id6 = Mat::identity(6);
    let (_, malg, rep) = two_step_to_matrix_algebra(
        &n6,
        &id6.submatrix(0..6, 0..3),
        &id6.submatrix(0..6, 3..6),
        None,
    )?;
    println!(
        "two-step fixture: {} span matrices, perfect: {}, centerless: {}",
        malg.basis.len(),
        rep.perfect,
        rep.centerless
    );
    let full = nine_dim_example()?;
    let report9 = structure_report(full.0.total());
    println!(
        "  rebuilt extension: dim {}, nilpotency class {:?}, splits: {}",
        full.0.total().dim(),
        report9.nilpotency_class,
        splitting_map(&full.0).is_some()
    );

    // peel the same algebra into its three metric layers and ask whether the
    // quotient regains an invariant metric of its own
    let (dce, _) = extract_double_data(&full.0, &full.2)?;
    println!(
        "double layering: middle dim {}, rank {}, conditions pass: {}",
        dce.h_dim(),
        dce.r(),
        check_context(dce.context()).all_pass()
    );
    let search = g_metric_existence(&dce, DEFAULT_METRIC_SEED);
    match search.verdict {
        MetricVerdict::Yes { .. } => {
            println!("  quotient metric: found after {} trials", search.trials)
        }
        MetricVerdict::No {
            generic_rank,
            needed,
            ..
        } => println!("  quotient metric: none, generic rank {generic_rank} < {needed}"),
        MetricVerdict::Inconclusive { trials } => {
            println!("  quotient metric: inconclusive after {trials} trials")
        }
    }
    Ok(())
}

fn nine_dim_example() -> Result<
    (
        quadlie::extensions::CentralExtension,
        SymBilinearForm,
        quadlie::extensions::ExtensionGeometry,
    ),
    Box<dyn std::error::Error>,
> {
    let fixture = builtin_example("G9")?;
    let (ext, form) = match fixture.kind {
        FixtureKind::Extension(ext, form) => (ext, form),
        _ => unreachable!("G9 is an extension"),
    };
    let geom = extension_geometry(&ext, form.clone())?;
    Ok((ext, form, geom))
}
