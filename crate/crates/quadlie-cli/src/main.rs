//! `quadlie`: exact construction and verification of quadratic Lie algebras,
//! their central extensions, and double central extensions.
//!
//! Exit codes: 0 all requested checks pass, 1 a check failed, 2 the input
//! did not parse or had the wrong shape, 3 the metric-existence search was
//! inconclusive.

use std::panic::catch_unwind;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use exactlin::Mat;

use quadlie::doublecentral::{
    build_double_central_extension, check_context, extract_double_data, g_metric_existence,
    DceError, DoubleExtensionContext, MetricVerdict, DEFAULT_METRIC_SEED,
};
use quadlie::extensions::{
    build_central_extension, classify_kernel, extension_geometry, fitting_split_extension,
    make_kernel_dual_isotropic, reduce_mixed_kernel, CentralExtension, ExtensionGeometry,
    KernelTag,
};
use quadlie::liealg::{
    structure_report, verify_quadratic, LieAlgebra, LieError, LinMap, QuadraticLieAlgebra,
    StructureData, SymBilinearForm, Witness,
};
use quadlie::nilpotent2::{builtin_example, two_step_to_matrix_algebra, FixtureKind};

use quadlie_cli::format::{
    load_context, load_derivations, load_matrix_file, load_structure, read_json, show_columns,
    show_scalar, structure_to_file, write_json, AlgebraFile, ContextFile, DerivationsFile,
    InputError,
};
use quadlie_cli::report::Report;

#[derive(Parser)]
#[command(
    name = "quadlie",
    version,
    about = "Exact checks for quadratic Lie algebras, central extensions, and double extensions"
)]
struct Cli {
    /// Print the report as JSON (byte-stable across reruns with the same seed)
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Lie axioms and, when a form is present, that it is an invariant metric
    Verify { file: PathBuf },
    /// Build the central extension defined by skew derivations of a quadratic base
    Extend {
        file: PathBuf,
        /// JSON file {dim, maps: [matrix, ...]}, one square matrix per kernel direction
        #[arg(long)]
        derivations: PathBuf,
        /// Invariant metric on the total algebra (bare JSON matrix); adds the geometry checks
        #[arg(long)]
        metric: Option<PathBuf>,
    },
    /// Classify the kernel of a metric extension and compute its Fitting split
    Classify {
        file: PathBuf,
        /// The derivations that built the extension, as for extend
        #[arg(long)]
        derivations: PathBuf,
        /// Invariant metric on the total algebra (bare JSON matrix)
        #[arg(long)]
        metric: PathBuf,
    },
    /// Assemble a double central extension from a context file
    DoubleExtend {
        file: PathBuf,
        /// Also search for an invariant metric on the induced quotient
        #[arg(long)]
        search_metric: bool,
        /// Seed for the randomized stage of the metric search
        #[arg(long, default_value_t = DEFAULT_METRIC_SEED)]
        seed: u64,
    },
    /// Extract double extension data from an isotropic-kernel metric extension and rebuild it
    Extract {
        file: PathBuf,
        /// The derivations that built the extension, as for extend
        #[arg(long)]
        derivations: PathBuf,
        /// Invariant metric on the total algebra (bare JSON matrix)
        #[arg(long)]
        metric: PathBuf,
    },
    /// Collapse a two-step nilpotent quadratic algebra to a bracket of matrices
    TwoStep {
        file: PathBuf,
        /// Symmetric invertible pairing on the a-block (bare JSON matrix); searched if omitted
        #[arg(long)]
        mu: Option<PathBuf>,
    },
    /// Print a built-in example, optionally writing it to an algebra file
    Example {
        name: String,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run the full acceptance battery
    Suite,
}

enum Outcome {
    Done(Report),
    Inconclusive(Report),
}

type CmdResult = Result<Outcome, InputError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match run(&cli.command) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("input error: {err}");
            return ExitCode::from(2);
        }
    };
    let (report, code) = match outcome {
        Outcome::Done(report) => {
            let code = if report.all_ok() { 0 } else { 1 };
            (report, code)
        }
        Outcome::Inconclusive(report) => (report, 3),
    };
    if cli.json {
        println!("{}", report.render_json());
    } else {
        print!("{}", report.render_human(start.elapsed()));
    }
    ExitCode::from(code)
}

fn run(command: &Command) -> CmdResult {
    match command {
        Command::Verify { file } => cmd_verify(file),
        Command::Extend {
            file,
            derivations,
            metric,
        } => cmd_extend(file, derivations, metric.as_deref()),
        Command::Classify {
            file,
            derivations,
            metric,
        } => cmd_classify(file, derivations, metric),
        Command::DoubleExtend {
            file,
            search_metric,
            seed,
        } => cmd_double_extend(file, *search_metric, *seed),
        Command::Extract {
            file,
            derivations,
            metric,
        } => cmd_extract(file, derivations, metric),
        Command::TwoStep { file, mu } => cmd_two_step(file, mu.as_deref()),
        Command::Example { name, emit } => cmd_example(name, emit.as_deref()),
        Command::Suite => cmd_suite(),
    }
}

fn malformed(msg: impl Into<String>) -> InputError {
    InputError::Malformed(msg.into())
}

fn quadratic_from(data: &StructureData, form: &Mat) -> Result<QuadraticLieAlgebra, LieError> {
    let alg = data.clone().validate()?;
    let sym = SymBilinearForm::new(form.clone())?;
    QuadraticLieAlgebra::new(alg, sym)
}

fn structure_notes(report: &mut Report, alg: &LieAlgebra) {
    let sr = structure_report(alg);
    match sr.nilpotency_class {
        Some(class) => report.note(format!("nilpotency class {class}")),
        None => report.note("not nilpotent"),
    }
    report.note(format!("center has dimension {}", sr.center.dim()));
    report.note(format!(
        "derived ideal has dimension {}",
        sr.derived_ideal.dim()
    ));
    if sr.is_perfect {
        report.note("perfect");
    }
}

fn describe_witness(w: &Witness) -> String {
    let list = |v: &[exactlin::Scalar]| {
        v.iter().map(show_scalar).collect::<Vec<_>>().join(", ")
    };
    match w {
        Witness::Skew { i, j, k } => {
            format!("c[{i}][{j}][{k}] + c[{i}][{k}][{j}] is nonzero")
        }
        Witness::Jacobi { j, k, l, residual } => {
            format!("triple ({j},{k},{l}), residual [{}]", list(residual))
        }
        Witness::Symmetry { i, j } => format!("B[{i}][{j}] differs from B[{j}][{i}]"),
        Witness::Radical { vector } => format!("radical vector [{}]", list(vector)),
        Witness::Invariance { j, k, l, lhs, rhs } => format!(
            "triple ({j},{k},{l}): B([e_{j},e_{k}],e_{l}) = {}, B(e_{j},[e_{k},e_{l}]) = {}",
            show_scalar(lhs),
            show_scalar(rhs)
        ),
    }
}

fn axiom_check(
    report: &mut Report,
    name: &str,
    ok: bool,
    witnesses: &[Witness],
    matches: fn(&Witness) -> bool,
) {
    let detail = if ok {
        None
    } else {
        witnesses.iter().find(|w| matches(w)).map(describe_witness)
    };
    report.check(name, ok, detail);
}

fn cmd_verify(file: &Path) -> CmdResult {
    let af: AlgebraFile = read_json(file)?;
    let (data, form) = load_structure(&af)?;
    let mut report = Report::new(format!("verify {}", file.display()));
    report.note(format!("algebra {:?}, dimension {}", af.name, af.dim));
    match form {
        Some(fm) => {
            let qr = verify_quadratic(&data, &fm).map_err(|e| malformed(e.to_string()))?;
            axiom_check(&mut report, "bracket is skew", qr.skew_ok, &qr.witnesses, |w| {
                matches!(w, Witness::Skew { .. })
            });
            axiom_check(
                &mut report,
                "Jacobi identity holds",
                qr.jacobi_ok,
                &qr.witnesses,
                |w| matches!(w, Witness::Jacobi { .. }),
            );
            axiom_check(
                &mut report,
                "form is symmetric",
                qr.symmetric_ok,
                &qr.witnesses,
                |w| matches!(w, Witness::Symmetry { .. }),
            );
            axiom_check(
                &mut report,
                "form is nondegenerate",
                qr.nondegenerate_ok,
                &qr.witnesses,
                |w| matches!(w, Witness::Radical { .. }),
            );
            axiom_check(
                &mut report,
                "form is invariant",
                qr.invariant_ok,
                &qr.witnesses,
                |w| matches!(w, Witness::Invariance { .. }),
            );
            if qr.all_ok() {
                let alg = data.validate().expect("axioms were just verified");
                structure_notes(&mut report, &alg);
            }
        }
        None => match data.validate() {
            Ok(alg) => {
                report.check("bracket is skew", true, None);
                report.check("Jacobi identity holds", true, None);
                structure_notes(&mut report, &alg);
            }
            Err(e @ LieError::NotSkew { .. }) => {
                report.check("bracket is skew", false, Some(e.to_string()));
            }
            Err(e @ LieError::JacobiFails { .. }) => {
                report.check("bracket is skew", true, None);
                report.check("Jacobi identity holds", false, Some(e.to_string()));
            }
            Err(e) => return Err(malformed(e.to_string())),
        },
    }
    Ok(Outcome::Done(report))
}

/// Shared front half of extend/classify/extract: a quadratic base plus the
/// derivation maps, assembled into a central extension. `None` means a check
/// already failed and was recorded.
fn load_extension(
    report: &mut Report,
    file: &Path,
    derivations: &Path,
) -> Result<Option<CentralExtension>, InputError> {
    let af: AlgebraFile = read_json(file)?;
    let (data, form) = load_structure(&af)?;
    let form = form.ok_or_else(|| malformed("the algebra file needs a form"))?;
    report.note(format!("base {:?}, dimension {}", af.name, af.dim));
    let base = match quadratic_from(&data, &form) {
        Ok(base) => {
            report.check("base is a quadratic Lie algebra", true, None);
            base
        }
        Err(e) => {
            report.check("base is a quadratic Lie algebra", false, Some(e.to_string()));
            return Ok(None);
        }
    };
    let dfile: DerivationsFile = read_json(derivations)?;
    if dfile.dim != base.dim() {
        return Err(malformed(format!(
            "derivations are {}-dimensional, base is {}-dimensional",
            dfile.dim,
            base.dim()
        )));
    }
    let maps: Vec<LinMap> = load_derivations(&dfile)?
        .into_iter()
        .map(LinMap::new)
        .collect();
    match build_central_extension(base, maps) {
        Ok(ext) => {
            report.check("maps are skew derivations of the base", true, None);
            report.note(format!(
                "total algebra has dimension {}, kernel rank {}",
                ext.total().dim(),
                ext.r()
            ));
            Ok(Some(ext))
        }
        Err(e) => {
            report.check(
                "maps are skew derivations of the base",
                false,
                Some(e.to_string()),
            );
            Ok(None)
        }
    }
}

/// Loads a total-algebra metric and runs the geometry over it. `None` means
/// the metric was rejected and the failure is already in the report.
fn attach_geometry(
    report: &mut Report,
    ext: &CentralExtension,
    path: &Path,
) -> Result<Option<ExtensionGeometry>, InputError> {
    let nn = ext.total().dim();
    let m = load_matrix_file(path, "metric")?;
    if m.rows() != nn || m.cols() != nn {
        return Err(malformed(format!(
            "metric is {}x{}, expected {nn}x{nn} for the total algebra",
            m.rows(),
            m.cols()
        )));
    }
    let name = "metric is an invariant metric on the total algebra";
    let sym = match SymBilinearForm::new(m) {
        Ok(sym) => sym,
        Err(e) => {
            report.check(name, false, Some(e.to_string()));
            return Ok(None);
        }
    };
    match extension_geometry(ext, sym) {
        Ok(geom) => {
            report.check(name, true, None);
            Ok(Some(geom))
        }
        Err(e) => {
            report.check(name, false, Some(e.to_string()));
            Ok(None)
        }
    }
}

fn cmd_extend(file: &Path, derivations: &Path, metric: Option<&Path>) -> CmdResult {
    let mut report = Report::new(format!("extend {}", file.display()));
    let Some(ext) = load_extension(&mut report, file, derivations)? else {
        return Ok(Outcome::Done(report));
    };
    structure_notes(&mut report, ext.total());
    if let Some(path) = metric {
        if let Some(geom) = attach_geometry(&mut report, &ext, path)? {
            report.note(format!("Fitting index of T is {}", geom.m()));
        }
    }
    Ok(Outcome::Done(report))
}

fn cmd_classify(file: &Path, derivations: &Path, metric: &Path) -> CmdResult {
    let mut report = Report::new(format!("classify {}", file.display()));
    let Some(ext) = load_extension(&mut report, file, derivations)? else {
        return Ok(Outcome::Done(report));
    };
    let Some(geom) = attach_geometry(&mut report, &ext, metric)? else {
        return Ok(Outcome::Done(report));
    };
    let class = classify_kernel(&geom, &ext);
    report.note(format!("kernel class: {:?}", class.tag));
    report.note(format!(
        "kernel radical has dimension {}",
        class.v_cap_vperp.dim()
    ));
    report.note(format!("Fitting index of T is {}", geom.m()));
    let split = fitting_split_extension(&geom, &ext);
    report.note(format!(
        "Fitting split: regular part of dimension {}, nil part of dimension {}",
        split.q.dim(),
        split.n_ideal.dim()
    ));
    match class.tag {
        KernelTag::NonDegenerate => {
            report.note("T is invertible; the kernel splits off orthogonally");
        }
        KernelTag::Isotropic => {
            report.note("kernel is totally isotropic; double extension data can be extracted");
        }
        KernelTag::Mixed => match reduce_mixed_kernel(&ext, &geom) {
            Ok(red) => {
                report.check("mixed kernel reduces to an isotropic sub-extension", true, None);
                report.note(format!(
                    "nondegenerate kernel part of dimension {} splits off; \
                     sub-extension keeps kernel rank {}",
                    red.u.dim(),
                    red.sub.r()
                ));
            }
            Err(e) => {
                report.check(
                    "mixed kernel reduces to an isotropic sub-extension",
                    false,
                    Some(e.to_string()),
                );
            }
        },
    }
    Ok(Outcome::Done(report))
}

fn cmd_extract(file: &Path, derivations: &Path, metric: &Path) -> CmdResult {
    let mut report = Report::new(format!("extract {}", file.display()));
    let Some(ext) = load_extension(&mut report, file, derivations)? else {
        return Ok(Outcome::Done(report));
    };
    let Some(geom) = attach_geometry(&mut report, &ext, metric)? else {
        return Ok(Outcome::Done(report));
    };
    let class = classify_kernel(&geom, &ext);
    if class.tag != KernelTag::Isotropic {
        report.check(
            "kernel is totally isotropic",
            false,
            Some(format!("kernel class is {:?}; classify and reduce first", class.tag)),
        );
        return Ok(Outcome::Done(report));
    }
    report.check("kernel is totally isotropic", true, None);
    let mut geom_used = geom;
    let extracted = match extract_double_data(&ext, &geom_used) {
        Err(DceError::KernelDualsNotNull { i, j }) => {
            report.note(format!(
                "dual vectors {i} and {j} pair nontrivially; renormalizing the metric"
            ));
            let renorm = "metric renormalizes so the duals become null";
            match make_kernel_dual_isotropic(&geom_used, &ext)
                .and_then(|(_, form)| extension_geometry(&ext, form))
            {
                Ok(g) => {
                    report.check(renorm, true, None);
                    geom_used = g;
                    extract_double_data(&ext, &geom_used)
                }
                Err(e) => {
                    report.check(renorm, false, Some(e.to_string()));
                    return Ok(Outcome::Done(report));
                }
            }
        }
        other => other,
    };
    let (dce, iso) = match extracted {
        Ok(pair) => {
            report.check("double extension data extracts", true, None);
            pair
        }
        Err(e) => {
            report.check("double extension data extracts", false, Some(e.to_string()));
            return Ok(Outcome::Done(report));
        }
    };
    report.note(format!(
        "core dimension {}, kernel rank {}",
        dce.h_dim(),
        dce.r()
    ));
    let same_c = dce.total().alg().in_basis(&iso.matrix).c == ext.total().data().c;
    report.check("rebuilt bracket matches the original through the isometry", same_c, None);
    let pulled = &(&iso.matrix.transpose() * dce.total().form().matrix()) * &iso.matrix;
    let same_form = pulled == *geom_used.metric().matrix();
    report.check("rebuilt form matches the original through the isometry", same_form, None);
    Ok(Outcome::Done(report))
}

fn cmd_double_extend(file: &Path, search_metric: bool, seed: u64) -> CmdResult {
    let cf: ContextFile = read_json(file)?;
    let parsed = load_context(&cf)?;
    let mut report = Report::new(format!("double-extend {}", file.display()));
    report.note(format!(
        "core dimension {}, extension rank {}",
        cf.h.dim, parsed.r
    ));
    let h_alg = match quadratic_from(&parsed.h_data, &parsed.h_form) {
        Ok(h) => {
            report.check("core is a quadratic Lie algebra", true, None);
            h
        }
        Err(e) => {
            report.check("core is a quadratic Lie algebra", false, Some(e.to_string()));
            return Ok(Outcome::Done(report));
        }
    };
    let phi: Vec<LinMap> = parsed.phi.into_iter().map(LinMap::new).collect();
    let ctx = DoubleExtensionContext::new(h_alg, phi, parsed.psi, parsed.omega)
        .map_err(|e| malformed(e.to_string()))?;
    let ctx_report = check_context(&ctx);
    for c in &ctx_report.checks {
        report.check(
            format!("context: {}", c.condition),
            c.ok,
            c.witness.as_ref().map(|w| format!("at indices {w:?}")),
        );
    }
    if !ctx_report.all_pass() {
        return Ok(Outcome::Done(report));
    }
    let dce = match build_double_central_extension(ctx) {
        Ok(dce) => {
            report.check("total algebra assembles into a quadratic Lie algebra", true, None);
            dce
        }
        Err(e) => {
            report.check(
                "total algebra assembles into a quadratic Lie algebra",
                false,
                Some(e.to_string()),
            );
            return Ok(Outcome::Done(report));
        }
    };
    report.note(format!("total dimension {}", dce.total().dim()));
    report.note(format!(
        "induced quotient has dimension {}",
        dce.g_induced().dim()
    ));
    structure_notes(&mut report, dce.total().alg());
    if search_metric {
        let search = g_metric_existence(&dce, seed);
        let name = "metric existence on the induced quotient decided";
        match search.verdict {
            MetricVerdict::Yes { .. } => {
                report.check(
                    name,
                    true,
                    Some(format!("yes: witness found after {} trials", search.trials)),
                );
            }
            MetricVerdict::No {
                space_dim,
                generic_rank,
                needed,
            } => {
                report.check(
                    name,
                    true,
                    Some(format!(
                        "no: candidate space has dimension {space_dim}, \
                         generic rank {generic_rank} < {needed} needed"
                    )),
                );
            }
            MetricVerdict::Inconclusive { trials } => {
                report.note(format!(
                    "metric existence undecided after {trials} trials; \
                     the exact certificate needs total dimension at most 12"
                ));
                if report.all_ok() {
                    return Ok(Outcome::Inconclusive(report));
                }
            }
        }
    }
    Ok(Outcome::Done(report))
}

fn render_rows(m: &Mat) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let cells: Vec<String> = (0..m.cols()).map(|j| show_scalar(&m[(i, j)])).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn cmd_two_step(file: &Path, mu: Option<&Path>) -> CmdResult {
    let af: AlgebraFile = read_json(file)?;
    let (data, form) = load_structure(&af)?;
    let form = form.ok_or_else(|| malformed("two-step needs a form in the algebra file"))?;
    let mut report = Report::new(format!("two-step {}", file.display()));
    report.note(format!("algebra {:?}, dimension {}", af.name, af.dim));
    let quad = match quadratic_from(&data, &form) {
        Ok(q) => {
            report.check("algebra is a quadratic Lie algebra", true, None);
            q
        }
        Err(e) => {
            report.check("algebra is a quadratic Lie algebra", false, Some(e.to_string()));
            return Ok(Outcome::Done(report));
        }
    };
    let n = quad.dim();
    if n % 2 != 0 {
        report.check(
            "basis splits into two half-dimensional blocks",
            false,
            Some(format!("dimension {n} is odd")),
        );
        return Ok(Outcome::Done(report));
    }
    let r = n / 2;
    report.note("a-block: first half of the basis; b-block: second half");
    let id = Mat::identity(n);
    let a = id.submatrix(0..n, 0..r);
    let b = id.submatrix(0..n, r..n);
    let mu_mat = match mu {
        Some(path) => {
            let m = load_matrix_file(path, "mu")?;
            if m.rows() != r || m.cols() != r {
                return Err(malformed(format!(
                    "mu is {}x{}, expected {r}x{r}",
                    m.rows(),
                    m.cols()
                )));
            }
            Some(m)
        }
        None => None,
    };
    match two_step_to_matrix_algebra(&quad, &a, &b, mu_mat) {
        Ok((_, matrix_algebra, ts)) => {
            report.check("algebra collapses to a bracket of matrices", true, None);
            report.note(format!("matrix algebra has dimension {}", ts.algebra_dim));
            report.note(format!("perfect: {}", ts.perfect));
            report.note(format!("centerless: {}", ts.centerless));
            for (i, a_mat) in matrix_algebra.basis.iter().enumerate() {
                report.note(format!("A_{} = {}", i + 1, render_rows(a_mat)));
            }
        }
        Err(e) => {
            report.check(
                "algebra collapses to a bracket of matrices",
                false,
                Some(e.to_string()),
            );
        }
    }
    Ok(Outcome::Done(report))
}

fn cmd_example(name: &str, emit: Option<&Path>) -> CmdResult {
    let fx = builtin_example(name).map_err(|e| malformed(e.to_string()))?;
    let mut report = Report::new(format!("example {name}"));
    report.note(format!(
        "example {} has dimension {}",
        fx.name,
        fx.algebra().dim()
    ));
    match &fx.kind {
        FixtureKind::Plain(_) => report.note("carries no form"),
        FixtureKind::Quadratic(_) => report.note("carries an invariant metric"),
        FixtureKind::Extension(ext, _) => report.note(format!(
            "central extension with kernel rank {}; the total algebra is emitted",
            ext.r()
        )),
    }
    structure_notes(&mut report, fx.algebra());
    if let Some(path) = emit {
        let tags = serde_json::json!({
            "fixture": fx.name,
            "nilradical_basis": show_columns(&fx.nil_basis),
        });
        let file = structure_to_file(
            &fx.name,
            fx.algebra().data(),
            fx.form().map(|f| f.matrix()),
            Some(tags),
        );
        write_json(path, &file)?;
        report.note(format!("wrote {}", path.display()));
    }
    Ok(Outcome::Done(report))
}

fn panic_text(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic with a non-string payload".to_string()
    }
}

fn cmd_suite() -> CmdResult {
    let mut report = Report::new("suite");
    let previous_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    for (idx, criterion) in quadlie::suite::criteria().into_iter().enumerate() {
        let begin = Instant::now();
        let outcome = catch_unwind(criterion.run);
        let elapsed = begin.elapsed();
        let (ok, detail) = match outcome {
            Ok(()) => match criterion.budget {
                Some(budget) if elapsed > budget => (
                    false,
                    Some(format!("exceeded the {} ms budget", budget.as_millis())),
                ),
                _ => (true, None),
            },
            Err(payload) => (false, Some(panic_text(payload))),
        };
        report.timed_check(
            format!("criterion {} ({})", idx + 1, criterion.label),
            ok,
            detail,
            elapsed,
        );
    }
    std::panic::set_hook(previous_hook);
    Ok(Outcome::Done(report))
}
