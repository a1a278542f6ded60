//! Double central extensions. A quadratic algebra with an isotropic kernel
//! splits, after an isometry, into three layers `a (+) h (+) a*`: a middle
//! quadratic algebra `h`, a totally isotropic rank-`r` layer `a`, and its
//! metric dual `a*` sitting in the center. This module packages the data
//! needed on `h` to rebuild the top algebra ([`DoubleExtensionContext`]),
//! checks the compatibility conditions with witnesses, assembles the total
//! algebra, and runs the converse extraction. [`g_metric_existence`] decides,
//! with an exact certificate when the dimension allows it, whether the
//! induced quotient on `a (+) h` admits an invariant metric of its own.

use std::collections::BTreeMap;

use exactlin::{int, Mat, Scalar};
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::extensions::{classify_kernel, CentralExtension, ExtensionGeometry, KernelTag};
use crate::liealg::{
    basis_vec, centroid_basis, derivation_violation, form_skew_violation, subalgebra_structure,
    LieAlgebra, LieError, LinMap, QuadraticLieAlgebra, StructureData, SymBilinearForm,
};
use crate::nilpotent2::{heisenberg_family, symplectic_gram, HeisenbergFamily};

#[derive(Debug, Error)]
pub enum DceError {
    #[error(transparent)]
    Base(#[from] LieError),
    #[error("{0}")]
    Shape(String),
    #[error("context condition {condition} fails at {indices:?}")]
    Context {
        condition: &'static str,
        indices: Vec<usize>,
    },
    #[error("kernel class must be isotropic, found {found:?}")]
    WrongKernelClass { found: KernelTag },
    #[error(
        "dual vectors {i} and {j} pair nontrivially; \
         rebuild the metric with make_kernel_dual_isotropic first"
    )]
    KernelDualsNotNull { i: usize, j: usize },
}

/// Raw data for a rank-`r` double central extension over a quadratic algebra
/// `h`: maps `phi_i` on `h`, an `h`-valued pairing `Psi` on the new
/// directions, and a scalar 3-tensor `omega`. Column `j` of `psi[i]` is
/// `Psi(a_i, a_j)`; `omega[i][(j, k)]` is `omega(a_i, a_j)(a_k)`. Only shapes
/// are enforced here; every semantic condition lives in [`check_context`].
#[derive(Debug, Clone)]
pub struct DoubleExtensionContext {
    h_alg: QuadraticLieAlgebra,
    r: usize,
    phi: Vec<LinMap>,
    psi: Vec<Mat>,
    omega: Vec<Mat>,
}

impl DoubleExtensionContext {
    pub fn new(
        h_alg: QuadraticLieAlgebra,
        phi: Vec<LinMap>,
        psi: Vec<Mat>,
        omega: Vec<Mat>,
    ) -> Result<DoubleExtensionContext, DceError> {
        let r = phi.len();
        if r == 0 {
            return Err(DceError::Shape(
                "need at least one extension direction".into(),
            ));
        }
        let p = h_alg.dim();
        for (i, f) in phi.iter().enumerate() {
            if f.matrix.rows() != p || f.matrix.cols() != p {
                return Err(DceError::Shape(format!(
                    "phi[{i}] is {}x{}, expected {p}x{p}",
                    f.matrix.rows(),
                    f.matrix.cols()
                )));
            }
        }
        if psi.len() != r {
            return Err(DceError::Shape(format!(
                "{} pairing slices for rank {r}",
                psi.len()
            )));
        }
        for (i, ps) in psi.iter().enumerate() {
            if ps.rows() != p || ps.cols() != r {
                return Err(DceError::Shape(format!(
                    "psi[{i}] is {}x{}, expected {p}x{r}",
                    ps.rows(),
                    ps.cols()
                )));
            }
        }
        if omega.len() != r {
            return Err(DceError::Shape(format!(
                "{} tensor slices for rank {r}",
                omega.len()
            )));
        }
        for (i, om) in omega.iter().enumerate() {
            if om.rows() != r || om.cols() != r {
                return Err(DceError::Shape(format!(
                    "omega[{i}] is {}x{}, expected {r}x{r}",
                    om.rows(),
                    om.cols()
                )));
            }
        }
        Ok(DoubleExtensionContext {
            h_alg,
            r,
            phi,
            psi,
            omega,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn h(&self) -> &QuadraticLieAlgebra {
        &self.h_alg
    }

    pub fn phi(&self) -> &[LinMap] {
        &self.phi
    }

    pub fn psi(&self) -> &[Mat] {
        &self.psi
    }

    pub fn omega(&self) -> &[Mat] {
        &self.omega
    }

    /// Dimension of the assembled algebra, `2r + dim h`.
    pub fn total_dim(&self) -> usize {
        2 * self.r + self.h_alg.dim()
    }
}

/// One semantic condition on a context, with the first offending index tuple
/// when it fails.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub condition: &'static str,
    pub ok: bool,
    pub witness: Option<Vec<usize>>,
}

/// Outcome of [`check_context`]: per-condition verdicts plus the two derived
/// cocycles. `cap_phi[k][(u, v)] = B_h(phi_k x_u, x_v)` pairs two `h`-vectors
/// into the `k`-th dual direction; `chi[i][(k, u)] = -B_h(Psi(a_i, a_k), x_u)`
/// pairs a new direction with an `h`-vector.
#[derive(Debug, Clone)]
pub struct ContextReport {
    pub checks: Vec<ConditionCheck>,
    pub cap_phi: Vec<Mat>,
    pub chi: Vec<Mat>,
}

impl ContextReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn first_failure(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| !c.ok)
    }
}

/// Checks every compatibility condition a context must satisfy for the
/// assembled bracket to be a Lie bracket with an invariant metric. Never
/// errors: each condition gets a verdict and, when violated, the first
/// offending index tuple.
pub fn check_context(ctx: &DoubleExtensionContext) -> ContextReport {
    let r = ctx.r;
    let p = ctx.h_alg.dim();
    let halg = ctx.h_alg.alg();
    let bh = ctx.h_alg.form();
    let mut checks = Vec::new();

    let mut witness = None;
    'derivation: for (i, f) in ctx.phi.iter().enumerate() {
        if let Some((u, v)) = derivation_violation(halg, &f.matrix) {
            witness = Some(vec![i, u, v]);
            break 'derivation;
        }
    }
    push(&mut checks, "phi-derivation", witness);

    let mut witness = None;
    'skew: for (i, f) in ctx.phi.iter().enumerate() {
        if let Some((u, v)) = form_skew_violation(bh, &f.matrix) {
            witness = Some(vec![i, u, v]);
            break 'skew;
        }
    }
    push(&mut checks, "phi-skew", witness);

    let mut witness = None;
    'psi_skew: for i in 0..r {
        for j in i..r {
            let sum: Vec<Scalar> = ctx.psi[i]
                .col(j)
                .iter()
                .zip(ctx.psi[j].col(i))
                .map(|(a, b)| a + &b)
                .collect();
            if sum.iter().any(|v| !v.is_zero()) {
                witness = Some(vec![i, j]);
                break 'psi_skew;
            }
        }
    }
    push(&mut checks, "psi-skew", witness);

    let mut witness = None;
    'commutator: for i in 0..r {
        for j in (i + 1)..r {
            let fi = &ctx.phi[i].matrix;
            let fj = &ctx.phi[j].matrix;
            let comm = &(fi * fj) - &(fj * fi);
            let mut adv = Mat::zeros(p, p);
            for (w, c) in ctx.psi[i].col(j).iter().enumerate() {
                if !c.is_zero() {
                    adv = &adv + &halg.ad_basis(w).scale(c);
                }
            }
            if !(&comm - &adv).is_zero() {
                witness = Some(vec![i, j]);
                break 'commutator;
            }
        }
    }
    push(&mut checks, "phi-commutator", witness);

    let mut witness = None;
    'phi_psi: for i in 0..r {
        for j in (i + 1)..r {
            for k in (j + 1)..r {
                let mut sum = ctx.phi[i].apply(&ctx.psi[j].col(k));
                for (w, v) in ctx.phi[j].apply(&ctx.psi[k].col(i)).iter().enumerate() {
                    sum[w] = &sum[w] + v;
                }
                for (w, v) in ctx.phi[k].apply(&ctx.psi[i].col(j)).iter().enumerate() {
                    sum[w] = &sum[w] + v;
                }
                if sum.iter().any(|v| !v.is_zero()) {
                    witness = Some(vec![i, j, k]);
                    break 'phi_psi;
                }
            }
        }
    }
    push(&mut checks, "phi-psi-cyclic", witness);

    let mut witness = None;
    'chi_psi: for i in 0..r {
        for j in (i + 1)..r {
            for k in (j + 1)..r {
                for l in 0..r {
                    let sum = bh.eval(&ctx.psi[i].col(l), &ctx.psi[j].col(k))
                        + bh.eval(&ctx.psi[j].col(l), &ctx.psi[k].col(i))
                        + bh.eval(&ctx.psi[k].col(l), &ctx.psi[i].col(j));
                    if !sum.is_zero() {
                        witness = Some(vec![i, j, k, l]);
                        break 'chi_psi;
                    }
                }
            }
        }
    }
    push(&mut checks, "chi-psi-cyclic", witness);

    let mut witness = None;
    'omega_skew: for i in 0..r {
        for j in i..r {
            for k in 0..r {
                if !(&ctx.omega[i][(j, k)] + &ctx.omega[j][(i, k)]).is_zero() {
                    witness = Some(vec![i, j, k]);
                    break 'omega_skew;
                }
            }
        }
    }
    push(&mut checks, "omega-skew", witness);

    let mut witness = None;
    'omega_cyclic: for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                if ctx.omega[i][(j, k)] != ctx.omega[j][(k, i)] {
                    witness = Some(vec![i, j, k]);
                    break 'omega_cyclic;
                }
            }
        }
    }
    push(&mut checks, "omega-cyclic", witness);

    let bhm = bh.matrix();
    let cap_phi: Vec<Mat> = ctx
        .phi
        .iter()
        .map(|f| &f.matrix.transpose() * bhm)
        .collect();
    let chi: Vec<Mat> = ctx.psi.iter().map(|ps| -&(&ps.transpose() * bhm)).collect();

    ContextReport {
        checks,
        cap_phi,
        chi,
    }
}

fn push(checks: &mut Vec<ConditionCheck>, condition: &'static str, witness: Option<Vec<usize>>) {
    checks.push(ConditionCheck {
        condition,
        ok: witness.is_none(),
        witness,
    });
}

/// The assembled algebra on basis `(a_1..a_r, h-basis, s_1..s_r)` together
/// with the context it came from and the induced quotient bracket on
/// `a (+) h`. Every `s_i` is central and the metric pairs `a_i` with `s_i`
/// hyperbolically over the metric of `h`.
#[derive(Debug, Clone)]
pub struct DoubleCentralExtension {
    context: DoubleExtensionContext,
    total: QuadraticLieAlgebra,
    g_induced: LieAlgebra,
}

impl DoubleCentralExtension {
    pub fn context(&self) -> &DoubleExtensionContext {
        &self.context
    }

    pub fn total(&self) -> &QuadraticLieAlgebra {
        &self.total
    }

    /// Bracket left on `a (+) h` after the central dual directions are
    /// projected away.
    pub fn g_induced(&self) -> &LieAlgebra {
        &self.g_induced
    }

    pub fn r(&self) -> usize {
        self.context.r
    }

    pub fn h_dim(&self) -> usize {
        self.context.h_alg.dim()
    }
}

// Structure constants of the total bracket. Layout: a-block, h-block,
// s-block. s never appears as an argument, so the dual directions are
// central by construction.
fn assemble_structure(
    ctx: &DoubleExtensionContext,
    cap_phi: &[Mat],
    chi: &[Mat],
) -> StructureData {
    let r = ctx.r;
    let p = ctx.h_alg.dim();
    let halg = ctx.h_alg.alg();
    let mut labels: Vec<String> = (1..=r).map(|i| format!("a{i}")).collect();
    labels.extend(halg.labels().iter().cloned());
    labels.extend((1..=r).map(|i| format!("s{i}")));
    let mut data = StructureData::zeros(2 * r + p);
    data.labels = labels;

    for i in 0..r {
        for j in (i + 1)..r {
            for (w, v) in ctx.psi[i].col(j).iter().enumerate() {
                if !v.is_zero() {
                    data.set_bracket(i, j, r + w, v.clone());
                }
            }
            for k in 0..r {
                let v = &ctx.omega[i][(j, k)];
                if !v.is_zero() {
                    data.set_bracket(i, j, r + p + k, v.clone());
                }
            }
        }
    }
    for i in 0..r {
        for u in 0..p {
            for w in 0..p {
                let v = &ctx.phi[i].matrix[(w, u)];
                if !v.is_zero() {
                    data.set_bracket(i, r + u, r + w, v.clone());
                }
            }
            for k in 0..r {
                let v = &chi[i][(k, u)];
                if !v.is_zero() {
                    data.set_bracket(i, r + u, r + p + k, v.clone());
                }
            }
        }
    }
    for u in 0..p {
        for v in (u + 1)..p {
            for w in 0..p {
                let c = halg.c(w, u, v);
                if !c.is_zero() {
                    data.set_bracket(r + u, r + v, r + w, c.clone());
                }
            }
            for k in 0..r {
                let c = &cap_phi[k][(u, v)];
                if !c.is_zero() {
                    data.set_bracket(r + u, r + v, r + p + k, c.clone());
                }
            }
        }
    }
    data
}

// Metric of the total algebra: a_i pairs with s_i, the middle block keeps
// the metric of h, everything else is zero.
fn big_form(ctx: &DoubleExtensionContext) -> Mat {
    let r = ctx.r;
    let p = ctx.h_alg.dim();
    let bh = ctx.h_alg.form().matrix();
    Mat::from_fn(2 * r + p, 2 * r + p, |i, j| {
        if i < r && j >= r + p && j - r - p == i {
            int(1)
        } else if j < r && i >= r + p && i - r - p == j {
            int(1)
        } else if (r..r + p).contains(&i) && (r..r + p).contains(&j) {
            bh[(i - r, j - r)].clone()
        } else {
            Scalar::zero()
        }
    })
}

fn induced_quotient(ctx: &DoubleExtensionContext) -> LieAlgebra {
    let r = ctx.r;
    let p = ctx.h_alg.dim();
    let halg = ctx.h_alg.alg();
    let mut labels: Vec<String> = (1..=r).map(|i| format!("a{i}")).collect();
    labels.extend(halg.labels().iter().cloned());
    let mut data = StructureData::zeros(r + p);
    data.labels = labels;
    for i in 0..r {
        for j in (i + 1)..r {
            for (w, v) in ctx.psi[i].col(j).iter().enumerate() {
                if !v.is_zero() {
                    data.set_bracket(i, j, r + w, v.clone());
                }
            }
        }
        for u in 0..p {
            for w in 0..p {
                let v = &ctx.phi[i].matrix[(w, u)];
                if !v.is_zero() {
                    data.set_bracket(i, r + u, r + w, v.clone());
                }
            }
        }
    }
    for u in 0..p {
        for v in (u + 1)..p {
            for w in 0..p {
                let c = halg.c(w, u, v);
                if !c.is_zero() {
                    data.set_bracket(r + u, r + v, r + w, c.clone());
                }
            }
        }
    }
    data.validate()
        .expect("the quotient by the central dual directions satisfies Jacobi")
}

/// Assembles the total algebra of a context. The context is re-checked and
/// the first failing condition is returned as an error; past that point the
/// construction is a theorem, so Jacobi, invariance and centrality of the
/// dual directions are asserted, not reported.
pub fn build_double_central_extension(
    ctx: DoubleExtensionContext,
) -> Result<DoubleCentralExtension, DceError> {
    let report = check_context(&ctx);
    if let Some(fail) = report.first_failure() {
        return Err(DceError::Context {
            condition: fail.condition,
            indices: fail.witness.clone().unwrap_or_default(),
        });
    }
    let data = assemble_structure(&ctx, &report.cap_phi, &report.chi);
    let alg = data
        .validate()
        .expect("a context passing every check assembles to a Lie bracket");
    let form = SymBilinearForm::new(big_form(&ctx))
        .expect("the layered form is symmetric by construction");
    let total = QuadraticLieAlgebra::new(alg, form)
        .expect("a checked context carries an invariant metric");
    let r = ctx.r;
    let p = ctx.h_alg.dim();
    for k in 0..r {
        assert!(
            total.alg().ad_basis(r + p + k).is_zero(),
            "dual direction {k} must be central"
        );
    }
    let g_induced = induced_quotient(&ctx);
    Ok(DoubleCentralExtension {
        context: ctx,
        total,
        g_induced,
    })
}

/// Reads a double-extension context off a central extension whose kernel is
/// isotropic and whose dual vectors pair to zero: the middle algebra is the
/// image of `T` with the restricted metric, `phi_i` is the bracket action of
/// the `i`-th dual vector on it, `Psi` collects the brackets between dual
/// vectors and `omega` their cocycle values. Returns the rebuilt extension
/// together with the isometry from the original total algebra onto it; the
/// isometry sends the kernel vector `v_i` to the new dual direction `s_i`.
pub fn extract_double_data(
    ext: &CentralExtension,
    geom: &ExtensionGeometry,
) -> Result<(DoubleCentralExtension, LinMap), DceError> {
    let class = classify_kernel(geom, ext);
    if class.tag != KernelTag::Isotropic {
        return Err(DceError::WrongKernelClass { found: class.tag });
    }
    let n = ext.base().dim();
    let r = ext.r();
    let nn = n + r;
    let bg = geom.metric().matrix();
    let galg = ext.base().alg();

    let duals = geom.dual_basis_matrix();
    let dual_gram = &(&duals.transpose() * bg) * &duals;
    for i in 0..r {
        for j in i..r {
            if !dual_gram[(i, j)].is_zero() {
                return Err(DceError::KernelDualsNotNull { i, j });
            }
        }
    }

    let hb = geom.t().matrix.column_space().basis().clone();
    let p = hb.cols();
    let bgg = bg.submatrix(0..n, 0..n);
    let bh = &(&hb.transpose() * &bgg) * &hb;
    let mut hdata = subalgebra_structure(galg, &hb)
        .expect("the image of T is a subalgebra of the base");
    hdata.labels = (1..=p).map(|i| format!("h{i}")).collect();
    let halg = hdata
        .validate()
        .expect("a subalgebra inherits the Jacobi identity");
    let h_quad = QuadraticLieAlgebra::new(
        halg,
        SymBilinearForm::new(bh).expect("a restricted metric stays symmetric"),
    )
    .expect("the metric restricts nondegenerately to the image of T");

    let amat = geom.a_matrix();
    let coords_in_h = |x: &[Scalar]| -> Vec<Scalar> {
        if p == 0 {
            assert!(
                x.iter().all(Zero::is_zero),
                "a bracket escapes the zero image of T"
            );
            Vec::new()
        } else {
            hb.solve(x)
                .expect("the image of the transfer map absorbs this bracket")
        }
    };
    let phi: Vec<LinMap> = (0..r)
        .map(|i| {
            let cols: Vec<Vec<Scalar>> = (0..p)
                .map(|j| coords_in_h(&galg.bracket(&amat.col(i), &hb.col(j))))
                .collect();
            LinMap::new(Mat::from_columns(p, &cols))
        })
        .collect();
    let psi: Vec<Mat> = (0..r)
        .map(|i| {
            let cols: Vec<Vec<Scalar>> = (0..r)
                .map(|j| coords_in_h(&galg.bracket(&amat.col(i), &amat.col(j))))
                .collect();
            Mat::from_columns(p, &cols)
        })
        .collect();
    let bbase = ext.base().form();
    let omega: Vec<Mat> = (0..r)
        .map(|i| {
            Mat::from_fn(r, r, |j, k| {
                bbase.eval(
                    &ext.derivations()[k].apply(&amat.col(i)),
                    &amat.col(j),
                )
            })
        })
        .collect();

    let ctx = DoubleExtensionContext::new(h_quad, phi, psi, omega)?;
    let dce = build_double_central_extension(ctx)?;

    // the duals, the image of T and the kernel line G up as one isometry
    let mut cols: Vec<Vec<Scalar>> = duals.columns();
    for j in 0..p {
        let mut c = hb.col(j);
        c.extend(std::iter::repeat_with(Scalar::zero).take(r));
        cols.push(c);
    }
    for i in 0..r {
        cols.push(basis_vec(nn, n + i));
    }
    let m_mat = Mat::from_columns(nn, &cols);
    assert_eq!(
        &(&m_mat.transpose() * bg) * &m_mat,
        *dce.total.form().matrix(),
        "rebasing must carry one metric to the other"
    );
    for j in 0..nn {
        for k in (j + 1)..nn {
            let lhs = m_mat.mul_vec(
                &dce.total
                    .alg()
                    .bracket(&basis_vec(nn, j), &basis_vec(nn, k)),
            );
            let rhs = ext.total().bracket(&m_mat.col(j), &m_mat.col(k));
            assert!(lhs == rhs, "rebasing is not a Lie morphism at ({j},{k})");
        }
    }
    let omega_iso = LinMap::new(
        m_mat
            .inverse()
            .expect("duals, image and kernel together span the total algebra"),
    );
    Ok((dce, omega_iso))
}

/// Default seed for the randomized stage of [`g_metric_existence`].
pub const DEFAULT_METRIC_SEED: u64 = 20260816;

/// Random draws attempted after the deterministic candidates.
pub const METRIC_SEARCH_TRIALS: usize = 64;

// Symbolic rank certificates are only attempted up to this total dimension.
const SYMBOLIC_DIM_LIMIT: usize = 12;

#[derive(Debug, Clone)]
pub enum MetricVerdict {
    /// A witness: `l` is a symmetric centroid element of the total algebra
    /// killing the dual directions, and `b_g(x, y) = B(l x, y)` is an
    /// invariant metric on the induced quotient.
    Yes { l: LinMap, b_g: SymBilinearForm },
    /// Exact certificate: every admissible `l` gives a form of rank at most
    /// `generic_rank < needed`, so no invariant metric arises this way.
    No {
        space_dim: usize,
        generic_rank: usize,
        needed: usize,
    },
    /// The search space looks generically nondegenerate but no witness was
    /// found within the trial budget.
    Inconclusive { trials: usize },
}

#[derive(Debug, Clone)]
pub struct MetricSearch {
    pub verdict: MetricVerdict,
    pub trials: usize,
}

/// Decides whether the induced quotient of a double central extension admits
/// an invariant metric of the form `B(l x, y)` with `l` a form-symmetric
/// centroid element of the total algebra vanishing on the dual directions.
/// Tries the candidate basis, then pair sums, then `METRIC_SEARCH_TRIALS`
/// seeded random combinations; a definite `No` is certified by the exact
/// generic rank of the candidate pencil when the total dimension is at most
/// 12. `Inconclusive` is reported honestly and never coerced.
pub fn g_metric_existence(dce: &DoubleCentralExtension, seed: u64) -> MetricSearch {
    let total = &dce.total;
    let nt = total.dim();
    let gdim = dce.context.r + dce.context.h_alg.dim();
    let needed = gdim;
    let bmat = total.form().matrix();

    let (_, sym) = centroid_basis(total.alg(), Some(total.form()));
    let sym = sym.expect("a form was supplied");
    let k0 = sym.len();
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for c in gdim..nt {
        for i in 0..nt {
            rows.push((0..k0).map(|k| sym[k].matrix[(i, c)].clone()).collect());
        }
    }
    let candidates: Vec<Mat> = if k0 == 0 {
        Vec::new()
    } else {
        Mat::from_rows(rows)
            .expect("constraint rows share one length")
            .kernel_basis()
            .basis_columns()
            .iter()
            .map(|coeffs| {
                let mut l = Mat::zeros(nt, nt);
                for (k, c) in coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        l = &l + &sym[k].matrix.scale(c);
                    }
                }
                l
            })
            .collect()
    };
    let d = candidates.len();
    if d == 0 {
        return MetricSearch {
            verdict: MetricVerdict::No {
                space_dim: 0,
                generic_rank: 0,
                needed,
            },
            trials: 0,
        };
    }

    let bsub = bmat.submatrix(0..nt, 0..gdim);
    let grams: Vec<Mat> = candidates
        .iter()
        .map(|l| &l.submatrix(0..nt, 0..gdim).transpose() * &bsub)
        .collect();

    if grams.iter().all(Mat::is_zero) {
        return MetricSearch {
            verdict: MetricVerdict::No {
                space_dim: d,
                generic_rank: 0,
                needed,
            },
            trials: 0,
        };
    }
    if nt <= SYMBOLIC_DIM_LIMIT {
        let generic_rank = symbolic_generic_rank(&grams);
        if generic_rank < needed {
            return MetricSearch {
                verdict: MetricVerdict::No {
                    space_dim: d,
                    generic_rank,
                    needed,
                },
                trials: 0,
            };
        }
    }

    let mut trials = 0usize;
    let mut found = None;
    for k in 0..d {
        trials += 1;
        let mut coeffs = vec![Scalar::zero(); d];
        coeffs[k] = int(1);
        if let Some(hit) = try_coeffs(&coeffs, &candidates, &grams, &dce.g_induced) {
            found = Some(hit);
            break;
        }
    }
    if found.is_none() {
        'pairs: for i in 0..d {
            for j in (i + 1)..d {
                trials += 1;
                let mut coeffs = vec![Scalar::zero(); d];
                coeffs[i] = int(1);
                coeffs[j] = int(1);
                if let Some(hit) = try_coeffs(&coeffs, &candidates, &grams, &dce.g_induced) {
                    found = Some(hit);
                    break 'pairs;
                }
            }
        }
    }
    if found.is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..METRIC_SEARCH_TRIALS {
            let coeffs: Vec<Scalar> = (0..d).map(|_| int(rng.gen_range(-3i64..=3))).collect();
            if coeffs.iter().all(Zero::is_zero) {
                continue;
            }
            trials += 1;
            if let Some(hit) = try_coeffs(&coeffs, &candidates, &grams, &dce.g_induced) {
                found = Some(hit);
                break;
            }
        }
    }
    match found {
        Some((l, b_g)) => MetricSearch {
            verdict: MetricVerdict::Yes { l, b_g },
            trials,
        },
        None => MetricSearch {
            verdict: MetricVerdict::Inconclusive { trials },
            trials,
        },
    }
}

fn try_coeffs(
    coeffs: &[Scalar],
    candidates: &[Mat],
    grams: &[Mat],
    g_induced: &LieAlgebra,
) -> Option<(LinMap, SymBilinearForm)> {
    let gdim = grams[0].rows();
    let nt = candidates[0].rows();
    let mut gram = Mat::zeros(gdim, gdim);
    let mut lmat = Mat::zeros(nt, nt);
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        gram = &gram + &grams[k].scale(c);
        lmat = &lmat + &candidates[k].scale(c);
    }
    if gram.is_zero() {
        return None;
    }
    let form = SymBilinearForm::new(gram).ok()?;
    let quad = QuadraticLieAlgebra::new(g_induced.clone(), form).ok()?;
    Some((LinMap::new(lmat), quad.form().clone()))
}

// Sparse multivariate polynomial over the rationals, monomials ordered
// lexicographically by exponent vector. Just enough for fraction-free
// elimination: ring ops and an exact division that panics if the quotient
// is not polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
struct MPoly {
    terms: BTreeMap<Vec<u32>, Scalar>,
}

impl MPoly {
    fn zero() -> MPoly {
        MPoly {
            terms: BTreeMap::new(),
        }
    }

    fn one(nvars: usize) -> MPoly {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; nvars], int(1));
        MPoly { terms }
    }

    fn var(k: usize, nvars: usize, coeff: Scalar) -> MPoly {
        let mut exps = vec![0; nvars];
        exps[k] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exps, coeff);
        MPoly { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, exps: Vec<u32>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), -c);
        }
        out
    }

    fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert(exps, ca * cb);
            }
        }
        out
    }

    fn leading(&self) -> Option<(&Vec<u32>, &Scalar)> {
        self.terms.iter().next_back()
    }

    // Exact division, valid whenever the divisor's leading term divides
    // every intermediate leading term; Bareiss elimination guarantees that.
    fn div_exact(&self, divisor: &MPoly) -> MPoly {
        let (dexp, dc) = divisor.leading().expect("division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = MPoly::zero();
        while let Some((rexp, rc)) = rem.leading() {
            let qexp: Vec<u32> = rexp
                .iter()
                .zip(dexp)
                .map(|(a, b)| {
                    a.checked_sub(*b)
                        .expect("fraction-free elimination divides exactly")
                })
                .collect();
            let qc = rc / dc;
            let mut piece = MPoly::zero();
            for (e, c) in &divisor.terms {
                let exps: Vec<u32> = e.iter().zip(&qexp).map(|(x, y)| x + y).collect();
                piece.insert(exps, c * &qc);
            }
            quot.insert(qexp, qc);
            rem = rem.sub(&piece);
        }
        quot
    }
}

// Rank of `sum_k c_k grams[k]` over the rational function field in the
// `c_k`, by fraction-free elimination with full pivoting. Specializations
// can only lose rank, so a deficient generic rank is a certificate.
fn symbolic_generic_rank(grams: &[Mat]) -> usize {
    let nv = grams.len();
    let size = grams[0].rows();
    let mut m: Vec<Vec<MPoly>> = (0..size)
        .map(|u| {
            (0..size)
                .map(|v| {
                    let mut acc = MPoly::zero();
                    for (k, g) in grams.iter().enumerate() {
                        let c = &g[(u, v)];
                        if !c.is_zero() {
                            acc = acc.add(&MPoly::var(k, nv, c.clone()));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut prev = MPoly::one(nv);
    let mut rank = 0;
    for step in 0..size {
        let mut pivot = None;
        'find: for i in step..size {
            for j in step..size {
                if !m[i][j].is_zero() {
                    pivot = Some((i, j));
                    break 'find;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(step, pi);
        if pj != step {
            for row in m.iter_mut() {
                row.swap(step, pj);
            }
        }
        rank += 1;
        for i in (step + 1)..size {
            for j in (step + 1)..size {
                let num = m[step][step].mul(&m[i][j]).sub(&m[i][step].mul(&m[step][j]));
                m[i][j] = num.div_exact(&prev);
            }
            m[i][step] = MPoly::zero();
        }
        prev = m[step][step].clone();
    }
    rank
}

/// Basis of the space of invariant symmetric bilinear forms on the Heisenberg
/// algebra `h_m`, solved from the invariance equations over packed symmetric
/// coordinates. Every solution kills the center line, so none is a metric.
pub fn heisenberg_invariant_forms(m: usize) -> Vec<Mat> {
    let fam = heisenberg_family(m, None).expect("m must be positive");
    let HeisenbergFamily::Plain(alg) = fam else {
        unreachable!("no derivation was supplied")
    };
    let n = alg.dim();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a..n).map(move |b| (a, b)))
        .collect();
    let mut index = vec![vec![0usize; n]; n];
    for (idx, &(a, b)) in pairs.iter().enumerate() {
        index[a][b] = idx;
        index[b][a] = idx;
    }
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut row = vec![Scalar::zero(); pairs.len()];
                for w in 0..n {
                    let c = alg.c(w, i, j);
                    if !c.is_zero() {
                        row[index[w][k]] = &row[index[w][k]] + c;
                    }
                    let c = alg.c(w, j, k);
                    if !c.is_zero() {
                        row[index[i][w]] = &row[index[i][w]] - c;
                    }
                }
                if row.iter().any(|v| !v.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    Mat::from_rows(rows)
        .expect("invariance rows share the packed length")
        .kernel_basis()
        .basis_columns()
        .iter()
        .map(|sol| Mat::from_fn(n, n, |a, b| sol[index[a][b]].clone()))
        .collect()
}

/// Context whose total algebra is the oscillator extension of `h_m`: the
/// middle algebra is the abelian symplectic half metrized through the inverse
/// of `d`, and the single new direction acts by `d` itself. `d` must be
/// invertible and skew for the symplectic pairing.
pub fn oscillator_context(m: usize, d: &Mat) -> Result<DoubleExtensionContext, DceError> {
    if m == 0 {
        return Err(DceError::Shape("need at least one symplectic pair".into()));
    }
    let two_m = 2 * m;
    if d.rows() != two_m || d.cols() != two_m {
        return Err(DceError::Shape(format!(
            "expected a {two_m}x{two_m} block on the symplectic half"
        )));
    }
    let w = symplectic_gram(m);
    let d_inv = d
        .inverse()
        .ok_or_else(|| DceError::Shape("the acting block must be invertible".into()))?;
    if !(&(&d.transpose() * &w) + &(&w * d)).is_zero() {
        return Err(DceError::Shape(
            "the acting block must be skew for the symplectic pairing".into(),
        ));
    }
    let mut labels = Vec::with_capacity(two_m);
    for i in 0..m {
        labels.push(format!("x{}", i + 1));
    }
    for i in 0..m {
        labels.push(format!("y{}", i + 1));
    }
    let mut data = StructureData::zeros(two_m);
    data.labels = labels;
    let halg = data.validate().expect("the zero bracket is a Lie bracket");
    let form = SymBilinearForm::new(&d_inv.transpose() * &w)
        .expect("symplectic skewness makes the pulled-back gram symmetric");
    let h_alg = QuadraticLieAlgebra::new(halg, form)
        .expect("an invertible gram is an invariant metric on an abelian algebra");
    DoubleExtensionContext::new(
        h_alg,
        vec![LinMap::new(d.clone())],
        vec![Mat::zeros(two_m, 1)],
        vec![Mat::zeros(1, 1)],
    )
}
