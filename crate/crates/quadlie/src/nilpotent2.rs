//! Two-step nilpotent quadratic algebras split as `g = a (+) b` with both
//! halves isotropic and dually paired, `b` the center and the derived ideal.
//! The structure constants of such an algebra pack into skew matrices
//! `A_1..A_r`, and the whole question of extending `g` by an isotropic
//! central kernel reduces to matrix arithmetic: a symmetric invertible `mu`
//! must make the twisted commutators `A_j mu A_k - A_k mu A_j` close over
//! `span(A_i)` with prescribed coefficients. When it does, the span is a
//! quadratic Lie algebra in its own right and the extension exists with an
//! explicit hyperbolic-flavored metric.
//!
//! The module also carries the generator zoo used everywhere else: the
//! Heisenberg algebras and their metrized oscillator extensions, cotangent
//! algebras `a (+) a*` driven by a cyclic 3-tensor, the reductive
//! construction gluing a semisimple block to a central one, and named
//! fixtures behind [`builtin_example`].

use exactlin::{int, Mat, Scalar};
use num_traits::Zero;
use thiserror::Error;

use crate::extensions::{
    build_central_extension, classify_kernel, extension_geometry, CentralExtension, ExtError,
    ExtensionGeometry, KernelTag,
};
use crate::liealg::{
    inner_witness, structure_report, LieAlgebra, LieError, LinMap, QuadraticLieAlgebra,
    StructureData, SymBilinearForm,
};

#[derive(Debug, Clone, Error)]
pub enum Nil2Error {
    #[error(transparent)]
    Base(#[from] LieError),
    #[error(transparent)]
    Extension(#[from] ExtError),
    #[error("{0}")]
    Shape(String),
    #[error("expected a 2-step nilpotent algebra, found class {found:?}")]
    NotTwoStep { found: Option<usize> },
    #[error("the b-basis does not span the derived ideal")]
    DerivedMismatch,
    #[error("the b-basis does not span the center")]
    CenterMismatch,
    #[error("{part} is not isotropic at basis pair ({i},{j})")]
    NotIsotropic { part: &'static str, i: usize, j: usize },
    #[error("pairing of a_{i} with b_{j} is not delta")]
    NotDual { i: usize, j: usize },
    #[error("mu must be symmetric and invertible")]
    BadMu,
    #[error("no candidate mu closes the matrix bracket")]
    NoValidMu,
    #[error("matrix bracket does not close over the A span at pair ({j},{k})")]
    ClosureFails { j: usize, k: usize },
    #[error("{part} tensor fails its cyclic symmetries at ({i},{j},{k})")]
    NotCyclic { part: &'static str, i: usize, j: usize, k: usize },
    #[error("A matrices must be linearly independent")]
    DependentA,
    #[error("derivation data: {0}")]
    BadDerivation(String),
    #[error("unknown example {0:?}")]
    UnknownExample(String),
}

/// First violation of the cyclic-tensor symmetries `f(i,j,k) = f(j,k,i)` and
/// `f(i,j,k) = -f(i,k,j)`, where `f(i,j,k) = ts[j][(i,k)]`. A tensor passing
/// both is alternating under every permutation; for fewer than three indices
/// it must vanish.
fn cyclic_violation(ts: &[Mat]) -> Option<(usize, usize, usize)> {
    let r = ts.len();
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                if ts[j][(i, k)] != ts[k][(j, i)] {
                    return Some((i, j, k));
                }
                if !(&ts[j][(i, k)] + &ts[k][(i, j)]).is_zero() {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

fn hyperbolic_form(r: usize) -> Mat {
    Mat::from_fn(2 * r, 2 * r, |i, j| {
        if i + r == j || j + r == i {
            int(1)
        } else {
            Scalar::zero()
        }
    })
}

/// The alternating tensor on three indices with `f(0,1,2) = 1`, packed as
/// its three coefficient matrices. Only defined for rank 3.
pub fn epsilon_tensor() -> Vec<Mat> {
    vec![
        Mat::from_int_rows(&[&[0, 0, 0], &[0, 0, -1], &[0, 1, 0]]),
        Mat::from_int_rows(&[&[0, 0, 1], &[0, 0, 0], &[-1, 0, 0]]),
        Mat::from_int_rows(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 0]]),
    ]
}

/// The packed data of a 2-step nilpotent quadratic algebra on a hyperbolic
/// basis `(a_1..a_r, b_1..b_r)`: structure matrices `A_j` with
/// `A_j[(i,k)]` the `b_i`-coefficient of `[a_j, a_k]`, the symmetric
/// invertible `lambda` with inverse `mu`, and cocycle matrices `e_j`
/// feeding the `b`-valued part of the extension derivations. Both 3-tensors
/// are alternating in the [`cyclic_violation`] sense and the `A_j` are
/// linearly independent.
#[derive(Debug, Clone)]
pub struct TwoStepData {
    r: usize,
    a: Vec<Mat>,
    lambda: Mat,
    mu: Mat,
    e: Vec<Mat>,
}

/// The span of the `A_j` as an abstract quadratic Lie algebra: bracket
/// coefficients `(mu A_j)[(i,k)]` and form `lambda`.
#[derive(Debug, Clone)]
pub struct MatrixAlgebraA {
    pub basis: Vec<Mat>,
    pub algebra: QuadraticLieAlgebra,
}

#[derive(Debug, Clone)]
pub struct TwoStepReport {
    pub algebra_dim: usize,
    pub perfect: bool,
    pub centerless: bool,
}

impl TwoStepData {
    pub fn new(a: Vec<Mat>, lambda: Mat, e: Vec<Mat>) -> Result<Self, Nil2Error> {
        let r = a.len();
        if e.len() != r {
            return Err(Nil2Error::Shape(format!(
                "{} A matrices but {} e matrices",
                r,
                e.len()
            )));
        }
        for (name, ms) in [("A", &a), ("e", &e)] {
            for (j, m) in ms.iter().enumerate() {
                if m.rows() != r || m.cols() != r {
                    return Err(Nil2Error::Shape(format!(
                        "{name} matrix {j} is {}x{}, expected {r}x{r}",
                        m.rows(),
                        m.cols()
                    )));
                }
            }
        }
        if lambda.rows() != r || lambda.cols() != r {
            return Err(Nil2Error::Shape(format!(
                "lambda is {}x{}, expected {r}x{r}",
                lambda.rows(),
                lambda.cols()
            )));
        }
        if !lambda.is_symmetric() {
            return Err(Nil2Error::BadMu);
        }
        let mu = lambda.inverse().ok_or(Nil2Error::BadMu)?;
        if let Some((i, j, k)) = cyclic_violation(&a) {
            return Err(Nil2Error::NotCyclic {
                part: "alpha",
                i,
                j,
                k,
            });
        }
        if let Some((i, j, k)) = cyclic_violation(&e) {
            return Err(Nil2Error::NotCyclic { part: "e", i, j, k });
        }
        let flat: Vec<Vec<Scalar>> = a
            .iter()
            .map(|m| {
                let mut col = Vec::with_capacity(r * r);
                for i in 0..r {
                    for k in 0..r {
                        col.push(m[(i, k)].clone());
                    }
                }
                col
            })
            .collect();
        if Mat::from_columns(r * r, &flat).rank() != r {
            return Err(Nil2Error::DependentA);
        }
        Ok(TwoStepData { r, a, lambda, mu, e })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn a_matrices(&self) -> &[Mat] {
        &self.a
    }

    pub fn lambda(&self) -> &Mat {
        &self.lambda
    }

    pub fn mu(&self) -> &Mat {
        &self.mu
    }

    pub fn e_matrices(&self) -> &[Mat] {
        &self.e
    }

    /// The 2-step algebra the data came from: `[a_j, a_k] = sum_i A_j[(i,k)] b_i`,
    /// `b` central, hyperbolic pairing between the halves.
    pub fn base_algebra(&self) -> QuadraticLieAlgebra {
        let r = self.r;
        let mut data = StructureData::zeros(2 * r);
        let mut labels = Vec::with_capacity(2 * r);
        for i in 0..r {
            labels.push(format!("a{}", i + 1));
        }
        for i in 0..r {
            labels.push(format!("b{}", i + 1));
        }
        data.labels = labels;
        for j in 0..r {
            for k in (j + 1)..r {
                for i in 0..r {
                    let v = self.a[j][(i, k)].clone();
                    if !v.is_zero() {
                        data.set_bracket(j, k, r + i, v);
                    }
                }
            }
        }
        let alg = data
            .validate()
            .expect("a bracket valued in the center satisfies Jacobi");
        let form =
            SymBilinearForm::new(hyperbolic_form(r)).expect("hyperbolic matrix is symmetric");
        QuadraticLieAlgebra::new(alg, form)
            .expect("cyclic structure constants keep the hyperbolic form invariant")
    }

    /// Checks that the twisted commutators close over the span with the
    /// prescribed coefficients and returns the span as an abstract quadratic
    /// algebra. Failure here is definitive: no invariant metric with
    /// isotropic kernel exists for this data.
    pub fn matrix_algebra(&self) -> Result<MatrixAlgebraA, Nil2Error> {
        let r = self.r;
        let mua: Vec<Mat> = (0..r).map(|j| &self.mu * &self.a[j]).collect();
        for j in 0..r {
            for k in (j + 1)..r {
                let lhs = &(&(&self.a[j] * &self.mu) * &self.a[k])
                    - &(&(&self.a[k] * &self.mu) * &self.a[j]);
                let mut rhs = Mat::zeros(r, r);
                for i in 0..r {
                    let c = &mua[j][(i, k)];
                    if !c.is_zero() {
                        rhs = &rhs + &self.a[i].scale(c);
                    }
                }
                if lhs != rhs {
                    return Err(Nil2Error::ClosureFails { j, k });
                }
            }
        }
        let mut data = StructureData::zeros(r);
        data.labels = (0..r).map(|i| format!("A{}", i + 1)).collect();
        for j in 0..r {
            for k in (j + 1)..r {
                for i in 0..r {
                    let v = mua[j][(i, k)].clone();
                    if !v.is_zero() {
                        data.set_bracket(j, k, i, v);
                    }
                }
            }
        }
        let alg = data.validate()?;
        let form = SymBilinearForm::new(self.lambda.clone())?;
        let algebra = QuadraticLieAlgebra::new(alg, form)?;
        Ok(MatrixAlgebraA {
            basis: self.a.clone(),
            algebra,
        })
    }
}

/// Extracts the packed matrix data from a 2-step nilpotent quadratic algebra
/// presented on an explicit hyperbolic split. `mu` is taken as given (or
/// searched over diagonal sign patterns when absent); the data is rebuilt
/// into the abstract matrix algebra, whose perfectness and center are
/// reported rather than assumed.
pub fn two_step_to_matrix_algebra(
    g: &QuadraticLieAlgebra,
    a_basis: &Mat,
    b_basis: &Mat,
    mu: Option<Mat>,
) -> Result<(TwoStepData, MatrixAlgebraA, TwoStepReport), Nil2Error> {
    let n = g.dim();
    let r = a_basis.cols();
    if a_basis.rows() != n || b_basis.rows() != n || b_basis.cols() != r {
        return Err(Nil2Error::Shape(format!(
            "bases must be {n}-row with equal column counts"
        )));
    }
    if n != 2 * r {
        return Err(Nil2Error::Shape(format!(
            "dimension {n} is not twice the half-rank {r}"
        )));
    }
    if a_basis.hstack(b_basis).rank() != n {
        return Err(Nil2Error::Shape("the two bases must span".into()));
    }

    let report = structure_report(g.alg());
    let b_span = b_basis.column_space();
    if !(b_span.dim() == report.derived_ideal.dim()
        && report.derived_ideal.contains_subspace(&b_span))
    {
        return Err(Nil2Error::DerivedMismatch);
    }
    if !(b_span.dim() == report.center.dim() && report.center.contains_subspace(&b_span)) {
        return Err(Nil2Error::CenterMismatch);
    }
    if report.nilpotency_class != Some(2) {
        return Err(Nil2Error::NotTwoStep {
            found: report.nilpotency_class,
        });
    }

    for i in 0..r {
        for j in i..r {
            if !g.b(&a_basis.col(i), &a_basis.col(j)).is_zero() {
                return Err(Nil2Error::NotIsotropic {
                    part: "a-basis",
                    i,
                    j,
                });
            }
            if !g.b(&b_basis.col(i), &b_basis.col(j)).is_zero() {
                return Err(Nil2Error::NotIsotropic {
                    part: "b-basis",
                    i,
                    j,
                });
            }
        }
    }
    for i in 0..r {
        for j in 0..r {
            let want = if i == j { int(1) } else { Scalar::zero() };
            if g.b(&a_basis.col(i), &b_basis.col(j)) != want {
                return Err(Nil2Error::NotDual { i, j });
            }
        }
    }

    let mut a = vec![Mat::zeros(r, r); r];
    for j in 0..r {
        for k in (j + 1)..r {
            let br = g.alg().bracket(&a_basis.col(j), &a_basis.col(k));
            let coords = b_basis
                .solve(&br)
                .expect("brackets land in the derived ideal");
            for i in 0..r {
                a[j][(i, k)] = coords[i].clone();
                a[k][(i, j)] = -&coords[i];
            }
        }
    }

    let build = |mu: Mat| -> Result<(TwoStepData, MatrixAlgebraA), Nil2Error> {
        if !mu.is_symmetric() {
            return Err(Nil2Error::BadMu);
        }
        let lambda = mu.inverse().ok_or(Nil2Error::BadMu)?;
        let data = TwoStepData::new(a.clone(), lambda, vec![Mat::zeros(r, r); r])?;
        let malg = data.matrix_algebra()?;
        Ok((data, malg))
    };

    let (data, malg) = match mu {
        Some(mu) => build(mu)?,
        None => {
            // diagonal sign patterns, all-plus first so the search is
            // deterministic
            let mut found = None;
            for bits in 0..(1u32 << r.min(16)) {
                let cand = Mat::from_fn(r, r, |i, j| {
                    if i != j {
                        Scalar::zero()
                    } else if bits >> i & 1 == 0 {
                        int(1)
                    } else {
                        int(-1)
                    }
                });
                if let Ok(pair) = build(cand) {
                    found = Some(pair);
                    break;
                }
            }
            found.ok_or(Nil2Error::NoValidMu)?
        }
    };

    let areport = structure_report(malg.algebra.alg());
    let two_report = TwoStepReport {
        algebra_dim: malg.algebra.dim(),
        perfect: areport.is_perfect,
        centerless: areport.center.is_zero(),
    };
    Ok((data, malg, two_report))
}

/// Builds the central extension the data encodes, with its invariant metric
/// and full transfer geometry. The derivations take the block form
/// `[[mu A_j, 0], [e_j, A_j mu]]` on the `(a, b)` split, the metric pairs
/// `a` with the kernel and measures `b` against itself through `mu`, and
/// the resulting kernel is always isotropic with `T^2 = 0`.
pub fn matrix_algebra_to_extension(
    data: &TwoStepData,
) -> Result<(CentralExtension, SymBilinearForm, ExtensionGeometry), Nil2Error> {
    data.matrix_algebra()?;
    let r = data.r();
    let base = data.base_algebra();

    let ds: Vec<LinMap> = (0..r)
        .map(|j| {
            let top = (&data.mu * &data.a[j]).hstack(&Mat::zeros(r, r));
            let bottom = data.e[j].hstack(&(&data.a[j] * &data.mu));
            LinMap::new(top.vstack(&bottom))
        })
        .collect();
    let ext = build_central_extension(base, ds)?;

    let bg = Mat::from_fn(3 * r, 3 * r, |i, j| {
        let (bi, ii) = (i / r, i % r);
        let (bj, jj) = (j / r, j % r);
        match (bi, bj) {
            (0, 2) | (2, 0) => {
                if ii == jj {
                    int(1)
                } else {
                    Scalar::zero()
                }
            }
            (1, 1) => data.mu[(ii, jj)].clone(),
            _ => Scalar::zero(),
        }
    });
    let form = SymBilinearForm::new(bg)?;
    let geom = extension_geometry(&ext, form.clone())?;

    let t_expected = Mat::zeros(r, 2 * r).vstack(&data.lambda.hstack(&Mat::zeros(r, r)));
    assert!(
        geom.t().matrix == t_expected,
        "T must map the a half onto the b half through lambda"
    );
    assert!(
        (&geom.t().matrix * &geom.t().matrix).is_zero(),
        "T must square to zero"
    );
    for d in ext.derivations() {
        assert!(
            inner_witness(ext.base().alg(), d).is_none(),
            "cocycle derivations act on the a half, so they cannot be inner"
        );
    }
    let class = classify_kernel(&geom, &ext);
    assert_eq!(
        class.tag,
        KernelTag::Isotropic,
        "the kernel pairs to zero against itself by construction"
    );
    Ok((ext, form, geom))
}

/// The Heisenberg algebra on `(x_1..x_m, y_1..y_m, hbar)` with
/// `[x_i, y_i] = hbar`, or its metrized extension by a derivation.
#[derive(Debug, Clone)]
pub enum HeisenbergFamily {
    Plain(LieAlgebra),
    Oscillator(OscillatorData),
}

/// A Heisenberg algebra extended by an invertible symplectic-skew
/// derivation `d` of the symplectic half. The extended algebra carries an
/// invariant metric pairing the new generator with `hbar` and measuring the
/// symplectic half through `d^{-1}`; the quotient by `hbar` is the
/// (never-quadratic) algebra `span(d) + V` that `cocycle` extends back.
#[derive(Debug, Clone)]
pub struct OscillatorData {
    pub oscillator: QuadraticLieAlgebra,
    pub g_quotient: LieAlgebra,
    pub cocycle: Mat,
}

pub(crate) fn symplectic_gram(m: usize) -> Mat {
    Mat::from_fn(2 * m, 2 * m, |i, j| {
        if j == i + m {
            int(1)
        } else if i == j + m {
            int(-1)
        } else {
            Scalar::zero()
        }
    })
}

pub fn heisenberg_family(
    m: usize,
    with_derivation: Option<&Mat>,
) -> Result<HeisenbergFamily, Nil2Error> {
    if m == 0 {
        return Err(Nil2Error::Shape("need at least one symplectic pair".into()));
    }
    let dim = 2 * m + 1;
    let mut data = StructureData::zeros(dim);
    let mut labels = Vec::with_capacity(dim);
    for i in 0..m {
        labels.push(format!("x{}", i + 1));
    }
    for i in 0..m {
        labels.push(format!("y{}", i + 1));
    }
    labels.push("hbar".into());
    data.labels = labels;
    for i in 0..m {
        data.set_bracket(i, m + i, 2 * m, int(1));
    }
    let heis = data
        .validate()
        .expect("central-valued brackets satisfy Jacobi");

    let Some(d) = with_derivation else {
        return Ok(HeisenbergFamily::Plain(heis));
    };

    if d.rows() != 2 * m || d.cols() != 2 * m {
        return Err(Nil2Error::BadDerivation(format!(
            "expected a {0}x{0} block on the symplectic half",
            2 * m
        )));
    }
    let w = symplectic_gram(m);
    let d_inv = d.inverse().ok_or_else(|| {
        Nil2Error::BadDerivation("kernel must be exactly the center line".into())
    })?;
    if !(&(&d.transpose() * &w) + &(&w * d)).is_zero() {
        return Err(Nil2Error::BadDerivation(
            "must be skew for the symplectic pairing".into(),
        ));
    }

    let odim = 2 * m + 2;
    let mut odata = StructureData::zeros(odim);
    let mut olabels = vec!["d".to_string()];
    olabels.extend(heis.labels().iter().cloned());
    odata.labels = olabels;
    for u in 0..(2 * m) {
        for i in 0..(2 * m) {
            let v = d[(i, u)].clone();
            if !v.is_zero() {
                odata.set_bracket(0, 1 + u, 1 + i, v);
            }
        }
    }
    for i in 0..m {
        odata.set_bracket(1 + i, 1 + m + i, 2 * m + 1, int(1));
    }
    let oalg = odata
        .validate()
        .expect("a symplectic-skew block acts as a derivation");

    let v_gram = &d_inv.transpose() * &w;
    let bmat = Mat::from_fn(odim, odim, |i, j| {
        if (i, j) == (0, odim - 1) || (i, j) == (odim - 1, 0) {
            int(1)
        } else if (1..=2 * m).contains(&i) && (1..=2 * m).contains(&j) {
            v_gram[(i - 1, j - 1)].clone()
        } else {
            Scalar::zero()
        }
    });
    let oscillator = QuadraticLieAlgebra::new(oalg, SymBilinearForm::new(bmat)?)?;

    let qdim = 2 * m + 1;
    let mut qdata = StructureData::zeros(qdim);
    let mut qlabels = vec!["d".to_string()];
    for i in 0..m {
        qlabels.push(format!("x{}", i + 1));
    }
    for i in 0..m {
        qlabels.push(format!("y{}", i + 1));
    }
    qdata.labels = qlabels;
    for u in 0..(2 * m) {
        for i in 0..(2 * m) {
            let v = d[(i, u)].clone();
            if !v.is_zero() {
                qdata.set_bracket(0, 1 + u, 1 + i, v);
            }
        }
    }
    let g_quotient = qdata
        .validate()
        .expect("the quotient bracket inherits Jacobi");

    let mut cocycle = Mat::zeros(qdim, qdim);
    for i in 0..(2 * m) {
        for j in 0..(2 * m) {
            cocycle[(1 + i, 1 + j)] = w[(i, j)].clone();
        }
    }

    Ok(HeisenbergFamily::Oscillator(OscillatorData {
        oscillator,
        g_quotient,
        cocycle,
    }))
}

/// The cotangent algebra on `(a_1..a_r, s_1..s_r)`: `[a_j, a_k]` lands in
/// the `s` half with coefficients `omega[j][(i,k)]`, the `s` half is
/// central, and the two halves pair hyperbolically. Two-step nilpotent
/// whenever the tensor is nonzero.
pub fn cotangent_extension(r: usize, omega: &[Mat]) -> Result<QuadraticLieAlgebra, Nil2Error> {
    if omega.len() != r {
        return Err(Nil2Error::Shape(format!(
            "{} tensor slices for rank {r}",
            omega.len()
        )));
    }
    for (j, m) in omega.iter().enumerate() {
        if m.rows() != r || m.cols() != r {
            return Err(Nil2Error::Shape(format!(
                "slice {j} is {}x{}, expected {r}x{r}",
                m.rows(),
                m.cols()
            )));
        }
    }
    if let Some((i, j, k)) = cyclic_violation(omega) {
        return Err(Nil2Error::NotCyclic {
            part: "omega",
            i,
            j,
            k,
        });
    }
    let mut data = StructureData::zeros(2 * r);
    let mut labels = Vec::with_capacity(2 * r);
    for i in 0..r {
        labels.push(format!("a{}", i + 1));
    }
    for i in 0..r {
        labels.push(format!("s{}", i + 1));
    }
    data.labels = labels;
    for j in 0..r {
        for k in (j + 1)..r {
            for i in 0..r {
                let v = omega[j][(i, k)].clone();
                if !v.is_zero() {
                    data.set_bracket(j, k, r + i, v);
                }
            }
        }
    }
    let alg = data
        .validate()
        .expect("central-valued brackets satisfy Jacobi");
    let form = SymBilinearForm::new(hyperbolic_form(r))?;
    Ok(QuadraticLieAlgebra::new(alg, form)?)
}

/// Extends `g = s (+) center` by a kernel dual to the center: the input is
/// a semisimple quadratic block, the center gets the identity form and the
/// cyclic tensor `alpha` drives skew derivations acting on it alone. The
/// returned metric keeps the semisimple block as given and pairs the center
/// hyperbolically against the kernel, which is therefore isotropic.
pub fn reductive_extension(
    s: &QuadraticLieAlgebra,
    r: usize,
    alpha: &[Mat],
) -> Result<(CentralExtension, SymBilinearForm), Nil2Error> {
    if alpha.len() != r {
        return Err(Nil2Error::Shape(format!(
            "{} tensor slices for rank {r}",
            alpha.len()
        )));
    }
    for (j, m) in alpha.iter().enumerate() {
        if m.rows() != r || m.cols() != r {
            return Err(Nil2Error::Shape(format!(
                "slice {j} is {}x{}, expected {r}x{r}",
                m.rows(),
                m.cols()
            )));
        }
    }
    if let Some((i, j, k)) = cyclic_violation(alpha) {
        return Err(Nil2Error::NotCyclic {
            part: "alpha",
            i,
            j,
            k,
        });
    }
    let p = s.dim();
    // the adjoint trace form detects semisimplicity exactly
    let killing = Mat::from_fn(p, p, |i, j| {
        let prod = &s.alg().ad_basis(i) * &s.alg().ad_basis(j);
        (0..p).fold(Scalar::zero(), |acc, t| acc + &prod[(t, t)])
    });
    if killing.rank() != p {
        return Err(Nil2Error::Shape(
            "first summand must be semisimple".into(),
        ));
    }

    let n = p + r;
    let mut data = StructureData::zeros(n);
    let mut labels = s.alg().labels().to_vec();
    for i in 0..r {
        labels.push(format!("a{}", i + 1));
    }
    data.labels = labels;
    for j in 0..p {
        for k in (j + 1)..p {
            for i in 0..p {
                let v = s.alg().data().c[i][j][k].clone();
                if !v.is_zero() {
                    data.set_bracket(j, k, i, v);
                }
            }
        }
    }
    let galg = data
        .validate()
        .expect("adding central directions preserves Jacobi");
    let bgm = Mat::from_fn(n, n, |i, j| {
        if i < p && j < p {
            s.form().matrix()[(i, j)].clone()
        } else if i == j {
            int(1)
        } else {
            Scalar::zero()
        }
    });
    let g = QuadraticLieAlgebra::new(galg, SymBilinearForm::new(bgm)?)?;

    let ds: Vec<LinMap> = (0..r)
        .map(|j| {
            let mut d = Mat::zeros(n, n);
            for i in 0..r {
                for k in 0..r {
                    d[(p + i, p + k)] = alpha[j][(i, k)].clone();
                }
            }
            LinMap::new(d)
        })
        .collect();
    let ext = build_central_extension(g, ds)?;

    let nn = n + r;
    let bt = Mat::from_fn(nn, nn, |i, j| {
        if i < p && j < p {
            s.form().matrix()[(i, j)].clone()
        } else if i >= p && j >= p && (i + r == j || j + r == i) {
            int(1)
        } else {
            Scalar::zero()
        }
    });
    let form = SymBilinearForm::new(bt)?;
    QuadraticLieAlgebra::new(ext.total().clone(), form.clone())?;
    Ok((ext, form))
}

/// A named, fully validated object from the fixture zoo, with the declared
/// maximal nilpotent ideal attached for the suites that need it.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub kind: FixtureKind,
    pub nil_basis: Mat,
}

#[derive(Debug, Clone)]
pub enum FixtureKind {
    Plain(LieAlgebra),
    Quadratic(QuadraticLieAlgebra),
    Extension(CentralExtension, SymBilinearForm),
}

impl Fixture {
    pub fn algebra(&self) -> &LieAlgebra {
        match &self.kind {
            FixtureKind::Plain(alg) => alg,
            FixtureKind::Quadratic(q) => q.alg(),
            FixtureKind::Extension(ext, _) => ext.total(),
        }
    }

    pub fn form(&self) -> Option<&SymBilinearForm> {
        match &self.kind {
            FixtureKind::Plain(_) => None,
            FixtureKind::Quadratic(q) => Some(q.form()),
            FixtureKind::Extension(_, form) => Some(form),
        }
    }
}

fn sl2_quadratic() -> QuadraticLieAlgebra {
    let mut data = StructureData::zeros(3);
    data.labels = vec!["h".into(), "e".into(), "f".into()];
    data.set_bracket(0, 1, 1, int(2));
    data.set_bracket(0, 2, 2, int(-2));
    data.set_bracket(1, 2, 0, int(1));
    let alg = data.validate().expect("standard relations satisfy Jacobi");
    let form = SymBilinearForm::new(Mat::from_int_rows(&[&[8, 0, 0], &[0, 0, 4], &[0, 4, 0]]))
        .expect("symmetric by inspection");
    QuadraticLieAlgebra::new(alg, form).expect("the trace form is invariant")
}

/// The cross-product data: three slices of the alternating tensor, identity
/// pairing, and the same slices again feeding the `b`-valued cocycle part.
fn nine_dim_data() -> TwoStepData {
    TwoStepData::new(epsilon_tensor(), Mat::identity(3), epsilon_tensor())
        .expect("the alternating tensor passes its own symmetry checks")
}

fn parse_sized(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?
        .strip_prefix('(')?
        .strip_suffix(')')?
        .parse()
        .ok()
}

/// Named fixtures: `N6`, `G9`, `sl2`, `abelian(n)`, `heis(m)`,
/// `oscillator(m)`, `cotangent(r)`.
pub fn builtin_example(name: &str) -> Result<Fixture, Nil2Error> {
    let key = name.trim();
    let lower = key.to_ascii_lowercase();
    if lower == "n6" {
        return Ok(Fixture {
            name: "N6".into(),
            kind: FixtureKind::Quadratic(nine_dim_data().base_algebra()),
            nil_basis: Mat::identity(6),
        });
    }
    if lower == "g9" {
        let (ext, form, _) = matrix_algebra_to_extension(&nine_dim_data())?;
        return Ok(Fixture {
            name: "G9".into(),
            kind: FixtureKind::Extension(ext, form),
            nil_basis: Mat::identity(9),
        });
    }
    if lower == "sl2" {
        return Ok(Fixture {
            name: "sl2".into(),
            kind: FixtureKind::Quadratic(sl2_quadratic()),
            nil_basis: Mat::zeros(3, 0),
        });
    }
    if let Some(n) = parse_sized(&lower, "abelian") {
        let q = QuadraticLieAlgebra::new(
            LieAlgebra::abelian(n),
            SymBilinearForm::new(Mat::identity(n))?,
        )?;
        return Ok(Fixture {
            name: format!("abelian({n})"),
            kind: FixtureKind::Quadratic(q),
            nil_basis: Mat::identity(n),
        });
    }
    if let Some(m) = parse_sized(&lower, "heis") {
        let HeisenbergFamily::Plain(alg) = heisenberg_family(m, None)? else {
            unreachable!("no derivation was supplied");
        };
        return Ok(Fixture {
            name: format!("heis({m})"),
            kind: FixtureKind::Plain(alg),
            nil_basis: Mat::identity(2 * m + 1),
        });
    }
    if let Some(m) = parse_sized(&lower, "oscillator") {
        if m == 0 {
            return Err(Nil2Error::Shape("need at least one symplectic pair".into()));
        }
        let d = Mat::from_fn(2 * m, 2 * m, |i, j| {
            if i == j + m {
                int(1)
            } else if j == i + m {
                int(-1)
            } else {
                Scalar::zero()
            }
        });
        let HeisenbergFamily::Oscillator(osc) = heisenberg_family(m, Some(&d))? else {
            unreachable!("a derivation was supplied");
        };
        let dim = 2 * m + 2;
        let nil = Mat::identity(dim).submatrix(0..dim, 1..dim);
        return Ok(Fixture {
            name: format!("oscillator({m})"),
            kind: FixtureKind::Quadratic(osc.oscillator),
            nil_basis: nil,
        });
    }
    if let Some(r) = parse_sized(&lower, "cotangent") {
        let omega = if r == 3 {
            epsilon_tensor()
        } else {
            vec![Mat::zeros(r, r); r]
        };
        let q = cotangent_extension(r, &omega)?;
        return Ok(Fixture {
            name: format!("cotangent({r})"),
            kind: FixtureKind::Quadratic(q),
            nil_basis: Mat::identity(2 * r),
        });
    }
    Err(Nil2Error::UnknownExample(key.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extensions::{make_kernel_dual_isotropic, splitting_map};
    use crate::liealg::basis_vec;
    use exactlin::fitting_index;

    fn n6() -> QuadraticLieAlgebra {
        nine_dim_data().base_algebra()
    }

    fn split_bases(r: usize) -> (Mat, Mat) {
        let id = Mat::identity(2 * r);
        (id.submatrix(0..2 * r, 0..r), id.submatrix(0..2 * r, r..2 * r))
    }

    #[test]
    fn six_dim_fixture_structure() {
        let g = n6();
        let report = structure_report(g.alg());
        assert_eq!(report.nilpotency_class, Some(2));
        assert_eq!(report.center.dim(), 3);
        assert_eq!(report.derived_ideal.dim(), 3);
        assert_eq!(g.alg().bracket(&basis_vec(6, 0), &basis_vec(6, 1)), {
            let mut v = vec![Scalar::zero(); 6];
            v[5] = int(1);
            v
        });
    }

    #[test]
    fn extraction_reproduces_the_cross_product_matrices() {
        let g = n6();
        let (ab, bb) = split_bases(3);
        let (data, malg, report) =
            two_step_to_matrix_algebra(&g, &ab, &bb, Some(Mat::identity(3))).unwrap();
        let eps = epsilon_tensor();
        for j in 0..3 {
            assert_eq!(data.a_matrices()[j], eps[j], "slice {j}");
        }
        // [A_1, A_2] = A_3 and cyclic
        assert_eq!(malg.algebra.alg().c(2, 0, 1), &int(1));
        assert_eq!(malg.algebra.alg().c(0, 1, 2), &int(1));
        assert_eq!(malg.algebra.alg().c(1, 2, 0), &int(1));
        assert!(report.perfect);
        assert!(report.centerless);
        assert_eq!(report.algebra_dim, 3);
    }

    #[test]
    fn mu_search_lands_on_the_identity() {
        let g = n6();
        let (ab, bb) = split_bases(3);
        let (data, _, _) = two_step_to_matrix_algebra(&g, &ab, &bb, None).unwrap();
        assert_eq!(data.mu(), &Mat::identity(3));
    }

    #[test]
    fn extraction_rejects_abelian_input() {
        let q = QuadraticLieAlgebra::new(
            LieAlgebra::abelian(4),
            SymBilinearForm::new(hyperbolic_form(2)).unwrap(),
        )
        .unwrap();
        let (ab, bb) = split_bases(2);
        let err = two_step_to_matrix_algebra(&q, &ab, &bb, None).unwrap_err();
        assert!(matches!(err, Nil2Error::DerivedMismatch), "{err:?}");
    }

    #[test]
    fn extraction_rejects_asymmetric_mu() {
        let g = n6();
        let (ab, bb) = split_bases(3);
        let mut mu = Mat::identity(3);
        mu[(0, 1)] = int(1);
        let err = two_step_to_matrix_algebra(&g, &ab, &bb, Some(mu)).unwrap_err();
        assert!(matches!(err, Nil2Error::BadMu), "{err:?}");
    }

    #[test]
    fn data_constructor_rejects_zero_tensor() {
        let err = TwoStepData::new(
            vec![Mat::zeros(3, 3); 3],
            Mat::identity(3),
            vec![Mat::zeros(3, 3); 3],
        )
        .unwrap_err();
        assert!(matches!(err, Nil2Error::DependentA), "{err:?}");
    }

    #[test]
    fn data_constructor_rejects_non_cyclic_tensor() {
        let mut a = vec![Mat::zeros(2, 2); 2];
        a[0][(0, 1)] = int(1);
        let err =
            TwoStepData::new(a, Mat::identity(2), vec![Mat::zeros(2, 2); 2]).unwrap_err();
        assert!(
            matches!(err, Nil2Error::NotCyclic { part: "alpha", .. }),
            "{err:?}"
        );
    }

    #[test]
    fn nine_dim_extension_shape() {
        let (ext, form, geom) = matrix_algebra_to_extension(&nine_dim_data()).unwrap();
        assert_eq!(ext.total().dim(), 9);
        assert_eq!(ext.total().labels()[8], "v3");
        let report = structure_report(ext.total());
        assert_eq!(report.nilpotency_class, Some(3));
        let bg = form.matrix();
        assert_eq!(bg[(3, 3)], int(1));
        assert_eq!(bg[(0, 6)], int(1));
        assert_eq!(bg[(0, 0)], Scalar::zero());
        assert_eq!(bg[(0, 3)], Scalar::zero());
        assert_eq!(bg[(6, 6)], Scalar::zero());
        assert_eq!(geom.m(), 2);
        let fit = fitting_index(&geom.t().matrix).unwrap();
        assert!(fit.image.is_zero());
        assert!(fit.kernel.is_full());
    }

    #[test]
    fn nine_dim_extension_does_not_split() {
        let (ext, _, _) = matrix_algebra_to_extension(&nine_dim_data()).unwrap();
        assert!(splitting_map(&ext).is_none());
        for d in ext.derivations() {
            assert!(inner_witness(ext.base().alg(), d).is_none());
        }
    }

    #[test]
    fn nine_dim_kernel_is_isotropic_with_null_duals() {
        let (ext, _, geom) = matrix_algebra_to_extension(&nine_dim_data()).unwrap();
        let class = classify_kernel(&geom, &ext);
        assert_eq!(class.tag, KernelTag::Isotropic);
        // the dual vectors are already null, so the metric rebuild is trivial
        let (q, bbar) = make_kernel_dual_isotropic(&geom, &ext).unwrap();
        assert_eq!(q.matrix, Mat::identity(9));
        assert_eq!(bbar.matrix(), geom.metric().matrix());
    }

    #[test]
    fn zero_e_variant_is_still_quadratic() {
        let data =
            TwoStepData::new(epsilon_tensor(), Mat::identity(3), vec![Mat::zeros(3, 3); 3])
                .unwrap();
        let (ext, _, geom) = matrix_algebra_to_extension(&data).unwrap();
        let class = classify_kernel(&geom, &ext);
        assert_eq!(class.tag, KernelTag::Isotropic);
        assert_eq!(ext.total().dim(), 9);
    }

    #[test]
    fn roundtrip_extraction_then_extension_restores_the_base() {
        let g = n6();
        let (ab, bb) = split_bases(3);
        let (data, _, _) =
            two_step_to_matrix_algebra(&g, &ab, &bb, Some(Mat::identity(3))).unwrap();
        let (ext, _, _) = matrix_algebra_to_extension(&data).unwrap();
        assert_eq!(ext.base().alg().data().c, g.alg().data().c);
        assert_eq!(ext.base().form().matrix(), g.form().matrix());
    }

    #[test]
    fn rank_four_slices_are_never_independent() {
        // the four slices of a nonzero alternating tensor on four indices
        // satisfy one universal linear relation, so the constructor rejects
        let mut t = vec![Mat::zeros(4, 4); 4];
        let mut put = |i: usize, j: usize, k: usize, v: i64| {
            let val = int(v);
            t[j][(i, k)] = val.clone();
            t[k][(j, i)] = val.clone();
            t[i][(k, j)] = val.clone();
            t[k][(i, j)] = -&val;
            t[i][(j, k)] = -&val;
            t[j][(k, i)] = -&val;
        };
        put(0, 1, 2, 1);
        put(0, 1, 3, 1);
        put(0, 2, 3, 1);
        put(1, 2, 3, 5);
        let err =
            TwoStepData::new(t, Mat::identity(4), vec![Mat::zeros(4, 4); 4]).unwrap_err();
        assert!(matches!(err, Nil2Error::DependentA), "{err:?}");
    }

    #[test]
    fn five_slice_tensor_fails_to_close() {
        // alternating and independent, but [A_1, A_2] picks up a term
        // outside the prescribed combination: rejected outright
        let mut t = vec![Mat::zeros(5, 5); 5];
        let mut put = |i: usize, j: usize, k: usize, v: i64| {
            let val = int(v);
            t[j][(i, k)] = val.clone();
            t[k][(j, i)] = val.clone();
            t[i][(k, j)] = val.clone();
            t[k][(i, j)] = -&val;
            t[i][(j, k)] = -&val;
            t[j][(k, i)] = -&val;
        };
        put(0, 1, 2, 1);
        put(0, 3, 4, 1);
        let data = TwoStepData::new(t, Mat::identity(5), vec![Mat::zeros(5, 5); 5]).unwrap();
        let err = data.matrix_algebra().unwrap_err();
        assert!(matches!(err, Nil2Error::ClosureFails { j: 1, k: 2 }), "{err:?}");
    }

    #[test]
    fn heisenberg_shapes() {
        let HeisenbergFamily::Plain(h1) = heisenberg_family(1, None).unwrap() else {
            panic!("no derivation supplied");
        };
        let report = structure_report(&h1);
        assert_eq!(h1.dim(), 3);
        assert_eq!(report.nilpotency_class, Some(2));
        assert_eq!(report.center.dim(), 1);
        assert!(report.center.contains(&basis_vec(3, 2)));

        let HeisenbergFamily::Plain(h2) = heisenberg_family(2, None).unwrap() else {
            panic!("no derivation supplied");
        };
        assert_eq!(h2.dim(), 5);
    }

    #[test]
    fn oscillator_carries_the_expected_metric() {
        let d = Mat::from_int_rows(&[&[0, -1], &[1, 0]]);
        let HeisenbergFamily::Oscillator(osc) = heisenberg_family(1, Some(&d)).unwrap() else {
            panic!("derivation supplied");
        };
        let expected = Mat::from_int_rows(&[
            &[0, 0, 0, 1],
            &[0, 1, 0, 0],
            &[0, 0, 1, 0],
            &[1, 0, 0, 0],
        ]);
        assert_eq!(osc.oscillator.form().matrix(), &expected);
        assert_eq!(
            structure_report(osc.oscillator.alg()).nilpotency_class,
            None
        );
        assert_eq!(osc.g_quotient.dim(), 3);
        assert_eq!(osc.cocycle[(1, 2)], int(1));
        assert_eq!(osc.cocycle[(2, 1)], int(-1));
        assert_eq!(osc.cocycle[(0, 1)], Scalar::zero());
    }

    #[test]
    fn oscillator_rejects_non_symplectic_block() {
        let err = heisenberg_family(1, Some(&Mat::identity(2))).unwrap_err();
        assert!(matches!(err, Nil2Error::BadDerivation(_)), "{err:?}");
        let err = heisenberg_family(1, Some(&Mat::zeros(2, 2))).unwrap_err();
        assert!(matches!(err, Nil2Error::BadDerivation(_)), "{err:?}");
    }

    #[test]
    fn cotangent_of_epsilon_is_the_six_dim_fixture() {
        let q = cotangent_extension(3, &epsilon_tensor()).unwrap();
        let g = n6();
        assert_eq!(q.alg().data().c, g.alg().data().c);
        assert_eq!(q.form().matrix(), g.form().matrix());
    }

    #[test]
    fn cotangent_rejects_non_cyclic_tensor() {
        let mut w = vec![Mat::zeros(3, 3); 3];
        w[0][(0, 1)] = int(1);
        let err = cotangent_extension(3, &w).unwrap_err();
        assert!(
            matches!(err, Nil2Error::NotCyclic { part: "omega", .. }),
            "{err:?}"
        );
    }

    #[test]
    fn cotangent_zero_tensor_is_abelian() {
        let q = cotangent_extension(2, &vec![Mat::zeros(2, 2); 2]).unwrap();
        assert_eq!(structure_report(q.alg()).nilpotency_class, Some(1));
        assert_eq!(q.form().matrix(), &hyperbolic_form(2));
    }

    #[test]
    fn reductive_extension_over_sl2() {
        let (ext, form) = reductive_extension(&sl2_quadratic(), 3, &epsilon_tensor()).unwrap();
        assert_eq!(ext.total().dim(), 9);
        let geom = extension_geometry(&ext, form).unwrap();
        let class = classify_kernel(&geom, &ext);
        assert_eq!(class.tag, KernelTag::Isotropic);
        // the derivations move the center, which no inner map can do
        assert!(splitting_map(&ext).is_none());
    }

    #[test]
    fn reductive_rank_one_splits() {
        let (ext, _) = reductive_extension(&sl2_quadratic(), 1, &[Mat::zeros(1, 1)]).unwrap();
        let tau = splitting_map(&ext).expect("zero cocycle splits");
        assert!(tau.matrix.is_zero());
    }

    #[test]
    fn reductive_rejects_non_cyclic_alpha() {
        let mut a = Mat::zeros(1, 1);
        a[(0, 0)] = int(1);
        let err = reductive_extension(&sl2_quadratic(), 1, &[a]).unwrap_err();
        assert!(matches!(err, Nil2Error::NotCyclic { .. }), "{err:?}");
    }

    #[test]
    fn reductive_rejects_non_semisimple_block() {
        let q = QuadraticLieAlgebra::new(
            LieAlgebra::abelian(2),
            SymBilinearForm::new(Mat::identity(2)).unwrap(),
        )
        .unwrap();
        let err = reductive_extension(&q, 1, &[Mat::zeros(1, 1)]).unwrap_err();
        assert!(matches!(err, Nil2Error::Shape(_)), "{err:?}");
    }

    #[test]
    fn builtin_lookup() {
        assert_eq!(builtin_example("N6").unwrap().algebra().dim(), 6);
        let g9 = builtin_example("g9").unwrap();
        assert_eq!(g9.algebra().dim(), 9);
        assert!(matches!(g9.kind, FixtureKind::Extension(..)));
        assert_eq!(builtin_example("sl2").unwrap().nil_basis.cols(), 0);
        assert_eq!(builtin_example("abelian(3)").unwrap().algebra().dim(), 3);
        let heis = builtin_example("heis(2)").unwrap();
        assert_eq!(heis.algebra().dim(), 5);
        assert!(heis.form().is_none());
        let osc = builtin_example("oscillator(1)").unwrap();
        assert_eq!(osc.algebra().dim(), 4);
        assert_eq!(osc.nil_basis.cols(), 3);
        assert_eq!(builtin_example("cotangent(3)").unwrap().algebra().dim(), 6);
        assert!(matches!(
            builtin_example("so-not-a-name"),
            Err(Nil2Error::UnknownExample(_))
        ));
    }
}
