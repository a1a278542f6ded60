//! Central extensions of quadratic Lie algebras and the structure maps that
//! appear when the extended algebra is itself quadratic.
//!
//! An extension of `(g, B_g)` by an `r`-dimensional central kernel `V` is
//! encoded by `r` skew derivations `D_1..D_r`: on `G = g (+) V` the bracket is
//! `[x+u, y+v] = [x,y]_g + sum_i B_g(D_i x, y) v_i` and `V` is central. Given
//! an invariant metric `B_G` on `G`, a transfer pair appears: `h: G -> g`
//! adjoint to the inclusion and `k: g -> G` adjoint to the projection. The
//! composite `T = pi_g . k` is a `B_g`-symmetric centroid element whose
//! Fitting decomposition cuts both `g` and `G` into orthogonal ideals, and
//! the way `B_G` degenerates on `V` (not at all, totally, or in between)
//! decides which reduction applies.
//!
//! Every map constructed here is rechecked against the identities it is
//! supposed to satisfy; a failure is a bug and panics with the offending
//! basis indices.

use exactlin::{fitting_index, format_rational, Mat, Scalar, Subspace};
use num_traits::Zero;
use thiserror::Error;

use crate::liealg::{
    basis_vec, centroid_violation, derivation_violation, form_skew_violation,
    form_symmetry_violation, inner_witness, subalgebra_structure, LieAlgebra, LieError, LinMap,
    QuadraticLieAlgebra, StructureData, SymBilinearForm,
};

#[derive(Debug, Clone, Error)]
pub enum ExtError {
    #[error(transparent)]
    Base(#[from] LieError),
    #[error("map {index} fails the Leibniz rule on basis pair ({j},{k})")]
    NotDerivation { index: usize, j: usize, k: usize },
    #[error("map {index} is not skew for the base form on basis pair ({j},{k})")]
    NotFormSkew { index: usize, j: usize, k: usize },
    #[error("component {alpha} of the 2-form is not alternating at ({j},{k})")]
    CocycleNotSkew { alpha: usize, j: usize, k: usize },
    #[error("2-form fails the cocycle identity on basis triple ({j},{k},{l})")]
    NotCocycle { j: usize, k: usize, l: usize },
    #[error("operation needs a {expected:?} kernel, found {found:?}")]
    WrongKernelClass { expected: KernelTag, found: KernelTag },
    #[error("{0}")]
    Shape(String),
}

/// A central extension `0 -> V -> G -> g -> 0` of a quadratic Lie algebra,
/// presented by the skew derivations that generate its cocycle. The total
/// algebra lives on the basis `(e_1..e_n, v_1..v_r)`; the `v`-block is
/// central by construction and the bracket of two `g`-vectors carries the
/// cocycle values in its `v`-components.
#[derive(Debug, Clone)]
pub struct CentralExtension {
    base: QuadraticLieAlgebra,
    derivations: Vec<LinMap>,
    total: LieAlgebra,
}

impl CentralExtension {
    pub fn base(&self) -> &QuadraticLieAlgebra {
        &self.base
    }

    pub fn derivations(&self) -> &[LinMap] {
        &self.derivations
    }

    /// Kernel dimension.
    pub fn r(&self) -> usize {
        self.derivations.len()
    }

    pub fn total(&self) -> &LieAlgebra {
        &self.total
    }

    /// The cocycle matrices `theta_i = D_i^T B_g`, so that
    /// `theta_i[(j,k)] = B_g(D_i e_j, e_k)`.
    pub fn cocycle(&self) -> Vec<Mat> {
        let b = self.base.form().matrix();
        self.derivations
            .iter()
            .map(|d| &d.matrix.transpose() * b)
            .collect()
    }

    /// `iota: g -> G`, zero-padding into the total coordinates.
    pub fn embed(&self, x: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(x.len(), self.base.dim(), "embed expects a g-vector");
        let mut out = x.to_vec();
        out.resize(self.base.dim() + self.r(), Scalar::zero());
        out
    }

    pub fn g_part(&self, u: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(u.len(), self.total.dim(), "expected a G-vector");
        u[..self.base.dim()].to_vec()
    }

    pub fn v_part(&self, u: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(u.len(), self.total.dim(), "expected a G-vector");
        u[self.base.dim()..].to_vec()
    }

    /// `V = span(v_1..v_r)` inside the total algebra.
    pub fn kernel_subspace(&self) -> Subspace {
        let nn = self.total.dim();
        let cols: Vec<Vec<Scalar>> = (self.base.dim()..nn).map(|i| basis_vec(nn, i)).collect();
        Subspace::from_columns(nn, &cols)
    }
}

fn check_skew_derivation(
    base: &QuadraticLieAlgebra,
    index: usize,
    d: &LinMap,
) -> Result<(), ExtError> {
    let n = base.dim();
    if d.matrix.rows() != n || d.matrix.cols() != n {
        return Err(ExtError::Shape(format!(
            "map {index} is {}x{}, expected {n}x{n}",
            d.matrix.rows(),
            d.matrix.cols()
        )));
    }
    if let Some((j, k)) = derivation_violation(base.alg(), &d.matrix) {
        return Err(ExtError::NotDerivation { index, j, k });
    }
    if let Some((j, k)) = form_skew_violation(base.form(), &d.matrix) {
        return Err(ExtError::NotFormSkew { index, j, k });
    }
    Ok(())
}

/// Builds the total algebra from skew derivations. The only inputs that are
/// rejected are maps failing the Leibniz rule or form-skewness; for valid
/// ones the bracket always satisfies Jacobi (the cocycle identity is
/// equivalent to the derivation property here), which `validate` reconfirms.
pub fn build_central_extension(
    base: QuadraticLieAlgebra,
    derivations: Vec<LinMap>,
) -> Result<CentralExtension, ExtError> {
    let n = base.dim();
    let r = derivations.len();
    for (index, d) in derivations.iter().enumerate() {
        check_skew_derivation(&base, index, d)?;
    }
    let b = base.form().matrix();
    let thetas: Vec<Mat> = derivations.iter().map(|d| &d.matrix.transpose() * b).collect();

    let mut data = StructureData::zeros(n + r);
    let mut labels: Vec<String> = base.alg().labels().to_vec();
    for alpha in 0..r {
        labels.push(format!("v{}", alpha + 1));
    }
    data.labels = labels;
    for j in 0..n {
        for k in (j + 1)..n {
            for i in 0..n {
                let v = base.alg().data().c[i][j][k].clone();
                if !v.is_zero() {
                    data.set_bracket(j, k, i, v);
                }
            }
            for (alpha, th) in thetas.iter().enumerate() {
                let v = th[(j, k)].clone();
                if !v.is_zero() {
                    data.set_bracket(j, k, n + alpha, v);
                }
            }
        }
    }
    let total = data.validate()?;
    Ok(CentralExtension {
        base,
        derivations,
        total,
    })
}

/// The two equivalent presentations of an extension cocycle: the matrices
/// `theta_i[(j,k)] = B_g(D_i e_j, e_k)` or the derivations themselves.
#[derive(Debug, Clone)]
pub enum CocycleRep {
    Tensor(Vec<Mat>),
    Derivations(Vec<LinMap>),
}

/// Converts either representation into the other. Derivations are checked as
/// in [`build_central_extension`]; tensors must be alternating and satisfy
/// the cyclic cocycle identity (checked on ordered triples, which suffices
/// given skewness). Roundtripping is the identity because the base form is
/// inverted exactly.
pub fn cocycle_derivation_convert(
    base: &QuadraticLieAlgebra,
    input: &CocycleRep,
) -> Result<CocycleRep, ExtError> {
    let n = base.dim();
    let b = base.form().matrix();
    match input {
        CocycleRep::Derivations(ds) => {
            for (index, d) in ds.iter().enumerate() {
                check_skew_derivation(base, index, d)?;
            }
            Ok(CocycleRep::Tensor(
                ds.iter().map(|d| &d.matrix.transpose() * b).collect(),
            ))
        }
        CocycleRep::Tensor(thetas) => {
            for (alpha, th) in thetas.iter().enumerate() {
                if th.rows() != n || th.cols() != n {
                    return Err(ExtError::Shape(format!(
                        "component {alpha} is {}x{}, expected {n}x{n}",
                        th.rows(),
                        th.cols()
                    )));
                }
                for j in 0..n {
                    for k in j..n {
                        if !(&th[(j, k)] + &th[(k, j)]).is_zero() {
                            return Err(ExtError::CocycleNotSkew { alpha, j, k });
                        }
                    }
                }
            }
            for j in 0..n {
                for k in (j + 1)..n {
                    for l in (k + 1)..n {
                        for th in thetas {
                            let mut acc = Scalar::zero();
                            for (x, y, z) in [(j, k, l), (k, l, j), (l, j, k)] {
                                let br =
                                    base.alg().bracket(&basis_vec(n, x), &basis_vec(n, y));
                                for i in 0..n {
                                    acc = acc + &br[i] * &th[(i, z)];
                                }
                            }
                            if !acc.is_zero() {
                                return Err(ExtError::NotCocycle { j, k, l });
                            }
                        }
                    }
                }
            }
            let b_inv = b.inverse().expect("invariant metric is invertible");
            Ok(CocycleRep::Derivations(
                thetas
                    .iter()
                    .map(|th| LinMap::new(-&(&b_inv * th)))
                    .collect(),
            ))
        }
    }
}

/// A splitting `tau: g -> V` with `theta(x,y) = tau([x,y]_g)`, or `None`.
/// The extension splits exactly when every `D_i` is inner, say `D_i =
/// ad(x_i)`; invariance of `B_g` then gives `theta_i(x,y) = B_g(x_i, [x,y])`,
/// so row `i` of `tau` is `x_i^T B_g`. The reproduction of the cocycle is
/// asserted before returning.
pub fn splitting_map(ext: &CentralExtension) -> Option<LinMap> {
    let n = ext.base().dim();
    let r = ext.r();
    let b = ext.base().form().matrix();
    let mut tau = Mat::zeros(r, n);
    for (alpha, d) in ext.derivations().iter().enumerate() {
        let x = inner_witness(ext.base().alg(), d)?;
        for j in 0..n {
            tau[(alpha, j)] = (0..n)
                .map(|i| &x[i] * &b[(i, j)])
                .fold(Scalar::zero(), |acc, v| acc + v);
        }
    }
    let thetas = ext.cocycle();
    for j in 0..n {
        for k in (j + 1)..n {
            let br = ext.base().alg().bracket(&basis_vec(n, j), &basis_vec(n, k));
            let got = tau.mul_vec(&br);
            for alpha in 0..r {
                assert!(
                    got[alpha] == thetas[alpha][(j, k)],
                    "splitting fails to reproduce the cocycle at ({j},{k}), component {alpha}"
                );
            }
        }
    }
    Some(LinMap::new(tau))
}

/// The structure maps of an extension whose total algebra carries the
/// invariant metric `B_G`:
///
/// * `h: G -> g` with `B_G(u, y) = B_g(h(u), y)` for `y` in `g`,
/// * `k: g -> G` with `B_G(k(x), u) = B_g(x, pi_g(u))`, a section of `h`,
/// * `T = pi_g . k` and `R = pi_V . k` (so `k = T + R` blockwise),
/// * the dual vectors `a_i + w_i` spanning `Ker h = g-perp` with
///   `B_G(a_i + w_i, v_j) = delta_ij` (`a_i` in `g`, `w_i` in `V`),
/// * `L = k . pi_g` on `G` and `m`, the Fitting index of `T`.
#[derive(Debug, Clone)]
pub struct ExtensionGeometry {
    metric: SymBilinearForm,
    h: LinMap,
    k: LinMap,
    t: LinMap,
    r_map: LinMap,
    a: Vec<Vec<Scalar>>,
    w: Vec<Vec<Scalar>>,
    l: LinMap,
    m: usize,
}

impl ExtensionGeometry {
    pub fn metric(&self) -> &SymBilinearForm {
        &self.metric
    }

    pub fn h(&self) -> &LinMap {
        &self.h
    }

    pub fn k(&self) -> &LinMap {
        &self.k
    }

    pub fn t(&self) -> &LinMap {
        &self.t
    }

    pub fn r_map(&self) -> &LinMap {
        &self.r_map
    }

    pub fn a(&self) -> &[Vec<Scalar>] {
        &self.a
    }

    pub fn w(&self) -> &[Vec<Scalar>] {
        &self.w
    }

    pub fn l(&self) -> &LinMap {
        &self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The `a_i` as the columns of an `n x r` matrix.
    pub fn a_matrix(&self) -> Mat {
        Mat::from_columns(self.h.matrix.rows(), &self.a)
    }

    /// The vectors `a_i + w_i` as columns, a basis of `g-perp`.
    pub fn dual_basis_matrix(&self) -> Mat {
        let cols: Vec<Vec<Scalar>> = self
            .a
            .iter()
            .zip(&self.w)
            .map(|(a, w)| {
                let mut col = a.clone();
                col.extend(w.iter().cloned());
                col
            })
            .collect();
        Mat::from_columns(self.h.source_dim(), &cols)
    }

    /// `rho(x)` in `End(g)`: `y -> h([x, iota(y)]_G)`. Each value is a skew
    /// derivation of `g`; the composition rule it satisfies is
    /// `rho([x,y]_g) = rho(x) T rho(y) - rho(y) T rho(x)`.
    pub fn rho(&self, ext: &CentralExtension, x: &[Scalar]) -> LinMap {
        let n = ext.base().dim();
        let cols: Vec<Vec<Scalar>> = (0..n)
            .map(|j| {
                self.h
                    .apply(&ext.total().bracket(x, &ext.embed(&basis_vec(n, j))))
            })
            .collect();
        LinMap::new(Mat::from_columns(n, &cols))
    }

    /// `[x,y]_Delta = h([x,y]_G)` for `x, y` in total coordinates.
    pub fn delta_bracket(
        &self,
        ext: &CentralExtension,
        x: &[Scalar],
        y: &[Scalar],
    ) -> Vec<Scalar> {
        self.h.apply(&ext.total().bracket(x, y))
    }
}

#[track_caller]
fn assert_mat_eq(what: &str, got: &Mat, want: &Mat) {
    assert!(
        got.rows() == want.rows() && got.cols() == want.cols(),
        "{what}: shapes {}x{} vs {}x{}",
        got.rows(),
        got.cols(),
        want.rows(),
        want.cols()
    );
    for i in 0..got.rows() {
        for j in 0..got.cols() {
            assert!(
                got[(i, j)] == want[(i, j)],
                "{what}: entry ({i},{j}) is {}, expected {}",
                format_rational(&got[(i, j)]),
                format_rational(&want[(i, j)])
            );
        }
    }
}

#[track_caller]
fn assert_sub_eq(what: &str, got: &Subspace, want: &Subspace) {
    assert!(
        got.dim() == want.dim(),
        "{what}: dimensions {} vs {}",
        got.dim(),
        want.dim()
    );
    assert!(
        want.contains_subspace(got),
        "{what}: same dimension, different spans"
    );
}

fn vec_sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Matrix of `map` restricted to the column span of `basis`, written in that
/// basis. Panics if the span is not invariant.
fn restrict_to(map: &Mat, basis: &Mat) -> Mat {
    let cols: Vec<Vec<Scalar>> = (0..basis.cols())
        .map(|j| {
            basis
                .solve(&map.mul_vec(&basis.col(j)))
                .expect("subspace is not invariant under the map")
        })
        .collect();
    Mat::from_columns(basis.cols(), &cols)
}

/// Recovers `h`, `k`, `T`, `R`, the dual vectors `a_i + w_i`, `L` and the
/// Fitting index `m` from an invariant metric on the total algebra. Rejects
/// non-invariant or degenerate metrics with a witness; everything else is a
/// theorem and is asserted.
pub fn extension_geometry(
    ext: &CentralExtension,
    metric: SymBilinearForm,
) -> Result<ExtensionGeometry, ExtError> {
    let n = ext.base().dim();
    let r = ext.r();
    let nn = n + r;
    let total_quad = QuadraticLieAlgebra::new(ext.total().clone(), metric)?;
    let metric = total_quad.form().clone();
    let bg = metric.matrix();
    let b = ext.base().form().matrix();

    let b_inv = b.inverse().expect("base metric is invertible");
    let bg_inv = bg.inverse().expect("total metric is invertible");

    let h = &b_inv * &bg.submatrix(0..n, 0..nn);
    let k = &bg_inv * &b.vstack(&Mat::zeros(r, n));
    let t = k.submatrix(0..n, 0..n);
    let r_map = k.submatrix(n..nn, 0..n);
    let pi_g = Mat::identity(n).hstack(&Mat::zeros(n, r));
    let l = &k * &pi_g;

    // dual basis of g-perp against (v_1..v_r): Ker h always has dimension r
    // because the first n rows of B_G are independent
    let ker_h = h.kernel_basis();
    assert_eq!(ker_h.dim(), r, "Ker h must have the kernel dimension");
    let kmat = ker_h.basis();
    let pairing = (&kmat.transpose() * bg).submatrix(0..r, n..nn);
    let c = pairing
        .transpose()
        .inverse()
        .expect("g-perp pairs perfectly with the kernel");
    let dual = kmat * &c;
    let a: Vec<Vec<Scalar>> = (0..r).map(|i| dual.col(i)[..n].to_vec()).collect();
    let w: Vec<Vec<Scalar>> = (0..r).map(|i| dual.col(i)[n..].to_vec()).collect();

    let m = fitting_index(&t).expect("T is square").m;

    // adjointness, written as matrix identities
    assert_mat_eq("h k = Id", &(&h * &k), &Mat::identity(n));
    assert_mat_eq("k^T B_G = B_g pi_g", &(&k.transpose() * bg), &(b * &pi_g));
    assert_mat_eq("B_g h = iota^T B_G", &(b * &h), &bg.submatrix(0..n, 0..nn));

    let g_cols: Vec<Vec<Scalar>> = (0..n).map(|i| basis_vec(nn, i)).collect();
    let g_in_total = Subspace::from_columns(nn, &g_cols);
    assert_sub_eq("Ker h = g-perp", &ker_h, &g_in_total.orthocomplement(bg));
    let v_sub = ext.kernel_subspace();
    assert_sub_eq(
        "Im k = V-perp",
        &k.column_space(),
        &v_sub.orthocomplement(bg),
    );

    // k intertwines the brackets: k([x,y]_g) = [k(x), iota(y)]_G
    for j in 0..n {
        for kk in 0..n {
            let br = ext.base().alg().bracket(&basis_vec(n, j), &basis_vec(n, kk));
            let lhs = k.mul_vec(&br);
            let rhs = ext
                .total()
                .bracket(&k.col(j), &ext.embed(&basis_vec(n, kk)));
            assert!(lhs == rhs, "k equivariance fails on basis pair ({j},{kk})");
        }
    }

    // T is a B_g-symmetric centroid element with central kernel
    assert!(
        centroid_violation(ext.base().alg(), &t).is_none(),
        "T must commute with every ad(x)"
    );
    assert!(
        form_symmetry_violation(ext.base().form(), &t).is_none(),
        "T must be B_g-symmetric"
    );
    assert!(
        ext.base()
            .alg()
            .center()
            .contains_subspace(&t.kernel_basis()),
        "Ker T must be central in g"
    );

    for (i, d) in ext.derivations().iter().enumerate() {
        let ad_a = ext.base().alg().ad(&a[i]);
        assert_mat_eq(&format!("T D_{i} = ad(a_{i})"), &(&t * &d.matrix), &ad_a);
        assert_mat_eq(&format!("D_{i} T = ad(a_{i})"), &(&d.matrix * &t), &ad_a);
    }

    // reconstruction: x = T(h(x+v)) + sum_i B_G(x+v, v_i) a_i
    let a_mat = Mat::from_columns(n, &a);
    let s_rows = bg.submatrix(n..nn, 0..nn);
    assert_mat_eq(
        "pi_g = T h + A S",
        &pi_g,
        &(&(&t * &h) + &(&a_mat * &s_rows)),
    );

    assert_mat_eq(
        "B_G(a_i + w_i, v_j) = delta_ij",
        &(&dual.transpose() * bg).submatrix(0..r, n..nn),
        &Mat::identity(r),
    );

    // L = k pi_g: kernel V, B_G-symmetric centroid element, index m+1
    assert_sub_eq("Ker L = V", &l.kernel_basis(), &v_sub);
    assert!(
        centroid_violation(ext.total(), &l).is_none(),
        "L must commute with every ad on G"
    );
    assert!(
        form_symmetry_violation(&metric, &l).is_none(),
        "L must be B_G-symmetric"
    );
    if r > 0 {
        let fit_l = fitting_index(&l).expect("L is square");
        assert_eq!(fit_l.m, m + 1, "Fitting index of L must be m + 1");
    }

    Ok(ExtensionGeometry {
        metric,
        h: LinMap::new(h),
        k: LinMap::new(k),
        t: LinMap::new(t),
        r_map: LinMap::new(r_map),
        a,
        w,
        l: LinMap::new(l),
        m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelTag {
    NonDegenerate,
    Isotropic,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct KernelClass {
    pub tag: KernelTag,
    pub v_cap_vperp: Subspace,
}

/// Classifies how `B_G` degenerates on the kernel: `V cap V-perp` is zero,
/// all of `V`, or something in between. Invertibility of `T` is equivalent to
/// the non-degenerate case and is cross-checked; a disagreement would mean a
/// broken geometry and panics.
pub fn classify_kernel(geom: &ExtensionGeometry, ext: &CentralExtension) -> KernelClass {
    let v = ext.kernel_subspace();
    let cap = v.intersect(&v.orthocomplement(geom.metric().matrix()));
    let tag = if cap.is_zero() {
        KernelTag::NonDegenerate
    } else if cap.dim() == ext.r() {
        KernelTag::Isotropic
    } else {
        KernelTag::Mixed
    };
    let t_rank = geom.t().matrix.rank();
    assert_eq!(
        t_rank == ext.base().dim(),
        tag == KernelTag::NonDegenerate,
        "T rank {} does not match kernel class {:?}",
        t_rank,
        tag
    );
    KernelClass {
        tag,
        v_cap_vperp: cap,
    }
}

/// Result of splitting off a non-degenerate complement `U` of the radical
/// inside the kernel: `G = U-perp (+) U` orthogonally, and `U-perp` is again
/// a central extension of the same base, now with kernel `V cap V-perp`. The
/// sub-extension is returned abstractly together with the embedding of its
/// total algebra onto `U-perp` and the pulled-back metric, under which the
/// embedding is an isometry.
#[derive(Debug, Clone)]
pub struct MixedReduction {
    pub u: Subspace,
    pub u_perp: Subspace,
    pub sub: CentralExtension,
    pub sub_metric: SymBilinearForm,
    pub embedding: LinMap,
}

/// Symmetric congruence diagonalization: returns `(P, d)` with `P` invertible
/// and `P^T G P` diagonal with the nonzero entries `d`. Requires `G`
/// symmetric non-degenerate. An orthonormal basis need not exist over the
/// rationals, so callers work with the squared lengths `d_i` instead of
/// normalizing.
fn diagonalize_form(gram: &Mat) -> (Mat, Vec<Scalar>) {
    assert!(gram.is_symmetric(), "diagonalization needs a symmetric matrix");
    let n = gram.rows();
    let mut g = gram.clone();
    let mut p = Mat::identity(n);
    for i in 0..n {
        if g[(i, i)].is_zero() {
            if let Some(j) = ((i + 1)..n).find(|&j| !g[(j, j)].is_zero()) {
                for col in 0..n {
                    let tmp = g[(i, col)].clone();
                    g[(i, col)] = g[(j, col)].clone();
                    g[(j, col)] = tmp;
                }
                for row in 0..n {
                    let tmp = g[(row, i)].clone();
                    g[(row, i)] = g[(row, j)].clone();
                    g[(row, j)] = tmp;
                }
                for row in 0..n {
                    let tmp = p[(row, i)].clone();
                    p[(row, i)] = p[(row, j)].clone();
                    p[(row, j)] = tmp;
                }
            } else {
                // every remaining diagonal entry vanishes, so some off-pair
                // must be nonzero; adding that vector gives squared length
                // 2 G(b_i, b_j) != 0 (characteristic zero)
                let j = ((i + 1)..n)
                    .find(|&j| !g[(i, j)].is_zero())
                    .expect("form is degenerate");
                for col in 0..n {
                    let v = &g[(i, col)] + &g[(j, col)];
                    g[(i, col)] = v;
                }
                for row in 0..n {
                    let v = &g[(row, i)] + &g[(row, j)];
                    g[(row, i)] = v;
                }
                for row in 0..n {
                    let v = &p[(row, i)] + &p[(row, j)];
                    p[(row, i)] = v;
                }
            }
        }
        let d = g[(i, i)].clone();
        for j in (i + 1)..n {
            if g[(i, j)].is_zero() {
                continue;
            }
            let f = &g[(i, j)] / &d;
            for col in 0..n {
                let v = &g[(j, col)] - &(&f * &g[(i, col)]);
                g[(j, col)] = v;
            }
            for row in 0..n {
                let v = &g[(row, j)] - &(&f * &g[(row, i)]);
                g[(row, j)] = v;
            }
            for row in 0..n {
                let v = &p[(row, j)] - &(&f * &p[(row, i)]);
                p[(row, j)] = v;
            }
        }
    }
    let d: Vec<Scalar> = (0..n).map(|i| g[(i, i)].clone()).collect();
    (p, d)
}

/// Splits a mixed kernel: `W = V cap V-perp` is completed to `V` by a
/// non-degenerate `U`, `G` decomposes as `U-perp (+) U` into orthogonal
/// ideals, and `U-perp` is rebuilt as a central extension of the same base
/// with kernel `W`. The projection onto `U-perp` along `U` uses an orthogonal
/// basis `u_p` of `U` with squared lengths `d_p`, sending `x` to
/// `x - sum_p B_G(x, u_p)/d_p u_p`.
pub fn reduce_mixed_kernel(
    ext: &CentralExtension,
    geom: &ExtensionGeometry,
) -> Result<MixedReduction, ExtError> {
    let class = classify_kernel(geom, ext);
    if class.tag != KernelTag::Mixed {
        return Err(ExtError::WrongKernelClass {
            expected: KernelTag::Mixed,
            found: class.tag,
        });
    }
    let n = ext.base().dim();
    let r = ext.r();
    let nn = n + r;
    let total = ext.total();
    let bg = geom.metric().matrix();
    let w_sub = class.v_cap_vperp;
    let s = w_sub.dim();

    // complete W to V greedily with standard kernel vectors
    let mut chosen: Vec<Vec<Scalar>> = Vec::new();
    let mut cur = w_sub.clone();
    for j in 0..r {
        let cand = basis_vec(nn, n + j);
        if !cur.contains(&cand) {
            cur = cur.sum(&Subspace::from_columns(nn, &[cand.clone()]));
            chosen.push(cand);
        }
    }
    let ell = r - s;
    assert_eq!(chosen.len(), ell, "complement must fill V");

    // W is the whole radical of B_G on V, so the complement is
    // non-degenerate and diagonalizes
    let gram = Mat::from_fn(ell, ell, |pq, q| {
        (0..nn)
            .map(|row| {
                let bv: Scalar = (0..nn)
                    .map(|col| &bg[(row, col)] * &chosen[q][col])
                    .fold(Scalar::zero(), |acc, v| acc + v);
                &chosen[pq][row] * &bv
            })
            .fold(Scalar::zero(), |acc, v| acc + v)
    });
    let (pmat, diag) = diagonalize_form(&gram);
    let u_cols: Vec<Vec<Scalar>> = (0..ell)
        .map(|pcol| {
            (0..nn)
                .map(|row| {
                    (0..ell)
                        .map(|q| &pmat[(q, pcol)] * &chosen[q][row])
                        .fold(Scalar::zero(), |acc, v| acc + v)
                })
                .collect()
        })
        .collect();
    let umat = Mat::from_columns(nn, &u_cols);
    let u = umat.column_space();
    assert_eq!(u.dim(), ell, "orthogonal basis must stay independent");
    let u_perp = u.orthocomplement(bg);

    let dinv = Mat::from_fn(ell, ell, |i, j| {
        if i == j {
            diag[i].recip()
        } else {
            Scalar::zero()
        }
    });
    let proj = &Mat::identity(nn) - &(&(&umat * &dinv) * &(&umat.transpose() * bg));
    assert_mat_eq("projection squares to itself", &(&proj * &proj), &proj);
    assert!((&proj * &umat).is_zero(), "projection must kill U");
    assert_sub_eq("Im p = U-perp", &proj.column_space(), &u_perp);

    // cocycle of the reduced extension, valued in W
    let wmat = w_sub.basis();
    let mut thetas = vec![Mat::zeros(n, n); s];
    for j in 0..n {
        for k in (j + 1)..n {
            let br = total.bracket(&proj.col(j), &proj.col(k));
            let base_br = ext.base().alg().bracket(&basis_vec(n, j), &basis_vec(n, k));
            let lift = proj.mul_vec(&ext.embed(&base_br));
            let zeta = vec_sub(&br, &lift);
            let zc = wmat
                .solve(&zeta)
                .expect("reduced cocycle lands in the radical of V");
            for (alpha, th) in thetas.iter_mut().enumerate() {
                th[(j, k)] = zc[alpha].clone();
                th[(k, j)] = -&zc[alpha];
            }
        }
    }
    let b_inv = ext
        .base()
        .form()
        .matrix()
        .inverse()
        .expect("base metric is invertible");
    let ds: Vec<LinMap> = thetas
        .iter()
        .map(|th| LinMap::new(-&(&b_inv * th)))
        .collect();
    let sub = build_central_extension(ext.base().clone(), ds)?;

    // the reduced total embeds onto U-perp as a Lie algebra
    let mut emb_cols: Vec<Vec<Scalar>> = (0..n).map(|j| proj.col(j)).collect();
    for j in 0..s {
        emb_cols.push(wmat.col(j));
    }
    let emb = Mat::from_columns(nn, &emb_cols);
    assert_sub_eq("embedding spans U-perp", &emb.column_space(), &u_perp);
    let stotal = sub.total();
    for j in 0..(n + s) {
        for k in 0..(n + s) {
            let lhs = emb.mul_vec(&stotal.bracket(&basis_vec(n + s, j), &basis_vec(n + s, k)));
            let rhs = total.bracket(&emb.col(j), &emb.col(k));
            assert!(lhs == rhs, "embedding is not a Lie morphism at ({j},{k})");
        }
    }
    let sub_metric = SymBilinearForm::new(&(&emb.transpose() * bg) * &emb)
        .expect("pulled-back form is symmetric");
    assert_eq!(
        sub_metric.matrix().rank(),
        n + s,
        "form restricted to U-perp must be non-degenerate"
    );

    assert!(
        total.bracket_with_algebra(&u).is_zero(),
        "U must be central"
    );
    assert!(
        u_perp.contains_subspace(&total.bracket_with_algebra(&u_perp)),
        "U-perp must be an ideal"
    );
    assert!(u.intersect(&u_perp).is_zero(), "U meets U-perp");
    assert_eq!(u.dim() + u_perp.dim(), nn, "U and U-perp must fill G");

    Ok(MixedReduction {
        u,
        u_perp,
        sub,
        sub_metric,
        embedding: LinMap::new(emb),
    })
}

/// The two orthogonal Fitting halves of an extension: `q = Im T^m` and
/// `n_ideal = Ker T^m` split `g`, while `Im L^{m+1}` and `Ker L^{m+1}` split
/// `G`. On `q` the restriction `sigma = T|_q` is invertible and
/// `Lambda = k . sigma^{-1}` is a Lie isomorphism onto `Im L^{m+1}`, an
/// isometry once `q` is remeasured with `B_q(x,y) = B_g(sigma^{-1} x, y)`.
/// `lambda` and `b_q_bar` are written in the basis `q.basis()`.
#[derive(Debug, Clone)]
pub struct FittingSplit {
    pub q: Subspace,
    pub n_ideal: Subspace,
    pub m: usize,
    pub im_l: Subspace,
    pub ker_l: Subspace,
    pub lambda: LinMap,
    pub b_q_bar: SymBilinearForm,
}

/// Fitting decomposition of the extension. Always applies; the two kernel
/// extremes appear as the special cases `q = g` (non-degenerate kernel,
/// where `m = 0` and the split reproduces `G = k(g) (+) V`) and `q = 0`
/// (e.g. nilpotent totals). Every claimed ideal, orthogonality, isometry and
/// inner-ness property is asserted.
pub fn fitting_split_extension(geom: &ExtensionGeometry, ext: &CentralExtension) -> FittingSplit {
    let n = ext.base().dim();
    let nn = ext.total().dim();
    let galg = ext.base().alg();
    let b = ext.base().form().matrix();
    let bg = geom.metric().matrix();
    let t = &geom.t().matrix;
    let k = &geom.k().matrix;
    let l = &geom.l().matrix;

    let fit_t = fitting_index(t).expect("T is square");
    assert_eq!(fit_t.m, geom.m(), "Fitting index must match the geometry");
    let m = fit_t.m;
    let q = fit_t.image;
    let n_ideal = fit_t.kernel;
    let qb = q.basis();
    let nb = n_ideal.basis();
    let d = q.dim();

    assert!(
        q.contains_subspace(&galg.bracket_with_algebra(&q)),
        "Im T^m must be an ideal"
    );
    assert!(
        n_ideal.contains_subspace(&galg.bracket_with_algebra(&n_ideal)),
        "Ker T^m must be an ideal"
    );
    assert!(
        (&qb.transpose() * &(b * nb)).is_zero(),
        "the Fitting halves must be B_g-orthogonal"
    );
    assert_eq!(
        (&qb.transpose() * &(b * qb)).rank(),
        d,
        "B_g must stay non-degenerate on Im T^m"
    );
    assert_eq!(
        (&nb.transpose() * &(b * nb)).rank(),
        n - d,
        "B_g must stay non-degenerate on Ker T^m"
    );
    assert!(q.intersect(&n_ideal).is_zero(), "Fitting halves overlap");

    let qdata = subalgebra_structure(galg, qb).expect("an ideal is a subalgebra");
    let qalg = qdata.validate().expect("restricted bracket stays a Lie bracket");

    let sigma = restrict_to(t, qb);
    let sigma_inv = sigma
        .inverse()
        .expect("T is invertible on its stable image");
    let bq = &qb.transpose() * &(b * qb);
    let b_q_bar =
        SymBilinearForm::new(&sigma_inv.transpose() * &bq).expect("sigma is B_g-symmetric on q");
    let quad_q = QuadraticLieAlgebra::new(qalg.clone(), b_q_bar.clone())
        .expect("remeasured q stays quadratic");

    let lambda = &(k * qb) * &sigma_inv;
    for i in 0..d {
        for j in 0..d {
            let lhs = lambda.mul_vec(&qalg.bracket(&basis_vec(d, i), &basis_vec(d, j)));
            let rhs = ext.total().bracket(&lambda.col(i), &lambda.col(j));
            assert!(lhs == rhs, "Lambda is not a Lie morphism at ({i},{j})");
        }
    }
    assert_mat_eq(
        "Lambda is an isometry",
        &(&lambda.transpose() * &(bg * &lambda)),
        quad_q.form().matrix(),
    );

    let fit_l = fitting_index(l).expect("L is square");
    let im_l = fit_l.image;
    let ker_l = fit_l.kernel;
    assert_sub_eq("Im Lambda = Im L^(m+1)", &lambda.column_space(), &im_l);

    let n_emb: Vec<Vec<Scalar>> = (0..(n - d)).map(|j| ext.embed(&nb.col(j))).collect();
    let ker_expected = Subspace::from_columns(nn, &n_emb).sum(&ext.kernel_subspace());
    assert_sub_eq("Ker L^(m+1) = n (+) V", &ker_l, &ker_expected);
    assert!(
        (&im_l.basis().transpose() * &(bg * ker_l.basis())).is_zero(),
        "the G halves must be B_G-orthogonal"
    );
    assert!(
        im_l.contains_subspace(&ext.total().bracket_with_algebra(&im_l)),
        "Im L^(m+1) must be an ideal"
    );
    assert!(
        ker_l.contains_subspace(&ext.total().bracket_with_algebra(&ker_l)),
        "Ker L^(m+1) must be an ideal"
    );

    // the derivations restrict to q and are inner there
    for (i, dmap) in ext.derivations().iter().enumerate() {
        let dq = restrict_to(&dmap.matrix, qb);
        assert!(
            inner_witness(&qalg, &LinMap::new(dq)).is_some(),
            "D_{i} must be inner on the invertible block"
        );
    }

    FittingSplit {
        q,
        n_ideal,
        m,
        im_l,
        ker_l,
        lambda: LinMap::new(lambda),
        b_q_bar,
    }
}

/// Geometry of an isotropic kernel: the projections `E = T . h|_g` (onto
/// `Im T` along `a = span(a_i)`) and `F = h|_g . T` (onto `a-perp` along
/// `Ker T`), the quotient algebra carried by `a-perp` with bracket
/// `F([x,y]_g)` and form `B_g(Tx, y)`, and the base rebuilt as a central
/// extension of that quotient by `Ker T`. `base_iso` maps `g` onto the
/// rebuilt total algebra (coordinates: `a_perp_basis` columns, then the
/// kernel images `h(v_i)`).
#[derive(Debug, Clone)]
pub struct IsotropicGeometry {
    pub e: LinMap,
    pub f: LinMap,
    pub a_space: Subspace,
    pub ker_t: Subspace,
    pub a_perp_basis: Mat,
    pub ker_t_basis: Mat,
    pub a_perp_algebra: QuadraticLieAlgebra,
    pub base_as_extension: CentralExtension,
    pub base_iso: LinMap,
}

pub fn isotropic_kernel_geometry(
    geom: &ExtensionGeometry,
    ext: &CentralExtension,
) -> Result<IsotropicGeometry, ExtError> {
    let class = classify_kernel(geom, ext);
    if class.tag != KernelTag::Isotropic {
        return Err(ExtError::WrongKernelClass {
            expected: KernelTag::Isotropic,
            found: class.tag,
        });
    }
    let n = ext.base().dim();
    let r = ext.r();
    let nn = n + r;
    let galg = ext.base().alg();
    let b = ext.base().form().matrix();
    let bg = geom.metric().matrix();
    let t = &geom.t().matrix;

    let h_g = geom.h().matrix.submatrix(0..n, 0..n);
    let e = t * &h_g;
    let f = &h_g * t;

    // h maps V bijectively onto Ker T
    let ker_t_basis = geom.h().matrix.submatrix(0..n, n..nn);
    assert_eq!(ker_t_basis.rank(), r, "h must be injective on the kernel");
    let ker_t = ker_t_basis.column_space();
    assert_sub_eq("h(V) = Ker T", &ker_t, &t.kernel_basis());
    assert!(
        r <= galg.center().dim(),
        "kernel dimension exceeds dim C(g)"
    );

    assert!(
        (&t.transpose() * &bg.submatrix(0..n, n..nn)).is_zero(),
        "Im T must be B_G-orthogonal to V"
    );
    assert_mat_eq("T = T h T", &(&(t * &h_g) * t), t);

    let a_space = Subspace::from_columns(n, geom.a());
    assert_eq!(a_space.dim(), r, "the a_i must stay independent");
    assert_mat_eq("E E = E", &(&e * &e), &e);
    assert_sub_eq("Ker E = a", &e.kernel_basis(), &a_space);
    assert_sub_eq("Im E = Im T", &e.column_space(), &t.column_space());
    assert_mat_eq("F F = F", &(&f * &f), &f);
    assert_sub_eq("Ker F = Ker T", &f.kernel_basis(), &ker_t);
    let a_perp = a_space.orthocomplement(b);
    assert_sub_eq("Im F = a-perp", &f.column_space(), &a_perp);

    // x = F(x) + sum_i B_g(a_i, x) h(v_i)
    let a_mat = geom.a_matrix();
    assert_mat_eq(
        "reconstruction along F",
        &Mat::identity(n),
        &(&f + &(&ker_t_basis * &(&a_mat.transpose() * b))),
    );

    // the quotient algebra carried by a-perp, and the cocycle of g over it
    let p = a_perp.basis().clone();
    let d = p.cols();
    let mut qdata = StructureData::zeros(d);
    let mut thetas = vec![Mat::zeros(d, d); r];
    for j in 0..d {
        for k in (j + 1)..d {
            let br = galg.bracket(&p.col(j), &p.col(k));
            let f_part = f.mul_vec(&br);
            let pc = p.solve(&f_part).expect("F lands in the span of its image");
            for i in 0..d {
                if !pc[i].is_zero() {
                    qdata.set_bracket(j, k, i, pc[i].clone());
                }
            }
            let zc = ker_t_basis
                .solve(&vec_sub(&br, &f_part))
                .expect("the complementary part lands in Ker T");
            for (alpha, th) in thetas.iter_mut().enumerate() {
                th[(j, k)] = zc[alpha].clone();
                th[(k, j)] = -&zc[alpha];
            }
        }
    }
    let qalg = qdata
        .validate()
        .expect("projected bracket satisfies Jacobi");
    let qform_mat = &(&p.transpose() * &t.transpose()) * &(b * &p);
    let qform = SymBilinearForm::new(qform_mat).expect("B_g(T., .) is symmetric");
    let a_perp_algebra =
        QuadraticLieAlgebra::new(qalg, qform).expect("a-perp carries an invariant metric");

    let qform_inv = a_perp_algebra
        .form()
        .matrix()
        .inverse()
        .expect("quotient form is invertible");
    let ds: Vec<LinMap> = thetas
        .iter()
        .map(|th| LinMap::new(-&(&qform_inv * th)))
        .collect();
    let base_as_extension = build_central_extension(a_perp_algebra.clone(), ds)
        .expect("quotient cocycle converts to skew derivations");

    // g itself in the rebuilt coordinates (a-perp block, then Ker T block)
    let stack = p.hstack(&ker_t_basis);
    let base_iso = stack.inverse().expect("g = a-perp (+) Ker T");
    let etotal = base_as_extension.total();
    for j in 0..n {
        for k in 0..n {
            let lhs = base_iso.mul_vec(&galg.bracket(&basis_vec(n, j), &basis_vec(n, k)));
            let rhs = etotal.bracket(&base_iso.col(j), &base_iso.col(k));
            assert!(lhs == rhs, "rebasing is not a Lie morphism at ({j},{k})");
        }
    }

    Ok(IsotropicGeometry {
        e: LinMap::new(e),
        f: LinMap::new(f),
        a_space,
        ker_t,
        a_perp_basis: p,
        ker_t_basis,
        a_perp_algebra,
        base_as_extension,
        base_iso: LinMap::new(base_iso),
    })
}

/// Replaces `B_G` by `B_G-bar(x, y) = B_G(Q x, y)` where `Q` fixes `Im T`
/// and `V` pointwise and sends `a` to `a - sum_i B_G(a, a_i) v_i` on the
/// complement `a = span(a_i)`. `Q` is an invertible `B_G`-symmetric centroid
/// element, the new form is again an invariant metric, `a` becomes isotropic
/// under it, and the new transfer map has `Ker h-bar = a` while `k` is
/// unchanged. When `a` is already isotropic, `Q` is exactly the identity.
pub fn make_kernel_dual_isotropic(
    geom: &ExtensionGeometry,
    ext: &CentralExtension,
) -> Result<(LinMap, SymBilinearForm), ExtError> {
    let class = classify_kernel(geom, ext);
    if class.tag != KernelTag::Isotropic {
        return Err(ExtError::WrongKernelClass {
            expected: KernelTag::Isotropic,
            found: class.tag,
        });
    }
    let n = ext.base().dim();
    let r = ext.r();
    let nn = n + r;
    let bg = geom.metric().matrix();
    let b = ext.base().form().matrix();
    let t = &geom.t().matrix;

    let h_g = geom.h().matrix.submatrix(0..n, 0..n);
    let e = t * &h_g;
    let a_mat = geom.a_matrix();
    let b_gg = bg.submatrix(0..n, 0..n);
    // I - E projects onto a along Im T, so S x = (B_G(a-part of x, a_i))_i
    let s = &(&a_mat.transpose() * &b_gg) * &(&Mat::identity(n) - &e);
    let q = Mat::identity(n)
        .hstack(&Mat::zeros(n, r))
        .vstack(&(-&s).hstack(&Mat::identity(r)));

    assert!(
        centroid_violation(ext.total(), &q).is_none(),
        "Q must commute with every ad on G"
    );
    assert!(
        form_symmetry_violation(geom.metric(), &q).is_none(),
        "Q must be B_G-symmetric"
    );
    assert_eq!(q.rank(), nn, "Q must be invertible");

    let bbar =
        SymBilinearForm::new(&q.transpose() * bg).expect("Q-symmetry keeps the form symmetric");
    let checked = QuadraticLieAlgebra::new(ext.total().clone(), bbar)
        .expect("the rebuilt form stays an invariant metric");
    let bbar = checked.form().clone();

    for i in 0..r {
        for j in 0..r {
            let ai = ext.embed(&geom.a()[i]);
            let aj = ext.embed(&geom.a()[j]);
            assert!(
                bbar.eval(&ai, &aj).is_zero(),
                "a_{i} and a_{j} must pair to zero under the rebuilt form"
            );
        }
    }

    let h_bar = &b.inverse().expect("base metric is invertible")
        * &bbar.matrix().submatrix(0..n, 0..nn);
    let a_cols: Vec<Vec<Scalar>> = geom.a().iter().map(|ai| ext.embed(ai)).collect();
    let a_embedded = Subspace::from_columns(nn, &a_cols);
    assert_sub_eq("Ker h-bar = a", &h_bar.kernel_basis(), &a_embedded);

    let k_bar = &bbar.matrix().inverse().expect("rebuilt form is invertible")
        * &b.vstack(&Mat::zeros(r, n));
    assert_mat_eq("k is unchanged by the rebuild", &k_bar, &geom.k().matrix);

    Ok((LinMap::new(q), bbar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use exactlin::int;

    fn abelian_quad(n: usize) -> QuadraticLieAlgebra {
        let alg = LieAlgebra::abelian(n);
        let form = SymBilinearForm::new(Mat::identity(n)).unwrap();
        QuadraticLieAlgebra::new(alg, form).unwrap()
    }

    fn sl2() -> QuadraticLieAlgebra {
        let mut data = StructureData::zeros(3).with_labels(&["h", "e", "f"]);
        data.set_bracket(0, 1, 1, int(2));
        data.set_bracket(0, 2, 2, int(-2));
        data.set_bracket(1, 2, 0, int(1));
        let alg = data.validate().unwrap();
        let form =
            SymBilinearForm::new(Mat::from_int_rows(&[&[8, 0, 0], &[0, 0, 4], &[0, 4, 0]]))
                .unwrap();
        QuadraticLieAlgebra::new(alg, form).unwrap()
    }

    /// sl2 plus a one-dimensional center, with the trace form extended by 1
    /// on the new vector.
    fn sl2_plus_line() -> QuadraticLieAlgebra {
        let mut data = StructureData::zeros(4).with_labels(&["h", "e", "f", "c"]);
        data.set_bracket(0, 1, 1, int(2));
        data.set_bracket(0, 2, 2, int(-2));
        data.set_bracket(1, 2, 0, int(1));
        let alg = data.validate().unwrap();
        let form = SymBilinearForm::new(Mat::from_int_rows(&[
            &[8, 0, 0, 0],
            &[0, 0, 4, 0],
            &[0, 4, 0, 0],
            &[0, 0, 0, 1],
        ]))
        .unwrap();
        QuadraticLieAlgebra::new(alg, form).unwrap()
    }

    fn zero_maps(n: usize, r: usize) -> Vec<LinMap> {
        (0..r).map(|_| LinMap::new(Mat::zeros(n, n))).collect()
    }

    fn trivial_abelian_ext(n: usize, r: usize) -> CentralExtension {
        build_central_extension(abelian_quad(n), zero_maps(n, r)).unwrap()
    }

    /// One central line paired hyperbolically against a one-dimensional base.
    fn hyperbolic_line() -> (CentralExtension, ExtensionGeometry) {
        let ext = trivial_abelian_ext(1, 1);
        let metric =
            SymBilinearForm::new(Mat::from_int_rows(&[&[0, 1], &[1, 0]])).unwrap();
        let geom = extension_geometry(&ext, metric).unwrap();
        (ext, geom)
    }

    /// Two central lines over an abelian plane: v_1 pairs into the base and
    /// is null, v_2 is self-paired. The kernel is mixed.
    fn mixed_fixture() -> (CentralExtension, ExtensionGeometry) {
        let ext = trivial_abelian_ext(2, 2);
        let metric = SymBilinearForm::new(Mat::from_int_rows(&[
            &[1, 0, 1, 0],
            &[0, 1, 0, 0],
            &[1, 0, 0, 0],
            &[0, 0, 0, 1],
        ]))
        .unwrap();
        let geom = extension_geometry(&ext, metric).unwrap();
        (ext, geom)
    }

    #[test]
    fn trivial_extension_is_abelian() {
        let ext = trivial_abelian_ext(2, 1);
        assert_eq!(ext.r(), 1);
        assert_eq!(ext.total().dim(), 3);
        for j in 0..3 {
            for k in 0..3 {
                let br = ext
                    .total()
                    .bracket(&basis_vec(3, j), &basis_vec(3, k));
                assert!(br.iter().all(|v| v.is_zero()));
            }
        }
        assert_eq!(ext.total().labels()[2], "v1");
    }

    #[test]
    fn build_rejects_non_derivation() {
        let mut d = Mat::zeros(3, 3);
        d[(0, 0)] = int(1);
        let err = build_central_extension(sl2(), vec![LinMap::new(d)]).unwrap_err();
        match err {
            ExtError::NotDerivation { index: 0, .. } => {}
            other => panic!("expected NotDerivation, got {other:?}"),
        }
    }

    #[test]
    fn build_rejects_non_skew_map() {
        let err =
            build_central_extension(abelian_quad(2), vec![LinMap::identity(2)]).unwrap_err();
        match err {
            ExtError::NotFormSkew { index: 0, .. } => {}
            other => panic!("expected NotFormSkew, got {other:?}"),
        }
    }

    #[test]
    fn extension_bracket_carries_cocycle() {
        // rotation is skew for the identity form; theta(e1, e2) = 1 makes a
        // Heisenberg algebra
        let d = LinMap::new(Mat::from_int_rows(&[&[0, -1], &[1, 0]]));
        let ext = build_central_extension(abelian_quad(2), vec![d]).unwrap();
        let br = ext.total().bracket(&basis_vec(3, 0), &basis_vec(3, 1));
        assert_eq!(br, vec![int(0), int(0), int(1)]);
        assert!(ext
            .total()
            .center()
            .contains(&basis_vec(3, 2)));
    }

    #[test]
    fn cocycle_tensor_of_ad_e() {
        let base = sl2();
        let d = LinMap::new(base.alg().ad_basis(1));
        let out = cocycle_derivation_convert(&base, &CocycleRep::Derivations(vec![d])).unwrap();
        let CocycleRep::Tensor(thetas) = out else {
            panic!("expected tensor");
        };
        let expected =
            Mat::from_int_rows(&[&[0, 0, -8], &[0, 0, 0], &[8, 0, 0]]);
        assert_eq!(thetas.len(), 1);
        assert_mat_eq("theta of ad(e)", &thetas[0], &expected);
    }

    #[test]
    fn cocycle_roundtrip_is_identity() {
        let base = sl2();
        let d = LinMap::new(base.alg().ad_basis(1));
        let tensor = cocycle_derivation_convert(&base, &CocycleRep::Derivations(vec![d.clone()]))
            .unwrap();
        let back = cocycle_derivation_convert(&base, &tensor).unwrap();
        let CocycleRep::Derivations(ds) = back else {
            panic!("expected derivations");
        };
        assert_mat_eq("roundtrip", &ds[0].matrix, &d.matrix);
    }

    #[test]
    fn convert_rejects_non_alternating() {
        let base = sl2();
        let mut th = Mat::zeros(3, 3);
        th[(0, 0)] = int(1);
        let err = cocycle_derivation_convert(&base, &CocycleRep::Tensor(vec![th])).unwrap_err();
        match err {
            ExtError::CocycleNotSkew {
                alpha: 0,
                j: 0,
                k: 0,
            } => {}
            other => panic!("expected CocycleNotSkew, got {other:?}"),
        }
    }

    #[test]
    fn convert_rejects_non_cocycle() {
        // on sl2 every skew form is a cocycle, so the counterexample needs
        // the extra central line: theta(h, c) = 1 breaks the identity at
        // (e, f, c) because [e,f] = h pairs with c while the other two terms
        // bracket into the center
        let base = sl2_plus_line();
        let mut th = Mat::zeros(4, 4);
        th[(0, 3)] = int(1);
        th[(3, 0)] = int(-1);
        let err = cocycle_derivation_convert(&base, &CocycleRep::Tensor(vec![th])).unwrap_err();
        match err {
            ExtError::NotCocycle { j: 1, k: 2, l: 3 } => {}
            other => panic!("expected NotCocycle at (1,2,3), got {other:?}"),
        }
    }

    #[test]
    fn splitting_of_trivial_extension_is_zero() {
        let ext = trivial_abelian_ext(2, 1);
        let tau = splitting_map(&ext).expect("trivial extension splits");
        assert_mat_eq("tau", &tau.matrix, &Mat::zeros(1, 2));
    }

    #[test]
    fn splitting_of_inner_extension() {
        let base = sl2();
        let d = LinMap::new(base.alg().ad_basis(1));
        let ext = build_central_extension(base, vec![d]).unwrap();
        let tau = splitting_map(&ext).expect("inner derivations split");
        // the witness for ad(e) is e itself (sl2 is centerless), so the row
        // is e^T B = (0, 0, 4)
        assert_mat_eq("tau", &tau.matrix, &Mat::from_int_rows(&[&[0, 0, 4]]));
    }

    #[test]
    fn splitting_fails_for_outer_derivation() {
        let d = LinMap::new(Mat::from_int_rows(&[&[0, -1], &[1, 0]]));
        let ext = build_central_extension(abelian_quad(2), vec![d]).unwrap();
        assert!(splitting_map(&ext).is_none());
    }

    #[test]
    fn geometry_of_block_diagonal_metric() {
        let ext = trivial_abelian_ext(2, 1);
        let geom = extension_geometry(
            &ext,
            SymBilinearForm::new(Mat::identity(3)).unwrap(),
        )
        .unwrap();
        assert_mat_eq("T", &geom.t().matrix, &Mat::identity(2));
        assert_mat_eq("R", &geom.r_map().matrix, &Mat::zeros(1, 2));
        assert_eq!(geom.a()[0], vec![int(0), int(0)]);
        assert_eq!(geom.w()[0], vec![int(1)]);
        assert_eq!(geom.m(), 0);
    }

    #[test]
    fn geometry_of_hyperbolic_line() {
        let (_, geom) = hyperbolic_line();
        assert_mat_eq("h", &geom.h().matrix, &Mat::from_int_rows(&[&[0, 1]]));
        assert_mat_eq("k", &geom.k().matrix, &Mat::from_int_rows(&[&[0], &[1]]));
        assert_mat_eq("T", &geom.t().matrix, &Mat::zeros(1, 1));
        assert_mat_eq("R", &geom.r_map().matrix, &Mat::from_int_rows(&[&[1]]));
        assert_eq!(geom.a()[0], vec![int(1)]);
        assert_eq!(geom.w()[0], vec![int(0)]);
        assert_eq!(geom.m(), 1);
    }

    #[test]
    fn geometry_rejects_degenerate_metric() {
        let ext = trivial_abelian_ext(1, 1);
        let metric =
            SymBilinearForm::new(Mat::from_int_rows(&[&[1, 0], &[0, 0]])).unwrap();
        let err = extension_geometry(&ext, metric).unwrap_err();
        match err {
            ExtError::Base(LieError::FormDegenerate { rank: 1, dim: 2 }) => {}
            other => panic!("expected FormDegenerate, got {other:?}"),
        }
    }

    #[test]
    fn geometry_rejects_non_invariant_metric() {
        // Heisenberg total: the identity form is not invariant because
        // B([e1,e2], v1) = 1 while B(e1, [e2,v1]) = 0
        let d = LinMap::new(Mat::from_int_rows(&[&[0, -1], &[1, 0]]));
        let ext = build_central_extension(abelian_quad(2), vec![d]).unwrap();
        let err =
            extension_geometry(&ext, SymBilinearForm::new(Mat::identity(3)).unwrap())
                .unwrap_err();
        match err {
            ExtError::Base(LieError::FormNotInvariant { .. }) => {}
            other => panic!("expected FormNotInvariant, got {other:?}"),
        }
    }

    #[test]
    fn rho_vanishes_on_central_directions() {
        let (ext, geom) = hyperbolic_line();
        let rho_v = geom.rho(&ext, &basis_vec(2, 1));
        assert!(rho_v.matrix.is_zero());
    }

    #[test]
    fn classify_block_diagonal_as_non_degenerate() {
        let ext = trivial_abelian_ext(2, 1);
        let geom = extension_geometry(
            &ext,
            SymBilinearForm::new(Mat::identity(3)).unwrap(),
        )
        .unwrap();
        let class = classify_kernel(&geom, &ext);
        assert_eq!(class.tag, KernelTag::NonDegenerate);
        assert!(class.v_cap_vperp.is_zero());
    }

    #[test]
    fn classify_hyperbolic_as_isotropic() {
        let (ext, geom) = hyperbolic_line();
        let class = classify_kernel(&geom, &ext);
        assert_eq!(class.tag, KernelTag::Isotropic);
        assert_eq!(class.v_cap_vperp.dim(), 1);
    }

    #[test]
    fn classify_mixed_fixture() {
        let (ext, geom) = mixed_fixture();
        let class = classify_kernel(&geom, &ext);
        assert_eq!(class.tag, KernelTag::Mixed);
        assert_eq!(class.v_cap_vperp.dim(), 1);
        assert!(class.v_cap_vperp.contains(&basis_vec(4, 2)));
    }

    #[test]
    fn mixed_reduction_splits_off_the_self_paired_line() {
        let (ext, geom) = mixed_fixture();
        let red = reduce_mixed_kernel(&ext, &geom).unwrap();
        assert_eq!(red.u.dim(), 1);
        assert!(red.u.contains(&basis_vec(4, 3)));
        assert_eq!(red.sub.r(), 1);
        // the reduced extension is quadratic again, now with isotropic kernel
        let sub_geom = extension_geometry(&red.sub, red.sub_metric.clone()).unwrap();
        let sub_class = classify_kernel(&sub_geom, &red.sub);
        assert_eq!(sub_class.tag, KernelTag::Isotropic);
    }

    #[test]
    fn mixed_reduction_requires_mixed_kernel() {
        let (ext, geom) = hyperbolic_line();
        let err = reduce_mixed_kernel(&ext, &geom).unwrap_err();
        match err {
            ExtError::WrongKernelClass {
                expected: KernelTag::Mixed,
                found: KernelTag::Isotropic,
            } => {}
            other => panic!("expected WrongKernelClass, got {other:?}"),
        }
    }

    #[test]
    fn fitting_split_of_invertible_t() {
        let ext = trivial_abelian_ext(2, 1);
        let geom = extension_geometry(
            &ext,
            SymBilinearForm::new(Mat::identity(3)).unwrap(),
        )
        .unwrap();
        let split = fitting_split_extension(&geom, &ext);
        assert_eq!(split.m, 0);
        assert!(split.q.is_full());
        assert!(split.n_ideal.is_zero());
        assert_eq!(split.im_l.dim(), 2);
        assert_sub_eq("Ker L", &split.ker_l, &ext.kernel_subspace());
        // with T = Id the remeasured form is B_g itself
        assert_mat_eq("B_q", split.b_q_bar.matrix(), &Mat::identity(2));
    }

    #[test]
    fn fitting_split_of_nilpotent_t() {
        let (ext, geom) = hyperbolic_line();
        let split = fitting_split_extension(&geom, &ext);
        assert_eq!(split.m, 1);
        assert!(split.q.is_zero());
        assert!(split.n_ideal.is_full());
        assert!(split.im_l.is_zero());
        assert!(split.ker_l.is_full());
    }

    #[test]
    fn isotropic_geometry_of_hyperbolic_line() {
        let (ext, geom) = hyperbolic_line();
        let iso = isotropic_kernel_geometry(&geom, &ext).unwrap();
        assert!(iso.e.matrix.is_zero());
        assert!(iso.f.matrix.is_zero());
        assert_eq!(iso.a_space.dim(), 1);
        assert!(iso.ker_t.is_full());
        assert_eq!(iso.a_perp_algebra.dim(), 0);
        assert_eq!(iso.base_as_extension.r(), 1);
        assert_eq!(iso.base_as_extension.total().dim(), 1);
        assert_mat_eq("base iso", &iso.base_iso.matrix, &Mat::identity(1));
    }

    #[test]
    fn isotropic_geometry_requires_isotropic_kernel() {
        let (ext, geom) = mixed_fixture();
        let err = isotropic_kernel_geometry(&geom, &ext).unwrap_err();
        match err {
            ExtError::WrongKernelClass {
                expected: KernelTag::Isotropic,
                found: KernelTag::Mixed,
            } => {}
            other => panic!("expected WrongKernelClass, got {other:?}"),
        }
    }

    #[test]
    fn dual_isotropic_is_identity_when_a_is_null() {
        let (ext, geom) = hyperbolic_line();
        let (q, bbar) = make_kernel_dual_isotropic(&geom, &ext).unwrap();
        assert_mat_eq("Q", &q.matrix, &Mat::identity(2));
        assert_mat_eq("B-bar", bbar.matrix(), geom.metric().matrix());
    }

    #[test]
    fn dual_isotropic_fixes_a_self_paired_a() {
        // same hyperbolic line but with B_G(e1, e1) = 1, so a_1 = e1 is not
        // null; Q must shear it back onto the light cone
        let ext = trivial_abelian_ext(1, 1);
        let metric =
            SymBilinearForm::new(Mat::from_int_rows(&[&[1, 1], &[1, 0]])).unwrap();
        let geom = extension_geometry(&ext, metric).unwrap();
        assert_eq!(geom.a()[0], vec![int(1)]);
        assert_eq!(geom.w()[0], vec![int(-1)]);
        let (q, bbar) = make_kernel_dual_isotropic(&geom, &ext).unwrap();
        assert_mat_eq("Q", &q.matrix, &Mat::from_int_rows(&[&[1, 0], &[-1, 1]]));
        assert_mat_eq(
            "B-bar",
            bbar.matrix(),
            &Mat::from_int_rows(&[&[0, 1], &[1, 0]]),
        );
    }

    #[test]
    fn diagonalize_handles_hyperbolic_blocks() {
        let g = Mat::from_int_rows(&[&[0, 1], &[1, 0]]);
        let (p, d) = diagonalize_form(&g);
        let prod = &(&p.transpose() * &g) * &p;
        for i in 0..2 {
            for j in 0..2 {
                if i == j {
                    assert_eq!(prod[(i, j)], d[i]);
                    assert!(!d[i].is_zero());
                } else {
                    assert!(prod[(i, j)].is_zero());
                }
            }
        }
    }

    #[test]
    fn diagonalize_keeps_diagonal_input() {
        let g = Mat::from_int_rows(&[&[2, 0], &[0, -3]]);
        let (p, d) = diagonalize_form(&g);
        assert_mat_eq("P", &p, &Mat::identity(2));
        assert_eq!(d, vec![int(2), int(-3)]);
    }
}
