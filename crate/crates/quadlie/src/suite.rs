//! Curated extension fixtures carrying verified invariant metrics, the
//! structural check battery over them, and the end-to-end criteria the
//! `suite` front end and the acceptance tests both run.

use std::time::Duration;

use exactlin::{fitting_index, int, Mat, Scalar, Subspace};
use num_traits::Zero;

use crate::doublecentral::{
    build_double_central_extension, extract_double_data, g_metric_existence,
    heisenberg_invariant_forms, oscillator_context, DceError, DoubleCentralExtension,
    MetricVerdict, DEFAULT_METRIC_SEED,
};
use crate::extensions::{
    build_central_extension, classify_kernel, extension_geometry, fitting_split_extension,
    make_kernel_dual_isotropic, reduce_mixed_kernel, splitting_map, CentralExtension, KernelTag,
};
use crate::liealg::{
    basis_vec, centroid_violation, form_symmetry_violation, inner_witness, structure_report,
    subalgebra_structure, verify_quadratic, LieAlgebra, LinMap, QuadraticLieAlgebra,
    StructureReport, SymBilinearForm,
};
use crate::nilpotent2::{
    builtin_example, cotangent_extension, epsilon_tensor, reductive_extension,
    two_step_to_matrix_algebra, FixtureKind,
};

/// An extension together with a verified invariant metric on its total
/// algebra and the declared maximal nilpotent ideal of the base.
pub struct ExtFixture {
    pub name: &'static str,
    pub ext: CentralExtension,
    pub metric: SymBilinearForm,
    pub nil: Mat,
}

pub fn quadratic_fixture(name: &str) -> QuadraticLieAlgebra {
    match builtin_example(name).expect("known fixture").kind {
        FixtureKind::Quadratic(q) => q,
        _ => panic!("{name} is not a plain quadratic fixture"),
    }
}

pub fn g9_fixture() -> ExtFixture {
    let FixtureKind::Extension(ext, metric) = builtin_example("G9").unwrap().kind else {
        panic!("G9 is an extension fixture");
    };
    ExtFixture {
        name: "G9",
        ext,
        metric,
        nil: Mat::identity(6),
    }
}

/// Extension along inner derivations `ad(t_i)`: the cocycle is the
/// coboundary of `tau_i = B_g(t_i, .)`, so the product metric of
/// `B_g (+) Id` pulled back through `(x, u) -> (x, u - tau(x))` is
/// invariant on the total algebra.
pub fn coboundary_extension(
    base: &QuadraticLieAlgebra,
    ts: &[usize],
) -> (CentralExtension, SymBilinearForm) {
    let n = base.dim();
    let r = ts.len();
    let ds: Vec<LinMap> = ts
        .iter()
        .map(|&t| LinMap::new(base.alg().ad_basis(t)))
        .collect();
    let ext = build_central_extension(base.clone(), ds)
        .expect("inner derivations are skew derivations");
    let tau = Mat::from_fn(r, n, |i, j| {
        base.b(&basis_vec(n, ts[i]), &basis_vec(n, j))
    });
    let bmat = Mat::from_fn(n + r, n + r, |p, q| {
        if p < n && q < n {
            let mut v = base.form().matrix()[(p, q)].clone();
            for i in 0..r {
                v = v + &tau[(i, p)] * &tau[(i, q)];
            }
            v
        } else if p < n {
            -tau[(q - n, p)].clone()
        } else if q < n {
            -tau[(p - n, q)].clone()
        } else if p == q {
            int(1)
        } else {
            Scalar::zero()
        }
    });
    let form = SymBilinearForm::new(bmat).expect("symmetric by construction");
    (ext, form)
}

pub fn sl2_inner_fixture() -> ExtFixture {
    let base = quadratic_fixture("sl2");
    let (ext, metric) = coboundary_extension(&base, &[0]);
    ExtFixture {
        name: "sl2+ad(h)",
        ext,
        metric,
        nil: Mat::zeros(3, 0),
    }
}

pub fn n6_inner_fixture() -> ExtFixture {
    let base = quadratic_fixture("N6");
    let (ext, metric) = coboundary_extension(&base, &[0, 1]);
    ExtFixture {
        name: "N6+inner",
        ext,
        metric,
        nil: Mat::identity(6),
    }
}

fn trivial_abelian2_extension() -> CentralExtension {
    let base = quadratic_fixture("abelian(2)");
    let zeros = vec![LinMap::new(Mat::zeros(2, 2)); 2];
    build_central_extension(base, zeros).expect("zero maps are skew derivations")
}

pub fn trivial_nondeg_fixture() -> ExtFixture {
    ExtFixture {
        name: "abelian(2)+trivial",
        ext: trivial_abelian2_extension(),
        metric: SymBilinearForm::identity(4),
        nil: Mat::identity(2),
    }
}

/// `v_1` pairs only against `e_1` while `v_2` pairs against itself, so the
/// kernel meets its orthogonal in exactly the line through `v_1`.
pub fn trivial_mixed_fixture() -> ExtFixture {
    let bmat = Mat::from_int_rows(&[
        &[1, 0, 1, 0],
        &[0, 1, 0, 0],
        &[1, 0, 0, 0],
        &[0, 0, 0, 1],
    ]);
    ExtFixture {
        name: "abelian(2)+mixed",
        ext: trivial_abelian2_extension(),
        metric: SymBilinearForm::new(bmat).unwrap(),
        nil: Mat::identity(2),
    }
}

/// The cotangent algebra presented as an extension: abelian base with the
/// alternating slices as derivations and the hyperbolic total metric. The
/// kernel is isotropic and `T = 0`.
pub fn cotangent_fixture() -> ExtFixture {
    let base = quadratic_fixture("abelian(3)");
    let ds: Vec<LinMap> = epsilon_tensor().into_iter().map(LinMap::new).collect();
    let ext = build_central_extension(base, ds).expect("alternating slices are skew");
    let bmat = Mat::from_fn(6, 6, |i, j| {
        if i + 3 == j || j + 3 == i {
            int(1)
        } else {
            Scalar::zero()
        }
    });
    ExtFixture {
        name: "cotangent(3)-as-extension",
        ext,
        metric: SymBilinearForm::new(bmat).unwrap(),
        nil: Mat::identity(3),
    }
}

/// `sl2 (+) center` extended against the center by the alternating tensor;
/// the kernel pairs hyperbolically with the center, hence is isotropic, and
/// the nilradical of the base is the center block.
pub fn reductive_fixture() -> ExtFixture {
    let s = quadratic_fixture("sl2");
    let (ext, metric) =
        reductive_extension(&s, 3, &epsilon_tensor()).expect("the tensor is cyclic");
    ExtFixture {
        name: "reductive-sl2",
        ext,
        metric,
        nil: Mat::identity(6).submatrix(0..6, 3..6),
    }
}

pub fn battery() -> Vec<ExtFixture> {
    vec![
        g9_fixture(),
        trivial_nondeg_fixture(),
        trivial_mixed_fixture(),
        sl2_inner_fixture(),
        n6_inner_fixture(),
        cotangent_fixture(),
        reductive_fixture(),
    ]
}

fn add_scaled(acc: &mut [Scalar], c: &Scalar, v: &[Scalar]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a = &*a + &(c * x);
    }
}

/// `g^l` (resp. `C_l`) read off a stabilized series listing.
fn descending_at(rep: &StructureReport, l: usize) -> &Subspace {
    let s = &rep.descending_series;
    &s[l.min(s.len() - 1)]
}

fn upper_at(rep: &StructureReport, l: usize) -> &Subspace {
    let s = &rep.upper_series;
    &s[(l - 1).min(s.len() - 1)]
}

/// Looks for an `m` with `C_m != 0` and `g = g^m (perp+) C_m`, the first
/// summand perfect, the second nilpotent.
fn perfect_orthogonal_split_exists(
    galg: &LieAlgebra,
    b: &Mat,
    rep: &StructureReport,
) -> bool {
    let n = galg.dim();
    for m in 1..=n.max(1) {
        let gm = descending_at(rep, m);
        let cm = upper_at(rep, m);
        if cm.is_zero() {
            continue;
        }
        if !(gm.sum(cm).is_full() && gm.intersect(cm).is_zero()) {
            continue;
        }
        let cross = &(&gm.basis().transpose() * b) * cm.basis();
        if !cross.is_zero() {
            continue;
        }
        let gm_perfect = gm.dim() == 0
            || subalgebra_structure(galg, gm.basis())
                .ok()
                .and_then(|s| s.validate().ok())
                .is_some_and(|a| structure_report(&a).is_perfect);
        if !gm_perfect {
            continue;
        }
        let cm_nilpotent = subalgebra_structure(galg, cm.basis())
            .ok()
            .and_then(|s| s.validate().ok())
            .is_some_and(|a| structure_report(&a).nilpotency_class.is_some());
        if cm_nilpotent {
            return true;
        }
    }
    false
}

/// Every structural identity the reconstruction maps satisfy, checked
/// exactly from the public accessors.
pub fn run_geometry_suite(fx: &ExtFixture) {
    let name = fx.name;
    let ext = &fx.ext;
    let geom =
        extension_geometry(ext, fx.metric.clone()).expect("fixture metrics are invariant");
    let n = ext.base().dim();
    let r = ext.r();
    let nn = n + r;
    let galg = ext.base().alg();
    let b = ext.base().form();
    let bgf = geom.metric();
    let bg = bgf.matrix();
    let h = &geom.h().matrix;
    let k = &geom.k().matrix;
    let t = &geom.t().matrix;
    let total = ext.total();

    assert_eq!(&(h * k), &Mat::identity(n), "{name}: h.k is not the identity");
    assert_eq!(
        k,
        &geom.t().matrix.vstack(&geom.r_map().matrix),
        "{name}: k does not stack into T over R"
    );

    // B_G(k x, y) = B_g(x, y) against the base and Im k annihilates V
    let kt_bg = &k.transpose() * bg;
    assert_eq!(
        kt_bg,
        b.matrix().hstack(&Mat::zeros(n, r)),
        "{name}: B_G(k x, .) differs from B_g(x, .)"
    );

    let g_emb = Subspace::from_mat_columns(&Mat::identity(nn).submatrix(0..nn, 0..n));
    assert_eq!(
        h.kernel_basis(),
        g_emb.orthocomplement(bg),
        "{name}: Ker h is not the orthogonal of the base"
    );
    let v_sub = ext.kernel_subspace();
    assert_eq!(
        k.column_space(),
        v_sub.orthocomplement(bg),
        "{name}: Im k is not the orthogonal of the kernel"
    );

    // k intertwines the two brackets against base arguments
    for j in 0..n {
        for l in 0..n {
            let lhs = geom
                .k()
                .apply(&galg.bracket(&basis_vec(n, j), &basis_vec(n, l)));
            let rhs = total.bracket(
                &geom.k().apply(&basis_vec(n, j)),
                &ext.embed(&basis_vec(n, l)),
            );
            assert_eq!(lhs, rhs, "{name}: k-equivariance fails at ({j},{l})");
        }
    }

    assert!(
        centroid_violation(galg, t).is_none(),
        "{name}: T does not commute with the adjoints"
    );
    assert!(
        form_symmetry_violation(b, t).is_none(),
        "{name}: T is not symmetric for the base form"
    );
    assert!(
        galg.center().contains_subspace(&t.kernel_basis()),
        "{name}: Ker T leaves the center"
    );

    for i in 0..r {
        let d = &ext.derivations()[i].matrix;
        let ad_a = galg.ad(&geom.a()[i]);
        assert_eq!(&(t * d), &ad_a, "{name}: T.D_{i} is not ad(a_{i})");
        assert_eq!(&(d * t), &ad_a, "{name}: D_{i}.T is not ad(a_{i})");
    }

    // every total vector recovers its base part through T.h plus the duals
    for u in 0..nn {
        let eu = basis_vec(nn, u);
        let mut want = geom.t().apply(&geom.h().apply(&eu));
        for i in 0..r {
            let c = bgf.eval(&eu, &basis_vec(nn, n + i));
            add_scaled(&mut want, &c, &geom.a()[i]);
        }
        assert_eq!(ext.g_part(&eu), want, "{name}: reconstruction fails at {u}");
    }

    let duals = geom.dual_basis_matrix();
    let vmat = Mat::identity(nn).submatrix(0..nn, n..nn);
    let pairing = &(&duals.transpose() * bg) * &vmat;
    assert_eq!(pairing, Mat::identity(r), "{name}: duals are not unimodular");

    let l = &geom.l().matrix;
    let proj = Mat::identity(n).hstack(&Mat::zeros(n, r));
    assert_eq!(l, &(k * &proj), "{name}: L is not k composed with the base projection");
    assert_eq!(l.kernel_basis(), v_sub, "{name}: Ker L is not the kernel");
    assert!(
        centroid_violation(total, l).is_none(),
        "{name}: L does not commute with the total adjoints"
    );
    assert!(
        form_symmetry_violation(bgf, l).is_none(),
        "{name}: L is not symmetric for the total form"
    );

    assert_eq!(
        fitting_index(t).unwrap().m,
        geom.m(),
        "{name}: stored Fitting index of T is stale"
    );
    assert_eq!(
        fitting_index(l).unwrap().m,
        geom.m() + 1,
        "{name}: Fitting index of L is not one above T's"
    );

    // two base brackets collapse to one application of h
    for u in 0..nn {
        for j in 0..n {
            let eu = basis_vec(nn, u);
            let ej = basis_vec(n, j);
            let lhs = geom.h().apply(&total.bracket(&eu, &ext.embed(&ej)));
            let mut rhs = galg.bracket(&geom.h().apply(&eu), &ej);
            for i in 0..r {
                let c = bgf.eval(&eu, &basis_vec(nn, n + i));
                add_scaled(&mut rhs, &c, &ext.derivations()[i].apply(&ej));
            }
            assert_eq!(lhs, rhs, "{name}: bracket projection fails at ({u},{j})");
        }
    }
    for j in 0..n {
        for u in 0..nn {
            for w in 0..nn {
                let inner = total.bracket(&basis_vec(nn, u), &basis_vec(nn, w));
                let lhs = geom
                    .h()
                    .apply(&total.bracket(&ext.embed(&basis_vec(n, j)), &inner));
                let rhs = galg.bracket(&basis_vec(n, j), &geom.h().apply(&inner));
                assert_eq!(lhs, rhs, "{name}: nested projection fails at ({j},{u},{w})");
            }
        }
    }

    // rho turns the base bracket into a T-twisted commutator
    let rhos: Vec<Mat> = (0..n)
        .map(|j| geom.rho(ext, &ext.embed(&basis_vec(n, j))).matrix)
        .collect();
    for j in 0..n {
        for w in 0..n {
            let br = galg.bracket(&basis_vec(n, j), &basis_vec(n, w));
            let lhs = geom.rho(ext, &ext.embed(&br)).matrix;
            let jt = &(&rhos[j] * t) * &rhos[w];
            let wt = &(&rhos[w] * t) * &rhos[j];
            assert_eq!(lhs, &jt - &wt, "{name}: twisted commutator fails at ({j},{w})");
        }
    }

    // powers of T dominate the descending series and are dominated upward
    let rep = structure_report(galg);
    let mut tp = Mat::identity(n);
    for step in 1..=n.max(1) {
        tp = &tp * t;
        assert!(
            tp.column_space().contains_subspace(descending_at(&rep, step)),
            "{name}: series term {step} escapes Im T^{step}"
        );
        assert!(
            upper_at(&rep, step).contains_subspace(&tp.kernel_basis()),
            "{name}: Ker T^{step} escapes the upper series at {step}"
        );
    }

    let class = classify_kernel(&geom, ext);
    if class.tag == KernelTag::Isotropic {
        let nil = Subspace::from_mat_columns(&fx.nil);
        assert!(
            t.column_space().sum(&nil).is_full(),
            "{name}: Im T plus the nilradical misses the base"
        );
        assert!(
            r <= galg.center().dim(),
            "{name}: kernel rank exceeds the base center"
        );
    }

    let some_not_inner = ext
        .derivations()
        .iter()
        .any(|d| inner_witness(galg, d).is_none());
    if some_not_inner && class.tag != KernelTag::NonDegenerate {
        assert!(
            perfect_orthogonal_split_exists(galg, b.matrix(), &rep),
            "{name}: no perfect orthogonal split of the base"
        );
    }

    // Fitting halves: orthogonal ideals downstairs, orthogonal split upstairs
    let fs = fitting_split_extension(&geom, ext);
    assert_eq!(fs.m, geom.m(), "{name}: split disagrees on the Fitting index");
    assert!(
        fs.q.sum(&fs.n_ideal).is_full() && fs.q.intersect(&fs.n_ideal).is_zero(),
        "{name}: Fitting halves of the base are not complementary"
    );
    let qb = fs.q.basis().clone();
    let nb = fs.n_ideal.basis().clone();
    let cross = &(&qb.transpose() * b.matrix()) * &nb;
    assert!(cross.is_zero(), "{name}: Fitting halves are not orthogonal");
    assert!(
        fs.q.contains_subspace(&galg.bracket_with_algebra(&fs.q)),
        "{name}: the invertible half is not an ideal"
    );
    assert!(
        fs.n_ideal
            .contains_subspace(&galg.bracket_with_algebra(&fs.n_ideal)),
        "{name}: the nilpotent half is not an ideal"
    );
    assert!(
        fs.im_l.sum(&fs.ker_l).is_full() && fs.im_l.intersect(&fs.ker_l).is_zero(),
        "{name}: total Fitting halves are not complementary"
    );
    let cross_g = &(&fs.im_l.basis().transpose() * bg) * fs.ker_l.basis();
    assert!(cross_g.is_zero(), "{name}: total Fitting halves are not orthogonal");
    let mut nv = v_sub.clone();
    if nb.cols() > 0 {
        let cols: Vec<Vec<Scalar>> = (0..nb.cols()).map(|c| ext.embed(&nb.col(c))).collect();
        nv = nv.sum(&Subspace::from_columns(nn, &cols));
    }
    assert_eq!(fs.ker_l, nv, "{name}: Ker L^(m+1) is not kernel plus nilpotent half");

    let dq = fs.q.dim();
    if dq > 0 {
        let q_struct = subalgebra_structure(galg, &qb).expect("q closes under the bracket");
        let lam = &fs.lambda.matrix;
        let gram = &(&lam.transpose() * bg) * lam;
        assert_eq!(
            &gram,
            fs.b_q_bar.matrix(),
            "{name}: the Fitting isomorphism is not an isometry"
        );
        assert!(
            verify_quadratic(&q_struct, fs.b_q_bar.matrix())
                .expect("square data")
                .all_ok(),
            "{name}: the twisted form on q is not an invariant metric"
        );
        for u in 0..dq {
            assert!(
                fs.im_l.contains(&lam.col(u)),
                "{name}: the isomorphism leaves Im L^(m+1)"
            );
            for w in 0..dq {
                let lhs = total.bracket(&lam.col(u), &lam.col(w));
                let mut coords = vec![Scalar::zero(); dq];
                for i in 0..dq {
                    coords[i] = q_struct.c[i][u][w].clone();
                }
                let rhs = lam.mul_vec(&coords);
                assert_eq!(lhs, rhs, "{name}: Fitting isomorphism breaks the bracket at ({u},{w})");
            }
        }
        let q_alg = q_struct.validate().expect("q is a Lie algebra");
        for (i, d) in ext.derivations().iter().enumerate() {
            let cols: Vec<Vec<Scalar>> = (0..dq)
                .map(|c| {
                    fs.q
                        .coords_of(&d.apply(&qb.col(c)))
                        .expect("q is invariant under the derivations")
                })
                .collect();
            let restricted = LinMap::new(Mat::from_columns(dq, &cols));
            assert!(
                inner_witness(&q_alg, &restricted).is_some(),
                "{name}: derivation {i} is not inner on the invertible half"
            );
        }
    }
}

/// T invertible exactly in the non-degenerate case; there the split
/// reproduces the base with the T-twisted metric next to the kernel.
pub fn assert_kernel_criterion(fx: &ExtFixture) {
    let name = fx.name;
    let ext = &fx.ext;
    let geom = extension_geometry(ext, fx.metric.clone()).expect("fixture metrics are invariant");
    let n = ext.base().dim();
    let r = ext.r();
    let nn = n + r;
    let t = &geom.t().matrix;
    let class = classify_kernel(&geom, ext);
    assert_eq!(
        t.rank() == n,
        class.tag == KernelTag::NonDegenerate,
        "{name}: T invertibility disagrees with the kernel class"
    );
    if class.tag != KernelTag::NonDegenerate {
        return;
    }
    let fs = fitting_split_extension(&geom, ext);
    assert_eq!(fs.m, 0, "{name}: invertible T must have index zero");
    assert!(fs.q.is_full() && fs.n_ideal.is_zero(), "{name}: split must keep the base whole");
    assert_eq!(fs.ker_l, ext.kernel_subspace(), "{name}: the kernel is the complement");
    let t_inv = t.inverse().expect("T is invertible here");
    let expected = &t_inv.transpose() * ext.base().form().matrix();
    assert_eq!(
        fs.b_q_bar.matrix(),
        &expected,
        "{name}: twisted metric is not B_g(T^-1 ., .)"
    );
    assert!(
        verify_quadratic(ext.base().alg().data(), &expected)
            .expect("square data")
            .all_ok(),
        "{name}: twisted metric fails verification"
    );
    let vmat = Mat::identity(nn).submatrix(0..nn, n..nn);
    let v_gram = &(&vmat.transpose() * geom.metric().matrix()) * &vmat;
    assert_eq!(v_gram.rank(), r, "{name}: kernel block degenerates");
}

pub fn splitting_bases() -> Vec<(String, QuadraticLieAlgebra)> {
    let mut out = Vec::new();
    for n in 1..=4 {
        let name = format!("abelian({n})");
        out.push((name.clone(), quadratic_fixture(&name)));
    }
    for name in ["sl2", "cotangent(2)", "oscillator(1)", "N6"] {
        out.push((name.to_string(), quadratic_fixture(name)));
    }
    out
}

/// A verified metric forces the witness: the returned map reproduces the
/// cocycle on brackets, and each derivation is inner.
pub fn assert_splitting_witness(name: &str, ext: &CentralExtension, metric: &SymBilinearForm) {
    let report =
        verify_quadratic(ext.total().data(), metric.matrix()).expect("shapes agree");
    assert!(report.all_ok(), "{name}: the attached metric is not invariant");
    let tau = splitting_map(ext)
        .unwrap_or_else(|| panic!("{name}: rank {} metric extension must split", ext.r()));
    let n = ext.base().dim();
    let theta = ext.cocycle();
    for j in 0..n {
        for k in 0..n {
            let br = ext.base().alg().bracket(&basis_vec(n, j), &basis_vec(n, k));
            let img = tau.apply(&br);
            for (i, th) in theta.iter().enumerate() {
                assert_eq!(
                    &img[i],
                    &th[(j, k)],
                    "{name}: witness misses cocycle slot {i} at ({j},{k})"
                );
            }
        }
    }
    for (i, d) in ext.derivations().iter().enumerate() {
        assert!(
            inner_witness(ext.base().alg(), d).is_some(),
            "{name}: derivation {i} of a split extension must be inner"
        );
    }
}

/// Mixed kernels: split off the self-paired part of the kernel and land in
/// an isotropic-kernel extension of the same base.
pub fn assert_mixed_reduction(fx: &ExtFixture) {
    let name = fx.name;
    let ext = &fx.ext;
    let geom = extension_geometry(ext, fx.metric.clone()).expect("fixture metrics are invariant");
    let class = classify_kernel(&geom, ext);
    assert_eq!(class.tag, KernelTag::Mixed, "{name}: fixture must be mixed");
    assert_eq!(class.v_cap_vperp.dim(), 1, "{name}: radical line expected");
    assert_eq!(ext.r(), 2, "{name}: rank two kernel expected");
    let bg = geom.metric().matrix();
    let total = ext.total();
    let red = reduce_mixed_kernel(ext, &geom).expect("mixed class reduces");

    let v_sub = ext.kernel_subspace();
    assert!(v_sub.contains_subspace(&red.u), "{name}: U must sit inside the kernel");
    assert!(
        red.u.sum(&red.u_perp).is_full() && red.u.intersect(&red.u_perp).is_zero(),
        "{name}: U and its orthogonal must be complementary"
    );
    let cross = &(&red.u.basis().transpose() * bg) * red.u_perp.basis();
    assert!(cross.is_zero(), "{name}: U and its complement must be orthogonal");
    for (label, part) in [("U", &red.u), ("U-perp", &red.u_perp)] {
        let pb = part.basis();
        let gram = &(&pb.transpose() * bg) * pb;
        assert_eq!(gram.rank(), part.dim(), "{name}: {label} degenerates");
        assert!(
            part.contains_subspace(&total.bracket_with_algebra(part)),
            "{name}: {label} is not an ideal"
        );
    }

    // the reduced extension keeps the base and realizes the radical as kernel
    assert_eq!(
        red.sub.base().alg().data().c,
        ext.base().alg().data().c,
        "{name}: reduction must not disturb the base"
    );
    let sub_nn = red.sub.total().dim();
    let sub_kernel = red.sub.kernel_subspace();
    let embedded: Vec<Vec<Scalar>> = sub_kernel
        .basis_columns()
        .iter()
        .map(|c| red.embedding.apply(c))
        .collect();
    assert_eq!(
        Subspace::from_columns(total.dim(), &embedded),
        class.v_cap_vperp,
        "{name}: reduced kernel is not the radical"
    );
    // the embedding is an isometry onto U-perp
    let emb_cols: Vec<Vec<Scalar>> = (0..sub_nn)
        .map(|c| red.embedding.apply(&basis_vec(sub_nn, c)))
        .collect();
    assert_eq!(
        Subspace::from_columns(total.dim(), &emb_cols),
        red.u_perp,
        "{name}: embedding must fill U-perp"
    );
    for i in 0..sub_nn {
        for j in 0..sub_nn {
            let lhs = geom.metric().eval(&emb_cols[i], &emb_cols[j]);
            let rhs = red
                .sub_metric
                .eval(&basis_vec(sub_nn, i), &basis_vec(sub_nn, j));
            assert_eq!(lhs, rhs, "{name}: embedding skews the metric at ({i},{j})");
        }
    }

    run_geometry_suite(&ExtFixture {
        name: "reduced-sub-extension",
        ext: red.sub,
        metric: red.sub_metric,
        nil: fx.nil.clone(),
    });
}

/// Extraction, renormalizing the metric first when the kernel duals still
/// pair among themselves. Returns the metric actually used.
pub fn extract_normalized(
    ext: &CentralExtension,
    metric: &SymBilinearForm,
) -> (DoubleCentralExtension, LinMap, SymBilinearForm) {
    let geom = extension_geometry(ext, metric.clone()).expect("metric is invariant");
    match extract_double_data(ext, &geom) {
        Ok((dce, omega)) => (dce, omega, metric.clone()),
        Err(DceError::KernelDualsNotNull { .. }) => {
            let (_, bbar) =
                make_kernel_dual_isotropic(&geom, ext).expect("isotropic kernels renormalize");
            let geom2 = extension_geometry(ext, bbar.clone()).expect("renormalized metric stays invariant");
            let (dce, omega) = extract_double_data(ext, &geom2).expect("extraction after renormalization");
            (dce, omega, bbar)
        }
        Err(e) => panic!("extraction failed: {e}"),
    }
}

/// The layered shape of a rebuilt total: hyperbolically paired outer
/// layers orthogonal to a non-degenerate middle, with the top central.
pub fn assert_layered_invariants(dce: &DoubleCentralExtension) {
    let r = dce.r();
    let p = dce.h_dim();
    let nt = 2 * r + p;
    let alg = dce.total().alg();
    let bmat = dce.total().form().matrix();
    assert!(
        verify_quadratic(alg.data(), bmat).expect("square data").all_ok(),
        "rebuilt total fails verification"
    );
    let center = alg.center();
    for i in 0..r {
        assert!(
            center.contains(&basis_vec(nt, r + p + i)),
            "dual layer direction {i} is not central"
        );
    }
    for hu in r..r + p {
        for x in (0..r).chain(r + p..nt) {
            assert!(
                bmat[(hu, x)].is_zero(),
                "middle layer pairs against the outer layers at ({hu},{x})"
            );
        }
    }
    for i in 0..r {
        for j in 0..r {
            assert!(bmat[(i, j)].is_zero(), "bottom layer is not isotropic");
            assert!(
                bmat[(r + p + i, r + p + j)].is_zero(),
                "top layer is not isotropic"
            );
            let want = if i == j { int(1) } else { Scalar::zero() };
            assert_eq!(bmat[(i, r + p + j)], want, "outer layers pair off-diagonally");
        }
    }
    assert_eq!(
        bmat.submatrix(r..r + p, r..r + p).rank(),
        p,
        "middle layer degenerates"
    );
}

/// Extract-then-rebuild is the identity through the returned isometry:
/// same structure tensor and same form after the change of basis.
pub fn assert_double_roundtrip(fx: &ExtFixture) -> DoubleCentralExtension {
    let name = fx.name;
    let (dce, omega, used_metric) = extract_normalized(&fx.ext, &fx.metric);
    let total = fx.ext.total();
    let nn = total.dim();
    assert_eq!(omega.matrix.rows(), nn, "{name}: isometry has wrong shape");
    assert_eq!(dce.total().dim(), nn, "{name}: rebuilt total has wrong dimension");

    for u in 0..nn {
        for w in (u + 1)..nn {
            let lhs = omega.apply(&total.bracket(&basis_vec(nn, u), &basis_vec(nn, w)));
            let rhs = dce.total().alg().bracket(
                &omega.apply(&basis_vec(nn, u)),
                &omega.apply(&basis_vec(nn, w)),
            );
            assert_eq!(lhs, rhs, "{name}: isometry breaks the bracket at ({u},{w})");
        }
    }
    let re_expressed = dce.total().alg().in_basis(&omega.matrix);
    assert_eq!(
        re_expressed.c,
        total.data().c,
        "{name}: structure tensors differ after the change of basis"
    );
    let pulled = &(&omega.matrix.transpose() * dce.total().form().matrix()) * &omega.matrix;
    assert_eq!(
        &pulled,
        used_metric.matrix(),
        "{name}: forms differ after the change of basis"
    );
    assert_layered_invariants(&dce);
    dce
}

/// The fixture ships with the hyperbolic-over-identity form, verifies as
/// quadratic, is three-step nilpotent, refuses to split, and its base
/// collapses onto the three printed structure matrices.
pub fn nine_dimensional_example_end_to_end() {
    let FixtureKind::Extension(ext, metric) = builtin_example("G9").unwrap().kind else {
        panic!("G9 must ship as an extension fixture");
    };
    let expected_bg = Mat::from_fn(9, 9, |p, q| {
        if (3..6).contains(&p) && p == q {
            int(1)
        } else if p < 3 && q == p + 6 {
            int(1)
        } else if q < 3 && p == q + 6 {
            int(1)
        } else {
            Scalar::zero()
        }
    });
    assert_eq!(metric.matrix(), &expected_bg, "fixture form drifted");
    let report = verify_quadratic(ext.total().data(), &expected_bg).expect("shapes agree");
    assert!(report.all_ok(), "the nine-dimensional total must verify as quadratic");

    assert_eq!(
        structure_report(ext.total()).nilpotency_class,
        Some(3),
        "the total is three-step nilpotent"
    );

    assert!(
        splitting_map(&ext).is_none(),
        "no linear section can reproduce the cocycle"
    );
    for (i, d) in ext.derivations().iter().enumerate() {
        assert!(
            inner_witness(ext.base().alg(), d).is_none(),
            "derivation {i} must not be inner"
        );
    }

    let n6 = quadratic_fixture("N6");
    let a_basis = Mat::identity(6).submatrix(0..6, 0..3);
    let b_basis = Mat::identity(6).submatrix(0..6, 3..6);
    let (data, mat_alg, ts_report) =
        two_step_to_matrix_algebra(&n6, &a_basis, &b_basis, Some(Mat::identity(3)))
            .expect("the base splits hyperbolically over its derived ideal");
    let printed = [
        Mat::from_int_rows(&[&[0, 0, 0], &[0, 0, -1], &[0, 1, 0]]),
        Mat::from_int_rows(&[&[0, 0, 1], &[0, 0, 0], &[-1, 0, 0]]),
        Mat::from_int_rows(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 0]]),
    ];
    assert_eq!(
        data.a_matrices(),
        &printed[..],
        "structure matrices must come out entry for entry"
    );
    assert_eq!(mat_alg.basis[..], printed[..], "spanning matrices drifted");

    let sigma = [1usize, 2, 0];
    for i in 0..3 {
        let x = &printed[i];
        let y = &printed[sigma[i]];
        let comm = &(x * y) - &(y * x);
        assert_eq!(comm, printed[sigma[sigma[i]]], "commutator relation at {i}");
        assert_eq!(
            mat_alg.algebra.alg().c(sigma[sigma[i]], i, sigma[i]),
            &int(1),
            "abstract bracket must mirror the commutators at {i}"
        );
    }

    assert_eq!(ts_report.algebra_dim, 3);
    assert!(ts_report.perfect, "the matrix algebra must be perfect");
    assert!(ts_report.centerless, "the matrix algebra must be centerless");
    assert_eq!(
        mat_alg.algebra.form().matrix(),
        &Mat::identity(3),
        "the pairing of the three matrices is the identity"
    );
    assert!(
        verify_quadratic(mat_alg.algebra.alg().data(), mat_alg.algebra.form().matrix())
            .expect("shapes agree")
            .all_ok(),
        "the identity pairing must be an invariant metric"
    );
}

/// Every rank-1 and rank-2 inner extension over the base battery carries
/// its product metric and produces an exact splitting witness.
pub fn rank_two_or_less_extensions_split() {
    for (name, base) in splitting_bases() {
        let n = base.dim();
        for t in 0..n {
            let (ext, metric) = coboundary_extension(&base, &[t]);
            assert_splitting_witness(&format!("{name}+ad({t})"), &ext, &metric);
        }
        for t1 in 0..n {
            for t2 in (t1 + 1)..n {
                let (ext, metric) = coboundary_extension(&base, &[t1, t2]);
                assert_splitting_witness(&format!("{name}+ad({t1},{t2})"), &ext, &metric);
            }
        }
    }
}

pub fn kernel_class_matches_t_invertibility() {
    for fx in battery() {
        assert_kernel_criterion(&fx);
    }
}

pub fn geometry_invariant_suite() {
    for fx in battery() {
        run_geometry_suite(&fx);
    }
}

pub fn double_extension_roundtrip() {
    for fx in [g9_fixture(), cotangent_fixture(), reductive_fixture()] {
        assert_double_roundtrip(&fx);
    }
}

/// Every invariant symmetric form on the three smallest odd Heisenberg
/// algebras kills the central direction, and the induced quotient of the
/// matching oscillator extension certifies that no invariant metric of the
/// searched shape exists.
pub fn central_direction_degenerates_and_quotient_has_no_metric() {
    for m in 1..=3usize {
        let n = 2 * m + 1;
        let sols = heisenberg_invariant_forms(m);
        assert!(!sols.is_empty(), "invariant symmetric forms exist for m={m}");
        for (s, form) in sols.iter().enumerate() {
            for j in 0..n {
                assert!(
                    form[(n - 1, j)].is_zero() && form[(j, n - 1)].is_zero(),
                    "m={m}: solution {s} pairs the central direction at {j}"
                );
            }
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
        let ctx = oscillator_context(m, &d).expect("the rotation pattern is invertible and skew");
        let dce = build_double_central_extension(ctx).expect("oscillator data assembles");
        let search = g_metric_existence(&dce, DEFAULT_METRIC_SEED);
        match search.verdict {
            MetricVerdict::No {
                generic_rank,
                needed,
                ..
            } => {
                assert_eq!(needed, 2 * m + 1, "m={m}: quotient dimension");
                assert!(
                    generic_rank < needed,
                    "m={m}: certificate needs a strict rank gap"
                );
            }
            other => panic!("m={m}: expected a certified absence, got {other:?}"),
        }
    }
}

/// The semisimple-plus-center fixture has an isotropic kernel and its
/// center-plus-kernel block is exactly the rank-3 cotangent extension.
pub fn reductive_extension_block_structure() {
    let fx = reductive_fixture();
    let geom = extension_geometry(&fx.ext, fx.metric.clone()).expect("metric is invariant");
    let class = classify_kernel(&geom, &fx.ext);
    assert_eq!(class.tag, KernelTag::Isotropic, "the kernel must be isotropic");
    assert_eq!(class.v_cap_vperp.dim(), 3, "the whole kernel is its own radical");

    run_geometry_suite(&fx);

    let center_cols = Mat::identity(6).submatrix(0..6, 3..6);
    assert_eq!(
        structure_report(fx.ext.base().alg()).center,
        Subspace::from_mat_columns(&center_cols),
        "the base center is the appended block"
    );

    let block = Mat::identity(9).submatrix(0..9, 3..9);
    let blk_struct =
        subalgebra_structure(fx.ext.total(), &block).expect("the block closes under the bracket");
    let cot = cotangent_extension(3, &epsilon_tensor()).expect("the alternating tensor is cyclic");
    assert_eq!(blk_struct.c, cot.alg().data().c, "block structure constants");
    let blk_form = &(&block.transpose() * fx.metric.matrix()) * &block;
    assert_eq!(&blk_form, cot.form().matrix(), "block form");
}

pub fn mixed_kernel_reduction() {
    assert_mixed_reduction(&trivial_mixed_fixture());
}

/// One end-to-end criterion: a label for the report line, an optional wall
/// clock budget treated as part of the contract, and the check itself,
/// which panics with a witness on failure.
pub struct Criterion {
    pub label: &'static str,
    pub budget: Option<Duration>,
    pub run: fn(),
}

/// The full battery in declaration order.
pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            label: "nine-dimensional example end-to-end",
            budget: Some(Duration::from_secs(1)),
            run: nine_dimensional_example_end_to_end,
        },
        Criterion {
            label: "rank-two-or-less extensions split",
            budget: Some(Duration::from_secs(10)),
            run: rank_two_or_less_extensions_split,
        },
        Criterion {
            label: "kernel class matches T invertibility",
            budget: None,
            run: kernel_class_matches_t_invertibility,
        },
        Criterion {
            label: "geometry invariant suite",
            budget: None,
            run: geometry_invariant_suite,
        },
        Criterion {
            label: "double extension roundtrip",
            budget: None,
            run: double_extension_roundtrip,
        },
        Criterion {
            label: "degenerate central pairing and unmetrizable quotient",
            budget: Some(Duration::from_secs(5)),
            run: central_direction_degenerates_and_quotient_has_no_metric,
        },
        Criterion {
            label: "reductive extension block structure",
            budget: None,
            run: reductive_extension_block_structure,
        },
        Criterion {
            label: "mixed kernel reduction",
            budget: None,
            run: mixed_kernel_reduction,
        },
    ]
}
