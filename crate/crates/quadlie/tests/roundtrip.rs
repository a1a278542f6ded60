use exactlin::Mat;
use quadlie::liealg::basis_vec;
use quadlie::nilpotent2::epsilon_tensor;
use quadlie::suite::*;

#[test]
fn nine_dimensional_example_roundtrips_through_extraction() {
    let dce = assert_double_roundtrip(&g9_fixture());
    assert_eq!(dce.r(), 3);
    assert_eq!(dce.h_dim(), 3);
}

#[test]
fn cotangent_extension_roundtrips_with_empty_middle_layer() {
    let dce = assert_double_roundtrip(&cotangent_fixture());
    assert_eq!(dce.r(), 3);
    assert_eq!(dce.h_dim(), 0, "T = 0 leaves nothing between the layers");
    let eps = epsilon_tensor();
    for i in 0..3 {
        let want = Mat::from_fn(3, 3, |j, k| eps[k][(j, i)].clone());
        assert_eq!(dce.context().omega()[i], want, "omega slice {i}");
    }
}

#[test]
fn reductive_extension_roundtrips_onto_its_semisimple_core() {
    let fx = reductive_fixture();
    let (dce, omega_iso, _) = extract_normalized(&fx.ext, &fx.metric);
    assert_double_roundtrip(&fx);
    assert_eq!(dce.r(), 3);
    assert_eq!(dce.h_dim(), 3);

    // the derivations vanish on the semisimple block and the dual brackets
    // stay central, so both induced pieces of the context are zero
    let ctx = dce.context();
    for (i, f) in ctx.phi().iter().enumerate() {
        assert!(f.matrix.is_zero(), "phi slice {i} must vanish");
    }
    for (i, ps) in ctx.psi().iter().enumerate() {
        assert!(ps.is_zero(), "psi slice {i} must vanish");
    }
    let eps = epsilon_tensor();
    for i in 0..3 {
        let want = Mat::from_fn(3, 3, |j, k| eps[k][(j, i)].clone());
        assert_eq!(ctx.omega()[i], want, "omega slice {i}");
    }

    // the middle layer is the semisimple block with its own metric
    let s = quadratic_fixture("sl2");
    assert_eq!(ctx.h().alg().data().c, s.alg().data().c);
    assert_eq!(ctx.h().form().matrix(), s.form().matrix());

    // center directions become the bottom layer, kernel directions the top
    for i in 0..3 {
        assert_eq!(
            omega_iso.apply(&basis_vec(9, 3 + i)),
            basis_vec(9, i),
            "dual {i} lands on layer direction {i}"
        );
        assert_eq!(
            omega_iso.apply(&basis_vec(9, 6 + i)),
            basis_vec(9, 6 + i),
            "kernel {i} lands on top direction {i}"
        );
    }
}
