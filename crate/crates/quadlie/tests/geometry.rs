use quadlie::suite::*;

#[test]
fn nine_dimensional_example_passes_geometry_suite() {
    run_geometry_suite(&g9_fixture());
}

#[test]
fn trivial_extension_passes_geometry_suite() {
    run_geometry_suite(&trivial_nondeg_fixture());
}

#[test]
fn mixed_metric_trivial_extension_passes_geometry_suite() {
    run_geometry_suite(&trivial_mixed_fixture());
}

#[test]
fn inner_extension_of_sl2_passes_geometry_suite() {
    run_geometry_suite(&sl2_inner_fixture());
}

#[test]
fn inner_extension_of_the_two_step_passes_geometry_suite() {
    run_geometry_suite(&n6_inner_fixture());
}

#[test]
fn cotangent_presented_as_extension_passes_geometry_suite() {
    run_geometry_suite(&cotangent_fixture());
}

#[test]
fn reductive_extension_passes_geometry_suite() {
    run_geometry_suite(&reductive_fixture());
}

#[test]
fn kernel_class_matches_t_invertibility_across_battery() {
    kernel_class_matches_t_invertibility();
}

#[test]
fn rank_one_and_two_inner_extensions_split() {
    rank_two_or_less_extensions_split();
}

#[test]
fn mixed_kernel_reduces_to_isotropic_sub_extension() {
    mixed_kernel_reduction();
}
