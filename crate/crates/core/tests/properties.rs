mod common;

use common::props;

fn run(name: &str) {
    let (_, suite) = props::all().into_iter().find(|(n, _)| *n == name).expect("known suite");
    suite();
}

#[test]
fn zoh_maps_poles_through_the_exponential() {
    run("zoh_maps_poles_through_the_exponential");
}

#[test]
fn zoh_preserves_dc_gain() {
    run("zoh_preserves_dc_gain");
}

#[test]
fn zoh_second_order_closed_form() {
    run("zoh_second_order_closed_form");
}

#[test]
fn zoh_first_order_closed_form() {
    run("zoh_first_order_closed_form");
}

#[test]
fn exponential_of_commuting_sum() {
    run("exponential_of_commuting_sum");
}

#[test]
fn exponential_matches_taylor_series() {
    run("exponential_matches_taylor_series");
}

#[test]
fn stability_agrees_with_quadratic_formula() {
    run("stability_agrees_with_quadratic_formula");
}

#[test]
fn discrete_quadratic_stability() {
    run("discrete_quadratic_stability");
}

#[test]
fn filtering_is_linear() {
    run("filtering_is_linear");
}

#[test]
fn derivative_bank_is_self_consistent() {
    run("derivative_bank_is_self_consistent");
}

#[test]
fn cascading_sampled_filters_does_not_commute() {
    run("cascading_sampled_filters_does_not_commute");
}

#[test]
fn hold_exact_input_matches_convolution_quadrature() {
    run("hold_exact_input_matches_convolution_quadrature");
}

#[test]
fn impulse_l1_matches_simpson() {
    run("impulse_l1_matches_simpson");
}

#[test]
fn sylvester_determinant_is_signed_resultant() {
    run("sylvester_determinant_is_signed_resultant");
}

#[test]
fn planted_common_factor_is_detected() {
    run("planted_common_factor_is_detected");
}

#[test]
fn records_are_bit_identical_across_reruns() {
    run("records_are_bit_identical_across_reruns");
}
