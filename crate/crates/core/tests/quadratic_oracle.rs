mod support;

use support::oracle;

#[test]
fn features_are_homogeneous_of_degree_two() {
    oracle::homogeneity(100, 5).unwrap();
}

#[test]
fn factorized_features_equal_the_explicit_form() {
    oracle::rank_one_equivalence(100, 6).unwrap();
}

#[test]
fn quadratic_targets_are_recovered() {
    oracle::polynomial_exactness(7).unwrap();
}
