use super::*;
use proptest::prelude::*;
use statrs::distribution::{DiscreteCDF, Poisson};

#[test]
fn epsilon_and_threshold_are_complementary() {
    assert!((DEFAULT_EPSILON + ONE_INDEPENDENT_THRESHOLD - 1.0).abs() < 1e-15);
}

#[test]
fn f_bar_values() {
    assert_eq!(f_bar_bound(1.0).unwrap(), -PI);
    assert_eq!(f_bar_bound(8000.0).unwrap(), -PI * 6.4e7);
    assert!(f_bar_bound(1e-9).unwrap() > -1e-17);
    assert!(f_bar_bound(0.0).is_err());
}

#[test]
fn default_m_matches_closed_form_at_r_equals_s() {
    for r in [1.0, 3.0, 8000.0] {
        let expected = (E * (8.0 + PI) * r * r).ceil() as u64 + 1;
        assert_eq!(default_m(r, r), expected);
    }
}

#[test]
fn a_m_tail_with_m_zero() {
    let t = a_m_tail(0.3, 0.2, 0).unwrap();
    let expected = (-(-t.mean).exp_m1()).ln();
    assert!((t.log_exact - expected).abs() < 1e-12);
}

#[test]
fn a_m_tail_matches_independent_cdf() {
    let t = a_m_tail(1.0, 1.0, 60).unwrap();
    let oracle = Poisson::new(8.0 + PI).unwrap().sf(60);
    let rel = (t.log_exact.exp() - oracle).abs() / oracle;
    assert!(rel < 1e-10, "rel error {rel:e}, oracle {oracle:e}");
}

#[test]
fn a_m_tail_below_the_mean() {
    let oracle = Poisson::new(8.0 + PI).unwrap();
    for m in [1u64, 5, 10, 11] {
        let t = a_m_tail(1.0, 1.0, m).unwrap();
        let want = oracle.sf(m);
        assert!((t.log_exact.exp() - want).abs() < 1e-12 * want.max(1e-3), "m={m}");
    }
}

#[test]
fn simplified_tail_below_one_and_decreasing_at_default_m() {
    for r in [1.0, 2.0, 8.0, 8000.0] {
        let m = default_m(r, r);
        let a = a_m_tail(r, r, m).unwrap();
        let b = a_m_tail(r, r, m + 1).unwrap();
        assert!(a.log_simplified < 0.0, "r={r}");
        assert!(b.log_simplified < a.log_simplified);
        assert!(a.log_exact.is_finite());
        assert!(a.log_exact <= a.log_simplified);
    }
}

proptest! {
    #[test]
    fn exact_tail_below_simplified(r in 0.1f64..6.0, s in 0.1f64..6.0, extra in 0u64..200) {
        let mu = region_mean(r, s);
        let m = mu.ceil() as u64 + extra;
        let t = a_m_tail(r, s, m).unwrap();
        if t.log_simplified < 0.0 {
            prop_assert!(t.log_exact <= t.log_simplified + 1e-12);
        }
    }

    #[test]
    fn tail_nonincreasing_in_m(mu in 0.5f64..200.0, m in 0u64..400) {
        let a = log_poisson_upper_tail(m, mu);
        let b = log_poisson_upper_tail(m + 1, mu);
        prop_assert!(b <= a + 1e-12);
        prop_assert!(a <= 0.0);
    }
}

#[test]
fn product_at_a_billion() {
    let p = BoundParameters::new(1.0, 1.0, 1_000_000_000, DEFAULT_EPSILON).unwrap();
    let rep = certificate(p, 1e-8).unwrap();
    assert!((rep.product - 0.8706).abs() < 1e-4, "{}", rep.product);
    let direct = (1.0 - 0.06805) * (-0.06805f64).exp();
    assert!((rep.product - direct).abs() < 1e-6);
    assert!(rep.checks[1].passed);
}

#[test]
fn small_radius_certificate_fails_on_bad_events() {
    let rep = certificate(BoundParameters::with_defaults(1.0).unwrap(), 1e-10).unwrap();
    assert!(!rep.valid);
    assert_eq!(rep.first_failed.as_deref(), Some(CHECK_BAD_EVENTS));
    assert!(rep.e_bar_trivial);
    assert!(rep.log_e_bar > (DEFAULT_EPSILON / 2.0).ln());
    assert_eq!(rep.format_version, FORMAT_VERSION);
    assert!(rep.pc_site_upper < 1.0);
}

#[test]
fn invalid_parameters_rejected() {
    assert!(BoundParameters::new(1.0, 1.0, 0, 0.1).is_err());
    assert!(BoundParameters::new(1.0, 1.0, 3, 1.0).is_err());
    assert!(BoundParameters::new(-1.0, 1.0, 3, 0.1).is_err());
    assert!(p_rn_bound(1.0, 1.0, 0.0).is_err());
}

#[test]
fn p_rn_bound_nonincreasing_in_r() {
    let vals: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&r| p_rn_bound(r, r, 1e-10).unwrap().log_value)
        .collect();
    for w in vals.windows(2) {
        assert!(w[1] <= w[0], "{vals:?}");
    }
    assert!(vals.iter().all(|v| v.is_finite() && *v < 0.0));
}

#[test]
fn p_rn_bound_tends_to_one_as_r_vanishes() {
    let mut prev = f64::NEG_INFINITY;
    for r in [1e-1, 1e-2, 1e-3] {
        let b = p_rn_bound(r, r, 1e-10).unwrap();
        assert!(b.log_value < 0.0 && b.log_value > prev);
        prev = b.log_value;
    }
    assert!(prev > -1e-5);
}

#[test]
fn reference_values_at_unit_radius() {
    // frozen from an independent scipy dblquad evaluation
    let b = p_rn_bound(1.0, 1.0, 1e-10).unwrap();
    assert!((b.log_value.exp() - 0.437).abs() < 2e-3, "{}", b.log_value.exp());
    let f = p_rn_bound_final_form(1.0, 1.0, 1e-10).unwrap();
    assert!((f.value - 0.354).abs() < 2e-3, "{}", f.value);
}

#[test]
fn large_radius_stays_finite() {
    let b = p_rn_bound(1e4, 1e4, 1e-8).unwrap();
    assert!(b.log_value.is_finite());
    assert!(b.log_empty_term.is_finite());
    let e = e_bar_bound(1e4, 1e4, 1e-8).unwrap();
    assert!(e.log_value.is_finite());
    let t = a_m_tail(1e4, 1e4, default_m(1e4, 1e4)).unwrap();
    assert!(t.log_exact.is_finite() && t.log_simplified.is_finite());
}

#[test]
fn final_form_has_no_cancellation_at_large_r() {
    let f = p_rn_bound_final_form(8000.0, 8000.0, 1e-10).unwrap();
    assert!(!f.cancellation);
    assert!(f.value > 0.0 && f.value < 1.0);
}

#[test]
fn final_form_below_additive_form() {
    for r in [0.5, 1.0, 2.0] {
        let first = p_rn_bound(r, r, 1e-10).unwrap().log_value.exp();
        let fin = p_rn_bound_final_form(r, r, 1e-10).unwrap();
        assert!(fin.value > 0.0 && fin.value < 1.0);
        assert!(fin.value <= first + 1e-9, "r={r}: final {} first {first}", fin.value);
    }
}

#[test]
fn final_form_looser_than_split_expression() {
    let fin = p_rn_bound_final_form(2.0, 2.0, 1e-10).unwrap();
    let split = p_rn_bound_split_form(2.0, 2.0, 1e-10).unwrap();
    assert!(fin.value >= split.value - 1e-9, "final {} split {}", fin.value, split.value);
}

#[test]
fn split_identity_overstates_tail_integral() {
    for r in [1.0, 2.0, 5.0] {
        for k in 1..=10 {
            let alpha = r * k as f64 / 10.0;
            let id = split_tail_identity(alpha, r).unwrap();
            let q = split_tail_quadrature(alpha, r, 1e-12).unwrap();
            assert!(id >= q - 1e-12, "r={r} alpha={alpha}: identity {id} quadrature {q}");
        }
    }
}

#[test]
fn alpha_bracket_nonnegative_when_r_equals_s() {
    for k in 0..=100 {
        let alpha = (k as f64 / 100.0).max(1e-9);
        assert!(geometry::split_angle(alpha, 1.0).unwrap() >= -1e-15);
    }
}

#[test]
fn grid_search_reports_each_pair() {
    let g = grid_search(&[0.5, 1.0], &[0.5, 1.0], DEFAULT_EPSILON, 1e-8).unwrap();
    assert_eq!(g.len(), 4);
    assert_eq!((g[1].r, g[1].s), (0.5, 1.0));
    assert!(g.iter().all(|p| !p.valid));
    assert!(best_certified(&g).is_none());
}
