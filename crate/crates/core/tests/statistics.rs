use num_rational::BigRational;
use num_traits::ToPrimitive;

use flexcount::bounds::frac;
use flexcount::cli::{monte_carlo_rows, sampling_formula};
use flexcount::cnf::{count_exact, Formula};
use flexcount::counter::{approx_count, Mode, RunConfig};
use flexcount::optimize::optimal_parameters;
use flexcount::verify::{
    census, concentration_holds, count_profile, empirical_error, exact_event_probs, monte_carlo_failure,
};

fn sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn sampled_rates_match_exact_probabilities() {
    let trials = 100_000;
    let cases = [
        (Formula::new(3, vec![vec![1, 2]], None).unwrap(), 3, 1.0, 0.4),
        (Formula::new(3, vec![], None).unwrap(), 2, 1.5, 0.4),
        (Formula::new(3, vec![vec![-1, 3]], None).unwrap(), 4, 2.0, 0.8),
        (Formula::new(2, vec![], None).unwrap(), 2, 1.0, 0.2),
    ];
    for (i, (f, thresh, rnd, eps)) in cases.into_iter().enumerate() {
        let exact = exact_event_probs(&f, thresh, rnd, eps).unwrap();
        let (rate_l, rate_u) = monte_carlo_failure(&f, thresh, rnd, eps, trials, 11 + i as u64).unwrap();
        for (rate, pr) in [(rate_l, &exact.pr_l), (rate_u, &exact.pr_u)] {
            let p = pr.to_f64().unwrap();
            let tol = 3.0 * sigma(p, trials) + 1e-9;
            assert!((rate - p).abs() <= tol, "case {i}: rate {rate} vs exact {pr} (±{tol:.5})");
        }
    }
}

#[test]
fn sampled_rates_respect_bounds_at_n10() {
    let f = Formula::new(10, vec![vec![1, 2], vec![-3, 4]], None).unwrap();
    assert_eq!(count_exact(&f).unwrap(), 576);
    let trials = 10_000;
    for eps in [0.8, 0.4] {
        let p = optimal_parameters(eps, 0.001).unwrap();
        let (rate_l, rate_u) = monte_carlo_failure(&f, p.thresh_star, p.rnd_star, eps, trials, 3).unwrap();
        assert!(rate_l <= p.p_l + 3.0 * (p.p_l / trials as f64).sqrt(), "ε={eps}: L rate {rate_l}");
        assert!(rate_u <= p.p_u + 3.0 * (p.p_u / trials as f64).sqrt(), "ε={eps}: U rate {rate_u}");
    }
}

#[test]
fn verify_sampling_rows_are_sound() {
    assert_eq!(count_exact(&sampling_formula()).unwrap(), 256);
    let rows = monte_carlo_rows(2000, 0).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.sound), "{rows:?}");
}

#[test]
fn cell_counts_concentrate() {
    let gamma = frac(3, 2);
    let betas: Vec<BigRational> = [(1, 4), (1, 2), (3, 4)].iter().map(|&(a, b)| frac(a, b)).collect();
    let mut checked = 0;
    for cf in census() {
        let profile = count_profile(&cf.formula, false).unwrap();
        for m in 0..=profile.dim {
            for beta in &betas {
                assert!(concentration_holds(&profile, m, beta, &gamma), "{} m={m} β={beta}", cf.name);
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn desk_suite_error_is_well_below_tolerance() {
    // assorted structure on 12–16 variables, counts from 2^6 to 2^14
    let suite: Vec<Formula> = vec![
        Formula::new(12, vec![vec![1, 2]], None).unwrap(),
        Formula::new(14, vec![vec![1], vec![2, 3], vec![-4, 5, 6]], None).unwrap(),
        Formula::new(16, vec![vec![1], vec![2], vec![3], vec![4], vec![5, -6]], None).unwrap(),
        Formula::new(13, vec![vec![1, -2], vec![2, -3], vec![3, -1]], None).unwrap(),
        Formula::new(15, vec![vec![-1, -2], vec![-3, -4], vec![-5, -6], vec![7]], None).unwrap(),
        Formula::new(12, vec![vec![1, 2, 3], vec![-1, -2], vec![4, 5, 6, 7]], None).unwrap(),
        Formula::new(14, vec![vec![1], vec![-2]], Some(vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10])).unwrap(),
        Formula::new(16, vec![vec![1, 2], vec![3, 4], vec![5, 6], vec![7, 8]], Some((1..=12).collect())).unwrap(),
    ];
    let mut total = 0.0;
    for (i, f) in suite.iter().enumerate() {
        let exact = count_exact(f).unwrap();
        let (est, meta) = approx_count(f, &RunConfig::new(0.8, 0.001, Mode::FlexMc, i as u64)).unwrap();
        let err = empirical_error(exact, est).unwrap();
        assert!(err <= 0.8, "formula {i}: exact {exact}, estimate {est} ({:?})", meta.path);
        total += err;
    }
    let mean = total / suite.len() as f64;
    assert!(mean < 0.2, "mean error {mean}");
}
