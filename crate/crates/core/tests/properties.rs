use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use flexcount::bounds::{a_u_min, p_hat, A_U_MAX};
use flexcount::cnf::{count_exact, parse_dimacs, BoundedCounter, Formula, ProjectedSolutions};
use flexcount::counter::{approx_count, core_count, CorePath, Mode, RunConfig};
use flexcount::hash::{BitVec, CellRef, XorHash};

fn formula_strategy() -> impl Strategy<Value = Formula> {
    (2usize..=8).prop_flat_map(|n| {
        let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v });
        let clauses = prop::collection::vec(prop::collection::vec(lit, 1..=3), 0..=5);
        let proj = prop::collection::btree_set(1..=n, 1..=n);
        (clauses, proj, any::<bool>())
            .prop_map(move |(c, p, full)| Formula::new(n, c, (!full).then(|| p.into_iter().collect())).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dimacs_round_trip(f in formula_strategy()) {
        prop_assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn bounded_count_is_capped_count(f in formula_strategy(), limit in 1u64..300) {
        let exact = count_exact(&f).unwrap();
        let engine = ProjectedSolutions::new(&f, 26).unwrap();
        let b = engine.bounded_count(None, limit).unwrap();
        prop_assert_eq!(b.count, exact.min(limit));
        prop_assert_eq!(b.saturated, exact >= limit);
        prop_assert!(exact <= 1 << f.sampling_set().len());
    }

    #[test]
    fn cells_are_nested_and_partition(f in formula_strategy(), seed in any::<u64>()) {
        let engine = ProjectedSolutions::new(&f, 26).unwrap();
        let n = engine.hash_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = XorHash::sample(n, &mut rng);
        let alpha = BitVec::from_u64(seed & ((1 << n) - 1), n);
        let mut prev = engine.len() as u64;
        for m in 1..=n {
            let cell = CellRef::new(alpha.clone(), m).unwrap();
            let c = engine.bounded_count(Some((&h, &cell)), u64::MAX).unwrap().count;
            prop_assert!(c <= prev);
            prev = c;
        }
        // cells of one prefix length partition the solutions
        let m = n.min(3);
        let total: u64 = (0..1u64 << m)
            .map(|a| {
                let cell = CellRef::new(BitVec::from_u64(a, n), m).unwrap();
                engine.bounded_count(Some((&h, &cell)), u64::MAX).unwrap().count
            })
            .sum();
        prop_assert_eq!(total, engine.len() as u64);
    }

    #[test]
    fn prefix_slices_agree(n in 1usize..=70, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = XorHash::sample(n, &mut rng);
        let x = BitVec::from_bools(&(0..n).map(|i| (seed >> (i % 64)) & 1 == 1).collect::<Vec<_>>());
        let full = h.prefix_apply(n, &x).unwrap();
        for m in [1, n / 2, n] {
            prop_assert_eq!(h.prefix_apply(m, &x).unwrap(), full.prefix(m));
        }
    }

    #[test]
    fn core_estimate_in_range(f in formula_strategy(), seed in any::<u64>(), thresh in 2u64..8) {
        let engine = ProjectedSolutions::new(&f, 26).unwrap();
        let n = engine.hash_dim() as i32;
        let rnd = 1.0 + (seed % 100) as f64 / 100.0 * (thresh as f64 / 2.0 - 1.0).max(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = core_count(&engine, thresh, rnd, &mut rng).unwrap();
        match o.path {
            CorePath::Normal => {
                prop_assert!(o.m_used >= 1 && o.m_used as i32 <= n);
                prop_assert!(o.estimate >= 2.0 * rnd && o.estimate <= 2f64.powi(n) * thresh as f64);
            }
            CorePath::Singular => prop_assert_eq!(o.estimate, 2f64.powi(n)),
            CorePath::EarlyExact => prop_assert!(false, "core never takes the early path"),
        }
    }

    #[test]
    fn driver_is_deterministic_and_exact_when_small(f in formula_strategy(), seed in any::<u64>()) {
        let cfg = RunConfig::new(0.8, 0.2, Mode::FlexMc, seed);
        let a = approx_count(&f, &cfg).unwrap();
        let b = approx_count(&f, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        let exact = count_exact(&f).unwrap();
        if exact < a.1.thresh {
            prop_assert_eq!(a.1.path, CorePath::EarlyExact);
            prop_assert_eq!(a.0, exact as f64);
        } else {
            prop_assert_eq!(a.1.outcomes.len() as u64, a.1.t);
        }
    }

    #[test]
    fn reduced_bounds_are_monotone(eps in 0.05f64..3.0, thresh in 2u64..2000, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let lo = a_u_min(eps);
        let (a, b) = (lo + (A_U_MAX - lo) * u.min(v), lo + (A_U_MAX - lo) * u.max(v));
        let (pa, _) = p_hat(thresh as f64, a, eps).unwrap();
        let (pb, _) = p_hat(thresh as f64, b, eps).unwrap();
        prop_assert!(pb.p_l <= pa.p_l && pb.p_u >= pa.p_u);
        let (pc, _) = p_hat(thresh as f64 + 1.0, a, eps).unwrap();
        prop_assert!(pc.p_l <= pa.p_l && pc.p_u <= pa.p_u);
    }
}
