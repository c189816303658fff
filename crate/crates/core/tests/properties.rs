mod common;

use bilgrowth::bounds::{bounds_report, envelope_holds, lower_bound, upper_bound_seeded};
use bilgrowth::depgraph::edge_inequality_check;
use bilgrowth::growth::{frontier_dp, growth_table, is_supermultiplicative, ratio_check, table_from_frontiers};
use bilgrowth::numerics::Scalar;
use bilgrowth::patterns::{compose, LinearPattern};
use bilgrowth::system::{System, Vector};
use bilgrowth::trees::balanced_subtree;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system(seed: u64) -> (System, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = common::random_nonneg_system(&mut rng, 3);
    (s, rng)
}

fn random_pattern(sys: &System, rng: &mut ChaCha8Rng, max_leaves: usize) -> LinearPattern {
    let n = rng.gen_range(2..=max_leaves);
    let t = common::random_tree(rng, n);
    let marks = t.leaf_paths();
    let mark = marks[rng.gen_range(0..marks.len())].clone();
    LinearPattern::new(sys, t, mark).unwrap()
}

fn small_vector(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    Vector::new((0..d).map(|_| Scalar::ratio(rng.gen_range(0..=9), rng.gen_range(1..=4))).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn apply_is_monotone(seed in any::<u64>()) {
        let (s, mut rng) = system(seed);
        let d = s.dim();
        let (x, y) = (small_vector(&mut rng, d), small_vector(&mut rng, d));
        let (dx, dy) = (small_vector(&mut rng, d), small_vector(&mut rng, d));
        let add = |a: &Vector, b: &Vector| Vector::new(a.entries().iter().zip(b.entries()).map(|(p, q)| p + q).collect());
        let lo = s.apply(&x, &y).unwrap();
        let hi = s.apply(&add(&x, &dx), &add(&y, &dy)).unwrap();
        prop_assert!(lo.dominated_by(&hi));
    }

    #[test]
    fn frontier_matches_tree_enumeration(seed in any::<u64>()) {
        let (s, _) = system(seed);
        let n = 7;
        let frontiers = frontier_dp(&s, n).unwrap();
        let values = common::all_tree_values(&s, n);
        for (f, level) in frontiers.iter().zip(&values) {
            for v in level {
                prop_assert!(f.entries().iter().any(|e| v.dominated_by(&e.vector)));
            }
            for e in f.entries() {
                prop_assert!(level.contains(&e.vector));
                prop_assert_eq!(&e.witness.eval(&s), &e.vector);
                prop_assert_eq!(e.witness.leaves(), f.n);
            }
            for (a, e) in f.entries().iter().enumerate() {
                for (b, o) in f.entries().iter().enumerate() {
                    prop_assert!(a == b || !e.vector.dominated_by(&o.vector));
                }
            }
        }
        let t = table_from_frontiers(&s, &frontiers);
        let oracle = common::oracle_table(&s, n);
        for m in 1..=n {
            for (i, want) in oracle[m - 1].iter().enumerate() {
                prop_assert_eq!(t.g_i(m, i), want);
            }
        }
    }

    #[test]
    fn pattern_matrix_identity_and_composition(seed in any::<u64>()) {
        let (s, mut rng) = system(seed);
        let p = random_pattern(&s, &mut rng, 7);
        let q = random_pattern(&s, &mut rng, 5);
        let u = small_vector(&mut rng, s.dim());
        let direct = p.tree().eval_marked(&s, p.mark(), &u).unwrap();
        let mu = p.matrix().mul_vec(u.entries()).unwrap();
        prop_assert_eq!(direct.entries(), mu.as_slice());
        let c = compose(&p, &q).unwrap();
        prop_assert_eq!(c.matrix(), &p.matrix().mul(q.matrix()).unwrap());
        prop_assert_eq!(c.leaves(), p.leaves() + q.leaves() - 1);
    }

    #[test]
    fn pattern_entries_bounded_by_table(seed in any::<u64>()) {
        let (s, mut rng) = system(seed);
        let t = growth_table(&s, 8).unwrap();
        let min_s = s.start().entries().iter().min().unwrap().clone();
        let p = random_pattern(&s, &mut rng, 8);
        for i in 0..s.dim() {
            let cap = t.g_i(p.leaves(), i) / &min_s;
            for j in 0..s.dim() {
                prop_assert!(*p.matrix().get(i, j) <= cap);
            }
        }
    }

    #[test]
    fn edge_and_ratio_inequalities(seed in any::<u64>()) {
        let (s, _) = system(seed);
        let t = growth_table(&s, 12).unwrap();
        prop_assert!(edge_inequality_check(&s, &t).unwrap().is_empty());
        prop_assert!(ratio_check(&t, &s).unwrap().holds);
    }

    #[test]
    fn lyapunov_certificate_replays_and_dominates(seed in any::<u64>()) {
        let (s, _) = system(seed);
        let t = growth_table(&s, 12).unwrap();
        let u = upper_bound_seeded(&s, None, Some(&t)).unwrap();
        prop_assert!(u.certificate.check(&s));
        prop_assert!(envelope_holds(&u.certificate, &t));
        prop_assert!(u.value >= u.certificate.bound(&s).to_f64());
    }

    #[test]
    fn lower_never_exceeds_upper(seed in any::<u64>()) {
        let (s, _) = system(seed);
        let r = bounds_report(&s, 10, 4).unwrap();
        let lo = Scalar::Exact(BigRational::from_float(r.lower.value).unwrap());
        prop_assert!(lo <= r.upper.certificate.bound(&s));
    }

    #[test]
    fn supermultiplicative_entries_give_sound_lower_bounds(seed in any::<u64>()) {
        let (s, _) = system(seed);
        let t = growth_table(&s, 12).unwrap();
        let lower = lower_bound(&s, 3, &t).unwrap();
        for i in 0..s.dim() {
            if !is_supermultiplicative(&t, i) {
                continue;
            }
            for p in 1..12 {
                for q in 1..=12 - p {
                    prop_assert!(*t.g_i(p + q, i) >= t.g_i(p, i) * t.g_i(q, i));
                }
            }
            for n in 1..=12 {
                prop_assert!(lower.value >= t.g_i(n, i).root_f64(n) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn tree_division(seed in any::<u64>(), n in 2usize..=200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = common::random_tree(&mut rng, n);
        let (path, m) = balanced_subtree(&t).unwrap();
        prop_assert!(3 * m >= n && 3 * m <= 2 * n);
        prop_assert_eq!(t.subtree(&path).unwrap().leaves(), m);
    }
}
