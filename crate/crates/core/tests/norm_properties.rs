use std::sync::Arc;

use proptest::prelude::*;

use freegeo::free_space::{free_norm, norming_functional, optimal_representation, pairing};
use freegeo::gallery::{random_euclidean, random_graph};
use freegeo::{FreeElement, LipFunction, PointedMetricSpace};

fn space(n: usize, seed: u64, graph: bool) -> Arc<PointedMetricSpace> {
    Arc::new(if graph {
        random_graph(n, 5, 1.0, seed).unwrap()
    } else {
        random_euclidean(n, 2, 3.0, seed).unwrap()
    })
}

fn element(space: &Arc<PointedMetricSpace>, raw: &[f64]) -> FreeElement {
    let mut m = raw[..space.len()].to_vec();
    m[0] = 0.0;
    FreeElement::from_masses(space.clone(), m).unwrap()
}

fn norm(mu: &FreeElement) -> f64 {
    free_norm(mu).unwrap().value
}

fn masses() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_a_norm(n in 3usize..=7, seed in any::<u64>(), graph in any::<bool>(), a in masses(), b in masses(), c in -3.0..3.0f64) {
        let s = space(n, seed, graph);
        let (mu, nu) = (element(&s, &a), element(&s, &b));
        let (nm, nn) = (norm(&mu), norm(&nu));
        prop_assert!(nm >= 0.0);
        prop_assert!((norm(&mu.scale(c)) - c.abs() * nm).abs() <= 1e-8 * (1.0 + nm));
        prop_assert!(norm(&mu.combine(1.0, &nu, 1.0).unwrap()) <= nm + nn + 1e-8);
    }

    #[test]
    fn norming_functional_attains_the_norm(n in 3usize..=7, seed in any::<u64>(), graph in any::<bool>(), a in masses()) {
        let s = space(n, seed, graph);
        let mu = element(&s, &a);
        prop_assume!(!mu.is_zero());
        let f = norming_functional(&mu).unwrap();
        let nm = norm(&mu);
        prop_assert!(f.lip_norm() <= 1.0 + 1e-9);
        prop_assert!((pairing(&f, &mu).unwrap() - nm).abs() <= 1e-8 * (1.0 + nm));
    }

    #[test]
    fn norm_bounded_by_sums_over_the_base(n in 3usize..=7, seed in any::<u64>(), graph in any::<bool>(), a in masses()) {
        // ||mu|| <= sum |mu_p| d(p, 0), the cost of sending every mass to the base
        let s = space(n, seed, graph);
        let mu = element(&s, &a);
        let star: f64 = (1..n).map(|p| mu.masses()[p].abs() * s.d(p, 0)).sum();
        prop_assert!(norm(&mu) <= star + 1e-9);
    }

    #[test]
    fn optimal_representation_has_norm_weight(n in 3usize..=6, seed in any::<u64>(), a in masses()) {
        let s = space(n, seed, false);
        let mu = element(&s, &a);
        prop_assume!(!mu.is_zero());
        let rep = optimal_representation(&mu).unwrap();
        let nm = norm(&mu);
        prop_assert!((rep.total_weight() - nm).abs() <= 1e-8 * (1.0 + nm));
        let back = rep.to_element();
        for p in 1..n {
            prop_assert!((back.masses()[p] - mu.masses()[p]).abs() <= 1e-8);
        }
    }

    #[test]
    fn fatten_then_thin_is_identity(n in 2usize..=8, seed in any::<u64>(), gamma in 0.001..2.0f64) {
        let s = space(n, seed, true);
        let back = s.gamma_fatten(gamma).unwrap().gamma_thin(gamma).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((back.d(i, j) - s.d(i, j)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn molecule_norm_is_one(n in 2usize..=7, seed in any::<u64>(), graph in any::<bool>()) {
        let s = space(n, seed, graph);
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    let m = FreeElement::molecule(s.clone(), x, y).unwrap();
                    prop_assert!((norm(&m) - 1.0).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn distance_function_norms_a_delta() {
    let s = space(6, 3, false);
    for p in 1..6 {
        let delta = FreeElement::delta(s.clone(), p).unwrap();
        assert!((norm(&delta) - s.d(p, 0)).abs() <= 1e-9);
        let f = LipFunction::new(s.clone(), (0..6).map(|q| s.d(q, 0)).collect()).unwrap();
        assert!((pairing(&f, &delta).unwrap() - s.d(p, 0)).abs() <= 1e-12);
    }
}
