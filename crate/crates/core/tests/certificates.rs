use std::sync::Arc;

use freegeo::free_space::pairing;
use freegeo::gallery::{branching_tree, equilateral, line, MetricFamily};
use freegeo::lip::aux_f_xy;
use freegeo::ssd::{
    corollary_main_witness, find_common_norming, petr_certificate, slab_point, ssd1_gamma_eps,
    ssd1_perturb, Main1Setup, PerturbationStatus,
};
use freegeo::{FreeElement, Molecule, MoleculeCombination};

#[test]
fn ssd1_on_seeded_slab_points() {
    let m = Arc::new(equilateral(5, 1.0).unwrap());
    let (x, y) = (1, 2);
    let f = aux_f_xy(&m, x, y).unwrap();
    let gamma_peak = f.peaking_check(x, y).unwrap().unwrap();
    let eps = 0.2;
    let window = ssd1_gamma_eps(eps, gamma_peak);
    let mxy = FreeElement::molecule(m.clone(), x, y).unwrap();
    for seed in 0..8 {
        let g = slab_point(&mxy, 0.5 * window, seed).unwrap();
        let r = ssd1_perturb(x, y, &f, gamma_peak, &g, eps).unwrap();
        assert!(r.distance <= r.bound + 1e-9);
        assert!(r.bound < eps);
        assert!((r.h_hat.lip_norm() - 1.0).abs() <= 1e-9);
        assert!((pairing(&r.h_hat, &mxy).unwrap() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn main1_norms_the_fattened_combination() {
    let tree = Arc::new(branching_tree(4).unwrap());
    let combo = MoleculeCombination::new(
        tree.clone(),
        vec![
            Molecule {
                lambda: 0.5,
                x: 1,
                y: 2,
            },
            Molecule {
                lambda: 0.5,
                x: 3,
                y: 4,
            },
        ],
    )
    .unwrap();
    let f = find_common_norming(&tree, &combo).unwrap();
    let setup = Main1Setup::prepare(&tree, 1.0, &combo, &f, 0.04).unwrap();
    assert!(setup.rho() > 0.0);
    for seed in 0..4 {
        let g = slab_point(&setup.mu, 0.25 * setup.rho(), seed).unwrap();
        let r = setup.run(&g).unwrap();
        assert_eq!(r.status, PerturbationStatus::Certified, "{:?}", r.message);
        let psi = r.psi.unwrap();
        assert!((pairing(&psi, &setup.mu).unwrap() - psi.lip_norm()).abs() <= 1e-8);
        assert!(psi.distance(&g).unwrap() <= r.constants.bound + 1e-9);
    }
}

#[test]
fn corollary_witness_on_a_line() {
    let m = Arc::new(line(5, 1.0).unwrap());
    let combo = MoleculeCombination::new(
        m.clone(),
        vec![Molecule {
            lambda: 1.0,
            x: 2,
            y: 1,
        }],
    )
    .unwrap();
    let w = corollary_main_witness(&m, 0.5, &combo).unwrap();
    assert!(w.checks.iter().all(|c| c.ok), "{:?}", w.checks);
    let mol = FreeElement::molecule(w.tilde_space.clone(), 2, 1).unwrap();
    assert!((pairing(&w.f_tilde, &mol).unwrap() - 1.0).abs() <= 1e-9);
}

#[test]
fn petr_certificate_on_small_truncations() {
    let family = MetricFamily::petr();
    for index in [4, 5, 7] {
        let space = Arc::new(family.generate(index).unwrap().space);
        let mu = FreeElement::molecule(space, 0, 1).unwrap();
        let f = slab_point(&mu, 0.01, index as u64).unwrap();
        let cert = petr_certificate(&family, index, 0.1, &f).unwrap();
        assert!(cert.certified, "{index}: {:?}", cert.checks);
        assert!(cert.distance <= 0.4 + 1e-9);
    }
}
