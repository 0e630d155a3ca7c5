mod common;

use common::{centered_spectrum, corpus, example, jacobi_eigenvalues, spectral_rate};
use gibbs_spectra::kernels::{dg_kernel, marginal_x, marginal_y, rc_kernel, rg_kernel};
use gibbs_spectra::model::{gen_dirichlet_joint, Concentration, SelectionProbability};
use gibbs_spectra::simulate::{chi_square_distance, iterate_distribution, point_mass};
use gibbs_spectra::spectral::{
    convergence_rate, l0_operator_norm, maximal_correlation, norm_power_sequence, SamplerInputs,
    SamplerKind,
};
use gibbs_spectra::theory::{build_counterexample, theorem1_rhs};
use gibbs_spectra::Joint64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

fn sel(r: f64) -> SelectionProbability<f64> {
    SelectionProbability::new(r).unwrap()
}

#[test]
fn jacobi_helper_on_a_known_matrix() {
    let values = jacobi_eigenvalues(vec![
        vec![2.0, 1.0, 0.0],
        vec![1.0, 2.0, 1.0],
        vec![0.0, 1.0, 2.0],
    ]);
    let s = 2f64.sqrt();
    for (v, e) in values.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
        assert!((v - e).abs() < 1e-13, "{v} vs {e}");
    }
}

#[test]
fn dirichlet_matches_gamma_normalization() {
    let alphas = vec![0.7, 1.3, 2.0, 0.4];
    let joint: Joint64 =
        gen_dirichlet_joint(2, 2, &Concentration::PerCell(alphas.clone()), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws: Vec<f64> = alphas
        .iter()
        .map(|&a| Gamma::new(a, 1.0).unwrap().sample(&mut rng))
        .collect();
    let total: f64 = draws.iter().sum();
    for (cell, g) in joint.to_row_major().iter().zip(&draws) {
        assert!((cell - g / total).abs() < 1e-15);
    }
}

#[test]
fn rates_match_jacobi_on_random_instances() {
    for joint in corpus(10, 5, 41) {
        let rho_d = convergence_rate(SamplerKind::Dg, &SamplerInputs::new(&joint)).unwrap().rate;
        assert!((rho_d - spectral_rate(&marginal_x(&joint).unwrap())).abs() < 1e-10);
        assert!((rho_d - spectral_rate(&marginal_y(&joint).unwrap())).abs() < 1e-10);
        for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let rho_r = convergence_rate(SamplerKind::Rg, &SamplerInputs::new(&joint).with_r(sel(r)))
                .unwrap()
                .rate;
            let oracle = spectral_rate(&rg_kernel(&joint, sel(r)).unwrap());
            assert!((rho_r - oracle).abs() < 1e-10);
            let formula = (1.0 + (1.0 - 4.0 * r * (1.0 - r) * (1.0 - rho_d)).sqrt()) / 2.0;
            assert!((oracle - formula).abs() < 1e-8);
            assert!((theorem1_rhs(rho_d, r).unwrap() - formula).abs() < 1e-15);
        }
    }
}

#[test]
fn maximal_correlation_matches_normalized_table_singular_values() {
    for joint in corpus(10, 4, 42) {
        let px = joint.marginal_x();
        let py = joint.marginal_y();
        let (nx, ny) = (joint.nx(), joint.ny());
        let b = |x: usize, y: usize| joint.prob(x, y) / (px[x] * py[y]).sqrt();
        let btb: Vec<Vec<f64>> = (0..ny)
            .map(|i| (0..ny).map(|j| (0..nx).map(|x| b(x, i) * b(x, j)).sum()).collect())
            .collect();
        let values = jacobi_eigenvalues(btb);
        let second = values[values.len() - 2].max(0.0).sqrt();
        let gamma = maximal_correlation(&joint).unwrap();
        assert!((gamma - second).abs() < 1e-10);
        assert!((values[values.len() - 1] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn counterexample_random_scan_spectrum() {
    let (joint, swap) = build_counterexample::<f64>();
    for r in [0.1, 0.25, 0.5, 0.9] {
        let kernel = rc_kernel(&joint, &swap, sel(r)).unwrap();
        let mut expected = vec![1.0 - 2.0 * r, r, -r, 0.0];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // three mean-zero eigenvalues plus the zero left by removing the constant
        for (v, e) in centered_spectrum(&kernel).iter().zip(&expected) {
            assert!((v - e).abs() < 1e-12, "r = {r}: {v} vs {e}");
        }
        let rate = convergence_rate(SamplerKind::Rc, &SamplerInputs::new(&joint).with_q2(&swap).with_r(sel(r)))
            .unwrap()
            .rate;
        assert!((rate - (1.0 - 2.0 * r).abs().max(r)).abs() < 1e-10);
    }
}

#[test]
fn counterexample_one_step_from_a_corner() {
    let (joint, swap) = build_counterexample::<f64>();
    let kernel = rc_kernel(&joint, &swap, sel(0.5)).unwrap();
    let laws = iterate_distribution(&kernel, &point_mass(4, 0), 1).unwrap();
    let expected = [0.25, 0.25, 0.5, 0.0];
    for (v, e) in laws[1].iter().zip(expected) {
        assert!((v - e).abs() < 1e-15);
    }
}

#[test]
fn chi_square_of_a_point_mass() {
    let d = chi_square_distance(&point_mass::<f64>(4, 2), &[0.25; 4]).unwrap();
    assert!((d - 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn deterministic_scan_power_law_on_the_example() {
    let powers = norm_power_sequence(&dg_kernel(&example()).unwrap(), 4).unwrap();
    for p in powers {
        let expected = 0.36f64.powf(p.n as f64 - 0.5);
        assert!((p.norm - expected).abs() < 1e-12, "n = {}", p.n);
    }
}

#[test]
fn reversible_power_law() {
    for joint in corpus(5, 3, 43) {
        let kernel = rg_kernel(&joint, sel(0.4)).unwrap();
        let norm = l0_operator_norm(&kernel).unwrap();
        for p in norm_power_sequence(&kernel, 6).unwrap() {
            assert!((p.norm - norm.powi(p.n as i32)).abs() < 1e-10);
        }
    }
}

#[test]
fn example_rates() {
    let joint = example();
    let inputs = SamplerInputs::new(&joint).with_r(sel(0.5));
    assert!((convergence_rate(SamplerKind::Dg, &inputs).unwrap().rate - 0.36).abs() < 1e-12);
    assert!((convergence_rate(SamplerKind::Rg, &inputs).unwrap().rate - 0.8).abs() < 1e-12);
    assert!((maximal_correlation(&joint).unwrap() - 0.6).abs() < 1e-12);
    let spectrum = centered_spectrum(&rg_kernel(&joint, sel(0.5)).unwrap());
    assert!((spectrum[3] - 0.8).abs() < 1e-12);
}
