mod common;

use common::{corpus, example};
use gibbs_spectra::kernels::{dg_kernel, rg_kernel};
use gibbs_spectra::model::SelectionProbability;
use gibbs_spectra::simulate::{
    decay_trace, gaussian_experiment, occupation_frequencies, point_mass, sample_chain,
    DEFAULT_WINDOW,
};
use gibbs_spectra::spectral::{convergence_rate, SamplerInputs, SamplerKind};
use gibbs_spectra::{Joint32, Kernel32};

fn sel(r: f64) -> SelectionProbability<f64> {
    SelectionProbability::new(r).unwrap()
}

#[test]
fn occupation_frequencies_approach_stationarity() {
    let kernel = rg_kernel(&example(), sel(0.5)).unwrap();
    let path = sample_chain(&kernel, 0, 1_000_000, 17).unwrap();
    let freq = occupation_frequencies(&path, kernel.n_states());
    for (f, p) in freq.iter().zip(kernel.stationary().iter()) {
        assert!((f - p).abs() < 0.005, "{f} against {p}");
    }
}

#[test]
fn gaussian_lag_one_autocorrelation() {
    for (gamma, seed) in [(0.0, 5), (0.5, 6), (0.9, 7)] {
        let result = gaussian_experiment(gamma, 0.5, 1_000_000, seed).unwrap();
        assert!(
            (result.lag1_autocorr_x - gamma * gamma).abs() < 0.02,
            "gamma {gamma}: {}",
            result.lag1_autocorr_x
        );
    }
}

#[test]
fn gaussian_runs_repeat_under_a_seed() {
    let a = gaussian_experiment(0.7, 0.3, 20_000, 99).unwrap();
    let b = gaussian_experiment(0.7, 0.3, 20_000, 99).unwrap();
    assert_eq!(a, b);
}

#[test]
fn example_decay_rates() {
    let joint = example();
    let start = point_mass(4, 0);
    let pr = decay_trace(&rg_kernel(&joint, sel(0.5)).unwrap(), &start, 30, DEFAULT_WINDOW, "corner").unwrap();
    assert!((pr.fitted_rate - 0.8).abs() < 0.008);
    let pd = decay_trace(&dg_kernel(&joint).unwrap(), &start, 30, DEFAULT_WINDOW, "corner").unwrap();
    assert!((pd.fitted_rate - 0.36).abs() < 0.0036);
}

#[test]
fn single_precision_tracks_double_precision() {
    for joint in corpus(5, 3, 61) {
        let narrow: Joint32 = gibbs_spectra::model::FiniteJointDistribution::from_row_major(
            joint.nx(),
            joint.ny(),
            &joint.to_row_major().iter().map(|p| *p as f32).collect::<Vec<_>>(),
        )
        .unwrap();
        let inputs64 = SamplerInputs::new(&joint).with_r(sel(0.3));
        let inputs32 = SamplerInputs::new(&narrow).with_r(SelectionProbability::new(0.3f32).unwrap());
        for kind in [SamplerKind::Dg, SamplerKind::Rg] {
            let wide = convergence_rate(kind, &inputs64).unwrap().rate;
            let single = convergence_rate(kind, &inputs32).unwrap().rate;
            assert!((wide - single as f64).abs() < 1e-4, "{kind}: {wide} against {single}");
        }
        let kernel: Kernel32 = rg_kernel(&narrow, SelectionProbability::new(0.3f32).unwrap()).unwrap();
        assert!(kernel.row_sum_defect() < 1e-5);
    }
}
