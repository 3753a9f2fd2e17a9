mod common;

use std::collections::HashMap;

use common::{dense_oracle, operator, synthetic, test_signals};
use ndarray::{Array2, Axis};
use proptest::prelude::*;
use surfaug::augment::{augment_dataset, c_pda, derive_seed, lb_eig_da, Method, PermutationPlan};
use surfaug::mesh::SyntheticKind;
use surfaug::signal::{AugmentMethod, Provenance, SignalSet};
use surfaug::simulate::{generate, select_patch, SimulationConfig};
use surfaug::{EigenBasis64, Error, FilterBank};

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn col_sums(a: &Array2<f64>) -> ndarray::Array1<f64> {
    a.sum_axis(Axis(0))
}

#[test]
fn permutations_are_uniform() {
    // chi-square over the 24 permutations of 4 elements, 10,000 draws
    let plan = PermutationPlan::random(4, 10_000, 2024).unwrap();
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for p in plan.perms() {
        *counts.entry(p.clone()).or_default() += 1;
    }
    assert_eq!(counts.len(), 24);
    let expected = 10_000.0 / 24.0;
    let sigma = (10_000.0f64 * (1.0 / 24.0) * (23.0 / 24.0)).sqrt();
    for c in counts.values() {
        assert!((*c as f64 - expected).abs() <= 3.0 * sigma + 1.0, "{c}");
    }
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9% quantile of chi-square with 23 degrees of freedom
    assert!(chi2 < 49.73, "chi2 = {chi2}");
}

#[test]
fn lb_eigda_identity_and_means() {
    let op = operator(&synthetic(SyntheticKind::Icosphere(2)));
    let v = op.n_vertices();
    let basis = EigenBasis64::eigendecompose(&op, v).unwrap();
    let real = SignalSet::single_class(test_signals(6, v, 3), "a").unwrap();
    let same = lb_eig_da(&basis, &real, &PermutationPlan::identity(6, v)).unwrap();
    assert!(max_abs_diff(same.data(), real.data()) < 1e-8);

    let plan = PermutationPlan::random(6, v, 8).unwrap();
    let out = lb_eig_da(&basis, &real, &plan).unwrap();
    assert!(max_abs_diff(out.data(), real.data()) > 0.1);
    let dev = (col_sums(out.data()) - col_sums(real.data())).mapv(f64::abs).fold(0.0, |m: f64, x| m.max(*x));
    assert!(dev < 1e-8, "{dev}");
    assert_eq!(out.provenance(), &Provenance::Augmented { method: AugmentMethod::LbEigDa, seed: 8 });
    assert!(lb_eig_da(&basis, &real, &PermutationPlan::random(6, v - 1, 8).unwrap()).is_err());
}

#[test]
fn lb_eigda_truncated_lives_in_the_span() {
    let op = operator(&synthetic(SyntheticKind::Icosphere(2)));
    let basis = EigenBasis64::eigendecompose(&op, 25).unwrap();
    let real = SignalSet::single_class(test_signals(4, op.n_vertices(), 1), "a").unwrap();
    let out = lb_eig_da(&basis, &real, &PermutationPlan::random(4, 25, 2).unwrap()).unwrap();
    let c = basis.forward(&out).unwrap();
    let back = basis.inverse(&c).unwrap();
    assert!(max_abs_diff(&back, out.data()) < 1e-9);
}

#[test]
fn c_pda_matches_exact_spectral_resampling() {
    let op = operator(&synthetic(SyntheticKind::Icosphere(2)));
    let norm = op.normalize().unwrap();
    let lam = norm.lambda_max();
    let bank = FilterBank::design_dyadic(lam, 3, 1500, true).unwrap();
    let real = SignalSet::single_class(test_signals(5, op.n_vertices(), 6), "g").unwrap();
    let plan = PermutationPlan::random(5, bank.n_channels(), 77).unwrap();
    let fast = c_pda(&norm, &bank, &real, &plan).unwrap();

    let oracle = dense_oracle(&op);
    let channels: Vec<Array2<f64>> = real.data().outer_iter().map(|r| oracle.filter(&bank, lam, &r.to_vec())).collect();
    let mut exact = Array2::zeros(real.data().raw_dim());
    for i in 0..5 {
        for c in 0..bank.n_channels() {
            let mut row = exact.row_mut(i);
            row += &channels[plan.source(c, i)].row(c);
        }
    }
    assert!(max_abs_diff(fast.data(), &exact) < 1e-8);
}

#[test]
fn c_pda_means_follow_the_reconstruction() {
    let op = operator(&synthetic(SyntheticKind::Icosphere(2)));
    let norm = op.normalize().unwrap();
    let bank = FilterBank::design_uniform(norm.lambda_max(), norm.lambda_max() / 6.0, 600, true).unwrap();
    let real = SignalSet::single_class(test_signals(7, op.n_vertices(), 12), "g").unwrap();
    let rec = bank.reconstruct(&norm, real.data().view()).unwrap();
    let out = c_pda(&norm, &bank, &real, &PermutationPlan::random(7, bank.n_channels(), 1).unwrap()).unwrap();
    let dev = (col_sums(out.data()) - col_sums(&rec)).mapv(f64::abs).fold(0.0, |m: f64, x| m.max(*x));
    assert!(dev / 7.0 < 1e-10);
}

#[test]
fn c_pda_identity_is_a_projection() {
    let op = operator(&synthetic(SyntheticKind::Icosphere(2)));
    let norm = op.normalize().unwrap();
    let bank = FilterBank::design_dyadic(norm.lambda_max(), 2, 3000, true).unwrap();
    let real = SignalSet::single_class(test_signals(2, op.n_vertices(), 3), "g").unwrap();
    let id = PermutationPlan::identity(2, bank.n_channels());
    let once = c_pda(&norm, &bank, &real, &id).unwrap();
    let twice = c_pda(&norm, &bank, &SignalSet::single_class(once.data().clone(), "g").unwrap(), &id).unwrap();
    assert!(max_abs_diff(once.data(), twice.data()) < 1e-6);
}

#[test]
fn c_pda_rejects_mismatched_lambda() {
    let op = operator(&synthetic(SyntheticKind::Icosphere(1)));
    let norm = op.normalize().unwrap();
    let bank = FilterBank::design_uniform(norm.lambda_max() * 1.001, 1.0, 20, true).unwrap();
    let real = SignalSet::single_class(test_signals(3, op.n_vertices(), 3), "g").unwrap();
    let plan = PermutationPlan::identity(3, bank.n_channels());
    assert!(matches!(c_pda(&norm, &bank, &real, &plan), Err(Error::InvalidArgument(_))));
}

#[test]
fn relabeling_the_input_relabels_the_plan() {
    let op = operator(&synthetic(SyntheticKind::Icosphere(1)));
    let v = op.n_vertices();
    let basis = EigenBasis64::eigendecompose(&op, v).unwrap();
    let real = SignalSet::single_class(test_signals(4, v, 21), "a").unwrap();
    let plan = PermutationPlan::random(4, v, 5).unwrap();
    let out = lb_eig_da(&basis, &real, &plan).unwrap();
    // reverse the observations and map every source index accordingly
    let rev: Vec<usize> = (0..4).rev().collect();
    let shuffled = real.select(&rev);
    let moved: Vec<Vec<usize>> = plan.perms().iter().map(|p| p.iter().map(|&s| 3 - s).collect()).collect();
    let out2 = lb_eig_da(&basis, &shuffled, &PermutationPlan::from_perms(moved, 5).unwrap()).unwrap();
    assert!(max_abs_diff(out.data(), out2.data()) < 1e-10);
}

#[test]
fn dataset_per_class_counts_and_means() {
    let mesh = synthetic(SyntheticKind::Icosphere(2));
    let op = operator(&mesh);
    let v = op.n_vertices();
    let basis = EigenBasis64::eigendecompose(&op, v).unwrap();
    let patch = select_patch(&mesh, 0, 2).unwrap();
    let real = generate(&mesh, &SimulationConfig::new(20, 10, 0.6, patch, 4)).unwrap();
    let counts = vec![("0".to_string(), 20), ("1".to_string(), 10)];
    let out = augment_dataset(&real, Method::LbEigDa(&basis), &counts, 9).unwrap();
    assert_eq!(out.n_observations(), 30);
    for ((_, r), (_, a)) in real.split_by_class().iter().zip(out.split_by_class().iter()) {
        let d = (r.vertex_means() - a.vertex_means()).mapv(f64::abs).fold(0.0, |m: f64, x| m.max(*x));
        assert!(d < 1e-8);
    }
    let double = vec![("0".to_string(), 40), ("1".to_string(), 20)];
    let big = augment_dataset(&real, Method::LbEigDa(&basis), &double, 9).unwrap();
    assert_eq!(big.n_observations(), 60);
    // first round of the larger request is the single-round output
    let first: Vec<usize> = (0..20).chain(40..50).collect();
    assert!(max_abs_diff(&big.select(&first).data().clone(), out.data()) < 1e-12);
    assert_ne!(derive_seed(9, 0, 0), derive_seed(9, 0, 1));

    let tiny = real.select(&[0, 20]);
    let err = augment_dataset(&tiny, Method::LbEigDa(&basis), &[("0".to_string(), 2)], 1).unwrap_err();
    assert!(matches!(err, Error::TooFewObservations { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lb_eigda_preserves_batch_sums(seed in any::<u64>(), n in 2usize..9) {
        let op = operator(&synthetic(SyntheticKind::Icosphere(1)));
        let v = op.n_vertices();
        let basis = EigenBasis64::eigendecompose(&op, v).unwrap();
        let real = SignalSet::single_class(test_signals(n, v, seed), "a").unwrap();
        let out = lb_eig_da(&basis, &real, &PermutationPlan::random(n, v, seed).unwrap()).unwrap();
        let d = (col_sums(out.data()) - col_sums(real.data())).mapv(f64::abs).fold(0.0, |m: f64, x| m.max(*x));
        prop_assert!(d < 1e-8);
    }

    #[test]
    fn plans_are_bijections(n in 2usize..40, channels in 1usize..20, seed in any::<u64>()) {
        let plan = PermutationPlan::random(n, channels, seed).unwrap();
        prop_assert_eq!(plan.n_channels(), channels);
        for p in plan.perms() {
            let mut s = p.clone();
            s.sort_unstable();
            prop_assert_eq!(s, (0..n).collect::<Vec<_>>());
        }
    }
}
