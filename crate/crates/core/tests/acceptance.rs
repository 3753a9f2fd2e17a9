//! End-to-end acceptance checks. Prints one line per criterion and exits
//! nonzero if any of them fails.

mod common;

use std::time::{Duration, Instant};

use common::{dense_oracle, fixture, operator, quadrature_coefficients, synthetic, test_signals};
use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use surfaug::analysis::{affine_fit, median};
use surfaug::augment::{augment_dataset, c_pda, lb_eig_da, Method, PermutationPlan};
use surfaug::chebyshev::band_coefficients;
use surfaug::mesh::SyntheticKind;
use surfaug::signal::SignalSet;
use surfaug::simulate::{generate, select_patch, SimulationConfig};
use surfaug::{EigenBasis64, FilterBank, LbOperator64, SignalSet64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("{s:.2}s (limit {limit_s}s)"))
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn class_means(set: &SignalSet64, label: &str) -> Array1<f64> {
    let rows: Vec<usize> = (0..set.n_observations()).filter(|&i| set.labels()[i] == label).collect();
    set.select(&rows).vertex_means()
}

fn operator_correctness() -> Outcome {
    let start = Instant::now();
    let mesh = fixture("tetrahedron.off");
    let mut op = LbOperator64::assemble(&mesh).unwrap();
    op.spectral_radius(1e-10).unwrap();
    let basis = EigenBasis64::eigendecompose(&op, 4).unwrap();
    let want = [0.0, 16.0 / 3.0, 16.0 / 3.0, 16.0 / 3.0];
    let eig_err = basis.eigenvalues().iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    let row_err = op.stiffness().row_sums().iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut adj_err = 0.0f64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for op in [&op, &operator(&synthetic(SyntheticKind::Icosphere(2)))] {
        let v = op.n_vertices();
        let a = op.areas();
        for _ in 0..10 {
            let x: Vec<f64> = (0..v).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..v).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (mut dx, mut dy) = (vec![0.0; v], vec![0.0; v]);
            op.apply(&x, &mut dx);
            op.apply(&y, &mut dy);
            let lhs: f64 = (0..v).map(|i| x[i] * a[i] * dy[i]).sum();
            let rhs: f64 = (0..v).map(|i| y[i] * a[i] * dx[i]).sum();
            let scale: f64 = (0..v).map(|i| (x[i] * a[i] * dy[i]).abs()).sum::<f64>().max(1.0);
            adj_err = adj_err.max((lhs - rhs).abs() / scale);
        }
    }
    let (fast, time) = within(start.elapsed(), 1.0);
    check(
        eig_err < 1e-9 && row_err < 1e-10 && adj_err < 1e-9 && fast,
        format!("eigenvalue err {eig_err:.1e}, row sum err {row_err:.1e}, adjointness err {adj_err:.1e}, {time}"),
    )
}

fn coefficient_correctness() -> Outcome {
    let order = 5000;
    let lam = 1.0;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    let bands: Vec<[f64; 2]> = (0..20)
        .map(|_| {
            let x: f64 = rng.random_range(-0.99..0.99);
            let y: f64 = rng.random_range(-0.99..0.99);
            [x.min(y), x.max(y)]
        })
        .collect();
    let start = Instant::now();
    let closed: Vec<Vec<f64>> = bands
        .iter()
        .map(|b| band_coefficients([(b[0] + 1.0) * lam / 2.0, (b[1] + 1.0) * lam / 2.0], lam, order).unwrap())
        .collect();
    let (fast, time) = within(start.elapsed(), 10.0);
    let oracle_start = Instant::now();
    let mut err = 0.0f64;
    for (b, theta) in bands.iter().zip(&closed) {
        let quad = quadrature_coefficients(b[0], b[1], order, 1e-13);
        err = theta.iter().zip(&quad).map(|(a, q)| (a - q).abs()).fold(err, f64::max);
    }
    check(
        err < 1e-10 && fast,
        format!(
            "max |closed - quadrature| {err:.1e} over 20 bands at K={order}, {time}, quadrature {:.1}s",
            oracle_start.elapsed().as_secs_f64()
        ),
    )
}

fn filter_sharpness() -> Outcome {
    let start = Instant::now();
    let bank_for = |k: usize| FilterBank::new(1.0, k, vec![[0.05, 0.1]], false).unwrap();
    let widths: Vec<f64> = [500, 2000, 5000].iter().map(|&k| bank_for(k).transition_width(0, 1e-5).unwrap()).collect();
    let (fast, time) = within(start.elapsed(), 30.0);
    let decreasing = widths.windows(2).all(|w| w[1] < w[0]);
    check(
        widths[2] <= 5e-4 && decreasing && fast,
        format!("widths at K=500/2000/5000: {:.2e} {:.2e} {:.2e}, {time}", widths[0], widths[1], widths[2]),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let op = operator(&synthetic(SyntheticKind::Icosphere(2)));
    let norm = op.normalize().unwrap();
    let lam = norm.lambda_max();
    let bank = FilterBank::design_dyadic(lam, 5, 5000, true).unwrap();
    let n = 8;
    let real = SignalSet::single_class(test_signals(n, op.n_vertices(), 44), "g").unwrap();
    let plan = PermutationPlan::random(n, bank.n_channels(), 4).unwrap();
    let fast = c_pda(&norm, &bank, &real, &plan).unwrap();

    let oracle = dense_oracle(&op);
    let channels: Vec<Array2<f64>> = real.data().outer_iter().map(|r| oracle.filter(&bank, lam, &r.to_vec())).collect();
    let mut exact = Array2::zeros(real.data().raw_dim());
    for i in 0..n {
        for c in 0..bank.n_channels() {
            let mut row = exact.row_mut(i);
            row += &channels[plan.source(c, i)].row(c);
        }
    }
    let err = max_abs_diff(fast.data(), &exact);
    let (quick, time) = within(start.elapsed(), 120.0);
    check(
        err < 1e-6 && quick,
        format!("max per-vertex difference {err:.1e} with {} channels at K=5000, {time}", bank.n_channels()),
    )
}

fn mean_preservation() -> Outcome {
    let start = Instant::now();
    let mesh = synthetic(SyntheticKind::Icosphere(3));
    let op = operator(&mesh);
    let patch = select_patch(&mesh, 0, 2).unwrap();
    let real = generate(&mesh, &SimulationConfig::new(250, 250, 0.6, patch, 5)).unwrap();
    let counts = vec![("0".to_string(), 250), ("1".to_string(), 250)];

    let basis = EigenBasis64::eigendecompose(&op, op.n_vertices()).unwrap();
    let lb = augment_dataset(&real, Method::LbEigDa(&basis), &counts, 9).unwrap();

    let norm = op.normalize().unwrap();
    let bank = FilterBank::design_dyadic(norm.lambda_max(), 5, 2000, true).unwrap();
    let cp = augment_dataset(&real, Method::CPda(&norm, &bank), &counts, 9).unwrap();
    let rec = SignalSet::new(bank.reconstruct(&norm, real.data().view()).unwrap(), real.labels().to_vec()).unwrap();

    let (mut lb_err, mut cp_err) = (0.0f64, 0.0f64);
    for label in ["0", "1"] {
        let want = class_means(&real, label);
        lb_err = (class_means(&lb, label) - &want).iter().fold(lb_err, |m, x| m.max(x.abs()));
        let want = class_means(&rec, label);
        cp_err = (class_means(&cp, label) - &want).iter().fold(cp_err, |m, x| m.max(x.abs()));
    }
    let (quick, time) = within(start.elapsed(), 300.0);
    check(
        lb_err < 1e-8 && cp_err < 1e-8 && quick,
        format!("LB-eigDA mean err {lb_err:.1e}, C-pDA mean err {cp_err:.1e} (500 signals), {time}"),
    )
}

fn dyadic_count() -> Outcome {
    let bank = FilterBank::design_dyadic(10.0, 5, 100, false).unwrap();
    let disjoint = bank.bands().windows(2).all(|w| w[0][1] <= w[1][0]);
    check(
        bank.n_bands() == 109 && bank.is_tiling() && disjoint,
        format!("{} bands, tiling {}, disjoint {disjoint}", bank.n_bands(), bank.is_tiling()),
    )
}

fn timing_shape() -> Outcome {
    let mesh = synthetic(SyntheticKind::UvSphere(50));
    let op = operator(&mesh);
    let v = op.n_vertices();
    let n = 16;
    let real = SignalSet::single_class(test_signals(n, v, 70), "g").unwrap();
    let norm = op.normalize().unwrap();

    let orders = [500usize, 1000, 2000, 4000];
    let trials = 3;
    let mut cp_times = Vec::new();
    for &k in &orders {
        let bank = FilterBank::design_dyadic(norm.lambda_max(), 5, k, true).unwrap();
        let plan = PermutationPlan::random(n, bank.n_channels(), 3).unwrap();
        let runs: Vec<f64> = (0..trials)
            .map(|_| {
                let t = Instant::now();
                c_pda(&norm, &bank, &real, &plan).unwrap();
                t.elapsed().as_secs_f64()
            })
            .collect();
        cp_times.push(median(&runs).unwrap());
    }
    let ks: Vec<f64> = orders.iter().map(|&k| k as f64).collect();
    let fit = affine_fit(&ks, &cp_times).unwrap();

    let modes = [500usize, 1000, 2000];
    let mut lb_times = Vec::new();
    for &j in &modes {
        let t = Instant::now();
        let basis = EigenBasis64::eigendecompose(&op, j).unwrap();
        let plan = PermutationPlan::random(n, j, 3).unwrap();
        lb_eig_da(&basis, &real, &plan).unwrap();
        lb_times.push(t.elapsed().as_secs_f64());
    }
    let lx: Vec<f64> = modes.iter().map(|&j| (j as f64).ln()).collect();
    let ly: Vec<f64> = lb_times.iter().map(|t| t.ln()).collect();
    let slope = affine_fit(&lx, &ly).unwrap().slope;

    let fmt = |xs: &[f64]| xs.iter().map(|t| format!("{t:.2}")).collect::<Vec<_>>().join("/");
    check(
        fit.r_squared >= 0.95 && slope > 1.0,
        format!(
            "V={v}: C-pDA {}s at K=500/1000/2000/4000, R^2 {:.4}; LB-eigDA {}s at J=500/1000/2000, log-log slope {slope:.2}",
            fmt(&cp_times),
            fit.r_squared,
            fmt(&lb_times)
        ),
    )
}

fn augmentation_fidelity() -> Outcome {
    let start = Instant::now();
    let mesh = synthetic(SyntheticKind::Icosphere(3));
    let op = operator(&mesh);
    let patch = select_patch(&mesh, 0, 2).unwrap();
    let real = generate(&mesh, &SimulationConfig::new(50, 50, 0.6, patch.clone(), 31)).unwrap();
    let counts = vec![("1".to_string(), 500)];

    let basis = EigenBasis64::eigendecompose(&op, op.n_vertices()).unwrap();
    let norm = op.normalize().unwrap();
    let bank = FilterBank::design_dyadic(norm.lambda_max(), 5, 1000, true).unwrap();
    let contrast = |set: &SignalSet64| {
        let means = set.data().mean_axis(Axis(0)).unwrap();
        let inside: Vec<bool> = (0..means.len()).map(|i| patch.contains(&i)).collect();
        let avg = |want: bool| {
            let vals: Vec<f64> = means.iter().zip(&inside).filter(|(_, &p)| p == want).map(|(m, _)| *m).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        avg(true) - avg(false)
    };
    let lb = augment_dataset(&real, Method::LbEigDa(&basis), &counts, 2).unwrap();
    let cp = augment_dataset(&real, Method::CPda(&norm, &bank), &counts, 2).unwrap();
    let (a, b) = (contrast(&lb), contrast(&cp));
    let ok = |c: f64| (0.9..=1.1).contains(&c);
    let (quick, time) = within(start.elapsed(), 300.0);
    check(
        ok(a) && ok(b) && quick,
        format!("group 1 patch contrast: LB-eigDA {a:.4}, C-pDA {b:.4} over 500 samples, {time}"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, operator_correctness),
        (2, coefficient_correctness),
        (3, filter_sharpness),
        (4, oracle_equivalence),
        (5, mean_preservation),
        (6, dyadic_count),
        (7, timing_shape),
        (9, augmentation_fidelity),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        let outcome = run();
        println!("criterion {id}: {} {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        if id == 7 {
            println!("criterion 8: NOT REPRODUCIBLE classifier accuracies need the CNN, which is out of scope");
        }
        failed += usize::from(!outcome.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
