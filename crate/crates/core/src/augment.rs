//! Permutation augmentation: LB-eigDA and C-pDA.
//!
//! Both methods decompose every observation of one class into channels
//! (eigen-coefficients or bandpass components), then assemble new samples
//! by drawing each channel from a different observation. A plan holds one
//! permutation per channel; augmented row `i` takes channel `c` from source
//! observation `perms[c][i]`. Because every permutation uses each source
//! exactly once, channel sums over the batch are unchanged.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chebyshev::FilterBank;
use crate::error::{Error, Result};
use crate::operator::NormalizedOperator;
use crate::scalar::Scalar;
use crate::signal::{AugmentMethod, Provenance, SignalSet};
use crate::spectrum::EigenBasis;

/// Sources filtered concurrently before their channels are scattered.
const FILTER_BATCH: usize = 16;

/// Mix a base seed with two indices (splitmix64 finalizer over a combined word).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ b.wrapping_mul(0xc2b2_ae3d_27d4_eb4f).rotate_left(31);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationPlan {
    seed: u64,
    n: usize,
    perms: Vec<Vec<usize>>,
}

impl PermutationPlan {
    /// `channels` independent uniform permutations of `0..n`.
    pub fn random(n: usize, channels: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "permutation augmentation needs at least 2 observations, got {n}"
            )));
        }
        if channels == 0 {
            return Err(Error::InvalidArgument("plan needs at least one channel".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perms = (0..channels)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        Ok(PermutationPlan { seed, n, perms })
    }

    pub fn identity(n: usize, channels: usize) -> Self {
        PermutationPlan {
            seed: 0,
            n,
            perms: vec![(0..n).collect(); channels],
        }
    }

    /// Validate explicit permutations (gather convention).
    pub fn from_perms(perms: Vec<Vec<usize>>, seed: u64) -> Result<Self> {
        let n = perms.first().map_or(0, Vec::len);
        for (c, p) in perms.iter().enumerate() {
            let mut seen = vec![false; n];
            let ok = p.len() == n && p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true));
            if !ok {
                return Err(Error::InvalidArgument(format!("channel {c} is not a permutation of 0..{n}")));
            }
        }
        if perms.is_empty() {
            return Err(Error::InvalidArgument("plan needs at least one channel".into()));
        }
        Ok(PermutationPlan { seed, n, perms })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_observations(&self) -> usize {
        self.n
    }

    pub fn n_channels(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// Source of channel `c` for augmented row `i`.
    pub fn source(&self, channel: usize, row: usize) -> usize {
        self.perms[channel][row]
    }

    fn check(&self, n: usize, channels: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                what: "plan observations vs signals",
                expected: n,
                actual: self.n,
            });
        }
        if self.n_channels() != channels {
            return Err(Error::DimensionMismatch {
                what: "plan channels",
                expected: channels,
                actual: self.n_channels(),
            });
        }
        Ok(())
    }

    /// Scatter form: `inverse[c][s]` is the row receiving source `s` in channel `c`.
    fn inverse(&self) -> Vec<Vec<usize>> {
        self.perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; p.len()];
                for (row, &src) in p.iter().enumerate() {
                    inv[src] = row;
                }
                inv
            })
            .collect()
    }
}

fn single_class<T: Scalar>(real: &SignalSet<T>) -> Result<String> {
    let label = real.sole_class()?.to_string();
    if real.n_observations() < 2 {
        return Err(Error::TooFewObservations {
            label,
            count: real.n_observations(),
        });
    }
    Ok(label)
}

fn augmented<T: Scalar>(data: Array2<T>, label: &str, method: AugmentMethod, seed: u64) -> Result<SignalSet<T>> {
    let n = data.nrows();
    SignalSet::with_provenance(data, vec![label.to_string(); n], Provenance::Augmented { method, seed })
}

/// `f_{i'} = Σ_j c_j^{(τ_j(i))} ψ_j`, one channel per eigenfunction.
pub fn lb_eig_da<T: Scalar>(basis: &EigenBasis<T>, real: &SignalSet<T>, plan: &PermutationPlan) -> Result<SignalSet<T>> {
    let out = lb_eig_da_rounds(basis, real, std::slice::from_ref(plan))?;
    Ok(out.into_iter().next().expect("one plan"))
}

fn lb_eig_da_rounds<T: Scalar>(
    basis: &EigenBasis<T>,
    real: &SignalSet<T>,
    plans: &[PermutationPlan],
) -> Result<Vec<SignalSet<T>>> {
    let label = single_class(real)?;
    let n = real.n_observations();
    for plan in plans {
        plan.check(n, basis.n_modes())?;
    }
    let coeffs = basis.forward(real)?.0;
    plans
        .iter()
        .map(|plan| {
            let mut shuffled = Array2::zeros(coeffs.raw_dim());
            for (j, perm) in plan.perms.iter().enumerate() {
                for (i, &src) in perm.iter().enumerate() {
                    shuffled[[i, j]] = coeffs[[src, j]];
                }
            }
            let data = basis.inverse(&crate::spectrum::SpectralCoeffs(shuffled))?;
            augmented(data, &label, AugmentMethod::LbEigDa, plan.seed)
        })
        .collect()
}

fn check_lambda<T: Scalar>(op: &NormalizedOperator<'_, T>, bank: &FilterBank) -> Result<()> {
    let (a, b) = (op.lambda_max().as_f64(), bank.lambda_max());
    if (a - b).abs() > 1e-6 * a.abs().max(b.abs()) {
        return Err(Error::InvalidArgument(format!(
            "operator normalized by lambda_max {a} but bank designed for {b}"
        )));
    }
    Ok(())
}

/// `f_{i'} = h_0^{(τ_0(i))} + Σ_l (g_l(Δ̃) f)^{(τ_l(i))}` with the bank's channel
/// layout (mean first when enabled).
pub fn c_pda<T: Scalar>(
    op: &NormalizedOperator<'_, T>,
    bank: &FilterBank,
    real: &SignalSet<T>,
    plan: &PermutationPlan,
) -> Result<SignalSet<T>> {
    let out = c_pda_rounds(op, bank, real, std::slice::from_ref(plan))?;
    Ok(out.into_iter().next().expect("one plan"))
}

/// Each source is filtered once and its channels scattered into every plan's
/// output. Sources are processed in fixed batches and scattered in index
/// order, so results do not depend on the thread count.
fn c_pda_rounds<T: Scalar>(
    op: &NormalizedOperator<'_, T>,
    bank: &FilterBank,
    real: &SignalSet<T>,
    plans: &[PermutationPlan],
) -> Result<Vec<SignalSet<T>>> {
    let label = single_class(real)?;
    check_lambda(op, bank)?;
    let n = real.n_observations();
    let v = real.n_vertices();
    if v != op.n_vertices() {
        return Err(Error::DimensionMismatch {
            what: "signal vertices vs operator",
            expected: op.n_vertices(),
            actual: v,
        });
    }
    for plan in plans {
        plan.check(n, bank.n_channels())?;
    }
    let inverses: Vec<_> = plans.iter().map(PermutationPlan::inverse).collect();
    let theta = bank.theta_as::<T>();
    let mut outputs: Vec<Array2<T>> = plans.iter().map(|_| Array2::zeros((n, v))).collect();
    let data = real.data();
    for start in (0..n).step_by(FILTER_BATCH) {
        let end = (start + FILTER_BATCH).min(n);
        let filtered: Vec<Array2<T>> = (start..end)
            .into_par_iter()
            .map(|s| bank.filter_signal(op, &data.row(s).to_vec(), &theta))
            .collect::<Result<_>>()?;
        for (s, channels) in (start..end).zip(&filtered) {
            for (out, inv) in outputs.iter_mut().zip(&inverses) {
                for (c, row) in channels.axis_iter(Axis(0)).enumerate() {
                    let mut target = out.row_mut(inv[c][s]);
                    target += &row;
                }
            }
        }
    }
    outputs
        .into_iter()
        .zip(plans)
        .map(|(data, plan)| augmented(data, &label, AugmentMethod::CPda, plan.seed))
        .collect()
}

/// What to run per class in [`augment_dataset`].
#[derive(Debug, Clone, Copy)]
pub enum Method<'a, 'b, T> {
    LbEigDa(&'a EigenBasis<T>),
    CPda(&'a NormalizedOperator<'b, T>, &'a FilterBank),
}

impl<T> Method<'_, '_, T> {
    pub fn kind(&self) -> AugmentMethod {
        match self {
            Method::LbEigDa(_) => AugmentMethod::LbEigDa,
            Method::CPda(..) => AugmentMethod::CPda,
        }
    }
}

/// Augment every class separately. `counts` lists `(label, samples)`; classes
/// not listed are skipped. A class of size `n` needs `ceil(count/n)` plan
/// rounds, round `r` of class `c` (index in first-appearance order) seeded
/// with `derive_seed(seed, c, r)`; the last round is truncated.
pub fn augment_dataset<T: Scalar>(
    real: &SignalSet<T>,
    method: Method<'_, '_, T>,
    counts: &[(String, usize)],
    seed: u64,
) -> Result<SignalSet<T>> {
    let classes = real.split_by_class();
    let mut parts = Vec::new();
    for (label, want) in counts {
        let (index, subset) = classes
            .iter()
            .enumerate()
            .find(|(_, (c, _))| c == label)
            .map(|(i, (_, s))| (i, s))
            .ok_or_else(|| Error::InvalidArgument(format!("class '{label}' not present in input")))?;
        if *want == 0 {
            continue;
        }
        let n = subset.n_observations();
        if n < 2 {
            return Err(Error::TooFewObservations {
                label: label.clone(),
                count: n,
            });
        }
        let channels = match method {
            Method::LbEigDa(basis) => basis.n_modes(),
            Method::CPda(_, bank) => bank.n_channels(),
        };
        let rounds = want.div_ceil(n);
        let plans = (0..rounds)
            .map(|r| PermutationPlan::random(n, channels, derive_seed(seed, index as u64, r as u64)))
            .collect::<Result<Vec<_>>>()?;
        let sets = match method {
            Method::LbEigDa(basis) => lb_eig_da_rounds(basis, subset, &plans)?,
            Method::CPda(op, bank) => c_pda_rounds(op, bank, subset, &plans)?,
        };
        let all = SignalSet::concat(&sets)?;
        parts.push(all.select(&(0..*want).collect::<Vec<_>>()));
    }
    if parts.is_empty() {
        return Err(Error::InvalidArgument("no augmented samples requested".into()));
    }
    let joined = SignalSet::concat(&parts)?;
    SignalSet::with_provenance(
        joined.data().clone(),
        joined.labels().to_vec(),
        Provenance::Augmented {
            method: method.kind(),
            seed,
        },
    )
}
