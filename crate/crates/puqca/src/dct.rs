//! The density classification task: majority labels, the probabilistic
//! guessing function, exact fitness over every non-half-density
//! configuration, and the closed-form classical baseline.
//!
//! A rule classifies input b by evolving |b⟩ for t steps and reading the
//! excitation probability at one site p. The guess is +1 ("more ones")
//! when that probability clears 1/2 by the margin δ, −1 below it, and 0
//! in between; fitness is one minus the normalized mean absolute error
//! against the true majority over the whole valid set.

use rayon::prelude::*;
use std::sync::Arc;

use crate::model::{Configuration, PUQCARule};
use crate::statevector::{
    binomial, evolve, excitation_probability, BondRule, SectorState, SectorTables,
};
use crate::{Error, Result, TIE_TOLERANCE};

/// Task parameters: ring size, steps, measured site, and guess margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierSpec {
    pub n: usize,
    pub t: usize,
    pub p: usize,
    pub delta: f64,
}

impl ClassifierSpec {
    pub fn new(n: usize, t: usize, p: usize, delta: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::OddSize(n));
        }
        if p >= n {
            return Err(Error::SiteRange(p, n));
        }
        if !(0.0..0.5).contains(&delta) {
            return Err(Error::InvalidArgument(format!(
                "margin delta must lie in [0, 1/2), got {delta}"
            )));
        }
        Ok(Self { n, t, p, delta })
    }
}

/// Outcome of one exact (or sampled) fitness evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessReport {
    pub fitness: f64,
    /// Number of configurations evaluated.
    pub total: usize,
    /// Guesses opposite to the majority (error weight 2 each).
    pub wrong_count: usize,
    /// Abstentions, i.e. guess 0 on a decided input (error weight 1 each).
    pub half_error_count: usize,
    /// Inputs whose guess differed from the majority, in evaluation
    /// order, capped at [`MISCLASSIFIED_CAP`] entries.
    pub misclassified: Vec<Configuration>,
}

/// Cap on the stored misclassified list; the counts stay exact.
pub const MISCLASSIFIED_CAP: usize = 1000;

impl FitnessReport {
    fn from_outcomes(outcomes: impl IntoIterator<Item = (Configuration, i8, i8)>) -> Result<Self> {
        let mut total = 0usize;
        let mut wrong = 0usize;
        let mut half = 0usize;
        let mut misclassified = Vec::new();
        for (b, g, maj) in outcomes {
            total += 1;
            match (g - maj).unsigned_abs() {
                0 => {}
                err => {
                    if err == 2 {
                        wrong += 1;
                    } else {
                        half += 1;
                    }
                    if misclassified.len() < MISCLASSIFIED_CAP {
                        misclassified.push(b);
                    }
                }
            }
        }
        if total == 0 {
            return Err(Error::EmptySet);
        }
        let fitness = 1.0 - (2 * wrong + half) as f64 / (2 * total) as f64;
        Ok(Self {
            fitness,
            total,
            wrong_count: wrong,
            half_error_count: half,
            misclassified,
        })
    }
}

/// Majority label of a configuration: +1, −1, or 0 on a split vote.
pub fn majority(b: &Configuration) -> i8 {
    let ones = b.weight() as usize;
    let zeros = b.n() - ones;
    match ones.cmp(&zeros) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Cap on exhaustive enumeration (2^24 candidate words).
pub const ENUMERATION_CAP: usize = 24;

/// Every configuration with density ≠ 1/2, ascending by basis index.
pub fn enumerate_valid(n: usize) -> Result<Vec<Configuration>> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::OddSize(n));
    }
    if n > ENUMERATION_CAP {
        return Err(Error::SizeCap(n, ENUMERATION_CAP));
    }
    let half = (n / 2) as u32;
    Ok((0..1u64 << n)
        .filter(|w| w.count_ones() != half)
        .map(|w| Configuration::from_word(w, n).expect("word fits"))
        .collect())
}

/// Maps an excitation probability to a guess under margin `delta`.
pub fn guess_from_probability(pr: f64, delta: f64) -> i8 {
    if delta == 0.0 {
        if (pr - 0.5).abs() <= TIE_TOLERANCE {
            0
        } else if pr > 0.5 {
            1
        } else {
            -1
        }
    } else if pr >= 0.5 + delta {
        1
    } else if pr <= 0.5 - delta {
        -1
    } else {
        0
    }
}

/// Guess for one input under the given rule and task parameters.
pub fn guess(rule: &PUQCARule, b: &Configuration, spec: &ClassifierSpec) -> i8 {
    debug_assert_eq!(b.n(), spec.n);
    let psi = evolve(b, rule, spec.t);
    guess_from_probability(excitation_probability(&psi, spec.p), spec.delta)
}

/// Which state representation drives a fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Full 2^n statevector per input.
    Dense,
    /// Weight-sector evolution; default, and the only practical choice
    /// at n = 14.
    #[default]
    Sector,
}

/// Per-weight sector tables shared across one evaluation.
fn sector_table_set(n: usize) -> Vec<Option<Arc<SectorTables>>> {
    vec![None; n + 1]
}

/// Exact fitness of `rule` over `configs` (normally the full valid set).
pub fn fitness(
    rule: &PUQCARule,
    spec: &ClassifierSpec,
    configs: &[Configuration],
    backend: Backend,
) -> Result<FitnessReport> {
    match backend {
        Backend::Dense => fitness_from_probability(spec, configs, |b| {
            let psi = evolve(b, rule, spec.t);
            excitation_probability(&psi, spec.p)
        }),
        Backend::Sector => fitness_sector(rule, spec, configs),
    }
}

/// Shared report assembly: evaluates `probability` for every input in
/// parallel and folds the outcomes in input order, so reports are
/// deterministic under any thread schedule.
pub(crate) fn fitness_from_probability<F>(
    spec: &ClassifierSpec,
    configs: &[Configuration],
    probability: F,
) -> Result<FitnessReport>
where
    F: Fn(&Configuration) -> f64 + Sync,
{
    if configs.is_empty() {
        return Err(Error::EmptySet);
    }
    let outcomes: Vec<(Configuration, i8, i8)> = configs
        .par_iter()
        .map(|b| {
            let g = guess_from_probability(probability(b), spec.delta);
            (*b, g, majority(b))
        })
        .collect();
    FitnessReport::from_outcomes(outcomes)
}

/// Closed-form fitness of any classical permutation rule read at one
/// site: 1 − 𝒲/T with 𝒲 = 2^{n−1} − 2·C(n−1, n/2−1) and
/// T = 2^n − C(n, n/2).
pub fn classical_bound(n: usize) -> Result<f64> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::OddSize(n));
    }
    if n > 62 {
        return Err(Error::SizeCap(n, 62));
    }
    let t = (1u128 << n) - binomial(n, n / 2) as u128;
    let w = (1u128 << (n - 1)) - 2 * binomial(n - 1, n / 2 - 1) as u128;
    Ok(1.0 - w as f64 / t as f64)
}

/// Fitness estimated from `sample_size` draws (with replacement) out of
/// the valid set, with a normal-approximation 95% half-width.
pub struct SampledFitness {
    pub estimate: f64,
    pub half_width: f64,
    pub sample_size: usize,
}

pub fn sampled_fitness(
    rule: &PUQCARule,
    spec: &ClassifierSpec,
    sample_size: usize,
    seed: u64,
) -> Result<SampledFitness> {
    use rand::{Rng, SeedableRng};
    if sample_size == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    let valid = enumerate_valid(spec.n)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<Configuration> = (0..sample_size)
        .map(|_| valid[rng.random_range(0..valid.len())])
        .collect();
    let report = fitness_sector(rule, spec, &sample)?;
    // Per-input error is (|g − maj|)/2 ∈ {0, 1/2, 1}; treat as mean of a
    // bounded variable and report 1.96·σ/√N.
    let mean_err = 1.0 - report.fitness;
    let e2 = (report.wrong_count as f64 + 0.25 * report.half_error_count as f64)
        / report.total as f64;
    let var = (e2 - mean_err * mean_err).max(0.0);
    Ok(SampledFitness {
        estimate: report.fitness,
        half_width: 1.96 * (var / report.total as f64).sqrt(),
        sample_size,
    })
}

/// Exact fitness via the weight-sector fast path.
pub fn fitness_sector(
    rule: &PUQCARule,
    spec: &ClassifierSpec,
    configs: &[Configuration],
) -> Result<FitnessReport> {
    let bond = BondRule::from_rule(rule);
    let mut tables = sector_table_set(spec.n);
    for b in configs {
        let k = b.weight() as usize;
        if tables[k].is_none() {
            tables[k] = Some(SectorTables::build(spec.n, k));
        }
    }
    fitness_from_probability(spec, configs, move |b| {
        let k = b.weight() as usize;
        let tab = tables[k].as_ref().expect("tables prebuilt");
        let mut st = SectorState::from_configuration(b, tab);
        for _ in 0..spec.t {
            st.step_with(&bond);
        }
        st.excitation_probability(spec.p)
    })
}
