//! Evolutionary rule search: roulette-wheel selection and per-gene
//! Gaussian mutation, no crossover. A chromosome is the flat angle
//! vector of one rule — eight genes (θ, ξ, γ, α per gate) in the full
//! regime, six (θ, ξ, γ per gate) in the fermionic one.
//!
//! Determinism: three ChaCha8 streams derived from the seed (0 = init,
//! 1 = selection, 2 = mutation) are consumed in a fixed order on the
//! control thread, so parallel fitness evaluation cannot perturb the
//! trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::dct::{self, Backend, ClassifierSpec};
use crate::fermion::{self, Boundary};
use crate::model::{wrap_angle, Configuration, FermionRule, GateParams, PUQCARule, RuleSpec};
use crate::{Error, Result, TIE_TOLERANCE};

/// Which rule family the chromosome encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RuleMode {
    #[default]
    Full,
    Fermionic,
}

impl RuleMode {
    pub fn gene_count(self) -> usize {
        match self {
            RuleMode::Full => 8,
            RuleMode::Fermionic => 6,
        }
    }
}

/// How a multi-size objective folds the per-size fitness values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Mean,
    Min,
}

/// Fitness target: one or more (n, t) pairs read at site p with margin δ.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub mode: RuleMode,
    pub sizes: Vec<(usize, usize)>,
    pub p: usize,
    pub delta: f64,
    pub aggregation: Aggregation,
    /// Boundary grid for fermionic evaluation; the exact weight-parity
    /// grid unless the caller wants the fixed-grid approximation.
    pub boundary: Boundary,
}

impl ObjectiveSpec {
    pub fn single(mode: RuleMode, n: usize, t: usize, p: usize, delta: f64) -> Self {
        Self {
            mode,
            sizes: vec![(n, t)],
            p,
            delta,
            aggregation: Aggregation::Mean,
            boundary: Boundary::default(),
        }
    }
}

/// Mean-of-sizes objective over the given (n, t) list.
pub fn multi_size_objective(
    mode: RuleMode,
    sizes: &[(usize, usize)],
    p: usize,
    delta: f64,
) -> ObjectiveSpec {
    ObjectiveSpec {
        mode,
        sizes: sizes.to_vec(),
        p,
        delta,
        aggregation: Aggregation::Mean,
        boundary: Boundary::default(),
    }
}

/// One chromosome with its cached fitness (unset until evaluated or
/// after any gene changes).
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(genes: Vec<f64>) -> Self {
        Self {
            genes,
            fitness: None,
        }
    }

    pub fn to_rule(&self, mode: RuleMode) -> Result<RuleSpec> {
        let want = mode.gene_count();
        if self.genes.len() != want {
            return Err(Error::InvalidArgument(format!(
                "chromosome has {} genes, mode needs {want}",
                self.genes.len()
            )));
        }
        let g = &self.genes;
        Ok(match mode {
            RuleMode::Full => RuleSpec::Full(PUQCARule::new(
                GateParams::new(g[0], g[3], g[2], g[1], 0.0),
                GateParams::new(g[4], g[7], g[6], g[5], 0.0),
            )),
            RuleMode::Fermionic => RuleSpec::Fermionic(FermionRule::new(
                g[0], g[1], g[2], g[3], g[4], g[5],
            )),
        })
    }
}

pub type Population = Vec<Individual>;

#[derive(Debug, Clone, PartialEq)]
pub struct GAConfig {
    pub population_size: usize,
    pub max_generations: usize,
    /// Per-gene mutation probability.
    pub p_m: f64,
    /// Mutation standard deviation (radians).
    pub sigma: f64,
    pub seed: u64,
    /// Copy the previous best unchanged into each new generation.
    pub elitism: bool,
    pub objective: ObjectiveSpec,
}

impl GAConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidArgument(format!(
                "population size must be at least 2, got {}",
                self.population_size
            )));
        }
        if !(0.0..=1.0).contains(&self.p_m) {
            return Err(Error::InvalidArgument(format!(
                "mutation rate must lie in [0, 1], got {}",
                self.p_m
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mutation sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.objective.sizes.is_empty() {
            return Err(Error::InvalidArgument(
                "objective needs at least one (n, t) pair".into(),
            ));
        }
        Ok(())
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seeded uniform population, every gene in [0, 2π).
pub fn init_population(cfg: &GAConfig) -> Result<Population> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, 0);
    let genes = cfg.objective.mode.gene_count();
    Ok((0..cfg.population_size)
        .map(|_| Individual::new((0..genes).map(|_| rng.random_range(0.0..TAU)).collect()))
        .collect())
}

/// Same-size pool sampled with replacement, probability fᵢ/Σf. All-zero
/// fitness degenerates to uniform sampling.
pub fn roulette_select(pop: &[Individual], rng: &mut ChaCha8Rng) -> Result<Population> {
    let mut weights = Vec::with_capacity(pop.len());
    for ind in pop {
        match ind.fitness {
            Some(f) if f >= 0.0 => weights.push(f),
            Some(f) => {
                return Err(Error::InvalidArgument(format!(
                    "roulette needs nonnegative fitness, got {f}"
                )))
            }
            None => {
                return Err(Error::InvalidArgument(
                    "roulette needs every fitness evaluated".into(),
                ))
            }
        }
    }
    let total: f64 = weights.iter().sum();
    let pick = |rng: &mut ChaCha8Rng| -> usize {
        if total <= 0.0 {
            return rng.random_range(0..pop.len());
        }
        let mut ball = rng.random_range(0.0..total);
        for (i, w) in weights.iter().enumerate() {
            if ball < *w {
                return i;
            }
            ball -= w;
        }
        pop.len() - 1
    };
    Ok((0..pop.len()).map(|_| pop[pick(rng)].clone()).collect())
}

/// Independent per-gene mutation: with probability p_m the gene moves by
/// N(0, σ²) and is wrapped back into [0, 2π). Visit order is
/// individual-major, gene-minor, so a seed fixes the trajectory.
pub fn mutate(pop: &mut Population, p_m: f64, sigma: f64, rng: &mut ChaCha8Rng) {
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    for ind in pop.iter_mut() {
        for g in ind.genes.iter_mut() {
            if rng.random::<f64>() < p_m {
                *g = wrap_angle(*g + normal.sample(rng));
                ind.fitness = None;
            }
        }
    }
}

/// Exact-fitness evaluator with the per-size input sets built once.
pub struct PreparedObjective {
    objective: ObjectiveSpec,
    inputs: Vec<(ClassifierSpec, Arc<Vec<Configuration>>)>,
}

impl PreparedObjective {
    pub fn new(objective: &ObjectiveSpec) -> Result<Self> {
        if objective.sizes.is_empty() {
            return Err(Error::InvalidArgument(
                "objective needs at least one (n, t) pair".into(),
            ));
        }
        let mut inputs = Vec::with_capacity(objective.sizes.len());
        for &(n, t) in &objective.sizes {
            let spec = ClassifierSpec::new(n, t, objective.p, objective.delta)?;
            inputs.push((spec, Arc::new(dct::enumerate_valid(n)?)));
        }
        Ok(Self {
            objective: objective.clone(),
            inputs,
        })
    }

    /// Aggregated fitness of one chromosome.
    pub fn evaluate(&self, genes: &[f64]) -> Result<f64> {
        let ind = Individual::new(genes.to_vec());
        let rule = ind.to_rule(self.objective.mode)?;
        let mut values = Vec::with_capacity(self.inputs.len());
        for (spec, configs) in &self.inputs {
            let f = match (&rule, self.objective.mode) {
                (RuleSpec::Full(r), _) => {
                    dct::fitness(r, spec, configs, Backend::Sector)?.fitness
                }
                (RuleSpec::Fermionic(fr), _) => {
                    fermion::fermion_fitness_over(fr, spec, configs, self.objective.boundary)?
                        .fitness
                }
            };
            values.push(f);
        }
        Ok(match self.objective.aggregation {
            Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregation::Min => values.iter().cloned().fold(f64::INFINITY, f64::min),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStat {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: Individual,
    /// Best/mean fitness per generation, entry 0 = initial population.
    pub history: Vec<GenerationStat>,
    pub generations_run: usize,
    /// True iff some individual hit F = 1 within the tie tolerance.
    pub solved: bool,
}

fn evaluate_population<F>(pop: &mut Population, objective: &F) -> Result<()>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let fresh: Vec<(usize, f64)> = pop
        .par_iter()
        .enumerate()
        .filter(|(_, ind)| ind.fitness.is_none())
        .map(|(i, ind)| objective(&ind.genes).map(|f| (i, f)))
        .collect::<Result<_>>()?;
    for (i, f) in fresh {
        pop[i].fitness = Some(f);
    }
    Ok(())
}

fn stat_of(generation: usize, pop: &[Individual]) -> GenerationStat {
    let mut best = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for ind in pop {
        let f = ind.fitness.expect("population evaluated");
        best = best.max(f);
        sum += f;
    }
    GenerationStat {
        generation,
        best_fitness: best,
        mean_fitness: sum / pop.len() as f64,
    }
}

fn best_of(pop: &[Individual]) -> &Individual {
    pop.iter()
        .max_by(|a, b| {
            a.fitness
                .unwrap_or(f64::NEG_INFINITY)
                .total_cmp(&b.fitness.unwrap_or(f64::NEG_INFINITY))
        })
        .expect("population nonempty")
}

fn solved(pop: &[Individual]) -> bool {
    pop.iter()
        .any(|ind| ind.fitness.unwrap_or(0.0) >= 1.0 - TIE_TOLERANCE)
}

/// Full search loop against the configured exact objective.
pub fn evolve_search(cfg: &GAConfig) -> Result<SearchOutcome> {
    let prepared = PreparedObjective::new(&cfg.objective)?;
    evolve_search_with(cfg, |genes| prepared.evaluate(genes))
}

/// Search loop with a caller-supplied objective (used for testing and
/// custom targets). The objective must be pure.
pub fn evolve_search_with<F>(cfg: &GAConfig, objective: F) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let mut pop = init_population(cfg)?;
    let mut select_rng = stream_rng(cfg.seed, 1);
    let mut mutate_rng = stream_rng(cfg.seed, 2);
    evaluate_population(&mut pop, &objective)?;
    let mut history = vec![stat_of(0, &pop)];
    let mut generation = 0;
    while generation < cfg.max_generations && !solved(&pop) {
        let elite = cfg.elitism.then(|| best_of(&pop).clone());
        let mut next = roulette_select(&pop, &mut select_rng)?;
        mutate(&mut next, cfg.p_m, cfg.sigma, &mut mutate_rng);
        if let Some(elite) = elite {
            next[0] = elite;
        }
        evaluate_population(&mut next, &objective)?;
        pop = next;
        generation += 1;
        history.push(stat_of(generation, &pop));
    }
    Ok(SearchOutcome {
        best: best_of(&pop).clone(),
        history,
        generations_run: generation,
        solved: solved(&pop),
    })
}
