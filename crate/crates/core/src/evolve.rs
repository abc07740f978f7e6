//! Seeded evolutionary sandbox: a population of agents mutates its coder
//! and decoder matrices under selection for pairwise communicative payoff.
//!
//! Each generation every agent is scored by the mean symmetric measure it
//! achieves with every other agent. The `elitism` best agents survive
//! unchanged (ties go to the lower index) and the remainder is refilled by
//! fitness-proportional parent selection followed by row-wise mutation.
//!
//! Because fitness is relative to the whole population, survival alone does
//! not keep the best score from falling when the others change. With
//! `elitism >= 1` a candidate generation whose best fitness falls below the
//! current one is redrawn, up to [`MAX_REDRAWS`] times; if every draw falls
//! short the population is carried over unchanged. Max fitness is therefore
//! non-decreasing exactly.

use std::fmt::Write as _;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::measures::pipeline_report;
use crate::sample::random_agent;
use crate::system::{Agent, Distribution, Label, Role, StochasticMatrix};

/// Candidate generations drawn before the population is carried over as is.
pub const MAX_REDRAWS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fitness {
    /// Mean consistently-decoded fraction, averaged over both directions.
    #[serde(rename = "payoff")]
    PayoffF,
    /// Mean consistent information (bits), averaged over both directions.
    #[serde(rename = "consistent_info")]
    ConsistentInfoF,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Probability that a given matrix row is perturbed.
    pub mutation_rate: f64,
    /// Half-width of the uniform additive perturbation per entry.
    pub mutation_scale: f64,
    pub fitness: Fitness,
    pub elitism: usize,
    pub seed: u64,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CoreError::InvalidConfig(msg));
        if self.population_size < 2 {
            return Err(CoreError::PopulationTooSmall(self.population_size));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad(format!("mutation_rate {} is outside [0, 1]", self.mutation_rate));
        }
        if !self.mutation_scale.is_finite() || self.mutation_scale < 0.0 {
            return bad(format!("mutation_scale {} must be finite and >= 0", self.mutation_scale));
        }
        if self.elitism >= self.population_size {
            return bad(format!(
                "elitism {} must be smaller than population_size {}",
                self.elitism, self.population_size
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    agents: Vec<Agent>,
    world: Distribution,
    channel: StochasticMatrix,
    pub generation: usize,
}

impl Population {
    pub fn new(agents: Vec<Agent>, world: Distribution, channel: StochasticMatrix) -> Result<Self> {
        if agents.len() < 2 {
            return Err(CoreError::PopulationTooSmall(agents.len()));
        }
        if world.label() != Label::World {
            return Err(CoreError::InvalidConfig(
                "the world distribution must carry the World label".into(),
            ));
        }
        if channel.role() != Role::Channel {
            return Err(CoreError::RoleMismatch {
                expected: "channel",
                found: "non-channel",
            });
        }
        let n = world.len();
        for found in std::iter::once(channel.dim()).chain(agents.iter().map(Agent::dim)) {
            if found != n {
                return Err(CoreError::DimensionMismatch { expected: n, found });
            }
        }
        Ok(Population {
            agents,
            world,
            channel,
            generation: 0,
        })
    }

    /// `size` agents with flat-Dirichlet coder and decoder rows.
    pub fn random<R: Rng + ?Sized>(
        size: usize,
        world: Distribution,
        channel: StochasticMatrix,
        rng: &mut R,
    ) -> Result<Self> {
        let n = world.len();
        let agents = (0..size).map(|i| random_agent(format!("a{i}"), n, rng)).collect();
        Self::new(agents, world, channel)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn world(&self) -> &Distribution {
        &self.world
    }

    pub fn channel(&self) -> &StochasticMatrix {
        &self.channel
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PairScore {
    payoff: f64,
    consistent: f64,
    sigma: f64,
}

fn pair_score(world: &Distribution, channel: &StochasticMatrix, a: &Agent, b: &Agent) -> PairScore {
    let fwd = pipeline_report(world, a.coder(), channel, b.decoder()).expect("population dimensions validated");
    let bwd = pipeline_report(world, b.coder(), channel, a.decoder()).expect("population dimensions validated");
    PairScore {
        payoff: 0.5 * (fwd.payoff_fraction + bwd.payoff_fraction),
        consistent: 0.5 * (fwd.consistent_info + bwd.consistent_info),
        sigma: 0.5 * (fwd.sigma + bwd.sigma),
    }
}

/// Per-generation summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub mean_fitness: f64,
    pub max_fitness: f64,
    /// Mean over agent pairs of the direction-averaged σ.
    pub mean_sigma: f64,
    /// Mean over agent pairs of the average consistent information.
    pub mean_consistent: f64,
}

#[derive(Debug, Clone)]
struct Evaluation {
    fitness: Vec<f64>,
    mean_fitness: f64,
    max_fitness: f64,
    mean_sigma: f64,
    mean_consistent: f64,
}

impl Evaluation {
    fn record(&self, generation: usize) -> GenerationRecord {
        GenerationRecord {
            generation,
            mean_fitness: self.mean_fitness,
            max_fitness: self.max_fitness,
            mean_sigma: self.mean_sigma,
            mean_consistent: self.mean_consistent,
        }
    }
}

fn evaluate(pop: &Population, fitness: Fitness) -> Evaluation {
    let m = pop.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    // collect() keeps pair order, so the reductions below are order-stable.
    let scores: Vec<PairScore> = pairs
        .par_iter()
        .map(|&(i, j)| pair_score(&pop.world, &pop.channel, &pop.agents[i], &pop.agents[j]))
        .collect();

    let pick = |s: &PairScore| match fitness {
        Fitness::PayoffF => s.payoff,
        Fitness::ConsistentInfoF => s.consistent,
    };
    let mut totals = vec![0.0; m];
    for (&(i, j), s) in pairs.iter().zip(&scores) {
        totals[i] += pick(s);
        totals[j] += pick(s);
    }
    let fitness: Vec<f64> = totals.iter().map(|t| t / (m - 1) as f64).collect();
    let n_pairs = scores.len() as f64;
    Evaluation {
        mean_fitness: fitness.iter().sum::<f64>() / m as f64,
        max_fitness: fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_sigma: scores.iter().map(|s| s.sigma).sum::<f64>() / n_pairs,
        mean_consistent: scores.iter().map(|s| s.consistent).sum::<f64>() / n_pairs,
        fitness,
    }
}

/// Mean symmetric measure between agent `index` and every other agent.
pub fn agent_fitness(index: usize, population: &Population, fitness: Fitness) -> Result<f64> {
    let m = population.len();
    if m < 2 {
        return Err(CoreError::PopulationTooSmall(m));
    }
    if index >= m {
        return Err(CoreError::InvalidConfig(format!(
            "agent index {index} out of range for a population of {m}"
        )));
    }
    let me = &population.agents[index];
    let total: f64 = (0..m)
        .filter(|&j| j != index)
        .map(|j| {
            let s = pair_score(&population.world, &population.channel, me, &population.agents[j]);
            match fitness {
                Fitness::PayoffF => s.payoff,
                Fitness::ConsistentInfoF => s.consistent,
            }
        })
        .sum();
    Ok(total / (m - 1) as f64)
}

/// Fitness of every agent, in index order.
pub fn population_fitness(population: &Population, fitness: Fitness) -> Vec<f64> {
    evaluate(population, fitness).fitness
}

fn mutate_matrix<R: Rng + ?Sized>(m: &StochasticMatrix, rate: f64, scale: f64, rng: &mut R) -> StochasticMatrix {
    let n = m.dim();
    let mut data = m.data().to_vec();
    for row in data.chunks_exact_mut(n) {
        if !rng.gen_bool(rate) {
            continue;
        }
        let perturbed: Vec<f64> = row
            .iter()
            .map(|&v| (v + rng.gen_range(-scale..=scale)).clamp(0.0, 1.0))
            .collect();
        let sum: f64 = perturbed.iter().sum();
        // An all-zero row has no direction to renormalize along; keep the old one.
        if sum > 0.0 {
            for (dst, v) in row.iter_mut().zip(perturbed) {
                *dst = v / sum;
            }
        }
    }
    StochasticMatrix::from_raw(n, data, m.role())
}

/// Perturbs each row of both matrices independently with probability
/// `mutation_rate`, then clamps to `[0, 1]` and renormalizes.
pub fn mutate<R: Rng + ?Sized>(agent: &Agent, config: &EvolutionConfig, rng: &mut R) -> Agent {
    if config.mutation_rate == 0.0 || config.mutation_scale == 0.0 {
        return agent.clone();
    }
    let coder = mutate_matrix(agent.coder(), config.mutation_rate, config.mutation_scale, rng);
    let decoder = mutate_matrix(agent.decoder(), config.mutation_rate, config.mutation_scale, rng);
    agent.with_matrices(coder, decoder)
}

fn ranked(fitness: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitness.len()).collect();
    idx.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    idx
}

fn offspring<R: Rng + ?Sized>(
    pop: &Population,
    fitness: &[f64],
    config: &EvolutionConfig,
    generation: usize,
    rng: &mut R,
) -> Vec<Agent> {
    let m = pop.len();
    let mut next: Vec<Agent> = ranked(fitness)
        .into_iter()
        .take(config.elitism)
        .map(|i| pop.agents[i].clone())
        .collect();
    let weights = WeightedIndex::new(fitness).ok();
    while next.len() < m {
        let parent = match &weights {
            Some(w) => w.sample(rng),
            // every fitness is zero
            None => rng.gen_range(0..m),
        };
        let mut child = mutate(&pop.agents[parent], config, rng);
        child.id = format!("g{generation}.{}", next.len());
        next.push(child);
    }
    next
}

/// Per-generation statistics plus the seed that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    pub records: Vec<GenerationRecord>,
}

impl Trajectory {
    /// Comma-separated export: a `# seed = ...` comment, a header line, then
    /// one row per generation at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# seed = {}", self.seed).unwrap();
        out.push_str("generation,mean_fitness,max_fitness,mean_sigma,mean_F\n");
        for r in &self.records {
            writeln!(
                out,
                "{},{:?},{:?},{:?},{:?}",
                r.generation, r.mean_fitness, r.max_fitness, r.mean_sigma, r.mean_consistent
            )
            .unwrap();
        }
        out
    }

    pub fn initial(&self) -> &GenerationRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &GenerationRecord {
        self.records.last().expect("trajectory always holds the initial record")
    }
}

pub fn evolve(initial: Population, config: &EvolutionConfig) -> Result<(Trajectory, Population)> {
    config.validate()?;
    if initial.len() != config.population_size {
        return Err(CoreError::InvalidConfig(format!(
            "population has {} agents but population_size is {}",
            initial.len(),
            config.population_size
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pop = initial;
    let start = pop.generation;
    let mut eval = evaluate(&pop, config.fitness);
    let mut records = Vec::with_capacity(config.generations + 1);
    records.push(eval.record(start));

    for step in 1..=config.generations {
        let generation = start + step;
        let attempts = if config.elitism >= 1 { MAX_REDRAWS } else { 1 };
        for _ in 0..attempts {
            let agents = offspring(&pop, &eval.fitness, config, generation, &mut rng);
            let candidate = Population {
                agents,
                world: pop.world.clone(),
                channel: pop.channel.clone(),
                generation,
            };
            let cand_eval = evaluate(&candidate, config.fitness);
            if config.elitism == 0 || cand_eval.max_fitness >= eval.max_fitness {
                pop = candidate;
                eval = cand_eval;
                break;
            }
        }
        pop.generation = generation;
        records.push(eval.record(generation));
    }

    Ok((
        Trajectory {
            seed: config.seed,
            records,
        },
        pop,
    ))
}
