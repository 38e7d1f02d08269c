//! Genetic search over weight vectors in `[-1, 1]^c`, refined by a compass
//! pattern search from the best individual found.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{CostMatrix, ScoreMatrix};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

use super::{check_problem, objective_unchecked, WeightVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    /// Probability that a child is produced by uniform crossover rather
    /// than copied from its first parent.
    pub crossover_rate: f64,
    pub mutation_sigma: f64,
    /// Per-gene mutation probability; `None` means `1 / c`.
    pub mutation_rate: Option<f64>,
    pub tournament_size: usize,
    pub elitism: usize,
    /// Put the all-ones vector (plain argmax) in the initial population.
    pub seed_with_ones: bool,
    pub bound: f64,
    pub pattern_initial_step: f64,
    pub pattern_min_step: f64,
    pub pattern_max_sweeps: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 100,
            crossover_rate: 0.8,
            mutation_sigma: 0.1,
            mutation_rate: None,
            tournament_size: 2,
            elitism: 1,
            seed_with_ones: true,
            bound: 1.0,
            pattern_initial_step: 0.25,
            pattern_min_step: 1e-4,
            pattern_max_sweeps: 200,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("GA config: {m}")));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be positive");
        }
        if self.elitism >= self.population {
            return bad("elitism must be smaller than the population");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover rate must be in [0, 1]");
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return bad("mutation rate must be in [0, 1]");
            }
        }
        if !(self.mutation_sigma >= 0.0 && self.mutation_sigma.is_finite()) {
            return bad("mutation sigma must be non-negative");
        }
        if !(self.bound > 0.0 && self.bound.is_finite()) {
            return bad("search bound must be positive");
        }
        if !(self.pattern_initial_step > 0.0 && self.pattern_min_step > 0.0) {
            return bad("pattern search steps must be positive");
        }
        Ok(())
    }
}

/// Result of a GA run with the objective at each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub weights: WeightVector,
    pub objective: f64,
    /// Best objective before pattern search.
    pub ga_objective: f64,
    /// Best objective in the initial population.
    pub initial_objective: f64,
}

struct Problem<'a> {
    scores: &'a ScoreMatrix,
    labels: &'a [usize],
    costs: &'a CostMatrix,
}

impl Problem<'_> {
    fn eval(&self, w: &[f64]) -> f64 {
        if w.iter().all(|&v| v == 0.0) {
            return f64::INFINITY;
        }
        objective_unchecked(self.scores, self.labels, self.costs, w)
    }
}

#[derive(Clone)]
struct Individual {
    genes: Vec<f64>,
    fitness: f64,
}

fn tournament<'a>(pop: &'a [Individual], size: usize, rng: &mut impl Rng) -> &'a Individual {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..size {
        let other = &pop[rng.random_range(0..pop.len())];
        if other.fitness < best.fitness {
            best = other;
        }
    }
    best
}

/// Compass search: try `+step` then `-step` on each coordinate, keep strict
/// improvements, halve the step after a sweep without one.
fn pattern_search(problem: &Problem, start: Individual, config: &GaConfig) -> Individual {
    let mut current = start;
    let mut step = config.pattern_initial_step;
    for _ in 0..config.pattern_max_sweeps {
        if step < config.pattern_min_step {
            break;
        }
        let mut improved = false;
        for d in 0..current.genes.len() {
            for sign in [1.0, -1.0] {
                let old = current.genes[d];
                let moved = (old + sign * step).clamp(-config.bound, config.bound);
                if moved == old {
                    continue;
                }
                current.genes[d] = moved;
                let f = problem.eval(&current.genes);
                if f < current.fitness {
                    current.fitness = f;
                    improved = true;
                    break;
                }
                current.genes[d] = old;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    current
}

/// Full GA + pattern search run, deterministic given `seed`.
pub fn ga_search(
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
    config: &GaConfig,
    seed: u64,
) -> Result<GaOutcome> {
    check_problem(scores, labels, costs)?;
    config.validate()?;
    let c = scores.class_count();
    let problem = Problem {
        scores,
        labels,
        costs,
    };
    let mut rng = rng_from_seed(seed);
    let bound = config.bound;
    let mutation_rate = config.mutation_rate.unwrap_or(1.0 / c as f64);
    let noise = Normal::new(0.0, config.mutation_sigma)
        .map_err(|e| Error::invalid(format!("GA mutation: {e}")))?;

    let mut pop: Vec<Individual> = (0..config.population)
        .map(|k| {
            let genes: Vec<f64> = if k == 0 && config.seed_with_ones {
                vec![bound.min(1.0); c]
            } else {
                (0..c).map(|_| rng.random_range(-bound..=bound)).collect()
            };
            let fitness = problem.eval(&genes);
            Individual { genes, fitness }
        })
        .collect();

    let best_of = |pop: &[Individual]| -> Individual {
        let mut best = &pop[0];
        for ind in &pop[1..] {
            if ind.fitness < best.fitness {
                best = ind;
            }
        }
        best.clone()
    };
    let mut best = best_of(&pop);
    let initial_objective = best.fitness;

    for _ in 0..config.generations {
        let mut ranked: Vec<usize> = (0..pop.len()).collect();
        ranked.sort_by(|&a, &b| pop[a].fitness.total_cmp(&pop[b].fitness).then(a.cmp(&b)));
        let mut next: Vec<Individual> = ranked[..config.elitism]
            .iter()
            .map(|&i| pop[i].clone())
            .collect();
        while next.len() < config.population {
            let p1 = tournament(&pop, config.tournament_size, &mut rng);
            let p2 = tournament(&pop, config.tournament_size, &mut rng);
            let mut genes = if rng.random::<f64>() < config.crossover_rate {
                p1.genes
                    .iter()
                    .zip(&p2.genes)
                    .map(|(&a, &b)| if rng.random::<bool>() { a } else { b })
                    .collect()
            } else {
                p1.genes.clone()
            };
            for g in &mut genes {
                if rng.random::<f64>() < mutation_rate {
                    *g = (*g + noise.sample(&mut rng)).clamp(-bound, bound);
                }
            }
            let fitness = problem.eval(&genes);
            next.push(Individual { genes, fitness });
        }
        pop = next;
        let gen_best = best_of(&pop);
        if gen_best.fitness < best.fitness {
            best = gen_best;
        }
    }

    let ga_objective = best.fitness;
    let refined = pattern_search(&problem, best, config);
    if !refined.fitness.is_finite() {
        return Err(Error::Numerical("GA found no valid weight vector".into()));
    }
    Ok(GaOutcome {
        weights: WeightVector::new(refined.genes)?,
        objective: refined.fitness,
        ga_objective,
        initial_objective,
    })
}

pub fn ga_optimize(
    scores: &ScoreMatrix,
    labels: &[usize],
    costs: &CostMatrix,
    config: &GaConfig,
    seed: u64,
) -> Result<WeightVector> {
    ga_search(scores, labels, costs, config, seed).map(|o| o.weights)
}
