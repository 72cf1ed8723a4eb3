//! Real-coded genetic algorithm.
//!
//! Tournament selection, blend (BLX-alpha) crossover on a fixed fraction of
//! the offspring, clipped Gaussian mutation on the rest, elitism, and a
//! stall-based stopping rule. Every random draw for child `i` of generation
//! `g` comes from its own ChaCha stream keyed by `(seed, g, i)`, so results
//! do not depend on how evaluation is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};

const TOURNAMENT_SIZE: usize = 3;
const BLEND_ALPHA: f64 = 0.5;
/// Gaussian steps are clipped to this many standard deviations.
const STEP_CLIP: f64 = 3.0;
/// Mutation scale decays geometrically to this fraction at the last generation.
const FINAL_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_fraction: f64,
    pub elite_count: usize,
    /// Initial Gaussian step as a fraction of each gene's range.
    pub mutation_scale: f64,
    pub function_tolerance: f64,
    pub stall_generations: usize,
    pub penalty_weight: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl GaConfig {
    /// Small preset for interactive runs and CI.
    pub fn desk() -> Self {
        Self {
            population: 200,
            generations: 200,
            crossover_fraction: 0.87,
            elite_count: 10,
            mutation_scale: 0.1,
            function_tolerance: 1e-7,
            stall_generations: 50,
            penalty_weight: 1e3,
            seed: 1,
        }
    }

    /// Full-size preset: population 1700, 1000 generations, crossover 0.87,
    /// tolerance 1e-7.
    pub fn paper() -> Self {
        Self {
            population: 1700,
            generations: 1000,
            elite_count: 85,
            ..Self::desk()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "paper" => Ok(Self::paper()),
            other => Err(IsacError::Config(format!(
                "unknown preset '{other}' (expected desk or paper)"
            ))),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(IsacError::Config(format!(
                "population must be at least 2, got {}",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_fraction) {
            return Err(IsacError::Config(format!(
                "crossover_fraction must lie in [0, 1], got {}",
                self.crossover_fraction
            )));
        }
        if !(self.function_tolerance > 0.0) {
            return Err(IsacError::Config("function_tolerance must be positive".into()));
        }
        if self.elite_count >= self.population {
            return Err(IsacError::Config(
                "elite_count must be smaller than population".into(),
            ));
        }
        if !(self.mutation_scale >= 0.0) || !(self.penalty_weight >= 0.0) {
            return Err(IsacError::Config(
                "mutation_scale and penalty_weight must be non-negative".into(),
            ));
        }
        if self.generations == 0 {
            return Err(IsacError::Config("generations must be at least 1".into()));
        }
        Ok(())
    }
}

/// What the engine needs from a problem.
pub trait GaProblem: Sync {
    type Eval: Clone + Send + Sync;

    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    /// Map a bound-clamped genome onto the problem's linear feasible set.
    fn repair(&self, _genome: &mut [f64]) {}
    fn evaluate(&self, genome: &[f64]) -> Self::Eval;
    fn fitness(&self, eval: &Self::Eval) -> f64;
    fn feasible(&self, eval: &Self::Eval) -> bool;
}

#[derive(Debug, Clone)]
pub struct GaOutcome<E> {
    pub best_genome: Vec<f64>,
    pub best_eval: E,
    /// Fitness of the best individual after each generation.
    pub history: Vec<f64>,
    pub generations_run: usize,
}

/// Counter-based generator for one draw site.
pub fn stream_rng(seed: u64, generation: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((generation << 32) ^ index);
    rng
}

fn better<P: GaProblem>(p: &P, a: &P::Eval, b: &P::Eval) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match (p.feasible(a), p.feasible(b)) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => {
            let fa = sanitize(p.fitness(a));
            let fb = sanitize(p.fitness(b));
            fb.partial_cmp(&fa).unwrap_or(Ordering::Equal)
        }
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_nan() {
        f64::NEG_INFINITY
    } else {
        f
    }
}

fn clamp_into(genome: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((x, &l), &h) in genome.iter_mut().zip(lo).zip(hi) {
        *x = if x.is_nan() { l } else { x.clamp(l, h) };
    }
}

fn tournament(rng: &mut ChaCha8Rng, ranked_len: usize) -> usize {
    // Indices are ranks: smaller is better.
    (0..TOURNAMENT_SIZE)
        .map(|_| rng.random_range(0..ranked_len))
        .min()
        .unwrap_or(0)
}

/// Run the GA. `initial` genomes, if any, replace the first random members
/// of generation 0.
pub fn run<P: GaProblem>(problem: &P, cfg: &GaConfig, initial: &[Vec<f64>]) -> Result<GaOutcome<P::Eval>> {
    cfg.validate()?;
    let lo = problem.lower();
    let hi = problem.upper();
    let dim = lo.len();
    if hi.len() != dim || lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
        return Err(IsacError::InvalidArgument("inconsistent gene bounds".into()));
    }
    let range: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
    let n = cfg.population;

    let mut population: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = match initial.get(i) {
                Some(seed) if seed.len() == dim => seed.clone(),
                _ => {
                    let mut rng = stream_rng(cfg.seed, 0, i as u64);
                    (0..dim).map(|d| lo[d] + rng.random::<f64>() * range[d]).collect()
                }
            };
            clamp_into(&mut g, lo, hi);
            problem.repair(&mut g);
            g
        })
        .collect();

    let mut history = Vec::with_capacity(cfg.generations);
    let mut generation = 0usize;
    loop {
        let evals: Vec<P::Eval> = population.par_iter().map(|g| problem.evaluate(g)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| better(problem, &evals[a], &evals[b]));
        let best = order[0];
        history.push(problem.fitness(&evals[best]));
        generation += 1;

        let stalled = history.len() > cfg.stall_generations && {
            let now = history[history.len() - 1];
            let then = history[history.len() - 1 - cfg.stall_generations];
            (now - then).abs() <= cfg.function_tolerance * now.abs().max(1.0)
        };
        if generation >= cfg.generations || stalled {
            return Ok(GaOutcome {
                best_genome: population[best].clone(),
                best_eval: evals[best].clone(),
                history,
                generations_run: generation,
            });
        }

        let ranked: Vec<&Vec<f64>> = order.iter().map(|&i| &population[i]).collect();
        let n_kids = n - cfg.elite_count;
        let n_cross = (cfg.crossover_fraction * n_kids as f64).round() as usize;
        let progress = generation as f64 / cfg.generations as f64;
        let sigma_scale = cfg.mutation_scale * FINAL_SCALE.powf(progress);
        let g_id = generation as u64;

        let kids: Vec<Vec<f64>> = (0..n_kids)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(cfg.seed, g_id, i as u64);
                let mut child = if i < n_cross {
                    let a = ranked[tournament(&mut rng, n)];
                    let b = ranked[tournament(&mut rng, n)];
                    a.iter()
                        .zip(b.iter())
                        .map(|(&x, &y)| {
                            let (mn, mx) = if x < y { (x, y) } else { (y, x) };
                            let span = mx - mn;
                            let u: f64 = rng.random();
                            mn - BLEND_ALPHA * span + u * (1.0 + 2.0 * BLEND_ALPHA) * span
                        })
                        .collect::<Vec<f64>>()
                } else {
                    let parent = ranked[tournament(&mut rng, n)];
                    parent
                        .iter()
                        .zip(&range)
                        .map(|(&x, &r)| {
                            let z: f64 = rng.sample(StandardNormal);
                            x + z.clamp(-STEP_CLIP, STEP_CLIP) * sigma_scale * r
                        })
                        .collect()
                };
                clamp_into(&mut child, lo, hi);
                problem.repair(&mut child);
                child
            })
            .collect();

        let mut next: Vec<Vec<f64>> = order[..cfg.elite_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        next.extend(kids);
        population = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Parabola {
        lo: Vec<f64>,
        hi: Vec<f64>,
    }

    impl GaProblem for Parabola {
        type Eval = f64;
        fn lower(&self) -> &[f64] {
            &self.lo
        }
        fn upper(&self) -> &[f64] {
            &self.hi
        }
        fn evaluate(&self, g: &[f64]) -> f64 {
            -(g[0] - 3.0).powi(2)
        }
        fn fitness(&self, e: &f64) -> f64 {
            *e
        }
        fn feasible(&self, _: &f64) -> bool {
            true
        }
    }

    fn parabola() -> Parabola {
        Parabola {
            lo: vec![0.0],
            hi: vec![10.0],
        }
    }

    #[test]
    fn finds_parabola_peak() {
        let out = run(&parabola(), &GaConfig::desk(), &[]).unwrap();
        assert!((out.best_genome[0] - 3.0).abs() < 0.01, "{:?}", out.best_genome);
    }

    #[test]
    fn elitism_keeps_history_monotone() {
        let out = run(&parabola(), &GaConfig::desk().with_seed(9), &[]).unwrap();
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn same_seed_same_answer() {
        let a = run(&parabola(), &GaConfig::desk().with_seed(4), &[]).unwrap();
        let b = run(&parabola(), &GaConfig::desk().with_seed(4), &[]).unwrap();
        assert_eq!(a.best_genome[0].to_bits(), b.best_genome[0].to_bits());
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn stalls_out_early() {
        let cfg = GaConfig {
            generations: 10_000,
            ..GaConfig::desk()
        };
        let out = run(&parabola(), &cfg, &[]).unwrap();
        assert!(out.generations_run < 10_000);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = GaConfig {
            population: 1,
            elite_count: 0,
            ..GaConfig::desk()
        };
        assert!(matches!(run(&parabola(), &cfg, &[]), Err(IsacError::Config(_))));
        let cfg = GaConfig {
            crossover_fraction: 1.5,
            ..GaConfig::desk()
        };
        assert!(cfg.validate().is_err());
        assert!(GaConfig::preset("huge").is_err());
        assert_eq!(GaConfig::preset("paper").unwrap().population, 1700);
    }
}
