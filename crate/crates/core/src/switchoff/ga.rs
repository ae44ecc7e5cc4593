//! Binary genetic algorithm for the switch-off mask: tournament selection,
//! uniform crossover, bit-flip mutation, elitism of one and a greedy repair
//! that disables the least useful beam until the cardinality bound holds.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{all_on_result, BeamMask, SolverResult, SwitchOffProblem};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub pop_size: usize,
    pub generations: usize,
    pub tournament_k: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / beam count`.
    pub mutation_rate: Option<f64>,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            pop_size: 80,
            generations: 200,
            tournament_k: 3,
            crossover_rate: 0.9,
            mutation_rate: None,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::invalid("ga.pop_size", "must be >= 2"));
        }
        if self.tournament_k < 1 || self.tournament_k > self.pop_size {
            return Err(Error::invalid("ga.tournament_k", "must be in [1, pop_size]"));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::invalid("ga.crossover_rate", "must be in [0, 1]"));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::invalid("ga.mutation_rate", "must be in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Scored {
    bits: u64,
    fitness: f64,
}

/// Lower fitness wins; equal fitness goes to the lexicographically smaller
/// mask (bit 0 first).
fn better(a: &Scored, b: &Scored, n: usize) -> bool {
    a.fitness < b.fitness
        || (a.fitness == b.fitness && BeamMask::from_bits(a.bits, n) < BeamMask::from_bits(b.bits, n))
}

fn repair(problem: &SwitchOffProblem, mut bits: u64) -> u64 {
    while bits.count_ones() as usize > problem.xi {
        let contrib = problem.contributions(bits);
        let mut drop = usize::MAX;
        for k in 0..problem.n_beams() {
            if bits >> k & 1 == 1 && (drop == usize::MAX || contrib[k] < contrib[drop]) {
                drop = k;
            }
        }
        bits &= !(1u64 << drop);
    }
    bits
}

fn random_individual(rng: &mut ChaCha8Rng, n: usize, xi: usize) -> u64 {
    let k = rng.random_range(1..=xi);
    let mut bits = 0u64;
    while (bits.count_ones() as usize) < k {
        bits |= 1 << rng.random_range(0..n);
    }
    bits
}

fn tournament(rng: &mut ChaCha8Rng, pop: &[Scored], k: usize, n: usize) -> u64 {
    let mut best = pop[rng.random_range(0..pop.len())];
    for _ in 1..k {
        let c = pop[rng.random_range(0..pop.len())];
        if better(&c, &best, n) {
            best = c;
        }
    }
    best.bits
}

/// Repair and fitness are pure functions of the mask, so both are memoized
/// across generations. Only unseen masks are computed, in parallel.
#[derive(Default)]
struct Memo {
    repaired: HashMap<u64, u64>,
    fitness: HashMap<u64, f64>,
}

impl Memo {
    fn score_all(&mut self, problem: &SwitchOffProblem, raw: Vec<u64>) -> Vec<Scored> {
        let mut todo: Vec<u64> = raw
            .iter()
            .copied()
            .filter(|b| !self.repaired.contains_key(b))
            .collect();
        todo.sort_unstable();
        todo.dedup();
        let fixed: Vec<(u64, u64)> = todo.into_par_iter().map(|b| (b, repair(problem, b))).collect();
        self.repaired.extend(fixed);
        let bits: Vec<u64> = raw.iter().map(|b| self.repaired[b]).collect();
        let mut todo: Vec<u64> = bits
            .iter()
            .copied()
            .filter(|b| !self.fitness.contains_key(b))
            .collect();
        todo.sort_unstable();
        todo.dedup();
        let scored: Vec<(u64, f64)> = todo.into_par_iter().map(|b| (b, problem.eval_bits(b))).collect();
        self.fitness.extend(scored);
        bits.into_iter()
            .map(|b| Scored {
                bits: b,
                fitness: self.fitness[&b],
            })
            .collect()
    }
}

pub fn solve_ga(problem: &SwitchOffProblem, params: &GaParams, seed: u64) -> Result<SolverResult> {
    params.validate()?;
    let n = problem.n_beams();
    if problem.xi >= n {
        return Ok(all_on_result(problem, "ga", Some(seed)));
    }
    let mutation = params.mutation_rate.unwrap_or(1.0 / n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let init: Vec<u64> = (0..params.pop_size)
        .map(|_| random_individual(&mut rng, n, problem.xi))
        .collect();
    let mut memo = Memo::default();
    let mut pop = memo.score_all(problem, init);
    let mut evaluations = pop.len() as u64;
    let mut best = *pop
        .iter()
        .reduce(|a, b| if better(b, a, n) { b } else { a })
        .unwrap();

    for _ in 0..params.generations {
        let mut children = Vec::with_capacity(params.pop_size - 1);
        for _ in 1..params.pop_size {
            let p1 = tournament(&mut rng, &pop, params.tournament_k, n);
            let p2 = tournament(&mut rng, &pop, params.tournament_k, n);
            let mut child = if rng.random_bool(params.crossover_rate) {
                let pick: u64 = rng.random();
                (p1 & pick) | (p2 & !pick)
            } else {
                p1
            };
            for k in 0..n {
                if rng.random_bool(mutation) {
                    child ^= 1 << k;
                }
            }
            if n < 64 {
                child &= (1u64 << n) - 1;
            }
            if child == 0 {
                child = 1 << rng.random_range(0..n);
            }
            children.push(child);
        }
        let scored = memo.score_all(problem, children);
        evaluations += scored.len() as u64;
        let mut next = Vec::with_capacity(params.pop_size);
        next.push(best);
        next.extend(scored);
        for s in &next {
            if better(s, &best, n) {
                best = *s;
            }
        }
        pop = next;
    }

    Ok(SolverResult {
        mask: BeamMask::from_bits(best.bits, n),
        objective: best.fitness,
        evaluations,
        solver: "ga".into(),
        seed: Some(seed),
        fallback: false,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{build_problem, solve_exhaustive};
    use super::*;

    fn small_problem(xi: usize) -> SwitchOffProblem {
        let t = trace(&[
            (0.5, 0.5, &[("B-1-1", -60.0), ("B-1-5", -63.0), ("B-2-3", -71.0)]),
            (1.5, 0.5, &[("B-1-5", -62.0), ("B-2-3", -64.0)]),
            (2.5, 0.5, &[("B-2-3", -66.0), ("B-3-2", -61.0)]),
            (3.5, 0.5, &[("B-3-2", -70.0), ("B-1-1", -72.0)]),
        ]);
        build_problem(&t, &grid(), xi).unwrap()
    }

    #[test]
    fn matches_exhaustive_on_small_problem() {
        for xi in 1..=3 {
            let p = small_problem(xi);
            let ex = solve_exhaustive(&p).unwrap();
            let ga = solve_ga(
                &p,
                &GaParams {
                    generations: 40,
                    ..Default::default()
                },
                11,
            )
            .unwrap();
            assert_eq!(ga.objective, ex.objective, "xi {xi}");
            assert!(ga.mask.popcount() <= xi);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let p = small_problem(2);
        let params = GaParams {
            generations: 20,
            ..Default::default()
        };
        assert_eq!(
            solve_ga(&p, &params, 5).unwrap(),
            solve_ga(&p, &params, 5).unwrap()
        );
    }

    #[test]
    fn full_budget_is_all_on() {
        let p = small_problem(27);
        let r = solve_ga(&p, &GaParams::default(), 1).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.mask.popcount(), 27);
    }

    #[test]
    fn evaluation_count() {
        let p = small_problem(2);
        let params = GaParams {
            pop_size: 10,
            generations: 5,
            ..Default::default()
        };
        assert_eq!(solve_ga(&p, &params, 3).unwrap().evaluations, 10 + 5 * 9);
    }

    #[test]
    fn repair_enforces_bound() {
        let p = small_problem(2);
        let bits = repair(&p, (1u64 << 27) - 1);
        assert_eq!(bits.count_ones(), 2);
    }

    #[test]
    fn bad_params() {
        assert!(GaParams {
            pop_size: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GaParams {
            tournament_k: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GaParams {
            crossover_rate: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GaParams {
            mutation_rate: Some(-0.1),
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
