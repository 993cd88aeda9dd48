//! Genetic algorithm over two-row chromosomes.
//!
//! Crossovers work row by row: the patient row keeps a subset of positions
//! from one parent and fills the rest in the other parent's relative order,
//! the caregiver row is copied positionally. Repair then restores skills and
//! the one-caregiver-per-patient rule.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::seq::{index, IndexedRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::model::{random_chromosome, random_patient_assignment, Chromosome, Instance, VisitGene};
use crate::par::{self, Stopwatch};
use crate::recourse::{estimate_trusted, RecourseKind, StochasticConfig};
use crate::rng::{self, tag, Rng};
use crate::schedule::{decode_trusted, objective, DecodeParams, Schedule, VariantId};

/// Patient row: positions with `mask[i]` keep `p1`, the rest take the
/// missing genes in `p2` order.
pub fn uox_gene_row(p1: &[VisitGene], p2: &[VisitGene], mask: &[bool]) -> Vec<VisitGene> {
    let kept: Vec<VisitGene> = p1.iter().zip(mask).filter(|(_, &m)| m).map(|(g, _)| *g).collect();
    let mut fill = p2.iter().filter(|g| !kept.contains(g));
    p1.iter()
        .zip(mask)
        .map(|(g, &m)| {
            if m {
                *g
            } else {
                *fill.next().expect("parents share genes")
            }
        })
        .collect()
}

/// Caregiver row: positions with `mask[i]` keep `p1`, the rest copy `p2`.
pub fn uox_caregiver_row(p1: &[usize], p2: &[usize], mask: &[bool]) -> Vec<usize> {
    p1.iter()
        .zip(p2)
        .zip(mask)
        .map(|((&a, &b), &m)| if m { a } else { b })
        .collect()
}

/// UOX with explicit masks, without repair.
pub fn uox_rows(p1: &Chromosome, p2: &Chromosome, gene_mask: &[bool], caregiver_mask: &[bool]) -> Chromosome {
    Chromosome::new(
        uox_gene_row(&p1.genes, &p2.genes, gene_mask),
        uox_caregiver_row(&p1.assignment, &p2.assignment, caregiver_mask),
    )
}

fn random_mask(len: usize, rng: &mut Rng) -> Vec<bool> {
    (0..len).map(|_| rng.random_bool(0.5)).collect()
}

/// One offspring from random per-row masks, repaired.
pub fn uox_crossover(instance: &Instance, p1: &Chromosome, p2: &Chromosome, rng: &mut Rng) -> Chromosome {
    let gm = random_mask(p1.len(), rng);
    let cm = random_mask(p1.len(), rng);
    repair(&uox_rows(p1, p2, &gm, &cm), instance, rng)
}

/// Patient row with the segment `p1..=p2` (1-based) kept from `keep` and the
/// outer positions filled in `other` order.
pub fn two_point_gene_row(keep: &[VisitGene], other: &[VisitGene], points: (usize, usize)) -> Vec<VisitGene> {
    let mask = segment_mask(keep.len(), points);
    uox_gene_row(keep, other, &mask)
}

pub fn two_point_caregiver_row(keep: &[usize], other: &[usize], points: (usize, usize)) -> Vec<usize> {
    let mask = segment_mask(keep.len(), points);
    uox_caregiver_row(keep, other, &mask)
}

fn segment_mask(len: usize, (a, b): (usize, usize)) -> Vec<bool> {
    (1..=len).map(|i| a <= i && i <= b).collect()
}

/// Two-point crossover with explicit 1-based inclusive points, without repair.
pub fn two_point_rows(
    p1: &Chromosome,
    p2: &Chromosome,
    gene_points: (usize, usize),
    caregiver_points: (usize, usize),
) -> (Chromosome, Chromosome) {
    let a = Chromosome::new(
        two_point_gene_row(&p1.genes, &p2.genes, gene_points),
        two_point_caregiver_row(&p1.assignment, &p2.assignment, caregiver_points),
    );
    let b = Chromosome::new(
        two_point_gene_row(&p2.genes, &p1.genes, gene_points),
        two_point_caregiver_row(&p2.assignment, &p1.assignment, caregiver_points),
    );
    (a, b)
}

fn random_points(len: usize, rng: &mut Rng) -> (usize, usize) {
    if len == 0 {
        return (1, 0);
    }
    let a = rng.random_range(1..=len);
    let b = rng.random_range(1..=len);
    (a.min(b), a.max(b))
}

pub fn two_point_crossover(
    instance: &Instance,
    p1: &Chromosome,
    p2: &Chromosome,
    rng: &mut Rng,
) -> (Chromosome, Chromosome) {
    let gp = random_points(p1.len(), rng);
    let cp = random_points(p1.len(), rng);
    let (a, b) = two_point_rows(p1, p2, gp, cp);
    (repair(&a, instance, rng), repair(&b, instance, rng))
}

/// Exchanges the genes at two positions; the caregiver row stays in place.
pub fn swap_patients(ch: &Chromosome, i: usize, j: usize) -> Chromosome {
    let mut out = ch.clone();
    out.genes.swap(i, j);
    out
}

pub fn reassign(ch: &Chromosome, gene: usize, caregiver: usize) -> Chromosome {
    let mut out = ch.clone();
    out.assignment[gene] = caregiver;
    out
}

/// Each operator fires with probability `ps`; the result is repaired.
pub fn mutate(instance: &Instance, ch: &Chromosome, rng: &mut Rng, ps: f64) -> Chromosome {
    let len = ch.len();
    let mut out = ch.clone();
    let mut touched = false;
    if len >= 2 && rng.random_bool(ps.clamp(0.0, 1.0)) {
        let pair = index::sample(rng, len, 2);
        out = swap_patients(&out, pair.index(0), pair.index(1));
        touched = true;
    }
    if len >= 1 && rng.random_bool(ps.clamp(0.0, 1.0)) {
        let g = rng.random_range(0..len);
        if let Some(&k) = instance.qualified(out.genes[g].service).choose(rng) {
            out = reassign(&out, g, k);
            touched = true;
        }
    }
    if touched {
        repair(&out, instance, rng)
    } else {
        out
    }
}

/// Replaces unqualified caregivers and second visits of a caregiver to the
/// same patient with random qualified caregivers not yet used there.
pub fn repair(ch: &Chromosome, instance: &Instance, rng: &mut Rng) -> Chromosome {
    let mut out = ch.clone();
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); instance.n()];
    let mut stuck: Vec<usize> = Vec::new();
    for g in 0..out.len() {
        let gene = out.genes[g];
        let k = out.assignment[g];
        let seen = &mut used[gene.patient - 1];
        let ok = k >= 1 && k <= instance.c() && instance.caregiver(k).is_skilled(gene.service) && !seen.contains(&k);
        if ok {
            seen.push(k);
            continue;
        }
        let options: Vec<usize> = instance
            .qualified(gene.service)
            .iter()
            .copied()
            .filter(|q| !seen.contains(q))
            .collect();
        match options.choose(rng) {
            Some(&q) => {
                out.assignment[g] = q;
                seen.push(q);
            }
            None => stuck.push(gene.patient),
        }
    }
    // a greedy pass can paint itself into a corner; redraw those patients whole
    stuck.dedup();
    for p in stuck {
        let ks = random_patient_assignment(instance, p, rng).expect("instance is assignable");
        let demands = &instance.patient(p).demands;
        for g in 0..out.len() {
            if out.genes[g].patient == p {
                let j = demands.iter().position(|&s| s == out.genes[g].service).unwrap_or(0);
                out.assignment[g] = ks[j];
            }
        }
    }
    out
}

/// Samples `size` distinct members and returns the index of the best; ties
/// go to the first sampled.
pub fn tournament_select<T>(
    population: &[T],
    size: usize,
    cmp: impl Fn(&T, &T) -> Ordering,
    rng: &mut Rng,
) -> Option<usize> {
    if population.is_empty() {
        return None;
    }
    let size = size.clamp(1, population.len());
    let picks = index::sample(rng, population.len(), size);
    let mut best = picks.index(0);
    for i in picks.iter().skip(1) {
        if cmp(&population[i], &population[best]) == Ordering::Less {
            best = i;
        }
    }
    Some(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FitnessKind {
    /// Penalized objective of the variant under nominal times.
    Deterministic,
    /// Transport cost plus estimated expected recourse.
    Spr,
    /// Over-visits, skipped visits, cost; compared lexicographically.
    Lex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Fitness {
    Scalar(f64),
    Lex([f64; 3]),
}

impl Fitness {
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Fitness::Scalar(a), Fitness::Scalar(b)) => a.total_cmp(b),
            (Fitness::Lex(a), Fitness::Lex(b)) => a
                .iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal),
            (Fitness::Scalar(_), Fitness::Lex(_)) => Ordering::Less,
            (Fitness::Lex(_), Fitness::Scalar(_)) => Ordering::Greater,
        }
    }

    pub fn components(&self) -> Vec<f64> {
        match self {
            Fitness::Scalar(v) => vec![*v],
            Fitness::Lex(v) => v.to_vec(),
        }
    }

    /// The scalar value, or the cost component of a lexicographic triple.
    pub fn value(&self) -> f64 {
        match self {
            Fitness::Scalar(v) => *v,
            Fitness::Lex(v) => v[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossoverKind {
    Uox,
    TwoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population: usize,
    pub pc: f64,
    pub ps: f64,
    pub tournament: usize,
    /// Generations without improvement of the best before stopping.
    pub stop_after: usize,
    pub max_generations: Option<usize>,
    pub fitness: FitnessKind,
    pub crossover: CrossoverKind,
    /// Penalty coefficient of the deterministic fitness.
    pub beta: f64,
    /// Used by SPR fitness, and by LEX fitness when `stochastic` is set.
    pub recourse: StochasticConfig,
    pub stochastic: bool,
    pub time_limit_ms: Option<u64>,
    pub timing: bool,
}

impl GaParams {
    pub fn deterministic(instance: &Instance) -> Self {
        let s = instance.gene_count();
        Self {
            population: (s * s).max(4),
            pc: 0.8,
            ps: 0.01,
            tournament: instance.c() + 1,
            stop_after: (5 * s).max(1),
            max_generations: None,
            fitness: FitnessKind::Deterministic,
            crossover: CrossoverKind::Uox,
            beta: 100.0,
            recourse: StochasticConfig::default(),
            stochastic: false,
            time_limit_ms: None,
            timing: false,
        }
    }

    pub fn spr(instance: &Instance) -> Self {
        Self {
            population: 100,
            pc: 0.6,
            ps: 0.08,
            stop_after: 50,
            fitness: FitnessKind::Spr,
            stochastic: true,
            ..Self::deterministic(instance)
        }
    }

    pub fn skip(instance: &Instance) -> Self {
        let n = instance.n();
        Self {
            population: (20 * n).max(4),
            pc: 0.4,
            ps: 0.08,
            tournament: 2,
            stop_after: (5 * n).max(1),
            fitness: FitnessKind::Lex,
            crossover: CrossoverKind::TwoPoint,
            stochastic: true,
            ..Self::deterministic(instance)
        }
    }

    pub fn for_variant(variant: VariantId, instance: &Instance) -> Self {
        match variant {
            VariantId::SprPenalty => Self::spr(instance),
            VariantId::SprSkip => Self::skip(instance),
            _ => Self::deterministic(instance),
        }
    }
}

/// Evaluates chromosomes of one variant under one fitness definition.
#[derive(Debug, Clone)]
pub struct FitnessContext<'a> {
    pub instance: &'a Instance,
    pub variant: VariantId,
    pub kind: FitnessKind,
    pub decode: DecodeParams,
    pub recourse: Option<StochasticConfig>,
}

impl<'a> FitnessContext<'a> {
    pub fn new(instance: &'a Instance, variant: VariantId, params: &GaParams) -> Self {
        let mut decode = DecodeParams::for_variant(variant, instance);
        decode.weights.penalty = params.beta;
        let recourse = match params.fitness {
            FitnessKind::Spr => Some(params.recourse),
            FitnessKind::Lex if params.stochastic => Some(params.recourse),
            _ => None,
        };
        Self {
            instance,
            variant,
            kind: params.fitness,
            decode,
            recourse,
        }
    }

    /// Whether equal chromosomes always get equal fitness.
    pub fn is_pure(&self) -> bool {
        self.recourse.is_none_or(|c| c.crn)
    }

    pub fn schedule(&self, ch: &Chromosome) -> Schedule {
        decode_trusted(
            self.instance,
            ch,
            self.variant,
            &self.decode,
            self.instance.nominal_times(),
            None,
        )
    }

    /// Fitness of a valid chromosome; `call_id` picks the scenario stream.
    pub fn evaluate(&self, ch: &Chromosome, call_id: u64) -> Fitness {
        let s = self.schedule(ch);
        match self.kind {
            FitnessKind::Deterministic => {
                Fitness::Scalar(objective(&s, self.variant, &self.decode.weights).expect("same variant"))
            }
            FitnessKind::Spr => {
                let cfg = self.recourse.unwrap_or_default();
                let kind = RecourseKind::for_variant(self.variant);
                let e = estimate_trusted(self.instance, ch, kind, &cfg, call_id);
                Fitness::Scalar(s.total_cost() + e.mean)
            }
            FitnessKind::Lex => {
                let skipped = match &self.recourse {
                    Some(cfg) => estimate_trusted(self.instance, ch, RecourseKind::Skip, cfg, call_id).skipped,
                    None => s.skipped as f64,
                };
                Fitness::Lex([s.over_visits as f64, skipped, s.total_cost()])
            }
        }
    }
}

/// Fitness of a valid chromosome.
pub fn fitness(instance: &Instance, ch: &Chromosome, variant: VariantId, params: &GaParams, call_id: u64) -> Fitness {
    FitnessContext::new(instance, variant, params).evaluate(ch, call_id)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaTraceRow {
    pub generation: usize,
    pub elapsed_ms: f64,
    pub best: Fitness,
    /// Componentwise mean over the population.
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub best: Chromosome,
    pub fitness: Fitness,
    pub schedule: Schedule,
    pub trace: Vec<GaTraceRow>,
    pub generations: usize,
    pub evaluations: u64,
}

struct Evaluations<'a> {
    ctx: FitnessContext<'a>,
    cache: HashMap<Chromosome, Fitness>,
    count: u64,
}

impl Evaluations<'_> {
    fn run(&mut self, items: &[Chromosome], generation: u64) -> Vec<Fitness> {
        let pure = self.ctx.is_pure();
        let todo: Vec<usize> = (0..items.len())
            .filter(|&i| !pure || !self.cache.contains_key(&items[i]))
            .collect();
        let ctx = &self.ctx;
        let fresh = par::map(&todo, |_, &i| {
            ctx.evaluate(&items[i], rng::derive_seed(generation, &[i as u64]))
        });
        self.count += todo.len() as u64;
        let mut fresh_at: HashMap<usize, Fitness> = todo.into_iter().zip(fresh).collect();
        items
            .iter()
            .enumerate()
            .map(|(i, ch)| match fresh_at.remove(&i) {
                Some(f) => {
                    if pure {
                        self.cache.insert(ch.clone(), f);
                    }
                    f
                }
                None => self.cache[ch],
            })
            .collect()
    }
}

fn mean_components(fit: &[Fitness]) -> Vec<f64> {
    let Some(first) = fit.first() else { return Vec::new() };
    let mut acc = vec![0.0; first.components().len()];
    for f in fit {
        for (a, x) in acc.iter_mut().zip(f.components()) {
            *a += x;
        }
    }
    acc.iter().map(|a| a / fit.len() as f64).collect()
}

/// Random initial population.
pub fn initial_population(instance: &Instance, size: usize, seed: u64) -> Vec<Chromosome> {
    (0..size)
        .map(|i| random_chromosome(instance, &mut rng::stream(seed, &[tag::INITIAL, i as u64])))
        .collect()
}

pub fn ga_solve(instance: &Instance, variant: VariantId, params: &GaParams, seed: u64) -> GaResult {
    let pop = initial_population(instance, params.population.max(2), seed);
    ga_from(instance, variant, params, seed, pop)
}

/// Generational loop from a given population; offspring replace it wholly
/// and the best individual seen is tracked on the side.
pub fn ga_from(
    instance: &Instance,
    variant: VariantId,
    params: &GaParams,
    seed: u64,
    mut pop: Vec<Chromosome>,
) -> GaResult {
    let clock = Stopwatch::start(params.timing || params.time_limit_ms.is_some());
    let mut evals = Evaluations {
        ctx: FitnessContext::new(instance, variant, params),
        cache: HashMap::new(),
        count: 0,
    };
    let size = pop.len();
    let mut fit = evals.run(&pop, 0);
    let argbest = |fit: &[Fitness]| {
        (0..fit.len())
            .reduce(|b, i| {
                if fit[i].total_cmp(&fit[b]) == Ordering::Less {
                    i
                } else {
                    b
                }
            })
            .unwrap_or(0)
    };
    let b = argbest(&fit);
    let mut best = pop[b].clone();
    let mut best_fit = fit[b];
    let mut trace = vec![GaTraceRow {
        generation: 0,
        elapsed_ms: clock.elapsed_ms(),
        best: best_fit,
        mean: mean_components(&fit),
    }];
    let mut idle = 0;
    let mut generation = 0;
    let by_fit = |a: &usize, b: &usize, fit: &[Fitness]| fit[*a].total_cmp(&fit[*b]);
    let ids: Vec<usize> = (0..size).collect();
    while idle < params.stop_after
        && params.max_generations.is_none_or(|m| generation < m)
        && !clock.exceeded(params.time_limit_ms)
        && size > 0
    {
        generation += 1;
        let pairs = match params.crossover {
            CrossoverKind::Uox => size,
            CrossoverKind::TwoPoint => size.div_ceil(2),
        };
        let (pop_ref, fit_ref) = (&pop, &fit);
        let children: Vec<Vec<Chromosome>> = par::map_range(pairs, |slot| {
            let mut r = rng::stream(seed, &[tag::OFFSPRING, generation as u64, slot as u64]);
            let cmp = |a: &usize, b: &usize| by_fit(a, b, fit_ref);
            let i = tournament_select(&ids, params.tournament, cmp, &mut r).unwrap_or(0);
            let j = tournament_select(&ids, params.tournament, cmp, &mut r).unwrap_or(0);
            let (p1, p2) = (&pop_ref[i], &pop_ref[j]);
            let cross = r.random_bool(params.pc.clamp(0.0, 1.0));
            let kids = match params.crossover {
                CrossoverKind::Uox => {
                    vec![if cross {
                        uox_crossover(instance, p1, p2, &mut r)
                    } else {
                        p1.clone()
                    }]
                }
                CrossoverKind::TwoPoint => {
                    if cross {
                        let (a, b) = two_point_crossover(instance, p1, p2, &mut r);
                        vec![a, b]
                    } else {
                        vec![p1.clone(), p2.clone()]
                    }
                }
            };
            kids.into_iter()
                .map(|k| mutate(instance, &k, &mut r, params.ps))
                .collect()
        });
        pop = children.into_iter().flatten().take(size).collect();
        fit = evals.run(&pop, rng::derive_seed(seed, &[tag::SCENARIO, generation as u64]));
        let b = argbest(&fit);
        if fit[b].total_cmp(&best_fit) == Ordering::Less {
            best = pop[b].clone();
            best_fit = fit[b];
            idle = 0;
        } else {
            idle += 1;
        }
        trace.push(GaTraceRow {
            generation,
            elapsed_ms: clock.elapsed_ms(),
            best: best_fit,
            mean: mean_components(&fit),
        });
    }
    let schedule = evals.ctx.schedule(&best);
    GaResult {
        best,
        fitness: best_fit,
        schedule,
        trace,
        generations: generation,
        evaluations: evals.count,
    }
}
