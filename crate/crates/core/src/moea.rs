//! Multi-objective search over (travel, waiting, workload deviation):
//! NSGA-II, MOEA/D with Tchebycheff decomposition, and their sequential
//! hybrid.

use std::cmp::Ordering;

use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::ga::{initial_population, mutate, uox_crossover};
use crate::metrics::pareto_dominates;
use crate::model::{random_chromosome, Chromosome, Instance};
use crate::par::{self, Stopwatch};
use crate::rng::{self, tag, Rng};
use crate::schedule::{decode_trusted, objective_vector, DecodeParams, VariantId};

/// A decoded solution: objectives and constraint violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub chromosome: Chromosome,
    pub objectives: [f64; 3],
    /// Total tardiness plus overtime in minutes; infinite on sync failure.
    pub penalty: f64,
}

impl Member {
    pub fn feasible(&self) -> bool {
        self.penalty == 0.0
    }
}

pub fn evaluate(instance: &Instance, ch: &Chromosome) -> Member {
    let v = VariantId::Multiobj;
    let params = DecodeParams::for_variant(v, instance);
    let s = decode_trusted(instance, ch, v, &params, instance.nominal_times(), None);
    Member {
        chromosome: ch.clone(),
        objectives: objective_vector(&s).as_array(),
        penalty: s.penalty,
    }
}

fn evaluate_all(instance: &Instance, chs: &[Chromosome]) -> Vec<Member> {
    par::map(chs, |_, c| evaluate(instance, c))
}

/// Feasible beats infeasible, smaller violation beats larger, and feasible
/// pairs compare by Pareto dominance.
pub fn constrained_dominates(a: (&[f64], f64), b: (&[f64], f64)) -> bool {
    let (fa, pa) = a;
    let (fb, pb) = b;
    match (pa == 0.0, pb == 0.0) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => pa < pb,
        (true, true) => pareto_dominates(fa, fb),
    }
}

fn member_dominates(a: &Member, b: &Member) -> bool {
    constrained_dominates((&a.objectives, a.penalty), (&b.objectives, b.penalty))
}

/// Partitions indices into successive non-dominated fronts.
pub fn fast_nondominated_sort<T>(points: &[T], dominates: impl Fn(&T, &T) -> bool) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(&points[i], &points[j]) {
                dominated_by[i].push(j);
            } else if i != j && dominates(&points[j], &points[i]) {
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each point within one front: boundary points are
/// infinite, interior points sum half their normalized neighbor gaps.
pub fn crowding_distance<P: AsRef<[f64]>>(front: &[P]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let m = front[0].as_ref().len();
    let mut idx: Vec<usize> = (0..n).collect();
    for k in 0..m {
        idx.sort_by(|&a, &b| front[a].as_ref()[k].total_cmp(&front[b].as_ref()[k]).then(a.cmp(&b)));
        let lo = front[idx[0]].as_ref()[k];
        let hi = front[idx[n - 1]].as_ref()[k];
        dist[idx[0]] = f64::INFINITY;
        dist[idx[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 || !range.is_finite() {
            continue;
        }
        for w in 1..n.saturating_sub(1) {
            let gap = front[idx[w + 1]].as_ref()[k] - front[idx[w - 1]].as_ref()[k];
            dist[idx[w]] += gap / (2.0 * range);
        }
    }
    dist
}

/// A set of mutually non-dominated members.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub members: Vec<Member>,
}

impl Front {
    pub fn objectives(&self) -> Vec<[f64; 3]> {
        self.members.iter().map(|m| m.objectives).collect()
    }

    pub fn feasible_objectives(&self) -> Vec<[f64; 3]> {
        self.members
            .iter()
            .filter(|m| m.feasible())
            .map(|m| m.objectives)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Non-dominated members of `pool`, one per distinct (objectives,
    /// penalty), in pool order.
    pub fn nondominated(pool: &[Member]) -> Self {
        let mut members: Vec<Member> = Vec::new();
        for (i, m) in pool.iter().enumerate() {
            let dominated = pool.iter().enumerate().any(|(j, o)| j != i && member_dominates(o, m));
            let duplicate = members
                .iter()
                .any(|o| o.objectives == m.objectives && o.penalty == m.penalty);
            if !dominated && !duplicate {
                members.push(m.clone());
            }
        }
        Self { members }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Params {
    pub population: usize,
    pub pc: f64,
    pub pm: f64,
    /// Offspring evaluations after the initial population.
    pub evaluations: usize,
    pub time_limit_ms: Option<u64>,
}

impl Nsga2Params {
    pub fn for_instance(instance: &Instance) -> Self {
        let population = (10 * instance.n()).max(4);
        Self {
            population,
            pc: 0.8,
            pm: 0.08,
            evaluations: 50 * population,
            time_limit_ms: None,
        }
    }
}

fn ranks_and_crowding(pop: &[Member]) -> (Vec<usize>, Vec<f64>) {
    let fronts = fast_nondominated_sort(pop, member_dominates);
    let mut rank = vec![0; pop.len()];
    let mut crowd = vec![0.0; pop.len()];
    for (r, f) in fronts.iter().enumerate() {
        let objs: Vec<&[f64]> = f.iter().map(|&i| &pop[i].objectives[..]).collect();
        for (&i, d) in f.iter().zip(crowding_distance(&objs)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

fn crowded_less(rank: &[usize], crowd: &[f64], a: usize, b: usize) -> bool {
    rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b])
}

pub fn nsga2_solve(instance: &Instance, params: &Nsga2Params, seed: u64) -> Front {
    let clock = Stopwatch::start(params.time_limit_ms.is_some());
    let n = params.population.max(2);
    let init = initial_population(instance, n, rng::derive_seed(seed, &[tag::NSGA2]));
    let mut pop = evaluate_all(instance, &init);
    let (mut rank, mut crowd) = ranks_and_crowding(&pop);
    let mut used = 0;
    let mut generation = 0u64;
    while used + n <= params.evaluations && !clock.exceeded(params.time_limit_ms) && instance.gene_count() > 0 {
        generation += 1;
        let (p, rk, cr) = (&pop, &rank, &crowd);
        let children = par::map_range(n, |slot| {
            let mut r = rng::stream(seed, &[tag::NSGA2, generation, slot as u64]);
            let pick = |r: &mut Rng| {
                let a = r.random_range(0..n);
                let b = r.random_range(0..n);
                if crowded_less(rk, cr, b, a) {
                    b
                } else {
                    a
                }
            };
            let i = pick(&mut r);
            let j = pick(&mut r);
            let child = if r.random_bool(params.pc.clamp(0.0, 1.0)) {
                uox_crossover(instance, &p[i].chromosome, &p[j].chromosome, &mut r)
            } else {
                p[i].chromosome.clone()
            };
            evaluate(instance, &mutate(instance, &child, &mut r, params.pm))
        });
        used += n;
        let mut merged = std::mem::take(&mut pop);
        merged.extend(children);
        let fronts = fast_nondominated_sort(&merged, member_dominates);
        let mut keep: Vec<usize> = Vec::with_capacity(n);
        for f in fronts {
            if keep.len() + f.len() <= n {
                keep.extend(f);
                continue;
            }
            let objs: Vec<&[f64]> = f.iter().map(|&i| &merged[i].objectives[..]).collect();
            let d = crowding_distance(&objs);
            let mut order: Vec<usize> = (0..f.len()).collect();
            order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
            keep.extend(order.into_iter().take(n - keep.len()).map(|o| f[o]));
            break;
        }
        let mut slots: Vec<Option<Member>> = merged.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().expect("kept once")).collect();
        (rank, crowd) = ranks_and_crowding(&pop);
    }
    Front::nondominated(&pop)
}

/// Simplex-lattice weights: the smallest granularity giving at least `n`
/// vectors, ordered by decreasing largest component and then descending
/// lexicographically, truncated to `n`.
pub fn weight_vectors(n: usize, m: usize) -> Vec<Vec<f64>> {
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let mut h = 0usize;
    loop {
        let count = binomial(h + m - 1, m - 1);
        if count >= n {
            break;
        }
        h += 1;
    }
    let mut all: Vec<Vec<usize>> = Vec::new();
    let mut cur = vec![0usize; m];
    fn go(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            go(i + 1, left - v, cur, out);
        }
    }
    go(0, h, &mut cur, &mut all);
    all.sort_by(|a, b| {
        let ma = a.iter().max();
        let mb = b.iter().max();
        mb.cmp(&ma).then_with(|| b.cmp(a))
    });
    let scale = h.max(1) as f64;
    all.into_iter()
        .take(n)
        .map(|v| {
            v.into_iter()
                .map(|x| if h == 0 { 1.0 / m as f64 } else { x as f64 / scale })
                .collect()
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k.min(n));
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// For each weight, the indices of the `t` nearest weights (itself
/// included), ties by index.
pub fn neighborhoods(weights: &[Vec<f64>], t: usize) -> Vec<Vec<usize>> {
    let t = t.clamp(1, weights.len().max(1));
    weights
        .iter()
        .map(|w| {
            let mut d: Vec<(f64, usize)> = weights
                .iter()
                .enumerate()
                .map(|(j, v)| (w.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(t).map(|(_, j)| j).collect()
        })
        .collect()
}

pub fn tchebycheff(f: &[f64], lambda: &[f64], z: &[f64]) -> f64 {
    f.iter()
        .zip(lambda)
        .zip(z)
        .map(|((fi, l), zi)| l * (fi - zi).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoeadParams {
    pub population: usize,
    pub neighbors: usize,
    pub pc: f64,
    pub pm: f64,
    pub archive: usize,
    pub evaluations: usize,
    pub time_limit_ms: Option<u64>,
}

impl MoeadParams {
    pub fn for_instance(instance: &Instance) -> Self {
        let population = (10 * instance.n()).max(4);
        Self {
            population,
            neighbors: instance.n().max(2),
            pc: 1.0,
            pm: 0.08,
            archive: population,
            evaluations: 50 * population,
            time_limit_ms: None,
        }
    }
}

/// External archive: constrained non-dominated, no repeated vectors,
/// bounded by evicting the least crowded member.
#[derive(Debug, Clone, Default)]
pub struct Archive {
    pub capacity: usize,
    pub members: Vec<Member>,
}

impl Archive {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            members: Vec::new(),
        }
    }

    /// Returns whether `m` entered.
    pub fn insert(&mut self, m: Member) -> bool {
        let rejected = self
            .members
            .iter()
            .any(|o| member_dominates(o, &m) || (o.objectives == m.objectives && o.penalty == m.penalty));
        if rejected {
            return false;
        }
        self.members.retain(|o| !member_dominates(&m, o));
        self.members.push(m);
        while self.members.len() > self.capacity {
            let objs: Vec<&[f64]> = self.members.iter().map(|o| &o.objectives[..]).collect();
            let d = crowding_distance(&objs);
            let worst = (0..d.len())
                .reduce(|a, b| if d[b] < d[a] { b } else { a })
                .expect("nonempty");
            self.members.remove(worst);
        }
        true
    }

    pub fn front(&self) -> Front {
        Front {
            members: self.members.clone(),
        }
    }
}

/// Per-run observations, for tests and diagnostics.
#[derive(Debug, Clone, Default)]
pub struct MoeadStats {
    /// Ideal point after initialization and after every generation.
    pub ideal: Vec<[f64; 3]>,
    pub evaluations: usize,
}

/// MOEA/D from an optional initial population (random members fill up to
/// the population size). Returns the external archive.
pub fn moead_solve(instance: &Instance, params: &MoeadParams, initial: Option<&[Chromosome]>, seed: u64) -> Front {
    moead_run(instance, params, initial, seed).0
}

fn lower_ideal(z: &mut [f64; 3], objectives: &[f64; 3]) {
    for (zk, &o) in z.iter_mut().zip(objectives) {
        *zk = zk.min(o);
    }
}

pub fn moead_run(
    instance: &Instance,
    params: &MoeadParams,
    initial: Option<&[Chromosome]>,
    seed: u64,
) -> (Front, MoeadStats) {
    let clock = Stopwatch::start(params.time_limit_ms.is_some());
    let n = params.population.max(1);
    let weights = weight_vectors(n, 3);
    let b = neighborhoods(&weights, params.neighbors);
    let mut chs: Vec<Chromosome> = initial.unwrap_or(&[]).iter().take(n).cloned().collect();
    let start = chs.len();
    chs.extend((start..n).map(|i| random_chromosome(instance, &mut rng::stream(seed, &[tag::FILL, i as u64]))));
    let mut pop = evaluate_all(instance, &chs);
    let mut z = [f64::INFINITY; 3];
    for m in &pop {
        lower_ideal(&mut z, &m.objectives);
    }
    let mut ep = Archive::new(params.archive);
    for m in Front::nondominated(&pop).members {
        ep.insert(m);
    }
    let mut stats = MoeadStats {
        ideal: vec![z],
        evaluations: 0,
    };
    let mut generation = 0u64;
    while stats.evaluations + n <= params.evaluations
        && !clock.exceeded(params.time_limit_ms)
        && instance.gene_count() > 0
    {
        generation += 1;
        for (i, bi) in b.iter().enumerate() {
            let mut r = rng::stream(seed, &[tag::MOEAD, generation, i as u64]);
            let k = *bi.choose(&mut r).expect("nonempty neighborhood");
            let l = *bi.choose(&mut r).expect("nonempty neighborhood");
            let child = if r.random_bool(params.pc.clamp(0.0, 1.0)) {
                uox_crossover(instance, &pop[k].chromosome, &pop[l].chromosome, &mut r)
            } else {
                pop[k].chromosome.clone()
            };
            let y = evaluate(instance, &mutate(instance, &child, &mut r, params.pm));
            stats.evaluations += 1;
            lower_ideal(&mut z, &y.objectives);
            for &j in bi {
                let x = &pop[j];
                let better = match y.penalty.total_cmp(&x.penalty) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        tchebycheff(&y.objectives, &weights[j], &z) <= tchebycheff(&x.objectives, &weights[j], &z)
                    }
                };
                if better {
                    pop[j] = y.clone();
                }
            }
            ep.insert(y);
        }
        stats.ideal.push(z);
    }
    (ep.front(), stats)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridParams {
    pub nsga2: Nsga2Params,
    pub moead: MoeadParams,
}

impl HybridParams {
    pub fn for_instance(instance: &Instance) -> Self {
        Self {
            nsga2: Nsga2Params::for_instance(instance),
            moead: MoeadParams::for_instance(instance),
        }
    }
}

/// NSGA-II, then MOEA/D seeded with its front plus random members.
pub fn hybrid_solve(instance: &Instance, params: &HybridParams, seed: u64) -> Front {
    let nd = nsga2_solve(instance, &params.nsga2, seed);
    let seeds: Vec<Chromosome> = nd.members.into_iter().map(|m| m.chromosome).collect();
    moead_solve(
        instance,
        &params.moead,
        Some(&seeds),
        rng::derive_seed(seed, &[tag::MOEAD]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn constrained_domination_examples() {
        assert!(constrained_dominates((&[5.0, 5.0, 5.0], 0.0), (&[1.0, 1.0, 1.0], 3.0)));
        assert!(!constrained_dominates((&[1.0, 2.0, 3.0], 0.0), (&[1.0, 2.0, 3.0], 0.0)));
        assert!(constrained_dominates((&[1.0, 1.0, 1.0], 0.0), (&[2.0, 1.0, 1.0], 0.0)));
        assert!(constrained_dominates((&[9.0; 3], 1.0), (&[0.0; 3], 2.0)));
    }

    #[test]
    fn sort_example() {
        let pts = [[1.0, 1.0], [2.0, 2.0], [1.0, 2.0], [2.0, 1.0]];
        let fronts = fast_nondominated_sort(&pts, |a, b| pareto_dominates(a, b));
        assert_eq!(fronts, vec![vec![0], vec![2, 3], vec![1]]);
        let flat = [[1.0, 3.0], [2.0, 2.0], [3.0, 1.0]];
        assert_eq!(fast_nondominated_sort(&flat, |a, b| pareto_dominates(a, b)).len(), 1);
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(crowding_distance(&[[0.0, 1.0], [1.0, 0.0]]), vec![f64::INFINITY; 2]);
        let d = crowding_distance(&[[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]]);
        assert_eq!(d[1], 1.0);
        let dup = crowding_distance(&[[0.0, 1.0], [0.5, 0.5], [0.5, 0.5], [1.0, 0.0]]);
        assert_eq!(&dup[1..3], &[0.5, 0.5]);
        let same = crowding_distance(&[[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]]);
        assert_eq!(same[1], 0.0);
    }

    #[test]
    fn weight_lattice_for_six() {
        let w = weight_vectors(6, 3);
        let want = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.5, 0.5, 0.0],
            [0.5, 0.0, 0.5],
            [0.0, 0.5, 0.5],
        ];
        assert_eq!(w.len(), 6);
        for (a, b) in w.iter().zip(want) {
            assert_eq!(a.as_slice(), &b[..]);
        }
        let b = neighborhoods(&w, 6);
        assert!(b.iter().all(|x| {
            let mut s = x.clone();
            s.sort();
            s == (0..6).collect::<Vec<_>>()
        }));
        assert!(neighborhoods(&w, 2).iter().enumerate().all(|(i, x)| x[0] == i));
        for v in weight_vectors(37, 3) {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tchebycheff_examples() {
        let l = [1.0 / 3.0; 3];
        assert!((tchebycheff(&[2.0, 3.0, 4.0], &l, &[1.0; 3]) - 1.0).abs() < 1e-12);
        assert_eq!(tchebycheff(&[1.0; 3], &l, &[1.0; 3]), 0.0);
        let l2 = [2.0 / 3.0; 3];
        assert!((tchebycheff(&[2.0, 3.0, 4.0], &l2, &[1.0; 3]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_patient_front_is_single_point() {
        let inst = samples::tiny_one();
        let f = nsga2_solve(&inst, &Nsga2Params::for_instance(&inst), 1);
        assert_eq!(f.objectives(), vec![[20.0, 0.0, 0.0]]);
        let (f, stats) = moead_run(&inst, &MoeadParams::for_instance(&inst), None, 2);
        assert_eq!(f.objectives(), vec![[20.0, 0.0, 0.0]]);
        assert!(stats.ideal.windows(2).all(|w| (0..3).all(|k| w[1][k] <= w[0][k])));
    }

    #[test]
    fn zero_budget_hybrid_keeps_the_seeded_front() {
        let inst = samples::uniform(4, 2);
        let mut p = HybridParams::for_instance(&inst);
        p.moead.evaluations = 0;
        let nd = nsga2_solve(&inst, &p.nsga2, 3);
        let h = hybrid_solve(&inst, &p, 3);
        for m in &nd.members {
            assert!(h
                .members
                .iter()
                .any(|o| o.objectives == m.objectives || member_dominates(o, m)));
        }
    }
}
