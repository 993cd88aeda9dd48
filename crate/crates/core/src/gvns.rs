//! General variable neighborhood search.
//!
//! Two neighborhoods change assignments (SWITCH, INTER_SWAP) and two change
//! the visiting order (INTRA_SHIFT, INTRA_SWAP). The local search is a
//! best-improvement VND; shaking applies random moves of one neighborhood.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::model::{assign_randomly, random_chromosome, random_patient_assignment, Chromosome, Instance};
use crate::par::{self, Stopwatch};
use crate::rng::{self, tag, Rng};
use crate::schedule::{decode_trusted, objective, DecodeParams, Schedule, VariantId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeighborhoodKind {
    Switch,
    InterSwap,
    IntraShift,
    IntraSwap,
}

impl NeighborhoodKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Switch => "switch",
            Self::InterSwap => "inter-swap",
            Self::IntraShift => "shift",
            Self::IntraSwap => "intra-swap",
        }
    }
}

impl fmt::Display for NeighborhoodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NeighborhoodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "switch" => Ok(Self::Switch),
            "inter-swap" | "inter_swap" | "interswap" => Ok(Self::InterSwap),
            "shift" | "intra-shift" | "intra_shift" => Ok(Self::IntraShift),
            "intra-swap" | "intra_swap" | "intraswap" => Ok(Self::IntraSwap),
            _ => Err(format!("unknown neighborhood '{s}'")),
        }
    }
}

/// A single neighborhood move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Reassign gene `gene` to caregiver `to`.
    Switch { gene: usize, to: usize },
    /// Exchange the caregivers of genes `i` and `j`.
    InterSwap { i: usize, j: usize },
    /// Move the gene at `from` so that it ends up at `to`.
    Shift { from: usize, to: usize },
    /// Exchange the genes (with their caregivers) at `i` and `j`.
    Swap { i: usize, j: usize },
}

impl Move {
    pub fn apply(&self, ch: &Chromosome) -> Chromosome {
        let mut out = ch.clone();
        match *self {
            Move::Switch { gene, to } => out.assignment[gene] = to,
            Move::InterSwap { i, j } => out.assignment.swap(i, j),
            Move::Shift { from, to } => {
                let g = out.genes.remove(from);
                let k = out.assignment.remove(from);
                out.genes.insert(to, g);
                out.assignment.insert(to, k);
            }
            Move::Swap { i, j } => {
                out.genes.swap(i, j);
                out.assignment.swap(i, j);
            }
        }
        out
    }
}

fn serves_patient(ch: &Chromosome, patient: usize, caregiver: usize, skip: &[usize]) -> bool {
    ch.genes
        .iter()
        .zip(&ch.assignment)
        .enumerate()
        .any(|(g, (gene, &k))| gene.patient == patient && k == caregiver && !skip.contains(&g))
}

/// All moves of one neighborhood, in lexicographic index order.
pub fn moves(instance: &Instance, ch: &Chromosome, kind: NeighborhoodKind) -> Vec<Move> {
    let len = ch.len();
    let mut out = Vec::new();
    match kind {
        NeighborhoodKind::Switch => {
            for g in 0..len {
                let gene = ch.genes[g];
                for &k in instance.qualified(gene.service) {
                    if k != ch.assignment[g] && !serves_patient(ch, gene.patient, k, &[g]) {
                        out.push(Move::Switch { gene: g, to: k });
                    }
                }
            }
        }
        NeighborhoodKind::InterSwap => {
            for i in 0..len {
                for j in i + 1..len {
                    let (gi, gj) = (ch.genes[i], ch.genes[j]);
                    let (ki, kj) = (ch.assignment[i], ch.assignment[j]);
                    let skilled =
                        instance.caregiver(kj).is_skilled(gi.service) && instance.caregiver(ki).is_skilled(gj.service);
                    if !skilled {
                        continue;
                    }
                    if ki != kj
                        && (serves_patient(ch, gi.patient, kj, &[i, j]) || serves_patient(ch, gj.patient, ki, &[i, j]))
                    {
                        continue;
                    }
                    out.push(Move::InterSwap { i, j });
                }
            }
        }
        NeighborhoodKind::IntraShift => {
            for from in 0..len {
                for to in 0..len {
                    if from != to {
                        out.push(Move::Shift { from, to });
                    }
                }
            }
        }
        NeighborhoodKind::IntraSwap => {
            for i in 0..len {
                for j in i + 1..len {
                    out.push(Move::Swap { i, j });
                }
            }
        }
    }
    out
}

/// Neighboring chromosomes of one kind, in move order.
pub fn neighbors(instance: &Instance, ch: &Chromosome, kind: NeighborhoodKind) -> Vec<Chromosome> {
    moves(instance, ch, kind).iter().map(|m| m.apply(ch)).collect()
}

/// Applies `m2` uniformly drawn moves of `kind` in sequence.
pub fn shake(instance: &Instance, ch: &Chromosome, kind: NeighborhoodKind, m2: usize, rng: &mut Rng) -> Chromosome {
    let mut cur = ch.clone();
    for _ in 0..m2 {
        let ms = moves(instance, &cur, kind);
        match ms.choose(rng) {
            Some(m) => cur = m.apply(&cur),
            None => break,
        }
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GvnsParams {
    /// Consecutive non-improving outer iterations before stopping.
    pub stop_after: usize,
    /// Number of random moves per shake.
    pub shake_strength: usize,
    pub shake_order: [NeighborhoodKind; 4],
    pub local_search_order: [NeighborhoodKind; 4],
    /// Weight of the violation total in the penalized objective.
    pub gamma: f64,
    /// Checked between outer iterations.
    pub time_limit_ms: Option<u64>,
    /// Record elapsed milliseconds in the trace.
    pub timing: bool,
    /// Minimize the violation total alone and stop at the first feasible
    /// plan.
    #[serde(default)]
    pub feasibility_only: bool,
}

impl GvnsParams {
    pub fn for_instance(instance: &Instance) -> Self {
        use NeighborhoodKind::*;
        Self {
            stop_after: 100,
            shake_strength: instance.c() + 1,
            shake_order: [Switch, IntraSwap, InterSwap, IntraShift],
            local_search_order: [InterSwap, IntraSwap, IntraShift, Switch],
            gamma: 100.0,
            time_limit_ms: None,
            timing: false,
            feasibility_only: false,
        }
    }

    pub fn orders_are_permutations(&self) -> bool {
        let full = |o: &[NeighborhoodKind; 4]| {
            use NeighborhoodKind::*;
            [Switch, InterSwap, IntraShift, IntraSwap].iter().all(|k| o.contains(k))
        };
        full(&self.shake_order) && full(&self.local_search_order)
    }
}

/// Penalized objective of one variant, counting decodes.
pub struct Evaluator<'a> {
    pub instance: &'a Instance,
    pub variant: VariantId,
    pub params: DecodeParams,
    /// Score by the violation total instead of the objective.
    pub feasibility_only: bool,
    evaluations: std::sync::atomic::AtomicU64,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance, variant: VariantId, gamma: f64) -> Self {
        let mut params = DecodeParams::for_variant(variant, instance);
        params.weights.penalty = gamma;
        Self {
            instance,
            variant,
            params,
            feasibility_only: false,
            evaluations: 0.into(),
        }
    }

    pub fn schedule(&self, ch: &Chromosome) -> Schedule {
        decode_trusted(
            self.instance,
            ch,
            self.variant,
            &self.params,
            self.instance.nominal_times(),
            None,
        )
    }

    pub fn value(&self, ch: &Chromosome) -> f64 {
        self.evaluations.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let s = self.schedule(ch);
        if self.feasibility_only {
            return s.penalty;
        }
        objective(&s, self.variant, &self.params.weights).expect("variant matches")
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(std::sync::atomic::Ordering::Relaxed)
    }
}

const PARALLEL_MIN: usize = 128;

/// Best strictly improving neighbor; ties go to the first in move order.
fn best_neighbor(
    eval: &Evaluator<'_>,
    ch: &Chromosome,
    value: f64,
    kind: NeighborhoodKind,
) -> Option<(Chromosome, f64)> {
    let ms = moves(eval.instance, ch, kind);
    let values: Vec<f64> = if ms.len() >= PARALLEL_MIN {
        par::map(&ms, |_, m| eval.value(&m.apply(ch)))
    } else {
        ms.iter().map(|m| eval.value(&m.apply(ch))).collect()
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v < value && best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, v)| (ms[i].apply(ch), v))
}

fn vnd_eval(eval: &Evaluator<'_>, ch: Chromosome, value: f64, order: &[NeighborhoodKind; 4]) -> (Chromosome, f64) {
    let mut cur = ch;
    let mut val = value;
    let mut l = 0;
    while l < order.len() {
        match best_neighbor(eval, &cur, val, order[l]) {
            Some((next, v)) => {
                cur = next;
                val = v;
                l = 0;
            }
            None => l += 1,
        }
    }
    (cur, val)
}

/// Variable neighborhood descent: returns a local optimum with respect to
/// all four neighborhoods under the penalized objective.
pub fn vnd(
    instance: &Instance,
    ch: &Chromosome,
    variant: VariantId,
    order: &[NeighborhoodKind; 4],
    params: &DecodeParams,
) -> Chromosome {
    let mut eval = Evaluator::new(instance, variant, params.weights.penalty);
    eval.params = *params;
    let v = eval.value(ch);
    vnd_eval(&eval, ch.clone(), v, order).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub elapsed_ms: f64,
    pub best: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone)]
pub struct GvnsResult {
    pub best: Chromosome,
    pub value: f64,
    pub schedule: Schedule,
    pub trace: Vec<TraceRow>,
    pub evaluations: u64,
}

/// Runs the search from a variant-specific initial solution.
pub fn gvns_solve(instance: &Instance, variant: VariantId, params: &GvnsParams, seed: u64) -> GvnsResult {
    let mut rng = rng::stream(seed, &[tag::INITIAL]);
    let init = initial_solution(instance, variant, &mut rng);
    gvns_from(instance, variant, params, seed, init)
}

/// Runs the search from a given chromosome.
pub fn gvns_from(
    instance: &Instance,
    variant: VariantId,
    params: &GvnsParams,
    seed: u64,
    init: Chromosome,
) -> GvnsResult {
    let clock = Stopwatch::start(params.timing || params.time_limit_ms.is_some());
    let mut eval = Evaluator::new(instance, variant, params.gamma);
    eval.feasibility_only = params.feasibility_only;
    let mut rng = rng::stream(seed, &[tag::SEARCH]);
    let v0 = eval.value(&init);
    let (mut x, mut fx) = vnd_eval(&eval, init, v0, &params.local_search_order);
    let mut trace = vec![TraceRow {
        iteration: 0,
        elapsed_ms: clock.elapsed_ms(),
        best: fx,
        penalty: eval.schedule(&x).penalty,
    }];
    let mut idle = 0;
    let mut iteration = 0;
    while idle < params.stop_after && !x.is_empty() {
        if clock.exceeded(params.time_limit_ms) || (params.feasibility_only && fx == 0.0) {
            break;
        }
        iteration += 1;
        let mut improved = false;
        let mut k = 0;
        while k < params.shake_order.len() {
            let shaken = shake(instance, &x, params.shake_order[k], params.shake_strength, &mut rng);
            let vs = eval.value(&shaken);
            let (cand, fc) = vnd_eval(&eval, shaken, vs, &params.local_search_order);
            if fc < fx {
                x = cand;
                fx = fc;
                improved = true;
                k = 0;
            } else {
                k += 1;
            }
        }
        idle = if improved { 0 } else { idle + 1 };
        trace.push(TraceRow {
            iteration,
            elapsed_ms: clock.elapsed_ms(),
            best: fx,
            penalty: eval.schedule(&x).penalty,
        });
    }
    let schedule = eval.schedule(&x);
    GvnsResult {
        best: x,
        value: fx,
        schedule,
        trace,
        evaluations: eval.evaluations(),
    }
}

/// Variant-specific construction.
///
/// Single-window soft instances: genes sorted by window end, random
/// qualified caregivers, retried until feasible (bounded). Single-window hard
/// instances: genes sorted by window start, each given the qualified
/// caregiver who can arrive earliest. Everything else is random.
pub fn initial_solution(instance: &Instance, variant: VariantId, rng: &mut Rng) -> Chromosome {
    let single = instance.max_windows() <= 1;
    match variant {
        VariantId::SoftMtw if single => {
            let mut genes = instance.demanded_genes().to_vec();
            genes.sort_by(|x, y| {
                let bx = instance.patient(x.patient).windows[0].b;
                let by = instance.patient(y.patient).windows[0].b;
                bx.total_cmp(&by)
            });
            let eval = Evaluator::new(instance, variant, 100.0);
            let mut best: Option<(f64, Chromosome)> = None;
            for _ in 0..100 {
                let ch = assign_randomly(instance, genes.clone(), rng);
                let s = eval.schedule(&ch);
                if s.feasible {
                    return ch;
                }
                let v = eval.value(&ch);
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, ch));
                }
            }
            best.map(|(_, c)| c).unwrap_or_else(|| random_chromosome(instance, rng))
        }
        VariantId::HardMsmtw if single => earliest_arrival_construction(instance, rng),
        _ => random_chromosome(instance, rng),
    }
}

fn earliest_arrival_construction(instance: &Instance, rng: &mut Rng) -> Chromosome {
    let mut genes = instance.demanded_genes().to_vec();
    genes.sort_by(|x, y| {
        let ax = instance.patient(x.patient).windows[0].a;
        let ay = instance.patient(y.patient).windows[0].a;
        ax.total_cmp(&ay)
    });
    let travel = instance.travel();
    let mut time: Vec<f64> = instance.caregivers().iter().map(|k| k.duty.a).collect();
    let mut pos = vec![0usize; instance.c()];
    let mut assignment = Vec::with_capacity(genes.len());
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); instance.n()];
    for (idx, gene) in genes.iter().enumerate() {
        let p = instance.patient(gene.patient);
        let remaining: Vec<_> = genes[idx + 1..]
            .iter()
            .filter(|g| g.patient == gene.patient)
            .map(|g| g.service)
            .collect();
        let mut best: Option<(f64, usize)> = None;
        for &k in instance.qualified(gene.service) {
            if used[gene.patient - 1].contains(&k) {
                continue;
            }
            // keep a distinct caregiver available for the patient's later genes
            let mut taken = used[gene.patient - 1].clone();
            taken.push(k);
            let rest_ok = remaining
                .iter()
                .all(|&s| instance.qualified(s).iter().any(|q| !taken.contains(q)));
            if !rest_ok {
                continue;
            }
            let arr = time[k - 1] + travel.get(pos[k - 1], gene.patient);
            if best.is_none_or(|(b, _)| arr < b) {
                best = Some((arr, k));
            }
        }
        let k = match best {
            Some((_, k)) => k,
            None => {
                let ks = random_patient_assignment(instance, gene.patient, rng).unwrap_or_default();
                let j = p.demands.iter().position(|&s| s == gene.service).unwrap_or(0);
                ks.get(j).copied().unwrap_or(1)
            }
        };
        let arr = time[k - 1] + travel.get(pos[k - 1], gene.patient);
        let dur = instance.duration(gene.patient, gene.service).unwrap_or(0.0);
        time[k - 1] = arr.max(p.windows[0].a) + dur;
        pos[k - 1] = gene.patient;
        used[gene.patient - 1].push(k);
        assignment.push(k);
    }
    let ch = Chromosome::new(genes, assignment);
    if crate::model::is_valid(instance, &ch) {
        ch
    } else {
        crate::ga::repair(&ch, instance, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, is_valid, Caregiver, DurationEntry, Patient, TimeWindow, VisitGene};
    use crate::samples;

    fn sample_instance() -> (Instance, Chromosome) {
        let services = [(1, 3), (3, 1), (4, 3), (2, 1), (6, 2), (5, 2)];
        let mut patients: Vec<Patient> = services
            .iter()
            .map(|&(p, s)| Patient {
                id: p,
                location: [p as f64 * 3.0, 4.0],
                demands: vec![s],
                simultaneous: false,
                windows: vec![TimeWindow::new(0.0, 300.0)],
            })
            .collect();
        patients.sort_by_key(|p| p.id);
        let durations: Vec<DurationEntry> = services
            .iter()
            .map(|&(p, s)| DurationEntry {
                patient: p,
                service: s,
                minutes: 10.0,
            })
            .collect();
        let ks = (1..=2)
            .map(|k| Caregiver {
                id: k,
                duty: TimeWindow::new(0.0, 400.0),
                skills: vec![1, 2, 3],
                max_visits: None,
            })
            .collect();
        let inst = build_instance([0.0, 0.0], patients, ks, &durations, 600.0).unwrap();
        let genes = services.iter().map(|&(p, s)| VisitGene::new(p, s)).collect();
        (inst, Chromosome::new(genes, vec![1, 2, 2, 1, 2, 1]))
    }

    #[test]
    fn neighborhood_sizes_match_closed_forms() {
        let inst = samples::uniform(6, 2);
        let mut r = rng::stream(1, &[]);
        let ch = random_chromosome(&inst, &mut r);
        let count = |k| moves(&inst, &ch, k).len();
        assert_eq!(count(NeighborhoodKind::Switch), 6);
        assert_eq!(count(NeighborhoodKind::InterSwap), 15);
        assert_eq!(count(NeighborhoodKind::IntraShift), 30);
        assert_eq!(count(NeighborhoodKind::IntraSwap), 15);
    }

    #[test]
    fn worked_example_moves() {
        let (inst, ch) = sample_instance();
        let switched = neighbors(&inst, &ch, NeighborhoodKind::Switch);
        assert_eq!(switched[0].assignment, vec![2, 2, 2, 1, 2, 1]);
        let inter = Move::InterSwap { i: 0, j: 4 }.apply(&ch);
        assert_eq!(inter.assignment, vec![2, 2, 2, 1, 1, 1]);
        let shifted = Move::Shift { from: 0, to: 3 }.apply(&ch);
        assert_eq!(shifted.encode(), "3:1@2 4:3@2 2:1@1 1:3@1 6:2@2 5:2@1");
        let swapped = Move::Swap { i: 0, j: 4 }.apply(&ch);
        assert_eq!(swapped.encode(), "6:2@2 3:1@2 4:3@2 2:1@1 1:3@1 5:2@1");
        for kind in [
            NeighborhoodKind::Switch,
            NeighborhoodKind::InterSwap,
            NeighborhoodKind::IntraShift,
            NeighborhoodKind::IntraSwap,
        ] {
            assert!(neighbors(&inst, &ch, kind).iter().all(|x| is_valid(&inst, x)));
        }
    }

    #[test]
    fn shake_zero_is_identity_and_seeded() {
        let (inst, ch) = sample_instance();
        let mut r = rng::stream(3, &[]);
        assert_eq!(shake(&inst, &ch, NeighborhoodKind::Switch, 0, &mut r), ch);
        let a = shake(&inst, &ch, NeighborhoodKind::IntraShift, 3, &mut rng::stream(9, &[]));
        let b = shake(&inst, &ch, NeighborhoodKind::IntraShift, 3, &mut rng::stream(9, &[]));
        assert_eq!(a, b);
        assert!(is_valid(&inst, &a));
    }

    #[test]
    fn single_alternative_switch_is_forced() {
        let inst = samples::uniform(1, 2);
        let ch = Chromosome::new(vec![VisitGene::new(1, 1)], vec![1]);
        let ms = moves(&inst, &ch, NeighborhoodKind::Switch);
        assert_eq!(ms, vec![Move::Switch { gene: 0, to: 2 }]);
        let got = shake(&inst, &ch, NeighborhoodKind::Switch, 1, &mut rng::stream(4, &[]));
        assert_eq!(got.assignment, vec![2]);
    }

    #[test]
    fn vnd_reaches_a_joint_local_optimum() {
        let (inst, ch) = sample_instance();
        let v = VariantId::HardMsmtw;
        let params = DecodeParams::for_variant(v, &inst);
        let order = GvnsParams::for_instance(&inst).local_search_order;
        let out = vnd(&inst, &ch, v, &order, &params);
        let eval = Evaluator::new(&inst, v, params.weights.penalty);
        let fx = eval.value(&out);
        assert!(fx <= eval.value(&ch));
        for kind in order {
            for nb in neighbors(&inst, &out, kind) {
                assert!(eval.value(&nb) >= fx);
            }
        }
        assert_eq!(vnd(&inst, &out, v, &order, &params), out);
    }

    #[test]
    fn tiny_one_optimum() {
        let inst = samples::tiny_one();
        let params = GvnsParams::for_instance(&inst);
        let r = gvns_solve(&inst, VariantId::Multiobj, &params, 5);
        assert_eq!(r.schedule.total_travel(), 20.0);
        assert!(r.schedule.feasible);
    }

    #[test]
    fn empty_instance_has_zero_objective() {
        let inst = samples::empty(2);
        let r = gvns_solve(&inst, VariantId::HardMsmtw, &GvnsParams::for_instance(&inst), 1);
        assert_eq!(r.value, 0.0);
        assert!(r.schedule.caregivers.iter().all(|k| k.route.is_empty()));
    }

    #[test]
    fn same_seed_same_trace() {
        let (inst, _) = sample_instance();
        let mut p = GvnsParams::for_instance(&inst);
        p.stop_after = 5;
        let a = gvns_solve(&inst, VariantId::HardMsmtw, &p, 11);
        let b = gvns_solve(&inst, VariantId::HardMsmtw, &p, 11);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best, b.best);
        assert!(a.trace.windows(2).all(|w| w[1].best <= w[0].best));
    }

    #[test]
    fn single_window_hard_construction_sorts_by_start() {
        let (inst, _) = sample_instance();
        let ch = initial_solution(&inst, VariantId::HardMsmtw, &mut rng::stream(2, &[]));
        assert!(is_valid(&inst, &ch));
        let starts: Vec<f64> = ch.genes.iter().map(|g| inst.patient(g.patient).windows[0].a).collect();
        assert!(starts.windows(2).all(|w| w[0] <= w[1]));
    }
}
