//! Exhaustive solvers for tiny instances, used as ground truth.
//!
//! The search space is every distinct qualified assignment of genes to
//! caregivers, every visiting order of each caregiver's genes, and (by
//! default) every window choice per patient. The decoder only sees each
//! caregiver's sequence, so one canonical interleaving per combination of
//! routes suffices: routes are concatenated in caregiver order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Chromosome, Instance, VisitGene};
use crate::par;
use crate::recourse::{replicate, RecourseKind, StochasticConfig};
use crate::rng::{self, tag};
use crate::schedule::{decode_trusted, objective, objective_vector, DecodeParams, Schedule, VariantId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_genes: usize,
    pub max_caregivers: usize,
    pub max_windows: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_genes: 7,
            max_caregivers: 3,
            max_windows: 3,
        }
    }
}

/// How each patient's window is chosen during enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowPolicy {
    /// Every combination of windows is tried.
    Enumerate,
    /// The decoder's own window rule is used.
    Decoder,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance exceeds oracle limits: {genes} genes, {caregivers} caregivers, {windows} windows per patient")]
    LimitsExceeded {
        genes: usize,
        caregivers: usize,
        windows: usize,
    },
    #[error("no feasible solution exists")]
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub chromosome: Chromosome,
    pub value: f64,
    /// Forced windows of the optimum, under [`WindowPolicy::Enumerate`].
    pub windows: Option<Vec<usize>>,
    pub schedule: Schedule,
    /// Number of decoded candidates.
    pub enumerated: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub objectives: [f64; 3],
    pub chromosome: Chromosome,
    pub windows: Option<Vec<usize>>,
}

fn check_limits(instance: &Instance, limits: &OracleLimits) -> Result<(), OracleError> {
    let genes = instance.gene_count();
    let caregivers = instance.c();
    let windows = instance.max_windows();
    if genes > limits.max_genes || caregivers > limits.max_caregivers || windows > limits.max_windows {
        return Err(OracleError::LimitsExceeded {
            genes,
            caregivers,
            windows,
        });
    }
    Ok(())
}

/// Distinct qualified caregiver tuples for a patient's demands, lexicographic.
fn patient_options(instance: &Instance, patient: usize) -> Vec<Vec<usize>> {
    let demands = &instance.patient(patient).demands;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(demands.len());
    fn go(instance: &Instance, demands: &[u32], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == demands.len() {
            out.push(cur.clone());
            return;
        }
        for &k in instance.qualified(demands[cur.len()]) {
            if !cur.contains(&k) {
                cur.push(k);
                go(instance, demands, cur, out);
                cur.pop();
            }
        }
    }
    go(instance, demands, &mut cur, &mut out);
    out
}

/// Every assignment of the canonical gene list, as caregiver per gene.
fn assignments(instance: &Instance) -> Vec<Vec<usize>> {
    let genes = instance.demanded_genes();
    let options: Vec<Vec<Vec<usize>>> = (1..=instance.n()).map(|p| patient_options(instance, p)).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; instance.n()];
    if options.iter().any(|o| o.is_empty()) {
        return out;
    }
    loop {
        out.push(
            genes
                .iter()
                .map(|g| {
                    let p = instance.patient(g.patient);
                    let j = p.demands.iter().position(|&s| s == g.service).unwrap_or(0);
                    options[g.patient - 1][pick[g.patient - 1]][j]
                })
                .collect(),
        );
        // odometer, last patient fastest
        let mut i = instance.n();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < options[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn window_choices(instance: &Instance, policy: WindowPolicy) -> Vec<Option<Vec<usize>>> {
    if policy == WindowPolicy::Decoder {
        return vec![None];
    }
    let sizes: Vec<usize> = instance.patients().iter().map(|p| p.windows.len()).collect();
    let mut out = Vec::new();
    let mut cur = vec![0usize; sizes.len()];
    loop {
        out.push(Some(cur.clone()));
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < sizes[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Calls `visit` on every candidate of one assignment, in enumeration order.
fn for_each_candidate(
    instance: &Instance,
    assignment: &[usize],
    windows: &[Option<Vec<usize>>],
    mut visit: impl FnMut(&Chromosome, &Option<Vec<usize>>),
) {
    let genes: &[VisitGene] = instance.demanded_genes();
    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); instance.c()];
    for (g, &k) in assignment.iter().enumerate() {
        routes[k - 1].push(g);
    }
    let mut ch = Chromosome::new(Vec::with_capacity(genes.len()), Vec::with_capacity(genes.len()));
    loop {
        ch.genes.clear();
        ch.assignment.clear();
        for (k, r) in routes.iter().enumerate() {
            for &g in r {
                ch.genes.push(genes[g]);
                ch.assignment.push(k + 1);
            }
        }
        for w in windows {
            visit(&ch, w);
        }
        // advance the last caregiver's permutation fastest
        let mut k = routes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if next_permutation(&mut routes[k]) {
                break;
            }
            routes[k].sort_unstable();
        }
    }
}

/// Feasible minimum of the variant's objective; ties go to the first
/// candidate in enumeration order.
pub fn brute_force_solve(
    instance: &Instance,
    variant: VariantId,
    limits: &OracleLimits,
    policy: WindowPolicy,
) -> Result<OracleSolution, OracleError> {
    check_limits(instance, limits)?;
    let params = DecodeParams::for_variant(variant, instance);
    let windows = window_choices(instance, policy);
    let all = assignments(instance);
    let per_assignment = par::map(&all, |_, a| {
        let mut best: Option<(f64, Chromosome, Option<Vec<usize>>)> = None;
        let mut count = 0u64;
        for_each_candidate(instance, a, &windows, |ch, w| {
            count += 1;
            let s = decode_trusted(instance, ch, variant, &params, instance.nominal_times(), w.as_deref());
            if !s.feasible {
                return;
            }
            let v = objective(&s, variant, &params.weights).expect("same variant");
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, ch.clone(), w.clone()));
            }
        });
        (best, count)
    });
    let enumerated = per_assignment.iter().map(|(_, c)| c).sum();
    let mut best: Option<(f64, Chromosome, Option<Vec<usize>>)> = None;
    for (b, _) in per_assignment.into_iter() {
        if let Some(cand) = b {
            if best.as_ref().is_none_or(|(v, _, _)| cand.0 < *v) {
                best = Some(cand);
            }
        }
    }
    let (value, chromosome, windows) = best.ok_or(OracleError::Infeasible)?;
    let schedule = decode_trusted(
        instance,
        &chromosome,
        variant,
        &params,
        instance.nominal_times(),
        windows.as_deref(),
    );
    Ok(OracleSolution {
        chromosome,
        value,
        windows,
        schedule,
        enumerated,
    })
}

fn dominates(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn insert_nondominated(archive: &mut Vec<ParetoPoint>, p: ParetoPoint) {
    if archive
        .iter()
        .any(|q| q.objectives == p.objectives || dominates(&q.objectives, &p.objectives))
    {
        return;
    }
    archive.retain(|q| !dominates(&p.objectives, &q.objectives));
    archive.push(p);
}

/// Exact Pareto set of feasible (travel, waiting, workload deviation)
/// vectors, one representative per vector (the first enumerated), sorted by
/// objectives.
pub fn brute_force_pareto(
    instance: &Instance,
    limits: &OracleLimits,
    policy: WindowPolicy,
) -> Result<Vec<ParetoPoint>, OracleError> {
    check_limits(instance, limits)?;
    let variant = VariantId::Multiobj;
    let params = DecodeParams::for_variant(variant, instance);
    let windows = window_choices(instance, policy);
    let all = assignments(instance);
    let local = par::map(&all, |_, a| {
        let mut archive = Vec::new();
        for_each_candidate(instance, a, &windows, |ch, w| {
            let s = decode_trusted(instance, ch, variant, &params, instance.nominal_times(), w.as_deref());
            if s.feasible {
                let p = ParetoPoint {
                    objectives: objective_vector(&s).as_array(),
                    chromosome: ch.clone(),
                    windows: w.clone(),
                };
                insert_nondominated(&mut archive, p);
            }
        });
        archive
    });
    let mut front = Vec::new();
    for archive in local {
        for p in archive {
            insert_nondominated(&mut front, p);
        }
    }
    if front.is_empty() {
        return Err(OracleError::Infeasible);
    }
    front.sort_by(|a, b| {
        a.objectives
            .iter()
            .zip(&b.objectives)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(front)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
}

/// Plain Monte Carlo mean of the recourse over a fixed number of
/// replications, on streams disjoint from the estimator's.
pub fn reference_expected_recourse(
    instance: &Instance,
    ch: &Chromosome,
    kind: RecourseKind,
    config: &StochasticConfig,
    replications: usize,
    seed: u64,
) -> ReferenceEstimate {
    const CHUNK: usize = 4096;
    let chunks = replications.div_ceil(CHUNK);
    let partial = par::map_range(chunks, |c| {
        let (mut sum, mut sq) = (0.0, 0.0);
        for rep in c * CHUNK..((c + 1) * CHUNK).min(replications) {
            let mut r = rng::stream(seed, &[tag::REFERENCE, rep as u64]);
            let v = replicate(instance, ch, kind, config, &mut r).0;
            sum += v;
            sq += v * v;
        }
        (sum, sq)
    });
    let (sum, sq) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = replications as f64;
    if replications == 0 {
        return ReferenceEstimate {
            mean: 0.0,
            std_error: 0.0,
            replications,
        };
    }
    let mean = sum / n;
    let var = if replications > 1 {
        ((sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    ReferenceEstimate {
        mean,
        std_error: (var / n).sqrt(),
        replications,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_instance, Caregiver, DurationEntry, Patient, TimeWindow};
    use crate::samples;

    #[test]
    fn tiny_one_optimum_is_twenty() {
        let inst = samples::tiny_one();
        let sol = brute_force_solve(
            &inst,
            VariantId::Multiobj,
            &OracleLimits::default(),
            WindowPolicy::Enumerate,
        )
        .unwrap();
        assert_eq!(sol.schedule.total_travel(), 20.0);
        assert_eq!(sol.enumerated, 2);
        let front = brute_force_pareto(&inst, &OracleLimits::default(), WindowPolicy::Enumerate).unwrap();
        assert_eq!(front.len(), 1);
        assert_eq!(front[0].objectives, [20.0, 0.0, 0.0]);
    }

    #[test]
    fn symmetric_caregivers_tie_to_lower_id() {
        let inst = samples::uniform(1, 2);
        let sol = brute_force_solve(
            &inst,
            VariantId::HardMsmtw,
            &OracleLimits::default(),
            WindowPolicy::Decoder,
        )
        .unwrap();
        assert_eq!(sol.chromosome.assignment, vec![1]);
    }

    #[test]
    fn unreachable_window_is_infeasible() {
        let p = Patient {
            id: 1,
            location: [3.0, 4.0],
            demands: vec![1],
            simultaneous: false,
            windows: vec![TimeWindow::new(0.0, 1.0)],
        };
        let k = Caregiver {
            id: 1,
            duty: TimeWindow::new(0.0, 100.0),
            skills: vec![1],
            max_visits: None,
        };
        let d = [DurationEntry {
            patient: 1,
            service: 1,
            minutes: 1.0,
        }];
        let inst = build_instance([0.0, 0.0], vec![p], vec![k], &d, 600.0).unwrap();
        let r = brute_force_solve(
            &inst,
            VariantId::HardMsmtw,
            &OracleLimits::default(),
            WindowPolicy::Enumerate,
        );
        assert_eq!(r.unwrap_err(), OracleError::Infeasible);
    }

    #[test]
    fn limits_are_enforced() {
        let inst = samples::uniform(8, 2);
        let r = brute_force_solve(
            &inst,
            VariantId::HardMsmtw,
            &OracleLimits::default(),
            WindowPolicy::Decoder,
        );
        assert!(matches!(r, Err(OracleError::LimitsExceeded { genes: 8, .. })));
    }

    #[test]
    fn enumeration_covers_all_route_orders() {
        // n genes on c fully skilled caregivers: n! * C(n + c - 1, c - 1) candidates
        let inst = samples::uniform(4, 2);
        let sol = brute_force_solve(
            &inst,
            VariantId::HardMsmtw,
            &OracleLimits::default(),
            WindowPolicy::Decoder,
        )
        .unwrap();
        assert_eq!(sol.enumerated, 24 * 5);
    }

    #[test]
    fn reference_is_exact_without_variance() {
        let inst = samples::tiny_one();
        let ch = Chromosome::new(vec![VisitGene::new(1, 1), VisitGene::new(2, 1)], vec![1, 1]);
        let cfg = StochasticConfig::default().zero_variance();
        let r = reference_expected_recourse(&inst, &ch, RecourseKind::Penalty, &cfg, 1000, 1);
        assert_eq!((r.mean, r.std_error), (0.0, 0.0));
    }
}
