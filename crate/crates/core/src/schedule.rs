//! Decoding chromosomes into timed schedules, objectives and constraint checks.
//!
//! All five model variants share one timing engine. Caregivers leave the
//! center at the start of their duty and visits are processed as a
//! discrete-event simulation in order of arrival time (ties go to the lower
//! caregiver id). A patient's window is fixed when the first caregiver
//! arrives. Caregivers reaching a synchronized patient wait until every
//! serving caregiver is present; the common start is the maximum of the
//! window start and all arrivals. When every remaining caregiver is waiting
//! at a synchronized patient the routes contain a cyclic dependency and the
//! schedule is marked as a synchronization failure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_chromosome, Chromosome, Instance, Matrix, TimeWindow, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantId {
    /// Soft multiple time windows, single services.
    SoftMtw,
    /// Hard multiple windows with multiple, possibly synchronized services.
    HardMsmtw,
    /// Stochastic model with tardiness and overtime recourse.
    SprPenalty,
    /// Stochastic model where late patients are skipped.
    SprSkip,
    /// Travel, waiting and workload balance as three objectives.
    Multiobj,
}

impl VariantId {
    pub const ALL: [VariantId; 5] = [
        VariantId::SoftMtw,
        VariantId::HardMsmtw,
        VariantId::SprPenalty,
        VariantId::SprSkip,
        VariantId::Multiobj,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VariantId::SoftMtw => "soft-mtw",
            VariantId::HardMsmtw => "hard-msmtw",
            VariantId::SprPenalty => "spr-penalty",
            VariantId::SprSkip => "spr-skip",
            VariantId::Multiobj => "multiobj",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, VariantId::SprPenalty | VariantId::SprSkip)
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        VariantId::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| format!("unknown variant '{s}'"))
    }
}

/// Objective weights. `penalty` multiplies the constraint violation total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub penalty: f64,
}

impl Weights {
    pub fn for_variant(variant: VariantId) -> Self {
        match variant {
            VariantId::SoftMtw => Weights {
                alpha: 1.0 / 3.0,
                beta: 1.0 / 3.0,
                gamma: 1.0 / 3.0,
                penalty: 100.0,
            },
            VariantId::HardMsmtw | VariantId::Multiobj => Weights {
                alpha: 0.5,
                beta: 0.5,
                gamma: 0.0,
                penalty: 100.0,
            },
            VariantId::SprPenalty | VariantId::SprSkip => Weights {
                alpha: 1.0,
                beta: 1.0,
                gamma: 1.0,
                penalty: 100.0,
            },
        }
    }
}

/// Budgets of the soft-window model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftLimits {
    pub e_max: f64,
    pub t_max: f64,
    pub w_max: f64,
}

impl Default for SoftLimits {
    fn default() -> Self {
        Self {
            e_max: 0.0,
            t_max: 15.0,
            w_max: 90.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    pub weights: Weights,
    pub limits: SoftLimits,
    /// Sweep budget of [`sync_fixpoint`].
    pub max_iter_syn: usize,
}

impl DecodeParams {
    pub fn for_variant(variant: VariantId, instance: &Instance) -> Self {
        Self {
            weights: Weights::for_variant(variant),
            limits: SoftLimits::default(),
            max_iter_syn: 2 * instance.c().max(1),
        }
    }
}

/// Travel matrix and durations used by one decode; nominal or sampled.
#[derive(Debug, Clone, Copy)]
pub struct TimeData<'a> {
    pub travel: &'a Matrix,
    /// Parallel to each patient's sorted demand list.
    pub durations: &'a [Vec<f64>],
}

impl Instance {
    pub fn nominal_times(&self) -> TimeData<'_> {
        TimeData {
            travel: self.travel(),
            durations: self.duration_table(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no window satisfies the earliness, tardiness and waiting budgets")]
pub struct Infeasible;

/// Splits an early arrival between earliness and waiting.
///
/// When `alpha <= gamma` earliness is cheaper and absorbs the gap first, up
/// to `e_max`; the rest becomes waiting. Otherwise waiting absorbs first, up
/// to `w_max`, and the overflow becomes earliness. Returns the earliness and
/// the caregiver's updated cumulative wait.
pub fn split_early_arrival(
    early: f64,
    alpha: f64,
    gamma: f64,
    e_max: f64,
    w_k: f64,
    w_max: f64,
) -> Result<(f64, f64), Infeasible> {
    if alpha <= gamma {
        if early <= e_max {
            Ok((early, w_k))
        } else if w_k + early - e_max <= w_max {
            Ok((e_max, w_k + early - e_max))
        } else {
            Err(Infeasible)
        }
    } else if early + w_k <= w_max {
        Ok((0.0, w_k + early))
    } else if w_k + early - w_max <= e_max {
        Ok((w_k + early - w_max, w_max))
    } else {
        Err(Infeasible)
    }
}

/// Outcome of placing one visit in a window of the soft model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodChoice {
    pub window: usize,
    pub earliness: f64,
    pub tardiness: f64,
    pub wait: f64,
}

impl PeriodChoice {
    fn cost(&self, w: &Weights) -> f64 {
        w.alpha * self.earliness + w.beta * self.tardiness + w.gamma * self.wait
    }

    fn start(&self, arrival: f64) -> f64 {
        arrival + self.wait
    }
}

fn soft_eval(
    idx: usize,
    tw: &TimeWindow,
    arrival: f64,
    weights: &Weights,
    limits: &SoftLimits,
    duration: f64,
    wait_so_far: f64,
) -> Result<PeriodChoice, Infeasible> {
    let (earliness, wait, start) = if arrival >= tw.a {
        (0.0, 0.0, arrival)
    } else {
        let (u, w_new) = split_early_arrival(
            tw.a - arrival,
            weights.alpha,
            weights.gamma,
            limits.e_max,
            wait_so_far,
            limits.w_max,
        )?;
        (u, w_new - wait_so_far, tw.a - u)
    };
    let tardiness = (start + duration - tw.b).max(0.0);
    if tardiness > limits.t_max {
        return Err(Infeasible);
    }
    Ok(PeriodChoice {
        window: idx,
        earliness,
        tardiness,
        wait,
    })
}

/// Same placement rules with the budgets ignored; returns the budget excess.
fn soft_eval_relaxed(
    idx: usize,
    tw: &TimeWindow,
    arrival: f64,
    weights: &Weights,
    limits: &SoftLimits,
    duration: f64,
    wait_so_far: f64,
) -> (PeriodChoice, f64) {
    let (earliness, wait) = if arrival >= tw.a {
        (0.0, 0.0)
    } else {
        let early = tw.a - arrival;
        if weights.alpha <= weights.gamma {
            let u = early.min(limits.e_max);
            (u, early - u)
        } else {
            let w = early.min((limits.w_max - wait_so_far).max(0.0));
            (early - w, w)
        }
    };
    let start = arrival + wait;
    let tardiness = (start + duration - tw.b).max(0.0);
    let over_wait = (wait_so_far + wait - limits.w_max).max(0.0) - (wait_so_far - limits.w_max).max(0.0);
    let excess = (earliness - limits.e_max).max(0.0) + (tardiness - limits.t_max).max(0.0) + over_wait;
    (
        PeriodChoice {
            window: idx,
            earliness,
            tardiness,
            wait,
        },
        excess,
    )
}

/// Picks the window minimizing `alpha*u + beta*v + gamma*wait` among those
/// that respect the soft-model budgets. Ties go to the lowest index.
pub fn select_period_soft(
    windows: &[TimeWindow],
    arrival: f64,
    weights: &Weights,
    limits: &SoftLimits,
    duration: f64,
    wait_so_far: f64,
) -> Result<PeriodChoice, Infeasible> {
    let mut best: Option<(f64, PeriodChoice)> = None;
    for (l, tw) in windows.iter().enumerate() {
        if let Ok(choice) = soft_eval(l, tw, arrival, weights, limits, duration, wait_so_far) {
            let c = choice.cost(weights);
            if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
                best = Some((c, choice));
            }
        }
    }
    best.map(|(_, c)| c).ok_or(Infeasible)
}

fn soft_place(
    windows: &[TimeWindow],
    fixed: Option<usize>,
    arrival: f64,
    weights: &Weights,
    limits: &SoftLimits,
    duration: f64,
    wait_so_far: f64,
) -> (PeriodChoice, f64) {
    let strict = match fixed {
        Some(l) => soft_eval(l, &windows[l], arrival, weights, limits, duration, wait_so_far),
        None => select_period_soft(windows, arrival, weights, limits, duration, wait_so_far),
    };
    if let Ok(c) = strict {
        return (c, 0.0);
    }
    let candidates: Vec<usize> = match fixed {
        Some(l) => vec![l],
        None => (0..windows.len()).collect(),
    };
    let mut best: Option<(f64, f64, PeriodChoice)> = None;
    for l in candidates {
        let (c, ex) = soft_eval_relaxed(l, &windows[l], arrival, weights, limits, duration, wait_so_far);
        let cost = c.cost(weights);
        let better = match &best {
            None => true,
            Some((bex, bcost, _)) => ex < *bex || (ex == *bex && cost < *bcost),
        };
        if better {
            best = Some((ex, cost, c));
        }
    }
    let (ex, _, c) = best.expect("patients have at least one window");
    (c, ex)
}

/// Window with the least tardiness for a service starting no earlier than
/// `arrival`; ties go to the lowest index.
pub fn least_tardy_window(windows: &[TimeWindow], arrival: f64, duration: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (l, tw) in windows.iter().enumerate() {
        let tard = (arrival.max(tw.a) + duration - tw.b).max(0.0);
        if tard < best.1 {
            best = (l, tard);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub gene: usize,
    pub caregiver: usize,
    pub patient: usize,
    pub service: u32,
    pub duration: f64,
    pub arrival: f64,
    pub start: f64,
    pub completion: f64,
    pub window: Option<usize>,
    pub earliness: f64,
    pub tardiness: f64,
    pub wait: f64,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientOutcome {
    pub window: Option<usize>,
    pub earliness: f64,
    pub tardiness: f64,
    pub skipped: bool,
    pub sync_start: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaregiverOutcome {
    pub id: usize,
    /// Gene indices in visiting order.
    pub route: Vec<usize>,
    pub wait: f64,
    /// Service plus travel time.
    pub working: f64,
    pub travel: f64,
    pub cost: f64,
    pub return_time: f64,
    pub overtime: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub variant: VariantId,
    /// Indexed by gene position in the chromosome.
    pub visits: Vec<Visit>,
    /// Indexed by patient id − 1.
    pub patients: Vec<PatientOutcome>,
    /// Indexed by caregiver id − 1.
    pub caregivers: Vec<CaregiverOutcome>,
    pub feasible: bool,
    /// Variant-specific violation total (minutes, or counts for skips).
    pub penalty: f64,
    pub tardiness: f64,
    pub overtime: f64,
    /// Soft-model budget excess.
    pub limit_excess: f64,
    pub sync_failure: bool,
    pub skipped: usize,
    pub over_visits: usize,
}

impl Schedule {
    pub fn total_wait(&self) -> f64 {
        self.caregivers.iter().map(|k| k.wait).sum()
    }

    pub fn total_travel(&self) -> f64 {
        self.caregivers.iter().map(|k| k.travel).sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.caregivers.iter().map(|k| k.cost).sum()
    }

    pub fn total_deviation(&self) -> f64 {
        self.caregivers.iter().map(|k| k.deviation).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("invalid chromosome: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidChromosome(Vec<Violation>),
    #[error("schedule decoded as {found} but evaluated as {expected}")]
    VariantMismatch { expected: VariantId, found: VariantId },
    #[error("forced window list must name one valid window per patient")]
    BadForcedWindows,
}

/// Decodes a chromosome with nominal times.
pub fn decode(
    instance: &Instance,
    chromosome: &Chromosome,
    variant: VariantId,
    params: &DecodeParams,
) -> Result<Schedule, ScheduleError> {
    decode_with(instance, chromosome, variant, params, instance.nominal_times(), None)
}

/// Decodes with explicit times and, optionally, one forced window per patient.
pub fn decode_with(
    instance: &Instance,
    chromosome: &Chromosome,
    variant: VariantId,
    params: &DecodeParams,
    times: TimeData<'_>,
    forced: Option<&[usize]>,
) -> Result<Schedule, ScheduleError> {
    let violations = validate_chromosome(instance, chromosome);
    if !violations.is_empty() {
        return Err(ScheduleError::InvalidChromosome(violations));
    }
    if let Some(f) = forced {
        let ok = f.len() == instance.n() && f.iter().zip(instance.patients()).all(|(&l, p)| l < p.windows.len());
        if !ok {
            return Err(ScheduleError::BadForcedWindows);
        }
    }
    Ok(decode_trusted(instance, chromosome, variant, params, times, forced))
}

#[derive(Clone, Copy)]
struct CgState {
    time: f64,
    pos: usize,
    next: usize,
    blocked: bool,
    wait: f64,
}

/// Decoder for chromosomes already known to be valid.
pub(crate) fn decode_trusted(
    instance: &Instance,
    ch: &Chromosome,
    variant: VariantId,
    params: &DecodeParams,
    times: TimeData<'_>,
    forced: Option<&[usize]>,
) -> Schedule {
    let c = instance.c();
    let n = instance.n();
    let routes = ch.routes(c);
    let weights = &params.weights;
    let limits = &params.limits;
    let sync_enabled = variant != VariantId::SprSkip;

    let mut visits: Vec<Visit> = ch
        .genes
        .iter()
        .zip(&ch.assignment)
        .enumerate()
        .map(|(g, (gene, &k))| {
            let p = instance.patient(gene.patient);
            let j = p.demands.iter().position(|&s| s == gene.service).unwrap_or(0);
            Visit {
                gene: g,
                caregiver: k,
                patient: gene.patient,
                service: gene.service,
                duration: times.durations[gene.patient - 1][j],
                arrival: f64::INFINITY,
                start: f64::INFINITY,
                completion: f64::INFINITY,
                window: None,
                earliness: 0.0,
                tardiness: 0.0,
                wait: 0.0,
                skipped: false,
            }
        })
        .collect();

    let mut window: Vec<Option<usize>> = match forced {
        Some(f) => f.iter().map(|&l| Some(l)).collect(),
        None => vec![None; n],
    };
    let mut sync_start: Vec<Option<f64>> = vec![None; n];
    let mut waiting: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut limit_excess = 0.0;

    let mut cg: Vec<CgState> = instance
        .caregivers()
        .iter()
        .map(|k| CgState {
            time: k.duty.a,
            pos: 0,
            next: 0,
            blocked: false,
            wait: 0.0,
        })
        .collect();

    loop {
        let mut pick: Option<(f64, usize)> = None;
        for (k, st) in cg.iter().enumerate() {
            if st.blocked || st.next >= routes[k].len() {
                continue;
            }
            let p = visits[routes[k][st.next]].patient;
            let arr = st.time + times.travel.get(st.pos, p);
            if pick.is_none_or(|(t, _)| arr < t) {
                pick = Some((arr, k));
            }
        }
        let Some((arrival, k)) = pick else { break };
        let g = routes[k][cg[k].next];
        let pid = visits[g].patient;
        let patient = instance.patient(pid);
        let dur = visits[g].duration;
        visits[g].arrival = arrival;

        if variant == VariantId::SprSkip {
            let (l, tard) = match window[pid - 1] {
                Some(l) => {
                    let tw = &patient.windows[l];
                    (l, (arrival.max(tw.a) + dur - tw.b).max(0.0))
                }
                None => least_tardy_window(&patient.windows, arrival, dur),
            };
            let v = &mut visits[g];
            if tard > 0.0 {
                v.skipped = true;
                v.start = arrival;
                v.completion = arrival;
            } else {
                v.window = Some(l);
                v.start = arrival.max(patient.windows[l].a);
                v.wait = v.start - arrival;
                v.completion = v.start + dur;
            }
            let st = &mut cg[k];
            st.wait += v.wait;
            st.time = v.completion;
            st.pos = pid;
            st.next += 1;
            continue;
        }

        if patient.simultaneous && sync_enabled {
            if window[pid - 1].is_none() {
                let l = match variant {
                    VariantId::SoftMtw => {
                        soft_place(&patient.windows, None, arrival, weights, limits, dur, cg[k].wait)
                            .0
                            .window
                    }
                    _ => least_tardy_window(&patient.windows, arrival, dur).0,
                };
                window[pid - 1] = Some(l);
            }
            waiting[pid - 1].push((k, g));
            cg[k].blocked = true;
            if waiting[pid - 1].len() == patient.demands.len() {
                let tw = patient.windows[window[pid - 1].unwrap()];
                let ss = waiting[pid - 1]
                    .iter()
                    .map(|&(_, gg)| visits[gg].arrival)
                    .fold(tw.a, f64::max);
                sync_start[pid - 1] = Some(ss);
                for (kk, gg) in std::mem::take(&mut waiting[pid - 1]) {
                    let v = &mut visits[gg];
                    v.window = Some(window[pid - 1].unwrap());
                    v.start = ss;
                    v.wait = ss - v.arrival;
                    v.completion = ss + v.duration;
                    v.tardiness = (v.completion - tw.b).max(0.0);
                    let st = &mut cg[kk];
                    if variant == VariantId::SoftMtw {
                        limit_excess += (v.tardiness - limits.t_max).max(0.0);
                        limit_excess += (st.wait + v.wait - limits.w_max).max(0.0) - (st.wait - limits.w_max).max(0.0);
                    }
                    st.wait += v.wait;
                    st.time = v.completion;
                    st.pos = pid;
                    st.next += 1;
                    st.blocked = false;
                }
            }
            continue;
        }

        let v = &mut visits[g];
        match variant {
            VariantId::SoftMtw => {
                let (choice, ex) = soft_place(
                    &patient.windows,
                    window[pid - 1],
                    arrival,
                    weights,
                    limits,
                    dur,
                    cg[k].wait,
                );
                window[pid - 1] = Some(choice.window);
                limit_excess += ex;
                v.window = Some(choice.window);
                v.earliness = choice.earliness;
                v.tardiness = choice.tardiness;
                v.wait = choice.wait;
                v.start = choice.start(arrival);
            }
            _ => {
                let l = match window[pid - 1] {
                    Some(l) => l,
                    None => least_tardy_window(&patient.windows, arrival, dur).0,
                };
                window[pid - 1] = Some(l);
                let tw = &patient.windows[l];
                v.window = Some(l);
                v.start = arrival.max(tw.a);
                v.wait = v.start - arrival;
                v.tardiness = (v.start + dur - tw.b).max(0.0);
            }
        }
        v.completion = v.start + dur;
        let st = &mut cg[k];
        st.wait += v.wait;
        st.time = v.completion;
        st.pos = pid;
        st.next += 1;
    }

    let sync_failure = cg.iter().enumerate().any(|(k, st)| st.next < routes[k].len());

    let end = instance.end_node();
    let mut caregivers = Vec::with_capacity(c);
    for (k, route) in routes.iter().enumerate() {
        let duty = instance.caregivers()[k].duty;
        let mut travel = 0.0;
        let mut cost = 0.0;
        let mut service = 0.0;
        let mut prev = 0;
        for &g in route {
            let p = visits[g].patient;
            travel += times.travel.get(prev, p);
            cost += instance.cost().get(prev, p);
            if !visits[g].skipped {
                service += visits[g].duration;
            }
            prev = p;
        }
        let return_time = if route.is_empty() {
            duty.a
        } else {
            travel += times.travel.get(prev, end);
            cost += instance.cost().get(prev, end);
            if cg[k].next < route.len() {
                f64::INFINITY
            } else {
                cg[k].time + times.travel.get(prev, end)
            }
        };
        caregivers.push(CaregiverOutcome {
            id: k + 1,
            route: route.clone(),
            wait: cg[k].wait,
            working: service + travel,
            travel,
            cost,
            return_time,
            overtime: (return_time - duty.b).max(0.0),
            deviation: 0.0,
        });
    }
    let mean_working = if c == 0 {
        0.0
    } else {
        caregivers.iter().map(|k| k.working).sum::<f64>() / c as f64
    };
    for k in &mut caregivers {
        k.deviation = (k.working - mean_working).abs();
    }

    let mut patients: Vec<PatientOutcome> = (0..n)
        .map(|i| PatientOutcome {
            window: window[i],
            earliness: 0.0,
            tardiness: 0.0,
            skipped: false,
            sync_start: sync_start[i],
        })
        .collect();
    for v in &visits {
        let p = &mut patients[v.patient - 1];
        p.earliness += v.earliness;
        p.tardiness += v.tardiness;
        p.skipped |= v.skipped;
    }
    if variant == VariantId::SprSkip {
        for (i, p) in patients.iter_mut().enumerate() {
            if p.skipped && visits.iter().all(|v| v.patient != i + 1 || v.skipped) {
                p.window = None;
            }
        }
    }

    let tardiness: f64 = visits.iter().map(|v| v.tardiness).sum();
    let overtime: f64 = caregivers.iter().map(|k| k.overtime).sum();
    let skipped = visits.iter().filter(|v| v.skipped).count();
    let over_visits: usize = caregivers
        .iter()
        .map(|k| {
            let cap = instance.caregivers()[k.id - 1].max_visits;
            cap.map_or(0, |m| k.route.len().saturating_sub(m))
        })
        .sum();
    let penalty = if sync_failure {
        f64::INFINITY
    } else {
        match variant {
            VariantId::SoftMtw => limit_excess + overtime,
            VariantId::HardMsmtw | VariantId::Multiobj | VariantId::SprPenalty => tardiness + overtime,
            VariantId::SprSkip => (over_visits + skipped) as f64,
        }
    };

    Schedule {
        variant,
        visits,
        patients,
        caregivers,
        feasible: !sync_failure && penalty == 0.0,
        penalty,
        tardiness,
        overtime,
        limit_excess,
        sync_failure,
        skipped,
        over_visits,
    }
}

/// Penalized scalar objective of a schedule.
///
/// - soft-mtw: `sum(alpha*u + beta*v) + gamma*sum(wait)`
/// - hard-msmtw: `alpha*sum(wait) + beta*sum(D_k)`
/// - spr-penalty, spr-skip: transport cost
/// - multiobj: `f1 + f2 + f3`
///
/// Each is increased by `weights.penalty * schedule.penalty`; a
/// synchronization failure evaluates to infinity.
pub fn objective(schedule: &Schedule, variant: VariantId, weights: &Weights) -> Result<f64, ScheduleError> {
    if schedule.variant != variant {
        return Err(ScheduleError::VariantMismatch {
            expected: variant,
            found: schedule.variant,
        });
    }
    if schedule.sync_failure {
        return Ok(f64::INFINITY);
    }
    let base = match variant {
        VariantId::SoftMtw => {
            let ut: f64 = schedule
                .visits
                .iter()
                .map(|v| weights.alpha * v.earliness + weights.beta * v.tardiness)
                .sum();
            ut + weights.gamma * schedule.total_wait()
        }
        VariantId::HardMsmtw => weights.alpha * schedule.total_wait() + weights.beta * schedule.total_deviation(),
        VariantId::SprPenalty | VariantId::SprSkip => schedule.total_cost(),
        VariantId::Multiobj => {
            let f = objective_vector(schedule);
            f.f1 + f.f2 + f.f3
        }
    };
    if schedule.penalty > 0.0 {
        Ok(base + weights.penalty * schedule.penalty)
    } else {
        Ok(base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl ObjectiveVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }
}

/// Total travel, total waiting and total workload deviation.
pub fn objective_vector(schedule: &Schedule) -> ObjectiveVector {
    ObjectiveVector {
        f1: schedule.total_travel(),
        f2: schedule.total_wait(),
        f3: schedule.total_deviation(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleViolation {
    Encoding(Violation),
    Unscheduled { gene: usize },
    ArrivalMismatch { gene: usize },
    StartBeforeArrival { gene: usize },
    CompletionMismatch { gene: usize },
    RouteOrder { caregiver: usize, gene: usize },
    WindowViolation { gene: usize },
    EarlyStart { gene: usize },
    WaitBudget { caregiver: usize, excess: f64 },
    DutyViolation(usize, f64),
    SyncViolation { patient: usize },
    MaxVisits { caregiver: usize, excess: usize },
}

const EPS: f64 = 1e-9;

/// Checks the decoded schedule against the model's constraint families.
/// Returns an empty list iff every constraint holds.
pub fn feasibility_check(
    instance: &Instance,
    chromosome: &Chromosome,
    schedule: &Schedule,
    variant: VariantId,
    params: &DecodeParams,
) -> Vec<ScheduleViolation> {
    let mut out: Vec<ScheduleViolation> = validate_chromosome(instance, chromosome)
        .into_iter()
        .map(ScheduleViolation::Encoding)
        .collect();
    if !out.is_empty() {
        return out;
    }
    let travel = instance.travel();
    let limits = &params.limits;

    for (k, cg) in schedule.caregivers.iter().enumerate() {
        let duty = instance.caregivers()[k].duty;
        let mut prev_node = 0;
        let mut prev_done = duty.a;
        let mut prev_start: Option<f64> = None;
        for &g in &cg.route {
            let v = &schedule.visits[g];
            if !v.start.is_finite() {
                out.push(ScheduleViolation::Unscheduled { gene: g });
                break;
            }
            let expected = prev_done + travel.get(prev_node, v.patient);
            if (v.arrival - expected).abs() > EPS {
                out.push(ScheduleViolation::ArrivalMismatch { gene: g });
            }
            if v.start < v.arrival - EPS {
                out.push(ScheduleViolation::StartBeforeArrival { gene: g });
            }
            if let Some(ps) = prev_start {
                let gap = prev_done - ps + travel.get(prev_node, v.patient);
                if gap > 0.0 && v.start <= ps {
                    out.push(ScheduleViolation::RouteOrder {
                        caregiver: k + 1,
                        gene: g,
                    });
                }
            }
            let served = !v.skipped;
            let want_completion = if served { v.start + v.duration } else { v.start };
            if (v.completion - want_completion).abs() > EPS {
                out.push(ScheduleViolation::CompletionMismatch { gene: g });
            }
            if served {
                let p = instance.patient(v.patient);
                match v.window.and_then(|l| p.windows.get(l)) {
                    None => out.push(ScheduleViolation::WindowViolation { gene: g }),
                    Some(tw) => {
                        let ok = if variant == VariantId::SoftMtw {
                            v.start >= tw.a - limits.e_max - EPS && v.completion - tw.b <= limits.t_max + EPS
                        } else {
                            v.start >= tw.a - EPS && v.completion <= tw.b + EPS
                        };
                        if !ok {
                            out.push(ScheduleViolation::WindowViolation { gene: g });
                        }
                        let non_sync = !p.simultaneous || variant == VariantId::SprSkip;
                        if variant != VariantId::SoftMtw && non_sync && (v.start - v.arrival.max(tw.a)).abs() > EPS {
                            out.push(ScheduleViolation::EarlyStart { gene: g });
                        }
                    }
                }
            }
            prev_node = v.patient;
            prev_done = v.completion;
            prev_start = Some(v.start);
        }
        if !cg.route.is_empty() && cg.return_time.is_finite() {
            let excess = cg.return_time - duty.b;
            if excess > EPS {
                out.push(ScheduleViolation::DutyViolation(k + 1, excess));
            }
        }
        if variant == VariantId::SoftMtw && cg.wait > limits.w_max + EPS {
            out.push(ScheduleViolation::WaitBudget {
                caregiver: k + 1,
                excess: cg.wait - limits.w_max,
            });
        }
        if variant == VariantId::SprSkip {
            if let Some(m) = instance.caregivers()[k].max_visits {
                if cg.route.len() > m {
                    out.push(ScheduleViolation::MaxVisits {
                        caregiver: k + 1,
                        excess: cg.route.len() - m,
                    });
                }
            }
        }
    }

    if variant != VariantId::SprSkip {
        for p in instance.patients() {
            if !p.simultaneous {
                continue;
            }
            let vs: Vec<&Visit> = schedule.visits.iter().filter(|v| v.patient == p.id).collect();
            if vs.iter().any(|v| !v.start.is_finite()) {
                continue;
            }
            let s0 = vs[0].start;
            if vs.iter().any(|v| (v.start - s0).abs() > EPS) {
                out.push(ScheduleViolation::SyncViolation { patient: p.id });
            } else if variant != VariantId::SoftMtw {
                let a = vs[0].window.and_then(|l| p.windows.get(l)).map_or(0.0, |tw| tw.a);
                let latest = vs.iter().map(|v| v.arrival).fold(a, f64::max);
                if (s0 - latest).abs() > EPS {
                    out.push(ScheduleViolation::EarlyStart { gene: vs[0].gene });
                }
            }
        }
    }
    out
}

/// Result of the sweep-based synchronization fixpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncTrace {
    /// Synchronized start per patient (None for other patients).
    pub ss: Vec<Option<f64>>,
    /// Start time per gene after the last sweep.
    pub starts: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Synchronized starts after each sweep.
    pub history: Vec<Vec<Option<f64>>>,
}

/// Iterates Gauss-Seidel sweeps over the routes with fixed windows until no
/// synchronized start changes. Starts are raised monotonically from the
/// window start to the latest arrival. Gives up after `max_iter` sweeps.
pub fn sync_fixpoint(instance: &Instance, chromosome: &Chromosome, windows: &[usize], max_iter: usize) -> SyncTrace {
    let routes = chromosome.routes(instance.c());
    let travel = instance.travel();
    let mut ss: Vec<Option<f64>> = instance
        .patients()
        .iter()
        .map(|p| p.simultaneous.then(|| p.windows[windows[p.id - 1]].a))
        .collect();
    let mut starts = vec![0.0; chromosome.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        for (k, route) in routes.iter().enumerate() {
            let mut t = instance.caregivers()[k].duty.a;
            let mut pos = 0;
            for &g in route {
                let gene = chromosome.genes[g];
                let p = instance.patient(gene.patient);
                let arrival = t + travel.get(pos, gene.patient);
                let start = match ss[gene.patient - 1] {
                    Some(cur) => {
                        if arrival > cur {
                            ss[gene.patient - 1] = Some(arrival);
                            changed = true;
                        }
                        ss[gene.patient - 1].unwrap()
                    }
                    None => arrival.max(p.windows[windows[gene.patient - 1]].a),
                };
                starts[g] = start;
                t = start + instance.duration(gene.patient, gene.service).unwrap_or(0.0);
                pos = gene.patient;
            }
        }
        history.push(ss.clone());
        if !changed {
            converged = true;
            break;
        }
    }
    if converged {
        for (g, gene) in chromosome.genes.iter().enumerate() {
            if let Some(s) = ss[gene.patient - 1] {
                starts[g] = s;
            }
        }
    }
    SyncTrace {
        ss,
        starts,
        iterations,
        converged,
        history,
    }
}
