//! Scenario sampling and Monte Carlo estimation of expected recourse.
//!
//! Travel and service times are normal around their nominal values with a
//! standard deviation proportional to the mean; negative draws clamp to 0.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::model::{Chromosome, Instance, Matrix};
use crate::rng::{self, tag, Rng};
use crate::schedule::{decode_trusted, decode_with, DecodeParams, ScheduleError, TimeData, VariantId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticConfig {
    pub travel_sd_ratio: f64,
    pub service_sd_ratio: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub gap_window: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
    /// Common random numbers: every estimate call sees the same scenarios.
    pub crn: bool,
}

impl Default for StochasticConfig {
    fn default() -> Self {
        Self {
            travel_sd_ratio: 1.0 / 3.0,
            service_sd_ratio: 1.0 / 5.0,
            epsilon: 0.05,
            max_iter: 100,
            gap_window: 10,
            alpha: 1.0,
            gamma: 1.0,
            seed: 0,
            crn: false,
        }
    }
}

impl StochasticConfig {
    pub fn zero_variance(self) -> Self {
        Self {
            travel_sd_ratio: 0.0,
            service_sd_ratio: 0.0,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecourseKind {
    Penalty,
    Skip,
}

impl RecourseKind {
    pub fn for_variant(variant: VariantId) -> Self {
        if variant == VariantId::SprSkip {
            Self::Skip
        } else {
            Self::Penalty
        }
    }

    fn variant(self) -> VariantId {
        match self {
            Self::Penalty => VariantId::SprPenalty,
            Self::Skip => VariantId::SprSkip,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    MaxIter,
    Gap,
    /// The visiting order deadlocks a synchronized patient in every scenario.
    SyncFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecourseEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub tardiness: f64,
    pub overtime: f64,
    pub skipped: f64,
}

/// One realization of travel and service times.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub travel: Matrix,
    /// Parallel to each patient's demand list.
    pub durations: Vec<Vec<f64>>,
}

impl Scenario {
    pub fn nominal(instance: &Instance) -> Self {
        Self {
            travel: instance.travel().clone(),
            durations: instance.duration_table().to_vec(),
        }
    }

    pub fn times(&self) -> TimeData<'_> {
        TimeData {
            travel: &self.travel,
            durations: &self.durations,
        }
    }
}

fn draw(mean: f64, ratio: f64, rng: &mut Rng) -> f64 {
    let sd = mean * ratio;
    if mean == 0.0 || sd <= 0.0 || !sd.is_finite() {
        return mean.max(0.0);
    }
    Normal::new(mean, sd).map(|d| d.sample(rng)).unwrap_or(mean).max(0.0)
}

pub fn sample_scenario(instance: &Instance, config: &StochasticConfig, rng: &mut Rng) -> Scenario {
    let n = instance.n();
    let nominal = instance.travel();
    let mut travel = Matrix::zeros(n + 2);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                travel.set(i, j, draw(nominal.get(i, j), config.travel_sd_ratio, rng));
            }
        }
    }
    let end = n + 1;
    for j in 0..=n {
        travel.set(end, j, travel.get(0, j));
        travel.set(j, end, travel.get(j, 0));
    }
    let durations = instance
        .duration_table()
        .iter()
        .map(|row| row.iter().map(|&t| draw(t, config.service_sd_ratio, rng)).collect())
        .collect();
    Scenario { travel, durations }
}

/// Scenario stream for replication `rep` of estimate call `call_id`.
pub fn scenario_stream(config: &StochasticConfig, call_id: u64, rep: u64) -> Rng {
    let call = if config.crn { 0 } else { call_id };
    rng::stream(config.seed, &[tag::SCENARIO, call, rep])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyOutcome {
    pub tardiness: f64,
    pub overtime: f64,
    pub sync_failure: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipOutcome {
    /// Gene indices of skipped visits.
    pub skipped: Vec<usize>,
}

impl SkipOutcome {
    pub fn count(&self) -> usize {
        self.skipped.len()
    }
}

fn penalty_outcome(instance: &Instance, ch: &Chromosome, times: TimeData<'_>) -> PenaltyOutcome {
    let params = DecodeParams::for_variant(VariantId::SprPenalty, instance);
    let s = decode_trusted(instance, ch, VariantId::SprPenalty, &params, times, None);
    PenaltyOutcome {
        tardiness: if s.sync_failure { f64::INFINITY } else { s.tardiness },
        overtime: if s.sync_failure { f64::INFINITY } else { s.overtime },
        sync_failure: s.sync_failure,
    }
}

fn skip_outcome(instance: &Instance, ch: &Chromosome, times: TimeData<'_>) -> SkipOutcome {
    let params = DecodeParams::for_variant(VariantId::SprSkip, instance);
    let s = decode_trusted(instance, ch, VariantId::SprSkip, &params, times, None);
    SkipOutcome {
        skipped: s.visits.iter().filter(|v| v.skipped).map(|v| v.gene).collect(),
    }
}

/// Decodes under a realized scenario with synchronization and returns total
/// tardiness beyond window ends and total overtime beyond duty ends.
pub fn simulate_penalty_recourse(
    instance: &Instance,
    ch: &Chromosome,
    scenario: &Scenario,
) -> Result<PenaltyOutcome, ScheduleError> {
    let params = DecodeParams::for_variant(VariantId::SprPenalty, instance);
    decode_with(instance, ch, VariantId::SprPenalty, &params, scenario.times(), None)?;
    Ok(penalty_outcome(instance, ch, scenario.times()))
}

/// Decodes under a realized scenario; a visit whose least-tardy window is
/// still late is skipped and the caregiver moves on with travel only.
pub fn simulate_skip_recourse(
    instance: &Instance,
    ch: &Chromosome,
    scenario: &Scenario,
) -> Result<SkipOutcome, ScheduleError> {
    let params = DecodeParams::for_variant(VariantId::SprSkip, instance);
    decode_with(instance, ch, VariantId::SprSkip, &params, scenario.times(), None)?;
    Ok(skip_outcome(instance, ch, scenario.times()))
}

/// Recourse of one scenario: `(value, tardiness, overtime, skipped)`.
pub(crate) fn replicate(
    instance: &Instance,
    ch: &Chromosome,
    kind: RecourseKind,
    config: &StochasticConfig,
    rng: &mut Rng,
) -> (f64, f64, f64, f64) {
    let scenario = sample_scenario(instance, config, rng);
    match kind {
        RecourseKind::Penalty => {
            let o = penalty_outcome(instance, ch, scenario.times());
            let v = config.alpha * o.tardiness + config.gamma * o.overtime;
            (v, o.tardiness, o.overtime, 0.0)
        }
        RecourseKind::Skip => {
            let k = skip_outcome(instance, ch, scenario.times()).count() as f64;
            (config.alpha * k, 0.0, 0.0, k)
        }
    }
}

pub(crate) fn deadlocks(instance: &Instance, ch: &Chromosome, kind: RecourseKind) -> bool {
    let variant = kind.variant();
    let params = DecodeParams::for_variant(variant, instance);
    decode_trusted(instance, ch, variant, &params, instance.nominal_times(), None).sync_failure
}

/// Running-mean estimate with the relative-gap stopping rule.
///
/// `call_id` selects the scenario stream; it is ignored in CRN mode.
pub fn estimate(
    instance: &Instance,
    ch: &Chromosome,
    kind: RecourseKind,
    config: &StochasticConfig,
    call_id: u64,
) -> Result<RecourseEstimate, ScheduleError> {
    let params = DecodeParams::for_variant(kind.variant(), instance);
    decode_with(instance, ch, kind.variant(), &params, instance.nominal_times(), None)?;
    Ok(estimate_trusted(instance, ch, kind, config, call_id))
}

pub(crate) fn estimate_trusted(
    instance: &Instance,
    ch: &Chromosome,
    kind: RecourseKind,
    config: &StochasticConfig,
    call_id: u64,
) -> RecourseEstimate {
    if kind == RecourseKind::Penalty && deadlocks(instance, ch, kind) {
        return RecourseEstimate {
            mean: f64::INFINITY,
            std_error: 0.0,
            iterations: 0,
            stop: StopReason::SyncFailure,
            tardiness: f64::INFINITY,
            overtime: f64::INFINITY,
            skipped: 0.0,
        };
    }
    let max_iter = config.max_iter.max(1);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut parts = [0.0; 3];
    let mut counter = 0;
    let mut stop = StopReason::MaxIter;
    let mut t = 0;
    while t < max_iter {
        let mut rng = scenario_stream(config, call_id, t as u64);
        let (v, tard, over, skip) = replicate(instance, ch, kind, config, &mut rng);
        t += 1;
        let prev = mean;
        let delta = v - mean;
        mean += delta / t as f64;
        m2 += delta * (v - mean);
        for (p, x) in parts.iter_mut().zip([tard, over, skip]) {
            *p += (x - *p) / t as f64;
        }
        if t > 1 {
            let gap = if prev == 0.0 {
                if mean == 0.0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                (prev - mean).abs() / prev
            };
            if gap < config.epsilon {
                counter += 1;
            } else {
                counter = 0;
            }
            if counter >= config.gap_window {
                stop = StopReason::Gap;
                break;
            }
        }
    }
    let std_error = if t > 1 {
        (m2 / (t - 1) as f64).max(0.0).sqrt() / (t as f64).sqrt()
    } else {
        0.0
    };
    RecourseEstimate {
        mean,
        std_error,
        iterations: t,
        stop,
        tardiness: parts[0],
        overtime: parts[1],
        skipped: parts[2],
    }
}
