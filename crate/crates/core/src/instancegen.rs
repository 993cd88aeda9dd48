//! Random benchmark instances from published recipes.
//!
//! Every draw family (sizes, locations, durations, windows, skills,
//! demands) has its own stream, so a recipe change in one family leaves the
//! others untouched.

use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gvns::{gvns_solve, GvnsParams};
use crate::model::{build_instance, Caregiver, DurationEntry, Instance, ModelError, Patient, ServiceId, TimeWindow};
use crate::rng::{self, tag, Rng};
use crate::schedule::VariantId;

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub const fn fixed(v: usize) -> Self {
        Self { lo: v, hi: v }
    }

    pub const fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    fn draw(&self, rng: &mut Rng) -> usize {
        if self.hi <= self.lo {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkillGrouping {
    /// The first half of the caregivers draw from {1,2,3}, the rest from {4,5,6}.
    Grouped,
    /// Every caregiver draws from {1..6}.
    Random,
}

/// Fields missing from a serialized recipe take the values of
/// [`Recipe::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Recipe {
    pub name: String,
    pub patients: Span,
    pub caregivers: Span,
    /// Total demanded services; overrides `multi_service_fraction` when set.
    pub total_services: Option<Span>,
    pub max_services_per_patient: usize,
    pub windows_per_patient: Span,
    pub multi_service_fraction: f64,
    pub simultaneous_fraction: f64,
    pub area: f64,
    pub duration_range: (u32, u32),
    pub horizon: f64,
    pub tw_length: f64,
    pub skill_grouping: SkillGrouping,
    pub max_visits: Option<usize>,
}

impl Default for Recipe {
    fn default() -> Self {
        Self::new("custom", Span::fixed(10), Span::fixed(3))
    }
}

impl Recipe {
    pub fn new(name: &str, patients: Span, caregivers: Span) -> Self {
        Self {
            name: name.to_string(),
            patients,
            caregivers,
            total_services: None,
            max_services_per_patient: 2,
            windows_per_patient: Span::fixed(1),
            multi_service_fraction: 0.0,
            simultaneous_fraction: 0.5,
            area: 100.0,
            duration_range: (10, 20),
            horizon: 600.0,
            tw_length: 120.0,
            skill_grouping: SkillGrouping::Grouped,
            max_visits: None,
        }
    }

    fn services(mut self, s: Span) -> Self {
        self.total_services = Some(s);
        self
    }

    fn windows(mut self, w: Span) -> Self {
        self.windows_per_patient = w;
        self
    }

    fn max_visits(mut self, m: usize) -> Self {
        self.max_visits = Some(m);
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let ok = (0.0..=1.0).contains(&self.multi_service_fraction)
            && (0.0..=1.0).contains(&self.simultaneous_fraction)
            && self.tw_length <= self.horizon
            && self.tw_length >= 0.0
            && self.patients.lo <= self.patients.hi
            && self.caregivers.lo >= 1
            && self.caregivers.lo <= self.caregivers.hi
            && (1..=3).contains(&self.windows_per_patient.lo)
            && (1..=3).contains(&self.windows_per_patient.hi)
            && self.windows_per_patient.lo <= self.windows_per_patient.hi
            && (1..=3).contains(&self.max_services_per_patient)
            && self.duration_range.0 <= self.duration_range.1
            && self.area >= 0.0
            && self.max_visits != Some(0);
        if ok {
            Ok(())
        } else {
            Err(GenError::BadRecipe(self.name.clone()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("recipe '{0}' is inconsistent")]
    BadRecipe(String),
    #[error("could not place two separated windows")]
    WindowPlacement,
    #[error("no feasible instance in {0} attempts")]
    NoFeasible(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Generates with seeds `seed, seed + 1, ...` until a feasibility-only
/// GVNS run finds a feasible plan under `variant`. Returns the instance
/// and the seed that produced it.
pub fn generate_feasible(
    recipe: &Recipe,
    seed: u64,
    variant: VariantId,
    attempts: usize,
) -> Result<(Instance, u64), GenError> {
    for k in 0..attempts as u64 {
        let s = seed.wrapping_add(k);
        let instance = generate(recipe, s)?;
        let mut params = GvnsParams::for_instance(&instance);
        params.feasibility_only = true;
        if gvns_solve(&instance, variant, &params, s).schedule.feasible {
            return Ok((instance, s));
        }
    }
    Err(GenError::NoFeasible(attempts))
}

/// Preset names accepted by [`preset`].
pub const PRESETS: &[&str] = &[
    "A",
    "B",
    "C",
    "D",
    "E",
    "F",
    "G",
    "H",
    "I",
    "J",
    "K",
    "L",
    "M",
    "N",
    "Small",
    "Large",
    "Large-N100s",
    "SS",
    "SS-A",
    "SS-B",
    "SS-C",
    "MSS",
    "MSS-D",
    "MSS-E",
    "MSS-F",
    "STW",
    "STW-A",
    "STW-B",
    "STW-C",
    "MTW",
    "MTW-A",
    "MTW-B",
    "MTW-C",
];

pub fn preset(name: &str) -> Result<Recipe, GenError> {
    let s = Span::fixed;
    let r = Span::new;
    let base =
        |n: usize, services: usize, c: Span, l: usize| Recipe::new(name, s(n), c).services(s(services)).windows(s(l));
    let recipe = match name {
        "A" => base(10, 10, r(3, 4), 1),
        "B" => base(25, 25, r(5, 7), 1),
        "C" => base(50, 50, r(10, 12), 1),
        "D" => base(10, 13, r(3, 4), 1),
        "E" => base(25, 33, r(5, 7), 1),
        "F" => base(50, 65, r(10, 13), 1),
        "G" => base(10, 10, s(3), 2),
        "H" => base(25, 25, r(5, 7), 2),
        "I" => base(50, 50, s(10), 2),
        "J" => base(10, 13, r(3, 4), 2),
        "K" => base(25, 33, r(5, 8), 2),
        "L" => base(50, 65, r(10, 14), 2),
        "M" | "Small" => Recipe {
            skill_grouping: SkillGrouping::Random,
            ..Recipe::new(name, s(10), r(3, 5)).services(r(12, 16)).windows(r(1, 3))
        },
        "N" | "Large" => Recipe {
            skill_grouping: SkillGrouping::Random,
            max_services_per_patient: 3,
            ..Recipe::new(name, r(70, 200), r(20, 40))
                .services(r(100, 200))
                .windows(s(3))
        },
        "Large-N100s" => Recipe {
            skill_grouping: SkillGrouping::Random,
            max_services_per_patient: 3,
            ..base(70, 100, s(20), 3)
        },
        "SS" | "SS-A" => base(10, 10, s(3), 1),
        "SS-B" => base(25, 25, s(5), 1),
        "SS-C" => base(50, 50, s(10), 1),
        "MSS" | "MSS-D" => base(10, 13, s(3), 1),
        "MSS-E" => base(25, 33, s(5), 1),
        "MSS-F" => base(50, 65, s(10), 1),
        "STW" | "STW-A" => base(10, 10, s(3), 1).max_visits(4),
        "STW-B" => base(25, 25, s(5), 1).max_visits(8),
        "STW-C" => base(50, 50, s(10), 1).max_visits(10),
        "MTW" | "MTW-A" => base(10, 10, s(3), 2).max_visits(4),
        "MTW-B" => base(25, 25, s(5), 2).max_visits(8),
        "MTW-C" => base(50, 50, s(10), 2).max_visits(10),
        _ => return Err(GenError::UnknownPreset(name.to_string())),
    };
    Ok(recipe)
}

fn skill_sets(recipe: &Recipe, c: usize, rng: &mut Rng) -> Vec<Vec<ServiceId>> {
    let first_group = c.div_ceil(2);
    (0..c)
        .map(|k| {
            let pool: Vec<ServiceId> = match recipe.skill_grouping {
                SkillGrouping::Grouped if k < first_group => vec![1, 2, 3],
                SkillGrouping::Grouped => vec![4, 5, 6],
                SkillGrouping::Random => (1..=6).collect(),
            };
            let count = rng.random_range(1..=3);
            let mut skills: Vec<ServiceId> = pool.choose_multiple(rng, count).copied().collect();
            skills.sort_unstable();
            skills
        })
        .collect()
}

fn assignable(skills: &[Vec<ServiceId>], demands: &[ServiceId]) -> bool {
    fn go(i: usize, demands: &[ServiceId], skills: &[Vec<ServiceId>], used: &mut Vec<usize>) -> bool {
        if i == demands.len() {
            return true;
        }
        for (k, sk) in skills.iter().enumerate() {
            if sk.contains(&demands[i]) && !used.contains(&k) {
                used.push(k);
                if go(i + 1, demands, skills, used) {
                    return true;
                }
                used.pop();
            }
        }
        false
    }
    go(0, demands, skills, &mut Vec::new())
}

/// Windows of one patient. Starts: one window anywhere in the day; two
/// windows in the first and second half, at least 120 minutes apart;
/// three windows one per third of the day.
fn place_windows(recipe: &Recipe, count: usize, rng: &mut Rng) -> Result<Vec<TimeWindow>, GenError> {
    let h = recipe.horizon;
    let len = recipe.tw_length;
    let uniform = |rng: &mut Rng, lo: f64, hi: f64| -> f64 {
        let (lo, hi) = (lo.ceil() as i64, hi.floor() as i64);
        if hi <= lo {
            lo as f64
        } else {
            rng.random_range(lo..=hi) as f64
        }
    };
    let w = |a: f64| TimeWindow::new(a, a + len);
    match count {
        1 => Ok(vec![w(uniform(rng, 0.0, h - len))]),
        2 => {
            let half = h / 2.0;
            for _ in 0..10_000 {
                let a1 = uniform(rng, 0.0, half);
                let a2 = uniform(rng, half, h - len);
                if a2 - a1 >= 120.0 {
                    return Ok(vec![w(a1), w(a2)]);
                }
            }
            Err(GenError::WindowPlacement)
        }
        _ => {
            let third = h / 3.0;
            Ok((0..3)
                .map(|i| {
                    let lo = third * i as f64;
                    w(uniform(rng, lo, (lo + third - len).max(lo)))
                })
                .collect())
        }
    }
}

/// Number of demands per patient, in patient order.
fn demand_counts(recipe: &Recipe, n: usize, rng: &mut Rng) -> Vec<usize> {
    let max_k = recipe.max_services_per_patient.max(1);
    let total = match recipe.total_services {
        Some(span) => {
            let lo = span.lo.max(n);
            let hi = span.hi.min(n * max_k).max(lo);
            Span::new(lo, hi).draw(rng)
        }
        None => n + (recipe.multi_service_fraction * n as f64).round() as usize,
    };
    let mut counts = vec![1usize; n];
    let mut extra = total.saturating_sub(n).min(n * (max_k - 1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    // spread extras one per patient first, then a second round when needed
    while extra > 0 {
        for &i in &order {
            if extra == 0 {
                break;
            }
            if counts[i] < max_k {
                counts[i] += 1;
                extra -= 1;
            }
        }
    }
    counts
}

pub fn generate(recipe: &Recipe, seed: u64) -> Result<Instance, GenError> {
    recipe.validate()?;
    let mut sizes = rng::stream(seed, &[tag::SIZES]);
    let n = recipe.patients.draw(&mut sizes);
    let c = recipe.caregivers.draw(&mut sizes);
    let counts = demand_counts(recipe, n, &mut sizes);

    let mut skills_rng = rng::stream(seed, &[tag::SKILLS]);
    let skills = skill_sets(recipe, c, &mut skills_rng);
    let mut covered: Vec<ServiceId> = skills.iter().flatten().copied().collect();
    covered.sort_unstable();
    covered.dedup();

    let mut demand_rng = rng::stream(seed, &[tag::DEMANDS]);
    let mut demands: Vec<Vec<ServiceId>> = Vec::with_capacity(n);
    for &k in &counts {
        let k = k.min(covered.len()).min(c);
        let mut picked = None;
        for _ in 0..1000 {
            let mut d: Vec<ServiceId> = covered.choose_multiple(&mut demand_rng, k).copied().collect();
            d.sort_unstable();
            if assignable(&skills, &d) {
                picked = Some(d);
                break;
            }
        }
        let d = picked.unwrap_or_else(|| vec![*covered.choose(&mut demand_rng).expect("some skill")]);
        demands.push(d);
    }
    let multi: Vec<usize> = (0..n).filter(|&i| demands[i].len() >= 2).collect();
    let sync_count = (recipe.simultaneous_fraction * multi.len() as f64).round() as usize;
    let sync: Vec<usize> = multi.choose_multiple(&mut demand_rng, sync_count).copied().collect();

    let mut loc_rng = rng::stream(seed, &[tag::LOCATIONS]);
    let side = recipe.area.max(0.0).floor() as i64;
    let mut point = || {
        [
            loc_rng.random_range(0..=side) as f64,
            loc_rng.random_range(0..=side) as f64,
        ]
    };
    let center = point();
    let locations: Vec<[f64; 2]> = (0..n).map(|_| point()).collect();

    let mut win_rng = rng::stream(seed, &[tag::WINDOWS]);
    let mut windows = Vec::with_capacity(n);
    for _ in 0..n {
        let l = recipe.windows_per_patient.draw(&mut win_rng);
        windows.push(place_windows(recipe, l, &mut win_rng)?);
    }

    let mut dur_rng = rng::stream(seed, &[tag::DURATIONS]);
    let (dlo, dhi) = recipe.duration_range;
    let mut durations = Vec::new();
    for (i, d) in demands.iter().enumerate() {
        for &s in d {
            durations.push(DurationEntry {
                patient: i + 1,
                service: s,
                minutes: dur_rng.random_range(dlo..=dhi) as f64,
            });
        }
    }

    let patients = (0..n)
        .map(|i| Patient {
            id: i + 1,
            location: locations[i],
            simultaneous: sync.contains(&i),
            demands: demands[i].clone(),
            windows: windows[i].clone(),
        })
        .collect();
    let caregivers = skills
        .into_iter()
        .enumerate()
        .map(|(k, skills)| Caregiver {
            id: k + 1,
            duty: TimeWindow::new(0.0, recipe.horizon),
            skills,
            max_visits: recipe.max_visits,
        })
        .collect();
    Ok(build_instance(
        center,
        patients,
        caregivers,
        &durations,
        recipe.horizon,
    )?)
}

/// The same instance with only each patient's first `keep` windows.
pub fn truncate_windows(instance: &Instance, keep: usize) -> Instance {
    with_windows(instance, |w| w.iter().take(keep.max(1)).copied().collect())
}

/// The same instance with only each patient's `index`-th window (or the
/// last one, for patients with fewer windows).
pub fn single_window(instance: &Instance, index: usize) -> Instance {
    with_windows(instance, |w| vec![w[index.min(w.len() - 1)]])
}

fn with_windows(instance: &Instance, pick: impl Fn(&[TimeWindow]) -> Vec<TimeWindow>) -> Instance {
    let patients = instance
        .patients()
        .iter()
        .map(|p| Patient {
            windows: pick(&p.windows),
            ..p.clone()
        })
        .collect();
    Instance::with_matrices(
        instance.center(),
        patients,
        instance.caregivers().to_vec(),
        &instance.all_durations(),
        instance.travel().clone(),
        instance.cost().clone(),
        instance.horizon(),
    )
    .expect("dropping windows keeps an instance valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_rows() {
        let a = preset("A").unwrap();
        assert_eq!(
            (a.patients, a.caregivers, a.windows_per_patient),
            (Span::fixed(10), Span::new(3, 4), Span::fixed(1))
        );
        assert_eq!(a.total_services, Some(Span::fixed(10)));
        let d = preset("MSS-D").unwrap();
        assert_eq!(
            (d.patients, d.total_services, d.caregivers),
            (Span::fixed(10), Some(Span::fixed(13)), Span::fixed(3))
        );
        let big = preset("Large-N100s").unwrap();
        assert_eq!(big.total_services, Some(Span::fixed(100)));
        assert_eq!(
            (big.caregivers, big.patients, big.windows_per_patient),
            (Span::fixed(20), Span::fixed(70), Span::fixed(3))
        );
        assert!(matches!(preset("Z"), Err(GenError::UnknownPreset(_))));
        for name in PRESETS {
            preset(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn durations_in_range_and_counts_exact() {
        let inst = generate(&preset("A").unwrap(), 4).unwrap();
        assert!(inst.all_durations().iter().all(|d| (10.0..=20.0).contains(&d.minutes)));
        assert_eq!(inst.gene_count(), 10);
        let inst = generate(&preset("D").unwrap(), 4).unwrap();
        assert_eq!(inst.gene_count(), 13);
    }

    #[test]
    fn fractions_round_to_counts() {
        let mut r = Recipe::new("frac", Span::fixed(100), Span::fixed(10));
        r.multi_service_fraction = 0.3;
        r.simultaneous_fraction = 0.5;
        let inst = generate(&r, 9).unwrap();
        let multi = inst.patients().iter().filter(|p| p.demands.len() == 2).count();
        let sync = inst.patients().iter().filter(|p| p.simultaneous).count();
        assert_eq!((multi, sync), (30, 15));
    }

    #[test]
    fn generation_is_deterministic() {
        let r = preset("M").unwrap();
        let a = generate(&r, 77).unwrap();
        let b = generate(&r, 77).unwrap();
        assert_eq!(a.patients(), b.patients());
        assert_eq!(a.caregivers(), b.caregivers());
        assert_eq!(a.travel(), b.travel());
    }

    #[test]
    fn feasible_generation_skips_infeasible_seeds() {
        let r = preset("STW-A").unwrap();
        let (inst, s) = generate_feasible(&r, 0, VariantId::HardMsmtw, 200).unwrap();
        assert_eq!(inst, generate(&r, s).unwrap());
        let mut params = GvnsParams::for_instance(&inst);
        params.feasibility_only = true;
        assert!(gvns_solve(&inst, VariantId::HardMsmtw, &params, s).schedule.feasible);
        let impossible = Recipe {
            tw_length: 1.0,
            ..Recipe::new("tight", Span::fixed(4), Span::fixed(1))
        };
        assert_eq!(
            generate_feasible(&impossible, 0, VariantId::HardMsmtw, 3),
            Err(GenError::NoFeasible(3))
        );
    }

    #[test]
    fn partial_recipe_json_takes_defaults() {
        let r: Recipe = serde_json::from_str(r#"{"patients":{"lo":3,"hi":4},"tw_length":60}"#).unwrap();
        assert_eq!(r.patients, Span::new(3, 4));
        assert_eq!(r.tw_length, 60.0);
        assert_eq!(r.caregivers, Recipe::default().caregivers);
    }

    #[test]
    fn truncation_keeps_first_window() {
        let inst = generate(&preset("G").unwrap(), 2).unwrap();
        let one = truncate_windows(&inst, 1);
        for (p, q) in inst.patients().iter().zip(one.patients()) {
            assert_eq!(q.windows, vec![p.windows[0]]);
            assert_eq!(p.demands, q.demands);
        }
        let late = single_window(&inst, 1);
        for (p, q) in inst.patients().iter().zip(late.patients()) {
            assert_eq!(q.windows, vec![p.windows[1]]);
        }
        assert_eq!(late.travel(), inst.travel());
    }
}
