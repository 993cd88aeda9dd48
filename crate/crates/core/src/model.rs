//! Instances, chromosomes and their validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ServiceId = u32;

/// Closed interval of minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub a: f64,
    pub b: f64,
}

impl TimeWindow {
    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.b <= self.a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patient {
    /// 1-based; also the node index in the travel matrix.
    pub id: usize,
    pub location: [f64; 2],
    /// Requested services, kept sorted.
    pub demands: Vec<ServiceId>,
    /// All services must start at the same instant.
    pub simultaneous: bool,
    pub windows: Vec<TimeWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caregiver {
    /// 1-based.
    pub id: usize,
    pub duty: TimeWindow,
    pub skills: Vec<ServiceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_visits: Option<usize>,
}

impl Caregiver {
    pub fn is_skilled(&self, service: ServiceId) -> bool {
        self.skills.contains(&service)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationEntry {
    pub patient: usize,
    pub service: ServiceId,
    pub minutes: f64,
}

/// Square matrix over nodes `0..=n+1`, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    size: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![0.0; size * size],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return None;
        }
        Some(Self {
            size,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.size + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.size).map(|r| r.to_vec()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate patient id {0}")]
    DuplicatePatient(usize),
    #[error("patient ids must be exactly 1..=n, found {0}")]
    PatientIdOutOfRange(usize),
    #[error("patient {0} has no demanded service")]
    EmptyDemands(usize),
    #[error("patient {0} repeats a demanded service")]
    RepeatedDemand(usize),
    #[error("patient {0} is simultaneous but demands fewer than two services")]
    SimultaneousNeedsTwo(usize),
    #[error("patient {0} has no time window")]
    NoWindows(usize),
    #[error("patient {0} has an invalid or repeated time window")]
    InvalidWindow(usize),
    #[error("duplicate caregiver id {0}")]
    DuplicateCaregiver(usize),
    #[error("caregiver ids must be exactly 1..=c, found {0}")]
    CaregiverIdOutOfRange(usize),
    #[error("caregiver {0} has no skill")]
    EmptySkills(usize),
    #[error("caregiver {0} has an invalid duty window")]
    InvalidDuty(usize),
    #[error("caregiver {0} has max_visits = 0")]
    ZeroMaxVisits(usize),
    #[error("service {0} is demanded but no caregiver is skilled for it")]
    UnservedService(ServiceId),
    #[error("patient {0} cannot be served by pairwise distinct caregivers")]
    UnassignablePatient(usize),
    #[error("missing duration for patient {0} service {1}")]
    MissingDuration(usize, ServiceId),
    #[error("duration given for undemanded pair (patient {0}, service {1})")]
    UnexpectedDuration(usize, ServiceId),
    #[error("duration for patient {0} service {1} is negative or repeated")]
    InvalidDuration(usize, ServiceId),
    #[error("{0} matrix must be {1}x{1}")]
    MatrixShape(&'static str, usize),
    #[error("{0} matrix has a negative or non-finite entry")]
    NegativeEntry(&'static str),
    #[error("{0} matrix has a nonzero diagonal")]
    NonZeroDiagonal(&'static str),
    #[error("{0} matrix rows/columns for nodes 0 and n+1 differ")]
    DepotMismatch(&'static str),
    #[error("horizon must be positive")]
    InvalidHorizon,
}

/// A validated problem instance. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    center: [f64; 2],
    patients: Vec<Patient>,
    caregivers: Vec<Caregiver>,
    durations: Vec<Vec<f64>>,
    travel: Matrix,
    cost: Matrix,
    horizon: f64,
    qualified: BTreeMap<ServiceId, Vec<usize>>,
    genes: Vec<VisitGene>,
}

/// Builds an instance with Euclidean travel times truncated to integers and
/// cost equal to travel.
pub fn build_instance(
    center: [f64; 2],
    patients: Vec<Patient>,
    caregivers: Vec<Caregiver>,
    durations: &[DurationEntry],
    horizon: f64,
) -> Result<Instance, ModelError> {
    let mut coords = vec![center];
    let mut sorted = patients.clone();
    sorted.sort_by_key(|p| p.id);
    coords.extend(sorted.iter().map(|p| p.location));
    coords.push(center);
    let size = coords.len();
    let mut travel = Matrix::zeros(size);
    for i in 0..size {
        for j in 0..size {
            let dx = coords[i][0] - coords[j][0];
            let dy = coords[i][1] - coords[j][1];
            travel.set(i, j, (dx * dx + dy * dy).sqrt().floor());
        }
    }
    let cost = travel.clone();
    Instance::with_matrices(center, patients, caregivers, durations, travel, cost, horizon)
}

impl Instance {
    /// Builds an instance from explicit travel and cost matrices.
    pub fn with_matrices(
        center: [f64; 2],
        mut patients: Vec<Patient>,
        mut caregivers: Vec<Caregiver>,
        durations: &[DurationEntry],
        travel: Matrix,
        cost: Matrix,
        horizon: f64,
    ) -> Result<Instance, ModelError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(ModelError::InvalidHorizon);
        }
        patients.sort_by_key(|p| p.id);
        let n = patients.len();
        for (idx, p) in patients.iter_mut().enumerate() {
            if idx > 0 && p.id == idx {
                return Err(ModelError::DuplicatePatient(p.id));
            }
            if p.id != idx + 1 {
                return Err(ModelError::PatientIdOutOfRange(p.id));
            }
            if p.demands.is_empty() {
                return Err(ModelError::EmptyDemands(p.id));
            }
            p.demands.sort_unstable();
            if p.demands.windows(2).any(|w| w[0] == w[1]) {
                return Err(ModelError::RepeatedDemand(p.id));
            }
            if p.simultaneous && p.demands.len() < 2 {
                return Err(ModelError::SimultaneousNeedsTwo(p.id));
            }
            if p.windows.is_empty() {
                return Err(ModelError::NoWindows(p.id));
            }
            for (i, w) in p.windows.iter().enumerate() {
                let bad = !(w.a >= 0.0 && w.a <= w.b && w.b.is_finite()) || p.windows[..i].iter().any(|o| o == w);
                if bad {
                    return Err(ModelError::InvalidWindow(p.id));
                }
            }
        }

        caregivers.sort_by_key(|k| k.id);
        for (idx, k) in caregivers.iter_mut().enumerate() {
            if idx > 0 && k.id == idx {
                return Err(ModelError::DuplicateCaregiver(k.id));
            }
            if k.id != idx + 1 {
                return Err(ModelError::CaregiverIdOutOfRange(k.id));
            }
            k.skills.sort_unstable();
            k.skills.dedup();
            if k.skills.is_empty() {
                return Err(ModelError::EmptySkills(k.id));
            }
            if !(k.duty.a >= 0.0 && k.duty.a <= k.duty.b) {
                return Err(ModelError::InvalidDuty(k.id));
            }
            if k.max_visits == Some(0) {
                return Err(ModelError::ZeroMaxVisits(k.id));
            }
        }

        let mut qualified: BTreeMap<ServiceId, Vec<usize>> = BTreeMap::new();
        for p in &patients {
            for &s in &p.demands {
                let list: Vec<usize> = caregivers.iter().filter(|k| k.is_skilled(s)).map(|k| k.id).collect();
                if list.is_empty() {
                    return Err(ModelError::UnservedService(s));
                }
                qualified.insert(s, list);
            }
        }
        for p in &patients {
            if !distinct_assignment_exists(&p.demands, &qualified) {
                return Err(ModelError::UnassignablePatient(p.id));
            }
        }

        let mut table: Vec<Vec<Option<f64>>> = patients.iter().map(|p| vec![None; p.demands.len()]).collect();
        for d in durations {
            if d.patient == 0 || d.patient > n {
                return Err(ModelError::UnexpectedDuration(d.patient, d.service));
            }
            let p = &patients[d.patient - 1];
            let Some(j) = p.demands.iter().position(|&s| s == d.service) else {
                return Err(ModelError::UnexpectedDuration(d.patient, d.service));
            };
            let slot = &mut table[d.patient - 1][j];
            if slot.is_some() || !(d.minutes >= 0.0 && d.minutes.is_finite()) {
                return Err(ModelError::InvalidDuration(d.patient, d.service));
            }
            *slot = Some(d.minutes);
        }
        let mut dur = Vec::with_capacity(n);
        for (p, row) in patients.iter().zip(table) {
            let mut r = Vec::with_capacity(row.len());
            for (j, v) in row.into_iter().enumerate() {
                r.push(v.ok_or(ModelError::MissingDuration(p.id, p.demands[j]))?);
            }
            dur.push(r);
        }

        check_matrix("travel", &travel, n)?;
        check_matrix("cost", &cost, n)?;

        let genes = patients
            .iter()
            .flat_map(|p| {
                p.demands.iter().map(move |&s| VisitGene {
                    patient: p.id,
                    service: s,
                })
            })
            .collect();

        Ok(Instance {
            center,
            patients,
            caregivers,
            durations: dur,
            travel,
            cost,
            horizon,
            qualified,
            genes,
        })
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn patients(&self) -> &[Patient] {
        &self.patients
    }

    pub fn caregivers(&self) -> &[Caregiver] {
        &self.caregivers
    }

    /// Patient with 1-based id.
    pub fn patient(&self, id: usize) -> &Patient {
        &self.patients[id - 1]
    }

    /// Caregiver with 1-based id.
    pub fn caregiver(&self, id: usize) -> &Caregiver {
        &self.caregivers[id - 1]
    }

    pub fn n(&self) -> usize {
        self.patients.len()
    }

    pub fn c(&self) -> usize {
        self.caregivers.len()
    }

    /// Index of the closing depot node.
    pub fn end_node(&self) -> usize {
        self.patients.len() + 1
    }

    pub fn travel(&self) -> &Matrix {
        &self.travel
    }

    pub fn cost(&self) -> &Matrix {
        &self.cost
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Durations parallel to each patient's sorted demand list.
    pub fn duration_table(&self) -> &[Vec<f64>] {
        &self.durations
    }

    pub fn duration(&self, patient: usize, service: ServiceId) -> Option<f64> {
        let p = self.patients.get(patient.checked_sub(1)?)?;
        let j = p.demands.iter().position(|&s| s == service)?;
        Some(self.durations[patient - 1][j])
    }

    /// Caregiver ids skilled for `service`, ascending.
    pub fn qualified(&self, service: ServiceId) -> &[usize] {
        self.qualified.get(&service).map_or(&[], |v| v.as_slice())
    }

    /// Every demanded (patient, service) pair in canonical order.
    pub fn demanded_genes(&self) -> &[VisitGene] {
        &self.genes
    }

    pub fn gene_count(&self) -> usize {
        self.genes.len()
    }

    pub fn max_windows(&self) -> usize {
        self.patients.iter().map(|p| p.windows.len()).max().unwrap_or(0)
    }

    pub fn all_durations(&self) -> Vec<DurationEntry> {
        self.patients
            .iter()
            .zip(&self.durations)
            .flat_map(|(p, row)| {
                p.demands.iter().zip(row).map(move |(&s, &m)| DurationEntry {
                    patient: p.id,
                    service: s,
                    minutes: m,
                })
            })
            .collect()
    }
}

fn check_matrix(name: &'static str, m: &Matrix, n: usize) -> Result<(), ModelError> {
    let size = n + 2;
    if m.size() != size {
        return Err(ModelError::MatrixShape(name, size));
    }
    for i in 0..size {
        for j in 0..size {
            let v = m.get(i, j);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::NegativeEntry(name));
            }
            if i == j && v != 0.0 {
                return Err(ModelError::NonZeroDiagonal(name));
            }
        }
    }
    let end = n + 1;
    for j in 0..size {
        let row_ok = m.get(0, j) == m.get(end, j) || j == 0 || j == end;
        let col_ok = m.get(j, 0) == m.get(j, end) || j == 0 || j == end;
        if !row_ok || !col_ok || m.get(0, end) != 0.0 || m.get(end, 0) != 0.0 {
            return Err(ModelError::DepotMismatch(name));
        }
    }
    Ok(())
}

fn distinct_assignment_exists(demands: &[ServiceId], qualified: &BTreeMap<ServiceId, Vec<usize>>) -> bool {
    fn go(i: usize, demands: &[ServiceId], q: &BTreeMap<ServiceId, Vec<usize>>, used: &mut Vec<usize>) -> bool {
        if i == demands.len() {
            return true;
        }
        for &k in &q[&demands[i]] {
            if !used.contains(&k) {
                used.push(k);
                if go(i + 1, demands, q, used) {
                    return true;
                }
                used.pop();
            }
        }
        false
    }
    go(0, demands, qualified, &mut Vec::new())
}

/// One (patient, service) entry of the encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VisitGene {
    pub patient: usize,
    pub service: ServiceId,
}

impl VisitGene {
    pub const fn new(patient: usize, service: ServiceId) -> Self {
        Self { patient, service }
    }
}

impl fmt::Display for VisitGene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.patient, self.service)
    }
}

/// Two-row encoding: visit order plus the caregiver serving each gene.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Chromosome {
    pub genes: Vec<VisitGene>,
    pub assignment: Vec<usize>,
}

impl Chromosome {
    pub fn new(genes: Vec<VisitGene>, assignment: Vec<usize>) -> Self {
        Self { genes, assignment }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Gene indices of each caregiver's route, in gene order.
    pub fn routes(&self, caregivers: usize) -> Vec<Vec<usize>> {
        let mut routes = vec![Vec::new(); caregivers];
        for (g, &k) in self.assignment.iter().enumerate() {
            if k >= 1 && k <= caregivers {
                routes[k - 1].push(g);
            }
        }
        routes
    }

    /// Compact text form, e.g. `1:2@1 3:1@2`.
    pub fn encode(&self) -> String {
        self.genes
            .iter()
            .zip(&self.assignment)
            .map(|(g, k)| format!("{}:{}@{}", g.patient, g.service, k))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn decode_text(text: &str) -> Option<Self> {
        let mut genes = Vec::new();
        let mut assignment = Vec::new();
        for tok in text.split_whitespace() {
            let (gene, k) = tok.split_once('@')?;
            let (p, s) = gene.split_once(':')?;
            genes.push(VisitGene::new(p.parse().ok()?, s.parse().ok()?));
            assignment.push(k.parse().ok()?);
        }
        Some(Self { genes, assignment })
    }
}

/// Random distinct qualified caregivers for a patient's demands, in demand
/// order. Returns `None` only if no distinct assignment exists.
pub fn random_patient_assignment<R: rand::Rng + ?Sized>(
    instance: &Instance,
    patient: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    use rand::seq::SliceRandom;
    let demands = &instance.patient(patient).demands;
    let mut options: Vec<Vec<usize>> = demands
        .iter()
        .map(|&s| {
            let mut v = instance.qualified(s).to_vec();
            v.shuffle(rng);
            v
        })
        .collect();
    fn go(i: usize, options: &mut [Vec<usize>], used: &mut Vec<usize>) -> bool {
        if i == options.len() {
            return true;
        }
        for t in 0..options[i].len() {
            let k = options[i][t];
            if !used.contains(&k) {
                used.push(k);
                if go(i + 1, options, used) {
                    return true;
                }
                used.pop();
            }
        }
        false
    }
    let mut used = Vec::with_capacity(demands.len());
    go(0, &mut options, &mut used).then_some(used)
}

/// Uniformly shuffled genes with random valid caregiver assignments.
pub fn random_chromosome<R: rand::Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Chromosome {
    use rand::seq::SliceRandom;
    let mut genes = instance.demanded_genes().to_vec();
    genes.shuffle(rng);
    assign_randomly(instance, genes, rng)
}

/// Pairs an ordered gene list with random valid caregivers.
pub fn assign_randomly<R: rand::Rng + ?Sized>(instance: &Instance, genes: Vec<VisitGene>, rng: &mut R) -> Chromosome {
    let mut per_patient: Vec<Vec<usize>> = Vec::with_capacity(instance.n());
    for p in instance.patients() {
        per_patient.push(random_patient_assignment(instance, p.id, rng).unwrap_or_default());
    }
    let assignment = genes
        .iter()
        .map(|g| {
            let p = instance.patient(g.patient);
            let j = p.demands.iter().position(|&s| s == g.service).unwrap_or(0);
            per_patient[g.patient - 1].get(j).copied().unwrap_or(0)
        })
        .collect();
    Chromosome { genes, assignment }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LengthMismatch { genes: usize, assignment: usize },
    UnknownGene { index: usize },
    DuplicateGene { index: usize },
    MissingGene(usize, ServiceId),
    UnknownCaregiver { index: usize },
    UnskilledAssignment { index: usize },
    DuplicatePatientCaregiverPair { patient: usize, caregiver: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LengthMismatch { genes, assignment } => {
                write!(f, "{genes} genes but {assignment} assignments")
            }
            Self::UnknownGene { index } => write!(f, "gene {index} is not a demanded pair"),
            Self::DuplicateGene { index } => write!(f, "gene {index} repeats an earlier gene"),
            Self::MissingGene(p, s) => write!(f, "missing gene ({p}, {s})"),
            Self::UnknownCaregiver { index } => write!(f, "gene {index} has an unknown caregiver"),
            Self::UnskilledAssignment { index } => {
                write!(f, "gene {index} assigned to an unskilled caregiver")
            }
            Self::DuplicatePatientCaregiverPair { patient, caregiver } => {
                write!(f, "caregiver {caregiver} serves patient {patient} twice")
            }
        }
    }
}

/// Lists every encoding rule the chromosome breaks; empty means valid.
pub fn validate_chromosome(instance: &Instance, ch: &Chromosome) -> Vec<Violation> {
    let mut out = Vec::new();
    if ch.genes.len() != ch.assignment.len() {
        out.push(Violation::LengthMismatch {
            genes: ch.genes.len(),
            assignment: ch.assignment.len(),
        });
    }
    let demanded: BTreeSet<VisitGene> = instance.demanded_genes().iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut pairs = BTreeSet::new();
    for (i, g) in ch.genes.iter().enumerate() {
        if !demanded.contains(g) {
            out.push(Violation::UnknownGene { index: i });
            continue;
        }
        if !seen.insert(*g) {
            out.push(Violation::DuplicateGene { index: i });
        }
        let Some(&k) = ch.assignment.get(i) else {
            continue;
        };
        if k == 0 || k > instance.c() {
            out.push(Violation::UnknownCaregiver { index: i });
            continue;
        }
        if !instance.caregiver(k).is_skilled(g.service) {
            out.push(Violation::UnskilledAssignment { index: i });
        }
        if !pairs.insert((g.patient, k)) {
            out.push(Violation::DuplicatePatientCaregiverPair {
                patient: g.patient,
                caregiver: k,
            });
        }
    }
    for g in instance.demanded_genes() {
        if !seen.contains(g) {
            out.push(Violation::MissingGene(g.patient, g.service));
        }
    }
    out
}

pub fn is_valid(instance: &Instance, ch: &Chromosome) -> bool {
    validate_chromosome(instance, ch).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patient(id: usize, loc: [f64; 2], demands: &[ServiceId]) -> Patient {
        Patient {
            id,
            location: loc,
            demands: demands.to_vec(),
            simultaneous: false,
            windows: vec![TimeWindow::new(0.0, 100.0)],
        }
    }

    fn carer(id: usize, skills: &[ServiceId]) -> Caregiver {
        Caregiver {
            id,
            duty: TimeWindow::new(0.0, 200.0),
            skills: skills.to_vec(),
            max_visits: None,
        }
    }

    fn durations(ps: &[Patient]) -> Vec<DurationEntry> {
        ps.iter()
            .flat_map(|p| {
                p.demands.iter().map(move |&s| DurationEntry {
                    patient: p.id,
                    service: s,
                    minutes: 10.0,
                })
            })
            .collect()
    }

    #[test]
    fn travel_is_truncated_euclidean() {
        let ps = vec![patient(1, [3.0, 4.0], &[1]), patient(2, [1.0, 1.0], &[1])];
        let inst = build_instance([0.0, 0.0], ps.clone(), vec![carer(1, &[1])], &durations(&ps), 600.0).unwrap();
        assert_eq!(inst.travel().get(0, 1), 5.0);
        assert_eq!(inst.travel().get(0, 2), 1.0);
        for j in 0..4 {
            assert_eq!(inst.travel().get(0, j), inst.travel().get(3, j));
        }
        assert_eq!(inst.cost(), inst.travel());
    }

    #[test]
    fn rejects_bad_inputs() {
        let ps = vec![patient(1, [0.0, 0.0], &[1]), patient(1, [1.0, 0.0], &[1])];
        let err = build_instance([0.0, 0.0], ps, vec![carer(1, &[1])], &[], 600.0).unwrap_err();
        assert_eq!(err, ModelError::DuplicatePatient(1));

        let ps = vec![patient(1, [0.0, 0.0], &[])];
        let err = build_instance([0.0, 0.0], ps, vec![carer(1, &[1])], &[], 600.0).unwrap_err();
        assert_eq!(err, ModelError::EmptyDemands(1));

        let ps = vec![patient(1, [0.0, 0.0], &[2])];
        let d = durations(&ps);
        let err = build_instance([0.0, 0.0], ps, vec![carer(1, &[1])], &d, 600.0).unwrap_err();
        assert_eq!(err, ModelError::UnservedService(2));
    }

    #[test]
    fn validation_reports_each_rule() {
        let ps = vec![
            patient(1, [1.0, 0.0], &[1]),
            patient(4, [2.0, 0.0], &[1, 2]),
            patient(2, [3.0, 0.0], &[1]),
            patient(3, [4.0, 0.0], &[1]),
        ];
        let d = durations(&ps);
        let inst = build_instance([0.0, 0.0], ps, vec![carer(1, &[1, 2]), carer(2, &[1])], &d, 600.0).unwrap();
        let ok = Chromosome::new(
            vec![
                VisitGene::new(1, 1),
                VisitGene::new(2, 1),
                VisitGene::new(3, 1),
                VisitGene::new(4, 1),
                VisitGene::new(4, 2),
            ],
            vec![1, 1, 2, 2, 1],
        );
        assert!(validate_chromosome(&inst, &ok).is_empty());

        let mut missing = ok.clone();
        missing.genes.pop();
        missing.assignment.pop();
        assert_eq!(validate_chromosome(&inst, &missing), vec![Violation::MissingGene(4, 2)]);

        let mut unskilled = ok.clone();
        unskilled.assignment = vec![1, 1, 2, 1, 2];
        assert_eq!(
            validate_chromosome(&inst, &unskilled),
            vec![Violation::UnskilledAssignment { index: 4 }]
        );

        let mut dup = ok.clone();
        dup.assignment = vec![1, 1, 2, 1, 1];
        assert_eq!(
            validate_chromosome(&inst, &dup),
            vec![Violation::DuplicatePatientCaregiverPair {
                patient: 4,
                caregiver: 1
            }]
        );
    }

    #[test]
    fn text_round_trip() {
        let ch = Chromosome::new(vec![VisitGene::new(3, 2), VisitGene::new(1, 5)], vec![2, 1]);
        assert_eq!(ch.encode(), "3:2@2 1:5@1");
        assert_eq!(Chromosome::decode_text(&ch.encode()), Some(ch));
    }
}
