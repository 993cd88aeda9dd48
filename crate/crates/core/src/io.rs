//! JSON file formats for instances and solutions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_instance, Caregiver, Chromosome, DurationEntry, Instance, Matrix, ModelError, Patient};
use crate::schedule::{Schedule, VariantId};

/// On-disk instance. Matrices are optional on input; when absent they are
/// rebuilt from the locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub center: [f64; 2],
    pub horizon: f64,
    pub patients: Vec<Patient>,
    pub caregivers: Vec<Caregiver>,
    pub durations: Vec<DurationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub travel: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("matrix is not square")]
    Matrix,
    #[error("chromosome text is malformed")]
    Chromosome,
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        Self {
            center: instance.center(),
            horizon: instance.horizon(),
            patients: instance.patients().to_vec(),
            caregivers: instance.caregivers().to_vec(),
            durations: instance.all_durations(),
            travel: Some(instance.travel().rows()),
            cost: Some(instance.cost().rows()),
        }
    }

    pub fn into_instance(self) -> Result<Instance, IoError> {
        match (self.travel, self.cost) {
            (None, None) => Ok(build_instance(
                self.center,
                self.patients,
                self.caregivers,
                &self.durations,
                self.horizon,
            )?),
            (travel, cost) => {
                let t = travel.or_else(|| cost.clone()).expect("one matrix present");
                let c = cost.unwrap_or_else(|| t.clone());
                let t = Matrix::from_rows(&t).ok_or(IoError::Matrix)?;
                let c = Matrix::from_rows(&c).ok_or(IoError::Matrix)?;
                Ok(Instance::with_matrices(
                    self.center,
                    self.patients,
                    self.caregivers,
                    &self.durations,
                    t,
                    c,
                    self.horizon,
                )?)
            }
        }
    }
}

pub fn instance_to_json(instance: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(instance)).expect("serializable") + "\n"
}

pub fn instance_from_json(text: &str) -> Result<Instance, IoError> {
    serde_json::from_str::<InstanceFile>(text)?.into_instance()
}

/// On-disk solution: the chromosome in text form plus its decoded schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub variant: VariantId,
    pub chromosome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
}

impl SolutionFile {
    pub fn new(variant: VariantId, chromosome: &Chromosome, value: Option<f64>, schedule: Option<Schedule>) -> Self {
        Self {
            variant,
            chromosome: chromosome.encode(),
            value,
            schedule,
        }
    }

    pub fn chromosome(&self) -> Result<Chromosome, IoError> {
        Chromosome::decode_text(&self.chromosome).ok_or(IoError::Chromosome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn instance_round_trip() {
        let inst = samples::tiny_sync();
        let back = instance_from_json(&instance_to_json(&inst)).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn matrices_are_optional() {
        let inst = samples::tiny_one();
        let mut f = InstanceFile::from_instance(&inst);
        f.travel = None;
        f.cost = None;
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(instance_from_json(&text).unwrap(), inst);
    }

    #[test]
    fn solution_round_trip() {
        let ch = Chromosome::decode_text("1:1@1 2:1@1").unwrap();
        let f = SolutionFile::new(VariantId::HardMsmtw, &ch, Some(3.0), None);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"hard-msmtw\""));
        let back: SolutionFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.chromosome().unwrap(), ch);
    }
}
