//! Small hand-built instances for examples, tests and the demo.

use crate::model::{build_instance, Caregiver, DurationEntry, Instance, Patient, TimeWindow};

fn caregiver(id: usize, skills: Vec<u32>) -> Caregiver {
    Caregiver {
        id,
        duty: TimeWindow::new(0.0, 200.0),
        skills,
        max_visits: None,
    }
}

fn patient(id: usize, location: [f64; 2], demands: Vec<u32>, windows: Vec<TimeWindow>) -> Patient {
    Patient {
        id,
        location,
        simultaneous: false,
        demands,
        windows,
    }
}

fn durations(patients: &[Patient], minutes: f64) -> Vec<DurationEntry> {
    patients
        .iter()
        .flat_map(|p| {
            p.demands.iter().map(move |&s| DurationEntry {
                patient: p.id,
                service: s,
                minutes,
            })
        })
        .collect()
}

/// One caregiver, two patients on a line from the center at distances 5
/// and 10, ten-minute services, windows [0, 100].
pub fn tiny_one() -> Instance {
    let w = vec![TimeWindow::new(0.0, 100.0)];
    let patients = vec![
        patient(1, [3.0, 4.0], vec![1], w.clone()),
        patient(2, [6.0, 8.0], vec![1], w),
    ];
    let d = durations(&patients, 10.0);
    build_instance([0.0, 0.0], patients, vec![caregiver(1, vec![1])], &d, 600.0).expect("valid")
}

/// One patient needing services 1 and 2 at the same time, window [10, 100],
/// and two single-skill caregivers.
pub fn tiny_sync() -> Instance {
    let mut p = patient(1, [3.0, 4.0], vec![1, 2], vec![TimeWindow::new(10.0, 100.0)]);
    p.simultaneous = true;
    let patients = vec![p];
    let d = durations(&patients, 10.0);
    let ks = vec![caregiver(1, vec![1]), caregiver(2, vec![2])];
    build_instance([0.0, 0.0], patients, ks, &d, 600.0).expect("valid")
}

/// `n` single-service patients on a ring of radius 20 and `c` caregivers
/// who can all perform that service; windows are wide open.
pub fn uniform(n: usize, c: usize) -> Instance {
    let patients: Vec<Patient> = (1..=n)
        .map(|i| {
            let t = i as f64 / n.max(1) as f64 * std::f64::consts::TAU;
            let loc = [(20.0 * t.cos()).round(), (20.0 * t.sin()).round()];
            patient(i, loc, vec![1], vec![TimeWindow::new(0.0, 600.0)])
        })
        .collect();
    let d = durations(&patients, 10.0);
    let ks = (1..=c)
        .map(|k| Caregiver {
            duty: TimeWindow::new(0.0, 600.0),
            ..caregiver(k, vec![1])
        })
        .collect();
    build_instance([0.0, 0.0], patients, ks, &d, 600.0).expect("valid")
}

/// No patients at all.
pub fn empty(c: usize) -> Instance {
    let ks = (1..=c.max(1)).map(|k| caregiver(k, vec![1])).collect();
    build_instance([0.0, 0.0], Vec::new(), ks, &[], 600.0).expect("valid")
}
