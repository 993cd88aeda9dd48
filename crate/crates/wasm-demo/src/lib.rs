//! Browser bindings for a small interactive tour of `hhc-core`.
//!
//! Every operation returns a JSON string that the static page in `www/`
//! renders. The plain Rust functions are kept separate from the
//! `wasm_bindgen` wrappers so they can be tested natively.

use hhc_core::gvns::{gvns_solve, GvnsParams};
use hhc_core::instancegen::{generate, preset, PRESETS};
use hhc_core::metrics::{hypervolume, normalize};
use hhc_core::moea::{hybrid_solve, nsga2_solve, HybridParams, Nsga2Params};
use hhc_core::recourse::{estimate, RecourseKind, StochasticConfig};
use hhc_core::{objective_vector, Chromosome, Instance, VariantId};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// An instance together with the last plan found for it.
#[wasm_bindgen]
pub struct Demo {
    instance: Instance,
    plan: Option<Chromosome>,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(preset_name: &str, seed: u32) -> Result<Demo, JsError> {
        Demo::generate(preset_name, u64::from(seed)).map_err(|e| JsError::new(&e))
    }

    /// Patients, caregivers and the center, for drawing the map.
    #[wasm_bindgen(js_name = instanceJson)]
    pub fn instance_json(&self) -> String {
        self.describe().to_string()
    }

    /// Runs GVNS on the hard-window model and returns the routes.
    #[wasm_bindgen(js_name = solveRoutes)]
    pub fn solve_routes(&mut self, seed: u32, stop_after: u32) -> String {
        self.routes(u64::from(seed), stop_after as usize).to_string()
    }

    /// Runs NSGA-II and the hybrid with the same evaluation budget.
    #[wasm_bindgen(js_name = compareFronts)]
    pub fn compare_fronts(&self, seed: u32, evaluations: u32) -> String {
        self.fronts(u64::from(seed), evaluations as usize).to_string()
    }

    /// Expected tardiness and overtime of the last plan under random
    /// travel and service times.
    #[wasm_bindgen(js_name = simulatePlan)]
    pub fn simulate_plan(&self, seed: u32, replications: u32) -> Result<String, JsError> {
        self.recourse(u64::from(seed), replications as usize)
            .map(|v| v.to_string())
            .map_err(|e| JsError::new(&e))
    }
}

#[wasm_bindgen(js_name = presetNames)]
pub fn preset_names() -> String {
    json!(PRESETS).to_string()
}

impl Demo {
    pub fn generate(preset_name: &str, seed: u64) -> Result<Demo, String> {
        let recipe = preset(preset_name).map_err(|e| e.to_string())?;
        let instance = generate(&recipe, seed).map_err(|e| e.to_string())?;
        Ok(Demo { instance, plan: None })
    }

    pub fn describe(&self) -> Value {
        let inst = &self.instance;
        json!({
            "center": inst.center(),
            "patients": inst.patients().iter().map(|p| json!({
                "id": p.id,
                "location": p.location,
                "services": p.demands,
                "simultaneous": p.simultaneous,
                "windows": p.windows.iter().map(|w| [w.a, w.b]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "caregivers": inst.caregivers().iter().map(|c| json!({
                "id": c.id,
                "skills": c.skills,
                "duty": [c.duty.a, c.duty.b],
            })).collect::<Vec<_>>(),
        })
    }

    pub fn routes(&mut self, seed: u64, stop_after: usize) -> Value {
        let inst = &self.instance;
        let mut params = GvnsParams::for_instance(inst);
        params.stop_after = stop_after.max(1);
        let result = gvns_solve(inst, VariantId::HardMsmtw, &params, seed);
        let s = &result.schedule;
        let routes: Vec<Value> = result
            .best
            .routes(inst.c())
            .iter()
            .map(|route| {
                Value::Array(
                    route
                        .iter()
                        .map(|&g| {
                            let v = &s.visits[g];
                            json!({
                                "patient": v.patient,
                                "service": v.service,
                                "arrival": v.arrival,
                                "start": v.start,
                                "completion": v.completion,
                            })
                        })
                        .collect(),
                )
            })
            .collect();
        let f = objective_vector(s);
        self.plan = Some(result.best.clone());
        json!({
            "value": result.value,
            "feasible": s.feasible,
            "penalty": s.penalty,
            "travel": f.f1,
            "wait": f.f2,
            "evaluations": result.evaluations,
            "routes": routes,
        })
    }

    pub fn fronts(&self, seed: u64, evaluations: usize) -> Value {
        let inst = &self.instance;
        let evaluations = evaluations.max(2);
        let mut nsga = Nsga2Params::for_instance(inst);
        nsga.evaluations = evaluations;
        let mut hybrid = HybridParams::for_instance(inst);
        hybrid.nsga2.evaluations = evaluations / 2;
        hybrid.moead.evaluations = evaluations - evaluations / 2;
        let a = nsga2_solve(inst, &nsga, seed).feasible_objectives();
        let b = hybrid_solve(inst, &hybrid, seed).feasible_objectives();
        let hv = match normalize(&[a.clone(), b.clone()]) {
            Ok((n, _)) => json!([hypervolume(&n[0], [1.0; 3]), hypervolume(&n[1], [1.0; 3])]),
            Err(_) => json!([null, null]),
        };
        json!({
            "nsga2": a,
            "hybrid": b,
            "hypervolume": hv,
        })
    }

    pub fn recourse(&self, seed: u64, replications: usize) -> Result<Value, String> {
        let plan = self.plan.as_ref().ok_or("solve the routes first")?;
        let config = StochasticConfig {
            max_iter: replications.max(1),
            seed,
            ..StochasticConfig::default()
        };
        let e = estimate(&self.instance, plan, RecourseKind::Penalty, &config, 0).map_err(|e| e.to_string())?;
        Ok(json!({
            "mean": e.mean,
            "std_error": e.std_error,
            "iterations": e.iterations,
            "tardiness": e.tardiness,
            "overtime": e.overtime,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operations_produce_consistent_json() {
        let mut demo = Demo::generate("A", 1).unwrap();
        assert!(demo.recourse(0, 10).is_err());
        let n = demo.describe()["patients"].as_array().unwrap().len();
        let r = demo.routes(0, 5);
        let visits: usize = r["routes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_array().unwrap().len())
            .sum();
        let services: usize = demo.instance.patients().iter().map(|p| p.demands.len()).sum();
        assert_eq!(visits, services);
        assert!(n > 0);
        let e = demo.recourse(0, 20).unwrap();
        assert!(e["mean"].as_f64().unwrap() >= 0.0);
        let f = demo.fronts(0, 200);
        assert_eq!(f["hypervolume"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(Demo::generate("nope", 0).is_err());
        assert!(preset_names().contains("\"G\""));
    }
}
