//! Subcommand bodies.

use hhc_core::ga::{ga_solve, FitnessKind, GaParams};
use hhc_core::gvns::{gvns_solve, GvnsParams};
use hhc_core::instancegen::{generate, generate_feasible, preset, GenError, Recipe, PRESETS};
use hhc_core::io::{instance_to_json, SolutionFile};
use hhc_core::metrics::{coverage, hypervolume, normalize, Point};
use hhc_core::moea::{hybrid_solve, moead_solve, nsga2_solve, Front, HybridParams};
use hhc_core::oracle::{brute_force_pareto, brute_force_solve, OracleError, OracleLimits, WindowPolicy};
use hhc_core::recourse::{estimate, RecourseKind, StochasticConfig, StopReason};
use hhc_core::schedule::{decode, DecodeParams};
use hhc_core::{Chromosome, Instance, Schedule, VariantId};

use crate::output::{num, read_front, read_instance, read_text, write_bytes, Table};
use crate::{Algorithm, Failure, GenArgs, Globals, MetricsArgs, OracleArgs, SimulateArgs, SolveArgs};

const REFERENCE: Point = [1.0; 3];

pub fn gen(g: &Globals, a: GenArgs) -> Result<(), Failure> {
    if a.source.list_presets {
        let list: String = PRESETS.iter().map(|p| format!("{p}\n")).collect();
        return write_bytes(None, list.as_bytes());
    }
    let recipe: Recipe = match (&a.source.preset, &a.source.recipe) {
        (Some(name), _) => preset(name).map_err(|e| Failure::Usage(e.to_string()))?,
        (None, Some(path)) => {
            serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(Failure::Usage("one of --preset or --recipe is required".into())),
    };
    let instance = if a.feasible {
        let (instance, seed) =
            generate_feasible(&recipe, g.seed, a.variant.into(), a.attempts).map_err(|e| match e {
                GenError::NoFeasible(_) => Failure::NoSolution(e.to_string()),
                _ => Failure::Usage(e.to_string()),
            })?;
        eprintln!("hhc: feasible with seed {seed}");
        instance
    } else {
        generate(&recipe, g.seed).map_err(|e| Failure::Usage(e.to_string()))?
    };
    let mut text = instance_to_json(&instance);
    text.push('\n');
    write_bytes(a.out.as_deref(), text.as_bytes())
}

fn is_multi(alg: Algorithm) -> bool {
    matches!(alg, Algorithm::Nsga2 | Algorithm::Moead | Algorithm::Hybrid)
}

pub fn solve(g: &Globals, a: SolveArgs) -> Result<(), Failure> {
    let instance = read_instance(&a.instance)?;
    let multi = is_multi(a.alg);
    let variant: VariantId = match a.variant {
        Some(v) => v.into(),
        None if multi => VariantId::Multiobj,
        None => VariantId::HardMsmtw,
    };
    if multi != (variant == VariantId::Multiobj) {
        return Err(Failure::Usage(format!(
            "{:?} does not solve the {variant} variant",
            a.alg
        )));
    }
    if a.alg == Algorithm::Gvns && variant.is_stochastic() {
        return Err(Failure::Usage(
            "gvns is not combined with the recourse simulation; use --alg ga".into(),
        ));
    }
    if multi {
        solve_multi(g, &a, &instance)
    } else {
        solve_single(g, &a, &instance, variant)
    }
}

struct SingleRun {
    seed: u64,
    value: f64,
    expected: Option<f64>,
    chromosome: Chromosome,
    schedule: Schedule,
    evaluations: u64,
    elapsed_ms: f64,
    /// (step, best, mean or penalty)
    trace: Vec<(usize, f64, f64, f64)>,
}

fn run_single(g: &Globals, a: &SolveArgs, instance: &Instance, variant: VariantId, seed: u64) -> SingleRun {
    let clock = std::time::Instant::now();
    let mut run = match a.alg {
        Algorithm::Gvns => {
            let mut p = GvnsParams::for_instance(instance);
            p.time_limit_ms = g.time_limit_ms;
            p.timing = a.timing;
            if let Some(b) = a.budget {
                p.stop_after = b;
            }
            let res = gvns_solve(instance, variant, &p, seed);
            SingleRun {
                seed,
                value: res.value,
                expected: None,
                chromosome: res.best,
                schedule: res.schedule,
                evaluations: res.evaluations,
                elapsed_ms: 0.0,
                trace: res
                    .trace
                    .iter()
                    .map(|t| (t.iteration, t.best, t.penalty, t.elapsed_ms))
                    .collect(),
            }
        }
        _ => {
            let mut p = GaParams::for_variant(variant, instance);
            p.time_limit_ms = g.time_limit_ms;
            p.timing = a.timing;
            p.recourse.seed = seed;
            p.recourse.crn = a.crn;
            if let Some(b) = a.budget {
                p.stop_after = b;
            }
            if let Some(n) = a.population {
                p.population = n;
            }
            let res = ga_solve(instance, variant, &p, seed);
            let cost = res.schedule.total_cost();
            let expected = match p.fitness {
                FitnessKind::Deterministic => None,
                FitnessKind::Spr => Some(res.fitness.value() - cost),
                FitnessKind::Lex => Some(res.fitness.components()[1]),
            };
            SingleRun {
                seed,
                value: res.fitness.value(),
                expected,
                chromosome: res.best,
                schedule: res.schedule,
                evaluations: res.evaluations,
                elapsed_ms: 0.0,
                trace: res
                    .trace
                    .iter()
                    .map(|t| {
                        let mean = t.mean.last().copied().unwrap_or(f64::NAN);
                        (t.generation, t.best.value(), mean, t.elapsed_ms)
                    })
                    .collect(),
            }
        }
    };
    run.elapsed_ms = clock.elapsed().as_secs_f64() * 1000.0;
    run
}

fn solve_single(g: &Globals, a: &SolveArgs, instance: &Instance, variant: VariantId) -> Result<(), Failure> {
    let runs: Vec<SingleRun> = (0..a.repeat)
        .map(|r| run_single(g, a, instance, variant, g.seed.wrapping_add(r)))
        .collect();
    let mut header = vec![
        "run",
        "seed",
        "value",
        "cost",
        "expected_recourse",
        "penalty",
        "feasible",
        "evaluations",
    ];
    if a.timing {
        header.push("cpu_ms");
    }
    let mut table = Table::new(&header);
    for (r, run) in runs.iter().enumerate() {
        let mut row = vec![
            r.to_string(),
            run.seed.to_string(),
            num(run.value),
            num(run.schedule.total_cost()),
            run.expected.map(num).unwrap_or_default(),
            num(run.schedule.penalty),
            run.schedule.feasible.to_string(),
            run.evaluations.to_string(),
        ];
        if a.timing {
            row.push(num(run.elapsed_ms));
        }
        table.row(row);
    }
    let values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let average = values.iter().sum::<f64>() / values.len() as f64;
    for (label, v) in [("best", best), ("worst", worst), ("average", average)] {
        let mut row = vec![label.to_string(), String::new(), num(v)];
        row.resize(header.len(), String::new());
        if a.timing {
            let cpu = runs.iter().map(|r| r.elapsed_ms).sum::<f64>() / runs.len() as f64;
            row[header.len() - 1] = num(cpu);
        }
        table.row(row);
    }
    table.save(a.out.as_deref())?;

    if let Some(path) = &a.trace_out {
        let step = if a.alg == Algorithm::Gvns {
            "iteration"
        } else {
            "generation"
        };
        let extra = if a.alg == Algorithm::Gvns { "penalty" } else { "mean" };
        let mut header = vec!["run", step, "best", extra];
        if a.timing {
            header.push("elapsed_ms");
        }
        let mut t = Table::new(&header);
        for (r, run) in runs.iter().enumerate() {
            for &(s, best, x, ms) in &run.trace {
                let mut row = vec![r.to_string(), s.to_string(), num(best), num(x)];
                if a.timing {
                    row.push(num(ms));
                }
                t.row(row);
            }
        }
        t.save(Some(path))?;
    }

    let chosen = runs
        .iter()
        .filter(|r| r.schedule.feasible)
        .min_by(|x, y| x.value.total_cmp(&y.value))
        .or_else(|| runs.iter().min_by(|x, y| x.value.total_cmp(&y.value)))
        .expect("repeat is at least one");
    if let Some(path) = &a.solution_out {
        let file = SolutionFile::new(
            variant,
            &chosen.chromosome,
            Some(chosen.value),
            Some(chosen.schedule.clone()),
        );
        let mut text = serde_json::to_string_pretty(&file).expect("serializable");
        text.push('\n');
        write_bytes(Some(path), text.as_bytes())?;
    }
    if !chosen.schedule.feasible {
        return Err(Failure::NoSolution("no run found a feasible solution".into()));
    }
    Ok(())
}

fn solve_multi(g: &Globals, a: &SolveArgs, instance: &Instance) -> Result<(), Failure> {
    let mut hp = HybridParams::for_instance(instance);
    hp.nsga2.time_limit_ms = g.time_limit_ms;
    hp.moead.time_limit_ms = g.time_limit_ms;
    if let Some(n) = a.population {
        hp.nsga2.population = n;
        hp.moead.population = n;
        hp.moead.archive = n;
    }
    if let Some(b) = a.budget {
        let (first, second) = if a.alg == Algorithm::Hybrid {
            (b / 2, b - b / 2)
        } else {
            (b, b)
        };
        hp.nsga2.evaluations = first;
        hp.moead.evaluations = second;
    }
    let mut fronts: Vec<(u64, Front, f64)> = Vec::new();
    for r in 0..a.repeat {
        let seed = g.seed.wrapping_add(r);
        let clock = std::time::Instant::now();
        let front = match a.alg {
            Algorithm::Nsga2 => nsga2_solve(instance, &hp.nsga2, seed),
            Algorithm::Moead => moead_solve(instance, &hp.moead, None, seed),
            _ => hybrid_solve(instance, &hp, seed),
        };
        fronts.push((seed, front, clock.elapsed().as_secs_f64() * 1000.0));
    }

    let mut header = vec![
        "run",
        "seed",
        "front_size",
        "feasible_size",
        "min_f1",
        "min_f2",
        "min_f3",
    ];
    if a.timing {
        header.push("cpu_ms");
    }
    let mut table = Table::new(&header);
    for (r, (seed, front, ms)) in fronts.iter().enumerate() {
        let feasible = front.feasible_objectives();
        let mut row = vec![
            r.to_string(),
            seed.to_string(),
            front.len().to_string(),
            feasible.len().to_string(),
        ];
        for k in 0..3 {
            let m = feasible.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            row.push(if feasible.is_empty() { String::new() } else { num(m) });
        }
        if a.timing {
            row.push(num(*ms));
        }
        table.row(row);
    }
    table.save(a.out.as_deref())?;

    if let Some(path) = &a.front_out {
        let mut t = Table::new(&["run", "seed", "f1", "f2", "f3", "penalty", "feasible", "chromosome"]);
        for (r, (seed, front, _)) in fronts.iter().enumerate() {
            for m in &front.members {
                t.row([
                    r.to_string(),
                    seed.to_string(),
                    num(m.objectives[0]),
                    num(m.objectives[1]),
                    num(m.objectives[2]),
                    num(m.penalty),
                    m.feasible().to_string(),
                    m.chromosome.encode(),
                ]);
            }
        }
        t.save(Some(path))?;
    }

    let feasible: Vec<Vec<Point>> = fronts.iter().map(|(_, f, _)| f.feasible_objectives()).collect();
    if let Some(path) = &a.indicators_out {
        let normalized = normalize(&feasible)
            .map(|(n, _)| n)
            .unwrap_or_else(|_| feasible.clone());
        let mut t = Table::new(&["run", "seed", "points", "hypervolume"]);
        for (r, ((seed, _, _), f)) in fronts.iter().zip(&normalized).enumerate() {
            t.row([
                r.to_string(),
                seed.to_string(),
                f.len().to_string(),
                num(hypervolume(f, REFERENCE)),
            ]);
        }
        t.save(Some(path))?;
    }
    if feasible.iter().all(Vec::is_empty) {
        return Err(Failure::NoSolution("no run found a feasible solution".into()));
    }
    Ok(())
}

pub fn metrics(a: MetricsArgs) -> Result<(), Failure> {
    let fronts = a.fronts.iter().map(|p| read_front(p)).collect::<Result<Vec<_>, _>>()?;
    let (normalized, _) = normalize(&fronts).map_err(|e| Failure::Usage(e.to_string()))?;
    let cov_names: Vec<String> = (0..fronts.len()).map(|j| format!("cov_{j}")).collect();
    let mut header = vec!["front", "path", "points", "hypervolume"];
    header.extend(cov_names.iter().map(String::as_str));
    let mut table = Table::new(&header);
    for (i, f) in normalized.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            a.fronts[i].display().to_string(),
            f.len().to_string(),
            num(hypervolume(f, REFERENCE)),
        ];
        for other in &fronts {
            row.push(coverage(&fronts[i], other).map(num).unwrap_or_default());
        }
        table.row(row);
    }
    table.save(a.out.as_deref())
}

fn oracle_failure(e: OracleError) -> Failure {
    match e {
        OracleError::LimitsExceeded { .. } => Failure::Usage(e.to_string()),
        OracleError::Infeasible => Failure::NoSolution(e.to_string()),
    }
}

fn window_text(w: &Option<Vec<usize>>) -> String {
    w.as_ref()
        .map(|w| w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
        .unwrap_or_default()
}

pub fn oracle(a: OracleArgs) -> Result<(), Failure> {
    let instance = read_instance(&a.instance)?;
    let policy = if a.decoder_windows {
        WindowPolicy::Decoder
    } else {
        WindowPolicy::Enumerate
    };
    let limits = OracleLimits::default();
    if a.pareto {
        let points = brute_force_pareto(&instance, &limits, policy).map_err(oracle_failure)?;
        let mut t = Table::new(&["f1", "f2", "f3", "feasible", "windows", "chromosome"]);
        for p in &points {
            t.row([
                num(p.objectives[0]),
                num(p.objectives[1]),
                num(p.objectives[2]),
                "true".into(),
                window_text(&p.windows),
                p.chromosome.encode(),
            ]);
        }
        return t.save(a.out.as_deref());
    }
    let sol = brute_force_solve(&instance, a.variant.into(), &limits, policy).map_err(oracle_failure)?;
    let mut t = Table::new(&["value", "cost", "enumerated", "windows", "chromosome"]);
    t.row([
        num(sol.value),
        num(sol.schedule.total_cost()),
        sol.enumerated.to_string(),
        window_text(&sol.windows),
        sol.chromosome.encode(),
    ]);
    t.save(a.out.as_deref())
}

pub fn simulate(g: &Globals, a: SimulateArgs) -> Result<(), Failure> {
    let instance = read_instance(&a.instance)?;
    let file: SolutionFile = serde_json::from_str(&read_text(&a.solution)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", a.solution.display())))?;
    let ch = file.chromosome().map_err(|e| Failure::Usage(e.to_string()))?;
    let variant: VariantId = a.variant.map(Into::into).unwrap_or(file.variant);
    let config = StochasticConfig {
        max_iter: a.max_iter.max(1),
        epsilon: a.epsilon,
        gap_window: a.gap_window,
        seed: g.seed,
        ..StochasticConfig::default()
    };
    let kind = RecourseKind::for_variant(variant);
    let e = estimate(&instance, &ch, kind, &config, 0).map_err(|e| Failure::Usage(e.to_string()))?;
    let plan = decode(&instance, &ch, variant, &DecodeParams::for_variant(variant, &instance))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let stop = match e.stop {
        StopReason::MaxIter => "max-iter",
        StopReason::Gap => "gap",
        StopReason::SyncFailure => "sync-failure",
    };
    let mut t = Table::new(&[
        "cost",
        "expected_recourse",
        "total",
        "std_error",
        "iterations",
        "stop",
        "tardiness",
        "overtime",
        "skipped",
    ]);
    let cost = plan.total_cost();
    t.row([
        num(cost),
        num(e.mean),
        num(cost + e.mean),
        num(e.std_error),
        e.iterations.to_string(),
        stop.to_string(),
        num(e.tardiness),
        num(e.overtime),
        num(e.skipped),
    ]);
    t.save(a.out.as_deref())
}
