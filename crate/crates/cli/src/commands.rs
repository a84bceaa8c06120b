use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vortexlab_core::collapse_lab::{
    find_collapse_candidate, integrate_candidate, scan_with_progress, CollapseCandidate, CollapseScanResult,
    DEMO_HORIZON_FACTOR,
};
use vortexlab_core::conserved::{
    cluster_diagnostics, collapse_constraint, drift_audit, invariant_snapshot, ClusterDiagnostics, CollapseConstraint,
    DriftReport, InvariantSnapshot, MAX_ENUMERATION_SIZE,
};
use vortexlab_core::dynamics::{integrate, integrate_relative, Termination, TrajectoryRecord};
use vortexlab_core::export::{write_columns, write_scan_csv, write_trajectory_csv};
use vortexlab_core::kernels::{check_conditions, default_grid, ConditionReport, KernelSpec};
use vortexlab_core::VortexError;

use crate::config::{self, CollapseDemoConfig, InvariantsConfig, KernelCheckConfig, ScanFile, SimulateConfig};
use crate::output::{Envelope, OutputPlan};
use crate::{RunArgs, SeededArgs};

fn exit_code(termination: &Termination) -> u8 {
    match termination {
        Termination::ReachedFinalTime => 0,
        Termination::EpsCollapse { .. } => 2,
        Termination::StepUnderflow { .. } => 3,
    }
}

fn describe(termination: &Termination) -> String {
    match termination {
        Termination::ReachedFinalTime => "reached final time".into(),
        Termination::EpsCollapse { time, pair } => {
            format!("eps-collapse of vortices {} and {} at t = {time}", pair.0 + 1, pair.1 + 1)
        }
        Termination::StepUnderflow { time } => format!("step-size underflow at t = {time}"),
    }
}

fn print_drift(drift: &DriftReport) {
    println!("max relative drift:");
    println!("  H  {:.3e}", drift.hamiltonian);
    if let Some(m) = drift.vorticity_vector {
        println!("  M  {m:.3e}");
    }
    if let Some(i) = drift.moment_of_inertia {
        println!("  I  {i:.3e}");
    }
    println!("  C  {:.3e}", drift.collapse_constraint);
}

fn write_trajectory(plan: &OutputPlan, record: &TrajectoryRecord, gnuplot: bool) -> Result<()> {
    let mut w = plan.create(".csv")?;
    write_trajectory_csv(record, &mut w).context("writing trajectory CSV")?;
    if gnuplot {
        let rows = record.times.iter().copied().zip(record.min_pair_distance.iter().copied());
        write_columns(plan.create("_min_dist.dat")?, ("t", "min_dist"), rows)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateResult<'a> {
    drift: Option<DriftReport>,
    record: &'a TrajectoryRecord,
}

pub fn simulate(args: &RunArgs) -> Result<u8> {
    let loaded = config::load::<SimulateConfig>(&args.config)?;
    let cfg = &loaded.config;
    let kernel = cfg.kernel.build()?;
    let system = cfg.system()?;
    let record = match cfg.anchor {
        None => integrate(&system, &kernel, cfg.final_time, &cfg.integrator)?,
        Some(anchor) => integrate_relative(&system.relative(anchor)?, &kernel, cfg.final_time, &cfg.integrator)?,
    };
    let drift = drift_audit(&record).ok();

    let plan = OutputPlan::new(&args.out, "trajectory");
    let result = SimulateResult {
        drift,
        record: &record,
    };
    let json = plan.write_json(".json", &Envelope::new("simulate", &loaded.sha256, None, result))?;
    write_trajectory(&plan, &record, args.emit_gnuplot)?;

    println!("termination: {}", describe(&record.termination));
    println!("snapshots: {}, accepted steps: {}", record.len(), record.stats.accepted_steps);
    if let Some(d) = &drift {
        print_drift(d);
    }
    println!("wrote {}", json.display());
    Ok(exit_code(&record.termination))
}

#[derive(Serialize)]
struct InvariantsResult {
    snapshot: InvariantSnapshot,
    collapse_constraint: CollapseConstraint,
    clusters: Option<ClusterDiagnostics>,
}

pub fn invariants(args: &RunArgs) -> Result<u8> {
    let loaded = config::load::<InvariantsConfig>(&args.config)?;
    let cfg = &loaded.config;
    let kernel = cfg.kernel.build()?;
    let system = cfg.system()?;
    let snapshot = invariant_snapshot(&system, &kernel);
    let constraint = collapse_constraint(&system);
    let clusters = match cluster_diagnostics(system.intensities()) {
        Ok(c) => Some(c),
        Err(VortexError::TooLarge(_)) => None,
        Err(e) => return Err(e.into()),
    };

    let plan = OutputPlan::new(&args.out, "invariants");
    let result = InvariantsResult {
        snapshot,
        collapse_constraint: constraint,
        clusters,
    };
    let json = plan.write_json(".json", &Envelope::new("invariants", &loaded.sha256, None, &result))?;

    println!("{:<24} {:>24}", "quantity", "value");
    println!("{:<24} {:>24.16e}", "H", snapshot.hamiltonian);
    println!("{:<24} {:>24.16e}", "M_x", snapshot.vorticity_vector.x);
    println!("{:<24} {:>24.16e}", "M_y", snapshot.vorticity_vector.y);
    println!("{:<24} {:>24.16e}", "I", snapshot.moment_of_inertia);
    println!("{:<24} {:>24.16e}", "C", constraint.value);
    println!("{:<24} {:>24.16e}", "C (identity)", constraint.via_identity);
    println!("{:<24} {:>24.3e}", "identity residual", constraint.residual);
    println!("{:<24} {:>24.16e}", "diameter", snapshot.diameter);
    match snapshot.center_of_vorticity {
        Some(b) => println!("{:<24} {:>24}", "B", format!("({:.6e}, {:.6e})", b.x, b.y)),
        None => println!("{:<24} {:>24}", "B", "undefined (neutral)"),
    }
    match clusters {
        Some(c) => {
            println!("{:<24} {:>24.16e}", "a", c.total_abs);
            println!("{:<24} {:>24.16e}", "A0", c.min_proper_subset_sum);
            println!("{:<24} {:>24.16e}", "A", c.min_subset_sum);
            println!("{:<24} {:>24}", "clusters", format!("{:?}", c.classification));
        }
        None => println!("cluster diagnostics skipped: N > {MAX_ENUMERATION_SIZE}"),
    }
    println!("wrote {}", json.display());
    Ok(0)
}

pub fn collapse_scan(args: &SeededArgs, threads: Option<usize>) -> Result<u8> {
    let loaded = config::load::<ScanFile>(&args.run.config)?;
    let mut scan_cfg = loaded.config.scan_config();
    if let Some(seed) = args.seed {
        scan_cfg.rng_seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building worker pool")?;

    let result: CollapseScanResult = pool.install(|| {
        scan_with_progress(&scan_cfg, |k, c| {
            eprintln!(
                "[{}/{}] eps = {}: {} hits ({} initial, {} inconclusive) of {}",
                k + 1,
                scan_cfg.epsilons.len(),
                c.epsilon,
                c.hit_count,
                c.initial_hits,
                c.inconclusive_count,
                c.sample_count
            );
        })
    })?;

    let plan = OutputPlan::new(&args.run.out, "scan");
    let json = plan.write_json(
        ".json",
        &Envelope::new("collapse-scan", &loaded.sha256, Some(scan_cfg.rng_seed), &result),
    )?;
    write_scan_csv(&result, plan.create(".csv")?).context("writing scan CSV")?;
    if args.run.emit_gnuplot {
        let rows = result.cells.iter().map(|c| (c.epsilon, c.measure_fraction));
        write_columns(plan.create("_measure.dat")?, ("epsilon", "measure_fraction"), rows)?;
    }

    match result.fitted_exponent {
        Some(slope) => println!("fitted exponent: {slope:.4} (rate exponent {})", result.rate_law.exponent()),
        None => println!("fitted exponent: unavailable (fewer than two cells with enough hits)"),
    }
    println!("bound constant: {:.4e}", result.bound_constant);
    println!("wrote {}", json.display());
    Ok(0)
}

#[derive(Serialize)]
struct KernelCheckEntry {
    kernel: KernelSpec,
    passed: bool,
    report: ConditionReport,
}

pub fn kernel_check(args: &RunArgs) -> Result<u8> {
    let loaded = config::load::<KernelCheckConfig>(&args.config)?;
    let cfg = &loaded.config;
    let mut entries = Vec::new();
    for spec in &cfg.kernels {
        for &eps in &cfg.epsilons {
            let spec = spec.with_epsilon(eps);
            let kernel = spec.profile()?.regularize(eps)?;
            let report = check_conditions(&kernel, &default_grid(eps, cfg.grid_points));
            entries.push(KernelCheckEntry {
                kernel: spec,
                passed: report.passed(),
                report,
            });
        }
    }

    let plan = OutputPlan::new(&args.out, "kernel-check");
    let json = plan.write_json(".json", &Envelope::new("kernel-check", &loaded.sha256, None, &entries))?;

    println!(
        "{:<8} {:>8} {:>10}  {:<44} {:>10}  result",
        "kernel", "s", "epsilon", "worst margin (conditions 1-4)", "junction"
    );
    for e in &entries {
        let s = e.kernel.s.map_or("-".to_string(), |s| s.to_string());
        let margins: Vec<String> = e.report.conditions.iter().map(|c| format!("{:+.2e}", c.worst_margin + 0.0)).collect();
        println!(
            "{:<8} {:>8} {:>10}  {:<44} {:>10.2e}  {}",
            format!("{:?}", e.kernel.kind).to_lowercase(),
            s,
            e.report.epsilon,
            margins.join(" "),
            e.report.junction_residual,
            if e.passed { "pass" } else { "FAIL" }
        );
        for (k, c) in e.report.conditions.iter().enumerate() {
            if !c.passed() {
                println!("    condition {}: {} violations, worst at q = {}", k + 1, c.violations, c.worst_at);
            }
        }
    }
    println!("wrote {}", json.display());
    Ok(if entries.iter().all(|e| e.passed) { 0 } else { 2 })
}

#[derive(Serialize)]
struct DemoResult<'a> {
    candidate: &'a CollapseCandidate,
    horizon: f64,
    termination: Termination,
    final_min_distance: f64,
    final_diameter: f64,
}

pub fn collapse_demo(args: &SeededArgs) -> Result<u8> {
    let loaded = config::load::<CollapseDemoConfig>(&args.run.config)?;
    let cfg = &loaded.config;
    let seed = args.seed.unwrap_or(cfg.rng_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidate = match find_collapse_candidate(&cfg.intensities, &mut rng) {
        Ok(c) => c,
        Err(VortexError::NotFound(msg)) => {
            println!("no candidate: {msg}");
            return Ok(2);
        }
        Err(e) => return Err(e.into()),
    };
    let record = integrate_candidate(&candidate, &cfg.integrator)?;
    let last = record.len() - 1;
    let result = DemoResult {
        candidate: &candidate,
        horizon: DEMO_HORIZON_FACTOR * candidate.collapse_time_estimate,
        termination: record.termination,
        final_min_distance: record.min_pair_distance[last],
        final_diameter: record.invariant_log[last].diameter,
    };

    let plan = OutputPlan::new(&args.run.out, "collapse-demo");
    let json = plan.write_json(".json", &Envelope::new("collapse-demo", &loaded.sha256, Some(seed), &result))?;
    write_trajectory(&plan, &record, args.run.emit_gnuplot)?;
    // A `simulate` config that replays the run.
    let replay = SimulateConfig {
        intensities: candidate.system.intensities().to_vec(),
        positions: candidate.system.positions().to_vec(),
        kernel: KernelSpec::euler(),
        final_time: result.horizon,
        integrator: cfg.integrator,
        anchor: None,
        extra: Default::default(),
    };
    let mut w = plan.create("_simulate.json")?;
    std::io::Write::write_all(&mut w, config::to_document(&replay)?.as_bytes())?;
    std::io::Write::flush(&mut w)?;

    println!("C = {:.3e}", candidate.collapse_constraint);
    println!("estimated collapse time: {:.6}", candidate.collapse_time_estimate);
    println!("termination: {}", describe(&record.termination));
    println!("final min distance: {:.3e}", result.final_min_distance);
    println!("wrote {}", json.display());
    Ok(0)
}
