//! Build a solver from a config and run the whole process schedule.

use std::time::{Duration, Instant};

use crate::config::SimulationConfig;
use crate::error::Result;
use crate::mesh::{build_mesh, BoundaryLabel};
use crate::probes::ProbeSeries;
use crate::process::{ProcessSchedule, StepKind};
use crate::solver::{LedgerRow, SolverSetup, StepReport, ThermalSolver};

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub variant: String,
    pub n_cells: usize,
    /// Degrees of freedom of the fully built domain.
    pub n_dofs: usize,
    pub n_steps: usize,
    pub simulated_time: f64,
    pub wall_clock: Duration,
    pub peak_temperature: f64,
    pub final_max_temperature: f64,
    pub total_cg_iterations: usize,
    pub max_picard_iterations: usize,
    /// Largest per-step relative energy residual.
    pub max_relative_residual: f64,
    pub cooldown_stopped_early: bool,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub probes: ProbeSeries,
    pub ledger_labels: Vec<BoundaryLabel>,
    pub ledger: Vec<LedgerRow>,
    pub reports: Vec<StepReport>,
    pub summary: RunSummary,
}

/// A configured, not yet started simulation.
pub struct Simulation {
    config: SimulationConfig,
    solver: ThermalSolver,
    schedule: ProcessSchedule,
}

impl Simulation {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let materials = config.build_materials()?;
        let layering = config.layering();
        let (physical, _) = layering.counts(config.geometry.part.height)?;
        let schedule = config.process.schedule(physical)?;
        let variant = config.variant.domain();
        let mesh = build_mesh(&config.geometry, layering, variant)?;
        let setup = SolverSetup {
            mesh,
            variant,
            materials: config.region_materials(&materials),
            boundary_conditions: config.boundary_conditions(&materials)?,
            initial_temperature: config.initial_temperature,
            settings: config.solver,
        };
        let solver = ThermalSolver::new(setup)?;
        log::info!(
            "{} model: {}; {} steps over {:.1} s",
            config.variant.as_str(),
            solver.mesh().summary(),
            schedule.len(),
            schedule.total_time()
        );
        Ok(Self {
            config: config.clone(),
            solver,
            schedule,
        })
    }

    pub fn schedule(&self) -> &ProcessSchedule {
        &self.schedule
    }

    pub fn solver(&self) -> &ThermalSolver {
        &self.solver
    }

    pub fn run(self) -> Result<RunResult> {
        self.run_with(|_, _| Ok(()))
    }

    /// Run every step, calling `observe` after each one.
    pub fn run_with(
        mut self,
        mut observe: impl FnMut(&ThermalSolver, &StepReport) -> Result<()>,
    ) -> Result<RunResult> {
        let start = Instant::now();
        let names: Vec<String> = self.config.probes.iter().map(|p| p.name.clone()).collect();
        let points: Vec<[f64; 3]> = self.config.probes.iter().map(|p| p.point).collect();
        let mut probes = ProbeSeries::new(names);
        let sample = |s: &ThermalSolver| points.iter().map(|&p| s.probe(p)).collect::<Vec<_>>();
        probes.push(0.0, sample(&self.solver));

        let t0 = self.config.initial_temperature;
        let tol = self.schedule.cooldown_tolerance();
        let mut reports = Vec::with_capacity(self.schedule.len());
        let mut max_n = 0;
        let mut stopped_early = false;
        for step in self.schedule.steps() {
            if step.kind == StepKind::FinalCooldown && self.solver.max_deviation(t0) <= tol {
                stopped_early = true;
                break;
            }
            let report = self.solver.step(step)?;
            max_n = max_n.max(self.solver.n_dofs());
            probes.push(report.time, sample(&self.solver));
            observe(&self.solver, &report)?;
            log::debug!(
                "step {} t={:.3} kind={:?} picard={} cg={} Tmax={:.2}",
                report.index,
                report.time,
                report.kind,
                report.picard_iterations,
                report.cg_iterations,
                report.max_temperature
            );
            reports.push(report);
        }
        let wall_clock = start.elapsed();
        let summary = RunSummary {
            variant: self.config.variant.as_str().to_string(),
            n_cells: self.solver.mesh().active_count(),
            n_dofs: max_n,
            n_steps: reports.len(),
            simulated_time: self.solver.time(),
            wall_clock,
            peak_temperature: reports
                .iter()
                .map(|r| r.max_temperature)
                .fold(f64::NEG_INFINITY, f64::max),
            final_max_temperature: self.solver.max_temperature(),
            total_cg_iterations: reports.iter().map(|r| r.cg_iterations).sum(),
            max_picard_iterations: reports
                .iter()
                .map(|r| r.picard_iterations)
                .max()
                .unwrap_or(0),
            max_relative_residual: reports
                .iter()
                .map(|r| r.energy.relative_residual())
                .fold(0.0, f64::max),
            cooldown_stopped_early: stopped_early,
        };
        log::info!(
            "finished {} steps in {:.2} s wall-clock, peak {:.1} degC",
            summary.n_steps,
            wall_clock.as_secs_f64(),
            summary.peak_temperature
        );
        Ok(RunResult {
            probes,
            ledger_labels: self.solver.ledger_labels().to_vec(),
            ledger: self.solver.ledger().to_vec(),
            reports,
            summary,
        })
    }
}

/// Convenience wrapper: build and run without observing steps.
pub fn run(config: &SimulationConfig) -> Result<RunResult> {
    Simulation::new(config)?.run()
}
