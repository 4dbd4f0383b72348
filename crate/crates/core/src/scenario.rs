//! Scenario execution: build a run from its configuration, advance it,
//! collect per-step energy reports, and write the output files.
//!
//! The driver is dimension-generic inside and dispatched on `config.dim`
//! at the boundary. On a solver failure mid-run the time series collected
//! so far is still written before the error (tagged with its step index)
//! propagates, so a crashed run leaves its partial record behind.

use std::path::PathBuf;

use crate::assembly::FluidOperators;
use crate::config::{InitKind, ScenarioConfig, Scheme};
use crate::diagnostics::{energy_report, EnergyReport};
use crate::error::FsiError;
use crate::mesh::{FluidGrid, SolidMesh};
use crate::output::{write_fields, write_timeseries};
use crate::stepper::{InitSpec, Stepper};
use crate::Result;

#[derive(Debug)]
pub struct RunResult {
    /// One report per time level, the t = 0 state included.
    pub reports: Vec<EnergyReport>,
    pub timeseries_path: Option<PathBuf>,
}

impl RunResult {
    /// Initial total energy, the normalizer of every ratio.
    pub fn e0(&self) -> f64 {
        self.reports[0].e_total
    }

    pub fn final_e_total(&self) -> f64 {
        self.reports.last().unwrap().e_total
    }

    pub fn max_abs_r(&self) -> f64 {
        self.reports.iter().fold(0.0, |m, r| m.max(r.r_step.abs()))
    }

    pub fn max_abs_mass_variation(&self) -> f64 {
        self.reports
            .iter()
            .fold(0.0, |m, r| m.max(r.mass_variation.abs()))
    }
}

/// One row of the time-step refinement table.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub e_total_final: f64,
    pub max_r_over_e0: f64,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunResult> {
    config.validate()?;
    match config.dim {
        2 => run_typed::<2>(config),
        _ => run_typed::<3>(config),
    }
}

fn prefix<const D: usize, T: Copy + Default>(a: &[T; 3]) -> [T; D] {
    std::array::from_fn(|i| a[i])
}

fn build_solid<const D: usize>(config: &ScenarioConfig) -> Result<SolidMesh<D>> {
    if let Some(path) = &config.solid_mesh_file {
        let text = std::fs::read_to_string(path)?;
        return SolidMesh::from_ascii(&text);
    }
    SolidMesh::generate(
        config.solid_shape,
        prefix::<D, f64>(&config.solid_center),
        config.solid_radius,
        config.resolved_target_h(),
    )
}

fn run_typed<const D: usize>(config: &ScenarioConfig) -> Result<RunResult> {
    let grid = FluidGrid::build(
        prefix::<D, f64>(&config.lo),
        prefix::<D, f64>(&config.hi),
        prefix::<D, usize>(&config.cells),
    )?;
    let ops = FluidOperators::build(grid, config.pressure)?;
    let solid = build_solid::<D>(config)?;
    let mut stepper = Stepper::new(ops, config.physical, config.bc_spec::<D>(), &solid)?;
    stepper.fp_tol = config.fp_tol;
    stepper.fp_max = config.fp_max;
    stepper.solver_tol = config.solver_tol;

    let init = match config.init {
        InitKind::Zero => InitSpec::Zero,
        InitKind::StreamFunction { psi0, a, b } => InitSpec::StreamFunction { psi0, a, b },
        InitKind::Stretch => InitSpec::Stretch {
            center: prefix::<D, f64>(&config.solid_center),
            s: config.solid_stretch,
        },
    };
    let mut state = stepper.initial_state(solid, &init)?;

    // normalize against the t0 total through the same division as every
    // later row, so the first ratio is exactly 1
    let e0 = energy_report(&state, &stepper.ops, &config.physical, None)?.e_total;
    let mut reports = vec![energy_report(&state, &stepper.ops, &config.physical, Some(e0))?];

    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let dump = |state: &crate::stepper::SimulationState<D>,
                stepper: &Stepper<D>,
                step: usize|
     -> Result<()> {
        if config.field_stride > 0 && step % config.field_stride == 0 {
            if let Some(dir) = &config.out_dir {
                write_fields(state, &stepper.ops, &dir.join(format!("fields_{step:05}")))?;
            }
        }
        Ok(())
    };
    dump(&state, &stepper, 0)?;

    let mut failure = None;
    for step in 1..=config.n_steps {
        let next = match config.scheme {
            Scheme::Implicit => stepper.step_implicit(&state, config.dt),
            Scheme::Explicit => stepper.step_explicit(&state, config.dt),
        };
        match next {
            Ok(s) => {
                state = s;
                reports.push(energy_report(&state, &stepper.ops, &config.physical, Some(e0))?);
                dump(&state, &stepper, step)?;
            }
            Err(e) => {
                failure = Some(FsiError::StepFailed {
                    step,
                    source: Box::new(e),
                });
                break;
            }
        }
    }

    let timeseries_path = match &config.out_dir {
        Some(dir) => {
            let path = dir.join("timeseries.csv");
            write_timeseries(&reports, &path)?;
            Some(path)
        }
        None => None,
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunResult {
        reports,
        timeseries_path,
    })
}

/// Run the configured scenario once per time step down the list, all to
/// the same final time, and tabulate the refinement behavior of the final
/// total energy and the peak normalized remainder.
pub fn convergence_study(
    config: &ScenarioConfig,
    dts: &[f64],
    t_final: f64,
) -> Result<Vec<ConvergenceRow>> {
    if dts.len() < 2 {
        return Err(FsiError::Config(
            "a convergence study needs at least two time steps".into(),
        ));
    }
    if !(t_final > 0.0) {
        return Err(FsiError::Config(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in dts {
        if !(dt > 0.0) {
            return Err(FsiError::Config(format!("time step must be positive, got {dt}")));
        }
        let n = (t_final / dt).round();
        if n < 1.0 || (n * dt - t_final).abs() > 1e-9 * t_final {
            return Err(FsiError::Config(format!(
                "time step {dt} does not divide the final time {t_final}"
            )));
        }
        let mut run_config = config.clone();
        run_config.dt = dt;
        run_config.n_steps = n as usize;
        // per-run outputs would overwrite each other; the study emits a table
        run_config.out_dir = None;
        run_config.field_stride = 0;
        let result = run_scenario(&run_config)?;
        let e0 = result.e0();
        rows.push(ConvergenceRow {
            dt,
            e_total_final: result.final_e_total(),
            max_r_over_e0: result.max_abs_r() / e0,
        });
    }
    Ok(rows)
}

/// Render the convergence table as CSV (same 17-digit contract as the
/// time series).
pub fn format_convergence(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("dt,E_total_final,max_R_over_E0\n");
    for r in rows {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            r.dt, r.e_total_final, r.max_r_over_e0
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioKind;

    fn tiny_activated() -> ScenarioConfig {
        let mut c = ScenarioConfig::preset(ScenarioKind::ActivatedDisc);
        c.cells = [4, 4, 4];
        c.dt = 1e-2;
        c.n_steps = 2;
        c
    }

    #[test]
    fn zero_steps_is_a_config_error() {
        let mut c = tiny_activated();
        c.n_steps = 0;
        assert!(matches!(run_scenario(&c), Err(FsiError::Config(_))));
    }

    #[test]
    fn tiny_run_reports_every_level() {
        let c = tiny_activated();
        let r = run_scenario(&c).unwrap();
        assert_eq!(r.reports.len(), 3);
        assert_eq!(r.reports[0].e_ratio, Some(1.0));
        assert_eq!(r.reports[0].t, 0.0);
        assert!((r.reports[2].t - 0.02).abs() < 1e-14);
        assert!(r.timeseries_path.is_none());
        // energy cannot grow beyond the remainder allowance at this scale
        let ratio = r.reports[2].e_ratio.unwrap();
        assert!(ratio > 0.0 && ratio < 1.0 + 1e-6, "ratio {ratio}");
    }

    #[test]
    fn outputs_land_in_the_requested_directory() {
        let dir = std::env::temp_dir().join(format!("unifield_run_{}", std::process::id()));
        std::fs::remove_dir_all(&dir).ok();
        let mut c = tiny_activated();
        c.n_steps = 1;
        c.out_dir = Some(dir.clone());
        c.field_stride = 1;
        let r = run_scenario(&c).unwrap();
        let ts = r.timeseries_path.unwrap();
        assert!(ts.exists());
        // header, the t0 row, and one step row
        let text = std::fs::read_to_string(&ts).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(dir.join("fields_00000_fluid.vtk").exists());
        assert!(dir.join("fields_00000_solid.vtk").exists());
        assert!(dir.join("fields_00001_fluid.vtk").exists());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn failed_step_preserves_partial_output() {
        let dir = std::env::temp_dir().join(format!("unifield_fail_{}", std::process::id()));
        std::fs::remove_dir_all(&dir).ok();
        let mut c = tiny_activated();
        // an absurd fixed-point budget cannot converge on a moving flow
        c.fp_tol = 1e-300;
        c.fp_max = 1;
        c.out_dir = Some(dir.clone());
        let err = run_scenario(&c).unwrap_err();
        assert!(matches!(
            err,
            FsiError::StepFailed { step: 1, .. }
        ));
        // the t0 row was still written
        let text = std::fs::read_to_string(dir.join("timeseries.csv")).unwrap();
        assert_eq!(text.lines().count(), 2);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn convergence_study_validates_its_inputs() {
        let c = tiny_activated();
        assert!(matches!(
            convergence_study(&c, &[1e-2], 0.1),
            Err(FsiError::Config(_))
        ));
        assert!(matches!(
            convergence_study(&c, &[1e-2, 7e-3], 0.1),
            Err(FsiError::Config(_))
        ));
        assert!(matches!(
            convergence_study(&c, &[1e-2, 5e-3], -0.1),
            Err(FsiError::Config(_))
        ));
    }

    #[test]
    fn convergence_study_tabulates_each_dt() {
        let c = tiny_activated();
        let rows = convergence_study(&c, &[2e-2, 1e-2], 0.04).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].dt, 2e-2);
        assert_eq!(rows[1].dt, 1e-2);
        assert!(rows.iter().all(|r| r.max_r_over_e0 > 0.0));
        assert!(rows.iter().all(|r| r.e_total_final.is_finite()));
        let table = format_convergence(&rows);
        assert_eq!(table.lines().count(), 3);
        assert!(table.starts_with("dt,E_total_final,max_R_over_E0\n"));
    }
}
