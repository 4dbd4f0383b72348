//! Run configuration: presets for the three reference experiments, a flat
//! key=value file format, and single-key overrides.
//!
//! A configuration starts from a preset and is then mutated one key at a
//! time, first by an optional config file and then by command-line flags,
//! so the precedence is always preset < file < flags. Keys use section
//! prefixes (`physical.rho_f`, `time.dt`, `bc.x_lo`) and the file format
//! is one `key=value` per line with `#` comments.

use std::path::{Path, PathBuf};

use crate::assembly::{BcSpec, FaceBc, PhysicalParams, PressureSpace};
use crate::error::FsiError;
use crate::mesh::SolidShape;
use crate::Result;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    ActivatedDisc,
    StretchedDisc,
    OscillatingBall,
    /// Blank slate: starts from the activated-disc defaults and is meant
    /// to be reshaped entirely by a config file.
    Custom,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ActivatedDisc => "activated_disc",
            Self::StretchedDisc => "stretched_disc",
            Self::OscillatingBall => "oscillating_ball",
            Self::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = FsiError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "activated_disc" => Ok(Self::ActivatedDisc),
            "stretched_disc" => Ok(Self::StretchedDisc),
            "oscillating_ball" => Ok(Self::OscillatingBall),
            "custom" => Ok(Self::Custom),
            _ => Err(FsiError::Config(format!("unknown scenario {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Implicit,
    Explicit,
}

impl std::str::FromStr for Scheme {
    type Err = FsiError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "implicit" => Ok(Self::Implicit),
            "explicit" => Ok(Self::Explicit),
            _ => Err(FsiError::Config(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Initial condition selector; the stretched placement itself lives in
/// `solid_stretch` so the same knob also shapes the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitKind {
    Zero,
    StreamFunction { psi0: f64, a: f64, b: f64 },
    Stretch,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub physical: PhysicalParams,
    /// 2 or 3; only the first `dim` entries of the per-axis arrays count.
    pub dim: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub cells: [usize; 3],
    pub solid_shape: SolidShape,
    pub solid_center: [f64; 3],
    pub solid_radius: f64,
    /// Requested solid element size; 0 derives it from the velocity-node
    /// spacing (see [`resolved_target_h`](Self::resolved_target_h)).
    pub solid_target_h: f64,
    /// Load the solid from an ASCII mesh file instead of generating it.
    pub solid_mesh_file: Option<PathBuf>,
    /// Volume-preserving pre-stretch ratio; 1 means none.
    pub solid_stretch: f64,
    pub init: InitKind,
    pub dt: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
    pub pressure: PressureSpace,
    pub bc: [[FaceBc; 2]; 3],
    pub fp_tol: f64,
    pub fp_max: usize,
    pub solver_tol: f64,
    pub out_dir: Option<PathBuf>,
    /// Field-dump period in steps; 0 disables field output.
    pub field_stride: usize,
}

impl ScenarioConfig {
    /// The published parameter sets of the three experiments.
    pub fn preset(kind: ScenarioKind) -> Self {
        let activated = PhysicalParams {
            rho_f: 1.0,
            mu_f: 0.01,
            rho_s: 1.5,
            c1: 1.0,
        };
        let base = Self {
            scenario: ScenarioKind::ActivatedDisc,
            physical: activated,
            dim: 2,
            lo: [0.0; 3],
            hi: [1.0, 1.0, 1.0],
            cells: [16, 16, 16],
            solid_shape: SolidShape::Disc,
            solid_center: [0.5, 0.5, 0.0],
            solid_radius: 0.2,
            solid_target_h: 0.0,
            solid_mesh_file: None,
            solid_stretch: 1.0,
            init: InitKind::StreamFunction {
                psi0: 0.05,
                a: TWO_PI,
                b: TWO_PI,
            },
            dt: 5e-3,
            n_steps: 50,
            scheme: Scheme::Implicit,
            pressure: PressureSpace::P1P0,
            bc: [[FaceBc::Periodic; 2]; 3],
            fp_tol: 1e-8,
            fp_max: 25,
            solver_tol: 1e-9,
            out_dir: None,
            field_stride: 0,
        };
        match kind {
            ScenarioKind::ActivatedDisc => base,
            ScenarioKind::Custom => Self {
                scenario: ScenarioKind::Custom,
                ..base
            },
            ScenarioKind::StretchedDisc => Self {
                scenario: ScenarioKind::StretchedDisc,
                physical: PhysicalParams {
                    rho_s: 2.0,
                    c1: 2.0,
                    ..activated
                },
                cells: [22, 22, 22],
                solid_shape: SolidShape::QuarterDisc,
                solid_center: [0.0; 3],
                solid_radius: 0.4,
                solid_stretch: 1.4,
                init: InitKind::Stretch,
                n_steps: 200,
                // free-slip on the two symmetry edges, walls opposite
                bc: [
                    [FaceBc::Symmetry, FaceBc::Wall],
                    [FaceBc::Symmetry, FaceBc::Wall],
                    [FaceBc::Wall, FaceBc::Wall],
                ],
                ..base
            },
            ScenarioKind::OscillatingBall => Self {
                scenario: ScenarioKind::OscillatingBall,
                dim: 3,
                hi: [0.5, 0.5, 0.3],
                cells: [8, 8, 5],
                solid_shape: SolidShape::BallOctant,
                solid_center: [0.5, 0.5, 0.3],
                dt: 1e-2,
                n_steps: 20,
                bc: [[FaceBc::Symmetry; 2]; 3],
                ..base
            },
        }
    }

    /// Solid element size used by mesh generation. When unset it targets
    /// ring count m = round(1.4 r / h_vel) with h_vel the finest velocity
    /// node spacing, keeping the solid slightly finer than the grid.
    pub fn resolved_target_h(&self) -> f64 {
        if self.solid_target_h > 0.0 {
            return self.solid_target_h;
        }
        let mut h_vel = f64::INFINITY;
        for a in 0..self.dim {
            h_vel = h_vel.min((self.hi[a] - self.lo[a]) / self.cells[a] as f64 / 2.0);
        }
        let m = (1.4 * self.solid_radius / h_vel).round().max(1.0);
        if m <= 1.0 {
            self.solid_radius
        } else {
            // lands strictly between radius/m and radius/(m-1), so the
            // generator's ceil(radius/target_h) is exactly m
            self.solid_radius / (m - 0.5)
        }
    }

    /// Per-axis boundary conditions truncated to the run's dimension.
    pub fn bc_spec<const D: usize>(&self) -> BcSpec<D> {
        BcSpec {
            faces: std::array::from_fn(|a| self.bc[a]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(FsiError::Config(format!(
                "dimension must be 2 or 3, got {}",
                self.dim
            )));
        }
        for a in 0..self.dim {
            if self.cells[a] == 0 {
                return Err(FsiError::Config(format!("axis {a} has zero cells")));
            }
            if !(self.hi[a] > self.lo[a]) {
                return Err(FsiError::Config(format!(
                    "axis {a} extents are empty: [{}, {}]",
                    self.lo[a], self.hi[a]
                )));
            }
            if self.bc[a][0] == FaceBc::Periodic || self.bc[a][1] == FaceBc::Periodic {
                if self.bc[a][0] != self.bc[a][1] {
                    return Err(FsiError::Config(format!(
                        "periodic faces must be paired on axis {a}"
                    )));
                }
            }
        }
        if !(self.dt > 0.0) {
            return Err(FsiError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(FsiError::Config("n_steps must be at least 1".into()));
        }
        if !(self.solid_radius > 0.0) {
            return Err(FsiError::Config(format!(
                "solid radius must be positive, got {}",
                self.solid_radius
            )));
        }
        if !(self.solid_stretch > 0.0) {
            return Err(FsiError::Config(format!(
                "stretch ratio must be positive, got {}",
                self.solid_stretch
            )));
        }
        if !(self.fp_tol > 0.0) || !(self.solver_tol > 0.0) {
            return Err(FsiError::Config("tolerances must be positive".into()));
        }
        if self.fp_max == 0 {
            return Err(FsiError::Config("fp_max must be at least 1".into()));
        }
        if let InitKind::StreamFunction { psi0, .. } = self.init {
            if !psi0.is_finite() {
                return Err(FsiError::Config("psi0 must be finite".into()));
            }
        }
        self.physical
            .validate()
            .map_err(|e| FsiError::Config(e.to_string()))?;
        Ok(())
    }

    /// Apply every `key=value` line of a config file, in file order.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                FsiError::Config(format!(
                    "{}:{}: expected key=value, got {raw:?}",
                    path.display(),
                    ln + 1
                ))
            })?;
            self.apply_override(key.trim(), value.trim()).map_err(|e| {
                FsiError::Config(format!("{}:{}: {e}", path.display(), ln + 1))
            })?;
        }
        Ok(())
    }

    /// Set one configuration key from its text form.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        fn f(value: &str, key: &str) -> Result<f64> {
            value
                .parse()
                .map_err(|_| FsiError::Config(format!("bad number {value:?} for {key}")))
        }
        fn n(value: &str, key: &str) -> Result<usize> {
            value
                .parse()
                .map_err(|_| FsiError::Config(format!("bad integer {value:?} for {key}")))
        }
        fn face(value: &str) -> Result<FaceBc> {
            match value {
                "wall" => Ok(FaceBc::Wall),
                "symmetry" => Ok(FaceBc::Symmetry),
                "periodic" => Ok(FaceBc::Periodic),
                _ => Err(FsiError::Config(format!("unknown face condition {value:?}"))),
            }
        }
        let axis = |k: &str| -> usize {
            match k.as_bytes()[0] {
                b'x' => 0,
                b'y' => 1,
                _ => 2,
            }
        };
        match key {
            "scenario" => self.scenario = value.parse()?,
            "physical.rho_f" => self.physical.rho_f = f(value, key)?,
            "physical.mu_f" => self.physical.mu_f = f(value, key)?,
            "physical.rho_s" => self.physical.rho_s = f(value, key)?,
            "physical.c1" => self.physical.c1 = f(value, key)?,
            "grid.dim" => self.dim = n(value, key)?,
            "grid.cells_x" | "grid.cells_y" | "grid.cells_z" => {
                self.cells[axis(&key[11..])] = n(value, key)?;
            }
            "grid.lo_x" | "grid.lo_y" | "grid.lo_z" => {
                self.lo[axis(&key[8..])] = f(value, key)?;
            }
            "grid.hi_x" | "grid.hi_y" | "grid.hi_z" => {
                self.hi[axis(&key[8..])] = f(value, key)?;
            }
            "solid.shape" => {
                self.solid_shape = match value {
                    "disc" => SolidShape::Disc,
                    "quarter_disc" => SolidShape::QuarterDisc,
                    "ball_octant" => SolidShape::BallOctant,
                    _ => {
                        return Err(FsiError::Config(format!("unknown solid shape {value:?}")))
                    }
                };
            }
            "solid.center_x" | "solid.center_y" | "solid.center_z" => {
                self.solid_center[axis(&key[13..])] = f(value, key)?;
            }
            "solid.radius" => self.solid_radius = f(value, key)?,
            "solid.target_h" => self.solid_target_h = f(value, key)?,
            "solid.mesh_file" => self.solid_mesh_file = Some(PathBuf::from(value)),
            "solid.stretch" => self.solid_stretch = f(value, key)?,
            "init.kind" => {
                self.init = match value {
                    "zero" => InitKind::Zero,
                    "stretch" => InitKind::Stretch,
                    "stream_function" => InitKind::StreamFunction {
                        psi0: 0.05,
                        a: TWO_PI,
                        b: TWO_PI,
                    },
                    _ => return Err(FsiError::Config(format!("unknown init kind {value:?}"))),
                };
            }
            "init.psi0" | "init.a" | "init.b" => {
                let v = f(value, key)?;
                let InitKind::StreamFunction { psi0, a, b } = &mut self.init else {
                    return Err(FsiError::Config(format!(
                        "{key} requires init.kind=stream_function (set it first)"
                    )));
                };
                match key {
                    "init.psi0" => *psi0 = v,
                    "init.a" => *a = v,
                    _ => *b = v,
                }
            }
            "time.dt" => self.dt = f(value, key)?,
            "time.n_steps" => self.n_steps = n(value, key)?,
            "time.scheme" => self.scheme = value.parse()?,
            "space.pressure" => {
                self.pressure = match value {
                    "p1" => PressureSpace::P1,
                    "p1_p0" => PressureSpace::P1P0,
                    _ => {
                        return Err(FsiError::Config(format!(
                            "unknown pressure space {value:?}"
                        )))
                    }
                };
            }
            "bc.preset" => {
                self.bc = match value {
                    "periodic" => [[FaceBc::Periodic; 2]; 3],
                    "noslip" => [[FaceBc::Wall; 2]; 3],
                    _ => return Err(FsiError::Config(format!("unknown bc preset {value:?}"))),
                };
            }
            "bc.x_lo" | "bc.y_lo" | "bc.z_lo" => self.bc[axis(&key[3..])][0] = face(value)?,
            "bc.x_hi" | "bc.y_hi" | "bc.z_hi" => self.bc[axis(&key[3..])][1] = face(value)?,
            "solver.fp_tol" => self.fp_tol = f(value, key)?,
            "solver.fp_max" => self.fp_max = n(value, key)?,
            "solver.solver_tol" => self.solver_tol = f(value, key)?,
            "output.dir" => self.out_dir = Some(PathBuf::from(value)),
            "output.stride" => self.field_stride = n(value, key)?,
            _ => return Err(FsiError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }
}
