//! Classical four-stage Runge–Kutta integration of `∂_t ψ = Q̂(ψ)` on grid states,
//! the cutoff-continuation study and paired stability runs.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{k_alpha_distance, AnalyticCharFn, CharGrid, CharRef, GridHeader, Interpolation, MeasureSpec};
use crate::collision::{rhs_weighted, QuadratureSettings, SphereQuadrature};
use crate::error::{Error, Result};
use crate::kernel::{AngularKernel, CutoffKernel, ScalarRule};
use crate::vec3::Vec3;
use crate::FORMAT_VERSION;

/// Modulus above which a step is rejected as unstable.
pub const INSTABILITY_THRESHOLD: f64 = 1.0 + 1e-6;

fn default_strength() -> f64 {
    1.0
}
fn default_cadence() -> f64 {
    10.0
}
fn default_safety() -> f64 {
    0.5
}
fn default_alphas() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub s: f64,
    #[serde(default = "default_strength")]
    pub strength: f64,
    /// Cutoff level n of b_n = min(b, n).
    pub cutoff: f64,
    /// Increasing levels for the continuation study.
    #[serde(default)]
    pub schedule: Option<Vec<f64>>,
    pub radius: f64,
    pub points: usize,
    /// Fixed step; `None` picks the largest step allowed by the stability rule.
    #[serde(default)]
    pub dt: Option<f64>,
    pub horizon: f64,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    /// Rule for the scalar angular integrals (cutoff mass, λ_α).
    #[serde(default)]
    pub rule: ScalarRule,
    /// Records per unit time.
    #[serde(default = "default_cadence")]
    pub cadence: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub interpolation: Interpolation,
    /// Evaluate the right-hand side once per symmetry orbit of the initial grid.
    #[serde(default = "default_true")]
    pub symmetry: bool,
}

impl EvolveConfig {
    pub fn new(s: f64, cutoff: f64, radius: f64, points: usize, horizon: f64) -> Self {
        EvolveConfig {
            s,
            strength: 1.0,
            cutoff,
            schedule: None,
            radius,
            points,
            dt: None,
            horizon,
            quadrature: QuadratureSettings::default(),
            rule: ScalarRule::default(),
            cadence: default_cadence(),
            safety: default_safety(),
            alphas: default_alphas(),
            interpolation: Interpolation::default(),
            symmetry: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Usage(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("s", self.s)?;
        positive("strength", self.strength)?;
        positive("cutoff", self.cutoff)?;
        positive("radius", self.radius)?;
        positive("horizon", self.horizon)?;
        positive("cadence", self.cadence)?;
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::Usage(format!("safety must lie in (0, 1], got {}", self.safety)));
        }
        if self.points < 4 {
            return Err(Error::Usage(format!("points must be at least 4, got {}", self.points)));
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Usage("alphas must be a nonempty list of positive exponents".into()));
        }
        if let Some(schedule) = &self.schedule {
            if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) || schedule.iter().any(|n| !(*n > 0.0)) {
                return Err(Error::Usage("schedule must be a strictly increasing list of positive levels".into()));
            }
        }
        self.quadrature.validate().map_err(|e| Error::Usage(e.to_string()))
    }

    pub fn kernel(&self) -> Result<AngularKernel> {
        Ok(AngularKernel::new(self.s, self.strength)?.with_rule(self.rule))
    }

    /// Same run with every quadrature resolution doubled.
    pub fn doubled(&self) -> Self {
        EvolveConfig { quadrature: self.quadrature.doubled(), rule: self.rule.doubled(), ..self.clone() }
    }

    /// Largest admissible step safety / (2 m_n).
    pub fn max_dt(&self, mass: f64) -> f64 {
        self.safety / (2.0 * mass)
    }

    /// The configured step, or the largest admissible one; a configured step above
    /// the bound is a usage error.
    pub fn step_size(&self, mass: f64) -> Result<f64> {
        let bound = self.max_dt(mass);
        match self.dt {
            Some(dt) if dt > bound * (1.0 + 1e-12) => Err(Error::Usage(format!(
                "dt = {dt} exceeds safety/(2 m_n) = {bound:.6e} for cutoff mass {mass:.6e}"
            ))),
            Some(dt) => Ok(dt),
            None => Ok(bound),
        }
    }

    /// Record times 0, 1/cadence, 2/cadence, … and the horizon.
    pub fn record_times(&self) -> Vec<f64> {
        let interval = 1.0 / self.cadence;
        let mut times = vec![0.0];
        let mut k = 1;
        loop {
            let t = k as f64 * interval;
            if t >= self.horizon * (1.0 - 1e-12) {
                break;
            }
            times.push(t);
            k += 1;
        }
        times.push(self.horizon);
        times
    }

    pub fn with_cutoff(&self, level: f64) -> Self {
        EvolveConfig { cutoff: level, ..self.clone() }
    }
}

/// A signed axis permutation ξ ↦ gξ, optionally paired with complex conjugation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct GridSymmetry {
    perm: [usize; 3],
    flip: [bool; 3],
    conj: bool,
}

impl GridSymmetry {
    fn all() -> Vec<([usize; 3], [bool; 3])> {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = Vec::with_capacity(48);
        for p in perms {
            for bits in 0..8u8 {
                out.push((p, [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0]));
            }
        }
        out
    }

    fn apply(perm: [usize; 3], flip: [bool; 3], n: usize, ijk: [usize; 3]) -> [usize; 3] {
        let mut out = [0; 3];
        for a in 0..3 {
            let v = ijk[perm[a]];
            out[a] = if flip[a] { n - 1 - v } else { v };
        }
        out
    }
}

/// Orbit structure of the grid under the symmetries of a state.
#[derive(Clone, Debug)]
struct Orbits {
    reps: Vec<usize>,
    /// For every node: position of its representative in `reps` and whether to conjugate.
    map: Vec<(u32, bool)>,
}

impl Orbits {
    fn trivial(len: usize) -> Self {
        Orbits { reps: (0..len).collect(), map: (0..len).map(|i| (i as u32, false)).collect() }
    }

    fn detect(grid: &CharGrid, tol: f64) -> Self {
        let n = grid.n();
        let vals = grid.values();
        let mut group = Vec::new();
        for (perm, flip) in GridSymmetry::all() {
            let mut plain = true;
            let mut conj = true;
            for idx in 0..vals.len() {
                let image = GridSymmetry::apply(perm, flip, n, grid.split_index(idx));
                let w = vals[grid.index(image[0], image[1], image[2])];
                let v = vals[idx];
                plain &= (w - v).norm() <= tol;
                conj &= (w - v.conj()).norm() <= tol;
                if !plain && !conj {
                    break;
                }
            }
            if plain || conj {
                group.push(GridSymmetry { perm, flip, conj: !plain });
            }
        }
        let mut rep_of = vec![(usize::MAX, false); vals.len()];
        for idx in 0..vals.len() {
            let ijk = grid.split_index(idx);
            for g in &group {
                let image = GridSymmetry::apply(g.perm, g.flip, n, ijk);
                let j = grid.index(image[0], image[1], image[2]);
                if j < rep_of[idx].0 {
                    rep_of[idx] = (j, g.conj);
                }
            }
        }
        let mut position = vec![u32::MAX; vals.len()];
        let mut reps = Vec::new();
        for idx in 0..vals.len() {
            if rep_of[idx].0 == idx {
                position[idx] = reps.len() as u32;
                reps.push(idx);
            }
        }
        let map = rep_of.iter().map(|&(r, c)| (position[r], c)).collect();
        Orbits { reps, map }
    }
}

/// Right-hand side evaluator bound to one kernel, quadrature and grid geometry.
pub struct Integrator {
    kernel: CutoffKernel,
    quad: SphereQuadrature,
    weights: Vec<f64>,
    orbits: Orbits,
}

impl Integrator {
    /// Symmetries are detected on `initial` when `symmetry` is set; the orbit map is kept for the whole run.
    pub fn new(kernel: CutoffKernel, settings: QuadratureSettings, initial: &CharGrid, symmetry: bool) -> Result<Self> {
        let quad = SphereQuadrature::for_kernel(settings, &kernel)?;
        let weights = quad.kernel_weights(&kernel);
        let orbits = if symmetry { Orbits::detect(initial, 1e-13) } else { Orbits::trivial(initial.len()) };
        Ok(Integrator { kernel, quad, weights, orbits })
    }

    pub fn kernel(&self) -> &CutoffKernel {
        &self.kernel
    }

    /// Number of distinct right-hand side evaluations per stage.
    pub fn orbit_count(&self) -> usize {
        self.orbits.reps.len()
    }

    /// Q̂(ψ) at every node; nodes outside the inscribed ball use clamped interpolation.
    pub fn rhs(&self, state: &CharGrid) -> Vec<Complex64> {
        let origin = state.origin_value();
        let vals = state.values();
        let reps: Vec<Complex64> = self
            .orbits
            .reps
            .par_iter()
            .map(|&idx| rhs_weighted(state, state.node_at(idx), vals[idx], origin, &self.weights, &self.quad))
            .collect();
        self.orbits
            .map
            .iter()
            .map(|&(pos, conj)| {
                let v = reps[pos as usize];
                if conj {
                    v.conj()
                } else {
                    v
                }
            })
            .collect()
    }

    /// One classical Runge–Kutta step; ψ(0) is reset to 1 afterwards.
    pub fn step(&self, state: &CharGrid, dt: f64) -> Result<CharGrid> {
        let base = state.values();
        let stage = |k: &[Complex64], c: f64| -> Result<CharGrid> {
            state.with_values(base.iter().zip(k).map(|(v, d)| v + d * (c * dt)).collect())
        };
        let k1 = self.rhs(state);
        let k2 = self.rhs(&stage(&k1, 0.5)?);
        let k3 = self.rhs(&stage(&k2, 0.5)?);
        let k4 = self.rhs(&stage(&k3, 1.0)?);
        let mut next: Vec<Complex64> = (0..base.len())
            .map(|i| base[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
            .collect();
        if let Some(o) = state.origin_index() {
            next[o] = Complex64::new(1.0, 0.0);
        }
        if let Some((idx, v)) = next.iter().enumerate().map(|(i, v)| (i, v.norm())).find(|(_, m)| *m > INSTABILITY_THRESHOLD) {
            return Err(Error::Instability(format!(
                "|psi| = {v:.9} at xi = {:?} after a step of {dt:.3e}; reduce dt or refine the grid",
                state.node_at(idx)
            )));
        }
        state.with_values(next)
    }
}

/// Grid of the initial datum for a configuration.
pub fn initial_grid(init: &MeasureSpec, cfg: &EvolveConfig) -> Result<CharGrid> {
    let psi = AnalyticCharFn::new(init.clone())?;
    Ok(CharGrid::sample(&psi, cfg.radius, cfg.points)?.with_interpolation(cfg.interpolation))
}

/// One explicit step with the configured kernel and step rule.
pub fn step(state: &CharGrid, cfg: &EvolveConfig) -> Result<CharGrid> {
    cfg.validate()?;
    let kernel = cfg.kernel()?.cutoff(cfg.cutoff)?;
    let dt = cfg.step_size(kernel.cutoff_mass())?;
    Integrator::new(kernel, cfg.quadrature, state, cfg.symmetry)?.step(state, dt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub t: f64,
    /// ‖ψ(t) − 1‖_α on the grid ball for each configured α.
    pub knorms: Vec<f64>,
    /// sup |ψ(t)| over the outer shell 0.9R ≤ |ξ| ≤ R.
    pub shell_sup: f64,
    /// |ψ(t, 0) − 1|.
    pub conservation_residual: f64,
    pub max_modulus: f64,
    pub hermitian_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub alphas: Vec<f64>,
    pub radius: f64,
    pub points: usize,
    pub cutoff: f64,
    pub dt: f64,
    pub rows: Vec<RecordRow>,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// Long-format CSV `t,alpha,knorm,shell_sup,conservation_residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,alpha,knorm,shell_sup,conservation_residual\n");
        for row in &self.rows {
            for (a, k) in self.alphas.iter().zip(&row.knorms) {
                out.push_str(&format!("{:.6},{},{:.12e},{:.12e},{:.3e}\n", row.t, a, k, row.shell_sup, row.conservation_residual));
            }
        }
        out
    }
}

/// Recorded states plus their summary table.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub record: TrajectoryRecord,
    pub states: Vec<CharGrid>,
}

impl Trajectory {
    pub fn final_state(&self) -> &CharGrid {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn summarize(state: &CharGrid, t: f64, alphas: &[f64]) -> Result<RecordRow> {
    let one = AnalyticCharFn::one();
    let knorms = alphas
        .iter()
        .map(|&a| k_alpha_distance(CharRef::Grid(state), CharRef::Analytic(&one), a).map(|r| r.norm))
        .collect::<Result<Vec<_>>>()?;
    let inv = state.invariants();
    Ok(RecordRow {
        t,
        knorms,
        shell_sup: state.shell_sup(0.9 * state.radius(), state.radius()),
        conservation_residual: inv.origin_defect,
        max_modulus: inv.max_modulus,
        hermitian_defect: inv.hermitian_defect,
    })
}

/// Evolves a grid state, recording at `cfg.record_times()`. Steps between records
/// are equal and no longer than the admissible step.
pub fn evolve_grid(initial: CharGrid, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let kernel = cfg.kernel()?.cutoff(cfg.cutoff)?;
    let dt_max = cfg.step_size(kernel.cutoff_mass())?;
    let integrator = Integrator::new(kernel, cfg.quadrature, &initial, cfg.symmetry)?;
    let times = cfg.record_times();
    let mut rows = vec![summarize(&initial, 0.0, &cfg.alphas)?];
    let mut states = vec![initial];
    let mut dt_used: f64 = 0.0;
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        dt_used = dt_used.max(dt);
        let mut state = states.last().unwrap().clone();
        for _ in 0..steps {
            state = integrator.step(&state, dt)?;
        }
        rows.push(summarize(&state, w[1], &cfg.alphas)?);
        states.push(state);
    }
    let record = TrajectoryRecord {
        alphas: cfg.alphas.clone(),
        radius: cfg.radius,
        points: cfg.points,
        cutoff: cfg.cutoff,
        dt: dt_used,
        rows,
    };
    Ok(Trajectory { record, states })
}

pub fn evolve(init: &MeasureSpec, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    evolve_grid(initial_grid(init, cfg)?, cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationTable {
    pub levels: Vec<f64>,
    /// D_k = sup over ball nodes and record times of |ψ_{n_{k+1}} − ψ_{n_k}|.
    pub differences: Vec<f64>,
    /// True when the last three differences (or all, if fewer) strictly decrease.
    pub tail_decreasing: bool,
}

/// Evolves once per cutoff level of `cfg.schedule` and tabulates successive differences.
pub fn cutoff_continuation(init: &MeasureSpec, cfg: &EvolveConfig) -> Result<ContinuationTable> {
    cfg.validate()?;
    let levels = cfg.schedule.clone().ok_or_else(|| Error::Usage("cutoff continuation needs a schedule".into()))?;
    let mut previous: Option<Trajectory> = None;
    let mut differences = Vec::new();
    for &level in &levels {
        let traj = evolve(init, &cfg.with_cutoff(level))?;
        if let Some(prev) = &previous {
            differences.push(trajectory_gap(prev, &traj));
        }
        previous = Some(traj);
    }
    let tail = &differences[differences.len().saturating_sub(3)..];
    let tail_decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    Ok(ContinuationTable { levels, differences, tail_decreasing })
}

fn trajectory_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    let ball = a.states[0].ball_indices();
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| ball.iter().map(|&i| (x.values()[i] - y.values()[i]).norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub t: f64,
    /// ‖ψ(t) − φ(t)‖_α on the grid ball, |ξ| ≥ Δ.
    pub distance: f64,
    /// e^{λ_α t} ‖ψ₀ − φ₀‖_α.
    pub envelope: f64,
    /// distance / envelope (0 when both vanish).
    pub ratio: f64,
    pub argmax: Vec3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub alpha: f64,
    pub lambda: f64,
    /// ‖ψ₀ − φ₀‖_α of the analytic data, ξ → 0 limit included.
    pub initial_distance: f64,
    /// The same distance measured on the grid at t = 0.
    pub initial_grid_distance: f64,
    pub slack: f64,
    pub rows: Vec<StabilityRow>,
    pub worst_ratio: f64,
    pub worst_time: f64,
    pub worst_xi: Vec3,
    pub passed: bool,
}

impl StabilityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,distance,envelope,ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{:.6},{:.12e},{:.12e},{:.9}\n", r.t, r.distance, r.envelope, r.ratio));
        }
        out
    }
}

/// Compares two recorded trajectories with the envelope e^{λ_α t}‖ψ₀ − φ₀‖_α.
pub fn stability_from_trajectories(
    a: &Trajectory,
    b: &Trajectory,
    init_a: &MeasureSpec,
    init_b: &MeasureSpec,
    alpha: f64,
    lambda: f64,
    slack: f64,
) -> Result<StabilityReport> {
    if a.states.len() != b.states.len() || !a.states[0].same_geometry(&b.states[0]) {
        return Err(Error::Usage("paired trajectories must share grid and record times".into()));
    }
    let fa = AnalyticCharFn::new(init_a.clone())?;
    let fb = AnalyticCharFn::new(init_b.clone())?;
    let d0 = k_alpha_distance(CharRef::Analytic(&fa), CharRef::Analytic(&fb), alpha)?;
    if d0.infinite {
        return Err(Error::Usage(format!("initial data are at infinite K^{alpha} distance")));
    }
    let mut rows = Vec::with_capacity(a.states.len());
    let mut worst = (0.0, 0.0, [0.0; 3]);
    let mut initial_grid_distance = 0.0;
    for (k, (x, y)) in a.states.iter().zip(&b.states).enumerate() {
        let t = a.record.rows[k].t;
        let d = k_alpha_distance(CharRef::Grid(x), CharRef::Grid(y), alpha)?;
        if k == 0 {
            initial_grid_distance = d.norm;
        }
        let envelope = (lambda * t).exp() * d0.norm;
        let ratio = if envelope == 0.0 {
            if d.norm == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d.norm / envelope
        };
        if ratio > worst.0 {
            worst = (ratio, t, d.argmax);
        }
        rows.push(StabilityRow { t, distance: d.norm, envelope, ratio, argmax: d.argmax });
    }
    Ok(StabilityReport {
        alpha,
        lambda,
        initial_distance: d0.norm,
        initial_grid_distance,
        slack,
        rows,
        worst_ratio: worst.0,
        worst_time: worst.1,
        worst_xi: worst.2,
        passed: worst.0 <= 1.0 + slack,
    })
}

/// Evolves both data on the same grid and quadrature and checks the stability envelope.
pub fn stability_experiment(
    init_a: &MeasureSpec,
    init_b: &MeasureSpec,
    alpha: f64,
    cfg: &EvolveConfig,
    slack: f64,
) -> Result<StabilityReport> {
    let lambda = cfg.kernel()?.lambda_alpha(alpha)?;
    let a = evolve(init_a, cfg)?;
    let b = if init_a == init_b { a.clone() } else { evolve(init_b, cfg)? };
    stability_from_trajectories(&a, &b, init_a, init_b, alpha, lambda, slack)
}

/// sup over ball nodes of |Q̂(ψ)|.
pub fn rhs_sup(state: &CharGrid, cfg: &EvolveConfig) -> Result<f64> {
    let kernel = cfg.kernel()?.cutoff(cfg.cutoff)?;
    let integrator = Integrator::new(kernel, cfg.quadrature, state, cfg.symmetry)?;
    let rhs = integrator.rhs(state);
    Ok(state.ball_indices().iter().map(|&i| rhs[i].norm()).fold(0.0, f64::max))
}

/// sup over ball nodes of |ψ − φ| for two grids of the same geometry.
pub fn sup_distance(a: &CharGrid, b: &CharGrid) -> f64 {
    a.ball_indices()
        .iter()
        .map(|&i| (a.values()[i] - b.values()[i]).norm())
        .fold(0.0, f64::max)
}

const STATE_DIR: &str = "states";

fn state_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(STATE_DIR).join(format!("state_{k:04}.bin"))
}

/// Writes `trajectory.csv`, `record.json`, every recorded state under `states/` and
/// the last state as `final.bin`, each grid with its JSON sidecar.
pub fn save_trajectory(dir: &Path, traj: &Trajectory, cfg: &EvolveConfig) -> Result<()> {
    fs::create_dir_all(dir.join(STATE_DIR))?;
    fs::write(dir.join("trajectory.csv"), traj.record.to_csv())?;
    fs::write(dir.join("record.json"), serde_json::to_string_pretty(&traj.record)?)?;
    let header = |t: f64| GridHeader {
        radius: cfg.radius,
        n: cfg.points,
        time: t,
        s: cfg.s,
        alpha: cfg.alphas[0],
        kernel_strength: cfg.strength,
        cutoff: Some(cfg.cutoff),
        format_version: FORMAT_VERSION,
    };
    for (k, (state, row)) in traj.states.iter().zip(&traj.record.rows).enumerate() {
        state.save(&state_path(dir, k), &header(row.t))?;
    }
    let last = traj.record.rows.len() - 1;
    traj.final_state().save(&dir.join("final.bin"), &header(traj.record.rows[last].t))
}

/// Recorded states of a directory written by [`save_trajectory`], in time order.
pub fn load_states(dir: &Path) -> Result<Vec<(f64, CharGrid)>> {
    let mut out = Vec::new();
    loop {
        let path = state_path(dir, out.len());
        if !path.exists() {
            break;
        }
        let (grid, header) = CharGrid::load(&path)?;
        out.push((header.time, grid));
    }
    if out.is_empty() {
        return Err(Error::Usage(format!("no recorded states under {}", dir.join(STATE_DIR).display())));
    }
    Ok(out)
}
