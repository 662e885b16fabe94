//! Trajectory ensembles, their statistics, and comparison with the master equation.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::BlochVector;
use crate::engine::{
    integrate_diffusive, integrate_jump, integrate_ode, trajectory_rng, Diagnostics, IntegratorConfig,
    Model, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::field::FieldInput;
use crate::filter::{BlockState, Detection, FieldDecomposition, Filter};

/// Trajectories integrated in parallel before being folded into the statistics.
const CHUNK: usize = 64;

/// Integrable view of a filter: conditioned under a detection scheme, or the
/// master equation when `detection` is `None`.
pub struct FilterModel<'a> {
    pub filter: &'a Filter,
    pub detection: Option<Detection>,
    pub record_blocks: bool,
}

impl Model<BlockState> for FilterModel<'_> {
    fn fields(&self, t: f64, s: &BlockState) -> Result<FieldDecomposition<BlockState>> {
        match self.detection {
            Some(d) => self.filter.sme_fields(d, t, s),
            None => self.filter.me_fields(t, s),
        }
    }

    fn observe(&self, s: &BlockState) -> BlochVector {
        self.filter.physical_bloch(s)
    }

    fn auxiliary(&self, s: &BlockState) -> Vec<f64> {
        if self.record_blocks {
            self.filter.block_observables(s)
        } else {
            Vec::new()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub filter: Filter,
    pub detection: Detection,
    pub initial: BlochVector,
    pub integrator: IntegratorConfig,
    pub n_trajectories: usize,
    /// Record block components as auxiliary series (non-vacuum inputs only).
    pub record_blocks: bool,
    /// Keep every trajectory in the result instead of only the statistics.
    pub keep_trajectories: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if self.n_trajectories == 0 {
            return Err(Error::Config("n_trajectories must be at least 1".into()));
        }
        if self.initial.norm_sqr() > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "initial Bloch vector {:?} lies outside the unit ball",
                self.initial.as_array()
            )));
        }
        Ok(())
    }

    fn model(&self, detection: Option<Detection>) -> FilterModel<'_> {
        FilterModel {
            filter: &self.filter,
            detection,
            record_blocks: self.record_blocks,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.integrator.seed = seed;
        self
    }

    pub fn with_trajectories(mut self, n: usize) -> Self {
        self.n_trajectories = n;
        self
    }

    /// Rate scales that bound the usable step: γ, ω, Ω² for a photon, max |α|² for a cat.
    pub fn rate_scales(&self) -> Vec<f64> {
        let g = &self.filter.system;
        let mut rates = vec![g.gamma, g.omega];
        match &self.filter.input {
            FieldInput::Vacuum => {}
            FieldInput::SinglePhoton(w) => rates.push(w.bandwidth * w.bandwidth),
            FieldInput::Cat(c) => rates.extend(c.amplitudes().iter().map(|a| {
                a.segments().iter().map(|s| s.value.norm_sqr()).fold(0.0, f64::max)
            })),
        }
        rates
    }

    pub fn step_is_coarse(&self) -> bool {
        self.integrator.step_is_coarse(&self.rate_scales())
    }
}

/// One conditioned trajectory, using the RNG stream of `index`.
pub fn run_trajectory(sc: &Scenario, index: usize) -> Result<TrajectoryRecord> {
    let model = sc.model(Some(sc.detection));
    let s0 = sc.filter.initial_state(&sc.initial);
    let mut rng = trajectory_rng(sc.integrator.seed, index as u64);
    match sc.detection {
        Detection::Homodyne => integrate_diffusive(&model, &s0, &sc.integrator, &mut rng),
        Detection::PhotonCounting => integrate_jump(&model, &s0, &sc.integrator, &mut rng),
    }
}

/// Master-equation reference on the same grid.
pub fn run_me(sc: &Scenario) -> Result<TrajectoryRecord> {
    let s0 = sc.filter.initial_state(&sc.initial);
    integrate_ode(&sc.model(None), &s0, &sc.integrator)
}

/// Running mean and sum of squared deviations per time index (Welford).
#[derive(Clone, Debug, Default)]
struct Moments {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn push(&mut self, values: impl ExactSizeIterator<Item = f64>) -> Result<()> {
        if self.n == 0 {
            self.mean = vec![0.0; values.len()];
            self.m2 = vec![0.0; values.len()];
        } else if values.len() != self.mean.len() {
            return Err(Error::Alignment(format!(
                "series of length {} cannot join series of length {}",
                values.len(),
                self.mean.len()
            )));
        }
        self.n += 1;
        let n = self.n as f64;
        for ((m, q), v) in self.mean.iter_mut().zip(&mut self.m2).zip(values) {
            let d = v - *m;
            *m += d / n;
            *q += d * (v - *m);
        }
        Ok(())
    }

    fn finish(self) -> Series {
        let n = self.n as f64;
        let se = if self.n < 2 {
            vec![0.0; self.mean.len()]
        } else {
            self.m2.iter().map(|q| (q / (n - 1.0)).sqrt() / n.sqrt()).collect()
        };
        Series { mean: self.mean, se }
    }
}

/// Ensemble mean with its standard error at each recorded time.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Series {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub scenario: String,
    pub detection: Detection,
    pub n_trajectories: usize,
    pub dt: f64,
    pub times: Vec<f64>,
    /// Ensemble statistics of the physical x, y and z.
    pub bloch: [Series; 3],
    /// Master-equation x, y and z.
    pub me: [Vec<f64>; 3],
    pub purity: Series,
    pub me_purity: Vec<f64>,
    /// Statistics of the per-row innovation (dW or dN).
    pub innovation: Series,
    pub auxiliary_names: Vec<String>,
    pub auxiliary: Vec<Series>,
    pub me_auxiliary: Vec<Vec<f64>>,
    /// Jump times of each trajectory (counting runs).
    pub jump_times: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub trajectories: Option<Vec<TrajectoryRecord>>,
}

pub const OBSERVABLES: [&str; 3] = ["x", "y", "z"];

/// Runs the conditioned ensemble and the master-equation reference.
pub fn run_ensemble(sc: &Scenario) -> Result<EnsembleResult> {
    sc.validate()?;
    let me = run_me(sc)?;
    let n = sc.n_trajectories;
    let mut bloch: [Moments; 3] = Default::default();
    let mut purity = Moments::default();
    let mut innovation = Moments::default();
    let mut auxiliary: Vec<Moments> = Vec::new();
    let mut jump_times = Vec::with_capacity(n);
    let mut diagnostics = Diagnostics::default();
    let mut kept = sc.keep_trajectories.then(Vec::new);
    let mut failed = Vec::new();

    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        let batch: Vec<Result<TrajectoryRecord>> =
            (start..end).into_par_iter().map(|i| run_trajectory(sc, i)).collect();
        for (offset, rec) in batch.into_iter().enumerate() {
            let rec = match rec {
                Ok(r) => r,
                Err(e) => {
                    failed.push((start + offset, e.to_string()));
                    continue;
                }
            };
            if rec.len() != me.len() {
                return Err(Error::Alignment("trajectory and reference grids differ".into()));
            }
            for (axis, m) in bloch.iter_mut().enumerate() {
                m.push(rec.states.iter().map(|b| b.as_array()[axis]))?;
            }
            purity.push(rec.purity.iter().copied())?;
            innovation.push(rec.innovations.iter().copied())?;
            let width = rec.auxiliary.first().map_or(0, Vec::len);
            if auxiliary.is_empty() {
                auxiliary = vec![Moments::default(); width];
            }
            for (col, m) in auxiliary.iter_mut().enumerate() {
                m.push(rec.auxiliary.iter().map(|row| row[col]))?;
            }
            diagnostics.jumps += rec.diagnostics.jumps;
            diagnostics.clamped_rates += rec.diagnostics.clamped_rates;
            diagnostics.coarse_jump_steps += rec.diagnostics.coarse_jump_steps;
            jump_times.push(rec.jump_times.clone());
            if let Some(k) = kept.as_mut() {
                k.push(rec);
            }
        }
    }
    if !failed.is_empty() {
        return Err(Error::PartialFailure { total: n, failed });
    }

    let aux_width = auxiliary.len();
    Ok(EnsembleResult {
        scenario: sc.name.clone(),
        detection: sc.detection,
        n_trajectories: n,
        dt: sc.integrator.dt,
        me: [me.component(0), me.component(1), me.component(2)],
        me_purity: me.purity.clone(),
        me_auxiliary: (0..aux_width)
            .map(|c| me.auxiliary.iter().map(|row| row[c]).collect())
            .collect(),
        times: me.times,
        bloch: bloch.map(Moments::finish),
        purity: purity.finish(),
        innovation: innovation.finish(),
        auxiliary_names: if aux_width > 0 {
            sc.filter.block_observable_names()
        } else {
            Vec::new()
        },
        auxiliary: auxiliary.into_iter().map(Moments::finish).collect(),
        jump_times,
        diagnostics,
        trajectories: kept,
    })
}

/// Mean and standard error of the per-trajectory purity.
pub fn empirical_conditioned_purity(trajectories: &[TrajectoryRecord]) -> Result<Series> {
    if trajectories.len() < 2 {
        return Err(Error::InvalidInput(
            "empirical purity needs at least two trajectories".into(),
        ));
    }
    let times = &trajectories[0].times;
    let mut m = Moments::default();
    for (i, r) in trajectories.iter().enumerate() {
        if r.times != *times {
            return Err(Error::Alignment(format!("trajectory {i} uses a different time grid")));
        }
        m.push(r.purity.iter().copied())?;
    }
    Ok(m.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableMetrics {
    pub observable: String,
    pub sup_norm: f64,
    pub rmse: f64,
    /// Largest |mean − ME| / hypot(SE, dt) over the grid.
    pub max_abs_z: f64,
}

/// Deviation of an ensemble mean from the reference. The z-score denominator
/// includes `dt` as a floor for the deterministic discretization bias between
/// the Euler and RK4 schemes, which is of that order.
pub fn compare_series(mean: &[f64], se: &[f64], reference: &[f64], dt: f64, name: &str) -> ObservableMetrics {
    let mut sup: f64 = 0.0;
    let mut sq = 0.0;
    let mut zmax: f64 = 0.0;
    for ((m, s), r) in mean.iter().zip(se).zip(reference) {
        let d = (m - r).abs();
        sup = sup.max(d);
        sq += d * d;
        let denom = s.hypot(dt);
        let z = if d == 0.0 { 0.0 } else { d / denom };
        zmax = zmax.max(z);
    }
    ObservableMetrics {
        observable: name.to_string(),
        sup_norm: sup,
        rmse: (sq / mean.len().max(1) as f64).sqrt(),
        max_abs_z: zmax,
    }
}

/// Sup-norm, RMSE and z-score metrics for x, y and z.
pub fn compare_to_me(r: &EnsembleResult) -> Vec<ObservableMetrics> {
    OBSERVABLES
        .iter()
        .enumerate()
        .map(|(axis, name)| compare_series(&r.bloch[axis].mean, &r.bloch[axis].se, &r.me[axis], r.dt, name))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransientSummary {
    /// max_t (1 + z)/2.
    pub peak_excitation: f64,
    pub peak_time: f64,
    pub terminal_z: f64,
    /// Mean z over the plateau window, when one is given.
    pub plateau_z: Option<f64>,
    /// Smallest |z + 1| over the plateau window.
    pub plateau_min_gap: Option<f64>,
}

pub fn transient_metrics(times: &[f64], z: &[f64], plateau: Option<(f64, f64)>) -> TransientSummary {
    let (peak_i, peak_z) = z
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let window: Vec<f64> = plateau
        .map(|(a, b)| {
            times
                .iter()
                .zip(z)
                .filter(|(t, _)| **t >= a && **t <= b)
                .map(|(_, v)| *v)
                .collect()
        })
        .unwrap_or_default();
    let has_window = plateau.is_some() && !window.is_empty();
    TransientSummary {
        peak_excitation: (1.0 + peak_z) / 2.0,
        peak_time: times.get(peak_i).copied().unwrap_or(0.0),
        terminal_z: z.last().copied().unwrap_or(f64::NAN),
        plateau_z: has_window.then(|| window.iter().sum::<f64>() / window.len() as f64),
        plateau_min_gap: has_window.then(|| window.iter().map(|v| (v + 1.0).abs()).fold(f64::INFINITY, f64::min)),
    }
}

impl EnsembleResult {
    pub fn metrics(&self) -> Vec<ObservableMetrics> {
        compare_to_me(self)
    }

    pub fn me_transient(&self, plateau: Option<(f64, f64)>) -> TransientSummary {
        transient_metrics(&self.times, &self.me[2], plateau)
    }

    pub fn mean_transient(&self, plateau: Option<(f64, f64)>) -> TransientSummary {
        transient_metrics(&self.times, &self.bloch[2].mean, plateau)
    }

    pub fn total_jumps(&self) -> usize {
        self.jump_times.iter().map(Vec::len).sum()
    }
}
