//! Time stepping: Euler–Maruyama for homodyne filters, Bernoulli-thinned
//! jumps for counting filters and classical RK4 for master equations.
//!
//! Trajectory `i` of a run with base seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(stream_seed(s, i))`, where
//! `stream_seed(s, i) = splitmix64(s ^ splitmix64(i + 1))`.
//! Results therefore do not depend on execution order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::BlochVector;
use crate::error::{Error, Result};
use crate::filter::FieldDecomposition;

/// Largest number of steps a single run may take.
pub const MAX_STEPS: f64 = 1e8;
/// Per-step jump probability above which a warning is counted.
pub const JUMP_PROBABILITY_WARNING: f64 = 0.1;

/// Vector-space operations the integrators need from a state type.
pub trait StateVector: Clone + Send + Sync {
    /// `self += a · x`.
    fn axpy(&mut self, a: f64, x: &Self);
    fn scaled(&self, a: f64) -> Self;
    /// Componentwise division, kept separate from scaling by `1/a` so that
    /// exact quotients such as `−ν/ν = −1` stay exact.
    fn divided(&self, a: f64) -> Self;
    fn is_finite(&self) -> bool;
}

/// Something that can be integrated: vector fields plus a physical read-out.
pub trait Model<S>: Sync {
    fn fields(&self, t: f64, s: &S) -> Result<FieldDecomposition<S>>;
    /// Physical Bloch vector of a state.
    fn observe(&self, s: &S) -> BlochVector;
    /// Extra per-row observables (block components), empty by default.
    fn auxiliary(&self, _s: &S) -> Vec<f64> {
        Vec::new()
    }
}

/// A model on the Bloch vector itself, defined by a closure.
pub struct FnModel<F>(pub F);

impl<F> Model<BlochVector> for FnModel<F>
where
    F: Fn(f64, &BlochVector) -> Result<FieldDecomposition<BlochVector>> + Sync,
{
    fn fields(&self, t: f64, s: &BlochVector) -> Result<FieldDecomposition<BlochVector>> {
        (self.0)(t, s)
    }

    fn observe(&self, s: &BlochVector) -> BlochVector {
        *s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
    pub record_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 10.0,
            seed: 20_240_901,
            record_stride: 10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::Config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.t_final / self.dt > MAX_STEPS {
            return Err(Error::Config(format!(
                "t_final / dt = {} exceeds the {MAX_STEPS:e} step limit",
                self.t_final / self.dt
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Times of the recorded rows: every `record_stride`-th step plus the final step.
    pub fn record_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut steps: Vec<usize> = (0..=n).step_by(self.record_stride).collect();
        if *steps.last().unwrap() != n {
            steps.push(n);
        }
        steps
    }

    pub fn record_times(&self) -> Vec<f64> {
        self.record_steps().into_iter().map(|k| self.time(k)).collect()
    }

    /// True when `dt · max(γ, ω, Ω²)` exceeds the accuracy guideline of 0.1.
    pub fn step_is_coarse(&self, rates: &[f64]) -> bool {
        rates.iter().any(|r| self.dt * r.abs() > 0.1)
    }
}

/// Counters collected while integrating one trajectory.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub jumps: usize,
    /// Steps where a negative detection intensity was clamped to zero.
    pub clamped_rates: usize,
    /// Steps where the jump probability exceeded the warning threshold.
    pub coarse_jump_steps: usize,
}

/// Recorded rows of one integration. Row 0 is the initial state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// Physical Bloch vector per row.
    pub states: Vec<BlochVector>,
    /// Auxiliary observables per row (block components); empty rows when unused.
    pub auxiliary: Vec<Vec<f64>>,
    /// dW (homodyne) or dN (counting) accumulated since the previous row.
    pub innovations: Vec<f64>,
    /// ∫K dt (homodyne) or ∫ν dt (counting) accumulated since the previous row.
    pub compensator: Vec<f64>,
    /// Cumulative measurement record Y.
    pub measurement: Vec<f64>,
    pub purity: Vec<f64>,
    /// Times (end of step) at which jumps occurred.
    pub jump_times: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push<S>(&mut self, model: &impl Model<S>, t: f64, s: &S, innovation: f64, compensator: f64, y: f64) {
        let b = model.observe(s);
        self.times.push(t);
        self.purity.push(b.norm_sqr());
        self.states.push(b);
        self.auxiliary.push(model.auxiliary(s));
        self.innovations.push(innovation);
        self.compensator.push(compensator);
        self.measurement.push(y);
    }

    /// Values of one physical component (0 = x, 1 = y, 2 = z).
    pub fn component(&self, axis: usize) -> Vec<f64> {
        self.states.iter().map(|b| b.as_array()[axis]).collect()
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

/// RNG stream of trajectory `index` under base seed `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, index))
}

/// A draw from N(0, dt).
pub fn wiener_increment<R: Rng + ?Sized>(rng: &mut R, dt: f64) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    n * dt.sqrt()
}

/// One Bernoulli(ν dt) draw.
pub fn jump_increment<R: Rng + ?Sized>(rng: &mut R, nu: f64, dt: f64) -> Result<bool> {
    let p = nu * dt;
    if p >= 1.0 {
        return Err(Error::StepTooLarge { probability: p });
    }
    if p <= 0.0 {
        return Ok(false);
    }
    Ok(rng.random::<f64>() < p)
}

fn check_state<S: StateVector>(s: &S, step: usize, t: f64) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence { step, time: t })
    }
}

/// Euler–Maruyama driven by the trajectory RNG.
pub fn integrate_diffusive<S, M, R>(model: &M, s0: &S, cfg: &IntegratorConfig, rng: &mut R) -> Result<TrajectoryRecord>
where
    S: StateVector,
    M: Model<S>,
    R: Rng + ?Sized,
{
    let dt = cfg.dt;
    integrate_diffusive_with(model, s0, cfg, |_| wiener_increment(rng, dt))
}

/// Euler–Maruyama driven by supplied Wiener increments, one per step.
pub fn integrate_diffusive_with_increments<S, M>(
    model: &M,
    s0: &S,
    cfg: &IntegratorConfig,
    increments: &[f64],
) -> Result<TrajectoryRecord>
where
    S: StateVector,
    M: Model<S>,
{
    if increments.len() < cfg.n_steps() {
        return Err(Error::InvalidInput(format!(
            "{} increments supplied for {} steps",
            increments.len(),
            cfg.n_steps()
        )));
    }
    integrate_diffusive_with(model, s0, cfg, |k| increments[k])
}

/// Sums consecutive pairs: the Wiener path sampled at twice the step.
pub fn coarsen_increments(fine: &[f64]) -> Vec<f64> {
    fine.chunks_exact(2).map(|p| p[0] + p[1]).collect()
}

fn integrate_diffusive_with<S, M>(
    model: &M,
    s0: &S,
    cfg: &IntegratorConfig,
    mut noise: impl FnMut(usize) -> f64,
) -> Result<TrajectoryRecord>
where
    S: StateVector,
    M: Model<S>,
{
    cfg.validate()?;
    let (dt, n) = (cfg.dt, cfg.n_steps());
    let mut rec = TrajectoryRecord::default();
    let mut s = s0.clone();
    check_state(&s, 0, 0.0)?;
    rec.push(model, 0.0, &s, 0.0, 0.0, 0.0);
    let (mut y, mut dw_acc, mut k_acc) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let t = cfg.time(k);
        let f = model.fields(t, &s)?;
        let dw = noise(k);
        s.axpy(dt, &f.drift);
        if let Some(h) = &f.diffusion {
            s.axpy(dw, h);
        }
        let kdt = f.observation_rate * dt;
        y += kdt + dw;
        dw_acc += dw;
        k_acc += kdt;
        let t1 = cfg.time(k + 1);
        check_state(&s, k + 1, t1)?;
        if (k + 1) % cfg.record_stride == 0 || k + 1 == n {
            rec.push(model, t1, &s, dw_acc, k_acc, y);
            dw_acc = 0.0;
            k_acc = 0.0;
        }
    }
    Ok(rec)
}

/// Counting filter: compensated drift step, then at most one jump per step.
///
/// The state moves by `(drift − ν·(post − state))·dt` between jumps. On a
/// jump it is replaced by the post-jump state evaluated before the step.
pub fn integrate_jump<S, M, R>(model: &M, s0: &S, cfg: &IntegratorConfig, rng: &mut R) -> Result<TrajectoryRecord>
where
    S: StateVector,
    M: Model<S>,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let (dt, n) = (cfg.dt, cfg.n_steps());
    let mut rec = TrajectoryRecord::default();
    let mut s = s0.clone();
    check_state(&s, 0, 0.0)?;
    rec.push(model, 0.0, &s, 0.0, 0.0, 0.0);
    let (mut y, mut dn_acc, mut nu_acc) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let t = cfg.time(k);
        let f = model.fields(t, &s)?;
        let jump = f
            .jump
            .ok_or_else(|| Error::InvalidInput("counting integration needs a jump map".into()))?;
        if jump.was_clamped() {
            rec.diagnostics.clamped_rates += 1;
        }
        let p = jump.rate * dt;
        if p > JUMP_PROBABILITY_WARNING {
            rec.diagnostics.coarse_jump_steps += 1;
        }
        let jumped = jump_increment(rng, jump.rate, dt)?;
        let t1 = cfg.time(k + 1);
        if jumped {
            s = jump.post_jump()?;
            rec.diagnostics.jumps += 1;
            rec.jump_times.push(t1);
            y += 1.0;
            dn_acc += 1.0;
        } else {
            let mut drift = f.drift;
            drift.axpy(-1.0, &jump.compensator(&s));
            s.axpy(dt, &drift);
        }
        nu_acc += jump.rate * dt;
        check_state(&s, k + 1, t1)?;
        if (k + 1) % cfg.record_stride == 0 || k + 1 == n {
            rec.push(model, t1, &s, dn_acc, nu_acc, y);
            dn_acc = 0.0;
            nu_acc = 0.0;
        }
    }
    Ok(rec)
}

/// Classical fourth-order Runge–Kutta on the drift alone.
pub fn integrate_ode<S, M>(model: &M, s0: &S, cfg: &IntegratorConfig) -> Result<TrajectoryRecord>
where
    S: StateVector,
    M: Model<S>,
{
    let mut rec = TrajectoryRecord::default();
    integrate_ode_visit(model, s0, cfg, |t, s| rec.push(model, t, s, 0.0, 0.0, 0.0))?;
    Ok(rec)
}

/// RK4 integration calling `visit(t, state)` at every recorded step.
pub fn integrate_ode_visit<S, M>(model: &M, s0: &S, cfg: &IntegratorConfig, mut visit: impl FnMut(f64, &S)) -> Result<()>
where
    S: StateVector,
    M: Model<S>,
{
    cfg.validate()?;
    let (dt, n) = (cfg.dt, cfg.n_steps());
    let mut s = s0.clone();
    check_state(&s, 0, 0.0)?;
    visit(0.0, &s);
    for k in 0..n {
        let t = cfg.time(k);
        let k1 = model.fields(t, &s)?.drift;
        let mut tmp = s.clone();
        tmp.axpy(0.5 * dt, &k1);
        let k2 = model.fields(t + 0.5 * dt, &tmp)?.drift;
        let mut tmp = s.clone();
        tmp.axpy(0.5 * dt, &k2);
        let k3 = model.fields(t + 0.5 * dt, &tmp)?.drift;
        let mut tmp = s.clone();
        tmp.axpy(dt, &k3);
        let k4 = model.fields(t + dt, &tmp)?.drift;
        s.axpy(dt / 6.0, &k1);
        s.axpy(dt / 3.0, &k2);
        s.axpy(dt / 3.0, &k3);
        s.axpy(dt / 6.0, &k4);
        let t1 = cfg.time(k + 1);
        check_state(&s, k + 1, t1)?;
        if (k + 1) % cfg.record_stride == 0 || k + 1 == n {
            visit(t1, &s);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::JumpMap;

    fn cfg(dt: f64, t_final: f64) -> IntegratorConfig {
        IntegratorConfig {
            dt,
            t_final,
            seed: 7,
            record_stride: 1,
        }
    }

    fn decay(gamma: f64) -> FnModel<impl Fn(f64, &BlochVector) -> Result<FieldDecomposition<BlochVector>> + Sync> {
        FnModel(move |_t, b: &BlochVector| {
            Ok(FieldDecomposition::drift_only(BlochVector::new(0.0, 0.0, -gamma * (1.0 + b.z))))
        })
    }

    #[test]
    fn wiener_mean_and_variance() {
        let mut rng = trajectory_rng(1, 0);
        let n = 1_000_000;
        let dt = 0.01;
        let xs: Vec<f64> = (0..n).map(|_| wiener_increment(&mut rng, dt)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4e-4, "mean {mean}");
        assert!((var / dt - 1.0).abs() < 0.015, "variance {var}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = {
            let mut r = trajectory_rng(42, 3);
            (0..16).map(|_| wiener_increment(&mut r, 1.0)).collect()
        };
        let b: Vec<f64> = {
            let mut r = trajectory_rng(42, 3);
            (0..16).map(|_| wiener_increment(&mut r, 1.0)).collect()
        };
        let c: Vec<f64> = {
            let mut r = trajectory_rng(42, 4);
            (0..16).map(|_| wiener_increment(&mut r, 1.0)).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_rate_never_jumps() {
        let mut rng = trajectory_rng(5, 0);
        assert!((0..10_000).all(|_| !jump_increment(&mut rng, 0.0, 0.1).unwrap()));
    }

    #[test]
    fn jump_rate_matches_target() {
        let mut rng = trajectory_rng(9, 0);
        let n = 1_000_000;
        let (nu, dt) = (2.0, 1e-3);
        let hits = (0..n).filter(|_| jump_increment(&mut rng, nu, dt).unwrap()).count() as f64;
        let p = nu * dt;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - n as f64 * p).abs() < 3.0 * sigma, "hits {hits}");
    }

    #[test]
    fn oversized_jump_probability_is_rejected() {
        let mut rng = trajectory_rng(1, 0);
        assert!(matches!(
            jump_increment(&mut rng, 20.0, 0.1),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn zero_fields_keep_state_constant() {
        let m = FnModel(|_t, _b: &BlochVector| {
            Ok(FieldDecomposition {
                drift: BlochVector::new(0.0, 0.0, 0.0),
                diffusion: Some(BlochVector::new(0.0, 0.0, 0.0)),
                jump: None,
                observation_rate: 0.0,
            })
        });
        let b0 = BlochVector::new(0.3, -0.2, 0.5);
        let rec = integrate_diffusive(&m, &b0, &cfg(0.01, 1.0), &mut trajectory_rng(1, 0)).unwrap();
        assert!(rec.states.iter().all(|b| *b == b0));
        let rec = integrate_ode(&m, &b0, &cfg(0.01, 1.0)).unwrap();
        assert!(rec.states.iter().all(|b| *b == b0));
    }

    #[test]
    fn euler_drift_matches_decay_at_ln2() {
        let dt = 1e-4;
        let c = cfg(dt, 2f64.ln());
        let m = FnModel(|_t, b: &BlochVector| {
            Ok(FieldDecomposition {
                drift: BlochVector::new(0.0, 0.0, -(1.0 + b.z)),
                diffusion: Some(BlochVector::new(0.0, 0.0, 0.0)),
                jump: None,
                observation_rate: 0.0,
            })
        });
        let rec = integrate_diffusive(&m, &BlochVector::EXCITED, &c, &mut trajectory_rng(1, 0)).unwrap();
        let z = rec.states.last().unwrap().z;
        let t_end = *rec.times.last().unwrap();
        let exact = -1.0 + 2.0 * (-t_end).exp();
        assert!((z - exact).abs() < 10.0 * dt, "z {z} exact {exact}");
    }

    #[test]
    fn rk4_matches_analytic_decay() {
        let c = cfg(1e-3, 10.0);
        let rec = integrate_ode(&decay(1.0), &BlochVector::EXCITED, &c).unwrap();
        let err = rec
            .times
            .iter()
            .zip(&rec.states)
            .map(|(t, b)| (b.z - (-1.0 + 2.0 * (-t).exp())).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "max error {err}");
    }

    #[test]
    fn rk4_precession_keeps_norm() {
        let w = 2.0 * std::f64::consts::PI;
        let m = FnModel(move |_t, b: &BlochVector| {
            Ok(FieldDecomposition::drift_only(BlochVector::new(-w * b.y, w * b.x, 0.0)))
        });
        let rec = integrate_ode(&m, &BlochVector::new(1.0, 0.0, 0.0), &cfg(1e-3, 3.0)).unwrap();
        for (t, b) in rec.times.iter().zip(&rec.states) {
            assert!((b.norm_sqr().sqrt() - 1.0).abs() < 1e-9);
            assert!((b.x - (w * t).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn nan_state_reports_divergence_step() {
        let m = FnModel(|t, _b: &BlochVector| {
            let v = if t >= 0.05 { f64::NAN } else { 0.0 };
            Ok(FieldDecomposition::drift_only(BlochVector::new(v, 0.0, 0.0)))
        });
        let err = integrate_ode(&m, &BlochVector::GROUND, &cfg(0.01, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Divergence { step, .. } if (5..=6).contains(&step)), "{err}");
    }

    #[test]
    fn zero_rate_jump_path_is_pure_drift() {
        let m = FnModel(|_t, b: &BlochVector| {
            let mut f = FieldDecomposition::drift_only(BlochVector::new(-b.y, b.x, 0.0));
            f.jump = Some(JumpMap::new(BlochVector::new(0.0, 0.0, 0.0), 0.0));
            Ok(f)
        });
        let b0 = BlochVector::new(1.0, 0.0, 0.0);
        let c = cfg(1e-3, 1.0);
        let a = integrate_jump(&m, &b0, &c, &mut trajectory_rng(3, 0)).unwrap();
        let plain = FnModel(|_t, b: &BlochVector| {
            Ok(FieldDecomposition {
                drift: BlochVector::new(-b.y, b.x, 0.0),
                diffusion: Some(BlochVector::new(0.0, 0.0, 0.0)),
                jump: None,
                observation_rate: 0.0,
            })
        });
        let b = integrate_diffusive(&plain, &b0, &c, &mut trajectory_rng(3, 0)).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.diagnostics.jumps, 0);
        assert!(a.measurement.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn record_rows_follow_stride_and_include_final_step() {
        let c = IntegratorConfig {
            dt: 0.1,
            t_final: 1.05,
            seed: 0,
            record_stride: 4,
        };
        assert_eq!(c.n_steps(), 11);
        assert_eq!(c.record_steps(), vec![0, 4, 8, 11]);
        let rec = integrate_ode(&decay(1.0), &BlochVector::EXCITED, &c).unwrap();
        assert_eq!(rec.len(), 4);
        assert_eq!(rec.times[3], 11.0 * 0.1);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            IntegratorConfig { dt: 0.0, ..Default::default() },
            IntegratorConfig { t_final: -1.0, ..Default::default() },
            IntegratorConfig { record_stride: 0, ..Default::default() },
            IntegratorConfig { dt: 1e-12, t_final: 1e3, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn coarsened_noise_sums_pairs() {
        assert_eq!(coarsen_increments(&[1.0, 2.0, 3.0, 4.0]), vec![3.0, 7.0]);
    }
}
