//! Self-checks run by `qfilter validate`.
//!
//! Each check compares a hand-specialized qubit formula against a brute-force
//! operator evaluation, or tests an algebraic identity, on a fixed set of
//! random states. The specialized field function is injectable so the suite
//! can be shown to catch a corrupted implementation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{BlochVector, C64};
use crate::engine::StateVector;
use crate::error::Result;
use crate::field::{CatStateInput, FieldInput, GaussianWavepacket, PulseAmplitude};
use crate::filter::{Block, BlockState, Detection, FieldDecomposition, Filter};
use crate::purity;

pub const TOLERANCE: f64 = 1e-10;
pub const SAMPLES: usize = 100;
const SEED: u64 = 0x05ee_d0f0_ac1e;

/// Signature of [`Filter::sme_fields`], the function under test.
pub type FieldsFn<'a> = dyn Fn(&Filter, Detection, f64, &BlockState) -> Result<FieldDecomposition<BlockState>> + 'a;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
}

/// One filter per input family, with generic parameters.
pub fn reference_filters() -> Vec<(&'static str, Filter)> {
    let (gamma, omega) = (1.3, 0.7);
    let wp = GaussianWavepacket::new(1.5, 3.0).expect("valid wavepacket");
    let c = C64::new;
    let cat = CatStateInput::new(
        vec![c(0.5, 0.1), c(0.4, -0.3), c(0.2, 0.6)],
        vec![
            PulseAmplitude::rectangle(0.0, 5.0, c(0.7, -0.4)).expect("valid pulse"),
            PulseAmplitude::rectangle(1.0, 4.0, c(-0.9, 0.2)).expect("valid pulse"),
            PulseAmplitude::zero(),
        ],
    )
    .expect("valid cat input");
    vec![
        ("vacuum", Filter::two_level(gamma, omega, FieldInput::Vacuum)),
        ("single_photon", Filter::two_level(gamma, omega, FieldInput::SinglePhoton(wp))),
        ("cat", Filter::two_level(gamma, omega, FieldInput::Cat(cat))),
    ]
}

fn detection_name(d: Detection) -> &'static str {
    match d {
        Detection::Homodyne => "homodyne",
        Detection::PhotonCounting => "photon_counting",
    }
}

fn random_ball<R: Rng>(rng: &mut R) -> BlochVector {
    loop {
        let b = BlochVector::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if b.norm_sqr() <= 1.0 {
            return b;
        }
    }
}

/// Block family with physical diagonal blocks, arbitrary coherences obeying
/// `π^{kj} = conj(π^{jk})`, rescaled to unit physical trace.
pub fn random_state<R: Rng>(f: &Filter, rng: &mut R) -> BlockState {
    let n = f.initial_state(&BlochVector::GROUND).branches();
    let mut rc = || C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let mut coherences = Vec::new();
    for _ in 0..n * (n - 1) / 2 {
        coherences.push(Block::new(rc(), rc(), rc(), rc()));
    }
    let mut s = BlockState::zeros(n);
    let mut it = coherences.into_iter();
    for j in 0..n {
        s.set(j, j, Block::from_bloch(&random_ball(rng)));
        for k in 0..j {
            let b = it.next().expect("one coherence per pair");
            s.set(j, k, b);
            s.set(k, j, b.conj());
        }
    }
    let tr = f.physical_block(&s).c.re;
    s.scaled(1.0 / tr)
}

/// Largest componentwise difference between two field decompositions.
pub fn fields_deviation(a: &FieldDecomposition<BlockState>, b: &FieldDecomposition<BlockState>) -> f64 {
    let mut d = a.drift.max_abs_diff(&b.drift);
    match (&a.diffusion, &b.diffusion) {
        (Some(x), Some(y)) => d = d.max(x.max_abs_diff(y)),
        (None, None) => {}
        _ => return f64::INFINITY,
    }
    match (&a.jump, &b.jump) {
        (Some(x), Some(y)) => {
            d = d
                .max(x.numerator.max_abs_diff(&y.numerator))
                .max((x.raw_rate - y.raw_rate).abs());
        }
        (None, None) => {}
        _ => return f64::INFINITY,
    }
    d.max((a.observation_rate - b.observation_rate).abs())
}

fn sample_states(f: &Filter, salt: u64) -> Vec<(f64, BlockState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ salt);
    (0..SAMPLES)
        .map(|_| {
            let t = rng.random_range(0.0..6.0);
            (t, random_state(f, &mut rng))
        })
        .collect()
}

/// Max deviation of `fields` from the generic operator filter over the sample states.
pub fn specialization_deviation(fields: &FieldsFn, f: &Filter, detection: Detection) -> f64 {
    sample_states(f, detection as u64)
        .iter()
        .map(|(t, s)| {
            match (fields(f, detection, *t, s), f.generic_fields(detection, *t, s)) {
                (Ok(a), Ok(b)) => fields_deviation(&a, &b),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

/// Max deviation between trace-formula and closed-form purity rates.
pub fn purity_rate_deviation(f: &Filter, conditioned: bool) -> f64 {
    sample_states(f, 7 + conditioned as u64)
        .iter()
        .map(|(t, s)| {
            let (a, b) = if conditioned {
                (purity::purity_rate_general_hd(f, *t, s), purity::purity_rate_qubit_hd(f, *t, s))
            } else {
                (purity::purity_rate_general_me(f, *t, s), purity::purity_rate_qubit_me(f, *t, s))
            };
            let d = (a - b).abs();
            if d.is_nan() { f64::INFINITY } else { d }
        })
        .fold(0.0, f64::max)
}

/// Distance of the vacuum post-jump state from the ground state; zero when exact.
fn jump_reset_deviation(fields: &FieldsFn) -> f64 {
    let f = Filter::two_level(1.0, 2.0, FieldInput::Vacuum);
    let mut worst: f64 = 0.0;
    for b in [BlochVector::EXCITED, BlochVector::new(0.6, 0.0, 0.8), BlochVector::new(0.1, -0.3, 0.2)] {
        let s = f.initial_state(&b);
        let post = fields(&f, Detection::PhotonCounting, 0.0, &s)
            .ok()
            .and_then(|d| d.jump)
            .and_then(|j| j.post_jump().ok());
        let Some(post) = post else { return f64::INFINITY };
        let p = f.physical_bloch(&post);
        for (a, e) in p.as_array().iter().zip(BlochVector::GROUND.as_array()) {
            worst = worst.max((a - e).abs());
        }
    }
    worst
}

/// Physical trace increments, which must vanish on unit-trace states.
fn trace_increment(fields: &FieldsFn, f: &Filter) -> f64 {
    let mut worst: f64 = 0.0;
    for (t, s) in sample_states(f, 13) {
        let Ok(hd) = fields(f, Detection::Homodyne, t, &s) else { return f64::INFINITY };
        let Ok(pd) = fields(f, Detection::PhotonCounting, t, &s) else { return f64::INFINITY };
        let mut incs = vec![hd.drift.clone(), pd.drift.clone()];
        incs.extend(hd.diffusion);
        // Raw rate: the clamped compensator differs where ν < 0.
        incs.extend(pd.jump.map(|j| {
            let mut c = j.numerator.clone();
            c.axpy(-j.raw_rate, &s);
            c
        }));
        for inc in incs {
            worst = worst.max(f.physical_block(&inc).c.norm());
        }
    }
    worst
}

fn hermitian_defect(fields: &FieldsFn, f: &Filter) -> f64 {
    let mut worst: f64 = 0.0;
    for (t, s) in sample_states(f, 17) {
        for det in [Detection::Homodyne, Detection::PhotonCounting] {
            let Ok(d) = fields(f, det, t, &s) else { return f64::INFINITY };
            worst = worst.max(d.drift.hermitian_defect());
            if let Some(h) = &d.diffusion {
                worst = worst.max(h.hermitian_defect());
            }
            if let Some(j) = &d.jump {
                worst = worst.max(j.numerator.hermitian_defect());
            }
        }
    }
    worst
}

fn check(name: String, max_deviation: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: max_deviation <= tol,
        max_deviation,
    }
}

/// Runs every check against the built-in specialized filters.
pub fn run_checks() -> Vec<CheckResult> {
    run_checks_with(&|f: &Filter, d, t, s: &BlockState| f.sme_fields(d, t, s))
}

pub fn run_checks_with(fields: &FieldsFn) -> Vec<CheckResult> {
    let filters = reference_filters();
    let mut out = Vec::new();
    for (name, f) in &filters {
        for det in [Detection::Homodyne, Detection::PhotonCounting] {
            out.push(check(
                format!("specialization/{name}/{}", detection_name(det)),
                specialization_deviation(fields, f, det),
                TOLERANCE,
            ));
        }
    }
    for (name, f) in &filters {
        out.push(check(format!("purity_rate/{name}/master"), purity_rate_deviation(f, false), TOLERANCE));
        out.push(check(format!("purity_rate/{name}/homodyne"), purity_rate_deviation(f, true), TOLERANCE));
    }
    out.push(check("invariant/vacuum_jump_reset".into(), jump_reset_deviation(fields), 0.0));
    for (name, f) in &filters[1..] {
        out.push(check(format!("invariant/{name}/physical_trace"), trace_increment(fields, f), 1e-12));
    }
    for (name, f) in &filters {
        out.push(check(format!("invariant/{name}/hermitian_symmetry"), hermitian_defect(fields, f), 1e-12));
    }
    out
}

/// Check names in run order, without running anything.
pub fn check_names() -> Vec<String> {
    let families = ["vacuum", "single_photon", "cat"];
    let mut out = Vec::new();
    for name in families {
        for det in [Detection::Homodyne, Detection::PhotonCounting] {
            out.push(format!("specialization/{name}/{}", detection_name(det)));
        }
    }
    for name in families {
        out.push(format!("purity_rate/{name}/master"));
        out.push(format!("purity_rate/{name}/homodyne"));
    }
    out.push("invariant/vacuum_jump_reset".into());
    for name in &families[1..] {
        out.push(format!("invariant/{name}/physical_trace"));
    }
    for name in families {
        out.push(format!("invariant/{name}/hermitian_symmetry"));
    }
    out
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}
