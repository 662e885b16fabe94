//! Vector fields of the stochastic master equations (filters) and their
//! unconditioned master-equation counterparts.
//!
//! Every filter state is a [`BlockState`]: an `n × n` family of generalized
//! density blocks `ρ^{jk} = ½(c I + x σx + y σy + z σz)` with complex
//! coefficients. The vacuum filter uses a single block, the single-photon
//! filter the four blocks `00, 01, 10, 11`, and a cat state with `n`
//! branches uses `n²` blocks carrying the weights `s_j* s_k g_jk`.

pub mod generic;
pub mod qubit;

use std::ops::{Add, Mul, Sub};

use crate::algebra::{
    bloch_to_density, pauli, BlochVector, Operator2, Pauli, SystemTriple, C64, ONE, ZERO,
};
use crate::engine::StateVector;
use crate::error::{Error, Result};
use crate::field::{CatStateInput, FieldInput, InputKind};

/// Expectations `(π(I), π(σx), π(σy), π(σz))` of one generalized density block.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Block {
    pub c: C64,
    pub x: C64,
    pub y: C64,
    pub z: C64,
}

impl Block {
    pub const ZERO: Self = Self::new(ZERO, ZERO, ZERO, ZERO);

    pub const fn new(c: C64, x: C64, y: C64, z: C64) -> Self {
        Self { c, x, y, z }
    }

    /// `(1, x, y, z)` for a physical Bloch vector.
    pub fn from_bloch(b: &BlochVector) -> Self {
        Self::new(ONE, b.x.into(), b.y.into(), b.z.into())
    }

    pub fn from_density(rho: &Operator2) -> Self {
        Self::new(
            rho.trace(),
            (pauli(Pauli::X) * *rho).trace(),
            (pauli(Pauli::Y) * *rho).trace(),
            (pauli(Pauli::Z) * *rho).trace(),
        )
    }

    pub fn density(&self) -> Operator2 {
        (Operator2::identity() * self.c
            + pauli(Pauli::X) * self.x
            + pauli(Pauli::Y) * self.y
            + pauli(Pauli::Z) * self.z)
            * 0.5
    }

    /// π(X) = Tr[X ρ] for an arbitrary (not necessarily Hermitian) operator.
    pub fn expect(&self, op: &Operator2) -> C64 {
        (*op * self.density()).trace()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.c.conj(), self.x.conj(), self.y.conj(), self.z.conj())
    }

    pub fn components(&self) -> [C64; 4] {
        [self.c, self.x, self.y, self.z]
    }

    pub fn bloch_re(&self) -> BlochVector {
        BlochVector::new(self.x.re, self.y.re, self.z.re)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.components().iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl Add for Block {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(self.c + r.c, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl Sub for Block {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.c - r.c, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl Mul<C64> for Block {
    type Output = Self;
    fn mul(self, a: C64) -> Self {
        Self::new(self.c * a, self.x * a, self.y * a, self.z * a)
    }
}

impl Mul<f64> for Block {
    type Output = Self;
    fn mul(self, a: f64) -> Self {
        Self::new(self.c * a, self.x * a, self.y * a, self.z * a)
    }
}

/// Row-major `n × n` family of blocks; `get(j, k)` is `π^{jk}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockState {
    n: usize,
    blocks: Vec<Block>,
}

impl BlockState {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            blocks: vec![Block::ZERO; n * n],
        }
    }

    pub fn from_blocks(n: usize, blocks: Vec<Block>) -> Result<Self> {
        if blocks.len() != n * n || n == 0 {
            return Err(Error::InvalidState(format!(
                "expected {} blocks for {n} branches, got {}",
                n * n,
                blocks.len()
            )));
        }
        Ok(Self { n, blocks })
    }

    /// Single block `(1, x, y, z)`.
    pub fn vacuum(b: &BlochVector) -> Self {
        Self {
            n: 1,
            blocks: vec![Block::from_bloch(b)],
        }
    }

    /// Blocks 11 and 00 start at the system state; the coherences 10 and 01 start at zero.
    pub fn single_photon(b: &BlochVector) -> Self {
        let mut s = Self::zeros(2);
        s.set(1, 1, Block::from_bloch(b));
        s.set(0, 0, Block::from_bloch(b));
        s
    }

    /// π₀^{ij}(X) = s_i* s_j g_ij Tr[X ρ₀].
    pub fn cat(input: &CatStateInput, b: &BlochVector) -> Self {
        let n = input.branches();
        let w = input.weights();
        let base = Block::from_bloch(b);
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                s.set(i, j, base * (w[i].conj() * w[j] * input.overlap(i, j)));
            }
        }
        s
    }

    pub fn branches(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> Block {
        self.blocks[j * self.n + k]
    }

    pub fn set(&mut self, j: usize, k: usize, b: Block) {
        self.blocks[j * self.n + k] = b;
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn sum(&self) -> Block {
        self.blocks.iter().fold(Block::ZERO, |acc, b| acc + *b)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "block families differ in size");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Largest violation of `π^{kj} = conj(π^{jk})`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut out: f64 = 0.0;
        for j in 0..self.n {
            for k in j..self.n {
                out = out.max(self.get(k, j).max_abs_diff(&self.get(j, k).conj()));
            }
        }
        out
    }
}

impl StateVector for BlockState {
    fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert_eq!(self.n, x.n);
        for (s, v) in self.blocks.iter_mut().zip(&x.blocks) {
            *s = *s + *v * a;
        }
    }

    fn scaled(&self, a: f64) -> Self {
        Self {
            n: self.n,
            blocks: self.blocks.iter().map(|b| *b * a).collect(),
        }
    }

    fn divided(&self, a: f64) -> Self {
        Self {
            n: self.n,
            blocks: self
                .blocks
                .iter()
                .map(|b| Block::new(b.c / a, b.x / a, b.y / a, b.z / a))
                .collect(),
        }
    }

    fn is_finite(&self) -> bool {
        self.blocks.iter().all(Block::is_finite)
    }
}

/// Post-jump map of a counting filter, stored as `numerator = ν · post-jump state`
/// so that the compensator `numerator − ν · state` is defined even when ν = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpMap<S> {
    pub numerator: S,
    /// ν_t after clamping at zero.
    pub rate: f64,
    /// ν_t as evaluated, before clamping.
    pub raw_rate: f64,
}

impl<S: StateVector> JumpMap<S> {
    pub fn new(numerator: S, raw_rate: f64) -> Self {
        Self {
            numerator,
            rate: raw_rate.max(0.0),
            raw_rate,
        }
    }

    pub fn was_clamped(&self) -> bool {
        self.raw_rate < 0.0
    }

    pub fn post_jump(&self) -> Result<S> {
        if self.rate > 0.0 {
            Ok(self.numerator.divided(self.rate))
        } else {
            Err(Error::DegenerateJump {
                rate: self.raw_rate,
            })
        }
    }

    /// `ν · (post-jump − state)`, the expected jump increment per unit time.
    pub fn compensator(&self, state: &S) -> S {
        let mut out = self.numerator.clone();
        out.axpy(-self.rate, state);
        out
    }
}

/// Drift, diffusion and jump parts of one filter at one time and state.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDecomposition<S> {
    /// State increment per unit time (the master-equation part).
    pub drift: S,
    /// State increment per unit dW (homodyne filters).
    pub diffusion: Option<S>,
    /// Jump map and compensator (counting filters).
    pub jump: Option<JumpMap<S>>,
    /// K_t for homodyne detection, ν_t for photon counting, 0 for master equations.
    pub observation_rate: f64,
}

impl<S> FieldDecomposition<S> {
    pub fn drift_only(drift: S) -> Self {
        Self {
            drift,
            diffusion: None,
            jump: None,
            observation_rate: 0.0,
        }
    }

    pub fn map<T>(self, mut f: impl FnMut(S) -> T) -> FieldDecomposition<T> {
        FieldDecomposition {
            drift: f(self.drift),
            diffusion: self.diffusion.map(&mut f),
            jump: self.jump.map(|j| JumpMap {
                numerator: f(j.numerator),
                rate: j.rate,
                raw_rate: j.raw_rate,
            }),
            observation_rate: self.observation_rate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    Homodyne,
    PhotonCounting,
}

/// A two-level system `(I, √γ σ−, (ω/2) σz)` driven by one field input.
#[derive(Clone, Debug, PartialEq)]
pub struct Filter {
    pub system: SystemTriple,
    pub input: FieldInput,
}

impl Filter {
    pub fn two_level(gamma: f64, omega: f64, input: FieldInput) -> Self {
        Self {
            system: SystemTriple::two_level(gamma, omega),
            input,
        }
    }

    pub fn kind(&self) -> InputKind {
        self.input.kind()
    }

    pub fn initial_state(&self, b: &BlochVector) -> BlockState {
        match &self.input {
            FieldInput::Vacuum => BlockState::vacuum(b),
            FieldInput::SinglePhoton(_) => BlockState::single_photon(b),
            FieldInput::Cat(cat) => BlockState::cat(cat, b),
        }
    }

    /// The block whose expectations are physical: block 00 for vacuum,
    /// block 11 for a single photon, and the sum of all blocks for a cat state.
    pub fn physical_block(&self, s: &BlockState) -> Block {
        match self.input {
            FieldInput::Vacuum => s.get(0, 0),
            FieldInput::SinglePhoton(_) => s.get(1, 1),
            FieldInput::Cat(_) => s.sum(),
        }
    }

    pub fn physical_bloch(&self, s: &BlockState) -> BlochVector {
        self.physical_block(s).bloch_re()
    }

    pub fn physical_density(&self, s: &BlockState) -> Operator2 {
        self.physical_block(s).density()
    }

    pub fn purity(&self, s: &BlockState) -> f64 {
        self.physical_bloch(s).norm_sqr()
    }

    fn check_shape(&self, s: &BlockState) -> Result<()> {
        let expected = match &self.input {
            FieldInput::Vacuum => 1,
            FieldInput::SinglePhoton(_) => 2,
            FieldInput::Cat(cat) => cat.branches(),
        };
        if s.branches() == expected {
            Ok(())
        } else {
            Err(Error::InvalidState(format!(
                "filter expects {expected} branches, state has {}",
                s.branches()
            )))
        }
    }

    /// Hand-specialized qubit fields of the conditioned filter.
    pub fn sme_fields(
        &self,
        detection: Detection,
        t: f64,
        s: &BlockState,
    ) -> Result<FieldDecomposition<BlockState>> {
        self.check_shape(s)?;
        let g = &self.system;
        Ok(match (&self.input, detection) {
            (FieldInput::Vacuum, Detection::Homodyne) => {
                lift_vacuum(qubit::vacuum_hd_fields(&s.get(0, 0).bloch_re(), g))
            }
            (FieldInput::Vacuum, Detection::PhotonCounting) => {
                lift_vacuum(qubit::vacuum_pd_fields(&s.get(0, 0).bloch_re(), g))
            }
            (FieldInput::SinglePhoton(w), Detection::Homodyne) => qubit::photon_hd_fields(s, w.value(t), g),
            (FieldInput::SinglePhoton(w), Detection::PhotonCounting) => qubit::photon_pd_fields(s, w.value(t), g),
            (FieldInput::Cat(cat), Detection::Homodyne) => qubit::cat_hd_fields(s, cat, t, g),
            (FieldInput::Cat(cat), Detection::PhotonCounting) => qubit::cat_pd_fields(s, cat, t, g),
        })
    }

    /// Unconditioned dynamics: the filter drift without diffusion or jumps.
    pub fn me_fields(&self, t: f64, s: &BlockState) -> Result<FieldDecomposition<BlockState>> {
        let f = self.sme_fields(Detection::Homodyne, t, s)?;
        Ok(FieldDecomposition::drift_only(f.drift))
    }

    /// Brute-force evaluation of the generic operator filter, used as an oracle.
    pub fn generic_fields(
        &self,
        detection: Detection,
        t: f64,
        s: &BlockState,
    ) -> Result<FieldDecomposition<BlockState>> {
        self.check_shape(s)?;
        let g = &self.system;
        Ok(match (&self.input, detection) {
            (FieldInput::Vacuum, Detection::Homodyne) => generic::vacuum_hd(s, g),
            (FieldInput::Vacuum, Detection::PhotonCounting) => generic::vacuum_pd(s, g),
            (FieldInput::SinglePhoton(w), Detection::Homodyne) => generic::photon_hd(s, w.value(t), g),
            (FieldInput::SinglePhoton(w), Detection::PhotonCounting) => generic::photon_pd(s, w.value(t), g),
            (FieldInput::Cat(cat), Detection::Homodyne) => generic::cat_hd(s, &cat.amplitudes_at(t), g),
            (FieldInput::Cat(cat), Detection::PhotonCounting) => generic::cat_pd(s, &cat.amplitudes_at(t), g),
        })
    }

    /// Field value driving the filter at `t`: ξ(t) for a single photon, 0 otherwise.
    pub fn photon_amplitude(&self, t: f64) -> C64 {
        match &self.input {
            FieldInput::SinglePhoton(w) => w.value(t),
            _ => ZERO,
        }
    }

    /// Names of the per-block observables recorded alongside the physical Bloch vector.
    pub fn block_observable_names(&self) -> Vec<String> {
        let n = match &self.input {
            FieldInput::Vacuum => return Vec::new(),
            FieldInput::SinglePhoton(_) => 2,
            FieldInput::Cat(cat) => cat.branches(),
        };
        let mut names = vec!["tr".to_string()];
        for j in 0..n {
            for k in 0..n {
                for comp in ["c", "x", "y", "z"] {
                    names.push(format!("b{j}{k}_{comp}_re"));
                    names.push(format!("b{j}{k}_{comp}_im"));
                }
            }
        }
        names
    }

    pub fn block_observables(&self, s: &BlockState) -> Vec<f64> {
        if matches!(self.input, FieldInput::Vacuum) {
            return Vec::new();
        }
        let mut out = vec![self.physical_block(s).c.re];
        for b in s.blocks() {
            for v in b.components() {
                out.push(v.re);
                out.push(v.im);
            }
        }
        out
    }
}

/// Lifts Bloch-vector fields to one-block fields. Drift and diffusion leave the
/// trace unchanged; the jump numerator carries trace ν so the post-jump block has trace 1.
fn lift_vacuum(f: FieldDecomposition<BlochVector>) -> FieldDecomposition<BlockState> {
    let lift = |c: C64, b: &BlochVector| BlockState {
        n: 1,
        blocks: vec![Block::new(c, b.x.into(), b.y.into(), b.z.into())],
    };
    FieldDecomposition {
        drift: lift(ZERO, &f.drift),
        diffusion: f.diffusion.as_ref().map(|h| lift(ZERO, h)),
        jump: f.jump.map(|j| JumpMap {
            numerator: lift(j.raw_rate.into(), &j.numerator),
            rate: j.rate,
            raw_rate: j.raw_rate,
        }),
        observation_rate: f.observation_rate,
    }
}

impl StateVector for BlochVector {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.x += a * x.x;
        self.y += a * x.y;
        self.z += a * x.z;
    }

    fn scaled(&self, a: f64) -> Self {
        Self::new(self.x * a, self.y * a, self.z * a)
    }

    fn divided(&self, a: f64) -> Self {
        Self::new(self.x / a, self.y / a, self.z / a)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Density operator of the physical block of a vacuum filter state.
pub fn vacuum_density(s: &BlockState) -> Operator2 {
    bloch_to_density(&s.get(0, 0).bloch_re())
}
