//! Complex 2×2 operator algebra for a single qubit.
//!
//! Basis ordering is `(|e⟩, |g⟩)`: the excited state sits at the north pole
//! of the Bloch sphere, so `σz|e⟩ = |e⟩` and `σ−|e⟩ = |g⟩`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major complex 2×2 matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct Operator2 {
    pub m: [[C64; 2]; 2],
}

impl fmt::Debug for Operator2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Operator2 {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Self {
            m: [[a11, a12], [a21, a22]],
        }
    }

    pub const fn real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(
            C64::new(a11, 0.0),
            C64::new(a12, 0.0),
            C64::new(a21, 0.0),
            C64::new(a22, 0.0),
        )
    }

    pub const fn zero() -> Self {
        Self::real(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scale(&self, a: C64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * a, m[0][1] * a, m[1][0] * a, m[1][1] * a)
    }

    pub fn scale_re(&self, a: f64) -> Self {
        self.scale(C64::new(a, 0.0))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut out: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                out = out.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for Operator2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl AddAssign for Operator2 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for Operator2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Operator2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_re(-1.0)
    }
}

impl Mul for Operator2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<C64> for Operator2 {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for Operator2 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale_re(rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    Identity,
    X,
    Y,
    Z,
    /// Raising operator σ+ = |e⟩⟨g|.
    Plus,
    /// Lowering operator σ− = |g⟩⟨e|.
    Minus,
}

pub fn pauli(axis: Pauli) -> Operator2 {
    match axis {
        Pauli::Identity => Operator2::identity(),
        Pauli::X => Operator2::real(0.0, 1.0, 1.0, 0.0),
        Pauli::Y => Operator2::new(ZERO, -I, I, ZERO),
        Pauli::Z => Operator2::real(1.0, 0.0, 0.0, -1.0),
        Pauli::Plus => Operator2::real(0.0, 1.0, 0.0, 0.0),
        Pauli::Minus => Operator2::real(0.0, 0.0, 1.0, 0.0),
    }
}

pub fn commutator(a: &Operator2, b: &Operator2) -> Operator2 {
    *a * *b - *b * *a
}

/// Real Bloch-ball coordinates of a qubit state.
///
/// Norms slightly above one are accepted: integrator drift is reported, not clamped.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const GROUND: Self = Self::new(0.0, 0.0, -1.0);
    pub const EXCITED: Self = Self::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// ρ = ½(I + xσx + yσy + zσz).
pub fn bloch_to_density(b: &BlochVector) -> Operator2 {
    let half = 0.5;
    Operator2::new(
        C64::new(half * (1.0 + b.z), 0.0),
        C64::new(half * b.x, -half * b.y),
        C64::new(half * b.x, half * b.y),
        C64::new(half * (1.0 - b.z), 0.0),
    )
}

const DENSITY_TOL: f64 = 1e-9;

pub fn density_to_bloch(rho: &Operator2) -> Result<BlochVector> {
    let tr = rho.trace();
    if (tr - ONE).norm() > DENSITY_TOL {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    if !rho.is_hermitian(DENSITY_TOL) {
        return Err(Error::InvalidState("density operator is not Hermitian".into()));
    }
    Ok(BlochVector::new(
        (pauli(Pauli::X) * *rho).trace().re,
        (pauli(Pauli::Y) * *rho).trace().re,
        (pauli(Pauli::Z) * *rho).trace().re,
    ))
}

/// P = 2 Tr[ρ²] − 1; 1 for pure states and 0 for the maximally mixed state.
pub fn purity_density(rho: &Operator2) -> f64 {
    2.0 * (*rho * *rho).trace().re - 1.0
}

/// Open-system model `(S, L, H)` with its qubit parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemTriple {
    pub s: Operator2,
    pub l: Operator2,
    pub h: Operator2,
    /// Coupling rate γ.
    pub gamma: f64,
    /// Atomic frequency ω.
    pub omega: f64,
}

const TRIPLE_TOL: f64 = 1e-12;

impl SystemTriple {
    /// `G = (I, √γ σ−, (ω/2) σz)`.
    pub fn two_level(gamma: f64, omega: f64) -> Self {
        Self {
            s: Operator2::identity(),
            l: pauli(Pauli::Minus) * gamma.sqrt(),
            h: pauli(Pauli::Z) * (0.5 * omega),
            gamma,
            omega,
        }
    }

    pub fn new(s: Operator2, l: Operator2, h: Operator2, gamma: f64, omega: f64) -> Result<Self> {
        if (s.adjoint() * s).max_abs_diff(&Operator2::identity()) > TRIPLE_TOL {
            return Err(Error::InvalidInput("scattering matrix S is not unitary".into()));
        }
        if !h.is_hermitian(TRIPLE_TOL) {
            return Err(Error::InvalidInput("Hamiltonian H is not Hermitian".into()));
        }
        Ok(Self {
            s,
            l,
            h,
            gamma,
            omega,
        })
    }
}

/// Heisenberg-picture generator 𝔏X = −i[X,H] + ½L†[X,L] + ½[L†,X]L.
pub fn lindblad_generator(g: &SystemTriple, x: &Operator2) -> Operator2 {
    let ld = g.l.adjoint();
    commutator(x, &g.h) * (-I) + (ld * commutator(x, &g.l)) * 0.5 + (commutator(&ld, x) * g.l) * 0.5
}

/// Schrödinger-picture dual of [`lindblad_generator`]: −i[H,ρ] + LρL† − ½{L†L, ρ}.
pub fn lindblad_dual(g: &SystemTriple, rho: &Operator2) -> Operator2 {
    let ld = g.l.adjoint();
    let ldl = ld * g.l;
    commutator(&g.h, rho) * (-I) + g.l * *rho * ld - (ldl * *rho + *rho * ldl) * 0.5
}
