//! Purity `P = 2Tr[ρ²] − 1 = x² + y² + z²` and its rate of change under the
//! master equation and, on average, under homodyne conditioning.
//!
//! Two routes are provided for every rate. The trace route works with 2×2
//! operators in the Schrödinger picture: `dP/dt = 4 Re Tr[ρ D]` for the master
//! equation and `4 Re Tr[ρ D] + 2 Tr[ℋ²]` for the Itô average of a homodyne
//! filter, where `D` and `ℋ` are the physical drift and diffusion of ρ. The
//! qubit route uses closed forms in the Bloch components.

use serde::Serialize;

use crate::algebra::{commutator, lindblad_dual, BlochVector, Operator2, SystemTriple, C64, I, ZERO};
use crate::engine::integrate_ode_visit;
use crate::ensemble::{FilterModel, Scenario};
use crate::error::Result;
use crate::filter::{qubit, Block, BlockState, Filter};
use crate::field::FieldInput;

pub fn purity_bloch(b: &BlochVector) -> f64 {
    b.norm_sqr()
}

/// `α_i* (L ρ S† − ρ S† L) + α_j (S ρ L† − L† S ρ) + α_i* α_j (S ρ S† − ρ)`.
fn field_drift(g: &SystemTriple, rho: &Operator2, ai_conj: C64, aj: C64) -> Operator2 {
    let (s, l) = (g.s, g.l);
    let (sd, ld) = (s.adjoint(), l.adjoint());
    (l * *rho * sd - *rho * sd * l) * ai_conj
        + (s * *rho * ld - ld * s * *rho) * aj
        + (s * *rho * sd - *rho) * (ai_conj * aj)
}

/// Physical density, its drift and its homodyne diffusion in the Schrödinger picture.
fn schrodinger_fields(f: &Filter, t: f64, s: &BlockState) -> (Operator2, Operator2, Operator2) {
    let g = &f.system;
    let (sm, l) = (g.s, g.l);
    let (sd, ld) = (sm.adjoint(), l.adjoint());
    let rho_of = |b: Block| b.density();
    match &f.input {
        FieldInput::Vacuum => {
            let rho = rho_of(s.get(0, 0));
            let k = ((l + ld) * rho).trace();
            let h = l * rho + rho * ld - rho * k;
            (rho, lindblad_dual(g, &rho), h)
        }
        FieldInput::SinglePhoton(w) => {
            let xi = w.value(t);
            let xis = xi.conj();
            let (r00, r01, r10, r11) = (
                rho_of(s.get(0, 0)),
                rho_of(s.get(0, 1)),
                rho_of(s.get(1, 0)),
                rho_of(s.get(1, 1)),
            );
            let d = lindblad_dual(g, &r11)
                + (l * r01 * sd - r01 * sd * l) * xis
                + (sm * r10 * ld - ld * sm * r10) * xi
                + (sm * r00 * sd - r00) * xi.norm_sqr();
            let k = ((l + ld) * r11).trace() + (sm * r01).trace() * xi + (sd * r10).trace() * xis;
            let h = l * r11 + r11 * ld + r01 * sd * xis + sm * r10 * xi - r11 * k;
            (r11, d, h)
        }
        FieldInput::Cat(cat) => {
            let alpha = cat.amplitudes_at(t);
            let n = s.branches();
            let mut rho = Operator2::zero();
            let mut d = Operator2::zero();
            let mut h = Operator2::zero();
            let mut k = ZERO;
            for i in 0..n {
                for j in 0..n {
                    let r = rho_of(s.get(i, j));
                    let (ai, aj) = (alpha[i].conj(), alpha[j]);
                    rho += r;
                    d += lindblad_dual(g, &r) + field_drift(g, &r, ai, aj);
                    h += l * r + r * ld + sm * r * aj + r * sd * ai;
                    k += ((l + ld + sm * aj + sd * ai) * r).trace();
                }
            }
            (rho, d, h - rho * k)
        }
    }
}

/// Master-equation purity rate from the trace formulas.
pub fn purity_rate_general_me(f: &Filter, t: f64, s: &BlockState) -> f64 {
    if let FieldInput::Vacuum = f.input {
        let rho = s.get(0, 0).density();
        let l = f.system.l;
        return 4.0 * (commutator(&rho, &l) * rho * l.adjoint()).trace().re;
    }
    let (rho, d, _) = schrodinger_fields(f, t, s);
    4.0 * (rho * d).trace().re
}

/// Itô-averaged homodyne purity rate from the trace formulas.
pub fn purity_rate_general_hd(f: &Filter, t: f64, s: &BlockState) -> f64 {
    let (rho, d, h) = schrodinger_fields(f, t, s);
    4.0 * (rho * d).trace().re + 2.0 * (h * h).trace().re
}

/// Master-equation purity rate in closed form.
pub fn purity_rate_qubit_me(f: &Filter, t: f64, s: &BlockState) -> f64 {
    let gamma = f.system.gamma;
    let sg = gamma.sqrt();
    match &f.input {
        FieldInput::Vacuum => {
            let b = s.get(0, 0).bloch_re();
            -gamma * (b.norm_sqr() + b.z * b.z + 2.0 * b.z)
        }
        FieldInput::SinglePhoton(w) => {
            let xi = w.value(t);
            let (b10, b11) = (s.get(1, 0), s.get(1, 1));
            let p = b11.bloch_re().norm_sqr();
            let (z, c) = (b11.z.re, b11.c.re);
            let cross = ((b11.x + I * b11.y) * b10.z - (b10.x + I * b10.y) * b11.z) * xi;
            -gamma * (p + z * z + 2.0 * z * c) + 4.0 * sg * cross.re
        }
        FieldInput::Cat(cat) => {
            let alpha = cat.amplitudes_at(t);
            let tot = s.sum();
            let (x, y, z, c) = (tot.x.re, tot.y.re, tot.z.re, tot.c.re);
            let p = x * x + y * y + z * z;
            let n = s.branches();
            let mut acc = ZERO;
            for i in 0..n {
                let ai = alpha[i].conj();
                for j in 0..n {
                    let aj = alpha[j];
                    let b = s.get(i, j);
                    acc += b.z * (ai + aj) * x - I * b.z * (ai - aj) * y
                        - ((b.x - I * b.y) * ai + (b.x + I * b.y) * aj) * z;
                }
            }
            -gamma * (p + z * z + 2.0 * z * c) + 2.0 * sg * acc.re
        }
    }
}

/// Itô-averaged homodyne purity rate in closed form.
///
/// The vacuum case is `γ(P − 1)(x² − 1)`; the other inputs add the squared
/// physical diffusion to the master-equation rate.
pub fn purity_rate_qubit_hd(f: &Filter, t: f64, s: &BlockState) -> f64 {
    let diffusion = |h: Block| h.bloch_re().norm_sqr();
    match &f.input {
        FieldInput::Vacuum => {
            let b = s.get(0, 0).bloch_re();
            f.system.gamma * (b.norm_sqr() - 1.0) * (b.x * b.x - 1.0)
        }
        FieldInput::SinglePhoton(w) => {
            let fd = qubit::photon_hd_fields(s, w.value(t), &f.system);
            purity_rate_qubit_me(f, t, s) + diffusion(fd.diffusion.expect("homodyne").get(1, 1))
        }
        FieldInput::Cat(cat) => {
            let fd = qubit::cat_hd_fields(s, cat, t, &f.system);
            purity_rate_qubit_me(f, t, s) + diffusion(fd.diffusion.expect("homodyne").sum())
        }
    }
}

/// The single-photon homodyne purity rate in its printed closed form, kept as a
/// diagnostic only. Block `(j, k)` of the state plays the role of the printed
/// `jk` index with the two indices swapped, and `|·|` is the complex modulus.
/// It is dimensionally inconsistent and agrees with the Itô average only in
/// the limit of zero field and `γ = 1` (up to an overall factor 2).
pub fn purity_rate_photon_hd_printed(s: &BlockState, xi: C64, gamma: f64) -> f64 {
    let sg = gamma.sqrt();
    let b11 = s.get(1, 1);
    let p10 = s.get(0, 1);
    let p01 = s.get(1, 0);
    let x11 = b11.x.re;
    let p = b11.bloch_re().norm_sqr();
    let kt = (b11.x * sg + p01.c * xi + p10.c * xi.conj()).re;
    let sq = (p10.x * p10.x + p10.y * p10.y + p10.z * p10.z) * xi * xi;
    let moduli = (p01.x.norm() + p01.y.norm() + p01.z.norm()) * xi.norm_sqr();
    let last = p10.x * sg - (p10.x * b11.x + p10.y * b11.y + p10.z * b11.z) * kt
        + I * sg * b11.y * p10.z
        - I * sg * b11.z * p10.y;
    2.0 * (kt * kt - gamma) * p + 2.0 * gamma * (1.0 + x11 * x11 - 2.0 * sg * x11 * kt)
        + 4.0 * sq.re
        + 4.0 * moduli
        + 4.0 * last.re
}

/// Purity of the unconditioned state and its rate by both routes, on the record grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PurityProfile {
    pub times: Vec<f64>,
    pub purity: Vec<f64>,
    pub rate_general: Vec<f64>,
    pub rate_qubit: Vec<f64>,
    /// Conditioned (homodyne-averaged) rate evaluated on the unconditioned state.
    pub conditioned_rate: Vec<f64>,
}

pub fn me_purity_profile(sc: &Scenario) -> Result<PurityProfile> {
    let f = &sc.filter;
    let model = FilterModel {
        filter: f,
        detection: None,
        record_blocks: false,
    };
    let mut p = PurityProfile::default();
    integrate_ode_visit(&model, &f.initial_state(&sc.initial), &sc.integrator, |t, s| {
        p.times.push(t);
        p.purity.push(f.purity(s));
        p.rate_general.push(purity_rate_general_me(f, t, s));
        p.rate_qubit.push(purity_rate_qubit_me(f, t, s));
        p.conditioned_rate.push(purity_rate_qubit_hd(f, t, s));
    })?;
    Ok(p)
}

/// Derivative by central differences, one-sided at the ends.
pub fn central_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect()
}
