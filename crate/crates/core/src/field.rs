//! Driving-field states: vacuum, single photon in a Gaussian wavepacket, and
//! superpositions of coherent states with piecewise-constant amplitudes.

use std::f64::consts::PI;

use crate::algebra::{C64, ZERO};
use crate::error::{Error, Result};

/// Single-photon wavepacket ξ(t) = (Ω²/2π)^¼ exp(−Ω²(t − t_c)²/4).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianWavepacket {
    /// Frequency bandwidth Ω.
    pub bandwidth: f64,
    /// Peak arrival time t_c.
    pub t_center: f64,
}

impl GaussianWavepacket {
    pub fn new(bandwidth: f64, t_center: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "wavepacket bandwidth must be positive, got {bandwidth}"
            )));
        }
        if !t_center.is_finite() {
            return Err(Error::InvalidInput("wavepacket centre must be finite".into()));
        }
        Ok(Self {
            bandwidth,
            t_center,
        })
    }

    pub fn value(&self, t: f64) -> C64 {
        let w2 = self.bandwidth * self.bandwidth;
        let dt = t - self.t_center;
        C64::new((w2 / (2.0 * PI)).powf(0.25) * (-w2 / 4.0 * dt * dt).exp(), 0.0)
    }

    /// Trapezoid estimate of ∫|ξ|² over `times` (assumed sorted).
    pub fn norm_on_grid(&self, times: &[f64]) -> f64 {
        times
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.value(w[0]).norm_sqr() + self.value(w[1]).norm_sqr()))
            .sum()
    }
}

pub fn wavepacket_value(w: &GaussianWavepacket, t: f64) -> C64 {
    w.value(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub value: C64,
}

/// Piecewise-constant complex amplitude; zero outside its segments.
/// Segments are half-open `[t_start, t_end)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PulseAmplitude {
    segments: Vec<PulseSegment>,
}

impl PulseAmplitude {
    pub fn new(mut segments: Vec<PulseSegment>) -> Result<Self> {
        segments.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
        for s in &segments {
            if !(s.t_start.is_finite() && s.t_end.is_finite() && s.t_end > s.t_start) {
                return Err(Error::InvalidInput(format!(
                    "pulse segment [{}, {}) is empty or not finite",
                    s.t_start, s.t_end
                )));
            }
            if !(s.value.re.is_finite() && s.value.im.is_finite()) {
                return Err(Error::InvalidInput("pulse amplitude is not finite".into()));
            }
        }
        if let Some(w) = segments.windows(2).find(|w| w[1].t_start < w[0].t_end) {
            return Err(Error::InvalidInput(format!(
                "pulse segments overlap at t = {}",
                w[1].t_start
            )));
        }
        Ok(Self { segments })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// A single rectangular pulse of height `value` on `[t_start, t_end)`.
    pub fn rectangle(t_start: f64, t_end: f64, value: C64) -> Result<Self> {
        Self::new(vec![PulseSegment {
            t_start,
            t_end,
            value,
        }])
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn value(&self, t: f64) -> C64 {
        self.segments
            .iter()
            .find(|s| s.t_start <= t && t < s.t_end)
            .map_or(ZERO, |s| s.value)
    }

    /// ⟨a, b⟩ = ∫ a*(s) b(s) ds, exact for piecewise-constant amplitudes.
    pub fn inner(&self, other: &Self) -> C64 {
        let mut acc = ZERO;
        for a in &self.segments {
            for b in &other.segments {
                let overlap = a.t_end.min(b.t_end) - a.t_start.max(b.t_start);
                if overlap > 0.0 {
                    acc += a.value.conj() * b.value * overlap;
                }
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).re
    }

    /// Support `[first start, last end)`, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((self.segments.first()?.t_start, self.segments.last()?.t_end))
    }
}

/// g_ij = ⟨α_i|α_j⟩ = exp(−½‖α_i‖² − ½‖α_j‖² + ⟨α_i, α_j⟩).
pub fn coherent_overlap(a: &PulseAmplitude, b: &PulseAmplitude) -> C64 {
    (C64::new(-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr(), 0.0) + a.inner(b)).exp()
}

/// Rescales `raw` so that Σ s_i* s_j g_ij = 1. Returns the weights and N_a = Σ |s_i|².
pub fn normalize_cat_weights(raw: &[C64], overlaps: &[Vec<C64>]) -> Result<(Vec<C64>, f64)> {
    let n = raw.len();
    if n == 0 || overlaps.len() != n || overlaps.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput(
            "weights and overlap matrix have inconsistent sizes".into(),
        ));
    }
    let mut total = ZERO;
    for i in 0..n {
        for j in 0..n {
            total += raw[i].conj() * raw[j] * overlaps[i][j];
        }
    }
    if !(total.re > 0.0) || total.im.abs() > 1e-9 * total.re.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "cat-state normalization sum {total} is not real positive"
        )));
    }
    let scale = total.re.sqrt().recip();
    let weights: Vec<C64> = raw.iter().map(|s| s * scale).collect();
    let n_a = weights.iter().map(|s| s.norm_sqr()).sum();
    Ok((weights, n_a))
}

/// Superposition Σ_j s_j |α_j⟩ with normalized weights and cached overlaps.
#[derive(Clone, Debug, PartialEq)]
pub struct CatStateInput {
    weights: Vec<C64>,
    amplitudes: Vec<PulseAmplitude>,
    overlaps: Vec<Vec<C64>>,
    n_a: f64,
}

impl CatStateInput {
    pub fn new(raw_weights: Vec<C64>, amplitudes: Vec<PulseAmplitude>) -> Result<Self> {
        if raw_weights.len() != amplitudes.len() || raw_weights.is_empty() {
            return Err(Error::InvalidInput(
                "a cat state needs one weight per branch and at least one branch".into(),
            ));
        }
        let n = amplitudes.len();
        let mut overlaps = vec![vec![ZERO; n]; n];
        for i in 0..n {
            overlaps[i][i] = C64::new(1.0, 0.0);
            for j in (i + 1)..n {
                let g = coherent_overlap(&amplitudes[i], &amplitudes[j]);
                overlaps[i][j] = g;
                overlaps[j][i] = g.conj();
            }
        }
        let (weights, n_a) = normalize_cat_weights(&raw_weights, &overlaps)?;
        Ok(Self {
            weights,
            amplitudes,
            overlaps,
            n_a,
        })
    }

    pub fn branches(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn amplitudes(&self) -> &[PulseAmplitude] {
        &self.amplitudes
    }

    pub fn overlap(&self, i: usize, j: usize) -> C64 {
        self.overlaps[i][j]
    }

    pub fn n_a(&self) -> f64 {
        self.n_a
    }

    /// α_l(t) for every branch.
    pub fn amplitudes_at(&self, t: f64) -> Vec<C64> {
        self.amplitudes.iter().map(|a| a.value(t)).collect()
    }

    /// Σ s_i* s_j g_ij.
    pub fn normalization(&self) -> C64 {
        let n = self.branches();
        let mut total = ZERO;
        for i in 0..n {
            for j in 0..n {
                total += self.weights[i].conj() * self.weights[j] * self.overlaps[i][j];
            }
        }
        total
    }

    /// Union of all branch supports.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.amplitudes
            .iter()
            .filter_map(PulseAmplitude::support)
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldInput {
    Vacuum,
    SinglePhoton(GaussianWavepacket),
    Cat(CatStateInput),
}

impl FieldInput {
    pub fn kind(&self) -> InputKind {
        match self {
            FieldInput::Vacuum => InputKind::Vacuum,
            FieldInput::SinglePhoton(_) => InputKind::SinglePhoton,
            FieldInput::Cat(_) => InputKind::Cat,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Vacuum,
    SinglePhoton,
    Cat,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pulse(v: f64) -> PulseAmplitude {
        PulseAmplitude::rectangle(0.0, 5.0, C64::new(v, 0.0)).unwrap()
    }

    #[test]
    fn wavepacket_examples() {
        let w = GaussianWavepacket::new(2.0, 3.0).unwrap();
        assert_relative_eq!(w.value(3.0).re, (4.0 / (2.0 * PI)).powf(0.25), epsilon = 1e-15);
        assert_relative_eq!(w.value(3.0).re, 0.8932438417380023, epsilon = 1e-12);
        assert_eq!(w.value(3.0).im, 0.0);
        assert!(w.value(1e3).norm() < 1e-300);
        assert!(w.value(-1e3).norm() < 1e-300);

        let times: Vec<f64> = (0..=16_000).map(|k| -5.0 + k as f64 * 1e-3).collect();
        assert!((w.norm_on_grid(&times) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn wavepacket_rejects_bad_bandwidth() {
        assert!(GaussianWavepacket::new(0.0, 1.0).is_err());
        assert!(GaussianWavepacket::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn wavepacket_normalized_over_default_window() {
        let w = GaussianWavepacket::new(1.5, 3.0).unwrap();
        let (lo, hi): (f64, f64) = (3.0 - 8.0 / 1.5, 3.0 + 8.0 / 1.5);
        let n = ((hi - lo) / 1e-3).round() as usize;
        let times: Vec<f64> = (0..=n).map(|k| lo + k as f64 * (hi - lo) / n as f64).collect();
        assert!((w.norm_on_grid(&times) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pulse_evaluation_and_validation() {
        let p = PulseAmplitude::new(vec![
            PulseSegment { t_start: 2.0, t_end: 3.0, value: C64::new(0.0, 2.0) },
            PulseSegment { t_start: 0.0, t_end: 1.0, value: C64::new(1.0, 0.0) },
        ])
        .unwrap();
        assert_eq!(p.value(0.5), C64::new(1.0, 0.0));
        assert_eq!(p.value(1.5), ZERO);
        assert_eq!(p.value(2.0), C64::new(0.0, 2.0));
        assert_eq!(p.value(3.0), ZERO);
        assert_eq!(p.value(-1.0), ZERO);
        assert_eq!(p.support(), Some((0.0, 3.0)));
        assert_relative_eq!(p.norm_sqr(), 5.0);

        let overlapping = PulseAmplitude::new(vec![
            PulseSegment { t_start: 0.0, t_end: 2.0, value: C64::new(1.0, 0.0) },
            PulseSegment { t_start: 1.0, t_end: 3.0, value: C64::new(1.0, 0.0) },
        ]);
        assert!(overlapping.is_err());
        assert!(PulseAmplitude::rectangle(1.0, 1.0, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn overlap_examples() {
        assert_relative_eq!(coherent_overlap(&pulse(1.0), &pulse(1.0)).re, 1.0);
        let g = coherent_overlap(&pulse(1.0), &pulse(-1.0));
        assert_relative_eq!(g.re, (-10.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(g.re, 4.539992976248485e-5, max_relative = 1e-12);
        assert_eq!(g.im, 0.0);
        let g = coherent_overlap(&pulse(1.0), &PulseAmplitude::zero());
        assert_relative_eq!(g.re, (-2.5f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn normalize_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let single = vec![vec![C64::new(1.0, 0.0), C64::new(0.3, 0.0)], vec![C64::new(0.3, 0.0), C64::new(1.0, 0.0)]];
        let (s, n_a) = normalize_cat_weights(&[C64::new(1.0, 0.0), ZERO], &single).unwrap();
        assert_eq!(s, vec![C64::new(1.0, 0.0), ZERO]);
        assert_eq!(n_a, 1.0);

        let e10 = C64::new((-10.0f64).exp(), 0.0);
        let g = vec![vec![C64::new(1.0, 0.0), e10], vec![e10, C64::new(1.0, 0.0)]];
        let (s, n_a) = normalize_cat_weights(&[C64::new(h, 0.0), C64::new(h, 0.0)], &g).unwrap();
        let expect = h / (1.0 + (-10.0f64).exp()).sqrt();
        assert_relative_eq!(s[0].re, expect, epsilon = 1e-15);
        assert_relative_eq!(s[0].re, 0.70709, epsilon = 1e-5);
        assert_relative_eq!(n_a, 1.0 / (1.0 + (-10.0f64).exp()), epsilon = 1e-15);
        assert_relative_eq!(n_a, 0.99995, epsilon = 1e-5);

        let orth = vec![vec![C64::new(1.0, 0.0), ZERO], vec![ZERO, C64::new(1.0, 0.0)]];
        let (s, n_a) = normalize_cat_weights(&[C64::new(h, 0.0), C64::new(h, 0.0)], &orth).unwrap();
        assert_relative_eq!(s[1].re, h, epsilon = 1e-15);
        assert_relative_eq!(n_a, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn normalize_rejects_nonpositive() {
        let g = vec![vec![C64::new(1.0, 0.0)]];
        assert!(normalize_cat_weights(&[ZERO], &g).is_err());
        assert!(normalize_cat_weights(&[], &[]).is_err());
    }

    #[test]
    fn cat_input_invariants() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let cat = CatStateInput::new(
            vec![C64::new(h, 0.0), C64::new(h, 0.0)],
            vec![PulseAmplitude::zero(), pulse(-1.0)],
        )
        .unwrap();
        assert_eq!(cat.overlap(0, 0), C64::new(1.0, 0.0));
        assert_eq!(cat.overlap(1, 1), C64::new(1.0, 0.0));
        assert_eq!(cat.overlap(0, 1), cat.overlap(1, 0).conj());
        assert!((cat.normalization() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let n_a: f64 = cat.weights().iter().map(|s| s.norm_sqr()).sum();
        assert_eq!(cat.n_a(), n_a);
        assert_eq!(cat.support(), Some((0.0, 5.0)));
    }

    fn arb_pulse() -> impl Strategy<Value = PulseAmplitude> {
        prop::collection::vec((0.0..3.0f64, 0.1..2.0f64, -1.5..1.5f64, -1.5..1.5f64), 0..4).prop_map(|segs| {
            let mut t = 0.0;
            let mut out = Vec::new();
            for (gap, len, re, im) in segs {
                let start = t + gap;
                out.push(PulseSegment { t_start: start, t_end: start + len, value: C64::new(re, im) });
                t = start + len;
            }
            PulseAmplitude::new(out).unwrap()
        })
    }

    proptest! {
        #[test]
        fn overlap_is_hermitian_and_bounded(a in arb_pulse(), b in arb_pulse()) {
            let gab = coherent_overlap(&a, &b);
            let gba = coherent_overlap(&b, &a);
            prop_assert!((gab - gba.conj()).norm() < 1e-12);
            prop_assert!(gab.norm() <= 1.0 + 1e-12);
            prop_assert!((coherent_overlap(&a, &a) - C64::new(1.0, 0.0)).norm() < 1e-12);
        }

        #[test]
        fn normalization_is_projective(a in arb_pulse(), b in arb_pulse(),
                                       s1 in 0.1..2.0f64, s2 in -2.0..2.0f64, k in 0.01..100.0f64) {
            let cat = CatStateInput::new(vec![C64::new(s1, 0.0), C64::new(s2, 0.3)], vec![a.clone(), b.clone()]).unwrap();
            let scaled = CatStateInput::new(vec![C64::new(s1 * k, 0.0), C64::new(s2 * k, 0.3 * k)], vec![a, b]).unwrap();
            for (x, y) in cat.weights().iter().zip(scaled.weights()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
            prop_assert!((cat.normalization() - C64::new(1.0, 0.0)).norm() < 1e-12);
        }

        #[test]
        fn wavepacket_is_symmetric(w in 0.1..5.0f64, tc in -5.0..5.0f64, d in 0.0..10.0f64) {
            let p = GaussianWavepacket::new(w, tc).unwrap();
            prop_assert!((p.value(tc + d) - p.value(tc - d)).norm() <= 1e-12 * p.value(tc).norm());
        }
    }
}
