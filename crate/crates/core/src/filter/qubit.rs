//! Closed-form filter equations for the two-level system `(I, √γ σ−, (ω/2) σz)`.
//!
//! These are the fast paths used by the integrators. Each one is checked
//! against the operator-level evaluation in [`super::generic`].

use super::{Block, BlockState, FieldDecomposition, JumpMap};
use crate::algebra::{BlochVector, SystemTriple, C64, I, ZERO};
use crate::field::CatStateInput;

fn half_sqrt_gamma(g: &SystemTriple) -> f64 {
    0.5 * g.gamma.sqrt()
}

/// Vacuum master-equation drift.
pub fn vacuum_me_drift(b: &BlochVector, g: &SystemTriple) -> BlochVector {
    let (w, k) = (g.omega, g.gamma);
    BlochVector::new(
        -w * b.y - 0.5 * k * b.x,
        w * b.x - 0.5 * k * b.y,
        -k * (1.0 + b.z),
    )
}

pub fn vacuum_hd_fields(b: &BlochVector, g: &SystemTriple) -> FieldDecomposition<BlochVector> {
    let sg = g.gamma.sqrt();
    let (x, y, z) = (b.x, b.y, b.z);
    FieldDecomposition {
        drift: vacuum_me_drift(b, g),
        diffusion: Some(BlochVector::new(
            sg * (1.0 + z - x * x),
            -sg * x * y,
            -sg * (x + z * x),
        )),
        jump: None,
        observation_rate: sg * x,
    }
}

/// Counting filter; every jump lands on the ground state `(0, 0, −1)`.
pub fn vacuum_pd_fields(b: &BlochVector, g: &SystemTriple) -> FieldDecomposition<BlochVector> {
    let nu = 0.5 * g.gamma * (1.0 + b.z);
    FieldDecomposition {
        drift: vacuum_me_drift(b, g),
        diffusion: None,
        jump: Some(JumpMap::new(BlochVector::new(0.0, 0.0, -nu), nu)),
        observation_rate: nu.max(0.0),
    }
}

/// Master-equation part of one block, with the field terms of the cross
/// coupling supplied as `(fx, fy, fz)`.
fn block_drift(b: &Block, g: &SystemTriple, fx: C64, fy: C64, fz: C64) -> Block {
    let (w, k) = (g.omega, g.gamma);
    Block::new(
        ZERO,
        -b.y * w - b.x * (0.5 * k) + fx,
        b.x * w - b.y * (0.5 * k) + fy,
        -(b.c + b.z) * k + fz,
    )
}

/// Homodyne diffusion of one block: the intrinsic `L + L†` part plus the field
/// part `(gc, gx, gy, gz)`, minus the normalization `π(X) K`.
fn block_diffusion(b: &Block, sg: f64, gf: [C64; 4], kk: C64) -> Block {
    Block::new(
        b.x * sg + gf[0] - b.c * kk,
        (b.c + b.z) * sg + gf[1] - b.x * kk,
        gf[2] - b.y * kk,
        -b.x * sg + gf[3] - b.z * kk,
    )
}

/// Fields of the single-photon homodyne filter at field amplitude ξ.
pub fn photon_hd_fields(s: &BlockState, xi: C64, g: &SystemTriple) -> FieldDecomposition<BlockState> {
    let sg = g.gamma.sqrt();
    let xis = xi.conj();
    let b00 = s.get(0, 0);
    let b10 = s.get(1, 0);
    let b01 = b10.conj();
    let b11 = s.get(1, 1);

    let kk = b11.x * sg + b01.c * xi + b10.c * xis;

    let d11 = block_drift(
        &b11,
        g,
        b01.z * xis * sg + b10.z * xi * sg,
        -I * sg * b01.z * xis + I * sg * b10.z * xi,
        -(b01.x - I * b01.y) * xis * sg - (b10.x + I * b10.y) * xi * sg,
    );
    let h11 = block_diffusion(
        &b11,
        sg,
        [
            b01.c * xis + b10.c * xi,
            b01.x * xis + b10.x * xi,
            b01.y * xis + b10.y * xi,
            b01.z * xis + b10.z * xi,
        ],
        kk,
    );

    let d10 = block_drift(
        &b10,
        g,
        b00.z * xis * sg,
        -I * sg * b00.z * xis,
        -(b00.x - I * b00.y) * xis * sg,
    );
    let h10 = block_diffusion(&b10, sg, [b00.c * xis, b00.x * xis, b00.y * xis, b00.z * xis], kk);

    let d00 = block_drift(&b00, g, ZERO, ZERO, ZERO);
    let h00 = block_diffusion(&b00, sg, [ZERO; 4], kk);

    let drift = BlockState::from_blocks(2, vec![d00, d10.conj(), d10, d11]).expect("2x2 layout");
    let diffusion = BlockState::from_blocks(2, vec![h00, h10.conj(), h10, h11]).expect("2x2 layout");
    FieldDecomposition {
        drift,
        diffusion: Some(diffusion),
        jump: None,
        observation_rate: kk.re,
    }
}

/// Fields of the single-photon counting filter at field amplitude ξ.
pub fn photon_pd_fields(s: &BlockState, xi: C64, g: &SystemTriple) -> FieldDecomposition<BlockState> {
    let k = g.gamma;
    let hs = half_sqrt_gamma(g);
    let xis = xi.conj();
    let xi2 = xi.norm_sqr();
    let b00 = s.get(0, 0);
    let b10 = s.get(1, 0);
    let b01 = b10.conj();
    let b11 = s.get(1, 1);

    let drift = photon_hd_fields(s, xi, g).drift;

    let nu = (b11.c + b11.z) * (0.5 * k)
        + (b01.x - I * b01.y) * xis * hs
        + (b10.x + I * b10.y) * xi * hs
        + b00.c * xi2;
    let n11 = Block::new(
        nu,
        (b01.c + b01.z) * xis * hs + (b10.c + b10.z) * xi * hs + b00.x * xi2,
        -I * hs * (b01.c + b01.z) * xis + I * hs * (b10.c + b10.z) * xi + b00.y * xi2,
        -(b11.c + b11.z) * (0.5 * k) - (b01.x - I * b01.y) * xis * hs - (b10.x + I * b10.y) * xi * hs
            + b00.z * xi2,
    );
    let n10 = Block::new(
        (b10.c + b10.z) * (0.5 * k) + (b00.x - I * b00.y) * xis * hs,
        (b00.c + b00.z) * xis * hs,
        -I * hs * (b00.c + b00.z) * xis,
        -(b10.c + b10.z) * (0.5 * k) - (b00.x - I * b00.y) * xis * hs,
    );
    let e00 = (b00.c + b00.z) * (0.5 * k);
    let n00 = Block::new(e00, ZERO, ZERO, -e00);

    let numerator = BlockState::from_blocks(2, vec![n00, n10.conj(), n10, n11]).expect("2x2 layout");
    let jump = JumpMap::new(numerator, nu.re);
    FieldDecomposition {
        drift,
        diffusion: None,
        observation_rate: jump.rate,
        jump: Some(jump),
    }
}

fn cat_drift(s: &BlockState, alpha: &[C64], g: &SystemTriple) -> BlockState {
    let sg = g.gamma.sqrt();
    let n = s.branches();
    let mut out = BlockState::zeros(n);
    for i in 0..n {
        let ais = alpha[i].conj();
        for j in 0..n {
            let aj = alpha[j];
            let b = s.get(i, j);
            out.set(
                i,
                j,
                block_drift(
                    &b,
                    g,
                    b.z * (ais + aj) * sg,
                    -I * sg * b.z * (ais - aj),
                    -(b.x - I * b.y) * ais * sg - (b.x + I * b.y) * aj * sg,
                ),
            );
        }
    }
    out
}

/// Homodyne observation rate `K = Σ_ij π^{ij}(L + L† + S α_j + S† α_i*)`.
pub fn cat_homodyne_rate(s: &BlockState, alpha: &[C64], g: &SystemTriple) -> C64 {
    let sg = g.gamma.sqrt();
    let n = s.branches();
    let mut kk = ZERO;
    for i in 0..n {
        for j in 0..n {
            let b = s.get(i, j);
            kk += b.x * sg + b.c * (alpha[j] + alpha[i].conj());
        }
    }
    kk
}

/// Fields of the cat-state homodyne filter.
pub fn cat_hd_fields(
    s: &BlockState,
    cat: &CatStateInput,
    t: f64,
    g: &SystemTriple,
) -> FieldDecomposition<BlockState> {
    let alpha = cat.amplitudes_at(t);
    let sg = g.gamma.sqrt();
    let n = s.branches();
    let kk = cat_homodyne_rate(s, &alpha, g);
    let mut diffusion = BlockState::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let a = alpha[j] + alpha[i].conj();
            let b = s.get(i, j);
            diffusion.set(i, j, block_diffusion(&b, sg, [b.c * a, b.x * a, b.y * a, b.z * a], kk));
        }
    }
    FieldDecomposition {
        drift: cat_drift(s, &alpha, g),
        diffusion: Some(diffusion),
        jump: None,
        observation_rate: kk.re,
    }
}

/// Fields of the cat-state counting filter.
pub fn cat_pd_fields(
    s: &BlockState,
    cat: &CatStateInput,
    t: f64,
    g: &SystemTriple,
) -> FieldDecomposition<BlockState> {
    let alpha = cat.amplitudes_at(t);
    let k = g.gamma;
    let hs = half_sqrt_gamma(g);
    let n = s.branches();
    let mut numerator = BlockState::zeros(n);
    let mut nu = ZERO;
    for i in 0..n {
        let ais = alpha[i].conj();
        for j in 0..n {
            let aj = alpha[j];
            let b = s.get(i, j);
            let p = ais * aj;
            let cz = b.c + b.z;
            let lowered = (b.x + I * b.y) * aj * hs + (b.x - I * b.y) * ais * hs;
            let nb = Block::new(
                cz * (0.5 * k) + lowered + b.c * p,
                cz * (aj + ais) * hs + b.x * p,
                I * hs * cz * (aj - ais) + b.y * p,
                -cz * (0.5 * k) - lowered + b.z * p,
            );
            nu += nb.c;
            numerator.set(i, j, nb);
        }
    }
    let jump = JumpMap::new(numerator, nu.re);
    FieldDecomposition {
        drift: cat_drift(s, &alpha, g),
        diffusion: None,
        observation_rate: jump.rate,
        jump: Some(jump),
    }
}
