//! Operator-level filter equations evaluated by brute force on the Pauli basis.
//!
//! Nothing here assumes the two-level triple; any valid [`SystemTriple`] works.
//! The qubit fast paths in [`super::qubit`] must agree with these functions.

use super::{Block, BlockState, FieldDecomposition, JumpMap};
use crate::algebra::{commutator, lindblad_generator, pauli, Operator2, Pauli, SystemTriple, C64, ZERO};

const BASIS: [Pauli; 4] = [Pauli::Identity, Pauli::X, Pauli::Y, Pauli::Z];

/// Builds a block from a linear functional evaluated on `I, σx, σy, σz`.
fn on_basis(f: impl Fn(&Operator2) -> C64) -> Block {
    let v: Vec<C64> = BASIS.iter().map(|&p| f(&pauli(p))).collect();
    Block::new(v[0], v[1], v[2], v[3])
}

/// `G^{ij} X` with field amplitudes `ai_conj = α_i*` and `aj = α_j`.
fn coupled_generator(g: &SystemTriple, x: &Operator2, ai_conj: C64, aj: C64) -> Operator2 {
    let (s, l) = (g.s, g.l);
    let sd = s.adjoint();
    let ld = l.adjoint();
    lindblad_generator(g, x)
        + sd * commutator(x, &l) * ai_conj
        + commutator(&ld, x) * s * aj
        + (sd * *x * s - *x) * (ai_conj * aj)
}

fn diffusion_operator(g: &SystemTriple, x: &Operator2, ai_conj: C64, aj: C64) -> Operator2 {
    let (s, l) = (g.s, g.l);
    *x * l + l.adjoint() * *x + *x * s * aj + s.adjoint() * *x * ai_conj
}

fn jump_operator(g: &SystemTriple, x: &Operator2, ai_conj: C64, aj: C64) -> Operator2 {
    let (s, l) = (g.s, g.l);
    let (sd, ld) = (s.adjoint(), l.adjoint());
    ld * *x * l + ld * *x * s * aj + sd * *x * l * ai_conj + sd * *x * s * (ai_conj * aj)
}

fn cat_rate(s: &BlockState, alpha: &[C64], op: impl Fn(C64, C64) -> Operator2) -> C64 {
    let n = s.branches();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += s.get(i, j).expect(&op(alpha[i].conj(), alpha[j]));
        }
    }
    acc
}

pub fn cat_drift(s: &BlockState, alpha: &[C64], g: &SystemTriple) -> BlockState {
    let n = s.branches();
    let mut out = BlockState::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let b = s.get(i, j);
            let (ai, aj) = (alpha[i].conj(), alpha[j]);
            out.set(i, j, on_basis(|x| b.expect(&coupled_generator(g, x, ai, aj))));
        }
    }
    out
}

pub fn cat_hd(s: &BlockState, alpha: &[C64], g: &SystemTriple) -> FieldDecomposition<BlockState> {
    let n = s.branches();
    let kk = cat_rate(s, alpha, |ai, aj| {
        g.l + g.l.adjoint() + g.s * aj + g.s.adjoint() * ai
    });
    let mut diffusion = BlockState::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let b = s.get(i, j);
            let (ai, aj) = (alpha[i].conj(), alpha[j]);
            diffusion.set(
                i,
                j,
                on_basis(|x| b.expect(&diffusion_operator(g, x, ai, aj)) - b.expect(x) * kk),
            );
        }
    }
    FieldDecomposition {
        drift: cat_drift(s, alpha, g),
        diffusion: Some(diffusion),
        jump: None,
        observation_rate: kk.re,
    }
}

pub fn cat_pd(s: &BlockState, alpha: &[C64], g: &SystemTriple) -> FieldDecomposition<BlockState> {
    let n = s.branches();
    let id = Operator2::identity();
    let nu = cat_rate(s, alpha, |ai, aj| jump_operator(g, &id, ai, aj));
    let mut numerator = BlockState::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let b = s.get(i, j);
            let (ai, aj) = (alpha[i].conj(), alpha[j]);
            numerator.set(i, j, on_basis(|x| b.expect(&jump_operator(g, x, ai, aj))));
        }
    }
    let jump = JumpMap::new(numerator, nu.re);
    FieldDecomposition {
        drift: cat_drift(s, alpha, g),
        diffusion: None,
        observation_rate: jump.rate,
        jump: Some(jump),
    }
}

/// Vacuum filter: a single branch with zero field amplitude.
pub fn vacuum_hd(s: &BlockState, g: &SystemTriple) -> FieldDecomposition<BlockState> {
    cat_hd(s, &[ZERO], g)
}

pub fn vacuum_pd(s: &BlockState, g: &SystemTriple) -> FieldDecomposition<BlockState> {
    cat_pd(s, &[ZERO], g)
}

fn photon_drift(s: &BlockState, xi: C64, g: &SystemTriple) -> BlockState {
    let (sm, lm) = (g.s, g.l);
    let (sd, ld) = (sm.adjoint(), lm.adjoint());
    let xis = xi.conj();
    let (b00, b01, b10, b11) = (s.get(0, 0), s.get(0, 1), s.get(1, 0), s.get(1, 1));
    let lindblad = |b: &Block, x: &Operator2| b.expect(&lindblad_generator(g, x));
    let left = |x: &Operator2| sd * commutator(x, &lm);
    let right = |x: &Operator2| commutator(&ld, x) * sm;

    let d11 = on_basis(|x| {
        lindblad(&b11, x)
            + b01.expect(&left(x)) * xis
            + b10.expect(&right(x)) * xi
            + b00.expect(&(sd * *x * sm - *x)) * xi.norm_sqr()
    });
    let d10 = on_basis(|x| lindblad(&b10, x) + b00.expect(&left(x)) * xis);
    let d01 = on_basis(|x| lindblad(&b01, x) + b00.expect(&right(x)) * xi);
    let d00 = on_basis(|x| lindblad(&b00, x));
    BlockState::from_blocks(2, vec![d00, d01, d10, d11]).expect("2x2 layout")
}

pub fn photon_hd(s: &BlockState, xi: C64, g: &SystemTriple) -> FieldDecomposition<BlockState> {
    let (sm, lm) = (g.s, g.l);
    let (sd, ld) = (sm.adjoint(), lm.adjoint());
    let xis = xi.conj();
    let (b00, b01, b10, b11) = (s.get(0, 0), s.get(0, 1), s.get(1, 0), s.get(1, 1));
    let kk = b11.expect(&(lm + ld)) + b01.expect(&sm) * xi + b10.expect(&sd) * xis;
    let own = |b: &Block, x: &Operator2| b.expect(&(*x * lm + ld * *x)) - b.expect(x) * kk;

    let h11 = on_basis(|x| own(&b11, x) + b01.expect(&(sd * *x)) * xis + b10.expect(&(*x * sm)) * xi);
    let h10 = on_basis(|x| own(&b10, x) + b00.expect(&(sd * *x)) * xis);
    let h01 = on_basis(|x| own(&b01, x) + b00.expect(&(*x * sm)) * xi);
    let h00 = on_basis(|x| own(&b00, x));
    FieldDecomposition {
        drift: photon_drift(s, xi, g),
        diffusion: Some(BlockState::from_blocks(2, vec![h00, h01, h10, h11]).expect("2x2 layout")),
        jump: None,
        observation_rate: kk.re,
    }
}

pub fn photon_pd(s: &BlockState, xi: C64, g: &SystemTriple) -> FieldDecomposition<BlockState> {
    let (sm, lm) = (g.s, g.l);
    let (sd, ld) = (sm.adjoint(), lm.adjoint());
    let xis = xi.conj();
    let (b00, b01, b10, b11) = (s.get(0, 0), s.get(0, 1), s.get(1, 0), s.get(1, 1));

    let n11 = on_basis(|x| {
        b11.expect(&(ld * *x * lm))
            + b01.expect(&(sd * *x * lm)) * xis
            + b10.expect(&(ld * *x * sm)) * xi
            + b00.expect(&(sd * *x * sm)) * xi.norm_sqr()
    });
    let n10 = on_basis(|x| b10.expect(&(ld * *x * lm)) + b00.expect(&(sd * *x * lm)) * xis);
    let n01 = on_basis(|x| b01.expect(&(ld * *x * lm)) + b00.expect(&(ld * *x * sm)) * xi);
    let n00 = on_basis(|x| b00.expect(&(ld * *x * lm)));
    let nu = n11.c;
    let jump = JumpMap::new(
        BlockState::from_blocks(2, vec![n00, n01, n10, n11]).expect("2x2 layout"),
        nu.re,
    );
    FieldDecomposition {
        drift: photon_drift(s, xi, g),
        diffusion: None,
        observation_rate: jump.rate,
        jump: Some(jump),
    }
}
