//! Euclidean gamma matrices in a chiral basis.

use num_complex::Complex64;

const O: Complex64 = Complex64::new(0.0, 0.0);
const P: Complex64 = Complex64::new(1.0, 0.0);
const M: Complex64 = Complex64::new(-1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
const J: Complex64 = Complex64::new(0.0, -1.0);

pub type Gamma = [[Complex64; 4]; 4];

/// `GAMMA[mu]` for mu = x, y, z, t.
pub const GAMMA: [Gamma; 4] = [
    [[O, O, O, I], [O, O, I, O], [O, J, O, O], [J, O, O, O]],
    [[O, O, O, M], [O, O, P, O], [O, P, O, O], [M, O, O, O]],
    [[O, O, I, O], [O, O, O, J], [J, O, O, O], [O, I, O, O]],
    [[O, O, P, O], [O, O, O, P], [P, O, O, O], [O, P, O, O]],
];

/// A unit phase 1, -1, i or -i.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    One,
    MinusOne,
    I,
    MinusI,
}

impl Phase {
    pub fn of(c: Complex64) -> Option<Phase> {
        match (c.re, c.im) {
            (r, i) if r == 1.0 && i == 0.0 => Some(Phase::One),
            (r, i) if r == -1.0 && i == 0.0 => Some(Phase::MinusOne),
            (r, i) if r == 0.0 && i == 1.0 => Some(Phase::I),
            (r, i) if r == 0.0 && i == -1.0 => Some(Phase::MinusI),
            _ => None,
        }
    }

    pub fn neg(self) -> Phase {
        match self {
            Phase::One => Phase::MinusOne,
            Phase::MinusOne => Phase::One,
            Phase::I => Phase::MinusI,
            Phase::MinusI => Phase::I,
        }
    }

    pub fn value(self) -> Complex64 {
        match self {
            Phase::One => P,
            Phase::MinusOne => M,
            Phase::I => I,
            Phase::MinusI => J,
        }
    }
}

/// Sparse form of one gamma matrix: row `r` has its single nonzero in
/// column `col[r]` with value `phase[r]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaPerm {
    pub col: [usize; 4],
    pub phase: [Phase; 4],
}

pub fn gamma_perm(mu: usize) -> GammaPerm {
    let g = &GAMMA[mu];
    let mut col = [0; 4];
    let mut phase = [Phase::One; 4];
    for r in 0..4 {
        let nz: Vec<usize> = (0..4).filter(|&c| g[r][c] != O).collect();
        assert_eq!(nz.len(), 1, "gamma rows have one nonzero");
        col[r] = nz[0];
        phase[r] = Phase::of(g[r][nz[0]]).expect("unit phase");
    }
    GammaPerm { col, phase }
}

/// `1 + sign * gamma_mu` as a dense matrix.
pub fn one_plus(mu: usize, sign: f64) -> Gamma {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let id = if r == c { P } else { O };
            id + GAMMA[mu][r][c] * sign
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &Gamma, b: &Gamma) -> Gamma {
        std::array::from_fn(|r| std::array::from_fn(|c| (0..4).map(|k| a[r][k] * b[k][c]).sum()))
    }

    #[test]
    fn clifford_algebra() {
        for mu in 0..4 {
            for nu in 0..4 {
                let ab = mul(&GAMMA[mu], &GAMMA[nu]);
                let ba = mul(&GAMMA[nu], &GAMMA[mu]);
                for r in 0..4 {
                    for c in 0..4 {
                        let want = if mu == nu && r == c { 2.0 } else { 0.0 };
                        assert_eq!(ab[r][c] + ba[r][c], Complex64::new(want, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn hermitian() {
        for g in &GAMMA {
            for r in 0..4 {
                for c in 0..4 {
                    assert_eq!(g[r][c], g[c][r].conj());
                }
            }
        }
    }

    #[test]
    fn chiral_block_structure() {
        for mu in 0..4 {
            let p = gamma_perm(mu);
            for r in 0..4 {
                assert_eq!(r < 2, p.col[r] >= 2);
                assert_eq!(p.col[p.col[r]], r);
            }
        }
    }

    #[test]
    fn projector_has_rank_two() {
        // (1 + g)/2 squared equals itself
        for mu in 0..4 {
            for sign in [1.0, -1.0] {
                let a = one_plus(mu, sign);
                let a2 = mul(&a, &a);
                for r in 0..4 {
                    for c in 0..4 {
                        assert_eq!(a2[r][c], a[r][c] * 2.0);
                    }
                }
            }
        }
    }
}
