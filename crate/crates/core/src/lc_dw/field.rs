use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::LatticeGeometry;
use crate::error::DwError;

/// Spinor-color field `psi(n, s)[alpha][a]`, stored with the color index
/// fastest, then spin, then `s`, then the lexicographic 4d site.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionField {
    pub v4: usize,
    pub ls: usize,
    pub data: Vec<Complex64>,
}

/// Complex numbers per site and `s`.
pub const SPINOR_LEN: usize = 12;
/// Complex numbers per link matrix.
pub const LINK_LEN: usize = 9;

impl FermionField {
    pub fn zeros(geom: &LatticeGeometry) -> Self {
        FermionField {
            v4: geom.v4(),
            ls: geom.ls,
            data: vec![Complex64::new(0.0, 0.0); geom.lups() * SPINOR_LEN],
        }
    }

    pub fn random(geom: &LatticeGeometry, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = Self::zeros(geom);
        for z in &mut f.data {
            *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        f
    }

    pub fn index(&self, site: usize, s: usize, alpha: usize, a: usize) -> usize {
        ((site * self.ls + s) * 4 + alpha) * 3 + a
    }

    pub fn spinor(&self, site: usize, s: usize) -> &[Complex64] {
        let i = self.index(site, s, 0, 0);
        &self.data[i..i + SPINOR_LEN]
    }

    pub fn bytes(&self) -> usize {
        self.data.len() * 16
    }

    pub fn conforms(&self, geom: &LatticeGeometry) -> Result<(), DwError> {
        if self.v4 != geom.v4() || self.ls != geom.ls || self.data.len() != geom.lups() * SPINOR_LEN {
            return Err(DwError::Mismatch(format!(
                "fermion field of {} sites x {} does not fit {geom}",
                self.v4, self.ls
            )));
        }
        Ok(())
    }

    /// Real vector with interleaved real and imaginary parts.
    pub fn to_real(&self) -> Vec<f64> {
        self.data.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_real(geom: &LatticeGeometry, v: &[f64]) -> Result<Self, DwError> {
        let mut f = Self::zeros(geom);
        if v.len() != 2 * f.data.len() {
            return Err(DwError::Mismatch(format!(
                "real vector of length {} for {} complex entries",
                v.len(),
                f.data.len()
            )));
        }
        for (z, p) in f.data.iter_mut().zip(v.chunks_exact(2)) {
            *z = Complex64::new(p[0], p[1]);
        }
        Ok(f)
    }

    pub fn axpby(&self, a: Complex64, b: Complex64, other: &FermionField) -> FermionField {
        FermionField {
            v4: self.v4,
            ls: self.ls,
            data: self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    /// Largest elementwise difference relative to the largest magnitude of `self`.
    pub fn rel_diff(&self, other: &FermionField) -> f64 {
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        diff / scale
    }
}

/// Link matrices `U_mu(n)`, row-major, four per lexicographic site.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    pub v4: usize,
    pub data: Vec<Complex64>,
}

impl GaugeField {
    pub fn zeros(geom: &LatticeGeometry) -> Self {
        GaugeField {
            v4: geom.v4(),
            data: vec![Complex64::new(0.0, 0.0); geom.v4() * 4 * LINK_LEN],
        }
    }

    pub fn identity(geom: &LatticeGeometry) -> Self {
        let mut g = Self::zeros(geom);
        for link in g.data.chunks_exact_mut(LINK_LEN) {
            for a in 0..3 {
                link[4 * a] = Complex64::new(1.0, 0.0);
            }
        }
        g
    }

    /// Entries uniform in the unit square; not unitary.
    pub fn random(geom: &LatticeGeometry, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Self::zeros(geom);
        for z in &mut g.data {
            *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        g
    }

    pub fn link(&self, site: usize, mu: usize) -> &[Complex64] {
        let i = (site * 4 + mu) * LINK_LEN;
        &self.data[i..i + LINK_LEN]
    }

    pub fn conforms(&self, geom: &LatticeGeometry) -> Result<(), DwError> {
        if self.v4 != geom.v4() || self.data.len() != geom.v4() * 4 * LINK_LEN {
            return Err(DwError::Mismatch(format!(
                "gauge field of {} sites does not fit {geom}",
                self.v4
            )));
        }
        Ok(())
    }
}
