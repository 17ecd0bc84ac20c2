//! Portable stand-ins for 512-bit complex vectors in the two layouts.

use num_complex::Complex64;

use super::gamma::Phase;

/// One complex number per lattice site for `LANES` sites.
pub trait LaneVec: Copy + Send + Sync {
    const LANES: usize;
    /// Doubles occupied in memory.
    const DOUBLES: usize = 2 * Self::LANES;

    /// Positions of the real and imaginary part of `lane` in memory.
    fn offsets(lane: usize) -> (usize, usize);
    fn zero() -> Self;
    fn load(src: &[f64]) -> Self;
    fn store(self, dst: &mut [f64]);
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    /// Lanewise complex product.
    fn cmul(self, o: Self) -> Self;
    fn mul_i(self) -> Self;
    fn neg(self) -> Self;
    /// `out[l] = self[l ^ mask]`.
    fn permute(self, mask: usize) -> Self;

    fn fma(self, a: Self, b: Self) -> Self {
        self.add(a.cmul(b))
    }

    fn phase(self, p: Phase) -> Self {
        match p {
            Phase::One => self,
            Phase::MinusOne => self.neg(),
            Phase::I => self.mul_i(),
            Phase::MinusI => self.mul_i().neg(),
        }
    }

    fn lane(src: &[f64], lane: usize) -> Complex64 {
        let (r, i) = Self::offsets(lane);
        Complex64::new(src[r], src[i])
    }

    fn set_lane(dst: &mut [f64], lane: usize, z: Complex64) {
        let (r, i) = Self::offsets(lane);
        dst[r] = z.re;
        dst[i] = z.im;
    }
}

/// `[re0, im0, re1, im1, ...]`, four sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Riri4(pub [f64; 8]);

/// `[re0..re7, im0..im7]`, eight sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rrii8(pub [f64; 16]);

impl LaneVec for Riri4 {
    const LANES: usize = 4;

    fn offsets(lane: usize) -> (usize, usize) {
        (2 * lane, 2 * lane + 1)
    }

    fn zero() -> Self {
        Riri4([0.0; 8])
    }

    fn load(src: &[f64]) -> Self {
        let mut v = [0.0; 8];
        v.copy_from_slice(&src[..8]);
        Riri4(v)
    }

    fn store(self, dst: &mut [f64]) {
        dst[..8].copy_from_slice(&self.0);
    }

    fn add(self, o: Self) -> Self {
        Riri4(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }

    fn sub(self, o: Self) -> Self {
        Riri4(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }

    fn cmul(self, o: Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let mut v = [0.0; 8];
        for l in 0..4 {
            let (ar, ai, br, bi) = (a[2 * l], a[2 * l + 1], b[2 * l], b[2 * l + 1]);
            v[2 * l] = ar * br - ai * bi;
            v[2 * l + 1] = ar * bi + ai * br;
        }
        Riri4(v)
    }

    fn mul_i(self) -> Self {
        let a = &self.0;
        Riri4(std::array::from_fn(|k| if k % 2 == 0 { -a[k + 1] } else { a[k - 1] }))
    }

    fn neg(self) -> Self {
        Riri4(self.0.map(|x| -x))
    }

    fn permute(self, mask: usize) -> Self {
        if mask == 0 {
            return self;
        }
        Riri4(std::array::from_fn(|k| self.0[2 * ((k / 2) ^ mask) + k % 2]))
    }
}

impl LaneVec for Rrii8 {
    const LANES: usize = 8;

    fn offsets(lane: usize) -> (usize, usize) {
        (lane, 8 + lane)
    }

    fn zero() -> Self {
        Rrii8([0.0; 16])
    }

    fn load(src: &[f64]) -> Self {
        let mut v = [0.0; 16];
        v.copy_from_slice(&src[..16]);
        Rrii8(v)
    }

    fn store(self, dst: &mut [f64]) {
        dst[..16].copy_from_slice(&self.0);
    }

    fn add(self, o: Self) -> Self {
        Rrii8(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }

    fn sub(self, o: Self) -> Self {
        Rrii8(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }

    fn cmul(self, o: Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let mut v = [0.0; 16];
        for l in 0..8 {
            v[l] = a[l] * b[l] - a[8 + l] * b[8 + l];
            v[8 + l] = a[l] * b[8 + l] + a[8 + l] * b[l];
        }
        Rrii8(v)
    }

    fn mul_i(self) -> Self {
        let a = &self.0;
        Rrii8(std::array::from_fn(|k| if k < 8 { -a[k + 8] } else { a[k - 8] }))
    }

    fn neg(self) -> Self {
        Rrii8(self.0.map(|x| -x))
    }

    fn permute(self, mask: usize) -> Self {
        if mask == 0 {
            return self;
        }
        Rrii8(std::array::from_fn(|k| self.0[(k & 8) | ((k & 7) ^ mask)]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check<V: LaneVec>() {
        let a_c: Vec<Complex64> = (0..V::LANES)
            .map(|l| Complex64::new(l as f64 + 0.5, -(l as f64) * 2.0))
            .collect();
        let b_c: Vec<Complex64> = (0..V::LANES)
            .map(|l| Complex64::new(1.0 - l as f64, 0.25 * l as f64))
            .collect();
        let mut a_m = vec![0.0; V::DOUBLES];
        let mut b_m = vec![0.0; V::DOUBLES];
        for l in 0..V::LANES {
            V::set_lane(&mut a_m, l, a_c[l]);
            V::set_lane(&mut b_m, l, b_c[l]);
        }
        let a = V::load(&a_m);
        let b = V::load(&b_m);
        let mut out = vec![0.0; V::DOUBLES];
        let i = Complex64::new(0.0, 1.0);
        let cases: Vec<(V, Box<dyn Fn(usize) -> Complex64>)> = vec![
            (a.add(b), Box::new(|l| a_c[l] + b_c[l])),
            (a.sub(b), Box::new(|l| a_c[l] - b_c[l])),
            (a.cmul(b), Box::new(|l| a_c[l] * b_c[l])),
            (a.mul_i(), Box::new(|l| a_c[l] * i)),
            (a.neg(), Box::new(|l| -a_c[l])),
            (a.permute(1), Box::new(|l| a_c[l ^ 1])),
            (a.permute(3), Box::new(|l| a_c[l ^ 3])),
            (a.phase(Phase::MinusI), Box::new(|l| -a_c[l] * i)),
        ];
        for (v, want) in cases {
            v.store(&mut out);
            for l in 0..V::LANES {
                assert_eq!(V::lane(&out, l), want(l));
            }
        }
    }

    #[test]
    fn riri_ops() {
        check::<Riri4>();
    }

    #[test]
    fn rrii_ops() {
        check::<Rrii8>();
    }

    #[test]
    fn memory_layouts() {
        assert_eq!(Riri4::offsets(1), (2, 3));
        assert_eq!(Rrii8::offsets(1), (1, 9));
    }
}
