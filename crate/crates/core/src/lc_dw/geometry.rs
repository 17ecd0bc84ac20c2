use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DwError;

/// SIMD data layout of complex numbers inside a 512-bit vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Interleaved real/imaginary pairs, 4 sites per vector.
    Riri,
    /// Eight real parts followed by eight imaginary parts, 8 sites per vector.
    Rrii,
}

impl Layout {
    pub fn vl_sites(self) -> usize {
        match self {
            Layout::Riri => 4,
            Layout::Rrii => 8,
        }
    }

    /// Dimensions (0 = x .. 3 = t) split in half to form SIMD lanes.
    pub fn cut_dims(self) -> &'static [usize] {
        match self {
            Layout::Riri => &[2, 3],
            Layout::Rrii => &[1, 2, 3],
        }
    }

    /// Extra factor in the vectorized x and y thresholds.
    pub fn d(self) -> f64 {
        match self {
            Layout::Riri => 1.0,
            Layout::Rrii => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layout::Riri => "riri",
            Layout::Rrii => "rrii",
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layout {
    type Err = DwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "riri" => Ok(Layout::Riri),
            "rrii" => Ok(Layout::Rrii),
            _ => Err(DwError::Geometry(format!(
                "unknown layout `{s}` (expected riri or rrii)"
            ))),
        }
    }
}

/// Periodic 4d lattice `dims = [Lx, Ly, Lz, Lt]` with `ls` sites in the
/// fifth dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub dims: [usize; 4],
    pub ls: usize,
    pub layout: Layout,
}

impl LatticeGeometry {
    pub fn new(dims: [usize; 4], ls: usize, layout: Layout) -> Result<Self, DwError> {
        let g = LatticeGeometry { dims, ls, layout };
        g.validate()?;
        Ok(g)
    }

    /// Parse `"Lx,Ly,Lz,Lt,Ls"`.
    pub fn parse(spec: &str, layout: Layout) -> Result<Self, DwError> {
        let parts: Vec<usize> = spec
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| DwError::Geometry(format!("`{spec}`: {e}")))?;
        if parts.len() != 5 {
            return Err(DwError::Geometry(format!(
                "`{spec}`: expected five comma-separated extents Lx,Ly,Lz,Lt,Ls"
            )));
        }
        Self::new([parts[0], parts[1], parts[2], parts[3]], parts[4], layout)
    }

    pub fn validate(&self) -> Result<(), DwError> {
        const NAMES: [&str; 4] = ["Lx", "Ly", "Lz", "Lt"];
        for (d, &l) in self.dims.iter().enumerate() {
            if l < 2 {
                return Err(DwError::Geometry(format!("{} = {l} must be at least 2", NAMES[d])));
            }
            if self.layout.cut_dims().contains(&d) && l % 2 != 0 {
                return Err(DwError::Geometry(format!(
                    "{} = {l} must be even for the {} layout",
                    NAMES[d], self.layout
                )));
            }
        }
        if self.ls == 0 {
            return Err(DwError::Geometry("Ls must be at least 1".into()));
        }
        let v5 = self.dims.iter().product::<usize>().checked_mul(self.ls);
        if v5.is_none_or(|v| v > u32::MAX as usize) {
            return Err(DwError::Geometry("lattice volume exceeds 2^32 sites".into()));
        }
        Ok(())
    }

    pub fn with_layout(mut self, layout: Layout) -> Result<Self, DwError> {
        self.layout = layout;
        self.validate()?;
        Ok(self)
    }

    pub fn vl_sites(&self) -> usize {
        self.layout.vl_sites()
    }

    /// Which of x, y, z, t are halved for vectorization.
    pub fn partition_cuts(&self) -> [bool; 4] {
        let mut cuts = [false; 4];
        for &d in self.layout.cut_dims() {
            cuts[d] = true;
        }
        cuts
    }

    /// Extents of one SIMD partition.
    pub fn local_dims(&self) -> [usize; 4] {
        let cuts = self.partition_cuts();
        std::array::from_fn(|d| if cuts[d] { self.dims[d] / 2 } else { self.dims[d] })
    }

    pub fn v4(&self) -> usize {
        self.dims.iter().product()
    }

    /// Lattice site updates per operator application.
    pub fn lups(&self) -> usize {
        self.v4() * self.ls
    }

    /// Number of SIMD (virtual) 4d sites.
    pub fn vsites(&self) -> usize {
        self.v4() / self.vl_sites()
    }

    pub fn site_lex(&self, c: [usize; 4]) -> usize {
        let [lx, ly, lz, _] = self.dims;
        c[0] + lx * (c[1] + ly * (c[2] + lz * c[3]))
    }

    pub fn site_coords(&self, lex: usize) -> [usize; 4] {
        lex_coords(lex, self.dims)
    }

    /// Virtual sites run with t outermost and x innermost.
    pub fn vsite_lex(&self, c: [usize; 4]) -> usize {
        let [lx, ly, lz, _] = self.local_dims();
        c[0] + lx * (c[1] + ly * (c[2] + lz * c[3]))
    }

    pub fn vsite_coords(&self, v: usize) -> [usize; 4] {
        lex_coords(v, self.local_dims())
    }

    /// Global coordinates of `lane` of virtual site `v`.
    pub fn site_of(&self, v: usize, lane: usize) -> [usize; 4] {
        let local = self.local_dims();
        let mut c = self.vsite_coords(v);
        for (bit, &d) in self.layout.cut_dims().iter().enumerate() {
            if lane >> bit & 1 == 1 {
                c[d] += local[d];
            }
        }
        c
    }

    /// Virtual site and lane holding global site `c`.
    pub fn vsite_of(&self, c: [usize; 4]) -> (usize, usize) {
        let local = self.local_dims();
        let mut lc = c;
        let mut lane = 0;
        for (bit, &d) in self.layout.cut_dims().iter().enumerate() {
            if c[d] >= local[d] {
                lc[d] -= local[d];
                lane |= 1 << bit;
            }
        }
        (self.vsite_lex(lc), lane)
    }

    /// Neighbor of virtual site `v` one step along `mu` (forward if `fwd`),
    /// with the lane mask to apply when the step crosses a partition edge.
    pub fn vneighbor(&self, v: usize, mu: usize, fwd: bool) -> (usize, usize) {
        let local = self.local_dims();
        let mut c = self.vsite_coords(v);
        let l = local[mu];
        let (next, wrapped) = if fwd {
            if c[mu] + 1 == l { (0, true) } else { (c[mu] + 1, false) }
        } else if c[mu] == 0 {
            (l - 1, true)
        } else {
            (c[mu] - 1, false)
        };
        c[mu] = next;
        let mask = match self.layout.cut_dims().iter().position(|&d| d == mu) {
            Some(bit) if wrapped => 1 << bit,
            _ => 0,
        };
        (self.vsite_lex(c), mask)
    }

    /// Global neighbor of site `c` along `mu`.
    pub fn neighbor(&self, c: [usize; 4], mu: usize, fwd: bool) -> [usize; 4] {
        let mut n = c;
        let l = self.dims[mu];
        n[mu] = if fwd { (c[mu] + 1) % l } else { (c[mu] + l - 1) % l };
        n
    }
}

impl fmt::Display for LatticeGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z, t] = self.dims;
        write!(f, "{x}x{y}x{z}x{t}x{} {}", self.ls, self.layout)
    }
}

fn lex_coords(mut lex: usize, dims: [usize; 4]) -> [usize; 4] {
    let mut c = [0; 4];
    for d in 0..4 {
        c[d] = lex % dims[d];
        lex /= dims[d];
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanes_cover_the_lattice_once() {
        for layout in [Layout::Riri, Layout::Rrii] {
            let g = LatticeGeometry::new([2, 4, 6, 4], 2, layout).unwrap();
            let mut seen = vec![false; g.v4()];
            for v in 0..g.vsites() {
                for lane in 0..g.vl_sites() {
                    let c = g.site_of(v, lane);
                    assert_eq!(g.vsite_of(c), (v, lane));
                    let lex = g.site_lex(c);
                    assert!(!seen[lex]);
                    seen[lex] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn virtual_neighbor_agrees_with_global() {
        for layout in [Layout::Riri, Layout::Rrii] {
            let g = LatticeGeometry::new([3, 4, 2, 6], 1, layout).unwrap();
            for v in 0..g.vsites() {
                for mu in 0..4 {
                    for fwd in [true, false] {
                        let (nv, mask) = g.vneighbor(v, mu, fwd);
                        for lane in 0..g.vl_sites() {
                            // lane `lane` of the result reads lane `lane ^ mask` of nv
                            let want = g.neighbor(g.site_of(v, lane), mu, fwd);
                            assert_eq!(g.site_of(nv, lane ^ mask), want);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_odd_cut_dims() {
        assert!(LatticeGeometry::new([4, 4, 3, 4], 2, Layout::Riri).is_err());
        assert!(LatticeGeometry::new([4, 3, 4, 4], 2, Layout::Riri).is_ok());
        assert!(LatticeGeometry::new([4, 3, 4, 4], 2, Layout::Rrii).is_err());
        assert!(LatticeGeometry::new([1, 4, 4, 4], 2, Layout::Riri).is_err());
        assert!(LatticeGeometry::new([4, 4, 4, 4], 0, Layout::Riri).is_err());
    }

    #[test]
    fn parse_geometry() {
        let g = LatticeGeometry::parse("24,24,24,24,8", Layout::Riri).unwrap();
        assert_eq!(g.dims, [24; 4]);
        assert_eq!(g.ls, 8);
        assert_eq!(g.local_dims(), [24, 24, 12, 12]);
        assert_eq!(g.with_layout(Layout::Rrii).unwrap().local_dims(), [24, 12, 12, 12]);
        assert!(LatticeGeometry::parse("24,24,24,8", Layout::Riri).is_err());
        assert!(LatticeGeometry::parse("a,24,24,24,8", Layout::Riri).is_err());
    }
}
