use std::ops::Range;

use super::apply::{direction, DIRECTIONS};
use super::field::{LINK_LEN, SPINOR_LEN};
use super::geometry::LatticeGeometry;
use crate::cache_sim::{Access, AddressMap, TraceSource};

pub const TAG_U: u16 = 0;
pub const TAG_I: u16 = 1;
pub const TAG_O: u16 = 2;

/// Lazily generated accesses of one operator application: each core takes
/// a contiguous block of the collapsed 4d loop over virtual sites and runs
/// the `s` loop innermost.
#[derive(Debug, Clone)]
pub struct DwTrace {
    pub geom: LatticeGeometry,
    u_base: u64,
    i_base: u64,
    o_base: u64,
    neighbors: Vec<[u32; DIRECTIONS]>,
    blocks: Vec<Range<usize>>,
}

impl DwTrace {
    pub fn new(geom: &LatticeGeometry, cores: usize) -> Self {
        let cores = cores.max(1);
        let n = geom.vsites();
        let mut map = AddressMap::default();
        let u_base = map.alloc((n * DIRECTIONS) as u64 * Self::link_bytes(geom));
        let i_base = map.alloc((n * geom.ls) as u64 * Self::spinor_bytes(geom));
        let o_base = map.alloc((n * geom.ls) as u64 * Self::spinor_bytes(geom));
        let neighbors = (0..n)
            .map(|v| {
                std::array::from_fn(|dir| {
                    let (mu, fwd) = direction(dir);
                    geom.vneighbor(v, mu, fwd).0 as u32
                })
            })
            .collect();
        let blocks = (0..cores).map(|c| c * n / cores..(c + 1) * n / cores).collect();
        DwTrace {
            geom: *geom,
            u_base,
            i_base,
            o_base,
            neighbors,
            blocks,
        }
    }

    /// Bytes of one link matrix for all lanes.
    pub fn link_bytes(geom: &LatticeGeometry) -> u64 {
        (geom.vl_sites() * LINK_LEN * 16) as u64
    }

    /// Bytes of one spinor for all lanes.
    pub fn spinor_bytes(geom: &LatticeGeometry) -> u64 {
        (geom.vl_sites() * SPINOR_LEN * 16) as u64
    }

    pub fn block(&self, core: usize) -> Range<usize> {
        self.blocks[core].clone()
    }

    pub fn lups(&self) -> usize {
        self.geom.lups()
    }
}

impl TraceSource for DwTrace {
    fn cores(&self) -> usize {
        self.blocks.len()
    }

    fn tags(&self) -> Vec<String> {
        vec!["U".into(), "I".into(), "O".into()]
    }

    fn stream(&self, core: usize) -> Box<dyn Iterator<Item = Access> + '_> {
        let block = self.blocks[core].clone();
        Box::new(DwStream {
            t: self,
            v: block.start,
            end: block.end,
            s: 0,
            step: 0,
        })
    }
}

struct DwStream<'a> {
    t: &'a DwTrace,
    v: usize,
    end: usize,
    s: usize,
    /// 0..16 alternate link and neighbor spinor reads, 16 writes the output.
    step: usize,
}

impl Iterator for DwStream<'_> {
    type Item = Access;

    fn next(&mut self) -> Option<Access> {
        if self.v >= self.end {
            return None;
        }
        let t = self.t;
        let ls = t.geom.ls;
        let lb = DwTrace::link_bytes(&t.geom);
        let sb = DwTrace::spinor_bytes(&t.geom);
        let a = if self.step == 2 * DIRECTIONS {
            let idx = (self.v * ls + self.s) as u64;
            Access::write(t.o_base + idx * sb, sb as u32, TAG_O)
        } else if self.step % 2 == 0 {
            let idx = (self.v * DIRECTIONS + self.step / 2) as u64;
            Access::read(t.u_base + idx * lb, lb as u32, TAG_U)
        } else {
            let nb = t.neighbors[self.v][self.step / 2] as usize;
            let idx = (nb * ls + self.s) as u64;
            Access::read(t.i_base + idx * sb, sb as u32, TAG_I)
        };
        self.step += 1;
        if self.step > 2 * DIRECTIONS {
            self.step = 0;
            self.s += 1;
            if self.s == ls {
                self.s = 0;
                self.v += 1;
            }
        }
        Some(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache_sim::{simulate, SimConfig};
    use crate::lc_dw::Layout;

    #[test]
    fn event_counts_and_blocks() {
        let g = LatticeGeometry::new([4, 4, 4, 4], 2, Layout::Riri).unwrap();
        let t = DwTrace::new(&g, 3);
        let total: usize = (0..3).map(|c| t.stream(c).count()).sum();
        assert_eq!(total, g.vsites() * g.ls * 17);
        assert_eq!(t.block(0).start, 0);
        assert_eq!(t.block(2).end, g.vsites());
    }

    #[test]
    fn everything_fits_gives_compulsory_traffic() {
        let g = LatticeGeometry::new([4, 4, 4, 4], 2, Layout::Riri).unwrap();
        let t = DwTrace::new(&g, 1);
        let cfg = SimConfig::new(256, 1 << 20, 8 << 20, 12);
        let r = simulate(&t, &cfg).unwrap();
        let spinors = (g.lups() * 192) as u64;
        let links = (g.v4() * 8 * 144) as u64;
        assert_eq!(r.l2_mem.load_bytes, links + 2 * spinors);
        assert_eq!(r.l2_mem.store_bytes, spinors);
    }
}
