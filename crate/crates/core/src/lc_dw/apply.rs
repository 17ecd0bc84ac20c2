use num_complex::Complex64;
use rayon::prelude::*;

use super::field::{FermionField, GaugeField, LINK_LEN, SPINOR_LEN};
use super::gamma::{gamma_perm, one_plus, GammaPerm};
use super::geometry::{Layout, LatticeGeometry};
use super::simd::{LaneVec, Riri4, Rrii8};
use crate::error::DwError;
use crate::sparse::CrsMatrix;

/// Directions 0..4 hop forward along x, y, z, t; 4..8 hop backward.
pub const DIRECTIONS: usize = 8;

pub fn direction(dir: usize) -> (usize, bool) {
    (dir % 4, dir < 4)
}

/// Upper bound on the real dimension accepted by [`dw_matrix`].
pub const MATRIX_DIM_LIMIT: usize = 100_000;

/// Hopping operator with the gauge field packed for one SIMD layout.
///
/// The packed gauge field stores eight link matrices per virtual site:
/// `U_mu(n)` for the forward hops and `U_mu(n - mu)^dagger` for the
/// backward hops, so the kernel never conjugates.
#[derive(Debug, Clone)]
pub struct DwOperator {
    pub geom: LatticeGeometry,
    gauge: Vec<f64>,
    neighbors: Vec<[(u32, u8); DIRECTIONS]>,
    perms: [GammaPerm; 4],
}

impl DwOperator {
    pub fn new(u: &GaugeField, geom: &LatticeGeometry) -> Result<Self, DwError> {
        geom.validate()?;
        u.conforms(geom)?;
        let gauge = match geom.layout {
            Layout::Riri => pack_gauge::<Riri4>(u, geom),
            Layout::Rrii => pack_gauge::<Rrii8>(u, geom),
        };
        let neighbors = (0..geom.vsites())
            .map(|v| {
                std::array::from_fn(|dir| {
                    let (mu, fwd) = direction(dir);
                    let (nb, mask) = geom.vneighbor(v, mu, fwd);
                    (nb as u32, mask as u8)
                })
            })
            .collect();
        Ok(DwOperator {
            geom: *geom,
            gauge,
            neighbors,
            perms: std::array::from_fn(gamma_perm),
        })
    }

    pub fn pack(&self, psi: &FermionField) -> Result<Vec<f64>, DwError> {
        psi.conforms(&self.geom)?;
        Ok(match self.geom.layout {
            Layout::Riri => pack_fermion::<Riri4>(psi, &self.geom),
            Layout::Rrii => pack_fermion::<Rrii8>(psi, &self.geom),
        })
    }

    pub fn unpack(&self, packed: &[f64]) -> FermionField {
        match self.geom.layout {
            Layout::Riri => unpack_fermion::<Riri4>(packed, &self.geom),
            Layout::Rrii => unpack_fermion::<Rrii8>(packed, &self.geom),
        }
    }

    pub fn apply(&self, psi: &FermionField) -> Result<FermionField, DwError> {
        let input = self.pack(psi)?;
        let mut out = vec![0.0; input.len()];
        self.apply_packed(&input, &mut out)?;
        Ok(self.unpack(&out))
    }

    /// Apply to fields already in the packed layout.
    pub fn apply_packed(&self, input: &[f64], out: &mut [f64]) -> Result<(), DwError> {
        let want = self.geom.lups() * SPINOR_LEN * 2;
        if input.len() != want || out.len() != want {
            return Err(DwError::Mismatch(format!(
                "packed fields of {} and {} doubles, expected {want}",
                input.len(),
                out.len()
            )));
        }
        match self.geom.layout {
            Layout::Riri => self.run::<Riri4>(input, out),
            Layout::Rrii => self.run::<Rrii8>(input, out),
        }
        Ok(())
    }

    fn run<V: LaneVec>(&self, input: &[f64], out: &mut [f64]) {
        let site_len = self.geom.ls * SPINOR_LEN * V::DOUBLES;
        out.par_chunks_mut(site_len)
            .enumerate()
            .for_each(|(v, chunk)| self.site::<V>(v, input, chunk));
    }

    fn site<V: LaneVec>(&self, v: usize, input: &[f64], out: &mut [f64]) {
        let d = V::DOUBLES;
        let ls = self.geom.ls;
        let links = &self.gauge[v * DIRECTIONS * LINK_LEN * d..];
        for s in 0..ls {
            let mut acc = [[V::zero(); 3]; 4];
            for dir in 0..DIRECTIONS {
                let (mu, fwd) = direction(dir);
                let gp = &self.perms[mu];
                let (nb, mask) = self.neighbors[v][dir];
                let spinor = &input[(nb as usize * ls + s) * SPINOR_LEN * d..];
                let elem = |alpha: usize, a: usize| V::load(&spinor[(alpha * 3 + a) * d..]);

                // project onto two spin components, then align lanes
                let mut h = [[V::zero(); 3]; 2];
                for (k, hk) in h.iter_mut().enumerate() {
                    let ph = if fwd { gp.phase[k] } else { gp.phase[k].neg() };
                    for (a, x) in hk.iter_mut().enumerate() {
                        *x = elem(k, a).add(elem(gp.col[k], a).phase(ph)).permute(mask as usize);
                    }
                }

                let link = &links[dir * LINK_LEN * d..];
                let mut chi = [[V::zero(); 3]; 2];
                for k in 0..2 {
                    for a in 0..3 {
                        let mut c = V::zero();
                        for b in 0..3 {
                            c = c.fma(V::load(&link[(a * 3 + b) * d..]), h[k][b]);
                        }
                        chi[k][a] = c;
                    }
                }

                for k in 0..2 {
                    for a in 0..3 {
                        acc[k][a] = acc[k][a].add(chi[k][a]);
                    }
                }
                for r in 2..4 {
                    let k = gp.col[r];
                    let ph = if fwd { gp.phase[r] } else { gp.phase[r].neg() };
                    for a in 0..3 {
                        acc[r][a] = acc[r][a].add(chi[k][a].phase(ph));
                    }
                }
            }
            let dst = &mut out[s * SPINOR_LEN * d..];
            for alpha in 0..4 {
                for a in 0..3 {
                    acc[alpha][a].store(&mut dst[(alpha * 3 + a) * d..]);
                }
            }
        }
    }
}

/// Apply the hopping term to `psi` with periodic boundaries in the layout
/// selected by `geom`.
pub fn dw_apply(
    u: &GaugeField,
    psi: &FermionField,
    geom: &LatticeGeometry,
) -> Result<FermionField, DwError> {
    DwOperator::new(u, geom)?.apply(psi)
}

/// Hopping term at one site from the dense spin projectors, without any
/// SIMD packing. Returns `ls * 12` values in field order.
pub fn dw_site_reference(
    u: &GaugeField,
    psi: &FermionField,
    geom: &LatticeGeometry,
    site: usize,
) -> Result<Vec<Complex64>, DwError> {
    geom.validate()?;
    u.conforms(geom)?;
    psi.conforms(geom)?;
    if site >= geom.v4() {
        return Err(DwError::Mismatch(format!(
            "site {site} outside a volume of {}",
            geom.v4()
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![zero; geom.ls * SPINOR_LEN];
    let n = geom.site_coords(site);
    for mu in 0..4 {
        for fwd in [true, false] {
            let nb = geom.site_lex(geom.neighbor(n, mu, fwd));
            let spin = one_plus(mu, if fwd { 1.0 } else { -1.0 });
            let link = if fwd { u.link(site, mu) } else { u.link(nb, mu) };
            for s in 0..geom.ls {
                let src = psi.spinor(nb, s);
                for alpha in 0..4 {
                    for beta in 0..4 {
                        if spin[alpha][beta] == zero {
                            continue;
                        }
                        for a in 0..3 {
                            let mut acc = zero;
                            for b in 0..3 {
                                let c = if fwd { link[a * 3 + b] } else { link[b * 3 + a].conj() };
                                acc += c * src[beta * 3 + b];
                            }
                            out[(s * 4 + alpha) * 3 + a] += spin[alpha][beta] * acc;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn pack_gauge<V: LaneVec>(u: &GaugeField, geom: &LatticeGeometry) -> Vec<f64> {
    let d = V::DOUBLES;
    let mut out = vec![0.0; geom.vsites() * DIRECTIONS * LINK_LEN * d];
    for v in 0..geom.vsites() {
        for lane in 0..V::LANES {
            let n = geom.site_of(v, lane);
            for dir in 0..DIRECTIONS {
                let (mu, fwd) = direction(dir);
                let base = (v * DIRECTIONS + dir) * LINK_LEN * d;
                let src = if fwd {
                    u.link(geom.site_lex(n), mu)
                } else {
                    u.link(geom.site_lex(geom.neighbor(n, mu, false)), mu)
                };
                for a in 0..3 {
                    for b in 0..3 {
                        let z = if fwd { src[a * 3 + b] } else { src[b * 3 + a].conj() };
                        V::set_lane(&mut out[base + (a * 3 + b) * d..], lane, z);
                    }
                }
            }
        }
    }
    out
}

fn pack_fermion<V: LaneVec>(psi: &FermionField, geom: &LatticeGeometry) -> Vec<f64> {
    let d = V::DOUBLES;
    let mut out = vec![0.0; geom.lups() * SPINOR_LEN * 2];
    for v in 0..geom.vsites() {
        for lane in 0..V::LANES {
            let site = geom.site_lex(geom.site_of(v, lane));
            for s in 0..geom.ls {
                let base = (v * geom.ls + s) * SPINOR_LEN * d;
                for (k, z) in psi.spinor(site, s).iter().enumerate() {
                    V::set_lane(&mut out[base + k * d..], lane, *z);
                }
            }
        }
    }
    out
}

fn unpack_fermion<V: LaneVec>(packed: &[f64], geom: &LatticeGeometry) -> FermionField {
    let d = V::DOUBLES;
    let mut f = FermionField::zeros(geom);
    for v in 0..geom.vsites() {
        for lane in 0..V::LANES {
            let site = geom.site_lex(geom.site_of(v, lane));
            for s in 0..geom.ls {
                let base = (v * geom.ls + s) * SPINOR_LEN * d;
                for k in 0..SPINOR_LEN {
                    let i = f.index(site, s, 0, 0) + k;
                    f.data[i] = V::lane(&packed[base + k * d..], lane);
                }
            }
        }
    }
    f
}

/// The operator as an explicit real matrix acting on [`FermionField::to_real`].
///
/// Assembled entry by entry from the dense `(1 +- gamma_mu) x U` blocks,
/// independently of the vectorized kernel.
pub fn dw_matrix(u: &GaugeField, geom: &LatticeGeometry) -> Result<CrsMatrix, DwError> {
    geom.validate()?;
    u.conforms(geom)?;
    let dims = geom.lups() * SPINOR_LEN * 2;
    if dims > MATRIX_DIM_LIMIT {
        return Err(DwError::TooLarge {
            dims,
            limit: MATRIX_DIM_LIMIT,
        });
    }
    let ls = geom.ls;
    let cidx = |site: usize, s: usize, alpha: usize, a: usize| ((site * ls + s) * 4 + alpha) * 3 + a;
    let mut trip = Vec::new();
    for site in 0..geom.v4() {
        let n = geom.site_coords(site);
        for mu in 0..4 {
            for fwd in [true, false] {
                let nb = geom.neighbor(n, mu, fwd);
                let nb_lex = geom.site_lex(nb);
                let spin = one_plus(mu, if fwd { 1.0 } else { -1.0 });
                let color = |a: usize, b: usize| -> Complex64 {
                    if fwd {
                        u.link(site, mu)[a * 3 + b]
                    } else {
                        u.link(nb_lex, mu)[b * 3 + a].conj()
                    }
                };
                for s in 0..ls {
                    for alpha in 0..4 {
                        for beta in 0..4 {
                            if spin[alpha][beta] == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            for a in 0..3 {
                                for b in 0..3 {
                                    let c = spin[alpha][beta] * color(a, b);
                                    let i = 2 * cidx(site, s, alpha, a);
                                    let j = 2 * cidx(nb_lex, s, beta, b);
                                    for (di, dj, x) in
                                        [(0, 0, c.re), (0, 1, -c.im), (1, 0, c.im), (1, 1, c.re)]
                                    {
                                        if x != 0.0 {
                                            trip.push((i + di, j + dj, x));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let m = CrsMatrix::from_triplets(dims, dims, trip).expect("indices within range");
    Ok(m)
}
