//! Disordered O(1) and SU(2) lattice models.
//!
//! A realization is a pure function of `(lattice, disorder, class, seed)`.
//! Nothing is stored per slice: on-site energies, transverse bonds and the
//! bonds from slice `n` to `n+1` are regenerated on demand from streams keyed
//! by the slice index, so a 10⁶-slice strip costs no memory and any slice can
//! be inspected in isolation.

mod lattice;
mod o1;
mod su2;

pub use lattice::{Boundary, Geometry, LatticeSpec};
pub use su2::{sample_beta, su2_matrix, Su2Class};

use crate::linalg::{self, CMat};
use crate::rng::{self, tag};
use crate::symmetry::ensembles::standard_ops;
use crate::symmetry::{OpKind, SymmetryClassTag, SymmetryOp};
use crate::{Error, Result, C64};
use faer::Mat;
use serde::{Deserialize, Serialize};

/// Uniform-distribution full widths: on-site terms lie in `[−W/2, W/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub w: f64,
    pub w_r: f64,
    pub w_i: f64,
}

impl DisorderSpec {
    pub fn o1(w: f64) -> Self {
        Self { w, w_r: 0.0, w_i: 0.0 }
    }

    pub fn su2(w_r: f64, w_i: f64) -> Self {
        Self { w: 0.0, w_r, w_i }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("W", self.w), ("W_r", self.w_r), ("W_i", self.w_i)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidDisorder(format!("{name} = {v} must be finite and ≥ 0")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    O1,
    Su2(Su2Class),
}

/// One slice: diagonal on-site terms and transverse hopping entries
/// `(row, col, value)`. Entries may repeat (doubled bonds at L = 2) and are
/// meant to be summed.
#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    pub onsite: Vec<C64>,
    pub hops: Vec<(usize, usize, C64)>,
}

/// Longitudinal bonds between slice `n` and `n+1`: per transverse site an
/// `n_orb × n_orb` row-major block of `H_{n,n+1}` (`forward`) and of
/// `H_{n+1,n}` (`backward`).
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub forward: Vec<C64>,
    pub backward: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct ModelInstance {
    pub lattice: LatticeSpec,
    pub disorder: DisorderSpec,
    pub class: SymmetryClassTag,
    pub seed: u64,
    pub family: Family,
}

/// Default cap on the dimension of assembled dense Hamiltonians.
pub const DENSE_CAP: usize = 8192;

pub fn build_o1(lattice: LatticeSpec, w: f64, seed: u64) -> Result<ModelInstance> {
    lattice.validate()?;
    let disorder = DisorderSpec::o1(w);
    disorder.validate()?;
    Ok(ModelInstance { lattice, disorder, class: SymmetryClassTag::new("AI")?, seed, family: Family::O1 })
}

pub fn build_su2(
    lattice: LatticeSpec,
    disorder: DisorderSpec,
    class: &SymmetryClassTag,
    seed: u64,
) -> Result<ModelInstance> {
    lattice.validate()?;
    disorder.validate()?;
    let c = Su2Class::from_name(&class.name)?;
    c.check_disorder(&disorder)?;
    if c == Su2Class::CiiDagger && !lattice.is_bipartite() {
        return Err(Error::InvalidLattice(
            "class CII† needs a bipartite lattice (even L under periodic wrap)".into(),
        ));
    }
    Ok(ModelInstance {
        lattice,
        disorder,
        class: SymmetryClassTag::new(c.name())?,
        seed,
        family: Family::Su2(c),
    })
}

impl ModelInstance {
    pub fn n_orb(&self) -> usize {
        match self.family {
            Family::O1 => 1,
            Family::Su2(_) => 2,
        }
    }

    pub fn transverse_sites(&self) -> usize {
        self.lattice.transverse_sites()
    }

    pub fn slice_dim(&self) -> usize {
        self.transverse_sites() * self.n_orb()
    }

    pub fn slice(&self, n: u64) -> Slice {
        let mut onsite_rng = rng::stream(self.seed, &[tag::ONSITE, n]);
        let mut bond_rng = rng::stream(self.seed, &[tag::TRANSVERSE, n]);
        let sites = self.transverse_sites();
        let bonds = self.lattice.transverse_bonds();
        match self.family {
            Family::O1 => o1::slice(sites, &bonds, self.disorder.w, &mut onsite_rng, &mut bond_rng),
            Family::Su2(c) => su2::slice(c, sites, &bonds, &self.disorder, &mut onsite_rng, &mut bond_rng),
        }
    }

    pub fn link(&self, n: u64) -> Link {
        let mut r = rng::stream(self.seed, &[tag::LONGITUDINAL, n]);
        let sites = self.transverse_sites();
        match self.family {
            Family::O1 => o1::link(sites, &mut r),
            Family::Su2(c) => su2::link(c, sites, &mut r),
        }
    }

    /// Dense `H_n`.
    pub fn slice_hamiltonian(&self, n: u64) -> CMat {
        let s = self.slice(n);
        let mut m = linalg::diag(&s.onsite);
        for &(i, j, v) in &s.hops {
            m[(i, j)] += v;
        }
        m
    }

    /// Dense `V_{n,n+1}` (rows in slice n, columns in slice n+1).
    pub fn forward_hopping(&self, n: u64) -> CMat {
        block_diagonal(&self.link(n).forward, self.n_orb(), self.transverse_sites())
    }

    /// Dense `V_{n+1,n}`.
    pub fn backward_hopping(&self, n: u64) -> CMat {
        block_diagonal(&self.link(n).backward, self.n_orb(), self.transverse_sites())
    }

    /// Full Hamiltonian with periodic wrap along the slice direction.
    pub fn assemble_full(&self, cap: usize) -> Result<CMat> {
        if self.lattice.geometry != Geometry::ClosedPeriodic {
            return Err(Error::InvalidLattice("assemble_full needs the closed-periodic geometry".into()));
        }
        let lz = self.lattice.length;
        let ns = self.slice_dim();
        let n = ns * lz;
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        let k = self.n_orb();
        let mut h: CMat = Mat::zeros(n, n);
        for z in 0..lz {
            let off = z * ns;
            let s = self.slice(z as u64);
            for (i, &e) in s.onsite.iter().enumerate() {
                h[(off + i, off + i)] += e;
            }
            for &(i, j, v) in &s.hops {
                h[(off + i, off + j)] += v;
            }
            let l = self.link(z as u64);
            let next = ((z + 1) % lz) * ns;
            for t in 0..self.transverse_sites() {
                for a in 0..k {
                    for b in 0..k {
                        let idx = t * k * k + a * k + b;
                        h[(off + t * k + a, next + t * k + b)] += l.forward[idx];
                        h[(next + t * k + a, off + t * k + b)] += l.backward[idx];
                    }
                }
            }
        }
        Ok(h)
    }

    /// Sublattice sign of each orbital of the assembled Hamiltonian.
    fn sublattice_signs(&self, slices: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for z in 0..slices {
            for t in 0..self.transverse_sites() {
                let p = (self.lattice.coordinate_sum(t) + z) % 2;
                for _ in 0..self.n_orb() {
                    out.push(if p == 0 { 1.0 } else { -1.0 });
                }
            }
        }
        out
    }

    /// Defining symmetry operations of the class for a matrix made of
    /// `slices` consecutive slices (1 for a slice Hamiltonian, `L_z` for the
    /// assembled Hamiltonian).
    pub fn class_ops(&self, slices: usize) -> Result<Vec<SymmetryOp>> {
        let n = self.slice_dim() * slices;
        match self.family {
            Family::O1 => standard_ops("AI", n),
            Family::Su2(Su2Class::CiiDagger) => {
                let sy = linalg::spin_op(n / 2, 2);
                let mu: Vec<C64> = self.sublattice_signs(slices).into_iter().map(|s| C64::new(s, 0.0)).collect();
                Ok(vec![
                    SymmetryOp::new(OpKind::TrsDag, sy.clone())?,
                    SymmetryOp::new(OpKind::PhsDag, &linalg::diag(&mu) * &sy)?,
                ])
            }
            Family::Su2(c) => standard_ops(c.name(), n),
        }
    }
}

fn block_diagonal(blocks: &[C64], k: usize, sites: usize) -> CMat {
    let mut m: CMat = Mat::zeros(k * sites, k * sites);
    for t in 0..sites {
        for a in 0..k {
            for b in 0..k {
                m[(t * k + a, t * k + b)] = blocks[t * k * k + a * k + b];
            }
        }
    }
    m
}

/// Build a realization for a sweep parameterized by a single strength `W`:
/// `W` itself for class AI (O(1)), `W_r = W_i = W` for AII and AII†, and
/// `W_r = 0, W_i = W` for CII† and DIII.
pub fn build_family(class: &str, lattice: LatticeSpec, w: f64, seed: u64) -> Result<ModelInstance> {
    let name = crate::symmetry::classes::normalize_name(class);
    if name == "AI" {
        return build_o1(lattice, w, seed);
    }
    let c = Su2Class::from_name(&name)?;
    let disorder = match c {
        Su2Class::Aii | Su2Class::AiiDagger => DisorderSpec::su2(w, w),
        Su2Class::CiiDagger | Su2Class::Diii => DisorderSpec::su2(0.0, w),
    };
    build_su2(lattice, disorder, &SymmetryClassTag::new(c.name())?, seed)
}
