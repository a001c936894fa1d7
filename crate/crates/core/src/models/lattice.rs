use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// Quasi-1D strip for the transfer matrix; `length` is only a nominal cap.
    Transfer,
    /// Closed system, periodic in every direction, for diagonalization.
    ClosedPeriodic,
}

/// `dim`-dimensional lattice of `width^(dim−1)` transverse sites per slice
/// and `length` slices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dim: usize,
    pub width: usize,
    pub length: usize,
    pub transverse_bc: Boundary,
    pub geometry: Geometry,
}

impl LatticeSpec {
    pub fn strip(dim: usize, width: usize) -> Self {
        Self { dim, width, length: 1, transverse_bc: Boundary::Periodic, geometry: Geometry::Transfer }
    }

    /// `width^dim` cube (square in 2D), periodic in all directions.
    pub fn cube(dim: usize, width: usize) -> Self {
        Self { dim, width, length: width, transverse_bc: Boundary::Periodic, geometry: Geometry::ClosedPeriodic }
    }

    pub fn with_bc(mut self, bc: Boundary) -> Self {
        self.transverse_bc = bc;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::InvalidLattice(format!("dimension {} not in {{2, 3}}", self.dim)));
        }
        if self.width < 2 {
            return Err(Error::InvalidLattice(format!("L = {} < 2", self.width)));
        }
        if self.length < 1 {
            return Err(Error::InvalidLattice("L_z must be ≥ 1".into()));
        }
        if self.geometry == Geometry::ClosedPeriodic && self.transverse_bc != Boundary::Periodic {
            return Err(Error::InvalidLattice("the closed geometry is periodic in every direction".into()));
        }
        Ok(())
    }

    pub fn transverse_sites(&self) -> usize {
        self.width.pow(self.dim as u32 - 1)
    }

    /// Sum of transverse coordinates of site `t`, for sublattice parity.
    pub fn coordinate_sum(&self, t: usize) -> usize {
        let mut s = 0;
        let mut r = t;
        for _ in 0..self.dim - 1 {
            s += r % self.width;
            r /= self.width;
        }
        s
    }

    /// Undirected transverse bonds `(t, t')`, `t' = t + e_μ`, in stream order.
    pub fn transverse_bonds(&self) -> Vec<(usize, usize)> {
        let l = self.width;
        let mut out = Vec::new();
        for t in 0..self.transverse_sites() {
            let mut stride = 1;
            for _ in 0..self.dim - 1 {
                let x = (t / stride) % l;
                if x + 1 < l {
                    out.push((t, t + stride));
                } else if self.transverse_bc == Boundary::Periodic {
                    out.push((t, t + stride - l * stride));
                }
                stride *= l;
            }
        }
        out
    }

    /// Whether nearest-neighbour bonds only join opposite sublattices.
    pub fn is_bipartite(&self) -> bool {
        let transverse_ok = self.transverse_bc == Boundary::Open || self.width % 2 == 0;
        let longitudinal_ok = self.geometry == Geometry::Transfer || self.length % 2 == 0;
        transverse_ok && longitudinal_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_counts() {
        // 2×2 open square: 4 bonds
        let l = LatticeSpec::strip(3, 2).with_bc(Boundary::Open);
        assert_eq!(l.transverse_bonds().len(), 4);
        // periodic L×L slice: 2 L² bonds
        let l = LatticeSpec::strip(3, 4);
        assert_eq!(l.transverse_bonds().len(), 32);
        // 2D strip, periodic width 5: 5 bonds; open: 4
        assert_eq!(LatticeSpec::strip(2, 5).transverse_bonds().len(), 5);
        assert_eq!(LatticeSpec::strip(2, 5).with_bc(Boundary::Open).transverse_bonds().len(), 4);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(LatticeSpec::strip(3, 1).validate().is_err());
        assert!(LatticeSpec::strip(4, 4).validate().is_err());
        assert!(LatticeSpec::cube(2, 4).with_bc(Boundary::Open).validate().is_err());
    }
}
