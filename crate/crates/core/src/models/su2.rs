use super::{DisorderSpec, Link, Slice};
use crate::{Error, Result, C64};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Su2Class {
    Aii,
    AiiDagger,
    CiiDagger,
    Diii,
}

impl Su2Class {
    pub const ALL: [Su2Class; 4] = [Su2Class::Aii, Su2Class::AiiDagger, Su2Class::CiiDagger, Su2Class::Diii];

    pub fn name(self) -> &'static str {
        match self {
            Su2Class::Aii => "AII",
            Su2Class::AiiDagger => "AII†",
            Su2Class::CiiDagger => "CII†",
            Su2Class::Diii => "DIII",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let n = crate::symmetry::classes::normalize_name(name);
        Self::ALL
            .into_iter()
            .find(|c| c.name() == n)
            .ok_or_else(|| Error::UnsupportedClass(format!("{name} has no SU(2) realization")))
    }

    pub(super) fn check_disorder(self, d: &DisorderSpec) -> Result<()> {
        match self {
            Su2Class::CiiDagger | Su2Class::Diii if d.w_r != 0.0 || d.w_i <= 0.0 => Err(Error::InvalidDisorder(
                format!("class {} needs W_r = 0 and W_i > 0", self.name()),
            )),
            _ => Ok(()),
        }
    }

    /// `R(j,i)` from `R(i,j)`: `R†` for AII, AII† and CII†, `−σ_z R† σ_z` for
    /// DIII. Built entrywise so the relation holds exactly.
    fn reverse(self, r: [C64; 4]) -> [C64; 4] {
        let [a, b, c, d] = r.map(|z| z.conj());
        match self {
            Su2Class::Diii => [-a, c, b, -d],
            _ => [a, c, b, d],
        }
    }
}

/// `[[e^{iα} cos β, e^{iγ} sin β], [−e^{−iγ} sin β, e^{−iα} cos β]]`, row-major.
pub fn su2_matrix(alpha: f64, beta: f64, gamma: f64) -> [C64; 4] {
    let (c, s) = (beta.cos(), beta.sin());
    [
        C64::from_polar(c, alpha),
        C64::from_polar(s, gamma),
        -C64::from_polar(s, -gamma),
        C64::from_polar(c, -alpha),
    ]
}

/// β on [0, π/2] with density sin 2β, by inversion of the CDF (1 − cos 2β)/2.
pub fn sample_beta<R: Rng + ?Sized>(r: &mut R) -> f64 {
    let u: f64 = r.random();
    0.5 * (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos()
}

fn angles<R: Rng + ?Sized>(r: &mut R) -> (f64, f64, f64) {
    let a = 2.0 * PI * r.random::<f64>();
    let b = sample_beta(r);
    let g = 2.0 * PI * r.random::<f64>();
    (a, b, g)
}

fn bond_pair<R: Rng + ?Sized>(class: Su2Class, r: &mut R) -> ([C64; 4], [C64; 4]) {
    let (a, b, g) = angles(r);
    let fwd = su2_matrix(a, b, g);
    (fwd, class.reverse(fwd))
}

fn uniform<R: Rng + ?Sized>(r: &mut R, width: f64) -> f64 {
    width * (r.random::<f64>() - 0.5)
}

pub(super) fn slice<R: Rng + ?Sized>(
    class: Su2Class,
    sites: usize,
    bonds: &[(usize, usize)],
    d: &DisorderSpec,
    onsite_rng: &mut R,
    bond_rng: &mut R,
) -> Slice {
    let mut onsite = Vec::with_capacity(2 * sites);
    for _ in 0..sites {
        let wr = uniform(onsite_rng, d.w_r);
        let wi = uniform(onsite_rng, d.w_i);
        let up = C64::new(wr, wi);
        let down = match class {
            Su2Class::Aii => up.conj(),
            Su2Class::AiiDagger | Su2Class::CiiDagger => up,
            Su2Class::Diii => -up,
        };
        onsite.push(up);
        onsite.push(down);
    }
    let mut hops = Vec::with_capacity(8 * bonds.len());
    for &(i, j) in bonds {
        let (fwd, bwd) = bond_pair(class, bond_rng);
        for a in 0..2 {
            for b in 0..2 {
                hops.push((2 * i + a, 2 * j + b, fwd[2 * a + b]));
                hops.push((2 * j + a, 2 * i + b, bwd[2 * a + b]));
            }
        }
    }
    Slice { onsite, hops }
}

pub(super) fn link<R: Rng + ?Sized>(class: Su2Class, sites: usize, r: &mut R) -> Link {
    let mut forward = Vec::with_capacity(4 * sites);
    let mut backward = Vec::with_capacity(4 * sites);
    for _ in 0..sites {
        let (f, b) = bond_pair(class, r);
        forward.extend_from_slice(&f);
        backward.extend_from_slice(&b);
    }
    Link { forward, backward }
}
