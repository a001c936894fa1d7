use super::{Link, Slice};
use crate::C64;
use rand::Rng;

fn sign<R: Rng + ?Sized>(r: &mut R) -> C64 {
    C64::new(if r.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
}

pub(super) fn slice<R: Rng + ?Sized>(
    sites: usize,
    bonds: &[(usize, usize)],
    w: f64,
    onsite_rng: &mut R,
    bond_rng: &mut R,
) -> Slice {
    let onsite = (0..sites).map(|_| C64::new(w * (onsite_rng.random::<f64>() - 0.5), 0.0)).collect();
    let mut hops = Vec::with_capacity(2 * bonds.len());
    for &(i, j) in bonds {
        // the two directions are drawn independently
        hops.push((i, j, sign(bond_rng)));
        hops.push((j, i, sign(bond_rng)));
    }
    Slice { onsite, hops }
}

pub(super) fn link<R: Rng + ?Sized>(sites: usize, r: &mut R) -> Link {
    let mut forward = Vec::with_capacity(sites);
    let mut backward = Vec::with_capacity(sites);
    for _ in 0..sites {
        forward.push(sign(r));
        backward.push(sign(r));
    }
    Link { forward, backward }
}
