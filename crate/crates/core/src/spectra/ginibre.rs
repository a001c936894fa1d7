use crate::linalg::{self, CMat};
use crate::rng::{self, tag};
use crate::symmetry::ensembles::{complex_gaussian, real_gaussian};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ginibre {
    #[serde(rename = "GinUE")]
    Unitary,
    #[serde(rename = "GinOE")]
    Orthogonal,
    #[serde(rename = "GinSE")]
    Symplectic,
}

impl Ginibre {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ginue" => Ok(Ginibre::Unitary),
            "ginoe" => Ok(Ginibre::Orthogonal),
            "ginse" => Ok(Ginibre::Symplectic),
            _ => Err(Error::InvalidInput(format!("unknown Ginibre ensemble {s:?}"))),
        }
    }
}

/// Unit-variance entries. GinUE and GinOE are `n × n`; GinSE is
/// `[[X, Y], [−Y*, X*]]` of size `2n`, so `σ_y H* σ_y = H` with `σ_y` acting
/// on the block index.
pub fn ginibre(kind: Ginibre, n: usize, seed: u64) -> Result<CMat> {
    if n == 0 {
        return Err(Error::InvalidInput("Ginibre size must be ≥ 1".into()));
    }
    let mut r = rng::stream(seed, &[tag::SAMPLE, kind as u64, n as u64]);
    Ok(match kind {
        Ginibre::Unitary => complex_gaussian(n, n, &mut r),
        Ginibre::Orthogonal => real_gaussian(n, n, &mut r),
        Ginibre::Symplectic => {
            let x = complex_gaussian(n, n, &mut r);
            let y = complex_gaussian(n, n, &mut r);
            let my = linalg::scale(&linalg::conj(&y), crate::C64::new(-1.0, 0.0));
            linalg::blocks(&x, &y, &my, &linalg::conj(&x))
        }
    })
}
