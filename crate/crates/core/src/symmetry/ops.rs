//! Symmetry operations and their residuals.

use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    #[serde(rename = "TRS")]
    Trs,
    #[serde(rename = "PHS")]
    Phs,
    #[serde(rename = "TRS†", alias = "TRSdag")]
    TrsDag,
    #[serde(rename = "PHS†", alias = "PHSdag")]
    PhsDag,
    #[serde(rename = "CS")]
    Cs,
    #[serde(rename = "SLS")]
    Sls,
}

/// The matrix map an operation applies to H before conjugating by U.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Transform {
    Identity,
    Conjugate,
    Transpose,
    Adjoint,
}

impl Transform {
    pub fn apply(self, h: &CMat) -> CMat {
        match self {
            Transform::Identity => h.clone(),
            Transform::Conjugate => linalg::conj(h),
            Transform::Transpose => linalg::transpose(h),
            Transform::Adjoint => linalg::adjoint(h),
        }
    }

    /// Composition; the four maps form a Klein four-group.
    pub fn then(self, other: Transform) -> Transform {
        use Transform::*;
        let bits = |t| match t {
            Identity => 0u8,
            Conjugate => 1,
            Transpose => 2,
            Adjoint => 3,
        };
        match bits(self) ^ bits(other) {
            0 => Identity,
            1 => Conjugate,
            2 => Transpose,
            _ => Adjoint,
        }
    }

    pub fn is_antiunitary(self) -> bool {
        matches!(self, Transform::Conjugate | Transform::Transpose)
    }
}

impl OpKind {
    pub const ALL: [OpKind; 6] =
        [OpKind::Trs, OpKind::Phs, OpKind::TrsDag, OpKind::PhsDag, OpKind::Cs, OpKind::Sls];

    pub fn transform(self) -> Transform {
        match self {
            OpKind::Trs | OpKind::PhsDag => Transform::Conjugate,
            OpKind::Phs | OpKind::TrsDag => Transform::Transpose,
            OpKind::Cs => Transform::Adjoint,
            OpKind::Sls => Transform::Identity,
        }
    }

    /// Sign ε in `U X(H) U† = ε H`.
    pub fn parity(self) -> f64 {
        match self {
            OpKind::Trs | OpKind::TrsDag => 1.0,
            _ => -1.0,
        }
    }

    pub fn from_parts(t: Transform, parity: f64) -> Option<OpKind> {
        OpKind::ALL.into_iter().find(|k| k.transform() == t && k.parity() == parity)
    }

    pub fn is_antiunitary(self) -> bool {
        self.transform().is_antiunitary()
    }

    pub fn label(self) -> &'static str {
        match self {
            OpKind::Trs => "TRS",
            OpKind::Phs => "PHS",
            OpKind::TrsDag => "TRS†",
            OpKind::PhsDag => "PHS†",
            OpKind::Cs => "CS",
            OpKind::Sls => "SLS",
        }
    }

    pub fn parse(s: &str) -> Result<OpKind> {
        let t = s.trim().to_uppercase().replace("^DAGGER", "†").replace("DAG", "†");
        OpKind::ALL
            .into_iter()
            .find(|k| k.label() == t)
            .ok_or_else(|| Error::InvalidInput(format!("unknown symmetry kind {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct SymmetryOp {
    pub kind: OpKind,
    pub u: CMat,
    /// `UU* = sign·1` for antiunitary kinds; +1 for CS and SLS.
    pub sign: i8,
}

const UNITARY_TOL: f64 = 1e-12;

/// `UU* = ±1` read off the (0,0)-normalized product; `None` if it is not
/// proportional to ±1.
pub fn antiunitary_sign(u: &CMat, tol: f64) -> Option<i8> {
    let p = u * linalg::conj(u);
    let n = u.nrows();
    for s in [1i8, -1] {
        let d = linalg::shift(&p, C64::new(s as f64, 0.0));
        if linalg::frobenius(&d) <= tol * (n as f64).sqrt() {
            return Some(s);
        }
    }
    None
}

impl SymmetryOp {
    /// Validates unitarity, the involution property of CS/SLS, and derives
    /// the sign of antiunitary kinds.
    pub fn new(kind: OpKind, u: CMat) -> Result<Self> {
        let n = linalg::is_square(&u)?;
        let scale = (n.max(1) as f64).sqrt();
        if linalg::unitarity_defect(&u) > UNITARY_TOL * scale {
            return Err(Error::InvalidInput(format!("{} operator is not unitary", kind.label())));
        }
        let sign = if kind.is_antiunitary() {
            antiunitary_sign(&u, 1e-10).ok_or_else(|| {
                Error::InvalidInput(format!("{}: UU* is not ±1", kind.label()))
            })?
        } else {
            let sq = &u * &u;
            if linalg::frobenius(&linalg::shift(&sq, linalg::ONE)) > 1e-10 * scale {
                return Err(Error::InvalidInput(format!("{}: U² ≠ 1", kind.label())));
            }
            1
        };
        Ok(Self { kind, u, sign })
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `U X(H) U†`
    pub fn image(&self, h: &CMat) -> CMat {
        linalg::conjugate_by(&self.u, &self.kind.transform().apply(h))
    }
}

/// Relative Frobenius residual of the defining relation of `op` on `h`.
pub fn verify(h: &CMat, op: &SymmetryOp) -> Result<f64> {
    let n = linalg::is_square(h)?;
    if op.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: op.dim() });
    }
    Ok(relation_residual(h, op.kind.transform(), op.kind.parity(), &op.u))
}

pub(crate) fn relation_residual(h: &CMat, t: Transform, parity: f64, u: &CMat) -> f64 {
    let img = linalg::conjugate_by(u, &t.apply(h));
    let d = linalg::sub(&img, &linalg::scale(h, C64::new(parity, 0.0)));
    let norm = linalg::frobenius(h);
    let r = linalg::frobenius(&d);
    if norm == 0.0 {
        r
    } else {
        r / norm
    }
}
