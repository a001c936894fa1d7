//! Identify the finest class consistent with a set of candidate operations.

use super::classes::{match_symmetries, Signature, SymmetryClassTag};
use super::ops::{antiunitary_sign, relation_residual, verify, OpKind, SymmetryOp, Transform};
use crate::linalg::{self, CMat};
use crate::{Error, Result};
use std::collections::BTreeMap;

#[derive(Clone)]
struct Found {
    u: CMat,
    explicit: bool,
}

fn key(t: Transform, parity: f64) -> (u8, i8) {
    let tb = match t {
        Transform::Identity => 0,
        Transform::Conjugate => 1,
        Transform::Transpose => 2,
        Transform::Adjoint => 3,
    };
    (tb, if parity > 0.0 { 1 } else { -1 })
}

fn unkey(k: (u8, i8)) -> (Transform, f64) {
    let t = match k.0 {
        0 => Transform::Identity,
        1 => Transform::Conjugate,
        2 => Transform::Transpose,
        _ => Transform::Adjoint,
    };
    (t, k.1 as f64)
}

/// `U₂ W₁` realizing the composite of two relations; `W₁ = U₁*` when the
/// second map is antiunitary.
fn compose(u1: &CMat, t2: Transform, u2: &CMat) -> CMat {
    if t2.is_antiunitary() {
        u2 * linalg::conj(u1)
    } else {
        u2 * u1
    }
}

/// Returns the class whose defining symmetries are exactly those implied by
/// the candidates that hold on `h` to within `tol`.
pub fn classify(h: &CMat, candidates: &[SymmetryOp], tol: f64) -> Result<SymmetryClassTag> {
    let mut found: BTreeMap<(u8, i8), Found> = BTreeMap::new();
    let mut explicit_signs: BTreeMap<OpKind, i8> = BTreeMap::new();
    for op in candidates {
        if verify(h, op)? >= tol {
            continue;
        }
        if op.kind.is_antiunitary() {
            if let Some(&s) = explicit_signs.get(&op.kind) {
                if s != op.sign {
                    return Err(Error::Ambiguous(format!(
                        "{} holds with both signs",
                        op.kind.label()
                    )));
                }
            }
            explicit_signs.insert(op.kind, op.sign);
        }
        found
            .entry(key(op.kind.transform(), op.kind.parity()))
            .or_insert(Found { u: op.u.clone(), explicit: true });
    }

    // close the set under composition of relations
    loop {
        let keys: Vec<_> = found.keys().copied().collect();
        let mut added = false;
        for &k1 in &keys {
            for &k2 in &keys {
                let (t1, p1) = unkey(k1);
                let (t2, p2) = unkey(k2);
                let t3 = t1.then(t2);
                let p3 = p1 * p2;
                let k3 = key(t3, p3);
                if t3 == Transform::Identity && p3 > 0.0 || found.contains_key(&k3) {
                    continue;
                }
                let u = compose(&found[&k1].u, t2, &found[&k2].u);
                if relation_residual(h, t3, p3, &u) < tol.max(1e-9) {
                    found.insert(k3, Found { u, explicit: false });
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }

    let mut sig: Signature = [None; 4];
    for (slot, kind) in [OpKind::Trs, OpKind::Phs, OpKind::TrsDag, OpKind::PhsDag].iter().enumerate() {
        if let Some(&s) = explicit_signs.get(kind) {
            sig[slot] = Some(s);
        } else if let Some(f) = found.get(&key(kind.transform(), kind.parity())) {
            debug_assert!(!f.explicit);
            sig[slot] = antiunitary_sign(&f.u, 1e-8);
        }
    }
    let cs = found.get(&key(Transform::Adjoint, -1.0));
    let sls = found.get(&key(Transform::Identity, -1.0));
    let flag = match (cs, sls) {
        (Some(c), Some(s)) => Some(commutation(&c.u, &s.u)?),
        _ => None,
    };
    let rec = match_symmetries(sig, cs.is_some(), sls.is_some(), flag).ok_or_else(|| {
        Error::Unclassified(format!("signature {sig:?}, CS {}, SLS {}", cs.is_some(), sls.is_some()))
    })?;
    SymmetryClassTag::new(rec.name)
}

/// +1 if the unitaries commute, −1 if they anticommute.
fn commutation(a: &CMat, b: &CMat) -> Result<i8> {
    let ab = a * b;
    let ba = b * a;
    let scale = linalg::frobenius(&ab).max(1e-300);
    if linalg::frobenius(&linalg::sub(&ab, &ba)) < 1e-9 * scale {
        Ok(1)
    } else if linalg::frobenius(&linalg::add(&ab, &ba)) < 1e-9 * scale {
        Ok(-1)
    } else {
        Err(Error::Ambiguous("CS and SLS neither commute nor anticommute".into()))
    }
}
