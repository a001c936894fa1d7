//! Non-Hermitian matrices built from Hermitian ones so that eigenmodes of
//! the Hermitian input reappear as eigenmodes of the output at the
//! symmetry-conserving energy of the target class.

use super::classes::lookup;
use super::ops::{OpKind, SymmetryOp};
use crate::linalg::{self, block_op, blocks, kron, pauli, spin_op, CMat, I, ONE, ZERO};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recipe {
    Aiii,
    AiiiSMinus,
    BdiSMinusPlus,
    CiSMinusPlus,
    Ci,
    BdiDagger,
    CiSPlusMinus,
    AiiiDagger,
    AiiiSPlus,
    DSPlus,
    CSPlus,
    AiSMinus,
    AiSPlus,
    BdiSPlusPlus,
    CiSPlusPlus,
}

/// Hermitian class the input matrices must belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputClass {
    A,
    Ai,
    Aiii,
    Bdi,
}

/// Basis in which a class-AI input satisfies `V H V = H*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AiBasis {
    /// `V = diag(1_{n1}, −1_{n−n1})`
    Diagonal { n1: usize },
    /// `V = σ_x ⊗ 1_{n/2}`
    Swap,
}

impl AiBasis {
    pub fn matrix(self, n: usize) -> CMat {
        match self {
            AiBasis::Diagonal { n1 } => {
                let d: Vec<C64> = (0..n).map(|i| if i < n1 { ONE } else { -ONE }).collect();
                linalg::diag(&d)
            }
            AiBasis::Swap => block_op(1, n / 2),
        }
    }
}

impl Recipe {
    pub const ALL: [Recipe; 15] = [
        Recipe::Aiii,
        Recipe::AiiiSMinus,
        Recipe::BdiSMinusPlus,
        Recipe::CiSMinusPlus,
        Recipe::Ci,
        Recipe::BdiDagger,
        Recipe::CiSPlusMinus,
        Recipe::AiiiDagger,
        Recipe::AiiiSPlus,
        Recipe::DSPlus,
        Recipe::CSPlus,
        Recipe::AiSMinus,
        Recipe::AiSPlus,
        Recipe::BdiSPlusPlus,
        Recipe::CiSPlusPlus,
    ];

    /// Non-Hermitian class produced.
    pub fn target(self) -> &'static str {
        match self {
            Recipe::Aiii => "AIII",
            Recipe::AiiiSMinus => "AIII+S-",
            Recipe::BdiSMinusPlus => "BDI+S-+",
            Recipe::CiSMinusPlus => "CI+S-+",
            Recipe::Ci => "CI",
            Recipe::BdiDagger => "BDI†",
            Recipe::CiSPlusMinus => "CI+S+-",
            Recipe::AiiiDagger => "AIII†",
            Recipe::AiiiSPlus => "AIII+S+",
            Recipe::DSPlus => "D+S+",
            Recipe::CSPlus => "C+S+",
            Recipe::AiSMinus => "AI+S-",
            Recipe::AiSPlus => "AI+S+",
            Recipe::BdiSPlusPlus => "BDI+S++",
            Recipe::CiSPlusPlus => "CI+S++",
        }
    }

    pub fn input_class(self) -> InputClass {
        use Recipe::*;
        match self {
            Aiii | AiiiSMinus | BdiSMinusPlus | CiSMinusPlus => InputClass::A,
            Ci | BdiDagger | CiSPlusMinus => InputClass::Ai,
            AiiiDagger | AiiiSPlus | DSPlus | CSPlus | AiSMinus => InputClass::Aiii,
            AiSPlus | BdiSPlusPlus | CiSPlusPlus => InputClass::Bdi,
        }
    }

    /// Recipes that combine two independent realizations.
    pub fn two_inputs(self) -> bool {
        matches!(self, Recipe::AiiiSMinus | Recipe::CiSPlusMinus | Recipe::AiiiDagger | Recipe::AiSPlus)
    }

    pub fn from_target(name: &str) -> Result<Recipe> {
        let rec = lookup(name)?;
        Recipe::ALL
            .into_iter()
            .find(|r| r.target() == rec.name)
            .ok_or_else(|| Error::UnsupportedClass(format!("no construction for class {}", rec.name)))
    }
}

#[derive(Clone, Debug)]
pub struct RecipeInput {
    pub h: CMat,
    pub h2: Option<CMat>,
    /// Reference energies Ẽ, Ẽ′ of the inputs (ignored for chiral inputs).
    pub e_ref: f64,
    pub e_ref2: f64,
    /// Imaginary target energy `E = iE_i` for the AIII and BDI† constructions.
    pub e_imag: f64,
    /// Size of the first block for the AIII construction (default n/2).
    pub split: Option<usize>,
    /// Basis of class-AI inputs.
    pub ai_basis: AiBasis,
}

impl RecipeInput {
    pub fn single(h: CMat, e_ref: f64) -> Self {
        let n = h.nrows();
        Self { h, h2: None, e_ref, e_ref2: 0.0, e_imag: 0.0, split: None, ai_basis: AiBasis::Diagonal { n1: n / 2 } }
    }

    pub fn pair(h: CMat, e_ref: f64, h2: CMat, e_ref2: f64) -> Self {
        let mut s = Self::single(h, e_ref);
        s.h2 = Some(h2);
        s.e_ref2 = e_ref2;
        s
    }
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub recipe: Recipe,
    pub h: CMat,
    pub ops: Vec<SymmetryOp>,
    /// Symmetry-conserving energy at which input eigenmodes reappear.
    pub energy: C64,
}

const INPUT_TOL: f64 = 1e-10;

fn rel(a: &CMat, b: &CMat) -> f64 {
    let d = linalg::frobenius(&linalg::sub(a, b));
    let n = linalg::frobenius(a).max(linalg::frobenius(b));
    if n == 0.0 {
        d
    } else {
        d / n
    }
}

fn check_input(recipe: Recipe, h: &CMat, basis: AiBasis) -> Result<()> {
    let n = linalg::is_square(h)?;
    let fail = |what: &str| Err(Error::InvalidInput(format!("{:?} input: {what}", recipe)));
    if rel(h, &linalg::adjoint(h)) > INPUT_TOL {
        return fail("not Hermitian");
    }
    match recipe.input_class() {
        InputClass::A => {}
        InputClass::Ai => {
            if let AiBasis::Swap = basis {
                if n % 2 != 0 {
                    return fail("odd dimension in the σ_x basis");
                }
            }
            let v = basis.matrix(n);
            if rel(&linalg::conjugate_by(&v, h), &linalg::conj(h)) > INPUT_TOL {
                return fail("violates V H V = H*");
            }
        }
        InputClass::Aiii | InputClass::Bdi => {
            if n % 2 != 0 {
                return fail("odd dimension for a chiral matrix");
            }
            let m = n / 2;
            let scale = linalg::frobenius(h).max(f64::MIN_POSITIVE);
            let mut diag_blocks = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if (i < m) == (j < m) {
                        diag_blocks += h[(i, j)].norm_sqr();
                    }
                }
            }
            if diag_blocks.sqrt() > INPUT_TOL * scale {
                return fail("not of the form [[0, h], [h†, 0]]");
            }
            if recipe.input_class() == InputClass::Bdi && rel(h, &linalg::conj(h)) > INPUT_TOL {
                return fail("chiral block is not real");
            }
        }
    }
    if !lookup(recipe.target())?.dim_rule.admits(n) {
        return Err(Error::InvalidInput(format!(
            "{:?} needs input dimension divisible by {}, got {n}",
            recipe,
            if lookup(recipe.target())?.dim_rule == super::classes::DimRule::MultipleOf4 { 4 } else { 2 }
        )));
    }
    Ok(())
}

fn sub_block(h: &CMat, r0: usize, c0: usize, r: usize, c: usize) -> CMat {
    faer::Mat::from_fn(r, c, |i, j| h[(r0 + i, c0 + j)])
}

fn upper_right(h: &CMat) -> CMat {
    let m = h.nrows() / 2;
    sub_block(h, 0, m, m, m)
}

fn op(kind: OpKind, u: CMat) -> Result<SymmetryOp> {
    SymmetryOp::new(kind, u)
}

pub fn construct_from_hermitian(recipe: Recipe, input: &RecipeInput) -> Result<Construction> {
    check_input(recipe, &input.h, input.ai_basis)?;
    let n = input.h.nrows();
    let second = if recipe.two_inputs() {
        let h2 = input
            .h2
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("{recipe:?} needs two inputs")))?;
        check_input(recipe, h2, input.ai_basis)?;
        if h2.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h2.nrows() });
        }
        Some(h2)
    } else {
        None
    };
    let e = C64::new(input.e_ref, 0.0);
    let hs = linalg::shift(&input.h, e);
    let hs2 = second.map(|h2| linalg::shift(h2, C64::new(input.e_ref2, 0.0)));
    let zero = |k: usize| linalg::zeros(k, k);
    let mi = C64::new(0.0, -1.0);
    let ei = C64::new(0.0, input.e_imag);
    let mut energy = ZERO;

    let (h, ops) = match recipe {
        Recipe::Aiii => {
            let n1 = input.split.unwrap_or(n / 2);
            if n1 > n {
                return Err(Error::InvalidInput(format!("block split {n1} exceeds dimension {n}")));
            }
            let d: Vec<C64> = (0..n).map(|i| if i < n1 { ONE } else { -ONE }).collect();
            let uc = linalg::diag(&d);
            energy = ei;
            let h = linalg::shift(&linalg::scale(&(&hs * &uc), mi), -ei);
            (h, vec![op(OpKind::Cs, uc)?])
        }
        Recipe::AiiiSMinus => {
            let h = blocks(&zero(n), &hs, hs2.as_ref().unwrap(), &zero(n));
            (h, vec![op(OpKind::Cs, block_op(2, n))?, op(OpKind::Sls, block_op(3, n))?])
        }
        Recipe::BdiSMinusPlus => {
            let b = linalg::scale(&hs, I);
            let c = linalg::scale(&linalg::conj(&hs), mi);
            let h = blocks(&zero(n), &b, &c, &zero(n));
            let ops = vec![
                op(OpKind::Sls, block_op(3, n))?,
                op(OpKind::Trs, block_op(1, n))?,
                op(OpKind::Phs, linalg::identity(2 * n))?,
            ];
            (h, ops)
        }
        Recipe::CiSMinusPlus => {
            let sy = spin_op(n / 2, 2);
            let c = linalg::scale(&linalg::conjugate_by(&sy, &linalg::conj(&hs)), -ONE);
            let h = blocks(&zero(n), &hs, &c, &zero(n));
            let ops = vec![
                op(OpKind::Sls, block_op(3, n))?,
                op(OpKind::Trs, kron(&pauli(2), &sy))?,
                op(OpKind::Phs, kron(&pauli(0), &sy))?,
            ];
            (h, ops)
        }
        Recipe::Ci => {
            if input.ai_basis != AiBasis::Swap {
                return Err(Error::InvalidInput("the CI construction needs the σ_x basis".into()));
            }
            let sz = block_op(3, n / 2);
            let h = linalg::scale(&(&hs * &sz), mi);
            (h, vec![op(OpKind::Trs, block_op(1, n / 2))?, op(OpKind::Phs, block_op(2, n / 2))?])
        }
        Recipe::BdiDagger => {
            if !matches!(input.ai_basis, AiBasis::Diagonal { .. }) {
                return Err(Error::InvalidInput("the BDI† construction needs a diagonal V_T".into()));
            }
            let vt = input.ai_basis.matrix(n);
            energy = ei;
            let h = linalg::shift(&linalg::scale(&(&hs * &vt), mi), -ei);
            (h, vec![op(OpKind::TrsDag, linalg::identity(n))?, op(OpKind::PhsDag, vt)?])
        }
        Recipe::CiSPlusMinus => {
            let vt = input.ai_basis.matrix(n);
            let h = blocks(&zero(n), &hs, hs2.as_ref().unwrap(), &zero(n));
            let ops = vec![
                op(OpKind::Sls, block_op(3, n))?,
                op(OpKind::Trs, kron(&pauli(0), &vt))?,
                op(OpKind::Phs, kron(&pauli(2), &vt))?,
            ];
            (h, ops)
        }
        Recipe::AiiiDagger => {
            let m = n / 2;
            let h = blocks(&zero(m), &upper_right(&input.h), &upper_right(second.unwrap()), &zero(m));
            (h, vec![op(OpKind::Sls, block_op(3, m))?])
        }
        Recipe::AiiiSPlus => {
            let m = n / 2;
            let b = upper_right(&input.h);
            let h = blocks(&zero(m), &b, &linalg::scale(&linalg::adjoint(&b), -ONE), &zero(m));
            (h, vec![op(OpKind::Cs, linalg::identity(n))?, op(OpKind::Sls, block_op(3, m))?])
        }
        Recipe::DSPlus => {
            let m = n / 2;
            let b = upper_right(&input.h);
            let h = blocks(&zero(m), &b, &linalg::transpose(&b), &zero(m));
            let ops = vec![
                op(OpKind::Phs, block_op(3, m))?,
                op(OpKind::Sls, block_op(3, m))?,
                op(OpKind::TrsDag, linalg::identity(n))?,
            ];
            (h, ops)
        }
        Recipe::CSPlus => {
            let m = n / 2;
            let b = upper_right(&input.h);
            let sy = spin_op(m / 2, 2);
            let c = linalg::conjugate_by(&sy, &linalg::transpose(&b));
            let h = blocks(&zero(m), &b, &c, &zero(m));
            let ops = vec![
                op(OpKind::Phs, kron(&pauli(3), &sy))?,
                op(OpKind::TrsDag, kron(&pauli(0), &sy))?,
                op(OpKind::Sls, block_op(3, m))?,
            ];
            (h, ops)
        }
        Recipe::AiSMinus => {
            let m = n / 2;
            let b = upper_right(&input.h);
            let h = blocks(&zero(m), &b, &linalg::conj(&b), &zero(m));
            let ops = vec![
                op(OpKind::Trs, block_op(1, m))?,
                op(OpKind::PhsDag, block_op(2, m))?,
                op(OpKind::Sls, block_op(3, m))?,
            ];
            (h, ops)
        }
        Recipe::AiSPlus => {
            let m = n / 2;
            let h = blocks(&zero(m), &upper_right(&input.h), &upper_right(second.unwrap()), &zero(m));
            (h, vec![op(OpKind::Trs, linalg::identity(n))?, op(OpKind::Sls, block_op(3, m))?])
        }
        Recipe::BdiSPlusPlus => {
            let m = n / 2;
            let b = upper_right(&input.h);
            let h = blocks(&zero(m), &b, &linalg::scale(&linalg::adjoint(&b), -ONE), &zero(m));
            let ops = vec![
                op(OpKind::Trs, linalg::identity(n))?,
                op(OpKind::Phs, linalg::identity(n))?,
                op(OpKind::Sls, block_op(3, m))?,
            ];
            (h, ops)
        }
        Recipe::CiSPlusPlus => {
            let m = n / 2;
            let b = upper_right(&input.h);
            let sy = spin_op(m / 2, 2);
            let c = linalg::scale(&linalg::conjugate_by(&sy, &linalg::adjoint(&b)), -ONE);
            let h = blocks(&zero(m), &b, &c, &zero(m));
            let ops = vec![
                op(OpKind::Trs, linalg::identity(n))?,
                op(OpKind::Phs, kron(&pauli(0), &sy))?,
                op(OpKind::Sls, block_op(3, m))?,
            ];
            (h, ops)
        }
    };
    Ok(Construction { recipe, h, ops, energy })
}

fn stack(top: &[C64], bottom: &[C64]) -> Vec<C64> {
    top.iter().chain(bottom.iter()).copied().collect()
}

fn conj_vec(v: &[C64]) -> Vec<C64> {
    v.iter().map(|z| z.conj()).collect()
}

/// Output eigenvectors (at `Construction::energy`) carrying the input
/// eigenvector `psi` (and `psi2` of the second input, if any). For chiral
/// inputs `psi` must be a zero mode of the input.
pub fn embedded_modes(
    recipe: Recipe,
    input: &RecipeInput,
    psi: &[C64],
    psi2: Option<&[C64]>,
) -> Result<Vec<Vec<C64>>> {
    let n = input.h.nrows();
    if psi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.len() });
    }
    let m = n / 2;
    let zeros = |k: usize| vec![ZERO; k];
    let (plus, minus) = (&psi[..m], &psi[m..]);
    let sy = |v: &[C64]| linalg::matvec(&spin_op(v.len() / 2, 2), v);
    let mut out = match recipe {
        Recipe::Aiii => {
            let n1 = input.split.unwrap_or(m);
            vec![psi.iter().enumerate().map(|(i, &z)| if i < n1 { z } else { -z }).collect()]
        }
        Recipe::AiiiSMinus | Recipe::CiSPlusMinus => vec![stack(&zeros(n), psi)],
        Recipe::BdiSMinusPlus => vec![stack(&zeros(n), psi), stack(&conj_vec(psi), &zeros(n))],
        Recipe::CiSMinusPlus => vec![stack(&zeros(n), psi), stack(&sy(&conj_vec(psi)), &zeros(n))],
        Recipe::Ci => vec![psi.iter().enumerate().map(|(i, &z)| if i < m { z } else { -z }).collect()],
        Recipe::BdiDagger => {
            let v = input.ai_basis.matrix(n);
            vec![linalg::matvec(&v, psi)]
        }
        Recipe::AiiiDagger | Recipe::AiSPlus => vec![stack(&zeros(m), minus)],
        Recipe::AiiiSPlus | Recipe::BdiSPlusPlus => {
            vec![stack(&zeros(m), minus), stack(plus, &zeros(m))]
        }
        Recipe::DSPlus => vec![stack(&zeros(m), minus), stack(&conj_vec(plus), &zeros(m))],
        Recipe::CSPlus => vec![stack(&zeros(m), minus), stack(&sy(&conj_vec(plus)), &zeros(m))],
        Recipe::AiSMinus => vec![stack(&zeros(m), minus), stack(&conj_vec(minus), &zeros(m))],
        Recipe::CiSPlusPlus => vec![stack(&zeros(m), minus), stack(&sy(plus), &zeros(m))],
    };
    if let Some(p2) = psi2 {
        if p2.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p2.len() });
        }
        match recipe {
            Recipe::AiiiSMinus | Recipe::CiSPlusMinus => out.push(stack(p2, &zeros(n))),
            Recipe::AiiiDagger | Recipe::AiSPlus => out.push(stack(&p2[m..], &zeros(m))),
            _ => {}
        }
    }
    Ok(out)
}
