use crate::linalg::{self, CMat};
use crate::symmetry::{OpKind, SymmetryOp};
use crate::{Error, Result, C64};
use faer::Mat;
use serde::Deserialize;

/// Square complex matrix, one row per line as `re,im` pairs:
/// `re₀,im₀,re₁,im₁,…`. Blank lines and `#` comments are ignored.
pub fn read_matrix_csv(text: &str) -> Result<CMat> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut r = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    for rec in r.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number {f:?}"))))
            .collect::<Result<_>>()?;
        if vals.len() % 2 != 0 {
            return Err(Error::InvalidInput("matrix rows need re,im pairs".into()));
        }
        rows.push(vals.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    for row in &rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn write_matrix_csv(h: &CMat) -> String {
    let mut s = String::new();
    for i in 0..h.nrows() {
        let fields: Vec<String> = (0..h.ncols()).flat_map(|j| [format!("{:?}", h[(i, j)].re), format!("{:?}", h[(i, j)].im)]).collect();
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

#[derive(Deserialize)]
#[serde(untagged)]
enum UnitarySpec {
    Named(String),
    Entries(Vec<Vec<[f64; 2]>>),
}

#[derive(Deserialize)]
struct OpSpec {
    kind: String,
    u: UnitarySpec,
}

/// Named unitaries: `identity`, `spin_x|y|z` (`1 ⊗ σ` on the fast index) and
/// `block_x|y|z` (`σ ⊗ 1` on the slow index).
fn named(name: &str, n: usize) -> Result<CMat> {
    let pauli = |c: char| match c {
        'x' => Ok(1),
        'y' => Ok(2),
        'z' => Ok(3),
        _ => Err(Error::InvalidInput(format!("unknown unitary {name:?}"))),
    };
    let even = || if n % 2 == 0 { Ok(n / 2) } else { Err(Error::InvalidInput(format!("{name} needs even dimension"))) };
    match name {
        "identity" => Ok(linalg::identity(n)),
        _ if name.starts_with("spin_") && name.len() == 6 => Ok(linalg::spin_op(even()?, pauli(name.chars().last().unwrap())?)),
        _ if name.starts_with("block_") && name.len() == 7 => Ok(linalg::block_op(pauli(name.chars().last().unwrap())?, even()?)),
        _ => Err(Error::InvalidInput(format!("unknown unitary {name:?}"))),
    }
}

/// JSON list of `{"kind": "TRS", "u": "spin_y" | [[[re, im], …], …]}`.
pub fn read_ops_json(text: &str, n: usize) -> Result<Vec<SymmetryOp>> {
    let specs: Vec<OpSpec> = serde_json::from_str(text)?;
    specs
        .into_iter()
        .map(|s| {
            let kind = OpKind::parse(&s.kind)?;
            let u = match s.u {
                UnitarySpec::Named(name) => named(&name, n)?,
                UnitarySpec::Entries(rows) => {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(Error::DimensionMismatch { expected: n, got: rows.len() });
                    }
                    Mat::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1]))
                }
            };
            SymmetryOp::new(kind, u)
        })
        .collect()
}
