//! The 38 non-Hermitian symmetry classes and their Hermitian counterparts.

use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Which reference energies a class (or a probe energy) lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyKind {
    GenericComplex,
    Real,
    Imaginary,
    Zero,
}

impl EnergyKind {
    pub fn of(e: C64) -> Self {
        match (e.re == 0.0, e.im == 0.0) {
            (true, true) => EnergyKind::Zero,
            (false, true) => EnergyKind::Real,
            (true, false) => EnergyKind::Imaginary,
            (false, false) => EnergyKind::GenericComplex,
        }
    }

    /// Every energy of kind `self` is also of kind `other`.
    pub fn within(self, other: EnergyKind) -> bool {
        use EnergyKind::*;
        match (self, other) {
            (_, GenericComplex) | (Zero, _) => true,
            (a, b) => a == b,
        }
    }

    pub fn meet(self, other: EnergyKind) -> EnergyKind {
        if self.within(other) {
            self
        } else if other.within(self) {
            other
        } else {
            EnergyKind::Zero
        }
    }

    pub fn contains(self, e: C64) -> bool {
        EnergyKind::of(e).within(self)
    }
}

/// Parity requirement on the dimension of the Hermitian random matrices
/// ("*" and "**" remarks).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DimRule {
    Any,
    Even,
    MultipleOf4,
}

impl DimRule {
    pub fn admits(self, n: usize) -> bool {
        match self {
            DimRule::Any => true,
            DimRule::Even => n % 2 == 0,
            DimRule::MultipleOf4 => n % 4 == 0,
        }
    }

    pub fn remark(self) -> &'static str {
        match self {
            DimRule::Any => "",
            DimRule::Even => "*",
            DimRule::MultipleOf4 => "**",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRecord {
    pub name: &'static str,
    pub trs: Option<i8>,
    pub phs: Option<i8>,
    pub trs_dag: Option<i8>,
    pub phs_dag: Option<i8>,
    pub cs: bool,
    pub sls: bool,
    /// `[C, S]_± = 0`: +1 when CS and SLS commute, −1 when they anticommute.
    pub cs_sls: Option<i8>,
    pub hermitian: &'static str,
    pub dim_rule: DimRule,
}

const fn rec(
    name: &'static str,
    s: [i8; 4],
    cs: bool,
    sls: bool,
    flag: i8,
    hermitian: &'static str,
    dim_rule: DimRule,
) -> ClassRecord {
    const fn opt(v: i8) -> Option<i8> {
        if v == 0 {
            None
        } else {
            Some(v)
        }
    }
    ClassRecord {
        name,
        trs: opt(s[0]),
        phs: opt(s[1]),
        trs_dag: opt(s[2]),
        phs_dag: opt(s[3]),
        cs,
        sls,
        cs_sls: opt(flag),
        hermitian,
        dim_rule,
    }
}

use DimRule::{Any, Even, MultipleOf4 as Four};

/// Columns: TRS, PHS, TRS†, PHS† signs (0 = absent), CS, SLS, [C,S] flag,
/// Hermitian counterpart, dimension remark.
pub static CLASSES: [ClassRecord; 38] = [
    rec("A", [0, 0, 0, 0], false, false, 0, "AIII", Even),
    rec("AIII", [0, 0, 0, 0], true, false, 0, "A", Any),
    rec("AIII†", [0, 0, 0, 0], false, true, 0, "AIII", Even),
    rec("AIII+S+", [0, 0, 0, 0], true, true, 1, "AIII", Even),
    rec("AIII+S-", [0, 0, 0, 0], true, true, -1, "A", Any),
    rec("AI", [1, 0, 0, 0], false, false, 0, "BDI", Even),
    rec("AII", [-1, 0, 0, 0], false, false, 0, "CII", Four),
    rec("D", [0, 1, 0, 0], false, false, 0, "DIII", Even),
    rec("C", [0, -1, 0, 0], false, false, 0, "CI", Four),
    rec("AI†", [0, 0, 1, 0], false, false, 0, "CI", Even),
    rec("AII†", [0, 0, -1, 0], false, false, 0, "DIII", Four),
    rec("BDI", [1, 1, 0, 0], true, false, 0, "D", Any),
    rec("CI", [1, -1, 0, 0], true, false, 0, "AI", Even),
    rec("DIII", [-1, 1, 0, 0], true, false, 0, "AII", Even),
    rec("CII", [-1, -1, 0, 0], true, false, 0, "C", Even),
    rec("BDI†", [0, 0, 1, 1], true, false, 0, "AI", Any),
    rec("CI†", [0, 0, 1, -1], true, false, 0, "C", Even),
    rec("DIII†", [0, 0, -1, 1], true, false, 0, "D", Even),
    rec("CII†", [0, 0, -1, -1], true, false, 0, "AII", Even),
    rec("D+S+", [0, 1, 1, 0], false, true, 0, "AIII", Even),
    rec("C+S-", [0, -1, 1, 0], false, true, 0, "CI", Even),
    rec("D+S-", [0, 1, -1, 0], false, true, 0, "DIII", Even),
    rec("C+S+", [0, -1, -1, 0], false, true, 0, "AIII", Four),
    rec("AI+S+", [1, 0, 0, 1], false, true, 0, "BDI", Even),
    rec("AI+S-", [1, 0, 0, -1], false, true, 0, "AIII", Even),
    rec("AII+S+", [-1, 0, 0, -1], false, true, 0, "CII", Four),
    rec("BDI+S++", [1, 1, 1, 1], true, true, 1, "BDI", Even),
    rec("BDI+S--", [1, 1, -1, -1], true, true, 1, "DIII", Even),
    rec("DIII+S++", [-1, 1, 1, -1], true, true, 1, "CII", Four),
    rec("CI+S++", [1, -1, -1, 1], true, true, 1, "BDI", Four),
    rec("CI+S--", [1, -1, 1, -1], true, true, 1, "CI", Four),
    rec("CII+S++", [-1, -1, -1, -1], true, true, 1, "CII", Four),
    rec("BDI+S+-", [1, 1, -1, 1], true, true, -1, "D", Any),
    rec("BDI+S-+", [1, 1, 1, -1], true, true, -1, "A", Any),
    rec("DIII+S+-", [-1, 1, -1, -1], true, true, -1, "AII", Even),
    rec("CI+S+-", [1, -1, 1, 1], true, true, -1, "AI", Any),
    rec("CI+S-+", [1, -1, -1, -1], true, true, -1, "A", Even),
    rec("CII+S+-", [-1, -1, 1, -1], true, true, -1, "C", Even),
];

/// Canonical spelling of a class label. Accepts `†`, `^dagger`, `dag`,
/// unicode subscripts and TeX-ish decorations.
pub fn normalize_name(raw: &str) -> String {
    let mut s: String = raw
        .chars()
        .filter(|c| !c.is_whitespace() && !matches!(c, '{' | '}' | '_' | '$' | '(' | ')'))
        .map(|c| match c {
            '₊' => '+',
            '₋' | '−' => '-',
            c => c,
        })
        .collect::<String>()
        .to_lowercase();
    s = s.replace("\\mathcal", "").replace("\\dagger", "†").replace("\\dag", "†");
    s = s.replace("^dagger", "†").replace("dagger", "†").replace("^†", "†");
    s = s.replace("dag", "†").replace('\'', "†");
    s.to_uppercase()
}

pub fn lookup(name: &str) -> Result<&'static ClassRecord> {
    let n = normalize_name(name);
    CLASSES
        .iter()
        .find(|r| r.name == n)
        .ok_or_else(|| Error::UnknownClass(name.to_string()))
}

/// The four antiunitary signs in the order TRS, PHS, TRS†, PHS†.
pub type Signature = [Option<i8>; 4];

impl ClassRecord {
    pub fn signature(&self) -> Signature {
        [self.trs, self.phs, self.trs_dag, self.phs_dag]
    }

    /// Number of independent antiunitary symmetries.
    pub fn n_antiunitary(&self) -> usize {
        match self.signature().iter().filter(|s| s.is_some()).count() {
            4 => 3,
            k => k,
        }
    }

    /// Reference energies that preserve every symmetry of the class.
    pub fn conserving_energy(&self) -> EnergyKind {
        let mut k = EnergyKind::GenericComplex;
        if self.trs.is_some() {
            k = k.meet(EnergyKind::Real);
        }
        if self.phs.is_some() || self.sls {
            k = k.meet(EnergyKind::Zero);
        }
        if self.phs_dag.is_some() || self.cs {
            k = k.meet(EnergyKind::Imaginary);
        }
        k
    }

    pub fn to_json(&self) -> Value {
        let flag = self.cs_sls.map(|f| if f > 0 { "+" } else { "-" });
        json!({
            "name": self.name,
            "N": self.n_antiunitary(),
            "TRS": self.trs,
            "PHS": self.phs,
            "TRS†": self.trs_dag,
            "PHS†": self.phs_dag,
            "CS": self.cs,
            "SLS": self.sls,
            "[C,S]": flag,
            "HSC": self.hermitian,
            "remark": self.dim_rule.remark(),
        })
    }
}

/// The database as a JSON array, one object per class in table order.
pub fn table_json() -> Value {
    Value::Array(CLASSES.iter().map(ClassRecord::to_json).collect())
}

/// The database grouped by Hermitian counterpart, in the order of the ten
/// Altland-Zirnbauer classes.
pub fn grouped_json() -> Value {
    const AZ: [&str; 10] = ["A", "AI", "AII", "AIII", "BDI", "CII", "D", "DIII", "C", "CI"];
    let mut out = serde_json::Map::new();
    for h in AZ {
        let rows: Vec<Value> =
            CLASSES.iter().filter(|r| r.hermitian == h).map(ClassRecord::to_json).collect();
        out.insert(h.to_string(), Value::Array(rows));
    }
    Value::Object(out)
}

/// Class with the given antiunitary content. For `N ≥ 1` only the four
/// signs matter (CS/SLS follow from products); for `N = 0` the presence of
/// CS/SLS and their commutation flag decide.
pub fn match_symmetries(
    sig: Signature,
    cs: bool,
    sls: bool,
    flag: Option<i8>,
) -> Option<&'static ClassRecord> {
    let direct = |sig: Signature| {
        if sig.iter().all(Option::is_none) {
            CLASSES.iter().find(|r| {
                r.signature() == sig
                    && r.cs == cs
                    && r.sls == sls
                    && (!(cs && sls) || r.cs_sls == flag)
            })
        } else {
            CLASSES.iter().find(|r| r.signature() == sig)
        }
    };
    // H -> iH exchanges TRS and PHS† and leaves the class unchanged.
    direct(sig).or_else(|| {
        if sig.iter().all(Option::is_none) {
            None
        } else {
            direct([sig[3], sig[1], sig[2], sig[0]])
        }
    })
}

/// The class that survives when a member of `rec` is probed at energies of
/// kind `e`.
pub fn reduce(rec: &'static ClassRecord, e: EnergyKind) -> &'static ClassRecord {
    if e.within(rec.conserving_energy()) {
        return rec;
    }
    let keep = |s: Option<i8>, k: EnergyKind| s.filter(|_| e.within(k));
    let sig = [
        keep(rec.trs, EnergyKind::Real),
        keep(rec.phs, EnergyKind::Zero),
        rec.trs_dag,
        keep(rec.phs_dag, EnergyKind::Imaginary),
    ];
    let cs = rec.cs && e.within(EnergyKind::Imaginary);
    let sls = rec.sls && e.within(EnergyKind::Zero);
    let flag = if cs && sls { rec.cs_sls } else { None };
    match_symmetries(sig, cs, sls, flag).expect("symmetry reduction stays inside the 38 classes")
}

/// A class label together with the kind of reference energy it is probed at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryClassTag {
    pub name: String,
    pub energy: EnergyKind,
}

impl SymmetryClassTag {
    /// Tag at the class's own symmetry-conserving energy.
    pub fn new(name: &str) -> Result<Self> {
        let r = lookup(name)?;
        Ok(Self { name: r.name.to_string(), energy: r.conserving_energy() })
    }

    pub fn at_energy(name: &str, e: C64) -> Result<Self> {
        let r = lookup(name)?;
        Ok(Self { name: r.name.to_string(), energy: EnergyKind::of(e) })
    }

    pub fn with_kind(name: &str, energy: EnergyKind) -> Result<Self> {
        let r = lookup(name)?;
        Ok(Self { name: r.name.to_string(), energy })
    }

    pub fn record(&self) -> Result<&'static ClassRecord> {
        lookup(&self.name)
    }

    /// True when the energy preserves every symmetry of the class.
    pub fn is_conserving(&self) -> Result<bool> {
        Ok(self.energy.within(self.record()?.conserving_energy()))
    }

    /// Class actually realized at this energy.
    pub fn effective(&self) -> Result<&'static ClassRecord> {
        Ok(reduce(self.record()?, self.energy))
    }
}

/// Hermitian (Altland-Zirnbauer) class of the Hermitized Hamiltonian.
///
/// At symmetry-breaking energies the class is first reduced to the symmetries
/// that survive; the correspondence in that regime is a conjecture rather
/// than a theorem.
pub fn counterpart(tag: &SymmetryClassTag) -> Result<&'static str> {
    Ok(tag.effective()?.hermitian)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_parse() {
        for (i, a) in CLASSES.iter().enumerate() {
            for b in &CLASSES[i + 1..] {
                assert_ne!(a.name, b.name);
            }
            assert_eq!(lookup(a.name).unwrap().name, a.name);
        }
        assert_eq!(lookup("AII^dagger").unwrap().name, "AII†");
        assert_eq!(lookup("aiii + S_-").unwrap().name, "AIII+S-");
        assert_eq!(lookup("BDI + S₊₋").unwrap().name, "BDI+S+-");
        assert_eq!(lookup("CIIdag").unwrap().name, "CII†");
        assert!(lookup("XYZ").is_err());
    }

    #[test]
    fn class_counts_per_n() {
        let count = |n| CLASSES.iter().filter(|r| r.n_antiunitary() == n).count();
        assert_eq!([count(0), count(1), count(2), count(3)], [5, 6, 15, 12]);
    }

    #[test]
    fn conserving_energies() {
        let k = |n| lookup(n).unwrap().conserving_energy();
        assert_eq!(k("A"), EnergyKind::GenericComplex);
        assert_eq!(k("AI"), EnergyKind::Real);
        assert_eq!(k("AII†"), EnergyKind::GenericComplex);
        assert_eq!(k("AIII"), EnergyKind::Imaginary);
        assert_eq!(k("CII†"), EnergyKind::Imaginary);
        assert_eq!(k("DIII"), EnergyKind::Zero);
    }

    #[test]
    fn every_class_matches_itself() {
        for r in &CLASSES {
            let flag = if r.cs && r.sls { r.cs_sls } else { None };
            assert_eq!(match_symmetries(r.signature(), r.cs, r.sls, flag).unwrap().name, r.name);
        }
    }

    #[test]
    fn reduction_examples() {
        let red = |n, e| reduce(lookup(n).unwrap(), e).name;
        assert_eq!(red("AI", EnergyKind::GenericComplex), "A");
        assert_eq!(red("AII", EnergyKind::Imaginary), "A");
        assert_eq!(red("BDI", EnergyKind::Imaginary), "AIII");
        assert_eq!(red("BDI", EnergyKind::Real), "AI");
        assert_eq!(red("AI+S+", EnergyKind::Imaginary), "AI");
        assert_eq!(red("BDI+S++", EnergyKind::Real), "BDI†");
        assert_eq!(red("AII†", EnergyKind::GenericComplex), "AII†");
    }

    #[test]
    fn counterparts_of_headline_rows() {
        let c = |n: &str, k| counterpart(&SymmetryClassTag::with_kind(n, k).unwrap()).unwrap();
        assert_eq!(c("AII†", EnergyKind::GenericComplex), "DIII");
        assert_eq!(c("CII†", EnergyKind::Zero), "AII");
        assert_eq!(c("AI", EnergyKind::GenericComplex), "AIII");
        assert_eq!(c("AI", EnergyKind::Real), "BDI");
        assert_eq!(c("DIII", EnergyKind::Zero), "AII");
    }
}
