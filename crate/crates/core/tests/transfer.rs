use andloc::linalg::{self, CMat};
use andloc::models::{build_family, build_su2, Boundary, DisorderSpec, LatticeSpec, Link, ModelInstance, Slice};
use andloc::symmetry::SymmetryClassTag;
use andloc::transfer::{
    find_crossing, lambda_scan, propagate, read_csv, slice_transfer, write_csv, CleanChain, Exponents, ScanPoint,
    ScanSpec, SliceSource, TransferConfig, CSV_HEADER,
};
use andloc::C64;
use faer::Mat;
use proptest::prelude::*;

fn cfg(e: C64, max_slices: u64) -> TransferConfig {
    TransferConfig { energy: e, max_slices, target_rel_error: 1e-9, ..Default::default() }
}

/// Growth rate of the clean chain: `ln|λ|` for the root of `λ + 1/λ = E`
/// outside the unit circle.
fn clean_chain_gamma(e: C64) -> f64 {
    let disc = (e * e / 4.0 - 1.0).sqrt();
    let roots = [e / 2.0 + disc, e / 2.0 - disc];
    roots.iter().map(|z| z.norm().ln().abs()).fold(0.0, f64::max)
}

#[test]
fn clean_chain_at_three() {
    let t = std::time::Instant::now();
    let r = propagate(&CleanChain, &cfg(C64::new(3.0, 0.0), 100_000)).unwrap();
    assert!(t.elapsed().as_secs_f64() < 1.0);
    let exact = 1.5f64.acosh();
    assert!((r.gamma_min - exact).abs() < 1e-3, "{} vs {exact}", r.gamma_min);
    assert_eq!(r.exponents.len(), 2);
    assert!((r.exponents[0] + r.exponents[1]).abs() < 1e-6);
    assert_eq!(r.lambda, r.xi);
}

#[test]
fn clean_chain_at_complex_energies() {
    for e in [C64::new(0.5, 0.3), C64::new(-2.5, 1.0), C64::new(0.0, 0.1)] {
        let r = propagate(&CleanChain, &cfg(e, 65_536)).unwrap();
        let exact = clean_chain_gamma(e);
        assert!((r.gamma_min - exact).abs() < 1e-4, "E={e}: {} vs {exact}", r.gamma_min);
    }
}

#[test]
fn slice_matrix_matches_the_dense_model() {
    let m = build_family("AII", LatticeSpec::strip(2, 4), 3.0, 5).unwrap();
    let e = C64::new(0.2, 0.1);
    let nd = m.slice_dim();
    for n in 1..4u64 {
        let t = slice_transfer(&m, n, e).unwrap();
        let f = m.forward_hopping(n);
        let b = m.backward_hopping(n - 1);
        let tl = Mat::from_fn(nd, nd, |i, j| t[(i, j)]);
        let tr = Mat::from_fn(nd, nd, |i, j| t[(i, nd + j)]);
        let lhs = &f * &tl;
        let rhs = linalg::scale(&linalg::shift(&m.slice_hamiltonian(n), e), C64::new(-1.0, 0.0));
        assert!(linalg::frobenius(&linalg::sub(&lhs, &rhs)) < 1e-12);
        let lhs = &f * &tr;
        assert!(linalg::frobenius(&linalg::add(&lhs, &b)) < 1e-12);
        for i in 0..nd {
            for j in 0..nd {
                let id = if i == j { 1.0 } else { 0.0 };
                assert_eq!(t[(nd + i, j)], C64::new(id, 0.0));
                assert_eq!(t[(nd + i, nd + j)], C64::new(0.0, 0.0));
            }
        }
    }
}

/// Dense product of slice matrices with modified Gram-Schmidt every `qi`
/// slices; returns the accumulated `ln R_jj`.
fn dense_log_growth<S: SliceSource>(src: &S, e: C64, slices: u64, qi: u64) -> Vec<f64> {
    let n2 = 2 * src.slice_dim();
    let mut q: CMat = linalg::identity(n2);
    let mut acc = vec![0.0; n2];
    for n in 0..slices {
        q = &slice_transfer(src, n, e).unwrap() * &q;
        if (n + 1) % qi == 0 {
            for j in 0..n2 {
                for k in 0..j {
                    let dot: C64 = (0..n2).map(|i| q[(i, k)].conj() * q[(i, j)]).sum();
                    for i in 0..n2 {
                        let v = q[(i, k)];
                        q[(i, j)] -= dot * v;
                    }
                }
                let norm = (0..n2).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
                acc[j] += norm.ln();
                for i in 0..n2 {
                    q[(i, j)] /= norm;
                }
            }
        }
    }
    acc
}

#[test]
fn sparse_propagation_matches_dense_products() {
    for class in ["AI", "AII", "DIII"] {
        let m = build_family(class, LatticeSpec::strip(2, 4), 4.0, 9).unwrap();
        let e = C64::new(0.3, 0.0);
        let c = TransferConfig { max_slices: 64, ..cfg(e, 64) };
        let r = propagate(&m, &c).unwrap();
        assert_eq!(r.slices_used, 64);
        let dense = dense_log_growth(&m, e, 64, 8);
        for (a, b) in r.exponents.iter().zip(&dense) {
            assert!((a * 64.0 - b).abs() < 1e-8 * b.abs().max(1.0), "{class}: {} vs {b}", a * 64.0);
        }
    }
}

/// Multiplies every inter-slice hopping by a unit-modulus `c` (and its
/// reverse by `c*`).
struct Gauged<'a> {
    inner: &'a ModelInstance,
    c: C64,
}

impl SliceSource for Gauged<'_> {
    fn width(&self) -> usize {
        self.inner.width()
    }
    fn orbitals(&self) -> usize {
        SliceSource::orbitals(self.inner)
    }
    fn slice_dim(&self) -> usize {
        SliceSource::slice_dim(self.inner)
    }
    fn slice(&self, n: u64) -> Slice {
        SliceSource::slice(self.inner, n)
    }
    fn link(&self, n: u64) -> Link {
        let l = SliceSource::link(self.inner, n);
        Link {
            forward: l.forward.iter().map(|z| z * self.c).collect(),
            backward: l.backward.iter().map(|z| z * self.c.conj()).collect(),
        }
    }
}

#[test]
fn gauge_phase_leaves_exponents_unchanged() {
    let m = build_family("AII", LatticeSpec::strip(2, 6), 5.0, 21).unwrap();
    let c = cfg(C64::new(0.0, 0.0), 40_000);
    let a = propagate(&m, &c).unwrap();
    let b = propagate(&Gauged { inner: &m, c: C64::from_polar(1.0, 0.77) }, &c).unwrap();
    for i in 0..a.exponents.len() {
        let tol = 3.0 * (a.exponent_se[i].powi(2) + b.exponent_se[i].powi(2)).sqrt();
        assert!((a.exponents[i] - b.exponents[i]).abs() <= tol.max(1e-9));
    }
}

#[test]
fn exponent_count_and_hermitian_pairing() {
    let tag = SymmetryClassTag::new("AII†").unwrap();
    let m = build_su2(LatticeSpec::strip(2, 4), DisorderSpec::su2(8.0, 0.0), &tag, 4).unwrap();
    let r = propagate(&m, &cfg(C64::new(0.5, 0.0), 100_000)).unwrap();
    assert_eq!(r.exponents.len(), 2 * m.slice_dim());
    let mut g = r.exponents.clone();
    g.sort_by(f64::total_cmp);
    let k = g.len();
    for i in 0..k / 2 {
        let (lo, hi) = (g[i], g[k - 1 - i]);
        assert!((lo + hi).abs() < 1e-3 * hi.abs(), "pair {lo} {hi}");
    }
    let leading = propagate(&m, &TransferConfig { exponents: Exponents::Leading, ..cfg(C64::new(0.5, 0.0), 100_000) })
        .unwrap();
    assert_eq!(leading.exponents.len(), m.slice_dim());
    assert!((leading.gamma_min - r.gamma_min).abs() < 1e-9 * r.gamma_min);
}

#[test]
fn qr_interval_does_not_matter() {
    // interval 16 is past the safe range at stronger disorder
    let m = build_family("AII", LatticeSpec::strip(2, 6), 3.0, 3).unwrap();
    let results: Vec<_> = [4usize, 8, 16]
        .iter()
        .map(|&qi| propagate(&m, &TransferConfig { qr_interval: qi, ..cfg(C64::new(0.0, 0.0), 16_384) }).unwrap())
        .collect();
    for a in &results {
        for b in &results {
            let tol = 3.0 * (a.se_gamma.powi(2) + b.se_gamma.powi(2)).sqrt();
            assert!((a.gamma_min - b.gamma_min).abs() <= tol);
        }
    }
}

#[test]
fn conjugate_energy_gives_the_same_lambda() {
    for class in ["AI", "AII"] {
        let m = build_family(class, LatticeSpec::strip(2, 6), 4.0, 8).unwrap();
        let e = C64::new(0.4, 0.25);
        let a = propagate(&m, &cfg(e, 40_000)).unwrap();
        let b = propagate(&m, &cfg(e.conj(), 40_000)).unwrap();
        let tol = 3.0 * (a.sigma_lambda().powi(2) + b.sigma_lambda().powi(2)).sqrt();
        assert!((a.lambda - b.lambda).abs() <= tol, "{class}: {} vs {}", a.lambda, b.lambda);
    }
}

#[test]
fn reported_errors_are_honest() {
    let runs: Vec<_> = (0..50u64)
        .map(|s| {
            let m = build_family("AI", LatticeSpec::strip(2, 4), 8.0, 1000 + s).unwrap();
            propagate(&m, &cfg(C64::new(0.0, 0.0), 20_480)).unwrap()
        })
        .collect();
    let g: Vec<f64> = runs.iter().map(|r| r.gamma_min).collect();
    let mean = g.iter().sum::<f64>() / 50.0;
    let sd = (g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 49.0).sqrt();
    let se = runs.iter().map(|r| r.se_gamma).sum::<f64>() / 50.0;
    assert!((sd / se - 1.0).abs() < 0.3, "sample sd {sd} vs mean se {se}");
}

#[test]
fn result_invariants() {
    let m = build_family("DIII", LatticeSpec::strip(2, 4), 6.0, 2).unwrap();
    let r = propagate(&m, &TransferConfig { target_rel_error: 0.05, ..cfg(C64::new(0.0, 0.0), 200_000) }).unwrap();
    assert!(r.converged);
    assert!(r.gamma_min > 0.0 && r.se_gamma >= 0.0);
    assert_eq!(r.xi, 1.0 / r.gamma_min);
    assert_eq!(r.lambda, r.xi / 4.0);
    assert!(r.se_gamma / r.gamma_min < 0.05);
    assert!(r.slices_used < 200_000);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        TransferConfig { qr_interval: 0, ..Default::default() },
        TransferConfig { target_rel_error: 0.0, ..Default::default() },
        TransferConfig { block_count: 7, ..Default::default() },
        TransferConfig { max_slices: 10, ..Default::default() },
        TransferConfig { energy: C64::new(f64::NAN, 0.0), ..Default::default() },
    ];
    for c in bad {
        assert!(propagate(&CleanChain, &c).is_err());
    }
}

fn small_scan() -> ScanSpec {
    ScanSpec {
        class: "AI".into(),
        dim: 2,
        widths: vec![4, 6],
        w_grid: vec![8.0, 10.0, 12.0],
        transverse_bc: Boundary::Periodic,
    }
}

#[test]
fn scan_is_canonical_and_thread_independent() {
    let c = cfg(C64::new(0.0, 0.0), 4096);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| lambda_scan(&small_scan(), &c).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a, b);
    assert_eq!(a.len(), 6);
    let keys: Vec<(usize, f64)> = a.iter().map(|p| (p.l, p.w)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    assert_eq!(keys, sorted);

    let one = ScanSpec { w_grid: vec![9.0], ..small_scan() };
    assert_eq!(lambda_scan(&one, &c).unwrap().len(), 2);
}

#[test]
fn csv_round_trip() {
    let rows = lambda_scan(&small_scan(), &cfg(C64::new(0.0, 0.0), 2048)).unwrap();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn duplicated_points_with_fresh_seeds_agree() {
    let c = cfg(C64::new(0.0, 0.0), 30_000);
    let a = propagate(&build_family("AI", LatticeSpec::strip(2, 6), 10.0, 1).unwrap(), &c).unwrap();
    let b = propagate(&build_family("AI", LatticeSpec::strip(2, 6), 10.0, 2).unwrap(), &c).unwrap();
    assert_ne!(a.lambda, b.lambda);
    assert!((a.lambda - b.lambda).abs() <= 3.0 * (a.sigma_lambda().powi(2) + b.sigma_lambda().powi(2)).sqrt());
}

fn point(l: usize, w: f64, lambda: f64) -> ScanPoint {
    ScanPoint {
        class: "AII".into(),
        dim: 3,
        e_re: 0.0,
        e_im: 0.0,
        w,
        l,
        lambda,
        sigma_lambda: 0.01,
        slices: 1000,
        converged: true,
    }
}

#[test]
fn crossing_of_synthetic_curves() {
    // Λ_L(W) = 1 − (W − 5) L / 10 crosses at W = 5 for every pair of L
    let mut rows = Vec::new();
    for l in [4, 8] {
        for w in [4.0, 4.5, 5.2, 6.0] {
            rows.push(point(l, w, 1.0 - (w - 5.0) * l as f64 / 10.0));
        }
    }
    let c = find_crossing(&rows).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!((c[0].lo, c[0].hi), (4.5, 5.2));
    assert!((c[0].estimate - 5.0).abs() < 1e-12);

    // no sign change: an empty list
    let flat: Vec<ScanPoint> = rows.iter().map(|p| point(p.l, p.w, 1.0 / p.l as f64)).collect();
    assert!(find_crossing(&flat).unwrap().is_empty());

    // one width only
    let one: Vec<ScanPoint> = rows.iter().filter(|p| p.l == 4).cloned().collect();
    assert!(find_crossing(&one).is_err());
}

#[test]
fn two_dimensional_aii_on_the_real_axis_has_no_transition() {
    let spec = ScanSpec {
        class: "AII".into(),
        dim: 2,
        widths: vec![4, 8],
        w_grid: vec![3.0, 5.0, 7.0, 9.0],
        transverse_bc: Boundary::Periodic,
    };
    let rows = lambda_scan(&spec, &cfg(C64::new(0.0, 0.0), 40_000)).unwrap();
    assert!(find_crossing(&rows).unwrap().is_empty(), "{rows:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn clean_chain_matches_closed_form(re in -4.0..4.0f64, im in 0.05..2.0f64) {
        let e = C64::new(re, im);
        let r = propagate(&CleanChain, &cfg(e, 8192)).unwrap();
        prop_assert!((r.gamma_min - clean_chain_gamma(e)).abs() < 1e-3);
    }
}
