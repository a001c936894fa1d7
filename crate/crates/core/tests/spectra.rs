use andloc::linalg::{self, CMat};
use andloc::models::{build_family, build_o1, LatticeSpec};
use andloc::spectra::{
    ai_two_level, conjugation_mismatch, count_real, diagonalize_default, dos_hist, ginibre, ipr, ipr_overlay,
    power_law_exponent, splitting_stats, wigner_exponent, write_histogram_csv, write_spectrum_csv, Axis, Binning,
    Ginibre, SplittingSpec, SpectrumResult,
};
use andloc::C64;
use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_complex(n: usize, seed: u64) -> CMat {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Mat::from_fn(n, n, |_, _| {
        let (a, b): (f64, f64) = (StandardNormal.sample(&mut r), StandardNormal.sample(&mut r));
        C64::new(a, b)
    })
}

fn trace(h: &CMat) -> C64 {
    (0..h.nrows()).map(|i| h[(i, i)]).sum()
}

#[test]
fn diagonal_matrix() {
    let h = linalg::diag(&[C64::new(1.0, 2.0), C64::new(-3.0, 0.0)]);
    let s = diagonalize_default(&h, true).unwrap();
    let v = s.vectors.as_ref().unwrap();
    for (k, e) in s.eigenvalues.iter().enumerate() {
        let i = if *e == C64::new(1.0, 2.0) { 0 } else { 1 };
        assert!((e - h[(i, i)]).norm() < 1e-14);
        assert!((v[(i, k)].norm() - 1.0).abs() < 1e-14);
        assert!(v[(1 - i, k)].norm() < 1e-14);
    }
    assert_eq!(s.ipr.unwrap(), vec![1.0, 1.0]);
}

#[test]
fn eigenpairs_and_trace() {
    for (n, seed) in [(16, 1), (64, 2), (100, 3)] {
        let h = random_complex(n, seed);
        let s = diagonalize_default(&h, true).unwrap();
        let hn = linalg::frobenius(&h);
        let v = s.vectors.as_ref().unwrap();
        assert_eq!(v.ncols(), n);
        for (k, &e) in s.eigenvalues.iter().enumerate() {
            let psi = linalg::column(v, k);
            assert!((linalg::vec_norm(&psi) - 1.0).abs() < 1e-10);
            let hp = linalg::matvec(&h, &psi);
            let res: f64 = hp.iter().zip(&psi).map(|(a, b)| (a - e * b).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-8 * hn);
        }
        let sum: C64 = s.eigenvalues.iter().sum();
        assert!((sum - trace(&h)).norm() < 1e-8 * hn);
    }
}

#[test]
fn adjoint_spectrum_is_the_conjugate() {
    let h = random_complex(64, 9);
    let a = diagonalize_default(&h, false).unwrap().eigenvalues;
    let b = diagonalize_default(&linalg::adjoint(&h), false).unwrap().eigenvalues;
    let mut used = vec![false; b.len()];
    for e in &a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, x)| (j, (x - e.conj()).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[j] = true;
        assert!(d < 1e-10, "{d}");
    }
}

#[test]
fn dense_cap_is_enforced() {
    let h = random_complex(10, 0);
    assert!(andloc::spectra::diagonalize(&h, false, 9, "").is_err());
    assert!(diagonalize_default(&Mat::zeros(3, 4), false).is_err());
}

#[test]
fn clean_o1_cube_is_symmetric_under_re_im_exchange() {
    let (mut re2, mut im2) = (Vec::new(), Vec::new());
    for seed in 0..4000 {
        let h = build_o1(LatticeSpec::cube(3, 2), 0.0, seed).unwrap().assemble_full(64).unwrap();
        let e = diagonalize_default(&h, false).unwrap().eigenvalues;
        re2.push(e.iter().map(|z| z.re * z.re).sum::<f64>() / e.len() as f64);
        im2.push(e.iter().map(|z| z.im * z.im).sum::<f64>() / e.len() as f64);
    }
    let n = re2.len() as f64;
    let diff: Vec<f64> = re2.iter().zip(&im2).map(|(a, b)| a - b).collect();
    let mean = diff.iter().sum::<f64>() / n;
    let sd = (diff.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 3.0 * sd / n.sqrt(), "⟨Re²−Im²⟩ = {mean} ± {}", sd / n.sqrt());
}

#[test]
fn ipr_limits() {
    for n in [1, 7, 100] {
        let uniform = vec![C64::new(0.3, -0.4); n];
        assert!((ipr(&uniform).unwrap() - 1.0 / n as f64).abs() < 1e-15);
        let mut delta = vec![C64::new(0.0, 0.0); n];
        delta[n / 2] = C64::new(0.0, 2.0);
        assert_eq!(ipr(&delta).unwrap(), 1.0);
    }
    assert!(ipr(&[C64::new(0.0, 0.0); 4]).is_err());
}

#[test]
fn gaussian_vectors_follow_porter_thomas() {
    let n = 1000;
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let trials = 400;
    let mean = (0..trials)
        .map(|_| {
            let v: Vec<C64> = (0..n)
                .map(|_| C64::new(StandardNormal.sample(&mut r), StandardNormal.sample(&mut r)))
                .collect();
            ipr(&v).unwrap()
        })
        .sum::<f64>()
        / trials as f64;
    let want = 2.0 / (n as f64 + 1.0);
    assert!((mean / want - 1.0).abs() < 0.05, "{mean} vs {want}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ipr_bounds(v in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..64)) {
        let psi: Vec<C64> = v.iter().map(|&(a, b)| C64::new(a, b)).collect();
        prop_assume!(psi.iter().any(|z| z.norm() > 1e-6));
        let i = ipr(&psi).unwrap();
        let n = psi.len() as f64;
        prop_assert!(i >= 1.0 / n - 1e-12 && i <= 1.0 + 1e-12);
    }

    #[test]
    fn trace_identity(seed in 0u64..1000, n in 2usize..40) {
        let h = random_complex(n, seed);
        let s = diagonalize_default(&h, false).unwrap();
        let sum: C64 = s.eigenvalues.iter().sum();
        prop_assert!((sum - trace(&h)).norm() < 1e-8 * linalg::frobenius(&h));
    }

    #[test]
    fn dos_mass_is_one(seed in 0u64..1000, samples in 1usize..6, bins in 1usize..30) {
        let spectra: Vec<SpectrumResult> = (0..samples)
            .map(|k| diagonalize_default(&random_complex(12, seed * 10 + k as u64), false).unwrap())
            .collect();
        for axis in [Axis::ImagPart, Axis::ComplexPlane] {
            for b in [Binning::Count(bins), Binning::FreedmanDiaconis] {
                let h = dos_hist(&spectra, axis, &b).unwrap();
                prop_assert!((h.total_mass() - 1.0).abs() < 1e-12);
                prop_assert!(h.mass.iter().all(|m| *m >= 0.0) && h.density.iter().all(|d| *d >= 0.0));
                prop_assert_eq!(h.samples, samples);
            }
        }
    }
}

#[test]
fn single_eigenvalue_fills_one_bin() {
    let s = diagonalize_default(&linalg::diag(&[C64::new(0.5, 0.25)]), false).unwrap();
    let h = dos_hist(&[s], Axis::ImagPart, &Binning::Count(5)).unwrap();
    assert_eq!(h.mass.iter().filter(|m| **m > 0.0).count(), 1);
    assert_eq!(h.total_mass(), 1.0);
    assert!(dos_hist(&[], Axis::ImagPart, &Binning::Count(5)).is_err());
}

fn imag_peak_ratio(h: &andloc::spectra::DosHistogram) -> (f64, f64, f64) {
    let centre = h.density[h.bin_of(0.0).unwrap()];
    let mut sorted = h.density.clone();
    sorted.sort_by(f64::total_cmp);
    let max = *sorted.last().unwrap();
    (centre, sorted[sorted.len() / 2], max)
}

#[test]
fn ai_spectra_pile_up_on_the_real_axis() {
    let spectra: Vec<SpectrumResult> = (0..40)
        .map(|s| diagonalize_default(&build_o1(LatticeSpec::cube(3, 6), 20.0, s).unwrap().assemble_full(8192).unwrap(), false).unwrap())
        .collect();
    for s in &spectra {
        assert!(conjugation_mismatch(&s.eigenvalues) < 1e-8);
        assert!(count_real(&s.eigenvalues) > 0);
    }
    let h = dos_hist(&spectra, Axis::ImagPart, &Binning::Count(41)).unwrap();
    let (centre, median, _) = imag_peak_ratio(&h);
    assert!(centre > 5.0 * median, "{centre} vs median {median}");
}

#[test]
fn aii_spectra_have_a_soft_gap() {
    let spectra: Vec<SpectrumResult> = (0..20)
        .map(|s| {
            let tag = andloc::symmetry::SymmetryClassTag::new("AII").unwrap();
            let m = andloc::models::build_su2(
                LatticeSpec::cube(2, 12),
                andloc::models::DisorderSpec::su2(1.0, 1.0),
                &tag,
                s,
            )
            .unwrap();
            diagonalize_default(&m.assemble_full(8192).unwrap(), false).unwrap()
        })
        .collect();
    for s in &spectra {
        assert!(conjugation_mismatch(&s.eigenvalues) < 1e-8);
    }
    let h = dos_hist(&spectra, Axis::ImagPart, &Binning::Count(21)).unwrap();
    let (centre, _, max) = imag_peak_ratio(&h);
    assert!(centre < 0.3 * max, "{centre} vs max {max}");
}

#[test]
fn aii_dagger_spectra_come_in_pairs() {
    let h = build_family("AII†", LatticeSpec::cube(3, 4), 6.0, 5).unwrap().assemble_full(8192).unwrap();
    let e = diagonalize_default(&h, false).unwrap().eigenvalues;
    // H = σ_y Hᵀ σ_y: every level is twofold degenerate
    let mut used = vec![false; e.len()];
    for i in 0..e.len() {
        if used[i] {
            continue;
        }
        let j = (0..e.len())
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| (e[a] - e[i]).norm().total_cmp(&(e[b] - e[i]).norm()))
            .unwrap();
        assert!((e[j] - e[i]).norm() < 1e-8);
        used[i] = true;
        used[j] = true;
    }
}

#[test]
fn aii_dagger_overlay_favours_small_energies() {
    let m = build_family("AII†", LatticeSpec::cube(3, 6), 7.0, 1).unwrap();
    let s = diagonalize_default(&m.assemble_full(8192).unwrap(), true).unwrap();
    let rows = ipr_overlay(&[s]).unwrap();
    // Spearman correlation between |E| and 1/I
    let rank = |v: Vec<f64>| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (k, &i) in idx.iter().enumerate() {
            r[i] = k as f64;
        }
        r
    };
    let a = rank(rows.iter().map(|r| r.re.hypot(r.im)).collect());
    let b = rank(rows.iter().map(|r| r.inv_ipr).collect());
    let n = a.len() as f64;
    let m = (n - 1.0) / 2.0;
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - m) * (y - m)).sum();
    let var: f64 = a.iter().map(|x| (x - m).powi(2)).sum();
    assert!(cov / var < 0.0, "rank correlation {}", cov / var);
}

#[test]
fn overlay_needs_vectors() {
    let s = diagonalize_default(&random_complex(4, 1), false).unwrap();
    assert!(ipr_overlay(&[s]).is_err());
    let n = 8;
    let uniform = diagonalize_default(&linalg::scale(&Mat::from_fn(n, n, |_, _| C64::new(1.0, 0.0)), C64::new(1.0, 0.0)), true).unwrap();
    let rows = ipr_overlay(&[uniform]).unwrap();
    let top = rows.iter().max_by(|a, b| a.re.total_cmp(&b.re)).unwrap();
    assert!((top.re - n as f64).abs() < 1e-10);
    assert!((top.inv_ipr - n as f64).abs() < 1e-8);
    let delta = diagonalize_default(&linalg::diag(&[C64::new(2.0, 0.0)]), true).unwrap();
    assert_eq!(ipr_overlay(&[delta]).unwrap()[0].inv_ipr, 1.0);
}

#[test]
fn ginibre_structure() {
    let o = ginibre(Ginibre::Orthogonal, 20, 1).unwrap();
    assert!((0..20).all(|i| (0..20).all(|j| o[(i, j)].im == 0.0)));
    let s = ginibre(Ginibre::Symplectic, 10, 2).unwrap();
    assert_eq!(s.nrows(), 20);
    // σ_y H* σ_y = H with σ_y on the block index
    let sy = linalg::block_op(2, 10);
    let lhs = linalg::conjugate_by(&sy, &linalg::conj(&s));
    assert_eq!(lhs, s);
    let u = ginibre(Ginibre::Unitary, 20, 3).unwrap();
    let var = (0..20).flat_map(|i| (0..20).map(move |j| (i, j))).map(|(i, j)| u[(i, j)].norm_sqr()).sum::<f64>() / 400.0;
    assert!((var - 1.0).abs() < 0.2);
    assert_eq!(ginibre(Ginibre::Unitary, 20, 3).unwrap(), u);
    assert!(ginibre(Ginibre::Unitary, 0, 3).is_err());
    assert_eq!(Ginibre::parse("GinSE").unwrap(), Ginibre::Symplectic);
}

#[test]
fn ginse_has_no_real_eigenvalues() {
    for seed in 0..5 {
        let e = diagonalize_default(&ginibre(Ginibre::Symplectic, 100, seed).unwrap(), false).unwrap().eigenvalues;
        assert_eq!(count_real(&e), 0);
        assert!(conjugation_mismatch(&e) < 1e-8);
    }
}

/// Expected number of real eigenvalues of an `n × n` GinOE matrix.
fn ginoe_expected_real(n: usize) -> f64 {
    // ratio of double factorials (2m−1)!!/(2m)!! built up iteratively
    let dfr = |m: usize| (1..=m).map(|k| (2 * k - 1) as f64 / (2 * k) as f64).product::<f64>();
    if n % 2 == 0 {
        // √2 Σ_{k=0}^{n/2−1} (4k−1)!!/(4k)!!
        std::f64::consts::SQRT_2 * (0..n / 2).map(|k| dfr(2 * k)).sum::<f64>()
    } else {
        // 1 + √2 Σ_{k=1}^{(n−1)/2} (4k−3)!!/(4k−2)!!
        1.0 + std::f64::consts::SQRT_2 * (1..=(n - 1) / 2).map(|k| dfr(2 * k - 1)).sum::<f64>()
    }
}

#[test]
fn ginoe_real_eigenvalue_count() {
    assert!((ginoe_expected_real(1) - 1.0).abs() < 1e-15);
    assert!((ginoe_expected_real(2) - std::f64::consts::SQRT_2).abs() < 1e-15);
    for n in [6, 11] {
        let trials = 2000;
        let counts: Vec<f64> = (0..trials)
            .map(|s| count_real(&diagonalize_default(&ginibre(Ginibre::Orthogonal, n, s).unwrap(), false).unwrap().eigenvalues) as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let sd = (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0)).sqrt();
        let want = ginoe_expected_real(n);
        assert!((mean - want).abs() < 4.0 * sd / (trials as f64).sqrt(), "n={n}: {mean} vs {want}");
    }
}

#[test]
fn power_law_estimator_recovers_known_exponents() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    for beta in [0.0, 1.0, 2.0] {
        // P(s) ∝ s^β on [0, 1]
        let s: Vec<f64> = (0..100_000).map(|_| r.random::<f64>().powf(1.0 / (beta + 1.0))).collect();
        let b = power_law_exponent(&s, 0.2).unwrap();
        assert!((b - beta).abs() < 0.05, "{b} vs {beta}");
    }
    assert!(power_law_exponent(&[0.1, 0.2], 0.5).is_err());
}

#[test]
fn wigner_estimator_recovers_the_surmise() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    // |Δ| with three Gaussian components: P(s) ∝ s² exp(−s²/2)
    let s: Vec<f64> = (0..50_000)
        .map(|_| (0..3).map(|_| StandardNormal.sample(&mut r)).map(|x: f64| x * x).sum::<f64>().sqrt())
        .collect();
    let (b, a) = wigner_exponent(&s).unwrap();
    assert!((b - 2.0).abs() < 0.05 && (a - 0.5).abs() < 0.02, "β={b} A={a}");
}

#[test]
fn aii_splittings_vanish_quadratically() {
    let spec = SplittingSpec { dim: 2, width: 8, w_r: 1.0, strength: 0.002, samples: 20, seed: 3, fit_fraction: 0.05 };
    let st = splitting_stats(&spec).unwrap();
    assert!(st.splittings.len() >= 1000);
    assert!((st.beta - 2.0).abs() < 0.3, "β̂ = {}", st.beta);

    let zero = splitting_stats(&SplittingSpec { strength: 0.0, ..spec.clone() }).unwrap();
    assert!(zero.splittings.iter().all(|s| *s == 0.0));
    assert!(zero.beta.is_nan());

    assert!(splitting_stats(&SplittingSpec { samples: 2, ..spec }).is_err());
}

#[test]
fn ai_two_level_real_and_complex_regions() {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    let mut real = 0;
    for _ in 0..2000 {
        let (e1, e2, d): (f64, f64, f64) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-0.5..0.5));
        let v = ai_two_level(e1, e2, d).unwrap();
        let both_real = v.iter().all(|z| z.im == 0.0);
        assert_eq!(both_real, (e1 - e2).abs() / 2.0 >= d.abs(), "{e1} {e2} {d}");
        if both_real {
            real += 1;
        } else {
            assert!((v[0].im + v[1].im).abs() < 1e-14 && v[0].im != 0.0);
        }
    }
    assert!(real > 0 && real < 2000);
}

#[test]
fn csv_exports() {
    let s = diagonalize_default(&random_complex(5, 2), true).unwrap();
    let mut buf = Vec::new();
    write_spectrum_csv(&[s.clone()], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "re,im,ipr");
    assert_eq!(text.lines().count(), 6);
    let h = dos_hist(&[s], Axis::ImagPart, &Binning::Count(3)).unwrap();
    let mut buf = Vec::new();
    write_histogram_csv(&h, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "bin_lo,bin_hi,density");
    assert_eq!(text.lines().count(), 4);
}
