use std::f64::consts::PI;

use emhd_core::field::init::{random_shells, single_mode, white_noise};
use emhd_core::littlewood_paley::{
    bernstein_margin, besov_norm, besov_time_norm, decompose_low_high, kernel_convolve, low_pass,
    project_shell, shell_amplitudes, time_norm,
};
use emhd_core::{lp_norm, BesovSpec, DyadicDecomposition, Grid, Kernel, LpFamily, Shape, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

fn l3_cos() -> f64 {
    ((2.0 * PI).powi(2) * 8.0 / 3.0).cbrt()
}

/// `F(x - a)` by a phase shift of every coefficient.
fn translated(f: &SpectralField, a: [f64; 3]) -> SpectralField {
    let g = f.grid();
    let comps = f
        .comps()
        .iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .map(|(idx, v)| {
                    let k = g.kf_of(idx);
                    let phase = -(k[0] * a[0] + k[1] * a[1] + k[2] * a[2]);
                    v * Complex64::from_polar(1.0, phase)
                })
                .collect()
        })
        .collect();
    SpectralField::from_coeffs(g, comps).unwrap()
}

/// Scalar noise restricted to shell `q` (open support, not dealiased).
fn scalar_shell(g: Grid, q: i32, seed: u64) -> SpectralField {
    project_shell(&white_noise(g, Shape::Scalar, seed), q).unwrap()
}

#[test]
fn low_pass_examples() {
    let g = grid(32);
    let f = random_shells(g, -1, 5, 3).unwrap();
    let q_max = LpFamily::new(g).q_max();
    assert!((&low_pass(&f, q_max) - &f).l2_norm() <= 1e-12 * f.l2_norm());
    assert!((&low_pass(&f, q_max + 3) - &f).l2_norm() <= 1e-12 * f.l2_norm());
    assert!(low_pass(&single_mode(g, [4, 0, 0]).unwrap(), 0).is_zero());
    assert!(low_pass(&SpectralField::vector_zeros(g), 2).is_zero());
}

#[test]
fn besov_examples() {
    let g = grid(32);
    let b = single_mode(g, [4, 0, 0]).unwrap();
    let spec = BesovSpec::new(1.0 / 3.0, 3.0, f64::INFINITY).unwrap();
    let want = 2f64.powf(2.0 / 3.0) * l3_cos();
    let got = besov_norm(&b, &spec).unwrap();
    assert!((got - want).abs() < 1e-3 * want, "{got} vs {want}");
    assert!((want - 7.496).abs() < 1e-3);
    assert_eq!(besov_norm(&SpectralField::vector_zeros(g), &spec).unwrap(), 0.0);

    let l2 = BesovSpec::new(0.0, 2.0, 2.0).unwrap();
    for seed in 0..4 {
        let f = random_shells(g, -1, 5, seed).unwrap();
        let ratio = besov_norm(&f, &l2).unwrap() / lp_norm(&f, 2.0).unwrap();
        assert!(ratio >= 1.0 / 3f64.sqrt() && ratio <= 3f64.sqrt(), "{ratio}");
    }
}

#[test]
fn besov_time_norm_examples() {
    let g = grid(8);
    let f0 = random_shells(g, 0, 1, 1).unwrap();
    let spec = BesovSpec::new(0.5, 2.0, f64::INFINITY).unwrap();
    let norm0 = besov_norm(&f0, &spec).unwrap();
    let m = 1001;
    let times: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();

    let constant: Vec<SpectralField> = times.iter().map(|&t| f0.clone().with_time(t)).collect();
    let got = besov_time_norm(&constant[..11], 3.0, &spec).unwrap();
    assert!((got - 0.01f64.cbrt() * norm0).abs() < 1e-12 * norm0);
    let got = besov_time_norm(&constant.iter().step_by(100).cloned().collect::<Vec<_>>(), 3.0, &spec).unwrap();
    assert!((got - norm0).abs() < 1e-12 * norm0);

    // The Besov norm is positively homogeneous, so only the scalar profile
    // needs quadrature here.
    let values: Vec<f64> = times.iter().map(|t| (-t).exp() * norm0).collect();
    let got = time_norm(&times, &values, 2.0).unwrap();
    let want = norm0 * ((1.0 - (-2f64).exp()) / 2.0).sqrt();
    assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
    let decaying: Vec<SpectralField> = times
        .iter()
        .step_by(10)
        .map(|&t| (&f0 * (-t).exp()).with_time(t))
        .collect();
    let got = besov_time_norm(&decaying, 2.0, &spec).unwrap();
    assert!((got - want).abs() < 1e-4 * want, "{got} vs {want}");

    let zeros = vec![SpectralField::vector_zeros(g), SpectralField::vector_zeros(g).with_time(1.0)];
    assert_eq!(besov_time_norm(&zeros, 2.0, &spec).unwrap(), 0.0);
}

fn cos_mode(g: Grid, k: [i64; 3]) -> SpectralField {
    let mut f = SpectralField::scalar_zeros(g);
    f.set_coeff(0, k, Complex64::new(0.5, 0.0));
    f.set_coeff(0, [-k[0], -k[1], -k[2]], Complex64::new(0.5, 0.0));
    f
}

#[test]
fn low_high_split_of_shells_two_and_six() {
    // |k| = 40√3 ≈ 69.3 lies where φ₆ = 1; an n = 128 grid is the smallest
    // that holds it.
    let g = grid(128);
    let shell2 = cos_mode(g, [4, 0, 0]);
    let shell6 = cos_mode(g, [40, 40, 40]);
    assert_eq!(project_shell(&shell6, 6).unwrap(), shell6);
    assert!((&low_pass(&shell2, 4) - &shell2).is_zero());
    assert!(low_pass(&shell6, 2).is_zero());
    let both = &shell2 + &shell6;
    let low = low_pass(&both, 4);
    assert_eq!(low, shell2);
    assert_eq!(&both - &low, shell6);
}

#[test]
fn low_high_examples() {
    // Same structure one octave pair lower, where the sup-norm diagnostics
    // stay cheap: |k| = 20 lies where φ₄ = 1.
    let g = grid(64);
    let low_mode = cos_mode(g, [4, 0, 0]);
    let high_mode = cos_mode(g, [20, 0, 0]);

    let d = decompose_low_high(&low_mode, 4, 2.0).unwrap();
    assert!(d.high.is_zero() && d.high_norm == 0.0);
    assert!((d.grad_low_inf - 4.0).abs() < 1e-12);

    let d = decompose_low_high(&high_mode, 2, 2.0).unwrap();
    assert!(d.low.is_zero() && d.grad_low_inf == 0.0);

    let both = &low_mode + &high_mode;
    let d = decompose_low_high(&both, 3, 3.0).unwrap();
    assert_eq!(d.low, low_mode);
    assert_eq!(d.high, high_mode);
    assert_eq!(&d.low + &d.high, both);
    assert!((d.grad_low_inf - 4.0).abs() < 1e-12);
    assert!((d.high_norm - l3_cos()).abs() < 1e-3);
    assert!(decompose_low_high(&both, -2, 2.0).is_err());
}

#[test]
fn shell_amplitude_examples() {
    let g = grid(32);
    let a = shell_amplitudes(&single_mode(g, [4, 0, 0]).unwrap()).unwrap();
    let want = 4f64.cbrt() * l3_cos();
    for (i, b) in a.b.iter().enumerate() {
        if i == 3 {
            assert!((b - want).abs() < 1e-3 * want, "{b} vs {want}");
        } else {
            assert!(*b < 1e-12, "shell {}: {b}", i as i32 - 1);
        }
    }
    let z = shell_amplitudes(&SpectralField::vector_zeros(g)).unwrap();
    assert!(z.b.iter().chain(z.beta.iter()).all(|v| *v == 0.0));

    let r = shell_amplitudes(&random_shells(g, -1, 4, 2).unwrap()).unwrap();
    for (i, (b, beta)) in r.b.iter().zip(r.beta.iter()).enumerate() {
        assert!(*b >= 0.0);
        if *b > 0.0 {
            let lq = 2f64.powi(i as i32 - 1);
            assert!((beta / b - lq.cbrt()).abs() < 1e-14);
        }
    }
}

#[test]
fn bernstein_examples() {
    let g = grid(32);
    let f = SpectralField::from_fn(g, Shape::Scalar, |x, o| o[0] = (4.0 * x[0]).cos());
    let got = bernstein_margin(&f, 2.0, f64::INFINITY).unwrap();
    let want = 1.0 / (4f64.powf(1.5) * ((2.0 * PI).powi(3) / 2.0).sqrt());
    assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    assert!((want - 0.01122).abs() < 1e-5);
    assert_eq!(bernstein_margin(&f, 3.0, 3.0).unwrap(), 1.0);
    let five = bernstein_margin(&(&f * 5.0), 2.0, f64::INFINITY).unwrap();
    assert!((five - got).abs() <= 1e-13 * got);

    let mixed = &f + &SpectralField::from_fn(g, Shape::Scalar, |x, o| o[0] = x[1].cos());
    assert!(bernstein_margin(&mixed, 2.0, 4.0).is_err());
    assert!(bernstein_margin(&f, 4.0, 2.0).is_err());
}

#[test]
fn bernstein_ratio_is_bounded_across_shells() {
    let g = grid(64);
    let mut maxima = Vec::new();
    for q in 2..=5 {
        let worst = (0..10u64)
            .map(|seed| bernstein_margin(&scalar_shell(g, q, 100 * q as u64 + seed), 2.0, f64::INFINITY).unwrap())
            .fold(0.0, f64::max);
        assert!(worst <= 3.0, "shell {q}: {worst}");
        maxima.push(worst);
    }
    assert!(maxima.windows(2).all(|w| w[1] <= w[0]), "{maxima:?}");
}

#[test]
fn dyadic_law_for_single_modes() {
    let g = grid(64);
    for s in [-0.5, 1.0 / 3.0, 1.0] {
        let spec = BesovSpec::new(s, f64::INFINITY, f64::INFINITY).unwrap();
        for j in 0..=4 {
            let k = (1i64 << j) as f64;
            let f = SpectralField::from_fn(g, Shape::Scalar, |x, o| o[0] = (k * x[0]).cos());
            let got = besov_norm(&f, &spec).unwrap();
            let want = 2f64.powf(s * j as f64);
            assert!((got - want).abs() < 1e-10 * want, "s={s} j={j}: {got} vs {want}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn partition_and_reconstruction(seed in any::<u64>(), n in prop::sample::select(vec![8usize, 16, 32])) {
        let g = grid(n);
        let lp = LpFamily::new(g);
        for idx in 0..g.len() {
            let rho = g.k_norm_sq(idx).sqrt();
            let total: f64 = lp.shells().map(|q| lp.phi(q, rho)).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
        let f = white_noise(g, Shape::Vector, seed);
        let back = DyadicDecomposition::new(&f).reconstruct();
        prop_assert!((&back - &f).l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn distant_shells_are_orthogonal(seed in any::<u64>(), i in -1i32..=5, gap in 2i32..5) {
        let f = white_noise(grid(32), Shape::Scalar, seed);
        let j = i + gap;
        let ij = project_shell(&project_shell(&f, j).unwrap(), i).unwrap();
        prop_assert!(ij.max_abs_coeff() <= 1e-13);
    }

    #[test]
    fn besov_norm_is_translation_invariant(
        seed in any::<u64>(),
        steps in prop::array::uniform3(0i64..16),
        a in prop::array::uniform3(0.0f64..6.3),
        s in -1.0f64..1.0,
        p in prop::sample::select(vec![2.0, 3.0, f64::INFINITY]),
    ) {
        let g = grid(16);
        let f = random_shells(g, -1, 3, seed).unwrap();
        let spec = BesovSpec::new(s, p, f64::INFINITY).unwrap();
        let n0 = besov_norm(&f, &spec).unwrap();
        // Grid shifts permute the quadrature nodes, so every exponent is exact.
        let h = g.spacing();
        let on_grid = [steps[0] as f64 * h, steps[1] as f64 * h, steps[2] as f64 * h];
        let n1 = besov_norm(&translated(&f, on_grid), &spec).unwrap();
        prop_assert!((n1 - n0).abs() <= 1e-10 * n0, "{n0} vs {n1}");
        let l2 = BesovSpec::new(s, 2.0, f64::INFINITY).unwrap();
        let m0 = besov_norm(&f, &l2).unwrap();
        let m1 = besov_norm(&translated(&f, a), &l2).unwrap();
        prop_assert!((m1 - m0).abs() <= 1e-10 * m0);
    }

    #[test]
    fn kernel_convolution_is_linear_and_monotone(
        a in prop::collection::vec(0.0f64..10.0, 7),
        b in prop::collection::vec(0.0f64..10.0, 7),
        c in 0.0f64..5.0,
        big_q in -1i32..6,
        bump_at in 0usize..7,
    ) {
        for k in [Kernel::K, Kernel::Kappa] {
            let combo: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x + c * y).collect();
            let lhs = kernel_convolve(&combo, k, big_q);
            let rhs = kernel_convolve(&a, k, big_q) + c * kernel_convolve(&b, k, big_q);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            let mut up = a.clone();
            up[bump_at] += 1.0;
            prop_assert!(kernel_convolve(&up, k, big_q) >= kernel_convolve(&a, k, big_q));
        }
    }

    #[test]
    fn bernstein_margin_is_scale_invariant(seed in any::<u64>(), q in 1i32..=3, c in 0.1f64..10.0) {
        let f = scalar_shell(grid(16), q, seed);
        let r0 = bernstein_margin(&f, 2.0, f64::INFINITY).unwrap();
        let r1 = bernstein_margin(&(&f * c), 2.0, f64::INFINITY).unwrap();
        prop_assert!((r1 - r0).abs() <= 1e-13 * r0);
    }
}
