use num_complex::Complex64;
use rmtk::ensembles_mc::*;
use rmtk::kernels::{kernel, level_density, Beta, EnsembleSpec};
use rmtk::quad::{gauss_legendre, integrate, QuadratureSpec};
use rmtk::{r_k_gue, EnergyTuple, Error, Grid};

fn ens(beta: u32, n: usize) -> EnsembleSpec {
    EnsembleSpec::from_index(beta, n).unwrap()
}

/// Mean of f over [a, b] by a 20-point Gauss–Legendre rule.
fn cell_average(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre(20);
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    x.iter().zip(&w).map(|(t, wi)| wi * f(m + r * t)).sum::<f64>() / 2.0
}

#[test]
fn config_validation() {
    let c = MCConfig::new(ens(2, 3), 50, 1);
    assert!(matches!(c.validate(), Err(Error::InsufficientSamples { min: MIN_SAMPLES, got: 50 })));
    let mut c = MCConfig::new(ens(2, 3), 500, 1);
    c.workers = 0;
    assert!(c.validate().is_err());
    c.workers = 2;
    c.eta = Some(-1.0);
    assert!(c.validate().is_err());
    c.eta = Some(0.01);
    assert_eq!(c.eta_for(0.0, 1.0), 0.01);
}

#[test]
fn default_eta_tracks_the_spacing() {
    let e = ens(2, 4);
    let eta = default_eta(e, 0.2, -0.2);
    assert!((eta - 0.05 / level_density(e, 0.0)).abs() < 1e-15);
    assert_eq!(default_eta(e, 40.0, 41.0), 0.1);
    assert_eq!(default_eta(ens(2, 4_000_000), 0.0, 0.1), 1e-4);
}

#[test]
fn matrices_have_the_right_shape() {
    for beta in [1, 2, 4] {
        let m = sample_matrix(ens(beta, 5), &mut sample_rng(3, 0));
        let want = if beta == 4 { 10 } else { 5 };
        assert_eq!(m.dim(), want);
        assert!(m.self_duality_defect() < 1e-14 || beta != 4);
        let eigs = sample_eigenvalues(ens(beta, 5), 3, 0).unwrap();
        assert_eq!(eigs.len(), 5);
        assert!(eigs.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn second_moments_match_the_density() {
    let spec = QuadratureSpec::default();
    let samples = 20_000;
    for beta in [1, 2, 4] {
        let n = 4;
        let e = ens(beta, n);
        let mut s = 0.0;
        let mut s2 = 0.0;
        let mut entry = 0.0;
        for i in 0..samples {
            let m = sample_matrix(e, &mut sample_rng(17, i));
            let t = m.trace_of_square();
            s += t;
            s2 += t * t;
            entry += m.to_complex()[(0, 1)].re;
        }
        let mean = s / samples as f64;
        let se = ((s2 / samples as f64 - mean * mean) / samples as f64).sqrt();
        // the GSE complex form carries every eigenvalue twice
        let copies = if beta == 4 { 2.0 } else { 1.0 };
        let want = copies * integrate(|x: f64| x * x * level_density(e, x), f64::NEG_INFINITY, f64::INFINITY, &spec).unwrap().value;
        assert!((mean - want).abs() < 4.0 * se, "beta {beta}: {mean} vs {want}");
        assert!((entry / samples as f64).abs() < 0.05);
    }
    let nf = 4.0;
    let g = integrate(|x: f64| x * x * level_density(ens(2, 4), x), f64::NEG_INFINITY, f64::INFINITY, &spec).unwrap().value;
    assert!((g - nf * nf / 2.0).abs() < 1e-10);
    let o = integrate(|x: f64| x * x * level_density(ens(1, 4), x), f64::NEG_INFINITY, f64::INFINITY, &spec).unwrap().value;
    assert!((o - nf * (nf + 1.0) / 2.0).abs() < 1e-8);
}

#[test]
fn ratio_examples() {
    let r = char_ratio(&[0.7], 0.2, -0.3, 0.05, 1);
    assert!((r - Complex64::new(1.0, 0.0) / Complex64::new(0.5, 0.05)).norm() < 1e-15);
    assert_eq!(char_ratio(&[], 0.2, -0.3, 0.05, 2), Complex64::new(1.0, 0.0));
    // large products are rescaled, not overflowed
    let eigs: Vec<f64> = (0..400).map(|k| 1e3 + k as f64).collect();
    let r = char_ratio(&eigs, 0.0, -1e-3, 1e-3, 2);
    assert!(r.is_finite());
    let m = sample_matrix(ens(4, 3), &mut sample_rng(5, 9));
    let direct = char_ratio_matrix(&m, Beta::Symplectic, 0.1, -0.4, 0.05).unwrap();
    let eigs = m.eigenvalues(Beta::Symplectic).unwrap();
    assert!((direct - char_ratio(&eigs, 0.1, -0.4, 0.05, 2)).norm() < 1e-10 * direct.norm());
    assert!(char_ratio_matrix(&m, Beta::Symplectic, 0.1, -0.4, 0.0).is_err());
}

#[test]
fn results_do_not_depend_on_worker_count() {
    for beta in [1, 2, 4] {
        let mut c = MCConfig::new(ens(beta, 4), 3000, 99);
        let a = z1_mc_many(&c, &[(0.3, -0.2), (1.0, 0.1)]).unwrap();
        c.workers = 4;
        let b = z1_mc_many(&c, &[(0.3, -0.2), (1.0, 0.1)]).unwrap();
        assert_eq!(a, b);
        let h1 = eigen_histogram(&c, &Grid::new(-3.0, 3.0, 0.5).unwrap()).unwrap();
        c.workers = 3;
        let h2 = eigen_histogram(&c, &Grid::new(-3.0, 3.0, 0.5).unwrap()).unwrap();
        assert_eq!(h1, h2);
    }
}

#[test]
fn seeds_give_different_streams() {
    let a = z1_mc(&MCConfig::new(ens(2, 3), 500, 1), 0.3, -0.2).unwrap();
    let b = z1_mc(&MCConfig::new(ens(2, 3), 500, 2), 0.3, -0.2).unwrap();
    assert_ne!(a.mean, b.mean);
    assert_eq!(a.seed, 1);
    assert_eq!(a.samples, 500);
}

#[test]
fn stderr_shrinks_with_the_square_root_of_samples() {
    let a = kernel_mc(&MCConfig::new(ens(2, 4), 10_000, 8), 0.4, -0.3).unwrap();
    let b = kernel_mc(&MCConfig::new(ens(2, 4), 40_000, 8), 0.4, -0.3).unwrap();
    let r = b.uncertainty / a.uncertainty;
    assert!((0.4..0.6).contains(&r), "{r}");
}

#[test]
fn kernel_mc_brackets_the_analytic_kernel() {
    for beta in [1, 2, 4] {
        for n in [1, 3, 6] {
            let e = ens(beta, n);
            let cfg = MCConfig::new(e, 20_000, 2024);
            for (x, y) in [(0.5, -0.5), (-0.8, 0.4)] {
                let k = kernel_mc(&cfg, x, y).unwrap();
                let want = kernel(e, x, y);
                assert!((k.value - want).abs() < 4.0 * k.uncertainty, "beta {beta} N={n}: {} ± {} vs {want}", k.value, k.uncertainty);
                assert_eq!(k.route.name(), "mc");
            }
        }
    }
}

#[test]
fn kernel_mc_is_robust_to_eta() {
    let e = ens(2, 4);
    let want = kernel(e, 0.6, -0.2);
    for eta in [0.005, 0.02, 0.05] {
        let mut cfg = MCConfig::new(e, 20_000, 31);
        cfg.eta = Some(eta);
        let k = kernel_mc(&cfg, 0.6, -0.2).unwrap();
        assert!((k.value - want).abs() < 4.0 * k.uncertainty, "eta {eta}");
    }
}

#[test]
fn kernel_mc_rejects_coincident_points() {
    let cfg = MCConfig::new(ens(1, 2), 500, 1);
    assert!(matches!(kernel_mc(&cfg, 0.2, 0.2), Err(Error::DegenerateArguments { .. })));
    let e = z1_mc(&cfg, 0.2, 0.2).unwrap();
    assert_eq!(e.mean, Complex64::new(1.0, 0.0));
}

#[test]
fn source_derivative_gives_the_density() {
    let h = 0.05;
    for beta in [1, 2, 4] {
        let e = ens(beta, 3);
        let x = 0.3;
        let g = e.beta.gamma_abs() as f64;
        // finite-h target: oriented kernel across the two sources
        let k = if beta == 4 { kernel(e, x - h, x + h) } else { kernel(e, x + h, x - h) };
        let want = (2.0 * g * x * h).exp() * k;
        let d = source_derivative_check(&MCConfig::new(e, 20_000, 77), x, h).unwrap();
        assert!((d.value - want).abs() < 4.0 * d.stderr, "beta {beta}: {} ± {} vs {want}", d.value, d.stderr);
    }
    let d = source_derivative_check(&MCConfig::new(ens(2, 1), 20_000, 5), 0.0, 0.02).unwrap();
    assert!((d.value - 1.0 / std::f64::consts::PI.sqrt()).abs() < 4.0 * d.stderr + 1e-3);
    assert!(source_derivative_check(&MCConfig::new(ens(2, 1), 200, 5), 0.0, 0.0).is_err());
}

#[test]
fn histogram_matches_the_density() {
    let e = ens(2, 10);
    let grid = Grid::new(-5.0, 5.0, 0.5).unwrap();
    let h = eigen_histogram(&MCConfig::new(e, 10_000, 4), &grid).unwrap();
    assert!((h.mass() - 10.0).abs() < 1e-12);
    for (i, &c) in h.centers.iter().enumerate() {
        let want = cell_average(|x| level_density(e, x), c - 0.25, c + 0.25);
        assert!((h.density[i] - want).abs() < 4.0 * h.stderr[i] + 1e-3, "bin {c}: {} vs {want}", h.density[i]);
    }
    // ensemble symmetry
    let nb = h.centers.len();
    for i in 0..nb / 2 {
        let (a, b) = (h.density[i], h.density[nb - 1 - i]);
        let se = (h.stderr[i].powi(2) + h.stderr[nb - 1 - i].powi(2)).sqrt();
        assert!((a - b).abs() < 4.0 * se + 1e-3);
    }
}

#[test]
fn histogram_counts_escapees() {
    let h = eigen_histogram(&MCConfig::new(ens(1, 6), 1000, 4), &Grid::new(-0.5, 0.5, 0.25).unwrap()).unwrap();
    assert!(h.outside > 0.0);
    assert!((h.mass() - 6.0).abs() < 1e-12);
}

#[test]
fn pair_density_matches_the_gue_pair_function() {
    let e = ens(2, 2);
    let (x, y, hw) = (0.3, -0.4, 0.05);
    let d = pair_density_mc(&MCConfig::new(e, 40_000, 12), x, y, hw).unwrap();
    let r2 = |a: f64, b: f64| r_k_gue(2, &EnergyTuple::new(vec![a, b]).unwrap());
    let want = cell_average(|a| cell_average(|b| r2(a, b), y - hw, y + hw), x - hw, x + hw);
    assert!((d.value - want).abs() < 4.0 * d.stderr, "{} ± {} vs {want}", d.value, d.stderr);
    assert!(pair_density_mc(&MCConfig::new(e, 500, 1), 0.0, 0.05, 0.05).is_err());
}
