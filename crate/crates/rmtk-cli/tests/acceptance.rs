//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rmtk::quad::{integrate, QuadratureSpec};
use rmtk::verify::{self, Check, Report, MC_PAIRS};
use rmtk::{
    kernel, kernel_mc_many, level_density, pair_density_mc, r_k_goe, r_k_goe_kernel_assembly, r_k_gse,
    r_k_gse_mehta, r_k_gue, EnergyTuple, EnsembleSpec, MCConfig,
};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn ens(beta: u32, n: usize) -> EnsembleSpec {
    EnsembleSpec::from_index(beta, n).unwrap()
}

fn worst(checks: &[Check]) -> String {
    match checks.iter().filter(|c| !c.pass).max_by(|a, b| (a.got - a.expected).abs().total_cmp(&(b.got - b.expected).abs())) {
        Some(c) => format!("{} failing, worst: {} got {:.3e}", checks.iter().filter(|c| !c.pass).count(), c.name, c.got),
        None => format!("{} checks", checks.len()),
    }
}

fn golden_constants() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_rmtk")).args(["verify", "constants"]).output().unwrap();
    let report: Report = match serde_json::from_slice(&out.stdout) {
        Ok(r) => r,
        Err(e) => return Outcome { pass: false, detail: format!("unreadable report: {e}") },
    };
    let pass = out.status.success() && report.passed();
    Outcome { pass, detail: worst(&report.checks) }
}

fn closure() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut checks = Vec::new();
    for (beta, nmax) in [(1, 8), (2, 8), (4, 4)] {
        for n in 1..=nmax {
            checks.push(verify::closure_checks(ens(beta, n), &spec));
        }
    }
    let max = checks.iter().map(|c| c.got.abs()).fold(0.0, f64::max);
    Outcome { pass: checks.iter().all(|c| c.pass), detail: format!("{}, max residual {max:.2e}", worst(&checks)) }
}

fn gue_identity() -> Outcome {
    let checks = verify::gue_identity_checks(10, 10, 7, &QuadratureSpec::default());
    let max = checks.iter().map(|c| c.got.abs()).fold(0.0, f64::max);
    Outcome { pass: checks.iter().all(|c| c.pass), detail: format!("N<=10, 10 points, max residual {max:.2e}") }
}

/// Every (β, N, pair) cell must bracket the analytic kernel within 3σ in
/// at least 19 of 20 seeded repetitions.
fn monte_carlo() -> Outcome {
    const SEEDS: u64 = 20;
    const SAMPLES: usize = 100_000;
    let mut cells = 0;
    let mut weak = Vec::new();
    let mut total_hits = 0;
    for beta in [1, 2, 4] {
        for n in 1..=6 {
            let e = ens(beta, n);
            for &(x, y) in &MC_PAIRS {
                assert!((x - y).abs() >= 10.0 * rmtk::ensembles_mc::default_eta(e, x, y));
            }
            let mut hits = [0u32; MC_PAIRS.len()];
            for seed in 0..SEEDS {
                let mut cfg = MCConfig::new(e, SAMPLES, 1000 + seed);
                cfg.workers = workers();
                let est = kernel_mc_many(&cfg, &MC_PAIRS).unwrap();
                for (i, (&(x, y), v)) in MC_PAIRS.iter().zip(&est).enumerate() {
                    if (v.value - kernel(e, x, y)).abs() <= 3.0 * v.uncertainty {
                        hits[i] += 1;
                    }
                }
            }
            for (i, &h) in hits.iter().enumerate() {
                cells += 1;
                total_hits += h;
                if (h as u64) < SEEDS - 1 {
                    weak.push(format!("beta={beta} N={n} pair {:?}: {h}/{SEEDS}", MC_PAIRS[i]));
                }
            }
        }
    }
    let rate = total_hits as f64 / (cells as u64 * SEEDS) as f64;
    let detail = if weak.is_empty() {
        format!("{cells} cells, all >= 19/20, overall hit rate {:.1}%", 100.0 * rate)
    } else {
        format!("overall {:.1}%, below 19/20: {}", 100.0 * rate, weak.join("; "))
    };
    Outcome { pass: weak.is_empty(), detail }
}

fn correlation_assembly() -> Outcome {
    let tuples: Vec<Vec<f64>> = vec![vec![0.4], vec![0.3, -0.6], vec![-1.1, 0.2, 0.9], vec![0.05, 1.3], vec![-0.4, 0.5, 1.6]];
    let mut parts = Vec::new();
    let mut pass = true;

    let mut goe = [0.0f64; 2];
    let mut gse = 0.0f64;
    for n in 1..=6 {
        for xs in &tuples {
            let t = EnergyTuple::new(xs.clone()).unwrap();
            let d = (r_k_goe(n, &t).unwrap() - r_k_goe_kernel_assembly(n, &t).unwrap()).abs();
            goe[n % 2] = goe[n % 2].max(d);
            gse = gse.max((r_k_gse(n, &t).unwrap() - r_k_gse_mehta(n, &t).unwrap()).abs());
        }
    }
    for (label, v) in [("GOE even N", goe[0]), ("GOE odd N", goe[1]), ("GSE", gse)] {
        let ok = v <= 1e-8;
        pass &= ok;
        parts.push(format!("{label} dual assembly {v:.1e}{}", if ok { "" } else { " FAIL" }));
    }

    let spec = QuadratureSpec::default();
    let mut norm = 0.0f64;
    for beta in [1, 2, 4] {
        for n in 1..=6 {
            let e = ens(beta, n);
            let v = integrate(|x: f64| level_density(e, x), f64::NEG_INFINITY, f64::INFINITY, &spec).unwrap().value;
            norm = norm.max((v - n as f64).abs());
        }
    }
    pass &= norm <= 1e-6;
    parts.push(format!("R_1 normalization {norm:.1e}"));

    let e = ens(2, 2);
    let hw = 0.1;
    let mut worst_z = 0.0f64;
    for (x, y) in [(0.3, -0.4), (-0.9, 0.6), (0.0, 1.0)] {
        let mut cfg = MCConfig::new(e, 10_000, 5);
        cfg.workers = workers();
        let d = pair_density_mc(&cfg, x, y, hw).unwrap();
        let want = cell_average_r2(x, y, hw);
        worst_z = worst_z.max((d.value - want).abs() / d.stderr);
    }
    pass &= worst_z <= 3.0;
    parts.push(format!("GUE pair histogram worst {worst_z:.2} sigma"));

    Outcome { pass, detail: parts.join(", ") }
}

fn cell_average_r2(x: f64, y: f64, hw: f64) -> f64 {
    let (t, w) = rmtk::quad::gauss_legendre(16);
    let mut s = 0.0;
    for (a, wa) in t.iter().zip(&w) {
        for (b, wb) in t.iter().zip(&w) {
            let xs = EnergyTuple::new(vec![x + hw * a, y + hw * b]).unwrap();
            s += wa * wb * r_k_gue(2, &xs);
        }
    }
    s / 4.0
}

fn identities() -> Outcome {
    let spec = QuadratureSpec::default();
    let r = Report::combine("identities", vec![verify::recursion_suite(12, &spec), verify::identity_suite(&spec)]);
    Outcome { pass: r.passed(), detail: worst(&r.checks) }
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["kernel", "--method", "mc", "--beta", "4", "--n", "3", "--xp", "0.5,-0.8", "--xq", "-0.5,0.4", "--samples", "20000"],
        &["histogram", "--beta", "1", "--n", "5", "--grid", "-3:3:0.25", "--samples", "20000"],
        &["corr", "--method", "mc", "--n", "3", "--points", "0.3,-0.4", "--samples", "20000"],
    ];
    let mut pass = true;
    for args in runs {
        let outputs: Vec<Vec<u8>> = ["1", "3", "8"]
            .iter()
            .map(|w| {
                let o = Command::new(env!("CARGO_BIN_EXE_rmtk")).env_remove("RMTK_THREADS").args(args).args(["--workers", w]).output().unwrap();
                pass &= o.status.success();
                o.stdout
            })
            .collect();
        pass &= outputs.windows(2).all(|p| p[0] == p[1]) && !outputs[0].is_empty();
    }
    Outcome { pass, detail: "kernel, histogram and corr with 1, 3 and 8 workers".into() }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("golden constants", golden_constants, Duration::from_secs(30)),
        ("superintegral closure", closure, Duration::from_secs(300)),
        ("GUE reduced-integral identity", gue_identity, Duration::from_secs(60)),
        ("Monte Carlo kernel", monte_carlo, Duration::from_secs(600)),
        ("correlation assembly", correlation_assembly, Duration::from_secs(300)),
        ("identity suite", identities, Duration::from_secs(60)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let dt = t.elapsed();
        let pass = o.pass && dt <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name} ({}; {:.1}s of {}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            dt.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
