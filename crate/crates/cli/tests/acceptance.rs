//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use geu_cli::boundary::{small_sample_accuracy, MfaSettings};
use geu_cli::{load_dataset, run_compare, ExperimentConfig, MethodSpec, UncertaintyKind};
use geu_core::data::synthetic_two_class;
use geu_core::embedding::{augmentation_scatter_oracle, scatter_from_graph, uncertainty_regularizer};
use geu_core::rng::rng_from_seed;
use geu_core::uncertainty::{estimate_supervised, from_explicit, from_explicit_for, VarianceFloor};
use geu_core::{numeric_rank, solve_pencil, Dataset, GraphPair, Method, Ridge, ScatterProblem, SymmetricPencil, WeightMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

/// Balanced classes, class `c` shifted by `c` along every axis.
fn random_dataset(n: usize, d: usize, classes: usize, seed: u64) -> Dataset {
    let mut labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    labels.sort_unstable();
    let noise = normal_matrix(n, d, seed);
    Dataset::new(DMatrix::from_fn(n, d, |i, j| noise[(i, j)] + labels[i] as f64), labels).unwrap()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn line_angle(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (u.dot(v).abs() / (u.norm() * v.norm())).min(1.0).acos()
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_time(start: Instant, limit: Duration) -> (bool, String) {
    let e = start.elapsed();
    (e < limit, format!("{:.2}s (limit {}s)", e.as_secs_f64(), limit.as_secs()))
}

fn dirac_reduction() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(0xD1AC);
    let mut worst_spec = 0.0f64;
    let mut worst_angle = 0.0f64;
    for case in 0..20u64 {
        let n = rng.random_range(20..=100);
        let d = rng.random_range(2..=20);
        let c = rng.random_range(2..=3);
        let x = random_dataset(n, d, c, 1000 + case);
        let zero = from_explicit_for(&x, DMatrix::zeros(n, d)).unwrap();
        for method in [Method::Lda, Method::Mfa] {
            let problem = ScatterProblem::new(&x, method, 3, 10).unwrap();
            let solve = |u| {
                let asm = problem.assemble(u).unwrap();
                solve_pencil(&SymmetricPencil::new(asm.a, asm.b).unwrap(), Ridge::Auto).unwrap()
            };
            let plain = solve(None);
            let geu = solve(Some(&zero));
            for (a, b) in plain.eigenvalues.iter().zip(geu.eigenvalues.iter()) {
                if *a != *b {
                    worst_spec = worst_spec.max(rel_diff(*a, *b));
                }
            }
            let ev = &plain.eigenvalues;
            for i in 0..d {
                let lo = if i > 0 { ev[i] - ev[i - 1] } else { f64::INFINITY };
                let hi = if i + 1 < d { ev[i + 1] - ev[i] } else { f64::INFINITY };
                if lo.min(hi) > 1e-6 {
                    let u = plain.eigenvectors.column(i).into_owned();
                    let v = geu.eigenvectors.column(i).into_owned();
                    worst_angle = worst_angle.max(line_angle(&u, &v));
                }
            }
        }
    }
    let (fast, t) = within_time(start, Duration::from_secs(10));
    outcome(
        worst_spec <= 1e-8 && worst_angle < 1e-6 && fast,
        format!("max spectrum rel diff {worst_spec:.2e}, max angle {worst_angle:.2e}, {t}"),
    )
}

fn rank_expansion() -> Outcome {
    let x = random_dataset(40, 10, 2, 3);
    let problem = ScatterProblem::new(&x, Method::Lda, 1, 1).unwrap();
    let plain = numeric_rank(&problem.plain().b, 1e-10).unwrap();
    let u = estimate_supervised(&x, 1.0, VarianceFloor::Auto).unwrap();
    let positive = u.diag_covs().iter().all(|&v| v > 0.0) && problem.graphs().penalty_degrees.iter().all(|&v| v > 0.0);
    let geu = numeric_rank(&problem.assemble(Some(&u)).unwrap().b, 1e-10).unwrap();
    outcome(plain == 1 && geu == 10 && positive, format!("rank(X Lp Xᵀ) = {plain}, rank(GEU constraint) = {geu}"))
}

/// `½ Σ_ij W_ij (vᵀx_i − vᵀx_j)² + Σ_i D_ii vᵀΣ_i v`, summed term by term.
fn quadratic_brute_force(x: &Dataset, w: &DMatrix<f64>, covs: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let n = x.n_samples();
    let y: Vec<f64> = (0..n).map(|i| x.features().row(i).transpose().dot(v)).collect();
    let mut pairwise = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairwise += w[(i, j)] * (y[i] - y[j]).powi(2);
            }
        }
    }
    let mut reg = 0.0;
    for i in 0..n {
        let degree: f64 = (0..n).filter(|&j| j != i).map(|j| w[(i, j)]).sum();
        reg += degree * (0..x.n_features()).map(|j| v[j] * v[j] * covs[(i, j)]).sum::<f64>();
    }
    0.5 * pairwise + reg
}

fn quadratic_identity() -> Outcome {
    let mut rng = rng_from_seed(0x0013);
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let seed = 5000 + 10 * case;
        let n = rng.random_range(4..=30);
        let d = rng.random_range(1..=8);
        let x = random_dataset(n, d, 2, seed);
        let sym = |m: DMatrix<f64>| (&m + m.transpose()).map(f64::abs);
        let w = sym(normal_matrix(n, n, seed + 1));
        let graphs = GraphPair::new(
            WeightMatrix::new(w).unwrap(),
            WeightMatrix::new(sym(normal_matrix(n, n, seed + 2))).unwrap(),
        )
        .unwrap();
        let w = graphs.intrinsic.matrix().clone();
        let covs = normal_matrix(n, d, seed + 3).map(|v| v * v + 0.01);
        let u = from_explicit(covs.clone()).unwrap();
        let a = ScatterProblem::with_graphs(&x, Method::Lda, graphs, 1, 1).unwrap().assemble(Some(&u)).unwrap().a;
        let v = normal_matrix(d, 1, seed + 4).column(0).into_owned();
        let lhs = (v.transpose() * &a * &v)[0];
        worst = worst.max(rel_diff(lhs, quadratic_brute_force(&x, &w, &covs, &v)));
    }
    outcome(worst <= 1e-9, format!("max rel diff {worst:.2e} over 100 tuples"))
}

fn augmentation_convergence() -> Outcome {
    let start = Instant::now();
    let x = synthetic_two_class(20, 2.0, 1.0, 40).unwrap();
    let u = estimate_supervised(&x, 1.0, VarianceFloor::Auto).unwrap();
    let problem = ScatterProblem::new(&x, Method::Mfa, 3, 10).unwrap();
    let g = problem.graphs();
    let analytic = scatter_from_graph(&x, &g.laplacian).unwrap() + uncertainty_regularizer(&u, &g.degrees).unwrap();
    let err = |m: usize, seed: u64| {
        let emp = augmentation_scatter_oracle(&x, &u, &g.laplacian, &g.degrees, m, seed).unwrap();
        (emp - &analytic).norm() / analytic.norm()
    };
    let fixed = err(10_000, 0);
    let small = (0..10).map(|s| err(100, s)).sum::<f64>() / 10.0;
    let large = (0..10).map(|s| err(10_000, s)).sum::<f64>() / 10.0;
    let (fast, t) = within_time(start, Duration::from_secs(30));
    outcome(
        fixed < 0.05 && large < small && fast,
        format!("err(1e4) = {fixed:.4}; mean err(1e2) = {small:.4}, mean err(1e4) = {large:.4}; {t}"),
    )
}

fn wdbc_config(methods: Vec<MethodSpec>) -> ExperimentConfig {
    let root = workspace_root();
    let mut cfg = ExperimentConfig::from_file(&root.join("configs/wdbc.toml")).unwrap();
    cfg.dataset = Some(root.join("data/wdbc.csv"));
    cfg.methods = methods;
    cfg
}

fn band(value: Option<f64>, centre: f64) -> (bool, String) {
    match value {
        Some(v) => ((v - centre).abs() <= 0.04, format!("{v:.4} (target {centre} ± 0.04)")),
        None => (false, "failed".into()),
    }
}

fn wdbc_mfa() -> Outcome {
    let start = Instant::now();
    let cfg = wdbc_config(vec![MethodSpec::Mfa, MethodSpec::GeuMfaS]);
    let report = run_compare(&cfg, &load_dataset(&cfg).unwrap()).unwrap();
    let (fast, t) = within_time(start, Duration::from_secs(300));
    let (mfa_ok, mfa) = band(report.cell(MethodSpec::Mfa, 0.0).and_then(|c| c.mean), 0.858);
    let (geu_ok, geu) = band(report.cell(MethodSpec::GeuMfaS, 0.0).and_then(|c| c.mean), 0.894);
    let mut order_ok = true;
    let mut wins = Vec::new();
    for &noise in &cfg.noise_levels {
        let (m, g) = (report.cell(MethodSpec::Mfa, noise).unwrap(), report.cell(MethodSpec::GeuMfaS, noise).unwrap());
        let count = m
            .per_repeat
            .iter()
            .zip(&g.per_repeat)
            .filter(|(m, g)| matches!((m, g), (Some(m), Some(g)) if g > m))
            .count();
        order_ok &= count >= 8;
        wins.push(format!("{noise}: {count}/{}", m.per_repeat.len()));
    }
    outcome(
        mfa_ok && geu_ok && order_ok && fast,
        format!("MFA {mfa}; GEU-MFA-S {geu}; GEU-MFA-S > MFA in [{}] repeats; {t}", wins.join(", ")),
    )
}

fn wdbc_lda() -> Outcome {
    let cfg = wdbc_config(vec![MethodSpec::Lda, MethodSpec::GeuLdaU]);
    let report = run_compare(&cfg, &load_dataset(&cfg).unwrap()).unwrap();
    let (lda_ok, lda) = band(report.cell(MethodSpec::Lda, 0.0).and_then(|c| c.mean), 0.932);
    let (geu_ok, geu) = band(report.cell(MethodSpec::GeuLdaU, 0.0).and_then(|c| c.mean), 0.951);
    let noisy = |m| report.cell(m, 0.2).and_then(|c| c.mean);
    let (l, g) = (noisy(MethodSpec::Lda), noisy(MethodSpec::GeuLdaU));
    let order_ok = matches!((l, g), (Some(l), Some(g)) if g > l);
    outcome(
        lda_ok && geu_ok && order_ok,
        format!("LDA {lda}; GEU-LDA-U {geu}; at noise 0.2 GEU-LDA-U {g:?} vs LDA {l:?}"),
    )
}

fn small_sample_corner_case() -> Outcome {
    let s = MfaSettings { kind: UncertaintyKind::Supervised, sigma: 1.0, d: 1, k1: 3, k2: 10 };
    let (mut mfa, mut geu) = (0.0, 0.0);
    for seed in 0..10 {
        let (m, g) = small_sample_accuracy(10, 20, 2.0, 1.0, 500, 1, &s, seed).unwrap();
        mfa += m / 10.0;
        geu += g / 10.0;
    }
    let gain = 100.0 * (geu - mfa);
    outcome(gain >= 5.0, format!("MFA {mfa:.4}, GEU-MFA {geu:.4}, gain {gain:.1} points (need ≥ 5)"))
}

fn eigensolver_contract() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(0xE165);
    let mut worst_res = 0.0f64;
    let mut worst_gram = 0.0f64;
    let mut ascending = true;
    for case in 0..100u64 {
        let d = rng.random_range(1..=100);
        let g = normal_matrix(d, d, 9000 + 2 * case);
        let a = (&g + g.transpose()) * 0.5;
        let h = normal_matrix(d, d, 9001 + 2 * case);
        let b = &h * h.transpose() + DMatrix::identity(d, d) * (0.1 * d as f64);
        let sol = solve_pencil(&SymmetricPencil::new(a.clone(), b.clone()).unwrap(), Ridge::Value(0.0)).unwrap();
        let (na, nb) = (a.norm(), b.norm());
        for i in 0..d {
            ascending &= i == 0 || sol.eigenvalues[i - 1] <= sol.eigenvalues[i];
            let v = sol.eigenvectors.column(i);
            let lambda = sol.eigenvalues[i];
            let residual = (&a * v - &b * v * lambda).norm();
            worst_res = worst_res.max(residual / (na + lambda.abs() * nb));
        }
        let gram = sol.eigenvectors.transpose() * &b * &sol.eigenvectors;
        worst_gram = worst_gram.max((gram - DMatrix::identity(d, d)).amax());
    }
    let (fast, t) = within_time(start, Duration::from_secs(10));
    outcome(
        worst_res <= 1e-8 && worst_gram <= 1e-8 && ascending && fast,
        format!("max scaled residual {worst_res:.2e}, max |VᵀBV - I| {worst_gram:.2e}, {t}"),
    )
}

fn report_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timings.csv")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let mut cfg = wdbc_config(vec![MethodSpec::Rlda, MethodSpec::GeuMfaS]);
    cfg.repeats = 2;
    cfg.folds = 3;
    cfg.noise_levels = vec![0.0, 0.2];
    cfg.sigma_grid = vec![0.1, 1.0];
    cfg.ridge_grid = vec![1e-3, 1e-1];
    cfg.d_grid = vec![1, 2];
    let data = load_dataset(&cfg).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let run = |threads: usize, name: &str| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let dir = tmp.path().join(name);
        pool.install(|| run_compare(&cfg, &data)).unwrap().write(&dir).unwrap();
        report_files(&dir)
    };
    let first = run(4, "a");
    let second = run(4, "b");
    let single = run(1, "c");
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    outcome(
        first == second && first == single && !first.is_empty(),
        format!("files {names:?}; identical across runs: {}, across 1 vs 4 threads: {}", first == second, first == single),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 dirac reduction", dirac_reduction),
        ("2 rank expansion", rank_expansion),
        ("3 quadratic-form identity", quadratic_identity),
        ("4 augmentation convergence", augmentation_convergence),
        ("5 WDBC MFA vs GEU-MFA-S", wdbc_mfa),
        ("6 WDBC LDA vs GEU-LDA-U", wdbc_lda),
        ("7 small-sample corner case", small_sample_corner_case),
        ("8 eigensolver contract", eigensolver_contract),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
