//! The full verification suite: every analytic claim the crate exposes is
//! checked against an exhaustive-enumeration or Monte Carlo oracle at desk
//! scale, yielding one PASS/FAIL record per check group.
//!
//! The suite is deterministic for a fixed `(seed, reps)` and independent of
//! the worker count; stochastic subtasks draw from disjoint stream ranges of
//! the configured seed.

use crate::bounds::{
    convex_order_check, domination_check, empirical_tail, ConvexOrderMode, TailBoundSpec,
};
use crate::clt::{
    clt_certificate, exchangeable_linearity_check, ks_distance_to_normal, normalize_population,
    rosen_covariance_exact, rosen_path, rosen_variance, standardized_sum,
};
use crate::error::Result;
use crate::matrix_bounds::{op_norm_draw, random_centered_family};
use crate::moments::{
    comb_sum_eval, comb_sum_moments, footrule_matrix, oscillation_eval, oscillation_moments,
    random_int_matrix, rank_one_matrix, rho_matrix, survey_mean_moments, PermMatrix,
};
use crate::perm::{
    binomial, enumerate_permutations, random_permutation, sample_without_replacement, Combinations,
    SampleMask,
};
use crate::process::{donsker_cov, PermMeasure, ScalarPopulation};
use crate::ranks::{rank_moments, RankStatKind};
use crate::report::{CheckRecord, Report};
use crate::rng::RngState;
use crate::series::{population_fit, reg_diagnostics, reg_loss, sample_fit, BasisSpec};
use crate::twosample::{exact_perm_test, mc_perm_test, Side, Statistic, TwoSampleData};
use rayon::prelude::*;
use serde_json::json;

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    pub reps: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 7,
            reps: 100_000,
        }
    }
}

// stream bases keep the criteria on disjoint substreams
const STREAM_SPAN: u64 = 1 << 32;

fn base(criterion: u64, task: u64) -> u64 {
    criterion * STREAM_SPAN + task * (1 << 16)
}

fn named_corpus(n: usize) -> Vec<(String, PermMatrix)> {
    vec![
        ("footrule".to_string(), footrule_matrix(n).unwrap()),
        ("rho".to_string(), rho_matrix(n).unwrap()),
        ("rank1".to_string(), rank_one_matrix(n).unwrap().matrix),
        ("random1".to_string(), random_int_matrix(n, 1).unwrap()),
        ("random2".to_string(), random_int_matrix(n, 2).unwrap()),
        ("random3".to_string(), random_int_matrix(n, 3).unwrap()),
    ]
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / (1.0 + want.abs())
}

/// Criterion 1: enumerated combinatorial-sum, oscillation-sum, and survey
/// mean/variance all equal their closed forms.
pub fn criterion_exact_moments() -> Result<Vec<CheckRecord>> {
    let mut worst_comb = 0.0f64;
    for n in 3..=7usize {
        for (_, m) in named_corpus(n) {
            let (mu, sigma2) = comb_sum_moments(&m);
            let vals: Vec<f64> = enumerate_permutations(n)?
                .map(|p| comb_sum_eval(&m, &p).unwrap())
                .collect();
            let k = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / k;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
            worst_comb = worst_comb.max(rel_err(mean, mu)).max(rel_err(var, sigma2));
        }
    }

    let mut worst_osc = 0.0f64;
    for n in 3..=6usize {
        for (_, m) in named_corpus(n) {
            let (mean_a, var_a) = oscillation_moments(&m)?;
            let vals: Vec<f64> = enumerate_permutations(n)?
                .map(|p| oscillation_eval(&m, &p).unwrap())
                .collect();
            let k = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / k;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
            worst_osc = worst_osc
                .max(rel_err(mean, mean_a))
                .max(rel_err(var, var_a));
        }
    }

    let mut worst_survey = 0.0f64;
    let mut rng = RngState::new(123, 0);
    for n_total in 2..=7usize {
        let a: Vec<f64> = (0..n_total).map(|_| rng.next_f64() * 6.0 - 3.0).collect();
        for n_sample in 1..=n_total {
            let sm = survey_mean_moments(&a, n_sample, None)?;
            let mut means = Vec::new();
            for combo in Combinations::new(n_total, n_sample)? {
                means.push(combo.iter().map(|&i| a[i]).sum::<f64>() / n_sample as f64);
            }
            let k = means.len() as f64;
            let mean = means.iter().sum::<f64>() / k;
            let var = means.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
            worst_survey = worst_survey
                .max(rel_err(mean, sm.mean))
                .max(rel_err(var, sm.variance));
        }
    }

    let tol = 1e-10;
    Ok(vec![
        CheckRecord::new(
            "exact-moments/comb-sum-enumeration",
            json!({"families": 6, "n": "3..7"}),
            Some(tol),
            Some(worst_comb),
            None,
            worst_comb <= tol,
        ),
        CheckRecord::new(
            "exact-moments/oscillation-enumeration",
            json!({"families": 6, "n": "3..6"}),
            Some(tol),
            Some(worst_osc),
            None,
            worst_osc <= tol,
        ),
        CheckRecord::new(
            "exact-moments/survey-mean-enumeration",
            json!({"n": "2..7", "all_sample_sizes": true}),
            Some(tol),
            Some(worst_survey),
            None,
            worst_survey <= tol,
        ),
    ])
}

/// Criterion 2: rank-statistic means match their closed forms exactly.
pub fn criterion_rank_moments() -> Result<Vec<CheckRecord>> {
    let mut worst_mean = 0.0f64;
    for n in 3..=8usize {
        let expect = ((n * n - 1) as f64) / 3.0;
        let (fm, _) = rank_moments(RankStatKind::Footrule, n)?;
        let (xm, _) = rank_moments(RankStatKind::ChatterjeeXi, n)?;
        worst_mean = worst_mean.max(rel_err(fm, expect)).max(rel_err(xm, expect));
    }
    let mut worst_w = 0.0f64;
    for n in 2..=8usize {
        for m in 1..=n {
            let (wm, _) = rank_moments(RankStatKind::WilcoxonRankSum { m }, n)?;
            worst_w = worst_w.max(rel_err(wm, m as f64 * (n as f64 + 1.0) / 2.0));
        }
    }
    let tol = 1e-10;
    Ok(vec![
        CheckRecord::new(
            "rank-moments/footrule-xi-mean",
            json!({"n": "3..8", "closed_form": "(n^2-1)/3"}),
            Some(tol),
            Some(worst_mean),
            None,
            worst_mean <= tol,
        ),
        CheckRecord::new(
            "rank-moments/wilcoxon-mean",
            json!({"n": "2..8", "closed_form": "m(n+1)/2"}),
            Some(tol),
            Some(worst_w),
            None,
            worst_w <= tol,
        ),
    ])
}

/// Criterion 3: the transposition couple is linear in the centered sum.
pub fn criterion_stein_linearity() -> Result<Vec<CheckRecord>> {
    let mut worst = 0.0f64;
    for n in 3..=6usize {
        for (_, m) in named_corpus(n) {
            worst = worst.max(exchangeable_linearity_check(&m, 6)?);
        }
    }
    let tol = 1e-12;
    Ok(vec![CheckRecord::new(
        "stein/exchangeable-pair-linearity",
        json!({"families": 6, "n": "3..6", "identity": "E[W'-W|pi] = -(2/N) W"}),
        Some(tol),
        Some(worst),
        None,
        worst <= tol,
    )])
}

/// Criterion 4: every tail bound dominates the Monte Carlo survival minus
/// three standard errors on the whole grid.
pub fn criterion_tail_domination(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::new();
    let grid_multipliers = [0.5, 1.0, 2.0, 3.0, 4.0];
    let mut task = 0u64;

    for &n in &[20usize, 50] {
        let mut min_slack_v1 = f64::INFINITY;
        let mut min_slack_bern = f64::INFINITY;
        let mut min_slack_v2 = f64::INFINITY;
        for (name, m) in named_corpus(n) {
            let sigma = m.sigma2().sqrt();
            let grid: Vec<f64> = grid_multipliers.iter().map(|&c| c * sigma).collect();
            let mc = m.clone();
            let sampler = move |r: &mut RngState| {
                let p = random_permutation(mc.n(), r).unwrap();
                crate::moments::centered_sum_eval(&mc, &p).unwrap()
            };
            let emp = empirical_tail(
                &sampler,
                &grid,
                cfg.reps,
                RngState::new(cfg.seed, base(4, task)),
            )?;
            task += 1;
            let v1_rows = domination_check(&TailBoundSpec::comb_hoeffding_v1(&m), &emp)?;
            min_slack_v1 = v1_rows.iter().map(|r| r.slack).fold(min_slack_v1, f64::min);
            let bern_rows = domination_check(&TailBoundSpec::comb_bernstein(&m), &emp)?;
            min_slack_bern = bern_rows
                .iter()
                .map(|r| r.slack)
                .fold(min_slack_bern, f64::min);
            if name == "rank1" {
                let r1 = rank_one_matrix(n)?;
                let spec = TailBoundSpec::comb_hoeffding_v2(&r1.a, &r1.b)?;
                let rows = domination_check(&spec, &emp)?;
                min_slack_v2 = rows.iter().map(|r| r.slack).fold(min_slack_v2, f64::min);
            }
        }
        for (kind, slack) in [
            ("hoeffding_v1", min_slack_v1),
            ("hoeffding_v2", min_slack_v2),
            ("bernstein", min_slack_bern),
        ] {
            records.push(CheckRecord::new(
                format!("tail-domination/scalar-{kind}-n{n}"),
                json!({"grid": "0.5..4 sigma", "reps": cfg.reps}),
                Some(0.0),
                Some(slack),
                None,
                slack >= 0.0,
            ));
        }
    }

    for &dim in &[2usize, 3] {
        for &n in &[20usize, 50] {
            let fam = random_centered_family(n, dim, cfg.seed ^ 0xFA_u64)?;
            let sigma = fam.sigma2().sqrt();
            let grid: Vec<f64> = grid_multipliers.iter().map(|&c| c * sigma).collect();
            let famc = fam.clone();
            let sampler = move |r: &mut RngState| op_norm_draw(&famc, r).unwrap();
            let emp = empirical_tail(
                &sampler,
                &grid,
                cfg.reps,
                RngState::new(cfg.seed, base(4, task)),
            )?;
            task += 1;
            for (kind, spec) in [
                (
                    "hoeffding",
                    TailBoundSpec::MatrixHoeffding {
                        m_bound: fam.m_bound(),
                        n,
                        dim,
                    },
                ),
                (
                    "bernstein",
                    TailBoundSpec::MatrixBernstein {
                        sigma2: fam.sigma2(),
                        m_bound: fam.m_bound(),
                        dim,
                    },
                ),
            ] {
                let rows = domination_check(&spec, &emp)?;
                let slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
                records.push(CheckRecord::new(
                    format!("tail-domination/matrix-{kind}-d{dim}-n{n}"),
                    json!({"grid": "0.5..4 sigma", "reps": cfg.reps}),
                    Some(0.0),
                    Some(slack),
                    None,
                    slack >= 0.0,
                ));
            }
        }
    }
    Ok(records)
}

fn footrule_ks_median(n: usize, reps: usize, seed: u64, task: u64) -> Result<f64> {
    let m = footrule_matrix(n)?;
    let block = crate::bounds::MC_BLOCK;
    let mut estimates: Vec<f64> = (0..5u64)
        .map(|run| {
            let n_blocks = reps.div_ceil(block);
            let chunks: Vec<Vec<f64>> = (0..n_blocks)
                .into_par_iter()
                .map(|b| {
                    let mut r = RngState::new(seed, base(5, task) + run * 4096 + b as u64);
                    let start = b * block;
                    let end = (start + block).min(reps);
                    (start..end)
                        .map(|_| {
                            let p = random_permutation(n, &mut r).unwrap();
                            standardized_sum(&m, &p).unwrap()
                        })
                        .collect()
                })
                .collect();
            let samples: Vec<f64> = chunks.into_iter().flatten().collect();
            ks_distance_to_normal(&samples)
        })
        .collect::<Result<_>>()?;
    estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(estimates[2])
}

/// Criterion 5: KS distance to normal decays along the footrule family and
/// so do the certificate quantities.
pub fn criterion_clt_rates(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let ks20 = footrule_ks_median(20, cfg.reps, cfg.seed, 0)?;
    let ks50 = footrule_ks_median(50, cfg.reps, cfg.seed, 1)?;
    let ks200 = footrule_ks_median(200, cfg.reps, cfg.seed, 2)?;
    let ordered = ks200 < ks50 && ks50 < ks20 && ks200 < 0.05;

    let c20 = clt_certificate(&footrule_matrix(20)?)?;
    let c50 = clt_certificate(&footrule_matrix(50)?)?;
    let c200 = clt_certificate(&footrule_matrix(200)?)?;
    let cert_ordered =
        c200.r3 < c50.r3 && c50.r3 < c20.r3 && c200.ratio < c50.ratio && c50.ratio < c20.ratio;

    Ok(vec![
        CheckRecord::new(
            "clt-rates/ks-decay-footrule",
            json!({"reps": cfg.reps, "ks": {"n20": ks20, "n50": ks50, "n200": ks200}}),
            Some(0.05),
            Some(ks200),
            None,
            ordered,
        ),
        CheckRecord::new(
            "clt-rates/certificate-decay-footrule",
            json!({"r3": {"n20": c20.r3, "n50": c50.r3, "n200": c200.r3},
                   "ratio": {"n20": c20.ratio, "n50": c50.ratio, "n200": c200.ratio}}),
            None,
            None,
            None,
            cert_ordered,
        ),
    ])
}

/// Criterion 6: the normalized-process covariance matches enumeration
/// exactly at small N and Monte Carlo at N = 100.
pub fn criterion_donsker_cov(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    // exact enumeration side
    let mut worst = 0.0f64;
    let mut rng = RngState::new(77, 0);
    for n_total in 3..=7usize {
        let values: Vec<f64> = (0..n_total).map(|_| rng.next_f64() * 4.0 - 2.0).collect();
        let pop = ScalarPopulation::from_values(&values)?;
        for n_sample in 1..n_total {
            let analytic = donsker_cov(&pop, n_sample, &|&z| z, &|&z| z * z)?;
            let mut devs_f = Vec::new();
            let mut devs_g = Vec::new();
            let root_n = (n_sample as f64).sqrt();
            for combo in Combinations::new(n_total, n_sample)? {
                let mask = SampleMask::from_indices(n_total, &combo)?;
                let m = PermMeasure::new(&pop, mask)?;
                devs_f.push(root_n * m.deviation(&|&z| z));
                devs_g.push(root_n * m.deviation(&|&z| z * z));
            }
            let k = devs_f.len() as f64;
            let cov = devs_f
                .iter()
                .zip(&devs_g)
                .map(|(&a, &b)| a * b)
                .sum::<f64>()
                / k;
            worst = worst.max((analytic - cov).abs());
        }
    }
    let mut records = vec![CheckRecord::new(
        "donsker-cov/enumeration",
        json!({"n": "3..7", "pairs": "(id, id^2)"}),
        Some(1e-10),
        Some(worst),
        None,
        worst <= 1e-10,
    )];

    // Monte Carlo side at N = 100, n = 50
    let n_total = 100usize;
    let n_sample = 50usize;
    let values: Vec<f64> = (1..=n_total).map(|i| i as f64 / n_total as f64).collect();
    let pop = ScalarPopulation::from_values(&values)?;
    let reps = cfg.reps;
    let block = crate::bounds::MC_BLOCK;
    let n_blocks = reps.div_ceil(block);
    let chunks: Vec<Vec<(f64, f64)>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = RngState::new(cfg.seed, base(6, 0) + b as u64);
            let start = b * block;
            let end = (start + block).min(reps);
            let root_n = (n_sample as f64).sqrt();
            (start..end)
                .map(|_| {
                    let m = PermMeasure::draw(&pop, n_sample, &mut r).unwrap();
                    (
                        root_n * m.deviation(&|&z| z),
                        root_n * m.deviation(&|&z| z * z),
                    )
                })
                .collect()
        })
        .collect();
    let draws: Vec<(f64, f64)> = chunks.into_iter().flatten().collect();
    let b = draws.len() as f64;
    for (pair_name, f_idx, g_idx) in [("id-id", 0, 0), ("id-id2", 0, 1), ("id2-id2", 1, 1)] {
        let pick = |d: &(f64, f64), which: usize| if which == 0 { d.0 } else { d.1 };
        let mf = draws.iter().map(|d| pick(d, f_idx)).sum::<f64>() / b;
        let mg = draws.iter().map(|d| pick(d, g_idx)).sum::<f64>() / b;
        let prods: Vec<f64> = draws
            .iter()
            .map(|d| (pick(d, f_idx) - mf) * (pick(d, g_idx) - mg))
            .collect();
        let cov = prods.iter().sum::<f64>() / b;
        let var_p = prods.iter().map(|&p| (p - cov) * (p - cov)).sum::<f64>() / b;
        let se = (var_p / b).sqrt();
        let fs: [&dyn Fn(&f64) -> f64; 2] = [&|&z| z, &|&z| z * z];
        let analytic = donsker_cov(&pop, n_sample, fs[f_idx], fs[g_idx])?;
        records.push(CheckRecord::new(
            format!("donsker-cov/mc-{pair_name}"),
            json!({"n_pop": n_total, "n_sample": n_sample, "reps": reps}),
            Some(analytic),
            Some(cov),
            Some(se),
            (cov - analytic).abs() <= 3.0 * se,
        ));
    }
    Ok(records)
}

/// Criterion 7: partial-sum variance identity and the Monte Carlo bridge
/// covariance at N = 400.
pub fn criterion_rosen(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let mut worst = 0.0f64;
    let mut rng = RngState::new(55, 0);
    for n in 2..=50usize {
        let z: Vec<f64> = (0..n)
            .map(|_| rng.next_f64() * 2.0 + 0.1 * n as f64)
            .collect();
        if normalize_population(&z).is_err() {
            continue;
        }
        for k in 0..=n {
            let v = rosen_variance(&z, k)?;
            let closed = (k * (n - k)) as f64 / (n as f64 * (n as f64 - 1.0));
            worst = worst.max((v - closed).abs());
        }
    }
    let mut records = vec![CheckRecord::new(
        "rosen/variance-identity",
        json!({"n": "2..50", "identity": "k(N-k)/(N(N-1))"}),
        Some(1e-12),
        Some(worst),
        None,
        worst <= 1e-12,
    )];

    let n = 400usize;
    let z = normalize_population(&(1..=n).map(|i| i as f64).collect::<Vec<_>>())?;
    let grid = [0.25, 0.5];
    let reps = cfg.reps;
    let block = crate::bounds::MC_BLOCK;
    let n_blocks = reps.div_ceil(block);
    let chunks: Vec<Vec<(f64, f64)>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = RngState::new(cfg.seed, base(7, 0) + b as u64);
            let start = b * block;
            let end = (start + block).min(reps);
            (start..end)
                .map(|_| {
                    let pi = random_permutation(n, &mut r).unwrap();
                    let path = rosen_path(&z, &pi, &grid).unwrap();
                    (path.values[0], path.values[1])
                })
                .collect()
        })
        .collect();
    let draws: Vec<(f64, f64)> = chunks.into_iter().flatten().collect();
    let b = draws.len() as f64;
    let mx = draws.iter().map(|d| d.0).sum::<f64>() / b;
    let my = draws.iter().map(|d| d.1).sum::<f64>() / b;
    let prods: Vec<f64> = draws.iter().map(|d| (d.0 - mx) * (d.1 - my)).collect();
    let cov = prods.iter().sum::<f64>() / b;
    let var_p = prods.iter().map(|&p| (p - cov) * (p - cov)).sum::<f64>() / b;
    let se = (var_p / b).sqrt();
    let exact = rosen_covariance_exact(n, n / 4, n / 2)?;
    records.push(CheckRecord::new(
        "rosen/mc-bridge-covariance",
        json!({"n": n, "times": [0.25, 0.5], "reps": reps}),
        Some(exact),
        Some(cov),
        Some(se),
        (cov - exact).abs() <= 3.0 * se,
    ));
    Ok(records)
}

/// Criterion 8: without-replacement sums are convex-dominated by iid sums.
pub fn criterion_convex_order() -> Result<Vec<CheckRecord>> {
    let populations: Vec<Vec<f64>> = vec![
        vec![1.0, 2.0, 3.0, 4.0],
        vec![-1.0, 0.0, 1.0],
        vec![0.5, 0.5, 2.0, -3.0, 1.0],
        vec![2.0, 2.0, 2.0, 5.0],
    ];
    let mut all_pass = true;
    let mut worst_gap = f64::NEG_INFINITY;
    for z in &populations {
        let nf = z.len() as f64;
        for n_sample in 1..=z.len() {
            for f in [
                Box::new(|x: f64| x * x) as Box<dyn Fn(f64) -> f64 + Sync>,
                Box::new(|x: f64| x.abs()),
                Box::new(move |x: f64| (x / nf).exp()),
            ] {
                let res = convex_order_check(
                    z,
                    n_sample,
                    f.as_ref(),
                    ConvexOrderMode::Exhaustive,
                    RngState::new(0, 0),
                )?;
                all_pass &= res.pass;
                worst_gap = worst_gap.max(res.e_without - res.e_with);
            }
        }
    }
    // the pinned small case
    let res = convex_order_check(
        &[1.0, 2.0, 3.0, 4.0],
        2,
        &|x| x * x,
        ConvexOrderMode::Exhaustive,
        RngState::new(0, 0),
    )?;
    let pinned_ok =
        (res.e_without - 160.0 / 6.0).abs() < 1e-10 && (res.e_with - 27.5).abs() < 1e-10;
    Ok(vec![
        CheckRecord::new(
            "convex-order/exhaustive-corpus",
            json!({"populations": populations.len(), "functions": ["x^2", "|x|", "exp(x/N)"]}),
            Some(0.0),
            Some(worst_gap),
            None,
            all_pass,
        ),
        CheckRecord::new(
            "convex-order/pinned-square-case",
            json!({"z": [1, 2, 3, 4], "n": 2}),
            Some(27.5),
            Some(res.e_without),
            None,
            pinned_ok,
        ),
    ])
}

/// Criterion 9: exact p-value, Monte Carlo agreement, and null
/// super-uniformity of the two-sample test.
pub fn criterion_perm_test(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let data = TwoSampleData::new(vec![1.0, 2.0], vec![3.0, 4.0])?;
    let exact = exact_perm_test(&data, &Statistic::MeanDiff, Side::TwoSided)?;
    let exact_ok = (exact.p_value - 1.0 / 3.0).abs() < 1e-12;

    let mc = mc_perm_test(
        &data,
        &Statistic::MeanDiff,
        Side::TwoSided,
        9999,
        RngState::new(cfg.seed, base(9, 0)),
    )?;
    let se = (exact.p_value * (1.0 - exact.p_value) / 9999.0f64).sqrt();
    let mc_ok = (mc.p_value - exact.p_value).abs() <= 3.0 * se;

    let mut rng = RngState::new(cfg.seed, base(9, 1));
    let replicates = 2000usize;
    let mut at_05 = 0usize;
    for _ in 0..replicates {
        let x: Vec<f64> = (0..4).map(|_| rng.next_f64()).collect();
        let y: Vec<f64> = (0..4).map(|_| rng.next_f64()).collect();
        let d = TwoSampleData::new(x, y)?;
        if exact_perm_test(&d, &Statistic::MeanDiff, Side::TwoSided)?.p_value <= 0.05 {
            at_05 += 1;
        }
    }
    let level = at_05 as f64 / replicates as f64;
    let cap = 0.05 + 1.0 / binomial(8, 4);
    Ok(vec![
        CheckRecord::new(
            "perm-test/exact-p-one-third",
            json!({"x": [1, 2], "y": [3, 4], "statistic": "mean_diff"}),
            Some(1.0 / 3.0),
            Some(exact.p_value),
            None,
            exact_ok,
        ),
        CheckRecord::new(
            "perm-test/mc-matches-exact",
            json!({"resamples": 9999}),
            Some(exact.p_value),
            Some(mc.p_value),
            Some(se),
            mc_ok,
        ),
        CheckRecord::new(
            "perm-test/null-super-uniformity",
            json!({"replicates": replicates, "alpha": 0.05}),
            Some(cap),
            Some(level),
            None,
            level <= cap,
        ),
    ])
}

/// Criterion 10: series regression exactness, unbiased design matrix, and
/// Monte Carlo loss decay inside the calibrated envelope.
pub fn criterion_series_reg(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    // exact-fit loss
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let ys: Vec<f64> = xs.iter().map(|&x| 2.0 * x + 1.0).collect();
    let spec = BasisSpec::polynomial(2)?;
    let pop = population_fit(&xs, &ys, &spec)?;
    let mask = SampleMask::from_indices(5, &[0, 3])?;
    let fit = sample_fit(&xs, &ys, &mask, &spec)?;
    let exact_loss = reg_loss(&fit, &pop)?;

    // E[Q_hat] = Q under enumeration
    let mut worst_q = 0.0f64;
    let mut rng = RngState::new(44, 0);
    for n_total in 3..=7usize {
        let x: Vec<f64> = (0..n_total).map(|_| rng.next_f64() * 4.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| v * v + rng.next_f64()).collect();
        let pfit = population_fit(&x, &y, &spec)?;
        for n_sample in 2..n_total {
            let mut mean_q = crate::eigen::SquareMat::zeros(2);
            let mut count = 0.0;
            for combo in Combinations::new(n_total, n_sample)? {
                let m = SampleMask::from_indices(n_total, &combo)?;
                mean_q.add_assign(&sample_fit(&x, &y, &m, &spec)?.q);
                count += 1.0;
            }
            mean_q.scale(1.0 / count);
            worst_q = worst_q.max(mean_q.sub(&pfit.q).max_abs());
        }
    }

    // MC loss decay at N = 40, K = 2, n: 10 -> 20
    let n_total = 40usize;
    let gx: Vec<f64> = (1..=n_total).map(|i| i as f64 / n_total as f64).collect();
    let mut noise = RngState::new(cfg.seed, base(10, 0));
    let gy: Vec<f64> = gx
        .iter()
        .map(|&x| 1.0 + 2.0 * x + 3.0 * x * x + 0.1 * (noise.next_f64() - 0.5))
        .collect();
    let gpop = population_fit(&gx, &gy, &spec)?;
    let reps = 2000usize;
    let mean_loss = |n_sample: usize, task: u64| -> Result<(f64, f64)> {
        let mut r = RngState::new(cfg.seed, base(10, task));
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..reps {
            let mask = sample_without_replacement(n_total, n_sample, &mut r)?;
            let l = reg_loss(&sample_fit(&gx, &gy, &mask, &spec)?, &gpop)?;
            sum += l;
            sumsq += l * l;
        }
        let b = reps as f64;
        let mean = sum / b;
        let var = (sumsq / b - mean * mean).max(0.0);
        Ok((mean, (var / b).sqrt()))
    };
    let (l10, se10) = mean_loss(10, 1)?;
    let (l20, se20) = mean_loss(20, 2)?;
    let decays = l20 + 3.0 * (se10 + se20) < l10;

    let d10 = reg_diagnostics(&gx, &gy, &spec, 10)?;
    let d20 = reg_diagnostics(&gx, &gy, &spec, 20)?;
    let calib = l10 / d10.envelope;
    let in_envelope = l20 <= 3.0 * calib * d20.envelope;

    Ok(vec![
        CheckRecord::new(
            "series-reg/exact-fit-loss",
            json!({"truth": "2x+1", "basis": "polynomial", "k": 2}),
            Some(1e-12),
            Some(exact_loss),
            None,
            exact_loss <= 1e-12,
        ),
        CheckRecord::new(
            "series-reg/design-matrix-unbiased",
            json!({"n": "3..7"}),
            Some(1e-10),
            Some(worst_q),
            None,
            worst_q <= 1e-10,
        ),
        CheckRecord::new(
            "series-reg/mc-loss-decay-and-envelope",
            json!({"n_pop": n_total, "k": 2, "reps": reps,
                   "loss": {"n10": l10, "n20": l20},
                   "se": {"n10": se10, "n20": se20},
                   "envelope": {"n10": d10.envelope, "n20": d20.envelope}}),
            Some(l10),
            Some(l20),
            Some(se10 + se20),
            decays && in_envelope,
        ),
    ])
}

/// Monte Carlo results do not depend on the worker count: the same task run
/// on one thread and on four threads must agree bit for bit.
pub fn criterion_thread_determinism(cfg: &VerifyConfig) -> Result<Vec<CheckRecord>> {
    let m = footrule_matrix(12)?;
    let sigma = m.sigma2().sqrt();
    let grid = [0.5 * sigma, sigma, 2.0 * sigma];
    let run = |threads: usize| -> Result<Vec<f64>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::error::Error::InvalidArguments(e.to_string()))?;
        let mc = m.clone();
        let sampler = move |r: &mut RngState| {
            let p = random_permutation(mc.n(), r).unwrap();
            crate::moments::centered_sum_eval(&mc, &p).unwrap()
        };
        let emp = pool.install(|| {
            empirical_tail(
                &sampler,
                &grid,
                20_000,
                RngState::new(cfg.seed, base(11, 0)),
            )
        })?;
        Ok(emp.survival)
    };
    let one = run(1)?;
    let four = run(4)?;
    let identical = one
        .iter()
        .zip(&four)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    Ok(vec![CheckRecord::new(
        "reproducibility/thread-count-invariance",
        json!({"threads": [1, 4], "draws": 20_000}),
        None,
        None,
        None,
        identical,
    )])
}

/// Runs the complete verification suite.
pub fn verify_all(cfg: &VerifyConfig) -> Result<Report> {
    let mut checks = Vec::new();
    checks.extend(criterion_exact_moments()?);
    checks.extend(criterion_rank_moments()?);
    checks.extend(criterion_stein_linearity()?);
    checks.extend(criterion_tail_domination(cfg)?);
    checks.extend(criterion_clt_rates(cfg)?);
    checks.extend(criterion_donsker_cov(cfg)?);
    checks.extend(criterion_rosen(cfg)?);
    checks.extend(criterion_convex_order()?);
    checks.extend(criterion_perm_test(cfg)?);
    checks.extend(criterion_series_reg(cfg)?);
    checks.extend(criterion_thread_determinism(cfg)?);
    Ok(Report::new(
        "verify-all",
        json!({"seed": cfg.seed, "reps": cfg.reps}),
        serde_json::Value::Null,
        checks,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        for rec in criterion_exact_moments()
            .unwrap()
            .into_iter()
            .chain(criterion_rank_moments().unwrap())
            .chain(criterion_stein_linearity().unwrap())
            .chain(criterion_convex_order().unwrap())
        {
            assert!(rec.passed(), "{} failed: {:?}", rec.name, rec);
        }
    }

    #[test]
    fn stochastic_criteria_pass_at_reduced_reps() {
        let cfg = VerifyConfig {
            seed: 7,
            reps: 4000,
        };
        for rec in criterion_donsker_cov(&cfg)
            .unwrap()
            .into_iter()
            .chain(criterion_rosen(&cfg).unwrap())
            .chain(criterion_perm_test(&cfg).unwrap())
            .chain(criterion_thread_determinism(&cfg).unwrap())
        {
            assert!(rec.passed(), "{} failed: {:?}", rec.name, rec);
        }
    }
}
