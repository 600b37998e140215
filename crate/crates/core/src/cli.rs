//! The `permstat` command line: every verification suite as a subcommand
//! with seeded, machine-readable JSON output.
//!
//! Exit codes: 0 when every emitted verdict is PASS, 1 when any is FAIL,
//! 2 on usage or data errors. Stochastic subcommands require an explicit
//! `--seed`; there is no wall-clock default anywhere.

use crate::bounds::{domination_check, empirical_tail, TailBoundSpec};
use crate::clt::{
    clt_certificate, ks_distance_to_normal, normalize_population, rosen_covariance_exact,
    rosen_path, rosen_variance, standardized_sum, wasserstein1_to_normal,
};
use crate::error::{Error, Result};
use crate::io::{read_column_csv, read_matrix_csv, read_xy_csv};
use crate::matrix_bounds::{
    op_norm_draw, random_centered_family, MatrixBoundKind, SymMatrixFamily,
};
use crate::moments::{
    comb_sum_eval, footrule_matrix, oscillation_moments, random_matrix, rank_one_matrix,
    rho_matrix, PermMatrix,
};
use crate::perm::{enumerate_permutations_capped, random_permutation, sample_without_replacement};
use crate::process::{gc_decay_experiment, sup_dev_indicator, PermMeasure, ScalarPopulation};
use crate::report::{CheckRecord, Report};
use crate::rng::RngState;
use crate::series::{population_fit, reg_diagnostics, reg_loss, sample_fit, BasisSpec};
use crate::twosample::{exact_perm_test, mc_perm_test, Side, Statistic, TestMode, TwoSampleData};
use crate::verify::{verify_all, VerifyConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::PathBuf;

const GRID_MULTIPLIERS: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 4.0];

#[derive(Parser)]
#[command(
    name = "permstat",
    version,
    about = "Finite-population permutation statistics with built-in verification"
)]
struct CliArgs {
    /// Worker threads for Monte Carlo subcommands (results do not depend on
    /// this; falls back to PERMSTAT_THREADS, then to the core count)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct MatrixSource {
    /// Built-in score matrix: footrule | rho | rank1 | random
    #[arg(long, conflicts_with = "input")]
    matrix: Option<String>,

    /// Dense header-free CSV score matrix
    #[arg(long)]
    input: Option<PathBuf>,

    /// Size of the built-in matrix
    #[arg(long = "n", visible_alias = "N")]
    n: Option<usize>,
}

impl MatrixSource {
    fn resolve(&self, seed: Option<u64>) -> Result<(String, PermMatrix)> {
        match (&self.matrix, &self.input) {
            (Some(name), None) => {
                let n = self.n.ok_or_else(|| {
                    Error::InvalidArguments("--n is required with --matrix".into())
                })?;
                let m = match name.as_str() {
                    "footrule" => footrule_matrix(n)?,
                    "rho" => rho_matrix(n)?,
                    "rank1" => rank_one_matrix(n)?.matrix,
                    "random" => {
                        let seed = seed.ok_or_else(|| {
                            Error::InvalidArguments(
                                "--seed is required with --matrix random".into(),
                            )
                        })?;
                        random_matrix(n, seed)?
                    }
                    other => {
                        return Err(Error::InvalidArguments(format!(
                            "unknown built-in matrix '{other}' (footrule|rho|rank1|random)"
                        )))
                    }
                };
                Ok((name.clone(), m))
            }
            (None, Some(path)) => Ok((
                path.display().to_string(),
                PermMatrix::new(&read_matrix_csv(path)?)?,
            )),
            _ => Err(Error::InvalidArguments(
                "exactly one of --matrix or --input is required".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Score-matrix features and exact moments, cross-checked by
    /// enumeration at small sizes
    Moments {
        #[command(flatten)]
        source: MatrixSource,
        /// Seed (required only for --matrix random)
        #[arg(long)]
        seed: Option<u64>,
        /// Largest size enumerated for the cross-check
        #[arg(long, default_value_t = 8)]
        enum_cap: usize,
        /// Also report moments of a named rank statistic at the same size
        /// (footrule|spearman_rho|kendall_tau|chatterjee_xi|wilcoxon:m|mann_whitney_u:m,n)
        #[arg(long)]
        rank_stat: Option<String>,
    },
    /// Scalar tail bounds against the Monte Carlo survival of the centered
    /// combinatorial sum
    TailCheck {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
    /// CLT certificates plus empirical KS and Wasserstein-1 distances to
    /// normal
    CltCheck {
        #[command(flatten)]
        source: MatrixSource,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
    /// Matrix Hoeffding/Bernstein bounds against the Monte Carlo tail of
    /// the spectral norm
    MatrixCheck {
        /// JSON tensor [N][N][d][d] of symmetric blocks (defaults to a
        /// seeded random centered family)
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long = "n", visible_alias = "N", default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
    /// Decay of the expected indicator-class sup-deviation in the sample
    /// size
    GcCheck {
        /// Single-column CSV population (defaults to 1..pop-size)
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        pop_size: usize,
        /// Comma-separated sample sizes
        #[arg(long, default_value = "16,32,64")]
        n_grid: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
    /// Exact sup-deviation of one seeded sample over the indicator class
    SupDev {
        /// Single-column CSV population
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "n", visible_alias = "N")]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Partial-sum process: the variance identity and the Monte Carlo
    /// bridge covariance
    Rosen {
        /// Population size for the built-in 1..N scores
        #[arg(long, default_value_t = 400)]
        pop_size: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
    /// Series regression diagnostics on a two-column CSV
    SeriesReg {
        #[arg(long)]
        input: PathBuf,
        /// polynomial | piecewise
        #[arg(long, default_value = "polynomial")]
        basis: String,
        #[arg(long = "K", visible_alias = "k", default_value_t = 2)]
        k: usize,
        /// Knots for the piecewise basis, comma-separated
        #[arg(long)]
        knots: Option<String>,
        /// Sample size drawn without replacement
        #[arg(long = "n", visible_alias = "N")]
        n: usize,
        /// Monte Carlo replications of the sampling loss
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Two-sample permutation test from two single-column CSVs
    PermTest {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        /// mean_diff | ks_two_sample | wilcoxon | mann_whitney
        #[arg(long, default_value = "mean_diff")]
        stat: String,
        /// two | greater | less
        #[arg(long, default_value = "two")]
        side: String,
        /// exact | mc
        #[arg(long, default_value = "exact")]
        mode: String,
        /// Monte Carlo resamples (mc mode)
        #[arg(long = "B", visible_alias = "b", default_value_t = 9999)]
        resamples: usize,
        /// Seed (required in mc mode)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// The full verification suite
    VerifyAll {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
    },
}

fn centered_sum_sampler(m: PermMatrix) -> impl Fn(&mut RngState) -> f64 + Sync {
    move |r: &mut RngState| {
        let p = random_permutation(m.n(), r).unwrap();
        crate::moments::centered_sum_eval(&m, &p).unwrap()
    }
}

fn tail_check_records(
    m: &PermMatrix,
    rank1_factors: Option<(&[f64], &[f64])>,
    seed: u64,
    reps: usize,
) -> Result<Vec<CheckRecord>> {
    let sigma = m.sigma2().sqrt();
    let grid: Vec<f64> = GRID_MULTIPLIERS.iter().map(|&c| c * sigma).collect();
    let emp = empirical_tail(
        &centered_sum_sampler(m.clone()),
        &grid,
        reps,
        RngState::new(seed, 0),
    )?;
    let mut specs = vec![
        TailBoundSpec::comb_hoeffding_v1(m),
        TailBoundSpec::comb_bernstein(m),
    ];
    if let Some((a, b)) = rank1_factors {
        specs.push(TailBoundSpec::comb_hoeffding_v2(a, b)?);
    }
    let mut records = Vec::new();
    for spec in specs {
        for row in domination_check(&spec, &emp)? {
            records.push(CheckRecord::new(
                format!("{}/t={:.6}", spec.kind(), row.t),
                json!({"kind": spec.kind(), "t": row.t}),
                Some(row.bound),
                Some(row.empirical),
                Some(row.se),
                row.pass,
            ));
        }
    }
    Ok(records)
}

fn run_command(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Moments {
            source,
            seed,
            enum_cap,
            rank_stat,
        } => {
            let (name, m) = source.resolve(*seed)?;
            let rank = match rank_stat {
                Some(id) => {
                    let kind = crate::ranks::RankStatKind::from_id(id)?;
                    let (mean, variance) =
                        crate::ranks::rank_moments_capped(kind, m.n(), *enum_cap)?;
                    json!({"id": id, "mean": mean, "variance": variance})
                }
                None => serde_json::Value::Null,
            };
            let osc = if m.n() >= 3 {
                let (mean, var) = oscillation_moments(&m)?;
                json!({"mean": mean, "variance": var})
            } else {
                serde_json::Value::Null
            };
            let cert = clt_certificate(&m)
                .map(|c| json!({"r3": c.r3, "ratio": c.ratio, "weak_rate": c.weak_rate}))
                .unwrap_or(serde_json::Value::Null);
            let data = json!({
                "matrix": name,
                "n": m.n(),
                "mu": m.mu(),
                "sigma2": m.sigma2(),
                "b_max": m.b_max(),
                "d3": m.d3(),
                "d4": m.d4(),
                "oscillation": osc,
                "certificate": cert,
                "rank_stat": rank,
            });
            let mut checks = Vec::new();
            if m.n() <= *enum_cap {
                let vals: Vec<f64> = enumerate_permutations_capped(m.n(), *enum_cap)?
                    .map(|p| comb_sum_eval(&m, &p).unwrap())
                    .collect();
                let k = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / k;
                let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k;
                let err = ((mean - m.mu()).abs() / (1.0 + m.mu().abs()))
                    .max((var - m.sigma2()).abs() / (1.0 + m.sigma2()));
                checks.push(CheckRecord::new(
                    "moments/enumeration-cross-check",
                    json!({"n": m.n()}),
                    Some(1e-10),
                    Some(err),
                    None,
                    err <= 1e-10,
                ));
            }
            Ok(Report::new(
                "moments",
                json!({"matrix": name, "n": m.n(), "seed": seed, "enum_cap": enum_cap,
                       "rank_stat": rank_stat}),
                data,
                checks,
            ))
        }

        Command::TailCheck { source, seed, reps } => {
            let (name, m) = source.resolve(Some(*seed))?;
            let factors = if name == "rank1" {
                Some(rank_one_matrix(m.n())?)
            } else {
                None
            };
            let records = tail_check_records(
                &m,
                factors.as_ref().map(|r| (r.a.as_slice(), r.b.as_slice())),
                *seed,
                *reps,
            )?;
            Ok(Report::new(
                "tail-check",
                json!({"matrix": name, "n": m.n(), "seed": seed, "reps": reps}),
                serde_json::Value::Null,
                records,
            ))
        }

        Command::CltCheck { source, seed, reps } => {
            let (name, m) = source.resolve(Some(*seed))?;
            let cert = clt_certificate(&m)?;
            let block = crate::bounds::MC_BLOCK;
            let n_blocks = reps.div_ceil(block);
            use rayon::prelude::*;
            let chunks: Vec<Vec<f64>> = (0..n_blocks)
                .into_par_iter()
                .map(|b| {
                    let mut r = RngState::new(*seed, b as u64);
                    let start = b * block;
                    let end = (start + block).min(*reps);
                    (start..end)
                        .map(|_| {
                            let p = random_permutation(m.n(), &mut r).unwrap();
                            standardized_sum(&m, &p).unwrap()
                        })
                        .collect()
                })
                .collect();
            let samples: Vec<f64> = chunks.into_iter().flatten().collect();
            let ks = ks_distance_to_normal(&samples)?;
            let w1 = wasserstein1_to_normal(&samples)?;
            let data = json!({"rows": [{
                "n": m.n(),
                "reps": reps,
                "certificate": {"r3": cert.r3, "ratio": cert.ratio, "weak_rate": cert.weak_rate},
                "ks": ks,
                "w1": w1,
            }]});
            Ok(Report::new(
                "clt-check",
                json!({"matrix": name, "n": m.n(), "seed": seed, "reps": reps}),
                data,
                Vec::new(),
            ))
        }

        Command::MatrixCheck {
            input,
            n,
            dim,
            seed,
            reps,
        } => {
            let family = match input {
                Some(path) => {
                    let raw = std::fs::read_to_string(path)
                        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
                    let tensor: Vec<Vec<Vec<Vec<f64>>>> = serde_json::from_str(&raw)
                        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
                    let entries = tensor
                        .into_iter()
                        .map(|row| {
                            row.into_iter()
                                .map(|block| crate::eigen::SquareMat::from_rows(&block))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    crate::matrix_bounds::center_family(&SymMatrixFamily::new(entries)?)?
                }
                None => random_centered_family(*n, *dim, *seed)?,
            };
            let sigma = family.sigma2().sqrt();
            let grid: Vec<f64> = GRID_MULTIPLIERS.iter().map(|&c| c * sigma).collect();
            let famc = family.clone();
            let sampler = move |r: &mut RngState| op_norm_draw(&famc, r).unwrap();
            let emp = empirical_tail(&sampler, &grid, *reps, RngState::new(*seed, 1))?;
            let mut checks = Vec::new();
            for kind in [MatrixBoundKind::Hoeffding, MatrixBoundKind::Bernstein] {
                let spec = match kind {
                    MatrixBoundKind::Hoeffding => TailBoundSpec::MatrixHoeffding {
                        m_bound: family.m_bound(),
                        n: family.n(),
                        dim: family.dim(),
                    },
                    MatrixBoundKind::Bernstein => TailBoundSpec::MatrixBernstein {
                        sigma2: family.sigma2(),
                        m_bound: family.m_bound(),
                        dim: family.dim(),
                    },
                };
                for row in domination_check(&spec, &emp)? {
                    checks.push(CheckRecord::new(
                        format!("{}/t={:.6}", spec.kind(), row.t),
                        json!({"kind": spec.kind(), "t": row.t}),
                        Some(row.bound),
                        Some(row.empirical),
                        Some(row.se),
                        row.pass,
                    ));
                }
            }
            Ok(Report::new(
                "matrix-check",
                json!({"n": family.n(), "dim": family.dim(), "seed": seed, "reps": reps}),
                json!({"m_bound": family.m_bound(), "sigma2": family.sigma2()}),
                checks,
            ))
        }

        Command::GcCheck {
            input,
            pop_size,
            n_grid,
            seed,
            reps,
        } => {
            let values = match input {
                Some(path) => read_column_csv(path)?,
                None => (1..=*pop_size).map(|i| i as f64).collect(),
            };
            let pop = ScalarPopulation::from_values(&values)?;
            let grid: Vec<usize> = n_grid
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidArguments(format!("bad n-grid entry '{s}'")))
                })
                .collect::<Result<_>>()?;
            let rows = gc_decay_experiment(&pop, &grid, *reps, RngState::new(*seed, 0))?;
            let data = json!({"rows": rows.iter().map(|r| json!({
                "n": r.n_sample,
                "mean_sup_dev": r.mean_sup_dev,
                "se": r.se,
            })).collect::<Vec<_>>()});
            Ok(Report::new(
                "gc-check",
                json!({"pop_size": pop.len(), "n_grid": grid, "seed": seed, "reps": reps}),
                data,
                Vec::new(),
            ))
        }

        Command::SupDev { input, n, seed } => {
            let values = read_column_csv(input)?;
            let pop = ScalarPopulation::from_values(&values)?;
            let mut rng = RngState::new(*seed, 0);
            let mask = sample_without_replacement(pop.len(), *n, &mut rng)?;
            let selected = mask.selected_indices();
            let measure = PermMeasure::new(&pop, mask)?;
            let sup = sup_dev_indicator(&measure);
            Ok(Report::new(
                "sup-dev",
                json!({"input": input.display().to_string(), "n": n, "seed": seed}),
                json!({"n_pop": pop.len(), "n_sample": n, "sup_dev": sup,
                       "selected": selected}),
                Vec::new(),
            ))
        }

        Command::Rosen {
            pop_size,
            seed,
            reps,
        } => {
            let n = *pop_size;
            let z = normalize_population(&(1..=n).map(|i| i as f64).collect::<Vec<_>>())?;
            // variance identity over all prefixes
            let mut worst = 0.0f64;
            for k in 0..=n {
                let v = rosen_variance(&z, k)?;
                let closed = (k * (n - k)) as f64 / (n as f64 * (n as f64 - 1.0));
                worst = worst.max((v - closed).abs());
            }
            let mut checks = vec![CheckRecord::new(
                "rosen/variance-identity",
                json!({"n": n}),
                Some(1e-12),
                Some(worst),
                None,
                worst <= 1e-12,
            )];

            let grid = [0.25, 0.5];
            use rayon::prelude::*;
            let block = crate::bounds::MC_BLOCK;
            let n_blocks = reps.div_ceil(block);
            let chunks: Vec<Vec<(f64, f64)>> = (0..n_blocks)
                .into_par_iter()
                .map(|b| {
                    let mut r = RngState::new(*seed, b as u64);
                    let start = b * block;
                    let end = (start + block).min(*reps);
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
            checks.push(CheckRecord::new(
                "rosen/mc-bridge-covariance",
                json!({"times": [0.25, 0.5], "reps": reps}),
                Some(exact),
                Some(cov),
                Some(se),
                (cov - exact).abs() <= 3.0 * se,
            ));
            Ok(Report::new(
                "rosen",
                json!({"pop_size": n, "seed": seed, "reps": reps}),
                serde_json::Value::Null,
                checks,
            ))
        }

        Command::SeriesReg {
            input,
            basis,
            k,
            knots,
            n,
            reps,
            seed,
        } => {
            let (xs, ys) = read_xy_csv(input)?;
            let spec = match basis.as_str() {
                "polynomial" => BasisSpec::polynomial(*k)?,
                "piecewise" => {
                    let knots_str = knots.as_ref().ok_or_else(|| {
                        Error::InvalidArguments("--knots is required for piecewise".into())
                    })?;
                    let parsed: Vec<f64> = knots_str
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<f64>()
                                .map_err(|_| Error::InvalidArguments(format!("bad knot '{s}'")))
                        })
                        .collect::<Result<_>>()?;
                    BasisSpec::piecewise(parsed)?
                }
                other => {
                    return Err(Error::InvalidArguments(format!(
                        "unknown basis '{other}' (polynomial|piecewise)"
                    )))
                }
            };
            let pop = population_fit(&xs, &ys, &spec)?;
            let diag = reg_diagnostics(&xs, &ys, &spec, *n)?;
            let mut rng = RngState::new(*seed, 0);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..*reps {
                let mask = sample_without_replacement(xs.len(), *n, &mut rng)?;
                let l = reg_loss(&sample_fit(&xs, &ys, &mask, &spec)?, &pop)?;
                sum += l;
                sumsq += l * l;
            }
            let b = *reps as f64;
            let mean_loss = sum / b;
            let loss_se = ((sumsq / b - mean_loss * mean_loss).max(0.0) / b).sqrt();
            let data = json!({
                "n_pop": xs.len(),
                "n_sample": n,
                "k": spec.k(),
                "beta": pop.beta,
                "lambda_min": pop.lambda_min,
                "zeta": pop.zeta,
                "rank_deficient": pop.rank_deficient,
                "a_n": diag.a_n,
                "b_n2": diag.b_n2,
                "gamma_n": diag.gamma_n,
                "envelope": diag.envelope,
                "mc_mean_loss": mean_loss,
                "mc_loss_se": loss_se,
            });
            Ok(Report::new(
                "series-reg",
                json!({"input": input.display().to_string(), "basis": basis, "k": k,
                       "n": n, "reps": reps, "seed": seed}),
                data,
                Vec::new(),
            ))
        }

        Command::PermTest {
            x,
            y,
            stat,
            side,
            mode,
            resamples,
            seed,
        } => {
            let data = TwoSampleData::new(read_column_csv(x)?, read_column_csv(y)?)?;
            let statistic = Statistic::from_id(stat)?;
            let side = Side::from_id(side)?;
            let result = match mode.as_str() {
                "exact" => exact_perm_test(&data, &statistic, side)?,
                "mc" => {
                    let seed = seed.ok_or_else(|| {
                        Error::InvalidArguments("--seed is required in mc mode".into())
                    })?;
                    mc_perm_test(&data, &statistic, side, *resamples, RngState::new(seed, 0))?
                }
                other => {
                    return Err(Error::InvalidArguments(format!(
                        "unknown mode '{other}' (exact|mc)"
                    )))
                }
            };
            let payload = json!({
                "statistic_id": result.statistic_id,
                "observed": result.observed,
                "p_value": result.p_value,
                "mode": result.mode.id(),
                "n_resamples": result.n_resamples,
                "side": result.side.id(),
                "se": result.se,
            });
            Ok(Report::new(
                "perm-test",
                json!({"x": x.display().to_string(), "y": y.display().to_string(),
                       "stat": stat, "side": result.side.id(), "mode": result.mode.id(),
                       "B": if result.mode == TestMode::MonteCarlo { Some(resamples) } else { None },
                       "seed": seed}),
                payload,
                Vec::new(),
            ))
        }

        Command::VerifyAll { seed, reps } => verify_all(&VerifyConfig {
            seed: *seed,
            reps: *reps,
        }),
    }
}

fn configure_threads(requested: Option<usize>) {
    let n = requested.or_else(|| {
        std::env::var("PERMSTAT_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = n {
        // ignore the error if a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Parses argv, runs the subcommand, writes the report. Returns the process
/// exit code.
pub fn run() -> i32 {
    let args = CliArgs::parse();
    configure_threads(args.threads);
    match run_command(&args.command) {
        Ok(report) => {
            let rendered = match args.format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            match &args.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &rendered) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{rendered}"),
            }
            if report.all_passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
