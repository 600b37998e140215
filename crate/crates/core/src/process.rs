//! The permutation measure of a finite population, exact sup-deviations over
//! indicator and finite function classes, Glivenko-Cantelli decay
//! experiments, and the finite-population covariance of the normalized
//! process.

use crate::error::{Error, Result};
use crate::perm::{sample_without_replacement, SampleMask};
use crate::rng::RngState;
use rayon::prelude::*;

/// A finite population of points; the empirical law places mass `1/N` on
/// each point (repeats allowed).
#[derive(Debug, Clone)]
pub struct FinitePopulation<P> {
    points: Vec<P>,
}

/// Scalar populations, the common case.
pub type ScalarPopulation = FinitePopulation<f64>;

impl<P> FinitePopulation<P> {
    pub fn new(points: Vec<P>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSize("empty population".into()));
        }
        Ok(FinitePopulation { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    /// `P_N f`, the population mean of `f`.
    pub fn apply(&self, f: &dyn Fn(&P) -> f64) -> f64 {
        self.points.iter().map(f).sum::<f64>() / self.points.len() as f64
    }
}

impl ScalarPopulation {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite population point".into()));
        }
        FinitePopulation::new(values.to_vec())
    }
}

/// The random measure of the `n` selected points of a population.
#[derive(Debug, Clone)]
pub struct PermMeasure<'a, P> {
    population: &'a FinitePopulation<P>,
    mask: SampleMask,
}

impl<'a, P> PermMeasure<'a, P> {
    pub fn new(population: &'a FinitePopulation<P>, mask: SampleMask) -> Result<Self> {
        if mask.n_total() != population.len() {
            return Err(Error::InvalidArguments(format!(
                "mask covers {} units but the population has {}",
                mask.n_total(),
                population.len()
            )));
        }
        Ok(PermMeasure { population, mask })
    }

    pub fn draw(
        population: &'a FinitePopulation<P>,
        n_sample: usize,
        rng: &mut RngState,
    ) -> Result<Self> {
        let mask = sample_without_replacement(population.len(), n_sample, rng)?;
        PermMeasure::new(population, mask)
    }

    pub fn n_sample(&self) -> usize {
        self.mask.n_sample()
    }

    pub fn population(&self) -> &FinitePopulation<P> {
        self.population
    }

    /// The sample mean of `f` over the selected points.
    pub fn apply(&self, f: &dyn Fn(&P) -> f64) -> f64 {
        let mut total = 0.0;
        for (i, p) in self.population.points.iter().enumerate() {
            if self.mask.selected(i) {
                total += f(p);
            }
        }
        total / self.mask.n_sample() as f64
    }

    /// `(sample mean - population mean)` of `f`.
    pub fn deviation(&self, f: &dyn Fn(&P) -> f64) -> f64 {
        self.apply(f) - self.population.apply(f)
    }
}

/// Exact `sup_t |F_sample(t) - F_pop(t)|` over the indicator class
/// `{1(z <= t)}`, scanning both the value and the left limit at every atom.
pub fn sup_dev_indicator(measure: &PermMeasure<'_, f64>) -> f64 {
    let pop = measure.population.points();
    let n_total = pop.len() as f64;
    let n_sample = measure.mask.n_sample() as f64;

    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[a].partial_cmp(&pop[b]).unwrap());

    let mut sup = 0.0f64;
    let mut pop_cdf = 0.0f64;
    let mut sample_cdf = 0.0f64;
    let mut idx = 0;
    while idx < order.len() {
        // consume the whole atom (equal population values move together)
        let value = pop[order[idx]];
        // left limits just below the atom
        sup = sup.max((sample_cdf - pop_cdf).abs());
        while idx < order.len() && pop[order[idx]] == value {
            pop_cdf += 1.0 / n_total;
            if measure.mask.selected(order[idx]) {
                sample_cdf += 1.0 / n_sample;
            }
            idx += 1;
        }
        sup = sup.max((sample_cdf - pop_cdf).abs());
    }
    sup
}

/// Max absolute deviation over a finite class of evaluators, with the
/// 0-based index of the maximizer (ties broken by lowest index).
pub fn sup_dev_class<P>(
    measure: &PermMeasure<'_, P>,
    class: &[&dyn Fn(&P) -> f64],
) -> Result<(f64, usize)> {
    if class.is_empty() {
        return Err(Error::InvalidArguments("empty function class".into()));
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (k, f) in class.iter().enumerate() {
        let dev = measure.deviation(f).abs();
        if dev > best {
            best = dev;
            best_idx = k;
        }
    }
    Ok((best, best_idx))
}

/// Exact covariance of the normalized process:
/// `Cov(G f, G g) = (N-n)/(N-1) (P_N fg - P_N f P_N g)` where
/// `G f = sqrt(n) (sample mean - population mean)`.
pub fn donsker_cov<P>(
    population: &FinitePopulation<P>,
    n_sample: usize,
    f: &dyn Fn(&P) -> f64,
    g: &dyn Fn(&P) -> f64,
) -> Result<f64> {
    let n_total = population.len();
    if n_sample < 1 || n_sample > n_total {
        return Err(Error::InvalidArguments(format!(
            "sample size {n_sample} out of range 1..={n_total}"
        )));
    }
    let pf = population.apply(f);
    let pg = population.apply(g);
    let pfg = population.apply(&|p| f(p) * g(p));
    let factor = (n_total - n_sample) as f64 / (n_total as f64 - 1.0);
    Ok(factor * (pfg - pf * pg))
}

/// One row of a Glivenko-Cantelli decay table.
#[derive(Debug, Clone, Copy)]
pub struct GcDecayRow {
    pub n_sample: usize,
    pub mean_sup_dev: f64,
    pub se: f64,
}

/// Monte Carlo estimate of `E sup_t |F_sample - F_pop|` over a grid of
/// sample sizes. Deterministic for a fixed `(seed, stream)` and any worker
/// count: draws are split into fixed blocks whose partial sums are combined
/// in block order.
pub fn gc_decay_experiment(
    population: &ScalarPopulation,
    n_grid: &[usize],
    n_draws: usize,
    rng: RngState,
) -> Result<Vec<GcDecayRow>> {
    if n_draws < 100 {
        return Err(Error::InvalidArguments("need at least 100 draws".into()));
    }
    let block_size = crate::bounds::MC_BLOCK;
    let n_blocks = n_draws.div_ceil(block_size);
    n_grid
        .iter()
        .enumerate()
        .map(|(gi, &n_sample)| {
            if n_sample == population.len() {
                // full sample: the deviation is identically zero
                return Ok(GcDecayRow {
                    n_sample,
                    mean_sup_dev: 0.0,
                    se: 0.0,
                });
            }
            let partials: Vec<(f64, f64)> = (0..n_blocks)
                .into_par_iter()
                .map(|block| {
                    let stream = rng.stream().wrapping_add((gi * n_blocks + block) as u64);
                    let mut r = rng.derive(stream);
                    let start = block * block_size;
                    let end = (start + block_size).min(n_draws);
                    let mut sum = 0.0;
                    let mut sumsq = 0.0;
                    for _ in start..end {
                        let m = PermMeasure::draw(population, n_sample, &mut r).unwrap();
                        let d = sup_dev_indicator(&m);
                        sum += d;
                        sumsq += d * d;
                    }
                    (sum, sumsq)
                })
                .collect();
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for (s, s2) in partials {
                sum += s;
                sumsq += s2;
            }
            let b = n_draws as f64;
            let mean = sum / b;
            let var = (sumsq / b - mean * mean).max(0.0);
            Ok(GcDecayRow {
                n_sample,
                mean_sup_dev: mean,
                se: (var / b).sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TalagrandCheck {
    pub sigma_class2: f64,
    pub mean_sup_dev: f64,
    pub rows: Vec<crate::bounds::DominationRow>,
    pub pass: bool,
}

/// Checks the sup-deviation tail bound `exp(-n^2 t^2 / (8 N Sigma_F^2))`
/// against the Monte Carlo tail of the centered sup-deviation over a finite
/// class. A `bound_scale` of 1 checks the stated bound; test fixtures can
/// shrink it to force a failure.
pub fn talagrand_sup_bound_check<P: Sync>(
    population: &FinitePopulation<P>,
    class: &[&(dyn Fn(&P) -> f64 + Sync)],
    n_sample: usize,
    thresholds: &[f64],
    n_draws: usize,
    rng: RngState,
    bound_scale: f64,
) -> Result<TalagrandCheck> {
    if class.is_empty() {
        return Err(Error::InvalidArguments("empty function class".into()));
    }
    if n_draws < 100 {
        return Err(Error::InvalidArguments("need at least 100 draws".into()));
    }
    let n_total = population.len();
    let sigma_class2 = class
        .iter()
        .map(|f| {
            let mean = population.apply(f);
            population.apply(&|p| {
                let c = f(p) - mean;
                c * c
            })
        })
        .fold(0.0f64, f64::max);

    // draws of the sup-deviation, in deterministic blocks
    let block_size = crate::bounds::MC_BLOCK;
    let n_blocks = n_draws.div_ceil(block_size);
    let draws: Vec<Vec<f64>> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut r = rng.derive(rng.stream().wrapping_add(block as u64));
            let start = block * block_size;
            let end = (start + block_size).min(n_draws);
            let mut out = Vec::with_capacity(end - start);
            for _ in start..end {
                let m = PermMeasure::draw(population, n_sample, &mut r).unwrap();
                let sup = class
                    .iter()
                    .map(|f| m.deviation(&**f).abs())
                    .fold(0.0f64, f64::max);
                out.push(sup);
            }
            out
        })
        .collect();
    let all: Vec<f64> = draws.into_iter().flatten().collect();
    let b = all.len() as f64;
    let mean_sup = all.iter().sum::<f64>() / b;

    let spec = crate::bounds::TailBoundSpec::TolstikhinTalagrand {
        sigma_class2,
        n_sample,
        n_pop: n_total,
    };
    let rows: Vec<crate::bounds::DominationRow> = thresholds
        .iter()
        .map(|&t| {
            let exceed = all.iter().filter(|&&x| x - mean_sup >= t).count() as f64;
            let p = exceed / b;
            let se = (p * (1.0 - p) / b).sqrt();
            let bound = bound_scale * spec.eval(t)?;
            let slack = bound - (p - 3.0 * se);
            Ok(crate::bounds::DominationRow {
                t,
                bound,
                empirical: p,
                se,
                pass: slack >= -1e-12,
                slack,
            })
        })
        .collect::<Result<_>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(TalagrandCheck {
        sigma_class2,
        mean_sup_dev: mean_sup,
        rows,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{Combinations, SampleMask};

    fn four_point_pop() -> ScalarPopulation {
        ScalarPopulation::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    fn measure_12(pop: &ScalarPopulation) -> PermMeasure<'_, f64> {
        let mask = SampleMask::from_indices(4, &[0, 1]).unwrap();
        PermMeasure::new(pop, mask).unwrap()
    }

    #[test]
    fn measure_apply_basics() {
        let pop = four_point_pop();
        let m = measure_12(&pop);
        assert_eq!(m.apply(&|&z| z), 1.5);
        assert_eq!(m.apply(&|_| 1.0), 1.0);
        assert_eq!(pop.apply(&|&z| z), 2.5);

        let full =
            PermMeasure::new(&pop, SampleMask::from_indices(4, &[0, 1, 2, 3]).unwrap()).unwrap();
        assert_eq!(full.apply(&|&z| z * z), pop.apply(&|&z| z * z));
    }

    #[test]
    fn indicator_sup_dev_small_case() {
        let pop = four_point_pop();
        let m = measure_12(&pop);
        assert_eq!(sup_dev_indicator(&m), 0.5);
    }

    #[test]
    fn indicator_sup_dev_degenerate_cases() {
        let pop = four_point_pop();
        let full =
            PermMeasure::new(&pop, SampleMask::from_indices(4, &[0, 1, 2, 3]).unwrap()).unwrap();
        assert_eq!(sup_dev_indicator(&full), 0.0);

        let atom = ScalarPopulation::from_values(&[2.0, 2.0, 2.0]).unwrap();
        let m = PermMeasure::new(&atom, SampleMask::from_indices(3, &[1]).unwrap()).unwrap();
        assert_eq!(sup_dev_indicator(&m), 0.0);
    }

    #[test]
    fn indicator_sup_dev_matches_brute_force() {
        let mut rng = RngState::new(3, 0);
        let values: Vec<f64> = (0..9).map(|_| (rng.bounded(5)) as f64).collect();
        let pop = ScalarPopulation::from_values(&values).unwrap();
        for combo in Combinations::new(9, 4).unwrap() {
            let mask = SampleMask::from_indices(9, &combo).unwrap();
            let m = PermMeasure::new(&pop, mask).unwrap();
            let exact = sup_dev_indicator(&m);
            // brute force over thresholds at each atom and just below it
            let mut brute = 0.0f64;
            let mut thresholds: Vec<f64> = values.clone();
            thresholds.extend(values.iter().map(|v| v - 0.5));
            thresholds.push(values.iter().cloned().fold(f64::MIN, f64::max) + 1.0);
            for t in thresholds {
                let fs = m.apply(&|&z| if z <= t { 1.0 } else { 0.0 });
                let fp = pop.apply(&|&z| if z <= t { 1.0 } else { 0.0 });
                brute = brute.max((fs - fp).abs());
            }
            assert!((exact - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn class_sup_dev_and_tie_rule() {
        let pop = four_point_pop();
        let m = measure_12(&pop);
        let id: &dyn Fn(&f64) -> f64 = &|&z| z;
        let sq: &dyn Fn(&f64) -> f64 = &|&z| z * z;
        let (v, idx) = sup_dev_class(&m, &[id, sq]).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(idx, 1);

        let constant: &dyn Fn(&f64) -> f64 = &|_| 1.0;
        let (v, idx) = sup_dev_class(&m, &[constant]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(idx, 0);

        // duplicated winner: lowest index wins
        let (_, idx) = sup_dev_class(&m, &[sq, sq]).unwrap();
        assert_eq!(idx, 0);

        assert!(sup_dev_class::<f64>(&m, &[]).is_err());
    }

    #[test]
    fn donsker_cov_small_case() {
        let pop = four_point_pop();
        let c = donsker_cov(&pop, 2, &|&z| z, &|&z| z).unwrap();
        assert!((c - 5.0 / 6.0).abs() < 1e-12);
        // ties to n * Var(sample mean)
        let sm = crate::moments::survey_mean_moments(&[1.0, 2.0, 3.0, 4.0], 2, None).unwrap();
        assert!((c - 2.0 * sm.variance).abs() < 1e-12);

        assert_eq!(donsker_cov(&pop, 4, &|&z| z, &|&z| z).unwrap(), 0.0);
        assert_eq!(donsker_cov(&pop, 2, &|&z| z, &|_| 3.0).unwrap(), 0.0);
    }

    #[test]
    fn donsker_cov_matches_enumeration() {
        let mut rng = RngState::new(8, 0);
        for n_total in 3..=7usize {
            let values: Vec<f64> = (0..n_total).map(|_| rng.next_f64() * 5.0).collect();
            let pop = ScalarPopulation::from_values(&values).unwrap();
            for n_sample in 1..n_total {
                let analytic = donsker_cov(&pop, n_sample, &|&z| z, &|&z| z * z).unwrap();
                let mut devs_f = Vec::new();
                let mut devs_g = Vec::new();
                for combo in Combinations::new(n_total, n_sample).unwrap() {
                    let mask = SampleMask::from_indices(n_total, &combo).unwrap();
                    let m = PermMeasure::new(&pop, mask).unwrap();
                    let root_n = (n_sample as f64).sqrt();
                    devs_f.push(root_n * m.deviation(&|&z| z));
                    devs_g.push(root_n * m.deviation(&|&z| z * z));
                }
                let k = devs_f.len() as f64;
                let mf = devs_f.iter().sum::<f64>() / k;
                let mg = devs_g.iter().sum::<f64>() / k;
                let cov = devs_f
                    .iter()
                    .zip(&devs_g)
                    .map(|(&a, &b)| (a - mf) * (b - mg))
                    .sum::<f64>()
                    / k;
                assert!(
                    (analytic - cov).abs() < 1e-10,
                    "mismatch at N={n_total}, n={n_sample}"
                );
                // the diagonal is a variance, never negative
                assert!(donsker_cov(&pop, n_sample, &|&z| z, &|&z| z).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn gc_decay_experiment_behaves() {
        let values: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let pop = ScalarPopulation::from_values(&values).unwrap();
        let rows = gc_decay_experiment(&pop, &[16, 64, 100], 2000, RngState::new(5, 0)).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.mean_sup_dev <= 1.0);
        }
        // decay from n=16 to n=64 by a 3 SE margin
        let margin = 3.0 * (rows[0].se + rows[1].se);
        assert!(rows[1].mean_sup_dev + margin < rows[0].mean_sup_dev);
        // n = N row is exactly zero
        assert_eq!(rows[2].mean_sup_dev, 0.0);
    }

    #[test]
    fn gc_decay_is_thread_count_invariant() {
        let values: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let pop = ScalarPopulation::from_values(&values).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                gc_decay_experiment(&pop, &[10, 20], 1500, RngState::new(9, 100)).unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean_sup_dev, y.mean_sup_dev);
            assert_eq!(x.se, y.se);
        }
    }

    #[test]
    fn talagrand_constant_class_passes_trivially() {
        let pop = four_point_pop();
        let constant: &(dyn Fn(&f64) -> f64 + Sync) = &|_| 2.0;
        let check = talagrand_sup_bound_check(
            &pop,
            &[constant],
            2,
            &[0.1, 0.5],
            500,
            RngState::new(1, 0),
            1.0,
        )
        .unwrap();
        assert_eq!(check.sigma_class2, 0.0);
        assert_eq!(check.mean_sup_dev, 0.0);
        assert!(check.pass);
    }

    #[test]
    fn talagrand_indicator_class_passes_and_shrunk_bound_fails() {
        let values: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let pop = ScalarPopulation::from_values(&values).unwrap();
        // indicator class at the deciles
        type Indicator = Box<dyn Fn(&f64) -> f64 + Sync>;
        let funcs: Vec<Indicator> = (1..=9)
            .map(|k| {
                let t = 5.0 * k as f64;
                Box::new(move |&z: &f64| if z <= t { 1.0 } else { 0.0 }) as Indicator
            })
            .collect();
        let class: Vec<&(dyn Fn(&f64) -> f64 + Sync)> = funcs.iter().map(|b| b.as_ref()).collect();
        let thresholds = [0.05, 0.1, 0.2, 0.3];
        let check = talagrand_sup_bound_check(
            &pop,
            &class,
            25,
            &thresholds,
            20_000,
            RngState::new(12, 0),
            1.0,
        )
        .unwrap();
        assert!(check.pass, "stated bound should dominate");

        let shrunk = talagrand_sup_bound_check(
            &pop,
            &class,
            25,
            &thresholds,
            20_000,
            RngState::new(12, 0),
            0.02,
        )
        .unwrap();
        assert!(!shrunk.pass, "bound shrunk by 50x should fail");
    }
}
