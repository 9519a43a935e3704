//! Monte Carlo studies: null and alternative p-value samples, selection-interval coverage.
//!
//! Replicate `r` of a scenario with seed `s` draws its noise from ChaCha8 seeded with `s`
//! on stream `r`, so every replicate is reproducible on its own and results do not depend
//! on the number of threads.

use std::io::Write;

use kacrice::{analyze, Analysis, Error as CoreError, Problem, Response};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::scenario::Scenario;
use crate::stats::{cov_test_baseline, ecdf, ks_uniform};

/// Redraws allowed per replicate when the maximizer is tied.
pub const MAX_TIE_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub replicate: usize,
    pub p_value: f64,
    pub lambda1: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub sigma2: f64,
    /// Exp(1) covariance-test p-value on the same draw.
    pub baseline: f64,
    /// Selection interval and realized mean, for coverage studies.
    pub interval: Option<(f64, f64)>,
    pub mu: Option<f64>,
    /// Draws discarded because of a tie before this record.
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub scenario: String,
    pub records: Vec<Record>,
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    /// Fraction of intervals containing the realized mean.
    pub coverage: Option<f64>,
}

impl StudyResult {
    fn new(scenario: &str, records: Vec<Record>) -> Result<Self> {
        let pv: Vec<f64> = records.iter().map(|r| r.p_value).collect();
        let (ks_statistic, ks_pvalue) = ks_uniform(&pv)?;
        let coverage = if records.iter().all(|r| r.interval.is_some()) {
            let hits = records
                .iter()
                .filter(|r| {
                    let (lo, hi) = r.interval.unwrap();
                    r.mu.is_some_and(|m| lo <= m && m <= hi)
                })
                .count();
            Some(hits as f64 / records.len() as f64)
        } else {
            None
        };
        Ok(StudyResult {
            scenario: scenario.to_string(),
            records,
            ks_statistic,
            ks_pvalue,
            coverage,
        })
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.p_value).collect()
    }

    pub fn baseline_pvalues(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.baseline).collect()
    }

    pub fn tie_redraws(&self) -> usize {
        self.records.iter().map(|r| r.redraws).sum()
    }

    /// Empirical CDF on the grid `0, 1/k, …, 1`.
    pub fn ecdf_table(&self, k: usize) -> Vec<(f64, f64)> {
        let grid: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        ecdf(&self.p_values(), &grid)
    }

    /// Pools several studies into one sample, renumbering replicates.
    pub fn pooled(id: &str, studies: &[StudyResult]) -> Result<Self> {
        let records = studies
            .iter()
            .flat_map(|s| s.records.iter().cloned())
            .enumerate()
            .map(|(i, r)| Record { replicate: i, ..r })
            .collect();
        StudyResult::new(id, records)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "replicate,p_value,lambda1,v_minus,v_plus,sigma2")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.replicate, r.p_value, r.lambda1, r.v_minus, r.v_plus, r.sigma2
            )?;
        }
        Ok(())
    }
}

/// Thread count from `KACRICE_THREADS`, capped by the machine's parallelism.
pub fn thread_count() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("KACRICE_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n.min(available),
        _ => available,
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Null (or alternative) p-values for every replicate of `s`.
pub fn sample_pvalues(s: &Scenario) -> Result<StudyResult> {
    sample_pvalues_with_threads(s, thread_count())
}

pub fn sample_pvalues_with_threads(s: &Scenario, threads: usize) -> Result<StudyResult> {
    run(s, None, threads)
}

/// Selection intervals at level `1 − alpha` and their coverage of the realized mean.
pub fn coverage_experiment(s: &Scenario, alpha: f64) -> Result<StudyResult> {
    coverage_experiment_with_threads(s, alpha, thread_count())
}

pub fn coverage_experiment_with_threads(s: &Scenario, alpha: f64, threads: usize) -> Result<StudyResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HarnessError::InvalidScenario(format!("alpha = {alpha} is not in (0, 1)")));
    }
    run(s, Some(alpha), threads)
}

fn run(s: &Scenario, alpha: Option<f64>, threads: usize) -> Result<StudyResult> {
    if s.replicates == 0 {
        return Err(HarnessError::EmptySample);
    }
    let template = s.template().validate()?;
    let mean = s.mean_response(&template)?;
    let beta0 = s
        .beta0
        .clone()
        .unwrap_or_else(|| DVector::zeros(template.num_coefficients()));
    let records = in_pool(threads, || {
        (0..s.replicates)
            .into_par_iter()
            .map(|r| replicate(s, &template, &mean, &beta0, alpha, r))
            .collect::<Result<Vec<Record>>>()
    })?;
    StudyResult::new(&s.id, records)
}

fn replicate(
    s: &Scenario,
    template: &Problem,
    mean: &Response,
    beta0: &DVector<f64>,
    alpha: Option<f64>,
    r: usize,
) -> Result<Record> {
    let mut rng = replicate_rng(s.seed, r);
    let frontend = |source| HarnessError::Frontend { replicate: r, source };
    for redraws in 0..MAX_TIE_REDRAWS {
        let y = s.draw_response(mean, &mut rng);
        let an: Analysis = match analyze(template.with_response(y)) {
            Ok(an) => an,
            Err(CoreError::TieAtMax { .. }) => continue,
            Err(e) => return Err(frontend(e)),
        };
        let p = an.pvalue().map_err(frontend)?.p_value;
        let (interval, mu) = match alpha {
            Some(a) => (
                Some(an.interval(a).map_err(frontend)?),
                Some(an.mu(beta0).map_err(frontend)?),
            ),
            None => (None, None),
        };
        return Ok(Record {
            replicate: r,
            p_value: p,
            lambda1: an.lambda1(),
            v_minus: an.v_minus,
            v_plus: an.v_plus,
            sigma2: an.sigma2,
            baseline: cov_test_baseline(an.lambda1(), an.v_minus, an.sigma2),
            interval,
            mu,
            redraws,
        });
    }
    Err(HarnessError::TooManyTies {
        replicate: r,
        attempts: MAX_TIE_REDRAWS,
    })
}
