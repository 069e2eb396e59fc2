//! Time and ensemble averages, exponential-decay fits, histograms and
//! two-sample comparisons.

use std::ops::Deref;

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::engine::{self, CollisionPolicy, StateVector};
use crate::haar::{Sampler, Seed, ORACLE_STREAM_BASE};
use crate::observables::{self, Observable, ObservableRecord};
use crate::{Error, Result};

/// A finite-valued time series indexed by step `t = 0..T`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(t) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("series entry {t} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Series {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Running mean `(1/(t+1)) Σ_{t'≤t} x[t']`.
pub fn time_average(x: &[f64]) -> Result<Series> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("time average of an empty series".into()));
    }
    let mut acc = 0.0;
    let out = x
        .iter()
        .enumerate()
        .map(|(t, v)| {
            acc += v;
            acc / (t + 1) as f64
        })
        .collect();
    Series::new(out)
}

/// Sample moments of a set of scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Standard error of the mean, from the unbiased sample variance.
    pub std_error: f64,
}

pub fn moments(samples: &[f64]) -> Result<Moments> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("moments of an empty sample".into()));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std = (ss / n as f64).sqrt();
    let std_error = if n > 1 {
        (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Ok(Moments { n, mean, std, std_error })
}

/// Everything needed to reproduce an ensemble of trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub seed: Seed,
    pub trajectories: usize,
    pub steps: usize,
    pub policy: CollisionPolicy,
    pub initial: StateVector,
    pub sampler: Sampler,
    /// Worker threads; results do not depend on this value.
    pub workers: usize,
}

impl EnsembleConfig {
    pub fn new(seed: Seed, trajectories: usize, steps: usize, initial: StateVector) -> Self {
        Self {
            seed,
            trajectories,
            steps,
            policy: CollisionPolicy::Random,
            initial,
            sampler: Sampler::Hurwitz,
            workers: 1,
        }
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Maps `f` over `0..n`, optionally on a dedicated thread pool.
///
/// Output order is the index order, so anything reduced from the result in
/// sequence is independent of the worker count.
fn indexed_map<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..n as u64).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| (0..n as u64).into_par_iter().map(f).collect())
}

/// Records of every trajectory in an ensemble; trajectory `k` uses child
/// stream `k` of the seed.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub config: EnsembleConfig,
    pub runs: Vec<Vec<ObservableRecord>>,
}

pub fn run_ensemble(config: &EnsembleConfig) -> Result<Ensemble> {
    let runs = indexed_map(config.trajectories, config.workers, |k| {
        engine::run_trajectory(
            &config.initial,
            "",
            &config.policy,
            config.steps,
            config.sampler,
            config.seed,
            k,
        )
        .map(|tr| tr.records)
    })?;
    Ok(Ensemble {
        config: config.clone(),
        runs,
    })
}

/// Final-step records of every trajectory, skipping intermediate observables.
pub fn run_final_records(config: &EnsembleConfig) -> Result<Vec<ObservableRecord>> {
    indexed_map(config.trajectories, config.workers, |k| {
        engine::run_to_end(
            &config.initial,
            &config.policy,
            config.steps,
            config.sampler,
            config.seed,
            k,
        )
    })
}

/// Pointwise mean and standard error of one observable across trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub mean: Series,
    pub std_error: Series,
    pub n_trajectories: usize,
    pub observable_name: String,
}

impl Ensemble {
    pub fn summary(&self, obs: Observable) -> Result<EnsembleSummary> {
        self.summary_by(obs.name(), |r| obs.of(r))
    }

    pub fn summary_by<F>(&self, name: &str, select: F) -> Result<EnsembleSummary>
    where
        F: Fn(&ObservableRecord) -> f64,
    {
        let n = self.runs.len();
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "ensemble average needs at least 2 trajectories, got {n}"
            )));
        }
        let len = self.config.steps + 1;
        let mut mean = Vec::with_capacity(len);
        let mut se = Vec::with_capacity(len);
        let mut column = vec![0.0; n];
        for t in 0..len {
            for (slot, run) in column.iter_mut().zip(&self.runs) {
                *slot = select(&run[t]);
            }
            let m = moments(&column)?;
            mean.push(m.mean);
            se.push(m.std_error);
        }
        Ok(EnsembleSummary {
            mean: Series::new(mean)?,
            std_error: Series::new(se)?,
            n_trajectories: n,
            observable_name: name.to_string(),
        })
    }

    /// Values of `obs` across trajectories at step `t`.
    pub fn samples_at(&self, obs: Observable, t: usize) -> Vec<f64> {
        self.runs.iter().map(|run| obs.of(&run[t])).collect()
    }
}

/// Runs the ensemble and averages a single observable.
pub fn ensemble_average(config: &EnsembleConfig, obs: Observable) -> Result<EnsembleSummary> {
    if config.trajectories < 2 {
        return Err(Error::InvalidArgument(format!(
            "ensemble average needs at least 2 trajectories, got {}",
            config.trajectories
        )));
    }
    run_ensemble(config)?.summary(obs)
}

/// Result of fitting `x[t] ≈ asymptote + amplitude · e^{−rate·t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub rate: f64,
    pub amplitude: f64,
    pub asymptote: f64,
    pub window: (usize, usize),
    /// RMS residual of the straight-line fit to `ln|x − asymptote|`.
    pub residual_rms: f64,
    pub points: usize,
}

/// Fits an exponential approach to a fixed `asymptote` by linear least
/// squares on `ln|x[t] − asymptote|` over the inclusive `window`.
pub fn exp_fit(x: &[f64], asymptote: f64, window: (usize, usize)) -> Result<FitResult> {
    let (t0, t1) = window;
    if t0 >= t1 {
        return Err(Error::Fit(format!("window {t0}:{t1} is empty or reversed")));
    }
    if t1 >= x.len() {
        return Err(Error::Fit(format!(
            "window end {t1} beyond last step {}",
            x.len().saturating_sub(1)
        )));
    }
    let mut sign = 0.0;
    let mut pts = Vec::with_capacity(t1 - t0 + 1);
    for (t, &v) in x.iter().enumerate().take(t1 + 1).skip(t0) {
        let d = v - asymptote;
        if d == 0.0 {
            continue;
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            return Err(Error::Fit(format!(
                "x − asymptote changes sign at t = {t}; use a window ending before it"
            )));
        }
        pts.push((t as f64, d.abs().ln()));
    }
    if pts.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} usable points in window {t0}:{t1}, need at least 3",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let rss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    Ok(FitResult {
        rate: -slope,
        amplitude: sign * intercept.exp(),
        asymptote,
        window,
        residual_rms: (rss / n).sqrt(),
        points: pts.len(),
    })
}

/// Longest window `(start, t)` with `t ≤ max_end` over which every point
/// stays at least `k_se` standard errors away from `asymptote` on the same
/// side. Returns `None` when fewer than three points qualify.
pub fn signal_window(
    summary: &EnsembleSummary,
    asymptote: f64,
    start: usize,
    max_end: usize,
    k_se: f64,
) -> Option<(usize, usize)> {
    let last = max_end.min(summary.mean.len().checked_sub(1)?);
    let sign = (summary.mean.get(start)? - asymptote).signum();
    let mut end = None;
    for t in start..=last {
        let d = summary.mean[t] - asymptote;
        if d.signum() != sign || d.abs() < k_se * summary.std_error[t] {
            break;
        }
        end = Some(t);
    }
    end.filter(|&e| e >= start + 2).map(|e| (start, e))
}

/// Mean subsystem purity `(μ+ν)/(μν+1)` of Haar-random bipartite pure states.
pub fn lubkin(mu: u32, nu: u32) -> Result<f64> {
    if mu == 0 || nu == 0 {
        return Err(Error::InvalidArgument("subsystem dimensions must be at least 1".into()));
    }
    let (m, n) = (mu as f64, nu as f64);
    Ok((m + n) / (m * n + 1.0))
}

/// Fixed-width histogram with the sample mean and population std.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub std: f64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bins `samples` into `bins` equal bins over `range`. Samples within 1e-9
/// of the range ends fall into the edge bins; anything further out is an
/// error.
pub fn histogram(samples: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("invalid histogram range {lo}..{hi}")));
    }
    let m = moments(samples)?;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if !(lo - 1e-9..=hi + 1e-9).contains(&x) {
            return Err(Error::InvalidArgument(format!("sample {x} outside {lo}..{hi}")));
        }
        let b = (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let bin_edges = (0..=bins).map(|k| lo + width * k as f64).collect();
    Ok(Histogram {
        bin_edges,
        counts,
        mean: m.mean,
        std: m.std,
    })
}

/// Outcome of a two-sample test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Chi-square test that two binned samples share a distribution.
///
/// Handles unequal totals by rescaling; degrees of freedom are the occupied
/// bins, minus one when totals are equal.
pub fn chi_square_two_sample(a: &Histogram, b: &Histogram) -> Result<TestOutcome> {
    if a.bin_edges != b.bin_edges {
        return Err(Error::InvalidArgument("histograms use different binning".into()));
    }
    let (ra, rb) = (a.total() as f64, b.total() as f64);
    if ra == 0.0 || rb == 0.0 {
        return Err(Error::InvalidArgument("histogram is empty".into()));
    }
    let (ka, kb) = ((rb / ra).sqrt(), (ra / rb).sqrt());
    let mut chi2 = 0.0;
    let mut occupied = 0usize;
    for (&x, &y) in a.counts.iter().zip(&b.counts) {
        let (x, y) = (x as f64, y as f64);
        if x + y == 0.0 {
            continue;
        }
        occupied += 1;
        let d = ka * x - kb * y;
        chi2 += d * d / (x + y);
    }
    let constraint = usize::from(a.total() == b.total());
    let dof = occupied.saturating_sub(constraint);
    if dof == 0 {
        return Ok(TestOutcome { statistic: chi2, dof: 0.0, p_value: 1.0 });
    }
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Numerical(format!("chi-square distribution: {e}")))?;
    Ok(TestOutcome {
        statistic: chi2,
        dof: dof as f64,
        p_value: dist.sf(chi2),
    })
}

/// Asymptotic Kolmogorov survival function `Q_KS(λ)`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("KS test needs non-empty samples".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let p = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
    Ok(TestOutcome { statistic: d, dof: 0.0, p_value: p })
}

/// Observables of Haar-random three-qubit pure states.
#[derive(Debug, Clone)]
pub struct OracleSummary {
    pub seed: Seed,
    pub records: Vec<ObservableRecord>,
}

impl OracleSummary {
    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn samples(&self, obs: Observable) -> Vec<f64> {
        self.records.iter().map(|r| obs.of(r)).collect()
    }

    pub fn stats(&self, obs: Observable) -> Moments {
        moments(&self.samples(obs)).expect("oracle has at least 100 samples")
    }

    /// Per-state mean of the three pairwise tangles.
    pub fn pairwise_tangle(&self) -> Moments {
        let s: Vec<f64> = self
            .records
            .iter()
            .map(|r| (r.tangle01 + r.tangle02 + r.tangle12) / 3.0)
            .collect();
        moments(&s).expect("non-empty")
    }

    /// Per-state mean of the three pairwise concurrences.
    pub fn pairwise_concurrence(&self) -> Moments {
        let s: Vec<f64> = self
            .records
            .iter()
            .map(|r| (r.tangle01.sqrt() + r.tangle02.sqrt() + r.tangle12.sqrt()) / 3.0)
            .collect();
        moments(&s).expect("non-empty")
    }
}

/// Monte Carlo reference values from `n` Haar-random 8-dim pure states.
/// State `k` is drawn from stream `ORACLE_STREAM_BASE + k`, disjoint from
/// trajectory streams.
pub fn random_state_oracle(n: usize, seed: Seed, workers: usize) -> Result<OracleSummary> {
    if n < 100 {
        return Err(Error::InvalidArgument(format!(
            "random-state oracle needs at least 100 samples, got {n}"
        )));
    }
    let records = indexed_map(n, workers, |k| {
        let mut rng = seed.stream(ORACLE_STREAM_BASE + k);
        observables::record(&StateVector::random(&mut rng), 0)
    })?;
    Ok(OracleSummary { seed, records })
}
