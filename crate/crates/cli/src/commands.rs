//! One function per subcommand. Each writes its CSVs plus a `config.txt`
//! echo into the output directory and returns a short summary for stdout.

use std::fs;
use std::path::{Path, PathBuf};

use qcollide::engine::run_trajectory;
use qcollide::markov::{self, build_m, cluster, predict_purity, spectrum, weights_from_state};
use qcollide::observables::{Observable, ObservableRecord, RECORD_COLUMNS};
use qcollide::stats::{
    chi_square_two_sample, exp_fit, histogram, lubkin, random_state_oracle, run_ensemble,
    run_final_records, signal_window, time_average, EnsembleConfig, FitResult, OracleSummary,
};

use crate::config::RunConfig;
use crate::format::{g12, Csv};
use crate::CliError;

/// Standard errors used by the noise-limited fit window.
const SIGNAL_SE: f64 = 3.0;

fn write(cfg: &RunConfig, name: &str, text: String) -> Result<PathBuf, CliError> {
    let path = cfg.output_dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn prepare(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    write(cfg, "config.txt", cfg.to_echo())?;
    Ok(())
}

fn record_header() -> Vec<&'static str> {
    std::iter::once("t").chain(RECORD_COLUMNS).collect()
}

fn trajectory(cfg: &RunConfig) -> Result<Vec<ObservableRecord>, CliError> {
    let init = cfg.initial_state()?;
    let tr = run_trajectory(&init, &cfg.initial, &cfg.policy, cfg.steps, cfg.sampler, cfg.seed, 0)?;
    Ok(tr.records)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<String, CliError> {
    prepare(cfg)?;
    let records = trajectory(cfg)?;
    let mut csv = Csv::new(&record_header());
    for r in &records {
        let mut row = vec![r.t as f64];
        row.extend(r.values());
        csv.numbers(&row);
    }
    let path = write(cfg, "trajectory.csv", csv.into_string())?;
    let last = records.last().expect("t = 0 is always recorded");
    Ok(format!(
        "wrote {} ({} rows); final purity {}",
        path.display(),
        records.len(),
        g12(last.purity)
    ))
}

pub fn cmd_timeavg(cfg: &RunConfig) -> Result<String, CliError> {
    prepare(cfg)?;
    let records = trajectory(cfg)?;
    let columns: Vec<Vec<f64>> = (0..RECORD_COLUMNS.len())
        .map(|k| {
            let raw: Vec<f64> = records.iter().map(|r| r.values()[k]).collect();
            time_average(&raw).map(|s| s.into_inner())
        })
        .collect::<Result<_, _>>()?;
    let mut csv = Csv::new(&record_header());
    for t in 0..records.len() {
        let mut row = vec![t as f64];
        row.extend(columns.iter().map(|c| c[t]));
        csv.numbers(&row);
    }
    let path = write(cfg, "timeavg.csv", csv.into_string())?;
    Ok(format!(
        "wrote {}; time-averaged purity at t = {}: {}",
        path.display(),
        cfg.steps,
        g12(*columns[0].last().expect("non-empty"))
    ))
}

fn oracle(cfg: &RunConfig) -> Result<OracleSummary, CliError> {
    Ok(random_state_oracle(cfg.oracle_samples, cfg.seed, cfg.workers)?)
}

/// Equilibrium value each observable is fitted against.
fn asymptote(obs: Observable, oracle: &OracleSummary) -> f64 {
    let lub = lubkin(2, 4).expect("valid dimensions");
    match obs {
        Observable::Purity => lub,
        // τ_{i|rest} = 2 − 2 P_i, and every qubit has Lubkin mean purity.
        Observable::Tau0Rest | Observable::Tau1Rest | Observable::Tau2Rest => 2.0 - 2.0 * lub,
        other => oracle.stats(other).mean,
    }
}

fn fit_row(csv: &mut Csv, obs: Observable, rule: &str, asym: f64, fit: Result<FitResult, String>) {
    match fit {
        Ok(f) => csv.row(&[
            obs.name().to_string(),
            rule.to_string(),
            g12(asym),
            g12(f.rate),
            g12(f.amplitude),
            f.window.0.to_string(),
            f.window.1.to_string(),
            g12(f.residual_rms),
            "ok".to_string(),
        ]),
        Err(msg) => csv.row(&[
            obs.name().to_string(),
            rule.to_string(),
            g12(asym),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            msg.replace(',', ";"),
        ]),
    }
}

pub fn cmd_ensemble(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.trajectories < 2 {
        return Err(CliError::Usage("ensemble needs at least 2 trajectories".into()));
    }
    prepare(cfg)?;
    let ecfg = EnsembleConfig {
        seed: cfg.seed,
        trajectories: cfg.trajectories,
        steps: cfg.steps,
        policy: cfg.policy.clone(),
        initial: cfg.initial_state()?,
        sampler: cfg.sampler,
        workers: cfg.workers,
    };
    let ens = run_ensemble(&ecfg)?;
    let summaries: Vec<_> = Observable::ALL
        .iter()
        .map(|&o| ens.summary(o))
        .collect::<Result<_, _>>()?;

    let mut header = vec!["t".to_string()];
    for o in Observable::ALL {
        header.push(format!("{}_mean", o.name()));
        header.push(format!("{}_stderr", o.name()));
    }
    let mut csv = Csv::new(&header);
    for t in 0..=cfg.steps {
        let mut row = vec![t as f64];
        for s in &summaries {
            row.push(s.mean[t]);
            row.push(s.std_error[t]);
        }
        csv.numbers(&row);
    }
    let path = write(cfg, "ensemble.csv", csv.into_string())?;

    let oracle = oracle(cfg)?;
    let mut fits = Csv::new(&[
        "observable",
        "window_rule",
        "asymptote",
        "rate",
        "amplitude",
        "t_start",
        "t_end",
        "residual_rms",
        "status",
    ]);
    let mut purity_rate = None;
    for (&obs, s) in Observable::ALL.iter().zip(&summaries) {
        let asym = asymptote(obs, &oracle);
        let fixed = exp_fit(&s.mean, asym, cfg.fit_window).map_err(|e| e.to_string());
        if obs == Observable::Purity {
            purity_rate = fixed.as_ref().ok().map(|f| f.rate);
        }
        fit_row(&mut fits, obs, "fixed", asym, fixed);
        let adaptive = signal_window(s, asym, cfg.fit_window.0, cfg.fit_window.1, SIGNAL_SE)
            .ok_or_else(|| format!("fewer than 3 points {SIGNAL_SE} std errors from the asymptote"))
            .and_then(|w| exp_fit(&s.mean, asym, w).map_err(|e| e.to_string()));
        fit_row(&mut fits, obs, "signal_3se", asym, adaptive);
    }
    let fit_path = write(cfg, "fit.csv", fits.into_string())?;
    Ok(format!(
        "wrote {} and {}; purity rate over {}:{} = {}",
        path.display(),
        fit_path.display(),
        cfg.fit_window.0,
        cfg.fit_window.1,
        purity_rate.map_or("fit failed (see fit.csv)".to_string(), g12)
    ))
}

pub fn cmd_markov(cfg: &RunConfig) -> Result<String, CliError> {
    prepare(cfg)?;
    let m = build_m();
    let eigs = spectrum(&m)?;
    let mut csv = Csv::new(&["index", "eigenvalue"]);
    for (i, e) in eigs.iter().enumerate() {
        csv.row(&[i.to_string(), g12(*e)]);
    }
    write(cfg, "spectrum.csv", csv.into_string())?;

    let cl = cluster(&eigs, markov::CLUSTER_TOL);
    let second = markov::second_eigenvalue(&eigs)
        .ok_or_else(|| CliError::Numerical("spectrum has no eigenvalue below 1".into()))?;
    let second_mult = cl
        .iter()
        .find(|(v, _)| (v - second).abs() <= markov::CLUSTER_TOL)
        .map_or(0, |c| c.1);
    let rate = markov::rate_from_spectrum(&eigs)?;
    let mut summary = Csv::new(&["quantity", "value"]);
    summary.row(&["largest_eigenvalue".to_string(), g12(cl[0].0)]);
    summary.row(&["largest_multiplicity".to_string(), cl[0].1.to_string()]);
    summary.row(&["second_eigenvalue".to_string(), g12(second)]);
    summary.row(&["second_multiplicity".to_string(), second_mult.to_string()]);
    summary.row(&["gap".to_string(), g12(1.0 - second)]);
    summary.row(&["rate".to_string(), g12(rate)]);
    write(cfg, "markov.csv", summary.into_string())?;

    let pred = predict_purity(&m, &weights_from_state(&cfg.initial_state()?), cfg.steps)?;
    let mut curve = Csv::new(&["t", "purity"]);
    for (t, p) in pred.iter().enumerate() {
        curve.numbers(&[t as f64, *p]);
    }
    write(cfg, "markov_purity.csv", curve.into_string())?;
    Ok(format!(
        "second eigenvalue {} (x{second_mult}), gap {}, rate {}; wrote spectrum.csv, markov.csv, markov_purity.csv to {}",
        g12(second),
        g12(1.0 - second),
        g12(rate),
        cfg.output_dir.display()
    ))
}

pub fn cmd_hist(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.trajectories < 100 {
        return Err(CliError::Usage("hist needs at least 100 trajectories".into()));
    }
    prepare(cfg)?;
    let ecfg = EnsembleConfig {
        seed: cfg.seed,
        trajectories: cfg.trajectories,
        steps: cfg.steps,
        policy: cfg.policy.clone(),
        initial: cfg.initial_state()?,
        sampler: cfg.sampler,
        workers: cfg.workers,
    };
    let finals = run_final_records(&ecfg)?;
    let oracle = oracle(cfg)?;
    let mut summary = Csv::new(&[
        "observable",
        "n",
        "mean",
        "std",
        "oracle_n",
        "oracle_mean",
        "oracle_std",
        "chi2",
        "dof",
        "p_value",
    ]);
    let mut three = None;
    for obs in Observable::ALL {
        let xs: Vec<f64> = finals.iter().map(|r| obs.of(r)).collect();
        let h = histogram(&xs, cfg.bins, (0.0, 1.0))?;
        let ho = histogram(&oracle.samples(obs), cfg.bins, (0.0, 1.0))?;
        let chi = chi_square_two_sample(&h, &ho)?;
        let mut csv = Csv::new(&["bin_lo", "bin_hi", "count", "oracle_count"]);
        for b in 0..cfg.bins {
            csv.row(&[
                g12(h.bin_edges[b]),
                g12(h.bin_edges[b + 1]),
                h.counts[b].to_string(),
                ho.counts[b].to_string(),
            ]);
        }
        write(cfg, &format!("hist_{}.csv", obs.name()), csv.into_string())?;
        summary.row(&[
            obs.name().to_string(),
            xs.len().to_string(),
            g12(h.mean),
            g12(h.std),
            oracle.n().to_string(),
            g12(ho.mean),
            g12(ho.std),
            g12(chi.statistic),
            g12(chi.dof),
            g12(chi.p_value),
        ]);
        if obs == Observable::ThreeTangle {
            three = Some((h.mean, h.std, chi.p_value));
        }
    }
    write(cfg, "hist_summary.csv", summary.into_string())?;
    let (m, s, p) = three.expect("three-tangle is always histogrammed");
    Ok(format!(
        "three-tangle at t = {}: {} ± {} (chi-square vs oracle p = {}); wrote hist_*.csv to {}",
        cfg.steps,
        g12(m),
        g12(s),
        g12(p),
        cfg.output_dir.display()
    ))
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<String, CliError> {
    prepare(cfg)?;
    let o = oracle(cfg)?;
    let mut csv = Csv::new(&["quantity", "n", "mean", "std", "std_error"]);
    let mut push = |name: &str, m: qcollide::stats::Moments| {
        csv.row(&[name.to_string(), m.n.to_string(), g12(m.mean), g12(m.std), g12(m.std_error)]);
    };
    for obs in Observable::ALL {
        push(obs.name(), o.stats(obs));
    }
    let (t, c) = (o.pairwise_tangle(), o.pairwise_concurrence());
    push("pairwise_tangle", t);
    push("pairwise_concurrence", c);
    let path = write(cfg, "oracle.csv", csv.into_string())?;
    let closer = if (c.mean - 0.367).abs() < (t.mean - 0.367).abs() {
        "concurrence"
    } else {
        "tangle"
    };
    Ok(format!(
        "mean pairwise tangle {} ± {}, mean pairwise concurrence {} ± {} ({closer} is the one near 0.367); wrote {}",
        g12(t.mean),
        g12(t.std_error),
        g12(c.mean),
        g12(c.std_error),
        path.display()
    ))
}

/// Path of a file a command writes, for tests and tooling.
pub fn output_path(cfg: &RunConfig, name: &str) -> PathBuf {
    Path::new(&cfg.output_dir).join(name)
}
