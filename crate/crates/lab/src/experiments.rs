//! One function per subcommand. Each turns a validated config into output
//! files, printable lines and pass/fail checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use plancherel_core::bessel::predict_counts;
use plancherel_core::kerov::{
    cov_partial_sum, degrees_of_freedom, sample_limit_vector, sample_partial_sum, GaussianVectorSpec,
};
use plancherel_core::limit_shape::{omega, scaled_profile, RotatedProfile};
use plancherel_core::partition::plancherel_pmf;
use plancherel_core::stats::{empirical_cov, StatSummary};
use plancherel_core::{SampleBatch, SamplerKind, SeededStream};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::analysis::{self, median};
use crate::config::{Experiment, ExperimentConfig};
use crate::output::OutputSink;
use crate::{Check, LabError, Outcome};

type Run = Result<Outcome, LabError>;

pub(crate) fn dispatch(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let mut outcome = match cfg.experiment {
        Experiment::Exact => exact(cfg, out),
        Experiment::Sample => sample(cfg, out),
        Experiment::Shape => shape(cfg, out),
        Experiment::Clt => clt(cfg, out),
        Experiment::Cov => cov(cfg, out),
        Experiment::Kerov => kerov(cfg, out),
        Experiment::Edge => edge(cfg, out),
        Experiment::Kernel => kernel(cfg, out),
        Experiment::Series => series(cfg, out),
        Experiment::Tightness => tightness(cfg, out),
    }?;
    outcome.experiment = Some(cfg.experiment);
    let name = format!("{}_summary.json", cfg.experiment.name());
    out.json(&name, &outcome.summary)?;
    Ok(outcome)
}

fn sampler(cfg: &ExperimentConfig) -> SamplerKind {
    cfg.sampler.unwrap_or(SamplerKind::Rsk)
}

/// The batch for size `n` (or `t` for the poissonized sampler).
fn batch(cfg: &ExperimentConfig, n: Option<u64>) -> Result<SampleBatch, LabError> {
    let kind = sampler(cfg);
    let param = match kind {
        SamplerKind::Poissonized => cfg.require_t()?,
        _ => match n {
            Some(n) => n as f64,
            None => cfg.require_n()? as f64,
        },
    };
    Ok(SampleBatch::generate(kind, param, cfg.replicas, cfg.master_seed)?)
}

fn exact(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let n = cfg.require_n()?;
    let pmf = plancherel_pmf(n)?;
    let total = pmf.sum_of_squares();
    let fact: u128 = (1..=n as u128).product();
    #[derive(Serialize)]
    struct Row {
        lambda: String,
        dimension: String,
        probability: String,
    }
    let rows: Vec<Row> = pmf
        .entries
        .iter()
        .map(|(l, p)| Row {
            lambda: l.to_string(),
            dimension: l.dimension().exact.map_or_else(String::new, |d| d.to_string()),
            probability: p.to_string(),
        })
        .collect();
    out.csv("exact.csv", &["lambda", "dimension", "probability"], &rows)?;
    Ok(Outcome {
        lines: vec![
            format!("partitions of {n}: {}", pmf.entries.len()),
            format!("sum of d^2 = {total}"),
            format!("{n}! = {fact}"),
        ],
        checks: vec![Check::new("burnside", total == fact, format!("{total} vs {fact}"))],
        summary: json!({"n": n, "partitions": pmf.entries.len(), "sum_d2": total.to_string(), "factorial": fact.to_string()}),
        ..Outcome::default()
    })
}

fn sample(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let b = batch(cfg, None)?;
    #[derive(Serialize)]
    struct Row {
        replica_index: u64,
        n: u64,
        lambda: String,
        lambda1: u32,
        num_parts: usize,
    }
    let rows: Vec<Row> = b
        .draws
        .iter()
        .map(|d| Row {
            replica_index: d.replica_index,
            n: d.partition.weight(),
            lambda: d.partition.to_string(),
            lambda1: d.partition.largest(),
            num_parts: d.partition.len(),
        })
        .collect();
    out.csv(
        "sample.csv",
        &["replica_index", "n", "lambda", "lambda1", "num_parts"],
        &rows,
    )?;
    let l1: Vec<f64> = rows.iter().map(|r| r.lambda1 as f64).collect();
    let mean_l1 = l1.iter().sum::<f64>() / l1.len() as f64;
    Ok(Outcome {
        lines: vec![format!("{} draws, mean lambda1 {mean_l1:.4}", rows.len())],
        summary: json!({"param": b.param, "sampler": b.kind, "replicas": rows.len(), "mean_lambda1": mean_l1}),
        ..Outcome::default()
    })
}

fn shape(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let sizes = cfg.sizes()?;
    let mut medians = Vec::new();
    let mut rows = Vec::new();
    let mut last = None;
    for &n in &sizes {
        let b = SampleBatch::generate(SamplerKind::Rsk, n as f64, cfg.replicas, cfg.master_seed)?;
        let d = analysis::sup_distances(&b)?;
        for (i, v) in d.iter().enumerate() {
            rows.push((n, i as u64, *v));
        }
        medians.push(median(&d));
        last = Some(b);
    }
    out.csv("shape_sup.csv", &["n", "replica_index", "sup_distance"], &rows)?;
    // first draw at the largest size against ω
    let b = last.expect("at least one size");
    let n = b.param;
    let lambda = &b.draws[0].partition;
    let grid: Vec<f64> = (0..=400).map(|i| 2.5 * i as f64 / 400.0).collect();
    let mut cmp = Vec::new();
    for &x in &grid {
        let lb = scaled_profile(lambda, n.sqrt(), x)?;
        let w = omega(x.min(2.0))?;
        cmp.push((x, lb, w, lb - w));
    }
    out.csv("shape_compare.csv", &["x", "lambda_bar", "omega", "diff"], &cmp)?;
    let prof = RotatedProfile::new(lambda, n.sqrt())?;
    out.csv("shape_profile.csv", &["u", "v"], &prof.breakpoints())?;
    let dat: Vec<Vec<f64>> = cmp.iter().map(|&(x, l, w, _)| vec![x, l, w]).collect();
    out.dat("shape.dat", &["x", "lambda_bar", "omega"], &dat)?;
    let lines = sizes
        .iter()
        .zip(&medians)
        .map(|(n, m)| format!("n = {n}: median sup distance {m:.5}"))
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome {
        lines,
        checks: vec![Check::new(
            "median decreases with n",
            decreasing,
            format!("{medians:?}"),
        )],
        summary: json!({"n": sizes, "median_sup_distance": medians}),
        ..Outcome::default()
    })
}

fn clt(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let b = batch(cfg, None)?;
    if let Some(u) = cfg.u {
        let ys = analysis::rotated_values(&b, u)?;
        let s = StatSummary::from_samples(&ys)?;
        let rows: Vec<(u64, f64, f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as u64, b.param, u, y)).collect();
        out.csv("clt_rotated.csv", &["replica_index", "n", "u", "y"], &rows)?;
        return Ok(Outcome {
            lines: vec![format!("Y~({u}): mean {:.4}, variance {:.4}", s.mean, s.variance)],
            checks: moment_checks(&s),
            summary: serde_json::to_value(&s)?,
            ..Outcome::default()
        });
    }
    let x = cfg
        .x
        .ok_or_else(|| LabError::Validation("clt needs --x or --u".into()))?;
    let r = analysis::clt_vertical(&b, x)?;
    let rows: Vec<(u64, f64, f64, f64, f64)> = r
        .deltas
        .iter()
        .zip(&r.ys)
        .enumerate()
        .map(|(i, (&d, &y))| (i as u64, r.n, x, d, y))
        .collect();
    out.csv("clt.csv", &["replica_index", "n", "x", "delta", "y"], &rows)?;
    let hist: Vec<Vec<f64>> = r.cell_counts.iter().map(|&(c, k)| vec![c as f64, k as f64]).collect();
    out.dat("clt_hist.dat", &["cell", "count"], &hist)?;
    let s = &r.summary;
    let p = s.chi2_p.unwrap_or(0.0);
    let mut checks = moment_checks(s);
    checks.push(Check::new("lattice normality", p > 1e-3, format!("p = {p:.3e}")));
    Ok(Outcome {
        lines: vec![
            format!("Y({x}) over {} draws at n = {}", s.count, r.n),
            format!(
                "mean {:.4}, variance {:.4}, skewness {:.4}, excess kurtosis {:.4}",
                s.mean, s.variance, s.skewness, s.excess_kurtosis
            ),
            format!("lattice chi2 p = {p:.3e}"),
        ],
        checks,
        summary: json!({
            "mean": s.mean,
            "variance": s.variance,
            "skewness": s.skewness,
            "excess_kurtosis": s.excess_kurtosis,
            "lattice_chi2_p": s.chi2_p,
            "cell_counts": r.cell_counts,
        }),
        ..Outcome::default()
    })
}

fn moment_checks(s: &StatSummary) -> Vec<Check> {
    vec![
        Check::new("mean near 0", s.mean.abs() <= 0.1, format!("{:.4}", s.mean)),
        Check::new(
            "variance near 1",
            (s.variance - 1.0).abs() <= 0.3,
            format!("{:.4}", s.variance),
        ),
    ]
}

/// Default constant in `|x₀ − x_i| = c·n^{−s/2}`.
pub const DEFAULT_SEPARATION: f64 = 0.5;

fn cov(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let x0 = cfg
        .x0
        .or(cfg.x)
        .ok_or_else(|| LabError::Validation("cov needs --x0".into()))?;
    if cfg.s.is_empty() {
        return Err(LabError::Validation("cov needs --s".into()));
    }
    let c = cfg.separation.unwrap_or(DEFAULT_SEPARATION);
    let n = match sampler(cfg) {
        SamplerKind::Poissonized => cfg.require_t()?,
        _ => cfg.require_n()? as f64,
    };
    for x in analysis::separated_points(n, x0, &cfg.s, c) {
        if !(x > 0.0 && x < 2.0) {
            return Err(LabError::Validation(format!("separated point {x} leaves (0, 2)")));
        }
    }
    let b = batch(cfg, None)?;
    let points = analysis::separation_covariances(&b, x0, &cfg.s, c)?;
    let rows: Vec<(f64, f64, f64, f64, f64)> = points
        .iter()
        .map(|p| (p.s, p.x, p.cov.estimate, p.cov.std_error, p.target))
        .collect();
    out.csv("cov.csv", &["s", "x", "cov", "std_error", "limit"], &rows)?;
    let est: Vec<f64> = points.iter().map(|p| p.cov.estimate).collect();
    let increasing = est.windows(2).all(|w| w[1] > w[0]);
    Ok(Outcome {
        lines: points
            .iter()
            .map(|p| {
                format!(
                    "s = {}: x = {:.6}, cov = {:.4} ± {:.4}",
                    p.s, p.x, p.cov.estimate, p.cov.std_error
                )
            })
            .collect(),
        checks: vec![Check::new("covariance increasing in s", increasing, format!("{est:?}"))],
        summary: json!({"n": n, "x0": x0, "separation": c, "points": points}),
        ..Outcome::default()
    })
}

fn kerov(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let k_max = cfg.k_max.unwrap_or(3);
    if k_max < 2 {
        return Err(LabError::Validation("kerov needs --k-max >= 2".into()));
    }
    let b = batch(cfg, None)?;
    let r = analysis::kerov_functionals(&b, k_max)?;
    let mut rows = Vec::new();
    for (i, vals) in r.values.iter().enumerate() {
        for (k, v) in r.k_values.iter().zip(vals) {
            rows.push((i as u64, *k, *v));
        }
    }
    out.csv("kerov.csv", &["replica_index", "k", "value"], &rows)?;
    let mut checks = Vec::new();
    let mut lines = Vec::new();
    for ((k, v), t) in r.k_values.iter().zip(&r.variances).zip(&r.targets).skip(1) {
        lines.push(format!("k = {k}: variance {v:.4} (limit {t:.4})"));
        checks.push(Check::new(
            format!("variance k={k}"),
            (v / t - 1.0).abs() <= 0.2,
            format!("{v:.4} vs {t:.4}"),
        ));
    }
    for &(a, c, rho) in &r.correlations {
        lines.push(format!("corr(k={a}, k={c}) = {rho:.4}"));
        checks.push(Check::new(
            format!("corr {a},{c}"),
            rho.abs() <= 0.1,
            format!("{rho:.4}"),
        ));
    }
    Ok(Outcome {
        lines,
        checks,
        summary: json!({"n": b.param, "k": r.k_values, "variance": r.variances, "limit": r.targets, "correlations": r.correlations}),
        ..Outcome::default()
    })
}

fn edge(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let sizes = cfg.sizes()?;
    let z = cfg.z.unwrap_or(0.0);
    let first = SampleBatch::generate(SamplerKind::Rsk, sizes[0] as f64, cfg.replicas, cfg.master_seed)?;
    let r = analysis::edge_identity(&first, z)?;
    let rows: Vec<(u64, f64, f64)> = r
        .scaled_first_rows
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as u64, r.n, v))
        .collect();
    out.csv("edge.csv", &["replica_index", "n", "scaled_lambda1"], &rows)?;
    let mut lines = vec![
        format!("identity held on {}/{} draws", r.identity_holds, r.draws),
        format!("lambda1 vs lambda1': chi2 p = {:.3e}", r.row_column_test.p_value),
    ];
    let mut checks = vec![
        Check::new(
            "edge identity",
            r.identity_holds == r.draws,
            format!("{}/{}", r.identity_holds, r.draws),
        ),
        Check::new(
            "row/column symmetry",
            r.row_column_test.p_value > 1e-3,
            format!("p = {:.3e}", r.row_column_test.p_value),
        ),
    ];
    let mut stability = Vec::new();
    for &n in &sizes[1..] {
        let other = SampleBatch::generate(SamplerKind::Rsk, n as f64, cfg.replicas, cfg.master_seed)?;
        let (d, p) = analysis::edge_stability(&first, &other)?;
        lines.push(format!("KS between n = {} and n = {n}: {d:.4} (p = {p:.3e})", sizes[0]));
        checks.push(Check::new(
            format!("cross-n stability {n}"),
            d <= 0.05,
            format!("{d:.4}"),
        ));
        stability.push(json!({"n": n, "ks": d, "p": p}));
    }
    Ok(Outcome {
        lines,
        checks,
        summary: json!({
            "n": r.n, "z": z, "identity_holds": r.identity_holds, "draws": r.draws,
            "row_column_p": r.row_column_test.p_value, "stability": stability,
        }),
        ..Outcome::default()
    })
}

fn kernel(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let t = cfg.require_t()?;
    let x = cfg.x.unwrap_or(1.0);
    let z = cfg.z.unwrap_or(0.0);
    let pred = predict_counts(t, x, z)?;
    let b = SampleBatch::generate(SamplerKind::Poissonized, t, cfg.replicas, cfg.master_seed)?;
    let counts = analysis::interval_counts(&b, x, z)?;
    let rows: Vec<(u64, f64, u64)> = counts.iter().enumerate().map(|(i, &c)| (i as u64, t, c)).collect();
    out.csv("kernel.csv", &["replica_index", "t", "count"], &rows)?;
    let vals: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let s = StatSummary::from_samples(&vals)?;
    let (mse, vse) = (s.mean_se(), s.variance_se());
    Ok(Outcome {
        lines: vec![
            format!(
                "kernel: mean {:.6}, variance {:.6} (cutoff {})",
                pred.mean, pred.variance, pred.cutoff
            ),
            format!(
                "Monte Carlo: mean {:.6} ± {mse:.6}, variance {:.6} ± {vse:.6}",
                s.mean, s.variance
            ),
            format!(
                "leading order: mean {:.6}, variance {:.6}",
                pred.lemma1_mean, pred.lemma1_variance
            ),
        ],
        checks: vec![
            Check::new(
                "mean within 3 SE",
                (s.mean - pred.mean).abs() <= 3.0 * mse,
                format!("{:.6} vs {:.6}", s.mean, pred.mean),
            ),
            Check::new(
                "variance within 3 SE",
                (s.variance - pred.variance).abs() <= 3.0 * vse,
                format!("{:.6} vs {:.6}", s.variance, pred.variance),
            ),
        ],
        summary: json!({"prediction": pred, "mc_mean": s.mean, "mc_mean_se": mse, "mc_variance": s.variance, "mc_variance_se": vse}),
        ..Outcome::default()
    })
}

fn series(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let m = match (cfg.m, cfg.n) {
        (Some(m), _) => m,
        (None, Some(n)) => degrees_of_freedom(n)? as usize,
        (None, None) => return Err(LabError::Validation("series needs --m or --n".into())),
    };
    let thetas = if cfg.theta.is_empty() {
        vec![PI / 3.0]
    } else {
        cfg.theta.clone()
    };
    let mut s_values = if cfg.s.is_empty() {
        vec![0.25, 0.75]
    } else {
        cfg.s.clone()
    };
    s_values.sort_by(f64::total_cmp);
    let spec = GaussianVectorSpec::new(s_values.clone())?;
    let paths: Vec<Vec<f64>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| sample_partial_sum(m, &thetas, &mut SeededStream::new(cfg.master_seed, i).rng()))
        .collect::<plancherel_core::Result<_>>()?;
    // the limit vector uses its own seed family so both parts stay independent
    let zseed = SeededStream::derived(cfg.master_seed, 1);
    let zs: Vec<Vec<f64>> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| sample_limit_vector(&spec, &mut SeededStream::new(zseed, i).rng()))
        .collect::<plancherel_core::Result<_>>()?;
    let mut rows = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        for (th, v) in thetas.iter().zip(p) {
            rows.push((i as u64, *th, *v));
        }
    }
    out.csv("series.csv", &["replica_index", "theta", "s_m_value"], &rows)?;
    let mut zrows = Vec::new();
    for (i, p) in zs.iter().enumerate() {
        for (s, v) in s_values.iter().zip(p) {
            zrows.push((i as u64, *s, *v));
        }
    }
    out.csv("series_limit.csv", &["replica_index", "s", "z_value"], &zrows)?;

    let mut checks = Vec::new();
    let mut lines = Vec::new();
    let mut entries = BTreeMap::new();
    let mut compare = |label: String, pairs: Vec<(f64, f64)>, target: f64| -> Result<(), LabError> {
        let c = empirical_cov(&pairs)?;
        let ok = (c.estimate - target).abs() <= 3.0 * c.std_error;
        lines.push(format!(
            "{label}: {:.5} ± {:.5} (closed form {target:.5})",
            c.estimate, c.std_error
        ));
        checks.push(Check::new(
            label.clone(),
            ok,
            format!("{:.5} vs {target:.5}", c.estimate),
        ));
        entries.insert(
            label,
            json!({"estimate": c.estimate, "std_error": c.std_error, "target": target}),
        );
        Ok(())
    };
    for i in 0..thetas.len() {
        for j in i..thetas.len() {
            let pairs = paths.iter().map(|p| (p[i], p[j])).collect();
            compare(
                format!("cov S(theta={:.4}, theta={:.4})", thetas[i], thetas[j]),
                pairs,
                cov_partial_sum(thetas[i], thetas[j], m),
            )?;
        }
    }
    for i in 0..s_values.len() {
        for j in i..s_values.len() {
            let pairs = zs.iter().map(|p| (p[i], p[j])).collect();
            let target = spec.covariance()[(i, j)];
            compare(format!("cov Z(s={}, s={})", s_values[i], s_values[j]), pairs, target)?;
        }
    }
    Ok(Outcome {
        lines,
        checks,
        summary: json!({"m": m, "theta": thetas, "s": s_values, "covariances": entries}),
        ..Outcome::default()
    })
}

fn tightness(cfg: &ExperimentConfig, out: &mut OutputSink) -> Run {
    let sizes = cfg.sizes()?;
    let u = cfg.u.unwrap_or(-0.25);
    let gap = cfg.gap.unwrap_or(0.5);
    let eps = cfg.epsilon.unwrap_or(0.5);
    if !(u + gap < 2.0) {
        return Err(LabError::Validation(format!("u + gap = {} leaves (-2, 2)", u + gap)));
    }
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut checks = Vec::new();
    let mut probs = Vec::new();
    for &n in &sizes {
        let b = SampleBatch::generate(SamplerKind::Rsk, n as f64, cfg.replicas, cfg.master_seed)?;
        let r = analysis::tightness_probe(&b, u, gap, eps)?;
        for (i, d) in r.differences.iter().enumerate() {
            rows.push((n, i as u64, *d));
        }
        lines.push(format!("n = {n}: P(|Y~(u) - Y~(u')| >= {eps}) = {:.4}", r.probability));
        checks.push(Check::new(
            format!("probability at n={n}"),
            r.probability >= 0.2,
            format!("{:.4}", r.probability),
        ));
        probs.push(r.probability);
    }
    out.csv("tightness.csv", &["n", "replica_index", "difference"], &rows)?;
    Ok(Outcome {
        lines,
        checks,
        summary: json!({"n": sizes, "u": u, "u_prime": u + gap, "epsilon": eps, "probability": probs}),
        ..Outcome::default()
    })
}
