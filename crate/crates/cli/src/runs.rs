//! One function per experiment kind.

use std::fmt::Write as _;

use lowdeg::binomial::{standard_corpus, sweep, sweep_csv, SweepRow};
use lowdeg::charfun::{fit_constants, log_uniform_variances, random_corpus, regime_csv, verify_cf_regimes, CfEngine, RegimeConstants};
use lowdeg::error::Error;
use lowdeg::ldlr::{chi2_sym_boolean, chi2_sym_gaussian, chi2_wigner, AdvantageEstimate, BasisCoeffs, WignerFamily};
use lowdeg::models::{NullSpec, PlantedKind, PlantedSpec, Sampler, Spec, SpikeSigns};
use lowdeg::orthopoly::{verify_krawtchouk_bound, KrawtchoukBasis, WeightLaw};
use lowdeg::rng::derive_seed;
use lowdeg::stats::tv_histogram;
use lowdeg::subgraph::{noisy_count_laws, null_count_law, parse_edge_list, results_csv, GraphPattern, ResultRow};
use lowdeg::symstats::{empirical_cf, fk_samples, frequency_match_diag, FkOptions, RadialGrid};

use crate::config::{ExperimentConfig, Kind};
use crate::record::ResultEntry;

pub struct RunOutput {
    pub results: Vec<ResultEntry>,
    /// CSV payload; contains no timing information.
    pub table: String,
    pub pass: bool,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Budget(String),
    Failed(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(_) => RunError::Budget(e.to_string()),
            Error::InvalidParameter { .. } | Error::DegreeTooLarge { .. } | Error::InvalidPattern(_) => {
                RunError::Config(e.to_string())
            }
            _ => RunError::Failed(e.to_string()),
        }
    }
}

type RunResult = Result<RunOutput, RunError>;

pub fn run(cfg: &ExperimentConfig) -> RunResult {
    lowdeg::par::with_threads(cfg.threads(), || match cfg.kind {
        Kind::OrthoVerify => ortho_verify(cfg),
        Kind::BinomTv => binom_tv(cfg),
        Kind::Ldlr => ldlr(cfg),
        Kind::SymTv => sym_tv(cfg),
        Kind::CfVerify => cf_verify(cfg),
        Kind::SubgraphTv => subgraph_tv(cfg),
        Kind::Sweep => run_sweep(cfg),
    })
}

fn entries_csv(results: &[ResultEntry]) -> String {
    let mut out = String::from("name,n,eps,value,stderr\n");
    for r in results {
        let n = r.n.map(|v| v.to_string()).unwrap_or_default();
        let eps = r.eps.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{n},{eps},{:e},{:e}", r.name, r.value, r.stderr);
    }
    out
}

fn ortho_verify(cfg: &ExperimentConfig) -> RunResult {
    let kmax = cfg.usize("kmax");
    let tol = cfg.float("tol");
    let constant = cfg.float("bound_constant");
    let mut results = Vec::new();
    let mut table = String::from("n,gamma,max_gram_error,max_pointwise_ratio,pass\n");
    let mut pass = true;
    for n in cfg.ints("n") {
        for gamma in cfg.floats("gamma") {
            let basis = KrawtchoukBasis::new(n, gamma)?;
            let nu = basis.weight_law();
            let top = kmax.min(n);
            let d = top + 1;
            let mut gram = vec![0.0; d * d];
            let mut vals = vec![0.0; d];
            for w in 0..=n {
                basis.fill(nu.y_of_w(w), &mut vals);
                for a in 0..d {
                    for b in 0..d {
                        gram[a * d + b] += nu.prob(w) * vals[a] * vals[b];
                    }
                }
            }
            let err = (0..d * d)
                .map(|i| (gram[i] - if i / d == i % d { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            let y_max = (n as f64).powf(1.0 / 6.0) / 2.0;
            let grid: Vec<f64> = (0..=40).map(|i| y_max * ((i as f64 - 20.0) / 20.0)).collect();
            let mut ratio = 0.0f64;
            for k in 1..=n / 2 {
                ratio = ratio.max(verify_krawtchouk_bound(&basis, k, &grid, constant)?.max_ratio);
            }
            let ok = err <= tol && ratio <= constant;
            pass &= ok;
            let _ = writeln!(table, "{n},{gamma},{err:e},{ratio:e},{ok}");
            results.push(ResultEntry::new(format!("gram_error_g{gamma}"), err, 0.0).at(n, None));
            results.push(ResultEntry::new(format!("pointwise_ratio_g{gamma}"), ratio, 0.0).at(n, None));
        }
    }
    Ok(RunOutput { results, table, pass })
}

fn degree_rule(fixed: usize) -> impl Fn(usize, f64) -> usize {
    move |n, eps| {
        if fixed > 0 {
            fixed
        } else {
            ((8.0 / eps) * (n as f64).ln()).ceil() as usize
        }
    }
}

fn sweep_output(rows: Vec<SweepRow>) -> RunOutput {
    let mut results = Vec::new();
    let mut pass = true;
    for r in &rows {
        pass &= r.bound >= r.exact_tv - 1e-10;
        results.push(ResultEntry::new(format!("{}:bound", r.label), r.bound, 0.0).at(r.n, Some(r.eps)));
        results.push(ResultEntry::new(format!("{}:exact_tv", r.label), r.exact_tv, 0.0).at(r.n, Some(r.eps)));
    }
    RunOutput {
        results,
        table: sweep_csv(&rows),
        pass,
    }
}

fn binom_tv(cfg: &ExperimentConfig) -> RunResult {
    let (n, gamma, eta) = (cfg.usize("n"), cfg.float("gamma"), cfg.float("eta"));
    let law = WeightLaw::biased_product(n, gamma, eta)?;
    let rows = sweep(&[(format!("biased(eta={eta})"), law)], &cfg.floats("eps"), degree_rule(cfg.usize("degree")), cfg.seed())?;
    Ok(sweep_output(rows))
}

fn run_sweep(cfg: &ExperimentConfig) -> RunResult {
    let mut rows = Vec::new();
    for n in cfg.ints("n") {
        for gamma in cfg.floats("gamma") {
            rows.extend(sweep(&standard_corpus(n, gamma)?, &cfg.floats("eps"), degree_rule(0), cfg.seed())?);
        }
    }
    Ok(sweep_output(rows))
}

fn signs(cfg: &ExperimentConfig) -> Result<SpikeSigns, RunError> {
    match cfg.text("signs") {
        "rademacher" => Ok(SpikeSigns::Rademacher),
        "positive" => Ok(SpikeSigns::Positive),
        s => Err(RunError::Config(format!("unknown signs `{s}` (rademacher | positive)"))),
    }
}

fn advantage_output(n: usize, est: AdvantageEstimate, coeffs: BasisCoeffs) -> RunOutput {
    let mut results = vec![ResultEntry::new("chi2_d", est.chi2_d, est.stderr).at(n, None)];
    for (k, v) in est.by_degree.iter().enumerate().skip(1) {
        results.push(ResultEntry::new(format!("chi2_le_{k}"), *v, 0.0).at(n, None));
    }
    let mut table = coeffs.csv();
    table.push_str(&entries_csv(&results));
    RunOutput {
        results,
        table,
        pass: est.chi2_d.is_finite(),
    }
}

fn ldlr(cfg: &ExperimentConfig) -> RunResult {
    let n = cfg.usize("n");
    let degree = cfg.usize("degree");
    let samples = cfg.usize("samples");
    let seed = cfg.seed();
    let gaussian = |kind: Option<PlantedKind>| -> RunResult {
        let spec = match kind {
            Some(k) => Spec::Planted(PlantedSpec::new(k, NullSpec::GaussVector { n })?),
            None => Spec::Null(NullSpec::GaussVector { n }),
        };
        let (est, coeffs) = chi2_sym_gaussian(&spec, degree, samples, seed)?;
        Ok(advantage_output(n, est, coeffs))
    };
    let wigner = |kind: Option<PlantedKind>| -> RunResult {
        let spec = match kind {
            Some(k) => Spec::Planted(PlantedSpec::new(k, NullSpec::GaussWigner { n })?),
            None => Spec::Null(NullSpec::GaussWigner { n }),
        };
        let family = match cfg.text("family") {
            "connected" => WignerFamily::connected(n, degree, cfg.float("budget"))?,
            "within-budget" => WignerFamily::within_budget(n, degree, cfg.float("budget"))?,
            s => return Err(RunError::Config(format!("unknown family `{s}` (connected | within-budget)"))),
        };
        let (est, coeffs) = chi2_wigner(&spec, &family, samples, seed)?;
        Ok(advantage_output(n, est, coeffs))
    };
    match cfg.text("model") {
        "biased" | "conditioned" => {
            let gamma = cfg.float("gamma");
            let law = if cfg.text("model") == "biased" {
                WeightLaw::biased_product(n, gamma, cfg.float("eta"))?
            } else {
                WeightLaw::weight_conditioned(n, gamma, &cfg.ints("weights"))?
            };
            let basis = KrawtchoukBasis::new(n, gamma)?;
            let (est, coeffs) = chi2_sym_boolean(&law, &basis, degree)?;
            Ok(advantage_output(n, est, coeffs))
        }
        "null-gauss" => gaussian(None),
        "spiked-mean" => gaussian(Some(PlantedKind::SpikedMean { lambda: cfg.float("lambda") })),
        "quadrature" => gaussian(Some(PlantedKind::QuadratureProduct { m: cfg.usize("m") })),
        "null-wigner" => wigner(None),
        "wigner-spike" => wigner(Some(PlantedKind::WignerSpike {
            lambda: cfg.float("lambda"),
            sparsity: cfg.usize("sparsity"),
            signs: signs(cfg)?,
        })),
        s => Err(RunError::Config(format!(
            "unknown model `{s}` (biased | conditioned | null-gauss | spiked-mean | quadrature | null-wigner | wigner-spike)"
        ))),
    }
}

fn sym_tv(cfg: &ExperimentConfig) -> RunResult {
    let n = cfg.usize("n");
    let k = cfg.usize("k");
    let samples = cfg.usize("samples");
    let seed = cfg.seed();
    let kind = match cfg.text("model") {
        "quadrature" => PlantedKind::QuadratureProduct { m: cfg.usize("m") },
        "spiked-mean" => PlantedKind::SpikedMean { lambda: cfg.float("lambda") },
        s => return Err(RunError::Config(format!("unknown model `{s}` (quadrature | spiked-mean)"))),
    };
    let planted = Spec::Planted(PlantedSpec::new(kind, NullSpec::GaussVector { n })?);
    let null = Spec::Null(NullSpec::GaussVector { n });
    let regular = match cfg.usize("regular") {
        0 => None,
        l => Some(l),
    };
    let zn = fk_samples(&null, FkOptions { k, eps: 0.0, regular: None }, samples, derive_seed(seed, 1))?;
    let opts = FkOptions { k, eps: cfg.float("eps"), regular };
    let zp = fk_samples(&planted, opts, samples, derive_seed(seed, 2))?;
    let tv = tv_histogram(&zn, &zp, k, cfg.usize("bins"))?;
    let grid = RadialGrid::new(k, cfg.usize("directions"), cfg.usize("radii"), cfg.float("radius"), seed)?;
    let points = grid.points();
    let fm = frequency_match_diag(&empirical_cf(&zn, k, &points)?, &empirical_cf(&zp, k, &points)?, cfg.float("radius"))?;
    let eps = Some(cfg.float("eps"));
    let results = vec![
        ResultEntry::new("tv", tv.tv, tv.stderr).at(n, eps),
        ResultEntry::new("tv_bias_floor", tv.bias_floor, 0.0).at(n, eps),
        ResultEntry::new("cf_sup_gap", fm.sup, fm.stderr).at(n, eps),
    ];
    Ok(RunOutput {
        table: entries_csv(&results),
        results,
        pass: true,
    })
}

fn cf_verify(cfg: &ExperimentConfig) -> RunResult {
    let k = cfg.usize("k");
    let count = cfg.usize("count");
    let seed = cfg.seed();
    let engine = CfEngine::new(cfg.usize("nodes"))?;
    let (lo, hi) = (cfg.float("var_lo"), cfg.float("var_hi"));
    if !(lo > 0.0 && hi > lo) {
        return Err(RunError::Config("need 0 < var_lo < var_hi".into()));
    }
    let fit_corpus = random_corpus(k, &log_uniform_variances(count, lo, hi, derive_seed(seed, 1)), derive_seed(seed, 2));
    let fit = fit_constants(&fit_corpus, &engine, RegimeConstants::default(), cfg.float("safety"));
    let fresh = random_corpus(k, &log_uniform_variances(count, lo, hi, derive_seed(seed, 3)), derive_seed(seed, 4));
    let reports: Vec<_> = fresh.iter().map(|p| verify_cf_regimes(p, &engine, &fit.constants)).collect();
    let failures = reports.iter().filter(|r| !r.pass).count();
    let results = vec![
        ResultEntry::new("fitted_c2", fit.constants.c2, 0.0),
        ResultEntry::new("fitted_c_prime", fit.constants.c_prime, 0.0),
        ResultEntry::new("failures", failures as f64, 0.0),
        ResultEntry::new("checked", reports.len() as f64, 0.0),
    ];
    Ok(RunOutput {
        results,
        table: regime_csv(&reports),
        pass: failures == 0,
    })
}

fn subgraph_tv(cfg: &ExperimentConfig) -> RunResult {
    let n = cfg.usize("n");
    let nf = n as f64;
    let lambda = match cfg.float("lambda") {
        l if l > 0.0 => l,
        _ => nf.powf(0.3),
    };
    let sparsity = match cfg.usize("sparsity") {
        0 => nf.powf(0.4).round() as usize,
        s => s,
    };
    let patterns: Vec<GraphPattern> = if cfg.text("pattern_file").is_empty() {
        cfg.text("patterns")
            .split(',')
            .map(|s| GraphPattern::named(s.trim()))
            .collect::<Result<_, _>>()?
    } else {
        let text = std::fs::read_to_string(cfg.text("pattern_file"))
            .map_err(|e| RunError::Config(format!("pattern_file: {e}")))?;
        vec![parse_edge_list(&text)?]
    };
    let eps = cfg.float("eps");
    let samples = cfg.usize("samples");
    let seed = cfg.seed();
    let spec = Spec::Planted(PlantedSpec::new(
        PlantedKind::WignerSpike { lambda, sparsity, signs: signs(cfg)? },
        NullSpec::GaussWigner { n },
    )?);
    let null = null_count_law(n, &patterns, samples, derive_seed(seed, 1))?;
    let planted = noisy_count_laws(&Sampler::new(&spec)?, &patterns, eps, samples, derive_seed(seed, 2), false)?;
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for ((p, law), nv) in patterns.iter().zip(&planted).zip(&null) {
        let tv = tv_histogram(nv, &law.noisy, 1, cfg.usize("bins"))?;
        for (stat, value, stderr) in [("tv", tv.tv, tv.stderr), ("tv_bias_floor", tv.bias_floor, 0.0)] {
            results.push(ResultEntry::new(format!("{p}:{stat}"), value, stderr).at(n, Some(eps)));
            rows.push(ResultRow {
                pattern_hash: p.hash64(),
                n,
                eps,
                statistic: format!("{p}:{stat}"),
                value,
                stderr,
            });
        }
    }
    Ok(RunOutput {
        results,
        table: results_csv(&rows),
        pass: true,
    })
}
