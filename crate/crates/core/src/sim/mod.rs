//! Monte Carlo estimates of discounted dividends `E∫ e^{-qt} dL_t` under
//! parametric payout strategies.
//!
//! Each path owns a ChaCha8 stream selected by `(seed, path index)`, so a
//! path produces the same draws on any thread and under any strategy.
//! Per-path results are reduced in index order by pairwise summation.

mod claims;
mod paths;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::levy::{LevyModel, Variation};

use claims::ClaimSampler;
pub use paths::PathOutcome;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// Pay everything above `a`.
    Barrier {
        a: f64,
    },
    /// Pay at `rate` while the reserve is above `b`.
    Threshold {
        b: f64,
        rate: f64,
    },
    None,
}

impl StrategySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StrategySpec::Barrier { a } if !(a >= 0.0 && a.is_finite()) => {
                Err(Error::Domain(format!("barrier level must be finite and ≥ 0, got {a}")))
            }
            StrategySpec::Threshold { b, rate } if !(b >= 0.0 && b.is_finite() && rate >= 0.0 && rate.is_finite()) => {
                Err(Error::Domain(format!(
                    "threshold needs b ≥ 0 and rate ≥ 0, got b = {b}, rate = {rate}"
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Barrier { a } => write!(f, "barrier:a={a}"),
            StrategySpec::Threshold { b, rate } => write!(f, "threshold:b={b},rate={rate}"),
            StrategySpec::None => f.write_str("none"),
        }
    }
}

/// Parses `barrier:a=<v>`, `threshold:b=<v>,rate=<v>` or `none`.
impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut fields = std::collections::BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("strategy field `{part}` is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("strategy field `{k}` has a non-numeric value `{v}`")))?;
            if fields.insert(k.trim().to_string(), v).is_some() {
                return Err(Error::Parse(format!("strategy field `{k}` given twice")));
            }
        }
        let mut take = |key: &str| {
            fields
                .remove(key)
                .ok_or_else(|| Error::Parse(format!("strategy `{kind}` needs `{key}=`")))
        };
        let spec = match kind.trim() {
            "barrier" => StrategySpec::Barrier { a: take("a")? },
            "threshold" => StrategySpec::Threshold {
                b: take("b")?,
                rate: take("rate")?,
            },
            "none" => StrategySpec::None,
            other => return Err(Error::Parse(format!("unknown strategy `{other}`"))),
        };
        if let Some(k) = fields.keys().next() {
            return Err(Error::Parse(format!("strategy `{kind}` has unknown field `{k}`")));
        }
        spec.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SimMode {
    /// Event-driven and exact; finite activity with `σ = 0` only.
    Exact,
    /// Time-stepped with small jumps replaced by a Gaussian; approximate.
    Euler { step: f64, cutoff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub n_paths: usize,
    pub seed: u64,
    /// Defaults to `40/q`.
    pub horizon: Option<f64>,
    pub mode: SimMode,
    pub exec: Exec,
    /// Paired standard errors by which a strategy must beat the reference.
    pub beat_sigmas: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            n_paths: 10_000,
            seed: 0,
            horizon: None,
            mode: SimMode::Exact,
            exec: Exec::default(),
            beat_sigmas: 3.0,
        }
    }
}

impl SimOptions {
    pub fn horizon_for(&self, q: f64) -> f64 {
        self.horizon.unwrap_or(40.0 / q)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimEstimate {
    pub strategy: String,
    pub mean: f64,
    /// `sample_std / √n_paths`.
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub horizon: f64,
    /// `e^{-q·horizon}` times a bound on the value at the horizon.
    pub truncation_bias_bound: f64,
    /// Fraction of paths ruined before the horizon.
    pub ruin_fraction: f64,
    /// Set when the time-stepped scheme was used.
    pub approximate: bool,
}

/// Mean and standard error of a sample, reduced in fixed order.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Random stream for one path.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Prepared dynamics of the reserve between dividend decisions.
#[derive(Debug, Clone)]
pub(crate) struct Dynamics {
    /// Drift of the reserve (premium rate in the exact scheme).
    drift: f64,
    /// Standard deviation per unit time of the Gaussian part.
    vol: f64,
    claims: ClaimSampler,
    approximate: bool,
    step: f64,
}

impl Dynamics {
    fn new(model: &LevyModel, mode: SimMode) -> Result<Self> {
        match mode {
            SimMode::Exact => {
                let finite = model.jumps().total_mass().is_finite();
                match (model.variation(), model.sigma() == 0.0 && finite, model.bv_drift()) {
                    (Variation::Bounded, true, Some(c)) => Ok(Dynamics {
                        drift: c,
                        vol: 0.0,
                        claims: ClaimSampler::new(model.jumps(), 0.0)?,
                        approximate: false,
                        step: f64::INFINITY,
                    }),
                    _ => Err(Error::Unsupported(
                        "exact simulation needs finite jump activity and σ = 0; use the approximate Euler mode".into(),
                    )),
                }
            }
            SimMode::Euler { step, cutoff } => {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(Error::Domain(format!("Euler step must be positive, got {step}")));
                }
                let jumps = model.jumps();
                let finite = jumps.total_mass().is_finite();
                let cut = if finite { 0.0 } else { cutoff };
                if !finite && !(cutoff > 0.0 && cutoff < 1.0) {
                    return Err(Error::Domain(format!(
                        "small-jump cutoff must lie in (0, 1), got {cutoff}"
                    )));
                }
                let quad = crate::numeric::quad::Quad::default();
                let density = |y: f64| jumps.density(y).unwrap_or(0.0);
                let (small_var, mid_mean) = match jumps {
                    crate::levy::JumpMeasure::Atoms(atoms) => (
                        0.0,
                        atoms
                            .iter()
                            .filter(|a| a.location < 1.0)
                            .map(|a| a.mass * a.location)
                            .sum(),
                    ),
                    crate::levy::JumpMeasure::None => (0.0, 0.0),
                    _ => {
                        let var = if cut > 0.0 {
                            quad.integrate_sqrt_left(|y| y * y * density(y), 0.0, cut)?.value
                        } else {
                            0.0
                        };
                        let mean = if cut < 1.0 {
                            let mut pts = vec![cut];
                            pts.extend(jumps.breakpoints().into_iter().filter(|&b| b > cut && b < 1.0));
                            pts.push(1.0);
                            if cut == 0.0 {
                                quad.integrate_sqrt_left(|y| y * density(y), 0.0, pts[1])?.value
                                    + quad.integrate_breaks(|y| y * density(y), &pts[1..])?.value
                            } else {
                                quad.integrate_breaks(|y| y * density(y), &pts)?.value
                            }
                        } else {
                            0.0
                        };
                        (var, mean)
                    }
                };
                Ok(Dynamics {
                    drift: model.gamma() + mid_mean,
                    vol: (model.sigma() * model.sigma() + small_var).sqrt(),
                    claims: ClaimSampler::new(jumps, cut)?,
                    approximate: true,
                    step,
                })
            }
        }
    }
}

fn check_inputs(q: f64, x0: f64, strategy: &StrategySpec, opts: &SimOptions) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Domain(format!("simulation needs q > 0, got {q}")));
    }
    if !(x0 >= 0.0 && x0.is_finite()) {
        return Err(Error::Domain(format!(
            "initial reserve must be finite and ≥ 0, got {x0}"
        )));
    }
    if opts.n_paths < 2 {
        return Err(Error::Domain("simulation needs at least two paths".into()));
    }
    strategy.validate()?;
    let horizon = opts.horizon_for(q);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    Ok(horizon)
}

/// Outcome of every path, in path order.
pub fn simulate_paths(
    model: &LevyModel,
    strategy: &StrategySpec,
    q: f64,
    x0: f64,
    opts: &SimOptions,
) -> Result<Vec<PathOutcome>> {
    let horizon = check_inputs(q, x0, strategy, opts)?;
    let dynamics = Dynamics::new(model, opts.mode)?;
    Ok(run_paths(&dynamics, strategy, q, x0, horizon, opts))
}

fn run_paths(
    dynamics: &Dynamics,
    strategy: &StrategySpec,
    q: f64,
    x0: f64,
    horizon: f64,
    opts: &SimOptions,
) -> Vec<PathOutcome> {
    opts.exec.map(opts.n_paths, |i| {
        let mut rng = path_rng(opts.seed, i as u64);
        paths::run(dynamics, strategy, q, x0, horizon, &mut rng)
    })
}

fn truncation_bound(dynamics: &Dynamics, strategy: &StrategySpec, q: f64, x0: f64, horizon: f64) -> f64 {
    let c = dynamics.drift.max(0.0);
    let level = match *strategy {
        StrategySpec::Barrier { a } => a,
        StrategySpec::Threshold { b, rate } => x0.max(b) + (c - rate).max(0.0) * horizon,
        StrategySpec::None => return 0.0,
    };
    let spread = if dynamics.vol > 0.0 {
        3.0 * dynamics.vol / (2.0 * q).sqrt()
    } else {
        0.0
    };
    (-q * horizon).exp() * (level + c / q + spread)
}

fn estimate(
    dynamics: &Dynamics,
    strategy: &StrategySpec,
    q: f64,
    x0: f64,
    horizon: f64,
    opts: &SimOptions,
    outcomes: &[PathOutcome],
) -> SimEstimate {
    let payouts: Vec<f64> = outcomes.iter().map(|o| o.payout).collect();
    let (mean, std_error) = mean_and_se(&payouts);
    let ruined = outcomes.iter().filter(|o| o.ruin_time.is_some()).count();
    SimEstimate {
        strategy: strategy.to_string(),
        mean,
        std_error,
        n_paths: outcomes.len(),
        seed: opts.seed,
        horizon,
        truncation_bias_bound: truncation_bound(dynamics, strategy, q, x0, horizon),
        ruin_fraction: ruined as f64 / outcomes.len() as f64,
        approximate: dynamics.approximate,
    }
}

/// `E_x0 ∫_[0, σ ∧ T] e^{-qt} dL_t` for the given strategy.
pub fn simulate_value(
    model: &LevyModel,
    strategy: &StrategySpec,
    q: f64,
    x0: f64,
    opts: &SimOptions,
) -> Result<SimEstimate> {
    simulate_with_paths(model, strategy, q, x0, opts).map(|(e, _)| e)
}

/// The estimate together with the outcomes it was reduced from.
pub fn simulate_with_paths(
    model: &LevyModel,
    strategy: &StrategySpec,
    q: f64,
    x0: f64,
    opts: &SimOptions,
) -> Result<(SimEstimate, Vec<PathOutcome>)> {
    let horizon = check_inputs(q, x0, strategy, opts)?;
    let dynamics = Dynamics::new(model, opts.mode)?;
    let outcomes = run_paths(&dynamics, strategy, q, x0, horizon, opts);
    Ok((estimate(&dynamics, strategy, q, x0, horizon, opts, &outcomes), outcomes))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ComparisonRow {
    pub estimate: SimEstimate,
    /// Paired mean of `payout - reference payout`.
    pub diff_mean: f64,
    pub diff_se: f64,
    /// `diff_mean > beat_sigmas·diff_se`.
    pub beats_reference: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Comparison {
    pub reference: SimEstimate,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn any_beats_reference(&self) -> bool {
        self.rows.iter().any(|r| r.beats_reference)
    }

    /// Rows ranked by estimated value, highest first; ties keep input order.
    pub fn ranking(&self) -> Vec<&SimEstimate> {
        let mut all: Vec<&SimEstimate> = std::iter::once(&self.reference)
            .chain(self.rows.iter().map(|r| &r.estimate))
            .collect();
        all.sort_by(|a, b| b.mean.total_cmp(&a.mean));
        all
    }
}

/// Compares every strategy with the first one on common random numbers.
pub fn compare_strategies(
    model: &LevyModel,
    q: f64,
    x0: f64,
    strategies: &[StrategySpec],
    opts: &SimOptions,
) -> Result<Comparison> {
    let (first, rest) = strategies
        .split_first()
        .ok_or_else(|| Error::Domain("comparison needs at least one strategy".into()))?;
    let horizon = check_inputs(q, x0, first, opts)?;
    for s in rest {
        s.validate()?;
    }
    let dynamics = Dynamics::new(model, opts.mode)?;
    let base = run_paths(&dynamics, first, q, x0, horizon, opts);
    let reference = estimate(&dynamics, first, q, x0, horizon, opts, &base);
    let rows = rest
        .iter()
        .map(|s| {
            let out = run_paths(&dynamics, s, q, x0, horizon, opts);
            let diffs: Vec<f64> = out.iter().zip(&base).map(|(o, b)| o.payout - b.payout).collect();
            let (diff_mean, diff_se) = mean_and_se(&diffs);
            ComparisonRow {
                estimate: estimate(&dynamics, s, q, x0, horizon, opts, &out),
                diff_mean,
                diff_se,
                beats_reference: diff_mean > opts.beat_sigmas * diff_se,
            }
        })
        .collect();
    Ok(Comparison { reference, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_round_trip() {
        for s in ["barrier:a=1.5", "threshold:b=1,rate=0.5", "none"] {
            let spec: StrategySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("barrier".parse::<StrategySpec>().is_err());
        assert!("barrier:a=-1".parse::<StrategySpec>().is_err());
        assert!("barrier:a=1,b=2".parse::<StrategySpec>().is_err());
        assert!("band:a=1".parse::<StrategySpec>().is_err());
    }

    #[test]
    fn lump_sum_is_paid_on_every_path() {
        let m = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.0).unwrap();
        let opts = SimOptions {
            n_paths: 200,
            seed: 7,
            ..Default::default()
        };
        let out = simulate_paths(&m, &StrategySpec::Barrier { a: 1.0 }, 0.1, 3.0, &opts).unwrap();
        assert!(out.iter().all(|o| o.payout >= 2.0));
    }

    #[test]
    fn exact_mode_rejects_infinite_activity() {
        let m = LevyModel::cramer_lundberg(1.0, 1.0, 2.0, 0.3).unwrap();
        let r = simulate_value(&m, &StrategySpec::None, 0.1, 1.0, &SimOptions::default());
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
