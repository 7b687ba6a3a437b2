//! Seeded randomized property suites.
//!
//! Trial `i` of a run with seed `S` draws everything from its own generator
//! seeded with `S + i`, so `--seed S+i --trials 1` reruns that trial alone.
//! Every trial reduces to a single slack that must stay above the suite
//! threshold. Failures carry the generated inputs, which `qre replay`
//! evaluates again without touching the generator.

use clap::ValueEnum;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qre_core::binary::{bounds_grid, chi_lower_bound_min, explicit_weaker_bound, kim_bound, BoundRow};
use qre_core::channels::{
    dpi_check, holevo_dpi_check, random_map, tr_monotonicity_check, MapKind, PositiveMapSpec, Slack, DEFAULT_GRID,
};
use qre_core::hermitian::{DensityMatrix, HermitianMatrix};
use qre_core::pencil::Pencil;
use qre_core::random::{random_density_with, random_hermitian, random_povm, rng_from_seed};
use qre_core::{holevo_chi, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Dpi,
    Monotonicity,
    Holevo,
    Pencil,
    Bounds,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [
        Suite::Dpi,
        Suite::Monotonicity,
        Suite::Holevo,
        Suite::Pencil,
        Suite::Bounds,
    ];

    /// Smallest slack accepted by default.
    pub fn default_min_slack(self) -> f64 {
        match self {
            Suite::Monotonicity => -1e-10,
            Suite::Pencil => -1e-9,
            _ => -1e-8,
        }
    }
}

/// Everything a trial needs to be evaluated again.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrialInputs {
    /// `D(ρ‖σ) − D(ℰρ‖ℰσ)`
    Dpi {
        map: PositiveMapSpec,
        rho: DensityMatrix,
        sigma: DensityMatrix,
    },
    /// `min(tr⁺A − tr⁺ℰA, tr⁻A − tr⁻ℰA)`
    Monotonicity { map: PositiveMapSpec, a: HermitianMatrix },
    /// `χ(ensemble) − χ(ℰ(ensemble))`
    Holevo {
        map: PositiveMapSpec,
        states: Vec<DensityMatrix>,
        weights: Vec<f64>,
    },
    /// Chord minus midpoint of `tr⁻A(t)` at `t₀ < t₁ < t₂`, and `−tr⁻A(t)`
    /// at half the window edge on each side.
    Pencil {
        rho: DensityMatrix,
        sigma: DensityMatrix,
        t: [f64; 3],
    },
    /// Least gap in `χ ≥ min bound ≥ explicit bound ≥ Kim bound`.
    Bounds {
        rho0: DensityMatrix,
        rho1: DensityMatrix,
        q1: f64,
    },
    /// Least gap in `min bound ≥ explicit bound ≥ Kim bound` at one table row.
    BoundsRow { trace_distance: f64, q1: f64 },
}

fn dpi_slack(s: Slack) -> f64 {
    match s {
        Slack::Finite { value } => value,
        Slack::InfiniteRhs => f64::INFINITY,
        Slack::InfiniteLhsOnly => f64::NEG_INFINITY,
    }
}

fn ordering_gap(t: f64, q1: f64) -> Result<f64> {
    let q0 = 1.0 - q1;
    let min = chi_lower_bound_min(t, q0, q1)?.minimum;
    let explicit = explicit_weaker_bound(t, q0, q1)?;
    Ok((min - explicit).min(explicit - kim_bound(t, q0, q1)?))
}

impl TrialInputs {
    pub fn slack(&self) -> Result<f64> {
        match self {
            TrialInputs::Dpi { map, rho, sigma } => {
                Ok(dpi_slack(dpi_check(map, rho, sigma, &DEFAULT_GRID, None)?.slack))
            }
            TrialInputs::Monotonicity { map, a } => {
                let r = tr_monotonicity_check(map, a)?;
                Ok(r.plus_defect.min(r.minus_defect))
            }
            TrialInputs::Holevo { map, states, weights } => {
                Ok(dpi_slack(holevo_dpi_check(map, states, weights)?.slack))
            }
            TrialInputs::Pencil { rho, sigma, t } => {
                let pen = Pencil::affine(rho.psdh().clone(), sigma.psdh().clone())?;
                let mut t = *t;
                t.sort_by(f64::total_cmp);
                let mut slack = 0.0f64;
                if t[2] > t[0] {
                    let lam = (t[2] - t[1]) / (t[2] - t[0]);
                    let chord = lam * pen.tr_neg_at(t[0])? + (1.0 - lam) * pen.tr_neg_at(t[2])?;
                    slack = chord - pen.tr_neg_at(t[1])?;
                }
                let w = pen.positivity_window()?;
                for edge in [w.t_lo, w.t_hi] {
                    if edge.is_finite() {
                        slack = slack.min(-pen.tr_neg_at(0.5 * edge)?);
                    }
                }
                Ok(slack)
            }
            TrialInputs::Bounds { rho0, rho1, q1 } => {
                let t = rho1.sub(rho0)?.trace_norm()?.min(2.0);
                let q0 = 1.0 - q1;
                let chi = holevo_chi(&[rho0, rho1], &[q0, *q1])?;
                let min = chi_lower_bound_min(t, q0, *q1)?.minimum;
                Ok((chi - min).min(ordering_gap(t, *q1)?))
            }
            TrialInputs::BoundsRow { trace_distance, q1 } => ordering_gap(*trace_distance, *q1),
        }
    }

    fn generate(suite: Suite, seed: u64, n: usize) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let rng = &mut rng;
        Ok(match suite {
            Suite::Dpi => {
                let rank = rng.random_range(1..=n);
                let rho = random_density_with(rng, n, rank)?;
                let sigma = random_density_with(rng, n, n)?;
                let kind = MapKind::ALL[rng.random_range(0..MapKind::ALL.len())];
                let map = random_map(rng, n, kind, true)?;
                TrialInputs::Dpi { map, rho, sigma }
            }
            Suite::Monotonicity => {
                let a = random_hermitian(rng, n);
                let kind = MapKind::ALL[rng.random_range(0..MapKind::ALL.len())];
                let tp = rng.random_bool(0.5);
                let map = random_map(rng, n, kind, tp)?;
                TrialInputs::Monotonicity { map, a }
            }
            Suite::Holevo => {
                let l = rng.random_range(2..=4);
                let states = (0..l)
                    .map(|_| random_density_with(rng, n, n))
                    .collect::<Result<Vec<_>>>()?;
                let raw: Vec<f64> = (0..l).map(|_| rng.random_range(0.1..1.0)).collect();
                let total: f64 = raw.iter().sum();
                let mut weights: Vec<f64> = raw.iter().map(|x| x / total).collect();
                let head: f64 = weights[..l - 1].iter().sum();
                weights[l - 1] = 1.0 - head;
                let k = rng.random_range(2..=4);
                let povm = random_povm(rng, n, k)?;
                TrialInputs::Holevo {
                    map: PositiveMapSpec::Measurement { povm },
                    states,
                    weights,
                }
            }
            Suite::Pencil => {
                let rank = rng.random_range(1..=n);
                let rho = random_density_with(rng, n, rank)?;
                let sigma = random_density_with(rng, n, n)?;
                let t = [0; 3].map(|_| rng.random_range(-6.0..6.0));
                TrialInputs::Pencil { rho, sigma, t }
            }
            Suite::Bounds => {
                let r0 = rng.random_range(1..=n);
                let rho0 = random_density_with(rng, n, r0)?;
                let r1 = rng.random_range(1..=n);
                let rho1 = random_density_with(rng, n, r1)?;
                let q1 = rng.random_range(0.01..0.99);
                TrialInputs::Bounds { rho0, rho1, q1 }
            }
            Suite::All => unreachable!("`all` is expanded before generation"),
        })
    }
}

/// `f64` that may be infinite, written as a number or `"inf"` / `"-inf"` / `"nan"`.
pub mod extended {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureRecord {
    pub suite: Suite,
    /// Trial index, absent for table rows.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial: Option<usize>,
    /// Generator seed of this trial.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(with = "extended")]
    pub min_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub slack: Option<Extended>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inputs: Option<TrialInputs>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Extended(#[serde(with = "extended")] pub f64);

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    #[serde(with = "extended")]
    pub min_slack: f64,
    #[serde(with = "extended")]
    pub worst_slack: f64,
    pub failures: usize,
    pub failed: Vec<FailureRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<BoundRow>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AllReport {
    pub suite: Suite,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    #[serde(with = "extended")]
    pub worst_slack: f64,
    pub failures: usize,
    pub suites: Vec<SuiteReport>,
}

pub struct Outcome {
    pub slack: Result<f64>,
    pub inputs: Option<TrialInputs>,
}

impl Outcome {
    fn evaluate(inputs: Result<TrialInputs>) -> Self {
        match inputs {
            Ok(inputs) => Outcome {
                slack: inputs.slack(),
                inputs: Some(inputs),
            },
            Err(e) => Outcome {
                slack: Err(e),
                inputs: None,
            },
        }
    }

    /// Failure record when the outcome violates `min_slack`.
    fn failure(self, suite: Suite, trial: Option<usize>, seed: Option<u64>, min_slack: f64) -> Option<FailureRecord> {
        let (slack, error) = match self.slack {
            Ok(s) if s >= min_slack => return None,
            Ok(s) => (Some(Extended(s)), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Some(FailureRecord {
            suite,
            trial,
            seed,
            min_slack,
            slack,
            error,
            inputs: self.inputs,
        })
    }
}

/// Table grid reported and checked by the bounds suite.
pub const TABLE_GRID: (usize, usize) = (5, 5);

pub fn run_suite(suite: Suite, trials: usize, seed: u64, n: usize, min_slack: Option<f64>) -> SuiteReport {
    let min_slack = min_slack.unwrap_or(suite.default_min_slack());
    let outcomes: Vec<Outcome> = (0..trials)
        .into_par_iter()
        .map(|i| Outcome::evaluate(TrialInputs::generate(suite, seed.wrapping_add(i as u64), n)))
        .collect();
    let mut worst = f64::INFINITY;
    let mut failed = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match &o.slack {
            Ok(s) => worst = worst.min(*s),
            Err(_) => worst = f64::NAN,
        }
        failed.extend(o.failure(suite, Some(i), Some(seed.wrapping_add(i as u64)), min_slack));
    }
    let mut table = None;
    if suite == Suite::Bounds {
        let (k, l) = TABLE_GRID;
        let rows = bounds_grid(k, l).expect("table grid is at least 2x2");
        for r in &rows {
            let inputs = TrialInputs::BoundsRow {
                trace_distance: r.trace_distance,
                q1: r.q1,
            };
            let o = Outcome::evaluate(Ok(inputs));
            if let Ok(s) = &o.slack {
                worst = worst.min(*s);
            }
            failed.extend(o.failure(suite, None, None, min_slack));
        }
        table = Some(rows);
    }
    SuiteReport {
        suite,
        n,
        seed,
        trials,
        min_slack,
        worst_slack: worst,
        failures: failed.len(),
        failed,
        table,
    }
}

pub fn run_all(trials: usize, seed: u64, n: usize, min_slack: Option<f64>) -> AllReport {
    let suites: Vec<SuiteReport> = Suite::EACH
        .iter()
        .map(|&s| run_suite(s, trials, seed, n, min_slack))
        .collect();
    AllReport {
        suite: Suite::All,
        n,
        seed,
        trials,
        worst_slack: suites.iter().map(|s| s.worst_slack).fold(f64::INFINITY, nan_min),
        failures: suites.iter().map(|s| s.failures).sum(),
        suites,
    }
}

/// `min` that propagates NaN.
fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub suite: Suite,
    #[serde(with = "extended")]
    pub min_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<Extended>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub reproduced: bool,
}

pub fn replay(record: &FailureRecord) -> std::result::Result<ReplayReport, String> {
    let inputs = record
        .inputs
        .as_ref()
        .ok_or("record has no inputs; rerun the trial with its seed instead")?;
    let (slack, error) = match inputs.slack() {
        Ok(s) => (Some(Extended(s)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let reproduced = match slack {
        Some(Extended(s)) => !(s >= record.min_slack),
        None => true,
    };
    Ok(ReplayReport {
        suite: record.suite,
        min_slack: record.min_slack,
        slack,
        error,
        reproduced,
    })
}
