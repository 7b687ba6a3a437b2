//! Positive trace-nonincreasing linear maps and the data-processing checks
//! built on them.
//!
//! Maps are described by [`PositiveMapSpec`], a tagged JSON-friendly enum.
//! None of the checks assume complete positivity; the transpose is the
//! standard example of a positive map that is not completely positive.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::{holevo_chi, relative_entropy_spectral, EntropyValue};
use crate::error::{Error, Result};
use crate::hermitian::{
    ensure_same_dim, max_abs, CMatrix, ComplexMatrixData, DensityMatrix, HermitianMatrix, PsdhMatrix, EPS_EIG_FACTOR,
};
use crate::qre::{relative_entropy_integral, IntegralForm};
use crate::quadrature::QuadConfig;
use crate::random::{ginibre, random_hermitian, random_povm};

/// Absolute tolerance of the equality and monotonicity tests.
pub const EQUALITY_TOL: f64 = 1e-10;
/// Allowed change of `tr ρ` under a map that is supposed to preserve it.
pub const TRACE_TOL: f64 = 1e-10;

/// Sample points of the affine family `(1 − t)ρ + tσ` used for equality diagnostics.
pub const DEFAULT_GRID: [f64; 12] = [-3.0, -2.0, -1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];

/// Tensor factor removed by a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum PositiveMapSpec {
    /// `A ↦ diag(tr E₁A, …, tr E_kA)`.
    Measurement {
        povm: Vec<PsdhMatrix>,
    },
    /// `A ↦ Σ K_i A K_i†`.
    Kraus {
        ops: Vec<ComplexMatrixData>,
    },
    Transpose,
    /// `A ↦ Σ P_j A P_j` for orthogonal projectors summing to the identity.
    Pinching {
        projectors: Vec<PsdhMatrix>,
    },
    /// Trace over the factor `side` of `C^{d_A} ⊗ C^{d_B}`.
    PartialTrace {
        dims: [usize; 2],
        side: Side,
    },
    /// Applied left to right.
    Compose {
        maps: Vec<PositiveMapSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapValidation {
    pub trace_preserving: bool,
    pub trace_nonincreasing: bool,
    /// Eigenvalues of `1 − ΣE_i` or `1 − ΣK_i†K_i` for every component that has one.
    pub defects: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub ok: bool,
    /// `tr⁺A − tr⁺ℰA`
    pub plus_defect: f64,
    /// `tr⁻A − tr⁻ℰA`
    pub minus_defect: f64,
    pub equality_plus: bool,
    pub equality_minus: bool,
    /// Equality in both signs.
    pub equality: bool,
    /// `‖(ℰA⁺)(ℰA⁻)‖_max`
    pub cross_norm: f64,
}

/// `rhs − lhs` for a pair of values that may be `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Slack {
    Finite {
        value: f64,
    },
    /// `rhs = +∞`, so the inequality holds whatever `lhs` is.
    InfiniteRhs,
    /// `lhs = +∞` with finite `rhs`: a violation.
    InfiniteLhsOnly,
}

impl Slack {
    pub fn between(lhs: &EntropyValue, rhs: &EntropyValue) -> Self {
        match (lhs.as_option(), rhs.as_option()) {
            (_, None) => Slack::InfiniteRhs,
            (None, Some(_)) => Slack::InfiniteLhsOnly,
            (Some(l), Some(r)) => Slack::Finite { value: r - l },
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Slack::Finite { value } => Some(*value),
            _ => None,
        }
    }

    /// Inequality holds up to `tol`.
    pub fn satisfied(&self, tol: f64) -> bool {
        match self {
            Slack::Finite { value } => *value >= -tol,
            Slack::InfiniteRhs => true,
            Slack::InfiniteLhsOnly => false,
        }
    }
}

/// Equality evidence at one point `A(t)` of an affine family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityProbe {
    pub t: f64,
    /// Indices of the two ensemble members combined, for ensemble checks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair: Option<(usize, usize)>,
    pub cross_norm: f64,
    pub defect_plus: f64,
    pub defect_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralCrossCheck {
    pub lhs: EntropyValue,
    pub rhs: EntropyValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpiReport {
    pub lhs: EntropyValue,
    pub rhs: EntropyValue,
    pub slack: Slack,
    pub equality_diagnostic: Vec<EqualityProbe>,
    /// Every probe satisfies the sampled equality condition. Evidence only:
    /// the condition quantifies over a continuum of `t`.
    pub equality_on_grid: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub integral: Option<IntegralCrossCheck>,
}

impl PositiveMapSpec {
    /// Output dimension for input dimension `n`.
    pub fn output_dim(&self, n: usize) -> Result<usize> {
        self.chain(Some(n))?
            .ok_or_else(|| Error::MalformedSpec("output dimension undetermined".into()))
    }

    /// Input dimension fixed by the spec, if any (a bare transpose has none).
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            PositiveMapSpec::Measurement { povm } => povm.first().map(|e| e.dim()),
            PositiveMapSpec::Kraus { ops } => ops.first().map(|k| k.n()),
            PositiveMapSpec::Transpose => None,
            PositiveMapSpec::Pinching { projectors } => projectors.first().map(|p| p.dim()),
            PositiveMapSpec::PartialTrace { dims, .. } => Some(dims[0] * dims[1]),
            PositiveMapSpec::Compose { maps } => {
                // first component with a fixed input size, propagated backwards
                // through dimension-free transposes
                maps.iter().find_map(|m| match m {
                    PositiveMapSpec::Transpose => None,
                    other => Some(other.input_dim()),
                })?
            }
        }
    }

    /// Propagates a (possibly unknown) input dimension, checking consistency.
    fn chain(&self, n: Option<usize>) -> Result<Option<usize>> {
        let fixed = |d: usize| -> Result<usize> {
            if let Some(n) = n {
                ensure_same_dim(d, n)?;
            }
            Ok(d)
        };
        match self {
            PositiveMapSpec::Measurement { povm } => {
                let d = uniform_dim(povm.iter().map(|e| e.dim()), "measurement")?;
                fixed(d)?;
                Ok(Some(povm.len()))
            }
            PositiveMapSpec::Kraus { ops } => {
                let d = uniform_dim(ops.iter().map(|k| k.n()), "kraus")?;
                Ok(Some(fixed(d)?))
            }
            PositiveMapSpec::Transpose => Ok(n),
            PositiveMapSpec::Pinching { projectors } => {
                let d = uniform_dim(projectors.iter().map(|p| p.dim()), "pinching")?;
                Ok(Some(fixed(d)?))
            }
            PositiveMapSpec::PartialTrace { dims, side } => {
                if dims[0] == 0 || dims[1] == 0 {
                    return Err(Error::MalformedSpec("partial trace dimensions must be positive".into()));
                }
                fixed(dims[0] * dims[1])?;
                Ok(Some(match side {
                    Side::A => dims[1],
                    Side::B => dims[0],
                }))
            }
            PositiveMapSpec::Compose { maps } => {
                if maps.is_empty() {
                    return Err(Error::MalformedSpec("compose needs at least one map".into()));
                }
                let mut cur = n;
                for m in maps {
                    cur = m.chain(cur)?;
                }
                Ok(cur)
            }
        }
    }
}

fn uniform_dim(dims: impl Iterator<Item = usize>, what: &str) -> Result<usize> {
    let mut found = None;
    for d in dims {
        match found {
            None => found = Some(d),
            Some(f) => ensure_same_dim(f, d)?,
        }
    }
    found.ok_or_else(|| Error::MalformedSpec(format!("{what} has no elements")))
}

/// `ℰA`. The output is Hermitian (symmetrized against roundoff).
pub fn apply_map(m: &PositiveMapSpec, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let n = a.dim();
    m.chain(Some(n))?;
    let x = a.matrix();
    Ok(match m {
        PositiveMapSpec::Measurement { povm } => {
            let probs = povm.iter().map(|e| e.trace_product(a)).collect::<Result<Vec<f64>>>()?;
            HermitianMatrix::from_diagonal(&probs)?
        }
        PositiveMapSpec::Kraus { ops } => {
            let mut acc = CMatrix::zeros(n, n);
            for k in ops {
                let k = k.as_matrix();
                acc += k * x * k.adjoint();
            }
            HermitianMatrix::hermitianize(acc)
        }
        PositiveMapSpec::Transpose => a.transpose(),
        PositiveMapSpec::Pinching { projectors } => {
            let mut acc = CMatrix::zeros(n, n);
            for p in projectors {
                let p = p.matrix();
                acc += p * x * p;
            }
            HermitianMatrix::hermitianize(acc)
        }
        PositiveMapSpec::PartialTrace { dims: [da, db], side } => {
            let (da, db) = (*da, *db);
            let idx = |i: usize, j: usize| i * db + j;
            let out = match side {
                Side::B => CMatrix::from_fn(da, da, |r, c| (0..db).map(|j| x[(idx(r, j), idx(c, j))]).sum()),
                Side::A => CMatrix::from_fn(db, db, |r, c| (0..da).map(|i| x[(idx(i, r), idx(i, c))]).sum()),
            };
            HermitianMatrix::hermitianize(out)
        }
        PositiveMapSpec::Compose { maps } => {
            let mut cur = a.clone();
            for step in maps {
                cur = apply_map(step, &cur)?;
            }
            cur
        }
    })
}

/// `ℰ` applied to a psdh matrix. Every map the spec can express is positive,
/// so the output is psdh up to roundoff (absorbed by eigenvalue clamping).
pub fn apply_map_psdh(m: &PositiveMapSpec, a: &PsdhMatrix) -> Result<PsdhMatrix> {
    Ok(PsdhMatrix::trusted(apply_map(m, a)?))
}

/// Deviation tolerance for `1 − S` where `S` is a sum of psdh terms.
fn identity_tol(sum: &CMatrix) -> f64 {
    sum.nrows() as f64 * max_abs(sum).max(1.0) * EPS_EIG_FACTOR
}

fn check_projectors(projectors: &[PsdhMatrix]) -> Result<()> {
    let n = uniform_dim(projectors.iter().map(|p| p.dim()), "pinching")?;
    let mut sum = CMatrix::zeros(n, n);
    for (i, p) in projectors.iter().enumerate() {
        let pm = p.matrix();
        if max_abs(&(pm * pm - pm)) > EQUALITY_TOL {
            return Err(Error::MalformedSpec(format!("pinching element {i} is not idempotent")));
        }
        for (j, q) in projectors.iter().enumerate().skip(i + 1) {
            if max_abs(&(pm * q.matrix())) > EQUALITY_TOL {
                return Err(Error::MalformedSpec(format!(
                    "pinching elements {i} and {j} are not orthogonal"
                )));
            }
        }
        sum += pm;
    }
    if max_abs(&(sum - CMatrix::identity(n, n))) > EQUALITY_TOL {
        return Err(Error::MalformedSpec(
            "pinching projectors do not sum to the identity".into(),
        ));
    }
    Ok(())
}

/// Eigenvalues of `1 − S`.
fn identity_defects(sum: CMatrix) -> Result<(Vec<f64>, f64)> {
    let n = sum.nrows();
    let tol = identity_tol(&sum);
    let gap = HermitianMatrix::hermitianize(CMatrix::identity(n, n) - sum);
    Ok((gap.spectrum()?.eigenvalues.clone(), tol))
}

/// Checks structure and the trace conditions `ΣE_i ≤ 1`, `ΣK_i†K_i ≤ 1`.
pub fn validate_map(m: &PositiveMapSpec) -> Result<MapValidation> {
    m.chain(m.input_dim())?;
    match m {
        PositiveMapSpec::Measurement { povm } => {
            let n = povm[0].dim();
            let sum = povm.iter().fold(CMatrix::zeros(n, n), |acc, e| acc + e.matrix());
            Ok(from_defects(identity_defects(sum)?))
        }
        PositiveMapSpec::Kraus { ops } => {
            let n = ops[0].n();
            let sum = ops.iter().fold(CMatrix::zeros(n, n), |acc, k| {
                acc + k.as_matrix().adjoint() * k.as_matrix()
            });
            Ok(from_defects(identity_defects(sum)?))
        }
        PositiveMapSpec::Pinching { projectors } => {
            check_projectors(projectors)?;
            Ok(exact())
        }
        PositiveMapSpec::Transpose | PositiveMapSpec::PartialTrace { .. } => Ok(exact()),
        PositiveMapSpec::Compose { maps } => {
            let mut out = exact();
            for step in maps {
                let v = validate_map(step)?;
                out.trace_preserving &= v.trace_preserving;
                out.trace_nonincreasing &= v.trace_nonincreasing;
                out.defects.extend(v.defects);
            }
            Ok(out)
        }
    }
}

fn exact() -> MapValidation {
    MapValidation {
        trace_preserving: true,
        trace_nonincreasing: true,
        defects: Vec::new(),
    }
}

fn from_defects((defects, tol): (Vec<f64>, f64)) -> MapValidation {
    MapValidation {
        trace_preserving: defects.iter().all(|d| d.abs() <= tol),
        trace_nonincreasing: defects.iter().all(|&d| d >= -tol),
        defects,
    }
}

/// Signed-trace defects of `A ↦ ℰA` and the cross term `(ℰA⁺)(ℰA⁻)`.
fn probe(m: &PositiveMapSpec, a: &HermitianMatrix) -> Result<(f64, f64, f64, f64, f64)> {
    let ea = apply_map(m, a)?;
    let before = a.tr_signed()?;
    let after = ea.tr_signed()?;
    let e_plus = apply_map(m, &a.positive_part()?)?;
    let e_minus = apply_map(m, &a.negative_part()?)?;
    let cross = max_abs(&(e_plus.matrix() * e_minus.matrix()));
    let trace_gap_plus = (before.plus - e_plus.trace()).abs();
    let trace_gap_minus = (before.minus - e_minus.trace()).abs();
    Ok((
        before.plus - after.plus,
        before.minus - after.minus,
        cross,
        trace_gap_plus,
        trace_gap_minus,
    ))
}

/// `tr^±ℰA ≤ tr^±A`, with equality tested through
/// `tr ℰA^± = tr A^±` and `(ℰA⁺)(ℰA⁻) = 0`. Assumes `ℰ` is trace-nonincreasing.
pub fn tr_monotonicity_check(m: &PositiveMapSpec, a: &HermitianMatrix) -> Result<MonotonicityReport> {
    let (plus, minus, cross, gap_plus, gap_minus) = probe(m, a)?;
    let orthogonal = cross <= EQUALITY_TOL;
    let equality_plus = plus.abs() <= EQUALITY_TOL && gap_plus <= EQUALITY_TOL && orthogonal;
    let equality_minus = minus.abs() <= EQUALITY_TOL && gap_minus <= EQUALITY_TOL && orthogonal;
    Ok(MonotonicityReport {
        ok: plus >= -EQUALITY_TOL && minus >= -EQUALITY_TOL,
        plus_defect: plus,
        minus_defect: minus,
        equality_plus,
        equality_minus,
        equality: equality_plus && equality_minus,
        cross_norm: cross,
    })
}

fn affine_point(a: &HermitianMatrix, b: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    a.combine(1.0 - t, b, t)
}

fn ensure_trace_kept(m: &PositiveMapSpec, rho: &PsdhMatrix) -> Result<PsdhMatrix> {
    let out = apply_map_psdh(m, rho)?;
    let (before, after) = (rho.trace(), out.trace());
    if (before - after).abs() > TRACE_TOL {
        return Err(Error::MapNotTracePreservingOnRho { before, after });
    }
    Ok(out)
}

/// `D(ℰρ‖ℰσ) ≤ D(ρ‖σ)` for a positive map preserving `tr ρ`.
///
/// Both sides use the spectral formula; passing `qcfg` adds the integral
/// route as a cross-check. Each grid point `t` records the defects of
/// `A(t) = (1 − t)ρ + tσ`; equality requires the cross term to vanish, the
/// `+` defect to vanish for `t < 0` and the `−` defect for `t > 0`.
pub fn dpi_check(
    m: &PositiveMapSpec,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    grid: &[f64],
    qcfg: Option<&QuadConfig>,
) -> Result<DpiReport> {
    ensure_same_dim(rho.dim(), sigma.dim())?;
    let e_rho = ensure_trace_kept(m, rho)?;
    let e_sigma = apply_map_psdh(m, sigma)?;
    let lhs = relative_entropy_spectral(&e_rho, &e_sigma)?;
    let rhs = relative_entropy_spectral(rho, sigma)?;

    let mut probes = Vec::with_capacity(grid.len());
    let mut equal = true;
    for &t in grid {
        let a = affine_point(rho, sigma, t)?;
        let (plus, minus, cross, _, _) = probe(m, &a)?;
        let relevant = if t < 0.0 {
            plus
        } else if t > 0.0 {
            minus
        } else {
            plus.abs().max(minus.abs())
        };
        equal &= cross <= EQUALITY_TOL && relevant.abs() <= EQUALITY_TOL;
        probes.push(EqualityProbe {
            t,
            pair: None,
            cross_norm: cross,
            defect_plus: plus,
            defect_minus: minus,
        });
    }

    let integral = match qcfg {
        Some(cfg) => Some(IntegralCrossCheck {
            lhs: relative_entropy_integral(&e_rho, &e_sigma, IntegralForm::FormOne, cfg)?.0,
            rhs: relative_entropy_integral(rho, sigma, IntegralForm::FormOne, cfg)?.0,
        }),
        None => None,
    };

    Ok(DpiReport {
        slack: Slack::between(&lhs, &rhs),
        lhs,
        rhs,
        equality_diagnostic: probes,
        equality_on_grid: equal,
        integral,
    })
}

/// `χ(ℰρ₁, …; q) ≤ χ(ρ₁, …; q)` for a trace-preserving positive map.
///
/// Equality diagnostics sample `(1 − t)ρ_i + tρ_j` over [`DEFAULT_GRID`] for
/// every pair `i < j`; equality requires the cross term and the `−` defect
/// to vanish at each point.
pub fn holevo_dpi_check(m: &PositiveMapSpec, states: &[DensityMatrix], weights: &[f64]) -> Result<DpiReport> {
    let mapped = states
        .iter()
        .map(|s| ensure_trace_kept(m, s))
        .collect::<Result<Vec<_>>>()?;
    let lhs = EntropyValue::finite(holevo_chi(&mapped, weights)?);
    let rhs = EntropyValue::finite(holevo_chi(states, weights)?);

    let mut probes = Vec::new();
    let mut equal = true;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            for &t in &DEFAULT_GRID {
                let a = affine_point(&states[i], &states[j], t)?;
                let (plus, minus, cross, _, _) = probe(m, &a)?;
                equal &= cross <= EQUALITY_TOL && minus.abs() <= EQUALITY_TOL;
                probes.push(EqualityProbe {
                    t,
                    pair: Some((i, j)),
                    cross_norm: cross,
                    defect_plus: plus,
                    defect_minus: minus,
                });
            }
        }
    }
    Ok(DpiReport {
        slack: Slack::between(&lhs, &rhs),
        lhs,
        rhs,
        equality_diagnostic: probes,
        equality_on_grid: equal,
        integral: None,
    })
}

/// Kinds of map the random generator can produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Measurement,
    Kraus,
    Transpose,
    Pinching,
    PartialTrace,
    Compose,
}

impl MapKind {
    pub const ALL: [MapKind; 6] = [
        MapKind::Measurement,
        MapKind::Kraus,
        MapKind::Transpose,
        MapKind::Pinching,
        MapKind::PartialTrace,
        MapKind::Compose,
    ];
}

/// Random map on `C^n` of the given kind.
///
/// With `trace_preserving = false` the measurement and Kraus families are
/// scaled by a factor in `[1/2, 1]`, which keeps them trace-nonincreasing.
/// A partial trace splits `n` at its smallest nontrivial divisor (`n ⊗ 1`
/// for prime `n`). A composition chains two random non-composite maps.
pub fn random_map<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    kind: MapKind,
    trace_preserving: bool,
) -> Result<PositiveMapSpec> {
    let shrink = |rng: &mut R| {
        if trace_preserving {
            1.0
        } else {
            rng.random_range(0.5..=1.0)
        }
    };
    Ok(match kind {
        MapKind::Measurement => {
            let k = rng.random_range(2..=4);
            let c = shrink(rng);
            let povm = random_povm(rng, n, k)?
                .into_iter()
                .map(|e| PsdhMatrix::trusted(e.scale(c)))
                .collect();
            PositiveMapSpec::Measurement { povm }
        }
        MapKind::Kraus => {
            let k = rng.random_range(1..=3);
            let gs: Vec<CMatrix> = (0..k).map(|_| ginibre(rng, n, n)).collect();
            let sum = gs.iter().fold(CMatrix::zeros(n, n), |acc, g| acc + g.adjoint() * g);
            let inv_sqrt = HermitianMatrix::hermitianize(sum)
                .spectrum()?
                .map_eigenvalues(|l| 1.0 / l.sqrt());
            let c = shrink(rng).sqrt();
            let ops = gs
                .into_iter()
                .map(|g| ComplexMatrixData::new((g * &inv_sqrt).scale(c)))
                .collect::<Result<Vec<_>>>()?;
            PositiveMapSpec::Kraus { ops }
        }
        MapKind::Transpose => PositiveMapSpec::Transpose,
        MapKind::Pinching => {
            let basis = random_hermitian(rng, n).spectrum()?.eigenvectors.clone();
            let blocks = rng.random_range(1..=n);
            // cut points: block j gets columns [cuts[j], cuts[j+1])
            let mut cuts: Vec<usize> = rand::seq::index::sample(rng, n - 1, blocks - 1)
                .into_iter()
                .map(|c| c + 1)
                .collect();
            cuts.push(0);
            cuts.push(n);
            cuts.sort_unstable();
            let projectors = cuts
                .windows(2)
                .map(|w| {
                    let v = basis.columns(w[0], w[1] - w[0]);
                    PsdhMatrix::trusted(HermitianMatrix::hermitianize(v * v.adjoint()))
                })
                .collect();
            PositiveMapSpec::Pinching { projectors }
        }
        MapKind::PartialTrace => {
            let da = (2..n).find(|&d| n.is_multiple_of(d)).unwrap_or(n);
            let side = if rng.random_bool(0.5) { Side::A } else { Side::B };
            PositiveMapSpec::PartialTrace {
                dims: [da, n / da],
                side,
            }
        }
        MapKind::Compose => {
            let simple = [
                MapKind::Measurement,
                MapKind::Kraus,
                MapKind::Transpose,
                MapKind::Pinching,
                MapKind::PartialTrace,
            ];
            let k1 = simple[rng.random_range(0..simple.len())];
            let first = random_map(rng, n, k1, trace_preserving)?;
            let mid = first.output_dim(n)?;
            let k2 = simple[rng.random_range(0..simple.len())];
            let second = random_map(rng, mid, k2, trace_preserving)?;
            PositiveMapSpec::Compose {
                maps: vec![first, second],
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::C64;
    use crate::random::{random_density_with, rng_from_seed};
    use approx::assert_abs_diff_eq;

    fn psdh(d: &[f64]) -> PsdhMatrix {
        PsdhMatrix::from_diagonal(d).unwrap()
    }

    fn dens(d: &[f64]) -> DensityMatrix {
        DensityMatrix::from_diagonal(d).unwrap()
    }

    fn computational_povm(n: usize) -> PositiveMapSpec {
        let povm = (0..n)
            .map(|i| {
                let mut d = vec![0.0; n];
                d[i] = 1.0;
                psdh(&d)
            })
            .collect();
        PositiveMapSpec::Measurement { povm }
    }

    fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a.kronecker(b)
    }

    #[test]
    fn transpose_conjugates_hermitian() {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let a = HermitianMatrix::from_matrix(CMatrix::from_row_slice(2, 2, &[z, i, -i, z])).unwrap();
        let out = apply_map(&PositiveMapSpec::Transpose, &a).unwrap();
        assert_eq!(out.matrix()[(0, 1)], -i);
        assert_eq!(out.matrix()[(1, 0)], i);
    }

    #[test]
    fn measurement_extracts_diagonal() {
        let a = HermitianMatrix::from_real_rows(&[vec![0.3, 0.2], vec![0.2, -0.7]]).unwrap();
        let out = apply_map(&computational_povm(2), &a).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(out.matrix()[(1, 1)].re, -0.7, epsilon = 1e-15);
        assert_eq!(out.matrix()[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = rng_from_seed(8);
        let ra = random_density_with(&mut rng, 2, 2).unwrap();
        let rb = random_density_with(&mut rng, 3, 3).unwrap();
        let joint = HermitianMatrix::from_matrix(kron(ra.matrix(), rb.matrix())).unwrap();
        let over_b = PositiveMapSpec::PartialTrace {
            dims: [2, 3],
            side: Side::B,
        };
        let over_a = PositiveMapSpec::PartialTrace {
            dims: [2, 3],
            side: Side::A,
        };
        let a = apply_map(&over_b, &joint).unwrap();
        let b = apply_map(&over_a, &joint).unwrap();
        assert!(max_abs(&(a.matrix() - ra.matrix())) < 1e-15);
        assert!(max_abs(&(b.matrix() - rb.matrix())) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let a = HermitianMatrix::identity(3);
        assert!(matches!(
            apply_map(&computational_povm(2), &a),
            Err(Error::DimensionMismatch(..))
        ));
        let pt = PositiveMapSpec::PartialTrace {
            dims: [2, 2],
            side: Side::A,
        };
        assert!(apply_map(&pt, &a).is_err());
    }

    #[test]
    fn validation_examples() {
        let half = PositiveMapSpec::Measurement {
            povm: vec![psdh(&[0.5, 0.5]), psdh(&[0.5, 0.5])],
        };
        assert!(validate_map(&half).unwrap().trace_preserving);

        let k = ComplexMatrixData::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(0.5, 0.0),
        ])))
        .unwrap();
        let v = validate_map(&PositiveMapSpec::Kraus { ops: vec![k] }).unwrap();
        assert!(v.trace_nonincreasing);
        assert!(!v.trace_preserving);
        assert_abs_diff_eq!(v.defects[1], 0.75, epsilon = 1e-15);

        let double = PositiveMapSpec::Measurement {
            povm: vec![psdh(&[1.0, 1.0]), psdh(&[1.0, 1.0])],
        };
        assert!(!validate_map(&double).unwrap().trace_nonincreasing);
    }

    #[test]
    fn malformed_pinching_and_compose() {
        let bad = PositiveMapSpec::Pinching {
            projectors: vec![psdh(&[1.0, 0.0]), psdh(&[1.0, 1.0])],
        };
        assert!(matches!(validate_map(&bad), Err(Error::MalformedSpec(_))));
        let not_idempotent = PositiveMapSpec::Pinching {
            projectors: vec![psdh(&[0.5, 0.0]), psdh(&[0.5, 1.0])],
        };
        assert!(matches!(validate_map(&not_idempotent), Err(Error::MalformedSpec(_))));
        let chained = PositiveMapSpec::Compose {
            maps: vec![computational_povm(3), computational_povm(2)],
        };
        assert!(validate_map(&chained).is_err());
        assert!(validate_map(&PositiveMapSpec::Compose { maps: vec![] }).is_err());
    }

    #[test]
    fn map_json_round_trip() {
        let spec = PositiveMapSpec::Compose {
            maps: vec![
                PositiveMapSpec::Transpose,
                PositiveMapSpec::PartialTrace {
                    dims: [2, 2],
                    side: Side::B,
                },
                computational_povm(2),
            ],
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains(r#""tag":"partial_trace""#));
        let back: PositiveMapSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let parsed: PositiveMapSpec = serde_json::from_str(r#"{"tag":"transpose"}"#).unwrap();
        assert_eq!(parsed, PositiveMapSpec::Transpose);
    }

    #[test]
    fn psd_input_has_zero_defects() {
        let mut rng = rng_from_seed(4);
        let rho = random_density_with(&mut rng, 3, 3).unwrap();
        for kind in MapKind::ALL {
            let m = random_map(&mut rng, 3, kind, true).unwrap();
            let r = tr_monotonicity_check(&m, &rho).unwrap();
            assert!(r.plus_defect.abs() < 1e-12, "{kind:?} {r:?}");
            assert_eq!(r.minus_defect, 0.0);
        }
    }

    #[test]
    fn classical_case_is_equality() {
        let a = HermitianMatrix::from_diagonal(&[0.4, -0.3, 0.0, 1.1]).unwrap();
        let r = tr_monotonicity_check(&computational_povm(4), &a).unwrap();
        assert!(r.equality, "{r:?}");
    }

    #[test]
    fn random_defects_are_nonnegative() {
        let mut rng = rng_from_seed(12);
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 3);
            let m = random_map(&mut rng, 3, MapKind::Measurement, false).unwrap();
            let r = tr_monotonicity_check(&m, &a).unwrap();
            assert!(r.ok, "{r:?}");
        }
    }

    #[test]
    fn random_maps_are_valid() {
        let mut rng = rng_from_seed(2);
        for n in [2, 4, 6] {
            for kind in MapKind::ALL {
                for tp in [true, false] {
                    let m = random_map(&mut rng, n, kind, tp).unwrap();
                    let v = validate_map(&m).unwrap();
                    assert!(v.trace_nonincreasing, "{kind:?}");
                    if tp {
                        assert!(v.trace_preserving, "{kind:?} {v:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn transpose_dpi_is_tight() {
        let mut rng = rng_from_seed(21);
        let rho = random_density_with(&mut rng, 3, 3).unwrap();
        let sigma = random_density_with(&mut rng, 3, 3).unwrap();
        let r = dpi_check(&PositiveMapSpec::Transpose, &rho, &sigma, &DEFAULT_GRID, None).unwrap();
        assert!(r.slack.value().unwrap().abs() <= 1e-10);
        assert!(r.equality_on_grid);
    }

    #[test]
    fn classical_dpi_is_tight() {
        let rho = dens(&[0.2, 0.3, 0.5]);
        let sigma = dens(&[0.4, 0.4, 0.2]);
        let r = dpi_check(&computational_povm(3), &rho, &sigma, &DEFAULT_GRID, None).unwrap();
        assert!(r.slack.value().unwrap().abs() <= 1e-10);
        assert!(r.equality_on_grid);
    }

    #[test]
    fn partial_trace_dpi() {
        let mut rng = rng_from_seed(5);
        let rho = random_density_with(&mut rng, 4, 4).unwrap();
        let sigma = random_density_with(&mut rng, 4, 4).unwrap();
        let pt = PositiveMapSpec::PartialTrace {
            dims: [2, 2],
            side: Side::B,
        };
        let r = dpi_check(&pt, &rho, &sigma, &DEFAULT_GRID, Some(&QuadConfig::default())).unwrap();
        assert!(r.slack.satisfied(1e-8));
        let ic = r.integral.unwrap();
        assert_abs_diff_eq!(ic.lhs.value, r.lhs.value, epsilon = 1e-6);
        assert_abs_diff_eq!(ic.rhs.value, r.rhs.value, epsilon = 1e-6);
    }

    #[test]
    fn infinite_rhs_is_satisfied() {
        let rho = dens(&[1.0, 0.0]);
        let sigma = dens(&[0.0, 1.0]);
        let r = dpi_check(&PositiveMapSpec::Transpose, &rho, &sigma, &[], None).unwrap();
        assert_eq!(r.slack, Slack::InfiniteRhs);
        assert!(r.slack.satisfied(0.0));
        assert!(!Slack::InfiniteLhsOnly.satisfied(1.0));
    }

    #[test]
    fn rejects_trace_loss_on_rho() {
        let m = PositiveMapSpec::Measurement {
            povm: vec![psdh(&[0.5, 0.5])],
        };
        let r = dpi_check(&m, &dens(&[0.5, 0.5]), &dens(&[0.5, 0.5]), &[], None);
        assert!(matches!(r, Err(Error::MapNotTracePreservingOnRho { .. })));
    }

    #[test]
    fn holevo_examples() {
        let m = computational_povm(2);
        let same = vec![dens(&[0.3, 0.7]), dens(&[0.3, 0.7])];
        let r = holevo_dpi_check(&m, &same, &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(r.slack.value().unwrap(), 0.0, epsilon = 1e-15);

        let orth = vec![dens(&[1.0, 0.0]), dens(&[0.0, 1.0])];
        let r = holevo_dpi_check(&m, &orth, &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(r.slack.value().unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.lhs.value, std::f64::consts::LN_2, epsilon = 1e-12);
        assert!(r.equality_on_grid);
    }

    #[test]
    fn measured_holevo_is_mutual_information() {
        let mut rng = rng_from_seed(17);
        let states: Vec<DensityMatrix> = (0..3).map(|_| random_density_with(&mut rng, 3, 3).unwrap()).collect();
        let q = [0.2, 0.5, 0.3];
        let povm = random_povm(&mut rng, 3, 4).unwrap();
        // joint distribution p(j, i) = q_j tr E_i ρ_j
        let joint: Vec<Vec<f64>> = states
            .iter()
            .zip(q)
            .map(|(s, qj)| povm.iter().map(|e| qj * e.trace_product(s).unwrap()).collect())
            .collect();
        let col: Vec<f64> = (0..4).map(|i| joint.iter().map(|row| row[i]).sum()).collect();
        let mut mi = 0.0;
        for (j, row) in joint.iter().enumerate() {
            for (i, &p) in row.iter().enumerate() {
                mi += p * (p / (q[j] * col[i])).ln();
            }
        }
        let r = holevo_dpi_check(&PositiveMapSpec::Measurement { povm }, &states, &q).unwrap();
        assert_abs_diff_eq!(r.lhs.value, mi, epsilon = 1e-10);
        assert!(r.slack.satisfied(1e-8));
    }
}
