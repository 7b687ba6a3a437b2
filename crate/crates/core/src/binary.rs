//! Reduction of a pair of states to two binary classical states, and lower
//! bounds on the Holevo quantity of a two-state ensemble in terms of the
//! trace distance.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channels::{PositiveMapSpec, Slack};
use crate::entropy::{binary_entropy, clamp_unit, holevo_chi, relative_entropy_spectral, EntropyValue};
use crate::error::{Error, Result};
use crate::hermitian::{ensure_same_dim, CMatrix, DensityMatrix, HermitianMatrix, PsdhMatrix, EPS_EIG_FACTOR};

/// `diag(t, 1 − t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryClassicalState {
    pub t: f64,
}

impl BinaryClassicalState {
    pub fn new(t: f64) -> Result<Self> {
        Ok(Self {
            t: clamp_unit(t, "binary state probability")?,
        })
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_diagonal(&[self.t, 1.0 - self.t]).expect("diag(t, 1-t) is a state")
    }
}

/// The two-outcome measurement onto the positive and non-positive
/// eigenspaces of `ρ₁ − ρ₀`, with `t_j = tr E₊ρ_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryReduction {
    pub e_plus: PsdhMatrix,
    pub e_minus: PsdhMatrix,
    pub t0: f64,
    pub t1: f64,
    /// `‖ρ₁ − ρ₀‖₁`
    pub trace_distance: f64,
}

impl BinaryReduction {
    pub fn measurement(&self) -> PositiveMapSpec {
        PositiveMapSpec::Measurement {
            povm: vec![self.e_plus.clone(), self.e_minus.clone()],
        }
    }
}

/// Eigenvalues of `ρ₁ − ρ₀` within this many units of zero go to `V₋`.
fn pair_eps(rho0: &HermitianMatrix, rho1: &HermitianMatrix) -> f64 {
    rho0.dim() as f64 * rho0.max_abs().max(rho1.max_abs()) * EPS_EIG_FACTOR
}

pub fn distinguishing_measurement(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<BinaryReduction> {
    ensure_same_dim(rho0.dim(), rho1.dim())?;
    let n = rho0.dim();
    if n < 2 {
        return Err(Error::Domain {
            what: "dimension of the state pair",
            value: n as f64,
        });
    }
    let eps = pair_eps(rho0, rho1);
    let diff = rho1.sub(rho0)?.with_eps_eig(eps);
    let trace_distance = diff.trace_norm()?;
    if trace_distance <= eps {
        return Err(Error::StatesEqual);
    }
    let spec = diff.spectrum()?;
    let projector = |v: CMatrix| PsdhMatrix::trusted(HermitianMatrix::hermitianize(&v * v.adjoint()));
    let e_plus = projector(spec.columns_where(|l| l > eps));
    let e_minus = projector(spec.columns_where(|l| l <= eps));
    let t0 = clamp_unit(e_plus.trace_product(rho0)?, "tr E+ rho0")?;
    let t1 = clamp_unit(e_plus.trace_product(rho1)?, "tr E+ rho1")?;
    Ok(BinaryReduction {
        e_plus,
        e_minus,
        t0,
        t1,
        trace_distance,
    })
}

/// `(diag(t₀, 1 − t₀), diag(t₁, 1 − t₁))` from [`distinguishing_measurement`].
pub fn reduce_to_binary(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
) -> Result<(BinaryClassicalState, BinaryClassicalState)> {
    let r = distinguishing_measurement(rho0, rho1)?;
    Ok((BinaryClassicalState::new(r.t0)?, BinaryClassicalState::new(r.t1)?))
}

/// A functional of two states that does not increase under two-outcome
/// measurements. Only the two implementations below are exercised.
pub trait TwoStateDivergence {
    fn evaluate(&self, rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<EntropyValue>;
}

/// `D(ρ₀‖ρ₁)`
#[derive(Clone, Copy, Debug, Default)]
pub struct RelativeEntropyDivergence;

impl TwoStateDivergence for RelativeEntropyDivergence {
    fn evaluate(&self, rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<EntropyValue> {
        relative_entropy_spectral(rho0, rho1)
    }
}

/// `χ(ρ₀, ρ₁; q₀, q₁)`
#[derive(Clone, Copy, Debug)]
pub struct HolevoDivergence {
    pub q0: f64,
    pub q1: f64,
}

impl TwoStateDivergence for HolevoDivergence {
    fn evaluate(&self, rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<EntropyValue> {
        Ok(EntropyValue::finite(holevo_chi(&[rho0, rho1], &[self.q0, self.q1])?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub t0: f64,
    pub t1: f64,
    pub trace_distance: f64,
    /// `|2(t₁ − t₀) − ‖ρ₁ − ρ₀‖₁|`
    pub trace_distance_gap: f64,
    pub original: EntropyValue,
    pub reduced: EntropyValue,
    /// `original − reduced`
    pub slack: Slack,
}

/// Evaluates `div` before and after the binary reduction.
pub fn reduction_check<D: TwoStateDivergence>(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
    div: &D,
) -> Result<ReductionCheck> {
    let r = distinguishing_measurement(rho0, rho1)?;
    let b0 = BinaryClassicalState::new(r.t0)?.to_density();
    let b1 = BinaryClassicalState::new(r.t1)?.to_density();
    let original = div.evaluate(rho0, rho1)?;
    let reduced = div.evaluate(&b0, &b1)?;
    Ok(ReductionCheck {
        t0: r.t0,
        t1: r.t1,
        trace_distance: r.trace_distance,
        trace_distance_gap: (2.0 * (r.t1 - r.t0) - r.trace_distance).abs(),
        slack: Slack::between(&reduced, &original),
        original,
        reduced,
    })
}

fn check_pair_weights(q0: f64, q1: f64) -> Result<(f64, f64)> {
    let q0 = clamp_unit(q0, "weight q0")?;
    let q1 = clamp_unit(q1, "weight q1")?;
    if (q0 + q1 - 1.0).abs() > 1e-12 {
        return Err(Error::Weights(format!("weights sum to {}, not 1", q0 + q1)));
    }
    Ok((q0, q1))
}

fn check_trace_distance(t: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::Domain {
            what: "trace distance",
            value: t,
        });
    }
    Ok(t)
}

/// `I(t₀, t₁; q₀, q₁) = h(q₀t₀ + q₁t₁) − q₀h(t₀) − q₁h(t₁)` in nats.
pub fn mutual_info_binary(t0: f64, t1: f64, q0: f64, q1: f64) -> Result<f64> {
    let (q0, q1) = check_pair_weights(q0, q1)?;
    let t0 = clamp_unit(t0, "t0")?;
    let t1 = clamp_unit(t1, "t1")?;
    let i = binary_entropy(q0 * t0 + q1 * t1)? - q0 * binary_entropy(t0)? - q1 * binary_entropy(t1)?;
    // concavity of h makes I nonnegative; only rounding can push it below
    Ok(i.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiLowerBound {
    pub minimum: f64,
    pub argmin_t0: f64,
}

const COARSE_POINTS: usize = 1024;
const GOLDEN_WIDTH: f64 = 1e-10;

/// Smallest `I(t₀, t₀ + T/2; q₀, q₁)` over `t₀ ∈ [0, 1 − T/2]`.
///
/// Coarse grid of 1024 points, then golden-section search on the two grid
/// cells around the best point.
pub fn chi_lower_bound_min(trace_distance: f64, q0: f64, q1: f64) -> Result<ChiLowerBound> {
    let half = check_trace_distance(trace_distance)? / 2.0;
    let (q0, q1) = check_pair_weights(q0, q1)?;
    let phi = |t0: f64| mutual_info_binary(t0, (t0 + half).min(1.0), q0, q1);
    let len = 1.0 - half;
    if half == 0.0 {
        // t₁ = t₀, so every t₀ attains I = 0
        return Ok(ChiLowerBound {
            minimum: 0.0,
            argmin_t0: 0.0,
        });
    }
    if len <= 0.0 {
        return Ok(ChiLowerBound {
            minimum: phi(0.0)?,
            argmin_t0: 0.0,
        });
    }

    let step = len / (COARSE_POINTS - 1) as f64;
    let mut best = (f64::INFINITY, 0);
    for k in 0..COARSE_POINTS {
        let v = phi(k as f64 * step)?;
        if v < best.0 {
            best = (v, k);
        }
    }
    let mut a = best.1.saturating_sub(1) as f64 * step;
    let mut b = ((best.1 + 1).min(COARSE_POINTS - 1) as f64 * step).min(len);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (phi(c)?, phi(d)?);
    while b - a > GOLDEN_WIDTH {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = phi(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = phi(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let candidates = [(phi(mid)?, mid), (best.0, best.1 as f64 * step)];
    let (minimum, argmin_t0) = candidates
        .into_iter()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("non-empty");
    Ok(ChiLowerBound { minimum, argmin_t0 })
}

/// `4q₀q₁(log 2 − h((2 + T)/4))`.
pub fn explicit_weaker_bound(trace_distance: f64, q0: f64, q1: f64) -> Result<f64> {
    let t = check_trace_distance(trace_distance)?;
    let (q0, q1) = check_pair_weights(q0, q1)?;
    Ok(4.0 * q0 * q1 * (std::f64::consts::LN_2 - binary_entropy((2.0 + t) / 4.0)?))
}

/// `q₀q₁T²/2`.
pub fn kim_bound(trace_distance: f64, q0: f64, q1: f64) -> Result<f64> {
    let t = check_trace_distance(trace_distance)?;
    let (q0, q1) = check_pair_weights(q0, q1)?;
    Ok(q0 * q1 * t * t / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    #[serde(rename = "T")]
    pub trace_distance: f64,
    pub q1: f64,
    pub min_bound: f64,
    pub explicit_bound: f64,
    pub kim_bound: f64,
    pub argmin_t0: f64,
}

impl BoundRow {
    pub fn at(trace_distance: f64, q1: f64) -> Result<Self> {
        let q0 = 1.0 - q1;
        let min = chi_lower_bound_min(trace_distance, q0, q1)?;
        Ok(Self {
            trace_distance,
            q1,
            min_bound: min.minimum,
            explicit_bound: explicit_weaker_bound(trace_distance, q0, q1)?,
            kim_bound: kim_bound(trace_distance, q0, q1)?,
            argmin_t0: min.argmin_t0,
        })
    }
}

/// `k` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..k)
            .map(|i| {
                if i == k - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (k - 1) as f64
                }
            })
            .collect(),
    }
}

/// Rows for `T ∈ linspace(0, 2, k)` (outer) and `q₁ ∈ linspace(0.01, 0.99, l)` (inner).
pub fn bounds_grid(k: usize, l: usize) -> Result<Vec<BoundRow>> {
    if k < 2 || l < 2 {
        return Err(Error::Domain {
            what: "grid size (must be at least 2)",
            value: k.min(l) as f64,
        });
    }
    let qs = linspace(0.01, 0.99, l);
    linspace(0.0, 2.0, k)
        .into_iter()
        .flat_map(|t| qs.iter().map(move |&q| BoundRow::at(t, q)))
        .collect()
}

pub fn write_bounds_csv<W: Write>(rows: &[BoundRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "T,q1,min_bound,explicit_bound,kim_bound,argmin_t0")?;
    for r in rows {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?}",
            r.trace_distance, r.q1, r.min_bound, r.explicit_bound, r.kim_bound, r.argmin_t0
        )?;
    }
    Ok(())
}

/// States `ρ_j = t_j σ⁺/tr σ⁺ + (1 − t_j) σ⁻/tr σ⁻` on a line through `|σ|`,
/// for which the binary reduction loses nothing.
pub fn collinear_pair(sigma: &HermitianMatrix, t0: f64, t1: f64) -> Result<(DensityMatrix, DensityMatrix)> {
    let plus = sigma.positive_part()?;
    let minus = sigma.negative_part()?;
    let (tp, tm) = (plus.trace(), minus.trace());
    if tp <= 0.0 || tm <= 0.0 {
        return Err(Error::Domain {
            what: "sigma must have both signs",
            value: tp.min(tm),
        });
    }
    let make = |t: f64| -> Result<DensityMatrix> {
        let t = clamp_unit(t, "collinear pair probability")?;
        let h = plus.combine(t / tp, &minus, (1.0 - t) / tm)?;
        DensityMatrix::new(PsdhMatrix::trusted(h))
    };
    Ok((make(t0)?, make(t1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::apply_map;
    use crate::random::{random_density_with, random_hermitian, rng_from_seed};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    const MIN_AT_ONE: f64 = 0.130812035941137;

    fn d(x: &[f64]) -> DensityMatrix {
        DensityMatrix::from_diagonal(x).unwrap()
    }

    #[test]
    fn orthogonal_pure_states() {
        let r = distinguishing_measurement(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap();
        assert_eq!((r.t0, r.t1), (0.0, 1.0));
        assert_abs_diff_eq!(r.trace_distance, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.e_plus.matrix()[(1, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.e_plus.matrix()[(0, 0)].re, 0.0, epsilon = 1e-15);

        let c = reduction_check(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), &RelativeEntropyDivergence).unwrap();
        assert!(!c.original.finite && !c.reduced.finite);
        assert_eq!(c.slack, Slack::InfiniteRhs);
    }

    #[test]
    fn diagonal_pair() {
        let r = distinguishing_measurement(&d(&[0.6, 0.4]), &d(&[0.4, 0.6])).unwrap();
        assert_abs_diff_eq!(r.t0, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(r.t1, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(r.trace_distance, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(r.e_plus.matrix()[(1, 1)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn commuting_coarse_graining() {
        // ρ1 − ρ0 = diag(0.1, -0.2, 0.1, 0): V+ = span(e0, e2), the zero goes to V-
        let (b0, b1) = reduce_to_binary(&d(&[0.2, 0.5, 0.1, 0.2]), &d(&[0.3, 0.3, 0.2, 0.2])).unwrap();
        assert_abs_diff_eq!(b0.t, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(b1.t, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn equal_states_rejected() {
        assert!(matches!(
            distinguishing_measurement(&d(&[0.5, 0.5]), &d(&[0.5, 0.5])),
            Err(Error::StatesEqual)
        ));
    }

    #[test]
    fn trace_norm_preserved_and_projectors_complementary() {
        let mut rng = rng_from_seed(40);
        for _ in 0..20 {
            let r0 = random_density_with(&mut rng, 2, 2).unwrap();
            let r1 = random_density_with(&mut rng, 2, 2).unwrap();
            let red = distinguishing_measurement(&r0, &r1).unwrap();
            let m = red.measurement();
            let diff = apply_map(&m, &r1).unwrap().sub(&apply_map(&m, &r0).unwrap()).unwrap();
            assert_abs_diff_eq!(diff.trace_norm().unwrap(), red.trace_distance, epsilon = 1e-12);
            let sum = red.e_plus.matrix() + red.e_minus.matrix();
            assert!(crate::hermitian::max_abs(&(sum - CMatrix::identity(2, 2))) < 1e-12);
            assert!(crate::hermitian::max_abs(&(red.e_plus.matrix() * red.e_minus.matrix())) < 1e-12);
        }
    }

    #[test]
    fn random_reductions_do_not_increase() {
        let mut rng = rng_from_seed(41);
        for _ in 0..10 {
            let r0 = random_density_with(&mut rng, 4, 4).unwrap();
            let r1 = random_density_with(&mut rng, 4, 4).unwrap();
            let dc = reduction_check(&r0, &r1, &RelativeEntropyDivergence).unwrap();
            assert!(dc.slack.satisfied(1e-8), "{dc:?}");
            assert!(dc.trace_distance_gap <= 1e-10);
            let hc = reduction_check(&r0, &r1, &HolevoDivergence { q0: 0.3, q1: 0.7 }).unwrap();
            assert!(hc.slack.satisfied(1e-8), "{hc:?}");
            // the measured Holevo quantity is the binary mutual information
            assert_abs_diff_eq!(
                hc.reduced.value,
                mutual_info_binary(hc.t0, hc.t1, 0.3, 0.7).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn collinear_pairs_are_equality_cases() {
        let mut rng = rng_from_seed(42);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 3);
            let h = h.add_identity(-h.trace() / 3.0);
            let sigma = h.scale(1.0 / h.trace_norm().unwrap());
            let (r0, r1) = collinear_pair(&sigma, 0.2, 0.7).unwrap();
            let c = reduction_check(&r0, &r1, &RelativeEntropyDivergence).unwrap();
            assert_abs_diff_eq!(c.t0, 0.2, epsilon = 1e-12);
            assert_abs_diff_eq!(c.t1, 0.7, epsilon = 1e-12);
            assert_abs_diff_eq!(c.slack.value().unwrap(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn mutual_information_examples() {
        assert_abs_diff_eq!(mutual_info_binary(0.3, 0.3, 0.4, 0.6).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mutual_info_binary(0.0, 1.0, 0.5, 0.5).unwrap(), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            mutual_info_binary(0.25, 0.75, 0.5, 0.5).unwrap(),
            MIN_AT_ONE,
            epsilon = 1e-12
        );
        assert!(mutual_info_binary(0.2, 0.3, 0.5, 0.6).is_err());
        assert!(mutual_info_binary(1.2, 0.3, 0.5, 0.5).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert_abs_diff_eq!(
            chi_lower_bound_min(0.0, 0.3, 0.7).unwrap().minimum,
            0.0,
            epsilon = 1e-15
        );
        let m = chi_lower_bound_min(1.0, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(m.minimum, MIN_AT_ONE, epsilon = 1e-12);
        assert_abs_diff_eq!(m.argmin_t0, 0.25, epsilon = 1e-6);
        let m = chi_lower_bound_min(2.0, 0.3, 0.7).unwrap();
        assert_abs_diff_eq!(m.minimum, binary_entropy(0.7).unwrap(), epsilon = 1e-15);
        assert_eq!(m.argmin_t0, 0.0);
    }

    #[test]
    fn explicit_and_kim_examples() {
        assert_abs_diff_eq!(explicit_weaker_bound(0.0, 0.5, 0.5).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            explicit_weaker_bound(1.0, 0.5, 0.5).unwrap(),
            MIN_AT_ONE,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(explicit_weaker_bound(2.0, 0.5, 0.5).unwrap(), LN_2, epsilon = 1e-15);
        assert_eq!(kim_bound(0.0, 0.5, 0.5).unwrap(), 0.0);
        assert_eq!(kim_bound(1.0, 0.5, 0.5).unwrap(), 0.125);
        assert_eq!(kim_bound(2.0, 0.5, 0.5).unwrap(), 0.5);
        assert!(kim_bound(2.5, 0.5, 0.5).is_err());
        assert!(explicit_weaker_bound(-0.1, 0.5, 0.5).is_err());
    }

    #[test]
    fn bound_ordering_on_small_grid() {
        for r in bounds_grid(11, 9).unwrap() {
            assert!(r.min_bound >= r.explicit_bound - 1e-10, "{r:?}");
            assert!(r.explicit_bound >= r.kim_bound - 1e-10, "{r:?}");
        }
    }

    #[test]
    fn csv_shape() {
        let rows = bounds_grid(3, 3).unwrap();
        let mut buf = Vec::new();
        write_bounds_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with("T,q1,min_bound,explicit_bound,kim_bound,argmin_t0\n"));
        assert!(bounds_grid(1, 3).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.01, 0.99, 3);
        assert_eq!(v, vec![0.01, 0.5, 0.99]);
    }
}
