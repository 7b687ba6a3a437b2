//! Integral representations driven by the negative spectral mass of a pencil.
//!
//! Relative entropy, for psdh `ρ`, `σ` with `im ρ ⊆ im σ` and
//! `A(t) = (1 − t)ρ + tσ`:
//!
//! ```text
//! D(ρ‖σ) = tr(ρ − σ) + ∫_ℝ tr⁻A(t) / (|t|(t − 1)²) dt                     (form one)
//!        = ∫_{−∞}^0 (tr⁺A(t) − tr ρ) / (|t|(t − 1)²) dt
//!          + ∫_0^∞ tr⁻A(t) / (|t|(t − 1)²) dt                              (form two)
//! ```
//!
//! Directional derivatives of von Neumann entropy, for `im σ ⊆ im ρ`, `m ≥ 2`:
//!
//! ```text
//! −S(ρ + tσ)^{(m)}(0) / m! = ∫_ℝ tr⁻(ρ + tσ) / (|t| tᵐ) dt
//! ```
//!
//! Inside the positivity window of the pencil `tr⁻` vanishes, so the
//! integrands are set to exactly zero there without an eigensolve.

use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_of_hermitian, EntropyValue};
use crate::error::{Error, Result};
use crate::hermitian::{ensure_same_dim, support_contained, HermitianMatrix, PsdhMatrix};
use crate::pencil::{Pencil, PositivityWindow};
use crate::quadrature::{integrate, QuadConfig, QuadResult};

/// Largest derivative order accepted (`m!` must fit in a `u64`).
pub const MAX_ORDER: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralForm {
    /// `tr(ρ − σ)` plus the full-line integral of `tr⁻A(t)`.
    FormOne,
    /// Split form with `tr⁺A(t) − tr ρ` on the negative half-line.
    FormTwo,
}

/// `1/(|t|(t − 1)²)`
fn affine_weight(t: f64) -> f64 {
    let s = t - 1.0;
    1.0 / (t.abs() * s * s)
}

/// Restricts `ρ` and `σ` to the support of `σ`.
fn restrict_to_support_of_sigma(rho: &PsdhMatrix, sigma: &PsdhMatrix) -> Result<Option<(PsdhMatrix, PsdhMatrix)>> {
    let basis = sigma.support_basis()?;
    if basis.ncols() == 0 {
        return Ok(None);
    }
    if basis.ncols() == sigma.dim() {
        return Ok(Some((rho.clone(), sigma.clone())));
    }
    Ok(Some((
        PsdhMatrix::trusted(rho.compress(&basis)),
        PsdhMatrix::trusted(sigma.compress(&basis)),
    )))
}

fn finish(result: QuadResult) -> Result<QuadResult> {
    if !result.converged {
        return Err(Error::QuadNotConverged(Box::new(result)));
    }
    Ok(result)
}

/// `D(ρ‖σ)` through the pencil integral. `+∞` is returned without
/// integrating when `im ρ ⊄ im σ`.
pub fn relative_entropy_integral(
    rho: &PsdhMatrix,
    sigma: &PsdhMatrix,
    form: IntegralForm,
    qcfg: &QuadConfig,
) -> Result<(EntropyValue, QuadResult)> {
    ensure_same_dim(rho.dim(), sigma.dim())?;
    if !support_contained(rho, sigma)? {
        return Ok((EntropyValue::infinite(), QuadResult::zero()));
    }
    let Some((rho, sigma)) = restrict_to_support_of_sigma(rho, sigma)? else {
        // σ = 0 forces ρ = 0
        return Ok((EntropyValue::finite(0.0), QuadResult::zero()));
    };
    let trace_gap = rho.trace() - sigma.trace();
    let pencil = Pencil::affine(rho, sigma)?;
    let window = pencil.positivity_window()?;

    let tr_neg_term = |t: f64| -> f64 {
        if window.contains(t) {
            return 0.0;
        }
        match pencil.tr_neg_at(t) {
            Ok(v) => v * affine_weight(t),
            Err(_) => f64::NAN,
        }
    };

    match form {
        IntegralForm::FormOne => {
            let mut bps = kinks(&pencil, &window, f64::NEG_INFINITY, f64::INFINITY)?;
            bps.extend([0.0, 1.0]);
            let r = integrate(tr_neg_term, f64::NEG_INFINITY, f64::INFINITY, &bps, qcfg)?;
            let r = finish(r)?;
            Ok((EntropyValue::finite(trace_gap + r.value), r))
        }
        IntegralForm::FormTwo => {
            let pos_deficit_term = |t: f64| -> f64 {
                if window.contains(t) {
                    // tr⁺A(t) = tr A(t) here, so the deficit is |t|·tr(ρ − σ)
                    let s = t - 1.0;
                    return trace_gap / (s * s);
                }
                match pencil.tr_pos_deficit_at(t) {
                    Ok(v) => v * affine_weight(t),
                    Err(_) => f64::NAN,
                }
            };
            let neg_bps = kinks(&pencil, &window, f64::NEG_INFINITY, 0.0)?;
            let neg = integrate(pos_deficit_term, f64::NEG_INFINITY, 0.0, &neg_bps, qcfg)?;
            let mut pos_bps = kinks(&pencil, &window, 0.0, f64::INFINITY)?;
            if !pos_bps.contains(&1.0) {
                pos_bps.push(1.0);
            }
            let pos = integrate(tr_neg_term, 0.0, f64::INFINITY, &pos_bps, qcfg)?;
            let r = finish(neg.merge(&pos))?;
            Ok((EntropyValue::finite(r.value), r))
        }
    }
}

/// Breakpoints strictly inside `(lo, hi)`: the window edges plus every
/// eigenvalue sign change of the pencil. The error estimate of the
/// Gauss-Kronrod rule is unreliable across a kink, so each one gets its own
/// segment edge.
fn kinks(pencil: &Pencil, window: &PositivityWindow, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let mut out = window.finite_edges();
    out.extend(pencil.crossings()?);
    out.retain(|&t| t > lo && t < hi && !window.contains(t));
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// `m!` in exact integer arithmetic.
pub fn factorial(m: u32) -> Result<u64> {
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m));
    }
    Ok((1..=m as u64).product())
}

fn check_order(m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::OrderTooSmall(m));
    }
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m));
    }
    Ok(())
}

/// Ray pencil restricted to the support of `ρ`, or `None` when `ρ = 0`.
fn restricted_ray(rho: &PsdhMatrix, sigma: &HermitianMatrix) -> Result<Option<Pencil>> {
    ensure_same_dim(rho.dim(), sigma.dim())?;
    let abs_sigma = PsdhMatrix::trusted(sigma.abs()?);
    if !support_contained(&abs_sigma, rho)? {
        return Err(Error::SupportViolation);
    }
    let basis = rho.support_basis()?;
    if basis.ncols() == 0 {
        return Ok(None);
    }
    let (r, s) = if basis.ncols() == rho.dim() {
        (rho.clone(), sigma.clone())
    } else {
        (PsdhMatrix::trusted(rho.compress(&basis)), sigma.compress(&basis))
    };
    Pencil::ray(r, s).map(Some)
}

/// `∫ tr⁻(ρ + tσ)/(|t| tᵐ) dt`, which equals `−S(ρ + tσ)^{(m)}(0)/m!`.
pub fn entropy_derivative_integral(
    rho: &PsdhMatrix,
    sigma: &HermitianMatrix,
    m: u32,
    qcfg: &QuadConfig,
) -> Result<(f64, QuadResult)> {
    check_order(m)?;
    let Some(pencil) = restricted_ray(rho, sigma)? else {
        return Ok((0.0, QuadResult::zero()));
    };
    let window = pencil.positivity_window()?;
    let term = |t: f64| -> f64 {
        if window.contains(t) {
            return 0.0;
        }
        match pencil.tr_neg_at(t) {
            Ok(v) => v / (t.abs() * t.powi(m as i32)),
            Err(_) => f64::NAN,
        }
    };
    let mut total = QuadResult::zero();
    if window.t_lo.is_finite() {
        let bps = kinks(&pencil, &window, f64::NEG_INFINITY, window.t_lo)?;
        total = total.merge(&integrate(term, f64::NEG_INFINITY, window.t_lo, &bps, qcfg)?);
    }
    if window.t_hi.is_finite() {
        let bps = kinks(&pencil, &window, window.t_hi, f64::INFINITY)?;
        total = total.merge(&integrate(term, window.t_hi, f64::INFINITY, &bps, qcfg)?);
    }
    let total = finish(total)?;
    Ok((total.value, total))
}

/// Converts the integral value into `S(ρ + tσ)^{(m)}(0)`.
pub fn derivative_from_integral(value: f64, m: u32) -> Result<f64> {
    Ok(-(factorial(m)? as f64) * value)
}

/// `min(1e-3, 0.1 × radius)` for the stencil of [`entropy_derivative_fd`].
pub fn default_fd_step(window: &PositivityWindow) -> f64 {
    (0.1 * window.radius()).min(1e-3)
}

/// Window of the ray pencil `ρ + tσ` restricted to the support of `ρ`.
pub fn ray_window(rho: &PsdhMatrix, sigma: &HermitianMatrix) -> Result<PositivityWindow> {
    match restricted_ray(rho, sigma)? {
        Some(p) => p.positivity_window(),
        None => Ok(PositivityWindow {
            t_lo: f64::NEG_INFINITY,
            t_hi: f64::INFINITY,
        }),
    }
}

/// Central-difference weights `(offset, weight)` for the m-th derivative,
/// second-order accurate. Even `m` uses `δᵐ`, odd `m` the averaged `μδᵐ`.
pub fn central_difference_weights(m: u32) -> Vec<(i64, f64)> {
    let m_i = m as i64;
    let mut binom = vec![1.0f64; m as usize + 1];
    for i in 1..=m as usize {
        binom[i] = binom[i - 1] * (m as usize + 1 - i) as f64 / i as f64;
    }
    let mut acc: std::collections::BTreeMap<i64, f64> = Default::default();
    for (i, &c) in binom.iter().enumerate() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let i = i as i64;
        if m.is_multiple_of(2) {
            *acc.entry(m_i / 2 - i).or_default() += sign * c;
        } else {
            // offsets (m/2 − i ± 1/2), integers for odd m
            *acc.entry((m_i + 1) / 2 - i).or_default() += 0.5 * sign * c;
            *acc.entry((m_i - 1) / 2 - i).or_default() += 0.5 * sign * c;
        }
    }
    acc.into_iter().filter(|&(_, w)| w != 0.0).collect()
}

/// m-th derivative of `t ↦ S(ρ + tσ)` at 0 by central differences with one
/// Richardson level (steps `h` and `h/2`).
pub fn entropy_derivative_fd(rho: &PsdhMatrix, sigma: &HermitianMatrix, m: u32, step: f64) -> Result<f64> {
    check_order(m)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain {
            what: "finite-difference step must be positive",
            value: step,
        });
    }
    let Some(pencil) = restricted_ray(rho, sigma)? else {
        return Ok(0.0);
    };
    let window = pencil.positivity_window()?;
    let weights = central_difference_weights(m);
    let reach = weights.iter().map(|&(k, _)| k.unsigned_abs()).max().unwrap_or(0) as f64 * step;
    if !(reach < window.t_hi && -reach > window.t_lo) {
        return Err(Error::StencilOutOfWindow {
            reach,
            lo: window.t_lo,
            hi: window.t_hi,
        });
    }
    let difference = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &(k, w) in &weights {
            acc += w * entropy_of_hermitian(&pencil.eval(k as f64 * h))?;
        }
        Ok(acc / h.powi(m as i32))
    };
    let coarse = difference(step)?;
    let fine = difference(0.5 * step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn p(d: &[f64]) -> PsdhMatrix {
        PsdhMatrix::from_diagonal(d).unwrap()
    }

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn equal_states_give_zero() {
        let rho = crate::random::random_density(3, 3, 2).unwrap();
        for form in [IntegralForm::FormOne, IntegralForm::FormTwo] {
            let (d, _) = relative_entropy_integral(&rho, &rho, form, &cfg()).unwrap();
            assert_abs_diff_eq!(d.value, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn qubit_anchor_is_log_two() {
        for form in [IntegralForm::FormOne, IntegralForm::FormTwo] {
            let (d, r) = relative_entropy_integral(&p(&[1.0, 0.0]), &p(&[0.5, 0.5]), form, &cfg()).unwrap();
            assert!(r.converged);
            assert_abs_diff_eq!(d.value, LN_2, epsilon = 1e-8);
        }
    }

    #[test]
    fn infinite_without_integration() {
        let (d, r) =
            relative_entropy_integral(&p(&[0.5, 0.5]), &p(&[1.0, 0.0]), IntegralForm::FormOne, &cfg()).unwrap();
        assert!(!d.is_finite());
        assert_eq!(r.evaluations, 0);
    }

    #[test]
    fn rank_deficient_sigma_restricts_to_support() {
        // classical: KL((0.3, 0.7, 0), (0.5, 0.5, 0))
        let expected = 0.3 * (0.3f64 / 0.5).ln() + 0.7 * (0.7f64 / 0.5).ln();
        for form in [IntegralForm::FormOne, IntegralForm::FormTwo] {
            let (d, _) = relative_entropy_integral(&p(&[0.3, 0.7, 0.0]), &p(&[0.5, 0.5, 0.0]), form, &cfg()).unwrap();
            assert_abs_diff_eq!(d.value, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn non_normalized_inputs() {
        // D(2ρ‖σ) for commuting ρ, σ: Σ 2p log(2p/q)
        let (a, b): ([f64; 2], [f64; 2]) = ([0.2, 0.8], [0.6, 0.4]);
        let expected: f64 = (0..2).map(|i| 2.0 * a[i] * (2.0 * a[i] / b[i]).ln()).sum();
        for form in [IntegralForm::FormOne, IntegralForm::FormTwo] {
            let (d, _) = relative_entropy_integral(&p(&[0.4, 1.6]), &p(&b), form, &cfg()).unwrap();
            assert_abs_diff_eq!(d.value, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn derivative_qubit_example() {
        let rho = p(&[0.5, 0.5]);
        let sigma = HermitianMatrix::from_diagonal(&[0.5, -0.5]).unwrap();
        let (v, _) = entropy_derivative_integral(&rho, &sigma, 2, &cfg()).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-9);
        let fd = entropy_derivative_fd(&rho, &sigma, 2, 1e-3).unwrap();
        assert_abs_diff_eq!(fd, -1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(derivative_from_integral(v, 2).unwrap(), -1.0, epsilon = 1e-8);
    }

    #[test]
    fn derivative_of_zero_direction() {
        let rho = p(&[0.3, 0.7]);
        let zero = HermitianMatrix::zeros(2);
        assert_eq!(entropy_derivative_integral(&rho, &zero, 2, &cfg()).unwrap().0, 0.0);
        assert_abs_diff_eq!(
            entropy_derivative_fd(&rho, &zero, 2, 1e-3).unwrap(),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn derivative_order_limits() {
        let rho = p(&[0.3, 0.7]);
        let s = HermitianMatrix::from_diagonal(&[0.1, -0.1]).unwrap();
        assert!(matches!(
            entropy_derivative_integral(&rho, &s, 21, &cfg()),
            Err(Error::OrderTooLarge(21))
        ));
        assert!(matches!(
            entropy_derivative_integral(&rho, &s, 1, &cfg()),
            Err(Error::OrderTooSmall(1))
        ));
        assert_eq!(factorial(20).unwrap(), 2_432_902_008_176_640_000);
        assert!(factorial(21).is_err());
    }

    #[test]
    fn derivative_support_violation() {
        let rho = p(&[1.0, 0.0]);
        let s = HermitianMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            entropy_derivative_integral(&rho, &s, 2, &cfg()),
            Err(Error::SupportViolation)
        ));
        assert!(matches!(
            entropy_derivative_fd(&rho, &s, 2, 1e-3),
            Err(Error::SupportViolation)
        ));
    }

    #[test]
    fn derivative_on_singular_rho_uses_support() {
        // ρ = diag(½, ½, 0), σ = diag(½, −½, 0): same as the qubit example
        let rho = p(&[0.5, 0.5, 0.0]);
        let sigma = HermitianMatrix::from_diagonal(&[0.5, -0.5, 0.0]).unwrap();
        let (v, _) = entropy_derivative_integral(&rho, &sigma, 2, &cfg()).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn stencil_must_fit_window() {
        let rho = p(&[0.5, 0.5]);
        let sigma = HermitianMatrix::from_diagonal(&[0.5, -0.5]).unwrap();
        assert!(matches!(
            entropy_derivative_fd(&rho, &sigma, 3, 0.6),
            Err(Error::StencilOutOfWindow { .. })
        ));
        assert!(entropy_derivative_fd(&rho, &sigma, 2, -1.0).is_err());
    }

    #[test]
    fn stencil_weights() {
        assert_eq!(central_difference_weights(2), vec![(-1, 1.0), (0, -2.0), (1, 1.0)]);
        assert_eq!(
            central_difference_weights(3),
            vec![(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)]
        );
        assert_eq!(
            central_difference_weights(4),
            vec![(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)]
        );
        // weights annihilate polynomials of degree < m and reproduce m! on tᵐ
        for m in 2..=6u32 {
            let w = central_difference_weights(m);
            for d in 0..=m {
                let s: f64 = w.iter().map(|&(k, c)| c * (k as f64).powi(d as i32)).sum();
                let expected = if d == m { factorial(m).unwrap() as f64 } else { 0.0 };
                assert_abs_diff_eq!(s, expected, epsilon = 1e-9);
            }
        }
    }
}
