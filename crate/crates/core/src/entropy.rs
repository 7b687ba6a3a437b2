//! Spectral entropy formulas. These are the reference values the integral
//! representations in [`crate::qre`] are checked against.
//!
//! All quantities are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{ensure_same_dim, support_contained, HermitianMatrix, PsdhMatrix};

/// A value in nats that may be `+∞` for relative-entropy-type quantities.
///
/// The infinite case is a tag, never an `f64::INFINITY`, so slack
/// arithmetic never sees `∞ − ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub finite: bool,
}

impl EntropyValue {
    pub fn finite(value: f64) -> Self {
        Self { value, finite: true }
    }

    pub fn infinite() -> Self {
        Self {
            value: 0.0,
            finite: false,
        }
    }

    pub fn as_option(&self) -> Option<f64> {
        self.finite.then_some(self.value)
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// `self ≤ other + slack`, with `+∞` handled by tag.
    pub fn le_within(&self, other: &EntropyValue, slack: f64) -> bool {
        match (self.as_option(), other.as_option()) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b + slack,
        }
    }
}

/// `x log x` with `0 log 0 = 0`.
fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// `S(ρ) = −tr ρ log ρ` for psdh `ρ` of any trace.
pub fn von_neumann_entropy(rho: &PsdhMatrix) -> Result<f64> {
    Ok(-rho.clamped_eigenvalues()?.into_iter().map(xlogx).sum::<f64>())
}

/// Entropy of a Hermitian matrix already known to be psdh up to clamping.
pub(crate) fn entropy_of_hermitian(a: &HermitianMatrix) -> Result<f64> {
    Ok(-a.clamped_eigenvalues()?.into_iter().map(xlogx).sum::<f64>())
}

/// Umegaki relative entropy `tr ρ(log ρ − log σ)`, `+∞` unless `im ρ ⊆ im σ`.
///
/// `log σ` is only formed on the support of `σ`; eigenvalues of `ρ` at or
/// below `eps_eig` contribute nothing to `tr ρ log ρ`.
pub fn relative_entropy_spectral(rho: &PsdhMatrix, sigma: &PsdhMatrix) -> Result<EntropyValue> {
    ensure_same_dim(rho.dim(), sigma.dim())?;
    if !support_contained(rho, sigma)? {
        return Ok(EntropyValue::infinite());
    }
    let rho_log_rho: f64 = rho.clamped_eigenvalues()?.into_iter().map(xlogx).sum();

    let eps = sigma.eps_eig();
    let spec = sigma.spectrum()?;
    let r = rho.matrix();
    let mut rho_log_sigma = 0.0;
    for (j, &mu) in spec.eigenvalues.iter().enumerate() {
        if mu <= eps {
            continue;
        }
        let v = spec.eigenvectors.column(j);
        // ⟨v|ρ|v⟩
        let w = (v.adjoint() * r * v)[(0, 0)].re;
        rho_log_sigma += w * mu.ln();
    }
    Ok(EntropyValue::finite(rho_log_rho - rho_log_sigma))
}

/// `h(x) = −x log x − (1−x) log(1−x)`; inputs within `1e-12` of `[0, 1]` are clamped.
pub fn binary_entropy(x: f64) -> Result<f64> {
    let x = clamp_unit(x, "binary entropy argument")?;
    Ok(-xlogx(x) - xlogx(1.0 - x))
}

pub(crate) fn clamp_unit(x: f64, what: &'static str) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&x) || x.is_nan() {
        return Err(Error::Domain { what, value: x });
    }
    Ok(x.clamp(0.0, 1.0))
}

pub(crate) fn check_weights(weights: &[f64], positive: bool) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Weights("no weights given".into()));
    }
    if let Some(&w) = weights
        .iter()
        .find(|&&w| !w.is_finite() || w < 0.0 || (positive && w == 0.0))
    {
        return Err(Error::Weights(format!("weight {w} is not positive")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Weights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Mixture `Σ q_j ρ_j`.
pub(crate) fn mixture(states: &[&HermitianMatrix], weights: &[f64]) -> Result<HermitianMatrix> {
    let n = states[0].dim();
    let mut acc = HermitianMatrix::zeros(n);
    for (s, &q) in states.iter().zip(weights) {
        acc = acc.combine(1.0, s, q)?;
    }
    Ok(acc)
}

/// Holevo quantity `χ = S(Σ q_j ρ_j) − Σ q_j S(ρ_j)`.
pub fn holevo_chi<S: AsRef<PsdhMatrix>>(states: &[S], weights: &[f64]) -> Result<f64> {
    if states.len() != weights.len() {
        return Err(Error::Weights(format!(
            "{} states but {} weights",
            states.len(),
            weights.len()
        )));
    }
    check_weights(weights, true)?;
    let n = states[0].as_ref().dim();
    for s in states {
        ensure_same_dim(n, s.as_ref().dim())?;
    }
    let hs: Vec<&HermitianMatrix> = states.iter().map(|s| s.as_ref().hermitian()).collect();
    let mix = mixture(&hs, weights)?;
    let mut chi = entropy_of_hermitian(&mix)?;
    for (s, &q) in states.iter().zip(weights) {
        chi -= q * von_neumann_entropy(s.as_ref())?;
    }
    Ok(chi)
}

impl AsRef<PsdhMatrix> for PsdhMatrix {
    fn as_ref(&self) -> &PsdhMatrix {
        self
    }
}

impl AsRef<PsdhMatrix> for crate::hermitian::DensityMatrix {
    fn as_ref(&self) -> &PsdhMatrix {
        self.psdh()
    }
}
