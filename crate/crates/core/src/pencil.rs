//! Linear matrix pencils through a positive semi-definite `ρ`.
//!
//! * affine: `A(t) = (1 − t)ρ + tσ` with `σ ≥ 0`, so `A(0) = ρ`, `A(1) = σ`;
//! * ray: `R(t) = ρ + tσ` with `σ` Hermitian and `im σ ⊆ im ρ`.
//!
//! The set of `t` where the pencil is positive semi-definite is an interval
//! containing zero (the psd cone is convex and the pencil is affine in `t`),
//! which is what makes the bisection in [`Pencil::positivity_window`] valid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{ensure_same_dim, support_contained, HermitianMatrix, PsdhMatrix};

/// Beyond this `|t|` the window is declared infinite.
pub const WINDOW_CAP: f64 = (1u64 << 60) as f64;
const WINDOW_FLOOR: f64 = 1.0 / WINDOW_CAP;
const WINDOW_REL_WIDTH: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PencilForm {
    Affine,
    Ray,
}

#[derive(Clone, Debug)]
pub struct Pencil {
    rho: PsdhMatrix,
    sigma: HermitianMatrix,
    form: PencilForm,
}

/// Interval `(t_lo, t_hi)` around zero on which the pencil is psd.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl PositivityWindow {
    pub fn contains(&self, t: f64) -> bool {
        t > self.t_lo && t < self.t_hi
    }

    /// Distance from zero to the nearer edge.
    pub fn radius(&self) -> f64 {
        (-self.t_lo).min(self.t_hi)
    }

    /// Finite window edges other than zero.
    pub fn finite_edges(&self) -> Vec<f64> {
        [self.t_lo, self.t_hi]
            .into_iter()
            .filter(|t| t.is_finite() && *t != 0.0)
            .collect()
    }
}

impl Pencil {
    pub fn affine(rho: PsdhMatrix, sigma: PsdhMatrix) -> Result<Self> {
        ensure_same_dim(rho.dim(), sigma.dim())?;
        Ok(Self {
            rho,
            sigma: sigma.into_hermitian(),
            form: PencilForm::Affine,
        })
    }

    /// Requires `im σ ⊆ im ρ`, tested as `im |σ| ⊆ im ρ`.
    pub fn ray(rho: PsdhMatrix, sigma: HermitianMatrix) -> Result<Self> {
        ensure_same_dim(rho.dim(), sigma.dim())?;
        let abs_sigma = PsdhMatrix::trusted(sigma.abs()?);
        if !support_contained(&abs_sigma, &rho)? {
            return Err(Error::SupportViolation);
        }
        Ok(Self {
            rho,
            sigma,
            form: PencilForm::Ray,
        })
    }

    pub fn rho(&self) -> &PsdhMatrix {
        &self.rho
    }

    pub fn sigma(&self) -> &HermitianMatrix {
        &self.sigma
    }

    pub fn form(&self) -> PencilForm {
        self.form
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn eval(&self, t: f64) -> HermitianMatrix {
        let (a, b) = match self.form {
            PencilForm::Affine => (1.0 - t, t),
            PencilForm::Ray => (1.0, t),
        };
        HermitianMatrix::hermitianize(self.rho.matrix().scale(a) + self.sigma.matrix().scale(b))
    }

    /// `tr⁻` of the pencil at `t`.
    pub fn tr_neg_at(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t).tr_signed()?.minus)
    }

    /// `tr⁺A(t) − tr ρ` (affine form only).
    pub fn tr_pos_deficit_at(&self, t: f64) -> Result<f64> {
        if self.form != PencilForm::Affine {
            return Err(Error::MalformedSpec(
                "tr_pos_deficit_at is defined for the affine pencil".into(),
            ));
        }
        Ok(self.eval(t).tr_signed()?.plus - self.rho.trace())
    }

    /// Psd test used by the window search: `λ_min ≥ −eps_eig`.
    pub fn is_psd_at(&self, t: f64) -> Result<bool> {
        let a = self.eval(t);
        Ok(a.min_eigenvalue()? >= -a.eps_eig())
    }

    /// Maximal interval around zero where the pencil stays psd, found by
    /// doubling to bracket each edge and bisecting to relative width 1e-12.
    /// Edges beyond `2⁶⁰` are reported as infinite.
    pub fn positivity_window(&self) -> Result<PositivityWindow> {
        Ok(PositivityWindow {
            t_lo: -self.window_edge(-1.0)?,
            t_hi: self.window_edge(1.0)?,
        })
    }

    /// All real `t` where the pencil becomes singular, ascending.
    ///
    /// These are the points where an eigenvalue changes sign, i.e. the
    /// kinks of `t ↦ tr⁻`. They come from a congruence with a positive
    /// definite end of the pencil: for `σ > 0` the affine pencil is
    /// `σ^{1/2}((1 − t)M + t)σ^{1/2}` with `M = σ^{-1/2}ρσ^{-1/2}`, singular at
    /// `t = μ/(μ − 1)`; for `ρ > 0` the direction `N = ρ^{-1/2}(σ − ρ)ρ^{-1/2}`
    /// (affine) or `ρ^{-1/2}σρ^{-1/2}` (ray) gives `t = −1/ν`. If neither end is
    /// definite the list is empty.
    pub fn crossings(&self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        let definite = |h: &HermitianMatrix| -> Result<bool> { Ok(h.min_eigenvalue()? > h.eps_eig()) };
        if self.form == PencilForm::Affine && definite(&self.sigma)? {
            let s = self.sigma.spectrum()?.map_eigenvalues(|l| 1.0 / l.sqrt());
            let m = HermitianMatrix::hermitianize(&s * self.rho.matrix() * &s);
            for &mu in &m.spectrum()?.eigenvalues {
                if (mu - 1.0).abs() > f64::EPSILON {
                    out.push(mu / (mu - 1.0));
                }
            }
        } else if definite(&self.rho)? {
            let r = self.rho.spectrum()?.map_eigenvalues(|l| 1.0 / l.sqrt());
            let direction = match self.form {
                PencilForm::Affine => self.sigma.matrix() - self.rho.matrix(),
                PencilForm::Ray => self.sigma.matrix().clone(),
            };
            let n = HermitianMatrix::hermitianize(&r * direction * &r);
            let eps = n.eps_eig().max(f64::EPSILON);
            for &nu in &n.spectrum()?.eigenvalues {
                if nu.abs() > eps {
                    out.push(-1.0 / nu);
                }
            }
        }
        out.retain(|t| t.is_finite() && t.abs() <= WINDOW_CAP);
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    fn window_edge(&self, dir: f64) -> Result<f64> {
        let ok = |s: f64| self.is_psd_at(dir * s);
        let mut s = 1.0;
        let (mut good, mut bad);
        if ok(s)? {
            good = s;
            loop {
                s *= 2.0;
                if s > WINDOW_CAP {
                    return Ok(f64::INFINITY);
                }
                if ok(s)? {
                    good = s;
                } else {
                    bad = s;
                    break;
                }
            }
        } else {
            bad = s;
            loop {
                s *= 0.5;
                if s < WINDOW_FLOOR {
                    return Ok(0.0);
                }
                if ok(s)? {
                    good = s;
                    break;
                }
                bad = s;
            }
        }
        while bad - good > WINDOW_REL_WIDTH * bad {
            let mid = 0.5 * (good + bad);
            if ok(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Ok(good)
    }
}
