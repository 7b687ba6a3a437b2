//! Finite-dimensional Hermitian linear algebra.
//!
//! Every matrix entering the library passes through [`HermitianMatrix`], which
//! stores the exactly Hermitianized form `(M + M†)/2` and records how far the
//! input was from Hermitian. Positivity and unit trace are layered on top as
//! the [`PsdhMatrix`] and [`DensityMatrix`] newtypes.
//!
//! Eigenvalues within `eps_eig` of zero are clamped to exactly zero before
//! any signed-trace or support computation, so `tr⁻` of a positive
//! semi-definite input is exactly zero.

use std::ops::Deref;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::MatrixJson;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative Hermiticity tolerance applied to `max(1, max |a_ij|)`.
pub const EPS_HERM_REL: f64 = 1e-12;
/// Allowed deviation of a density matrix trace from one.
pub const EPS_TRACE: f64 = 1e-12;
/// Scale factor of the zero-eigenvalue threshold `n · ‖A‖_max · 2⁻⁴⁰`.
pub const EPS_EIG_FACTOR: f64 = 1.0 / (1u64 << 40) as f64;

/// Square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrixData {
    data: CMatrix,
}

impl ComplexMatrixData {
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.nrows() == 0 || data.nrows() != data.ncols() {
            return Err(Error::Shape(format!(
                "expected a non-empty square matrix, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        for r in 0..data.nrows() {
            for c in 0..data.ncols() {
                let z = data[(r, c)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFiniteEntry { row: r, col: c });
                }
            }
        }
        Ok(Self { data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("rows must all have length n".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }
}

/// Eigen-decomposition `A = U Λ U†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U f(Λ) U†`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let u = &self.eigenvectors;
        let n = self.dim();
        let mut scaled = u.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_eigenvalues(|x| x)
    }

    /// Columns of `U` whose eigenvalue satisfies `keep`.
    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&j| keep(self.eigenvalues[j])).collect();
        let n = self.dim();
        CMatrix::from_fn(n, idx.len(), |r, c| self.eigenvectors[(r, idx[c])])
    }
}

/// Positive and negative spectral mass of a Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedTrace {
    pub plus: f64,
    pub minus: f64,
}

impl SignedTrace {
    pub fn norm(&self) -> f64 {
        self.plus + self.minus
    }
}

/// Hermitian matrix, stored exactly Hermitianized.
#[derive(Debug)]
pub struct HermitianMatrix {
    data: CMatrix,
    hermiticity_defect: f64,
    eps_eig_override: Option<f64>,
    spectrum: OnceLock<SpectralDecomposition>,
}

impl Clone for HermitianMatrix {
    fn clone(&self) -> Self {
        Self {
            data: self.data.clone(),
            hermiticity_defect: self.hermiticity_defect,
            eps_eig_override: self.eps_eig_override,
            spectrum: self.spectrum.clone(),
        }
    }
}

impl PartialEq for HermitianMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

impl HermitianMatrix {
    /// Validates Hermiticity within `1e-12 · max(1, max |a_ij|)` and stores `(M + M†)/2`.
    pub fn new(m: ComplexMatrixData) -> Result<Self> {
        let data = m.into_matrix();
        let n = data.nrows();
        let mut defect: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                defect = defect.max((data[(r, c)] - data[(c, r)].conj()).norm());
            }
        }
        let tolerance = EPS_HERM_REL * max_abs(&data).max(1.0);
        if defect > tolerance {
            return Err(Error::NotHermitian { defect, tolerance });
        }
        let mut h = Self::hermitianize(data);
        h.hermiticity_defect = defect;
        Ok(h)
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(ComplexMatrixData::new(m)?)
    }

    /// Real symmetric matrix given by rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("rows must all have length n".into()));
        }
        Self::from_matrix(CMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c], 0.0)))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_matrix(CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(diag[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn zeros(n: usize) -> Self {
        Self::hermitianize(CMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self::hermitianize(CMatrix::identity(n, n))
    }

    /// Trusted construction for results of Hermitian-preserving arithmetic.
    pub(crate) fn hermitianize(m: CMatrix) -> Self {
        let data = (&m + m.adjoint()).scale(0.5);
        Self {
            data,
            hermiticity_defect: 0.0,
            eps_eig_override: None,
            spectrum: OnceLock::new(),
        }
    }

    /// Overrides the zero-eigenvalue threshold for this value.
    pub fn with_eps_eig(mut self, eps: f64) -> Self {
        self.eps_eig_override = Some(eps);
        self
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// Threshold below which an eigenvalue counts as zero.
    pub fn eps_eig(&self) -> f64 {
        self.eps_eig_override
            .unwrap_or_else(|| self.dim() as f64 * self.max_abs() * EPS_EIG_FACTOR)
    }

    /// Cached spectral decomposition.
    pub fn spectrum(&self) -> Result<&SpectralDecomposition> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = decompose(&self.data)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// Ascending eigenvalues with `|λ| ≤ eps_eig` set to exactly zero.
    pub fn clamped_eigenvalues(&self) -> Result<Vec<f64>> {
        let eps = self.eps_eig();
        Ok(self
            .spectrum()?
            .eigenvalues
            .iter()
            .map(|&l| if l.abs() <= eps { 0.0 } else { l })
            .collect())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.spectrum()?.eigenvalues[0])
    }

    pub fn tr_signed(&self) -> Result<SignedTrace> {
        let lam = self.clamped_eigenvalues()?;
        // both sums run from small to large magnitude so that negating the
        // matrix swaps them bit for bit
        let plus = lam.iter().filter(|&&l| l > 0.0).sum();
        let minus = lam.iter().rev().filter(|&&l| l < 0.0).map(|l| -l).sum();
        Ok(SignedTrace { plus, minus })
    }

    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.tr_signed()?.norm())
    }

    /// `A⁺`, the positive part.
    pub fn positive_part(&self) -> Result<HermitianMatrix> {
        let eps = self.eps_eig();
        let m = self.spectrum()?.map_eigenvalues(|l| if l > eps { l } else { 0.0 });
        Ok(Self::hermitianize(m))
    }

    /// `A⁻ ≥ 0` with `A = A⁺ − A⁻`.
    pub fn negative_part(&self) -> Result<HermitianMatrix> {
        let eps = self.eps_eig();
        let m = self.spectrum()?.map_eigenvalues(|l| if l < -eps { -l } else { 0.0 });
        Ok(Self::hermitianize(m))
    }

    /// `|A| = A⁺ + A⁻`.
    pub fn abs(&self) -> Result<HermitianMatrix> {
        let eps = self.eps_eig();
        let m = self
            .spectrum()?
            .map_eigenvalues(|l| if l.abs() > eps { l.abs() } else { 0.0 });
        Ok(Self::hermitianize(m))
    }

    pub fn scale(&self, c: f64) -> HermitianMatrix {
        Self::hermitianize(self.data.scale(c))
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &HermitianMatrix, b: f64) -> Result<HermitianMatrix> {
        ensure_same_dim(self.dim(), other.dim())?;
        Ok(Self::hermitianize(self.data.scale(a) + other.data.scale(b)))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add_identity(&self, r: f64) -> HermitianMatrix {
        let n = self.dim();
        Self::hermitianize(&self.data + CMatrix::identity(n, n).scale(r))
    }

    pub fn transpose(&self) -> HermitianMatrix {
        Self::hermitianize(self.data.transpose())
    }

    /// `V† A V` for a matrix `V` with orthonormal columns.
    pub fn compress(&self, basis: &CMatrix) -> HermitianMatrix {
        Self::hermitianize(basis.adjoint() * &self.data * basis)
    }

    /// `tr(A B)` for Hermitian `A`, `B`.
    pub fn trace_product(&self, other: &HermitianMatrix) -> Result<f64> {
        ensure_same_dim(self.dim(), other.dim())?;
        let n = self.dim();
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                acc += (self.data[(r, c)] * other.data[(c, r)]).re;
            }
        }
        Ok(acc)
    }
}

/// Positive semi-definite Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct PsdhMatrix {
    base: HermitianMatrix,
}

impl PsdhMatrix {
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let min = base.min_eigenvalue()?;
        if min < -base.eps_eig() {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { base })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(diag)?)
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::from_matrix(m)?)
    }

    pub(crate) fn trusted(base: HermitianMatrix) -> Self {
        Self { base }
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.base
    }

    /// Orthonormal basis of the image (eigenvalues above `eps_eig`).
    pub fn support_basis(&self) -> Result<CMatrix> {
        let eps = self.base.eps_eig();
        Ok(self.base.spectrum()?.columns_where(|l| l > eps))
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.support_basis()?.ncols())
    }
}

impl Deref for PsdhMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.base
    }
}

/// Positive semi-definite matrix of unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix {
    base: PsdhMatrix,
}

impl DensityMatrix {
    pub fn new(base: PsdhMatrix) -> Result<Self> {
        let tr = base.trace();
        if (tr - 1.0).abs() > EPS_TRACE {
            return Err(Error::NotUnitTrace(tr));
        }
        Ok(Self { base })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(PsdhMatrix::from_diagonal(diag)?)
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(PsdhMatrix::from_matrix(m)?)
    }

    pub fn psdh(&self) -> &PsdhMatrix {
        &self.base
    }

    pub fn into_psdh(self) -> PsdhMatrix {
        self.base
    }
}

impl Deref for DensityMatrix {
    type Target = PsdhMatrix;
    fn deref(&self) -> &PsdhMatrix {
        &self.base
    }
}

/// Spectral decomposition of `a`, eigenvalues ascending.
pub fn eig_hermitian(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    a.spectrum().cloned()
}

pub fn tr_signed(a: &HermitianMatrix) -> Result<SignedTrace> {
    a.tr_signed()
}

pub fn trace_norm(a: &HermitianMatrix) -> Result<f64> {
    a.trace_norm()
}

/// Whether `im ρ ⊆ im σ`, tested as `‖P ρ P‖_max ≤ 1e-10·‖ρ‖_max` with `P`
/// the projector onto the numerical kernel of `σ`.
pub fn support_contained(rho: &PsdhMatrix, sigma: &PsdhMatrix) -> Result<bool> {
    ensure_same_dim(rho.dim(), sigma.dim())?;
    let eps = sigma.eps_eig();
    let kernel = sigma.spectrum()?.columns_where(|l| l <= eps);
    if kernel.ncols() == 0 {
        return Ok(true);
    }
    let p = &kernel * kernel.adjoint();
    let sandwiched = &p * rho.matrix() * &p;
    Ok(max_abs(&sandwiched) <= 1e-10 * rho.max_abs())
}

pub(crate) fn ensure_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(a, b));
    }
    Ok(())
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `+1` or `−1`, chosen so that `s·M` is the same matrix for `M` and `−M`.
fn canonical_sign(m: &CMatrix) -> f64 {
    let first = m
        .iter()
        .map(|z| z.re)
        .find(|&x| x != 0.0)
        .or_else(|| m.iter().map(|z| z.im).find(|&x| x != 0.0));
    match first {
        Some(x) if x < 0.0 => -1.0,
        _ => 1.0,
    }
}

fn decompose(m: &CMatrix) -> Result<SpectralDecomposition> {
    let n = m.nrows();
    // the eigensolver is not exactly odd; decomposing a sign-canonical form
    // makes the spectrum of −M the exact negation of that of M
    let s = canonical_sign(m);
    let eig = SymmetricEigen::try_new(m * C64::new(s, 0.0), f64::EPSILON, 1000 * n.max(1))
        .ok_or(Error::ConvergenceFailure)?;
    let values: Vec<f64> = eig.eigenvalues.iter().map(|&l| s * l).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&j| values[j]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}
