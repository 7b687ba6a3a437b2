//! Seeded random matrices: complex Ginibre density matrices, Hermitian
//! matrices and POVMs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, DensityMatrix, HermitianMatrix, PsdhMatrix, C64};

/// The generator used everywhere a seed is accepted.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut g = CMatrix::zeros(rows, cols);
    // fill row-major so the stream order does not depend on storage layout
    for r in 0..rows {
        for c in 0..cols {
            g[(r, c)] = complex_gaussian(rng);
        }
    }
    g
}

/// `GG†/tr(GG†)` with `G` an `n × rank` Ginibre matrix.
pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Result<DensityMatrix> {
    if n == 0 || rank == 0 || rank > n {
        return Err(Error::Domain {
            what: "rank must satisfy 1 <= rank <= n",
            value: rank as f64,
        });
    }
    let g = ginibre(rng, n, rank);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let h = HermitianMatrix::hermitianize(w.unscale(tr));
    DensityMatrix::new(PsdhMatrix::trusted(h))
}

pub fn random_density(n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(&mut rng_from_seed(seed), n, rank)
}

/// `(G + G†)/2` for a square Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    HermitianMatrix::hermitianize(ginibre(rng, n, n))
}

/// Haar-ish unit vector (normalized complex Gaussian).
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let v = ginibre(rng, n, 1);
    let norm = v.norm();
    v.unscale(norm)
}

/// Random `k`-outcome POVM on `C^n`: Ginibre squares normalized by the
/// inverse square root of their sum, so the elements sum to the identity.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Result<Vec<PsdhMatrix>> {
    if k == 0 {
        return Err(Error::Domain {
            what: "number of POVM outcomes",
            value: 0.0,
        });
    }
    let raw: Vec<CMatrix> = (0..k)
        .map(|_| {
            let g = ginibre(rng, n, n);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(n, n), |acc, m| acc + m);
    let spec = HermitianMatrix::hermitianize(total).spectrum()?.clone();
    let inv_sqrt = spec.map_eigenvalues(|l| 1.0 / l.sqrt());
    Ok(raw
        .into_iter()
        .map(|m| PsdhMatrix::trusted(HermitianMatrix::hermitianize(&inv_sqrt * m * &inv_sqrt)))
        .collect())
}
