//! Reference computations written independently of the library: a Jacobi
//! eigenvalue solver, classical distributions, and closed-form derivatives.

#![allow(dead_code)]

use qre_core::hermitian::{CMatrix, DensityMatrix, HermitianMatrix, PsdhMatrix};
use qre_core::random::{random_density_with, rng_from_seed};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a Hermitian matrix, ascending, via cyclic Jacobi rotations on
/// the real symmetric embedding `[[Re, −Im], [Im, Re]]` (each eigenvalue
/// appears twice there).
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let n = a.nrows();
    let m = 2 * n;
    let mut s = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            s[i][j] = z.re;
            s[i + n][j + n] = z.re;
            s[i][j + n] = -z.im;
            s[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i][j] * s[i][j])
            .sum();
        if off.sqrt() < 1e-15 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if s[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let (skp, skq) = (s[k][p], s[k][q]);
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for k in 0..m {
                    let (spk, sqk) = (s[p][k], s[q][k]);
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..m).map(|i| s[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d.into_iter().step_by(2).collect()
}

/// `Σ p log(p/q)` with the usual conventions; `None` for `+∞`.
pub fn classical_kl(p: &[f64], q: &[f64]) -> Option<f64> {
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return None;
            }
            acc += a * (a / b).ln();
        }
    }
    Some(acc)
}

/// Mutual information of a joint distribution `joint[j][i]`.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let k = joint[0].len();
    let cols: Vec<f64> = (0..k).map(|i| joint.iter().map(|r| r[i]).sum()).collect();
    let mut mi = 0.0;
    for (j, r) in joint.iter().enumerate() {
        for (i, &p) in r.iter().enumerate() {
            if p > 0.0 {
                mi += p * (p / (rows[j] * cols[i])).ln();
            }
        }
    }
    mi
}

/// `s⁽ᵐ⁾(x)` for `s(x) = −x log x`, `m ≥ 2`.
pub fn entropy_fn_derivative(m: u32, x: f64) -> f64 {
    let sign = if m.is_multiple_of(2) { -1.0 } else { 1.0 };
    let fact: f64 = (1..=(m as u64 - 2)).map(|k| k as f64).product();
    sign * fact / x.powi(m as i32 - 1)
}

/// `−(1/m!) dᵐ/dtᵐ Σ s(p_i + t q_i)` at `t = 0`.
pub fn diagonal_derivative_value(p: &[f64], q: &[f64], m: u32) -> f64 {
    let mfact: f64 = (1..=m as u64).map(|k| k as f64).product();
    -p.iter()
        .zip(q)
        .map(|(&pi, &qi)| qi.powi(m as i32) * entropy_fn_derivative(m, pi))
        .sum::<f64>()
        / mfact
}

pub fn random_pair(seed: u64, n: usize, rank_rho: usize) -> (DensityMatrix, DensityMatrix) {
    let mut rng = rng_from_seed(seed);
    let rho = random_density_with(&mut rng, n, rank_rho).unwrap();
    let sigma = random_density_with(&mut rng, n, n).unwrap();
    (rho, sigma)
}

/// `(1 − w)ρ + w·1/n`: a state with eigenvalues at least `w/n`.
pub fn depolarize(rho: &DensityMatrix, w: f64) -> DensityMatrix {
    let n = rho.dim();
    let h = rho.scale(1.0 - w).add_identity(w / n as f64);
    DensityMatrix::new(PsdhMatrix::new(h).unwrap()).unwrap()
}

pub fn random_diagonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn hermitian_diag(d: &[f64]) -> HermitianMatrix {
    HermitianMatrix::from_diagonal(d).unwrap()
}
