//! Lowest eigenpair of a real symmetric operator.

use super::SolverError;
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};

pub fn dense_lowest(m: &Array2<f64>) -> (f64, Vec<f64>) {
    let n = m.nrows();
    let mat = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let eig = SymmetricEigen::new(mat);
    let (k, &e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    (e, eig.eigenvectors.column(k).iter().copied().collect())
}

#[derive(Clone, Debug)]
pub struct DavidsonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_subspace: usize,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        DavidsonOptions {
            tol: 1e-10,
            max_iter: 500,
            max_subspace: 40,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthonormalize(basis: &[Vec<f64>], mut v: Vec<f64>) -> Option<Vec<f64>> {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let norm = dot(&v, &v).sqrt();
    if norm < 1e-10 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

/// Davidson iteration for the lowest eigenpair with diagonal preconditioning.
/// Converged when the residual norm drops below `opts.tol`.
pub fn davidson_lowest<F>(apply: F, diag: &Array1<f64>, opts: &DavidsonOptions) -> Result<(f64, Vec<f64>), SolverError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = diag.len();
    let start = diag
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("non-empty diagonal");
    let mut guess = vec![0.0; n];
    guess[start] = 1.0;
    let mut basis: Vec<Vec<f64>> = vec![guess];
    let mut images: Vec<Vec<f64>> = vec![apply(&basis[0])];
    let mut last_residual = f64::INFINITY;

    for _ in 0..opts.max_iter {
        let k = basis.len();
        let sub = DMatrix::from_fn(k, k, |i, j| {
            0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]))
        });
        let eig = SymmetricEigen::new(sub);
        let (idx, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let y = eig.eigenvectors.column(idx);
        let mut x = vec![0.0; n];
        let mut ax = vec![0.0; n];
        for (c, (b, hb)) in y.iter().zip(basis.iter().zip(&images)) {
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi += c * bi);
            ax.iter_mut().zip(hb).for_each(|(xi, bi)| *xi += c * bi);
        }
        let r: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a - theta * b).collect();
        let rnorm = dot(&r, &r).sqrt();
        last_residual = rnorm;
        if rnorm < opts.tol {
            return Ok((theta, x));
        }
        let correction: Vec<f64> = r
            .iter()
            .zip(diag.iter())
            .map(|(ri, di)| {
                let denom = theta - di;
                if denom.abs() < 1e-8 {
                    ri / 1e-8_f64.copysign(denom)
                } else {
                    ri / denom
                }
            })
            .collect();
        if basis.len() >= opts.max_subspace {
            let xn = orthonormalize(&[], x.clone()).expect("ritz vector non-zero");
            let axn: Vec<f64> = {
                let norm = dot(&x, &x).sqrt();
                ax.iter().map(|v| v / norm).collect()
            };
            basis = vec![xn];
            images = vec![axn];
        }
        match orthonormalize(&basis, correction) {
            Some(v) => {
                images.push(apply(&v));
                basis.push(v);
            }
            None => {
                // Correction collapsed onto the subspace; fall back to the residual.
                match orthonormalize(&basis, r) {
                    Some(v) => {
                        images.push(apply(&v));
                        basis.push(v);
                    }
                    None => return Ok((theta, x)),
                }
            }
        }
    }
    Err(SolverError::NotConverged(format!(
        "Davidson residual {last_residual:.3e} after {} iterations",
        opts.max_iter
    )))
}
