//! Hermitian eigensolvers built on the real symmetric eigendecomposition.
//!
//! A complex Hermitian matrix `M = A + iB` embeds into the real symmetric
//! matrix `[[A, -B], [B, A]]` whose spectrum is that of `M` with every
//! eigenvalue doubled; the real eigenvector `(x, y)` maps back to the complex
//! eigenvector `x + iy`. Going through the real solver keeps the code on one
//! well-tested path for every matrix size used here (at most 256 x 256).

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;

fn real_embedding(m: &DMatrix<C64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            e[(i, j)] = z.re;
            e[(i, j + n)] = -z.im;
            e[(i + n, j)] = z.im;
            e[(i + n, j + n)] = z.re;
        }
    }
    e
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let eig = real_embedding(m).symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    // The embedding doubles every eigenvalue; keep one copy of each pair.
    vals.into_iter().step_by(2).collect()
}

/// Largest eigenvalue of a Hermitian matrix together with a unit eigenvector.
pub fn top_eigenpair(m: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let n = m.nrows();
    let eig = real_embedding(m).symmetric_eigen();
    let mut best = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k] > eig.eigenvalues[best] {
            best = k;
        }
    }
    let w = eig.eigenvectors.column(best);
    let mut v = DVector::<C64>::zeros(n);
    for i in 0..n {
        v[i] = C64::new(w[i], w[i + n]);
    }
    let norm = v.norm();
    (eig.eigenvalues[best], v / C64::new(norm, 0.0))
}
