//! Dense symmetric matrix utilities: definiteness tests with explicit
//! margins, Schur complements, and nullspace basis extraction.
//!
//! Everything downstream (feasibility solving, controller elimination,
//! rate certification) reduces to eigenvalue questions about small dense
//! symmetric matrices, so this module fixes the numerical conventions
//! once: definiteness is always decided relative to an explicit margin,
//! and nullspaces use a relative singular-value cutoff.

use nalgebra::DMatrix;
use thiserror::Error;

/// Rectangular matrix carrier. All matrices in this crate are small and
/// dense, so the nalgebra dynamic matrix is used directly.
pub type RectMatrix = DMatrix<f64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    /// The trailing block that must be inverted in a Schur complement is
    /// not strictly positive definite at the configured margin.
    #[error("trailing block is not positive definite (min eigenvalue {min_eig:.3e})")]
    BlockNotPD { min_eig: f64 },
}

/// Numerical tolerances shared across the crate.
///
/// `psd_margin` is a relative eigenvalue threshold: a matrix with
/// largest absolute entry `s` counts as PSD when its smallest eigenvalue
/// is at least `-psd_margin * max(s, 1)`, and as PD when it exceeds
/// `+psd_margin * max(s, 1)`. `rank_tol` is the relative singular-value
/// cutoff for nullspace extraction, and `bisection_tol` is the
/// resolution of rate bisections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub psd_margin: f64,
    pub rank_tol: f64,
    pub bisection_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd_margin: 1e-9,
            rank_tol: 1e-10,
            bisection_tol: 1e-4,
        }
    }
}

impl Tolerances {
    /// Absolute PSD threshold for a matrix whose largest absolute entry
    /// is `scale`.
    pub fn psd_threshold(&self, scale: f64) -> f64 {
        self.psd_margin * scale.max(1.0)
    }
}

/// Dense real symmetric matrix. The lower triangle is authoritative:
/// construction mirrors it onto the upper triangle, so the stored matrix
/// is symmetric to the last bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    mat: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds from an arbitrary square matrix by mirroring the lower
    /// triangle onto the upper one.
    ///
    /// # Panics
    /// Panics if the matrix is not square or has zero dimension.
    pub fn from_lower(mut mat: DMatrix<f64>) -> Self {
        assert!(mat.is_square(), "symmetric matrix must be square");
        assert!(mat.nrows() >= 1, "symmetric matrix must have dim >= 1");
        let n = mat.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                mat[(i, j)] = mat[(j, i)];
            }
        }
        SymMatrix { mat }
    }

    /// Zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        SymMatrix {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    /// Identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1);
        SymMatrix {
            mat: DMatrix::identity(dim, dim),
        }
    }

    /// Builds a symmetric matrix entry-wise from the lower triangle of
    /// the generator; `f(i, j)` is only consulted for `i >= j`.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        assert!(dim >= 1);
        let mut mat = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                mat[(i, j)] = v;
                mat[(j, i)] = v;
            }
        }
        SymMatrix { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    /// Largest absolute entry; the scale used for relative thresholds.
    pub fn scale(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Symmetric congruence `W^T X W` for rectangular `W`.
    pub fn congruence(&self, w: &RectMatrix) -> SymMatrix {
        assert_eq!(w.nrows(), self.dim(), "congruence dimension mismatch");
        SymMatrix::from_lower(w.transpose() * &self.mat * w)
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.mat[idx]
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig(x: &SymMatrix) -> f64 {
    x.as_matrix()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
}

/// PSD test at the relative margin: `min_eig(X) >= -psd_margin * max(scale, 1)`.
pub fn is_psd(x: &SymMatrix, tol: &Tolerances) -> bool {
    min_eig(x) >= -tol.psd_threshold(x.scale())
}

/// Strict PD test at the relative margin: `min_eig(X) > psd_margin * max(scale, 1)`.
pub fn is_pd(x: &SymMatrix, tol: &Tolerances) -> bool {
    min_eig(x) > tol.psd_threshold(x.scale())
}

/// Schur complement of the trailing block: for `X = [[A, B], [B^T, C]]`
/// partitioned at `split`, returns `A - B C^{-1} B^T`. The trailing
/// block `C` must be strictly positive definite; under that condition
/// `X` is PSD iff the returned complement is PSD.
pub fn schur_complement(
    x: &SymMatrix,
    split: usize,
    tol: &Tolerances,
) -> Result<SymMatrix, LinalgError> {
    let n = x.dim();
    assert!(split >= 1 && split < n, "split must partition the matrix");
    let a = x.as_matrix().view((0, 0), (split, split)).into_owned();
    let b = x
        .as_matrix()
        .view((0, split), (split, n - split))
        .into_owned();
    let c = SymMatrix::from_lower(
        x.as_matrix()
            .view((split, split), (n - split, n - split))
            .into_owned(),
    );
    let c_min = min_eig(&c);
    if c_min <= tol.psd_threshold(c.scale()) {
        return Err(LinalgError::BlockNotPD { min_eig: c_min });
    }
    let chol = c
        .into_matrix()
        .cholesky()
        .ok_or(LinalgError::BlockNotPD { min_eig: c_min })?;
    let cinv_bt = chol.solve(&b.transpose());
    Ok(SymMatrix::from_lower(a - b * cinv_bt))
}

/// Orthonormal basis for the right nullspace of `p`, returned as the
/// columns of the result. Numerical rank uses the relative cutoff
/// `rank_tol`: singular values at or below `rank_tol * sigma_max` count
/// as zero. A trivial nullspace yields a matrix with zero columns.
///
/// Wide matrices are padded with zero rows before the decomposition:
/// the thin SVD of an r x n matrix with r < n carries only r right
/// singular vectors and would hide n - r exact nullspace directions.
/// Padding is also what keeps the cutoff honest: a Gram-matrix route
/// squares the singular values, and the eigensolver's noise floor on
/// exact zeros (about machine epsilon relative) then sits far above the
/// squared cutoff, silently reporting full rank. Columns are ordered by
/// ascending singular value and sign-normalized so results are
/// reproducible.
pub fn nullspace_basis(p: &RectMatrix, rank_tol: f64) -> RectMatrix {
    let n = p.ncols();
    let rows = p.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (p.nrows(), n)).copy_from(p);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sigma = svd.singular_values;
    let sigma_max = sigma.iter().fold(0.0f64, |acc, &v| acc.max(v));
    let cutoff = rank_tol * sigma_max;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[a].partial_cmp(&sigma[b]).expect("finite"));
    let null_count = order.iter().filter(|&&i| sigma[i] <= cutoff).count();
    let mut basis = DMatrix::zeros(n, null_count);
    for (col, &i) in order.iter().take(null_count).enumerate() {
        let mut v = v_t.row(i).transpose();
        // canonical sign: largest-magnitude component positive
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        basis.set_column(col, &v);
    }
    basis
}

/// Diagonal congruence weights that roughly equilibrate the row scales
/// of a family of symmetric matrices sharing one dimension. Two damped
/// Sinkhorn-style passes over the joint row maxima; weights are clamped
/// so the transform is always invertible. Congruence preserves matrix
/// inertia, so definiteness verdicts on the balanced family transfer
/// exactly to the original.
pub(crate) fn balance_weights(f0: &SymMatrix, coeffs: &[SymMatrix]) -> Vec<f64> {
    let n = f0.dim();
    let mut w = vec![1.0f64; n];
    for _ in 0..2 {
        let mut row_max = vec![0.0f64; n];
        let mut scan = |m: &SymMatrix| {
            for i in 0..n {
                for j in 0..n {
                    let v = (m[(i, j)] * w[i] * w[j]).abs();
                    if v > row_max[i] {
                        row_max[i] = v;
                    }
                }
            }
        };
        scan(f0);
        for c in coeffs {
            scan(c);
        }
        for i in 0..n {
            let upd = (1.0 / row_max[i].max(1e-300).sqrt()).clamp(1e-8, 1e8);
            w[i] *= upd.sqrt();
        }
    }
    w
}

/// Applies diagonal congruence weights: returns `D X D` with `D = diag(w)`.
pub(crate) fn apply_weights(x: &SymMatrix, w: &[f64]) -> SymMatrix {
    let n = x.dim();
    SymMatrix::from_fn(n, |i, j| x[(i, j)] * w[i] * w[j])
}
