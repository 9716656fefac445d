//! Small dense linear-algebra helpers shared by the algebra, constrained and
//! rotor modules.

use nalgebra::{DMatrix, DVector, Matrix3};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_RTOL: f64 = 1e-9;

/// Rank and null space of a square matrix.
#[derive(Debug, Clone)]
pub struct RankKernel {
    pub rank: usize,
    /// Orthonormal basis of the right null space.
    pub kernel: Vec<DVector<f64>>,
    pub singular_values: Vec<f64>,
}

/// Rank and kernel by SVD; singular values at or below
/// `RANK_RTOL * max(singular value)` count as zero.
pub fn rank_kernel(m: &DMatrix<f64>) -> RankKernel {
    let n = m.ncols();
    assert_eq!(m.nrows(), n, "rank_kernel expects a square matrix");
    if n == 0 {
        return RankKernel { rank: 0, kernel: Vec::new(), singular_values: Vec::new() };
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let thr = RANK_RTOL * smax;
    let mut kernel = Vec::new();
    let mut rank = 0;
    for (i, &s) in sv.iter().enumerate() {
        if smax > 0.0 && s > thr {
            rank += 1;
        } else {
            kernel.push(v_t.row(i).transpose().into_owned());
        }
    }
    let mut sorted = sv;
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    RankKernel { rank, kernel, singular_values: sorted }
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Nearest rotation matrix in the Frobenius norm (polar factor via SVD).
pub fn polar_project(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = r.svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let mut q = u * v_t;
    if q.determinant() < 0.0 {
        // reflect the weakest direction so det = +1
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let mut u2 = u;
        u2.column_mut(imin).neg_mut();
        q = u2 * v_t;
    }
    q
}

/// Cross-product matrix: `skew(w) * v == w.cross(v)`.
pub fn skew(w: &nalgebra::Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Levi-Civita symbol on 0-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}
