//! Plant representation and the output-normalizing coordinate change.
//!
//! With `C·T = [I_p, 0]` the state `z = T⁻¹x` splits into the measured part
//! `z1 = y` and the unmeasured part `z2`, and the plant becomes
//!
//! ```text
//! ż1 = A11·z1 + A12·z2 + G1·u
//! ż2 = A21·z1 + A22·z2 + G2·u
//! ```

use nalgebra::DVector;
use thiserror::Error;

use crate::numerics::{self, Matrix, NumericsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error("matrix {matrix} has a non-finite entry at ({row}, {col})")]
    NonFinite {
        matrix: &'static str,
        row: usize,
        col: usize,
    },
    #[error("C must have full row rank: rank(C) = {rank} but C has p = {p} rows")]
    RankDeficientOutput { rank: usize, p: usize },
    #[error("no unmeasured states: p = n = {n}, there is nothing to estimate")]
    NoUnmeasuredStates { n: usize },
    #[error("system has no outputs (p = 0)")]
    NoOutputs,
    #[error("T does not normalize the output: ‖C·T − [I, 0]‖ = {residual:.3e}")]
    NotNormalizing { residual: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn finite(m: &Matrix, matrix: &'static str) -> Result<(), ModelError> {
    numerics::ensure_finite(m).map_err(|e| match e {
        NumericsError::NonFinite { row, col } => ModelError::NonFinite { matrix, row, col },
        other => other.into(),
    })
}

/// The plant `ẋ = A·x + B·u`, `y = C·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSystem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
}

impl StateSpaceSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self, ModelError> {
        let tol = numerics::default_rank_tol(c.nrows(), c.ncols());
        Self::with_rank_tol(a, b, c, tol)
    }

    pub fn with_rank_tol(a: Matrix, b: Matrix, c: Matrix, rank_tol: f64) -> Result<Self, ModelError> {
        if !a.is_square() {
            return Err(ModelError::Dimension(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        if b.nrows() != n {
            return Err(ModelError::Dimension(format!(
                "B must have n = {n} rows, got {}",
                b.nrows()
            )));
        }
        if c.ncols() != n {
            return Err(ModelError::Dimension(format!(
                "C must have n = {n} columns, got {}",
                c.ncols()
            )));
        }
        finite(&a, "A")?;
        finite(&b, "B")?;
        finite(&c, "C")?;
        let p = c.nrows();
        if p == 0 {
            return Err(ModelError::NoOutputs);
        }
        let rank = numerics::numerical_rank(&c, rank_tol)?;
        if rank != p {
            return Err(ModelError::RankDeficientOutput { rank, p });
        }
        if p >= n {
            return Err(ModelError::NoUnmeasuredStates { n });
        }
        Ok(StateSpaceSystem { a, b, c })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn output(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.c * x
    }
}

/// Builds a nonsingular `T` with `C·T = [I_p, 0]`.
///
/// `T = [C⁺ | N]` where `C⁺` is the Moore–Penrose right inverse and the
/// columns of `N` are an orthonormal basis of `null(C)`, both read off one SVD.
pub fn output_normalize(c: &Matrix, rank_tol: f64) -> Result<Matrix, ModelError> {
    let (p, n) = c.shape();
    if p == 0 || p > n {
        return Err(ModelError::Dimension(format!(
            "C must be p x n with 1 <= p <= n, got {p}x{n}"
        )));
    }
    let dec = numerics::svd(c)?;
    let rank = numerics::numerical_rank(c, rank_tol)?;
    if rank != p {
        return Err(ModelError::RankDeficientOutput { rank, p });
    }
    // C = U·Σ·V1ᵀ  ⇒  C⁺ = V1·Σ⁻¹·Uᵀ
    let v1 = dec.v.columns(0, p);
    let inv_sigma = Matrix::from_diagonal(&DVector::from_iterator(
        p,
        dec.singular_values.iter().map(|s| 1.0 / s),
    ));
    let pinv = v1 * inv_sigma * dec.u.transpose();
    let mut t = Matrix::zeros(n, n);
    t.columns_mut(0, p).copy_from(&pinv);
    t.columns_mut(p, n - p).copy_from(&dec.v.columns(p, n - p));
    Ok(t)
}

/// `[I_p, 0]` as a `p × n` matrix.
pub fn normalized_output(p: usize, n: usize) -> Matrix {
    Matrix::identity(p, n)
}

/// The plant in output-normalized coordinates `z = T⁻¹x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSystem {
    pub t: Matrix,
    pub t_inv: Matrix,
    pub a11: Matrix,
    pub a12: Matrix,
    pub a21: Matrix,
    pub a22: Matrix,
    pub g1: Matrix,
    pub g2: Matrix,
    /// 2-norm condition number of `T`.
    pub t_condition: f64,
}

impl TransformedSystem {
    /// Normalizes the output of `sys` and partitions the result.
    pub fn new(sys: &StateSpaceSystem, rank_tol: f64) -> Result<Self, ModelError> {
        let t = output_normalize(sys.c(), rank_tol)?;
        partition(sys, &t)
    }

    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    pub fn p(&self) -> usize {
        self.a11.nrows()
    }

    pub fn m(&self) -> usize {
        self.g1.ncols()
    }

    /// `n − p`, the observer order.
    pub fn unmeasured(&self) -> usize {
        self.a22.nrows()
    }

    /// `[[A11, A12], [A21, A22]]`.
    pub fn block_a(&self) -> Matrix {
        let (p, r) = (self.p(), self.unmeasured());
        let mut a = Matrix::zeros(p + r, p + r);
        a.view_mut((0, 0), (p, p)).copy_from(&self.a11);
        a.view_mut((0, p), (p, r)).copy_from(&self.a12);
        a.view_mut((p, 0), (r, p)).copy_from(&self.a21);
        a.view_mut((p, p), (r, r)).copy_from(&self.a22);
        a
    }

    /// `[G1; G2]`.
    pub fn block_b(&self) -> Matrix {
        let (p, r, m) = (self.p(), self.unmeasured(), self.m());
        let mut b = Matrix::zeros(p + r, m);
        b.view_mut((0, 0), (p, m)).copy_from(&self.g1);
        b.view_mut((p, 0), (r, m)).copy_from(&self.g2);
        b
    }

    /// `z = T⁻¹·x`.
    pub fn to_normalized(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.t_inv * x
    }
}

/// Applies the similarity `T` to the plant and reads off the blocks of
/// `T⁻¹AT` and `T⁻¹B`.
pub fn partition(sys: &StateSpaceSystem, t: &Matrix) -> Result<TransformedSystem, ModelError> {
    let (n, p, m) = (sys.n(), sys.p(), sys.m());
    if t.shape() != (n, n) {
        return Err(ModelError::Dimension(format!(
            "T must be {n}x{n}, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    finite(t, "T")?;
    let t_inv = numerics::invert(t)?;
    let t_condition = numerics::condition_number(t)?;
    let residual = (sys.c() * t - normalized_output(p, n)).norm();
    if residual > 1e-8 * (1.0 + sys.c().norm() * t.norm()) {
        return Err(ModelError::NotNormalizing { residual });
    }
    let at = &t_inv * sys.a() * t;
    let bt = &t_inv * sys.b();
    let r = n - p;
    Ok(TransformedSystem {
        a11: at.view((0, 0), (p, p)).into_owned(),
        a12: at.view((0, p), (p, r)).into_owned(),
        a21: at.view((p, 0), (r, p)).into_owned(),
        a22: at.view((p, p), (r, r)).into_owned(),
        g1: bt.view((0, 0), (p, m)).into_owned(),
        g2: bt.view((p, 0), (r, m)).into_owned(),
        t: t.clone(),
        t_inv,
        t_condition,
    })
}

/// The unmeasured-state dynamics `ż2 = A22·z2 + D·u1` with `u1 = [y; u]`,
/// observed through `y1 = A12·z2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSubsystem {
    pub a22: Matrix,
    pub a12: Matrix,
    /// `[A21 | G2]`.
    pub d: Matrix,
}

pub fn reduced(ts: &TransformedSystem) -> ReducedSubsystem {
    let (r, p, m) = (ts.unmeasured(), ts.p(), ts.m());
    let mut d = Matrix::zeros(r, p + m);
    d.columns_mut(0, p).copy_from(&ts.a21);
    d.columns_mut(p, m).copy_from(&ts.g2);
    ReducedSubsystem {
        a22: ts.a22.clone(),
        a12: ts.a12.clone(),
        d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn demo() -> StateSpaceSystem {
        StateSpaceSystem::new(
            dmatrix![0.0, 1.0; 0.0, 1.0],
            dmatrix![0.0; 1.0],
            dmatrix![1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn identity_output_gives_identity_transform() {
        let t = output_normalize(&Matrix::identity(2, 2), 1e-12).unwrap();
        assert!((t - Matrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn swapped_output_gives_permutation() {
        let c = dmatrix![0.0, 1.0];
        let t = output_normalize(&c, 1e-12).unwrap();
        assert!((&t - dmatrix![0.0, 1.0; 1.0, 0.0]).norm() < 1e-15);
        assert!((&c * &t - dmatrix![1.0, 0.0]).norm() < 1e-15);
    }

    #[test]
    fn rank_deficient_output_is_rejected() {
        let err = StateSpaceSystem::new(
            Matrix::identity(3, 3),
            Matrix::zeros(3, 1),
            dmatrix![1.0, 2.0, 3.0; 2.0, 4.0, 6.0],
        )
        .unwrap_err();
        assert_eq!(err, ModelError::RankDeficientOutput { rank: 1, p: 2 });
        assert!(matches!(
            output_normalize(&dmatrix![1.0, 1.0; 1.0, 1.0], 1e-12),
            Err(ModelError::RankDeficientOutput { rank: 1, p: 2 })
        ));
    }

    #[test]
    fn fully_measured_plant_is_rejected() {
        let err = StateSpaceSystem::new(
            Matrix::identity(2, 2),
            Matrix::zeros(2, 1),
            Matrix::identity(2, 2),
        )
        .unwrap_err();
        assert_eq!(err, ModelError::NoUnmeasuredStates { n: 2 });
    }

    #[test]
    fn dimension_and_finiteness_checks() {
        assert!(matches!(
            StateSpaceSystem::new(Matrix::zeros(2, 3), Matrix::zeros(2, 1), Matrix::zeros(1, 2)),
            Err(ModelError::Dimension(_))
        ));
        assert!(matches!(
            StateSpaceSystem::new(Matrix::zeros(2, 2), Matrix::zeros(3, 1), dmatrix![1.0, 0.0]),
            Err(ModelError::Dimension(_))
        ));
        assert!(matches!(
            StateSpaceSystem::new(
                dmatrix![0.0, f64::INFINITY; 0.0, 0.0],
                Matrix::zeros(2, 1),
                dmatrix![1.0, 0.0]
            ),
            Err(ModelError::NonFinite { matrix: "A", row: 0, col: 1 })
        ));
    }

    #[test]
    fn identity_plant_partitions_to_identity_blocks() {
        let sys = StateSpaceSystem::new(
            Matrix::identity(3, 3),
            dmatrix![1.0; 2.0; 3.0],
            dmatrix![1.0, 2.0, 0.0],
        )
        .unwrap();
        let ts = TransformedSystem::new(&sys, 1e-12).unwrap();
        assert!((&ts.a11 - Matrix::identity(1, 1)).norm() < 1e-12);
        assert!(ts.a12.norm() < 1e-12);
        assert!(ts.a21.norm() < 1e-12);
        assert!((&ts.a22 - Matrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn demo_blocks_read_off_directly() {
        let ts = partition(&demo(), &Matrix::identity(2, 2)).unwrap();
        assert_eq!(ts.a11, dmatrix![0.0]);
        assert_eq!(ts.a12, dmatrix![1.0]);
        assert_eq!(ts.a21, dmatrix![0.0]);
        assert_eq!(ts.a22, dmatrix![1.0]);
        assert_eq!(ts.g1, dmatrix![0.0]);
        assert_eq!(ts.g2, dmatrix![1.0]);
        let red = reduced(&ts);
        assert_eq!(red.d, dmatrix![0.0, 1.0]);
    }

    #[test]
    fn reduced_concatenates_a21_and_g2() {
        let sys = StateSpaceSystem::new(
            Matrix::identity(3, 3) * -1.0,
            Matrix::identity(3, 2),
            dmatrix![0.0, 0.0, 1.0],
        )
        .unwrap();
        let ts = TransformedSystem::new(&sys, 1e-12).unwrap();
        let red = reduced(&ts);
        assert_eq!(red.d.shape(), (2, 3));
        assert!(red.d.columns(0, 1).norm() < 1e-15);
        assert!((red.d.columns(1, 2) - &ts.g2).norm() < 1e-15);
    }

    #[test]
    fn partition_rejects_singular_and_non_normalizing_t() {
        let sys = demo();
        assert!(matches!(
            partition(&sys, &dmatrix![1.0, 1.0; 1.0, 1.0]),
            Err(ModelError::Numerics(NumericsError::Singular { .. }))
        ));
        assert!(matches!(
            partition(&sys, &dmatrix![2.0, 0.0; 0.0, 1.0]),
            Err(ModelError::NotNormalizing { .. })
        ));
    }

    #[test]
    fn blocks_reassemble_to_the_plant() {
        let sys = StateSpaceSystem::new(
            dmatrix![1.0, 2.0, -1.0; 0.5, -3.0, 2.0; 1.0, 0.0, -1.0],
            dmatrix![1.0; 0.0; 2.0],
            dmatrix![1.0, 1.0, 0.0],
        )
        .unwrap();
        let ts = TransformedSystem::new(&sys, 1e-12).unwrap();
        let back = &ts.t * ts.block_a() * &ts.t_inv;
        assert!((back - sys.a()).norm() < 1e-12);
        assert!((&ts.t * ts.block_b() - sys.b()).norm() < 1e-12);
    }
}
