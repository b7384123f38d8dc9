//! Stability and detectability tests that gate observer synthesis.

use serde::Serialize;
use thiserror::Error;

use crate::model::{StateSpaceSystem, TransformedSystem};
use crate::numerics::{self, Matrix, NumericsError, Spectrum, C64};

pub const DEFAULT_STABILITY_MARGIN: f64 = 1e-8;
/// Eigenvalues with `Re(λ) ≥ −DEFAULT_BOUNDARY_TOL` count as closed right half-plane.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("the output matrix of a detectability test must be nonzero")]
    ZeroOutput,
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub spectrum: Spectrum,
    pub max_real_part: f64,
    pub is_hurwitz: bool,
    pub margin: f64,
}

/// Reports whether every eigenvalue of `m` has real part below `−margin`.
pub fn hurwitz_check(m: &Matrix, margin: f64) -> Result<StabilityReport, AnalysisError> {
    let spectrum = numerics::eig(m)?;
    let max_real_part = spectrum.max_real_part();
    Ok(StabilityReport {
        is_hurwitz: max_real_part < -margin,
        max_real_part,
        spectrum,
        margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbhTest {
    #[serde(serialize_with = "crate::io::ser_complex")]
    pub eigenvalue: C64,
    pub rank: usize,
    pub required: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectabilityReport {
    pub detectable: bool,
    /// Only the eigenvalues with `Re(λ) ≥ −tolerance` appear here.
    pub tested_eigenvalues: Vec<PbhTest>,
    pub tolerance: f64,
}

impl DetectabilityReport {
    /// Eigenvalues whose PBH rank fell short.
    pub fn failing(&self) -> impl Iterator<Item = &PbhTest> {
        self.tested_eigenvalues.iter().filter(|t| t.rank < t.required)
    }
}

/// PBH detectability test of the pair `(a, c)`: `[c; λI − a]` must have full
/// column rank at every eigenvalue with `Re(λ) ≥ −tol`.
///
/// Refuses a zero `c`; see [`detectability`] for the variant that accepts it.
pub fn pbh_detectable(a: &Matrix, c: &Matrix, tol: f64) -> Result<DetectabilityReport, AnalysisError> {
    if c.iter().all(|&v| v == 0.0) {
        return Err(AnalysisError::ZeroOutput);
    }
    detectability(a, c, tol)
}

/// PBH test that also accepts a zero (or empty) output matrix. With no output
/// contribution the pair is detectable exactly when `a` is Hurwitz with the
/// boundary tolerance as margin.
pub fn detectability(a: &Matrix, c: &Matrix, tol: f64) -> Result<DetectabilityReport, AnalysisError> {
    let q = a.nrows();
    let rank_tol = numerics::default_rank_tol(c.nrows() + q, q);
    detectability_with_rank_tol(a, c, tol, rank_tol)
}

pub fn detectability_with_rank_tol(
    a: &Matrix,
    c: &Matrix,
    tol: f64,
    rank_tol: f64,
) -> Result<DetectabilityReport, AnalysisError> {
    if !a.is_square() {
        return Err(AnalysisError::Dimension(format!(
            "A must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let q = a.nrows();
    if c.ncols() != q {
        return Err(AnalysisError::Dimension(format!(
            "C must have {q} columns, got {}",
            c.ncols()
        )));
    }
    let r = c.nrows();
    let spectrum = numerics::eig(a)?;
    let mut tested = Vec::new();
    for &lambda in spectrum.eigenvalues() {
        if lambda.re < -tol {
            continue;
        }
        // A conjugate pair has conjugate PBH matrices of equal rank.
        if lambda.im < 0.0 && spectrum.eigenvalues().iter().any(|z| *z == lambda.conj()) {
            continue;
        }
        let mut re = Matrix::zeros(r + q, q);
        let mut im = Matrix::zeros(r + q, q);
        re.rows_mut(0, r).copy_from(c);
        re.rows_mut(r, q).copy_from(&(Matrix::identity(q, q) * lambda.re - a));
        im.rows_mut(r, q).fill_diagonal(lambda.im);
        let rank = numerics::numerical_rank_complex(&re, &im, rank_tol)?;
        tested.push(PbhTest {
            eigenvalue: lambda,
            rank,
            required: q,
        });
    }
    Ok(DetectabilityReport {
        detectable: tested.iter().all(|t| t.rank == t.required),
        tested_eigenvalues: tested,
        tolerance: tol,
    })
}

/// Detectability verdicts of the plant pair `(A, C)` and of the reduced pair
/// `(A22, A12)`; the two always coincide in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEquivalence {
    pub plant: DetectabilityReport,
    pub reduced: DetectabilityReport,
}

impl PairEquivalence {
    pub fn holds(&self) -> bool {
        self.plant.detectable == self.reduced.detectable
    }
}

pub fn detectable_pair_equivalence(
    sys: &StateSpaceSystem,
    ts: &TransformedSystem,
    tol: f64,
) -> Result<PairEquivalence, AnalysisError> {
    Ok(PairEquivalence {
        plant: detectability(sys.a(), sys.c(), tol)?,
        reduced: detectability(&ts.a22, &ts.a12, tol)?,
    })
}

/// Necessary conditions on the integral gain `G` (`k × p`): full row rank and
/// `rank(A12) ≥ k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NecessaryConditions {
    pub rank_g_ok: bool,
    pub order_ok: bool,
    pub rank_g: usize,
    pub q: usize,
    pub k: usize,
}

impl NecessaryConditions {
    pub fn hold(&self) -> bool {
        self.rank_g_ok && self.order_ok
    }
}

pub fn necessary_conditions(
    g: &Matrix,
    a12: &Matrix,
    tol: f64,
) -> Result<NecessaryConditions, AnalysisError> {
    let k = g.nrows();
    let rank_g = numerics::numerical_rank(g, tol)?;
    let q = numerics::numerical_rank(a12, tol)?;
    Ok(NecessaryConditions {
        rank_g_ok: rank_g == k,
        order_ok: q >= k,
        rank_g,
        q,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn hurwitz_examples() {
        assert!(hurwitz_check(&dmatrix![-1.0, 0.0; 0.0, -2.0], 0.0).unwrap().is_hurwitz);
        let rot = hurwitz_check(&dmatrix![0.0, 1.0; -1.0, 0.0], 0.0).unwrap();
        assert!(!rot.is_hurwitz);
        let comp = hurwitz_check(&dmatrix![-3.0, 2.0; -1.0, 0.0], DEFAULT_STABILITY_MARGIN).unwrap();
        assert!(comp.is_hurwitz);
        assert!((comp.max_real_part + 1.0).abs() < 1e-14);
    }

    #[test]
    fn margin_rejects_nearly_marginal_modes() {
        let m = dmatrix![-1e-9, 0.0; 0.0, -1.0];
        assert!(hurwitz_check(&m, 0.0).unwrap().is_hurwitz);
        assert!(!hurwitz_check(&m, 1e-8).unwrap().is_hurwitz);
    }

    #[test]
    fn pbh_examples() {
        let r = pbh_detectable(&dmatrix![1.0], &dmatrix![1.0], 1e-8).unwrap();
        assert!(r.detectable);
        assert_eq!(r.tested_eigenvalues.len(), 1);
        assert_eq!(r.tested_eigenvalues[0].rank, 1);

        let r = pbh_detectable(&dmatrix![1.0, 0.0; 0.0, -1.0], &dmatrix![0.0, 1.0], 1e-8).unwrap();
        assert!(!r.detectable);
        assert_eq!(r.failing().count(), 1);

        let r = pbh_detectable(&dmatrix![0.0, 1.0; 0.0, 0.0], &dmatrix![1.0, 0.0], 1e-8).unwrap();
        assert!(r.detectable);
        assert!(r.tested_eigenvalues.iter().all(|t| t.rank == 2));
    }

    #[test]
    fn zero_output_is_a_precondition_error() {
        assert_eq!(
            pbh_detectable(&dmatrix![1.0], &dmatrix![0.0], 1e-8),
            Err(AnalysisError::ZeroOutput)
        );
        // The permissive variant reduces to a Hurwitz test.
        assert!(!detectability(&dmatrix![1.0], &dmatrix![0.0], 1e-8).unwrap().detectable);
        assert!(detectability(&dmatrix![-1.0], &dmatrix![0.0], 1e-8).unwrap().detectable);
        assert!(detectability(&dmatrix![-1.0], &Matrix::zeros(0, 1), 1e-8).unwrap().detectable);
    }

    #[test]
    fn imaginary_axis_modes_are_tested() {
        let a = dmatrix![0.0, 1.0; -1.0, 0.0];
        let r = detectability(&a, &Matrix::zeros(1, 2), 1e-8).unwrap();
        assert!(!r.detectable);
        let r = pbh_detectable(&a, &dmatrix![1.0, 0.0], 1e-8).unwrap();
        assert!(r.detectable);
        assert_eq!(r.tested_eigenvalues.len(), 1);
    }

    #[test]
    fn equivalence_on_small_examples() {
        let sys = StateSpaceSystem::new(
            dmatrix![0.0, 1.0; 0.0, 1.0],
            dmatrix![0.0; 1.0],
            dmatrix![1.0, 0.0],
        )
        .unwrap();
        let ts = crate::model::partition(&sys, &Matrix::identity(2, 2)).unwrap();
        let eq = detectable_pair_equivalence(&sys, &ts, 1e-8).unwrap();
        assert!(eq.holds() && eq.plant.detectable);

        let sys = StateSpaceSystem::new(
            Matrix::identity(2, 2),
            dmatrix![1.0; 1.0],
            dmatrix![1.0, 0.0],
        )
        .unwrap();
        let ts = crate::model::partition(&sys, &Matrix::identity(2, 2)).unwrap();
        assert_eq!(ts.a12, dmatrix![0.0]);
        let eq = detectable_pair_equivalence(&sys, &ts, 1e-8).unwrap();
        assert!(eq.holds() && !eq.plant.detectable);
    }

    #[test]
    fn hurwitz_plant_is_detectable_on_both_sides() {
        let sys = StateSpaceSystem::new(
            dmatrix![-1.0, 2.0, 0.0; 0.0, -2.0, 1.0; 0.0, 0.0, -3.0],
            dmatrix![1.0; 0.0; 0.0],
            dmatrix![0.0, 0.0, 1.0],
        )
        .unwrap();
        let ts = TransformedSystem::new(&sys, 1e-12).unwrap();
        let eq = detectable_pair_equivalence(&sys, &ts, 1e-8).unwrap();
        assert!(eq.plant.detectable && eq.reduced.detectable);
    }

    #[test]
    fn necessary_condition_examples() {
        let ok = necessary_conditions(&dmatrix![1.0], &dmatrix![1.0], 1e-12).unwrap();
        assert!(ok.hold());
        let bad_g = necessary_conditions(&dmatrix![0.0], &dmatrix![1.0], 1e-12).unwrap();
        assert!(!bad_g.rank_g_ok && bad_g.order_ok);
        let too_many = necessary_conditions(
            &dmatrix![1.0, 0.0; 0.0, 1.0],
            &dmatrix![1.0, 1.0; 1.0, 1.0],
            1e-12,
        )
        .unwrap();
        assert_eq!(too_many.q, 1);
        assert!(too_many.rank_g_ok && !too_many.order_ok);
    }
}
