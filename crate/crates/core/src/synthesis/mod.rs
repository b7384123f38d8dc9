//! Construction of the reduced-order PI observer
//!
//! ```text
//! ẑ̇2 = (A22 − L·A12)·ẑ2 + L·y1 + D·u1 + F·ω
//! ω̇  = G·(y1 − A12·ẑ2)
//! ```
//!
//! The pipeline in [`design`]:
//!
//! 1. refuse the plant unless `(A, C)` (equivalently `(A22, A12)`) is detectable;
//! 2. pick `K` with `A22 + K·A12` Hurwitz ([`stabilizing_gain`]); without
//!    explicit targets, fall back to moving only the slow modes
//!    ([`partial_stabilizing_gain`]) when the default targets cannot be
//!    certified;
//! 3. factor `A12 = P·[I_q 0; 0 0]·Q` ([`rank_factorize`]);
//! 4. set `G = [I_k, 0]·P⁻¹`, `X = Q⁻¹·[−Φ; 0]`, `L = X·G − K` and
//!    `F = −(A22 − L·A12)·X − X·G·A12·X` ([`build_observer`]).
//!
//! With `M = [[I, X], [0, I]]` the error matrix `[[A22 − L·A12, F], [−G·A12, 0]]`
//! is similar to `[[A22 + K·A12, 0], [−G·A12, Φ]]`, so its spectrum is
//! `σ(A22 + K·A12) ∪ σ(Φ)`. Every design is checked against that numerically
//! before it is returned.

mod placement;
mod poles;

pub use placement::{
    observability_staircase, partial_stabilizing_gain, stabilizing_gain, OutputInjection, PlacementOptions,
};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::model::{ModelError, StateSpaceSystem, TransformedSystem};
use crate::numerics::{self, Matrix, NumericsError, Spectrum, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error(
        "construction of reduced order proportional-integral observer is impossible: \
         the pair (A, C) is not detectable (unobservable modes at {})",
        fmt_poles(failing)
    )]
    Undetectable { failing: Vec<C64> },
    #[error("k = {k} exceeds rank(A12) = {q}: G·A12 cannot have full row rank")]
    OrderExceedsRank { k: usize, q: usize },
    #[error("invalid synthesis configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "target pole {} is only {separation:.3e} away from the eigenvalue {} of A22; \
         move the targets away from the open-loop spectrum",
        fmt_pole(pole),
        fmt_pole(eigenvalue)
    )]
    PoleSeparation {
        pole: C64,
        eigenvalue: C64,
        separation: f64,
    },
    #[error("pole placement failed after {attempts} parameter draws")]
    PlacementFailed { attempts: usize },
    #[error("numerical certification failed: {check} ({conditions})")]
    Certification {
        check: String,
        conditions: ConditionNumbers,
    },
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn fmt_pole(z: &C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn fmt_poles(zs: &[C64]) -> String {
    let parts: Vec<String> = zs.iter().map(fmt_pole).collect();
    format!("[{}]", parts.join(", "))
}

/// Condition numbers attached to a design so an ill-posed problem can be
/// re-posed. `None` where the factor was not formed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ConditionNumbers {
    #[serde(rename = "T")]
    pub t: Option<f64>,
    #[serde(rename = "P")]
    pub p: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    #[serde(rename = "Y")]
    pub y: Option<f64>,
}

impl std::fmt::Display for ConditionNumbers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |c| format!("{c:.3e}"));
        write!(
            f,
            "cond T = {}, P = {}, Q = {}, Y = {}",
            show(self.t),
            show(self.p),
            show(self.q),
            show(self.y)
        )
    }
}

/// How `Φ` is chosen.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PhiChoice {
    /// `diag(−1, …, −k)` scaled by `max(1, ρ(A22))`.
    #[default]
    Default,
    Matrix(Matrix),
    /// Realized as a real block-diagonal matrix.
    Poles(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    /// Dimension of the integral state ω.
    pub k: usize,
    /// `n − p` poles for `A22 + K·A12`; `None` picks `{−1, …, −(n−p)}`
    /// scaled by `max(1, ρ(A22))`.
    pub target_poles: Option<Vec<C64>>,
    pub phi: PhiChoice,
    /// Relative rank tolerance; `None` uses `max(rows, cols)·1e-12`.
    pub rank_tol: Option<f64>,
    pub stability_margin: f64,
    pub boundary_tol: f64,
    pub separation_tol: f64,
    /// Eigenvalue matching tolerance for the spectral split.
    pub certification_tol: f64,
    /// Bound on `‖G·A12·X + Φ‖∞`.
    pub identity_tol: f64,
    /// Seed for the pole-placement parameter.
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            k: 1,
            target_poles: None,
            phi: PhiChoice::Default,
            rank_tol: None,
            stability_margin: analysis::DEFAULT_STABILITY_MARGIN,
            boundary_tol: analysis::DEFAULT_BOUNDARY_TOL,
            separation_tol: numerics::DEFAULT_SEPARATION_TOL,
            certification_tol: 1e-6,
            identity_tol: 1e-9,
            seed: 0,
        }
    }
}

impl SynthesisConfig {
    pub fn with_k(k: usize) -> Self {
        SynthesisConfig {
            k,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), SynthesisError> {
        if self.k == 0 {
            return Err(SynthesisError::InvalidConfig(
                "k must be at least 1: the integral state ω is part of the observer".into(),
            ));
        }
        let tols = [
            ("rank tolerance", self.rank_tol.unwrap_or(1.0)),
            ("separation tolerance", self.separation_tol),
            ("certification tolerance", self.certification_tol),
            ("identity tolerance", self.identity_tol),
        ];
        for (name, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SynthesisError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.stability_margin >= 0.0 && self.boundary_tol >= 0.0) {
            return Err(SynthesisError::InvalidConfig(
                "stability margin and boundary tolerance must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// `A12 = P·[I_q 0; 0 0]·Q` with `P`, `Q` nonsingular.
#[derive(Debug, Clone, PartialEq)]
pub struct RankFactorization {
    pub p_mat: Matrix,
    pub q_mat: Matrix,
    pub q: usize,
    pub p_condition: f64,
    pub q_condition: f64,
}

impl RankFactorization {
    /// `[I_q 0; 0 0]` with the shape of `A12`.
    pub fn selector(&self) -> Matrix {
        let (p, r) = (self.p_mat.nrows(), self.q_mat.nrows());
        let mut j = Matrix::zeros(p, r);
        for i in 0..self.q {
            j[(i, i)] = 1.0;
        }
        j
    }

    pub fn reconstruct(&self) -> Matrix {
        &self.p_mat * self.selector() * &self.q_mat
    }
}

/// Rank factorization read off the SVD `A12 = U·Σ·Vᵀ`:
/// `P = U·diag(σ_1, …, σ_q, 1, …, 1)`, `Q = Vᵀ`.
pub fn rank_factorize(a12: &Matrix, tol: f64) -> Result<RankFactorization, SynthesisError> {
    let (p, r) = a12.shape();
    let dec = numerics::svd(a12)?;
    let q = dec
        .singular_values
        .first()
        .map_or(0, |&max| dec.singular_values.iter().filter(|&&s| s > tol * max).count());
    let (p_mat, q_mat) = if q == 0 {
        (Matrix::identity(p, p), Matrix::identity(r, r))
    } else {
        let mut p_mat = dec.u.clone();
        for (j, s) in dec.singular_values.iter().take(q).enumerate() {
            p_mat.column_mut(j).scale_mut(*s);
        }
        (p_mat, dec.v.transpose())
    };
    Ok(RankFactorization {
        p_condition: numerics::condition_number(&p_mat)?,
        q_condition: numerics::condition_number(&q_mat)?,
        p_mat,
        q_mat,
        q,
    })
}

/// Intermediate quantities of the construction, kept with the design.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Output-injection gain `K`.
    pub k_gain: Matrix,
    pub p_mat: Matrix,
    pub q_mat: Matrix,
    pub x: Matrix,
    pub phi: Matrix,
    pub q: usize,
    pub k: usize,
    /// Eigenvalues of `A22 + K·A12` that were not assigned: the unobservable
    /// block and any modes a partial placement left in place.
    pub unplaced_poles: Vec<C64>,
    /// `‖G·A12·X + Φ‖∞`.
    pub identity_residual: f64,
    /// Matching error between the composite spectrum and `σ(A22 + K·A12) ∪ σ(Φ)`.
    pub spectral_split_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverDesign {
    /// `(n−p) × p`.
    pub l: Matrix,
    /// `(n−p) × k`.
    pub f: Matrix,
    /// `k × p`.
    pub g: Matrix,
    pub certificate: Certificate,
    pub composite_spectrum: Spectrum,
    pub condition_numbers: ConditionNumbers,
}

impl ObserverDesign {
    /// Observer order `n − p`.
    pub fn order(&self) -> usize {
        self.l.nrows()
    }

    pub fn k(&self) -> usize {
        self.g.nrows()
    }

    pub fn p(&self) -> usize {
        self.g.ncols()
    }

    /// The error matrix `[[A22 − L·A12, F], [−G·A12, 0]]` governing `(e, ω)`.
    pub fn composite(&self, a22: &Matrix, a12: &Matrix) -> Matrix {
        composite_matrix(a22, a12, &self.l, &self.f, &self.g)
    }

    /// Slowest composite mode; negative for every certified design.
    pub fn slowest_rate(&self) -> f64 {
        self.composite_spectrum.max_real_part()
    }
}

pub fn composite_matrix(a22: &Matrix, a12: &Matrix, l: &Matrix, f: &Matrix, g: &Matrix) -> Matrix {
    let (r, k) = (a22.nrows(), g.nrows());
    let mut m = Matrix::zeros(r + k, r + k);
    m.view_mut((0, 0), (r, r)).copy_from(&(a22 - l * a12));
    m.view_mut((0, r), (r, k)).copy_from(f);
    m.view_mut((r, 0), (k, r)).copy_from(&(-(g * a12)));
    m
}

/// Assembles `G`, `X`, `L`, `F` from `K`, the rank factorization and `Φ`, and
/// certifies the result.
pub fn build_observer(
    a22: &Matrix,
    a12: &Matrix,
    k_gain: &Matrix,
    factor: &RankFactorization,
    phi: &Matrix,
    config: &SynthesisConfig,
) -> Result<ObserverDesign, SynthesisError> {
    let (p, r) = a12.shape();
    if a22.shape() != (r, r) || k_gain.shape() != (r, p) {
        return Err(SynthesisError::Dimension(format!(
            "expected A22 {r}x{r} and K {r}x{p}"
        )));
    }
    if factor.p_mat.shape() != (p, p) || factor.q_mat.shape() != (r, r) {
        return Err(SynthesisError::Dimension(format!(
            "expected P {p}x{p} and Q {r}x{r}"
        )));
    }
    if !phi.is_square() {
        return Err(SynthesisError::InvalidConfig("Φ must be square".into()));
    }
    let k = phi.nrows();
    if k == 0 {
        return Err(SynthesisError::InvalidConfig("k must be at least 1".into()));
    }
    if k > factor.q {
        return Err(SynthesisError::OrderExceedsRank { k, q: factor.q });
    }
    let phi_report = analysis::hurwitz_check(phi, config.stability_margin)?;
    if !phi_report.is_hurwitz {
        return Err(SynthesisError::InvalidConfig(format!(
            "Φ is not Hurwitz (largest real part {:.3e})",
            phi_report.max_real_part
        )));
    }
    let injected = a22 + k_gain * a12;
    let injected_report = analysis::hurwitz_check(&injected, config.stability_margin)?;
    if !injected_report.is_hurwitz {
        return Err(SynthesisError::InvalidConfig(format!(
            "K does not stabilize A22 + K·A12 (largest real part {:.3e})",
            injected_report.max_real_part
        )));
    }

    let mut conditions = ConditionNumbers {
        p: Some(factor.p_condition),
        q: Some(factor.q_condition),
        ..Default::default()
    };
    let certification = |check: String, conditions: ConditionNumbers| SynthesisError::Certification {
        check,
        conditions,
    };
    let p_inv = numerics::invert(&factor.p_mat)
        .map_err(|e| certification(format!("P cannot be inverted: {e}"), conditions))?;
    let q_inv = numerics::invert(&factor.q_mat)
        .map_err(|e| certification(format!("Q cannot be inverted: {e}"), conditions))?;

    let g = p_inv.rows(0, k).into_owned();
    let x = q_inv.columns(0, k) * (-phi);
    let l = &x * &g - k_gain;
    let f = -(a22 - &l * a12) * &x - &x * &g * a12 * &x;

    let identity_residual = numerics::norm_inf(&(&g * a12 * &x + phi));
    if identity_residual.is_nan() || identity_residual > config.identity_tol {
        return Err(certification(
            format!("‖G·A12·X + Φ‖∞ = {identity_residual:.3e}"),
            conditions,
        ));
    }
    let rank_tol = config
        .rank_tol
        .unwrap_or_else(|| numerics::default_rank_tol(k, p));
    let rank_g = numerics::numerical_rank(&g, rank_tol)?;
    if rank_g != k {
        return Err(certification(format!("rank(G) = {rank_g} < k = {k}"), conditions));
    }

    let composite = composite_matrix(a22, a12, &l, &f, &g);
    let composite_report = analysis::hurwitz_check(&composite, config.stability_margin)?;
    let split = injected_report.spectrum.union(&phi_report.spectrum);
    let spectral_split_error = composite_report.spectrum.match_error(&split);
    if spectral_split_error.is_nan() || spectral_split_error > config.certification_tol {
        conditions.t = None;
        return Err(certification(
            format!("composite spectrum deviates from σ(A22 + K·A12) ∪ σ(Φ) by {spectral_split_error:.3e}"),
            conditions,
        ));
    }
    if !composite_report.is_hurwitz {
        return Err(certification(
            format!(
                "composite error matrix is not Hurwitz (largest real part {:.3e})",
                composite_report.max_real_part
            ),
            conditions,
        ));
    }

    Ok(ObserverDesign {
        l,
        f,
        g,
        certificate: Certificate {
            k_gain: k_gain.clone(),
            p_mat: factor.p_mat.clone(),
            q_mat: factor.q_mat.clone(),
            x,
            phi: phi.clone(),
            q: factor.q,
            k,
            unplaced_poles: Vec::new(),
            identity_residual,
            spectral_split_error,
        },
        composite_spectrum: composite_report.spectrum,
        condition_numbers: conditions,
    })
}

/// A certified design together with the coordinate change it was built in.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedDesign {
    /// `T` with `C·T = [I_p, 0]`.
    pub t: Matrix,
    pub observer: ObserverDesign,
    pub injection: OutputInjection,
}

fn default_targets(r: usize, scale: f64, avoid: &Spectrum, separation_tol: f64) -> Vec<C64> {
    let base = |s: f64| -> Vec<C64> { (1..=r).map(|i| C64::new(-(i as f64) * s, 0.0)).collect() };
    let threshold = separation_tol.max(1e-6) * scale;
    (0..16)
        .map(|attempt| base(scale * (1.0 + 0.137 * attempt as f64)))
        .find(|cand| Spectrum::new(cand.clone()).separation(avoid) > threshold)
        .unwrap_or_else(|| base(scale))
}

/// `Φ` from the config. The default `diag(−1, …, −k)·scale` is stretched
/// away from `avoid` (the closed-loop spectrum): a shared eigenvalue would
/// make the composite spectrum defective and needlessly hard to certify.
fn resolve_phi(config: &SynthesisConfig, scale: f64, avoid: &Spectrum) -> Result<Matrix, SynthesisError> {
    let k = config.k;
    let phi = match &config.phi {
        PhiChoice::Default => {
            let base = |s: f64| -> Vec<C64> { (1..=k).map(|i| C64::new(-(i as f64) * s, 0.0)).collect() };
            let poles = (0..16)
                .map(|attempt| base(scale * (1.0 + 0.137 * attempt as f64)))
                .find(|cand| Spectrum::new(cand.clone()).separation(avoid) > 0.05 * scale)
                .unwrap_or_else(|| base(scale));
            Matrix::from_diagonal(&nalgebra::DVector::from_iterator(k, poles.iter().map(|z| z.re)))
        }
        PhiChoice::Matrix(m) => m.clone(),
        PhiChoice::Poles(list) => {
            let blocks = poles::group_poles(list, "Φ poles")?;
            poles::real_block_form(&blocks)
        }
    };
    if phi.shape() != (k, k) {
        return Err(SynthesisError::InvalidConfig(format!(
            "Φ must be {k}x{k}, got {}x{}",
            phi.nrows(),
            phi.ncols()
        )));
    }
    numerics::ensure_finite(&phi)?;
    Ok(phi)
}

/// End-to-end construction for a plant.
pub fn design(sys: &StateSpaceSystem, config: &SynthesisConfig) -> Result<CertifiedDesign, SynthesisError> {
    config.validate()?;
    let (n, p) = (sys.n(), sys.p());
    let r = n - p;
    let ts = TransformedSystem::new(
        sys,
        config.rank_tol.unwrap_or_else(|| numerics::default_rank_tol(p, n)),
    )?;

    let gate = analysis::detectable_pair_equivalence(sys, &ts, config.boundary_tol)?;
    if !gate.plant.detectable || !gate.reduced.detectable {
        let failing = gate
            .reduced
            .failing()
            .chain(gate.plant.failing())
            .map(|t| t.eigenvalue)
            .collect();
        return Err(SynthesisError::Undetectable { failing });
    }

    let a12_tol = config
        .rank_tol
        .unwrap_or_else(|| numerics::default_rank_tol(p, r));
    let factor = rank_factorize(&ts.a12, a12_tol)?;
    if config.k > factor.q {
        return Err(SynthesisError::OrderExceedsRank {
            k: config.k,
            q: factor.q,
        });
    }

    let a22_spectrum = numerics::eig(&ts.a22)?;
    let scale = a22_spectrum.spectral_radius().max(1.0);
    let opts = PlacementOptions {
        seed: config.seed,
        rank_tol: a12_tol,
        boundary_tol: config.boundary_tol,
        separation_tol: config.separation_tol,
        placement_tol: config.certification_tol,
    };
    let finish = |injection: OutputInjection| -> Result<(OutputInjection, ObserverDesign), SynthesisError> {
        let phi = resolve_phi(config, scale, &injection.closed_loop)?;
        let mut observer = build_observer(&ts.a22, &ts.a12, &injection.gain, &factor, &phi, config)
            .map_err(|e| match e {
                SynthesisError::Certification { check, mut conditions } => {
                    conditions.t = Some(ts.t_condition);
                    conditions.y = injection.y_condition;
                    SynthesisError::Certification { check, conditions }
                }
                other => other,
            })?;
        observer.certificate.unplaced_poles = injection.unplaced.clone();
        observer.condition_numbers.t = Some(ts.t_condition);
        observer.condition_numbers.y = injection.y_condition;
        Ok((injection, observer))
    };
    let (injection, observer) = match &config.target_poles {
        Some(t) => finish(stabilizing_gain(&ts.a22, &ts.a12, t, &opts)?)?,
        None => match stabilizing_gain(
            &ts.a22,
            &ts.a12,
            &default_targets(r, scale, &a22_spectrum, config.separation_tol),
            &opts,
        )
        .and_then(finish)
        {
            // Widely spread real targets can make the closed-loop spectrum too
            // sensitive to certify when few outputs drive many states; targets
            // that stay close to the open-loop spectrum need far smaller gains.
            Err(SynthesisError::PlacementFailed { .. } | SynthesisError::Certification { .. }) => {
                finish(partial_stabilizing_gain(&ts.a22, &ts.a12, 0.05 * scale, 0.1 * scale, &opts)?)?
            }
            other => other?,
        },
    };
    Ok(CertifiedDesign {
        t: ts.t,
        observer,
        injection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn real(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn scalar_factor() -> RankFactorization {
        rank_factorize(&dmatrix![1.0], 1e-12).unwrap()
    }

    #[test]
    fn rank_factorization_examples() {
        let f = rank_factorize(&dmatrix![1.0, 0.0; 0.0, 0.0], 1e-12).unwrap();
        assert_eq!(f.q, 1);
        assert!((&f.p_mat - Matrix::identity(2, 2)).norm() < 1e-15);
        assert!((&f.q_mat - Matrix::identity(2, 2)).norm() < 1e-15);

        let f = rank_factorize(&Matrix::zeros(2, 3), 1e-12).unwrap();
        assert_eq!(f.q, 0);
        assert_eq!(f.p_mat, Matrix::identity(2, 2));
        assert_eq!(f.q_mat, Matrix::identity(3, 3));

        let a12 = dmatrix![1.0, 2.0, -1.0, 0.5; 0.0, 1.0, 3.0, -2.0];
        let f = rank_factorize(&a12, 1e-12).unwrap();
        assert_eq!(f.q, 2);
        assert!((f.reconstruct() - &a12).norm() <= 1e-10 * (1.0 + a12.norm()));
    }

    #[test]
    fn scalar_chain_construction() {
        let cfg = SynthesisConfig::default();
        let d = build_observer(&dmatrix![1.0], &dmatrix![1.0], &dmatrix![-3.0], &scalar_factor(), &dmatrix![-1.0], &cfg)
            .unwrap();
        assert!((d.certificate.x[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((d.g[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((d.l[(0, 0)] - 4.0).abs() < 1e-15);
        assert!((d.f[(0, 0)] - 2.0).abs() < 1e-15);
        let comp = d.composite(&dmatrix![1.0], &dmatrix![1.0]);
        assert_eq!(comp, dmatrix![-3.0, 2.0; -1.0, 0.0]);
        assert!(d.composite_spectrum.match_error(&vec![real(-1.0), real(-2.0)].into()) < 1e-14);
    }

    #[test]
    fn scalar_chain_with_faster_phi() {
        let cfg = SynthesisConfig::default();
        let d = build_observer(&dmatrix![1.0], &dmatrix![1.0], &dmatrix![-3.0], &scalar_factor(), &dmatrix![-5.0], &cfg)
            .unwrap();
        assert!((d.certificate.x[(0, 0)] - 5.0).abs() < 1e-14);
        assert!((d.l[(0, 0)] - 8.0).abs() < 1e-14);
        assert!((d.f[(0, 0)] - 10.0).abs() < 1e-13);
        assert!(d.composite_spectrum.match_error(&vec![real(-2.0), real(-5.0)].into()) < 1e-12);
    }

    #[test]
    fn build_rejects_bad_inputs() {
        let cfg = SynthesisConfig::default();
        let a = dmatrix![1.0];
        let err = build_observer(&a, &a, &dmatrix![-3.0], &scalar_factor(), &dmatrix![1.0], &cfg).unwrap_err();
        assert!(matches!(err, SynthesisError::InvalidConfig(_)));
        let err = build_observer(&a, &a, &dmatrix![-3.0], &scalar_factor(), &Matrix::zeros(0, 0), &cfg)
            .unwrap_err();
        assert!(matches!(err, SynthesisError::InvalidConfig(_)));
        let err = build_observer(&a, &a, &dmatrix![0.0], &scalar_factor(), &dmatrix![-1.0], &cfg).unwrap_err();
        assert!(matches!(err, SynthesisError::InvalidConfig(_)));
        let err = build_observer(&a, &a, &dmatrix![-3.0], &scalar_factor(), &(Matrix::identity(2, 2) * -1.0), &cfg)
            .unwrap_err();
        assert_eq!(err, SynthesisError::OrderExceedsRank { k: 2, q: 1 });
    }

    fn demo() -> StateSpaceSystem {
        StateSpaceSystem::new(
            dmatrix![0.0, 1.0; 0.0, 1.0],
            dmatrix![0.0; 1.0],
            dmatrix![1.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn demo_design_reproduces_scalar_chain() {
        let cfg = SynthesisConfig {
            target_poles: Some(vec![real(-2.0)]),
            phi: PhiChoice::Matrix(dmatrix![-1.0]),
            ..Default::default()
        };
        let d = design(&demo(), &cfg).unwrap();
        assert!((&d.t - Matrix::identity(2, 2)).norm() < 1e-15);
        let o = &d.observer;
        assert!((o.l[(0, 0)] - 4.0).abs() < 1e-12);
        assert!((o.f[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((o.g[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((o.slowest_rate() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_zero_and_k_above_rank_are_refused() {
        let err = design(&demo(), &SynthesisConfig::with_k(0)).unwrap_err();
        assert!(matches!(err, SynthesisError::InvalidConfig(_)));
        let err = design(&demo(), &SynthesisConfig::with_k(2)).unwrap_err();
        assert_eq!(err, SynthesisError::OrderExceedsRank { k: 2, q: 1 });
    }

    #[test]
    fn unstable_unobservable_mode_is_refused() {
        let sys = StateSpaceSystem::new(
            Matrix::identity(2, 2),
            dmatrix![1.0; 1.0],
            dmatrix![1.0, 0.0],
        )
        .unwrap();
        let err = design(&sys, &SynthesisConfig::default()).unwrap_err();
        assert!(matches!(err, SynthesisError::Undetectable { .. }));
        assert!(err.to_string().contains("is impossible"));
    }

    #[test]
    fn hurwitz_plant_always_has_a_design() {
        let sys = StateSpaceSystem::new(
            dmatrix![-1.0, 2.0, 0.0, 1.0; 0.0, -2.0, 1.0, 0.0; 0.0, 0.0, -3.0, 1.0; 0.0, 0.0, 0.0, -0.5],
            dmatrix![1.0; 0.0; 0.0; 1.0],
            dmatrix![0.0, 1.0, 0.0, 0.0; 0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        let d = design(&sys, &SynthesisConfig::with_k(1)).unwrap();
        assert!(d.observer.slowest_rate() < 0.0);
    }

    #[test]
    fn phi_from_complex_poles() {
        let sys = StateSpaceSystem::new(
            dmatrix![0.0, 1.0, 0.0, 0.0; 0.0, 0.0, 1.0, 0.0; 0.0, 0.0, 0.0, 1.0; -1.0, 0.5, 0.0, 0.3],
            dmatrix![0.0; 0.0; 0.0; 1.0],
            dmatrix![1.0, 0.0, 0.0, 0.0; 0.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let cfg = SynthesisConfig {
            k: 2,
            phi: PhiChoice::Poles(vec![C64::new(-1.0, 1.0), C64::new(-1.0, -1.0)]),
            target_poles: Some(vec![real(-3.0), real(-4.0)]),
            ..Default::default()
        };
        let d = design(&sys, &cfg).unwrap();
        let o = &d.observer;
        assert_eq!((o.l.shape(), o.f.shape(), o.g.shape()), ((2, 2), (2, 2), (2, 2)));
        let expected: Spectrum =
            vec![real(-3.0), real(-4.0), C64::new(-1.0, 1.0), C64::new(-1.0, -1.0)].into();
        assert!(o.composite_spectrum.match_error(&expected) < 1e-8);
    }
}
