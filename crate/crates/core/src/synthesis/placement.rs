//! Output injection: choose `K` so that `A22 + K·A12` has a prescribed stable
//! spectrum.
//!
//! The dual state-feedback problem on `(A22ᵀ, A12ᵀ)` is solved with the
//! parametric Sylvester method: for a real block-diagonal `Λ` carrying the
//! targets and a seeded parameter `W`, solve `A22ᵀ·Y − Y·Λ = −A12ᵀ·W`; then
//! `A22ᵀ + A12ᵀ·W·Y⁻¹ = Y·Λ·Y⁻¹` and `K = (W·Y⁻¹)ᵀ`. Pairs that are only
//! detectable go through an orthogonal observability staircase first and only
//! the observable block is placed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::analysis;
use crate::numerics::{self, Matrix, Spectrum, C64};

use super::poles::{self, PoleBlock};
use super::SynthesisError;

/// Parameter draws tried per coordinate system before giving up.
const MAX_ATTEMPTS: u64 = 5;
/// `Y` is treated as singular above this condition number.
const MAX_Y_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementOptions {
    pub seed: u64,
    pub rank_tol: f64,
    pub boundary_tol: f64,
    pub separation_tol: f64,
    /// Allowed distance between achieved and requested poles, relative to
    /// `max(1, largest |pole|)`.
    pub placement_tol: f64,
}

impl Default for PlacementOptions {
    fn default() -> Self {
        PlacementOptions {
            seed: 0,
            rank_tol: 1e-12,
            boundary_tol: analysis::DEFAULT_BOUNDARY_TOL,
            separation_tol: numerics::DEFAULT_SEPARATION_TOL,
            placement_tol: 1e-6,
        }
    }
}

/// Result of [`stabilizing_gain`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputInjection {
    /// `K`, `(n−p) × p`.
    pub gain: Matrix,
    /// Spectrum of `A22 + K·A12`.
    pub closed_loop: Spectrum,
    /// Requested poles that were actually assigned.
    pub placed: Vec<C64>,
    /// Eigenvalues kept as they are: the unobservable block, plus the modes
    /// a partial placement leaves in place.
    pub unplaced: Vec<C64>,
    /// Dimension of the observable block whose poles were assigned.
    pub observable_dim: usize,
    /// Largest distance between `closed_loop` and `placed ∪ unplaced`.
    pub placement_error: f64,
    pub y_condition: Option<f64>,
}

/// Orthogonal `U` and observable dimension `r_o` with
/// `Uᵀ·A·U = [[Ao, 0], [*, Au]]` and `C·U = [Co, 0]`, `(Ao, Co)` observable.
pub fn observability_staircase(
    a: &Matrix,
    c: &Matrix,
    rank_tol: f64,
) -> Result<(Matrix, usize), SynthesisError> {
    let r = a.nrows();
    let scale = a.norm().max(c.norm());
    let mut u = Matrix::identity(r, r);
    if scale == 0.0 || r == 0 {
        return Ok((u, 0));
    }
    let abs_tol = rank_tol * scale;
    // Controllability staircase of the dual pair (Aᵀ, Cᵀ).
    let mut f = a.transpose();
    let mut z = c.transpose();
    let mut offset = 0;
    while offset < r {
        let dec = numerics::svd(&z)?;
        let rho = dec.singular_values.iter().filter(|&&s| s > abs_tol).count();
        if rho == 0 {
            break;
        }
        let mut h = Matrix::identity(r, r);
        h.view_mut((offset, offset), (r - offset, r - offset))
            .copy_from(&dec.u);
        f = h.transpose() * f * &h;
        u *= &h;
        let prev = offset;
        offset += rho;
        if offset < r {
            z = f.view((offset, prev), (r - offset, rho)).into_owned();
        }
    }
    Ok((u, offset))
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

struct Placed {
    gain: Matrix,
    y_condition: f64,
}

/// Parametric Sylvester placement on `(a, c)`. Every seeded `W` draw is
/// tried and the accurate placement with the best-conditioned `Y` is kept.
fn sylvester_place(
    a: &Matrix,
    c: &Matrix,
    blocks: &[PoleBlock],
    opts: &PlacementOptions,
    seed_offset: u64,
) -> Result<Option<Placed>, SynthesisError> {
    let r = a.nrows();
    let p = c.nrows();
    let lambda = poles::real_block_form(blocks);
    let targets = Spectrum::new(poles::flatten(blocks));
    let tol = opts.placement_tol * targets.spectral_radius().max(1.0);
    let at = a.transpose();
    let ct = c.transpose();
    let mut best: Option<Placed> = None;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = opts.seed.wrapping_add(seed_offset).wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = gaussian(&mut rng, p, r);
        let rhs = -(&ct * &w);
        let mut y = match numerics::solve_sylvester_with_tol(&at, &lambda, &rhs, opts.separation_tol) {
            Ok(y) => y,
            Err(numerics::NumericsError::SpectraOverlap { .. }) => {
                return Err(separation_error(a, &targets)?)
            }
            Err(_) => continue,
        };
        // Scaling the columns of one Λ block together in both Y and W keeps
        // the Sylvester equation and K, and removes spurious ill-conditioning.
        let mut col = 0;
        for block in blocks {
            let d = block.dim();
            let norm = y.columns(col, d).norm();
            if norm > 0.0 {
                y.columns_mut(col, d).unscale_mut(norm);
                w.columns_mut(col, d).unscale_mut(norm);
            }
            col += d;
        }
        let y_condition = numerics::condition_number(&y)?;
        if y_condition > MAX_Y_CONDITION || best.as_ref().is_some_and(|b| b.y_condition <= y_condition) {
            continue;
        }
        // K = (W·Y⁻¹)ᵀ = Y⁻ᵀ·Wᵀ
        let gain = match numerics::solve_linear(&y.transpose(), &w.transpose()) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let achieved = numerics::eig(&(a + &gain * c))?;
        if achieved.match_error(&targets) <= tol {
            best = Some(Placed { gain, y_condition });
        }
    }
    Ok(best)
}

fn separation_error(a: &Matrix, targets: &Spectrum) -> Result<SynthesisError, SynthesisError> {
    let eigs = numerics::eig(a)?;
    let (mut pole, mut eigenvalue, mut best) = (C64::default(), C64::default(), f64::INFINITY);
    for t in targets.eigenvalues() {
        for e in eigs.eigenvalues() {
            let d = (t - e).norm();
            if d < best {
                (pole, eigenvalue, best) = (*t, *e, d);
            }
        }
    }
    Ok(SynthesisError::PoleSeparation {
        pole,
        eigenvalue,
        separation: best,
    })
}

/// Computes `K` with `A22 + K·A12` Hurwitz, assigning `target_poles` to the
/// observable part of `(A22, A12)`.
pub fn stabilizing_gain(
    a22: &Matrix,
    a12: &Matrix,
    target_poles: &[C64],
    opts: &PlacementOptions,
) -> Result<OutputInjection, SynthesisError> {
    let r = a22.nrows();
    if !a22.is_square() || a12.ncols() != r {
        return Err(SynthesisError::Dimension(format!(
            "A22 must be square and A12 must have {r} columns"
        )));
    }
    let p = a12.nrows();
    if target_poles.len() != r {
        return Err(SynthesisError::InvalidConfig(format!(
            "{} target poles supplied, the observer order is {r}",
            target_poles.len()
        )));
    }
    let blocks = poles::group_poles(target_poles, "target poles")?;

    let (u, r_o) = observability_staircase(a22, a12, opts.rank_tol)?;
    let a_t = u.transpose() * a22 * &u;
    let unobservable = a_t.view((r_o, r_o), (r - r_o, r - r_o)).into_owned();
    let unplaced = numerics::eig(&unobservable)?;
    if unplaced.max_real_part() >= -opts.boundary_tol {
        let failing = unplaced
            .eigenvalues()
            .iter()
            .copied()
            .filter(|z| z.re >= -opts.boundary_tol)
            .collect();
        return Err(SynthesisError::Undetectable { failing });
    }

    let chosen = poles::select(&blocks, r_o);
    let placed = poles::flatten(&chosen);
    let (gain, y_condition) = if r_o == 0 {
        (Matrix::zeros(r, p), None)
    } else {
        let direct = if r_o == r {
            sylvester_place(a22, a12, &chosen, opts, 0)?
        } else {
            None
        };
        match direct {
            Some(pl) => (pl.gain, Some(pl.y_condition)),
            None => {
                let ao = a_t.view((0, 0), (r_o, r_o)).into_owned();
                let co = (a12 * &u).columns(0, r_o).into_owned();
                let pl = sylvester_place(&ao, &co, &chosen, opts, MAX_ATTEMPTS)?.ok_or(
                    SynthesisError::PlacementFailed {
                        attempts: 2 * MAX_ATTEMPTS as usize,
                    },
                )?;
                (u.columns(0, r_o) * pl.gain, Some(pl.y_condition))
            }
        }
    };

    let closed_loop = numerics::eig(&(a22 + &gain * a12))?;
    let expected = Spectrum::new(placed.clone()).union(&unplaced);
    let placement_error = closed_loop.match_error(&expected);
    let tol = opts.placement_tol * expected.spectral_radius().max(1.0);
    if placement_error > tol {
        return Err(SynthesisError::Certification {
            check: format!(
                "closed-loop poles of A22 + K·A12 miss their targets by {placement_error:.3e}"
            ),
            conditions: super::ConditionNumbers {
                y: y_condition,
                ..Default::default()
            },
        });
    }
    Ok(OutputInjection {
        gain,
        closed_loop,
        placed,
        unplaced: unplaced.into_vec(),
        observable_dim: r_o,
        placement_error,
        y_condition,
    })
}

/// Targets for the modes being moved: real parts `−(|Re λ| + shift)`,
/// imaginary parts kept, coincident real targets spread apart.
fn shifted_targets(spectrum: &Spectrum, shift: f64) -> Vec<C64> {
    let mut targets: Vec<C64> = spectrum
        .eigenvalues()
        .iter()
        .map(|z| C64::new(-(z.re.abs() + shift), z.im))
        .collect();
    let gap = 0.05 * shift;
    let mut reals: Vec<usize> = (0..targets.len()).filter(|&i| targets[i].im == 0.0).collect();
    reals.sort_by(|&i, &j| targets[j].re.total_cmp(&targets[i].re));
    for w in 1..reals.len() {
        let (prev, cur) = (targets[reals[w - 1]].re, targets[reals[w]].re);
        if prev - cur < gap {
            targets[reals[w]].re = prev - gap;
        }
    }
    targets
}

/// Computes `K` with `A22 + K·A12` Hurwitz by moving only the eigenvalues
/// with real part `≥ −threshold`, each to real part `−(|Re λ| + shift)`;
/// every other eigenvalue of `A22` is kept and reported as unplaced.
///
/// Modes are moved one real eigenvalue or conjugate pair at a time, fastest
/// growing first. An ordered Schur form `Zᵀ·A·Z = [[T11, T12], [0, T22]]`
/// puts the mode in `T11`; with `K = Z₁·K1` the closed loop stays block upper
/// triangular, so only `σ(T11)` moves and `σ(T22)` is kept exactly.
pub fn partial_stabilizing_gain(
    a22: &Matrix,
    a12: &Matrix,
    threshold: f64,
    shift: f64,
    opts: &PlacementOptions,
) -> Result<OutputInjection, SynthesisError> {
    let r = a22.nrows();
    if !a22.is_square() || a12.ncols() != r {
        return Err(SynthesisError::Dimension(format!(
            "A22 must be square and A12 must have {r} columns"
        )));
    }
    if !(threshold >= 0.0 && shift > threshold && shift.is_finite()) {
        return Err(SynthesisError::InvalidConfig(format!(
            "partial placement needs 0 ≤ threshold < shift < ∞, got {threshold} and {shift}"
        )));
    }
    let mut gain = Matrix::zeros(r, a12.nrows());
    let mut placed = Vec::new();
    let mut unplaced = Vec::new();
    let mut y_condition: Option<f64> = None;
    let mut observable_dim = 0;
    // Every step moves at least one eigenvalue below −shift for good, so at
    // most r steps are needed.
    for _ in 0..r {
        let closed = a22 + &gain * a12;
        let worst = numerics::eig(&closed)?
            .eigenvalues()
            .iter()
            .copied()
            .filter(|ev| ev.re >= -threshold && !unplaced.iter().any(|u: &C64| (u - ev).norm() == 0.0))
            .max_by(|x, y| x.re.total_cmp(&y.re));
        let Some(worst) = worst else { break };
        let (z, t, s) = numerics::ordered_schur(&closed, |ev| (ev.re - worst.re).abs() <= 1e-12 * (1.0 + worst.norm()))?;
        if s == 0 {
            return Err(SynthesisError::PlacementFailed { attempts: 0 });
        }
        let t11 = t.view((0, 0), (s, s)).into_owned();
        let c1 = (a12 * &z).columns(0, s).into_owned();
        let targets = shifted_targets(&numerics::eig(&t11)?, shift);
        let inner = stabilizing_gain(&t11, &c1, &targets, opts)?;
        gain += z.columns(0, s) * &inner.gain;
        placed.extend(inner.placed);
        unplaced.extend(inner.unplaced);
        observable_dim += inner.observable_dim;
        if let Some(c) = inner.y_condition {
            y_condition = Some(y_condition.map_or(c, |old| old.max(c)));
        }
    }
    let kept = numerics::eig(a22)?
        .eigenvalues()
        .iter()
        .copied()
        .filter(|ev| ev.re < -threshold)
        .collect::<Vec<_>>();
    unplaced.extend(kept);

    let closed_loop = numerics::eig(&(a22 + &gain * a12))?;
    let expected = Spectrum::new(placed.clone()).union(&Spectrum::new(unplaced.clone()));
    let placement_error = closed_loop.match_error(&expected);
    let tol = opts.placement_tol * expected.spectral_radius().max(1.0);
    if placement_error > tol {
        return Err(SynthesisError::Certification {
            check: format!(
                "closed-loop poles of A22 + K·A12 miss their targets by {placement_error:.3e}"
            ),
            conditions: super::ConditionNumbers {
                y: y_condition,
                ..Default::default()
            },
        });
    }
    Ok(OutputInjection {
        gain,
        closed_loop,
        placed,
        unplaced,
        observable_dim,
        placement_error,
        y_condition,
    })
}
