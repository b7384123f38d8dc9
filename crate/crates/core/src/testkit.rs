//! Seeded system generators and brute-force reference computations used by
//! the tests, the examples and the `random` subcommand.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::model::StateSpaceSystem;
use crate::numerics::{Matrix, Spectrum, C64};
use crate::synthesis::{PhiChoice, SynthesisConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// Observable block plus a stable unobservable block.
    Detectable,
    /// Same as `Detectable` with an unobservable eigenvalue planted at `+1`.
    UndetectablePlanted,
    /// `(A, C)` observable.
    Observable,
    /// `A` Hurwitz, `C` arbitrary.
    Hurwitz,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::Detectable,
        SystemKind::UndetectablePlanted,
        SystemKind::Observable,
        SystemKind::Hurwitz,
    ];

    /// Ground-truth detectability of generated systems.
    pub fn detectable(self) -> bool {
        self != SystemKind::UndetectablePlanted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// Integral-state dimension the system must support (`rank(A12) ≥ k`).
    pub k: usize,
    pub seed: u64,
    pub kind: SystemKind,
}

impl GeneratorSpec {
    pub fn new(n: usize, m: usize, p: usize, seed: u64, kind: SystemKind) -> Self {
        GeneratorSpec { n, m, p, k: 1, seed, kind }
    }

    /// Whether the dimensions leave room for an unobservable block after an
    /// observable block of size `p + k`.
    pub fn is_valid(&self) -> bool {
        let min_observable = self.p + self.k;
        let needs_unobservable = matches!(
            self.kind,
            SystemKind::Detectable | SystemKind::UndetectablePlanted
        );
        self.p >= 1
            && self.m >= 1
            && self.k >= 1
            && self.p < self.n
            && if needs_unobservable {
                min_observable < self.n
            } else {
                min_observable <= self.n
            }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian with the signs of
/// `diag(R)` folded into `Q`.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Matrix {
    let qr = gaussian(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Upper-triangular matrix with the given diagonal and small Gaussian coupling.
fn triangular_with_diagonal(rng: &mut impl Rng, diag: &[f64]) -> Matrix {
    let n = diag.len();
    let scale = 0.5 / (n as f64).sqrt();
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if j > i {
            scale * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        }
    })
}

/// `rows × cols` matrix with singular values drawn from `[0.5, 1.5]`.
fn well_conditioned(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let (u, v) = (random_orthogonal(rng, rows), random_orthogonal(rng, cols));
    let mut sigma = Matrix::zeros(rows, cols);
    for i in 0..rows.min(cols) {
        sigma[(i, i)] = rng.random_range(0.5..1.5);
    }
    u * sigma * v.transpose()
}

/// Observable pair `(Ao, Co)` in observability staircase form: `Co = [C1, 0]`
/// and `Ao` block lower Hessenberg with full-rank, well-conditioned
/// superdiagonal blocks, so the pair keeps a margin from unobservability.
/// The remaining entries are Gaussian.
fn observable_block(rng: &mut impl Rng, n: usize, p: usize) -> (Matrix, Matrix) {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let b = left.min(p);
        sizes.push(b);
        left -= b;
    }
    // Circular law: the spectrum fills roughly the unit disk around −0.5, so
    // only a minority of modes is unstable.
    let mut a = gaussian(rng, n, n) / (n as f64).sqrt() - Matrix::identity(n, n) * 0.5;
    let mut offset = 0;
    for w in sizes.windows(2) {
        let (top, next) = (w[0], w[1]);
        for i in offset..offset + top {
            for j in offset + top..n {
                a[(i, j)] = 0.0;
            }
        }
        a.view_mut((offset, offset + top), (top, next))
            .copy_from(&well_conditioned(rng, top, next));
        offset += top;
    }
    let mut c = Matrix::zeros(p, n);
    c.view_mut((0, 0), (p, sizes[0])).copy_from(&well_conditioned(rng, p, sizes[0]));
    (a, c)
}

fn stable_diagonal(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| -rng.random_range(0.5..2.0)).collect()
}

/// Generates a system whose detectability is known by construction.
///
/// The unscrambled form is the observability staircase
/// `A = [[Ao, 0], [A21, Au]]`, `C = [Co, 0]`; a random orthogonal similarity
/// then hides the structure.
///
/// # Panics
///
/// If the spec is not [`GeneratorSpec::is_valid`].
pub fn gen_system(spec: &GeneratorSpec) -> StateSpaceSystem {
    assert!(spec.is_valid(), "invalid generator spec {spec:?}");
    let mut rng = rng(spec.seed);
    let GeneratorSpec { n, m, p, k, .. } = *spec;
    let (a, c) = match spec.kind {
        SystemKind::Hurwitz => {
            let diag = stable_diagonal(&mut rng, n);
            (triangular_with_diagonal(&mut rng, &diag), gaussian(&mut rng, p, n))
        }
        SystemKind::Observable => observable_block(&mut rng, n, p),
        SystemKind::Detectable | SystemKind::UndetectablePlanted => {
            let n_o = rng.random_range(p + k..n);
            let n_u = n - n_o;
            let (ao, co) = observable_block(&mut rng, n_o, p);
            let mut diag = stable_diagonal(&mut rng, n_u);
            if spec.kind == SystemKind::UndetectablePlanted {
                diag[rng.random_range(0..n_u)] = 1.0;
            }
            let au = triangular_with_diagonal(&mut rng, &diag);
            let coupling = gaussian(&mut rng, n_u, n_o) * 0.5;
            let mut a = Matrix::zeros(n, n);
            a.view_mut((0, 0), (n_o, n_o)).copy_from(&ao);
            a.view_mut((n_o, 0), (n_u, n_o)).copy_from(&coupling);
            a.view_mut((n_o, n_o), (n_u, n_u)).copy_from(&au);
            let mut c = Matrix::zeros(p, n);
            c.view_mut((0, 0), (p, n_o)).copy_from(&co);
            (a, c)
        }
    };
    let b = gaussian(&mut rng, n, m);
    let s = random_orthogonal(&mut rng, n);
    let st = s.transpose();
    StateSpaceSystem::new(&st * a * &s, st * b, c * s).expect("generated C has full row rank")
}

/// A random valid spec with `n ≤ max_n`, `p ≤ 5`.
pub fn random_spec(rng: &mut impl Rng, max_n: usize, kind: SystemKind) -> GeneratorSpec {
    let max_n = max_n.max(4);
    loop {
        let n = rng.random_range(2..=max_n);
        let p = rng.random_range(1..=n.saturating_sub(1).clamp(1, 5));
        let spec = GeneratorSpec {
            n,
            m: rng.random_range(1..=3),
            p,
            k: 1,
            seed: rng.random(),
            kind,
        };
        if spec.is_valid() {
            return spec;
        }
    }
}

/// Conjugate-closed list of `count` poles with real parts in `re_range`.
pub fn random_poles(rng: &mut impl Rng, count: usize, re_range: (f64, f64)) -> Vec<C64> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let re = rng.random_range(re_range.0..re_range.1);
        if count - out.len() >= 2 && rng.random_bool(0.3) {
            let im = rng.random_range(0.2..2.0);
            out.push(C64::new(re, im));
            out.push(C64::new(re, -im));
        } else {
            out.push(C64::new(re, 0.0));
        }
    }
    out
}

/// Random Hurwitz `k × k` matrix `S·Λ·S⁻¹` with `S` well conditioned.
pub fn random_hurwitz(rng: &mut impl Rng, k: usize, re_range: (f64, f64)) -> Matrix {
    let poles = random_poles(rng, k, re_range);
    let mut lambda = Matrix::zeros(k, k);
    let mut i = 0;
    while i < k {
        let z = poles[i];
        if z.im == 0.0 {
            lambda[(i, i)] = z.re;
            i += 1;
        } else {
            lambda[(i, i)] = z.re;
            lambda[(i + 1, i + 1)] = z.re;
            lambda[(i, i + 1)] = z.im;
            lambda[(i + 1, i)] = -z.im;
            i += 2;
        }
    }
    let s = Matrix::identity(k, k) + gaussian(rng, k, k) * (0.3 / (k as f64).sqrt());
    let s_inv = s.clone().try_inverse().expect("perturbed identity is invertible");
    s * lambda * s_inv
}

/// Targets that move every eigenvalue of `open_loop` to real part
/// `−(|Re λ| + δ)`, keeping its imaginary part; `δ` is drawn from `delta`
/// once per real eigenvalue or conjugate pair.
pub fn shifted_targets(rng: &mut impl Rng, open_loop: &Spectrum, delta: (f64, f64)) -> Vec<C64> {
    let mut targets: Vec<C64> = Vec::with_capacity(open_loop.len());
    let mut previous: Option<C64> = None;
    for z in open_loop.eigenvalues() {
        let target = match (previous, targets.last()) {
            // The second member of a conjugate pair reuses the first one's shift.
            (Some(prev), Some(t)) if z.im < 0.0 && prev == z.conj() => C64::new(t.re, z.im),
            _ => C64::new(-(z.re.abs() + rng.random_range(delta.0..delta.1)), z.im),
        };
        targets.push(target);
        previous = Some(*z);
    }
    targets
}

/// A random valid synthesis config for a plant with open-loop spectrum
/// `σ(A22)` and `rank(A12) = q ≥ 1`.
///
/// The targets are [`shifted_targets`] with `δ ∈ [0.1, 1)`. Targets drawn
/// independently of the plant would make placement ill-posed for
/// single-output plants of moderate size: the closed-loop spectrum becomes
/// too sensitive to certify.
pub fn random_config(rng: &mut impl Rng, open_loop: &Spectrum, q: usize) -> SynthesisConfig {
    let k = rng.random_range(1..=q.max(1));
    let phi = if rng.random_bool(0.5) {
        PhiChoice::Matrix(random_hurwitz(rng, k, (-3.0, -0.5)))
    } else {
        PhiChoice::Poles(random_poles(rng, k, (-3.0, -0.5)))
    };
    SynthesisConfig {
        k,
        target_poles: Some(shifted_targets(rng, open_loop, (0.1, 1.0))),
        phi,
        seed: rng.random(),
        ..Default::default()
    }
}

/// Matrix exponential `exp(M·t)` by scaling and squaring of a degree-20
/// Taylor polynomial.
pub fn expm_oracle(m: &Matrix, t: f64) -> Matrix {
    assert!(m.is_square(), "expm_oracle needs a square matrix");
    let n = m.nrows();
    let a = m * t;
    let norm = a.iter().map(|v| v.abs()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);
    let mut term = Matrix::identity(n, n);
    let mut sum = Matrix::identity(n, n);
    for j in 1..=20 {
        term = &term * &scaled / j as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Solves `A·X − X·B = C` through the vectorized system
/// `(I ⊗ A − Bᵀ ⊗ I)·vec(X) = vec(C)` with a full-pivoting LU.
pub fn kronecker_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Option<Matrix> {
    let (r, s) = (a.nrows(), b.nrows());
    let big = Matrix::identity(s, s).kronecker(a) - b.transpose().kronecker(&Matrix::identity(r, r));
    let rhs = DVector::from_column_slice(c.as_slice());
    let x = big.full_piv_lu().solve(&rhs)?;
    Some(Matrix::from_column_slice(r, s, x.as_slice()))
}

/// `[C; C·A; …; C·A^{n−1}]`.
pub fn observability_matrix(a: &Matrix, c: &Matrix) -> Matrix {
    let (n, p) = (a.nrows(), c.nrows());
    let mut o = Matrix::zeros(n * p, n);
    let mut block = c.clone();
    for i in 0..n {
        o.view_mut((i * p, 0), (p, n)).copy_from(&block);
        block = &block * a;
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;
    use crate::numerics;
    use nalgebra::dmatrix;

    #[test]
    fn expm_examples() {
        let z = expm_oracle(&Matrix::zeros(3, 3), 2.0);
        assert_eq!(z, Matrix::identity(3, 3));
        let d = expm_oracle(&dmatrix![-1.0, 0.0; 0.0, -2.0], 1.0);
        let e = dmatrix![(-1f64).exp(), 0.0; 0.0, (-2f64).exp()];
        assert!((d - &e).norm() <= 1e-12 * e.norm());
    }

    #[test]
    fn expm_matches_eigen_closed_form() {
        // [[−3, 2], [−1, 0]] = V·diag(−1, −2)·V⁻¹ with V = [[1, 2], [1, 1]].
        let m = dmatrix![-3.0, 2.0; -1.0, 0.0];
        for t in [0.1_f64, 1.0, 5.0, 20.0] {
            let (e1, e2) = ((-t).exp(), (-2.0 * t).exp());
            let closed = dmatrix![-e1 + 2.0 * e2, 2.0 * e1 - 2.0 * e2; -e1 + e2, 2.0 * e1 - e2];
            let approx = expm_oracle(&m, t);
            assert!((approx - &closed).norm() <= 1e-10 * closed.norm(), "t = {t}");
        }
    }

    #[test]
    fn kronecker_oracle_solves_scalar_case() {
        let x = kronecker_sylvester(&dmatrix![2.0], &dmatrix![-1.0], &dmatrix![6.0]).unwrap();
        assert!((x[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in SystemKind::ALL {
            let spec = GeneratorSpec::new(6, 2, 2, 42, kind);
            assert_eq!(gen_system(&spec), gen_system(&spec));
        }
    }

    #[test]
    fn generated_verdicts_hold() {
        let mut r = rng(7);
        for kind in SystemKind::ALL {
            for _ in 0..20 {
                let spec = random_spec(&mut r, 10, kind);
                let sys = gen_system(&spec);
                let rep = analysis::pbh_detectable(sys.a(), sys.c(), 1e-8).unwrap();
                assert_eq!(rep.detectable, kind.detectable(), "{spec:?}");
                if kind == SystemKind::Hurwitz {
                    assert!(numerics::eig(sys.a()).unwrap().max_real_part() < 0.0);
                }
                if kind == SystemKind::Observable {
                    let o = observability_matrix(sys.a(), sys.c());
                    assert_eq!(numerics::numerical_rank(&o, 1e-10).unwrap(), spec.n);
                }
            }
        }
    }

    #[test]
    fn random_poles_are_conjugate_closed() {
        let mut r = rng(3);
        for count in 1..8 {
            let poles = random_poles(&mut r, count, (-2.0, -1.0));
            assert_eq!(poles.len(), count);
            for z in &poles {
                assert!(poles.iter().any(|w| *w == z.conj()));
            }
        }
    }
}
