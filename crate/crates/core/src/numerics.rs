//! Dense real-matrix kernels used by every other module.
//!
//! Matrices are plain [`nalgebra::DMatrix<f64>`]. Finiteness is enforced at the
//! boundaries where matrices enter the library ([`checked_matrix`], the JSON
//! readers and [`crate::model::StateSpaceSystem::new`]). The real Schur form
//! and the SVD come from LAPACK through `nalgebra-lapack`. Complex arithmetic is
//! confined to this module: callers only see eigenvalues as [`C64`].

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

pub type Matrix = DMatrix<f64>;
pub type C64 = Complex<f64>;

/// Inversion and linear solves are refused above this 2-norm condition number.
pub const MAX_CONDITION: f64 = 1.0 / (1.0e4 * f64::EPSILON);

/// Relative spectral separation below which a Sylvester equation is treated as
/// having no unique solution.
pub const DEFAULT_SEPARATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular to working precision (condition number {condition:.3e})")]
    Singular { condition: f64 },
    #[error(
        "Sylvester equation has no unique solution: spectra are only {separation:.3e} apart"
    )]
    SpectraOverlap { separation: f64 },
    #[error("{0} failed to converge")]
    NoConvergence(&'static str),
    #[error("Sylvester residual {residual:.3e} exceeds its bound {bound:.3e}")]
    Inaccurate { residual: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Builds a `rows × cols` matrix from row-major data, rejecting NaN and infinities.
pub fn checked_matrix(rows: usize, cols: usize, row_major: &[f64]) -> Result<Matrix> {
    if row_major.len() != rows * cols {
        return Err(NumericsError::Dimension(format!(
            "{} entries supplied for a {rows}x{cols} matrix",
            row_major.len()
        )));
    }
    let m = Matrix::from_row_slice(rows, cols, row_major);
    ensure_finite(&m)?;
    Ok(m)
}

pub fn ensure_finite(m: &Matrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(NumericsError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Default relative rank tolerance: `max(rows, cols) · 1e-12`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * 1e-12
}

pub fn norm_inf(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(NumericsError::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Eigenvalues of a real square matrix, with multiplicity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum(Vec<C64>);

impl Spectrum {
    pub fn new(eigenvalues: Vec<C64>) -> Self {
        Spectrum(eigenvalues)
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `-inf` for the empty spectrum.
    pub fn max_real_part(&self) -> f64 {
        self.0.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Multiset union.
    pub fn union(&self, other: &Spectrum) -> Spectrum {
        let mut all = self.0.clone();
        all.extend_from_slice(&other.0);
        Spectrum(all)
    }

    /// Eigenvalues ordered by real part, then imaginary part.
    pub fn sorted(&self) -> Spectrum {
        let mut v = self.0.clone();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Spectrum(v)
    }

    /// Largest distance in a greedy one-to-one pairing of the two multisets.
    /// Infinite when the sizes differ.
    pub fn match_error(&self, other: &Spectrum) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let mut unused: Vec<C64> = other.0.clone();
        let mut worst: f64 = 0.0;
        for z in self.sorted().0 {
            let (idx, dist) = unused
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (z - w).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("sizes checked above");
            worst = worst.max(dist);
            unused.swap_remove(idx);
        }
        worst
    }

    /// Smallest distance between an element of `self` and one of `other`.
    pub fn separation(&self, other: &Spectrum) -> f64 {
        let mut best = f64::INFINITY;
        for a in &self.0 {
            for b in &other.0 {
                best = best.min((a - b).norm());
            }
        }
        best
    }
}

impl From<Vec<C64>> for Spectrum {
    fn from(v: Vec<C64>) -> Self {
        Spectrum(v)
    }
}

/// Real Schur form `m = Z·T·Zᵀ`, `T` quasi upper triangular with
/// standardized 2×2 blocks (LAPACK `dgees`).
pub fn real_schur(m: &Matrix) -> Result<(Matrix, Matrix)> {
    ensure_square(m, "real_schur input")?;
    ensure_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((Matrix::zeros(0, 0), Matrix::zeros(0, 0)));
    }
    nalgebra_lapack::Schur::try_new(m.clone())
        .map(|s| s.unpack())
        .ok_or(NumericsError::NoConvergence("real Schur"))
}

/// Eigenvalues of a quasi upper triangular `T`, in diagonal order.
fn quasi_triangular_eigenvalues(t: &Matrix) -> Vec<C64> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mean = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc < 0.0 {
                let im = (-disc).sqrt();
                out.push(C64::new(mean, im));
                out.push(C64::new(mean, -im));
            } else {
                let r = disc.sqrt();
                out.push(C64::new(mean + r, 0.0));
                out.push(C64::new(mean - r, 0.0));
            }
            i += 2;
        } else {
            out.push(C64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// All eigenvalues of a square real matrix.
pub fn eig(m: &Matrix) -> Result<Spectrum> {
    ensure_square(m, "eig input")?;
    if m.nrows() == 0 {
        return Ok(Spectrum::default());
    }
    let (_, t) = real_schur(m)?;
    Ok(Spectrum(quasi_triangular_eigenvalues(&t)))
}

/// Real Schur form `m = Z·T·Zᵀ` whose leading `s × s` block of `T` carries
/// exactly the eigenvalues accepted by `select` (LAPACK `dtrsen`). `select`
/// must treat both members of a conjugate pair alike. Returns `(Z, T, s)`.
pub fn ordered_schur(m: &Matrix, select: impl Fn(C64) -> bool) -> Result<(Matrix, Matrix, usize)> {
    let (mut z, mut t) = real_schur(m)?;
    let n = t.nrows();
    if n == 0 {
        return Ok((z, t, 0));
    }
    let flags: Vec<i32> = quasi_triangular_eigenvalues(&t)
        .into_iter()
        .map(|ev| i32::from(select(ev)))
        .collect();
    let (mut wr, mut wi) = (vec![0.0; n], vec![0.0; n]);
    let (mut s, mut sep) = ([0.0], [0.0]);
    let mut work = vec![0.0; n.max(1)];
    let mut iwork = [0];
    let (mut selected, mut info) = (0, 0);
    let ld = n as i32;
    // SAFETY: every buffer is sized as dtrsen requires for JOB = 'N'.
    unsafe {
        lapack::dtrsen(
            b'N', b'V', &flags, ld, t.as_mut_slice(), ld, z.as_mut_slice(), ld, &mut wr,
            &mut wi, &mut selected, &mut s, &mut sep, &mut work, ld, &mut iwork, 1, &mut info,
        );
    }
    if info != 0 {
        return Err(NumericsError::NoConvergence("Schur reordering"));
    }
    Ok((z, t, selected as usize))
}

/// Full singular value decomposition `M = U·Σ·Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// `rows × rows`, orthogonal.
    pub u: Matrix,
    /// `min(rows, cols)` values, descending.
    pub singular_values: Vec<f64>,
    /// `cols × cols`, orthogonal.
    pub v: Matrix,
}

impl Svd {
    /// `Σ` as a `rows × cols` matrix.
    pub fn sigma(&self) -> Matrix {
        let mut s = Matrix::zeros(self.u.nrows(), self.v.nrows());
        for (i, &sv) in self.singular_values.iter().enumerate() {
            s[(i, i)] = sv;
        }
        s
    }

    pub fn reconstruct(&self) -> Matrix {
        &self.u * self.sigma() * self.v.transpose()
    }
}

/// Index of the first entry whose magnitude equals the column maximum.
fn leading_entry(col: &[f64]) -> Option<usize> {
    let max = col.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    col.iter().position(|v| v.abs() == max)
}

fn normalize_sign(u: &mut Matrix, j: usize, partner: Option<(&mut Matrix, usize)>) {
    let col: Vec<f64> = u.column(j).iter().copied().collect();
    if let Some(i) = leading_entry(&col) {
        if col[i] < 0.0 {
            u.column_mut(j).neg_mut();
            if let Some((v, jv)) = partner {
                v.column_mut(jv).neg_mut();
            }
        }
    }
}

/// Full SVD with sorted singular values. In each left singular vector the
/// first entry of largest magnitude is nonnegative; the matching right
/// singular vector is flipped with it. Unpaired completion columns of `U` or
/// `V`, and pairs with negligible singular value, follow the same rule on
/// their own.
pub fn svd(m: &Matrix) -> Result<Svd> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd {
            u: Matrix::identity(rows, rows),
            singular_values: Vec::new(),
            v: Matrix::identity(cols, cols),
        });
    }
    let dec = nalgebra_lapack::SVD::new(m.clone()).ok_or(NumericsError::NoConvergence("SVD"))?;
    let mut u = dec.u;
    let mut v = dec.vt.transpose();
    // Pairs with a round-off-level singular value carry no coupling between
    // the left and right vectors, so both are normalized on their own.
    let negligible = f64::EPSILON * rows.max(cols) as f64 * dec.singular_values.max();
    for j in 0..k {
        if dec.singular_values[j] <= negligible {
            normalize_sign(&mut u, j, None);
            normalize_sign(&mut v, j, None);
        } else {
            normalize_sign(&mut u, j, Some((&mut v, j)));
        }
    }
    for j in k..rows {
        normalize_sign(&mut u, j, None);
    }
    for j in k..cols {
        normalize_sign(&mut v, j, None);
    }
    Ok(Svd {
        u,
        singular_values: dec.singular_values.iter().copied().collect(),
        v,
    })
}

pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    if m.nrows().min(m.ncols()) == 0 {
        return Ok(Vec::new());
    }
    let dec = nalgebra_lapack::SVD::new(m.clone()).ok_or(NumericsError::NoConvergence("SVD"))?;
    Ok(dec.singular_values.iter().copied().collect())
}

fn count_above(sv: &[f64], rel_tol: f64) -> usize {
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> Result<usize> {
    Ok(count_above(&singular_values(m)?, rel_tol))
}

/// Numerical rank of `re + i·im` through the real embedding
/// `[[re, -im], [im, re]]`, whose singular values are those of the complex
/// matrix, each repeated twice.
pub fn numerical_rank_complex(re: &Matrix, im: &Matrix, rel_tol: f64) -> Result<usize> {
    if re.shape() != im.shape() {
        return Err(NumericsError::Dimension(
            "real and imaginary parts differ in shape".into(),
        ));
    }
    let (r, c) = re.shape();
    let mut emb = Matrix::zeros(2 * r, 2 * c);
    emb.view_mut((0, 0), (r, c)).copy_from(re);
    emb.view_mut((0, c), (r, c)).copy_from(&(-im));
    emb.view_mut((r, 0), (r, c)).copy_from(im);
    emb.view_mut((r, c), (r, c)).copy_from(re);
    Ok(count_above(&singular_values(&emb)?, rel_tol) / 2)
}

/// `σ_max / σ_min` in the 2-norm; infinite for singular (or empty-rank) input.
pub fn condition_number(m: &Matrix) -> Result<f64> {
    let sv = singular_values(m)?;
    let Some(&min) = sv.last() else {
        return Ok(1.0);
    };
    if min == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(sv[0] / min)
    }
}

/// Solves `A·X = B` for square `A`.
pub fn solve_linear(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    ensure_square(a, "coefficient matrix")?;
    if a.nrows() != b.nrows() {
        return Err(NumericsError::Dimension(format!(
            "right-hand side has {} rows, expected {}",
            b.nrows(),
            a.nrows()
        )));
    }
    if a.nrows() == 0 {
        return Ok(b.clone());
    }
    let condition = condition_number(a)?;
    if condition > MAX_CONDITION {
        return Err(NumericsError::Singular { condition });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or(NumericsError::Singular { condition })
}

pub fn invert(a: &Matrix) -> Result<Matrix> {
    solve_linear(a, &Matrix::identity(a.nrows(), a.nrows()))
}

/// Solves `A·X − X·B = C` by reducing both coefficients to real Schur form
/// (Bartels–Stewart) and back-substituting column blocks of the transformed
/// unknown.
pub fn solve_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix> {
    solve_sylvester_with_tol(a, b, c, DEFAULT_SEPARATION_TOL)
}

pub fn solve_sylvester_with_tol(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    separation_tol: f64,
) -> Result<Matrix> {
    ensure_square(a, "Sylvester coefficient A")?;
    ensure_square(b, "Sylvester coefficient B")?;
    let (r, s) = (a.nrows(), b.nrows());
    if c.shape() != (r, s) {
        return Err(NumericsError::Dimension(format!(
            "right-hand side is {}x{}, expected {r}x{s}",
            c.nrows(),
            c.ncols()
        )));
    }
    if r == 0 || s == 0 {
        return Ok(Matrix::zeros(r, s));
    }
    let scale = 1f64.max(a.norm()).max(b.norm());
    let separation = eig(a)?.separation(&eig(b)?);
    if separation <= separation_tol * scale {
        return Err(NumericsError::SpectraOverlap { separation });
    }

    let (ua, ta) = real_schur(a)?;
    let (ub, tb) = real_schur(b)?;
    let f = ua.transpose() * c * &ub;
    let mut y = Matrix::zeros(r, s);
    let eye = Matrix::identity(r, r);
    let overlap = || NumericsError::SpectraOverlap { separation };

    let mut j = 0;
    while j < s {
        let width = if j + 1 < s && tb[(j + 1, j)] != 0.0 { 2 } else { 1 };
        let mut rhs = f.columns(j, width).into_owned();
        if j > 0 {
            rhs += y.columns(0, j) * tb.view((0, j), (j, width));
        }
        if width == 1 {
            let coeff = &ta - &eye * tb[(j, j)];
            let col = coeff.lu().solve(&rhs).ok_or_else(overlap)?;
            y.column_mut(j).copy_from(&col);
        } else {
            // Ta·Z − Z·T_jj = rhs for the 2-column block, vectorized.
            let tjj = tb.view((j, j), (2, 2)).into_owned();
            let mut big = Matrix::zeros(2 * r, 2 * r);
            for q in 0..2 {
                big.view_mut((q * r, q * r), (r, r)).copy_from(&ta);
                for p in 0..2 {
                    let sub = big.view((q * r, p * r), (r, r)) - &eye * tjj[(p, q)];
                    big.view_mut((q * r, p * r), (r, r)).copy_from(&sub);
                }
            }
            let vec_rhs = DVector::from_column_slice(rhs.as_slice());
            let z = big.lu().solve(&vec_rhs).ok_or_else(overlap)?;
            y.columns_mut(j, 2)
                .copy_from(&Matrix::from_column_slice(r, 2, z.as_slice()));
        }
        j += width;
    }

    let x = &ua * y * ub.transpose();
    ensure_finite(&x).map_err(|_| overlap())?;
    let residual = (a * &x - &x * b - c).norm();
    let bound = 1e-8 * (a.norm() + b.norm()) * x.norm() + 1e-10 * c.norm();
    if residual > bound && residual > f64::EPSILON * scale {
        return Err(NumericsError::Inaccurate { residual, bound });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn sorted_re_im(s: &Spectrum) -> Vec<(f64, f64)> {
        s.sorted().eigenvalues().iter().map(|z| (z.re, z.im)).collect()
    }

    #[test]
    fn eig_of_diagonal_matrix() {
        let s = eig(&dmatrix![-1.0, 0.0; 0.0, -2.0]).unwrap();
        assert_eq!(sorted_re_im(&s), vec![(-2.0, 0.0), (-1.0, 0.0)]);
    }

    #[test]
    fn eig_of_rotation_generator() {
        let s = eig(&dmatrix![0.0, 1.0; -1.0, 0.0]).unwrap();
        let v = sorted_re_im(&s);
        assert!(v[0].0.abs() < 1e-15 && (v[0].1 + 1.0).abs() < 1e-15);
        assert!(v[1].0.abs() < 1e-15 && (v[1].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ordered_schur_moves_selected_eigenvalues_first() {
        // Block upper triangular: eigenvalues −2, 3, −1 and the pair 1 ± 2i.
        let m = dmatrix![
            -2.0, 1.0, 0.5, 0.0, 1.0;
            0.0, 3.0, 1.0, 2.0, 0.0;
            0.0, 0.0, -1.0, 1.0, 1.0;
            0.0, 0.0, 0.0, 1.0, 2.0;
            0.0, 0.0, 0.0, -2.0, 1.0
        ];
        let (z, t, s) = ordered_schur(&m, |ev| ev.re > 0.0).unwrap();
        assert_eq!(s, 3);
        assert!((&z * &t * z.transpose() - &m).norm() < 1e-12);
        assert!((z.transpose() * &z - Matrix::identity(5, 5)).norm() < 1e-12);
        let lead = eig(&t.view((0, 0), (3, 3)).into_owned()).unwrap();
        let expected: Spectrum =
            vec![C64::new(3.0, 0.0), C64::new(1.0, 2.0), C64::new(1.0, -2.0)].into();
        assert!(lead.match_error(&expected) < 1e-12);
        assert!(t.view((3, 0), (2, 3)).norm() == 0.0);
    }

    #[test]
    fn eig_of_companion_matrix() {
        // s² + 3s + 2 = (s + 1)(s + 2)
        let s = eig(&dmatrix![-3.0, 2.0; -1.0, 0.0]).unwrap();
        let expected = Spectrum::new(vec![C64::new(-1.0, 0.0), C64::new(-2.0, 0.0)]);
        assert!(s.match_error(&expected) < 1e-14);
    }

    #[test]
    fn eig_rejects_non_square() {
        assert!(matches!(
            eig(&Matrix::zeros(2, 3)),
            Err(NumericsError::Dimension(_))
        ));
    }

    #[test]
    fn complex_pairs_are_conjugate() {
        let m = dmatrix![1.0, 2.0, 0.0; -3.0, 0.5, 1.0; 0.0, -1.0, -2.0];
        let s = eig(&m).unwrap();
        for z in s.eigenvalues() {
            if z.im != 0.0 {
                assert!(s.eigenvalues().iter().any(|w| *w == z.conj()));
            }
        }
    }

    #[test]
    fn svd_examples() {
        assert_eq!(
            svd(&dmatrix![1.0, 0.0; 0.0, 0.0]).unwrap().singular_values,
            vec![1.0, 0.0]
        );
        assert_eq!(
            svd(&Matrix::zeros(2, 3)).unwrap().singular_values,
            vec![0.0, 0.0]
        );
        let d = svd(&dmatrix![3.0, 0.0; 0.0, 4.0]).unwrap();
        assert!((d.singular_values[0] - 4.0).abs() < 1e-15);
        assert!((d.singular_values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn svd_is_full_and_signed() {
        let m = dmatrix![1.0, -2.0, 0.5, 3.0; 0.0, 1.0, -1.0, 2.0];
        let d = svd(&m).unwrap();
        assert_eq!(d.u.shape(), (2, 2));
        assert_eq!(d.v.shape(), (4, 4));
        assert!((d.reconstruct() - &m).norm() < 1e-13);
        assert!((d.v.transpose() * &d.v - Matrix::identity(4, 4)).norm() < 1e-13);
        for j in 0..2 {
            let col: Vec<f64> = d.u.column(j).iter().copied().collect();
            assert!(col[leading_entry(&col).unwrap()] >= 0.0);
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&dmatrix![1.0, 0.0; 0.0, 0.0], 1e-9).unwrap(), 1);
        assert_eq!(numerical_rank(&Matrix::identity(3, 3), 1e-9).unwrap(), 3);
        let nearly = dmatrix![1.0, 1.0; 1.0, 1.0 + 1e-15];
        assert_eq!(numerical_rank(&nearly, 1e-9).unwrap(), 1);
        assert_eq!(numerical_rank(&Matrix::zeros(3, 2), 1e-9).unwrap(), 0);
    }

    #[test]
    fn complex_rank_of_pbh_matrix() {
        // [1, 0; i - 0, -1; 1, i] has full column rank 2.
        let re = dmatrix![1.0, 0.0; 0.0, -1.0; 1.0, 0.0];
        let im = dmatrix![0.0, 0.0; 1.0, 0.0; 0.0, 1.0];
        assert_eq!(numerical_rank_complex(&re, &im, 1e-12).unwrap(), 2);
        let zero = Matrix::zeros(3, 2);
        assert_eq!(numerical_rank_complex(&zero, &zero, 1e-12).unwrap(), 0);
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(invert(&Matrix::identity(3, 3)).unwrap(), Matrix::identity(3, 3));
        assert_eq!(
            invert(&dmatrix![2.0, 0.0; 0.0, 4.0]).unwrap(),
            dmatrix![0.5, 0.0; 0.0, 0.25]
        );
        let ill = dmatrix![1.0, 0.0; 0.0, 1e-12];
        assert!((condition_number(&ill).unwrap() - 1e12).abs() < 1e-3);
        assert!(matches!(invert(&ill), Err(NumericsError::Singular { .. })));
    }

    #[test]
    fn sylvester_scalar_and_zero() {
        let x = solve_sylvester(&dmatrix![2.0], &dmatrix![-1.0], &dmatrix![3.0]).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-15);
        let a = dmatrix![1.0, 2.0; 0.0, 3.0];
        let b = dmatrix![-1.0, 1.0; -1.0, -1.0];
        let x = solve_sylvester(&a, &b, &Matrix::zeros(2, 2)).unwrap();
        assert_eq!(x, Matrix::zeros(2, 2));
    }

    #[test]
    fn sylvester_complex_blocks_on_both_sides() {
        let a = dmatrix![0.0, 2.0, 1.0; -2.0, 0.0, 0.0; 0.0, 0.0, 3.0];
        let b = dmatrix![-1.0, 4.0; -4.0, -1.0];
        let c = dmatrix![1.0, 2.0; 3.0, 4.0; 5.0, 6.0];
        let x = solve_sylvester(&a, &b, &c).unwrap();
        assert!((&a * &x - &x * &b - &c).norm() < 1e-12);
    }

    #[test]
    fn sylvester_refuses_shared_eigenvalue() {
        let err = solve_sylvester(&dmatrix![1.0], &dmatrix![1.0], &dmatrix![1.0]).unwrap_err();
        assert!(matches!(err, NumericsError::SpectraOverlap { .. }));
    }

    #[test]
    fn checked_matrix_rejects_nan() {
        assert!(matches!(
            checked_matrix(1, 2, &[1.0, f64::NAN]),
            Err(NumericsError::NonFinite { row: 0, col: 1 })
        ));
        assert!(checked_matrix(1, 2, &[1.0]).is_err());
    }

    #[test]
    fn match_error_pairs_multisets() {
        let a = Spectrum::new(vec![C64::new(-1.0, 0.0), C64::new(-1.0, 0.0), C64::new(-2.0, 1.0)]);
        let b = Spectrum::new(vec![C64::new(-2.0, 1.0), C64::new(-1.0, 1e-9), C64::new(-1.0, 0.0)]);
        assert!(a.match_error(&b) <= 1e-9);
        assert!(a.match_error(&Spectrum::default()).is_infinite());
    }
}
