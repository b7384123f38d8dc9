use crate::numerics::{Matrix, C64};

use super::SynthesisError;

/// A real pole or a conjugate pair `α ± iβ` (stored with `β > 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PoleBlock {
    Real(f64),
    Pair { re: f64, im: f64 },
}

impl PoleBlock {
    pub(crate) fn dim(&self) -> usize {
        match self {
            PoleBlock::Real(_) => 1,
            PoleBlock::Pair { .. } => 2,
        }
    }

    pub(crate) fn push_into(&self, out: &mut Vec<C64>) {
        match *self {
            PoleBlock::Real(x) => out.push(C64::new(x, 0.0)),
            PoleBlock::Pair { re, im } => {
                out.push(C64::new(re, im));
                out.push(C64::new(re, -im));
            }
        }
    }
}

/// Groups a pole list into real poles and conjugate pairs, in input order.
/// Every pole must lie strictly in the open left half-plane.
pub(crate) fn group_poles(poles: &[C64], what: &str) -> Result<Vec<PoleBlock>, SynthesisError> {
    let scale = poles.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-12 * scale;
    let mut used = vec![false; poles.len()];
    let mut blocks = Vec::new();
    for i in 0..poles.len() {
        if used[i] {
            continue;
        }
        let z = poles[i];
        if !(z.re.is_finite() && z.im.is_finite()) || z.re >= 0.0 {
            return Err(SynthesisError::InvalidConfig(format!(
                "{what} must lie in the open left half-plane, got {}{:+}i",
                z.re, z.im
            )));
        }
        used[i] = true;
        if z.im.abs() <= tol {
            blocks.push(PoleBlock::Real(z.re));
            continue;
        }
        let partner = (0..poles.len())
            .find(|&j| !used[j] && (poles[j] - z.conj()).norm() <= tol)
            .ok_or_else(|| {
                SynthesisError::InvalidConfig(format!(
                    "{what} are not closed under conjugation: {}{:+}i has no partner",
                    z.re, z.im
                ))
            })?;
        used[partner] = true;
        blocks.push(PoleBlock::Pair {
            re: z.re,
            im: z.im.abs(),
        });
    }
    Ok(blocks)
}

/// Real block-diagonal matrix with the given spectrum; pairs become
/// `[[α, β], [−β, α]]`.
pub(crate) fn real_block_form(blocks: &[PoleBlock]) -> Matrix {
    let n: usize = blocks.iter().map(PoleBlock::dim).sum();
    let mut m = Matrix::zeros(n, n);
    let mut i = 0;
    for b in blocks {
        match *b {
            PoleBlock::Real(x) => m[(i, i)] = x,
            PoleBlock::Pair { re, im } => {
                m[(i, i)] = re;
                m[(i, i + 1)] = im;
                m[(i + 1, i)] = -im;
                m[(i + 1, i + 1)] = re;
            }
        }
        i += b.dim();
    }
    m
}

pub(crate) fn flatten(blocks: &[PoleBlock]) -> Vec<C64> {
    let mut out = Vec::new();
    for b in blocks {
        b.push_into(&mut out);
    }
    out
}

/// Picks blocks totalling exactly `dim` eigenvalues, in order. When only pairs
/// remain and one slot is left, the real part of the next pair is used.
pub(crate) fn select(blocks: &[PoleBlock], dim: usize) -> Vec<PoleBlock> {
    let mut chosen = Vec::new();
    let mut filled = 0;
    for b in blocks {
        if filled + b.dim() <= dim {
            chosen.push(*b);
            filled += b.dim();
        }
    }
    if filled < dim {
        if let Some(PoleBlock::Pair { re, .. }) = blocks.iter().find(|b| !chosen.contains(b)) {
            chosen.push(PoleBlock::Real(*re));
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn groups_pairs_and_reals() {
        let blocks = group_poles(&[c(-1.0, 2.0), c(-3.0, 0.0), c(-1.0, -2.0)], "poles").unwrap();
        assert_eq!(
            blocks,
            vec![PoleBlock::Pair { re: -1.0, im: 2.0 }, PoleBlock::Real(-3.0)]
        );
        let m = real_block_form(&blocks);
        let s = crate::numerics::eig(&m).unwrap();
        assert!(s.match_error(&flatten(&blocks).into()) < 1e-14);
    }

    #[test]
    fn rejects_unpaired_and_unstable() {
        assert!(group_poles(&[c(-1.0, 2.0)], "poles").is_err());
        assert!(group_poles(&[c(0.0, 0.0)], "poles").is_err());
        assert!(group_poles(&[c(1.0, 0.0)], "poles").is_err());
    }

    #[test]
    fn select_respects_pairs() {
        let blocks = vec![
            PoleBlock::Pair { re: -1.0, im: 1.0 },
            PoleBlock::Pair { re: -2.0, im: 1.0 },
        ];
        assert_eq!(select(&blocks, 2), vec![blocks[0]]);
        assert_eq!(select(&blocks, 3), vec![blocks[0], PoleBlock::Real(-2.0)]);
        assert_eq!(select(&blocks, 1), vec![PoleBlock::Real(-1.0)]);
    }
}
