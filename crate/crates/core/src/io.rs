//! JSON formats for systems and designs.
//!
//! Matrices are row-major nested arrays. Floats are written with the shortest
//! representation that parses back to the same `f64`, so files round-trip
//! bit-for-bit.

use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::model::{ModelError, StateSpaceSystem};
use crate::numerics::{Matrix, Spectrum, C64};
use crate::synthesis::{CertifiedDesign, Certificate, ConditionNumbers, ObserverDesign};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("matrix {name} is ragged: row {row} has {len} entries, expected {expected}")]
    Ragged {
        name: &'static str,
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("invalid design file: {0}")]
    Design(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn ser_complex<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Builds a matrix from nested rows. An empty list is a `0 × cols` matrix.
pub fn matrix_from_rows(name: &'static str, rows: &[Vec<f64>], cols: usize) -> Result<Matrix, IoError> {
    let ncols = rows.first().map_or(cols, Vec::len);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(IoError::Ragged {
                name,
                row: i,
                len: r.len(),
                expected: ncols,
            });
        }
    }
    Ok(Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn complex_pairs(zs: &[C64]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
}

pub fn system_to_json(sys: &StateSpaceSystem) -> String {
    let file = SystemFile {
        a: matrix_to_rows(sys.a()),
        b: matrix_to_rows(sys.b()),
        c: matrix_to_rows(sys.c()),
    };
    serde_json::to_string_pretty(&file).expect("matrices of f64 always serialize")
}

/// Parses and validates a system. `rank_tol` overrides the rank tolerance
/// used to check that `C` has full row rank.
pub fn system_from_json(text: &str, rank_tol: Option<f64>) -> Result<StateSpaceSystem, IoError> {
    let file: SystemFile = serde_json::from_str(text)?;
    let a = matrix_from_rows("A", &file.a, 0)?;
    let n = a.nrows();
    let b = matrix_from_rows("B", &file.b, 0)?;
    let c = matrix_from_rows("C", &file.c, n)?;
    let sys = match rank_tol {
        Some(tol) => StateSpaceSystem::with_rank_tol(a, b, c, tol)?,
        None => StateSpaceSystem::new(a, b, c)?,
    };
    Ok(sys)
}

pub fn read_system(path: &Path, rank_tol: Option<f64>) -> Result<StateSpaceSystem, IoError> {
    system_from_json(&read_text(path)?, rank_tol)
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CertificateFile {
    #[serde(rename = "K")]
    k_gain: Vec<Vec<f64>>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q_mat: Vec<Vec<f64>>,
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    #[serde(rename = "Phi")]
    phi: Vec<Vec<f64>>,
    q: usize,
    k: usize,
    unplaced_poles: Vec<[f64; 2]>,
    identity_residual: f64,
    spectral_split_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConditionFile {
    #[serde(rename = "T")]
    t: Option<f64>,
    #[serde(rename = "P")]
    p: Option<f64>,
    #[serde(rename = "Q")]
    q: Option<f64>,
    #[serde(rename = "Y")]
    y: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DesignFile {
    #[serde(rename = "L")]
    l: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    f: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    t: Vec<Vec<f64>>,
    certificate: CertificateFile,
    composite_spectrum: Vec<[f64; 2]>,
    condition_numbers: ConditionFile,
}

/// The part of a design that the simulator needs, as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredDesign {
    pub t: Matrix,
    pub observer: ObserverDesign,
}

impl From<&CertifiedDesign> for StoredDesign {
    fn from(d: &CertifiedDesign) -> Self {
        StoredDesign {
            t: d.t.clone(),
            observer: d.observer.clone(),
        }
    }
}

pub fn design_to_json(t: &Matrix, o: &ObserverDesign) -> String {
    let c = &o.certificate;
    let file = DesignFile {
        l: matrix_to_rows(&o.l),
        f: matrix_to_rows(&o.f),
        g: matrix_to_rows(&o.g),
        t: matrix_to_rows(t),
        certificate: CertificateFile {
            k_gain: matrix_to_rows(&c.k_gain),
            p: matrix_to_rows(&c.p_mat),
            q_mat: matrix_to_rows(&c.q_mat),
            x: matrix_to_rows(&c.x),
            phi: matrix_to_rows(&c.phi),
            q: c.q,
            k: c.k,
            unplaced_poles: complex_pairs(&c.unplaced_poles),
            identity_residual: c.identity_residual,
            spectral_split_error: c.spectral_split_error,
        },
        composite_spectrum: complex_pairs(o.composite_spectrum.eigenvalues()),
        condition_numbers: ConditionFile {
            t: o.condition_numbers.t,
            p: o.condition_numbers.p,
            q: o.condition_numbers.q,
            y: o.condition_numbers.y,
        },
    };
    serde_json::to_string_pretty(&file).expect("design fields always serialize")
}

pub fn design_from_json(text: &str) -> Result<StoredDesign, IoError> {
    let file: DesignFile = serde_json::from_str(text)?;
    let t = matrix_from_rows("T", &file.t, 0)?;
    let n = t.nrows();
    let cert = &file.certificate;
    let k = cert.k;
    let l = matrix_from_rows("L", &file.l, 0)?;
    let r = l.nrows();
    let p = n.checked_sub(r).ok_or_else(|| IoError::Design("L has more rows than T".into()))?;
    let l = matrix_from_rows("L", &file.l, p)?;
    let f = matrix_from_rows("F", &file.f, k)?;
    let g = matrix_from_rows("G", &file.g, p)?;
    let expect = |name: &str, m: &Matrix, shape: (usize, usize)| -> Result<(), IoError> {
        if m.shape() != shape {
            return Err(IoError::Design(format!(
                "{name} must be {}x{}, got {}x{}",
                shape.0,
                shape.1,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    };
    expect("T", &t, (n, n))?;
    expect("L", &l, (r, p))?;
    expect("F", &f, (r, k))?;
    expect("G", &g, (k, p))?;
    let to_c = |v: &[[f64; 2]]| v.iter().map(|z| C64::new(z[0], z[1])).collect::<Vec<_>>();
    let certificate = Certificate {
        k_gain: matrix_from_rows("K", &cert.k_gain, p)?,
        p_mat: matrix_from_rows("P", &cert.p, p)?,
        q_mat: matrix_from_rows("Q", &cert.q_mat, r)?,
        x: matrix_from_rows("X", &cert.x, k)?,
        phi: matrix_from_rows("Phi", &cert.phi, k)?,
        q: cert.q,
        k,
        unplaced_poles: to_c(&cert.unplaced_poles),
        identity_residual: cert.identity_residual,
        spectral_split_error: cert.spectral_split_error,
    };
    let cn = &file.condition_numbers;
    Ok(StoredDesign {
        t,
        observer: ObserverDesign {
            l,
            f,
            g,
            certificate,
            composite_spectrum: Spectrum::new(to_c(&file.composite_spectrum)),
            condition_numbers: ConditionNumbers {
                t: cn.t,
                p: cn.p,
                q: cn.q,
                y: cn.y,
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::{design, PhiChoice, SynthesisConfig};
    use nalgebra::dmatrix;

    const DEMO: &str = r#"{"A": [[0, 1], [0, 1]], "B": [[0], [1]], "C": [[1, 0]]}"#;

    #[test]
    fn parses_the_demo_system() {
        let sys = system_from_json(DEMO, None).unwrap();
        assert_eq!(sys.a(), &dmatrix![0.0, 1.0; 0.0, 1.0]);
        assert_eq!(sys.c(), &dmatrix![1.0, 0.0]);
        let again = system_from_json(&system_to_json(&sys), None).unwrap();
        assert_eq!(again, sys);
    }

    #[test]
    fn floats_read_back_bit_exact() {
        // A value the fast float parser rounds to its neighbour.
        let x = -1.1370000000000027_f64;
        let text = serde_json::to_string(&x).unwrap();
        assert_eq!(serde_json::from_str::<f64>(&text).unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn names_violations() {
        let err = system_from_json(r#"{"A": [[0, 1], [0]], "B": [[0], [1]], "C": [[1, 0]]}"#, None)
            .unwrap_err();
        assert!(err.to_string().contains("ragged"));
        let err = system_from_json(r#"{"A": [[0, 1], [0, 1]], "B": [[0], [1]], "C": [[1, 0], [2, 0]]}"#, None)
            .unwrap_err();
        assert!(matches!(err, IoError::Model(ModelError::RankDeficientOutput { .. })));
        assert!(matches!(system_from_json("{", None), Err(IoError::Json(_))));
    }

    #[test]
    fn design_round_trip_is_exact() {
        let sys = system_from_json(DEMO, None).unwrap();
        let cfg = SynthesisConfig {
            phi: PhiChoice::Matrix(dmatrix![-1.0 / 3.0]),
            ..Default::default()
        };
        let d = design(&sys, &cfg).unwrap();
        let text = design_to_json(&d.t, &d.observer);
        let back = design_from_json(&text).unwrap();
        assert_eq!(back, StoredDesign::from(&d));
        assert_eq!(design_to_json(&back.t, &back.observer), text);
    }
}
