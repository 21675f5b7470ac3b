//! Gate figures of merit and the target gates they are measured against.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfoError, Result};
use crate::evolution::GateOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateScore {
    pub fidelity: f64,
    pub success: f64,
    pub d: usize,
}

fn check_square(m: &Array2<Complex64>) -> Result<usize> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(QfoError::NotSquare { rows, cols });
    }
    Ok(rows)
}

/// `Tr(A† B)`.
fn overlap(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `Tr(O† O) / d`.
pub fn success_probability(op: &GateOperator) -> Result<f64> {
    let d = check_square(&op.matrix)?;
    Ok(overlap(&op.matrix, &op.matrix).re / d as f64)
}

/// `|Tr(O† G)|² / (Tr(O† O) Tr(G† G))`; insensitive to global phase and
/// positive scaling of `O`.
pub fn fidelity(op: &GateOperator, target: &Array2<Complex64>) -> Result<f64> {
    let d = check_square(&op.matrix)?;
    let dt = check_square(target)?;
    if d != dt {
        return Err(QfoError::DimensionMismatch {
            expected: dt,
            got: d,
        });
    }
    let oo = overlap(&op.matrix, &op.matrix).re;
    if oo <= f64::MIN_POSITIVE {
        return Err(QfoError::ZeroOperator);
    }
    let gg = overlap(target, target).re;
    Ok(overlap(&op.matrix, target).norm_sqr() / (oo * gg))
}

pub fn score(op: &GateOperator, target: &Array2<Complex64>) -> Result<GateScore> {
    Ok(GateScore {
        fidelity: fidelity(op, target)?,
        success: success_probability(op)?,
        d: op.dim(),
    })
}

fn real(rows: usize, values: &[f64]) -> Array2<Complex64> {
    Array2::from_shape_vec(
        (rows, rows),
        values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
    )
    .expect("square literal")
}

pub fn hadamard() -> Array2<Complex64> {
    let s = FRAC_1_SQRT_2;
    real(2, &[s, s, s, -s])
}

pub fn pauli_x() -> Array2<Complex64> {
    real(2, &[0., 1., 1., 0.])
}

/// CNOT in the `⇑⇑, ⇑⇓, ⇓⇑, ⇓⇓` basis (target flips when control is `⇓`).
pub fn cnot() -> Array2<Complex64> {
    real(
        4,
        &[
            1., 0., 0., 0., //
            0., 1., 0., 0., //
            0., 0., 0., 1., //
            0., 0., 1., 0.,
        ],
    )
}

pub fn cz() -> Array2<Complex64> {
    real(
        4,
        &[
            1., 0., 0., 0., //
            0., 1., 0., 0., //
            0., 0., 1., 0., //
            0., 0., 0., -1.,
        ],
    )
}
