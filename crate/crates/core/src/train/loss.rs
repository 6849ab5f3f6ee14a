//! Margin ranking loss over L1 distances.
//!
//! ```text
//! L = sum_(e,v) sum_(e',v') [ |h1(e) - h2(v)|_1 + margin - |h1(e') - h2(v')|_1 ]_+
//! ```
//!
//! The gradient uses the sign subgradient of the L1 norm with `sign(0) = 0`
//! and only flows through terms whose hinge is strictly positive.

use super::NegativeBatch;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub value: f64,
    /// `dL/dH` for the embeddings of KG1 and KG2.
    pub grads: [DenseMatrix; 2],
    /// Number of hinge terms that were active.
    pub active_terms: usize,
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Adds `scale * sign(h1[a] - h2[b])` to row `a` of `g1` and subtracts it
/// from row `b` of `g2`.
fn accumulate(
    h: [&DenseMatrix; 2],
    g: &mut [DenseMatrix; 2],
    a: usize,
    b: usize,
    scale: f64,
) {
    let (x, y) = (h[0].row(a), h[1].row(b));
    let [g1, g2] = g;
    let ga = g1.row_mut(a);
    for (j, (xa, yb)) in x.iter().zip(y).enumerate() {
        ga[j] += scale * sign(xa - yb);
    }
    let gb = g2.row_mut(b);
    for (j, (xa, yb)) in x.iter().zip(y).enumerate() {
        gb[j] -= scale * sign(xa - yb);
    }
}

pub fn margin_loss(batch: &NegativeBatch, h: [&DenseMatrix; 2], margin: f64) -> Result<LossOutput> {
    if h[0].cols() != h[1].cols() {
        return Err(Error::Dimension(format!(
            "embedding widths {} and {} differ",
            h[0].cols(),
            h[1].cols()
        )));
    }
    if !(h[0].is_finite() && h[1].is_finite()) {
        return Err(Error::NonFinite("embedding input to the margin loss".into()));
    }
    let (n1, n2) = (h[0].rows(), h[1].rows());
    let mut grads = [
        DenseMatrix::zeros(n1, h[0].cols()),
        DenseMatrix::zeros(n2, h[1].cols()),
    ];
    let mut value = 0.0;
    let mut active_terms = 0;
    for (i, &(e, v)) in batch.positives().iter().enumerate() {
        if e >= n1 || v >= n2 {
            return Err(Error::UnknownEntity(if e >= n1 { e } else { v }));
        }
        let d_pos = l1_distance(h[0].row(e), h[1].row(v));
        for (a, b) in batch.negatives_of(i) {
            if a >= n1 || b >= n2 {
                return Err(Error::UnknownEntity(if a >= n1 { a } else { b }));
            }
            let term = d_pos + margin - l1_distance(h[0].row(a), h[1].row(b));
            if term > 0.0 {
                value += term;
                active_terms += 1;
                accumulate(h, &mut grads, e, v, 1.0);
                accumulate(h, &mut grads, a, b, -1.0);
            }
        }
    }
    Ok(LossOutput {
        value,
        grads,
        active_terms,
    })
}
