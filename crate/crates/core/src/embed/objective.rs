//! Negative-sampling objective shared by CBOW and skip-gram.
//!
//! Both architectures reduce to the same example shape: a hidden vector `h`
//! that is the mean of one or more target-matrix rows (the context window for
//! CBOW, the single center word for skip-gram) scored against one positive
//! and several negative context-matrix rows:
//!
//! ```text
//! L = softplus(-c_pos·h) + Σ softplus(c_neg·h)
//! ```
//!
//! Gradients are computed in full before any parameter moves, so a step is a
//! true gradient step even when a row repeats within one example.

use super::matrix::{dot, Matrix, SharedMatrix};

#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub inputs: &'a [u32],
    pub positive: u32,
    pub negatives: &'a [u32],
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Per-example buffers reused across steps.
pub(crate) struct Scratch {
    hidden: Vec<f64>,
    grad_hidden: Vec<f64>,
    row: Vec<f64>,
    /// dL/d(score) for the positive then each negative.
    coefficients: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(dim: usize) -> Scratch {
        Scratch {
            hidden: vec![0.0; dim],
            grad_hidden: vec![0.0; dim],
            row: vec![0.0; dim],
            coefficients: Vec::new(),
        }
    }
}

/// Fills `scratch` with the gradient pieces for `example` and returns its loss.
pub(crate) fn compute(target: &SharedMatrix, context: &SharedMatrix, example: &Example, scratch: &mut Scratch) -> f64 {
    let n = example.inputs.len() as f64;
    scratch.hidden.iter_mut().for_each(|v| *v = 0.0);
    for &input in example.inputs {
        target.read_row(input as usize, &mut scratch.row);
        for (h, r) in scratch.hidden.iter_mut().zip(&scratch.row) {
            *h += r;
        }
    }
    scratch.hidden.iter_mut().for_each(|v| *v /= n);
    scratch.grad_hidden.iter_mut().for_each(|v| *v = 0.0);
    scratch.coefficients.clear();

    let mut loss = 0.0;
    let outputs = std::iter::once((example.positive, 1.0)).chain(example.negatives.iter().map(|&o| (o, 0.0)));
    for (output, label) in outputs {
        context.read_row(output as usize, &mut scratch.row);
        let score = dot(&scratch.row, &scratch.hidden);
        loss += if label > 0.0 { softplus(-score) } else { softplus(score) };
        let g = sigmoid(score) - label;
        for (gh, c) in scratch.grad_hidden.iter_mut().zip(&scratch.row) {
            *gh += g * c;
        }
        scratch.coefficients.push(g);
    }
    loss
}

/// Applies the step computed by [`compute`]. The context matrix is left
/// untouched when `update_context` is false.
pub(crate) fn apply(
    target: &SharedMatrix,
    context: &SharedMatrix,
    update_context: bool,
    example: &Example,
    learning_rate: f64,
    scratch: &Scratch,
) {
    if update_context {
        let outputs = std::iter::once(example.positive).chain(example.negatives.iter().copied());
        for (output, g) in outputs.zip(&scratch.coefficients) {
            context.add_scaled(output as usize, &scratch.hidden, -learning_rate * g);
        }
    }
    let scale = -learning_rate / example.inputs.len() as f64;
    for &input in example.inputs {
        target.add_scaled(input as usize, &scratch.grad_hidden, scale);
    }
}

/// Loss of one example at the given parameters.
pub fn loss(target: &Matrix, context: &Matrix, example: &Example) -> f64 {
    let (t, c) = (SharedMatrix::from_matrix(target), SharedMatrix::from_matrix(context));
    compute(&t, &c, example, &mut Scratch::new(target.cols()))
}

/// Loss plus dense gradients with respect to the target and context matrices.
pub fn gradients(target: &Matrix, context: &Matrix, example: &Example) -> (f64, Matrix, Matrix) {
    let (t, c) = (SharedMatrix::from_matrix(target), SharedMatrix::from_matrix(context));
    let mut scratch = Scratch::new(target.cols());
    let loss = compute(&t, &c, example, &mut scratch);

    let mut grad_target = Matrix::zeros(target.rows(), target.cols());
    let n = example.inputs.len() as f64;
    for &input in example.inputs {
        for (g, gh) in grad_target.row_mut(input as usize).iter_mut().zip(&scratch.grad_hidden) {
            *g += gh / n;
        }
    }
    let mut grad_context = Matrix::zeros(context.rows(), context.cols());
    let outputs = std::iter::once(example.positive).chain(example.negatives.iter().copied());
    for (output, coefficient) in outputs.zip(&scratch.coefficients) {
        for (g, h) in grad_context.row_mut(output as usize).iter_mut().zip(&scratch.hidden) {
            *g += coefficient * h;
        }
    }
    (loss, grad_target, grad_context)
}

/// One SGD step in place; returns the loss before the step.
pub fn sgd_step(target: &mut Matrix, context: &mut Matrix, update_context: bool, example: &Example, learning_rate: f64) -> f64 {
    let (t, c) = (SharedMatrix::from_matrix(target), SharedMatrix::from_matrix(context));
    let mut scratch = Scratch::new(target.cols());
    let loss = compute(&t, &c, example, &mut scratch);
    apply(&t, &c, update_context, example, learning_rate, &scratch);
    *target = t.into_matrix();
    *context = c.into_matrix();
    loss
}
