use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::scalar::Scalar;

/// A trainable matrix with its gradient accumulator and Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock<T> {
    pub label: String,
    pub value: Matrix<T>,
    pub grad: Matrix<T>,
    pub adam_m: Matrix<T>,
    pub adam_v: Matrix<T>,
    pub step_count: u64,
}

impl<T: Scalar> ParamBlock<T> {
    pub fn new(label: impl Into<String>, value: Matrix<T>) -> Self {
        let (r, c) = value.shape();
        Self {
            label: label.into(),
            value,
            grad: Matrix::zeros(r, c),
            adam_m: Matrix::zeros(r, c),
            adam_v: Matrix::zeros(r, c),
            step_count: 0,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.value.shape()
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(T::zero());
    }

    /// Adds `delta` into the gradient accumulator.
    pub fn accumulate(&mut self, delta: &Matrix<T>) -> Result<()> {
        self.grad.add_assign(delta)
    }

    /// Overwrites the value, keeping shape.
    pub fn set_value(&mut self, value: Matrix<T>) -> Result<()> {
        value.expect_shape("ParamBlock::set_value", self.shape())?;
        self.value = value;
        Ok(())
    }

    pub fn check_finite_grad(&self) -> Result<()> {
        if !self.grad.is_finite() {
            return Err(Error::Numeric {
                location: format!("gradient of {}", self.label),
                detail: "non-finite entry".into(),
            });
        }
        Ok(())
    }
}

/// Polyak averaging: `target <- tau * online + (1 - tau) * target`.
pub fn soft_update<T: Scalar>(
    target: &mut [&mut ParamBlock<T>],
    online: &[&ParamBlock<T>],
    tau: T,
) -> Result<()> {
    if target.len() != online.len() {
        return Err(Error::dim("soft_update block count", online.len(), target.len()));
    }
    let keep = T::one() - tau;
    for (t, o) in target.iter_mut().zip(online) {
        o.value.expect_shape("soft_update", t.shape())?;
        t.value
            .as_mut_slice()
            .iter_mut()
            .zip(o.value.as_slice())
            .for_each(|(tv, &ov)| *tv = tau * ov + keep * *tv);
    }
    Ok(())
}

/// Total number of trainable scalars.
pub fn count_scalars<T: Scalar>(blocks: &[&ParamBlock<T>]) -> usize {
    blocks.iter().map(|b| b.len()).sum()
}
