use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ParamBlock;
use crate::scalar::Scalar;

/// Adam with bias correction. Moments live in each [`ParamBlock`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for Adam {
    fn default() -> Self {
        Self::with_lr(3e-4)
    }
}

impl Adam {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One update over `params`; gradients are zeroed afterwards.
    ///
    /// Every gradient is checked before any value changes, so a fault leaves
    /// the whole sequence untouched.
    pub fn step<T: Scalar>(&self, params: &mut [&mut ParamBlock<T>]) -> Result<()> {
        for p in params.iter() {
            p.check_finite_grad()?;
        }
        if let Some(first) = params.first() {
            let t0 = first.step_count;
            if let Some(odd) = params.iter().find(|p| p.step_count != t0) {
                return Err(Error::State(format!(
                    "inconsistent Adam step counts: {} at {t0}, {} at {}",
                    first.label, odd.label, odd.step_count
                )));
            }
        }
        let b1 = T::lit(self.beta1);
        let b2 = T::lit(self.beta2);
        let one = T::one();
        let lr = T::lit(self.lr);
        let eps = T::lit(self.eps);
        for p in params.iter_mut() {
            p.step_count += 1;
            let t = p.step_count as i32;
            let c1 = one - b1.powi(t);
            let c2 = one - b2.powi(t);
            let ParamBlock {
                value,
                grad,
                adam_m,
                adam_v,
                ..
            } = &mut **p;
            let it = value
                .as_mut_slice()
                .iter_mut()
                .zip(grad.as_mut_slice())
                .zip(adam_m.as_mut_slice().iter_mut().zip(adam_v.as_mut_slice()));
            for ((v, g), (m, s)) in it {
                *m = b1 * *m + (one - b1) * *g;
                *s = b2 * *s + (one - b2) * *g * *g;
                let m_hat = *m / c1;
                let s_hat = *s / c2;
                *v -= lr * m_hat / (s_hat.sqrt() + eps);
                *g = T::zero();
            }
        }
        Ok(())
    }
}
