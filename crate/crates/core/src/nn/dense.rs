use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{gemm, init_params, InitializerSpec, Matrix, ParamBlock};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Relu => x.max(T::zero()),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    pub fn derivative_from_output<T: Scalar>(self, y: T) -> T {
        match self {
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - y * y,
            Activation::Identity => T::one(),
        }
    }
}

#[derive(Debug, Clone)]
struct DenseCache<T> {
    input: Matrix<T>,
    output: Matrix<T>,
}

/// Fully connected layer `activation(W x + b)` over a batch of column vectors.
///
/// `forward` caches what `backward` needs; a cache is consumed by exactly one
/// backward call.
#[derive(Debug, Clone)]
pub struct DenseLayer<T> {
    pub weights: ParamBlock<T>,
    pub bias: Option<ParamBlock<T>>,
    pub activation: Activation,
    cache: Option<DenseCache<T>>,
}

impl<T: Scalar> DenseLayer<T> {
    /// Builds a layer with weights drawn from `spec` and a zero bias.
    pub fn new(
        label: &str,
        input: usize,
        output: usize,
        activation: Activation,
        spec: InitializerSpec,
        with_bias: bool,
    ) -> Self {
        let w = init_params(output, input, spec);
        let bias = with_bias.then(|| ParamBlock::new(format!("{label}.bias"), Matrix::zeros(output, 1)));
        Self {
            weights: ParamBlock::new(format!("{label}.weight"), w),
            bias,
            activation,
            cache: None,
        }
    }

    pub fn from_parts(weights: Matrix<T>, bias: Option<Matrix<T>>, activation: Activation) -> Result<Self> {
        if let Some(b) = &bias {
            b.expect_shape("DenseLayer bias", (weights.rows(), 1))?;
        }
        Ok(Self {
            weights: ParamBlock::new("weight", weights),
            bias: bias.map(|b| ParamBlock::new("bias", b)),
            activation,
            cache: None,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.value.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.value.rows()
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.rows() != self.input_dim() {
            return Err(Error::dim(
                "dense forward",
                format!("{}xB input for {} layer", self.input_dim(), self.weights.value.shape_string()),
                x.shape_string(),
            ));
        }
        let mut z = Matrix::zeros(self.output_dim(), x.cols());
        gemm(T::one(), &self.weights.value, false, x, false, T::zero(), &mut z)?;
        if let Some(b) = &self.bias {
            z.add_column_broadcast(&b.value)?;
        }
        if self.activation != Activation::Identity {
            let act = self.activation;
            z.as_mut_slice().iter_mut().for_each(|v| *v = act.apply(*v));
        }
        Ok(z)
    }

    pub fn forward(&mut self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let y = self.predict(x)?;
        self.cache = Some(DenseCache {
            input: x.clone(),
            output: y.clone(),
        });
        Ok(y)
    }

    fn take_cache(&mut self) -> Result<DenseCache<T>> {
        self.cache
            .take()
            .ok_or_else(|| Error::State(format!("backward on {} without a prior forward", self.weights.label)))
    }

    fn pre_activation_grad(&self, cache: &DenseCache<T>, grad_out: &Matrix<T>) -> Result<Matrix<T>> {
        grad_out.expect_shape("dense backward", cache.output.shape())?;
        if self.activation == Activation::Identity {
            return Ok(grad_out.clone());
        }
        let act = self.activation;
        grad_out.zip_map(&cache.output, |g, y| g * act.derivative_from_output(y))
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, grad_out: &Matrix<T>) -> Result<Matrix<T>> {
        let cache = self.take_cache()?;
        let dz = self.pre_activation_grad(&cache, grad_out)?;
        gemm(T::one(), &dz, false, &cache.input, true, T::one(), &mut self.weights.grad)?;
        if let Some(b) = &mut self.bias {
            b.accumulate(&dz.sum_columns())?;
        }
        let mut dx = Matrix::zeros(self.input_dim(), dz.cols());
        gemm(T::one(), &self.weights.value, true, &dz, false, T::zero(), &mut dx)?;
        Ok(dx)
    }

    /// Input gradient only; parameter gradients are left untouched.
    pub fn backward_input(&mut self, grad_out: &Matrix<T>) -> Result<Matrix<T>> {
        let cache = self.take_cache()?;
        let dz = self.pre_activation_grad(&cache, grad_out)?;
        let mut dx = Matrix::zeros(self.input_dim(), dz.cols());
        gemm(T::one(), &self.weights.value, true, &dz, false, T::zero(), &mut dx)?;
        Ok(dx)
    }

    pub fn clear_cache(&mut self) {
        self.cache = None;
    }

    pub fn params(&self) -> Vec<&ParamBlock<T>> {
        std::iter::once(&self.weights).chain(self.bias.as_ref()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut ParamBlock<T>> {
        std::iter::once(&mut self.weights).chain(self.bias.as_mut()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(w: Vec<Vec<f64>>, b: Vec<f64>, act: Activation) -> DenseLayer<f64> {
        let w = Matrix::from_rows(&w).unwrap();
        DenseLayer::from_parts(w, Some(Matrix::column(&b)), act).unwrap()
    }

    #[test]
    fn identity_relu_and_tanh_forward() {
        let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let x = Matrix::column(&[3.0, -1.0]);
        let id = layer(eye.clone(), vec![0.0, 0.0], Activation::Identity);
        assert_eq!(id.predict(&x).unwrap().as_slice(), &[3.0, -1.0]);
        let relu = layer(eye, vec![0.0, 0.0], Activation::Relu);
        assert_eq!(relu.predict(&x).unwrap().as_slice(), &[3.0, 0.0]);
        let th = layer(vec![vec![1.0, 1.0]], vec![0.0], Activation::Tanh);
        let y = th.predict(&Matrix::column(&[0.5, 0.5])).unwrap();
        assert!((y[(0, 0)] - 0.761_594_155_955_764_9).abs() < 1e-15);
    }

    #[test]
    fn tanh_output_is_open_interval() {
        let th = layer(vec![vec![50.0, -50.0]], vec![0.0], Activation::Tanh);
        let y = th.predict(&Matrix::column(&[0.3, -0.3])).unwrap()[(0, 0)];
        assert!(y > -1.0 && y <= 1.0);
    }

    #[test]
    fn shape_mismatch_names_both_shapes() {
        let l = layer(vec![vec![1.0, 1.0]], vec![0.0], Activation::Identity);
        let err = l.predict(&Matrix::column(&[1.0, 2.0, 3.0])).unwrap_err().to_string();
        assert!(err.contains("1x2") && err.contains("3x1"), "{err}");
    }

    #[test]
    fn linear_map_gradient() {
        // loss = sum(W x), x = (1, 0)
        let mut l = layer(vec![vec![0.3, -0.2], vec![1.0, 2.0], vec![0.0, 0.5]], vec![0.0; 3], Activation::Identity);
        let y = l.forward(&Matrix::column(&[1.0, 0.0])).unwrap();
        l.backward(&Matrix::filled(y.rows(), 1, 1.0)).unwrap();
        let g = &l.weights.grad;
        for i in 0..3 {
            assert_eq!(g[(i, 0)], 1.0);
            assert_eq!(g[(i, 1)], 0.0);
        }
    }

    #[test]
    fn constant_loss_has_zero_grads() {
        let mut l = layer(vec![vec![0.3, -0.2]], vec![0.1], Activation::Tanh);
        l.forward(&Matrix::column(&[1.0, 2.0])).unwrap();
        l.backward(&Matrix::zeros(1, 1)).unwrap();
        assert!(l.params().iter().all(|p| p.grad.max_abs() == 0.0));
    }

    #[test]
    fn backward_requires_forward() {
        let mut l = layer(vec![vec![1.0]], vec![0.0], Activation::Relu);
        assert!(matches!(l.backward(&Matrix::zeros(1, 1)), Err(Error::State(_))));
        l.forward(&Matrix::column(&[1.0])).unwrap();
        l.backward(&Matrix::zeros(1, 1)).unwrap();
        // The cache is consumed by the first backward.
        assert!(l.backward(&Matrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn backward_input_leaves_param_grads_alone() {
        let mut l = layer(vec![vec![1.0, 2.0]], vec![0.5], Activation::Identity);
        l.forward(&Matrix::column(&[1.0, 1.0])).unwrap();
        let dx = l.backward_input(&Matrix::column(&[1.0])).unwrap();
        assert_eq!(dx.as_slice(), &[1.0, 2.0]);
        assert!(l.params().iter().all(|p| p.grad.max_abs() == 0.0));
    }
}
