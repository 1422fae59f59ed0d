use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, InitKind, InitializerSpec, Matrix, ParamBlock};
use crate::rng;
use crate::scalar::Scalar;

pub const DEFAULT_CRITIC_HIDDEN: usize = 256;

/// One state-action value network: `[s; a] -> h -> h -> 1`.
#[derive(Debug, Clone)]
pub struct QNetwork<T> {
    layers: [DenseLayer<T>; 3],
}

impl<T: Scalar> QNetwork<T> {
    pub fn new(label: &str, input: usize, hidden: usize, seed: u64) -> Self {
        let spec = |stream| InitializerSpec::new(InitKind::XavierUniform, rng::derive(seed, stream));
        Self {
            layers: [
                DenseLayer::new(&format!("{label}.0"), input, hidden, Activation::Relu, spec(0), true),
                DenseLayer::new(&format!("{label}.1"), hidden, hidden, Activation::Relu, spec(1), true),
                DenseLayer::new(&format!("{label}.2"), hidden, 1, Activation::Identity, spec(2), true),
            ],
        }
    }

    pub fn layers(&self) -> &[DenseLayer<T>; 3] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer<T>; 3] {
        &mut self.layers
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let h = self.layers[0].predict(x)?;
        let h = self.layers[1].predict(&h)?;
        self.layers[2].predict(&h)
    }

    pub fn forward(&mut self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let h = self.layers[0].forward(x)?;
        let h = self.layers[1].forward(&h)?;
        self.layers[2].forward(&h)
    }

    /// Accumulates parameter gradients for `dL/dq` (`1 x B`).
    pub fn backward(&mut self, dq: &Matrix<T>) -> Result<Matrix<T>> {
        let g = self.layers[2].backward(dq)?;
        let g = self.layers[1].backward(&g)?;
        self.layers[0].backward(&g)
    }

    /// Input gradient only; parameters are untouched.
    pub fn backward_input(&mut self, dq: &Matrix<T>) -> Result<Matrix<T>> {
        let g = self.layers[2].backward_input(dq)?;
        let g = self.layers[1].backward_input(&g)?;
        self.layers[0].backward_input(&g)
    }

    pub fn params(&self) -> Vec<&ParamBlock<T>> {
        self.layers.iter().flat_map(DenseLayer::params).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut ParamBlock<T>> {
        self.layers.iter_mut().flat_map(DenseLayer::params_mut).collect()
    }

    pub fn clear_cache(&mut self) {
        self.layers.iter_mut().for_each(DenseLayer::clear_cache);
    }
}

/// Twin critic with fully independent parameters.
#[derive(Debug, Clone)]
pub struct Critic<T> {
    obs_dim: usize,
    act_dim: usize,
    hidden: usize,
    pub q1: QNetwork<T>,
    pub q2: QNetwork<T>,
}

impl<T: Scalar> Critic<T> {
    pub fn build(obs_dim: usize, act_dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        if obs_dim == 0 || act_dim == 0 || hidden == 0 {
            return Err(Error::Config("critic dimensions must be positive".into()));
        }
        let input = obs_dim + act_dim;
        Ok(Self {
            obs_dim,
            act_dim,
            hidden,
            q1: QNetwork::new("critic.q1", input, hidden, rng::derive(seed, 1)),
            q2: QNetwork::new("critic.q2", input, hidden, rng::derive(seed, 2)),
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    /// Stacks a state batch over an action batch.
    pub fn join(&self, states: &Matrix<T>, actions: &Matrix<T>) -> Result<Matrix<T>> {
        if states.rows() != self.obs_dim || actions.rows() != self.act_dim || states.cols() != actions.cols() {
            return Err(Error::dim(
                "critic input",
                format!("{}xB states and {}xB actions", self.obs_dim, self.act_dim),
                format!("{} and {}", states.shape_string(), actions.shape_string()),
            ));
        }
        states.vstack(actions)
    }

    pub fn predict(&self, states: &Matrix<T>, actions: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
        let x = self.join(states, actions)?;
        Ok((self.q1.predict(&x)?, self.q2.predict(&x)?))
    }

    /// Single-sample convenience returning `(q1, q2)`.
    pub fn evaluate(&self, state: &[T], action: &[T]) -> Result<(T, T)> {
        let (q1, q2) = self.predict(&Matrix::column(state), &Matrix::column(action))?;
        Ok((q1[(0, 0)], q2[(0, 0)]))
    }

    pub fn forward(&mut self, states: &Matrix<T>, actions: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
        let x = self.join(states, actions)?;
        Ok((self.q1.forward(&x)?, self.q2.forward(&x)?))
    }

    /// Extracts the action rows of a joined-input gradient.
    pub fn action_grad(&self, d_input: &Matrix<T>) -> Matrix<T> {
        d_input.row_range(self.obs_dim, self.obs_dim + self.act_dim)
    }

    pub fn params(&self) -> Vec<&ParamBlock<T>> {
        let mut p = self.q1.params();
        p.extend(self.q2.params());
        p
    }

    pub fn params_mut(&mut self) -> Vec<&mut ParamBlock<T>> {
        let mut p = self.q1.params_mut();
        p.extend(self.q2.params_mut());
        p
    }

    pub fn zero_grads(&mut self) {
        self.params_mut().into_iter().for_each(ParamBlock::zero_grad);
    }

    pub fn clear_cache(&mut self) {
        self.q1.clear_cache();
        self.q2.clear_cache();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_critic_outputs_zero() {
        let mut c: Critic<f64> = Critic::build(3, 1, 8, 0).unwrap();
        c.params_mut().into_iter().for_each(|p| p.value.fill(0.0));
        assert_eq!(c.evaluate(&[0.3, -0.1, 2.0], &[0.5]).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn q1_gradients_leave_q2_untouched() {
        let mut c: Critic<f64> = Critic::build(2, 1, 4, 5).unwrap();
        let s = Matrix::from_columns(&[vec![0.1, 0.2], vec![-0.4, 1.0]]).unwrap();
        let a = Matrix::from_columns(&[vec![0.5], vec![-0.5]]).unwrap();
        let (q1, _) = c.forward(&s, &a).unwrap();
        c.q1.backward(&Matrix::filled(1, q1.cols(), 1.0)).unwrap();
        assert!(c.q1.params().iter().any(|p| p.grad.max_abs() > 0.0));
        assert!(c.q2.params().iter().all(|p| p.grad.max_abs() == 0.0));
    }

    #[test]
    fn rejects_mismatched_batches() {
        let c: Critic<f64> = Critic::build(2, 1, 4, 5).unwrap();
        assert!(c.predict(&Matrix::zeros(2, 3), &Matrix::zeros(1, 2)).is_err());
        assert!(c.predict(&Matrix::zeros(3, 2), &Matrix::zeros(1, 2)).is_err());
    }
}
