//! Bounded ring of transitions with uniform sampling.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::scalar::Scalar;

pub const DEFAULT_CAPACITY: usize = 100_000;
pub const MAX_CAPACITY: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub s: Vec<T>,
    pub a: Vec<T>,
    pub r: T,
    pub s_next: Vec<T>,
    /// 1 only for true terminals; truncated episodes keep bootstrapping.
    pub done_mask: T,
}

/// Column-major minibatch: every field has one column per sample.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    pub states: Matrix<T>,
    pub actions: Matrix<T>,
    pub rewards: Matrix<T>,
    pub next_states: Matrix<T>,
    pub done: Matrix<T>,
}

impl<T: Scalar> Batch<T> {
    pub fn len(&self) -> usize {
        self.states.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a batch from explicit transitions.
    pub fn from_transitions(items: &[Transition<T>]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::State("empty transition list".into()))?;
        let (n, a) = (first.s.len(), first.a.len());
        let b = items.len();
        let mut out = Self {
            states: Matrix::zeros(n, b),
            actions: Matrix::zeros(a, b),
            rewards: Matrix::zeros(1, b),
            next_states: Matrix::zeros(n, b),
            done: Matrix::zeros(1, b),
        };
        for (j, t) in items.iter().enumerate() {
            if t.s.len() != n || t.s_next.len() != n || t.a.len() != a {
                return Err(Error::dim("batch transition", format!("{n}/{a}"), format!("{}/{}", t.s.len(), t.a.len())));
            }
            out.write_column(j, t);
        }
        Ok(out)
    }

    fn write_column(&mut self, j: usize, t: &Transition<T>) {
        for (i, &v) in t.s.iter().enumerate() {
            self.states[(i, j)] = v;
        }
        for (i, &v) in t.a.iter().enumerate() {
            self.actions[(i, j)] = v;
        }
        for (i, &v) in t.s_next.iter().enumerate() {
            self.next_states[(i, j)] = v;
        }
        self.rewards[(0, j)] = t.r;
        self.done[(0, j)] = t.done_mask;
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    obs_dim: usize,
    act_dim: usize,
    capacity: usize,
    items: Vec<Transition<T>>,
    cursor: usize,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(obs_dim: usize, act_dim: usize, capacity: usize) -> Result<Self> {
        if capacity == 0 || capacity > MAX_CAPACITY {
            return Err(Error::Config(format!(
                "replay capacity must be in 1..={MAX_CAPACITY}, got {capacity}"
            )));
        }
        Ok(Self {
            obs_dim,
            act_dim,
            capacity,
            items: Vec::new(),
            cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Stored transition at ring slot `i`.
    pub fn get(&self, i: usize) -> Option<&Transition<T>> {
        self.items.get(i)
    }

    pub fn push(&mut self, t: Transition<T>) -> Result<()> {
        if t.s.len() != self.obs_dim || t.s_next.len() != self.obs_dim {
            return Err(Error::dim("replay state", self.obs_dim, format!("{}/{}", t.s.len(), t.s_next.len())));
        }
        if t.a.len() != self.act_dim {
            return Err(Error::dim("replay action", self.act_dim, t.a.len()));
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Uniform slot indices, drawn with replacement.
    pub fn sample_indices(&self, batch: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
        if self.items.is_empty() {
            return Err(Error::State("cannot sample from an empty replay buffer".into()));
        }
        if batch == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok((0..batch).map(|_| rng.random_range(0..self.items.len())).collect())
    }

    pub fn sample(&self, batch: usize, rng: &mut impl Rng) -> Result<Batch<T>> {
        let idx = self.sample_indices(batch, rng)?;
        let mut out = Batch {
            states: Matrix::zeros(self.obs_dim, batch),
            actions: Matrix::zeros(self.act_dim, batch),
            rewards: Matrix::zeros(1, batch),
            next_states: Matrix::zeros(self.obs_dim, batch),
            done: Matrix::zeros(1, batch),
        };
        for (j, &i) in idx.iter().enumerate() {
            out.write_column(j, &self.items[i]);
        }
        Ok(out)
    }
}
