//! Central finite-difference checks for every differentiable block.

use qmlp::nets::{ActionScale, Actor, ActorKind, ArchitectureConfig, Critic, PolicyKind};
use qmlp::nn::{Activation, DenseLayer, Matrix, ParamBlock};
use qmlp::quadratic::QuadraticNeuron;
use qmlp::rng::{rng_from, Rng};
use rand::Rng as _;
use rand_distr::StandardNormal;

pub const EPS: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
/// Denominator floor for the relative error, so gradients that are zero up to
/// rounding compare on an absolute scale of `REL_TOL * FLOOR`.
pub const FLOOR: f64 = 1e-6;
pub const MAX_WIDTH: usize = 8;

pub trait Blocks: Clone {
    fn blocks(&mut self) -> Vec<&mut ParamBlock<f64>>;
}

impl Blocks for DenseLayer<f64> {
    fn blocks(&mut self) -> Vec<&mut ParamBlock<f64>> {
        self.params_mut()
    }
}

impl Blocks for QuadraticNeuron<f64> {
    fn blocks(&mut self) -> Vec<&mut ParamBlock<f64>> {
        self.params_mut()
    }
}

impl Blocks for Critic<f64> {
    fn blocks(&mut self) -> Vec<&mut ParamBlock<f64>> {
        self.params_mut()
    }
}

impl Blocks for Actor<f64> {
    fn blocks(&mut self) -> Vec<&mut ParamBlock<f64>> {
        self.params_mut()
    }
}

pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(FLOOR)
}

fn uniform(rng: &mut Rng, rows: usize, cols: usize, r: f64) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.random_range(-r..=r)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

fn normal(rng: &mut Rng, rows: usize, cols: usize) -> Matrix<f64> {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

fn weighted(c: &Matrix<f64>, y: &Matrix<f64>) -> f64 {
    c.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a * b).sum()
}

/// Compares analytic parameter gradients, read from `net` after the caller's
/// backward pass, against central differences of `loss`.
fn check_params<N: Blocks>(label: &str, net: &N, loss: impl Fn(&N) -> f64) -> Result<usize, String> {
    let mut probe = net.clone();
    let analytic: Vec<(String, Vec<f64>)> = probe
        .blocks()
        .iter()
        .map(|b| (b.label.clone(), b.grad.as_slice().to_vec()))
        .collect();
    let mut checked = 0;
    for (k, (name, grads)) in analytic.iter().enumerate() {
        for (i, &a) in grads.iter().enumerate() {
            let orig = probe.blocks()[k].value.as_slice()[i];
            probe.blocks()[k].value.as_mut_slice()[i] = orig + EPS;
            let up = loss(&probe);
            probe.blocks()[k].value.as_mut_slice()[i] = orig - EPS;
            let down = loss(&probe);
            probe.blocks()[k].value.as_mut_slice()[i] = orig;
            let n = (up - down) / (2.0 * EPS);
            let e = rel_err(a, n);
            if e > REL_TOL {
                return Err(format!("{label}: {name}[{i}] analytic {a:e} numeric {n:e} rel {e:.2e}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

fn check_input(label: &str, x: &Matrix<f64>, dx: &Matrix<f64>, loss: impl Fn(&Matrix<f64>) -> f64) -> Result<usize, String> {
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = probe.as_slice()[i];
        probe.as_mut_slice()[i] = orig + EPS;
        let up = loss(&probe);
        probe.as_mut_slice()[i] = orig - EPS;
        let down = loss(&probe);
        probe.as_mut_slice()[i] = orig;
        let n = (up - down) / (2.0 * EPS);
        let a = dx.as_slice()[i];
        let e = rel_err(a, n);
        if e > REL_TOL {
            return Err(format!("{label}: input[{i}] analytic {a:e} numeric {n:e} rel {e:.2e}"));
        }
    }
    Ok(x.len())
}

pub fn dense(instances: usize, seed: u64) -> Result<usize, String> {
    let mut rng = rng_from(seed);
    let mut checked = 0;
    for t in 0..instances {
        let activation = [Activation::Relu, Activation::Tanh, Activation::Identity][t % 3];
        let n_in = rng.random_range(1..=MAX_WIDTH);
        let n_out = rng.random_range(1..=MAX_WIDTH);
        let batch = rng.random_range(1..=3);
        let bias = (t / 3) % 2 == 0;
        let w = uniform(&mut rng, n_out, n_in, 1.0);
        let b = bias.then(|| uniform(&mut rng, n_out, 1, 0.5));
        let mut layer = DenseLayer::from_parts(w, b, activation).unwrap();
        let x = uniform(&mut rng, n_in, batch, 1.0);
        let c = uniform(&mut rng, n_out, batch, 1.0);
        let label = format!("dense {activation:?} #{t}");

        layer.forward(&x).unwrap();
        let dx = layer.backward(&c).unwrap();
        checked += check_params(&label, &layer, |l| weighted(&c, &l.predict(&x).unwrap()))?;
        checked += check_input(&label, &x, &dx, |x| weighted(&c, &layer.predict(x).unwrap()))?;
    }
    Ok(checked)
}

pub fn quadratic(instances: usize, seed: u64) -> Result<usize, String> {
    let mut rng = rng_from(seed);
    let mut checked = 0;
    for t in 0..instances {
        let n = rng.random_range(1..=MAX_WIDTH);
        let n_f = rng.random_range(1..=MAX_WIDTH);
        let out = rng.random_range(1..=3);
        let batch = rng.random_range(1..=3);
        let mut q = QuadraticNeuron::from_parts(
            uniform(&mut rng, n_f, n, 1.0),
            uniform(&mut rng, n_f, n, 1.0),
            uniform(&mut rng, out, n_f, 1.0),
            uniform(&mut rng, out, 1, 1.0),
        )
        .unwrap();
        let x = uniform(&mut rng, n, batch, 1.0);
        let c = uniform(&mut rng, out, batch, 1.0);
        let label = format!("quadratic #{t}");

        q.forward(&x).unwrap();
        let dx = q.backward(&c).unwrap();
        checked += check_params(&label, &q, |q| weighted(&c, &q.predict(&x).unwrap()))?;
        checked += check_input(&label, &x, &dx, |x| weighted(&c, &q.predict(x).unwrap()))?;
    }
    Ok(checked)
}

pub fn critic(instances: usize, seed: u64) -> Result<usize, String> {
    let mut rng = rng_from(seed);
    let mut checked = 0;
    for t in 0..instances {
        let obs = rng.random_range(1..=6);
        let act = rng.random_range(1..=2);
        let hidden = rng.random_range(1..=MAX_WIDTH);
        let batch = rng.random_range(1..=3);
        let mut critic = Critic::build(obs, act, hidden, rng.random()).unwrap();
        randomize_biases(&mut rng, critic.params_mut());
        let s = uniform(&mut rng, obs, batch, 1.0);
        let a = uniform(&mut rng, act, batch, 1.0);
        let c1 = uniform(&mut rng, 1, batch, 1.0);
        let c2 = uniform(&mut rng, 1, batch, 1.0);
        let label = format!("critic #{t}");
        let loss = |net: &Critic<f64>, s: &Matrix<f64>, a: &Matrix<f64>| {
            let (q1, q2) = net.predict(s, a).unwrap();
            weighted(&c1, &q1) + weighted(&c2, &q2)
        };

        critic.forward(&s, &a).unwrap();
        let mut dx = critic.q1.backward(&c1).unwrap();
        dx.add_assign(&critic.q2.backward(&c2).unwrap()).unwrap();
        checked += check_params(&label, &critic, |n| loss(n, &s, &a))?;
        let joined = s.vstack(&a).unwrap();
        checked += check_input(&label, &joined, &dx, |x| {
            loss(&critic, &x.row_range(0, obs), &x.row_range(obs, obs + act))
        })?;
    }
    Ok(checked)
}

fn random_actor(rng: &mut Rng, kind: ActorKind, policy: PolicyKind) -> (Actor<f64>, usize, usize) {
    let obs = rng.random_range(1..=6);
    let act = rng.random_range(1..=2);
    let n_h = rng.random_range(1..=MAX_WIDTH);
    let mut arch = ArchitectureConfig::mlp(n_h, policy).with_kind(kind);
    if kind.has_quadratic() {
        arch = arch.with_n_f(rng.random_range(1..=MAX_WIDTH));
    }
    let low: Vec<f64> = (0..act).map(|_| rng.random_range(-3.0..-0.5)).collect();
    let high: Vec<f64> = (0..act).map(|_| rng.random_range(0.5..3.0)).collect();
    let mut actor = Actor::build(&arch, obs, ActionScale::new(low, high).unwrap(), rng.random()).unwrap();
    randomize_biases(rng, actor.params_mut());
    (actor, obs, act)
}

/// Zero biases can leave a ReLU pre-activation exactly on its kink, where the
/// two one-sided derivatives disagree.
fn randomize_biases(rng: &mut Rng, blocks: Vec<&mut ParamBlock<f64>>) {
    for p in blocks {
        if p.label.ends_with(".bias") {
            let (r, c) = p.shape();
            p.set_value(uniform(rng, r, c, 0.3)).unwrap();
        }
    }
}

pub fn actor_deterministic(kind: ActorKind, instances: usize, seed: u64) -> Result<usize, String> {
    let mut rng = rng_from(seed);
    let mut checked = 0;
    for t in 0..instances {
        let (mut actor, obs, act) = random_actor(&mut rng, kind, PolicyKind::Deterministic);
        let batch = rng.random_range(1..=3);
        let s = uniform(&mut rng, obs, batch, 1.0);
        let c = uniform(&mut rng, act, batch, 1.0);
        let label = format!("{kind} deterministic #{t}");

        actor.forward_deterministic(&s).unwrap();
        let ds = actor.backward_deterministic(&c).unwrap();
        checked += check_params(&label, &actor, |a| weighted(&c, &a.act_batch(&s).unwrap()))?;
        checked += check_input(&label, &s, &ds, |x| weighted(&c, &actor.act_batch(x).unwrap()))?;
    }
    Ok(checked)
}

/// Loss `Σ c ⊙ a + Σ d ⊙ log π` of a reparameterized sample with fixed noise.
pub fn actor_gaussian(kind: ActorKind, instances: usize, seed: u64) -> Result<usize, String> {
    let mut rng = rng_from(seed);
    let mut checked = 0;
    for t in 0..instances {
        let (mut actor, obs, act) = random_actor(&mut rng, kind, PolicyKind::Gaussian);
        let batch = rng.random_range(1..=3);
        let s = uniform(&mut rng, obs, batch, 1.0);
        let eps = normal(&mut rng, act, batch);
        let c = uniform(&mut rng, act, batch, 1.0);
        let d = uniform(&mut rng, 1, batch, 1.0);
        let label = format!("{kind} gaussian #{t}");
        let loss = |net: &Actor<f64>, s: &Matrix<f64>| {
            let out = net.sample_inference(s, &eps).unwrap();
            weighted(&c, &out.actions) + weighted(&d, &out.log_prob)
        };

        actor.sample(&s, &eps).unwrap();
        let ds = actor.backward_gaussian(&c, &d).unwrap();
        checked += check_params(&label, &actor, |a| loss(a, &s))?;
        checked += check_input(&label, &s, &ds, |x| loss(&actor, x))?;
    }
    Ok(checked)
}

pub const ALL_KINDS: [ActorKind; 4] = [ActorKind::Mlp, ActorKind::Qmlp, ActorKind::Lmlp, ActorKind::Lqmlp];

/// Every family at `instances` random draws each; returns one line per family.
pub fn full_suite(instances: usize) -> Vec<(String, Result<usize, String>)> {
    let mut out = vec![
        ("dense".to_string(), dense(instances, 1)),
        ("quadratic".to_string(), quadratic(instances, 2)),
        ("critic".to_string(), critic(instances, 3)),
    ];
    for (i, kind) in ALL_KINDS.into_iter().enumerate() {
        let seed = 10 + i as u64;
        out.push((format!("{kind} deterministic"), actor_deterministic(kind, instances, seed)));
        out.push((format!("{kind} gaussian"), actor_gaussian(kind, instances, seed + 100)));
    }
    out
}
