//! Actor sizes and printed weight counts of the published hyperparameter
//! table, with the environment dimensions they were computed for.

use qmlp::nets::{ActorKind, ArchitectureConfig, PolicyKind};

pub struct Entry {
    pub kind: ActorKind,
    pub policy: PolicyKind,
    pub n_h: usize,
    pub kappa: Option<f64>,
    pub n_f: Option<usize>,
    pub printed: &'static str,
}

impl Entry {
    pub fn arch(&self) -> ArchitectureConfig {
        let arch = ArchitectureConfig::mlp(self.n_h, self.policy).with_kind(self.kind);
        match self.kappa {
            Some(k) => arch.with_kappa(k),
            None => arch,
        }
    }
}

pub struct Row {
    pub env: &'static str,
    pub obs: usize,
    pub act: usize,
    pub entries: [Entry; 4],
}

const fn q(policy: PolicyKind, n_h: usize, kappa: f64, n_f: usize, printed: &'static str) -> Entry {
    Entry { kind: ActorKind::Qmlp, policy, n_h, kappa: Some(kappa), n_f: Some(n_f), printed }
}

const fn m(policy: PolicyKind, printed: &'static str) -> Entry {
    Entry { kind: ActorKind::Mlp, policy, n_h: 256, kappa: None, n_f: None, printed }
}

use PolicyKind::{Deterministic as D, Gaussian as G};

pub const ROWS: [Row; 6] = [
    Row { env: "Ant", obs: 111, act: 8, entries: [q(D, 64, 0.1, 62, "26.1k"), m(D, "96.5k"), q(G, 128, 0.1, 62, "47.7k"), m(G, "98.6k")] },
    Row { env: "BipedalWalker", obs: 24, act: 4, entries: [q(D, 192, 1.0, 300, "58.2k"), m(D, "73.2k"), q(G, 192, 1.0, 300, "60.2k"), m(G, "74.2k")] },
    Row { env: "HalfCheetah", obs: 17, act: 6, entries: [q(D, 192, 1.0, 153, "47.8k"), m(D, "71.9k"), q(G, 192, 1.0, 153, "49.9k"), m(G, "73.5k")] },
    Row { env: "Hopper", obs: 11, act: 3, entries: [q(D, 128, 1.0, 66, "20.1k"), m(D, "69.6k"), q(G, 128, 1.0, 66, "20.6k"), m(G, "70.4k")] },
    Row { env: "Humanoid", obs: 376, act: 17, entries: [q(D, 192, 0.02, 28, "134.2k"), m(D, "166.7k"), q(G, 224, 0.02, 28, "164.5k"), m(G, "171.0k")] },
    Row { env: "Walker2d", obs: 17, act: 6, entries: [q(D, 64, 1.0, 153, "11.8k"), m(D, "71.9k"), q(G, 128, 1.0, 153, "27.4k"), m(G, "73.5k")] },
];
