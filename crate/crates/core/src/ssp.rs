//! Finite state space over the belief simplex.
//!
//! States are a fixed set of prototype beliefs: the uniform starting belief,
//! one absorbing terminal per class (the one-hot vector) and two-mass
//! vectors `(1−q)·e_i + q·e_j` for each pair of classes and each level `q`
//! of the quantization grid. A belief maps to a terminal state exactly when
//! its largest entry exceeds the confidence threshold; otherwise it maps to
//! the nearest non-terminal prototype in Euclidean distance.

use crate::belief::Belief;
use crate::error::{Error, Result};
use crate::textfmt;

const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    nc: usize,
    /// Row-major `states × Nc`.
    prototypes: Vec<f64>,
    terminal_of: Vec<Option<usize>>,
    pub init_index: usize,
    pub terminal_indices: Vec<usize>,
    pub tau: f64,
    pub q_grid: Vec<f64>,
}

/// `{0.1, 0.2, …, 0.9}`.
pub fn default_q_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

pub fn build_state_space(nc: usize, q_grid: &[f64], tau: f64) -> Result<StateSpace> {
    if nc < 2 {
        return Err(Error::param("state space needs at least two classes"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::param(format!("tau = {tau} outside (0, 1)")));
    }
    if let Some(q) = q_grid.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(Error::param(format!(
            "quantization level {q} outside (0, 1)"
        )));
    }

    let mut protos: Vec<Vec<f64>> = Vec::new();
    protos.push(vec![1.0 / nc as f64; nc]);
    for c in 0..nc {
        let mut v = vec![0.0; nc];
        v[c] = 1.0;
        protos.push(v);
    }
    for i in 0..nc {
        for j in 0..nc {
            if i == j {
                continue;
            }
            for &q in q_grid {
                let mut v = vec![0.0; nc];
                v[i] = 1.0 - q;
                v[j] = q;
                let dup = protos
                    .iter()
                    .any(|p| p.iter().zip(&v).all(|(a, b)| (a - b).abs() <= DEDUP_TOL));
                if !dup {
                    protos.push(v);
                }
            }
        }
    }

    let mut terminal_of = vec![None; protos.len()];
    for c in 0..nc {
        terminal_of[1 + c] = Some(c);
    }
    Ok(StateSpace {
        nc,
        prototypes: protos.concat(),
        terminal_of,
        init_index: 0,
        terminal_indices: (1..=nc).collect(),
        tau,
        q_grid: q_grid.to_vec(),
    })
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.terminal_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminal_of.is_empty()
    }

    pub fn nc(&self) -> usize {
        self.nc
    }

    pub fn prototype(&self, s: usize) -> &[f64] {
        &self.prototypes[s * self.nc..(s + 1) * self.nc]
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal_of[s].is_some()
    }

    /// Class whose terminal state `s` is, if any.
    pub fn terminal_class(&self, s: usize) -> Option<usize> {
        self.terminal_of[s]
    }

    /// Debug dump, one prototype per line.
    pub fn to_text(&self) -> String {
        let grid: Vec<_> = self.q_grid.iter().map(|q| textfmt::real(*q)).collect();
        let mut out = format!(
            "RISSS v1 states={} Nc={} tau={} q_grid={}\n",
            self.len(),
            self.nc,
            textfmt::real(self.tau),
            grid.join(",")
        );
        for s in 0..self.len() {
            let row: Vec<_> = self
                .prototype(s)
                .iter()
                .map(|p| textfmt::real(*p))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Identifies the state space in Q-table headers.
    pub fn fingerprint(&self) -> String {
        textfmt::content_hash(&self.to_text())
    }
}

/// Map a belief to its state.
///
/// Confident beliefs go to the terminal of their declared class; any other
/// belief goes to the nearest non-terminal prototype (lowest index on ties).
pub fn project(b: &Belief, ss: &StateSpace) -> usize {
    debug_assert_eq!(b.len(), ss.nc);
    if b.is_confident(ss.tau) {
        return ss.terminal_indices[b.declare()];
    }
    let p = b.probs();
    let mut best = ss.init_index;
    let mut best_d = f64::INFINITY;
    for s in 0..ss.len() {
        if ss.is_terminal(s) {
            continue;
        }
        let d: f64 = ss
            .prototype(s)
            .iter()
            .zip(p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d < best_d {
            best = s;
            best_d = d;
        }
    }
    best
}

/// Reward for one pilot sent from `state`: every pilot costs 1 until a
/// terminal state is reached, after which the process is absorbed at no cost.
pub fn reward(state: usize, ss: &StateSpace) -> i32 {
    if ss.is_terminal(state) {
        0
    } else {
        -1
    }
}
