//! Tabular Q-learning of the probing policy.
//!
//! Training replays the stored dataset: an episode picks a dataset channel,
//! starts from the uniform belief and, at each step, reads the stored
//! feedback of the chosen probing codeword, updates the belief, projects it
//! onto the state space and applies the undiscounted Bellman update. Every
//! pilot costs one unit until a terminal (confident) state is reached, so
//! `−Q(s, a)` estimates the remaining number of pilots.
//!
//! While replaying channel `k`, row `k` is left out of the likelihood: its
//! own stored feedback would otherwise match exactly and end every episode
//! after a single pilot.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::belief::{argmax, posterior_update_excluding, Belief, TrainingDataset};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};
use crate::ssp::{project, reward, StateSpace};
use crate::textfmt::{self, header_field};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub alpha: f64,
    pub epsilon: f64,
    pub max_epoch: usize,
    /// Channels replayed per epoch; `None` means the whole dataset.
    pub max_channel: Option<usize>,
    /// Pilot budget per training episode.
    pub max_l: usize,
}

impl Hyper {
    /// Defaults for a probing codebook of `np` actions.
    pub fn with_actions(np: usize) -> Self {
        Hyper {
            alpha: 0.1,
            epsilon: 0.1,
            max_epoch: 200,
            max_channel: None,
            max_l: np,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::param(format!(
                "alpha = {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::param(format!(
                "epsilon = {} outside [0, 1]",
                self.epsilon
            )));
        }
        if self.max_l == 0 {
            return Err(Error::param("max_L must be at least 1"));
        }
        Ok(())
    }
}

/// Provenance recorded with a Q-table.
#[derive(Debug, Clone, PartialEq)]
pub struct QMeta {
    pub alpha: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub max_epoch: usize,
    pub max_l: usize,
    pub dataset_hash: String,
    pub state_fingerprint: String,
}

/// `|S| × Np` action values.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Vec<f64>,
    n_actions: usize,
    terminal: Vec<bool>,
    /// Lower clamp of the Bellman target; no episode costs more than `max_L`.
    floor: f64,
    pub meta: QMeta,
}

impl QTable {
    /// All-zero table over `ss` with `n_actions` actions.
    pub fn zeros(ss: &StateSpace, n_actions: usize, meta: QMeta) -> Self {
        QTable {
            values: vec![0.0; ss.len() * n_actions],
            n_actions,
            terminal: (0..ss.len()).map(|s| ss.is_terminal(s)).collect(),
            floor: -(meta.max_l as f64),
            meta,
        }
    }

    pub fn n_states(&self) -> usize {
        self.terminal.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * self.n_actions + a] = v;
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action of `s`, lowest index on ties.
    pub fn greedy(&self, s: usize) -> usize {
        argmax(self.row(s))
    }

    pub fn to_text(&self) -> String {
        let m = &self.meta;
        let mut out = format!(
            "RISQ v1 states={} actions={} alpha={} epsilon={} tau={} dshash={} ssfp={} max_epoch={} max_l={}\n",
            self.n_states(),
            self.n_actions,
            textfmt::real(m.alpha),
            textfmt::real(m.epsilon),
            textfmt::real(m.tau),
            m.dataset_hash,
            m.state_fingerprint,
            m.max_epoch,
            m.max_l
        );
        for s in 0..self.n_states() {
            let row: Vec<_> = self.row(s).iter().map(|v| textfmt::real(*v)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parse a Q-table and bind it to `ss`, which must match the recorded
    /// fingerprint.
    pub fn from_text(text: &str, ss: &StateSpace) -> Result<Self> {
        const WHAT: &str = "Q-table";
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(WHAT, 1, "empty file"))?;
        let mut tok = header.split_whitespace();
        if tok.next() != Some("RISQ") {
            return Err(Error::parse(WHAT, 1, "expected `RISQ` header"));
        }
        match tok.next() {
            Some("v1") => {}
            found => {
                return Err(Error::UnsupportedVersion {
                    what: WHAT,
                    found: found.unwrap_or("").to_string(),
                    expected: "v1",
                })
            }
        }
        fn field<T: std::str::FromStr>(tok: Option<&str>, key: &str) -> Result<T> {
            header_field(tok, key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(WHAT, 1, format!("missing or invalid `{key}=`")))
        }
        let states: usize = field(tok.next(), "states")?;
        let actions: usize = field(tok.next(), "actions")?;
        let meta = QMeta {
            alpha: field(tok.next(), "alpha")?,
            epsilon: field(tok.next(), "epsilon")?,
            tau: field(tok.next(), "tau")?,
            dataset_hash: field(tok.next(), "dshash")?,
            state_fingerprint: field(tok.next(), "ssfp")?,
            max_epoch: field(tok.next(), "max_epoch")?,
            max_l: field(tok.next(), "max_l")?,
        };
        if actions == 0 {
            return Err(Error::parse(WHAT, 1, "zero actions"));
        }

        let mut values = Vec::with_capacity(states * actions);
        let mut rows = 0;
        for (line_no, line) in lines.by_ref().take(states) {
            let row = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(WHAT, line_no, e.to_string()))?;
            if row.len() != actions {
                return Err(Error::parse(
                    WHAT,
                    line_no,
                    format!("expected {actions} values, found {}", row.len()),
                ));
            }
            values.extend(row);
            rows += 1;
        }
        if rows != states {
            return Err(Error::parse(
                WHAT,
                rows + 2,
                format!("truncated: expected {states} rows, found {rows}"),
            ));
        }
        if let Some((line_no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(WHAT, line_no, "trailing content"));
        }

        if meta.state_fingerprint != ss.fingerprint() || states != ss.len() || meta.tau != ss.tau {
            return Err(Error::Incompatible(format!(
                "Q-table was trained on state space {} ({} states, tau {}), got {} ({} states, tau {})",
                meta.state_fingerprint,
                states,
                meta.tau,
                ss.fingerprint(),
                ss.len(),
                ss.tau
            )));
        }
        let mut q = QTable::zeros(ss, actions, meta);
        q.values = values;
        Ok(q)
    }

    /// Fails unless this table was trained on `ds`.
    pub fn check_dataset(&self, ds: &TrainingDataset) -> Result<()> {
        let hash = ds.hash();
        if self.meta.dataset_hash != hash {
            return Err(Error::Incompatible(format!(
                "Q-table was trained on dataset {}, got {hash}",
                self.meta.dataset_hash
            )));
        }
        if self.n_actions != ds.np() {
            return Err(Error::Incompatible(format!(
                "Q-table has {} actions, dataset has {}",
                self.n_actions,
                ds.np()
            )));
        }
        Ok(())
    }
}

/// Greedy map from state to probing action; `None` on terminal states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub actions: Vec<Option<usize>>,
}

impl Policy {
    pub fn action(&self, s: usize) -> Option<usize> {
        self.actions[s]
    }
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingCurve {
    /// Mean pilots per episode.
    pub mean_length: Vec<f64>,
    /// Fraction of episodes that reached a terminal state within `max_L`.
    pub terminal_fraction: Vec<f64>,
}

impl TrainingCurve {
    pub fn len(&self) -> usize {
        self.mean_length.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_length.is_empty()
    }

    /// Trailing moving average of `mean_length` over `window` epochs.
    pub fn smoothed_length(&self, window: usize) -> Vec<f64> {
        let w = window.max(1);
        (0..self.len())
            .map(|i| {
                let lo = (i + 1).saturating_sub(w);
                let xs = &self.mean_length[lo..=i];
                xs.iter().sum::<f64>() / xs.len() as f64
            })
            .collect()
    }
}

/// `Q[s][a] ← (1−α) Q[s][a] + α (r + max_a' Q[s'][a'])`, undiscounted.
///
/// Terminal rows are never written.
pub fn q_update(q: &mut QTable, s: usize, a: usize, r: f64, s_next: usize, alpha: f64) {
    if q.is_terminal(s) {
        return;
    }
    let target = (r + q.max_value(s_next)).max(q.floor);
    let old = q.get(s, a);
    q.set(s, a, (1.0 - alpha) * old + alpha * target);
}

/// Greedy with probability `1 − ε`, otherwise a uniformly random action.
pub fn epsilon_greedy<R: Rng + ?Sized>(q: &QTable, s: usize, epsilon: f64, rng: &mut R) -> usize {
    if rng.random::<f64>() >= epsilon {
        q.greedy(s)
    } else {
        rng.random_range(0..q.n_actions)
    }
}

pub fn extract_policy(q: &QTable) -> Policy {
    Policy {
        actions: (0..q.n_states())
            .map(|s| (!q.is_terminal(s)).then(|| q.greedy(s)))
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct Training {
    pub qtable: QTable,
    pub policy: Policy,
    pub curve: TrainingCurve,
}

/// Outcome of one replayed episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub pilots: usize,
    pub reached_terminal: bool,
    /// Sum of step rewards.
    pub ret: i64,
}

/// Replay dataset row `k` from the uniform belief, choosing actions with
/// `choose` and feeding each transition to `learn`.
#[allow(clippy::too_many_arguments)]
pub fn replay_episode(
    ds: &TrainingDataset,
    ss: &StateSpace,
    k: usize,
    eps_floor: f64,
    max_l: usize,
    mut choose: impl FnMut(usize) -> usize,
    mut learn: impl FnMut(usize, usize, f64, usize),
) -> Result<ReplayOutcome> {
    let mut belief = Belief::uniform(ds.nc())?;
    let mut s = ss.init_index;
    let mut out = ReplayOutcome {
        pilots: 0,
        reached_terminal: false,
        ret: 0,
    };
    while out.pilots < max_l {
        let a = choose(s);
        let y = ds.feedback(k, a);
        belief = posterior_update_excluding(&belief, a, y, ds, eps_floor, Some(k))?;
        let s_next = project(&belief, ss);
        let r = reward(s, ss);
        learn(s, a, r as f64, s_next);
        out.pilots += 1;
        out.ret += r as i64;
        s = s_next;
        if ss.is_terminal(s) {
            out.reached_terminal = true;
            break;
        }
    }
    Ok(out)
}

/// Learn the Q-table by replaying the dataset for `hyper.max_epoch` epochs.
pub fn train(
    ds: &TrainingDataset,
    ss: &StateSpace,
    cb: &Codebook,
    hyper: &Hyper,
    eps_floor: f64,
    seed: u64,
) -> Result<Training> {
    ds.check_codebook(cb)?;
    train_unchecked(ds, ss, hyper, eps_floor, seed)
}

/// [`train`] without the codebook compatibility check.
pub fn train_unchecked(
    ds: &TrainingDataset,
    ss: &StateSpace,
    hyper: &Hyper,
    eps_floor: f64,
    seed: u64,
) -> Result<Training> {
    hyper.validate()?;
    if ss.nc() != ds.nc() {
        return Err(Error::Incompatible(format!(
            "state space has {} classes, dataset {}",
            ss.nc(),
            ds.nc()
        )));
    }
    let meta = QMeta {
        alpha: hyper.alpha,
        epsilon: hyper.epsilon,
        tau: ss.tau,
        max_epoch: hyper.max_epoch,
        max_l: hyper.max_l,
        dataset_hash: ds.hash(),
        state_fingerprint: ss.fingerprint(),
    };
    let mut q = QTable::zeros(ss, ds.np(), meta);
    let mut rng: SimRng = rng::from_seed(seed);
    let mut curve = TrainingCurve::default();
    let per_epoch = hyper.max_channel.unwrap_or(ds.len()).min(ds.len()).max(1);
    let mut order: Vec<usize> = (0..ds.len()).collect();

    for _ in 0..hyper.max_epoch {
        order.shuffle(&mut rng);
        let mut total_len = 0usize;
        let mut reached = 0usize;
        for &k in &order[..per_epoch] {
            // Both closures need the table; route through a cell.
            let q_cell = std::cell::RefCell::new(&mut q);
            let out = replay_episode(
                ds,
                ss,
                k,
                eps_floor,
                hyper.max_l,
                |s| epsilon_greedy(&q_cell.borrow(), s, hyper.epsilon, &mut rng),
                |s, a, r, s2| q_update(&mut q_cell.borrow_mut(), s, a, r, s2, hyper.alpha),
            )?;
            total_len += out.pilots;
            reached += out.reached_terminal as usize;
        }
        curve.mean_length.push(total_len as f64 / per_epoch as f64);
        curve
            .terminal_fraction
            .push(reached as f64 / per_epoch as f64);
    }

    let policy = extract_policy(&q);
    Ok(Training {
        qtable: q,
        policy,
        curve,
    })
}

/// Mean episode length of a fixed policy replayed over every dataset row.
pub fn evaluate_replay(
    ds: &TrainingDataset,
    ss: &StateSpace,
    policy: &Policy,
    eps_floor: f64,
    max_l: usize,
) -> Result<f64> {
    let mut total = 0usize;
    for k in 0..ds.len() {
        let out = replay_episode(
            ds,
            ss,
            k,
            eps_floor,
            max_l,
            |s| policy.action(s).unwrap_or(0),
            |_, _, _, _| {},
        )?;
        total += out.pilots;
    }
    Ok(total as f64 / ds.len() as f64)
}

pub fn save_qtable(q: &QTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, q.to_text()).map_err(|e| Error::io(path, e))
}

/// Load a Q-table for use with `ss`; fails on a fingerprint mismatch.
pub fn load_qtable(path: impl AsRef<Path>, ss: &StateSpace) -> Result<QTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    QTable::from_text(&text, ss)
}
