#![allow(dead_code)]

use ris_qlearn::belief::{DatasetMeta, TrainingDataset};
use ris_qlearn::chansim::{ChannelRealization, SystemConfig};
use ris_qlearn::codebook::{build_codebook, Codebook};
use ris_qlearn::qlearner::{evaluate_replay, Policy};
use ris_qlearn::ssp::{build_state_space, default_q_grid, StateSpace};

/// Two classes, two probing actions. Action 0 returns the same energy for
/// every channel; action 1 separates the classes (≈1 vs ≈9). Three channels
/// per class so leave-one-out replay still sees both classes.
pub fn separable_toy() -> (Codebook, TrainingDataset, StateSpace) {
    let cfg = SystemConfig::new(1, 2, 1.0, 0.0, 0).unwrap();
    let cb = build_codebook(&cfg, 1, 0).unwrap();
    assert_eq!((cb.np(), cb.nc()), (2, 2));
    let rows = vec![
        vec![5.0, 1.0],
        vec![5.0, 1.1],
        vec![5.0, 1.2],
        vec![5.0, 9.0],
        vec![5.0, 9.1],
        vec![5.0, 9.2],
    ];
    let labels = vec![0, 0, 0, 1, 1, 1];
    let ch = ChannelRealization::new(0.0, 0.0, 0.0, 0.0).unwrap();
    let ds = TrainingDataset::from_parts(
        vec![ch; 6],
        rows,
        labels,
        2,
        DatasetMeta {
            snr_db: f64::INFINITY,
            seed: 0,
            codebook_hash: cb.hash(),
        },
    )
    .unwrap();
    let ss = build_state_space(2, &default_q_grid(), 0.9).unwrap();
    (cb, ds, ss)
}

/// Smallest mean replay length over every deterministic policy on the
/// non-terminal states.
pub fn brute_force_best(
    ds: &TrainingDataset,
    ss: &StateSpace,
    eps: f64,
    max_l: usize,
) -> (f64, Policy) {
    let free: Vec<usize> = (0..ss.len()).filter(|&s| !ss.is_terminal(s)).collect();
    let np = ds.np();
    let total = np.pow(free.len() as u32);
    let mut best: Option<(f64, Policy)> = None;
    for code in 0..total {
        let mut actions = vec![None; ss.len()];
        let mut c = code;
        for &s in &free {
            actions[s] = Some(c % np);
            c /= np;
        }
        let policy = Policy { actions };
        let len = evaluate_replay(ds, ss, &policy, eps, max_l).unwrap();
        if best.as_ref().is_none_or(|(b, _)| len < *b) {
            best = Some((len, policy));
        }
    }
    best.unwrap()
}
