use num_complex::Complex64;
use proptest::prelude::*;
use ris_qlearn::belief::{generate_dataset, posterior_update, Belief, TrainingDataset};
use ris_qlearn::chansim::{
    channel_gain, dirichlet_gain, ChannelRealization, Codeword, SystemConfig,
};
use ris_qlearn::codebook::{build_codebook, Codebook};
use ris_qlearn::exec::Execution;
use ris_qlearn::qlearner::{train, Hyper};
use ris_qlearn::ssp::{build_state_space, default_q_grid, project};
use ris_qlearn::textfmt;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

fn fixture() -> &'static (SystemConfig, Codebook, TrainingDataset) {
    static F: OnceLock<(SystemConfig, Codebook, TrainingDataset)> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = SystemConfig::from_snr_db(4, 16, 10.0, 0).unwrap();
        let cb = build_codebook(&cfg, 2, 3).unwrap();
        let ds = generate_dataset(&cfg, &cb, 30, 11, Execution::Sequential).unwrap();
        (cfg, cb, ds)
    })
}

fn belief(nc: usize) -> impl Strategy<Value = Belief> {
    prop::collection::vec(0.01f64..1.0, nc).prop_map(|w| {
        let s: f64 = w.iter().sum();
        Belief::new(w.iter().map(|x| x / s).collect()).unwrap()
    })
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..TAU
}

proptest! {
    #[test]
    fn posterior_stays_normalized(b in belief(4), a in 0usize..6, y in 0.0f64..5000.0) {
        let (_, _, ds) = fixture();
        let p = posterior_update(&b, a, y, ds, ds.default_eps_floor()).unwrap();
        let sum: f64 = p.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(p.probs().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn update_order_commutes(
        b in belief(4),
        a1 in 0usize..6, a2 in 0usize..6,
        y1 in 0.0f64..3000.0, y2 in 0.0f64..3000.0,
    ) {
        let (_, _, ds) = fixture();
        let eps = ds.default_eps_floor();
        let p = posterior_update(&posterior_update(&b, a1, y1, ds, eps).unwrap(), a2, y2, ds, eps).unwrap();
        let q = posterior_update(&posterior_update(&b, a2, y2, ds, eps).unwrap(), a1, y1, ds, eps).unwrap();
        for (x, y) in p.probs().iter().zip(q.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_matches_sum(n in 1usize..200, mu in -1.0f64..1.0, omega in -1.0f64..1.0) {
        let brute: Complex64 = (0..n)
            .map(|k| Complex64::from_polar(1.0, PI * k as f64 * (mu - omega)))
            .sum();
        prop_assert!((dirichlet_gain(n, mu, omega) - brute.norm()).abs() < 1e-9);
    }

    #[test]
    fn gain_never_exceeds_n(
        p1 in angle(), p2 in angle(), p3 in angle(), p4 in angle(),
        phases in prop::collection::vec(angle(), 16),
    ) {
        let (cfg, cb, _) = fixture();
        let ch = ChannelRealization::new(p1, p2, p3, p4).unwrap();
        let cw = Codeword::from_phases(phases);
        prop_assert!(channel_gain(cfg, &ch, &cw).unwrap().norm() <= 16.0 + 1e-9);
        for cw in cb.probing.iter().chain(&cb.narrow) {
            prop_assert!(channel_gain(cfg, &ch, cw).unwrap().norm() <= 16.0 + 1e-9);
        }
        let aligned = channel_gain(cfg, &ch, &Codeword::aligned(16, &ch)).unwrap().norm();
        prop_assert!((aligned - 16.0).abs() < 1e-9);
    }

    #[test]
    fn projection_terminal_iff_confident(b in belief(8), tau in 0.5f64..0.99) {
        let ss = build_state_space(8, &default_q_grid(), tau).unwrap();
        let s = project(&b, &ss);
        prop_assert_eq!(ss.is_terminal(s), b.is_confident(tau));
        if let Some(c) = ss.terminal_class(s) {
            prop_assert_eq!(c, b.declare());
        }
    }

    #[test]
    fn reals_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(textfmt::real(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trained_values_bounded(seed in any::<u64>(), tau in 0.6f64..0.99) {
        let (_, cb, ds) = fixture();
        let ss = build_state_space(4, &default_q_grid(), tau).unwrap();
        let hyper = Hyper { max_epoch: 10, ..Hyper::with_actions(6) };
        let t = train(ds, &ss, cb, &hyper, ds.default_eps_floor(), seed).unwrap();
        for s in 0..ss.len() {
            for &v in t.qtable.row(s) {
                prop_assert!((-(hyper.max_l as f64)..=0.0).contains(&v));
                if ss.is_terminal(s) {
                    prop_assert_eq!(v, 0.0);
                }
            }
            prop_assert_eq!(t.policy.action(s).is_none(), ss.is_terminal(s));
        }
        for &len in &t.curve.mean_length {
            prop_assert!((1.0..=hyper.max_l as f64).contains(&len));
        }
    }
}
