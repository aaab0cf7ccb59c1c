//! Online beam training episodes.
//!
//! [`run_episode`] probes a live (simulated) channel, refining the belief
//! after every pilot and stopping as soon as it is confident or the budget is
//! spent. The exhaustive and hierarchical sweeps are the classical
//! baselines; they use measured energies directly and keep no belief.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::belief::{argmax, posterior_update, Belief, TrainingDataset};
use crate::chansim::{
    channel_gain, channel_strength, energy_from_gain, ChannelRealization, Feedback, SystemConfig,
};
use crate::codebook::{children, probing_index, Codebook};
use crate::error::{Error, Result};
use crate::qlearner::Policy;
use crate::ssp::{project, StateSpace};

/// Rule choosing the next probing codeword.
#[derive(Debug, Clone, Copy)]
pub enum Strategy<'a> {
    /// Uniform without replacement over the probing codebook.
    Random,
    /// Greedy action of a learned policy at the projected state.
    QLearning(&'a Policy),
    /// Every narrow codeword once, in index order.
    Exhaustive,
    /// Binary descent through the probing hierarchy.
    Hierarchical,
}

impl Strategy<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::QLearning(_) => "qlearning",
            Strategy::Exhaustive => "exhaustive",
            Strategy::Hierarchical => "hierarchical",
        }
    }
}

/// Everything an episode needs besides the channel.
#[derive(Debug, Clone, Copy)]
pub struct Session<'a> {
    pub cfg: &'a SystemConfig,
    pub cb: &'a Codebook,
    pub ds: &'a TrainingDataset,
    pub ss: &'a StateSpace,
    pub eps_floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// 0-based narrow codeword declared at the end.
    pub declared: usize,
    pub pilots_used: usize,
    /// Declared strength over the best narrow strength.
    pub rho: f64,
    pub history: Vec<Feedback>,
    /// Class that would have been declared after each pilot.
    pub declared_after: Vec<usize>,
    /// Belief at the end; `None` for the sweep baselines.
    pub final_belief: Option<Belief>,
}

impl EpisodeResult {
    /// Declaration had the episode been cut after `k ≥ 1` pilots.
    pub fn declared_at(&self, k: usize) -> usize {
        match k {
            0 => self
                .declared_after
                .first()
                .copied()
                .unwrap_or(self.declared),
            k if k <= self.declared_after.len() => self.declared_after[k - 1],
            _ => self.declared,
        }
    }
}

/// Narrow-codeword strengths of a channel, computed once per episode.
#[derive(Debug, Clone)]
pub struct NarrowStrengths(Vec<f64>);

impl NarrowStrengths {
    pub fn new(cfg: &SystemConfig, ch: &ChannelRealization, cb: &Codebook) -> Result<Self> {
        cb.narrow
            .iter()
            .map(|cw| channel_strength(cfg, ch, cw))
            .collect::<Result<Vec<_>>>()
            .map(NarrowStrengths)
    }

    pub fn best(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn rho(&self, declared: usize) -> f64 {
        let best = self.best();
        if best > 0.0 {
            self.0[declared] / best
        } else {
            1.0
        }
    }
}

struct Prober<'a, R: ?Sized> {
    cfg: &'a SystemConfig,
    ch: &'a ChannelRealization,
    cb: &'a Codebook,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Prober<'_, R> {
    fn probe(&mut self, action: usize) -> Result<Feedback> {
        let cw = self.cb.probing.get(action).ok_or(Error::OutOfRange {
            index: action,
            size: self.cb.np(),
        })?;
        let gain = channel_gain(self.cfg, self.ch, cw)?;
        Ok(Feedback {
            value: energy_from_gain(self.cfg, self.ch, gain, self.rng),
            action_index: action,
        })
    }
}

/// One adaptive episode of at most `budget` pilots.
pub fn run_episode<R: Rng + ?Sized>(
    session: &Session,
    ch: &ChannelRealization,
    strategy: Strategy,
    budget: usize,
    rng: &mut R,
) -> Result<EpisodeResult> {
    if budget == 0 {
        return Err(Error::param("pilot budget must be at least 1"));
    }
    let Session {
        cfg,
        cb,
        ds,
        ss,
        eps_floor,
    } = *session;
    match strategy {
        Strategy::Exhaustive => return exhaustive_with_budget(cfg, ch, cb, budget, rng),
        Strategy::Hierarchical => return hierarchical_with_budget(cfg, ch, cb, budget, rng),
        Strategy::QLearning(policy) if policy.actions.len() != ss.len() => {
            return Err(Error::Incompatible(format!(
                "policy covers {} states, state space has {}",
                policy.actions.len(),
                ss.len()
            )))
        }
        _ => {}
    }
    if ds.np() != cb.np() || ds.nc() != cb.nc() || ss.nc() != cb.nc() {
        return Err(Error::Incompatible(
            "session artifacts disagree on Np/Nc".into(),
        ));
    }

    let strengths = NarrowStrengths::new(cfg, ch, cb)?;
    let mut belief = Belief::uniform(cb.nc())?;
    let mut history = Vec::new();
    let mut declared_after = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    let mut prober = Prober { cfg, ch, cb, rng };

    for _ in 0..budget {
        let action = match strategy {
            Strategy::QLearning(policy) => {
                let s = project(&belief, ss);
                match policy.action(s) {
                    Some(a) => a,
                    None => break,
                }
            }
            _ => {
                if order.is_empty() {
                    order = (0..cb.np()).collect();
                    order.shuffle(prober.rng);
                    order.reverse();
                }
                order.pop().unwrap()
            }
        };
        let fb = prober.probe(action)?;
        belief = posterior_update(&belief, action, fb.value, ds, eps_floor)?;
        history.push(fb);
        declared_after.push(belief.declare());
        if belief.is_confident(ss.tau) {
            break;
        }
    }

    let declared = belief.declare();
    Ok(EpisodeResult {
        declared,
        pilots_used: history.len(),
        rho: strengths.rho(declared),
        history,
        declared_after,
        final_belief: Some(belief),
    })
}

/// Probe every narrow codeword once and keep the strongest measurement.
pub fn exhaustive_search<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    cb: &Codebook,
    rng: &mut R,
) -> Result<EpisodeResult> {
    exhaustive_with_budget(cfg, ch, cb, cb.nc(), rng)
}

fn exhaustive_with_budget<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    cb: &Codebook,
    budget: usize,
    rng: &mut R,
) -> Result<EpisodeResult> {
    let strengths = NarrowStrengths::new(cfg, ch, cb)?;
    let bottom = probing_index(cb.layers, 1);
    let mut prober = Prober { cfg, ch, cb, rng };
    let mut measured = Vec::new();
    let mut history = Vec::new();
    let mut declared_after = Vec::new();
    for c in 0..budget.min(cb.nc()) {
        let fb = prober.probe(bottom + c)?;
        measured.push(fb.value);
        history.push(fb);
        declared_after.push(argmax(&measured));
    }
    let declared = argmax(&measured);
    Ok(EpisodeResult {
        declared,
        pilots_used: history.len(),
        rho: strengths.rho(declared),
        history,
        declared_after,
        final_belief: None,
    })
}

/// Narrow beam at the center of node `(layer, m)`'s sector (lower of the two
/// middle leaves), as a 0-based class.
fn central_leaf(layer: usize, m: usize, layers: usize) -> usize {
    let span = 1usize << (layers - layer);
    (m - 1) * span + (span / 2).max(1) - 1
}

/// Dichotomic descent: probe both candidates of each layer, keep the
/// stronger, and declare the surviving narrow beam.
pub fn hierarchical_search<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    cb: &Codebook,
    rng: &mut R,
) -> Result<EpisodeResult> {
    hierarchical_with_budget(cfg, ch, cb, 2 * cb.layers, rng)
}

fn hierarchical_with_budget<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    cb: &Codebook,
    budget: usize,
    rng: &mut R,
) -> Result<EpisodeResult> {
    let strengths = NarrowStrengths::new(cfg, ch, cb)?;
    let layers = cb.layers;
    let mut prober = Prober { cfg, ch, cb, rng };
    let mut history = Vec::new();
    let mut declared_after = Vec::new();
    // Virtual root: the whole sine domain.
    let mut current: Option<(usize, usize)> = None;
    let mut declared = central_leaf(0, 1, layers);

    for _ in 0..layers {
        let pair = match current {
            None => [(1, 1), (1, 2)],
            Some((k, m)) => children(k, m, layers)?,
        };
        let mut energies = [0.0; 2];
        for (i, &(k, m)) in pair.iter().enumerate() {
            if history.len() == budget {
                break;
            }
            let fb = prober.probe(probing_index(k, m))?;
            energies[i] = fb.value;
            history.push(fb);
            if i == 1 {
                let pick = if energies[1] > energies[0] {
                    pair[1]
                } else {
                    pair[0]
                };
                current = Some(pick);
                declared = central_leaf(pick.0, pick.1, layers);
            }
            declared_after.push(declared);
        }
        if history.len() == budget {
            break;
        }
    }
    Ok(EpisodeResult {
        declared,
        pilots_used: history.len(),
        rho: strengths.rho(declared),
        history,
        declared_after,
        final_belief: None,
    })
}

/// `‖h(Φ_dec)‖² / max_c ‖h(Φ_c)‖²` over the narrow codebook.
pub fn relative_strength(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    declared: usize,
    cb: &Codebook,
) -> Result<f64> {
    if declared >= cb.nc() {
        return Err(Error::OutOfRange {
            index: declared,
            size: cb.nc(),
        });
    }
    Ok(NarrowStrengths::new(cfg, ch, cb)?.rho(declared))
}

/// `log2(1 + P·strength/σ²)` in bit/s/Hz; `+∞` without noise.
pub fn achievable_rate(cfg: &SystemConfig, strength: f64) -> f64 {
    if cfg.sigma_w2 == 0.0 {
        return if strength > 0.0 { f64::INFINITY } else { 0.0 };
    }
    (1.0 + cfg.power * strength / cfg.sigma_w2).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::generate_dataset;
    use crate::chansim::{sample_channel, true_class};
    use crate::codebook::{build_codebook, build_codebook_with};
    use crate::exec::Execution;
    use crate::rng;
    use crate::ssp::{build_state_space, default_q_grid};

    struct Fixture {
        cfg: SystemConfig,
        cb: Codebook,
        ds: TrainingDataset,
        ss: StateSpace,
    }

    impl Fixture {
        fn new(snr_db: f64) -> Self {
            let cfg = SystemConfig::from_snr_db(4, 16, snr_db, 0).unwrap();
            let cb = build_codebook(&cfg, 3, 9).unwrap();
            let ds = generate_dataset(&cfg, &cb, 80, 1, Execution::Sequential).unwrap();
            let ss = build_state_space(8, &default_q_grid(), 0.9).unwrap();
            Fixture { cfg, cb, ds, ss }
        }

        fn session(&self) -> Session<'_> {
            Session {
                cfg: &self.cfg,
                cb: &self.cb,
                ds: &self.ds,
                ss: &self.ss,
                eps_floor: self.ds.default_eps_floor(),
            }
        }
    }

    #[test]
    fn noiseless_exhaustive_is_exact() {
        let cfg = SystemConfig::new(4, 32, 1.0, 0.0, 0).unwrap();
        let cb = build_codebook(&cfg, 3, 0).unwrap();
        let mut r = rng::from_seed(5);
        for _ in 0..200 {
            let ch = sample_channel(&mut r);
            let res = exhaustive_search(&cfg, &ch, &cb, &mut r).unwrap();
            assert_eq!(res.pilots_used, 8);
            assert_eq!(res.rho, 1.0);
            assert_eq!(res.declared, true_class(&cfg, &ch, &cb.narrow).unwrap());
        }
    }

    #[test]
    fn hierarchical_uses_two_pilots_per_layer() {
        let fx = Fixture::new(20.0);
        let mut r = rng::from_seed(0);
        let ch = sample_channel(&mut r);
        let res = hierarchical_search(&fx.cfg, &ch, &fx.cb, &mut r).unwrap();
        assert_eq!(res.pilots_used, 6);
        let layers: Vec<_> = res
            .history
            .iter()
            .map(|f| fx.cb.probing[f.action_index].layer)
            .collect();
        assert_eq!(layers, [1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn hierarchical_finds_beam_center_idealized() {
        let cfg = SystemConfig::new(4, 16, 1.0, 0.0, 0).unwrap();
        let cb = build_codebook_with(&cfg, 3, 0, crate::chansim::Deactivation::Idealized).unwrap();
        for c in 0..8 {
            let omega = cb.narrow[c].center_omega;
            // sin φ4 = ω, φ1 = 0.
            let phi4 = omega.asin().rem_euclid(std::f64::consts::TAU);
            let ch = ChannelRealization::new(0.0, 1.0, 0.0, phi4).unwrap();
            let res = hierarchical_search(&cfg, &ch, &cb, &mut rng::from_seed(0)).unwrap();
            assert_eq!(res.declared, c);
        }
    }

    #[test]
    fn central_leaves() {
        assert_eq!(central_leaf(0, 1, 3), 3);
        assert_eq!(central_leaf(1, 2, 3), 5);
        assert_eq!(central_leaf(2, 1, 3), 0);
        assert_eq!(central_leaf(3, 6, 3), 5);
    }

    #[test]
    fn budget_one_random() {
        let fx = Fixture::new(20.0);
        let mut r = rng::from_seed(1);
        let ch = sample_channel(&mut r);
        let res = run_episode(&fx.session(), &ch, Strategy::Random, 1, &mut r).unwrap();
        assert_eq!(res.pilots_used, 1);
        assert!(run_episode(&fx.session(), &ch, Strategy::Random, 0, &mut r).is_err());
    }

    #[test]
    fn random_without_replacement() {
        let fx = Fixture::new(20.0);
        let mut r = rng::from_seed(2);
        let ch = sample_channel(&mut r);
        let session = Session {
            ss: &build_state_space(8, &default_q_grid(), 0.999_999).unwrap(),
            ..fx.session()
        };
        let res = run_episode(&session, &ch, Strategy::Random, 28, &mut r).unwrap();
        if res.pilots_used >= 14 {
            let mut first: Vec<_> = res.history[..14].iter().map(|f| f.action_index).collect();
            first.sort();
            assert_eq!(first, (0..14).collect::<Vec<_>>());
        }
    }

    #[test]
    fn episodes_deterministic_and_prefix_consistent() {
        let fx = Fixture::new(10.0);
        let ch = sample_channel(&mut rng::from_seed(3));
        let full = run_episode(
            &fx.session(),
            &ch,
            Strategy::Random,
            14,
            &mut rng::from_seed(8),
        )
        .unwrap();
        let again = run_episode(
            &fx.session(),
            &ch,
            Strategy::Random,
            14,
            &mut rng::from_seed(8),
        )
        .unwrap();
        assert_eq!(full, again);
        for k in 1..=full.pilots_used {
            let cut = run_episode(
                &fx.session(),
                &ch,
                Strategy::Random,
                k,
                &mut rng::from_seed(8),
            )
            .unwrap();
            assert_eq!(cut.declared, full.declared_at(k));
            assert_eq!(cut.history[..], full.history[..k]);
        }
    }

    #[test]
    fn early_stop_on_confidence() {
        let fx = Fixture::new(20.0);
        let mut r = rng::from_seed(4);
        for _ in 0..30 {
            let ch = sample_channel(&mut r);
            let res = run_episode(&fx.session(), &ch, Strategy::Random, 14, &mut r).unwrap();
            let b = res.final_belief.unwrap();
            if res.pilots_used < 14 {
                assert!(b.is_confident(fx.ss.tau));
            }
        }
    }

    #[test]
    fn policy_size_checked() {
        let fx = Fixture::new(20.0);
        let bad = Policy {
            actions: vec![Some(0); 3],
        };
        let ch = sample_channel(&mut rng::from_seed(0));
        let err = run_episode(
            &fx.session(),
            &ch,
            Strategy::QLearning(&bad),
            5,
            &mut rng::from_seed(0),
        );
        assert!(matches!(err, Err(Error::Incompatible(_))));
    }

    #[test]
    fn relative_strength_bounds() {
        let fx = Fixture::new(20.0);
        let mut r = rng::from_seed(6);
        for _ in 0..50 {
            let ch = sample_channel(&mut r);
            let best = true_class(&fx.cfg, &ch, &fx.cb.narrow).unwrap();
            assert_eq!(relative_strength(&fx.cfg, &ch, best, &fx.cb).unwrap(), 1.0);
            for c in 0..8 {
                let rho = relative_strength(&fx.cfg, &ch, c, &fx.cb).unwrap();
                assert!((0.0..=1.0).contains(&rho));
            }
        }
        assert!(relative_strength(&fx.cfg, &sample_channel(&mut r), 8, &fx.cb).is_err());
    }

    #[test]
    fn single_codeword_rho_is_one() {
        let cfg = SystemConfig::new(2, 4, 1.0, 0.0, 0).unwrap();
        let mut cb = build_codebook(&cfg, 1, 0).unwrap();
        cb.narrow.truncate(1);
        let ch = sample_channel(&mut rng::from_seed(1));
        assert_eq!(relative_strength(&cfg, &ch, 0, &cb).unwrap(), 1.0);
    }

    #[test]
    fn rates() {
        let cfg = SystemConfig::new(1, 1, 1.0, 1.0, 0).unwrap();
        assert_eq!(achievable_rate(&cfg, 0.0), 0.0);
        assert_eq!(achievable_rate(&cfg, 1.0), 1.0);
        assert_eq!(achievable_rate(&cfg, 3.0), 2.0);
        assert_eq!(achievable_rate(&cfg.noiseless(), 1.0), f64::INFINITY);
        let mut xs: Vec<f64> = (0..100)
            .map(|i| (i as f64 * 0.7).sin().abs() * 50.0 + i as f64)
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for w in xs.windows(2) {
            assert!(achievable_rate(&cfg, w[0]) < achievable_rate(&cfg, w[1]));
        }
    }
}
