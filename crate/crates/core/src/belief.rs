//! Posterior over the narrow-beam classes.
//!
//! The likelihood of an observation `y` under action `a` for class `k` is a
//! heavy-tailed kernel sum over the dataset members labelled `k`:
//! `Σ_l 1 / ((X[l][a] − y)² + ε)`. Beliefs are updated multiplicatively and
//! renormalized after every pilot.

use std::path::Path;

use crate::chansim::{channel_gain, energy_from_gain};
use crate::chansim::{sample_channel, true_class, ChannelRealization, SystemConfig};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::rng;
use crate::textfmt::{self, header_field};

const SUM_TOL: f64 = 1e-9;

/// Probability vector over the `Nc` target codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("belief over zero classes"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::param(
                "belief entries must be finite and non-negative",
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::param(format!("belief sums to {sum}")));
        }
        Ok(Belief { probs })
    }

    /// The uninformed starting belief.
    pub fn uniform(nc: usize) -> Result<Self> {
        if nc == 0 {
            return Err(Error::param("belief over zero classes"));
        }
        Ok(Belief {
            probs: vec![1.0 / nc as f64; nc],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Bayes decision: most probable class, lowest index on ties.
    pub fn declare(&self) -> usize {
        argmax(&self.probs)
    }

    pub fn max_prob(&self) -> f64 {
        self.probs[self.declare()]
    }

    /// `max p > tau`, strictly.
    pub fn is_confident(&self, tau: f64) -> bool {
        self.max_prob() > tau
    }

    /// Multiply by per-class likelihoods and renormalize.
    ///
    /// If every product underflows the belief is returned unchanged.
    pub fn reweighted(&self, likelihood: &[f64]) -> Belief {
        debug_assert_eq!(likelihood.len(), self.probs.len());
        let unnorm: Vec<f64> = self
            .probs
            .iter()
            .zip(likelihood)
            .map(|(p, w)| p * w)
            .collect();
        let total: f64 = unnorm.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return self.clone();
        }
        Belief {
            probs: unnorm.into_iter().map(|p| p / total).collect(),
        }
    }
}

/// Index of the largest entry; first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Provenance of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    /// SNR the feedbacks were generated at; `+∞` if noiseless.
    pub snr_db: f64,
    pub seed: u64,
    /// Hash of the codebook whose probing beams produced the feedbacks.
    pub codebook_hash: String,
}

/// Per-channel feedback table `X` with the true class of each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    channels: Vec<ChannelRealization>,
    /// Row-major `n × Np`.
    feedbacks: Vec<f64>,
    labels: Vec<usize>,
    np: usize,
    nc: usize,
    pub meta: DatasetMeta,
}

impl TrainingDataset {
    /// Assemble a dataset from rows of feedbacks and 0-based class labels.
    pub fn from_parts(
        channels: Vec<ChannelRealization>,
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        nc: usize,
        meta: DatasetMeta,
    ) -> Result<Self> {
        let n = rows.len();
        if channels.len() != n || labels.len() != n {
            return Err(Error::param("channels, rows and labels differ in length"));
        }
        let np = rows.first().map_or(0, Vec::len);
        if np == 0 {
            return Err(Error::param(
                "dataset needs at least one row and one action",
            ));
        }
        if n < nc {
            return Err(Error::param(format!(
                "{n} channels cannot cover {nc} classes"
            )));
        }
        let mut counts = vec![0usize; nc];
        for &c in &labels {
            *counts
                .get_mut(c)
                .ok_or(Error::OutOfRange { index: c, size: nc })? += 1;
        }
        if let Some(c) = counts.iter().position(|&k| k == 0) {
            return Err(Error::param(format!("class {} has no member", c + 1)));
        }
        let mut feedbacks = Vec::with_capacity(n * np);
        for row in rows {
            if row.len() != np {
                return Err(Error::DimensionMismatch {
                    expected: np,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::param("feedbacks must be finite and non-negative"));
            }
            feedbacks.extend(row);
        }
        Ok(TrainingDataset {
            channels,
            feedbacks,
            labels,
            np,
            nc,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn nc(&self) -> usize {
        self.nc
    }

    pub fn channel(&self, l: usize) -> &ChannelRealization {
        &self.channels[l]
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.feedbacks[l * self.np..(l + 1) * self.np]
    }

    pub fn feedback(&self, l: usize, action: usize) -> f64 {
        self.feedbacks[l * self.np + action]
    }

    /// 0-based class of row `l`.
    pub fn label(&self, l: usize) -> usize {
        self.labels[l]
    }

    pub fn label_one_hot(&self, l: usize) -> Vec<u8> {
        let mut v = vec![0; self.nc];
        v[self.labels[l]] = 1;
        v
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.nc];
        for &c in &self.labels {
            counts[c] += 1;
        }
        counts
    }

    /// `1e−9` times the variance of all stored feedbacks.
    pub fn default_eps_floor(&self) -> f64 {
        let n = self.feedbacks.len() as f64;
        let mean = self.feedbacks.iter().sum::<f64>() / n;
        let var = self
            .feedbacks
            .iter()
            .map(|x| (x - mean).powi(2))
            .sum::<f64>()
            / n;
        if var > 0.0 {
            1e-9 * var
        } else {
            1e-9
        }
    }

    /// Kernel likelihood of `y` under `action` for every class, optionally
    /// leaving one row out.
    pub fn class_likelihoods(
        &self,
        action: usize,
        y: f64,
        eps_floor: f64,
        exclude: Option<usize>,
    ) -> Vec<f64> {
        let mut weights = vec![0.0; self.nc];
        let mut seen = vec![false; self.nc];
        for (l, &class) in self.labels.iter().enumerate() {
            if exclude == Some(l) {
                continue;
            }
            let d = self.feedbacks[l * self.np + action] - y;
            weights[class] += 1.0 / (d * d + eps_floor);
            seen[class] = true;
        }
        for (w, s) in weights.iter_mut().zip(seen) {
            if !s {
                *w = eps_floor;
            }
        }
        weights
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "RISDS v1 n={} Np={} Nc={} snr_db={} seed={} cbhash={}\n",
            self.len(),
            self.np,
            self.nc,
            textfmt::real(self.meta.snr_db),
            self.meta.seed,
            self.meta.codebook_hash
        );
        for l in 0..self.len() {
            let fields = self.channels[l]
                .angles()
                .into_iter()
                .chain(self.row(l).iter().copied())
                .map(textfmt::real)
                .collect::<Vec<_>>();
            out.push_str(&fields.join(" "));
            out.push(' ');
            out.push_str(&(self.labels[l] + 1).to_string());
            out.push('\n');
        }
        out
    }

    pub fn hash(&self) -> String {
        textfmt::content_hash(&self.to_text())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        const WHAT: &str = "dataset";
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(WHAT, 1, "empty file"))?;
        let mut tok = header.split_whitespace();
        if tok.next() != Some("RISDS") {
            return Err(Error::parse(WHAT, 1, "expected `RISDS` header"));
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
        let n: usize = field(tok.next(), "n")?;
        let np: usize = field(tok.next(), "Np")?;
        let nc: usize = field(tok.next(), "Nc")?;
        let snr_db: f64 = field(tok.next(), "snr_db")?;
        let seed: u64 = field(tok.next(), "seed")?;
        let codebook_hash: String = field(tok.next(), "cbhash")?;

        let mut channels = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for (line_no, line) in lines.by_ref().take(n) {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != np + 5 {
                return Err(Error::parse(
                    WHAT,
                    line_no,
                    format!("expected {} fields, found {}", np + 5, tok.len()),
                ));
            }
            let reals = tok[..np + 4]
                .iter()
                .map(|t| t.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(WHAT, line_no, e.to_string()))?;
            let ch = ChannelRealization::new(reals[0], reals[1], reals[2], reals[3])
                .map_err(|e| Error::parse(WHAT, line_no, e.to_string()))?;
            let label: usize = tok[np + 4]
                .parse()
                .map_err(|_| Error::parse(WHAT, line_no, "class label is not an integer"))?;
            if label == 0 || label > nc {
                return Err(Error::parse(
                    WHAT,
                    line_no,
                    format!("class label {label} outside 1..={nc}"),
                ));
            }
            channels.push(ch);
            rows.push(reals[4..].to_vec());
            labels.push(label - 1);
        }
        if labels.len() != n {
            return Err(Error::parse(
                WHAT,
                labels.len() + 2,
                format!("truncated: expected {n} rows, found {}", labels.len()),
            ));
        }
        if let Some((line_no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(WHAT, line_no, "trailing content"));
        }
        Self::from_parts(
            channels,
            rows,
            labels,
            nc,
            DatasetMeta {
                snr_db,
                seed,
                codebook_hash,
            },
        )
        .map_err(|e| Error::parse(WHAT, 1, e.to_string()))
    }

    /// Fails unless the dataset was generated with `cb`.
    pub fn check_codebook(&self, cb: &Codebook) -> Result<()> {
        let hash = cb.hash();
        if self.meta.codebook_hash != hash {
            return Err(Error::Incompatible(format!(
                "dataset was generated with codebook {}, got {hash}",
                self.meta.codebook_hash
            )));
        }
        if self.np != cb.np() || self.nc != cb.nc() {
            return Err(Error::Incompatible(format!(
                "dataset shape Np={} Nc={} does not match codebook Np={} Nc={}",
                self.np,
                self.nc,
                cb.np(),
                cb.nc()
            )));
        }
        Ok(())
    }
}

pub fn uniform_prior(nc: usize) -> Result<Belief> {
    Belief::uniform(nc)
}

/// One multiplicative update with the dataset kernel likelihood.
pub fn posterior_update(
    b: &Belief,
    action: usize,
    y: f64,
    ds: &TrainingDataset,
    eps_floor: f64,
) -> Result<Belief> {
    posterior_update_excluding(b, action, y, ds, eps_floor, None)
}

/// [`posterior_update`] with row `exclude` removed from the likelihood.
pub fn posterior_update_excluding(
    b: &Belief,
    action: usize,
    y: f64,
    ds: &TrainingDataset,
    eps_floor: f64,
    exclude: Option<usize>,
) -> Result<Belief> {
    if action >= ds.np {
        return Err(Error::OutOfRange {
            index: action,
            size: ds.np,
        });
    }
    if !y.is_finite() {
        return Err(Error::param(format!("non-finite feedback {y}")));
    }
    if !(eps_floor > 0.0 && eps_floor.is_finite()) {
        return Err(Error::param(format!(
            "eps_floor must be positive, got {eps_floor}"
        )));
    }
    if b.len() != ds.nc {
        return Err(Error::DimensionMismatch {
            expected: ds.nc,
            got: b.len(),
        });
    }
    Ok(b.reweighted(&ds.class_likelihoods(action, y, eps_floor, exclude)))
}

pub fn declare(b: &Belief) -> usize {
    b.declare()
}

pub fn is_confident(b: &Belief, tau: f64) -> bool {
    b.is_confident(tau)
}

/// Upper bound on extra channel draws while looking for uncovered classes.
pub const RESAMPLE_CAP: usize = 100_000;

/// Simulate one noisy feedback per probing codeword for `n_channels` random
/// channels. Channel `i` uses the stream `seed ^ i`.
pub fn generate_dataset(
    cfg: &SystemConfig,
    cb: &Codebook,
    n_channels: usize,
    seed: u64,
    exec: Execution,
) -> Result<TrainingDataset> {
    if cfg.n != cb.n {
        return Err(Error::Incompatible(format!(
            "config has N = {} but codebook N = {}",
            cfg.n, cb.n
        )));
    }
    let nc = cb.nc();
    if n_channels < nc {
        return Err(Error::param(format!(
            "{n_channels} channels cannot cover {nc} classes"
        )));
    }
    let draw = |i: usize| -> Result<(ChannelRealization, Vec<f64>, usize)> {
        let mut r = rng::stream(seed, i as u64);
        let ch = sample_channel(&mut r);
        let row = cb
            .probing
            .iter()
            .map(|cw| {
                Ok(energy_from_gain(
                    cfg,
                    &ch,
                    channel_gain(cfg, &ch, cw)?,
                    &mut r,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let label = true_class(cfg, &ch, &cb.narrow)?;
        Ok((ch, row, label))
    };
    let mut samples = map_indexed(n_channels, exec, draw)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut counts = vec![0usize; nc];
    for s in &samples {
        counts[s.2] += 1;
    }
    let mut next = n_channels;
    while counts.contains(&0) {
        if next - n_channels >= RESAMPLE_CAP {
            let missing: Vec<_> = (0..nc).filter(|&c| counts[c] == 0).map(|c| c + 1).collect();
            return Err(Error::Generation(format!(
                "no channel of class(es) {missing:?} after {RESAMPLE_CAP} extra draws"
            )));
        }
        let candidate = draw(next)?;
        next += 1;
        if counts[candidate.2] != 0 {
            continue;
        }
        // Replace the last member of the most populated class.
        let donor = (0..nc).rev().max_by_key(|&c| counts[c]).unwrap();
        let slot = samples.iter().rposition(|s| s.2 == donor).unwrap();
        counts[donor] -= 1;
        counts[candidate.2] += 1;
        samples[slot] = candidate;
    }

    let mut channels = Vec::with_capacity(n_channels);
    let mut rows = Vec::with_capacity(n_channels);
    let mut labels = Vec::with_capacity(n_channels);
    for (ch, row, label) in samples {
        channels.push(ch);
        rows.push(row);
        labels.push(label);
    }
    TrainingDataset::from_parts(
        channels,
        rows,
        labels,
        nc,
        DatasetMeta {
            snr_db: cfg.snr_db(),
            seed,
            codebook_hash: cb.hash(),
        },
    )
}

pub fn save_dataset(ds: &TrainingDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, ds.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<TrainingDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TrainingDataset::from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::build_codebook;
    use approx::assert_abs_diff_eq;

    fn meta() -> DatasetMeta {
        DatasetMeta {
            snr_db: f64::INFINITY,
            seed: 0,
            codebook_hash: "0".into(),
        }
    }

    fn ch() -> ChannelRealization {
        ChannelRealization::new(0.0, 0.0, 0.0, 0.0).unwrap()
    }

    /// One action, one channel per class with the given feedbacks.
    fn toy(values: &[f64]) -> TrainingDataset {
        TrainingDataset::from_parts(
            vec![ch(); values.len()],
            values.iter().map(|&v| vec![v]).collect(),
            (0..values.len()).collect(),
            values.len(),
            meta(),
        )
        .unwrap()
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(uniform_prior(8).unwrap().probs(), &[0.125; 8]);
        assert_eq!(uniform_prior(1).unwrap().probs(), &[1.0]);
        assert!(uniform_prior(0).is_err());
        for nc in 1..40 {
            let s: f64 = uniform_prior(nc).unwrap().probs().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_evaluated_update() {
        let ds = toy(&[1.0, 3.0]);
        let post = posterior_update(&uniform_prior(2).unwrap(), 0, 1.0, &ds, 1e-6).unwrap();
        // Weights 1e6 and 1/(4 + 1e-6).
        let w0 = 1e6;
        let w1 = 1.0 / (4.0 + 1e-6);
        assert_abs_diff_eq!(post.probs()[1], w1 / (w0 + w1), epsilon = 1e-18);
        assert_abs_diff_eq!(post.probs()[1], 2.5e-7, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_observation_keeps_uniform() {
        let ds = toy(&[1.0, 3.0]);
        let post = posterior_update(&uniform_prior(2).unwrap(), 0, 2.0, &ds, 1e-6).unwrap();
        assert_abs_diff_eq!(post.probs()[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn zero_prior_is_absorbing() {
        let ds = toy(&[1.0, 3.0, 5.0]);
        let prior = Belief::new(vec![0.5, 0.0, 0.5]).unwrap();
        let post = posterior_update(&prior, 0, 3.0, &ds, 1e-9).unwrap();
        assert_eq!(post.probs()[1], 0.0);
    }

    #[test]
    fn update_errors() {
        let ds = toy(&[1.0, 3.0]);
        let b = uniform_prior(2).unwrap();
        assert!(matches!(
            posterior_update(&b, 1, 1.0, &ds, 1e-6),
            Err(Error::OutOfRange { .. })
        ));
        assert!(posterior_update(&b, 0, f64::NAN, &ds, 1e-6).is_err());
        assert!(posterior_update(&b, 0, 1.0, &ds, 0.0).is_err());
    }

    #[test]
    fn leave_one_out_drops_row() {
        let ds = TrainingDataset::from_parts(
            vec![ch(); 3],
            vec![vec![1.0], vec![1.0], vec![5.0]],
            vec![0, 0, 1],
            2,
            meta(),
        )
        .unwrap();
        let all = ds.class_likelihoods(0, 1.0, 1.0, None);
        let loo = ds.class_likelihoods(0, 1.0, 1.0, Some(0));
        assert_abs_diff_eq!(all[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(loo[0], 1.0, epsilon = 1e-15);
        assert_eq!(all[1], loo[1]);
    }

    #[test]
    fn declare_and_confidence() {
        let b = Belief::new(vec![0.1, 0.7, 0.2]).unwrap();
        assert_eq!(declare(&b), 1);
        assert_eq!(declare(&uniform_prior(5).unwrap()), 0);
        let mut one_hot = vec![0.0; 6];
        one_hot[4] = 1.0;
        assert_eq!(declare(&Belief::new(one_hot).unwrap()), 4);

        let mut p = vec![0.05 / 7.0; 8];
        p[0] = 0.95;
        assert!(is_confident(&Belief::new(p).unwrap(), 0.9));
        assert!(!is_confident(&uniform_prior(8).unwrap(), 0.5));
        let b = Belief::new(vec![0.75, 0.25]).unwrap();
        assert!(!is_confident(&b, 0.75));
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::new(vec![]).is_err());
        assert!(Belief::new(vec![0.5, 0.6]).is_err());
        assert!(Belief::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn dataset_invariants_enforced() {
        let m = meta();
        assert!(
            TrainingDataset::from_parts(vec![ch()], vec![vec![1.0]], vec![0], 2, m.clone())
                .is_err()
        );
        assert!(TrainingDataset::from_parts(
            vec![ch(); 2],
            vec![vec![1.0], vec![-1.0]],
            vec![0, 1],
            2,
            m.clone()
        )
        .is_err());
        assert!(TrainingDataset::from_parts(
            vec![ch(); 2],
            vec![vec![1.0], vec![1.0]],
            vec![0, 0],
            2,
            m
        )
        .is_err());
    }

    fn small_cfg(snr_db: f64) -> SystemConfig {
        SystemConfig::from_snr_db(4, 16, snr_db, 0).unwrap()
    }

    #[test]
    fn generation_is_deterministic_and_covering() {
        let cfg = small_cfg(10.0);
        let cb = build_codebook(&cfg, 3, 1).unwrap();
        let a = generate_dataset(&cfg, &cb, 40, 5, Execution::Sequential).unwrap();
        let b = generate_dataset(&cfg, &cb, 40, 5, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.len(), 40);
        assert_eq!(a.np(), 14);
        assert!(a.class_counts().iter().all(|&c| c >= 1));
        for l in 0..a.len() {
            assert_eq!(
                a.label(l),
                true_class(&cfg, a.channel(l), &cb.narrow).unwrap()
            );
            assert_eq!(a.label_one_hot(l).iter().filter(|&&v| v == 1).count(), 1);
        }
    }

    #[test]
    fn resampling_covers_rare_classes() {
        // With exactly Nc channels, coverage almost surely needs resampling.
        let cfg = small_cfg(10.0);
        let cb = build_codebook(&cfg, 3, 1).unwrap();
        let ds = generate_dataset(&cfg, &cb, 8, 11, Execution::Sequential).unwrap();
        assert_eq!(ds.class_counts(), vec![1; 8]);
    }

    #[test]
    fn noiseless_bottom_layer_peaks_at_label() {
        let cfg = small_cfg(20.0).noiseless();
        let cb = build_codebook(&cfg, 3, 1).unwrap();
        let ds = generate_dataset(&cfg, &cb, 60, 2, Execution::Sequential).unwrap();
        let bottom = crate::codebook::probing_index(3, 1);
        for l in 0..ds.len() {
            let row = &ds.row(l)[bottom..];
            assert_eq!(argmax(row), ds.label(l));
        }
    }

    #[test]
    fn text_round_trip() {
        let cfg = small_cfg(0.0);
        let cb = build_codebook(&cfg, 2, 1).unwrap();
        let ds = generate_dataset(&cfg, &cb, 12, 3, Execution::Sequential).unwrap();
        let back = TrainingDataset::from_text(&ds.to_text()).unwrap();
        assert_eq!(back, ds);
        back.check_codebook(&cb).unwrap();
        let other = build_codebook(&cfg, 2, 2).unwrap();
        assert!(matches!(
            back.check_codebook(&other),
            Err(Error::Incompatible(_))
        ));
    }

    #[test]
    fn truncated_dataset_rejected() {
        let cfg = small_cfg(0.0);
        let cb = build_codebook(&cfg, 2, 1).unwrap();
        let text = generate_dataset(&cfg, &cb, 12, 3, Execution::Sequential)
            .unwrap()
            .to_text();
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            TrainingDataset::from_text(&cut),
            Err(Error::Parse { .. })
        ));
        let v2 = text.replacen("v1", "v9", 1);
        assert!(matches!(
            TrainingDataset::from_text(&v2),
            Err(Error::UnsupportedVersion { .. })
        ));
    }
}
