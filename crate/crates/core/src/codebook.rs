//! Hierarchical probing codebook and narrow target codebook.
//!
//! Layer `k` of an `L`-layer binary hierarchy splits the sine domain
//! [−1, 1) into `2^k` equal sectors. A beam of layer `k` activates the first
//! `N · 2^(k−L)` elements with a linear phase ramp towards its sector center;
//! going up one layer halves the active aperture and doubles the beamwidth.
//! The bottom layer (all elements active) doubles as the target codebook.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use crate::chansim::{Codeword, Deactivation, SystemConfig};
use crate::error::{Error, Result};
use crate::rng::{mix64, unit_f64};
use crate::textfmt::{self, header_field};

const MAGIC: &str = "RISCB";
const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    /// Target codewords `C_Φ`, stored with layer 0.
    pub narrow: Vec<Codeword>,
    /// Probing codewords `C_Ψ`, layer 1 first, ascending beam index.
    pub probing: Vec<Codeword>,
    pub deact_seed: u64,
    pub layers: usize,
    pub n: usize,
}

/// Sine-domain center of beam `m` (1-based) in layer `layer_k`.
pub fn beam_center(layer_k: usize, m: usize) -> Result<f64> {
    let beams = beams_in_layer(layer_k)?;
    if m == 0 || m > beams {
        return Err(Error::OutOfRange {
            index: m,
            size: beams,
        });
    }
    Ok(-1.0 + (2 * m - 1) as f64 / beams as f64)
}

fn beams_in_layer(layer_k: usize) -> Result<usize> {
    if layer_k == 0 || layer_k > 30 {
        return Err(Error::param(format!("layer {layer_k} outside 1..=30")));
    }
    Ok(1 << layer_k)
}

/// Phase of a deactivated element; a pure function of its key.
fn scatter_phase(deact_seed: u64, layer_k: usize, m: usize, element: usize) -> f64 {
    let key = ((layer_k as u64) << 48) ^ ((m as u64) << 24) ^ element as u64;
    unit_f64(mix64(deact_seed ^ mix64(key))) * TAU
}

/// Beam `m` of layer `layer_k` in an `layers`-deep hierarchy over `n` elements.
pub fn make_codeword(
    n: usize,
    layers: usize,
    layer_k: usize,
    m: usize,
    deact_seed: u64,
    deactivation: Deactivation,
) -> Result<Codeword> {
    if layer_k == 0 || layer_k > layers {
        return Err(Error::param(format!(
            "layer {layer_k} outside 1..={layers}"
        )));
    }
    let omega = beam_center(layer_k, m)?;
    let shrink = 1usize << (layers - layer_k);
    if !n.is_multiple_of(shrink) {
        return Err(Error::param(format!(
            "N = {n} not divisible by 2^{} for layer {layer_k}",
            layers - layer_k
        )));
    }
    let active_count = n / shrink;
    let phases = (0..n)
        .map(|k| {
            if k < active_count {
                (-PI * k as f64 * omega).rem_euclid(TAU)
            } else {
                match deactivation {
                    Deactivation::RandomPhase => scatter_phase(deact_seed, layer_k, m, k),
                    Deactivation::Idealized => 0.0,
                }
            }
        })
        .collect();
    Ok(Codeword {
        phases,
        layer: layer_k,
        index_in_layer: m,
        center_omega: omega,
        active_count,
        deactivation,
    })
}

/// The two beams one layer down whose sectors split `(layer_k, m)`.
pub fn children(layer_k: usize, m: usize, layers: usize) -> Result<[(usize, usize); 2]> {
    if layer_k >= layers {
        return Err(Error::param(format!(
            "layer {layer_k} is a leaf of a {layers}-layer codebook"
        )));
    }
    beam_center(layer_k, m)?;
    Ok([(layer_k + 1, 2 * m - 1), (layer_k + 1, 2 * m)])
}

/// Position of `(layer_k, m)` in the breadth-first probing list.
pub fn probing_index(layer_k: usize, m: usize) -> usize {
    (1 << layer_k) - 2 + (m - 1)
}

pub fn build_codebook(cfg: &SystemConfig, layers: usize, deact_seed: u64) -> Result<Codebook> {
    build_codebook_with(cfg, layers, deact_seed, Deactivation::RandomPhase)
}

pub fn build_codebook_with(
    cfg: &SystemConfig,
    layers: usize,
    deact_seed: u64,
    deactivation: Deactivation,
) -> Result<Codebook> {
    if layers == 0 {
        return Err(Error::param("codebook needs at least one layer"));
    }
    if layers > 20 {
        return Err(Error::param(format!("{layers} layers is too deep")));
    }
    let probing = (1..=layers)
        .flat_map(|k| (1..=1usize << k).map(move |m| (k, m)))
        .map(|(k, m)| make_codeword(cfg.n, layers, k, m, deact_seed, deactivation))
        .collect::<Result<Vec<_>>>()?;
    let narrow = probing[probing_index(layers, 1)..]
        .iter()
        .map(|cw| Codeword {
            layer: 0,
            ..cw.clone()
        })
        .collect();
    Ok(Codebook {
        narrow,
        probing,
        deact_seed,
        layers,
        n: cfg.n,
    })
}

impl Codebook {
    /// Number of target classes `Nc`.
    pub fn nc(&self) -> usize {
        self.narrow.len()
    }

    /// Number of probing actions `Np`.
    pub fn np(&self) -> usize {
        self.probing.len()
    }

    pub fn is_idealized(&self) -> bool {
        self.probing
            .iter()
            .any(|cw| cw.deactivation == Deactivation::Idealized)
    }

    /// Codeword of probing beam `(layer_k, m)`.
    pub fn probe(&self, layer_k: usize, m: usize) -> &Codeword {
        &self.probing[probing_index(layer_k, m)]
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{MAGIC} {VERSION} N={} L={} seed={}\n",
            self.n, self.layers, self.deact_seed
        );
        for cw in self.narrow.iter().chain(&self.probing) {
            write!(
                out,
                "{} {} {} {}",
                cw.layer,
                cw.index_in_layer,
                textfmt::real(cw.center_omega),
                cw.active_count
            )
            .unwrap();
            for p in &cw.phases {
                out.push(' ');
                out.push_str(&textfmt::real(*p));
            }
            out.push('\n');
        }
        out
    }

    /// Content hash; datasets and Q-tables record it to detect mismatches.
    pub fn hash(&self) -> String {
        let mut text = self.to_text();
        if self.is_idealized() {
            text.push_str("idealized\n");
        }
        textfmt::content_hash(&text)
    }

    pub fn from_text(text: &str) -> Result<Codebook> {
        const WHAT: &str = "codebook";
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(WHAT, 1, "empty file"))?;
        let mut tok = header.split_whitespace();
        if tok.next() != Some(MAGIC) {
            return Err(Error::parse(WHAT, 1, format!("expected `{MAGIC}` header")));
        }
        match tok.next() {
            Some(VERSION) => {}
            found => {
                return Err(Error::UnsupportedVersion {
                    what: WHAT,
                    found: found.unwrap_or("").to_string(),
                    expected: VERSION,
                })
            }
        }
        let field = |tok: Option<&str>, key| -> Result<u64> {
            header_field(tok, key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(WHAT, 1, format!("missing or invalid `{key}=`")))
        };
        let n = field(tok.next(), "N")? as usize;
        let layers = field(tok.next(), "L")? as usize;
        let deact_seed = field(tok.next(), "seed")?;
        if n == 0 || layers == 0 || layers > 20 {
            return Err(Error::parse(WHAT, 1, "N and L must be positive (L ≤ 20)"));
        }

        let nc = 1usize << layers;
        let np = (1usize << (layers + 1)) - 2;
        let mut words = Vec::with_capacity(nc + np);
        for (line_no, line) in lines.by_ref().take(nc + np) {
            words.push(parse_codeword(line, line_no, n)?);
        }
        if words.len() != nc + np {
            return Err(Error::parse(
                WHAT,
                words.len() + 2,
                format!(
                    "truncated: expected {} codewords, found {}",
                    nc + np,
                    words.len()
                ),
            ));
        }
        if let Some((line_no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(
                WHAT,
                line_no,
                format!("trailing content `{extra}`"),
            ));
        }
        let probing = words.split_off(nc);
        let narrow = words;
        for (i, cw) in narrow.iter().enumerate() {
            if cw.layer != 0 || cw.index_in_layer != i + 1 {
                return Err(Error::parse(WHAT, i + 2, "narrow codewords out of order"));
            }
        }
        let expected = (1..=layers).flat_map(|k| (1..=1usize << k).map(move |m| (k, m)));
        for (i, (cw, (k, m))) in probing.iter().zip(expected).enumerate() {
            if (cw.layer, cw.index_in_layer) != (k, m) {
                return Err(Error::parse(
                    WHAT,
                    nc + i + 2,
                    "probing codewords out of order",
                ));
            }
        }
        Ok(Codebook {
            narrow,
            probing,
            deact_seed,
            layers,
            n,
        })
    }
}

fn parse_codeword(line: &str, line_no: usize, n: usize) -> Result<Codeword> {
    const WHAT: &str = "codebook";
    let tok: Vec<&str> = line.split_whitespace().collect();
    if tok.len() != n + 4 {
        return Err(Error::parse(
            WHAT,
            line_no,
            format!("expected {} fields, found {}", n + 4, tok.len()),
        ));
    }
    let int = |i: usize| -> Result<usize> {
        tok[i].parse().map_err(|_| {
            Error::parse(
                WHAT,
                line_no,
                format!("field {} `{}` is not an integer", i + 1, tok[i]),
            )
        })
    };
    let real = |i: usize| -> Result<f64> {
        tok[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                Error::parse(
                    WHAT,
                    line_no,
                    format!("field {} `{}` is not a real", i + 1, tok[i]),
                )
            })
    };
    let layer = int(0)?;
    let index_in_layer = int(1)?;
    let center_omega = real(2)?;
    let active_count = int(3)?;
    if active_count > n {
        return Err(Error::parse(WHAT, line_no, "active_count exceeds N"));
    }
    let phases = (4..n + 4).map(real).collect::<Result<Vec<_>>>()?;
    if let Some(p) = phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
        return Err(Error::parse(
            WHAT,
            line_no,
            format!("phase {p} outside [0, 2π)"),
        ));
    }
    Ok(Codeword {
        phases,
        layer,
        index_in_layer,
        center_omega,
        active_count,
        deactivation: Deactivation::RandomPhase,
    })
}

pub fn save_codebook(cb: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    if cb.is_idealized() {
        return Err(Error::param(
            "idealized codebooks are test-only and cannot be saved",
        ));
    }
    let path = path.as_ref();
    std::fs::write(path, cb.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Codebook::from_text(&text)
}
