//! Deterministic embedding engine and dilution geometry.
//!
//! `E(x)` is mean-pooled signed feature hashing: every token maps to a sparse
//! vector with exactly [`NONZEROS`] entries of ±1, and a text embeds to the
//! L2-normalised mean of its token vectors. Because pooling is a plain mean,
//! the embedding of an enriched chunk `I ⊕ c` is exactly
//!
//! ```text
//! normalize((1 - λ)·mean(c) + λ·mean(I)),   λ = L(I) / (L(I) + L(c))
//! ```
//!
//! so the mixing weight of the injected context equals the injection ratio.
//!
//! Hashing is bit-exact across platforms: FNV-1a 64 over the little-endian
//! seed bytes followed by the UTF-8 token bytes, finalised with SplitMix64.
//! The index stream uses `hash_seed`, the sign stream uses
//! `hash_seed ^ SIGN_TWEAK`. Index `j` is `splitmix64(h_index + j·GOLDEN) mod d`,
//! skipping repeats until four distinct indices are found; sign `j` is bit `j`
//! of `h_sign` (set = negative).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::injection::EnrichedChunk;

/// Non-zero components per token vector.
pub const NONZEROS: usize = 4;
pub const MIN_DIM: usize = 8;
pub const DEFAULT_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const SIGN_TWEAK: u64 = 0x5851_f42d_4c95_7f2d;

/// FNV-1a 64 over `seed.to_le_bytes() ++ bytes`.
pub fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in seed.to_le_bytes().iter().chain(bytes) {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedderConfig {
    pub dim: usize,
    pub hash_seed: u64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            dim: DEFAULT_DIM,
            hash_seed: 0,
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < MIN_DIM {
            return Err(Error::config(
                "dim",
                format!("must be >= {MIN_DIM}, got {}", self.dim),
            ));
        }
        Ok(())
    }
}

/// Unit vector in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub components: Vec<f64>,
}

impl EmbeddingVector {
    /// Normalises `raw`; fails on a (numerically) zero vector.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let n = norm(&raw);
        if n < 1e-12 {
            return Err(Error::Domain("cannot normalise a zero vector".into()));
        }
        Ok(EmbeddingVector {
            components: raw.into_iter().map(|x| x / n).collect(),
        })
    }

    /// Wraps components that are already unit-norm.
    pub fn from_unit(components: Vec<f64>) -> Self {
        EmbeddingVector { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    pub fn neg(&self) -> Self {
        EmbeddingVector {
            components: self.components.iter().map(|x| -x).collect(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Feature-hashing embedder; the token map is fixed by the config.
#[derive(Debug, Clone, Copy)]
pub struct Embedder {
    config: EmbedderConfig,
}

impl Embedder {
    pub fn new(config: EmbedderConfig) -> Result<Self> {
        config.validate()?;
        Ok(Embedder { config })
    }

    pub fn config(&self) -> EmbedderConfig {
        self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// Positions and signs of the token's non-zero components.
    pub fn token_features(&self, token: &str) -> [(usize, f64); NONZEROS] {
        let d = self.config.dim as u64;
        let h_index = splitmix64(fnv1a64(self.config.hash_seed, token.as_bytes()));
        let h_sign = splitmix64(fnv1a64(
            self.config.hash_seed ^ SIGN_TWEAK,
            token.as_bytes(),
        ));
        let mut out = [(0usize, 0.0f64); NONZEROS];
        let mut found = 0;
        let mut j: u64 = 0;
        while found < NONZEROS {
            let idx = (splitmix64(h_index.wrapping_add(j.wrapping_mul(GOLDEN))) % d) as usize;
            j += 1;
            if out[..found].iter().any(|&(i, _)| i == idx) {
                continue;
            }
            let sign = if (h_sign >> found) & 1 == 1 {
                -1.0
            } else {
                1.0
            };
            out[found] = (idx, sign);
            found += 1;
        }
        out
    }

    /// Raw (unnormalised) token vector.
    pub fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.config.dim];
        for (i, s) in self.token_features(token) {
            v[i] = s;
        }
        v
    }

    /// Sum of token vectors.
    pub fn token_sum<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut acc = vec![0.0; self.config.dim];
        for t in tokens {
            for (i, s) in self.token_features(t.as_ref()) {
                acc[i] += s;
            }
        }
        acc
    }

    /// Mean of token vectors, before normalisation.
    pub fn mean_vector<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<f64>> {
        if tokens.is_empty() {
            return Err(Error::Domain("cannot embed an empty token sequence".into()));
        }
        let n = tokens.len() as f64;
        Ok(self.token_sum(tokens).into_iter().map(|x| x / n).collect())
    }

    /// `E(x)`: normalised mean of token vectors.
    pub fn embed<S: AsRef<str>>(&self, tokens: &[S]) -> Result<EmbeddingVector> {
        EmbeddingVector::normalized(self.mean_vector(tokens)?)
    }

    /// Embeds many token sequences, in parallel when enabled.
    pub fn embed_batch<S: AsRef<str> + Sync>(
        &self,
        texts: &[Vec<S>],
    ) -> Result<Vec<EmbeddingVector>> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            texts.par_iter().map(|t| self.embed(t)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            texts.iter().map(|t| self.embed(t)).collect()
        }
    }

    /// Splits an enriched chunk into its unnormalised local and global means.
    pub fn decompose(&self, enriched: &EnrichedChunk) -> Result<MeanDecomposition> {
        let local_mean = self.mean_vector(&enriched.base.tokens)?;
        let context = enriched.context.tokens();
        let global_mean = if context.is_empty() {
            vec![0.0; self.dim()]
        } else {
            self.mean_vector(&context)?
        };
        Ok(MeanDecomposition {
            local_mean,
            global_mean,
            lambda: enriched.cir,
        })
    }

    /// Mixing weight of the context component in `E(I ⊕ c)`, measured by
    /// projecting the pooled mean onto the segment between the chunk mean
    /// and the context mean.
    pub fn effective_lambda(&self, enriched: &EnrichedChunk) -> Result<f64> {
        if enriched.context.is_empty() {
            return Ok(0.0);
        }
        let pooled = self.mean_vector(&enriched.tokens)?;
        let local = self.mean_vector(&enriched.base.tokens)?;
        let global = self.mean_vector(&enriched.context.tokens())?;
        let axis: Vec<f64> = global.iter().zip(&local).map(|(g, l)| g - l).collect();
        let axis_sq = dot(&axis, &axis);
        if axis_sq < 1e-24 {
            // Identical means: every weight reproduces the pooled vector, so
            // report the pooling weight itself.
            let li = enriched.context.len() as f64;
            return Ok(li / (li + enriched.base.len() as f64));
        }
        let offset: Vec<f64> = pooled.iter().zip(&local).map(|(p, l)| p - l).collect();
        Ok(dot(&offset, &axis) / axis_sq)
    }
}

/// Unnormalised component means of an enriched chunk and the weight that
/// recombines them into the pooled mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanDecomposition {
    pub local_mean: Vec<f64>,
    pub global_mean: Vec<f64>,
    pub lambda: f64,
}

impl MeanDecomposition {
    /// `normalize((1 - λ)·local + λ·global)`.
    pub fn recombine(&self) -> Result<EmbeddingVector> {
        let raw = self
            .local_mean
            .iter()
            .zip(&self.global_mean)
            .map(|(l, g)| (1.0 - self.lambda) * l + self.lambda * g)
            .collect();
        EmbeddingVector::normalized(raw)
    }
}

/// Local and global unit directions with the weight of the global one.
#[derive(Debug, Clone, PartialEq)]
pub struct MixDecomposition {
    pub v_local: EmbeddingVector,
    pub v_global: EmbeddingVector,
    pub lambda: f64,
}

/// Normalised convex combination `(1 - λ)·v_local + λ·v_global`.
pub fn mix(dec: &MixDecomposition) -> Result<EmbeddingVector> {
    let lambda = dec.lambda;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda {lambda} outside [0, 1]")));
    }
    if dec.v_local.dim() != dec.v_global.dim() {
        return Err(Error::Domain("mix inputs differ in dimension".into()));
    }
    if lambda == 0.0 {
        return Ok(dec.v_local.clone());
    }
    if lambda == 1.0 {
        return Ok(dec.v_global.clone());
    }
    let raw: Vec<f64> = dec
        .v_local
        .components
        .iter()
        .zip(&dec.v_global.components)
        .map(|(l, g)| (1.0 - lambda) * l + lambda * g)
        .collect();
    if norm(&raw) < 1e-12 {
        return Err(Error::DegenerateMix { lambda });
    }
    EmbeddingVector::normalized(raw)
}

/// Cosine similarity of two unit vectors.
pub fn similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    dot(&a.components, &b.components).clamp(-1.0, 1.0)
}

/// `sim(q, mix(λ))` on `grid_points` evenly spaced λ in `[0, 1]`.
///
/// The angles between `q` and the ideal (`λ = 0`) and real vectors are
/// `acos` of the first and of any later similarity.
pub fn dilution_curve(
    q: &EmbeddingVector,
    v_local: &EmbeddingVector,
    v_global: &EmbeddingVector,
    grid_points: usize,
) -> Result<Vec<(f64, f64)>> {
    if grid_points < 3 {
        return Err(Error::Domain(format!(
            "grid_points must be >= 3, got {grid_points}"
        )));
    }
    let last = (grid_points - 1) as f64;
    (0..grid_points)
        .map(|i| {
            let lambda = i as f64 / last;
            let v = mix(&MixDecomposition {
                v_local: v_local.clone(),
                v_global: v_global.clone(),
                lambda,
            })?;
            Ok((lambda, similarity(q, &v)))
        })
        .collect()
}

/// Location of the curve's maximum for orthogonal `v_local`, `v_global`,
/// given `a = sim(q, v_local) > 0` and `b = sim(q, v_global)`.
pub fn dilution_peak(a: f64, b: f64) -> f64 {
    if b <= 0.0 {
        0.0
    } else {
        b / (a + b)
    }
}

/// Gram–Schmidt: the unit component of `v` orthogonal to `basis`.
pub fn orthogonalize(v: &EmbeddingVector, basis: &EmbeddingVector) -> Result<EmbeddingVector> {
    let p = dot(&v.components, &basis.components);
    let raw = v
        .components
        .iter()
        .zip(&basis.components)
        .map(|(x, b)| x - p * b)
        .collect();
    EmbeddingVector::normalized(raw)
}
