//! Language/feature-value discriminator.
//!
//! A language embedding `l` and a token embedding `t` (both of size `d`) are
//! combined into `h = [l ; t ; l ⊙ t]`. Dropout acts on `h`, and a single
//! logistic unit gives the probability that the token belongs to the
//! language. The element-wise product carries the language/token
//! interaction; without it the logit would split into a language term plus a
//! token term and the ranking of a feature's values could not depend on the
//! language.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INIT_RANGE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    pub dim: usize,
    pub dropout: f64,
    pub seed: u64,
    /// Row-major `languages × dim`.
    pub lang_emb: Vec<f64>,
    /// Row-major `tokens × dim`.
    pub token_emb: Vec<f64>,
    /// `3 · dim` weights over `[l ; t ; l ⊙ t]`.
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

/// Gradient of the loss for one example. Only the two touched embedding
/// rows are non-zero, so only those are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub lang: Vec<f64>,
    pub token: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Gradient {
    pub fn zeros(dim: usize) -> Self {
        Gradient {
            lang: vec![0.0; dim],
            token: vec![0.0; dim],
            weights: vec![0.0; 3 * dim],
            bias: 0.0,
        }
    }
}

pub fn logistic(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// Binary cross-entropy of `logistic(z)` against `label`, computed from the
/// logit.
pub fn bce_from_logit(z: f64, label: f64) -> f64 {
    z.max(0.0) - label * z + (-z.abs()).exp().ln_1p()
}

impl EmbeddingModel {
    /// Uniform initialisation in `[-INIT_RANGE, INIT_RANGE]`, zero bias.
    pub fn new(languages: usize, tokens: usize, dim: usize, dropout: f64, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("embedding size must be positive"));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::validation(format!("dropout {dropout} not in [0, 1)")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect()
        };
        Ok(EmbeddingModel {
            dim,
            dropout,
            seed,
            lang_emb: init(languages * dim),
            token_emb: init(tokens * dim),
            output_weights: init(3 * dim),
            output_bias: 0.0,
        })
    }

    pub fn zeros(languages: usize, tokens: usize, dim: usize) -> Self {
        EmbeddingModel {
            dim,
            dropout: 0.0,
            seed: 0,
            lang_emb: vec![0.0; languages * dim],
            token_emb: vec![0.0; tokens * dim],
            output_weights: vec![0.0; 3 * dim],
            output_bias: 0.0,
        }
    }

    pub fn language_count(&self) -> usize {
        self.lang_emb.len() / self.dim
    }

    pub fn token_count(&self) -> usize {
        self.token_emb.len() / self.dim
    }

    pub fn language_vector(&self, lang: usize) -> &[f64] {
        &self.lang_emb[lang * self.dim..(lang + 1) * self.dim]
    }

    pub fn token_vector(&self, token: usize) -> &[f64] {
        &self.token_emb[token * self.dim..(token + 1) * self.dim]
    }

    fn check_ids(&self, lang: usize, token: usize) -> Result<()> {
        if lang >= self.language_count() {
            return Err(Error::UnknownLanguage(format!("language id {lang}")));
        }
        if token >= self.token_count() {
            return Err(Error::UnknownFeature(format!("token id {token}")));
        }
        Ok(())
    }

    /// Draws an inverted-dropout mask over `h`: each entry is 0 with
    /// probability `dropout`, otherwise `1 / (1 - dropout)`.
    pub fn dropout_mask<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let keep = 1.0 - self.dropout;
        (0..3 * self.dim)
            .map(|_| if rng.gen::<f64>() < self.dropout { 0.0 } else { 1.0 / keep })
            .collect()
    }

    /// Logit for one pair; `mask` scales the entries of `h`.
    pub fn logit(&self, lang: usize, token: usize, mask: Option<&[f64]>) -> f64 {
        let d = self.dim;
        let l = self.language_vector(lang);
        let t = self.token_vector(token);
        let w = &self.output_weights;
        let mut z = self.output_bias;
        match mask {
            None => {
                for j in 0..d {
                    z += w[j] * l[j] + w[d + j] * t[j] + w[2 * d + j] * l[j] * t[j];
                }
            }
            Some(m) => {
                for j in 0..d {
                    z += w[j] * l[j] * m[j]
                        + w[d + j] * t[j] * m[d + j]
                        + w[2 * d + j] * l[j] * t[j] * m[2 * d + j];
                }
            }
        }
        z
    }

    /// Probability that `token` belongs to `lang`. In train mode a fresh
    /// dropout mask is drawn from `rng`.
    pub fn forward<R: Rng>(&self, lang: usize, token: usize, train_mode: bool, rng: &mut R) -> Result<f64> {
        self.check_ids(lang, token)?;
        let z = if train_mode && self.dropout > 0.0 {
            let mask = self.dropout_mask(rng);
            self.logit(lang, token, Some(&mask))
        } else {
            self.logit(lang, token, None)
        };
        Ok(logistic(z))
    }

    /// Eval-mode probability.
    pub fn probability(&self, lang: usize, token: usize) -> f64 {
        logistic(self.logit(lang, token, None))
    }

    /// Binary cross-entropy for one example and its gradient, written into
    /// `grad`.
    pub fn loss_and_grad(
        &self,
        lang: usize,
        token: usize,
        label: f64,
        mask: Option<&[f64]>,
        grad: &mut Gradient,
    ) -> f64 {
        let d = self.dim;
        let z = self.logit(lang, token, mask);
        let loss = bce_from_logit(z, label);
        // dL/dz = σ(z) − y; unclamped so the finite-difference check is exact.
        let g = 1.0 / (1.0 + (-z).exp()) - label;
        let l = self.language_vector(lang);
        let t = self.token_vector(token);
        let w = &self.output_weights;
        let m = |i: usize| mask.map_or(1.0, |m| m[i]);
        for j in 0..d {
            let (ml, mt, mp) = (m(j), m(d + j), m(2 * d + j));
            grad.weights[j] = g * l[j] * ml;
            grad.weights[d + j] = g * t[j] * mt;
            grad.weights[2 * d + j] = g * l[j] * t[j] * mp;
            let dprod = g * w[2 * d + j] * mp;
            grad.lang[j] = g * w[j] * ml + dprod * t[j];
            grad.token[j] = g * w[d + j] * mt + dprod * l[j];
        }
        grad.bias = g;
        loss
    }

    pub fn is_finite(&self) -> bool {
        self.output_bias.is_finite()
            && self
                .lang_emb
                .iter()
                .chain(&self.token_emb)
                .chain(&self.output_weights)
                .all(|x| x.is_finite())
    }
}
