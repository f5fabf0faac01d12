use serde::{Deserialize, Serialize};

use super::model::{EmbeddingModel, Gradient};

/// Adam moments for every parameter of an [`EmbeddingModel`].
///
/// Updates are row-sparse: a step only touches the embedding rows that
/// received gradient, together with the dense output layer. Bias correction
/// uses the global step count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m_lang: Vec<f64>,
    v_lang: Vec<f64>,
    m_token: Vec<f64>,
    v_token: Vec<f64>,
    m_weights: Vec<f64>,
    v_weights: Vec<f64>,
    m_bias: f64,
    v_bias: f64,
}

fn update(params: &mut [f64], m: &mut [f64], v: &mut [f64], grad: &[f64], hp: (f64, f64, f64, f64, f64)) {
    let (b1, b2, eps, lr_c, bc2) = hp;
    for (((p, m), v), &g) in params.iter_mut().zip(m).zip(v).zip(grad) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        *p -= lr_c * *m / ((*v / bc2).sqrt() + eps);
    }
}

impl AdamState {
    pub fn new(model: &EmbeddingModel, learning_rate: f64) -> Self {
        AdamState {
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m_lang: vec![0.0; model.lang_emb.len()],
            v_lang: vec![0.0; model.lang_emb.len()],
            m_token: vec![0.0; model.token_emb.len()],
            v_token: vec![0.0; model.token_emb.len()],
            m_weights: vec![0.0; model.output_weights.len()],
            v_weights: vec![0.0; model.output_weights.len()],
            m_bias: 0.0,
            v_bias: 0.0,
        }
    }

    /// Applies one Adam step for a single-example gradient.
    pub fn apply(&mut self, model: &mut EmbeddingModel, lang: usize, token: usize, grad: &Gradient) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let hp = (self.beta1, self.beta2, self.eps, self.learning_rate / bc1, bc2);
        let d = model.dim;

        let rows = lang * d..(lang + 1) * d;
        update(
            &mut model.lang_emb[rows.clone()],
            &mut self.m_lang[rows.clone()],
            &mut self.v_lang[rows],
            &grad.lang,
            hp,
        );
        let rows = token * d..(token + 1) * d;
        update(
            &mut model.token_emb[rows.clone()],
            &mut self.m_token[rows.clone()],
            &mut self.v_token[rows],
            &grad.token,
            hp,
        );
        update(
            &mut model.output_weights,
            &mut self.m_weights,
            &mut self.v_weights,
            &grad.weights,
            hp,
        );
        let mut bias = [model.output_bias];
        let mut mb = [self.m_bias];
        let mut vb = [self.v_bias];
        update(&mut bias, &mut mb, &mut vb, &[grad.bias], hp);
        model.output_bias = bias[0];
        self.m_bias = mb[0];
        self.v_bias = vb[0];
    }
}
