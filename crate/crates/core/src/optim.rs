//! AdamW: Adam with decoupled weight decay.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

/// Optimizer state for one flat parameter buffer.
#[derive(Debug, Clone)]
pub struct AdamW {
    pub cfg: AdamWConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamW {
    pub fn new(cfg: AdamWConfig, n_params: usize) -> Self {
        AdamW {
            cfg,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    #[inline]
    fn update(&mut self, i: usize, p: &mut f64, g: f64, c1: f64, c2: f64) {
        let AdamWConfig { lr, beta1, beta2, eps, weight_decay } = self.cfg;
        *p -= lr * weight_decay * *p;
        self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
        self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
        let m_hat = self.m[i] / c1;
        let v_hat = self.v[i] / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }

    fn bias_corrections(&self) -> (f64, f64) {
        let t = self.t as i32;
        (1.0 - self.cfg.beta1.powi(t), 1.0 - self.cfg.beta2.powi(t))
    }

    /// One step over every parameter.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let (c1, c2) = self.bias_corrections();
        for (i, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
            self.update(i, p, g, c1, c2);
        }
    }

    /// Lazy step over selected rows of a row-major matrix: rows not listed
    /// keep both their values and their moment estimates.
    pub fn step_rows(&mut self, params: &mut [f64], grads: &[f64], rows: &[usize], row_len: usize) {
        assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let (c1, c2) = self.bias_corrections();
        for &r in rows {
            let base = r * row_len;
            for i in base..base + row_len {
                let g = grads[i];
                let mut p = params[i];
                self.update(i, &mut p, g, c1, c2);
                params[i] = p;
            }
        }
    }
}
