//! Dense layers with hand-written backpropagation.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{QptError, Result};
use crate::seed::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Encoder,
    Decoder,
}

/// `y = act(W x + b)` with `W` stored row-major, `rows` outputs, `cols` inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub part: Part,
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    /// Glorot-uniform weights, zero bias.
    pub fn glorot(part: Part, inputs: usize, outputs: usize, activation: Activation, rng: &mut Rng) -> Dense {
        let a = (6.0 / (inputs + outputs) as f64).sqrt();
        Dense {
            part,
            rows: outputs,
            cols: inputs,
            weights: (0..inputs * outputs).map(|_| rng.random_range(-a..a)).collect(),
            bias: vec![0.0; outputs],
            activation,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.rows * self.cols || self.bias.len() != self.rows {
            return Err(QptError::Shape(format!(
                "layer {}x{} has {} weights and {} biases",
                self.rows,
                self.cols,
                self.weights.len(),
                self.bias.len()
            )));
        }
        if self.weights.iter().chain(&self.bias).any(|x| !x.is_finite()) {
            return Err(QptError::NonFinite("layer parameters".into()));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let row = &self.weights[r * self.cols..(r + 1) * self.cols];
                let pre = self.bias[r] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
                match self.activation {
                    Activation::Tanh => pre.tanh(),
                    Activation::Linear => pre,
                }
            })
            .collect()
    }

    /// Accumulates parameter gradients into `grad` and returns `∂L/∂x`.
    /// `y` is this layer's forward output for input `x`.
    pub fn backward(&self, x: &[f64], y: &[f64], gy: &[f64], grad: &mut DenseGrad) -> Vec<f64> {
        let mut gx = vec![0.0; self.cols];
        for r in 0..self.rows {
            let gpre = match self.activation {
                Activation::Tanh => gy[r] * (1.0 - y[r] * y[r]),
                Activation::Linear => gy[r],
            };
            if gpre == 0.0 {
                continue;
            }
            grad.bias[r] += gpre;
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let grow = &mut grad.weights[r * self.cols..(r + 1) * self.cols];
            for k in 0..self.cols {
                grow[k] += gpre * x[k];
                gx[k] += gpre * row[k];
            }
        }
        gx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseGrad {
    pub fn zeros(layer: &Dense) -> DenseGrad {
        DenseGrad { weights: vec![0.0; layer.weights.len()], bias: vec![0.0; layer.bias.len()] }
    }

    pub fn add(&mut self, other: &DenseGrad) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            *a *= s;
        }
    }
}

/// Forward pass keeping every activation: `out[0] = x`, `out[k+1]` = layer k output.
pub fn forward_trace(layers: &[Dense], x: &[f64]) -> Vec<Vec<f64>> {
    let mut acts = Vec::with_capacity(layers.len() + 1);
    acts.push(x.to_vec());
    for layer in layers {
        let next = layer.forward(acts.last().unwrap());
        acts.push(next);
    }
    acts
}

/// Backpropagate `g_out` through a traced stack; returns `∂L/∂x`.
pub fn backward_trace(layers: &[Dense], acts: &[Vec<f64>], g_out: &[f64], grads: &mut [DenseGrad]) -> Vec<f64> {
    let mut g = g_out.to_vec();
    for k in (0..layers.len()).rev() {
        g = layers[k].backward(&acts[k], &acts[k + 1], &g, &mut grads[k]);
    }
    g
}

/// Adam state over a flat parameter layout (layer by layer, weights then bias).
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(learning_rate: f64, param_count: usize) -> Adam {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn update(&mut self, layers: &mut [&mut Dense], grads: &[&DenseGrad]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let mut idx = 0;
        for (layer, grad) in layers.iter_mut().zip(grads) {
            let params = layer.weights.iter_mut().chain(layer.bias.iter_mut());
            let gs = grad.weights.iter().chain(&grad.bias);
            for (p, &g) in params.zip(gs) {
                self.m[idx] = self.beta1 * self.m[idx] + (1.0 - self.beta1) * g;
                self.v[idx] = self.beta2 * self.v[idx] + (1.0 - self.beta2) * g * g;
                let mh = self.m[idx] / c1;
                let vh = self.v[idx] / c2;
                *p -= self.learning_rate * mh / (vh.sqrt() + self.epsilon);
                idx += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn zero_weights_give_bias() {
        let layer = Dense {
            part: Part::Encoder,
            rows: 2,
            cols: 3,
            weights: vec![0.0; 6],
            bias: vec![0.5, -1.0],
            activation: Activation::Linear,
        };
        assert_eq!(layer.forward(&[1.0, 2.0, 3.0]), vec![0.5, -1.0]);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = rng_from_seed(2);
        let layers = vec![
            Dense::glorot(Part::Encoder, 4, 5, Activation::Tanh, &mut rng),
            Dense::glorot(Part::Encoder, 5, 3, Activation::Linear, &mut rng),
        ];
        let x = [0.3, -0.2, 0.9, 0.1];
        let f = |ls: &[Dense]| forward_trace(ls, &x).last().unwrap().iter().map(|v| v * v).sum::<f64>();
        let acts = forward_trace(&layers, &x);
        let g_out: Vec<f64> = acts.last().unwrap().iter().map(|v| 2.0 * v).collect();
        let mut grads: Vec<DenseGrad> = layers.iter().map(DenseGrad::zeros).collect();
        backward_trace(&layers, &acts, &g_out, &mut grads);
        for (li, k) in [(0, 3), (0, 17), (1, 0), (1, 14)] {
            let h = 1e-6;
            let mut up = layers.clone();
            up[li].weights[k] += h;
            let mut dn = layers.clone();
            dn[li].weights[k] -= h;
            let num = (f(&up) - f(&dn)) / (2.0 * h);
            assert!((num - grads[li].weights[k]).abs() < 1e-7);
        }
    }
}
