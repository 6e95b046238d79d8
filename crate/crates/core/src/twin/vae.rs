//! Variational autoencoder over error matrices.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{chi_to_features, features_to_matrix};
use super::network::{backward_trace, forward_trace, Activation, Adam, Dense, DenseGrad, Part};
use super::qprocess::{qprocess_backward, qprocess_forward, qprocess_param_count};
use crate::error::{QptError, Result};
use crate::metrics::percentile;
use crate::quantum::channel::ProcessMatrix;
use crate::quantum::cptp::cptp_report;
use crate::quantum::matrix::{c, frobenius};
use crate::seed::{named_seed, rng_from_seed, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VaeConfig {
    /// Encoder hidden widths; the decoder mirrors them.
    pub hidden: Vec<usize>,
    pub latent_dim: usize,
    pub beta: f64,
    pub eps: f64,
}

impl Default for VaeConfig {
    fn default() -> Self {
        VaeConfig { hidden: vec![64, 32], latent_dim: 2, beta: 1e-1, eps: 1e-5 }
    }
}

impl VaeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: &str| {
            Err(QptError::Config { field: format!("vae.{field}"), message: message.into() })
        };
        if self.latent_dim == 0 {
            return bad("latent_dim", "must be at least 1");
        }
        if self.hidden.contains(&0) {
            return bad("hidden", "widths must be positive");
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return bad("beta", "must be finite and non-negative");
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return bad("eps", "must be finite and positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { epochs: 100, batch_size: 32, learning_rate: 1e-3 }
    }
}

impl TrainOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str| {
            Err(QptError::Config { field: format!("training.{field}"), message: "must be positive".into() })
        };
        if self.epochs == 0 {
            return bad("epochs");
        }
        if self.batch_size == 0 {
            return bad("batch_size");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub epoch: usize,
    pub total_loss: f64,
    pub recon_loss: f64,
    pub kl_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub recon: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeModel {
    pub n_qubits: usize,
    pub latent_dim: usize,
    pub beta: f64,
    pub eps: f64,
    /// Encoder input standardization, fitted on the first training set.
    pub input_shift: Vec<f64>,
    pub input_scale: Vec<f64>,
    /// Encoder layers followed by decoder layers.
    pub layers: Vec<Dense>,
    pub seed: u64,
    pub training_history: Vec<TrainingRecord>,
}

impl VaeModel {
    pub fn new(n_qubits: usize, config: &VaeConfig, seed: u64) -> Result<VaeModel> {
        config.validate()?;
        crate::quantum::channel::cached_basis(n_qubits)?;
        let mut rng = rng_from_seed(named_seed(seed, "vae-init"));
        let input_dim = 2 * 16usize.pow(n_qubits as u32);
        let out_dim = qprocess_param_count(n_qubits);
        let mut layers = Vec::new();
        let mut width = input_dim;
        for &h in &config.hidden {
            layers.push(Dense::glorot(Part::Encoder, width, h, Activation::Tanh, &mut rng));
            width = h;
        }
        layers.push(Dense::glorot(Part::Encoder, width, 2 * config.latent_dim, Activation::Linear, &mut rng));
        width = config.latent_dim;
        for &h in config.hidden.iter().rev() {
            layers.push(Dense::glorot(Part::Decoder, width, h, Activation::Tanh, &mut rng));
            width = h;
        }
        let mut head = Dense::glorot(Part::Decoder, width, out_dim, Activation::Linear, &mut rng);
        // start the decoder near the identity process: L = e0 e0†
        head.weights.iter_mut().for_each(|w| *w *= 0.01);
        head.bias[0] = 1.0;
        layers.push(head);
        Ok(VaeModel {
            n_qubits,
            latent_dim: config.latent_dim,
            beta: config.beta,
            eps: config.eps,
            input_shift: vec![0.0; input_dim],
            input_scale: vec![1.0; input_dim],
            layers,
            seed,
            training_history: Vec::new(),
        })
    }

    pub fn input_dim(&self) -> usize {
        2 * 16usize.pow(self.n_qubits as u32)
    }

    fn split(&self) -> usize {
        self.layers.iter().position(|l| l.part == Part::Decoder).unwrap_or(self.layers.len())
    }

    pub fn encoder(&self) -> &[Dense] {
        &self.layers[..self.split()]
    }

    pub fn decoder(&self) -> &[Dense] {
        &self.layers[self.split()..]
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    /// All parameters, layer by layer, weights then bias.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias).copied()).collect()
    }

    pub fn set_flat_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.param_count() {
            return Err(QptError::Shape(format!("expected {} parameters, got {}", self.param_count(), p.len())));
        }
        let mut it = p.iter();
        for l in self.layers.iter_mut() {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *w = *it.next().unwrap();
            }
        }
        Ok(())
    }

    /// Structural and numerical consistency, used after deserialization.
    pub fn validate(&self) -> Result<()> {
        crate::quantum::channel::cached_basis(self.n_qubits)?;
        let input_dim = self.input_dim();
        if self.input_shift.len() != input_dim || self.input_scale.len() != input_dim {
            return Err(QptError::Shape("input normalization length mismatch".into()));
        }
        if self.input_scale.iter().any(|s| !(*s > 0.0)) || self.input_shift.iter().any(|s| !s.is_finite()) {
            return Err(QptError::Validation("input normalization must be finite with positive scales".into()));
        }
        if !(self.eps > 0.0) || !(self.beta >= 0.0) {
            return Err(QptError::Validation("eps must be positive and beta non-negative".into()));
        }
        let (enc, dec) = (self.encoder(), self.decoder());
        if enc.is_empty() || dec.is_empty() {
            return Err(QptError::Shape("model needs encoder and decoder layers".into()));
        }
        let mut width = input_dim;
        for l in enc.iter().chain(dec) {
            l.validate()?;
            if l.cols != width {
                return Err(QptError::Shape(format!("layer expects {} inputs, previous width {width}", l.cols)));
            }
            width = l.rows;
            if l.part == Part::Encoder && std::ptr::eq(l, enc.last().unwrap()) {
                if l.rows != 2 * self.latent_dim {
                    return Err(QptError::Shape("encoder head must emit 2·latent_dim values".into()));
                }
                width = self.latent_dim;
            }
        }
        if width != qprocess_param_count(self.n_qubits) {
            return Err(QptError::Shape("decoder output must match the Cholesky parameter count".into()));
        }
        Ok(())
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.input_shift.iter().zip(&self.input_scale)).map(|(v, (m, s))| (v - m) / s).collect()
    }

    pub fn encode(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if x.len() != self.input_dim() {
            return Err(QptError::Shape(format!("input has {} features, model expects {}", x.len(), self.input_dim())));
        }
        let out = forward_trace(self.encoder(), &self.normalize(x)).pop().unwrap();
        let (mu, lv) = out.split_at(self.latent_dim);
        Ok((mu.to_vec(), lv.to_vec()))
    }

    /// Raw decoder output (Cholesky parameters).
    pub fn decode_params(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim {
            return Err(QptError::Shape(format!("latent vector has length {}, expected {}", z.len(), self.latent_dim)));
        }
        Ok(forward_trace(self.decoder(), z).pop().unwrap())
    }

    pub fn decode(&self, z: &[f64]) -> Result<ProcessMatrix> {
        let (e, _) = qprocess_forward(&self.decode_params(z)?, self.n_qubits, self.eps)?;
        ProcessMatrix::new(self.n_qubits, e)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| QptError::Validation(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<VaeModel> {
        let m: VaeModel = serde_json::from_str(s).map_err(|e| QptError::Parse { path: "<model>".into(), message: e.to_string() })?;
        m.validate()?;
        Ok(m)
    }
}

/// `z = μ + n ⊙ exp(log σ² / 2)`.
pub fn reparameterize(mu: &[f64], log_var: &[f64], noise: &[f64]) -> Vec<f64> {
    mu.iter().zip(log_var).zip(noise).map(|((m, lv), n)| m + n * (0.5 * lv).exp()).collect()
}

pub fn loss(x: &[f64], x_prime: &[f64], mu: &[f64], log_var: &[f64], beta: f64) -> LossParts {
    let recon: f64 = x.iter().zip(x_prime).map(|(a, b)| (a - b).powi(2)).sum();
    let kl = 0.5 * mu.iter().zip(log_var).map(|(m, lv)| lv.exp() + m * m - 1.0 - lv).sum::<f64>();
    LossParts { total: recon + beta * kl, recon, kl }
}

pub fn standard_normal(len: usize, rng: &mut Rng) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Per-sample loss and gradient for a fixed reparameterization noise draw.
/// Gradients are aligned with `model.layers`.
pub fn loss_and_gradient(model: &VaeModel, x: &[f64], noise: &[f64]) -> Result<(LossParts, Vec<DenseGrad>)> {
    let split = model.split();
    let (enc, dec) = model.layers.split_at(split);
    if x.len() != model.input_dim() || noise.len() != model.latent_dim {
        return Err(QptError::Shape("input or noise length does not match the model".into()));
    }
    let acts_e = forward_trace(enc, &model.normalize(x));
    let head = acts_e.last().unwrap();
    let (mu, lv) = head.split_at(model.latent_dim);
    let z = reparameterize(mu, lv, noise);
    let acts_d = forward_trace(dec, &z);
    let (e, cache) = qprocess_forward(acts_d.last().unwrap(), model.n_qubits, model.eps)?;
    let target = features_to_matrix(x)?;
    let x_prime = super::features::matrix_features(&e);
    let parts = loss(x, &x_prime, mu, lv, model.beta);

    let mut grads: Vec<DenseGrad> = model.layers.iter().map(DenseGrad::zeros).collect();
    let (g_enc, g_dec) = grads.split_at_mut(split);
    let g_e = (&e - &target) * c(2.0, 0.0);
    let g_params = qprocess_backward(&cache, &g_e)?;
    let g_z = backward_trace(dec, &acts_d, &g_params, g_dec);
    let mut g_head = vec![0.0; 2 * model.latent_dim];
    for j in 0..model.latent_dim {
        let sigma = (0.5 * lv[j]).exp();
        g_head[j] = g_z[j] + model.beta * mu[j];
        g_head[model.latent_dim + j] = g_z[j] * noise[j] * 0.5 * sigma + model.beta * 0.5 * (lv[j].exp() - 1.0);
    }
    backward_trace(enc, &acts_e, &g_head, g_enc);
    Ok((parts, grads))
}

pub fn flatten_grads(grads: &[DenseGrad]) -> Vec<f64> {
    grads.iter().flat_map(|g| g.weights.iter().chain(&g.bias).copied()).collect()
}

/// Per-feature median and IQR/1.349 (the normal-consistent spread), so a
/// minority of anomalous matrices cannot swamp the scale of the rest.
fn fit_normalization(model: &mut VaeModel, features: &[Vec<f64>]) {
    for k in 0..model.input_dim() {
        let mut col: Vec<f64> = features.iter().map(|f| f[k]).collect();
        col.sort_by(f64::total_cmp);
        let spread = (percentile(&col, 0.75) - percentile(&col, 0.25)) / 1.349;
        model.input_shift[k] = percentile(&col, 0.5);
        model.input_scale[k] = spread.max(1e-4);
    }
}

/// Minibatch Adam on the mean per-sample loss. Batches are shuffled and
/// noise is drawn from `rng` in a fixed order; per-sample gradients are
/// evaluated in parallel and reduced in batch order.
pub fn train(
    mut model: VaeModel,
    dataset: &[ProcessMatrix],
    opts: &TrainOptions,
    rng: &mut Rng,
) -> Result<(VaeModel, Vec<TrainingRecord>)> {
    opts.validate()?;
    if dataset.is_empty() {
        return Err(QptError::Empty("training dataset".into()));
    }
    if let Some(bad) = dataset.iter().find(|d| d.n_qubits() != model.n_qubits) {
        return Err(QptError::Shape(format!(
            "training matrix acts on {} qubit(s), model on {}",
            bad.n_qubits(),
            model.n_qubits
        )));
    }
    let features: Vec<Vec<f64>> = dataset.iter().map(chi_to_features).collect();
    if model.training_history.is_empty() {
        fit_normalization(&mut model, &features);
    }
    let mut adam = Adam::new(opts.learning_rate, model.param_count());
    let mut order: Vec<usize> = (0..features.len()).collect();
    let first_epoch = model.training_history.len() + 1;
    let mut records = Vec::with_capacity(opts.epochs);
    for epoch in 0..opts.epochs {
        order.shuffle(rng);
        let (mut tot, mut rec, mut kl) = (0.0, 0.0, 0.0);
        for batch in order.chunks(opts.batch_size) {
            let noises: Vec<Vec<f64>> = batch.iter().map(|_| standard_normal(model.latent_dim, rng)).collect();
            let results = batch
                .par_iter()
                .zip(noises.par_iter())
                .map(|(&i, n)| loss_and_gradient(&model, &features[i], n))
                .collect::<Result<Vec<_>>>()?;
            let mut sum: Vec<DenseGrad> = model.layers.iter().map(DenseGrad::zeros).collect();
            for (parts, g) in &results {
                tot += parts.total;
                rec += parts.recon;
                kl += parts.kl;
                for (a, b) in sum.iter_mut().zip(g) {
                    a.add(b);
                }
            }
            for g in sum.iter_mut() {
                g.scale(1.0 / batch.len() as f64);
            }
            let mut layer_refs: Vec<&mut Dense> = model.layers.iter_mut().collect();
            let grad_refs: Vec<&DenseGrad> = sum.iter().collect();
            adam.update(&mut layer_refs, &grad_refs);
        }
        let m = features.len() as f64;
        let record = TrainingRecord {
            epoch: first_epoch + epoch,
            total_loss: tot / m,
            recon_loss: rec / m,
            kl_loss: kl / m,
        };
        if !record.total_loss.is_finite() || model.layers.iter().any(|l| l.validate().is_err()) {
            return Err(QptError::NonFinite(format!("training diverged at epoch {}", record.epoch)));
        }
        records.push(record);
    }
    model.training_history.extend(records.iter().copied());
    Ok((model, records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentStats {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

/// Mean and covariance of reparameterized latent samples `z′` over a
/// dataset. Noise comes from a stream derived from the model seed.
pub fn latent_diagnostics(model: &VaeModel, dataset: &[ProcessMatrix]) -> Result<LatentStats> {
    if dataset.is_empty() {
        return Err(QptError::Empty("latent diagnostics dataset".into()));
    }
    let mut rng = rng_from_seed(named_seed(model.seed, "latent-diagnostics"));
    let k = model.latent_dim;
    let zs = dataset
        .iter()
        .map(|chi| {
            let (mu, lv) = model.encode(&chi_to_features(chi))?;
            Ok(reparameterize(&mu, &lv, &standard_normal(k, &mut rng)))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = zs.len() as f64;
    let mean: Vec<f64> = (0..k).map(|j| zs.iter().map(|z| z[j]).sum::<f64>() / m).collect();
    let covariance = (0..k)
        .map(|a| (0..k).map(|b| zs.iter().map(|z| (z[a] - mean[a]) * (z[b] - mean[b])).sum::<f64>() / m).collect())
        .collect();
    Ok(LatentStats { mean, covariance })
}

/// Decode `count` prior draws `z ~ N(0, I)`.
pub fn sample_twins(model: &VaeModel, count: usize, rng: &mut Rng) -> Result<Vec<ProcessMatrix>> {
    if count == 0 {
        return Err(QptError::Validation("twin count must be at least 1".into()));
    }
    let zs: Vec<Vec<f64>> = (0..count).map(|_| standard_normal(model.latent_dim, rng)).collect();
    zs.iter()
        .map(|z| {
            let chi = model.decode(z)?;
            let r = cptp_report(chi.basis(), chi.chi());
            if !r.is_valid(1e-6) {
                return Err(QptError::Consistency(format!("decoded twin is not CPTP: {r:?}")));
            }
            Ok(chi)
        })
        .collect()
}

/// Mean of the decoded twins' distance to a reference, a convenience for
/// diagnostics.
pub fn mean_distance(twins: &[ProcessMatrix], reference: &ProcessMatrix) -> f64 {
    twins.iter().map(|t| frobenius(&(t.chi() - reference.chi()))).sum::<f64>() / twins.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{depolarizing_chi, random_cptp};
    use crate::quantum::matrix::ComplexMatrix;
    use rand::Rng as _;

    fn small_model(n: usize, seed: u64) -> VaeModel {
        VaeModel::new(n, &VaeConfig { hidden: vec![8, 6], ..Default::default() }, seed).unwrap()
    }

    #[test]
    fn zero_weight_encoder_returns_bias() {
        let mut m = small_model(1, 0);
        let split = m.split();
        for l in &mut m.layers[..split] {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        let head = split - 1;
        m.layers[head].bias = vec![0.1, 0.2, 0.3, 0.4];
        let (mu, lv) = m.encode(&vec![0.3; 32]).unwrap();
        assert_eq!(mu, vec![0.1, 0.2]);
        assert_eq!(lv, vec![0.3, 0.4]);
        assert!(m.encode(&[0.0; 3]).is_err());
    }

    #[test]
    fn reparameterization() {
        assert_eq!(reparameterize(&[1.0, 2.0], &[0.3, -1.0], &[0.0, 0.0]), vec![1.0, 2.0]);
        assert_eq!(reparameterize(&[1.0], &[0.0], &[0.5]), vec![1.5]);
        let mut rng = rng_from_seed(3);
        let lv = 0.7f64;
        let zs: Vec<f64> = (0..100_000).map(|_| reparameterize(&[0.0], &[lv], &standard_normal(1, &mut rng))[0]).collect();
        let var = zs.iter().map(|z| z * z).sum::<f64>() / zs.len() as f64;
        // standard error of a Gaussian variance estimate is σ²·√(2/n)
        let se = lv.exp() * (2.0 / zs.len() as f64).sqrt();
        assert!((var - lv.exp()).abs() < 3.0 * se);
    }

    #[test]
    fn loss_examples() {
        let x = [0.1, 0.2];
        let z = loss(&x, &x, &[0.0, 0.0], &[0.0, 0.0], 1.0);
        assert_eq!(z.total, 0.0);
        let k = loss(&x, &x, &[1.0, 0.0], &[0.0, 0.0], 1.0);
        assert!((k.kl - 0.5).abs() < 1e-15);
        let mut rng = rng_from_seed(4);
        for _ in 0..10_000 {
            let mu = [rng.random_range(-3.0..3.0)];
            let lv = [rng.random_range(-5.0..5.0)];
            assert!(loss(&x, &x, &mu, &lv, 1.0).kl >= 0.0);
        }
    }

    #[test]
    fn decoder_outputs_cptp() {
        let m = small_model(2, 1);
        let mut rng = rng_from_seed(5);
        for _ in 0..10 {
            let chi = m.decode(&standard_normal(2, &mut rng)).unwrap();
            let r = cptp_report(chi.basis(), chi.chi());
            assert!((r.trace_re - 1.0).abs() < 1e-9);
            assert!(r.min_eigenvalue >= -1e-9);
            assert!(r.tp_residual <= 1e-6);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut m = small_model(1, 7);
        let mut rng = rng_from_seed(8);
        let data: Vec<ProcessMatrix> = (0..4).map(|_| random_cptp(1, 2, &mut rng).unwrap()).collect();
        fit_normalization(&mut m, &data.iter().map(chi_to_features).collect::<Vec<_>>());
        let x = chi_to_features(&data[0]);
        let noise = standard_normal(2, &mut rng);
        let (_, g) = loss_and_gradient(&m, &x, &noise).unwrap();
        let g = flatten_grads(&g);
        let p0 = m.flat_params();
        let f = |p: &[f64]| {
            let mut mm = m.clone();
            mm.set_flat_params(p).unwrap();
            loss_and_gradient(&mm, &x, &noise).unwrap().0.total
        };
        for _ in 0..30 {
            let k = rng.random_range(0..p0.len());
            let h = 1e-5;
            let mut up = p0.clone();
            up[k] += h;
            let mut dn = p0.clone();
            dn[k] -= h;
            let num = (f(&up) - f(&dn)) / (2.0 * h);
            let rel = (num - g[k]).abs() / num.abs().max(g[k].abs()).max(1e-7);
            assert!(rel < 1e-4, "param {k}: numeric {num} analytic {}", g[k]);
        }
    }

    #[test]
    fn memorizes_a_single_matrix() {
        let target = depolarizing_chi(0.1, 1).unwrap();
        let data = vec![target.clone(); 32];
        let m = small_model(1, 2);
        let opts = TrainOptions { epochs: 200, batch_size: 8, learning_rate: 1e-3 };
        let (m, hist) = train(m, &data, &opts, &mut rng_from_seed(1)).unwrap();
        assert!(hist.last().unwrap().recon_loss < 1e-3);
        for r in &hist {
            assert!((r.total_loss - (r.recon_loss + m.beta * r.kl_loss)).abs() < 1e-9);
        }
    }

    #[test]
    fn training_is_deterministic_and_model_round_trips() {
        let mut rng = rng_from_seed(6);
        let data: Vec<ProcessMatrix> = (0..10).map(|_| random_cptp(1, 1, &mut rng).unwrap()).collect();
        let opts = TrainOptions { epochs: 3, batch_size: 4, learning_rate: 1e-3 };
        let (a, _) = train(small_model(1, 3), &data, &opts, &mut rng_from_seed(2)).unwrap();
        let (b, _) = train(small_model(1, 3), &data, &opts, &mut rng_from_seed(2)).unwrap();
        assert_eq!(a, b);
        let back = VaeModel::from_json(&a.to_json().unwrap()).unwrap();
        let t1 = sample_twins(&a, 3, &mut rng_from_seed(9)).unwrap();
        let t2 = sample_twins(&back, 3, &mut rng_from_seed(9)).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = small_model(1, 0);
        assert!(train(m.clone(), &[], &TrainOptions::default(), &mut rng_from_seed(0)).is_err());
        assert!(sample_twins(&m, 0, &mut rng_from_seed(0)).is_err());
        let mut broken = m.clone();
        broken.layers[0].weights.pop();
        assert!(broken.validate().is_err());
        let _ = ComplexMatrix::zeros(1, 1);
    }
}
