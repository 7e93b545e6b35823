//! One-hidden-layer sigmoid network trained by online backpropagation with
//! momentum on squared error.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    /// Hidden units; `None` means `ceil((features + 2) / 2)`.
    pub hidden: Option<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: None,
            epochs: 500,
            learning_rate: 0.3,
            momentum: 0.2,
        }
    }
}

const OUTPUTS: usize = 2;

/// Index 0 of the outputs is the negative class, index 1 the positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    /// `hidden x (inputs + 1)`, bias last.
    pub w_hidden: Vec<f64>,
    /// `2 x (hidden + 1)`, bias last.
    pub w_out: Vec<f64>,
    /// Per-feature training minimum and maximum for scaling to `[-1, 1]`.
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Activations {
    hidden: Vec<f64>,
    out: [f64; OUTPUTS],
}

impl Mlp {
    /// Untrained network with small uniform weights.
    pub fn init(inputs: usize, hidden: usize, rng: &mut impl Rng) -> Mlp {
        let mut w = |n: usize| (0..n).map(|_| rng.gen_range(-0.05..0.05)).collect::<Vec<f64>>();
        Mlp {
            inputs,
            hidden,
            w_hidden: w(hidden * (inputs + 1)),
            w_out: w(OUTPUTS * (hidden + 1)),
            min: vec![0.0; inputs],
            max: vec![0.0; inputs],
        }
    }

    pub fn default_hidden(inputs: usize) -> usize {
        (inputs + OUTPUTS).div_ceil(2)
    }

    pub fn scale(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(
                |(&x, (&lo, &hi))| {
                    if hi > lo {
                        2.0 * (x - lo) / (hi - lo) - 1.0
                    } else {
                        0.0
                    }
                },
            )
            .collect()
    }

    fn forward(&self, z: &[f64]) -> Activations {
        let stride = self.inputs + 1;
        let hidden: Vec<f64> = (0..self.hidden)
            .map(|h| {
                let w = &self.w_hidden[h * stride..(h + 1) * stride];
                let s: f64 = w[..self.inputs].iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + w[self.inputs];
                sigmoid(s)
            })
            .collect();
        let stride = self.hidden + 1;
        let mut out = [0.0; OUTPUTS];
        for (k, o) in out.iter_mut().enumerate() {
            let w = &self.w_out[k * stride..(k + 1) * stride];
            let s: f64 = w[..self.hidden].iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>() + w[self.hidden];
            *o = sigmoid(s);
        }
        Activations { hidden, out }
    }

    fn targets(label: bool) -> [f64; OUTPUTS] {
        if label {
            [0.0, 1.0]
        } else {
            [1.0, 0.0]
        }
    }

    /// Half squared error on an already scaled input.
    pub fn loss(&self, z: &[f64], label: bool) -> f64 {
        let a = self.forward(z);
        let t = Self::targets(label);
        0.5 * (0..OUTPUTS).map(|k| (a.out[k] - t[k]).powi(2)).sum::<f64>()
    }

    /// Gradient of [`Mlp::loss`] in [`Mlp::parameters`] order.
    pub fn gradient(&self, z: &[f64], label: bool) -> Vec<f64> {
        let a = self.forward(z);
        let t = Self::targets(label);
        let delta_out: Vec<f64> = (0..OUTPUTS)
            .map(|k| (a.out[k] - t[k]) * a.out[k] * (1.0 - a.out[k]))
            .collect();
        let hs = self.hidden + 1;
        let delta_hidden: Vec<f64> = (0..self.hidden)
            .map(|h| {
                let back: f64 = (0..OUTPUTS).map(|k| delta_out[k] * self.w_out[k * hs + h]).sum();
                back * a.hidden[h] * (1.0 - a.hidden[h])
            })
            .collect();
        let mut g = Vec::with_capacity(self.w_hidden.len() + self.w_out.len());
        for &dh in &delta_hidden {
            g.extend(z.iter().map(|&x| dh * x));
            g.push(dh);
        }
        for &dk in &delta_out {
            g.extend(a.hidden.iter().map(|&h| dk * h));
            g.push(dk);
        }
        g
    }

    /// Hidden-layer weights followed by output-layer weights.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.w_hidden.clone();
        p.extend_from_slice(&self.w_out);
        p
    }

    pub fn set_parameters(&mut self, p: &[f64]) {
        let n = self.w_hidden.len();
        assert_eq!(p.len(), n + self.w_out.len(), "parameter count");
        self.w_hidden.copy_from_slice(&p[..n]);
        self.w_out.copy_from_slice(&p[n..]);
    }

    pub fn fit(rows: &[Vec<f64>], labels: &[bool], params: &MlpParams, seed: u64) -> Mlp {
        let inputs = rows.first().map_or(0, Vec::len);
        let hidden = params.hidden.unwrap_or_else(|| Self::default_hidden(inputs));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Mlp::init(inputs, hidden, &mut rng);
        for j in 0..inputs {
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r[j]), hi.max(r[j]))
            });
            net.min[j] = lo;
            net.max[j] = hi;
        }
        let scaled: Vec<Vec<f64>> = rows.iter().map(|r| net.scale(r)).collect();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.shuffle(&mut rng);

        let nh = net.w_hidden.len();
        let mut velocity = vec![0.0; nh + net.w_out.len()];
        for _ in 0..params.epochs {
            for &i in &order {
                let g = net.gradient(&scaled[i], labels[i]);
                let weights = net.w_hidden.iter_mut().chain(net.w_out.iter_mut());
                for ((w, v), gi) in weights.zip(velocity.iter_mut()).zip(&g) {
                    *v = -params.learning_rate * gi + params.momentum * *v;
                    *w += *v;
                }
            }
        }
        net
    }

    /// Positive output normalized against the sum of both outputs.
    pub fn score(&self, row: &[f64]) -> f64 {
        let a = self.forward(&self.scale(row));
        let s = a.out[0] + a.out[1];
        if s > 0.0 {
            a.out[1] / s
        } else {
            0.5
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut net = Mlp::init(3, 3, &mut rng);
        let p0: Vec<f64> = net.parameters().iter().map(|w| w * 20.0).collect();
        net.set_parameters(&p0);
        let z = [0.3, -0.7, 0.9];
        for label in [false, true] {
            let g = net.gradient(&z, label);
            let h = 1e-5;
            for i in 0..p0.len() {
                let mut p = p0.clone();
                p[i] += h;
                net.set_parameters(&p);
                let up = net.loss(&z, label);
                p[i] -= 2.0 * h;
                net.set_parameters(&p);
                let down = net.loss(&z, label);
                net.set_parameters(&p0);
                let num = (up - down) / (2.0 * h);
                let rel = (num - g[i]).abs() / num.abs().max(g[i].abs()).max(1e-8);
                assert!(rel < 1e-4, "param {i}: {num} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn learns_separable_data() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 3.0]).collect();
        let labels: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let net = Mlp::fit(&rows, &labels, &MlpParams::default(), 1);
        for (r, &l) in rows.iter().zip(&labels) {
            assert_eq!(net.score(r) > 0.5, l);
        }
        assert_eq!(net.hidden, 2);
    }
}
