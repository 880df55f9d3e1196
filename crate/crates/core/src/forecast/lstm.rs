//! Single-layer LSTM cell, sequence forward pass and exact BPTT gradients.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights and biases of one gate: `W_i x + b_i + W_h h + b_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    /// `hidden x input`, row-major.
    pub w_input: Vec<f64>,
    /// `hidden x hidden`, row-major.
    pub w_hidden: Vec<f64>,
    pub b_input: Vec<f64>,
    pub b_hidden: Vec<f64>,
}

impl Gate {
    fn zeros(input: usize, hidden: usize) -> Self {
        Gate {
            w_input: vec![0.0; hidden * input],
            w_hidden: vec![0.0; hidden * hidden],
            b_input: vec![0.0; hidden],
            b_hidden: vec![0.0; hidden],
        }
    }

    fn slices(&self) -> [&Vec<f64>; 4] {
        [&self.w_input, &self.w_hidden, &self.b_input, &self.b_hidden]
    }

    fn slices_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [
            &mut self.w_input,
            &mut self.w_hidden,
            &mut self.b_input,
            &mut self.b_hidden,
        ]
    }

    /// Pre-activation for every hidden unit.
    fn affine(&self, x: &[f64], h: &[f64]) -> Vec<f64> {
        let (d, n) = (x.len(), h.len());
        (0..n)
            .map(|r| {
                let wx: f64 = self.w_input[r * d..(r + 1) * d]
                    .iter()
                    .zip(x)
                    .map(|(w, v)| w * v)
                    .sum();
                let wh: f64 = self.w_hidden[r * n..(r + 1) * n]
                    .iter()
                    .zip(h)
                    .map(|(w, v)| w * v)
                    .sum();
                wx + self.b_input[r] + wh + self.b_hidden[r]
            })
            .collect()
    }

    /// Accumulates parameter gradients for pre-activation gradient `da` and
    /// adds `W_h^T da` into `dh_prev`.
    fn backprop(&self, grad: &mut Gate, da: &[f64], x: &[f64], h_prev: &[f64], dh_prev: &mut [f64]) {
        let (d, n) = (x.len(), h_prev.len());
        for (r, &a) in da.iter().enumerate().take(n) {
            for (g, v) in grad.w_input[r * d..(r + 1) * d].iter_mut().zip(x) {
                *g += a * v;
            }
            for (c, (g, v)) in grad.w_hidden[r * n..(r + 1) * n]
                .iter_mut()
                .zip(h_prev)
                .enumerate()
            {
                *g += a * v;
                dh_prev[c] += self.w_hidden[r * n + c] * a;
            }
            grad.b_input[r] += a;
            grad.b_hidden[r] += a;
        }
    }
}

/// All trainable parameters: four gates plus a linear readout of the final
/// hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParameters {
    pub input_size: usize,
    pub hidden_size: usize,
    pub forget: Gate,
    pub input: Gate,
    pub output: Gate,
    pub candidate: Gate,
    pub readout_w: Vec<f64>,
    pub readout_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub o: Vec<f64>,
    pub g: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

/// One standardized training example: `steps x features` inputs and the
/// target the readout should produce after the last step.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWindow {
    pub inputs: Vec<Vec<f64>>,
    pub target: f64,
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmParameters {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        LstmParameters {
            input_size,
            hidden_size,
            forget: Gate::zeros(input_size, hidden_size),
            input: Gate::zeros(input_size, hidden_size),
            output: Gate::zeros(input_size, hidden_size),
            candidate: Gate::zeros(input_size, hidden_size),
            readout_w: vec![0.0; hidden_size],
            readout_b: 0.0,
        }
    }

    /// Every parameter drawn uniformly from `[-k, k]`, `k = 1/sqrt(hidden)`.
    pub fn init_uniform<R: Rng>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_size, hidden_size);
        let k = 1.0 / (hidden_size as f64).sqrt();
        let values: Vec<f64> = (0..p.num_params())
            .map(|_| rng.random_range(-k..=k))
            .collect();
        p.assign_flat(&values);
        p
    }

    pub fn gates(&self) -> [&Gate; 4] {
        [&self.forget, &self.input, &self.output, &self.candidate]
    }

    fn gates_mut(&mut self) -> [&mut Gate; 4] {
        [
            &mut self.forget,
            &mut self.input,
            &mut self.output,
            &mut self.candidate,
        ]
    }

    pub fn num_params(&self) -> usize {
        let (d, n) = (self.input_size, self.hidden_size);
        4 * (n * d + n * n + 2 * n) + n + 1
    }

    /// Gate blocks in f, i, o, g order, then readout weights and bias.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for gate in self.gates() {
            for s in gate.slices() {
                out.extend_from_slice(s);
            }
        }
        out.extend_from_slice(&self.readout_w);
        out.push(self.readout_b);
        out
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn assign_flat(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.num_params(), "flat parameter length");
        let mut at = 0;
        for gate in self.gates_mut() {
            for s in gate.slices_mut() {
                let len = s.len();
                s.copy_from_slice(&values[at..at + len]);
                at += len;
            }
        }
        let n = self.readout_w.len();
        self.readout_w.copy_from_slice(&values[at..at + n]);
        self.readout_b = values[at + n];
    }

    /// Shape and finiteness check, naming the first offending operand.
    pub fn validate(&self) -> Result<()> {
        let (d, n) = (self.input_size, self.hidden_size);
        if d == 0 || n == 0 {
            return Err(Error::InvalidConfig("input and hidden sizes must be >= 1".into()));
        }
        let check = |operand: &'static str, v: &[f64], expected: usize| {
            if v.len() != expected {
                Err(Error::ShapeMismatch {
                    operand,
                    expected,
                    got: v.len(),
                })
            } else {
                Ok(())
            }
        };
        for gate in self.gates() {
            check("W_input", &gate.w_input, n * d)?;
            check("W_hidden", &gate.w_hidden, n * n)?;
            check("b_input", &gate.b_input, n)?;
            check("b_hidden", &gate.b_hidden, n)?;
        }
        check("readout", &self.readout_w, n)?;
        if self.flatten().iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite parameter".into()));
        }
        Ok(())
    }

    fn check_step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<()> {
        for (operand, v, expected) in [
            ("x_t", x, self.input_size),
            ("h_prev", h_prev, self.hidden_size),
            ("c_prev", c_prev, self.hidden_size),
        ] {
            if v.len() != expected {
                return Err(Error::ShapeMismatch {
                    operand,
                    expected,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    pub fn readout(&self, h: &[f64]) -> f64 {
        self.readout_w.iter().zip(h).map(|(w, v)| w * v).sum::<f64>() + self.readout_b
    }

    /// Runs the cell over `inputs` from a zero state and returns every
    /// intermediate state.
    pub fn run(&self, inputs: &[Vec<f64>]) -> Result<Vec<LstmState>> {
        let mut h = vec![0.0; self.hidden_size];
        let mut c = vec![0.0; self.hidden_size];
        let mut states = Vec::with_capacity(inputs.len());
        for x in inputs {
            let s = lstm_step(self, x, &h, &c)?;
            h.clone_from(&s.h);
            c.clone_from(&s.c);
            states.push(s);
        }
        Ok(states)
    }

    /// Readout of the final hidden state after running `inputs`.
    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<f64> {
        let states = self.run(inputs)?;
        let h = states
            .last()
            .map(|s| s.h.clone())
            .unwrap_or_else(|| vec![0.0; self.hidden_size]);
        Ok(self.readout(&h))
    }
}

/// One cell update:
///
/// ```text
/// f = σ(W_if x + b_if + W_hf h + b_hf)    i, o likewise
/// g = tanh(W_ig x + b_ig + W_hg h + b_hg)
/// c = f ⊙ c_prev + i ⊙ g
/// h = o ⊙ tanh(c)
/// ```
pub fn lstm_step(params: &LstmParameters, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<LstmState> {
    params.check_step(x, h_prev, c_prev)?;
    let f: Vec<f64> = params.forget.affine(x, h_prev).into_iter().map(sigmoid).collect();
    let i: Vec<f64> = params.input.affine(x, h_prev).into_iter().map(sigmoid).collect();
    let o: Vec<f64> = params.output.affine(x, h_prev).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = params.candidate.affine(x, h_prev).into_iter().map(f64::tanh).collect();
    let c: Vec<f64> = (0..c_prev.len())
        .map(|k| f[k] * c_prev[k] + i[k] * g[k])
        .collect();
    let h: Vec<f64> = c.iter().zip(&o).map(|(c, o)| o * c.tanh()).collect();
    Ok(LstmState { f, i, o, g, c, h })
}

/// Mean squared readout error over `windows` and its exact gradient with
/// respect to every parameter, by backpropagation through time.
pub fn loss_and_gradients(
    params: &LstmParameters,
    windows: &[FeatureWindow],
) -> Result<(f64, LstmParameters)> {
    if windows.is_empty() {
        return Err(Error::SeriesTooShort("no windows in batch".into()));
    }
    let n = params.hidden_size;
    let scale = 1.0 / windows.len() as f64;
    let mut grad = LstmParameters::zeros(params.input_size, n);
    let mut loss = 0.0;
    let zeros = vec![0.0; n];

    for win in windows {
        let states = params.run(&win.inputs)?;
        let h_last = states.last().map(|s| s.h.as_slice()).unwrap_or(&zeros);
        let err = params.readout(h_last) - win.target;
        loss += err * err * scale;

        let dy = 2.0 * err * scale;
        for (g, h) in grad.readout_w.iter_mut().zip(h_last) {
            *g += dy * h;
        }
        grad.readout_b += dy;

        let mut dh: Vec<f64> = params.readout_w.iter().map(|w| w * dy).collect();
        let mut dc = vec![0.0; n];
        for t in (0..states.len()).rev() {
            let s = &states[t];
            let (h_prev, c_prev) = if t == 0 {
                (&zeros, &zeros)
            } else {
                (&states[t - 1].h, &states[t - 1].c)
            };
            let mut da_f = vec![0.0; n];
            let mut da_i = vec![0.0; n];
            let mut da_o = vec![0.0; n];
            let mut da_g = vec![0.0; n];
            for k in 0..n {
                let tc = s.c[k].tanh();
                let d_o = dh[k] * tc;
                dc[k] += dh[k] * s.o[k] * (1.0 - tc * tc);
                da_f[k] = dc[k] * c_prev[k] * s.f[k] * (1.0 - s.f[k]);
                da_i[k] = dc[k] * s.g[k] * s.i[k] * (1.0 - s.i[k]);
                da_g[k] = dc[k] * s.i[k] * (1.0 - s.g[k] * s.g[k]);
                da_o[k] = d_o * s.o[k] * (1.0 - s.o[k]);
                dc[k] *= s.f[k];
            }
            let x = &win.inputs[t];
            let mut dh_prev = vec![0.0; n];
            params.forget.backprop(&mut grad.forget, &da_f, x, h_prev, &mut dh_prev);
            params.input.backprop(&mut grad.input, &da_i, x, h_prev, &mut dh_prev);
            params.output.backprop(&mut grad.output, &da_o, x, h_prev, &mut dh_prev);
            params.candidate.backprop(&mut grad.candidate, &da_g, x, h_prev, &mut dh_prev);
            dh = dh_prev;
        }
    }
    Ok((loss, grad))
}
