//! Small dense tanh networks with hand-written backpropagation.

use rand::Rng;
use rand_distr::StandardNormal;

/// Fully connected layer, `y = W x + b` with `W` stored row-major
/// (`outputs × inputs`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    inputs: usize,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
            inputs,
        }
    }

    pub fn from_parts(inputs: usize, weights: Vec<f64>, biases: Vec<f64>) -> Option<Self> {
        (inputs > 0 && weights.len() == inputs * biases.len()).then_some(Self {
            weights,
            biases,
            inputs,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.biases.len()
    }

    /// Orthogonal weights scaled by `gain`, zero biases.
    fn orthogonal<R: Rng>(inputs: usize, outputs: usize, gain: f64, rng: &mut R) -> Self {
        // Orthonormalise the columns of a tall Gaussian matrix, then lay it
        // out so that either the rows or the columns of W are orthonormal.
        let (rows, cols) = (inputs.max(outputs), inputs.min(outputs));
        let mut m: Vec<Vec<f64>> = (0..cols)
            .map(|_| (0..rows).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        for j in 0..cols {
            for k in 0..j {
                let proj: f64 = m[j].iter().zip(&m[k]).map(|(a, b)| a * b).sum();
                let (head, tail) = m.split_at_mut(j);
                for (a, b) in tail[0].iter_mut().zip(&head[k]) {
                    *a -= proj * b;
                }
            }
            let norm = m[j].iter().map(|a| a * a).sum::<f64>().sqrt();
            m[j].iter_mut().for_each(|a| *a /= norm);
        }
        let mut layer = Self::zeros(inputs, outputs);
        for o in 0..outputs {
            for i in 0..inputs {
                let v = if outputs >= inputs { m[i][o] } else { m[o][i] };
                layer.weights[o * inputs + i] = gain * v;
            }
        }
        layer
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, y) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *y = self.biases[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// Multi-layer perceptron with tanh hidden activations and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Activations retained by [`Mlp::forward_cached`] for backpropagation.
#[derive(Debug, Clone, Default)]
pub struct Activations {
    /// `values[0]` is the input, `values[k]` the output of layer `k - 1`
    /// (after tanh for hidden layers).
    values: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_next: Vec<f64>,
}

impl Mlp {
    /// Orthogonally initialised network. Hidden layers use gain √2 and the
    /// output layer `output_gain`.
    pub fn new<R: Rng>(dims: &[usize], output_gain: f64, rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "network needs at least an input and an output");
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|k| {
                let gain = if k + 1 == n { output_gain } else { std::f64::consts::SQRT_2 };
                Dense::orthogonal(dims[k], dims[k + 1], gain, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn from_layers(layers: Vec<Dense>) -> Option<Self> {
        let chained = layers.windows(2).all(|w| w[0].outputs() == w[1].inputs());
        (!layers.is_empty() && chained).then_some(Self { layers })
    }

    /// Same topology, all parameters zero.
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs(), l.outputs())).collect(),
        }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].inputs()];
        d.extend(self.layers.iter().map(Dense::outputs));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cache = Activations::default();
        self.forward_cached(x, &mut cache).to_vec()
    }

    pub fn forward_cached<'c>(&self, x: &[f64], cache: &'c mut Activations) -> &'c [f64] {
        let n = self.layers.len();
        cache.values.resize_with(n + 1, Vec::new);
        cache.values[0].clear();
        cache.values[0].extend_from_slice(x);
        for (k, layer) in self.layers.iter().enumerate() {
            let (done, rest) = cache.values.split_at_mut(k + 1);
            let out = &mut rest[0];
            out.resize(layer.outputs(), 0.0);
            layer.forward_into(&done[k], out);
            if k + 1 < n {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
        }
        &cache.values[n]
    }

    /// Accumulates into `grads` the gradient of a scalar loss whose
    /// derivative with respect to the network output is `grad_out`. `cache`
    /// must hold the activations of the matching forward pass.
    pub fn backward(&self, cache: &mut Activations, grad_out: &[f64], grads: &mut Mlp) {
        let Activations {
            values,
            delta,
            delta_next,
        } = cache;
        delta.clear();
        delta.extend_from_slice(grad_out);
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let g = &mut grads.layers[k];
            let input = &values[k];
            let ni = layer.inputs();
            for (o, d) in delta.iter().enumerate() {
                g.biases[o] += d;
                let row = &mut g.weights[o * ni..(o + 1) * ni];
                row.iter_mut().zip(input).for_each(|(w, x)| *w += d * x);
            }
            if k == 0 {
                break;
            }
            delta_next.clear();
            delta_next.resize(ni, 0.0);
            for (o, d) in delta.iter().enumerate() {
                let row = &layer.weights[o * ni..(o + 1) * ni];
                delta_next.iter_mut().zip(row).for_each(|(acc, w)| *acc += w * d);
            }
            // Input to layer k is tanh output of layer k-1.
            delta_next.iter_mut().zip(input).for_each(|(d, h)| *d *= 1.0 - h * h);
            std::mem::swap(delta, delta_next);
        }
    }
}
