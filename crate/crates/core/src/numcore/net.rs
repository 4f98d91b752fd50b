use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{Matrix, NetError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Activation {
    Identity,
    Relu,
    Logistic,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Logistic => logistic(z),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Logistic => a * (1.0 - a),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Logistic => "logistic",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "identity" => Some(Activation::Identity),
            "relu" => Some(Activation::Relu),
            "logistic" => Some(Activation::Logistic),
            _ => None,
        }
    }
}

#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Fully connected network: `hidden` activation on every layer but the
/// last, `output` activation on the last.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardNet {
    layer_sizes: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
    hidden: Activation,
    output: Activation,
}

/// Activations recorded by [`FeedForwardNet::forward_cached`], consumed by
/// [`FeedForwardNet::backward`]. Reusable across calls.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    activations: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    filled: bool,
}

impl ForwardCache {
    pub fn output(&self) -> Option<&[f64]> {
        if self.filled {
            self.activations.last().map(Vec::as_slice)
        } else {
            None
        }
    }

    pub fn clear(&mut self) {
        self.filled = false;
    }
}

/// Parameter gradients with the exact layout of the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &FeedForwardNet) -> Self {
        Self {
            weights: net
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        for w in &mut self.weights {
            w.as_mut_slice().fill(0.0);
        }
        for b in &mut self.biases {
            b.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.weights {
            w.as_mut_slice().iter_mut().for_each(|g| *g *= factor);
        }
        for b in &mut self.biases {
            b.iter_mut().for_each(|g| *g *= factor);
        }
    }

    /// Index of the first layer holding a non-finite gradient entry.
    pub fn first_non_finite_layer(&self) -> Option<usize> {
        self.weights
            .iter()
            .zip(&self.biases)
            .position(|(w, b)| !w.is_finite() || b.iter().any(|v| !v.is_finite()))
    }

    pub(crate) fn matches(&self, net: &FeedForwardNet) -> bool {
        self.weights.len() == net.weights.len()
            && self
                .weights
                .iter()
                .zip(&net.weights)
                .all(|(g, w)| g.rows() == w.rows() && g.cols() == w.cols())
            && self
                .biases
                .iter()
                .zip(&net.biases)
                .all(|(g, b)| g.len() == b.len())
    }
}

impl FeedForwardNet {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(
        layer_sizes: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self, NetError> {
        let mut net = Self::zeros(layer_sizes, hidden, output)?;
        for w in &mut net.weights {
            let bound = libm::sqrt(6.0 / (w.rows() + w.cols()) as f64);
            for v in w.as_mut_slice() {
                *v = rng.gen_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    pub fn zeros(
        layer_sizes: &[usize],
        hidden: Activation,
        output: Activation,
    ) -> Result<Self, NetError> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(NetError::InvalidLayout);
        }
        let weights = layer_sizes
            .windows(2)
            .map(|p| Matrix::zeros(p[1], p[0]))
            .collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            hidden,
            output,
        })
    }

    /// Assembles a network from explicit parameters, validating shapes.
    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
        hidden: Activation,
        output: Activation,
    ) -> Result<Self, NetError> {
        let template = Self::zeros(&layer_sizes, hidden, output)?;
        let net = Self {
            layer_sizes,
            weights,
            biases,
            hidden,
            output,
        };
        if !Gradients::zeros_like(&template).matches(&net) {
            return Err(NetError::InvalidLayout);
        }
        if let Some(layer) = net.first_non_finite_layer() {
            return Err(NetError::NonFinite { layer: Some(layer) });
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [Matrix], &mut [Vec<f64>]) {
        (&mut self.weights, &mut self.biases)
    }

    pub fn parameter_count(&self) -> usize {
        self.weights
            .iter()
            .map(|w| w.rows() * w.cols())
            .chain(self.biases.iter().map(Vec::len))
            .sum()
    }

    fn first_non_finite_layer(&self) -> Option<usize> {
        self.weights
            .iter()
            .zip(&self.biases)
            .position(|(w, b)| !w.is_finite() || b.iter().any(|v| !v.is_finite()))
    }

    fn activation_for(&self, layer: usize) -> Activation {
        if layer + 1 == self.weights.len() {
            self.output
        } else {
            self.hidden
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NetError> {
        if input.len() != self.input_len() {
            return Err(NetError::DimensionMismatch {
                expected: self.input_len(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetError> {
        self.check_input(input)?;
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            w.affine_into(&current, b, &mut next);
            let act = self.activation_for(l);
            next.iter_mut().for_each(|z| *z = act.apply(*z));
            core::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Forward pass that records what [`backward`](Self::backward) needs.
    pub fn forward_cached<'c>(
        &self,
        input: &[f64],
        cache: &'c mut ForwardCache,
    ) -> Result<&'c [f64], NetError> {
        self.check_input(input)?;
        let depth = self.weights.len();
        cache.filled = false;
        cache.activations.resize_with(depth + 1, Vec::new);
        cache.pre.resize_with(depth, Vec::new);
        cache.activations[0].clear();
        cache.activations[0].extend_from_slice(input);
        for l in 0..depth {
            let (done, rest) = cache.activations.split_at_mut(l + 1);
            let pre = &mut cache.pre[l];
            self.weights[l].affine_into(&done[l], &self.biases[l], pre);
            let act = self.activation_for(l);
            let out = &mut rest[0];
            out.clear();
            out.extend(pre.iter().map(|&z| act.apply(z)));
        }
        cache.filled = true;
        Ok(&cache.activations[depth])
    }

    /// Accumulates `d(loss)/d(params)` into `grads`, given `loss_grad =
    /// d(loss)/d(output)` and the cache of a matching forward pass.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        loss_grad: &[f64],
        grads: &mut Gradients,
    ) -> Result<(), NetError> {
        let depth = self.weights.len();
        if !cache.filled
            || cache.activations.len() != depth + 1
            || cache.activations[0].len() != self.input_len()
        {
            return Err(NetError::MissingForwardPass);
        }
        if loss_grad.len() != self.output_len() {
            return Err(NetError::DimensionMismatch {
                expected: self.output_len(),
                actual: loss_grad.len(),
            });
        }
        if !grads.matches(self) {
            return Err(NetError::InvalidLayout);
        }
        let mut delta: Vec<f64> = loss_grad.to_vec();
        let mut upstream = Vec::new();
        for l in (0..depth).rev() {
            let act = self.activation_for(l);
            for ((d, &z), &a) in delta
                .iter_mut()
                .zip(&cache.pre[l])
                .zip(&cache.activations[l + 1])
            {
                *d *= act.derivative(z, a);
            }
            grads.weights[l].add_outer(&delta, &cache.activations[l]);
            for (g, d) in grads.biases[l].iter_mut().zip(&delta) {
                *g += d;
            }
            if l > 0 {
                self.weights[l].transpose_mul_into(&delta, &mut upstream);
                core::mem::swap(&mut delta, &mut upstream);
            }
        }
        Ok(())
    }

    /// Overwrites this network's parameters with `other`'s.
    pub fn copy_params_from(&mut self, other: &FeedForwardNet) {
        self.clone_from(other);
    }
}

/// Binary cross-entropy on a logistic output, with the prediction clamped to
/// `[1e-7, 1 - 1e-7]`. Returns `(loss, d loss / d prediction)`.
pub fn binary_cross_entropy(prediction: f64, label: f64) -> (f64, f64) {
    const EPS: f64 = 1e-7;
    let p = prediction.clamp(EPS, 1.0 - EPS);
    let loss = -(label * libm::log(p) + (1.0 - label) * libm::log(1.0 - p));
    let grad = (p - label) / (p * (1.0 - p));
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_net_with_logistic_output_is_one_half() {
        let net = FeedForwardNet::zeros(&[3, 5, 2], Activation::Relu, Activation::Logistic).unwrap();
        assert_eq!(net.forward(&[1.0, -7.0, 3.5]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let net = FeedForwardNet::from_parts(
            vec![2, 2],
            vec![Matrix::identity(2)],
            vec![vec![0.0, 0.0]],
            Activation::Relu,
            Activation::Identity,
        )
        .unwrap();
        assert_eq!(net.forward(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn wrong_input_length_names_both_sizes() {
        let net = FeedForwardNet::zeros(&[4, 1], Activation::Relu, Activation::Identity).unwrap();
        let err = net.forward(&[1.0]).unwrap_err();
        assert_eq!(
            err,
            NetError::DimensionMismatch {
                expected: 4,
                actual: 1
            }
        );
    }

    #[test]
    fn backward_without_forward_is_usage_error() {
        let net = FeedForwardNet::zeros(&[2, 1], Activation::Relu, Activation::Identity).unwrap();
        let mut grads = Gradients::zeros_like(&net);
        let cache = ForwardCache::default();
        assert_eq!(
            net.backward(&cache, &[1.0], &mut grads),
            Err(NetError::MissingForwardPass)
        );
    }

    #[test]
    fn zero_seed_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = FeedForwardNet::new(&[3, 6, 2], Activation::Relu, Activation::Logistic, &mut rng).unwrap();
        let mut cache = ForwardCache::default();
        net.forward_cached(&[0.3, -0.2, 0.9], &mut cache).unwrap();
        let mut grads = Gradients::zeros_like(&net);
        net.backward(&cache, &[0.0, 0.0], &mut grads).unwrap();
        assert_eq!(grads, Gradients::zeros_like(&net));
    }

    #[test]
    fn single_linear_neuron_hand_derivative() {
        // y = w x with w = 2, x = 1; L = (y - 0)^2 so dL/dw = 2 y x = 4.
        let net = FeedForwardNet::from_parts(
            vec![1, 1],
            vec![Matrix::from_vec(1, 1, vec![2.0]).unwrap()],
            vec![vec![0.0]],
            Activation::Relu,
            Activation::Identity,
        )
        .unwrap();
        let mut cache = ForwardCache::default();
        let y = net.forward_cached(&[1.0], &mut cache).unwrap()[0];
        let mut grads = Gradients::zeros_like(&net);
        net.backward(&cache, &[2.0 * y], &mut grads).unwrap();
        assert_eq!(grads.weights[0].get(0, 0), 2.0 * y * 1.0);
        assert_eq!(grads.weights[0].get(0, 0), 4.0);
    }

    #[test]
    fn glorot_bounds_respected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = FeedForwardNet::new(&[10, 20, 5], Activation::Relu, Activation::Identity, &mut rng).unwrap();
        for w in net.weights() {
            let bound = libm::sqrt(6.0 / (w.rows() + w.cols()) as f64);
            assert!(w.as_slice().iter().all(|v| v.abs() <= bound));
        }
        assert!(net.biases().iter().flatten().all(|b| *b == 0.0));
    }

    #[test]
    fn bce_gradient_combines_with_logistic_derivative() {
        let p = logistic(0.7);
        let (_, g) = binary_cross_entropy(p, 1.0);
        assert!((g * p * (1.0 - p) - (p - 1.0)).abs() < 1e-12);
    }
}
