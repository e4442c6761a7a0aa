use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::morphable_model::{FlatParams, N_PARAMS, SHAPE_BLOCK};
use crate::textio::{self, KeyedLines};

/// Default identity-embedding width.
pub const DEFAULT_EMBED_DIM: usize = 64;

/// Nonlinearity applied after every trunk layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    pub fn tag(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "tanh" => Some(Activation::Tanh),
            "relu" => Some(Activation::Relu),
            "identity" => Some(Activation::Identity),
            _ => None,
        }
    }

    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// How an observation becomes the trunk's input features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFrame {
    /// The observation as given.
    Raw,
    /// Interleaved `(x, y)` points re-expressed about their centroid in units of
    /// their RMS radius, followed by the centroid and the radius. Adds three features.
    Landmark,
}

impl InputFrame {
    pub fn tag(self) -> &'static str {
        match self {
            InputFrame::Raw => "raw",
            InputFrame::Landmark => "landmark",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "raw" => Some(InputFrame::Raw),
            "landmark" => Some(InputFrame::Landmark),
            _ => None,
        }
    }

    /// Number of features produced from an observation of length `observation_len`.
    pub fn feature_len(self, observation_len: usize) -> usize {
        match self {
            InputFrame::Raw => observation_len,
            InputFrame::Landmark => observation_len + 3,
        }
    }

    pub fn features(self, observation: &[f64]) -> Result<Vec<f64>> {
        match self {
            InputFrame::Raw => Ok(observation.to_vec()),
            InputFrame::Landmark => {
                if observation.is_empty() || observation.len() % 2 != 0 {
                    return Err(Error::InvalidInput(format!(
                        "landmark frame needs a nonempty even-length observation, got length {}",
                        observation.len()
                    )));
                }
                let n = (observation.len() / 2) as f64;
                let (mut cx, mut cy) = (0.0, 0.0);
                for p in observation.chunks_exact(2) {
                    cx += p[0];
                    cy += p[1];
                }
                cx /= n;
                cy /= n;
                let radius = (observation
                    .chunks_exact(2)
                    .map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2))
                    .sum::<f64>()
                    / n)
                    .sqrt();
                if !(radius > 0.0) {
                    return Err(Error::Degenerate("all landmarks coincide".into()));
                }
                let mut out = Vec::with_capacity(observation.len() + 3);
                for p in observation.chunks_exact(2) {
                    out.push((p[0] - cx) / radius);
                    out.push((p[1] - cy) / radius);
                }
                out.extend([cx, cy, radius]);
                Ok(out)
            }
        }
    }
}

/// Both heads evaluated on one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorOutput {
    pub params_pred: FlatParams,
    pub embedding: Vec<f64>,
}

impl RegressorOutput {
    /// Entries `[12, 62)` of the parameter prediction.
    pub fn shape_block(&self) -> &[f64] {
        &self.params_pred[SHAPE_BLOCK]
    }
}

/// Upstream gradient on both heads for one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGrad {
    pub params: FlatParams,
    pub embedding: Vec<f64>,
}

/// Dense layer location inside the flat weight vector: `out×in` row-major weights, then `out` biases.
#[derive(Debug, Clone, Copy)]
struct Dense {
    input: usize,
    output: usize,
    offset: usize,
}

impl Dense {
    fn len(&self) -> usize {
        self.output * (self.input + 1)
    }

    fn forward(&self, w: &[f64], x: &[f64], out: &mut Vec<f64>) {
        let weights = &w[self.offset..self.offset + self.output * self.input];
        let bias = &w[self.offset + self.output * self.input..self.offset + self.len()];
        out.clear();
        out.extend(
            weights
                .chunks_exact(self.input)
                .zip(bias)
                .map(|(row, b)| b + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()),
        );
    }

    /// Accumulates parameter gradients into `grad_w` and returns the gradient on the input.
    fn backward(&self, w: &[f64], x: &[f64], grad_out: &[f64], grad_w: &mut [f64]) -> Vec<f64> {
        let n_w = self.output * self.input;
        let weights = &w[self.offset..self.offset + n_w];
        let (gw, gb) = grad_w[self.offset..self.offset + self.len()].split_at_mut(n_w);
        let mut grad_in = vec![0.0; self.input];
        for (o, &g) in grad_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            gb[o] += g;
            let row = &weights[o * self.input..(o + 1) * self.input];
            let grow = &mut gw[o * self.input..(o + 1) * self.input];
            for i in 0..self.input {
                grow[i] += g * x[i];
                grad_in[i] += g * row[i];
            }
        }
        grad_in
    }
}

/// Activations retained from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `layers[0]` is the standardized input; `layers[k]` is the output of trunk layer `k`.
    layers: Vec<Vec<f64>>,
}

/// Fully connected trunk with two parallel affine heads reading its output:
/// one predicts the 62 parameters, the other an identity embedding.
///
/// The same model is applied to both members of a Siamese pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorModel {
    layer_sizes: Vec<usize>,
    embed_dim: usize,
    activation: Activation,
    frame: InputFrame,
    input_shift: Vec<f64>,
    input_scale: Vec<f64>,
    output_shift: Vec<f64>,
    output_scale: Vec<f64>,
    weights: Vec<f64>,
}

impl RegressorModel {
    /// Glorot-uniform weights, zero biases, raw input frame, identity input and
    /// output standardization.
    ///
    /// `layer_sizes` is `[features, hidden.., trunk_output]`; a single entry means
    /// the heads read the features directly.
    pub fn new(layer_sizes: &[usize], embed_dim: usize, activation: Activation, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(layer_sizes, embed_dim, activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in model.layers() {
            let limit = (6.0 / (layer.input + layer.output) as f64).sqrt();
            for w in &mut model.weights[layer.offset..layer.offset + layer.output * layer.input] {
                *w = rng.random_range(-limit..=limit);
            }
        }
        Ok(model)
    }

    pub fn zeros(layer_sizes: &[usize], embed_dim: usize, activation: Activation) -> Result<Self> {
        if layer_sizes.is_empty() || layer_sizes.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "layer sizes must be a nonempty list of positive integers, got {layer_sizes:?}"
            )));
        }
        if embed_dim == 0 {
            return Err(Error::InvalidInput("embedding width must be positive".into()));
        }
        let input = layer_sizes[0];
        let mut model = Self {
            layer_sizes: layer_sizes.to_vec(),
            embed_dim,
            activation,
            frame: InputFrame::Raw,
            input_shift: vec![0.0; input],
            input_scale: vec![1.0; input],
            output_shift: vec![0.0; N_PARAMS],
            output_scale: vec![1.0; N_PARAMS],
            weights: Vec::new(),
        };
        model.weights = vec![0.0; model.weight_count()];
        Ok(model)
    }

    fn layers(&self) -> Vec<Dense> {
        let mut offset = 0;
        let mut out = Vec::with_capacity(self.layer_sizes.len() + 1);
        for pair in self.layer_sizes.windows(2) {
            let d = Dense {
                input: pair[0],
                output: pair[1],
                offset,
            };
            offset += d.len();
            out.push(d);
        }
        let trunk = self.trunk_width();
        for width in [N_PARAMS, self.embed_dim] {
            let d = Dense {
                input: trunk,
                output: width,
                offset,
            };
            offset += d.len();
            out.push(d);
        }
        out
    }

    fn trunk_width(&self) -> usize {
        *self.layer_sizes.last().expect("nonempty layer sizes")
    }

    pub fn weight_count(&self) -> usize {
        self.layers().iter().map(Dense::len).sum()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Width of the trunk input, after the input frame is applied.
    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    /// Expected observation length.
    pub fn observation_len(&self) -> usize {
        match self.frame {
            InputFrame::Raw => self.input_len(),
            InputFrame::Landmark => self.input_len().saturating_sub(3),
        }
    }

    pub fn frame(&self) -> InputFrame {
        self.frame
    }

    /// Changing the frame resets the input standardization.
    pub fn set_frame(&mut self, frame: InputFrame) -> Result<()> {
        if frame == InputFrame::Landmark && (self.input_len() < 5 || (self.input_len() - 3) % 2 != 0) {
            return Err(Error::InvalidInput(format!(
                "landmark frame needs an input width of 3 plus a positive even number, got {}",
                self.input_len()
            )));
        }
        self.frame = frame;
        self.input_shift = vec![0.0; self.input_len()];
        self.input_scale = vec![1.0; self.input_len()];
        Ok(())
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        check_len("model weights", self.weight_count(), &weights)?;
        self.weights = weights;
        Ok(())
    }

    pub fn input_standardization(&self) -> (&[f64], &[f64]) {
        (&self.input_shift, &self.input_scale)
    }

    pub fn output_standardization(&self) -> (&[f64], &[f64]) {
        (&self.output_shift, &self.output_scale)
    }

    /// Fixed map `h ↦ shift + scale · h` from the parameter head to the prediction.
    pub fn set_output_standardization(&mut self, shift: Vec<f64>, scale: Vec<f64>) -> Result<()> {
        check_len("output shift", N_PARAMS, &shift)?;
        check_len("output scale", N_PARAMS, &scale)?;
        if shift.iter().chain(&scale).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("output standardization must be finite".into()));
        }
        self.output_shift = shift;
        self.output_scale = scale;
        Ok(())
    }

    /// Sets the output map from the mean and standard deviation of `targets`.
    pub fn fit_output_standardization<'a>(&mut self, targets: impl IntoIterator<Item = &'a [f64]>) -> Result<()> {
        let (shift, sd) = mean_and_sd("target", N_PARAMS, targets)?;
        let scale = sd.into_iter().map(|s| if s > 1e-6 { s } else { 1.0 }).collect();
        self.set_output_standardization(shift, scale)
    }

    /// Fixed per-feature map `x ↦ (x − shift) · scale` applied before the trunk.
    pub fn set_input_standardization(&mut self, shift: Vec<f64>, scale: Vec<f64>) -> Result<()> {
        check_len("input shift", self.input_len(), &shift)?;
        check_len("input scale", self.input_len(), &scale)?;
        if shift.iter().chain(&scale).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("input standardization must be finite".into()));
        }
        self.input_shift = shift;
        self.input_scale = scale;
        Ok(())
    }

    /// Sets the standardization from the mean and standard deviation of the
    /// features of `observations`.
    pub fn fit_input_standardization<'a>(&mut self, observations: impl IntoIterator<Item = &'a [f64]>) -> Result<()> {
        let features = observations
            .into_iter()
            .map(|obs| {
                check_len("observation", self.observation_len(), obs)?;
                self.frame.features(obs)
            })
            .collect::<Result<Vec<_>>>()?;
        let (shift, sd) = mean_and_sd("observation", self.input_len(), features.iter().map(Vec::as_slice))?;
        let scale = sd.into_iter().map(|s| if s > 1e-6 { 1.0 / s } else { 1.0 }).collect();
        self.set_input_standardization(shift, scale)
    }

    pub fn forward(&self, observation: &[f64]) -> Result<RegressorOutput> {
        Ok(self.forward_cached(observation)?.0)
    }

    pub fn forward_cached(&self, observation: &[f64]) -> Result<(RegressorOutput, ForwardCache)> {
        check_len("observation", self.observation_len(), observation)?;
        let layers = self.layers();
        let (trunk, heads) = layers.split_at(layers.len() - 2);
        let mut acts = Vec::with_capacity(trunk.len() + 1);
        acts.push(
            self.frame
                .features(observation)?
                .iter()
                .zip(&self.input_shift)
                .zip(&self.input_scale)
                .map(|((x, m), s)| (x - m) * s)
                .collect::<Vec<_>>(),
        );
        for layer in trunk {
            let mut out = Vec::with_capacity(layer.output);
            layer.forward(&self.weights, acts.last().expect("input layer"), &mut out);
            out.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            acts.push(out);
        }
        let features = acts.last().expect("trunk output");
        let mut params = Vec::with_capacity(N_PARAMS);
        heads[0].forward(&self.weights, features, &mut params);
        for ((p, m), s) in params.iter_mut().zip(&self.output_shift).zip(&self.output_scale) {
            *p = m + s * *p;
        }
        let mut embedding = Vec::with_capacity(self.embed_dim);
        heads[1].forward(&self.weights, features, &mut embedding);
        let params_pred: FlatParams = params.try_into().expect("params head width");
        Ok((
            RegressorOutput {
                params_pred,
                embedding,
            },
            ForwardCache { layers: acts },
        ))
    }

    /// Accumulates into `grad_w` the weight gradient for one observation's forward pass.
    pub fn backward_one(&self, cache: &ForwardCache, upstream: &OutputGrad, grad_w: &mut [f64]) -> Result<()> {
        check_len("weight gradient", self.weight_count(), grad_w)?;
        check_len("embedding gradient", self.embed_dim, &upstream.embedding)?;
        let layers = self.layers();
        let (trunk, heads) = layers.split_at(layers.len() - 2);
        let features = cache.layers.last().expect("trunk output");
        let head_grad: Vec<f64> = upstream.params.iter().zip(&self.output_scale).map(|(g, s)| g * s).collect();
        let mut grad = heads[0].backward(&self.weights, features, &head_grad, grad_w);
        let from_embed = heads[1].backward(&self.weights, features, &upstream.embedding, grad_w);
        grad.iter_mut().zip(&from_embed).for_each(|(a, b)| *a += b);
        for (k, layer) in trunk.iter().enumerate().rev() {
            let out = &cache.layers[k + 1];
            for (g, y) in grad.iter_mut().zip(out) {
                *g *= self.activation.derivative_from_output(*y);
            }
            grad = layer.backward(&self.weights, &cache.layers[k], &grad, grad_w);
        }
        Ok(())
    }

    /// Weight gradient summed over a batch of observations and their upstream gradients.
    pub fn backward(&self, observations: &[&[f64]], upstream: &[OutputGrad]) -> Result<Vec<f64>> {
        if observations.len() != upstream.len() {
            return Err(Error::dim("upstream gradients", observations.len(), upstream.len()));
        }
        let mut grad_w = vec![0.0; self.weight_count()];
        for (obs, up) in observations.iter().zip(upstream) {
            let (_, cache) = self.forward_cached(obs)?;
            self.backward_one(&cache, up, &mut grad_w)?;
        }
        Ok(grad_w)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# siamface regressor\n");
        let sizes: Vec<String> = self.layer_sizes.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "layer_sizes {}", sizes.join(" "));
        let _ = writeln!(out, "params_head {N_PARAMS}");
        let _ = writeln!(out, "embed_head {}", self.embed_dim);
        let _ = writeln!(out, "activation {}", self.activation.tag());
        let _ = writeln!(out, "input_frame {}", self.frame.tag());
        let _ = writeln!(out, "input_shift {}", textio::join_exact(&self.input_shift));
        let _ = writeln!(out, "input_scale {}", textio::join_exact(&self.input_scale));
        let _ = writeln!(out, "output_shift {}", textio::join_exact(&self.output_shift));
        let _ = writeln!(out, "output_scale {}", textio::join_exact(&self.output_scale));
        let _ = writeln!(out, "weights {}", self.weights.len());
        for chunk in self.weights.chunks(16) {
            out.push_str(&textio::join_exact(chunk));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = KeyedLines::new(text);
        let (n, rest) = lines.expect("layer_sizes")?;
        let sizes = rest
            .split_whitespace()
            .map(|t| textio::parse_usize(n, "layer_sizes", t))
            .collect::<Result<Vec<_>>>()?;
        let (n, rest) = lines.expect("params_head")?;
        let params_head = textio::parse_usize(n, "params_head", rest)?;
        if params_head != N_PARAMS {
            return Err(Error::dim("params_head", N_PARAMS, params_head));
        }
        let (n, rest) = lines.expect("embed_head")?;
        let embed_dim = textio::parse_usize(n, "embed_head", rest)?;
        let (n, rest) = lines.expect("activation")?;
        let activation =
            Activation::from_tag(rest).ok_or_else(|| Error::parse(n, "activation", format!("unknown tag `{rest}`")))?;
        let mut model = Self::zeros(&sizes, embed_dim, activation).map_err(|e| Error::parse(n, "layer_sizes", e.to_string()))?;
        let (n, rest) = lines.expect("input_frame")?;
        let frame =
            InputFrame::from_tag(rest).ok_or_else(|| Error::parse(n, "input_frame", format!("unknown tag `{rest}`")))?;
        model.set_frame(frame).map_err(|e| Error::parse(n, "input_frame", e.to_string()))?;
        let (n, rest) = lines.expect("input_shift")?;
        let shift = textio::parse_reals(n, "input_shift", rest, model.input_len())?;
        let (n, rest) = lines.expect("input_scale")?;
        let scale = textio::parse_reals(n, "input_scale", rest, model.input_len())?;
        model.set_input_standardization(shift, scale)?;
        let (n, rest) = lines.expect("output_shift")?;
        let shift = textio::parse_reals(n, "output_shift", rest, N_PARAMS)?;
        let (n, rest) = lines.expect("output_scale")?;
        let scale = textio::parse_reals(n, "output_scale", rest, N_PARAMS)?;
        model.set_output_standardization(shift, scale)?;
        let (n, rest) = lines.expect("weights")?;
        let count = textio::parse_usize(n, "weights", rest)?;
        if count != model.weight_count() {
            return Err(Error::dim("weights", model.weight_count(), count));
        }
        let mut weights = Vec::with_capacity(count);
        while weights.len() < count {
            let (n, content) = lines.next_line("weights")?;
            let expected = (count - weights.len()).min(16);
            weights.extend(textio::parse_reals(n, "weights", content, expected)?);
        }
        lines.expect_end()?;
        model.weights = weights;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn mean_and_sd<'a>(what: &str, width: usize, rows: impl IntoIterator<Item = &'a [f64]>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut count = 0usize;
    let mut sum = vec![0.0; width];
    let mut sum_sq = vec![0.0; width];
    for row in rows {
        check_len(what, width, row)?;
        count += 1;
        for i in 0..width {
            sum[i] += row[i];
            sum_sq[i] += row[i] * row[i];
        }
    }
    if count == 0 {
        return Err(Error::InvalidInput(format!("no {what}s to standardize against")));
    }
    let n = count as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let sd = sum_sq.iter().zip(&mean).map(|(sq, m)| (sq / n - m * m).max(0.0).sqrt()).collect();
    Ok((mean, sd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_count_matches_layout() {
        let m = RegressorModel::zeros(&[10, 8, 6], 4, Activation::Tanh).unwrap();
        assert_eq!(m.weight_count(), 8 * 11 + 6 * 9 + 62 * 7 + 4 * 7);
    }

    #[test]
    fn zero_model_outputs_zero() {
        let m = RegressorModel::zeros(&[5, 7], 3, Activation::Tanh).unwrap();
        let out = m.forward(&[1.0, -2.0, 3.0, 0.5, 9.0]).unwrap();
        assert!(out.params_pred.iter().all(|&x| x == 0.0));
        assert_eq!(out.embedding, vec![0.0; 3]);
    }

    #[test]
    fn linear_identity_head_reproduces_input() {
        let mut m = RegressorModel::zeros(&[N_PARAMS], 2, Activation::Identity).unwrap();
        for i in 0..N_PARAMS {
            m.weights_mut()[i * N_PARAMS + i] = 1.0;
        }
        let x: Vec<f64> = (0..N_PARAMS).map(|i| i as f64 * 0.3 - 4.0).collect();
        let out = m.forward(&x).unwrap();
        assert_eq!(out.params_pred.to_vec(), x);
        assert_eq!(out.shape_block(), &x[12..]);
    }

    #[test]
    fn repeated_forward_is_bit_identical() {
        let m = RegressorModel::new(&[6, 9, 5], 4, Activation::Tanh, 3).unwrap();
        let x = [0.1, 0.2, -0.3, 0.4, 1.5, -2.0];
        assert_eq!(m.forward(&x).unwrap(), m.forward(&x).unwrap());
    }

    #[test]
    fn input_length_is_checked() {
        let m = RegressorModel::new(&[6, 5], 4, Activation::Tanh, 3).unwrap();
        assert!(m.forward(&[0.0; 5]).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let m = RegressorModel::new(&[6, 9, 5], 4, Activation::Tanh, 3).unwrap();
        let x = [0.1, 0.2, -0.3, 0.4, 1.5, -2.0];
        let up = OutputGrad {
            params: [0.0; N_PARAMS],
            embedding: vec![0.0; 4],
        };
        let g = m.backward(&[&x], &[up]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut m = RegressorModel::new(&[6, 9, 5], 4, Activation::Relu, 8).unwrap();
        m.set_input_standardization(vec![0.1; 6], vec![1.0 / 3.0; 6]).unwrap();
        let back = RegressorModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn truncated_model_file_fails() {
        let m = RegressorModel::new(&[6, 9, 5], 4, Activation::Tanh, 8).unwrap();
        let text = m.to_text();
        let cut = &text[..text.len() / 2];
        assert!(matches!(RegressorModel::from_text(cut), Err(Error::Parse { .. })));
    }
}
