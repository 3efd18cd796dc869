use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::activation::{activation, Activation};
use super::linalg::sq_norm;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Network shape. One hidden layer per branch; the head reads the
/// concatenation of the audio and (optional) privileged encodings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    /// Flattened feature dimension `n_mels * frames`.
    pub input_dim: usize,
    pub hidden: usize,
    /// Privileged input dimension; `None` for audio-only networks.
    pub privileged_dim: Option<usize>,
    pub privileged_hidden: usize,
    pub num_classes: usize,
    pub activation: String,
}

impl Architecture {
    pub fn audio_only(input_dim: usize, hidden: usize, num_classes: usize, activation: &str) -> Self {
        Self {
            input_dim,
            hidden,
            privileged_dim: None,
            privileged_hidden: 0,
            num_classes,
            activation: activation.into(),
        }
    }

    pub fn multimodal(
        input_dim: usize,
        hidden: usize,
        privileged_dim: usize,
        privileged_hidden: usize,
        num_classes: usize,
        activation: &str,
    ) -> Self {
        Self {
            input_dim,
            hidden,
            privileged_dim: Some(privileged_dim),
            privileged_hidden,
            num_classes,
            activation: activation.into(),
        }
    }

    pub fn is_multimodal(&self) -> bool {
        self.privileged_dim.is_some()
    }

    /// Width of the head input.
    pub fn fused_dim(&self) -> usize {
        self.hidden
            + if self.is_multimodal() {
                self.privileged_hidden
            } else {
                0
            }
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 || self.num_classes == 0 {
            return Err(Error::InvalidConfig("architecture dimensions must be positive".into()));
        }
        if matches!(self.privileged_dim, Some(0)) || (self.is_multimodal() && self.privileged_hidden == 0) {
            return Err(Error::InvalidConfig(
                "privileged branch dimensions must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Network widths shared by teacher and student.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden: usize,
    pub privileged_hidden: usize,
    pub activation: String,
    /// Teacher reads the privileged vector through its own encoder.
    pub multimodal: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden: 128,
            privileged_hidden: 16,
            activation: "relu".into(),
            multimodal: true,
        }
    }
}

impl ModelConfig {
    /// Multimodal when configured and a privileged dimension is given.
    pub fn teacher_arch(
        &self,
        input_dim: usize,
        privileged_dim: Option<usize>,
        num_classes: usize,
    ) -> Result<Architecture> {
        match (self.multimodal, privileged_dim) {
            (true, Some(d)) => Ok(Architecture::multimodal(
                input_dim,
                self.hidden,
                d,
                self.privileged_hidden,
                num_classes,
                &self.activation,
            )),
            (true, None) => Err(Error::ModeMismatch {
                mode: "multimodal".into(),
                reason: "training data carries no privileged vectors".into(),
            }),
            (false, _) => Ok(self.student_arch(input_dim, num_classes)),
        }
    }

    pub fn student_arch(&self, input_dim: usize, num_classes: usize) -> Architecture {
        Architecture::audio_only(input_dim, self.hidden, num_classes, &self.activation)
    }
}

/// Fully connected layer, weight row-major `[outputs × inputs]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weight: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weight = (0..inputs * outputs).map(|_| rng.random_range(-limit..limit)).collect();
        Self {
            inputs,
            outputs,
            weight,
            bias: vec![0.0; outputs],
        }
    }
}

/// Named tensors shared by parameters, gradients and optimizer moments.
///
/// Tensor names are `audio.{bias,weight}`, `head.{bias,weight}` and
/// `priv.{bias,weight}`; [`ParamSet::tensors`] yields them in that
/// (lexicographic) order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub audio: Dense,
    pub privileged: Option<Dense>,
    pub head: Dense,
}

impl ParamSet {
    pub fn zeros(arch: &Architecture) -> Self {
        Self {
            audio: Dense::zeros(arch.input_dim, arch.hidden),
            privileged: arch.privileged_dim.map(|d| Dense::zeros(d, arch.privileged_hidden)),
            head: Dense::zeros(arch.fused_dim(), arch.num_classes),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = |d: &Dense| Dense::zeros(d.inputs, d.outputs);
        Self {
            audio: z(&self.audio),
            privileged: self.privileged.as_ref().map(z),
            head: z(&self.head),
        }
    }

    /// `(name, shape, values)` in lexicographic name order.
    pub fn tensors(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        let mut out = vec![
            ("audio.bias", vec![self.audio.outputs], self.audio.bias.as_slice()),
            (
                "audio.weight",
                vec![self.audio.outputs, self.audio.inputs],
                self.audio.weight.as_slice(),
            ),
            ("head.bias", vec![self.head.outputs], self.head.bias.as_slice()),
            (
                "head.weight",
                vec![self.head.outputs, self.head.inputs],
                self.head.weight.as_slice(),
            ),
        ];
        if let Some(p) = &self.privileged {
            out.push(("priv.bias", vec![p.outputs], p.bias.as_slice()));
            out.push(("priv.weight", vec![p.outputs, p.inputs], p.weight.as_slice()));
        }
        out
    }

    /// Mutable tensors in the same order as [`ParamSet::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let mut out: Vec<(&'static str, &mut [f64])> = vec![
            ("audio.bias", self.audio.bias.as_mut_slice()),
            ("audio.weight", self.audio.weight.as_mut_slice()),
            ("head.bias", self.head.bias.as_mut_slice()),
            ("head.weight", self.head.weight.as_mut_slice()),
        ];
        if let Some(p) = &mut self.privileged {
            out.push(("priv.bias", p.bias.as_mut_slice()));
            out.push(("priv.weight", p.weight.as_mut_slice()));
        }
        out
    }

    pub fn same_shape(&self, other: &ParamSet) -> bool {
        let shapes = |p: &ParamSet| p.tensors().into_iter().map(|(n, s, _)| (n, s)).collect::<Vec<_>>();
        shapes(self) == shapes(other)
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, _, v)| v.len()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors().iter().map(|(_, _, v)| sq_norm(v)).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for (_, t) in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= s);
        }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &ParamSet) {
        let others = other.tensors();
        for ((_, dst), (_, _, src)) in self.tensors_mut().into_iter().zip(others) {
            super::linalg::axpy(dst, alpha, src);
        }
    }

    /// First tensor holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        self.tensors()
            .into_iter()
            .find(|(_, _, v)| v.iter().any(|x| !x.is_finite()))
            .map(|(n, _, _)| n)
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &ParamSet) -> f64 {
        self.tensors()
            .iter()
            .zip(other.tensors())
            .flat_map(|((_, _, a), (_, _, b))| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }
}

/// A network: architecture, resolved activation, and parameter tensors.
#[derive(Clone)]
pub struct ModelParams {
    arch: Architecture,
    act: Arc<dyn Activation>,
    pub tensors: ParamSet,
}

impl fmt::Debug for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelParams")
            .field("arch", &self.arch)
            .field("num_params", &self.tensors.num_params())
            .finish()
    }
}

impl PartialEq for ModelParams {
    fn eq(&self, other: &Self) -> bool {
        self.arch == other.arch && self.tensors == other.tensors
    }
}

impl ModelParams {
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let act = activation(&arch.activation)?;
        let tensors = ParamSet::zeros(&arch);
        Ok(Self { arch, act, tensors })
    }

    /// Glorot-uniform weights, zero biases, drawn from the `Init` stream of `seed`.
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let act = activation(&arch.activation)?;
        let mut rng = stream(seed, Stream::Init);
        let audio = Dense::glorot(arch.input_dim, arch.hidden, &mut rng);
        let privileged = arch
            .privileged_dim
            .map(|d| Dense::glorot(d, arch.privileged_hidden, &mut rng));
        let head = Dense::glorot(arch.fused_dim(), arch.num_classes, &mut rng);
        Ok(Self {
            arch,
            act,
            tensors: ParamSet {
                audio,
                privileged,
                head,
            },
        })
    }

    pub fn from_tensors(arch: Architecture, tensors: ParamSet) -> Result<Self> {
        let reference = Self::zeros(arch)?;
        if !reference.tensors.same_shape(&tensors) {
            return Err(Error::ShapeMismatch(
                "tensor shapes do not match the architecture".into(),
            ));
        }
        if let Some(name) = tensors.first_non_finite() {
            return Err(Error::ShapeMismatch(format!("tensor `{name}` has non-finite entries")));
        }
        Ok(Self { tensors, ..reference })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn activation(&self) -> &dyn Activation {
        self.act.as_ref()
    }

    pub fn is_multimodal(&self) -> bool {
        self.arch.is_multimodal()
    }

    pub fn num_classes(&self) -> usize {
        self.arch.num_classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_order_is_lexicographic() {
        let p = ModelParams::init(Architecture::multimodal(6, 4, 3, 2, 3, "relu"), 1).unwrap();
        let names: Vec<&str> = p.tensors.tensors().iter().map(|(n, _, _)| *n).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(names.len(), 6);
        assert_eq!(p.tensors.num_params(), 6 * 4 + 4 + 3 * 2 + 2 + 6 * 3 + 3);
    }

    #[test]
    fn glorot_bounds_and_determinism() {
        let arch = Architecture::audio_only(50, 10, 3, "tanh");
        let a = ModelParams::init(arch.clone(), 4).unwrap();
        assert_eq!(a, ModelParams::init(arch.clone(), 4).unwrap());
        assert_ne!(a, ModelParams::init(arch, 5).unwrap());
        let limit = (6.0f64 / 60.0).sqrt();
        assert!(a.tensors.audio.weight.iter().all(|w| w.abs() <= limit));
        assert!(a.tensors.audio.bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ModelParams::zeros(Architecture::audio_only(0, 3, 3, "relu")).is_err());
        assert!(ModelParams::zeros(Architecture::audio_only(3, 3, 3, "swish")).is_err());
        let arch = Architecture::audio_only(4, 3, 2, "relu");
        let wrong = ParamSet::zeros(&Architecture::audio_only(5, 3, 2, "relu"));
        assert!(ModelParams::from_tensors(arch, wrong).is_err());
    }
}
