use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{ParamSet, PerExampleGrad};
use crate::rng::BoxMuller;

/// `g · min(1, C/‖g‖)`
pub fn clip_grad(g: PerExampleGrad, clip: f64) -> PerExampleGrad {
    let factor = clip_factor(g.l2_norm, clip);
    if factor == 1.0 {
        return g;
    }
    let mut grads = g.grads;
    grads.scale(factor);
    PerExampleGrad::new(grads)
}

pub(crate) fn clip_factor(norm: f64, clip: f64) -> f64 {
    if norm > clip {
        clip / norm
    } else {
        1.0
    }
}

/// Adds `N(0, σ²C²)` to every coordinate of `sum` and divides by `divisor`.
///
/// Noise is drawn tensor by tensor in name order, row-major within a tensor.
/// No draws are made when `sigma == 0`.
pub fn privatize_sum<R: Rng + ?Sized>(
    mut sum: ParamSet,
    divisor: f64,
    clip: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<ParamSet> {
    if !(divisor > 0.0) {
        return Err(Error::InvalidConfig("privatization divisor must be positive".into()));
    }
    if sigma > 0.0 {
        let std = sigma * clip;
        let mut gauss = BoxMuller::new();
        for (_, t) in sum.tensors_mut() {
            for v in t.iter_mut() {
                *v += std * gauss.sample(rng);
            }
        }
    }
    sum.scale(1.0 / divisor);
    Ok(sum)
}

/// `(Σ ḡ_i + N(0, σ²C²I)) / divisor` over clipped gradients.
pub fn privatize<R: Rng + ?Sized>(
    clipped: &[PerExampleGrad],
    template: &ParamSet,
    divisor: f64,
    clip: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<ParamSet> {
    let mut sum = template.zeros_like();
    for g in clipped {
        sum.add_scaled(1.0, &g.grads);
    }
    privatize_sum(sum, divisor, clip, sigma, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Architecture, ModelParams};
    use crate::rng::{stream, Stream};

    fn grad_with(values: &[f64]) -> PerExampleGrad {
        let arch = Architecture::audio_only(1, 1, 2, "relu");
        let mut g = ModelParams::zeros(arch).unwrap().tensors;
        let mut it = values.iter();
        for (_, t) in g.tensors_mut() {
            t.iter_mut().for_each(|x| *x = *it.next().unwrap());
        }
        PerExampleGrad::new(g)
    }

    fn flat(p: &ParamSet) -> Vec<f64> {
        p.tensors().iter().flat_map(|(_, _, v)| v.to_vec()).collect()
    }

    #[test]
    fn clipping() {
        // coordinates: audio.bias, audio.weight, head.bias ×2, head.weight ×2
        let g = grad_with(&[6.0, 8.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((g.l2_norm - 10.0).abs() < 1e-12);
        let c = clip_grad(g, 5.0);
        assert!((c.l2_norm - 5.0).abs() < 1e-9);
        assert_eq!(&flat(&c.grads)[..2], &[3.0, 4.0]);

        let small = grad_with(&[1.0, 2.0, 2.0, 0.0, 0.0, 0.0]);
        assert_eq!(clip_grad(small.clone(), 5.0), small);
        let zero = grad_with(&[0.0; 6]);
        assert_eq!(clip_grad(zero.clone(), 5.0), zero);
    }

    #[test]
    fn noiseless_privatize_is_mean() {
        let a = grad_with(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = grad_with(&[3.0, 2.0, 1.0, 0.0, -1.0, -2.0]);
        let mut rng = stream(0, Stream::Noise);
        let out = privatize(&[a.clone(), b], &a.grads, 2.0, 100.0, 0.0, &mut rng).unwrap();
        assert_eq!(flat(&out), vec![2.0, 2.0, 2.0, 2.0, 2.0, 2.0]);

        let big = clip_grad(grad_with(&[30.0, 40.0, 0.0, 0.0, 0.0, 0.0]), 5.0);
        let out = privatize(&[big], &a.grads, 1.0, 5.0, 0.0, &mut rng).unwrap();
        let v = flat(&out);
        assert!((v[0] / v[1] - 0.75).abs() < 1e-12);
        assert!(privatize(&[], &a.grads, 0.0, 5.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn noise_standard_deviation() {
        let template = grad_with(&[0.0; 6]).grads;
        let mut rng = stream(42, Stream::Noise);
        let draws = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..draws {
            let out = privatize(&[], &template, 32.0, 5.0, 1.0, &mut rng).unwrap();
            let v = out.audio.bias[0];
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / draws as f64;
        let std = (sum_sq / draws as f64 - mean * mean).sqrt();
        let want = 5.0 / 32.0;
        assert!((std - want).abs() / want < 0.02, "{std}");
    }
}
