//! Small dense kernels. Reductions use a fixed four-way split so results are
//! reproducible bit-for-bit.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in 4 * chunks..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn sq_norm(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `y += alpha * x`
pub(crate) fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `out[o] = bias[o] + W[o, :] · x` for row-major `W` of shape `[outputs × x.len()]`.
pub(crate) fn affine(weight: &[f64], bias: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    bias.iter()
        .enumerate()
        .map(|(o, b)| b + dot(&weight[o * n..(o + 1) * n], x))
        .collect()
}

/// `W^T · d` for row-major `W` of shape `[d.len() × inputs]`.
pub(crate) fn transposed_matvec(weight: &[f64], d: &[f64], inputs: usize) -> Vec<f64> {
    let mut out = vec![0.0; inputs];
    for (o, &dv) in d.iter().enumerate() {
        axpy(&mut out, dv, &weight[o * inputs..(o + 1) * inputs]);
    }
    out
}

/// `W += alpha * d ⊗ x` (row-major, rows indexed by `d`).
pub(crate) fn outer_accumulate(weight: &mut [f64], alpha: f64, d: &[f64], x: &[f64]) {
    let n = x.len();
    for (o, &dv) in d.iter().enumerate() {
        let s = alpha * dv;
        if s != 0.0 {
            axpy(&mut weight[o * n..(o + 1) * n], s, x);
        }
    }
}
