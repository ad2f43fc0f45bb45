//! Batched evaluation over many points at once.
//!
//! Training (HMC leapfrog steps, VI ELBO steps, SGD minibatches) needs the
//! summed cross-entropy and its weight gradient over thousands of points per
//! step; doing that point-by-point is an order of magnitude slower than the
//! matrix form. Rows are processed in fixed-size blocks, blocks optionally in
//! parallel, and partial results are merged in block order so results do not
//! depend on scheduling.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::{MlpArchitecture, OutputHead, WeightVector};

const BLOCK_ROWS: usize = 512;

/// Per-layer parameters as ndarray matrices.
struct LayerMats {
    /// `(fan_out, fan_in)`.
    w: Array2<f64>,
    b: Array1<f64>,
}

fn layer_mats(arch: &MlpArchitecture, w: &WeightVector) -> Result<Vec<LayerMats>> {
    w.check_arch(arch)?;
    let params = w.as_slice();
    let mut mats = Vec::with_capacity(arch.layer_count());
    let mut offset = 0;
    for (fan_in, fan_out) in arch.layer_dims() {
        let w_len = fan_in * fan_out;
        let wm = Array2::from_shape_vec((fan_out, fan_in), params[offset..offset + w_len].to_vec())
            .expect("shape matches slice length");
        offset += w_len;
        let bv = Array1::from_vec(params[offset..offset + fan_out].to_vec());
        offset += fan_out;
        mats.push(LayerMats { w: wm, b: bv });
    }
    Ok(mats)
}

/// Forward through all layers, keeping post-activation values per layer.
/// The last entry holds raw logits.
fn forward_block(
    arch: &MlpArchitecture,
    mats: &[LayerMats],
    x: ArrayView2<'_, f64>,
) -> Result<Vec<Array2<f64>>> {
    let act = arch.activation();
    let last = mats.len() - 1;
    let mut acts: Vec<Array2<f64>> = Vec::with_capacity(mats.len() + 1);
    acts.push(x.to_owned());
    for (layer, m) in mats.iter().enumerate() {
        let z = acts.last().expect("non-empty").dot(&m.w.t()) + &m.b;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "non-finite pre-activation in layer {layer} (batched)"
            )));
        }
        acts.push(if layer == last {
            z
        } else {
            z.mapv(|v| act.apply(v))
        });
    }
    Ok(acts)
}

/// Row-wise stable softmax.
fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Summed cross-entropy and summed weight gradient over one block.
fn block_nll_grad(
    arch: &MlpArchitecture,
    mats: &[LayerMats],
    x: ArrayView2<'_, f64>,
    ys: &[usize],
) -> Result<(f64, Vec<f64>)> {
    let acts = forward_block(arch, mats, x)?;
    let logits = acts.last().expect("non-empty");

    let mut loss_sum = 0.0;
    let mut dz = softmax_rows(logits);
    for (i, (&y, row)) in ys.iter().zip(logits.rows()).enumerate() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
        loss_sum += lse - row[y];
        dz[[i, y]] -= 1.0;
    }

    let mut grad = vec![0.0; arch.param_count()];
    let dims = arch.layer_dims();
    let mut offsets = Vec::with_capacity(dims.len());
    let mut offset = 0;
    for &(fan_in, fan_out) in &dims {
        offsets.push(offset);
        offset += (fan_in + 1) * fan_out;
    }

    let act = arch.activation();
    for layer in (0..mats.len()).rev() {
        let (fan_in, fan_out) = dims[layer];
        let base = offsets[layer];
        let a_prev = &acts[layer];

        let gw = dz.t().dot(a_prev);
        let gb = dz.sum_axis(Axis(0));
        grad[base..base + fan_in * fan_out]
            .copy_from_slice(gw.as_slice().expect("contiguous"));
        grad[base + fan_in * fan_out..base + (fan_in + 1) * fan_out]
            .copy_from_slice(gb.as_slice().expect("contiguous"));

        if layer > 0 {
            let mut da = dz.dot(&mats[layer].w);
            da.zip_mut_with(a_prev, |d, &a| *d *= act.derivative_from_output(a));
            dz = da;
        }
    }

    if !loss_sum.is_finite() || grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite batched gradient".to_string()));
    }
    Ok((loss_sum, grad))
}

fn check_labels(arch: &MlpArchitecture, ys: &[usize]) -> Result<()> {
    if let Some(&bad) = ys.iter().find(|&&y| y >= arch.output_dim()) {
        return Err(Error::contract(format!(
            "label {bad} out of range for {} classes",
            arch.output_dim()
        )));
    }
    Ok(())
}

/// Summed cross-entropy and its summed weight gradient over `inputs`
/// (optionally restricted to `subset` row indices).
///
/// Returns sums, not means, matching the log-likelihood term of the
/// posterior; callers that want a mean divide by the row count.
pub fn dataset_nll_grad(
    arch: &MlpArchitecture,
    w: &WeightVector,
    inputs: ArrayView2<'_, f64>,
    labels: &[usize],
    subset: Option<&[usize]>,
) -> Result<(f64, Vec<f64>)> {
    if inputs.nrows() != labels.len() {
        return Err(Error::contract(
            "inputs and labels must have the same length",
        ));
    }
    if inputs.ncols() != arch.input_dim() {
        return Err(Error::contract(format!(
            "input width {} does not match architecture input dim {}",
            inputs.ncols(),
            arch.input_dim()
        )));
    }
    check_labels(arch, labels)?;
    let mats = layer_mats(arch, w)?;

    // Materialize the subset if one is requested.
    let owned: Option<(Array2<f64>, Vec<usize>)> = match subset {
        Some(idx) => {
            if idx.is_empty() {
                return Err(Error::contract("subset must be non-empty"));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= inputs.nrows()) {
                return Err(Error::contract(format!("subset index {bad} out of range")));
            }
            let mut x = Array2::zeros((idx.len(), inputs.ncols()));
            let mut ys = Vec::with_capacity(idx.len());
            for (r, &i) in idx.iter().enumerate() {
                x.row_mut(r).assign(&inputs.row(i));
                ys.push(labels[i]);
            }
            Some((x, ys))
        }
        None => None,
    };
    let (x, ys): (ArrayView2<'_, f64>, &[usize]) = match &owned {
        Some((x, ys)) => (x.view(), ys),
        None => (inputs, labels),
    };

    let n = x.nrows();
    let ranges: Vec<(usize, usize)> = (0..n)
        .step_by(BLOCK_ROWS)
        .map(|start| (start, (start + BLOCK_ROWS).min(n)))
        .collect();

    let partials: Result<Vec<(f64, Vec<f64>)>> = ranges
        .par_iter()
        .map(|&(start, end)| {
            block_nll_grad(arch, &mats, x.slice(s![start..end, ..]), &ys[start..end])
        })
        .collect();

    // Merge in block order so the result is independent of scheduling.
    let mut loss_sum = 0.0;
    let mut grad = vec![0.0; arch.param_count()];
    for (l, g) in partials? {
        loss_sum += l;
        for (acc, v) in grad.iter_mut().zip(g.iter()) {
            *acc += v;
        }
    }
    Ok((loss_sum, grad))
}

/// Softmax outputs for every row of `inputs`.
pub fn batch_probs(
    arch: &MlpArchitecture,
    w: &WeightVector,
    inputs: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    if inputs.ncols() != arch.input_dim() {
        return Err(Error::contract(format!(
            "input width {} does not match architecture input dim {}",
            inputs.ncols(),
            arch.input_dim()
        )));
    }
    let mats = layer_mats(arch, w)?;
    let acts = forward_block(arch, &mats, inputs)?;
    let logits = acts.last().expect("non-empty");
    Ok(match arch.output_head() {
        OutputHead::Softmax => softmax_rows(logits),
        OutputHead::Identity => logits.clone(),
    })
}
