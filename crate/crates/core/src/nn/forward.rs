//! Single-point evaluation: forward pass, cross-entropy loss, and exact
//! reverse-mode gradients with respect to weights and inputs.
//!
//! The cross-entropy is always computed from the logits through a
//! log-sum-exp, never from saturated softmax values; attacks and training
//! both differentiate this fused form.

use crate::error::{Error, Result};
use crate::nn::{MlpArchitecture, OutputHead, WeightVector};

/// Gradients of a scalar loss with respect to the flat weight vector and the
/// input, both obtained from one backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub grad_w: Vec<f64>,
    pub grad_x: Vec<f64>,
}

/// Per-layer post-activation values from a forward pass. `activations[0]` is
/// the input itself; the final entry holds the logits.
struct Trace {
    activations: Vec<Vec<f64>>,
}

impl Trace {
    fn logits(&self) -> &[f64] {
        self.activations.last().expect("trace has layers")
    }
}

fn check_point(arch: &MlpArchitecture, w: &WeightVector, x: &[f64]) -> Result<()> {
    w.check_arch(arch)?;
    if x.len() != arch.input_dim() {
        return Err(Error::contract(format!(
            "input length {} does not match architecture input dim {}",
            x.len(),
            arch.input_dim()
        )));
    }
    Ok(())
}

fn check_label(arch: &MlpArchitecture, y: usize) -> Result<()> {
    if y >= arch.output_dim() {
        return Err(Error::contract(format!(
            "label {y} out of range for {} classes",
            arch.output_dim()
        )));
    }
    Ok(())
}

/// Forward pass recording every layer's post-activation output.
fn forward_trace(arch: &MlpArchitecture, w: &WeightVector, x: &[f64]) -> Result<Trace> {
    check_point(arch, w, x)?;
    let params = w.as_slice();
    let dims = arch.layer_dims();
    let last = dims.len() - 1;
    let mut activations = Vec::with_capacity(dims.len() + 1);
    activations.push(x.to_vec());

    let mut offset = 0;
    for (layer, &(fan_in, fan_out)) in dims.iter().enumerate() {
        let weights = &params[offset..offset + fan_in * fan_out];
        offset += fan_in * fan_out;
        let biases = &params[offset..offset + fan_out];
        offset += fan_out;

        let input = activations.last().expect("non-empty").clone();
        let mut out = Vec::with_capacity(fan_out);
        for row in 0..fan_out {
            let mut z = biases[row];
            let w_row = &weights[row * fan_in..(row + 1) * fan_in];
            for (wi, xi) in w_row.iter().zip(input.iter()) {
                z += wi * xi;
            }
            if !z.is_finite() {
                return Err(Error::numeric(format!(
                    "non-finite pre-activation in layer {layer}"
                )));
            }
            out.push(if layer == last { z } else { arch.activation().apply(z) });
        }
        activations.push(out);
    }
    Ok(Trace { activations })
}

/// Softmax computed stably (max subtracted before exponentiation).
fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `log(sum(exp(logits)))` computed stably.
fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln()
}

/// Evaluate the network at `x`, applying the output head.
pub fn forward(arch: &MlpArchitecture, w: &WeightVector, x: &[f64]) -> Result<Vec<f64>> {
    let trace = forward_trace(arch, w, x)?;
    let logits = trace.logits();
    Ok(match arch.output_head() {
        OutputHead::Softmax => softmax(logits),
        OutputHead::Identity => logits.to_vec(),
    })
}

/// Categorical cross-entropy of class `y`, computed from the logits.
pub fn loss(arch: &MlpArchitecture, w: &WeightVector, x: &[f64], y: usize) -> Result<f64> {
    check_label(arch, y)?;
    let trace = forward_trace(arch, w, x)?;
    let logits = trace.logits();
    Ok(log_sum_exp(logits) - logits[y])
}

/// Backward pass from a gradient on the logits. Returns gradients with
/// respect to the flat weights and the input.
fn backward(
    arch: &MlpArchitecture,
    w: &WeightVector,
    trace: &Trace,
    dlogits: Vec<f64>,
) -> Result<GradientPair> {
    let params = w.as_slice();
    let dims = arch.layer_dims();
    let mut grad_w = vec![0.0; params.len()];

    // Per-layer parameter offsets.
    let mut offsets = Vec::with_capacity(dims.len());
    let mut offset = 0;
    for &(fan_in, fan_out) in &dims {
        offsets.push(offset);
        offset += (fan_in + 1) * fan_out;
    }

    let mut dz = dlogits;
    for layer in (0..dims.len()).rev() {
        let (fan_in, fan_out) = dims[layer];
        let base = offsets[layer];
        let weights = &params[base..base + fan_in * fan_out];
        let input = &trace.activations[layer];

        let mut dinput = vec![0.0; fan_in];
        for row in 0..fan_out {
            let g = dz[row];
            let w_row = &weights[row * fan_in..(row + 1) * fan_in];
            let gw_row = &mut grad_w[base + row * fan_in..base + (row + 1) * fan_in];
            for col in 0..fan_in {
                gw_row[col] = g * input[col];
                dinput[col] += g * w_row[col];
            }
            grad_w[base + fan_out * fan_in + row] = g;
        }

        if layer == 0 {
            if dinput.iter().chain(grad_w.iter()).any(|v| !v.is_finite()) {
                return Err(Error::numeric("non-finite gradient".to_string()));
            }
            return Ok(GradientPair {
                grad_w,
                grad_x: dinput,
            });
        }

        // Chain through the activation of the layer below.
        let act = arch.activation();
        let below = &trace.activations[layer];
        dz = dinput
            .iter()
            .zip(below.iter())
            .map(|(&d, &a)| d * act.derivative_from_output(a))
            .collect();
    }
    unreachable!("layer 0 returns")
}

/// Exact gradients of the cross-entropy loss with respect to weights and
/// input, from one backward pass.
pub fn gradients(
    arch: &MlpArchitecture,
    w: &WeightVector,
    x: &[f64],
    y: usize,
) -> Result<GradientPair> {
    check_label(arch, y)?;
    let trace = forward_trace(arch, w, x)?;
    let mut dlogits = softmax(trace.logits());
    dlogits[y] -= 1.0;
    backward(arch, w, &trace, dlogits)
}

/// Mean of per-point gradients over a batch, matching the convention that a
/// batch loss is the mean of per-point losses.
pub fn mean_gradients(
    arch: &MlpArchitecture,
    w: &WeightVector,
    xs: &[Vec<f64>],
    ys: &[usize],
) -> Result<GradientPair> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::contract(
            "batch must be non-empty with matching inputs and labels",
        ));
    }
    let mut acc = GradientPair {
        grad_w: vec![0.0; arch.param_count()],
        grad_x: vec![0.0; arch.input_dim()],
    };
    for (x, &y) in xs.iter().zip(ys.iter()) {
        let g = gradients(arch, w, x, y)?;
        for (a, b) in acc.grad_w.iter_mut().zip(g.grad_w.iter()) {
            *a += b;
        }
        for (a, b) in acc.grad_x.iter_mut().zip(g.grad_x.iter()) {
            *a += b;
        }
    }
    let n = xs.len() as f64;
    acc.grad_w.iter_mut().for_each(|v| *v /= n);
    acc.grad_x.iter_mut().for_each(|v| *v /= n);
    Ok(acc)
}

/// Squared error `sum_i (f_i - target_i)^2` for identity-head networks.
pub fn squared_loss(
    arch: &MlpArchitecture,
    w: &WeightVector,
    x: &[f64],
    target: &[f64],
) -> Result<f64> {
    if arch.output_head() != OutputHead::Identity {
        return Err(Error::contract("squared loss requires an identity head"));
    }
    if target.len() != arch.output_dim() {
        return Err(Error::contract("target length does not match output dim"));
    }
    let out = forward(arch, w, x)?;
    Ok(out
        .iter()
        .zip(target.iter())
        .map(|(f, t)| (f - t) * (f - t))
        .sum())
}

/// Gradients of [`squared_loss`] with respect to weights and input.
pub fn squared_loss_gradients(
    arch: &MlpArchitecture,
    w: &WeightVector,
    x: &[f64],
    target: &[f64],
) -> Result<GradientPair> {
    if arch.output_head() != OutputHead::Identity {
        return Err(Error::contract("squared loss requires an identity head"));
    }
    if target.len() != arch.output_dim() {
        return Err(Error::contract("target length does not match output dim"));
    }
    let trace = forward_trace(arch, w, x)?;
    let dlogits: Vec<f64> = trace
        .logits()
        .iter()
        .zip(target.iter())
        .map(|(f, t)| 2.0 * (f - t))
        .collect();
    backward(arch, w, &trace, dlogits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arch(
        d: usize,
        hidden: Vec<usize>,
        k: usize,
        act: Activation,
        head: OutputHead,
    ) -> MlpArchitecture {
        MlpArchitecture::new(d, hidden, k, act, head).unwrap()
    }

    fn random_weights(arch: &MlpArchitecture, rng: &mut ChaCha8Rng) -> WeightVector {
        let values: Vec<f64> = (0..arch.param_count())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        WeightVector::from_vec(values).unwrap()
    }

    /// Independent straight-line evaluation of the layer recursion, written
    /// against the flat layout accessors rather than the production forward
    /// pass. Returns the logits and every pre-activation.
    fn naive_forward(arch: &MlpArchitecture, w: &WeightVector, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dims = arch.layer_dims();
        let mut current = x.to_vec();
        let mut preacts = Vec::new();
        for (layer, &(fan_in, fan_out)) in dims.iter().enumerate() {
            let mut next = Vec::new();
            for i in 0..fan_out {
                let mut z = w.as_slice()[WeightVector::bias_index(arch, layer, i)];
                for j in 0..fan_in {
                    z += w.as_slice()[WeightVector::weight_index(arch, layer, i, j)] * current[j];
                }
                preacts.push(z);
                if layer + 1 == dims.len() {
                    next.push(z);
                } else {
                    next.push(arch.activation().apply(z));
                }
            }
            current = next;
        }
        (current, preacts)
    }

    fn assert_close(a: f64, b: f64, tol: f64, ctx: &str) {
        assert!(
            (a - b).abs() <= tol,
            "{ctx}: {a} vs {b} (diff {})",
            (a - b).abs()
        );
    }

    #[test]
    fn zero_weights_give_uniform_softmax() {
        let arch = arch(2, vec![2], 2, Activation::Tanh, OutputHead::Softmax);
        let w = WeightVector::zeros(&arch);
        let out = forward(&arch, &w, &[0.3, -0.7]).unwrap();
        assert_eq!(out, vec![0.5, 0.5]);
    }

    #[test]
    fn scalar_composition_matches_tanh() {
        // 2 -> [1] -> 1 identity head; first layer weights (1, 0), bias 0,
        // output weight 1, bias 0: f(x) = tanh(x_0).
        let arch = arch(2, vec![1], 1, Activation::Tanh, OutputHead::Identity);
        let mut w = WeightVector::zeros(&arch);
        w.as_mut_slice()[WeightVector::weight_index(&arch, 0, 0, 0)] = 1.0;
        w.as_mut_slice()[WeightVector::weight_index(&arch, 1, 0, 0)] = 1.0;
        let out = forward(&arch, &w, &[0.5, 9.0]).unwrap();
        assert_close(out[0], 0.5f64.tanh(), 1e-15, "tanh composition");
        assert_close(out[0], 0.462117, 1e-6, "tanh(0.5)");
    }

    #[test]
    fn forward_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for head in [OutputHead::Softmax, OutputHead::Identity] {
            let arch = arch(2, vec![8], 2, Activation::Tanh, head);
            for _ in 0..20 {
                let w = random_weights(&arch, &mut rng);
                let x: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
                let (logits, _) = naive_forward(&arch, &w, &x);
                let expect = match head {
                    OutputHead::Softmax => softmax(&logits),
                    OutputHead::Identity => logits,
                };
                let got = forward(&arch, &w, &x).unwrap();
                for (g, e) in got.iter().zip(expect.iter()) {
                    assert_close(*g, *e, 1e-12, "forward vs naive");
                }
            }
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let arch = arch(3, vec![5, 4], 3, Activation::Sigmoid, OutputHead::Softmax);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = random_weights(&arch, &mut rng);
        let x = vec![0.1, -0.2, 0.4];
        let a = forward(&arch, &w, &x).unwrap();
        let b = forward(&arch, &w, &x).unwrap();
        assert_eq!(a, b, "bit-identical output for identical inputs");
    }

    #[test]
    fn softmax_normalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let arch = arch(4, vec![6], 5, Activation::LeakyRelu { slope: 0.01 }, OutputHead::Softmax);
        for _ in 0..50 {
            let w = random_weights(&arch, &mut rng);
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let out = forward(&arch, &w, &x).unwrap();
            let sum: f64 = out.iter().sum();
            assert_close(sum, 1.0, 1e-9, "softmax sum");
            assert!(out.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn loss_of_zero_weight_net_is_log_k() {
        let arch2 = arch(2, vec![2], 2, Activation::Tanh, OutputHead::Softmax);
        let w2 = WeightVector::zeros(&arch2);
        assert_close(loss(&arch2, &w2, &[0.1, 0.2], 0).unwrap(), 2f64.ln(), 1e-12, "ln 2");

        let arch10 = arch(2, vec![2], 10, Activation::Tanh, OutputHead::Softmax);
        let w10 = WeightVector::zeros(&arch10);
        assert_close(loss(&arch10, &w10, &[0.1, 0.2], 3).unwrap(), 10f64.ln(), 1e-12, "ln 10");
        assert_close(10f64.ln(), 2.302585, 1e-6, "ln 10 value");
    }

    #[test]
    fn loss_matches_extended_precision_softmax_log() {
        // Oracle: -log(softmax[y]) evaluated through naive forward with the
        // log taken on the explicitly normalized probability.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let arch = arch(3, vec![6], 4, Activation::Tanh, OutputHead::Softmax);
        for _ in 0..30 {
            let w = random_weights(&arch, &mut rng);
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = rng.random_range(0..4usize);
            let (logits, _) = naive_forward(&arch, &w, &x);
            let p = softmax(&logits);
            let oracle = -p[y].ln();
            assert_close(loss(&arch, &w, &x, y).unwrap(), oracle, 1e-10, "loss oracle");
        }
    }

    #[test]
    fn loss_rejects_out_of_range_label() {
        let arch = arch(2, vec![2], 2, Activation::Tanh, OutputHead::Softmax);
        let w = WeightVector::zeros(&arch);
        assert!(matches!(
            loss(&arch, &w, &[0.0, 0.0], 2),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn forward_rejects_dimension_mismatch() {
        let arch = arch(2, vec![2], 2, Activation::Tanh, OutputHead::Softmax);
        let w = WeightVector::zeros(&arch);
        assert!(matches!(forward(&arch, &w, &[0.0]), Err(Error::Contract(_))));
        let wrong = WeightVector::from_vec(vec![0.0; 3]).unwrap();
        assert!(matches!(
            forward(&arch, &wrong, &[0.0, 0.0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn zero_output_weights_make_grad_x_exactly_zero() {
        // Output layer weights all zero: logits are constant in x, so the
        // input gradient vanishes identically.
        let arch = arch(2, vec![4], 2, Activation::Tanh, OutputHead::Softmax);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut w = random_weights(&arch, &mut rng);
        for row in 0..2 {
            for col in 0..4 {
                w.as_mut_slice()[WeightVector::weight_index(&arch, 1, row, col)] = 0.0;
            }
        }
        let g = gradients(&arch, &w, &[0.3, -0.4], 1).unwrap();
        assert_eq!(g.grad_x, vec![0.0, 0.0]);
    }

    #[test]
    fn squared_loss_is_stationary_at_exact_prediction() {
        let arch = arch(2, vec![3], 1, Activation::Tanh, OutputHead::Identity);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let w = random_weights(&arch, &mut rng);
        let x = vec![0.25, -0.75];
        let target = forward(&arch, &w, &x).unwrap();
        let g = squared_loss_gradients(&arch, &w, &x, &target).unwrap();
        assert!(g.grad_x.iter().all(|&v| v == 0.0));
        assert!(g.grad_w.iter().all(|&v| v == 0.0));
        assert_eq!(squared_loss(&arch, &w, &x, &target).unwrap(), 0.0);
    }

    /// Central finite differences of the cross-entropy loss.
    fn fd_check(arch: &MlpArchitecture, w: &WeightVector, x: &[f64], y: usize) {
        let h = 1e-5;
        let g = gradients(arch, w, x, y).unwrap();
        for i in 0..w.len() {
            let mut wp = w.clone();
            wp.as_mut_slice()[i] += h;
            let mut wm = w.clone();
            wm.as_mut_slice()[i] -= h;
            let fd = (loss(arch, &wp, x, y).unwrap() - loss(arch, &wm, x, y).unwrap()) / (2.0 * h);
            let tol = 1e-8f64.max(1e-5 * fd.abs().max(g.grad_w[i].abs()));
            assert!(
                (g.grad_w[i] - fd).abs() <= tol,
                "grad_w[{i}]: {} vs fd {}",
                g.grad_w[i],
                fd
            );
        }
        for i in 0..x.len() {
            let mut xp = x.to_vec();
            xp[i] += h;
            let mut xm = x.to_vec();
            xm[i] -= h;
            let fd = (loss(arch, w, &xp, y).unwrap() - loss(arch, w, &xm, y).unwrap()) / (2.0 * h);
            let tol = 1e-8f64.max(1e-5 * fd.abs().max(g.grad_x[i].abs()));
            assert!(
                (g.grad_x[i] - fd).abs() <= tol,
                "grad_x[{i}]: {} vs fd {}",
                g.grad_x[i],
                fd
            );
        }
    }

    /// Leaky-ReLU fixtures must keep every pre-activation clear of the kink
    /// so central differences stay on one branch.
    fn kink_safe(arch: &MlpArchitecture, w: &WeightVector, x: &[f64]) -> bool {
        let (_, preacts) = naive_forward(arch, w, x);
        preacts.iter().all(|z| z.abs() > 1e-3)
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let activations = [
            Activation::Tanh,
            Activation::Sigmoid,
            Activation::LeakyRelu { slope: 0.01 },
        ];
        for act in activations {
            let arch = arch(3, vec![5, 4], 3, act, OutputHead::Softmax);
            let mut done = 0;
            while done < 8 {
                let w = random_weights(&arch, &mut rng);
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
                if matches!(act, Activation::LeakyRelu { .. }) && !kink_safe(&arch, &w, &x) {
                    continue;
                }
                let y = rng.random_range(0..3usize);
                fd_check(&arch, &w, &x, y);
                done += 1;
            }
        }
    }

    #[test]
    fn gradient_mean_is_linear() {
        // Mean-of-batch gradients equal the average of per-point gradients;
        // scaling the batch composition scales the gradient linearly.
        let arch = arch(2, vec![6], 2, Activation::Tanh, OutputHead::Softmax);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let w = random_weights(&arch, &mut rng);
        let xs: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let ys = vec![0, 1, 0, 1];
        let batch = mean_gradients(&arch, &w, &xs, &ys).unwrap();
        let mut manual = vec![0.0; arch.param_count()];
        let mut manual_x = vec![0.0; 2];
        for (x, &y) in xs.iter().zip(ys.iter()) {
            let g = gradients(&arch, &w, x, y).unwrap();
            for (m, v) in manual.iter_mut().zip(g.grad_w.iter()) {
                *m += v / 4.0;
            }
            for (m, v) in manual_x.iter_mut().zip(g.grad_x.iter()) {
                *m += v / 4.0;
            }
        }
        for (a, b) in batch.grad_w.iter().zip(manual.iter()) {
            assert_close(*a, *b, 1e-12, "batch grad_w linearity");
        }
        for (a, b) in batch.grad_x.iter().zip(manual_x.iter()) {
            assert_close(*a, *b, 1e-12, "batch grad_x linearity");
        }
    }
}
