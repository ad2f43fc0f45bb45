//! The two-interleaving-semicircles dataset.
//!
//! Class 0 lies on the upper unit semicircle `(cos t, sin t)`, class 1 on the
//! shifted lower semicircle `(1 - cos t, 0.5 - sin t)`, `t` uniform on
//! `[0, pi]`, with optional isotropic Gaussian noise. Without noise the
//! support is a one-dimensional submanifold of the plane, which is exactly
//! the degenerate-data setting the attack experiments probe.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{LabeledDataset, ManifoldTag};
use crate::error::{Error, Result};

/// Noiseless generator position for `class` at parameter `t`.
pub fn moon_point(class: usize, t: f64) -> [f64; 2] {
    match class {
        0 => [t.cos(), t.sin()],
        _ => [1.0 - t.cos(), 0.5 - t.sin()],
    }
}

/// Generate `n` points, `ceil(n/2)` of class 0 and `floor(n/2)` of class 1,
/// with isotropic Gaussian noise of standard deviation `noise_std`.
pub fn make_half_moons(n: usize, noise_std: f64, seed: u64) -> Result<LabeledDataset> {
    if n < 2 {
        return Err(Error::contract("half-moons needs at least 2 points"));
    }
    if !noise_std.is_finite() || noise_std < 0.0 {
        return Err(Error::contract("noise_std must be finite and >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n0 = n.div_ceil(2);

    let mut inputs = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = usize::from(i >= n0);
        let t = rng.random_range(0.0..std::f64::consts::PI);
        let p = moon_point(class, t);
        inputs.extend_from_slice(&p);
        labels.push(class);
    }
    if noise_std > 0.0 {
        for v in inputs.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += noise_std * z;
        }
    }
    LabeledDataset::new(inputs, labels, 2, 2, Some(ManifoldTag::HalfMoons))
}
