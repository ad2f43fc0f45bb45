//! Posterior construction: HMC sampling, mean-field Gaussian VI, SGD point
//! estimates, and deep ensembles, plus the wide Gaussian prior they share.
//!
//! Trainers are single-threaded state machines per run; multiple runs
//! (chains, ensemble members, grid points) execute concurrently with
//! independent derived seeds. Identical config and seed reproduce
//! bit-identical ensembles.

mod hmc;
mod posterior;
mod sgd;
mod vi;

pub use hmc::{hmc_chain, hmc_sample, leapfrog, HmcConfig, HmcStats};
pub use posterior::{log_posterior, log_posterior_grad, BnnPosterior};
pub use sgd::{deep_ensemble_train, sgd_train, SgdConfig};
pub use vi::{kl_diag_gaussian, vi_fit, vi_fit_model, vi_sample, ViConfig, ViPosterior};

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::nn::{Activation, MlpArchitecture, OutputHead, WeightVector};

/// Zero-mean isotropic Gaussian prior over the flat weight vector.
///
/// A wide Gaussian stands in for the (improper) flat prior: the standard
/// deviation defaults to [`DEFAULT_PRIOR_STD`] and is configurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrior {
    std: f64,
}

/// Default prior standard deviation.
pub const DEFAULT_PRIOR_STD: f64 = 10.0;

impl GaussianPrior {
    pub fn new(std: f64) -> Result<Self> {
        if !std.is_finite() || std <= 0.0 {
            return Err(Error::contract(format!(
                "prior std must be finite and > 0, got {std}"
            )));
        }
        Ok(Self { std })
    }

    pub fn wide() -> Self {
        Self {
            std: DEFAULT_PRIOR_STD,
        }
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    /// `log N(w; 0, std^2 I)`.
    pub fn log_density(&self, w: &[f64]) -> f64 {
        let n = w.len() as f64;
        let var = self.std * self.std;
        let sq: f64 = w.iter().map(|v| v * v).sum();
        -0.5 * n * (2.0 * std::f64::consts::PI * var).ln() - sq / (2.0 * var)
    }

    /// Add the gradient of [`log_density`](Self::log_density) into `out`.
    pub fn add_grad(&self, w: &[f64], out: &mut [f64]) {
        let var = self.std * self.std;
        for (o, v) in out.iter_mut().zip(w.iter()) {
            *o -= v / var;
        }
    }
}

/// How a [`PosteriorEnsemble`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Hmc,
    Vi,
    Sgd,
    DeepEnsemble,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Hmc => "hmc",
            Provenance::Vi => "vi",
            Provenance::Sgd => "sgd",
            Provenance::DeepEnsemble => "deep-ensemble",
        }
    }

    fn to_byte(self) -> u8 {
        match self {
            Provenance::Hmc => 0,
            Provenance::Vi => 1,
            Provenance::Sgd => 2,
            Provenance::DeepEnsemble => 3,
        }
    }

    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Provenance::Hmc),
            1 => Ok(Provenance::Vi),
            2 => Ok(Provenance::Sgd),
            3 => Ok(Provenance::DeepEnsemble),
            other => Err(Error::Format {
                expected: "provenance byte in {0..3}".to_string(),
                actual: other.to_string(),
            }),
        }
    }
}

/// An ordered collection of weight vectors drawn from (or standing in for)
/// the posterior, with the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorEnsemble {
    arch: MlpArchitecture,
    members: Vec<WeightVector>,
    provenance: Provenance,
    seed: u64,
}

impl PosteriorEnsemble {
    pub fn new(
        arch: MlpArchitecture,
        members: Vec<WeightVector>,
        provenance: Provenance,
        seed: u64,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::contract("ensemble must have at least one member"));
        }
        for (i, m) in members.iter().enumerate() {
            if m.len() != arch.param_count() {
                return Err(Error::contract(format!(
                    "member {i} has {} parameters, architecture expects {}",
                    m.len(),
                    arch.param_count()
                )));
            }
        }
        Ok(Self {
            arch,
            members,
            provenance,
            seed,
        })
    }

    pub fn arch(&self) -> &MlpArchitecture {
        &self.arch
    }

    pub fn members(&self) -> &[WeightVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Ensemble restricted to its first `n` members (prefix subsampling).
    pub fn prefix(&self, n: usize) -> Result<PosteriorEnsemble> {
        if n == 0 || n > self.members.len() {
            return Err(Error::contract(format!(
                "prefix of {n} members from an ensemble of {}",
                self.members.len()
            )));
        }
        Ok(PosteriorEnsemble {
            arch: self.arch.clone(),
            members: self.members[..n].to_vec(),
            provenance: self.provenance,
            seed: self.seed,
        })
    }

    /// Serialize: magic `BNNE`, version, provenance byte, member count,
    /// seed, architecture descriptor, then each member in its own format.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(b"BNNE")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&[self.provenance.to_byte()])?;
        w.write_all(&(self.members.len() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;

        w.write_all(&(self.arch.input_dim() as u64).to_le_bytes())?;
        w.write_all(&(self.arch.hidden_sizes().len() as u64).to_le_bytes())?;
        for &h in self.arch.hidden_sizes() {
            w.write_all(&(h as u64).to_le_bytes())?;
        }
        w.write_all(&(self.arch.output_dim() as u64).to_le_bytes())?;
        let (act, slope) = match self.arch.activation() {
            Activation::Tanh => (0u8, 0.0),
            Activation::Sigmoid => (1u8, 0.0),
            Activation::LeakyRelu { slope } => (2u8, slope),
        };
        w.write_all(&[act])?;
        w.write_all(&slope.to_le_bytes())?;
        w.write_all(&[match self.arch.output_head() {
            OutputHead::Softmax => 0u8,
            OutputHead::Identity => 1u8,
        }])?;

        for m in &self.members {
            m.write_to(w)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"BNNE" {
            return Err(Error::Format {
                expected: "BNNE".to_string(),
                actual: format!("{magic:?}"),
            });
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let version = u32::from_le_bytes(u32buf);
        if version != 1 {
            return Err(Error::Format {
                expected: "version 1".to_string(),
                actual: format!("version {version}"),
            });
        }
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)?;
        let provenance = Provenance::from_byte(byte[0])?;
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let count = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let seed = u64::from_le_bytes(u64buf);

        r.read_exact(&mut u64buf)?;
        let input_dim = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let n_hidden = u64::from_le_bytes(u64buf) as usize;
        let mut hidden = Vec::with_capacity(n_hidden);
        for _ in 0..n_hidden {
            r.read_exact(&mut u64buf)?;
            hidden.push(u64::from_le_bytes(u64buf) as usize);
        }
        r.read_exact(&mut u64buf)?;
        let output_dim = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut byte)?;
        let act_byte = byte[0];
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)?;
        let slope = f64::from_le_bytes(f64buf);
        let activation = match act_byte {
            0 => Activation::Tanh,
            1 => Activation::Sigmoid,
            2 => Activation::LeakyRelu { slope },
            other => {
                return Err(Error::Format {
                    expected: "activation byte in {0..2}".to_string(),
                    actual: other.to_string(),
                })
            }
        };
        r.read_exact(&mut byte)?;
        let output_head = match byte[0] {
            0 => OutputHead::Softmax,
            1 => OutputHead::Identity,
            other => {
                return Err(Error::Format {
                    expected: "output head byte in {0, 1}".to_string(),
                    actual: other.to_string(),
                })
            }
        };
        let arch = MlpArchitecture::new(input_dim, hidden, output_dim, activation, output_head)?;

        let mut members = Vec::with_capacity(count);
        for _ in 0..count {
            members.push(WeightVector::read_from(r)?);
        }
        PosteriorEnsemble::new(arch, members, provenance, seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }
}

/// Unnormalized log density with gradient; what HMC samples from.
pub trait Density {
    fn dim(&self) -> usize;
    fn logp_and_grad(&self, q: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// Data log-likelihood with gradient; what VI maximizes (the prior enters
/// through the analytic KL term instead).
pub trait Likelihood {
    fn dim(&self) -> usize;
    /// Number of observation units, for minibatch scaling.
    fn data_len(&self) -> usize;
    /// Summed log-likelihood and gradient over `subset` (all units if None).
    fn loglik_and_grad(&self, w: &[f64], subset: Option<&[usize]>) -> Result<(f64, Vec<f64>)>;
}

/// Draw initial weights: zero-mean Gaussian with std `1/sqrt(fan_in)` per
/// layer, biases zero.
pub fn init_weights(arch: &MlpArchitecture, seed: u64) -> WeightVector {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    init_weights_from_rng(arch, &mut rng)
}

pub(crate) fn init_weights_from_rng(arch: &MlpArchitecture, rng: &mut ChaCha8Rng) -> WeightVector {
    let mut values = Vec::with_capacity(arch.param_count());
    for (fan_in, fan_out) in arch.layer_dims() {
        let std = 1.0 / (fan_in as f64).sqrt();
        for _ in 0..fan_in * fan_out {
            let z: f64 = StandardNormal.sample(rng);
            values.push(std * z);
        }
        values.extend(std::iter::repeat_n(0.0, fan_out));
    }
    WeightVector::from_vec(values).expect("finite by construction")
}

/// Standard normal vector of length `n`.
pub(crate) fn standard_normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniform in `[0, 1)`.
pub(crate) fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}
