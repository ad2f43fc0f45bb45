//! The unnormalized log posterior of a network on a dataset.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::inference::{Density, GaussianPrior, Likelihood};
use crate::nn::{batch, MlpArchitecture, WeightVector};

/// `sum_i log p(y_i | x_i, w) + log p(w)`, with the per-point log-likelihood
/// equal to minus the cross-entropy.
pub fn log_posterior(
    arch: &MlpArchitecture,
    w: &WeightVector,
    ds: &LabeledDataset,
    prior: &GaussianPrior,
) -> Result<f64> {
    let (nll, _) = batch::dataset_nll_grad(arch, w, ds.inputs_view(), ds.labels(), None)?;
    let lp = -nll + prior.log_density(w.as_slice());
    if !lp.is_finite() {
        return Err(Error::numeric("non-finite log posterior"));
    }
    Ok(lp)
}

/// Log posterior together with its gradient in the flat weights.
pub fn log_posterior_grad(
    arch: &MlpArchitecture,
    w: &WeightVector,
    ds: &LabeledDataset,
    prior: &GaussianPrior,
) -> Result<(f64, Vec<f64>)> {
    let (nll, nll_grad) = batch::dataset_nll_grad(arch, w, ds.inputs_view(), ds.labels(), None)?;
    let lp = -nll + prior.log_density(w.as_slice());
    if !lp.is_finite() {
        return Err(Error::numeric("non-finite log posterior"));
    }
    let mut grad: Vec<f64> = nll_grad.into_iter().map(|g| -g).collect();
    prior.add_grad(w.as_slice(), &mut grad);
    Ok((lp, grad))
}

/// A BNN posterior as an HMC target and a VI likelihood.
#[derive(Debug, Clone, Copy)]
pub struct BnnPosterior<'a> {
    pub arch: &'a MlpArchitecture,
    pub data: &'a LabeledDataset,
    pub prior: &'a GaussianPrior,
}

impl BnnPosterior<'_> {
    fn weights(&self, q: &[f64]) -> Result<WeightVector> {
        if q.len() != self.arch.param_count() {
            return Err(Error::contract(format!(
                "state length {} does not match parameter count {}",
                q.len(),
                self.arch.param_count()
            )));
        }
        WeightVector::from_vec(q.to_vec())
    }
}

impl Density for BnnPosterior<'_> {
    fn dim(&self) -> usize {
        self.arch.param_count()
    }

    fn logp_and_grad(&self, q: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w = self.weights(q)?;
        log_posterior_grad(self.arch, &w, self.data, self.prior)
    }
}

impl Likelihood for BnnPosterior<'_> {
    fn dim(&self) -> usize {
        self.arch.param_count()
    }

    fn data_len(&self) -> usize {
        self.data.len()
    }

    fn loglik_and_grad(&self, w: &[f64], subset: Option<&[usize]>) -> Result<(f64, Vec<f64>)> {
        let wv = self.weights(w)?;
        let (nll, grad) = batch::dataset_nll_grad(
            self.arch,
            &wv,
            self.data.inputs_view(),
            self.data.labels(),
            subset,
        )?;
        Ok((-nll, grad.into_iter().map(|g| -g).collect()))
    }
}
