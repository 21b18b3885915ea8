//! Additive Gaussian noise on randomly chosen continuous attributes.
//!
//! For trial `t`, the attributes to noise are drawn from stream
//! `(seed, NOISE_SELECT, t)`, and the deviates for attribute `a` from stream
//! `(seed, NOISE_VALUES, t, a)`. Each deviate uses one Box-Muller draw from
//! two uniforms `u1 = 1 - U` and `u2 = U'`, consumed in cell order.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::index;

use crate::dataset::Dataset;
use crate::math;
use crate::rng::{self, tag};
use crate::{Error, Result};

/// Standard normal deviate from two uniforms, `sqrt(-2 ln u1) cos(2 pi u2)`.
pub fn box_muller(u1: f64, u2: f64) -> Result<f64> {
    if !(u1 > 0.0 && u1 <= 1.0) || !(0.0..1.0).contains(&u2) {
        return Err(Error::InvalidParameter(alloc::format!(
            "box_muller needs u1 in (0,1] and u2 in [0,1), got ({u1}, {u2})"
        )));
    }
    Ok(math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * PI * u2))
}

/// One standard normal draw from a stream.
pub fn standard_normal<R: rand::RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - rng::uniform(rng);
    let u2 = rng::uniform(rng);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * PI * u2)
}

/// Where the per-attribute noise scale comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaSource {
    /// Sample standard deviation of the clean data being noised.
    CleanTest,
    /// Sample standard deviation of the training data (supplied by the caller).
    Training,
}

impl SigmaSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SigmaSource::CleanTest => "clean-test",
            SigmaSource::Training => "training",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Fraction of continuous attributes noised per trial, in `[0, 1]`.
    pub attribute_fraction: f64,
    pub sigma_source: SigmaSource,
    pub trials: usize,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(attribute_fraction: f64, trials: usize, seed: u64) -> Self {
        NoiseSpec {
            attribute_fraction,
            sigma_source: SigmaSource::CleanTest,
            trials,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.attribute_fraction) {
            return Err(Error::InvalidParameter(
                "noise attribute fraction must lie in [0, 1]".into(),
            ));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of attributes noised out of `continuous` candidates (half-up rounding).
    pub fn selection_size(&self, continuous: usize) -> usize {
        (math::round(self.attribute_fraction * continuous as f64) as usize).min(continuous)
    }
}

/// A noised copy of `test` and the names of the attributes that were noised.
/// The noise scale is the clean sample standard deviation of each attribute.
pub fn inject_noise(test: &Dataset, spec: &NoiseSpec, trial: usize) -> Result<(Dataset, Vec<String>)> {
    let sigmas: Vec<f64> = test
        .continuous_stddevs()
        .into_iter()
        .map(|s| s.unwrap_or(0.0))
        .collect();
    inject_noise_with_sigmas(test, spec, trial, &sigmas)
}

/// As [`inject_noise`] with caller-supplied per-attribute scales (indexed by
/// attribute; entries for categorical attributes are ignored).
pub fn inject_noise_with_sigmas(
    test: &Dataset,
    spec: &NoiseSpec,
    trial: usize,
    sigmas: &[f64],
) -> Result<(Dataset, Vec<String>)> {
    spec.validate()?;
    let continuous = test.continuous_attributes();
    let count = spec.selection_size(continuous.len());
    if count == 0 {
        if spec.attribute_fraction > 0.0 && continuous.is_empty() {
            return Err(Error::NoContinuousAttributes);
        }
        return Ok((test.clone(), Vec::new()));
    }
    if sigmas.len() != test.n_attributes() {
        return Err(Error::InvalidParameter("one sigma per attribute required".into()));
    }
    let mut select = rng::stream(spec.seed, &[tag::NOISE_SELECT, trial as u64]);
    let mut chosen: Vec<usize> = index::sample(&mut select, continuous.len(), count)
        .into_iter()
        .map(|i| continuous[i])
        .collect();
    chosen.sort_unstable();

    let mut out = test.clone();
    let mut names = Vec::with_capacity(chosen.len());
    for &a in &chosen {
        let sigma = sigmas[a];
        let mut stream = rng::stream(spec.seed, &[tag::NOISE_VALUES, trial as u64, a as u64]);
        let noised: Vec<f64> = test
            .continuous(a)
            .expect("continuous attribute")
            .iter()
            .map(|&x| {
                if x.is_nan() {
                    x
                } else {
                    x + sigma * standard_normal(&mut stream)
                }
            })
            .collect();
        out = out.with_continuous_column(a, noised)?;
        names.push(test.schema().attribute(a).name.clone());
    }
    Ok((out, names))
}
