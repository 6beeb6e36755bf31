//! Fit-then-sample generators used by the attack and utility harnesses.

use crate::cvine::{fit_cvine_with, CVineModel, FitOptions};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// A generative model class. One fit can serve several variants (for the
/// C-vine: several truncation levels of the same fitted vine).
pub trait Synthesizer: Sync {
    type Fitted: Sync;

    fn fit(&self, train: &Dataset, stream: &RngStream) -> Result<Self::Fitted>;

    fn n_variants(&self) -> usize {
        1
    }

    fn sample(&self, fitted: &Self::Fitted, variant: usize, n: usize, stream: &RngStream) -> Result<Dataset>;
}

/// C-vine with a fixed covariate order, fitted once at the largest
/// requested level and truncated per variant.
#[derive(Debug, Clone)]
pub struct CVineSynthesizer {
    pub order: Vec<usize>,
    pub levels: Vec<usize>,
    pub options: FitOptions,
}

impl CVineSynthesizer {
    pub fn new(order: Vec<usize>, levels: Vec<usize>) -> Result<Self> {
        if levels.is_empty() || levels.contains(&0) {
            return Err(Error::Domain("truncation levels must be nonempty and positive".into()));
        }
        Ok(Self {
            order,
            levels,
            options: FitOptions::default(),
        })
    }

    pub fn t_max(&self) -> usize {
        *self.levels.iter().max().expect("levels are nonempty")
    }
}

/// Fitted vines, one per requested level.
pub struct FittedVines {
    levels: Vec<CVineModel>,
}

impl FittedVines {
    pub fn model(&self, variant: usize) -> &CVineModel {
        &self.levels[variant]
    }
}

impl Synthesizer for CVineSynthesizer {
    type Fitted = FittedVines;

    fn fit(&self, train: &Dataset, stream: &RngStream) -> Result<FittedVines> {
        let full = fit_cvine_with(train, &self.order, self.t_max(), stream, &self.options)?;
        let levels = self.levels.iter().map(|&t| full.truncate(t)).collect::<Result<_>>()?;
        Ok(FittedVines { levels })
    }

    fn n_variants(&self) -> usize {
        self.levels.len()
    }

    fn sample(&self, fitted: &FittedVines, variant: usize, n: usize, stream: &RngStream) -> Result<Dataset> {
        fitted.levels[variant].sample(n, stream)
    }
}

/// Wraps a closure `(train, n, stream) -> synthetic` as a single-variant
/// synthesizer whose fit just stores the training data.
pub struct FnSynthesizer<F>(pub F);

impl<F> Synthesizer for FnSynthesizer<F>
where
    F: Fn(&Dataset, usize, &RngStream) -> Result<Dataset> + Sync,
{
    type Fitted = Dataset;

    fn fit(&self, train: &Dataset, _stream: &RngStream) -> Result<Dataset> {
        Ok(train.clone())
    }

    fn sample(&self, fitted: &Dataset, _variant: usize, n: usize, stream: &RngStream) -> Result<Dataset> {
        (self.0)(fitted, n, stream)
    }
}
