//! BIC order selection over a (p, o, q) grid.
//!
//! Candidate fits are independent; [`select_best`] is a pure reduction
//! over their outcomes with a total order on the tie-breaking key, so the
//! selected order does not depend on the enumeration order.

use alloc::vec::Vec;
use core::cmp::Ordering;

use super::garch::{fit_garch, GarchFit, GarchOptions, GarchSpec, MAX_O, MAX_P, MAX_Q};
use crate::error::EstimationError;
use crate::market_data::ReturnSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridBounds {
    pub p_max: usize,
    pub o_max: usize,
    pub q_max: usize,
}

impl Default for GridBounds {
    fn default() -> Self {
        Self { p_max: MAX_P, o_max: MAX_O, q_max: MAX_Q }
    }
}

impl GridBounds {
    pub fn validate(&self) -> Result<(), EstimationError> {
        GarchSpec::new(self.p_max, self.o_max, self.q_max).map(|_| ())
    }

    /// All orders with `1 <= p <= p_max`, `0 <= o <= o_max`, `1 <= q <= q_max`.
    pub fn specs(&self) -> Vec<GarchSpec> {
        let mut out = Vec::with_capacity(self.p_max * (self.o_max + 1) * self.q_max);
        for p in 1..=self.p_max {
            for o in 0..=self.o_max {
                for q in 1..=self.q_max {
                    out.push(GarchSpec { p, o, q });
                }
            }
        }
        out
    }
}

/// Seed of the candidate fit for `spec`, independent of grid position.
pub fn spec_seed(seed: u64, spec: GarchSpec) -> u64 {
    let code = (spec.p as u64) << 16 | (spec.o as u64) << 8 | spec.q as u64;
    seed ^ code.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Ordering used for selection: BIC, then `p + o + q`, then `o`, then `q`,
/// then `p`.
pub fn compare(a: &GarchFit, b: &GarchFit) -> Ordering {
    a.bic
        .total_cmp(&b.bic)
        .then(a.spec.total_order().cmp(&b.spec.total_order()))
        .then(a.spec.o.cmp(&b.spec.o))
        .then(a.spec.q.cmp(&b.spec.q))
        .then(a.spec.p.cmp(&b.spec.p))
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub fit: GarchFit,
    /// `(spec, BIC)` of every candidate that produced a fit, admissible or
    /// not, sorted by spec.
    pub candidates: Vec<(GarchSpec, f64, bool)>,
    /// Orders whose estimation failed.
    pub failures: Vec<(GarchSpec, EstimationError)>,
}

/// Picks the admissible fit with the smallest selection key. A grid of one
/// spec returns that fit even when it is flagged non-stationary.
pub fn select_best<I>(outcomes: I) -> Result<Selection, EstimationError>
where
    I: IntoIterator<Item = (GarchSpec, Result<GarchFit, EstimationError>)>,
{
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for (spec, outcome) in outcomes {
        match outcome {
            Ok(fit) => fits.push(fit),
            Err(e) => failures.push((spec, e)),
        }
    }
    failures.sort_by_key(|(s, _)| *s);
    let mut candidates: Vec<(GarchSpec, f64, bool)> = fits.iter().map(|f| (f.spec, f.bic, f.is_admissible())).collect();
    candidates.sort_by_key(|c| c.0);
    let singleton = fits.len() + failures.len() == 1;
    let best = fits
        .into_iter()
        .filter(|f| singleton || f.is_admissible())
        .min_by(compare)
        .ok_or(EstimationError::NoAdmissibleFit)?;
    Ok(Selection { fit: best, candidates, failures })
}

/// Sequential grid search. Each candidate uses [`spec_seed`].
pub fn select_by_bic(
    subsample: &ReturnSeries,
    bounds: GridBounds,
    seed: u64,
    options: &GarchOptions,
) -> Result<Selection, EstimationError> {
    bounds.validate()?;
    select_best(
        bounds.specs().into_iter().map(|spec| (spec, fit_garch(subsample, spec, spec_seed(seed, spec), options))),
    )
}
