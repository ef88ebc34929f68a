//! Inverse guided filters: estimate a guidance image from a smoothed input.
//!
//! Both filters first regress `p` on the prior guidance `G0` per window
//! (the usual guided-filter coefficients), then solve for the guidance that
//! best explains `p` under those coefficients.
//!
//! These filters rarely give visually meaningful output on their own; they
//! are the structure-preserving half of mutual-structure filtering.

use crate::boxops::{box_mean, box_sum};
use crate::error::{check_eps, check_nonneg, Result};
use crate::gf::{coeffs_unchecked, GfCoeffs};
use crate::image::{Image, WindowSpec};

/// Pixels whose mean squared slope falls below this keep their prior.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// G_i = (E(a)_i p_i - E(ab)_i) / E(a^2)_i, keeping `G0` where E(a^2) is
/// below [`DEGENERACY_THRESHOLD`].
pub fn igf(p: &Image, prior: &Image, w: WindowSpec, eps: f64) -> Result<Image> {
    check_eps("eps", eps)?;
    igf_unchecked(p, prior, w, eps)
}

pub(crate) fn igf_unchecked(p: &Image, prior: &Image, w: WindowSpec, eps: f64) -> Result<Image> {
    let coeffs = coeffs_unchecked(p, prior, w, eps)?;
    igf_update(&coeffs, p, prior, w)
}

/// Guidance step of the inverse filter for given coefficients.
pub fn igf_update(coeffs: &GfCoeffs, p: &Image, prior: &Image, w: WindowSpec) -> Result<Image> {
    p.check_same_shape(prior)?;
    let ma = box_mean(&coeffs.a, w)?;
    let mab = box_mean(&coeffs.a.zip_map(&coeffs.b, |a, b| a * b)?, w)?;
    let maa = box_mean(&coeffs.a.map(|a| a * a), w)?;
    let data = (0..p.len())
        .map(|i| {
            if maa[i] < DEGENERACY_THRESHOLD {
                prior[i]
            } else {
                (ma[i] * p[i] - mab[i]) / maa[i]
            }
        })
        .collect();
    Ok(p.with_data_of(data))
}

/// Mask of pixels where [`igf`] uses the closed form (not the fallback).
pub fn igf_nondegenerate(p: &Image, prior: &Image, w: WindowSpec, eps: f64) -> Result<Vec<bool>> {
    let coeffs = coeffs_unchecked(p, prior, w, eps)?;
    let maa = box_mean(&coeffs.a.map(|a| a * a), w)?;
    Ok(maa.data().iter().map(|&v| v >= DEGENERACY_THRESHOLD).collect())
}

/// Anchored inverse filter:
/// G_i = (sum_{k in w_i} a_k p_i - a_k b_k + lambda g_i) / (sum_{k in w_i} a_k^2 + lambda).
///
/// With `lambda = 0` the same degeneracy fallback as [`igf`] applies.
pub fn icgf(p: &Image, prior: &Image, anchor: &Image, w: WindowSpec, eps: f64, lambda: f64) -> Result<Image> {
    check_eps("eps", eps)?;
    check_nonneg("lambda", lambda)?;
    p.check_same_shape(anchor)?;
    let coeffs = coeffs_unchecked(p, prior, w, eps)?;
    icgf_update(&coeffs, p, prior, anchor, w, lambda)
}

pub fn icgf_update(
    coeffs: &GfCoeffs,
    p: &Image,
    prior: &Image,
    anchor: &Image,
    w: WindowSpec,
    lambda: f64,
) -> Result<Image> {
    p.check_same_shape(prior)?;
    p.check_same_shape(anchor)?;
    let count = w.counts(p.width(), p.height())?;
    let sa = box_sum(&coeffs.a, w)?;
    let sab = box_sum(&coeffs.a.zip_map(&coeffs.b, |a, b| a * b)?, w)?;
    let saa = box_sum(&coeffs.a.map(|a| a * a), w)?;
    let data = (0..p.len())
        .map(|i| {
            let denom = saa[i] + lambda;
            if lambda == 0.0 && saa[i] / count[i] < DEGENERACY_THRESHOLD {
                prior[i]
            } else {
                (sa[i] * p[i] - sab[i] + lambda * anchor[i]) / denom
            }
        })
        .collect();
    Ok(p.with_data_of(data))
}
