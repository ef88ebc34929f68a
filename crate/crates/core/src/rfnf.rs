//! Rolling flash / no-flash filtering.
//!
//! [`rfnf_seo`] is the additive detail-transfer iteration
//! `q' = GF(q, I_f) + lambda (I_f - GF(I_f, I_f))`. [`rfnf_gen`] anchors
//! the conservative filter to an enhanced flash image
//! `I_e = B + tau D` (B = GF(I_f, I_f), D = I_f - B), which is the exact
//! CCD solver of the anchored objective. For small anchor weight `alpha`
//! with `tau = lambda_seo / alpha` one step of the latter approaches one
//! step of the former, with a discrepancy linear in `alpha`.
//!
//! Naming: `lambda` of [`rfnf_seo`] is the detail gain; `lambda` of
//! [`rfnf_gen`] is the anchor weight. They are different quantities.

use crate::cgf::cgf_roll;
use crate::error::{check_eps, check_iters, Result};
use crate::gf::gf;
use crate::image::{Image, WindowSpec};

/// D = I_f - GF(I_f, I_f, eps).
pub fn detail_image(flash: &Image, w: WindowSpec, eps: f64) -> Result<Image> {
    let base = gf(flash, flash, w, eps)?;
    flash.zip_map(&base, |f, b| f - b)
}

/// I_e = B + tau D.
pub fn enhanced_image(flash: &Image, w: WindowSpec, eps: f64, tau: f64) -> Result<Image> {
    let base = gf(flash, flash, w, eps)?;
    flash.zip_map(&base, |f, b| b + tau * (f - b))
}

/// Additive rolling from q^0 = I_n; returns the final iterate.
pub fn rfnf_seo(no_flash: &Image, flash: &Image, w: WindowSpec, eps: f64, lambda: f64, iters: usize) -> Result<Image> {
    Ok(rfnf_seo_trace(no_flash, flash, w, eps, lambda, iters)?
        .pop()
        .expect("at least one iterate"))
}

pub fn rfnf_seo_trace(
    no_flash: &Image,
    flash: &Image,
    w: WindowSpec,
    eps: f64,
    lambda: f64,
    iters: usize,
) -> Result<Vec<Image>> {
    check_eps("eps", eps)?;
    check_iters(iters)?;
    no_flash.check_same_shape(flash)?;
    if !lambda.is_finite() {
        return Err(crate::Error::Parameter {
            name: "lambda",
            value: lambda,
            reason: "must be finite",
        });
    }
    let detail = detail_image(flash, w, eps)?;
    let mut out: Vec<Image> = Vec::with_capacity(iters);
    for _ in 0..iters {
        let prev = out.last().unwrap_or(no_flash);
        let base = gf(prev, flash, w, eps)?;
        out.push(base.zip_map(&detail, |b, d| b + lambda * d)?);
    }
    Ok(out)
}

/// Anchored rolling from q^0 = I_n toward I_e; returns the final iterate.
#[allow(clippy::too_many_arguments)]
pub fn rfnf_gen(
    no_flash: &Image,
    flash: &Image,
    w: WindowSpec,
    eps: f64,
    lambda: f64,
    tau: f64,
    iters: usize,
) -> Result<Image> {
    Ok(rfnf_gen_trace(no_flash, flash, w, eps, lambda, tau, iters)?
        .pop()
        .expect("at least one iterate"))
}

#[allow(clippy::too_many_arguments)]
pub fn rfnf_gen_trace(
    no_flash: &Image,
    flash: &Image,
    w: WindowSpec,
    eps: f64,
    lambda: f64,
    tau: f64,
    iters: usize,
) -> Result<Vec<Image>> {
    check_eps("eps", eps)?;
    no_flash.check_same_shape(flash)?;
    if !tau.is_finite() {
        return Err(crate::Error::Parameter {
            name: "tau",
            value: tau,
            reason: "must be finite",
        });
    }
    let enhanced = enhanced_image(flash, w, eps, tau)?;
    cgf_roll(no_flash, flash, &enhanced, w, eps, lambda, iters)
}
