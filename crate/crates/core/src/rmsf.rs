//! Rolling mutual-structure filtering.
//!
//! Two tracks, the filtered input `q` and the filtered guidance `G`, are
//! coupled through the objective
//!
//! ```text
//! sum_k sum_{i in w_k} (a_k G_i + b_k - q_i)^2 + eps  a_k^2
//!                    + (c_k q_i + d_k - G_i)^2 + eps2 c_k^2
//! ```
//!
//! Minimizing over `q` with everything else fixed yields a per-pixel convex
//! combination of a forward guided filter and an inverse guided filter,
//! weighted by `alpha(x) = 1 / (1 + E_w(x^2))`; likewise for `G`. One
//! iteration is: fit both coefficient pairs, update `q`, refit both pairs
//! against the new `q`, update `G`. Every sub-step is an exact block
//! minimizer, so the objective never increases.
//!
//! The CGF variant swaps in the anchored filters (anchor `p` with weight
//! `lambda` on the input track, anchor `I` with weight `beta` on the
//! guidance track). [`naive_roll37`] is the cross-guided scheme without
//! inverse terms, kept as a baseline: it washes out structure.

use crate::boxops::box_mean;
use crate::cgf::anchor_weight;
use crate::error::{check_eps, check_iters, check_nonneg, Result};
use crate::gf::{gf, gf_apply, gf_coeffs, window_fit_energy, GfCoeffs};
use crate::igf::{icgf_update, igf_update};
use crate::image::{EnergyReport, Image, WindowSpec};

/// The pair of tracks after `iteration` passes.
#[derive(Debug, Clone, PartialEq)]
pub struct MutualState {
    pub q: Image,
    pub guide: Image,
    pub iteration: usize,
}

impl MutualState {
    pub fn new(p: &Image, guide: &Image) -> Result<Self> {
        p.check_same_shape(guide)?;
        Ok(Self {
            q: p.clone(),
            guide: guide.clone(),
            iteration: 0,
        })
    }
}

/// alpha_i(x) = 1 / (1 + E_w(x^2)_i), always in (0, 1].
pub fn alpha_weight(x: &Image, w: WindowSpec) -> Result<Image> {
    Ok(box_mean(&x.map(|v| v * v), w)?.map(|m| 1.0 / (1.0 + m)))
}

/// Optimal coefficient pairs for a state: (a, b) regress q on G with `eps`,
/// (c, d) regress G on q with `eps2`.
pub fn mutual_coeffs(state: &MutualState, w: WindowSpec, eps: f64, eps2: f64) -> Result<(GfCoeffs, GfCoeffs)> {
    Ok((
        gf_coeffs(&state.q, &state.guide, w, eps)?,
        gf_coeffs(&state.guide, &state.q, w, eps2)?,
    ))
}

fn blend(weight: &Image, x: &Image, y: &Image) -> Image {
    let data = (0..x.len())
        .map(|i| weight[i] * x[i] + (1.0 - weight[i]) * y[i])
        .collect();
    x.with_data_of(data)
}

/// Anchors of the CGF variant.
struct Anchors<'a> {
    lambda: f64,
    beta: f64,
    input: &'a Image,
    guide: &'a Image,
}

/// Forward filter from precomputed coefficients, optionally anchored.
fn forward(co: &GfCoeffs, guide: &Image, anchor: Option<(&Image, f64)>, w: WindowSpec) -> Result<Image> {
    let base = gf_apply(co, guide, w)?;
    match anchor {
        None => Ok(base),
        Some((g, lambda)) => {
            let alpha = anchor_weight(base.width(), base.height(), w, lambda)?;
            let data = (0..base.len())
                .map(|i| (1.0 - alpha[i]) * base[i] + alpha[i] * g[i])
                .collect();
            Ok(base.with_data_of(data))
        }
    }
}

/// Inverse filter of `p` from precomputed coefficients, optionally anchored.
fn inverse(co: &GfCoeffs, p: &Image, prior: &Image, anchor: Option<(&Image, f64)>, w: WindowSpec) -> Result<Image> {
    match anchor {
        None => igf_update(co, p, prior, w),
        Some((g, lambda)) => icgf_update(co, p, prior, g, w, lambda),
    }
}

fn step(state: &MutualState, w: WindowSpec, eps: f64, eps2: f64, anchors: Option<&Anchors>) -> Result<MutualState> {
    let (q, g) = (&state.q, &state.guide);
    let q_anchor = anchors.map(|a| (a.input, a.lambda));
    let g_anchor = anchors.map(|a| (a.guide, a.beta));

    // q-update: GF(q, G, eps) against IGF(G, q, eps2)
    let ab = gf_coeffs(q, g, w, eps)?;
    let cd = gf_coeffs(g, q, w, eps2)?;
    let q_next = blend(
        &alpha_weight(&cd.a, w)?,
        &forward(&ab, g, q_anchor, w)?,
        &inverse(&cd, g, q, g_anchor, w)?,
    );

    // G-update against the new q: GF(G, q', eps2) against IGF(q', G, eps).
    // The weight uses the refit slopes of the IGF term.
    let cd = gf_coeffs(g, &q_next, w, eps2)?;
    let ab = gf_coeffs(&q_next, g, w, eps)?;
    let g_next = blend(
        &alpha_weight(&ab.a, w)?,
        &forward(&cd, &q_next, g_anchor, w)?,
        &inverse(&ab, &q_next, g, q_anchor, w)?,
    );

    Ok(MutualState {
        q: q_next,
        guide: g_next,
        iteration: state.iteration + 1,
    })
}

/// One GF-based mutual-structure iteration.
pub fn gf_rmsf_step(state: &MutualState, eps: f64, eps2: f64, w: WindowSpec) -> Result<MutualState> {
    check_eps("eps", eps)?;
    check_eps("eps2", eps2)?;
    step(state, w, eps, eps2, None)
}

/// GF-based mutual-structure filtering from q^0 = p, G^0 = I.
pub fn gf_rmsf(p: &Image, guide: &Image, eps: f64, eps2: f64, w: WindowSpec, iters: usize) -> Result<MutualState> {
    Ok(gf_rmsf_trace(p, guide, eps, eps2, w, iters)?
        .pop()
        .expect("at least one iterate"))
}

/// Every iterate `[state^1, ..., state^iters]` of [`gf_rmsf`].
pub fn gf_rmsf_trace(
    p: &Image,
    guide: &Image,
    eps: f64,
    eps2: f64,
    w: WindowSpec,
    iters: usize,
) -> Result<Vec<MutualState>> {
    check_iters(iters)?;
    let mut state = MutualState::new(p, guide)?;
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        state = gf_rmsf_step(&state, eps, eps2, w)?;
        out.push(state.clone());
    }
    Ok(out)
}

/// CGF-based mutual-structure filtering; anchors are `p` (weight `lambda`)
/// for the input track and `I` (weight `beta`) for the guidance track.
#[allow(clippy::too_many_arguments)]
pub fn cgf_rmsf(
    p: &Image,
    guide: &Image,
    eps: f64,
    eps2: f64,
    lambda: f64,
    beta: f64,
    w: WindowSpec,
    iters: usize,
) -> Result<MutualState> {
    Ok(cgf_rmsf_trace(p, guide, eps, eps2, lambda, beta, w, iters)?
        .pop()
        .expect("at least one iterate"))
}

#[allow(clippy::too_many_arguments)]
pub fn cgf_rmsf_trace(
    p: &Image,
    guide: &Image,
    eps: f64,
    eps2: f64,
    lambda: f64,
    beta: f64,
    w: WindowSpec,
    iters: usize,
) -> Result<Vec<MutualState>> {
    check_eps("eps", eps)?;
    check_eps("eps2", eps2)?;
    check_nonneg("lambda", lambda)?;
    check_nonneg("beta", beta)?;
    check_iters(iters)?;
    let anchors = Anchors {
        lambda,
        beta,
        input: p,
        guide,
    };
    let mut state = MutualState::new(p, guide)?;
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        state = step(&state, w, eps, eps2, Some(&anchors))?;
        out.push(state.clone());
    }
    Ok(out)
}

/// Cross-guided rolling without inverse terms: both updates read the n-th
/// state, q' = GF(q, G), G' = GF(G, q).
pub fn naive_roll37(p: &Image, guide: &Image, eps: f64, w: WindowSpec, iters: usize) -> Result<MutualState> {
    Ok(naive_roll37_trace(p, guide, eps, w, iters)?
        .pop()
        .expect("at least one iterate"))
}

pub fn naive_roll37_trace(p: &Image, guide: &Image, eps: f64, w: WindowSpec, iters: usize) -> Result<Vec<MutualState>> {
    check_iters(iters)?;
    let mut state = MutualState::new(p, guide)?;
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        state = MutualState {
            q: gf(&state.q, &state.guide, w, eps)?,
            guide: gf(&state.guide, &state.q, w, eps)?,
            iteration: state.iteration + 1,
        };
        out.push(state.clone());
    }
    Ok(out)
}

/// Exact mutual objective at `(q, a, b, G, c, d)`.
pub fn energy_mutual(
    state: &MutualState,
    coeffs_ab: &GfCoeffs,
    coeffs_cd: &GfCoeffs,
    w: WindowSpec,
    eps: f64,
    eps2: f64,
) -> Result<EnergyReport> {
    let (d1, r1) = window_fit_energy(&state.q, coeffs_ab, &state.guide, w, eps)?;
    let (d2, r2) = window_fit_energy(&state.guide, coeffs_cd, &state.q, w, eps2)?;
    Ok(EnergyReport {
        data: d1 + d2,
        ridge: r1 + r2,
        ..Default::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgf::cgf;
    use crate::igf::{icgf, igf};
    use crate::synth::{texture, uniform};

    fn c(v: f64) -> Image {
        Image::new(16, 16, v).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let w = WindowSpec::truncate(2);
        assert!(alpha_weight(&c(0.0), w).unwrap().max_abs_diff(&c(1.0)) < 1e-15);
        assert!(alpha_weight(&c(1.0), w).unwrap().max_abs_diff(&c(0.5)) < 1e-15);
        assert!(alpha_weight(&c(3.0), w).unwrap().max_abs_diff(&c(0.1)) < 1e-15);
        let a = alpha_weight(&uniform(16, 16, 1).map(|v| 40.0 * v - 20.0), w).unwrap();
        assert!(a.data().iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn constants_are_preserved() {
        let w = WindowSpec::truncate(2);
        let s = gf_rmsf(&c(0.4), &c(0.4), 0.01, 0.01, w, 5).unwrap();
        assert!(s.q.max_abs_diff(&c(0.4)) < 1e-14);
        assert!(s.guide.max_abs_diff(&c(0.4)) < 1e-14);
        let s = cgf_rmsf(&c(0.4), &c(0.4), 0.01, 0.01, 0.1, 0.1, w, 5).unwrap();
        assert!(s.q.max_abs_diff(&c(0.4)) < 1e-14);
        let s = naive_roll37(&c(0.4), &c(0.4), 0.01, w, 5).unwrap();
        assert!(s.q.max_abs_diff(&c(0.4)) < 1e-14);
        assert_eq!(s.iteration, 5);
    }

    #[test]
    fn first_iterate_is_hand_composed() {
        let (p, guide) = (uniform(16, 16, 1), uniform(16, 16, 2));
        let w = WindowSpec::truncate(2);
        let (eps, eps2) = (0.01, 0.02);
        let s = gf_rmsf(&p, &guide, eps, eps2, w, 1).unwrap();

        let cd = gf_coeffs(&guide, &p, w, eps2).unwrap();
        let alpha = alpha_weight(&cd.a, w).unwrap();
        let f = gf(&p, &guide, w, eps).unwrap();
        let inv = igf(&guide, &p, w, eps2).unwrap();
        for i in 0..p.len() {
            let expect = alpha[i] * f[i] + (1.0 - alpha[i]) * inv[i];
            assert!((s.q[i] - expect).abs() < 1e-12);
            let (lo, hi) = (f[i].min(inv[i]), f[i].max(inv[i]));
            assert!(s.q[i] >= lo - 1e-12 && s.q[i] <= hi + 1e-12);
        }

        let q1 = &s.q;
        let ab = gf_coeffs(q1, &guide, w, eps).unwrap();
        let alpha = alpha_weight(&ab.a, w).unwrap();
        let f = gf(&guide, q1, w, eps2).unwrap();
        let inv = igf(q1, &guide, w, eps).unwrap();
        for i in 0..p.len() {
            let expect = alpha[i] * f[i] + (1.0 - alpha[i]) * inv[i];
            assert!((s.guide[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn cgf_variant_reduces_to_gf_variant() {
        let (p, guide) = (uniform(16, 16, 3), uniform(16, 16, 4));
        let w = WindowSpec::truncate(2);
        let a = gf_rmsf_trace(&p, &guide, 0.01, 0.02, w, 4).unwrap();
        let b = cgf_rmsf_trace(&p, &guide, 0.01, 0.02, 0.0, 0.0, w, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.q.max_abs_diff(&y.q) <= 1e-12);
            assert!(x.guide.max_abs_diff(&y.guide) <= 1e-12);
        }
    }

    #[test]
    fn cgf_variant_steps_are_convex() {
        let (p, guide) = (uniform(16, 16, 5), uniform(16, 16, 6));
        let w = WindowSpec::truncate(2);
        let (eps, eps2, lambda, beta) = (0.01, 0.01, 0.01, 0.01);
        let trace = cgf_rmsf_trace(&p, &guide, eps, eps2, lambda, beta, w, 5).unwrap();
        let mut prev = MutualState::new(&p, &guide).unwrap();
        for s in trace {
            let f = cgf(&prev.q, &prev.guide, &p, w, eps, lambda).unwrap();
            let inv = icgf(&prev.guide, &prev.q, &guide, w, eps2, beta).unwrap();
            for i in 0..p.len() {
                let (lo, hi) = (f[i].min(inv[i]), f[i].max(inv[i]));
                assert!(s.q[i] >= lo - 1e-12 && s.q[i] <= hi + 1e-12);
            }
            prev = s;
        }
    }

    #[test]
    fn naive_single_pass() {
        let (p, guide) = (uniform(16, 16, 7), uniform(16, 16, 8));
        let w = WindowSpec::truncate(2);
        let s = naive_roll37(&p, &guide, 0.05, w, 1).unwrap();
        assert_eq!(s.q, gf(&p, &guide, w, 0.05).unwrap());
        assert_eq!(s.guide, gf(&guide, &p, w, 0.05).unwrap());
    }

    #[test]
    fn energy_examples() {
        let w = WindowSpec::truncate(1);
        let zero = GfCoeffs { a: c(0.0), b: c(0.0) };
        let s0 = MutualState::new(&c(0.0), &c(0.0)).unwrap();
        assert_eq!(energy_mutual(&s0, &zero, &zero, w, 0.1, 0.2).unwrap().total(), 0.0);
        let fit = GfCoeffs { a: c(0.0), b: c(0.3) };
        let s = MutualState::new(&c(0.3), &c(0.3)).unwrap();
        assert_eq!(energy_mutual(&s, &fit, &fit, w, 0.1, 0.2).unwrap().total(), 0.0);

        // pixel-major re-summation
        let s = MutualState::new(&uniform(8, 8, 1), &uniform(8, 8, 2)).unwrap();
        let ab = GfCoeffs {
            a: uniform(8, 8, 3),
            b: uniform(8, 8, 4),
        };
        let cd = GfCoeffs {
            a: uniform(8, 8, 5),
            b: uniform(8, 8, 6),
        };
        let e = energy_mutual(&s, &ab, &cd, w, 0.1, 0.2).unwrap();
        let mut total = 0.0;
        for y in 0..8 {
            for x in 0..8 {
                let i = y * 8 + x;
                for k in w.members(x, y, 8, 8) {
                    total += (ab.a[k] * s.guide[i] + ab.b[k] - s.q[i]).powi(2) + 0.1 * ab.a[k].powi(2);
                    total += (cd.a[k] * s.q[i] + cd.b[k] - s.guide[i]).powi(2) + 0.2 * cd.a[k].powi(2);
                }
            }
        }
        assert!((e.total() - total).abs() < 1e-10 * total);
    }

    #[test]
    fn energy_descends() {
        let (p, guide) = (uniform(16, 16, 9), uniform(16, 16, 10));
        let w = WindowSpec::truncate(2);
        let (eps, eps2) = (0.01, 0.02);
        let mut state = MutualState::new(&p, &guide).unwrap();
        let (ab, cd) = mutual_coeffs(&state, w, eps, eps2).unwrap();
        let mut prev = energy_mutual(&state, &ab, &cd, w, eps, eps2).unwrap().total();
        for _ in 0..10 {
            state = gf_rmsf_step(&state, eps, eps2, w).unwrap();
            let (ab, cd) = mutual_coeffs(&state, w, eps, eps2).unwrap();
            let e = energy_mutual(&state, &ab, &cd, w, eps, eps2).unwrap().total();
            assert!(e <= prev + 1e-9, "{e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn self_input_is_not_a_fixed_point() {
        let (tex, _) = texture(32, 32, 3);
        let s = gf_rmsf(&tex, &tex, 0.01, 0.01, WindowSpec::truncate(2), 1).unwrap();
        assert!(s.q.max_abs_diff(&tex) > 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = uniform(8, 8, 1);
        let w = WindowSpec::truncate(1);
        assert!(gf_rmsf(&p, &p, 0.1, 0.1, w, 0).is_err());
        assert!(gf_rmsf(&p, &uniform(8, 7, 1), 0.1, 0.1, w, 1).is_err());
        assert!(gf_rmsf(&p, &p, 0.0, 0.1, w, 1).is_err());
        assert!(cgf_rmsf(&p, &p, 0.1, 0.1, -1.0, 0.0, w, 1).is_err());
        assert!(naive_roll37(&p, &p, 0.1, w, 0).is_err());
    }
}
