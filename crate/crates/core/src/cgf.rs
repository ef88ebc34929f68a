//! Conservative guided filter.
//!
//! Adds the fidelity anchor `lambda * sum_k (q_k - g_k)^2` to the
//! guided-filter objective. The output step becomes the per-pixel convex
//! combination `(1 - alpha_i) GF(q) + alpha_i g` with
//! `alpha_i = lambda / (|w_i| + lambda)`, so rolling converges to a
//! non-trivial fixed point instead of draining the image.

use crate::error::{check_eps, check_iters, check_nonneg, Result};
use crate::gf::{gf, window_fit_energy, GfCoeffs};
use crate::image::{EnergyReport, Image, WindowSpec};

/// Per-pixel anchor weight `lambda / (|w_i| + lambda)`.
pub fn anchor_weight(width: usize, height: usize, w: WindowSpec, lambda: f64) -> Result<Image> {
    check_nonneg("lambda", lambda)?;
    Ok(w.counts(width, height)?.map(|n| lambda / (n + lambda)))
}

pub fn cgf(p: &Image, guide: &Image, anchor: &Image, w: WindowSpec, eps: f64, lambda: f64) -> Result<Image> {
    check_eps("eps", eps)?;
    p.check_same_shape(anchor)?;
    let alpha = anchor_weight(p.width(), p.height(), w, lambda)?;
    let base = gf(p, guide, w, eps)?;
    let data = (0..p.len())
        .map(|i| (1.0 - alpha[i]) * base[i] + alpha[i] * anchor[i])
        .collect();
    Ok(p.with_data_of(data))
}

/// Fixed-count rolling: `[q^1, ..., q^iters]` with q^0 = p.
pub fn cgf_roll(
    p: &Image,
    guide: &Image,
    anchor: &Image,
    w: WindowSpec,
    eps: f64,
    lambda: f64,
    iters: usize,
) -> Result<Vec<Image>> {
    check_iters(iters)?;
    let mut out: Vec<Image> = Vec::with_capacity(iters);
    for _ in 0..iters {
        let prev = out.last().unwrap_or(p);
        let next = cgf(prev, guide, anchor, w, eps, lambda)?;
        out.push(next);
    }
    Ok(out)
}

/// Result of tolerance-driven rolling.
#[derive(Debug, Clone)]
pub struct Convergence {
    pub output: Image,
    /// Passes performed.
    pub iterations: usize,
    /// `max |q^{n+1} - q^n|` of the last pass.
    pub last_step: f64,
    pub converged: bool,
}

/// Rolls until `max |q^{n+1} - q^n| < tol` or `max_iters` passes.
#[allow(clippy::too_many_arguments)]
pub fn cgf_roll_until(
    p: &Image,
    guide: &Image,
    anchor: &Image,
    w: WindowSpec,
    eps: f64,
    lambda: f64,
    tol: f64,
    max_iters: usize,
) -> Result<Convergence> {
    check_iters(max_iters)?;
    let mut q = p.clone();
    let mut last_step = f64::INFINITY;
    for n in 1..=max_iters {
        let next = cgf(&q, guide, anchor, w, eps, lambda)?;
        last_step = next.max_abs_diff(&q);
        q = next;
        if last_step < tol {
            return Ok(Convergence {
                output: q,
                iterations: n,
                last_step,
                converged: true,
            });
        }
    }
    Ok(Convergence {
        output: q,
        iterations: max_iters,
        last_step,
        converged: false,
    })
}

/// Exact conservative objective at `(q, a, b)` with anchor `g`.
pub fn energy_cgf(
    q: &Image,
    coeffs: &GfCoeffs,
    guide: &Image,
    anchor: &Image,
    w: WindowSpec,
    eps: f64,
    lambda: f64,
) -> Result<EnergyReport> {
    q.check_same_shape(anchor)?;
    let (data, ridge) = window_fit_energy(q, coeffs, guide, w, eps)?;
    let fid: f64 = q.data().iter().zip(anchor.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(EnergyReport {
        data,
        ridge,
        tv: 0.0,
        anchor: lambda * fid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{energy_gf, gf_coeffs, gf_roll};
    use crate::image::Boundary;
    use crate::synth::uniform;

    fn c(v: f64) -> Image {
        Image::new(16, 16, v).unwrap()
    }

    #[test]
    fn zero_lambda_is_gf() {
        let (p, guide, g) = (uniform(16, 16, 1), uniform(16, 16, 2), uniform(16, 16, 3));
        let w = WindowSpec::truncate(3);
        assert_eq!(
            cgf(&p, &guide, &g, w, 0.1, 0.0).unwrap(),
            gf(&p, &guide, w, 0.1).unwrap()
        );
        assert_eq!(
            cgf_roll(&p, &guide, &g, w, 0.1, 0.0, 4).unwrap(),
            gf_roll(&p, &guide, w, 0.1, 4).unwrap()
        );
    }

    #[test]
    fn huge_lambda_returns_anchor() {
        let (p, guide, g) = (uniform(16, 16, 1), uniform(16, 16, 2), uniform(16, 16, 3));
        let q = cgf(&p, &guide, &g, WindowSpec::truncate(2), 0.1, 1e12).unwrap();
        assert!(q.max_abs_diff(&g) < 1e-9);
    }

    #[test]
    fn matches_hand_composition() {
        let (p, guide, g) = (uniform(16, 16, 4), uniform(16, 16, 5), uniform(16, 16, 6));
        let (r, eps, lambda) = (6, 0.001, 0.01);
        let w = WindowSpec::truncate(r);
        let q = cgf(&p, &guide, &g, w, eps, lambda).unwrap();
        let base = gf(&p, &guide, w, eps).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                let n = w.members(x, y, 16, 16).len() as f64;
                let alpha = lambda / (n + lambda);
                let expect = (1.0 - alpha) * base.get(x, y) + alpha * g.get(x, y);
                assert!((q.get(x, y) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn output_between_gf_and_anchor() {
        let (p, guide, g) = (uniform(16, 16, 7), uniform(16, 16, 8), uniform(16, 16, 9));
        let w = WindowSpec::truncate(2);
        let q = cgf(&p, &guide, &g, w, 0.05, 3.0).unwrap();
        let base = gf(&p, &guide, w, 0.05).unwrap();
        for i in 0..q.len() {
            let (lo, hi) = (base[i].min(g[i]), base[i].max(g[i]));
            assert!(q[i] >= lo - 1e-15 && q[i] <= hi + 1e-15);
        }
    }

    #[test]
    fn constant_anchor_and_input_stay_put() {
        let guide = uniform(16, 16, 1);
        for q in cgf_roll(&c(0.3), &guide, &c(0.3), WindowSpec::truncate(2), 0.1, 0.5, 6).unwrap() {
            assert!(q.max_abs_diff(&c(0.3)) < 1e-14);
        }
        let one = cgf_roll(&c(0.3), &guide, &c(0.3), WindowSpec::truncate(2), 0.1, 0.5, 1).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn converges_to_non_constant_limit() {
        let p = uniform(16, 16, 12);
        let w = WindowSpec::truncate(1);
        let iterates = cgf_roll(&p, &p, &p, w, 0.01, 3.0, 50).unwrap();
        let steps: Vec<f64> = std::iter::once(&p)
            .chain(&iterates)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|s| s[1].max_abs_diff(s[0]))
            .collect();
        assert!(*steps.last().unwrap() < 1e-6, "last step {}", steps.last().unwrap());
        let limit = iterates.last().unwrap();
        assert!(limit.stddev() > 0.01 * p.stddev());

        let conv = cgf_roll_until(&p, &p, &p, w, 0.01, 3.0, 1e-6, 500).unwrap();
        assert!(conv.converged);
        assert!(conv.iterations <= 50);
        assert!(conv.output.max_abs_diff(&iterates[conv.iterations - 1]) == 0.0);
    }

    #[test]
    fn energy_examples() {
        let guide = uniform(16, 16, 2);
        let w = WindowSpec::truncate(1);
        let fit = GfCoeffs { a: c(0.0), b: c(0.5) };
        assert_eq!(
            energy_cgf(&c(0.5), &fit, &guide, &c(0.5), w, 0.1, 2.0).unwrap().total(),
            0.0
        );

        let (q, g) = (uniform(16, 16, 3), uniform(16, 16, 4));
        let co = GfCoeffs {
            a: uniform(16, 16, 5),
            b: uniform(16, 16, 6),
        };
        let e0 = energy_cgf(&q, &co, &guide, &g, w, 0.1, 0.0).unwrap();
        assert_eq!(e0.total(), energy_gf(&q, &co, &guide, w, 0.1).unwrap().total());

        let e = energy_cgf(&q, &co, &guide, &g, w, 0.1, 2.5).unwrap();
        let mut fid = 0.0;
        for i in (0..q.len()).rev() {
            fid += (q[i] - g[i]).powi(2);
        }
        assert!((e.anchor - 2.5 * fid).abs() < 1e-10);
    }

    #[test]
    fn roll_descends_energy_near_borders() {
        let p = uniform(12, 12, 21);
        let guide = uniform(12, 12, 22);
        let g = uniform(12, 12, 23);
        for b in [Boundary::Truncate, Boundary::Periodic] {
            let w = WindowSpec::new(2, b);
            let (eps, lambda) = (0.02, 4.0);
            let mut prev = f64::INFINITY;
            let iterates = cgf_roll(&p, &guide, &g, w, eps, lambda, 10).unwrap();
            for q in std::iter::once(&p).chain(&iterates) {
                let co = gf_coeffs(q, &guide, w, eps).unwrap();
                let e = energy_cgf(q, &co, &guide, &g, w, eps, lambda).unwrap().total();
                assert!(e <= prev + 1e-9);
                prev = e;
            }
        }
    }
}
