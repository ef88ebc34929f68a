//! The guided filter as one CCD pass over
//!
//! ```text
//! min_{q,a,b}  sum_k sum_{i in w_k} (a_k I_i + b_k - q_i)^2 + eps a_k^2
//! ```
//!
//! The coefficient step is the per-window ridge regression of `q` on the
//! guidance; the output step averages the per-window linear predictions.
//! Rolling the filter continues the descent.

use crate::boxops::{box_mean, box_stats};
use crate::error::{check_eps, check_iters, Result};
use crate::image::{EnergyReport, Image, WindowSpec};

/// Per-window linear coefficients, indexed by window centre.
#[derive(Debug, Clone, PartialEq)]
pub struct GfCoeffs {
    pub a: Image,
    pub b: Image,
}

/// Ridge regression of `p` on `guide` in every window.
pub fn gf_coeffs(p: &Image, guide: &Image, w: WindowSpec, eps: f64) -> Result<GfCoeffs> {
    check_eps("eps", eps)?;
    coeffs_unchecked(p, guide, w, eps)
}

/// Same as [`gf_coeffs`] without the `eps > 0` check. With `eps = 0`
/// windows of constant guidance divide by zero.
pub(crate) fn coeffs_unchecked(p: &Image, guide: &Image, w: WindowSpec, eps: f64) -> Result<GfCoeffs> {
    p.check_same_shape(guide)?;
    let stats_i = box_stats(guide, w)?;
    let mean_i = &stats_i.mean;
    let mean_p = box_mean(p, w)?;
    let mean_ip = box_mean(&guide.zip_map(p, |a, b| a * b)?, w)?;
    let mean_ii = box_mean(&guide.map(|v| v * v), w)?;

    let n = p.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let var = (mean_ii[i] - mean_i[i] * mean_i[i]).max(0.0);
        let cov = mean_ip[i] - mean_i[i] * mean_p[i];
        let ak = cov / (var + eps);
        a.push(ak);
        b.push(mean_p[i] - ak * mean_i[i]);
    }
    Ok(GfCoeffs {
        a: p.with_data_of(a),
        b: p.with_data_of(b),
    })
}

/// q_i = E_w(a)_i I_i + E_w(b)_i.
pub fn gf_apply(coeffs: &GfCoeffs, guide: &Image, w: WindowSpec) -> Result<Image> {
    coeffs.a.check_same_shape(guide)?;
    coeffs.b.check_same_shape(guide)?;
    let ma = box_mean(&coeffs.a, w)?;
    let mb = box_mean(&coeffs.b, w)?;
    let data = (0..guide.len()).map(|i| ma[i] * guide[i] + mb[i]).collect();
    Ok(guide.with_data_of(data))
}

/// One guided-filter pass of `p` under guidance `guide`.
pub fn gf(p: &Image, guide: &Image, w: WindowSpec, eps: f64) -> Result<Image> {
    gf_apply(&gf_coeffs(p, guide, w, eps)?, guide, w)
}

/// Rolling guided filter: `[q^1, ..., q^iters]` with q^0 = p and
/// q^{n+1} = gf(q^n, guide). Coefficients are refit on every pass.
pub fn gf_roll(p: &Image, guide: &Image, w: WindowSpec, eps: f64, iters: usize) -> Result<Vec<Image>> {
    check_iters(iters)?;
    let mut out: Vec<Image> = Vec::with_capacity(iters);
    for _ in 0..iters {
        let prev = out.last().unwrap_or(p);
        let next = gf(prev, guide, w, eps)?;
        out.push(next);
    }
    Ok(out)
}

/// Exact value of the guided-filter objective at `(q, a, b)`, by explicit
/// summation over every window and member pixel.
pub fn energy_gf(q: &Image, coeffs: &GfCoeffs, guide: &Image, w: WindowSpec, eps: f64) -> Result<EnergyReport> {
    let (data, ridge) = window_fit_energy(q, coeffs, guide, w, eps)?;
    Ok(EnergyReport {
        data,
        ridge,
        ..Default::default()
    })
}

/// `sum_k sum_{i in w_k} (a_k G_i + b_k - q_i)^2` and `sum_k |w_k| eps a_k^2`.
pub(crate) fn window_fit_energy(
    q: &Image,
    coeffs: &GfCoeffs,
    guide: &Image,
    w: WindowSpec,
    eps: f64,
) -> Result<(f64, f64)> {
    q.check_same_shape(guide)?;
    q.check_same_shape(&coeffs.a)?;
    q.check_same_shape(&coeffs.b)?;
    let (width, height) = q.shape();
    w.validate(width, height)?;
    let mut data = 0.0;
    let mut ridge = 0.0;
    for ky in 0..height {
        for kx in 0..width {
            let k = ky * width + kx;
            let (ak, bk) = (coeffs.a[k], coeffs.b[k]);
            let members = w.members(kx, ky, width, height);
            for &i in &members {
                let r = ak * guide[i] + bk - q[i];
                data += r * r;
            }
            ridge += members.len() as f64 * eps * ak * ak;
        }
    }
    Ok((data, ridge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxops::box_var;
    use crate::image::Boundary;
    use crate::synth::uniform;

    fn c(v: f64, n: usize) -> Image {
        Image::new(n, n, v).unwrap()
    }

    /// Per-window 2x2 normal equations of the ridge fit, solved directly.
    fn naive_coeffs(p: &Image, guide: &Image, w: WindowSpec, eps: f64) -> GfCoeffs {
        let (width, height) = p.shape();
        let mut a = Image::new(width, height, 0.0).unwrap();
        let mut b = a.clone();
        for ky in 0..height {
            for kx in 0..width {
                let m = w.members(kx, ky, width, height);
                let n = m.len() as f64;
                let (mut si, mut sii, mut sp, mut sip) = (0.0, 0.0, 0.0, 0.0);
                for &i in &m {
                    si += guide[i];
                    sii += guide[i] * guide[i];
                    sp += p[i];
                    sip += guide[i] * p[i];
                }
                // [sii + n eps, si; si, n] [a; b] = [sip; sp]
                let (m11, m12, m22) = (sii + n * eps, si, n);
                let det = m11 * m22 - m12 * m12;
                a.set(kx, ky, (sip * m22 - m12 * sp) / det);
                b.set(kx, ky, (m11 * sp - m12 * sip) / det);
            }
        }
        GfCoeffs { a, b }
    }

    #[test]
    fn constant_input_gives_zero_slope() {
        let guide = uniform(8, 8, 1);
        let co = gf_coeffs(&c(0.4, 8), &guide, WindowSpec::truncate(2), 0.1).unwrap();
        assert!(co.a.data().iter().all(|v| v.abs() < 1e-14));
        assert!(co.b.max_abs_diff(&c(0.4, 8)) < 1e-14);
    }

    #[test]
    fn self_guidance_without_ridge_is_identity_fit() {
        let p = uniform(8, 8, 5);
        let co = coeffs_unchecked(&p, &p, WindowSpec::truncate(1), 0.0).unwrap();
        assert!(co.a.max_abs_diff(&c(1.0, 8)) < 1e-9);
        assert!(co.b.max_abs_diff(&c(0.0, 8)) < 1e-9);
    }

    #[test]
    fn coeffs_match_normal_equations() {
        let p = uniform(8, 8, 7);
        let guide = uniform(8, 8, 8);
        for b in [Boundary::Truncate, Boundary::Periodic] {
            let w = WindowSpec::new(2, b);
            let fast = gf_coeffs(&p, &guide, w, 0.1).unwrap();
            let slow = naive_coeffs(&p, &guide, w, 0.1);
            assert!(fast.a.max_abs_diff(&slow.a) < 1e-12);
            assert!(fast.b.max_abs_diff(&slow.b) < 1e-12);
        }
    }

    #[test]
    fn apply_examples() {
        let guide = uniform(6, 6, 2);
        let w = WindowSpec::truncate(2);
        let flat = GfCoeffs {
            a: c(0.0, 6),
            b: c(0.3, 6),
        };
        assert!(gf_apply(&flat, &guide, w).unwrap().max_abs_diff(&c(0.3, 6)) < 1e-15);
        let ident = GfCoeffs {
            a: c(1.0, 6),
            b: c(0.0, 6),
        };
        assert!(gf_apply(&ident, &guide, w).unwrap().max_abs_diff(&guide) < 1e-14);

        let co = GfCoeffs {
            a: uniform(6, 6, 3),
            b: uniform(6, 6, 4),
        };
        let q = gf_apply(&co, &guide, w).unwrap();
        for y in 0..6 {
            for x in 0..6 {
                let m = w.members(x, y, 6, 6);
                let est: f64 = m.iter().map(|&k| co.a[k] * guide.get(x, y) + co.b[k]).sum::<f64>() / m.len() as f64;
                assert!((q.get(x, y) - est).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constants_are_fixed_points() {
        let guide = uniform(9, 9, 4);
        for w in [WindowSpec::truncate(3), WindowSpec::periodic(3)] {
            let q = gf(&c(0.62, 9), &guide, w, 0.1).unwrap();
            assert!(q.max_abs_diff(&c(0.62, 9)) < 1e-14);
        }
    }

    #[test]
    fn huge_eps_is_double_box_blur() {
        let p = uniform(10, 10, 1);
        let guide = uniform(10, 10, 2);
        let w = WindowSpec::truncate(2);
        let q = gf(&p, &guide, w, 1e12).unwrap();
        let blur = box_mean(&box_mean(&p, w).unwrap(), w).unwrap();
        assert!(q.max_abs_diff(&blur) < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = uniform(4, 4, 1);
        let w = WindowSpec::truncate(1);
        assert!(gf(&p, &p, w, 0.0).is_err());
        assert!(gf(&p, &p, w, -1.0).is_err());
        assert!(gf(&p, &uniform(4, 5, 1), w, 0.1).is_err());
        assert!(gf_roll(&p, &p, w, 0.1, 0).is_err());
    }

    #[test]
    fn roll_single_pass_and_constants() {
        let p = uniform(8, 8, 1);
        let guide = uniform(8, 8, 2);
        let w = WindowSpec::truncate(2);
        let one = gf_roll(&p, &guide, w, 0.1, 1).unwrap();
        assert_eq!(one, vec![gf(&p, &guide, w, 0.1).unwrap()]);
        for q in gf_roll(&c(0.5, 8), &guide, w, 0.1, 5).unwrap() {
            assert!(q.max_abs_diff(&c(0.5, 8)) < 1e-14);
        }
    }

    #[test]
    fn energy_trivial_states() {
        let guide = uniform(6, 6, 1);
        let w = WindowSpec::truncate(1);
        let fit = GfCoeffs {
            a: c(0.0, 6),
            b: c(0.7, 6),
        };
        assert_eq!(energy_gf(&c(0.7, 6), &fit, &guide, w, 0.1).unwrap().total(), 0.0);
        let zero = GfCoeffs {
            a: c(0.0, 6),
            b: c(0.0, 6),
        };
        assert_eq!(energy_gf(&c(0.0, 6), &zero, &guide, w, 0.1).unwrap().total(), 0.0);
    }

    #[test]
    fn energy_matches_pixel_major_summation() {
        // Same objective summed pixel-first: sum_i sum_{k in w_i}.
        let (q, guide) = (uniform(8, 8, 1), uniform(8, 8, 2));
        let co = GfCoeffs {
            a: uniform(8, 8, 3),
            b: uniform(8, 8, 4),
        };
        for w in [WindowSpec::truncate(1), WindowSpec::periodic(1)] {
            let e = energy_gf(&q, &co, &guide, w, 0.1).unwrap();
            let mut data = 0.0;
            let mut ridge = 0.0;
            for y in 0..8 {
                for x in 0..8 {
                    let i = y * 8 + x;
                    for k in w.members(x, y, 8, 8) {
                        data += (co.a[k] * guide[i] + co.b[k] - q[i]).powi(2);
                        ridge += 0.1 * co.a[k] * co.a[k];
                    }
                }
            }
            assert!((e.data - data).abs() < 1e-10 * data.max(1.0));
            assert!((e.ridge - ridge).abs() < 1e-10 * ridge.max(1.0));
        }
    }

    #[test]
    fn roll_descends_energy() {
        let p = uniform(12, 12, 9);
        let guide = uniform(12, 12, 10);
        let w = WindowSpec::truncate(2);
        let mut prev = f64::INFINITY;
        let mut state = p.clone();
        for q in std::iter::once(p.clone()).chain(gf_roll(&p, &guide, w, 0.05, 10).unwrap()) {
            state = q;
            let co = gf_coeffs(&state, &guide, w, 0.05).unwrap();
            let e = energy_gf(&state, &co, &guide, w, 0.05).unwrap().total();
            assert!(e <= prev + 1e-9);
            prev = e;
        }
        assert!(state.is_finite());
    }

    #[test]
    fn periodic_shift_equivariance() {
        let p = uniform(10, 8, 1);
        let guide = uniform(10, 8, 2);
        let w = WindowSpec::periodic(2);
        let lhs = gf(&p.roll(3, -2), &guide.roll(3, -2), w, 0.1).unwrap();
        let rhs = gf(&p, &guide, w, 0.1).unwrap().roll(3, -2);
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn variance_floor_keeps_slope_zero_on_flat_guidance() {
        let guide = c(0.5, 6);
        let p = uniform(6, 6, 1);
        let w = WindowSpec::truncate(1);
        assert!(box_var(&guide, w).unwrap().data().iter().all(|&v| v >= 0.0));
        let co = gf_coeffs(&p, &guide, w, 0.01).unwrap();
        assert!(co.a.data().iter().all(|v| v.abs() < 1e-12));
    }
}
