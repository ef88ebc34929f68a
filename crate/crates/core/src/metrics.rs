//! MSE, PSNR and SSIM with peak 1.0 for [0,1] data.
//!
//! SSIM uses the customary 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
//! K2 = 0.03, averaged over the positions where the window fits entirely.

use crate::error::{Error, Result};
use crate::image::Image;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

pub fn mse(x: &Image, y: &Image) -> Result<f64> {
    x.check_same_shape(y)?;
    let s: f64 = x.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(s / x.len() as f64)
}

/// Mean over channels of the per-channel MSE.
pub fn mse_channels(x: &[Image], y: &[Image]) -> Result<f64> {
    channel_mean(x, y, mse)
}

/// `10 log10(peak^2 / mse)`; `+inf` for identical images.
pub fn psnr(x: &Image, y: &Image, peak: f64) -> Result<f64> {
    Ok(psnr_from_mse(mse(x, y)?, peak))
}

pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable 'valid' filtering: output is (w - 10) x (h - 10).
fn filter_valid(src: &[f64], width: usize, height: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = k.iter().zip(&row[x..x + SSIM_WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(j, kv)| kv * rows[(y + j) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity with dynamic range 1.
pub fn ssim(x: &Image, y: &Image) -> Result<f64> {
    x.check_same_shape(y)?;
    let (width, height) = x.shape();
    if width.min(height) < SSIM_WINDOW {
        return Err(Error::TooSmall {
            what: "ssim",
            min: SSIM_WINDOW,
        });
    }
    let k = gaussian_kernel();
    let (c1, c2) = ((SSIM_K1).powi(2), (SSIM_K2).powi(2));
    let xs = x.data();
    let ys = y.data();
    let xx: Vec<f64> = xs.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = ys.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = xs.iter().zip(ys).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(xs, width, height, &k);
    let mu_y = filter_valid(ys, width, height, &k);
    let e_xx = filter_valid(&xx, width, height, &k);
    let e_yy = filter_valid(&yy, width, height, &k);
    let e_xy = filter_valid(&xy, width, height, &k);

    let mut acc = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let sxx = e_xx[i] - mx * mx;
        let syy = e_yy[i] - my * my;
        let sxy = e_xy[i] - mx * my;
        acc += ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
    }
    Ok(acc / mu_x.len() as f64)
}

pub fn ssim_channels(x: &[Image], y: &[Image]) -> Result<f64> {
    channel_mean(x, y, ssim)
}

fn channel_mean(x: &[Image], y: &[Image], f: impl Fn(&Image, &Image) -> Result<f64>) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::ShapeMismatch {
            left: (x.len(), 0),
            right: (y.len(), 0),
        });
    }
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        s += f(a, b)?;
    }
    Ok(s / x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::uniform;

    fn c(v: f64) -> Image {
        Image::new(16, 16, v).unwrap()
    }

    /// Direct per-position SSIM with explicit 2D window weights.
    fn ssim_reference(x: &Image, y: &Image) -> f64 {
        let k = gaussian_kernel();
        let (w, h) = x.shape();
        let (c1, c2) = (1e-4, 9e-4);
        let mut acc = 0.0;
        let mut n = 0.0;
        for oy in 0..=h - 11 {
            for ox in 0..=w - 11 {
                let (mut mx, mut my) = (0.0, 0.0);
                for j in 0..11 {
                    for i in 0..11 {
                        let wt = k[i] * k[j];
                        mx += wt * x.get(ox + i, oy + j);
                        my += wt * y.get(ox + i, oy + j);
                    }
                }
                let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
                for j in 0..11 {
                    for i in 0..11 {
                        let wt = k[i] * k[j];
                        let (dx, dy) = (x.get(ox + i, oy + j) - mx, y.get(ox + i, oy + j) - my);
                        vx += wt * dx * dx;
                        vy += wt * dy * dy;
                        cxy += wt * dx * dy;
                    }
                }
                acc += (2.0 * mx * my + c1) * (2.0 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                n += 1.0;
            }
        }
        acc / n
    }

    #[test]
    fn mse_examples() {
        let x = uniform(16, 16, 1);
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        assert!((mse(&c(0.0), &c(0.1)).unwrap() - 0.01).abs() < 1e-15);
        assert!(mse(&x, &uniform(16, 15, 1)).is_err());
    }

    #[test]
    fn psnr_examples() {
        let x = uniform(16, 16, 1);
        assert_eq!(psnr(&x, &x, 1.0).unwrap(), f64::INFINITY);
        assert!((psnr_from_mse(0.01, 1.0) - 20.0).abs() < 1e-12);
        assert!((psnr_from_mse(0.0035, 1.0) - 24.559).abs() < 1e-3);
        assert!((psnr_from_mse(0.0066, 1.0) - 21.8046).abs() < 1e-3);
    }

    #[test]
    fn ssim_identity_and_bounds() {
        let x = uniform(16, 16, 2);
        assert_eq!(ssim(&x, &x).unwrap(), 1.0);
        let inv = x.map(|v| 1.0 - v);
        let s = ssim(&x, &inv).unwrap();
        assert!((-1.0..0.5).contains(&s));
        assert!((s - ssim_reference(&x, &inv)).abs() < 1e-10);
        let y = uniform(16, 16, 3);
        assert!((ssim(&x, &y).unwrap() - ssim_reference(&x, &y)).abs() < 1e-10);
    }

    #[test]
    fn ssim_flat_images_is_luminance_only() {
        let (m1, m2) = (0.4, 0.5);
        let s = ssim(&c(m1), &c(m2)).unwrap();
        let c1 = 1e-4;
        let expect = (2.0 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
        assert!((s - expect).abs() < 1e-12);
    }

    #[test]
    fn ssim_rejects_small_images() {
        let x = Image::new(10, 20, 0.5).unwrap();
        assert!(matches!(ssim(&x, &x), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn channel_means() {
        let a = vec![c(0.0), c(0.2)];
        let b = vec![c(0.1), c(0.2)];
        assert!((mse_channels(&a, &b).unwrap() - 0.005).abs() < 1e-15);
        assert!(mse_channels(&a, &b[..1]).is_err());
        assert_eq!(ssim_channels(&a, &a).unwrap(), 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn img() -> impl Strategy<Value = Image> {
            prop::collection::vec(0.0f64..1.0, 144).prop_map(|v| Image::from_vec(12, 12, v).unwrap())
        }

        proptest! {
            #[test]
            fn metric_invariants(x in img(), y in img(), z in img()) {
                let mxy = mse(&x, &y).unwrap();
                prop_assert!(mxy >= 0.0);
                prop_assert_eq!(mxy, mse(&y, &x).unwrap());
                let mxz = mse(&x, &z).unwrap();
                if mxy < mxz {
                    prop_assert!(psnr_from_mse(mxy, 1.0) > psnr_from_mse(mxz, 1.0));
                }
                let s = ssim(&x, &y).unwrap();
                prop_assert!((-1.0..=1.0).contains(&s));
                prop_assert_eq!(ssim(&x, &x).unwrap(), 1.0);
            }
        }
    }
}
