//! Sliding-window sums, means, variances and covariances.
//!
//! All window statistics are computed with a row pass followed by a column
//! pass of running sums, so the cost per pixel does not depend on the
//! radius. Truncated windows are normalized by their actual clipped count.

use rayon::prelude::*;

use crate::error::Result;
use crate::image::{Boundary, Image, WindowSpec};

/// Window mean together with the per-pixel window count.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub mean: Image,
    pub count: Image,
}

pub fn box_stats(x: &Image, w: WindowSpec) -> Result<BoxStats> {
    let sum = box_sum(x, w)?;
    let count = w.counts(x.width(), x.height())?;
    let mean = sum.zip_map(&count, |s, c| s / c)?;
    Ok(BoxStats { mean, count })
}

/// Sum over the window of every pixel, O(1) per pixel.
pub fn box_sum(x: &Image, w: WindowSpec) -> Result<Image> {
    let (width, height) = x.shape();
    w.validate(width, height)?;
    if w.radius == 0 {
        return Ok(x.clone());
    }
    let r = w.radius;
    let src = x.data();

    let mut rows = vec![0.0; src.len()];
    rows.par_chunks_exact_mut(width)
        .zip(src.par_chunks_exact(width))
        .for_each(|(row_out, row_in)| slide_row(row_in, row_out, r, w.boundary));

    // Column pass in vertical strips: a row segment is re-read 2r+1 rows
    // after it is first added, and strips keep that reuse inside cache for
    // any radius.
    let mut out = vec![0.0; src.len()];
    for x0 in (0..width).step_by(STRIP) {
        let x1 = (x0 + STRIP).min(width);
        column_pass(&rows, &mut out, width, height, x0..x1, r, w.boundary);
    }
    Ok(x.with_data_of(out))
}

const STRIP: usize = 128;

fn column_pass(
    rows: &[f64],
    out: &mut [f64],
    width: usize,
    height: usize,
    cols: std::ops::Range<usize>,
    r: usize,
    boundary: Boundary,
) {
    let mut acc = vec![0.0; cols.len()];
    let row = |y: usize| &rows[y * width + cols.start..y * width + cols.end];
    let mut emit = |y: usize, acc: &[f64]| out[y * width + cols.start..y * width + cols.end].copy_from_slice(acc);
    match boundary {
        Boundary::Truncate => {
            for y in 0..=r.min(height - 1) {
                add_into(&mut acc, row(y));
            }
            for y in 0..height {
                emit(y, &acc);
                if y + r + 1 < height {
                    add_into(&mut acc, row(y + r + 1));
                }
                if y >= r {
                    sub_from(&mut acc, row(y - r));
                }
            }
        }
        Boundary::Periodic => {
            for d in 0..2 * r + 1 {
                add_into(&mut acc, row(wrap(d as isize - r as isize, height)));
            }
            for y in 0..height {
                emit(y, &acc);
                add_into(&mut acc, row((y + r + 1) % height));
                sub_from(&mut acc, row(wrap(y as isize - r as isize, height)));
            }
        }
    }
}

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

#[inline]
fn add_into(acc: &mut [f64], row: &[f64]) {
    for (a, v) in acc.iter_mut().zip(row) {
        *a += v;
    }
}

#[inline]
fn sub_from(acc: &mut [f64], row: &[f64]) {
    for (a, v) in acc.iter_mut().zip(row) {
        *a -= v;
    }
}

fn slide_row(src: &[f64], dst: &mut [f64], r: usize, boundary: Boundary) {
    let n = src.len();
    match boundary {
        Boundary::Truncate => {
            let mut sum: f64 = src[..=r.min(n - 1)].iter().sum();
            for c in 0..n {
                dst[c] = sum;
                if c + r + 1 < n {
                    sum += src[c + r + 1];
                }
                if c >= r {
                    sum -= src[c - r];
                }
            }
        }
        Boundary::Periodic => {
            let mut sum = 0.0;
            for d in 0..2 * r + 1 {
                sum += src[wrap(d as isize - r as isize, n)];
            }
            for c in 0..n {
                dst[c] = sum;
                sum += src[(c + r + 1) % n];
                sum -= src[wrap(c as isize - r as isize, n)];
            }
        }
    }
}

/// E_omega(x): window average.
pub fn box_mean(x: &Image, w: WindowSpec) -> Result<Image> {
    Ok(box_stats(x, w)?.mean)
}

/// D_omega(x) = E(x^2) - E(x)^2, clamped at 0.
pub fn box_var(x: &Image, w: WindowSpec) -> Result<Image> {
    let mut v = box_cov(x, x, w)?;
    for d in v.data_mut() {
        *d = d.max(0.0);
    }
    Ok(v)
}

/// E(xy) - E(x)E(y), unclamped.
pub fn box_cov(x: &Image, y: &Image, w: WindowSpec) -> Result<Image> {
    x.check_same_shape(y)?;
    let count = w.counts(x.width(), x.height())?;
    let mx = box_sum(x, w)?;
    let my = box_sum(y, w)?;
    let mxy = box_sum(&x.zip_map(y, |a, b| a * b)?, w)?;
    let data = (0..x.len())
        .map(|i| {
            let n = count[i];
            mxy[i] / n - (mx[i] / n) * (my[i] / n)
        })
        .collect();
    Ok(x.with_data_of(data))
}

/// Reference window sum by explicit enumeration, O(|omega|) per pixel.
pub fn naive_box_sum(x: &Image, w: WindowSpec) -> Result<Image> {
    let (width, height) = x.shape();
    w.validate(width, height)?;
    Image::from_fn(width, height, |cx, cy| {
        w.members(cx, cy, width, height).iter().map(|&j| x[j]).sum()
    })
}
