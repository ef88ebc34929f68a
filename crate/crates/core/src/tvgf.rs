//! Total-variation guided filter.
//!
//! Objective: the guided-filter objective plus `lambda * sum_k TV^2(q_k)`,
//! with TV^2 the squared circular forward differences. The coefficient step
//! is unchanged; the output step solves
//!
//! ```text
//! (|w| + lambda * L) q = f,    f_i = sum_{k in w_i} a_k I_i + b_k
//! ```
//!
//! where L is the circular 5-point Laplacian. L is diagonalized by the 2D
//! DFT with eigenvalues `(2 - 2cos(2 pi u / W)) + (2 - 2cos(2 pi v / H))`,
//! so the solve is a pointwise division in frequency space. The window must
//! be periodic so that |w| is one scalar for every pixel.

use std::f64::consts::PI;

use realfft::RealFftPlanner;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::boxops::box_sum;
use crate::error::{check_eps, check_iters, check_nonneg, Error, Result};
use crate::gf::{gf_coeffs, window_fit_energy, GfCoeffs};
use crate::image::{Boundary, EnergyReport, Image, WindowSpec};

/// Row-major complex spectrum of a `width x height` image.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumField {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl SpectrumField {
    /// Unnormalized 2D DFT. Any size is supported (mixed radix / Bluestein),
    /// so no padding ever changes the periodic extension.
    pub fn forward(img: &Image) -> Self {
        let (width, height) = img.shape();
        let mut data: Vec<Complex64> = img.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut data, width, height, false);
        Self { width, height, data }
    }

    /// Inverse 2D DFT with 1/(W H) normalization; returns the real part and
    /// the largest discarded imaginary magnitude.
    pub fn inverse(&self) -> (Image, f64) {
        let mut data = self.data.clone();
        fft2(&mut data, self.width, self.height, true);
        let scale = 1.0 / (self.width * self.height) as f64;
        let mut max_imag = 0.0f64;
        let real = data
            .iter()
            .map(|c| {
                max_imag = max_imag.max((c.im * scale).abs());
                c.re * scale
            })
            .collect();
        let img = Image::from_vec(self.width, self.height, real).expect("spectrum shape is valid");
        (img, max_imag)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Coefficient at horizontal frequency `u`, vertical frequency `v`.
    pub fn at(&self, u: usize, v: usize) -> Complex64 {
        self.data[v * self.width + u]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Pointwise division by a real field of the same shape.
    pub fn divide_by(&mut self, denom: &Image) {
        assert_eq!((self.width, self.height), denom.shape());
        for (c, &d) in self.data.iter_mut().zip(denom.data()) {
            *c /= d;
        }
    }
}

fn fft2(data: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
    } else {
        (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
    };
    row_fft.process(data);
    let mut t = transpose(data, width, height);
    col_fft.process(&mut t);
    let back = transpose(&t, height, width);
    data.copy_from_slice(&back);
}

/// Blocked transpose of a row-major `width x height` buffer.
fn transpose(src: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    const B: usize = 32;
    let mut dst = vec![Complex64::new(0.0, 0.0); src.len()];
    for y0 in (0..height).step_by(B) {
        for x0 in (0..width).step_by(B) {
            for y in y0..(y0 + B).min(height) {
                for x in x0..(x0 + B).min(width) {
                    dst[x * height + y] = src[y * width + x];
                }
            }
        }
    }
    dst
}

/// `|w| + lambda * D(u, v)` over the frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TvDenominator {
    pub values: Image,
}

/// Eigenvalue of the circular forward-difference Laplacian at (u, v).
pub fn laplacian_symbol(u: usize, v: usize, width: usize, height: usize) -> f64 {
    (2.0 - 2.0 * (2.0 * PI * u as f64 / width as f64).cos()) + (2.0 - 2.0 * (2.0 * PI * v as f64 / height as f64).cos())
}

pub fn tv_denominator(width: usize, height: usize, w: WindowSpec, lambda: f64) -> Result<TvDenominator> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension { width, height });
    }
    check_nonneg("lambda", lambda)?;
    let n = w.full_count() as f64;
    let values = Image::from_fn(width, height, |u, v| n + lambda * laplacian_symbol(u, v, width, height))?;
    Ok(TvDenominator { values })
}

fn require_periodic(w: WindowSpec, what: &'static str) -> Result<()> {
    if w.boundary == Boundary::Periodic {
        Ok(())
    } else {
        Err(Error::BoundaryRequired(what))
    }
}

/// Solves `(|w| + lambda L) q = f` in frequency space.
pub fn tvgf_solve_q(f: &Image, w: WindowSpec, lambda: f64) -> Result<Image> {
    require_periodic(w, "tvgf")?;
    w.validate(f.width(), f.height())?;
    check_nonneg("lambda", lambda)?;
    Ok(solve_real(f, w.full_count() as f64, lambda))
}

/// Same division as `SpectrumField` + `tv_denominator`, but on the half
/// spectrum of a real signal: real row transforms, complex column
/// transforms over `W/2 + 1` columns only.
fn solve_real(f: &Image, n: f64, lambda: f64) -> Image {
    let (width, height) = f.shape();
    let half = width / 2 + 1;
    let mut real_planner = RealFftPlanner::<f64>::new();
    let r2c = real_planner.plan_fft_forward(width);
    let c2r = real_planner.plan_fft_inverse(width);
    let mut planner = FftPlanner::<f64>::new();
    let col_fwd = planner.plan_fft_forward(height);
    let col_inv = planner.plan_fft_inverse(height);

    let mut rows = vec![Complex64::new(0.0, 0.0); half * height];
    let mut line = r2c.make_input_vec();
    for (src, dst) in f.data().chunks_exact(width).zip(rows.chunks_exact_mut(half)) {
        line.copy_from_slice(src);
        r2c.process(&mut line, dst).expect("buffer sizes match the plan");
    }

    // columns become rows: index u * height + v
    let mut cols = transpose(&rows, half, height);
    col_fwd.process(&mut cols);
    let row_sym: Vec<f64> = (0..height).map(|v| laplacian_symbol(0, v, 1, height)).collect();
    for (u, col) in cols.chunks_exact_mut(height).enumerate() {
        let su = laplacian_symbol(u, 0, width, 1);
        for (c, sv) in col.iter_mut().zip(&row_sym) {
            *c /= n + lambda * (su + sv);
        }
    }
    col_inv.process(&mut cols);
    let mut rows = transpose(&cols, height, half);

    let scale = 1.0 / (width * height) as f64;
    let mut out = vec![0.0; width * height];
    for (src, dst) in rows.chunks_exact_mut(half).zip(out.chunks_exact_mut(width)) {
        // DC and Nyquist bins are real in exact arithmetic
        src[0].im = 0.0;
        if width % 2 == 0 {
            src[half - 1].im = 0.0;
        }
        c2r.process(src, dst).expect("buffer sizes match the plan");
        dst.iter_mut().for_each(|v| *v *= scale);
    }
    f.with_data_of(out)
}

/// f_i = sum_{k in w_i} (a_k I_i + b_k), the unnormalized aggregation.
pub fn tvgf_rhs(coeffs: &GfCoeffs, guide: &Image, w: WindowSpec) -> Result<Image> {
    let sa = box_sum(&coeffs.a, w)?;
    let sb = box_sum(&coeffs.b, w)?;
    let data = (0..guide.len()).map(|i| sa[i] * guide[i] + sb[i]).collect();
    Ok(guide.with_data_of(data))
}

/// One TVGF pass of `p` under guidance `guide`.
pub fn tvgf(p: &Image, guide: &Image, w: WindowSpec, eps: f64, lambda: f64) -> Result<Image> {
    require_periodic(w, "tvgf")?;
    check_eps("eps", eps)?;
    check_nonneg("lambda", lambda)?;
    let coeffs = gf_coeffs(p, guide, w, eps)?;
    let f = tvgf_rhs(&coeffs, guide, w)?;
    tvgf_solve_q(&f, w, lambda)
}

pub fn tvgf_roll(p: &Image, guide: &Image, w: WindowSpec, eps: f64, lambda: f64, iters: usize) -> Result<Vec<Image>> {
    check_iters(iters)?;
    let mut out: Vec<Image> = Vec::with_capacity(iters);
    for _ in 0..iters {
        let prev = out.last().unwrap_or(p);
        let next = tvgf(prev, guide, w, eps, lambda)?;
        out.push(next);
    }
    Ok(out)
}

/// `sum_k (q_{k+x} - q_k)^2 + (q_{k+y} - q_k)^2` with wrap-around.
pub fn tv_squared(q: &Image) -> f64 {
    let (width, height) = q.shape();
    let mut acc = 0.0;
    for y in 0..height {
        for x in 0..width {
            let c = q.get(x, y);
            let dx = q.get((x + 1) % width, y) - c;
            let dy = q.get(x, (y + 1) % height) - c;
            acc += dx * dx + dy * dy;
        }
    }
    acc
}

/// Exact TVGF objective at `(q, a, b)`.
pub fn energy_tvgf(
    q: &Image,
    coeffs: &GfCoeffs,
    guide: &Image,
    w: WindowSpec,
    eps: f64,
    lambda: f64,
) -> Result<EnergyReport> {
    require_periodic(w, "energy_tvgf")?;
    let (data, ridge) = window_fit_energy(q, coeffs, guide, w, eps)?;
    Ok(EnergyReport {
        data,
        ridge,
        tv: lambda * tv_squared(q),
        anchor: 0.0,
    })
}
