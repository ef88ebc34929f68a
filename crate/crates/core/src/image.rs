//! Image container, window specification and parameter bundle.

use serde::{Deserialize, Serialize};

use crate::error::{check_eps, check_iters, check_nonneg, Error, Result};

/// Dense single-channel image of `f64` samples, row-major.
///
/// Photographic inputs live in [0,1]; coefficient fields (a, b, ...) are
/// unrestricted reals. Multichannel data is a slice of same-shape images.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    /// Image of the given shape with every pixel set to `fill`.
    pub fn new(width: usize, height: usize, fill: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension { width, height });
        }
        if !fill.is_finite() {
            return Err(Error::Parameter {
                name: "fill",
                value: fill,
                reason: "must be finite",
            });
        }
        Ok(Self {
            width,
            height,
            data: vec![fill; width * height],
        })
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension { width, height });
        }
        if data.len() != width * height {
            return Err(Error::DataLength {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension { width, height });
        }
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self { width, height, data })
    }

    /// Same-shape image; used internally where the shape is already valid.
    pub(crate) fn with_data_of(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            })
        }
    }

    /// Pointwise `f(self[i], other[i])`.
    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Image> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&x, &y)| f(x, y)).collect();
        Ok(self.with_data_of(data))
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        self.with_data_of(self.data.iter().map(|&x| f(x)).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population standard deviation.
    pub fn stddev(&self) -> f64 {
        let m = self.mean();
        let var = self.data.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.data.len() as f64;
        var.sqrt()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |self - other|`; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Cyclic shift: output(x, y) = self(x - dx, y - dy) with wrap-around.
    pub fn roll(&self, dx: isize, dy: isize) -> Image {
        let (w, h) = (self.width as isize, self.height as isize);
        let mut out = self.clone();
        for y in 0..h {
            for x in 0..w {
                let sx = (x - dx).rem_euclid(w) as usize;
                let sy = (y - dy).rem_euclid(h) as usize;
                out.data[(y * w + x) as usize] = self.data[sy * self.width + sx];
            }
        }
        out
    }

    /// Channel mean (R+G+B)/3 used as the scalar guidance for color inputs.
    pub fn luma(channels: &[Image]) -> Result<Image> {
        let first = channels.first().ok_or(Error::Dimension { width: 0, height: 0 })?;
        let mut acc = first.clone();
        for c in &channels[1..] {
            acc = acc.zip_map(c, |a, b| a + b)?;
        }
        let n = channels.len() as f64;
        Ok(acc.map(|v| v / n))
    }
}

impl std::ops::Index<usize> for Image {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// How a window is handled where it leaves the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Clip the window to the image; counts vary near borders.
    #[default]
    Truncate,
    /// Wrap around; every window holds exactly (2r+1)^2 pixels.
    Periodic,
}

/// Square (2r+1)x(2r+1) window centred at each pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub radius: usize,
    pub boundary: Boundary,
}

impl WindowSpec {
    pub fn new(radius: usize, boundary: Boundary) -> Self {
        Self { radius, boundary }
    }

    pub fn truncate(radius: usize) -> Self {
        Self::new(radius, Boundary::Truncate)
    }

    pub fn periodic(radius: usize) -> Self {
        Self::new(radius, Boundary::Periodic)
    }

    #[inline]
    pub fn diameter(&self) -> usize {
        2 * self.radius + 1
    }

    /// (2r+1)^2, the count of an unclipped window.
    #[inline]
    pub fn full_count(&self) -> usize {
        self.diameter() * self.diameter()
    }

    /// Rejects periodic windows that would overlap themselves.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension { width, height });
        }
        if self.boundary == Boundary::Periodic && self.diameter() > width.min(height) {
            return Err(Error::Window {
                radius: self.radius,
                width,
                height,
            });
        }
        Ok(())
    }

    /// Extent of the window along one axis of length `n` at coordinate `c`.
    #[inline]
    pub(crate) fn axis_count(&self, c: usize, n: usize) -> usize {
        match self.boundary {
            Boundary::Periodic => self.diameter(),
            Boundary::Truncate => {
                let lo = c.saturating_sub(self.radius);
                let hi = (c + self.radius).min(n - 1);
                hi - lo + 1
            }
        }
    }

    /// |omega_i| at pixel (x, y).
    #[inline]
    pub fn count_at(&self, x: usize, y: usize, width: usize, height: usize) -> usize {
        self.axis_count(x, width) * self.axis_count(y, height)
    }

    /// Per-pixel window counts as an image.
    pub fn counts(&self, width: usize, height: usize) -> Result<Image> {
        self.validate(width, height)?;
        Image::from_fn(width, height, |x, y| self.count_at(x, y, width, height) as f64)
    }

    /// Pixel offsets covered by the window at (x, y), as absolute indices.
    /// Explicit enumeration for the loop-based oracles and energies.
    pub fn members(&self, x: usize, y: usize, width: usize, height: usize) -> Vec<usize> {
        let r = self.radius as isize;
        let mut out = Vec::with_capacity(self.full_count());
        for dy in -r..=r {
            for dx in -r..=r {
                let (sx, sy) = (x as isize + dx, y as isize + dy);
                match self.boundary {
                    Boundary::Truncate => {
                        if sx >= 0 && sy >= 0 && (sx as usize) < width && (sy as usize) < height {
                            out.push(sy as usize * width + sx as usize);
                        }
                    }
                    Boundary::Periodic => {
                        let wx = sx.rem_euclid(width as isize) as usize;
                        let wy = sy.rem_euclid(height as isize) as usize;
                        out.push(wy * width + wx);
                    }
                }
            }
        }
        out
    }
}

/// Scalar parameters shared by the filter family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Ridge regularizer on the slope coefficients.
    pub eps: f64,
    /// Weight of the extra term (TV, anchor) of the extended objectives.
    pub lambda: f64,
    /// Anchor weight of the guidance track in CGF-based mutual filtering.
    pub beta: f64,
    /// Second ridge regularizer for the cross-track coefficients.
    pub eps2: f64,
    /// Detail gain of the enhanced flash image.
    pub tau: f64,
    pub iters: usize,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            eps: 0.1,
            lambda: 0.0,
            beta: 0.0,
            eps2: 0.1,
            tau: 1.0,
            iters: 1,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        check_eps("eps", self.eps)?;
        check_eps("eps2", self.eps2)?;
        check_nonneg("lambda", self.lambda)?;
        check_nonneg("beta", self.beta)?;
        if !self.tau.is_finite() {
            return Err(Error::Parameter {
                name: "tau",
                value: self.tau,
                reason: "must be finite",
            });
        }
        check_iters(self.iters)
    }
}

/// Value of an objective with its per-term breakdown.
///
/// `data` holds the squared fit residuals, `ridge` the eps-weighted slope
/// penalties, `tv` the lambda-weighted squared gradients and `anchor` the
/// lambda-weighted fidelity term. Terms an objective lacks stay at 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyReport {
    pub data: f64,
    pub ridge: f64,
    pub tv: f64,
    pub anchor: f64,
}

impl EnergyReport {
    pub fn total(&self) -> f64 {
        self.data + self.ridge + self.tv + self.anchor
    }
}
