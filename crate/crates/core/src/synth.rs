//! Seeded synthetic test images.
//!
//! Every generator is a pure function of its seed and shape (ChaCha8
//! stream), so repeated calls produce bit-identical images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    /// Piecewise-constant scene plus Gaussian noise.
    Noise,
    /// Clean piecewise-constant scene.
    Piecewise,
    /// Oriented texture over piecewise structure.
    Texture,
    /// Simulated flash / no-flash pair.
    FlashPair,
}

impl std::str::FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "noise" => Ok(Self::Noise),
            "piecewise" => Ok(Self::Piecewise),
            "texture" => Ok(Self::Texture),
            "flash-pair" => Ok(Self::FlashPair),
            other => Err(format!("unknown synth kind '{other}'")),
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// I.i.d. uniform samples in [0, 1).
pub fn uniform(width: usize, height: usize, seed: u64) -> Image {
    let mut rng = rng(seed);
    let data = (0..width * height).map(|_| rng.random::<f64>()).collect();
    Image::from_vec(width, height, data).expect("nonzero shape")
}

/// Piecewise-constant scene: a background, axis-aligned rectangles and
/// one disk, with levels drawn from {0.2, 0.3, ..., 0.8}.
pub fn piecewise(width: usize, height: usize, seed: u64) -> Image {
    let mut rng = rng(seed ^ 0x5eed_0001);
    let level = |rng: &mut ChaCha8Rng| 0.2 + 0.1 * rng.random_range(0..7) as f64;
    let background = level(&mut rng);
    let mut img = Image::new(width, height, background).expect("nonzero shape");

    let n_rects = 3 + rng.random_range(0..3);
    for _ in 0..n_rects {
        let x0 = rng.random_range(0..width.max(2) - 1);
        let y0 = rng.random_range(0..height.max(2) - 1);
        let rw = 1 + rng.random_range(width / 6..=width / 2 + 1);
        let rh = 1 + rng.random_range(height / 6..=height / 2 + 1);
        let mut v = level(&mut rng);
        if v == background {
            v = if background < 0.5 { 0.8 } else { 0.2 };
        }
        for y in y0..(y0 + rh).min(height) {
            for x in x0..(x0 + rw).min(width) {
                img.set(x, y, v);
            }
        }
    }

    let cx = rng.random_range(0..width) as f64;
    let cy = rng.random_range(0..height) as f64;
    let rad = width.min(height) as f64 * (0.15 + 0.1 * rng.random::<f64>());
    let v = level(&mut rng);
    for y in 0..height {
        for x in 0..width {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy <= rad * rad {
                img.set(x, y, v);
            }
        }
    }
    img
}

/// `clean` plus i.i.d. N(0, sigma^2) noise; values are not clamped.
pub fn add_noise(clean: &Image, sigma: f64, seed: u64) -> Image {
    let mut rng = rng(seed ^ 0x0015_e000);
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
    clean.map(|v| v + normal.sample(&mut rng))
}

/// Noisy piecewise scene; returns `(noisy, clean)`.
pub fn noisy_piecewise(width: usize, height: usize, seed: u64, sigma: f64) -> (Image, Image) {
    let clean = piecewise(width, height, seed);
    (add_noise(&clean, sigma, seed), clean)
}

/// Oriented sinusoidal texture (period 4 px, amplitude 0.1) over a
/// piecewise structure; returns `(textured, structure)`.
pub fn texture(width: usize, height: usize, seed: u64) -> (Image, Image) {
    let structure = piecewise(width, height, seed);
    let mut rng = rng(seed ^ 0x7e47_0002);
    let theta = rng.random::<f64>() * std::f64::consts::PI;
    let (c, s) = (theta.cos(), theta.sin());
    let period = 4.0;
    let tex = Image::from_fn(width, height, |x, y| {
        0.1 * (2.0 * std::f64::consts::PI * (x as f64 * c + y as f64 * s) / period).sin()
    })
    .expect("nonzero shape");
    let textured = structure.zip_map(&tex, |a, b| a + b).expect("same shape");
    (textured, structure)
}

/// A registered flash / no-flash pair over one scene.
#[derive(Debug, Clone)]
pub struct FlashPair {
    /// Sharp, tone-shifted exposure.
    pub flash: Image,
    /// Motion-blurred, noisy exposure with the scene's own tone.
    pub no_flash: Image,
    /// Ground-truth scene.
    pub scene: Image,
}

/// Flash = scene^0.6; no-flash = 9-tap horizontal motion blur of the scene
/// plus N(0, 0.02^2) noise.
pub fn flash_pair(width: usize, height: usize, seed: u64) -> FlashPair {
    let (scene, _) = texture(width, height, seed);
    let flash = scene.map(|v| v.clamp(0.0, 1.0).powf(0.6));
    let half = 4isize;
    let blurred = Image::from_fn(width, height, |x, y| {
        let mut acc = 0.0;
        let mut n = 0.0;
        for d in -half..=half {
            let sx = x as isize + d;
            if sx >= 0 && (sx as usize) < width {
                acc += scene.get(sx as usize, y);
                n += 1.0;
            }
        }
        acc / n
    })
    .expect("nonzero shape");
    let no_flash = add_noise(&blurred, 0.02, seed ^ 0xf1a5);
    FlashPair { flash, no_flash, scene }
}
