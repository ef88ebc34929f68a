use std::path::Path;

use ccdgf::imgio::PnmImage;
use serde::{Serialize, Serializer};

/// The JSON document printed by every subcommand.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub version: &'static str,
    /// Every flag value, defaults included.
    pub params: serde_json::Value,
    pub input: Option<ImageInfo>,
    /// Files written, main output first.
    pub outputs: Vec<String>,
    pub iterations: Option<usize>,
    /// Not deterministic; everything else is.
    pub wall_time_s: f64,
    pub metrics: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchReport>,
}

#[derive(Debug, Serialize)]
pub struct ImageInfo {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub maxval: u16,
}

impl ImageInfo {
    pub fn of(img: &PnmImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            channels: img.channels.len(),
            maxval: img.maxval,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub mse: f64,
    /// Identical images give `"inf"`.
    #[serde(serialize_with = "finite_or_inf")]
    pub psnr_db: f64,
    /// `null` when the image is smaller than the 11x11 SSIM window.
    pub ssim: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub megapixels: f64,
    pub times_s: Vec<f64>,
    pub median_s: f64,
}

fn finite_or_inf<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    input: &'a str,
    reference: &'a str,
    mse: f64,
    #[serde(serialize_with = "finite_or_inf")]
    psnr_db: f64,
    ssim: Option<f64>,
}

pub(crate) fn write_metrics_csv(path: &Path, input: &Path, reference: &Path, m: &MetricsReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.serialize(CsvRow {
        input: &input.to_string_lossy(),
        reference: &reference.to_string_lossy(),
        mse: m.mse,
        psnr_db: m.psnr_db,
        ssim: m.ssim,
    })?;
    w.flush()?;
    Ok(())
}
