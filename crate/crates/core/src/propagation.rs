//! Slope-intercept path gain models, the factory preset table, spatially
//! correlated shadowing, small-scale fading and least-squares fitting.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::layout::{Point2, Rect, Visibility};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// `PG(d) = pg_1m - 10 n log10(d) + N(0, sigma^2)`, d in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGainModel {
    pub pg_1m: f64,
    pub n: f64,
    pub sigma: f64,
}

impl PathGainModel {
    pub fn new(pg_1m: f64, n: f64, sigma: f64) -> Result<Self> {
        let m = Self { pg_1m, n, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.pg_1m.is_finite() {
            return Err(Error::invalid("model.pg_1m", "must be finite"));
        }
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::invalid("model.n", format!("must be > 0, got {}", self.n)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(
                "model.sigma",
                format!("must be >= 0, got {}", self.sigma),
            ));
        }
        Ok(())
    }

    /// Deterministic part of the model. Below the 1 m anchor is an error.
    pub fn mean(&self, d: f64) -> Result<f64> {
        if !(d >= 1.0) {
            return Err(Error::BelowReferenceDistance(d));
        }
        Ok(self.pg_1m - 10.0 * self.n * d.log10())
    }
}

pub fn path_gain_mean(model: &PathGainModel, d: f64) -> Result<f64> {
    model.mean(d)
}

/// Free-space path gain at 1 m, dB.
pub fn friis_pg1m(freq_hz: f64) -> f64 {
    -20.0 * (4.0 * std::f64::consts::PI * freq_hz / SPEED_OF_LIGHT).log10()
}

/// Rows of the factory slope-intercept table. The Chizhik row has no
/// published sigma and carries zero; it is meant for mean-line scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelPreset {
    MeasFitLos,
    Friis,
    CiLosSc,
    InfLos,
    MeasFitNlos,
    InfNlosDl,
    Chizhik,
}

impl ModelPreset {
    pub const ALL: [ModelPreset; 7] = [
        ModelPreset::MeasFitLos,
        ModelPreset::Friis,
        ModelPreset::CiLosSc,
        ModelPreset::InfLos,
        ModelPreset::MeasFitNlos,
        ModelPreset::InfNlosDl,
        ModelPreset::Chizhik,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelPreset::MeasFitLos => "MeasFit-LoS",
            ModelPreset::Friis => "Friis",
            ModelPreset::CiLosSc => "CI-LoS-SC",
            ModelPreset::InfLos => "InF-LoS",
            ModelPreset::MeasFitNlos => "MeasFit-NLoS",
            ModelPreset::InfNlosDl => "InF-NLoS-DL",
            ModelPreset::Chizhik => "Chizhik",
        }
    }

    pub fn model(self) -> PathGainModel {
        let (pg_1m, n, sigma) = match self {
            ModelPreset::MeasFitLos => (-58.8, 2.29, 4.6),
            ModelPreset::Friis => (-60.9, 2.00, 0.0),
            ModelPreset::CiLosSc => (-60.9, 1.98, 4.3),
            ModelPreset::InfLos => (-58.9, 2.15, 4.3),
            ModelPreset::MeasFitNlos => (-39.6, 4.40, 5.8),
            ModelPreset::InfNlosDl => (-47.1, 3.57, 7.2),
            ModelPreset::Chizhik => (-41.9, 4.04, 0.0),
        };
        PathGainModel { pg_1m, n, sigma }
    }

    /// Table block the preset belongs to. Friis is listed in both.
    pub fn visibility(self) -> Option<Visibility> {
        match self {
            ModelPreset::MeasFitLos | ModelPreset::CiLosSc | ModelPreset::InfLos => Some(Visibility::Los),
            ModelPreset::MeasFitNlos | ModelPreset::InfNlosDl | ModelPreset::Chizhik => {
                Some(Visibility::Nlos)
            }
            ModelPreset::Friis => None,
        }
    }

    /// Presets scored against data of the given visibility class.
    pub fn block(vis: Visibility) -> Vec<ModelPreset> {
        Self::ALL
            .into_iter()
            .filter(|p| p.visibility().is_none_or(|v| v == vis))
            .collect()
    }

    /// RMSE reported for the campaign data, where published.
    pub fn published_rmse(self, vis: Visibility) -> Option<f64> {
        match (self, vis) {
            (ModelPreset::Friis, Visibility::Los) => Some(4.7),
            (ModelPreset::Friis, Visibility::Nlos) => Some(10.8),
            (ModelPreset::CiLosSc, Visibility::Los) => Some(4.8),
            (ModelPreset::InfLos, Visibility::Los) => Some(4.8),
            (ModelPreset::InfNlosDl, Visibility::Nlos) => Some(6.5),
            (ModelPreset::Chizhik, Visibility::Nlos) => Some(6.1),
            _ => None,
        }
    }

    /// Distance range (m) the preset is exercised over in synthetic fits.
    pub fn distance_range(self) -> (f64, f64) {
        match self.visibility() {
            Some(Visibility::Nlos) => (1.0, 45.0),
            _ => (1.0, 26.0),
        }
    }
}

impl fmt::Display for ModelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelPreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<_> = ModelPreset::ALL.iter().map(|p| p.name()).collect();
                Error::invalid(
                    "preset",
                    format!("unknown preset '{s}', expected one of {}", names.join(", ")),
                )
            })
    }
}

/// Nominal TX gain reduction from scattering: 1 dB in LoS, 4.9 dB in NLoS.
pub fn effective_gain_correction(vis: Visibility) -> f64 {
    match vis {
        Visibility::Los => 1.0,
        Visibility::Nlos => 4.9,
    }
}

/// Zero-mean Gaussian shadowing on a regular node grid with separable
/// exponential correlation: `rho(dx, dy) = exp(-(|dx| + |dy|) / d_corr)`.
///
/// Values between nodes use bilinear weights renormalized so the marginal
/// standard deviation stays exactly `sigma` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingField {
    origin: Point2,
    step: f64,
    nx: usize,
    ny: usize,
    rho: f64,
    unit: Vec<f64>,
    pub sigma: f64,
    pub decorrelation_distance: f64,
    pub seed: u64,
}

impl ShadowingField {
    pub const DEFAULT_DECORRELATION_M: f64 = 10.0;
    pub const DEFAULT_STEP_M: f64 = 0.5;

    pub fn generate(
        extent: Rect,
        step: f64,
        decorrelation_distance: f64,
        sigma: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::invalid("shadowing.step_m", "must be > 0"));
        }
        if !(decorrelation_distance >= 0.0) {
            return Err(Error::invalid("shadowing.decorrelation_m", "must be >= 0"));
        }
        if !(sigma >= 0.0) {
            return Err(Error::invalid("shadowing.sigma", "must be >= 0"));
        }
        if !(extent.width() >= 0.0 && extent.height() >= 0.0) {
            return Err(Error::invalid("shadowing.extent", "empty extent"));
        }
        let nx = (extent.width() / step - 1e-9).ceil().max(0.0) as usize + 1;
        let ny = (extent.height() / step - 1e-9).ceil().max(0.0) as usize + 1;
        let rho = if decorrelation_distance > 0.0 {
            (-step / decorrelation_distance).exp()
        } else {
            0.0
        };
        let innov = (1.0 - rho * rho).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut unit: Vec<f64> = (0..nx * ny).map(|_| rng.sample(StandardNormal)).collect();
        // AR(1) along x, then along y
        for j in 0..ny {
            let row = &mut unit[j * nx..(j + 1) * nx];
            for i in 1..nx {
                row[i] = rho * row[i - 1] + innov * row[i];
            }
        }
        for j in 1..ny {
            for i in 0..nx {
                unit[j * nx + i] = rho * unit[(j - 1) * nx + i] + innov * unit[j * nx + i];
            }
        }
        Ok(Self {
            origin: extent.min,
            step,
            nx,
            ny,
            rho,
            unit,
            sigma,
            decorrelation_distance,
            seed,
        })
    }

    /// A field that is zero everywhere.
    pub fn zero(extent: Rect) -> Self {
        Self {
            origin: extent.min,
            step: extent.width().max(extent.height()).max(1.0),
            nx: 2,
            ny: 2,
            rho: 0.0,
            unit: vec![0.0; 4],
            sigma: 0.0,
            decorrelation_distance: 0.0,
            seed: 0,
        }
    }

    pub fn extent(&self) -> Rect {
        Rect::new(
            self.origin,
            Point2::new(
                self.origin.x + self.step * (self.nx - 1) as f64,
                self.origin.y + self.step * (self.ny - 1) as f64,
            ),
        )
    }

    /// Unit-variance field value at `p`.
    pub fn unit_value(&self, p: Point2) -> Result<f64> {
        if !self.extent().contains(p) {
            return Err(Error::OutOfGrid { x: p.x, y: p.y });
        }
        let fx = ((p.x - self.origin.x) / self.step).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((p.y - self.origin.y) / self.step).clamp(0.0, (self.ny - 1) as f64);
        let i = (fx.floor() as usize).min(self.nx.saturating_sub(2));
        let j = (fy.floor() as usize).min(self.ny.saturating_sub(2));
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let at = |ii: usize, jj: usize| {
            let ii = ii.min(self.nx - 1);
            let jj = jj.min(self.ny - 1);
            self.unit[jj * self.nx + ii]
        };
        let v = (1.0 - tx) * (1.0 - ty) * at(i, j)
            + tx * (1.0 - ty) * at(i + 1, j)
            + (1.0 - tx) * ty * at(i, j + 1)
            + tx * ty * at(i + 1, j + 1);
        let var_x = (1.0 - tx).powi(2) + tx * tx + 2.0 * tx * (1.0 - tx) * self.rho;
        let var_y = (1.0 - ty).powi(2) + ty * ty + 2.0 * ty * (1.0 - ty) * self.rho;
        let var = var_x * var_y;
        Ok(if var > 0.0 { v / var.sqrt() } else { 0.0 })
    }

    /// Shadowing in dB at `p`, scaled by the field's own sigma.
    pub fn sample(&self, p: Point2) -> Result<f64> {
        if self.sigma == 0.0 {
            self.unit_value(p)?;
            return Ok(0.0);
        }
        Ok(self.sigma * self.unit_value(p)?)
    }
}

pub fn sample_shadowing(field: &ShadowingField, p: Point2) -> Result<f64> {
    field.sample(p)
}

/// Small-scale fading as a dB term built from a sum of plane waves at the
/// carrier wavelength with seeded directions and phases. The term has zero
/// mean and standard deviation `std_db` over space, and averages out over
/// areas spanning many wavelengths.
#[derive(Debug, Clone, PartialEq)]
pub struct FastFading {
    pub std_db: f64,
    waves: Vec<(f64, f64, f64)>,
}

impl FastFading {
    pub const COMPONENTS: usize = 16;

    pub fn new(std_db: f64, carrier_hz: f64, seed: u64) -> Result<Self> {
        if !(std_db >= 0.0) {
            return Err(Error::invalid("fading.std_db", "must be >= 0"));
        }
        if !(carrier_hz > 0.0) {
            return Err(Error::invalid("fading.carrier", "must be > 0"));
        }
        let k = 2.0 * std::f64::consts::PI / crate::wavelength(carrier_hz);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let waves = (0..Self::COMPONENTS)
            .map(|_| {
                let theta: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                let phase: f64 = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                (k * theta.cos(), k * theta.sin(), phase)
            })
            .collect();
        Ok(Self { std_db, waves })
    }

    pub fn off() -> Self {
        Self {
            std_db: 0.0,
            waves: Vec::new(),
        }
    }

    pub fn is_off(&self) -> bool {
        self.std_db == 0.0 || self.waves.is_empty()
    }

    pub fn value(&self, p: Point2) -> f64 {
        if self.is_off() {
            return 0.0;
        }
        let amp = self.std_db * (2.0 / self.waves.len() as f64).sqrt();
        amp * self
            .waves
            .iter()
            .map(|&(kx, ky, ph)| (kx * p.x + ky * p.y + ph).cos())
            .sum::<f64>()
    }
}

/// Ordinary least squares of path gain against `log10(d)`; sigma is the
/// residual standard error with N - 2 degrees of freedom.
pub fn fit_slope_intercept(samples: &[(f64, f64)]) -> Result<PathGainModel> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if let Some(&(d, _)) = samples.iter().find(|(d, _)| !(*d >= 1.0)) {
        return Err(Error::BelowReferenceDistance(d));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|(d, _)| d.log10()).sum::<f64>() / n;
    let my = samples.iter().map(|(_, pg)| pg).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(d, pg) in samples {
        let dx = d.log10() - mx;
        sxx += dx * dx;
        sxy += dx * (pg - my);
    }
    if sxx <= 1e-12 * n {
        return Err(Error::DegenerateFit("all samples share one distance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = samples
        .iter()
        .map(|&(d, pg)| {
            let r = pg - (intercept + slope * d.log10());
            r * r
        })
        .sum();
    let model = PathGainModel {
        pg_1m: intercept,
        n: -slope / 10.0,
        sigma: (sse / (n - 2.0)).sqrt(),
    };
    if !(model.n > 0.0) {
        return Err(Error::DegenerateFit(format!(
            "path gain increases with distance (n = {:.3})",
            model.n
        )));
    }
    Ok(model)
}

pub fn model_rmse(model: &PathGainModel, samples: &[(f64, f64)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("no samples to score".into()));
    }
    let mut acc = 0.0;
    for &(d, pg) in samples {
        let r = pg - model.mean(d)?;
        acc += r * r;
    }
    Ok((acc / samples.len() as f64).sqrt())
}

/// Draws `count` (distance, path gain) pairs from `model`, log-uniform in
/// distance over `range`.
pub fn draw_samples(model: &PathGainModel, range: (f64, f64), count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l0, l1) = (range.0.log10(), range.1.log10());
    (0..count)
        .map(|_| {
            let d = 10f64.powf(l0 + (l1 - l0) * rng.random::<f64>());
            let z: f64 = rng.sample(StandardNormal);
            let pg = model.mean(d).expect("range starts at or above 1 m") + model.sigma * z;
            (d, pg)
        })
        .collect()
}
