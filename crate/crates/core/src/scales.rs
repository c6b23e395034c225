//! Value-to-visual mappings shared by every encoder.

use thiserror::Error;

use crate::color::{round_channel, Rgb};

/// Categorical palette used when a spec supplies none.
pub const DEFAULT_CATEGORICAL: [Rgb; 10] = [
    Rgb::new(0x4e, 0x79, 0xa7),
    Rgb::new(0xf2, 0x8e, 0x2b),
    Rgb::new(0xe1, 0x57, 0x59),
    Rgb::new(0x76, 0xb7, 0xb2),
    Rgb::new(0x59, 0xa1, 0x4f),
    Rgb::new(0xed, 0xc9, 0x48),
    Rgb::new(0xb0, 0x7a, 0xa1),
    Rgb::new(0xff, 0x9d, 0xa7),
    Rgb::new(0x9c, 0x75, 0x5f),
    Rgb::new(0xba, 0xb0, 0xac),
];

/// Light-to-dark blue ramp for color intensity.
pub const DEFAULT_INTENSITY: [Rgb; 2] = [Rgb::new(0xde, 0xeb, 0xf7), Rgb::new(0x08, 0x30, 0x6b)];

/// Cool-to-warm ordered hue ramp for quantitative hue encodings.
pub const DEFAULT_HUE_RAMP: [Rgb; 5] = [
    Rgb::new(0x2c, 0x7b, 0xb6),
    Rgb::new(0xab, 0xd9, 0xe9),
    Rgb::new(0xff, 0xff, 0xbf),
    Rgb::new(0xfd, 0xae, 0x61),
    Rgb::new(0xd7, 0x19, 0x1c),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaleError {
    #[error("scale domain [{0}, {1}] must be finite with d0 < d1")]
    DegenerateDomain(f64, f64),
    #[error("color ramp needs at least {0} stops")]
    TooFewStops(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearScale {
    d0: f64,
    d1: f64,
    r0: f64,
    r1: f64,
}

impl LinearScale {
    pub fn new(domain: [f64; 2], range: [f64; 2]) -> Result<Self, ScaleError> {
        let [d0, d1] = domain;
        if !(d0.is_finite() && d1.is_finite()) || d0 >= d1 {
            return Err(ScaleError::DegenerateDomain(d0, d1));
        }
        Ok(Self {
            d0,
            d1,
            r0: range[0],
            r1: range[1],
        })
    }

    pub fn domain(&self) -> [f64; 2] {
        [self.d0, self.d1]
    }

    pub fn range(&self) -> [f64; 2] {
        [self.r0, self.r1]
    }
}

/// Affine map from domain to range, clamping outside the domain.
pub fn linear_map(v: f64, s: &LinearScale) -> f64 {
    if v <= s.d0 {
        return s.r0;
    }
    if v >= s.d1 {
        return s.r1;
    }
    s.r0 + (v - s.d0) / (s.d1 - s.d0) * (s.r1 - s.r0)
}

/// Maps `v` over `domain` into `range`; a degenerate domain (all values
/// equal) maps every value to the midpoint of the range.
pub fn map_or_midpoint(v: f64, domain: [f64; 2], range: [f64; 2]) -> f64 {
    match LinearScale::new(domain, range) {
        Ok(s) => linear_map(v, &s),
        Err(_) => (range[0] + range[1]) / 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampMode {
    Ramp,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorRamp {
    stops: Vec<Rgb>,
    mode: RampMode,
}

impl ColorRamp {
    pub fn ramp(stops: Vec<Rgb>) -> Result<Self, ScaleError> {
        if stops.len() < 2 {
            return Err(ScaleError::TooFewStops(2));
        }
        Ok(Self {
            stops,
            mode: RampMode::Ramp,
        })
    }

    pub fn categorical(stops: Vec<Rgb>) -> Result<Self, ScaleError> {
        if stops.is_empty() {
            return Err(ScaleError::TooFewStops(1));
        }
        Ok(Self {
            stops,
            mode: RampMode::Categorical,
        })
    }

    pub fn stops(&self) -> &[Rgb] {
        &self.stops
    }

    pub fn mode(&self) -> RampMode {
        self.mode
    }

    /// Palette entry `i`, cycling when categories outnumber colors.
    pub fn category(&self, i: usize) -> Rgb {
        self.stops[i % self.stops.len()]
    }
}

/// Piecewise-linear sRGB interpolation along the ramp, each channel rounded
/// half up. `t` is clamped to [0, 1].
pub fn color_at(t: f64, ramp: &ColorRamp) -> Rgb {
    let stops = &ramp.stops;
    let segments = stops.len() - 1;
    if segments == 0 {
        return stops[0];
    }
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    if t == 1.0 {
        return stops[segments];
    }
    let pos = t * segments as f64;
    let i = (pos.floor() as usize).min(segments - 1);
    let local = pos - i as f64;
    let (a, b) = (stops[i], stops[i + 1]);
    let mix = |x: u8, y: u8| round_channel(x as f64 + (y as f64 - x as f64) * local);
    Rgb::new(mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b))
}

/// Area-proportional symbol radius: `r_max * sqrt(v / v_max)`.
pub fn symbol_radius(v: f64, v_max: f64, r_max: f64) -> f64 {
    if v <= 0.0 || v_max <= 0.0 {
        return 0.0;
    }
    r_max * (v / v_max).sqrt()
}

/// Smallest value of the form {1, 2, 5} x 10^k that is >= `x`; 1 for
/// non-positive or non-finite input.
pub fn nice_ceil(x: f64) -> f64 {
    if !(x > 0.0 && x.is_finite()) {
        return 1.0;
    }
    let e = 10f64.powf(x.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        // Tolerate float noise in the power of ten.
        if m * e >= x * (1.0 - 1e-12) {
            return m * e;
        }
    }
    10.0 * e
}
