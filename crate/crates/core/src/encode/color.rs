use std::collections::BTreeMap;

use crate::basemap::POLITICAL_STROKE;
use crate::color::Rgb;
use crate::designspace::{ChannelKind, ChannelSpec};
use crate::geodata::Shape;
use crate::scales::{color_at, map_or_midpoint, ColorRamp, DEFAULT_CATEGORICAL, DEFAULT_HUE_RAMP, DEFAULT_INTENSITY};
use crate::scene::{rings_path, Geom, Mark, MarkTag, Style};

use super::{format_number, require_values, Datum, EncodeError, EncodedLayer, LegendEntry, Swatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMode {
    Intensity,
    Hue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorAssignment {
    pub fills: BTreeMap<String, Rgb>,
    pub legend: Vec<LegendEntry>,
    /// Color used for magnitude swatches that lose their own fill.
    pub representative: Rgb,
}

fn ramp_stops(palette: Option<&Vec<Rgb>>, default: &[Rgb]) -> Vec<Rgb> {
    match palette {
        Some(p) if p.len() >= 2 => p.clone(),
        _ => default.to_vec(),
    }
}

/// Maps each datum to a color. Intensity uses a lightness ramp over
/// [min, max]; hue gives categories palette colors in first-appearance
/// order, or spreads quantitative values along a hue ramp.
pub fn assign_colors(data: &[Datum], spec: &ChannelSpec, mode: ColorMode) -> Result<ColorAssignment, EncodeError> {
    let categorical = mode == ColorMode::Hue && !data.is_empty() && data.iter().all(|d| d.category.is_some());
    if categorical {
        let palette = spec.palette.clone().filter(|p| !p.is_empty()).unwrap_or(DEFAULT_CATEGORICAL.to_vec());
        let ramp = ColorRamp::categorical(palette).expect("palette is not empty");
        let mut by_order: Vec<&Datum> = data.iter().collect();
        by_order.sort_by_key(|d| d.order);
        let mut categories: Vec<&str> = Vec::new();
        for d in &by_order {
            let c = d.category.as_deref().unwrap_or_default();
            if !categories.contains(&c) {
                categories.push(c);
            }
        }
        let color_of = |c: &str| ramp.category(categories.iter().position(|x| *x == c).unwrap_or(0));
        let fills = data
            .iter()
            .map(|d| (d.key.clone(), color_of(d.category.as_deref().unwrap_or_default())))
            .collect();
        let legend = categories
            .iter()
            .map(|c| LegendEntry::new(Swatch::Fill(color_of(c)), *c))
            .collect();
        return Ok(ColorAssignment {
            fills,
            legend,
            representative: ramp.category(0),
        });
    }

    let channel = match mode {
        ColorMode::Intensity => ChannelKind::ColorIntensity,
        ColorMode::Hue => ChannelKind::ColorHue,
    };
    let values = require_values(data, channel)?;
    let stops = match mode {
        ColorMode::Intensity => ramp_stops(spec.palette.as_ref(), &DEFAULT_INTENSITY),
        ColorMode::Hue => ramp_stops(spec.palette.as_ref(), &DEFAULT_HUE_RAMP),
    };
    let ramp = ColorRamp::ramp(stops.clone()).expect("at least two stops");
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fills = data
        .iter()
        .zip(&values)
        .map(|(d, v)| (d.key.clone(), color_at(map_or_midpoint(*v, [min, max], [0.0, 1.0]), &ramp)))
        .collect();
    let legend = if values.is_empty() {
        Vec::new()
    } else {
        vec![LegendEntry::new(
            Swatch::Gradient(stops),
            format!("{} to {}", format_number(min), format_number(max)),
        )]
    };
    Ok(ColorAssignment {
        fills,
        legend,
        representative: color_at(1.0, &ramp),
    })
}

/// Choropleth: one filled region path per datum with a shape.
pub fn encode_color(
    data: &[Datum],
    shapes: &BTreeMap<String, Shape>,
    spec: &ChannelSpec,
    mode: ColorMode,
) -> Result<EncodedLayer, EncodeError> {
    let colors = assign_colors(data, spec, mode)?;
    let mut layer = EncodedLayer::new(spec.kind);
    for d in data {
        let (Some(shape), Some(fill)) = (shapes.get(&d.key), colors.fills.get(&d.key)) else { continue };
        layer.marks.push(
            Mark::new(
                MarkTag::Region,
                Geom::Path(rings_path(shape.rings())),
                Style::fill(*fill).with_stroke(POLITICAL_STROKE, 0.5),
            )
            .keyed(d.key.clone()),
        );
    }
    layer.fills = colors.fills;
    layer.legend = colors.legend;
    Ok(layer)
}
