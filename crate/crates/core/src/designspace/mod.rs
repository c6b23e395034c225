//! The four-dimension grammar (base map, encoding channels, labels,
//! highlights), spec parsing, the dual-encoding compatibility matrix,
//! validation and suggestions.

mod matrix;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::color::Rgb;
use crate::geodata::{Point, ProjectionKind};
use crate::labels::Side;

pub use matrix::{check_compatibility, Compatibility, CompatibilityMatrix, MatrixError, PairEntry, MATRIX_JSON};
pub use validate::{
    accepts, suggest_alternatives, validate, Issue, Severity, SuggestError, Suggestion, ValidationReport, Verdict,
    MAX_ICONS,
};
pub(crate) use validate::series_key;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("malformed spec: {0}")]
    MalformedSpec(String),
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error("at most two channels are allowed, got {0}")]
    TooManyChannels(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "color_intensity")]
    ColorIntensity,
    #[serde(rename = "color_hue")]
    ColorHue,
    #[serde(rename = "length_2d", alias = "length2d")]
    Length2D,
    #[serde(rename = "length_3d", alias = "length3d")]
    Length3D,
    #[serde(rename = "size")]
    Size,
    #[serde(rename = "quantity")]
    Quantity,
    #[serde(rename = "glyph")]
    Glyph,
    #[serde(rename = "directional_flow")]
    DirectionalFlow,
    #[serde(rename = "non_directional_flow")]
    NonDirectionalFlow,
    #[serde(rename = "text")]
    Text,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 10] = [
        ChannelKind::ColorIntensity,
        ChannelKind::ColorHue,
        ChannelKind::Length2D,
        ChannelKind::Length3D,
        ChannelKind::Size,
        ChannelKind::Quantity,
        ChannelKind::Glyph,
        ChannelKind::DirectionalFlow,
        ChannelKind::NonDirectionalFlow,
        ChannelKind::Text,
    ];

    /// Ranking used for suggestions.
    pub const PRIORITY: [ChannelKind; 10] = [
        ChannelKind::ColorIntensity,
        ChannelKind::ColorHue,
        ChannelKind::Length2D,
        ChannelKind::Size,
        ChannelKind::Quantity,
        ChannelKind::Length3D,
        ChannelKind::Glyph,
        ChannelKind::Text,
        ChannelKind::DirectionalFlow,
        ChannelKind::NonDirectionalFlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::ColorIntensity => "color_intensity",
            ChannelKind::ColorHue => "color_hue",
            ChannelKind::Length2D => "length_2d",
            ChannelKind::Length3D => "length_3d",
            ChannelKind::Size => "size",
            ChannelKind::Quantity => "quantity",
            ChannelKind::Glyph => "glyph",
            ChannelKind::DirectionalFlow => "directional_flow",
            ChannelKind::NonDirectionalFlow => "non_directional_flow",
            ChannelKind::Text => "text",
        }
    }

    pub fn from_name(name: &str) -> Option<ChannelKind> {
        serde_json::from_value(Value::String(name.to_string())).ok()
    }

    pub fn is_color(self) -> bool {
        matches!(self, ChannelKind::ColorIntensity | ChannelKind::ColorHue)
    }

    pub fn is_flow(self) -> bool {
        matches!(self, ChannelKind::DirectionalFlow | ChannelKind::NonDirectionalFlow)
    }

    /// Channels that draw their own marks (everything but color and text).
    pub fn is_geometric(self) -> bool {
        !self.is_color() && self != ChannelKind::Text
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMapKind {
    Implicit,
    MinimalPolitical,
    ShapeBasedUniform,
    ShapeBasedVaried,
    Topographic,
    Street,
}

impl BaseMapKind {
    pub const ALL: [BaseMapKind; 6] = [
        BaseMapKind::Implicit,
        BaseMapKind::MinimalPolitical,
        BaseMapKind::ShapeBasedUniform,
        BaseMapKind::ShapeBasedVaried,
        BaseMapKind::Topographic,
        BaseMapKind::Street,
    ];

    pub fn is_supported(self) -> bool {
        !matches!(self, BaseMapKind::Topographic | BaseMapKind::Street)
    }
}

fn default_stroke_width() -> f64 {
    0.5
}

fn default_dot_spacing() -> f64 {
    6.0
}

fn default_dot_radius() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseMapSpec {
    pub kind: BaseMapKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<Rgb>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke: Option<Rgb>,
    #[serde(default = "default_stroke_width")]
    pub stroke_width: f64,
    #[serde(default = "default_dot_spacing")]
    pub dot_spacing: f64,
    #[serde(default = "default_dot_radius")]
    pub dot_radius: f64,
}

impl BaseMapSpec {
    pub fn new(kind: BaseMapKind) -> Self {
        Self {
            kind,
            fill: None,
            stroke: None,
            stroke_width: default_stroke_width(),
            dot_spacing: default_dot_spacing(),
            dot_radius: default_dot_radius(),
        }
    }
}

impl Default for BaseMapSpec {
    fn default() -> Self {
        Self::new(BaseMapKind::MinimalPolitical)
    }
}

/// Accepts either a bare kind string or a full object.
fn basemap_from_json<'de, D: Deserializer<'de>>(d: D) -> Result<BaseMapSpec, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Kind(BaseMapKind),
        Full(BaseMapSpec),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::Kind(kind) => BaseMapSpec::new(kind),
        Raw::Full(spec) => spec,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GlyphDescriptor {
    /// Named icon; `path` supplies custom symbol data in a 24 x 24 box.
    Icon {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
    /// Mini bar chart; series keyed by region name.
    Bar {
        series: BTreeMap<String, Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        palette: Option<Vec<Rgb>>,
    },
    /// Mini pie chart; series keyed by region name.
    Pie {
        series: BTreeMap<String, Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        palette: Option<Vec<Rgb>>,
    },
}

impl Default for GlyphDescriptor {
    fn default() -> Self {
        GlyphDescriptor::Icon {
            name: "person".into(),
            path: None,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// One encoding channel with its optional parameters. Unset parameters fall
/// back to the defaults exposed by the accessor methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palette: Option<Vec<Rgb>>,
    /// Fill for geometric marks when no color channel restyles them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Rgb>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bar_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub cartogram: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_row: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icon_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyph: Option<GlyphDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glyph_monochrome: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_size: Option<f64>,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind) -> Self {
        Self {
            kind,
            palette: None,
            color: None,
            max_height: None,
            bar_width: None,
            max_radius: None,
            cartogram: false,
            unit: None,
            per_row: None,
            icon: None,
            icon_size: None,
            glyph: None,
            glyph_monochrome: None,
            max_width: None,
            font_size: None,
        }
    }

    pub fn max_height(&self) -> f64 {
        self.max_height.unwrap_or(60.0)
    }

    pub fn bar_width(&self) -> f64 {
        self.bar_width.unwrap_or(match self.kind {
            ChannelKind::Length3D => 10.0,
            _ => 8.0,
        })
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius.unwrap_or(20.0)
    }

    pub fn per_row(&self) -> usize {
        self.per_row.unwrap_or(5)
    }

    pub fn icon(&self) -> &str {
        self.icon.as_deref().unwrap_or("person")
    }

    pub fn icon_size(&self) -> f64 {
        self.icon_size.unwrap_or(match self.kind {
            ChannelKind::Glyph => 24.0,
            _ => 10.0,
        })
    }

    pub fn glyph(&self) -> GlyphDescriptor {
        self.glyph.clone().unwrap_or_default()
    }

    /// Explicit flag, else icons count as monochrome and mini-charts do not.
    pub fn is_monochrome(&self) -> bool {
        self.glyph_monochrome
            .unwrap_or(matches!(self.glyph(), GlyphDescriptor::Icon { .. }))
    }

    pub fn max_width(&self) -> f64 {
        self.max_width.unwrap_or(6.0)
    }

    pub fn font_size(&self) -> f64 {
        self.font_size.unwrap_or(10.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelStrategy {
    Situated,
    MatchedText,
    MatchedIcon,
    MatchedColor,
    LinkedConvenient,
    LinkedAligned,
    LinkedOrdered,
}

impl LabelStrategy {
    pub const ALL: [LabelStrategy; 7] = [
        LabelStrategy::Situated,
        LabelStrategy::MatchedText,
        LabelStrategy::MatchedIcon,
        LabelStrategy::MatchedColor,
        LabelStrategy::LinkedConvenient,
        LabelStrategy::LinkedAligned,
        LabelStrategy::LinkedOrdered,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelSpec {
    pub strategy: LabelStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_size: Option<f64>,
    /// Margins used by aligned labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<Side>>,
    /// Guide polyline in viewport pixels for ordered labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guide: Option<Vec<Point>>,
    /// Icon shown by matched-icon labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icon: Option<String>,
    /// Situated labels that do not fit fall back to convenient placement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<bool>,
}

impl LabelSpec {
    pub fn new(strategy: LabelStrategy) -> Self {
        Self {
            strategy,
            font_size: None,
            sides: None,
            guide: None,
            icon: None,
            fallback: None,
        }
    }

    pub fn font_size(&self) -> f64 {
        self.font_size.unwrap_or(10.0)
    }

    pub fn icon(&self) -> &str {
        self.icon.as_deref().unwrap_or("pin")
    }

    pub fn fallback(&self) -> bool {
        self.fallback.unwrap_or(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighlightKind {
    Glow,
    Pin,
    ContrastingColor,
    #[serde(rename = "extrude_3d", alias = "extrude3d")]
    Extrude3D,
    Contour,
    ZoomedInset,
}

impl HighlightKind {
    pub const ALL: [HighlightKind; 6] = [
        HighlightKind::Glow,
        HighlightKind::Pin,
        HighlightKind::ContrastingColor,
        HighlightKind::Extrude3D,
        HighlightKind::Contour,
        HighlightKind::ZoomedInset,
    ];

    pub fn needs_region(self) -> bool {
        !matches!(self, HighlightKind::Glow | HighlightKind::Pin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HighlightTarget {
    Region(String),
    Point { lon: f64, lat: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsetPlacement {
    Adjacent,
    Overlay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighlightSpec {
    pub kind: HighlightKind,
    pub target: HighlightTarget,
    /// Glow core radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Pin height.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    /// Inset magnification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<InsetPlacement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Rgb>,
}

impl HighlightSpec {
    pub fn new(kind: HighlightKind, target: HighlightTarget) -> Self {
        Self {
            kind,
            target,
            radius: None,
            height: None,
            scale: None,
            placement: None,
            stroke_width: None,
            color: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
}

impl Default for Viewport {
    fn default() -> Self {
        Self {
            width: 960.0,
            height: 540.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfographicSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, deserialize_with = "basemap_from_json")]
    pub basemap: BaseMapSpec,
    pub channels: Vec<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<LabelSpec>,
    #[serde(default)]
    pub highlights: Vec<HighlightSpec>,
    #[serde(default)]
    pub projection: ProjectionKind,
    #[serde(default)]
    pub viewport: Viewport,
    #[serde(default)]
    pub seed: u64,
    /// Dataset name to region name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aliases: BTreeMap<String, String>,
}

impl InfographicSpec {
    pub fn new(channels: Vec<ChannelSpec>) -> Self {
        Self {
            title: None,
            basemap: BaseMapSpec::default(),
            channels,
            labels: None,
            highlights: Vec::new(),
            projection: ProjectionKind::default(),
            viewport: Viewport::default(),
            seed: 0,
            aliases: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Parses a JSON spec, filling defaults and enforcing 1 or 2 distinct
/// channels and a positive viewport.
pub fn parse_spec(text: &str) -> Result<InfographicSpec, SpecError> {
    let root: Value = serde_json::from_str(text).map_err(|e| SpecError::MalformedSpec(e.to_string()))?;
    let channels = root
        .get("channels")
        .and_then(Value::as_array)
        .ok_or_else(|| SpecError::MalformedSpec("\"channels\" must be an array".into()))?;
    if channels.len() > 2 {
        return Err(SpecError::TooManyChannels(channels.len()));
    }
    for ch in channels {
        match ch.get("kind") {
            Some(Value::String(name)) if ChannelKind::from_name(name).is_none() => {
                return Err(SpecError::UnknownChannel(name.clone()));
            }
            Some(Value::String(_)) => {}
            _ => return Err(SpecError::MalformedSpec("every channel needs a string \"kind\"".into())),
        }
    }
    let spec: InfographicSpec = serde_json::from_value(root).map_err(|e| SpecError::MalformedSpec(e.to_string()))?;
    if spec.channels.is_empty() {
        return Err(SpecError::MalformedSpec("at least one channel is required".into()));
    }
    if spec.channels.len() == 2 && spec.channels[0].kind == spec.channels[1].kind {
        return Err(SpecError::MalformedSpec(format!(
            "channel {} is listed twice",
            spec.channels[0].kind.name()
        )));
    }
    let Viewport { width, height } = spec.viewport;
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(SpecError::MalformedSpec(format!("viewport must be positive, got {width}x{height}")));
    }
    Ok(spec)
}

/// Everything an authoring surface needs to enumerate the design space.
#[derive(Debug, Clone, Serialize)]
pub struct Catalog {
    pub channels: Vec<ChannelKind>,
    pub basemaps: Vec<BaseMapEntry>,
    pub label_strategies: Vec<LabelStrategy>,
    pub highlights: Vec<HighlightKind>,
    pub icons: Vec<&'static str>,
    pub matrix: Vec<PairEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaseMapEntry {
    pub kind: BaseMapKind,
    pub supported: bool,
}

pub fn catalog() -> Catalog {
    Catalog {
        channels: ChannelKind::ALL.to_vec(),
        basemaps: BaseMapKind::ALL
            .iter()
            .map(|k| BaseMapEntry {
                kind: *k,
                supported: k.is_supported(),
            })
            .collect(),
        label_strategies: LabelStrategy::ALL.to_vec(),
        highlights: HighlightKind::ALL.to_vec(),
        icons: crate::icons::BUILTIN.iter().map(|(n, _)| *n).collect(),
        matrix: CompatibilityMatrix::bundled().pairs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec_gets_defaults() {
        let spec = parse_spec(r#"{"channels":[{"kind":"color_intensity"}]}"#).unwrap();
        assert_eq!(spec.projection, ProjectionKind::Equirectangular);
        assert_eq!(spec.seed, 0);
        assert_eq!(spec.basemap.kind, BaseMapKind::MinimalPolitical);
        assert_eq!(spec.viewport, Viewport::default());
        assert_eq!(spec.channels[0].kind, ChannelKind::ColorIntensity);
    }

    #[test]
    fn structural_errors() {
        let three = r#"{"channels":[{"kind":"size"},{"kind":"text"},{"kind":"glyph"}]}"#;
        assert_eq!(parse_spec(three), Err(SpecError::TooManyChannels(3)));
        let unknown = r#"{"channels":[{"kind":"sparkline"}]}"#;
        assert_eq!(parse_spec(unknown), Err(SpecError::UnknownChannel("sparkline".into())));
        assert!(matches!(parse_spec("{"), Err(SpecError::MalformedSpec(_))));
        assert!(matches!(parse_spec(r#"{"channels":[]}"#), Err(SpecError::MalformedSpec(_))));
        let twice = r#"{"channels":[{"kind":"size"},{"kind":"size"}]}"#;
        assert!(matches!(parse_spec(twice), Err(SpecError::MalformedSpec(_))));
        let bad_view = r#"{"channels":[{"kind":"size"}],"viewport":{"width":0,"height":10}}"#;
        assert!(matches!(parse_spec(bad_view), Err(SpecError::MalformedSpec(_))));
        let typo = r#"{"channels":[{"kind":"size","max_raduis":3}]}"#;
        assert!(matches!(parse_spec(typo), Err(SpecError::MalformedSpec(_))));
    }

    #[test]
    fn basemap_string_or_object() {
        let s = parse_spec(r#"{"basemap":"topographic","channels":[{"kind":"text"}]}"#).unwrap();
        assert_eq!(s.basemap.kind, BaseMapKind::Topographic);
        let s = parse_spec(
            r##"{"basemap":{"kind":"shape_based_varied","dot_spacing":9,"fill":"#AABBCC"},"channels":[{"kind":"text"}]}"##,
        )
        .unwrap();
        assert_eq!(s.basemap.dot_spacing, 9.0);
        assert_eq!(s.basemap.dot_radius, 2.0);
        assert_eq!(s.basemap.fill, Some(Rgb::new(0xaa, 0xbb, 0xcc)));
    }

    #[test]
    fn full_spec_round_trips() {
        let text = r##"{
            "title": "t",
            "basemap": "implicit",
            "channels": [
                {"kind": "length_2d", "max_height": 40},
                {"kind": "glyph", "glyph": {"type": "pie", "series": {"A": [1, 2]}}, "glyph_monochrome": false}
            ],
            "labels": {"strategy": "linked_aligned", "sides": ["right", "top"]},
            "highlights": [
                {"kind": "glow", "target": {"lon": 10, "lat": 20}, "radius": 5},
                {"kind": "zoomed_inset", "target": "A", "scale": 3, "placement": "overlay"}
            ],
            "projection": "mercator",
            "viewport": {"width": 400, "height": 300},
            "seed": 18446744073709551615,
            "aliases": {"USA": "United States of America"}
        }"##;
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.seed, u64::MAX);
        assert_eq!(spec.highlights[0].target, HighlightTarget::Point { lon: 10.0, lat: 20.0 });
        assert_eq!(spec.highlights[1].target, HighlightTarget::Region("A".into()));
        assert!(!spec.channels[1].is_monochrome());
        assert_eq!(parse_spec(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn channel_names_round_trip() {
        for k in ChannelKind::ALL {
            assert_eq!(ChannelKind::from_name(k.name()), Some(k));
        }
        assert_eq!(ChannelKind::from_name("length2d"), Some(ChannelKind::Length2D));
        let mut sorted = ChannelKind::PRIORITY.to_vec();
        sorted.sort();
        assert_eq!(sorted, ChannelKind::ALL.to_vec());
    }

    #[test]
    fn catalog_lists_ten_channels() {
        let c = catalog();
        assert_eq!(c.channels.len(), 10);
        assert_eq!(c.matrix.len(), 45);
    }
}
