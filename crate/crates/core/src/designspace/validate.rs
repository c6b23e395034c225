//! Spec validation against joined data, and ranked alternatives for
//! channel choices that fail.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::{
    BaseMapKind, ChannelKind, ChannelSpec, GlyphDescriptor, HighlightKind, HighlightTarget, InfographicSpec,
    LabelStrategy, CompatibilityMatrix,
};
use crate::dataio::{FieldKind, JoinedData};
use crate::geodata::{normalize_key, GeoPoint, RegionSet};
use crate::highlight::MAX_INSET_SCALE;
use crate::icons;
use crate::scales::nice_ceil;

/// Upper bound on icons per region for the quantity channel.
pub const MAX_ICONS: usize = 200;
const MAX_SERIES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub code: String,
    pub severity: Severity,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<String>,
}

impl Issue {
    pub fn error(code: &str, message: impl Into<String>, element: Option<String>) -> Self {
        Self {
            code: code.to_string(),
            severity: Severity::Error,
            message: message.into(),
            element,
        }
    }

    pub fn warning(code: &str, message: impl Into<String>, element: Option<String>) -> Self {
        Self {
            code: code.to_string(),
            severity: Severity::Warning,
            message: message.into(),
            element,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// A replacement channel set with full channel parameters, ranked from 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suggestion {
    pub rank: usize,
    pub channels: Vec<ChannelKind>,
    pub specs: Vec<ChannelSpec>,
}

impl Suggestion {
    /// `spec` with its channels replaced by this suggestion.
    pub fn apply(&self, spec: &InfographicSpec) -> InfographicSpec {
        InfographicSpec {
            channels: self.specs.clone(),
            ..spec.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub issues: Vec<Issue>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub suggestions: Vec<Suggestion>,
}

impl ValidationReport {
    pub fn from_issues(issues: Vec<Issue>) -> Self {
        let verdict = if issues.iter().any(Issue::is_error) {
            Verdict::Invalid
        } else {
            Verdict::Valid
        };
        Self {
            verdict,
            issues,
            suggestions: Vec::new(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuggestError {
    #[error("no channel combination fits this data")]
    NoAlternatives,
}

/// Whether a channel can encode data of the given kind. Flow tables accept
/// flow channels plus the channels that can restyle or annotate an edge by
/// its magnitude.
pub fn accepts(kind: ChannelKind, field: FieldKind) -> bool {
    use ChannelKind::*;
    match field {
        FieldKind::Quantitative => !kind.is_flow(),
        FieldKind::Categorical => matches!(kind, ColorHue | Glyph | Text),
        FieldKind::Flow => matches!(
            kind,
            DirectionalFlow | NonDirectionalFlow | ColorIntensity | ColorHue | Quantity | Text
        ),
    }
}

fn field_name(field: FieldKind) -> &'static str {
    match field {
        FieldKind::Quantitative => "quantitative",
        FieldKind::Categorical => "categorical",
        FieldKind::Flow => "flow",
    }
}

/// Values a quantitative channel would encode: row values or edge magnitudes.
pub(crate) fn encoded_values(joined: &JoinedData) -> Vec<f64> {
    if joined.field_kind == FieldKind::Flow {
        joined.flows.iter().map(|f| f.magnitude).collect()
    } else {
        joined.matched.iter().filter_map(|r| r.row.value.as_number()).collect()
    }
}

/// Unit value for quantity icons: the spec's, else a round number giving at
/// most about 20 icons for the largest value.
pub fn quantity_unit(spec: &ChannelSpec, joined: &JoinedData) -> f64 {
    spec.unit.unwrap_or_else(|| {
        let max = encoded_values(joined).into_iter().fold(0.0, f64::max);
        nice_ceil(max / 20.0)
    })
}

/// Region key a glyph series name refers to.
pub(crate) fn series_key(name: &str, aliases: &BTreeMap<String, String>) -> String {
    let key = normalize_key(name);
    aliases
        .iter()
        .find(|(a, _)| normalize_key(a) == key)
        .map(|(_, target)| normalize_key(target))
        .unwrap_or(key)
}

fn positive(value: Option<f64>, name: &str, element: &str, issues: &mut Vec<Issue>) {
    if let Some(v) = value {
        if !(v > 0.0 && v.is_finite()) {
            issues.push(Issue::error(
                "invalid_param",
                format!("{name} must be a positive number, got {v}"),
                Some(element.to_string()),
            ));
        }
    }
}

/// Problems with one channel's parameters, independent of other channels.
fn param_issues(ch: &ChannelSpec, joined: &JoinedData, aliases: &BTreeMap<String, String>) -> Vec<Issue> {
    let el = ch.kind.name();
    let mut issues = Vec::new();
    positive(ch.max_height, "max_height", el, &mut issues);
    positive(ch.bar_width, "bar_width", el, &mut issues);
    positive(ch.max_radius, "max_radius", el, &mut issues);
    positive(ch.unit, "unit", el, &mut issues);
    positive(ch.icon_size, "icon_size", el, &mut issues);
    positive(ch.max_width, "max_width", el, &mut issues);
    positive(ch.font_size, "font_size", el, &mut issues);
    if ch.per_row == Some(0) {
        issues.push(Issue::error("invalid_param", "per_row must be at least 1", Some(el.into())));
    }
    if let Some(palette) = &ch.palette {
        let needed = match ch.kind {
            ChannelKind::ColorIntensity => 2,
            _ => 1,
        };
        if palette.len() < needed {
            issues.push(Issue::error(
                "invalid_palette",
                format!("{el} needs at least {needed} palette colors"),
                Some(el.into()),
            ));
        }
    }
    match ch.kind {
        ChannelKind::Quantity => {
            if icons::builtin(ch.icon()).is_none() {
                issues.push(Issue::error(
                    "unknown_icon",
                    format!("unknown icon {:?}", ch.icon()),
                    Some(el.into()),
                ));
            }
            let unit = quantity_unit(ch, joined);
            if unit > 0.0 && unit.is_finite() {
                let most = encoded_values(joined)
                    .into_iter()
                    .map(|v| (v / unit).round())
                    .fold(0.0, f64::max);
                if most > MAX_ICONS as f64 {
                    issues.push(Issue::error(
                        "too_many_icons",
                        format!("largest value needs {most} icons (limit {MAX_ICONS}); raise the unit"),
                        Some(el.into()),
                    ));
                }
            }
        }
        ChannelKind::Glyph => match ch.glyph() {
            GlyphDescriptor::Icon { name, path } => {
                if path.is_none() && icons::builtin(&name).is_none() {
                    issues.push(Issue::error("unknown_icon", format!("unknown icon {name:?}"), Some(el.into())));
                }
            }
            GlyphDescriptor::Bar { series, .. } | GlyphDescriptor::Pie { series, .. } => {
                let covered = series
                    .keys()
                    .filter(|name| {
                        let key = series_key(name, aliases);
                        joined.matched.iter().any(|r| r.key == key)
                    })
                    .count();
                if series.is_empty() || covered == 0 {
                    issues.push(Issue::error(
                        "missing_series",
                        "mini-chart glyph needs series for at least one joined region",
                        Some(el.into()),
                    ));
                }
                for (name, values) in &series {
                    if values.is_empty() || values.len() > MAX_SERIES {
                        issues.push(Issue::error(
                            "invalid_param",
                            format!("series for {name:?} must have 1 to {MAX_SERIES} values"),
                            Some(el.into()),
                        ));
                    }
                    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                        issues.push(Issue::error(
                            "invalid_param",
                            format!("series for {name:?} must be finite and non-negative"),
                            Some(el.into()),
                        ));
                    }
                }
            }
        },
        _ => {}
    }
    issues
}

fn alone_ok(ch: &ChannelSpec, joined: &JoinedData, aliases: &BTreeMap<String, String>) -> bool {
    accepts(ch.kind, joined.field_kind) && !param_issues(ch, joined, aliases).iter().any(Issue::is_error)
}

/// Channel-related problems: data kind, parameters, pair compatibility and
/// the flow-channel requirement.
fn channel_issues(channels: &[ChannelSpec], joined: &JoinedData, aliases: &BTreeMap<String, String>) -> Vec<Issue> {
    let mut issues = Vec::new();
    for ch in channels {
        if !accepts(ch.kind, joined.field_kind) {
            issues.push(Issue::error(
                "wrong_data_kind",
                format!("{} cannot encode {} data", ch.kind.name(), field_name(joined.field_kind)),
                Some(ch.kind.name().into()),
            ));
        }
        issues.extend(param_issues(ch, joined, aliases));
    }
    if let [a, b] = channels {
        let monochrome = [a, b]
            .iter()
            .find(|c| c.kind == ChannelKind::Glyph)
            .is_none_or(|g| g.is_monochrome());
        let verdict = CompatibilityMatrix::bundled().check(a.kind, b.kind, monochrome);
        if !verdict.is_compatible() {
            issues.push(Issue::error(
                "incompatible_channels",
                format!(
                    "{} and {} cannot be combined: {}",
                    a.kind.name(),
                    b.kind.name(),
                    verdict.reason().unwrap_or_default()
                ),
                Some(format!("{}+{}", a.kind.name(), b.kind.name())),
            ));
        }
    }
    if joined.field_kind == FieldKind::Flow && !channels.iter().any(|c| c.kind.is_flow()) {
        issues.push(Issue::error(
            "missing_flow_channel",
            "flow data needs a directional or non-directional flow channel",
            None,
        ));
    }
    issues
}

fn basemap_issues(spec: &InfographicSpec) -> Vec<Issue> {
    let b = &spec.basemap;
    let mut issues = Vec::new();
    if !b.kind.is_supported() {
        issues.push(Issue::error(
            "unsupported_basemap",
            format!("{:?} base maps need external elevation or street data and are not rendered", b.kind),
            Some("basemap".into()),
        ));
    }
    // Varied radii stay strictly below 1.5 r, so touching at 3 r is impossible.
    let bound = match b.kind {
        BaseMapKind::ShapeBasedUniform => Some((2.0, b.dot_spacing > 2.0 * b.dot_radius)),
        BaseMapKind::ShapeBasedVaried => Some((3.0, b.dot_spacing >= 3.0 * b.dot_radius)),
        _ => None,
    };
    if let Some((factor, apart)) = bound {
        let ok = b.dot_radius > 0.0 && b.dot_spacing.is_finite() && apart;
        if !ok {
            issues.push(Issue::error(
                "invalid_basemap_style",
                format!(
                    "dot spacing {} is too small for {factor} x radius {}; dots would overlap",
                    b.dot_spacing, b.dot_radius
                ),
                Some("basemap".into()),
            ));
        }
    }
    if !(b.stroke_width >= 0.0 && b.stroke_width.is_finite()) {
        issues.push(Issue::error("invalid_param", "stroke_width must be non-negative", Some("basemap".into())));
    }
    issues
}

fn label_issues(spec: &InfographicSpec) -> Vec<Issue> {
    let Some(labels) = &spec.labels else {
        return Vec::new();
    };
    let mut issues = Vec::new();
    positive(labels.font_size, "font_size", "labels", &mut issues);
    match labels.strategy {
        LabelStrategy::LinkedAligned if labels.sides.as_ref().is_none_or(|s| s.is_empty()) => {
            issues.push(Issue::error(
                "missing_label_params",
                "aligned labels need at least one side",
                Some("labels".into()),
            ));
        }
        LabelStrategy::LinkedOrdered => {
            let guide = labels.guide.as_deref().unwrap_or(&[]);
            let length: f64 = guide.windows(2).map(|w| w[0].distance(w[1])).sum();
            if guide.len() < 2 || !(length > 0.0 && length.is_finite()) {
                issues.push(Issue::error(
                    "missing_label_params",
                    "ordered labels need a guide path of at least two points",
                    Some("labels".into()),
                ));
            }
        }
        LabelStrategy::MatchedIcon if icons::builtin(labels.icon()).is_none() => {
            issues.push(Issue::error(
                "unknown_icon",
                format!("unknown icon {:?}", labels.icon()),
                Some("labels".into()),
            ));
        }
        _ => {}
    }
    issues
}

fn highlight_issues(spec: &InfographicSpec, regions: &RegionSet) -> Vec<Issue> {
    let mut issues = Vec::new();
    for (i, h) in spec.highlights.iter().enumerate() {
        let el = format!("highlights[{i}]");
        match &h.target {
            HighlightTarget::Region(name) => {
                if !regions.contains_key(&series_key(name, &spec.aliases)) {
                    issues.push(Issue::error(
                        "unknown_highlight_target",
                        format!("no region named {name:?}"),
                        Some(el.clone()),
                    ));
                }
            }
            HighlightTarget::Point { lon, lat } => {
                if h.kind.needs_region() {
                    issues.push(Issue::error(
                        "highlight_needs_region",
                        format!("{:?} highlights target a region, not a point", h.kind),
                        Some(el.clone()),
                    ));
                } else if GeoPoint::new(*lon, *lat).is_err() {
                    issues.push(Issue::error(
                        "invalid_highlight_target",
                        format!("point ({lon}, {lat}) is out of range"),
                        Some(el.clone()),
                    ));
                }
            }
        }
        positive(h.radius, "radius", &el, &mut issues);
        positive(h.height, "height", &el, &mut issues);
        positive(h.stroke_width, "stroke_width", &el, &mut issues);
        if h.kind == HighlightKind::ZoomedInset {
            if let Some(s) = h.scale {
                if !(s > 1.0 && s <= MAX_INSET_SCALE) {
                    issues.push(Issue::error(
                        "invalid_param",
                        format!("inset scale must be in (1, {MAX_INSET_SCALE}], got {s}"),
                        Some(el.clone()),
                    ));
                }
            }
        }
    }
    issues
}

fn data_warnings(joined: &JoinedData) -> Vec<Issue> {
    let mut issues = Vec::new();
    if !joined.unmatched_names.is_empty() {
        issues.push(Issue::warning(
            "unmatched_rows",
            format!(
                "{} row(s) matched no region: {}",
                joined.unmatched_names.len(),
                joined.unmatched_names.join(", ")
            ),
            Some("data".into()),
        ));
    }
    if !joined.uncovered_regions.is_empty() {
        issues.push(Issue::warning(
            "uncovered_regions",
            format!("{} region(s) have no data", joined.uncovered_regions.len()),
            Some("data".into()),
        ));
    }
    issues
}

/// Full check of a parsed spec against joined data. Channel failures come
/// with ranked suggestions.
pub fn validate(spec: &InfographicSpec, joined: &JoinedData, regions: &RegionSet) -> ValidationReport {
    let channel = channel_issues(&spec.channels, joined, &spec.aliases);
    let channel_failed = channel.iter().any(Issue::is_error);
    let mut issues = channel;
    issues.extend(basemap_issues(spec));
    issues.extend(label_issues(spec));
    issues.extend(highlight_issues(spec, regions));
    issues.extend(data_warnings(joined));
    let mut report = ValidationReport::from_issues(issues);
    if channel_failed {
        report.suggestions = suggest_alternatives(spec, joined).unwrap_or_default();
    }
    report
}

/// Ranked channel sets that pass every channel check. The first channel is
/// kept when it is fine on its own and paired with each other channel in
/// priority order; otherwise each channel in priority order replaces it,
/// keeping the user's second channel where that still works.
pub fn suggest_alternatives(spec: &InfographicSpec, joined: &JoinedData) -> Result<Vec<Suggestion>, SuggestError> {
    let aliases = &spec.aliases;
    let first = &spec.channels[0];
    let second = spec.channels.get(1);
    let mut candidates: Vec<Vec<ChannelSpec>> = Vec::new();
    if alone_ok(first, joined, aliases) {
        for kind in ChannelKind::PRIORITY {
            if kind == first.kind {
                continue;
            }
            let other = match second {
                Some(s) if s.kind == kind => s.clone(),
                _ => ChannelSpec::new(kind),
            };
            candidates.push(vec![first.clone(), other]);
        }
        candidates.push(vec![first.clone()]);
    } else {
        for kind in ChannelKind::PRIORITY {
            if kind == first.kind {
                continue;
            }
            let replacement = ChannelSpec::new(kind);
            match second {
                Some(s) if s.kind == kind => candidates.push(vec![s.clone()]),
                Some(s) => {
                    candidates.push(vec![replacement.clone(), s.clone()]);
                    candidates.push(vec![replacement]);
                }
                None => candidates.push(vec![replacement]),
            }
        }
    }

    let mut out: Vec<Suggestion> = Vec::new();
    for specs in candidates {
        let kinds: Vec<ChannelKind> = specs.iter().map(|c| c.kind).collect();
        if out.iter().any(|s| s.channels == kinds) || kinds == spec.channels.iter().map(|c| c.kind).collect::<Vec<_>>() {
            continue;
        }
        if channel_issues(&specs, joined, aliases).iter().any(Issue::is_error) {
            continue;
        }
        out.push(Suggestion {
            rank: out.len() + 1,
            channels: kinds,
            specs,
        });
    }
    if out.is_empty() {
        return Err(SuggestError::NoAlternatives);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::{join, parse_data};
    use crate::geodata::parse_boundaries;

    fn regions() -> RegionSet {
        let feature = |name: &str, x: f64| {
            format!(
                r#"{{"type":"Feature","properties":{{"name":"{name}"}},"geometry":{{"type":"Polygon","coordinates":[[[{x},0],[{},0],[{},5],[{x},5],[{x},0]]]}}}}"#,
                x + 5.0,
                x + 5.0
            )
        };
        parse_boundaries(&format!(
            r#"{{"type":"FeatureCollection","features":[{},{},{}]}}"#,
            feature("A", 0.0),
            feature("B", 10.0),
            feature("C", 20.0)
        ))
        .unwrap()
    }

    fn joined(data: &str) -> JoinedData {
        join(&regions(), &parse_data(data).unwrap(), None).unwrap()
    }

    fn quantitative() -> JoinedData {
        joined(r#"[{"name":"A","value":1},{"name":"B","value":2},{"name":"C","value":4}]"#)
    }

    fn categorical() -> JoinedData {
        joined(r#"[{"name":"A","value":"x"},{"name":"B","value":"y"}]"#)
    }

    fn flows() -> JoinedData {
        joined(r#"[{"name":"A","to":"B","value":3}]"#)
    }

    fn spec(kinds: &[ChannelKind]) -> InfographicSpec {
        InfographicSpec::new(kinds.iter().map(|k| ChannelSpec::new(*k)).collect())
    }

    #[test]
    fn hue_with_length_is_valid() {
        let r = validate(&spec(&[ChannelKind::ColorHue, ChannelKind::Length2D]), &quantitative(), &regions());
        assert!(r.is_valid(), "{r:?}");
    }

    #[test]
    fn length_on_categorical_suggests_hue_first() {
        let r = validate(&spec(&[ChannelKind::Length2D]), &categorical(), &regions());
        assert!(!r.is_valid());
        assert!(r.has_code("wrong_data_kind"));
        assert_eq!(r.suggestions[0].channels, vec![ChannelKind::ColorHue]);
    }

    #[test]
    fn intensity_hue_pair_suggests_intensity_length() {
        let s = spec(&[ChannelKind::ColorIntensity, ChannelKind::ColorHue]);
        let r = validate(&s, &quantitative(), &regions());
        assert!(r.has_code("incompatible_channels"));
        assert_eq!(
            r.suggestions[0].channels,
            vec![ChannelKind::ColorIntensity, ChannelKind::Length2D]
        );
    }

    #[test]
    fn flow_data_with_size_suggests_flows() {
        let r = validate(&spec(&[ChannelKind::Size]), &flows(), &regions());
        assert!(r.has_code("missing_flow_channel"));
        let kinds: Vec<Vec<ChannelKind>> = r.suggestions.iter().map(|s| s.channels.clone()).collect();
        assert_eq!(
            kinds,
            vec![vec![ChannelKind::DirectionalFlow], vec![ChannelKind::NonDirectionalFlow]]
        );
    }

    #[test]
    fn unsupported_basemap_flagged() {
        let mut s = spec(&[ChannelKind::ColorIntensity]);
        s.basemap.kind = BaseMapKind::Topographic;
        let r = validate(&s, &quantitative(), &regions());
        assert!(r.has_code("unsupported_basemap"));
        assert!(!r.is_valid());
        assert!(r.suggestions.is_empty());
    }

    #[test]
    fn too_many_icons() {
        let mut s = spec(&[ChannelKind::Quantity]);
        s.channels[0].unit = Some(0.01);
        let r = validate(&s, &quantitative(), &regions());
        assert!(r.has_code("too_many_icons"));
        assert!(validate(&spec(&[ChannelKind::Quantity]), &quantitative(), &regions()).is_valid());
    }

    #[test]
    fn highlight_targets_checked() {
        let mut s = spec(&[ChannelKind::ColorIntensity]);
        s.highlights.push(super::super::HighlightSpec::new(
            HighlightKind::Contour,
            HighlightTarget::Region("Nowhere".into()),
        ));
        s.highlights.push(super::super::HighlightSpec::new(
            HighlightKind::Extrude3D,
            HighlightTarget::Point { lon: 1.0, lat: 1.0 },
        ));
        let r = validate(&s, &quantitative(), &regions());
        assert!(r.has_code("unknown_highlight_target"));
        assert!(r.has_code("highlight_needs_region"));
    }

    #[test]
    fn label_params_checked() {
        let mut s = spec(&[ChannelKind::ColorIntensity]);
        s.labels = Some(super::super::LabelSpec::new(LabelStrategy::LinkedOrdered));
        assert!(validate(&s, &quantitative(), &regions()).has_code("missing_label_params"));
    }

    #[test]
    fn multicolor_glyph_with_hue_rejected() {
        let mut s = spec(&[ChannelKind::Glyph, ChannelKind::ColorHue]);
        assert!(validate(&s, &categorical(), &regions()).is_valid());
        s.channels[0].glyph_monochrome = Some(false);
        assert!(validate(&s, &categorical(), &regions()).has_code("incompatible_channels"));
    }

    #[test]
    fn unmatched_rows_warn_only() {
        let j = joined(r#"[{"name":"A","value":1},{"name":"Zed","value":2}]"#);
        let r = validate(&spec(&[ChannelKind::ColorIntensity]), &j, &regions());
        assert!(r.is_valid());
        assert!(r.has_code("unmatched_rows"));
    }
}
