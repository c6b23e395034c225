use std::collections::{BTreeMap, BTreeSet};

use geoglyph::color::hue_distance;
use geoglyph::dataio::{join, parse_data};
use geoglyph::designspace::{parse_spec, InsetPlacement};
use geoglyph::gallery::GALLERY;
use geoglyph::geodata::{Point, Rect};
use geoglyph::highlight::{build_inset, contrast_color};
use geoglyph::pipeline::Engine;
use geoglyph::scales::{DEFAULT_CATEGORICAL, DEFAULT_HUE_RAMP, DEFAULT_INTENSITY};
use geoglyph::scene::{to_svg, Geom, LayerKind, Mark, MarkTag, Segment, Style};
use proptest::prelude::*;

fn engine() -> &'static Engine {
    static ENGINE: std::sync::OnceLock<Engine> = std::sync::OnceLock::new();
    ENGINE.get_or_init(Engine::world)
}

const EUROPE: &str = r#"[
    {"name": "France", "value": 3.0, "label": "France 3.0"},
    {"name": "Germany", "value": 4.1},
    {"name": "Spain", "value": 1.4},
    {"name": "Italy", "value": 2.0},
    {"name": "Switzerland", "value": 0.8},
    {"name": "Poland", "value": 0.7}
]"#;

#[test]
fn gallery_svgs_are_well_formed() {
    let order: Vec<String> = LayerKind::ORDER.iter().map(|k| format!("layer-{}", k.prefix())).collect();
    for entry in &GALLERY {
        let out = engine().render(entry.spec, entry.data);
        let svg = out.svg.unwrap_or_else(|| panic!("{}: {}", entry.name, out.report.to_json()));
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let mut ids = BTreeSet::new();
        for node in doc.descendants().filter(|n| n.is_element()) {
            if let Some(id) = node.attribute("id") {
                assert!(ids.insert(id.to_string()), "{}: duplicate id {id}", entry.name);
            }
        }
        for node in doc.descendants().filter(|n| n.is_element()) {
            for attr in node.attributes() {
                let v = attr.value();
                let target = v
                    .strip_prefix("url(#")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| (attr.name() == "href").then(|| v.trim_start_matches('#')));
                if let Some(t) = target {
                    assert!(ids.contains(t), "{}: dangling reference {v}", entry.name);
                }
            }
        }
        let groups: Vec<&str> = doc
            .root_element()
            .children()
            .filter(|n| n.has_tag_name("g"))
            .filter_map(|n| n.attribute("id"))
            .collect();
        let positions: Vec<usize> = groups
            .iter()
            .map(|g| order.iter().position(|o| o == g).unwrap_or_else(|| panic!("unknown group {g}")))
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{}: layer order {groups:?}", entry.name);
    }
}

#[test]
fn serialization_is_pure() {
    let entry = &GALLERY[0];
    let spec = parse_spec(entry.spec).unwrap();
    let joined = join(engine().regions(), &parse_data(entry.data).unwrap(), None).unwrap();
    let rendered = engine().render_spec(&spec, &joined).unwrap();
    assert_eq!(to_svg(&rendered.scene), rendered.svg);
    assert_eq!(to_svg(&rendered.scene), to_svg(&rendered.scene.clone()));
}

#[test]
fn incompatible_pair_yields_report_without_svg() {
    let spec = r#"{"channels": [{"kind": "color_intensity"}, {"kind": "color_hue"}]}"#;
    let out = engine().render(spec, EUROPE);
    assert!(out.svg.is_none());
    assert!(!out.report.is_valid());
    assert!(out.report.issues.iter().any(|i| i.message.contains("color spectrum")));
    assert!(!out.report.suggestions.is_empty());
}

#[test]
fn warnings_do_not_block() {
    let data = r#"[{"name": "France", "value": 1}, {"name": "Atlantis", "value": 2}]"#;
    let out = engine().render(r#"{"channels": [{"kind": "color_intensity"}]}"#, data);
    assert!(out.svg.is_some());
    assert!(out.report.is_valid());
    assert!(!out.report.issues.is_empty());
}

fn marks_by_key(marks: &[Mark], skip: &str) -> BTreeMap<String, Vec<Mark>> {
    let mut out: BTreeMap<String, Vec<Mark>> = BTreeMap::new();
    for m in marks {
        if let Some(k) = m.key.as_deref().filter(|k| *k != skip) {
            let mut m = m.clone();
            m.id = None;
            out.entry(k.to_string()).or_default().push(m);
        }
    }
    out
}

#[test]
fn highlights_leave_other_regions_alone() {
    let plain = r#"{"channels": [{"kind": "color_intensity"}]}"#;
    let scene = |spec: &str| {
        let spec = parse_spec(spec).unwrap();
        let joined = join(engine().regions(), &parse_data(EUROPE).unwrap(), None).unwrap();
        engine().render_spec(&spec, &joined).unwrap().scene
    };
    let before = scene(plain);
    for kind in ["contrasting_color", "extrude_3d", "contour", "glow"] {
        let spec = format!(
            r#"{{"channels": [{{"kind": "color_intensity"}}], "highlights": [{{"kind": "{kind}", "target": "Germany"}}]}}"#
        );
        let after = scene(&spec);
        for layer in [LayerKind::Base, LayerKind::Encoding] {
            assert_eq!(
                marks_by_key(before.layer(layer), "germany"),
                marks_by_key(after.layer(layer), "germany"),
                "{kind} changed other regions in {layer:?}"
            );
        }
    }
}

#[test]
fn contrast_is_far_from_shipped_palettes() {
    let hue = |c: geoglyph::color::Rgb| c.to_hsl().0;
    for c in DEFAULT_CATEGORICAL.iter().chain(&DEFAULT_HUE_RAMP).chain(&DEFAULT_INTENSITY) {
        assert!(hue_distance(hue(contrast_color(*c)), hue(*c)) >= 60.0, "{c:?}");
    }
    for c in &DEFAULT_INTENSITY {
        for other in &DEFAULT_INTENSITY {
            assert!(hue_distance(hue(contrast_color(*c)), hue(*other)) >= 60.0);
        }
    }
}

#[test]
fn inset_is_a_pure_scaled_copy() {
    let content = vec![Mark::new(
        MarkTag::Region,
        Geom::Path(vec![
            Segment::Move(Point::new(100.0, 100.0)),
            Segment::Line(Point::new(110.0, 100.0)),
            Segment::Line(Point::new(105.0, 108.0)),
            Segment::Close,
        ]),
        Style::fill(DEFAULT_CATEGORICAL[0]),
    )
    .keyed("x")];
    let viewport = Rect::new(0.0, 0.0, 400.0, 300.0);
    for placement in [InsetPlacement::Adjacent, InsetPlacement::Overlay] {
        let inset = build_inset(&content, 4.0, placement, &content, viewport).unwrap();
        let copy = inset.marks.iter().find(|m| m.tag == MarkTag::Region).unwrap();
        for (v, w) in content[0].vertices().iter().zip(copy.vertices()) {
            let want = Point::new(
                inset.scale * (v.x - inset.center.x) + inset.center.x + inset.offset.x,
                inset.scale * (v.y - inset.center.y) + inset.center.y + inset.offset.y,
            );
            assert!((want.x - w.x).abs() < 0.005 && (want.y - w.y).abs() < 0.005);
        }
        assert!(inset.frame.width > 40.0);
    }
}

fn json_value() -> impl Strategy<Value = serde_json::Value> {
    let leaf = prop_oneof![
        Just(serde_json::Value::Null),
        any::<bool>().prop_map(serde_json::Value::from),
        (-1e6..1e6f64).prop_map(serde_json::Value::from),
        prop::sample::select(vec![
            "name", "value", "France", "kind", "channels", "color_hue", "length_2d", "glyph", "text", "to",
            "zoomed_inset", "Germany", "linked_aligned", "topographic", "",
        ])
        .prop_map(serde_json::Value::from),
    ];
    leaf.prop_recursive(4, 40, 6, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..6).prop_map(serde_json::Value::Array),
            prop::collection::btree_map(
                prop::sample::select(vec![
                    "name", "value", "kind", "channels", "labels", "strategy", "highlights", "target", "basemap",
                    "to", "category", "scale", "unit", "sides", "guide",
                ]),
                inner,
                0..6
            )
            .prop_map(|m| serde_json::Value::Object(m.into_iter().map(|(k, v)| (k.to_string(), v)).collect())),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn malformed_input_never_panics(spec in json_value(), data in json_value(), raw in ".{0,40}") {
        let out = engine().render(&spec.to_string(), &data.to_string());
        prop_assert!(out.svg.is_some() == out.report.is_valid());
        let out = engine().render(&raw, &raw);
        prop_assert!(out.svg.is_none() && !out.report.is_valid());
    }
}
