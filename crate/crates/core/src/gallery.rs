//! Bundled example specs with their datasets, rendered against the world
//! boundaries.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    #[serde(skip)]
    pub spec: &'static str,
    #[serde(skip)]
    pub data: &'static str,
}

macro_rules! entry {
    ($name:literal, $description:literal) => {
        GalleryEntry {
            name: $name,
            description: $description,
            spec: include_str!(concat!("../gallery/", $name, ".spec.json")),
            data: include_str!(concat!("../gallery/", $name, ".data.json")),
        }
    };
}

pub const GALLERY: [GalleryEntry; 7] = [
    entry!("population-choropleth", "Choropleth: population as color intensity"),
    entry!("continents-hue", "Categorical hue: continent membership"),
    entry!("gdp-hue-bars", "Dual encoding: income group hue with GDP bars and callouts"),
    entry!("population-dorling", "Dorling cartogram of population with value text"),
    entry!("migration-flows", "Directional flows colored by corridor size"),
    entry!("forest-icons-aligned", "Tree icons on a dot map with aligned labels and a contour"),
    entry!("europe-prisms-inset", "3D bars with glow, pin and a zoomed inset"),
];

pub fn find(name: &str) -> Option<&'static GalleryEntry> {
    GALLERY.iter().find(|e| e.name == name)
}
