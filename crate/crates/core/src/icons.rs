//! Built-in icon symbols, drawn in a 24 x 24 box. The pin's tip is at the
//! bottom center `(12, 24)`.

use crate::scene::{sanitize_id, Def};

pub const ICON_BOX: f64 = 24.0;

pub const BUILTIN: [(&str, &str); 5] = [
    ("person", "M12 2A4 4 0 1 1 12 10A4 4 0 1 1 12 2ZM4 23V18C4 14.7 7.6 12 12 12S20 14.7 20 18V23Z"),
    ("pin", "M12 24C9 20 4 14 4 9A8 8 0 0 1 20 9C20 14 15 20 12 24Z"),
    ("tree", "M12 1L4 12H8L3 19H11V23H13V19H21L16 12H20Z"),
    ("factory", "M2 23V10L8 14V10L14 14V4H17V8H19V4H22V23Z"),
    ("drop", "M12 2C12 2 5 10 5 15A7 7 0 0 0 19 15C19 10 12 2 12 2Z"),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, p)| *p)
}

pub fn def_id(name: &str) -> String {
    format!("icon-{}", sanitize_id(name))
}

/// Symbol definition for `name`, using `custom` path data when given and
/// the built-in shape otherwise.
pub fn symbol(name: &str, custom: Option<&str>) -> Option<Def> {
    let path = custom.or_else(|| builtin(name))?;
    Some(Def::Symbol {
        id: def_id(name),
        size: ICON_BOX,
        path: path.to_string(),
    })
}
