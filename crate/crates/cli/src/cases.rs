//! Scenarios shipped with the binary.

pub const CENTRIFUGE: &str = include_str!("../cases/centrifuge.toml");
pub const LAUSANNE: &str = include_str!("../cases/lausanne.toml");

pub const NAMES: [&str; 2] = ["centrifuge", "lausanne"];

pub fn shipped(name: &str) -> Option<&'static str> {
    match name {
        "centrifuge" => Some(CENTRIFUGE),
        "lausanne" => Some(LAUSANNE),
        _ => None,
    }
}
