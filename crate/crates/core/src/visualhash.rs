//! Deterministic pictures of fingerprints.
//!
//! A fingerprint of `m <= 27` bits becomes a 3x3 mosaic. Cell `i` (row-major)
//! takes bits `3i`, `3i+1`, `3i+2` of the fingerprint as a tile code `v` in
//! `0..8`, which selects a tile from a fixed codebook:
//!
//! | v | shape | palette | orientation |
//! |---|-------|---------|-------------|
//! | 0 | 0     | 0       | 0           |
//! | 1 | 1     | 1       | 0           |
//! | 2 | 2     | 2       | 1           |
//! | 3 | 3     | 3       | 1           |
//! | 4 | 0     | 4       | 2           |
//! | 5 | 1     | 5       | 2           |
//! | 6 | 2     | 6       | 3           |
//! | 7 | 3     | 7       | 3           |
//!
//! i.e. `shape = v mod 4`, `palette = v`, `orientation = v / 2`. Cells whose
//! bits all lie at or above `m` are inactive and drawn blank; a cell that
//! straddles `m` reads its missing bits as zero. At `m = 21` cells 0-6 are
//! active and cells 7-8 are blank.

use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

use crate::recognizer::Fingerprint;

pub const GRID: usize = 3;
pub const CELLS: usize = GRID * GRID;
pub const BITS_PER_CELL: u16 = 3;
/// Widest fingerprint a scene can show.
pub const MAX_BITS: u16 = CELLS as u16 * BITS_PER_CELL;
pub const CANVAS: u32 = 256;

const MARGIN: u32 = 8;
const CELL: u32 = 80;

/// Okabe–Ito palette, distinguishable under the common color-vision
/// deficiencies.
pub const PALETTE: [&str; 8] = [
    "#000000", "#e69f00", "#56b4e9", "#009e73", "#f0e442", "#0072b2", "#d55e00", "#cc79a7",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SceneError {
    #[error("fingerprints wider than {MAX_BITS} bits cannot be drawn (got {0})")]
    Unsupported(u16),
    #[error("value does not fit in {0} bits")]
    ValueTooWide(u16),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Tile {
    /// False for cells beyond the fingerprint width.
    pub active: bool,
    pub orientation: u8,
    pub palette: u8,
    pub shape: u8,
}

impl Tile {
    const BLANK: Tile = Tile {
        active: false,
        orientation: 0,
        palette: 0,
        shape: 0,
    };

    fn from_code(v: u8) -> Self {
        Tile {
            active: true,
            orientation: v / 2,
            palette: v,
            shape: v % 4,
        }
    }
}

/// A 3x3 tile mosaic plus the fingerprint it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Scene {
    pub fingerprint: String,
    pub m: u16,
    pub tiles: [Tile; CELLS],
}

impl Scene {
    /// Builds the scene for the low `m` bits of `value`.
    pub fn from_bits(value: u32, m: u16) -> Result<Self, SceneError> {
        if m > MAX_BITS || m == 0 {
            return Err(SceneError::Unsupported(m));
        }
        if u64::from(value) >> m != 0 {
            return Err(SceneError::ValueTooWide(m));
        }
        let mut tiles = [Tile::BLANK; CELLS];
        for (i, tile) in tiles.iter_mut().enumerate() {
            let lo = i as u16 * BITS_PER_CELL;
            if lo < m {
                *tile = Tile::from_code(((value >> lo) & 0b111) as u8);
            }
        }
        Ok(Self {
            fingerprint: format!("{:0width$x}", value, width = usize::from(m).div_ceil(4)),
            m,
            tiles,
        })
    }

    /// Canonical JSON: sorted keys, no insignificant whitespace.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("scene serializes");
        serde_json::to_string(&value).expect("value serializes")
    }
}

/// Scene for a recognizer fingerprint.
pub fn scene_of(fp: &Fingerprint) -> Result<Scene, SceneError> {
    let m = fp.m();
    if m > MAX_BITS {
        return Err(SceneError::Unsupported(m));
    }
    Scene::from_bits(fp.value().low_u64() as u32, m)
}

fn shape_path(shape: u8) -> &'static str {
    // drawn in a 64x64 box at (8, 8) of the cell, pointing "up" at orientation 0
    match shape {
        0 => "M8 72 L40 8 L72 72 Z",
        1 => "M8 56 A32 32 0 0 1 72 56 Z",
        2 => "M8 8 H32 V48 H72 V72 H8 Z",
        _ => "M8 40 L40 8 L72 40 L56 40 L56 72 L24 72 L24 40 Z",
    }
}

/// Renders a scene as a self-contained SVG 1.1 document.
///
/// The output depends only on the scene: no timestamps, randomness or
/// locale-dependent number formatting.
pub fn svg_of(scene: &Scene) -> String {
    let mut out = String::with_capacity(2048);
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{CANVAS}\" height=\"{CANVAS}\" viewBox=\"0 0 {CANVAS} {CANVAS}\">"
    );
    let _ = writeln!(out, "<rect width=\"{CANVAS}\" height=\"{CANVAS}\" fill=\"#ffffff\"/>");
    for (i, tile) in scene.tiles.iter().enumerate() {
        let x = MARGIN + (i % GRID) as u32 * CELL;
        let y = MARGIN + (i / GRID) as u32 * CELL;
        if tile.active {
            let _ = writeln!(
                out,
                "<g class=\"tile\" id=\"tile-{i}\" transform=\"translate({x} {y}) rotate({} 40 40)\"><rect x=\"2\" y=\"2\" width=\"76\" height=\"76\" fill=\"#f4f4f4\" stroke=\"#bbbbbb\"/><path d=\"{}\" fill=\"{}\"/></g>",
                u32::from(tile.orientation) * 90,
                shape_path(tile.shape),
                PALETTE[usize::from(tile.palette)],
            );
        } else {
            let _ = writeln!(
                out,
                "<g class=\"tile blank\" id=\"tile-{i}\" transform=\"translate({x} {y})\"><rect x=\"2\" y=\"2\" width=\"76\" height=\"76\" fill=\"#ffffff\" stroke=\"#dddddd\" stroke-dasharray=\"4 4\"/></g>"
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2field::FieldElem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn fp(v: u64, m: u16) -> Fingerprint {
        Fingerprint(FieldElem::from_u64(v, m).unwrap())
    }

    #[test]
    fn zero_is_all_first_attributes() {
        let s = scene_of(&fp(0, 21)).unwrap();
        for (i, t) in s.tiles.iter().enumerate() {
            assert_eq!((t.shape, t.palette, t.orientation), (0, 0, 0));
            assert_eq!(t.active, i < 7);
        }
        assert_eq!(s.fingerprint, "000000");
    }

    #[test]
    fn codebook_rows() {
        let s = Scene::from_bits(0b111_110_101_100_011_010_001, 21).unwrap();
        let got: Vec<_> = s.tiles[..7].iter().map(|t| (t.shape, t.palette, t.orientation)).collect();
        assert_eq!(
            got,
            vec![(1, 1, 0), (2, 2, 1), (3, 3, 1), (0, 4, 2), (1, 5, 2), (2, 6, 3), (3, 7, 3)]
        );
    }

    #[test]
    fn partial_cell_reads_missing_bits_as_zero() {
        let s = Scene::from_bits(1 << 19, 20).unwrap();
        assert!(s.tiles[6].active);
        assert_eq!(s.tiles[6].palette, 0b010);
        assert!(!s.tiles[7].active);
    }

    #[test]
    fn too_wide_is_unsupported() {
        assert_eq!(scene_of(&fp(0, 28)), Err(SceneError::Unsupported(28)));
        assert!(Scene::from_bits(1 << 21, 21).is_err());
        assert!(Scene::from_bits(0, 27).is_ok());
    }

    #[test]
    fn svg_is_deterministic_and_has_nine_tiles() {
        let a = svg_of(&scene_of(&fp(0x1a2b3c, 21)).unwrap());
        let b = svg_of(&scene_of(&fp(0x1a2b3c, 21)).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg "));
        assert_eq!(a.matches("<g class=\"tile").count(), 9);
        assert_eq!(a.matches("class=\"tile blank\"").count(), 2);
    }

    #[test]
    fn distinct_fingerprints_give_distinct_svgs() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let (a, b) = (rng.gen_range(0..1u64 << 21), rng.gen_range(0..1u64 << 21));
            if a == b {
                continue;
            }
            let sa = svg_of(&scene_of(&fp(a, 21)).unwrap());
            let sb = svg_of(&scene_of(&fp(b, 21)).unwrap());
            assert_ne!(sa, sb);
        }
    }

    #[test]
    fn canonical_json_sorted_and_compact() {
        let json = Scene::from_bits(5, 21).unwrap().to_canonical_json();
        assert!(json.starts_with("{\"fingerprint\":\"000005\",\"m\":21,\"tiles\":[{\"active\":true,\"orientation\":2,\"palette\":5,\"shape\":1}"));
        assert!(!json.contains(' '));
    }
}
