//! Periodic wrap, bounce-back walls and obstacle masks.
//!
//! Wall sites replace the collision table with full velocity reversal
//! (`i -> i + 3`), which gives zero mean velocity at the wall and conserves
//! mass exactly. Obstacle masks are read from plain-text PBM (`P1`) files;
//! pixel row `r` maps to lattice row `y = r`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::SiteState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum BoundaryKind {
    #[default]
    Periodic,
    /// The outermost ring of sites is wall; moves leaving the array are
    /// never taken.
    Walled,
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Periodic => "periodic",
            BoundaryKind::Walled => "walled",
        })
    }
}

impl FromStr for BoundaryKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "periodic" => Ok(BoundaryKind::Periodic),
            "walled" => Ok(BoundaryKind::Walled),
            other => Err(format!("expected `periodic` or `walled`, got `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CellKind {
    #[default]
    Fluid,
    Wall,
}

/// Per-site cell kinds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    cells: Vec<CellKind>,
}

impl Mask {
    pub fn fluid(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            cells: vec![CellKind::Fluid; width * height],
        }
    }

    /// All fluid for periodic lattices, a wall ring for walled ones.
    pub fn for_boundary(kind: BoundaryKind, width: usize, height: usize) -> Self {
        let mut mask = Mask::fluid(width, height);
        if kind == BoundaryKind::Walled {
            mask.enforce_border();
        }
        mask
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> CellKind {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, kind: CellKind) {
        self.cells[y * self.width + x] = kind;
    }

    #[inline]
    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn is_wall(&self, x: usize, y: usize) -> bool {
        self.get(x, y) == CellKind::Wall
    }

    /// Force the outermost ring to wall.
    pub fn enforce_border(&mut self) {
        let (w, h) = (self.width, self.height);
        for x in 0..w {
            self.set(x, 0, CellKind::Wall);
            self.set(x, h - 1, CellKind::Wall);
        }
        for y in 0..h {
            self.set(0, y, CellKind::Wall);
            self.set(w - 1, y, CellKind::Wall);
        }
    }

    pub fn wall_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == CellKind::Wall).count()
    }

    pub fn fluid_count(&self) -> usize {
        self.cells.len() - self.wall_count()
    }

    /// Render as plain PBM (`P1`), 1 = wall.
    pub fn to_pbm(&self) -> String {
        let mut out = format!("P1\n{} {}\n", self.width, self.height);
        for row in self.cells.chunks(self.width) {
            let line: Vec<&str> = row
                .iter()
                .map(|c| if *c == CellKind::Wall { "1" } else { "0" })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Boundary kind together with the mask it applies to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMode {
    pub kind: BoundaryKind,
    pub mask: Mask,
}

impl BoundaryMode {
    pub fn new(kind: BoundaryKind, width: usize, height: usize) -> Self {
        BoundaryMode {
            kind,
            mask: Mask::for_boundary(kind, width, height),
        }
    }
}

/// Full velocity reversal: bit `i` of the result is bit `i + 3` of `s`.
#[inline]
pub fn bounce_back(s: SiteState) -> SiteState {
    let b = s.bits();
    SiteState::from_bits((b >> 3) | (b << 3))
}

/// Parse a plain PBM (`P1`) bitmap as an obstacle mask.
///
/// The bitmap must be exactly `width x height`. In walled mode the border
/// ring is forced to wall whatever the file says.
pub fn load_mask(source: &str, width: usize, height: usize, kind: BoundaryKind) -> Result<Mask> {
    let mut tokens = PbmTokens::new(source);

    let (magic, line) = tokens.next_token().ok_or(Error::MaskFormat {
        line: 1,
        message: "empty file".into(),
    })?;
    if magic != "P1" {
        return Err(Error::MaskFormat {
            line,
            message: format!("expected magic `P1`, found `{magic}`"),
        });
    }
    let file_w = tokens.header_number("width")?;
    let file_h = tokens.header_number("height")?;
    if file_w != width || file_h != height {
        return Err(Error::MaskFormat {
            line: tokens.line,
            message: format!("bitmap is {file_w}x{file_h} but lattice is {width}x{height}"),
        });
    }

    let mut mask = Mask::fluid(width, height);
    let mut n = 0;
    while let Some((c, line)) = tokens.next_pixel() {
        if n >= width * height {
            return Err(Error::MaskFormat {
                line,
                message: format!("more than {} pixels", width * height),
            });
        }
        match c {
            '0' => {}
            '1' => mask.cells[n] = CellKind::Wall,
            other => {
                return Err(Error::MaskFormat {
                    line,
                    message: format!("unexpected character `{other}` in pixel data"),
                })
            }
        }
        n += 1;
    }
    if n != width * height {
        return Err(Error::MaskFormat {
            line: tokens.line,
            message: format!("expected {} pixels, found {n}", width * height),
        });
    }
    if kind == BoundaryKind::Walled {
        mask.enforce_border();
    }
    Ok(mask)
}

struct PbmTokens<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> PbmTokens<'a> {
    fn new(source: &'a str) -> Self {
        PbmTokens {
            chars: source.chars().peekable(),
            line: 1,
        }
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '#' {
                for c in self.chars.by_ref() {
                    if c == '\n' {
                        self.line += 1;
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                if c == '\n' {
                    self.line += 1;
                }
                self.chars.next();
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Option<(String, usize)> {
        self.skip_space_and_comments();
        let line = self.line;
        let mut tok = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_whitespace() || c == '#' {
                break;
            }
            tok.push(c);
            self.chars.next();
        }
        (!tok.is_empty()).then_some((tok, line))
    }

    fn header_number(&mut self, what: &str) -> Result<usize> {
        let (tok, line) = self.next_token().ok_or(Error::MaskFormat {
            line: self.line,
            message: format!("missing {what}"),
        })?;
        tok.parse().map_err(|_| Error::MaskFormat {
            line,
            message: format!("invalid {what} `{tok}`"),
        })
    }

    // Plain PBM pixels are single characters and need no separator.
    fn next_pixel(&mut self) -> Option<(char, usize)> {
        self.skip_space_and_comments();
        let line = self.line;
        self.chars.next().map(|c| (c, line))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Direction;

    #[test]
    fn bounce_back_examples() {
        assert_eq!(bounce_back(SiteState::from_labels(&[1])), SiteState::from_labels(&[4]));
        assert_eq!(
            bounce_back(SiteState::from_labels(&[1, 4])),
            SiteState::from_labels(&[1, 4])
        );
        assert_eq!(bounce_back(SiteState::EMPTY), SiteState::EMPTY);
    }

    #[test]
    fn bounce_back_reverses_every_bit() {
        for bits in 0..64u8 {
            let s = SiteState::from_bits(bits);
            let out = bounce_back(s);
            for d in Direction::ALL {
                assert_eq!(out.has(d), s.has(d.opposite()));
            }
            assert_eq!(bounce_back(out), s);
        }
    }

    fn blank_pbm(w: usize, h: usize) -> String {
        let mut s = format!("P1\n# comment\n{w} {h}\n");
        for _ in 0..h {
            s.push_str(&"0 ".repeat(w));
            s.push('\n');
        }
        s
    }

    #[test]
    fn all_zero_walled_has_border_only() {
        let m = load_mask(&blank_pbm(12, 10), 12, 10, BoundaryKind::Walled).unwrap();
        assert_eq!(m.wall_count(), 2 * 12 + 2 * 10 - 4);
        for y in 1..9 {
            for x in 1..11 {
                assert_eq!(m.get(x, y), CellKind::Fluid);
            }
        }
        let p = load_mask(&blank_pbm(12, 10), 12, 10, BoundaryKind::Periodic).unwrap();
        assert_eq!(p.wall_count(), 0);
    }

    #[test]
    fn filled_square_counts() {
        let mut m = Mask::fluid(40, 40);
        for y in 15..25 {
            for x in 15..25 {
                m.set(x, y, CellKind::Wall);
            }
        }
        let loaded = load_mask(&m.to_pbm(), 40, 40, BoundaryKind::Walled).unwrap();
        let interior = (1..39)
            .flat_map(|y| (1..39).map(move |x| (x, y)))
            .filter(|&(x, y)| loaded.is_wall(x, y))
            .count();
        assert_eq!(interior, 100);
    }

    #[test]
    fn packed_pixels_accepted() {
        let m = load_mask("P1\n3 2\n010\n001\n", 3, 2, BoundaryKind::Periodic).unwrap();
        assert!(m.is_wall(1, 0) && m.is_wall(2, 1));
        assert_eq!(m.wall_count(), 2);
    }

    #[test]
    fn wrong_magic_rejected() {
        let err = load_mask("P2\n3 2\n0 0 0\n0 0 0\n", 3, 2, BoundaryKind::Periodic).unwrap_err();
        assert!(matches!(err, Error::MaskFormat { line: 1, .. }), "{err}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = load_mask(&blank_pbm(4, 4), 5, 4, BoundaryKind::Periodic).unwrap_err();
        assert!(matches!(err, Error::MaskFormat { line: 3, .. }), "{err}");
    }

    #[test]
    fn bad_pixel_reports_line() {
        let err = load_mask("P1\n2 2\n0 0\n0 7\n", 2, 2, BoundaryKind::Periodic).unwrap_err();
        assert!(matches!(err, Error::MaskFormat { line: 4, .. }), "{err}");
        let short = load_mask("P1\n2 2\n0 0\n0\n", 2, 2, BoundaryKind::Periodic).unwrap_err();
        assert!(matches!(short, Error::MaskFormat { .. }));
    }
}
