//! Frame and field serialization: binary PGM density frames and CSV dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::observables::{BlockCounts, MacroField};

/// 8-bit grayscale raster of block densities, `round(255 * rho / 6)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub index: u64,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Frame {
    /// Gray levels computed with integer arithmetic from the raw counts, so
    /// the bytes do not depend on floating-point rounding.
    pub fn from_counts(index: u64, counts: &BlockCounts) -> Self {
        let (nbx, nby) = counts.blocks();
        let n = counts.observations().max(1);
        let pixels = (0..nbx * nby)
            .map(|b| {
                // floor(255 * mass / (6 n) + 1/2)
                let mass = counts.block_mass(b);
                ((2 * 255 * mass + 6 * n) / (12 * n)).min(255) as u8
            })
            .collect();
        Frame {
            index,
            width: nbx,
            height: nby,
            pixels,
        }
    }

    pub fn file_name(&self) -> String {
        format!("frame_{:06}.pgm", self.index)
    }

    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&p| p as f64).sum::<f64>() / self.pixels.len() as f64
    }
}

/// Write `frame` as `dir/frame_NNNNNN.pgm` and return the path.
pub fn write_frame(frame: &Frame, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(frame.file_name());
    fs::write(&path, frame.to_pgm()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub const FIELD_HEADER: &str = "bx,by,rho,ux,uy,pxx,pxy,pyy";

pub fn fields_csv(field: &MacroField) -> String {
    let mut out = String::with_capacity(64 * field.len());
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for b in 0..field.len() {
        let (bx, by) = field.block_coords(b);
        let [ux, uy] = field.u[b];
        let [pxx, pxy, pyy] = field.pi[b];
        let _ = writeln!(out, "{bx},{by},{},{ux},{uy},{pxx},{pxy},{pyy}", field.rho[b]);
    }
    out
}

pub fn write_fields(field: &MacroField, path: &Path) -> Result<()> {
    fs::write(path, fields_csv(field)).map_err(|e| Error::io(path, e))
}

/// Two-column CSV with a header row.
pub fn series_csv(header: [&str; 2], series: &[(f64, f64)]) -> String {
    let mut out = format!("{},{}\n", header[0], header[1]);
    for (t, v) in series {
        let _ = writeln!(out, "{t},{v}");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Geometry, Lattice, LatticeUnits, SiteState};

    fn counts_of(s: SiteState, block: usize) -> BlockCounts {
        let mut l = Lattice::new(Geometry::periodic(20, 20).unwrap());
        l.cells_mut().fill(s);
        BlockCounts::of(&l, block).unwrap()
    }

    #[test]
    fn full_and_empty_frames() {
        let full = Frame::from_counts(0, &counts_of(SiteState::FULL, 10));
        assert!(full.pixels.iter().all(|&p| p == 255));
        let empty = Frame::from_counts(0, &counts_of(SiteState::EMPTY, 10));
        assert!(empty.pixels.iter().all(|&p| p == 0));
        assert_eq!((full.width, full.height), (2, 2));
    }

    #[test]
    fn gray_rounds_half_up() {
        // rho = 3 gives 127.5, which rounds to 128
        let half = Frame::from_counts(0, &counts_of(SiteState::from_labels(&[1, 2, 3]), 10));
        assert!(half.pixels.iter().all(|&p| p == 128));
        // rho = 1 gives 42.5 -> 43
        let one = Frame::from_counts(0, &counts_of(SiteState::from_labels(&[1]), 10));
        assert!(one.pixels.iter().all(|&p| p == 43));
        // rho = 2 gives 85 exactly
        let two = Frame::from_counts(0, &counts_of(SiteState::from_labels(&[1, 5]), 10));
        assert!(two.pixels.iter().all(|&p| p == 85));
    }

    #[test]
    fn pgm_layout() {
        let f = Frame {
            index: 7,
            width: 3,
            height: 2,
            pixels: vec![0, 1, 2, 3, 4, 255],
        };
        assert_eq!(f.file_name(), "frame_000007.pgm");
        let bytes = f.to_pgm();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(&bytes[bytes.len() - 6..], &[0, 1, 2, 3, 4, 255]);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let field = counts_of(SiteState::FULL, 10).to_field(LatticeUnits::default());
        let csv = fields_csv(&field);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], FIELD_HEADER);
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0,0,6,0,0,3,0,3");
    }

    #[test]
    fn write_reports_path_on_failure() {
        let f = Frame {
            index: 0,
            width: 1,
            height: 1,
            pixels: vec![0],
        };
        let err = write_frame(&f, Path::new("/nonexistent/dir")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir"));
    }
}
