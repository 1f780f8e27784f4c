//! Core snapshots as glyph text and portable pixmaps.

use crate::mars::Mars;
use crate::redcode::Opcode;

pub fn glyph(op: Opcode) -> char {
    match op {
        Opcode::Dat => '#',
        Opcode::Mov => '>',
        Opcode::Add => '+',
        Opcode::Sub => '-',
        Opcode::Mul => 'x',
        Opcode::Div => '/',
        Opcode::Mod => '%',
        Opcode::Jmp => '^',
        Opcode::Jmz => 'z',
        Opcode::Jmn => 'n',
        Opcode::Djn => 'd',
        Opcode::Spl => '*',
        Opcode::Seq => '=',
        Opcode::Sne => '!',
        Opcode::Slt => '<',
        Opcode::Nop => '.',
    }
}

/// One image of the core: opcode glyph and last writer per address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderFrame {
    pub cycle: u32,
    pub glyphs: Vec<char>,
    /// Load-order id of the last warrior to write each cell.
    pub owners: Vec<Option<u8>>,
}

const BACKGROUND: [u8; 3] = [16, 16, 24];

const PALETTE: [[u8; 3]; 8] = [
    [230, 80, 70],
    [70, 150, 240],
    [90, 200, 110],
    [240, 200, 60],
    [190, 110, 230],
    [60, 210, 210],
    [240, 140, 60],
    [220, 220, 220],
];

pub fn palette(owner: Option<u8>) -> [u8; 3] {
    match owner {
        None => BACKGROUND,
        Some(id) => PALETTE[id as usize % PALETTE.len()],
    }
}

impl RenderFrame {
    pub fn capture(mars: &Mars) -> Self {
        RenderFrame {
            cycle: mars.cycle(),
            glyphs: mars.cells().iter().map(|c| glyph(c.opcode)).collect(),
            owners: mars.last_writers().to_vec(),
        }
    }

    /// Glyph rows of `width` cells; unwritten DAT cells print as blanks.
    pub fn to_text(&self, width: usize) -> String {
        let width = width.max(1);
        let mut out = String::with_capacity(self.glyphs.len() + self.glyphs.len() / width + 1);
        for (row_glyphs, row_owners) in self.glyphs.chunks(width).zip(self.owners.chunks(width)) {
            for (g, o) in row_glyphs.iter().zip(row_owners) {
                out.push(if o.is_none() && *g == '#' { ' ' } else { *g });
            }
            out.push('\n');
        }
        out
    }

    /// Binary PPM (P6): one `scale`-sized square per cell, `width` cells per
    /// row, colored by last writer. The last row is padded with background.
    pub fn to_ppm(&self, width: usize, scale: usize) -> Vec<u8> {
        let width = width.max(1);
        let scale = scale.max(1);
        let rows = self.owners.len().div_ceil(width);
        let (w_px, h_px) = (width * scale, rows * scale);
        let mut out = format!("P6\n{w_px} {h_px}\n255\n").into_bytes();
        out.reserve(w_px * h_px * 3);
        for r in 0..rows {
            let mut line = Vec::with_capacity(w_px * 3);
            for c in 0..width {
                let color = self.owners.get(r * width + c).map_or(BACKGROUND, |o| palette(*o));
                for _ in 0..scale {
                    line.extend_from_slice(&color);
                }
            }
            for _ in 0..scale {
                out.extend_from_slice(&line);
            }
        }
        out
    }
}

/// Heatmap of a fitness grid (`[row][col]`, `None` = empty) as PPM, rows
/// drawn top to bottom. Values are scaled against `max`.
pub fn heatmap_ppm(grid: &[Vec<Option<f64>>], max: f64, scale: usize) -> Vec<u8> {
    let scale = scale.max(1);
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    let mut out = format!("P6\n{} {}\n255\n", cols * scale, rows * scale).into_bytes();
    for row in grid {
        let mut line = Vec::with_capacity(cols * scale * 3);
        for cell in row {
            let color = match cell {
                None => BACKGROUND,
                Some(v) => {
                    let t = if max > 0.0 { (v / max).clamp(0.0, 1.0) } else { 0.0 };
                    [(40.0 + 215.0 * t) as u8, (60.0 + 120.0 * t) as u8, (160.0 * (1.0 - t)) as u8]
                }
            };
            for _ in 0..scale {
                line.extend_from_slice(&color);
            }
        }
        for _ in 0..scale {
            out.extend_from_slice(&line);
        }
    }
    out
}
