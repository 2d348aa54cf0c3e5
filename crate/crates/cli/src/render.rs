//! Minimal raster plots: a space-time density map and density profiles.
//! No text is drawn; axes run from zero to the road length and to `k_jam`.

use std::path::Path;

use arz_core::FieldSnapshot;
use image::{ImageResult, Rgb, RgbImage};

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const BLACK: Rgb<u8> = Rgb([0, 0, 0]);
const GRID: Rgb<u8> = Rgb([225, 225, 225]);
const MARGIN: u32 = 24;

pub const CASE_COLORS: [Rgb<u8>; 4] = [
    Rgb([31, 119, 180]),
    Rgb([255, 127, 14]),
    Rgb([44, 160, 44]),
    Rgb([214, 39, 40]),
];

/// Jet-style colormap on `[0, 1]`.
fn jet(s: f64) -> Rgb<u8> {
    let s = s.clamp(0.0, 1.0);
    let channel = |c: f64| ((1.5 - (4.0 * s - c).abs()).clamp(0.0, 1.0) * 255.0).round() as u8;
    Rgb([channel(3.0), channel(2.0), channel(1.0)])
}

fn frame(img: &mut RgbImage, x0: u32, y0: u32, w: u32, h: u32) {
    for x in x0..=x0 + w {
        img.put_pixel(x, y0, BLACK);
        img.put_pixel(x, y0 + h, BLACK);
    }
    for y in y0..=y0 + h {
        img.put_pixel(x0, y, BLACK);
        img.put_pixel(x0 + w, y, BLACK);
    }
}

fn line(img: &mut RgbImage, (x0, y0): (f64, f64), (x1, y1): (f64, f64), color: Rgb<u8>) {
    let steps = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let f = i as f64 / steps as f64;
        let (x, y) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        for (dx, dy) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)] {
            let (px, py) = ((x + dx).round(), (y + dy).round());
            if px >= 0.0 && py >= 0.0 && (px as u32) < img.width() && (py as u32) < img.height() {
                img.put_pixel(px as u32, py as u32, color);
            }
        }
    }
}

/// Density over space (horizontal) and time (upwards).
pub fn heatmap(snapshots: &[FieldSnapshot], k_max: f64, path: &Path) -> ImageResult<()> {
    let (w, h) = (640u32, 480u32);
    let bar = 20u32;
    let mut img = RgbImage::from_pixel(w + 3 * MARGIN + bar, h + 2 * MARGIN, WHITE);
    if let Some(first) = snapshots.first() {
        let n = first.k.len();
        let m = snapshots.len();
        for py in 0..h {
            let row = ((h - 1 - py) as usize * m / h as usize).min(m - 1);
            for px in 0..w {
                let cell = (px as usize * n / w as usize).min(n - 1);
                let k = snapshots[row].k.get(cell).copied().unwrap_or(0.0);
                img.put_pixel(MARGIN + px, MARGIN + py, jet(k / k_max));
            }
        }
    }
    for py in 0..h {
        let c = jet(1.0 - py as f64 / (h - 1) as f64);
        for px in 0..bar {
            img.put_pixel(2 * MARGIN + w + px, MARGIN + py, c);
        }
    }
    frame(&mut img, MARGIN - 1, MARGIN - 1, w + 1, h + 1);
    frame(&mut img, 2 * MARGIN + w - 1, MARGIN - 1, bar + 1, h + 1);
    img.save(path)
}

/// Draw profiles into the box at `(x0, y0)` of size `w x h`.
fn profiles(
    img: &mut RgbImage,
    (x0, y0, w, h): (u32, u32, u32, u32),
    series: &[(&FieldSnapshot, Rgb<u8>)],
    k_max: f64,
) {
    for q in 1..4 {
        let y = y0 + h * q / 4;
        for x in x0..x0 + w {
            img.put_pixel(x, y, GRID);
        }
    }
    for (snap, color) in series {
        let length = snap.grid.length();
        let to_px = |i: usize| {
            let x = x0 as f64 + snap.grid.cell_center(i) / length * w as f64;
            let y = (y0 + h) as f64 - (snap.k[i] / k_max).clamp(0.0, 1.0) * h as f64;
            (x, y)
        };
        for i in 1..snap.k.len() {
            line(img, to_px(i - 1), to_px(i), *color);
        }
    }
    frame(img, x0, y0, w, h);
}

/// Density profiles of several snapshots on one set of axes.
pub fn cross_section(
    series: &[(&FieldSnapshot, Rgb<u8>)],
    k_max: f64,
    path: &Path,
) -> ImageResult<()> {
    let (w, h) = (640u32, 360u32);
    let mut img = RgbImage::from_pixel(w + 2 * MARGIN + 1, h + 2 * MARGIN + 1, WHITE);
    profiles(&mut img, (MARGIN, MARGIN, w, h), series, k_max);
    img.save(path)
}

/// 2 x 2 panels, one per source case; a missing case is crossed out.
pub fn four_panel(
    panels: &[Option<&FieldSnapshot>; 4],
    k_max: f64,
    path: &Path,
) -> ImageResult<()> {
    let (w, h) = (400u32, 240u32);
    let mut img = RgbImage::from_pixel(2 * w + 3 * MARGIN + 1, 2 * h + 3 * MARGIN + 1, WHITE);
    for (i, panel) in panels.iter().enumerate() {
        let x0 = MARGIN + (i as u32 % 2) * (w + MARGIN);
        let y0 = MARGIN + (i as u32 / 2) * (h + MARGIN);
        match panel {
            Some(snap) => profiles(&mut img, (x0, y0, w, h), &[(snap, CASE_COLORS[i])], k_max),
            None => {
                frame(&mut img, x0, y0, w, h);
                let (a, b) = ((x0 as f64, y0 as f64), ((x0 + w) as f64, (y0 + h) as f64));
                line(&mut img, a, b, CASE_COLORS[3]);
                line(&mut img, (a.0, b.1), (b.0, a.1), CASE_COLORS[3]);
            }
        }
    }
    img.save(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_endpoints() {
        assert_eq!(jet(0.0), Rgb([0, 0, 128]));
        assert_eq!(jet(1.0), Rgb([128, 0, 0]));
        assert_eq!(jet(0.5), Rgb([128, 255, 128]));
        assert_eq!(jet(-3.0), jet(0.0));
    }
}
