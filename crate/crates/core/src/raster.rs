//! R-X canvas rendering of impedance loci and binary PGM I/O.
//!
//! The canvas is 339 rows (X axis, increasing upward) by 292 columns
//! (R axis). Every locus point is one "visit"; consecutive points are joined
//! with Bresenham segments and each visited pixel gains a fixed intensity,
//! saturating at 255, so the stationary pre-fault and fault segments show up
//! brightest.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::relaydsp::ImpedanceLocus;
use crate::{Error, Result};

pub const HEIGHT: usize = 339;
pub const WIDTH: usize = 292;

/// Impedance window mapped onto the canvas, Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub r_min: f64,
    pub r_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for Viewport {
    fn default() -> Self {
        Self {
            r_min: -50.0,
            r_max: 150.0,
            x_min: -50.0,
            x_max: 150.0,
        }
    }
}

impl Viewport {
    pub fn validate(&self) -> Result<()> {
        let ok = self.r_min < self.r_max
            && self.x_min < self.x_max
            && [self.r_min, self.r_max, self.x_min, self.x_max]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Image(format!("invalid viewport {self:?}")))
        }
    }

    /// Fractional (column, row) of an impedance; row 0 is the top (x_max).
    pub fn to_pixel(&self, r: f64, x: f64) -> (f64, f64) {
        let col = (r - self.r_min) / (self.r_max - self.r_min) * (WIDTH - 1) as f64;
        let row = (self.x_max - x) / (self.x_max - self.x_min) * (HEIGHT - 1) as f64;
        (col, row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterOptions {
    /// Intensity added per visit.
    pub gain: u8,
    /// Overlay a mho circle with this reach impedance (Ω) when set.
    pub zone_reach: Option<Complex64>,
}

impl Default for RasterOptions {
    fn default() -> Self {
        Self {
            gain: 32,
            zone_reach: None,
        }
    }
}

/// 8-bit grayscale canvas, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width * height],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    fn accumulate(&mut self, col: i64, row: i64, gain: u8) {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return;
        }
        let px = &mut self.pixels[row as usize * self.width + col as usize];
        *px = px.saturating_add(gain);
    }

    /// (row, col) of every non-zero pixel in scan order.
    pub fn lit_pixels(&self) -> Vec<(usize, usize)> {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(k, _)| (k / self.width, k % self.width))
            .collect()
    }
}

/// Real-valued canvas with pixels in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl NormalizedImage {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }
}

/// Clip the segment `p → q` to the pixel grid (Liang–Barsky). Returns the
/// clipped endpoints and whether the start was moved.
fn clip_segment(p: (f64, f64), q: (f64, f64)) -> Option<((f64, f64), (f64, f64), bool)> {
    let (x_lo, x_hi) = (-0.5, WIDTH as f64 - 0.5 - 1e-9);
    let (y_lo, y_hi) = (-0.5, HEIGHT as f64 - 0.5 - 1e-9);
    let dx = q.0 - p.0;
    let dy = q.1 - p.1;
    if !(dx.is_finite() && dy.is_finite()) {
        return None;
    }
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (pk, qk) in [
        (-dx, p.0 - x_lo),
        (dx, x_hi - p.0),
        (-dy, p.1 - y_lo),
        (dy, y_hi - p.1),
    ] {
        if pk == 0.0 {
            if qk < 0.0 {
                return None;
            }
            continue;
        }
        let t = qk / pk;
        if !t.is_finite() {
            return None;
        }
        if pk < 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    let a = (p.0 + t0 * dx, p.1 + t0 * dy);
    let b = (p.0 + t1 * dx, p.1 + t1 * dy);
    Some((a, b, t0 > 0.0))
}

fn to_cell(p: (f64, f64)) -> (i64, i64) {
    let col = p.0.round().clamp(0.0, (WIDTH - 1) as f64) as i64;
    let row = p.1.round().clamp(0.0, (HEIGHT - 1) as f64) as i64;
    (col, row)
}

/// Integer line from `a` to `b`, both ends included.
fn bresenham(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy + 1) as usize);
    loop {
        out.push((x, y));
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

fn draw_polyline(img: &mut GrayImage, points: &[(f64, f64)], gain: u8) {
    let Some(&first) = points.first() else {
        return;
    };
    if let Some((a, _, _)) = clip_segment(first, first) {
        let (c, r) = to_cell(a);
        img.accumulate(c, r, gain);
    }
    for pair in points.windows(2) {
        let Some((a, b, start_moved)) = clip_segment(pair[0], pair[1]) else {
            continue;
        };
        let (ca, cb) = (to_cell(a), to_cell(b));
        let line = bresenham(ca, cb);
        // The start pixel was already drawn as the previous segment's end.
        let skip = usize::from(!start_moved && ca != cb);
        for &(c, r) in &line[skip..] {
            img.accumulate(c, r, gain);
        }
    }
}

/// Render the locus on a blank canvas.
pub fn rasterize(locus: &ImpedanceLocus, vp: &Viewport, opts: &RasterOptions) -> GrayImage {
    let mut img = GrayImage::blank(WIDTH, HEIGHT);
    let pts: Vec<(f64, f64)> = locus
        .points
        .iter()
        .filter(|p| p.r.is_finite() && p.x.is_finite())
        .map(|p| vp.to_pixel(p.r, p.x))
        .collect();
    draw_polyline(&mut img, &pts, opts.gain);
    if let Some(reach) = opts.zone_reach {
        let center = reach / 2.0;
        let radius = reach.norm() / 2.0;
        let circle: Vec<(f64, f64)> = (0..=360)
            .map(|k| {
                let z = center + Complex64::from_polar(radius, (k as f64).to_radians());
                vp.to_pixel(z.re, z.im)
            })
            .collect();
        draw_polyline(&mut img, &circle, opts.gain);
    }
    img
}

/// Divide every pixel by 255.
pub fn normalize_pixels(img: &GrayImage) -> NormalizedImage {
    NormalizedImage {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().map(|&p| f64::from(p) / 255.0).collect(),
    }
}

/// Binary PGM (P5, maxval 255).
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    let mut next_token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Image("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = next_token()?;
    if magic != "P5" {
        return Err(Error::Image(format!("unsupported PGM magic {magic:?}, only P5 is read")));
    }
    let mut number = |what: &str| -> Result<usize> {
        let tok = next_token()?;
        tok.parse::<usize>()
            .map_err(|_| Error::Image(format!("malformed PGM {what}: {tok:?}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(Error::Image(format!("PGM maxval {maxval} unsupported, expected 255")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let data_start = pos + 1;
    let len = width * height;
    if width == 0 || height == 0 {
        return Err(Error::Image("PGM has zero size".into()));
    }
    if bytes.len() < data_start + len {
        return Err(Error::Image(format!(
            "truncated PGM payload: {} of {} bytes",
            bytes.len().saturating_sub(data_start),
            len
        )));
    }
    Ok(GrayImage {
        width,
        height,
        pixels: bytes[data_start..data_start + len].to_vec(),
    })
}

pub fn write_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relaydsp::LocusPoint;
    use proptest::prelude::*;

    fn locus(points: &[(f64, f64)]) -> ImpedanceLocus {
        ImpedanceLocus {
            points: points
                .iter()
                .enumerate()
                .map(|(k, &(r, x))| LocusPoint { r, x, t: k as f64 })
                .collect(),
            dropped: 0,
        }
    }

    #[test]
    fn center_point_lands_on_center_pixel() {
        let img = rasterize(&locus(&[(50.0, 50.0)]), &Viewport::default(), &RasterOptions::default());
        assert_eq!(img.lit_pixels(), vec![(169, 146)]);
    }

    #[test]
    fn rendering_is_deterministic() {
        let l = locus(&[(900.0, 10.0), (40.0, 60.0), (5.0, 45.0), (5.0, 45.0)]);
        let a = rasterize(&l, &Viewport::default(), &RasterOptions::default());
        let b = rasterize(&l, &Viewport::default(), &RasterOptions::default());
        assert_eq!(encode_pgm(&a), encode_pgm(&b));
    }

    #[test]
    fn offscreen_locus_is_blank() {
        let l = locus(&[(500.0, 500.0), (600.0, 400.0), (-300.0, 900.0)]);
        let img = rasterize(&l, &Viewport::default(), &RasterOptions::default());
        assert!(img.pixels.iter().all(|&p| p == 0));
    }

    #[test]
    fn dwell_accumulates_and_saturates() {
        let l = locus(&[(0.0, 0.0); 20]);
        let img = rasterize(&l, &Viewport::default(), &RasterOptions { gain: 32, zone_reach: None });
        let lit = img.lit_pixels();
        assert_eq!(lit.len(), 1);
        assert_eq!(img.get(lit[0].0, lit[0].1), 255);
        let l = locus(&[(0.0, 0.0); 3]);
        let img = rasterize(&l, &Viewport::default(), &RasterOptions::default());
        let (r, c) = img.lit_pixels()[0];
        assert_eq!(img.get(r, c), 96);
    }

    #[test]
    fn segment_is_drawn_once_per_pixel() {
        // Horizontal run of 11 columns, each visited once.
        let vp = Viewport::default();
        let (c0, _) = vp.to_pixel(0.0, 0.0);
        let r1 = vp.r_min + (c0.round() + 10.0) / (WIDTH - 1) as f64 * (vp.r_max - vp.r_min);
        let img = rasterize(&locus(&[(0.0, 0.0), (r1, 0.0)]), &vp, &RasterOptions::default());
        let lit = img.lit_pixels();
        assert_eq!(lit.len(), 11);
        assert!(lit.iter().all(|&(r, c)| img.get(r, c) == 32));
    }

    #[test]
    fn zone_overlay_is_optional() {
        let l = locus(&[(10.0, 40.0)]);
        let plain = rasterize(&l, &Viewport::default(), &RasterOptions::default());
        let with_zone = rasterize(
            &l,
            &Viewport::default(),
            &RasterOptions {
                gain: 32,
                zone_reach: Some(Complex64::new(8.0, 72.0)),
            },
        );
        assert_eq!(plain.lit_pixels().len(), 1);
        assert!(with_zone.lit_pixels().len() > 100);
    }

    #[test]
    fn normalization_divides_by_255() {
        let mut img = GrayImage::blank(3, 1);
        img.pixels = vec![0, 255, 128];
        let n = normalize_pixels(&img);
        assert_eq!(n.pixels[0], 0.0);
        assert_eq!(n.pixels[1], 1.0);
        assert!((n.pixels[2] - 0.50196).abs() < 1e-5);
        assert_eq!(n.pixels[2], 128.0 / 255.0);
    }

    #[test]
    fn pgm_rejects_unsupported_headers() {
        assert!(decode_pgm(b"P2\n2 1\n255\n0 0\n").is_err());
        assert!(decode_pgm(b"P5\n2 1\n65535\n\0\0\0\0").is_err());
        assert!(decode_pgm(b"P5\n4 4\n255\n\0\0").is_err());
        assert!(decode_pgm(b"P5\n4").is_err());
        assert!(decode_pgm(b"P5\nx 4\n255\n").is_err());
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let img = decode_pgm(b"P5\n# made by hand\n2 1\n255\n\x07\x09").unwrap();
        assert_eq!(img.pixels, vec![7, 9]);
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
            let mut img = GrayImage::blank(w, h);
            let mut s = seed;
            for p in img.pixels.iter_mut() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *p = (s >> 56) as u8;
            }
            prop_assert_eq!(decode_pgm(&encode_pgm(&img)).unwrap(), img);
        }

        #[test]
        fn clipping_never_escapes_grid(
            pts in proptest::collection::vec((-1e12f64..1e12, -1e12f64..1e12), 1..30),
            near in proptest::collection::vec((-200.0f64..300.0, -200.0f64..300.0), 1..30),
        ) {
            let mut all = pts.clone();
            all.extend(near);
            let img = rasterize(&locus(&all), &Viewport::default(), &RasterOptions::default());
            prop_assert_eq!(img.pixels.len(), WIDTH * HEIGHT);
        }
    }

    #[test]
    fn extreme_values_do_not_panic() {
        let l = locus(&[(f64::MAX, -f64::MAX), (0.0, 0.0), (-f64::MAX, 1e300), (f64::MIN_POSITIVE, 3.0)]);
        let img = rasterize(&l, &Viewport::default(), &RasterOptions::default());
        assert_eq!(img.pixels.len(), WIDTH * HEIGHT);
    }
}
