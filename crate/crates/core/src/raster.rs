//! Deterministic parallel rasterization: viewport mapping, per-pixel
//! classification renders with static row partitioning, Bresenham polyline
//! overlays and bit-exact binary PPM output.
//!
//! Output bytes depend only on the viewport and classifier, never on the
//! worker count: workers own disjoint row bands and per-row classifier
//! state is reset at each row start.

use crate::binv::{Side, TileClassification, Verdict};
use crate::moebius::Complex;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("failed writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Axis-aligned frame: pixel (i, j) sits at
/// center + ((i+0.5)/px − 0.5)·width + i·((j+0.5)/py − 0.5)·height.
#[derive(Debug, Clone, Copy)]
pub struct Viewport {
    pub center: Complex,
    pub width: f64,
    pub pixels_x: usize,
    pub pixels_y: usize,
}

impl Viewport {
    pub fn new(center: Complex, width: f64, pixels_x: usize, pixels_y: usize) -> Self {
        assert!(pixels_x > 0 && pixels_y > 0 && width > 0.0);
        Viewport {
            center,
            width,
            pixels_x,
            pixels_y,
        }
    }

    pub fn height(&self) -> f64 {
        self.width * self.pixels_y as f64 / self.pixels_x as f64
    }

    pub fn pixel_to_point(&self, i: usize, j: usize) -> Complex {
        self.center
            + Complex::new(
                ((i as f64 + 0.5) / self.pixels_x as f64 - 0.5) * self.width,
                ((j as f64 + 0.5) / self.pixels_y as f64 - 0.5) * self.height(),
            )
    }

    /// Continuous pixel coordinates of a plane point (inverse of
    /// `pixel_to_point` at pixel centers).
    pub fn point_to_pixel(&self, z: Complex) -> (f64, f64) {
        let i = ((z.re - self.center.re) / self.width + 0.5) * self.pixels_x as f64 - 0.5;
        let j = ((z.im - self.center.im) / self.height() + 0.5) * self.pixels_y as f64 - 0.5;
        (i, j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rgb(pub u8, pub u8, pub u8);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl ImageBuffer {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        let mut pixels = Vec::with_capacity(3 * width * height);
        for _ in 0..width * height {
            pixels.extend_from_slice(&[color.0, color.1, color.2]);
        }
        ImageBuffer {
            width,
            height,
            pixels,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, color: Rgb) {
        if i < self.width && j < self.height {
            let at = 3 * (j * self.width + i);
            self.pixels[at] = color.0;
            self.pixels[at + 1] = color.1;
            self.pixels[at + 2] = color.2;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rgb {
        let at = 3 * (j * self.width + i);
        Rgb(self.pixels[at], self.pixels[at + 1], self.pixels[at + 2])
    }
}

/// Verdict-to-color mapping: ranks cycle through a 16-hue table, the other
/// verdicts get solids.
#[derive(Debug, Clone)]
pub struct Palette {
    pub rank_cycle: [Rgb; 16],
    pub nonescaping: Rgb,
    pub kplus: Rgb,
    pub kminus: Rgb,
    pub undecided: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        let mut cycle = [Rgb(0, 0, 0); 16];
        for (k, slot) in cycle.iter_mut().enumerate() {
            // A fixed 16-entry hue wheel, medium saturation.
            let h = k as f64 / 16.0 * 6.0;
            let sector = h as usize % 6;
            let f = h - h.floor();
            let (p, q, t) = (70u8, (230.0 - 160.0 * f) as u8, (70.0 + 160.0 * f) as u8);
            *slot = match sector {
                0 => Rgb(230, t, p),
                1 => Rgb(q, 230, p),
                2 => Rgb(p, 230, t),
                3 => Rgb(p, q, 230),
                4 => Rgb(t, p, 230),
                _ => Rgb(230, p, q),
            };
        }
        Palette {
            rank_cycle: cycle,
            nonescaping: Rgb(10, 10, 40),
            kplus: Rgb(20, 90, 20),
            kminus: Rgb(120, 20, 20),
            undecided: Rgb(128, 128, 128),
        }
    }
}

impl Palette {
    pub fn color(&self, t: &TileClassification) -> Rgb {
        match (t.verdict, t.side) {
            (Verdict::NonEscapingApprox, Some(Side::Kplus)) => self.kplus,
            (Verdict::NonEscapingApprox, Some(Side::Kminus)) => self.kminus,
            (Verdict::NonEscapingApprox, _) => self.nonescaping,
            (Verdict::TileRank(k), _) => self.rank_cycle[k % 16],
            (Verdict::Undecided, _) => self.undecided,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RenderReport {
    pub undecided_pixels: usize,
}

/// Renders one classified pixel field. `factory` builds a fresh classifier
/// per row (per-row warm-start caches keep rows order-independent), so
/// output is byte-identical for any worker count.
pub fn render<F, G>(
    viewport: &Viewport,
    palette: &Palette,
    workers: usize,
    factory: &F,
) -> (ImageBuffer, RenderReport)
where
    F: Fn() -> G + Sync,
    G: FnMut(Complex) -> TileClassification,
{
    let workers = workers.max(1);
    let (w, h) = (viewport.pixels_x, viewport.pixels_y);
    let mut image = ImageBuffer::filled(w, h, Rgb(0, 0, 0));

    let render_row = |j: usize, row: &mut [u8], undecided: &mut usize| {
        let mut classify = factory();
        for i in 0..w {
            let z = viewport.pixel_to_point(i, j);
            let t = classify(z);
            if t.verdict == Verdict::Undecided {
                *undecided += 1;
            }
            let color = palette.color(&t);
            row[3 * i] = color.0;
            row[3 * i + 1] = color.1;
            row[3 * i + 2] = color.2;
        }
    };

    let mut report = RenderReport::default();
    if workers == 1 {
        for (j, row) in image.pixels.chunks_mut(3 * w).enumerate() {
            render_row(j, row, &mut report.undecided_pixels);
        }
        return (image, report);
    }

    let rows_per_band = h.div_ceil(workers);
    let mut band_undecided = vec![0usize; workers];
    std::thread::scope(|scope| {
        let mut rest: &mut [u8] = &mut image.pixels;
        let mut handles = Vec::new();
        for (band, undecided) in band_undecided.iter_mut().enumerate() {
            let start_row = band * rows_per_band;
            if start_row >= h {
                break;
            }
            let rows = rows_per_band.min(h - start_row);
            let (chunk, tail) = rest.split_at_mut(3 * w * rows);
            rest = tail;
            handles.push(scope.spawn(move || {
                for (r, row) in chunk.chunks_mut(3 * w).enumerate() {
                    render_row(start_row + r, row, undecided);
                }
            }));
        }
        for handle in handles {
            handle.join().expect("render worker panicked");
        }
    });
    report.undecided_pixels = band_undecided.iter().sum();
    (image, report)
}

/// Draws polylines as Bresenham segments clipped to the viewport.
pub fn draw_polylines(
    image: &mut ImageBuffer,
    curves: &[Vec<Complex>],
    viewport: &Viewport,
    color: Rgb,
) {
    for curve in curves {
        for seg in curve.windows(2) {
            let a = viewport.point_to_pixel(seg[0]);
            let b = viewport.point_to_pixel(seg[1]);
            if let Some(((x0, y0), (x1, y1))) = clip_segment(
                a,
                b,
                image.width as f64 - 0.5,
                image.height as f64 - 0.5,
            ) {
                bresenham(image, x0, y0, x1, y1, color);
            }
        }
    }
}

/// Liang–Barsky clip to [−0.5, xmax] × [−0.5, ymax].
fn clip_segment(
    a: (f64, f64),
    b: (f64, f64),
    xmax: f64,
    ymax: f64,
) -> Option<((i64, i64), (i64, i64))> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    for (p, q) in [
        (-dx, a.0 + 0.5),
        (dx, xmax - a.0),
        (-dy, a.1 + 0.5),
        (dy, ymax - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                if r > t1 {
                    return None;
                }
                t0 = t0.max(r);
            } else {
                if r < t0 {
                    return None;
                }
                t1 = t1.min(r);
            }
        }
    }
    let p0 = (
        (a.0 + t0 * dx).round() as i64,
        (a.1 + t0 * dy).round() as i64,
    );
    let p1 = (
        (a.0 + t1 * dx).round() as i64,
        (a.1 + t1 * dy).round() as i64,
    );
    Some((p0, p1))
}

fn bresenham(image: &mut ImageBuffer, x0: i64, y0: i64, x1: i64, y1: i64, color: Rgb) {
    let (mut x, mut y) = (x0, y0);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x >= 0 && y >= 0 {
            image.set(x as usize, y as usize, color);
        }
        if x == x1 && y == y1 {
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
}

/// Binary PPM: header "P6\n<w> <h>\n255\n", then raw RGB rows top to
/// bottom; bit-exact for equal buffers.
pub fn ppm_bytes(image: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

pub fn write_ppm(image: &ImageBuffer, path: &Path) -> Result<(), RasterError> {
    let bytes = ppm_bytes(image);
    let mut file = std::fs::File::create(path).map_err(|source| RasterError::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(&bytes).map_err(|source| RasterError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_ppm(bytes: &[u8]) -> Option<ImageBuffer> {
    let text_end = bytes.windows(1).count().min(64);
    let header = String::from_utf8_lossy(&bytes[..text_end]);
    let mut parts = header.split_ascii_whitespace();
    if parts.next()? != "P6" {
        return None;
    }
    let width: usize = parts.next()?.parse().ok()?;
    let height: usize = parts.next()?.parse().ok()?;
    let _max: usize = parts.next()?.parse().ok()?;
    // Payload starts after the third header newline.
    let mut newlines = 0;
    let mut start = 0;
    for (k, b) in bytes.iter().enumerate() {
        if *b == b'\n' {
            newlines += 1;
            if newlines == 3 {
                start = k + 1;
                break;
            }
        }
    }
    let pixels = bytes[start..].to_vec();
    if pixels.len() != 3 * width * height {
        return None;
    }
    Some(ImageBuffer {
        width,
        height,
        pixels,
    })
}

/// Samples the unit circle as a drawable polyline.
pub fn unit_circle_polyline(samples: usize) -> Vec<Complex> {
    (0..=samples)
        .map(|k| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / samples as f64))
        .collect()
}
