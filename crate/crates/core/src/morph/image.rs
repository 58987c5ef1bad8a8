use std::path::Path;

use super::MorphError;

/// Row-major float image with 1 (gray) or 3 (RGB) interleaved channels,
/// values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<f32>,
}

impl Image {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        pixels: Vec<f32>,
    ) -> Result<Self, MorphError> {
        if width == 0 || height == 0 {
            return Err(MorphError::InvalidImage("zero dimension".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(MorphError::InvalidImage(format!(
                "unsupported channel count {channels}"
            )));
        }
        if pixels.len() != width * height * channels {
            return Err(MorphError::InvalidImage(format!(
                "{} values for {width}x{height}x{channels}",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(MorphError::InvalidImage(format!(
                "pixel value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
        .expect("valid fill")
    }

    /// Builds a single-channel image from `f(x, y)`, clamped to `[0, 1]`.
    pub fn from_fn_gray(width: usize, height: usize, f: impl Fn(usize, usize) -> f32) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn same_geometry(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub(crate) fn pixel_slice(&self, x: usize, y: usize) -> &[f32] {
        let start = (y * self.width + x) * self.channels;
        &self.pixels[start..start + self.channels]
    }

    #[inline]
    pub(crate) fn pixel_slice_mut(&mut self, x: usize, y: usize) -> &mut [f32] {
        let start = (y * self.width + x) * self.channels;
        &mut self.pixels[start..start + self.channels]
    }

    /// Luminance view (BT.601 weights for RGB).
    pub fn to_gray(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let pixels = self
            .pixels
            .chunks(3)
            .map(|p| (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).clamp(0.0, 1.0))
            .collect();
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            pixels,
        }
    }

    /// Area-average resize of a grayscale view to `side x side`.
    pub fn resize_gray(&self, side: usize) -> Vec<f32> {
        let gray = self.to_gray();
        let mut out = vec![0.0f32; side * side];
        let sx = gray.width as f64 / side as f64;
        let sy = gray.height as f64 / side as f64;
        for oy in 0..side {
            let y0 = oy as f64 * sy;
            let y1 = y0 + sy;
            for ox in 0..side {
                let x0 = ox as f64 * sx;
                let x1 = x0 + sx;
                let mut acc = 0.0f64;
                let mut weight = 0.0f64;
                let mut y = y0.floor() as usize;
                while (y as f64) < y1 && y < gray.height {
                    let wy = (y1.min(y as f64 + 1.0) - y0.max(y as f64)).max(0.0);
                    let mut x = x0.floor() as usize;
                    while (x as f64) < x1 && x < gray.width {
                        let wx = (x1.min(x as f64 + 1.0) - x0.max(x as f64)).max(0.0);
                        acc += wx * wy * gray.get(x, y, 0) as f64;
                        weight += wx * wy;
                        x += 1;
                    }
                    y += 1;
                }
                out[oy * side + ox] = (acc / weight) as f32;
            }
        }
        out
    }

    pub fn load(path: &Path) -> Result<Image, MorphError> {
        let dynamic = image::open(path).map_err(|e| MorphError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Ok(match dynamic.color().channel_count() {
            1 | 2 => {
                let buf = dynamic.to_luma8();
                let (w, h) = buf.dimensions();
                Image {
                    width: w as usize,
                    height: h as usize,
                    channels: 1,
                    pixels: buf.as_raw().iter().map(|&v| v as f32 / 255.0).collect(),
                }
            }
            _ => {
                let buf = dynamic.to_rgb8();
                let (w, h) = buf.dimensions();
                Image {
                    width: w as usize,
                    height: h as usize,
                    channels: 3,
                    pixels: buf.as_raw().iter().map(|&v| v as f32 / 255.0).collect(),
                }
            }
        })
    }

    /// Writes an 8-bit image; the format follows the extension
    /// (`.png`, `.pgm`, `.ppm`).
    pub fn save(&self, path: &Path) -> Result<(), MorphError> {
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        let (w, h) = (self.width as u32, self.height as u32);
        let io_err = |e: image::ImageError| MorphError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        };
        if self.channels == 1 {
            image::GrayImage::from_raw(w, h, bytes)
                .expect("sized buffer")
                .save(path)
                .map_err(io_err)
        } else {
            image::RgbImage::from_raw(w, h, bytes)
                .expect("sized buffer")
                .save(path)
                .map_err(io_err)
        }
    }
}
