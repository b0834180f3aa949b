//! Owned 8-bit planar rasters and PNG I/O.
//!
//! Samples are stored plane by plane: all of channel 0 in row-major order,
//! then channel 1, then channel 2. Only 1-channel (luminance) and 3-channel
//! (RGB) images exist in the processing path; alpha is dropped at load time.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};

/// Owned planar 8-bit raster.
#[derive(Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl Image {
    /// Wraps planar sample data, validating dimensions and channel count.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("dimensions must be positive, got {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!("channels must be 1 or 3, got {channels}")));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} samples for {width}x{height}x{channels}, got {}",
                data.len()
            )));
        }
        Ok(Image { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Image::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image by evaluating `f(x, y, channel)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(x, y, c));
                }
            }
        }
        Image::new(width, height, channels, data)
    }

    /// Converts interleaved samples (`RGBRGB...` or gray) into a planar image.
    pub fn from_interleaved(width: usize, height: usize, channels: usize, interleaved: &[u8]) -> Result<Self> {
        if interleaved.len() != width * height * channels {
            return Err(Error::InvalidImage(format!(
                "interleaved buffer has {} samples, expected {}",
                interleaved.len(),
                width * height * channels
            )));
        }
        let plane = width * height;
        let mut data = vec![0u8; plane * channels];
        for (i, px) in interleaved.chunks_exact(channels).enumerate() {
            for (c, &v) in px.iter().enumerate() {
                data[c * plane + i] = v;
            }
        }
        Image::new(width, height, channels, data)
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let plane = self.width * self.height;
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..plane {
            for c in 0..self.channels {
                out.push(self.data[c * plane + i]);
            }
        }
        out
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn plane(&self, channel: usize) -> &[u8] {
        let n = self.width * self.height;
        &self.data[channel * n..(channel + 1) * n]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.data[(channel * self.height + y) * self.width + x]
    }

    /// Copies out a `w`x`h` window with top-left corner at (`x`, `y`).
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Image> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::OutOfBounds { x, y, w, h, width: self.width, height: self.height });
        }
        let mut data = Vec::with_capacity(w * h * self.channels);
        for c in 0..self.channels {
            let plane = self.plane(c);
            for row in y..y + h {
                data.extend_from_slice(&plane[row * self.width + x..row * self.width + x + w]);
            }
        }
        Image::new(w, h, self.channels, data)
    }

    /// BT.601 luminance, `Y = round(0.299 R + 0.587 G + 0.114 B)`.
    ///
    /// Single-channel images are returned unchanged.
    pub fn to_luminance(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let (r, g, b) = (self.plane(0), self.plane(1), self.plane(2));
        let data = r.iter().zip(g).zip(b).map(|((&r, &g), &b)| luma(r, g, b)).collect();
        Image { width: self.width, height: self.height, channels: 1, data }
    }
}

#[inline]
pub(crate) fn luma(r: u8, g: u8, b: u8) -> u8 {
    // Weights sum to exactly 1000, so the result never exceeds 255.
    let y = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((y + 500) / 1000) as u8
}

/// Free-function form of [`Image::to_luminance`].
pub fn to_luminance(image: &Image) -> Image {
    image.to_luminance()
}

/// Reads an 8-bit PNG. Gray, gray+alpha, RGB, RGBA and opaque palettes are
/// accepted; alpha is discarded. 16-bit images and palettes carrying
/// transparency are rejected.
pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let format_err = |reason: String| Error::Format { path: path.to_path_buf(), reason };

    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| match e {
        png::DecodingError::IoError(io) if io.kind() != std::io::ErrorKind::UnexpectedEof => Error::io(path, io),
        other => format_err(other.to_string()),
    })?;

    let info = reader.info();
    if info.bit_depth == png::BitDepth::Sixteen {
        return Err(format_err("16-bit PNGs are not supported".into()));
    }
    if info.color_type == png::ColorType::Indexed && info.trns.is_some() {
        return Err(format_err("palette with transparency is not supported".into()));
    }

    let size = reader.output_buffer_size().ok_or_else(|| format_err("image too large to decode".into()))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| format_err(e.to_string()))?;
    if frame.bit_depth != png::BitDepth::Eight {
        return Err(format_err(format!("unexpected output bit depth {:?}", frame.bit_depth)));
    }
    let (width, height) = (frame.width as usize, frame.height as usize);
    let stride = frame.line_size;
    let (src_channels, keep) = match frame.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => {
            return Err(format_err("palette was not expanded".into()));
        }
    };

    let plane = width * height;
    let mut data = vec![0u8; plane * keep];
    for y in 0..height {
        let row = &buf[y * stride..y * stride + width * src_channels];
        for (x, px) in row.chunks_exact(src_channels).enumerate() {
            for c in 0..keep {
                data[c * plane + y * width + x] = px[c];
            }
        }
    }
    Image::new(width, height, keep, data)
}

/// Writes an 8-bit gray or RGB PNG.
pub fn save_png(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let encode_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io(path, io),
        other => Error::Format { path: path.to_path_buf(), reason: other.to_string() },
    };
    let mut encoder = png::Encoder::new(BufWriter::new(file), image.width() as u32, image.height() as u32);
    encoder.set_color(if image.channels() == 1 { png::ColorType::Grayscale } else { png::ColorType::Rgb });
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(encode_err)?;
    writer.write_image_data(&image.to_interleaved()).map_err(encode_err)?;
    writer.finish().map_err(encode_err)?;
    Ok(())
}
