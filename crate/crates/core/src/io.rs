//! PNG/BMP reading and writing at 8 bits per channel.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;

/// Largest accepted side, guarding against hostile headers.
pub const MAX_SIDE: u32 = 16_384;

fn from_dynamic(img: DynamicImage) -> Result<ImageBuffer> {
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 || w > MAX_SIDE || h > MAX_SIDE {
        return Err(Error::Format(format!("unsupported image size {w}x{h}")));
    }
    let (channels, data): (usize, Vec<u8>) = if img.color().has_color() {
        (3, img.into_rgb8().into_raw())
    } else {
        (1, img.into_luma8().into_raw())
    };
    ImageBuffer::new(h as usize, w as usize, channels, 8, data.into_iter().map(u16::from).collect())
}

fn format_of(bytes: &[u8]) -> Result<ImageFormat> {
    match image::guess_format(bytes) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Bmp)) => Ok(f),
        Ok(f) => Err(Error::Format(format!("{f:?} images are not supported"))),
        Err(_) => Err(Error::Format("unrecognised image data".into())),
    }
}

/// Decodes PNG or BMP bytes.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    let format = format_of(bytes)?;
    let mut reader = image::ImageReader::with_format(Cursor::new(bytes), format);
    let mut limits = image::Limits::default();
    limits.max_image_width = Some(MAX_SIDE);
    limits.max_image_height = Some(MAX_SIDE);
    limits.max_alloc = Some(1 << 30);
    reader.limits(limits);
    from_dynamic(reader.decode()?)
}

pub fn load_image(path: &Path) -> Result<ImageBuffer> {
    decode_image(&std::fs::read(path)?)
}

fn format_for_path(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => Ok(ImageFormat::Png),
        Some("bmp") => Ok(ImageFormat::Bmp),
        _ => Err(Error::Format(format!("cannot infer PNG or BMP from `{}`", path.display()))),
    }
}

fn to_dynamic(img: &ImageBuffer) -> Result<DynamicImage> {
    if img.bits() != 8 {
        return Err(Error::Format(format!("only 8-bit images can be written, got {} bits", img.bits())));
    }
    let bytes: Vec<u8> = img.data().iter().map(|&v| v as u8).collect();
    let (w, h) = (img.cols() as u32, img.rows() as u32);
    Ok(match img.channels() {
        1 => DynamicImage::ImageLuma8(GrayImage::from_raw(w, h, bytes).expect("buffer size matches")),
        _ => DynamicImage::ImageRgb8(RgbImage::from_raw(w, h, bytes).expect("buffer size matches")),
    })
}

/// Encodes to PNG or BMP bytes.
pub fn encode_image(img: &ImageBuffer, format: ImageFormat) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    to_dynamic(img)?.write_to(&mut out, format)?;
    Ok(out.into_inner())
}

/// Writes PNG or BMP, chosen by extension.
pub fn save_image(path: &Path, img: &ImageBuffer) -> Result<()> {
    let format = format_for_path(path)?;
    std::fs::write(path, encode_image(img, format)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::random_image;

    #[test]
    fn png_and_bmp_round_trip() {
        for channels in [1, 3] {
            let img = random_image(7, 5, channels, 9).unwrap();
            for format in [ImageFormat::Png, ImageFormat::Bmp] {
                let back = decode_image(&encode_image(&img, format).unwrap()).unwrap();
                if format == ImageFormat::Bmp && channels == 1 {
                    // gray BMPs are palettized and decode as RGB
                    assert_eq!(back.channels(), 3);
                    for ch in 0..3 {
                        assert_eq!(back.channel(ch).unwrap(), img);
                    }
                } else {
                    assert_eq!(back, img, "{format:?} {channels}");
                }
            }
        }
    }

    #[test]
    fn files_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let img = random_image(4, 4, 1, 1).unwrap();
        let p = dir.path().join("x.PNG");
        save_image(&p, &img).unwrap();
        assert_eq!(load_image(&p).unwrap(), img);
        assert!(save_image(&dir.path().join("x.jpg"), &img).is_err());
    }

    #[test]
    fn rejects_garbage_and_deep_images() {
        assert!(matches!(decode_image(b"not an image"), Err(Error::Format(_))));
        assert!(decode_image(&[]).is_err());
        let deep = ImageBuffer::filled(2, 2, 1, 10, 1000).unwrap();
        assert!(encode_image(&deep, ImageFormat::Png).is_err());
    }
}
