//! Image and artifact file handling: PNG/TIFF decode, 0/255 mask emission,
//! atomic writes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{to_grayscale, BinaryMask, GrayImage, RgbImage};

/// Decodes a PNG or TIFF file into a grayscale raster; RGB inputs go
/// through the standard luma conversion.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let read_err = |source: image::ImageError| Error::Read {
        path: path.to_path_buf(),
        source: Box::new(source),
    };
    let dynamic = image::ImageReader::open(path)
        .map_err(|e| Error::Read {
            path: path.to_path_buf(),
            source: Box::new(e),
        })?
        .decode()
        .map_err(read_err)?;
    match dynamic {
        image::DynamicImage::ImageLuma8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            GrayImage::new(w, h, buf.into_raw())
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let img = RgbImage::new(w, h, rgb.into_raw())?;
            to_grayscale(&img)
        }
    }
}

/// True when the path has a decodable raster extension.
pub fn is_image_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase),
        Some(ref e) if ["png", "tif", "tiff"].contains(&e.as_str())
    )
}

fn encode_png(data: &[u8], w: usize, h: usize) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let encoder = image::codecs::png::PngEncoder::new(&mut out);
    image::ImageEncoder::write_image(
        encoder,
        data,
        w as u32,
        h as u32,
        image::ExtendedColorType::L8,
    )?;
    Ok(out)
}

/// Writes a grayscale raster as PNG (atomic).
pub fn save_image_png(img: &GrayImage, path: &Path) -> Result<()> {
    let bytes = encode_png(img.pixels(), img.width(), img.height())?;
    atomic_write(path, &bytes)
}

/// Writes a mask as an 8-bit PNG with foreground 255, background 0 (atomic).
pub fn save_mask_png(mask: &BinaryMask, path: &Path) -> Result<()> {
    save_image_png(&mask.to_image(), path)
}

/// Writes via a temp file in the target directory plus rename, so readers
/// never observe partial content.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::seeded_image;

    #[test]
    fn png_roundtrip_grayscale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = seeded_image(64, 48, 3);
        save_image_png(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn tiff_roundtrip_grayscale() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.tif");
        let img = seeded_image(40, 30, 4);
        image::save_buffer(
            &path,
            img.pixels(),
            40,
            30,
            image::ExtendedColorType::L8,
        )
        .unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn rgb_png_converts_by_luma() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let raw = vec![100u8, 150, 200]; // one pixel
        image::save_buffer(&path, &raw, 1, 1, image::ExtendedColorType::Rgb8).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.get(0, 0), 141);
    }

    #[test]
    fn mask_png_is_0_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let mut mask = BinaryMask::empty(8, 8);
        mask.set(2, 3, true);
        save_mask_png(&mask, &path).unwrap();
        let back = load_image(&path).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(back.get(x, y), if x == 2 && y == 3 { 255 } else { 0 });
            }
        }
    }

    #[test]
    fn missing_file_is_read_error() {
        let err = load_image(Path::new("/nonexistent/zzz.png")).unwrap_err();
        assert!(matches!(err, Error::Read { .. }));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        atomic_write(&path, b"first").unwrap();
        atomic_write(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
    }
}
