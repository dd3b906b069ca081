//! F2D1 field files: magic `F2D1`, u16 version = 1, u32 width, u32 height,
//! then width*height little-endian f64 (re, im) pairs in row-major order.

use super::ComplexField;
use crate::error::{CoreError, Result};
use crate::scalar::Scalar;
use num_complex::Complex;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"F2D1";
const VERSION: u16 = 1;

pub fn write_f2d1<T: Scalar>(field: &ComplexField<T>, w: &mut impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(field.width() as u32).to_le_bytes())?;
    w.write_all(&(field.height() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(field.data().len() * 16);
    for z in field.data() {
        buf.extend_from_slice(&z.re.to_f64().unwrap().to_le_bytes());
        buf.extend_from_slice(&z.im.to_f64().unwrap().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_f2d1<T: Scalar>(r: &mut impl Read) -> Result<ComplexField<T>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CoreError::BadFileFormat("missing F2D1 magic".into()));
    }
    let mut u16buf = [0u8; 2];
    r.read_exact(&mut u16buf)?;
    let version = u16::from_le_bytes(u16buf);
    if version != VERSION {
        return Err(CoreError::BadFileFormat(format!("unsupported version {version}")));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let width = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let height = u32::from_le_bytes(u32buf) as usize;
    if width != height {
        return Err(CoreError::BadFileFormat(format!(
            "grid must be square, got {width}x{height}"
        )));
    }
    let mut bytes = vec![0u8; width * height * 16];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..16].try_into().unwrap());
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    ComplexField::from_data(width, data)
}

pub fn save_f2d1<T: Scalar>(field: &ComplexField<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    write_f2d1(field, &mut file)
}

pub fn load_f2d1<T: Scalar>(path: impl AsRef<Path>) -> Result<ComplexField<T>> {
    let mut file = std::fs::File::open(path)?;
    read_f2d1(&mut file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_bandlimited, synth_field, SynthKind};
    use crate::rng::seeded_rng;

    #[test]
    fn roundtrip_preserves_bits() {
        let mut rng = seeded_rng(31);
        let f = random_bandlimited::<f64>(32, &mut rng, |a, b| a.abs() < 8 && b.abs() < 8)
            .unwrap();
        let mut buf = Vec::new();
        write_f2d1(&f, &mut buf).unwrap();
        let g: ComplexField<f64> = read_f2d1(&mut buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn header_layout_is_fixed() {
        let f = synth_field::<f64>(32, SynthKind::PlaneWave { xi: (1, 0) }).unwrap();
        let mut buf = Vec::new();
        write_f2d1(&f, &mut buf).unwrap();
        assert_eq!(&buf[0..4], b"F2D1");
        assert_eq!(u16::from_le_bytes([buf[4], buf[5]]), 1);
        assert_eq!(u32::from_le_bytes([buf[6], buf[7], buf[8], buf[9]]), 32);
        assert_eq!(u32::from_le_bytes([buf[10], buf[11], buf[12], buf[13]]), 32);
        assert_eq!(buf.len(), 14 + 32 * 32 * 16);
    }

    #[test]
    fn rejects_garbage() {
        let mut buf = b"NOPE".to_vec();
        buf.extend_from_slice(&[0u8; 32]);
        assert!(read_f2d1::<f64>(&mut buf.as_slice()).is_err());
    }
}
