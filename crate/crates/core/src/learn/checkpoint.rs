//! Model checkpoint file (`BLML1`): probing codebook plus decoder tensors,
//! little-endian, portable across platforms.
//!
//! Layout: magic | u8 version | u32 n_t, K, q, D, W | codebook payload
//! (kind | n_t | K | column-major complex data) | per-layer tensors as
//! length-prefixed f64 arrays in the order `w, b, ln_scale, ln_shift`,
//! then `out_w, out_b`.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::learn::mlp::MlpModel;
use crate::learn::train::TrainableProbing;
use crate::probing::{read_codebook_payload, write_codebook_payload};

const MODEL_MAGIC: &[u8; 5] = b"BLML1";
const MODEL_VERSION: u8 = 1;

fn write_tensor(w: &mut impl Write, data: &[f64]) -> Result<()> {
    w.write_u64::<LittleEndian>(data.len() as u64)?;
    for v in data {
        w.write_f64::<LittleEndian>(*v)?;
    }
    Ok(())
}

fn read_tensor(r: &mut impl Read, expected: usize, what: &'static str) -> Result<Vec<f64>> {
    let len = r
        .read_u64::<LittleEndian>()
        .map_err(|_| Error::Truncated(what))? as usize;
    if len != expected {
        return Err(Error::InvalidArgument(format!(
            "tensor {what} has length {len}, expected {expected}"
        )));
    }
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(
            r.read_f64::<LittleEndian>()
                .map_err(|_| Error::Truncated(what))?,
        );
    }
    Ok(out)
}

pub fn save_model(probing: &TrainableProbing, model: &MlpModel, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MODEL_MAGIC)?;
    w.write_u8(MODEL_VERSION)?;
    w.write_u32::<LittleEndian>(model.n_t as u32)?;
    w.write_u32::<LittleEndian>(model.k as u32)?;
    w.write_u32::<LittleEndian>(model.q as u32)?;
    w.write_u32::<LittleEndian>(model.depth as u32)?;
    w.write_u32::<LittleEndian>(model.width as u32)?;
    write_codebook_payload(&probing.as_codebook()?, &mut w)?;
    for layer in &model.layers {
        write_tensor(&mut w, &layer.w.data)?;
        write_tensor(&mut w, &layer.b)?;
        write_tensor(&mut w, &layer.ln_scale)?;
        write_tensor(&mut w, &layer.ln_shift)?;
    }
    write_tensor(&mut w, &model.out_w.data)?;
    write_tensor(&mut w, &model.out_b)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(TrainableProbing, MlpModel)> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Truncated("magic"))?;
    if &magic != MODEL_MAGIC {
        return Err(Error::BadMagic { expected: "BLML1" });
    }
    let version = r.read_u8().map_err(|_| Error::Truncated("version"))?;
    if version != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            expected: MODEL_VERSION,
            found: version,
        });
    }
    let mut dims = [0usize; 5];
    for (i, what) in ["n_t", "K", "q", "D", "W"].iter().enumerate() {
        dims[i] = r
            .read_u32::<LittleEndian>()
            .map_err(|_| Error::Truncated(what))? as usize;
    }
    let [n_t, k, q, depth, width] = dims;
    if n_t == 0 || k == 0 || q == 0 || depth == 0 || width == 0 {
        return Err(Error::InvalidArgument("zero model dimension".into()));
    }
    let book = read_codebook_payload(&mut r)?;
    if book.n_t() != n_t || book.len() != k {
        return Err(Error::InvalidArgument(
            "probing codebook shape disagrees with header".into(),
        ));
    }
    let mut model = MlpModel::init(n_t, k, q, depth, width, 0);
    for d in 0..depth {
        let in_dim = model.layer_in_dim(d);
        model.layers[d].w.data = read_tensor(&mut r, width * in_dim, "layer weight")?;
        model.layers[d].b = read_tensor(&mut r, width, "layer bias")?;
        model.layers[d].ln_scale = read_tensor(&mut r, width, "ln scale")?;
        model.layers[d].ln_shift = read_tensor(&mut r, width, "ln shift")?;
    }
    model.out_w.data = read_tensor(&mut r, model.out_dim() * width, "output weight")?;
    model.out_b = read_tensor(&mut r, model.out_dim(), "output bias")?;
    Ok((TrainableProbing::from_codebook(&book), model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trip() {
        let probing = TrainableProbing::dft_init(8, 4);
        let model = MlpModel::init(8, 4, 2, 2, 16, 33);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.blml");
        save_model(&probing, &model, &path).unwrap();
        let (p2, m2) = load_model(&path).unwrap();
        assert_eq!(p2.beams, probing.beams);
        assert_eq!(m2, model);
    }

    #[test]
    fn checkpoint_bad_magic_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.blml");
        std::fs::write(&path, b"XXXXXjunk").unwrap();
        assert!(matches!(load_model(&path), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn checkpoint_truncation_is_error() {
        let probing = TrainableProbing::dft_init(8, 4);
        let model = MlpModel::init(8, 4, 2, 1, 8, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.blml");
        save_model(&probing, &model, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(load_model(&path), Err(Error::Truncated(_))));
    }
}
