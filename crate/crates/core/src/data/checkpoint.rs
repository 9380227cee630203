//! Binary checkpoint format, little-endian throughout:
//!
//! ```text
//! "BGCN" | version u32 | tensor count u32
//! per tensor: name len u32 | name utf-8 | rows u32 | cols u32 | rows*cols f32
//! config len u32 | config utf-8
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{BgcnParams, MfParams, TrainedModel};
use crate::numeric::DenseMatrix;

use super::atomic_write;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"BGCN";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: TrainedModel,
    /// Resolved training config as `key=value` text.
    pub config_echo: String,
}

/// Exact byte size of the serialized form.
pub fn checkpoint_size(model: &TrainedModel, config_echo: &str) -> usize {
    let tensors: usize = model
        .tensor_names()
        .iter()
        .zip(model.tensors())
        .map(|(n, t)| 4 + n.len() + 8 + 4 * t.len())
        .sum();
    12 + tensors + 4 + config_echo.len()
}

fn push_u32(buf: &mut Vec<u8>, v: usize) {
    buf.extend_from_slice(&(v as u32).to_le_bytes());
}

pub fn encode_checkpoint(ckpt: &Checkpoint) -> Vec<u8> {
    let mut buf = Vec::with_capacity(checkpoint_size(&ckpt.model, &ckpt.config_echo));
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    push_u32(&mut buf, CHECKPOINT_VERSION as usize);
    let names = ckpt.model.tensor_names();
    push_u32(&mut buf, names.len());
    for (name, t) in names.iter().zip(ckpt.model.tensors()) {
        push_u32(&mut buf, name.len());
        buf.extend_from_slice(name.as_bytes());
        push_u32(&mut buf, t.rows());
        push_u32(&mut buf, t.cols());
        for &v in t.as_slice() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    push_u32(&mut buf, ckpt.config_echo.len());
    buf.extend_from_slice(ckpt.config_echo.as_bytes());
    buf
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    atomic_write(path, &encode_checkpoint(ckpt))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Checkpoint(format!(
                "truncated while reading {what} at byte {}",
                self.pos
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)?;
        let bytes = self.take(n, what)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::Checkpoint(format!("{what} is not valid utf-8")))
    }
}

fn expect_shape(name: &str, t: &DenseMatrix, rows: usize, cols: usize) -> Result<()> {
    if t.shape() != (rows, cols) {
        return Err(Error::Checkpoint(format!(
            "tensor {name} has shape {}x{}, expected {rows}x{cols}",
            t.rows(),
            t.cols()
        )));
    }
    Ok(())
}

fn assemble(tensors: Vec<(String, DenseMatrix)>) -> Result<TrainedModel> {
    let names: Vec<&str> = tensors.iter().map(|(n, _)| n.as_str()).collect();
    if names == ["mf_users", "mf_bundles"] {
        let mut it = tensors.into_iter().map(|(_, t)| t);
        let users = it.next().unwrap();
        let bundles = it.next().unwrap();
        expect_shape("mf_bundles", &bundles, bundles.rows(), users.cols())?;
        return Ok(TrainedModel::Mf(MfParams { users, bundles }));
    }
    if names.len() < 3 || names[..3] != ["users", "items", "bundles"] || (names.len() - 3) % 4 != 0
    {
        return Err(Error::Checkpoint(format!(
            "unrecognized tensor layout {names:?}"
        )));
    }
    let layers = (names.len() - 3) / 4;
    let dim = tensors[0].1.cols();
    let mut params = BgcnParams {
        users: DenseMatrix::zeros(0, 0),
        items: DenseMatrix::zeros(0, 0),
        bundles: DenseMatrix::zeros(0, 0),
        item_weights: vec![DenseMatrix::zeros(0, 0); layers],
        item_biases: vec![DenseMatrix::zeros(0, 0); layers],
        bundle_weights: vec![DenseMatrix::zeros(0, 0); layers],
        bundle_biases: vec![DenseMatrix::zeros(0, 0); layers],
    };
    let expected: Vec<String> = {
        use crate::model::Parameters;
        params.tensor_names()
    };
    for ((name, t), want) in tensors.into_iter().zip(&expected) {
        if &name != want {
            return Err(Error::Checkpoint(format!(
                "expected tensor {want}, found {name}"
            )));
        }
        let (kind, layer) = match name.split_once('.') {
            Some((k, l)) => (k.to_string(), l.parse::<usize>().unwrap_or(0)),
            None => (name.clone(), 0),
        };
        match kind.as_str() {
            "users" | "items" | "bundles" => expect_shape(&name, &t, t.rows(), dim)?,
            "item_weight" | "bundle_weight" => expect_shape(&name, &t, dim, dim)?,
            _ => expect_shape(&name, &t, 1, dim)?,
        }
        match kind.as_str() {
            "users" => params.users = t,
            "items" => params.items = t,
            "bundles" => params.bundles = t,
            "item_weight" => params.item_weights[layer] = t,
            "item_bias" => params.item_biases[layer] = t,
            "bundle_weight" => params.bundle_weights[layer] = t,
            _ => params.bundle_biases[layer] = t,
        }
    }
    Ok(TrainedModel::Bgcn(params))
}

pub fn decode_checkpoint(buf: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4, "magic")? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic, not a BGCN checkpoint".into()));
    }
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION as usize {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let count = r.u32("tensor count")?;
    let mut tensors = Vec::with_capacity(count.min(1024));
    for k in 0..count {
        let name = r.string(&format!("tensor {k} name"))?;
        let rows = r.u32(&name)?;
        let cols = r.u32(&name)?;
        let n = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Checkpoint(format!("tensor {name} too large")))?;
        let bytes = r.take(n, &name)?;
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        tensors.push((name, DenseMatrix::from_vec(rows, cols, data)?));
    }
    let config_echo = r.string("config echo")?;
    if r.pos != buf.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after config echo",
            buf.len() - r.pos
        )));
    }
    Ok(Checkpoint {
        model: assemble(tensors)?,
        config_echo,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let buf =
        std::fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_checkpoint(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            model: TrainedModel::Bgcn(BgcnParams::init(5, 4, 8, 6, 2, 3)),
            config_echo: "dim=6\nlayers=2\n".into(),
        }
    }

    #[test]
    fn roundtrip_is_canonical() {
        let bytes = encode_checkpoint(&sample());
        assert_eq!(
            bytes.len(),
            checkpoint_size(&sample().model, &sample().config_echo)
        );
        let back = decode_checkpoint(&bytes).unwrap();
        assert_eq!(back.config_echo, sample().config_echo);
        assert_eq!(encode_checkpoint(&back), bytes);
    }

    #[test]
    fn mf_roundtrip() {
        let ckpt = Checkpoint {
            model: TrainedModel::Mf(MfParams::init(3, 7, 4, 1)),
            config_echo: String::new(),
        };
        let back = decode_checkpoint(&encode_checkpoint(&ckpt)).unwrap();
        assert!(matches!(back.model, TrainedModel::Mf(ref p) if p.num_bundles() == 7));
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode_checkpoint(&sample());
        for cut in [0, 3, 10, 40, bytes.len() - 1] {
            assert!(matches!(
                decode_checkpoint(&bytes[..cut]),
                Err(Error::Checkpoint(_))
            ));
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_checkpoint(&bad)
            .unwrap_err()
            .to_string()
            .contains("magic"));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(decode_checkpoint(&bad)
            .unwrap_err()
            .to_string()
            .contains("version"));
    }
}
