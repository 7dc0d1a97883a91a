//! Binary model file: magic, version, scalar width, config, vocabulary and
//! parameter groups, all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::model::{EntailmentModel, ModelConfig, Params, Vocab, UNK};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MODEL_MAGIC: &[u8; 4] = b"VFNN";
pub const MODEL_FORMAT_VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> Error {
    Error::format("model", msg.into())
}

impl<T: Scalar> EntailmentModel<T> {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MODEL_MAGIC)?;
        w.write_u32::<LittleEndian>(MODEL_FORMAT_VERSION)?;
        w.write_u8(T::WIDTH)?;
        let c = &self.config;
        for v in [c.embed_dim, c.hidden, c.channels, c.z_dim, c.kernel_size, c.encoder_width] {
            w.write_u32::<LittleEndian>(v as u32)?;
        }
        w.write_u32::<LittleEndian>(self.vocab.len() as u32)?;
        for word in self.vocab.words() {
            w.write_u32::<LittleEndian>(word.len() as u32)?;
            w.write_all(word.as_bytes())?;
        }
        let mut buf = Vec::new();
        for (_, g) in self.params.groups() {
            w.write_u64::<LittleEndian>(g.len() as u64)?;
            buf.clear();
            for &v in g {
                v.write_le(&mut buf);
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    /// Reads a model stored at any supported width, casting to `T`.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != MODEL_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = r.read_u32::<LittleEndian>().map_err(|_| bad("truncated header"))?;
        if version != MODEL_FORMAT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        match r.read_u8().map_err(|_| bad("truncated header"))? {
            w if w == T::WIDTH => read_body::<T, R>(r),
            w if w == f32::WIDTH => Ok(read_body::<f32, R>(r)?.cast()),
            w if w == f64::WIDTH => Ok(read_body::<f64, R>(r)?.cast()),
            w => Err(bad(format!("unsupported scalar width {w}"))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f))
    }
}

fn read_body<T: Scalar, R: Read>(mut r: R) -> Result<EntailmentModel<T>> {
    let mut dims = [0usize; 6];
    for d in &mut dims {
        *d = r.read_u32::<LittleEndian>().map_err(|_| bad("truncated config"))? as usize;
    }
    let config = ModelConfig {
        embed_dim: dims[0],
        hidden: dims[1],
        channels: dims[2],
        z_dim: dims[3],
        kernel_size: dims[4],
        encoder_width: dims[5],
    };
    config.validate()?;
    let n = r.read_u32::<LittleEndian>().map_err(|_| bad("truncated vocabulary"))? as usize;
    let mut words = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let len = r.read_u32::<LittleEndian>().map_err(|_| bad("truncated vocabulary"))? as usize;
        let mut b = vec![0u8; len];
        r.read_exact(&mut b).map_err(|_| bad("truncated vocabulary"))?;
        words.push(String::from_utf8(b).map_err(|_| bad("vocabulary is not UTF-8"))?);
    }
    let distinct: std::collections::HashSet<&String> = words.iter().collect();
    if words.first().map(String::as_str) != Some(UNK) || distinct.len() != words.len() {
        return Err(bad("vocabulary is malformed"));
    }
    let vocab = Vocab::from_list(words);
    let mut params = Params::<T>::zeros(&config, vocab.len());
    let width = T::WIDTH as usize;
    for (name, g) in params.groups_mut() {
        let len = r.read_u64::<LittleEndian>().map_err(|_| bad("truncated parameters"))? as usize;
        if len != g.len() {
            return Err(bad(format!("group {name} has {len} entries, expected {}", g.len())));
        }
        let mut b = vec![0u8; len * width];
        r.read_exact(&mut b).map_err(|_| bad(format!("truncated group {name}")))?;
        for (dst, chunk) in g.iter_mut().zip(b.chunks_exact(width)) {
            *dst = T::read_le(chunk);
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok(EntailmentModel { config, vocab, params })
}
