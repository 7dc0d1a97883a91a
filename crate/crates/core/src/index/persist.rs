//! Binary index file: "VFIX", u32 format version, then little-endian payload.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{Bm25Params, FieldIndex, IndexedCorpus, Posting};
use crate::corpus::SentenceDoc;
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &[u8; 4] = b"VFIX";
pub const INDEX_FORMAT_VERSION: u32 = 1;

fn bad(message: impl Into<String>) -> Error {
    Error::format("index", message)
}

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = r.read_u32::<LittleEndian>()? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| bad("string is not utf-8"))
}

fn write_tokens<W: Write>(w: &mut W, tokens: &[String]) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(tokens.len() as u32)?;
    tokens.iter().try_for_each(|t| write_str(w, t))
}

fn read_tokens<R: Read>(r: &mut R) -> Result<Vec<String>> {
    let n = r.read_u32::<LittleEndian>()?;
    (0..n).map(|_| read_str(r)).collect()
}

fn write_field<W: Write>(w: &mut W, f: &FieldIndex) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(f.postings.len() as u32)?;
    for (term, list) in &f.postings {
        write_str(w, term)?;
        w.write_u32::<LittleEndian>(list.len() as u32)?;
        for p in list {
            w.write_u32::<LittleEndian>(p.doc)?;
            w.write_u32::<LittleEndian>(p.tf)?;
        }
    }
    Ok(())
}

fn read_field<R: Read>(r: &mut R, lengths: Vec<u32>) -> Result<FieldIndex> {
    let n_docs = lengths.len() as u32;
    let n_terms = r.read_u32::<LittleEndian>()?;
    let mut f = FieldIndex {
        total_length: lengths.iter().map(|&l| u64::from(l)).sum(),
        doc_lengths: lengths,
        ..Default::default()
    };
    let mut prev_term: Option<String> = None;
    for _ in 0..n_terms {
        let term = read_str(r)?;
        if prev_term.as_ref().is_some_and(|p| *p >= term) {
            return Err(bad("terms out of order"));
        }
        let n = r.read_u32::<LittleEndian>()?;
        let mut list = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let doc = r.read_u32::<LittleEndian>()?;
            let tf = r.read_u32::<LittleEndian>()?;
            if doc >= n_docs || list.last().is_some_and(|p: &Posting| p.doc >= doc) {
                return Err(bad(format!("bad posting list for {term:?}")));
            }
            list.push(Posting { doc, tf });
        }
        f.postings.insert(term.clone(), list);
        prev_term = Some(term);
    }
    Ok(f)
}

impl IndexedCorpus {
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(INDEX_MAGIC)?;
        w.write_u32::<LittleEndian>(INDEX_FORMAT_VERSION)?;
        w.write_f64::<LittleEndian>(self.bm25.k1)?;
        w.write_f64::<LittleEndian>(self.bm25.b)?;
        w.write_u32::<LittleEndian>(self.docs.len() as u32)?;
        for d in &self.docs {
            write_str(w, &d.page_title_raw)?;
            write_str(w, &d.page_title_display)?;
            w.write_u32::<LittleEndian>(d.sentence_index)?;
            write_str(w, &d.raw_text)?;
            write_str(w, &d.contextualized_text)?;
            write_tokens(w, &d.title_tokens)?;
            write_tokens(w, &d.body_tokens)?;
        }
        write_field(w, &self.title)?;
        write_field(w, &self.body)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != INDEX_MAGIC {
            return Err(bad("missing VFIX header"));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != INDEX_FORMAT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let bm25 = Bm25Params {
            k1: r.read_f64::<LittleEndian>()?,
            b: r.read_f64::<LittleEndian>()?,
        };
        let n = r.read_u32::<LittleEndian>()?;
        let mut docs = Vec::with_capacity(n as usize);
        for _ in 0..n {
            docs.push(SentenceDoc {
                page_title_raw: read_str(r)?,
                page_title_display: read_str(r)?,
                sentence_index: r.read_u32::<LittleEndian>()?,
                raw_text: read_str(r)?,
                contextualized_text: read_str(r)?,
                title_tokens: read_tokens(r)?,
                body_tokens: read_tokens(r)?,
            });
        }
        let title_lengths = docs.iter().map(|d| d.title_tokens.len() as u32).collect();
        let body_lengths = docs.iter().map(|d| d.body_tokens.len() as u32).collect();
        let title = read_field(r, title_lengths)?;
        let body = read_field(r, body_lengths)?;
        Ok(Self::assemble(docs, title, body, bm25))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(&mut &bytes[..])
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
