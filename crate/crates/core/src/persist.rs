//! Binary index files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! "CBIX"                      magic
//! u32                         format version
//! f64 k, u8 estimator, u8 log base
//! u32 n, n x (u32 len, utf-8) vocabulary terms
//! u32 n, n x (u32 len, utf-8) canonical context keys
//! CSR M_vc, CSR M_cv          each: u32 rows, u32 cols, u64 nnz,
//!                             (rows+1) x u64 row pointers,
//!                             nnz x u32 columns, nnz x f64 values
//! ```

use std::io::{self, Read, Write};

use crate::context::{ContextKey, ContextTable};
use crate::cooccur::{ApmiConfig, ApmiIndex, Estimator, LogBase};
use crate::csr::Csr;
use crate::error::{Error, Result};
use crate::ingest::Vocabulary;

pub const MAGIC: &[u8; 4] = b"CBIX";
pub const FORMAT_VERSION: u32 = 1;

// Upper bound on speculative preallocation from untrusted lengths.
const PREALLOC_LIMIT: usize = 1 << 20;

fn estimator_tag(e: Estimator) -> u8 {
    match e {
        Estimator::Joint => 0,
        Estimator::Conditional => 1,
    }
}

fn log_base_tag(b: LogBase) -> u8 {
    match b {
        LogBase::Natural => 0,
        LogBase::Base2 => 1,
        LogBase::Base10 => 2,
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn write_csr<W: Write>(w: &mut W, m: &Csr) -> io::Result<()> {
    w.write_all(&(m.nrows() as u32).to_le_bytes())?;
    w.write_all(&(m.ncols() as u32).to_le_bytes())?;
    w.write_all(&(m.nnz() as u64).to_le_bytes())?;
    for p in m.indptr() {
        w.write_all(&p.to_le_bytes())?;
    }
    for c in m.indices() {
        w.write_all(&c.to_le_bytes())?;
    }
    for v in m.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn save_index<W: Write>(index: &ApmiIndex, sink: W) -> Result<()> {
    let mut w = io::BufWriter::new(sink);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let cfg = index.config();
    w.write_all(&cfg.k.to_le_bytes())?;
    w.write_all(&[estimator_tag(cfg.estimator), log_base_tag(cfg.log_base)])?;
    w.write_all(&(index.vocab().len() as u32).to_le_bytes())?;
    for t in index.vocab().terms() {
        write_str(&mut w, t)?;
    }
    w.write_all(&(index.contexts().len() as u32).to_le_bytes())?;
    for k in index.contexts().keys() {
        write_str(&mut w, &k.canonical())?;
    }
    write_csr(&mut w, index.m_vc())?;
    write_csr(&mut w, index.m_cv())?;
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| match e.kind() {
                io::ErrorKind::UnexpectedEof => {
                    Error::Load(format!("truncated while reading {what}"))
                }
                _ => Error::Io(e),
            })?;
        Ok(buf)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.bytes::<1>(what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(what)?))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let mut buf = Vec::with_capacity(len.min(PREALLOC_LIMIT));
        (&mut self.inner).take(len as u64).read_to_end(&mut buf)?;
        if buf.len() != len {
            return Err(Error::Load(format!("truncated while reading {what}")));
        }
        String::from_utf8(buf).map_err(|_| Error::Load(format!("{what} is not valid UTF-8")))
    }

    fn vec<T>(&mut self, n: usize, mut read: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(n.min(PREALLOC_LIMIT));
        for _ in 0..n {
            out.push(read(self)?);
        }
        Ok(out)
    }

    fn csr(&mut self, name: &str, rows: usize, cols: usize) -> Result<Csr> {
        let nrows = self.u32(name)? as usize;
        let ncols = self.u32(name)? as usize;
        if (nrows, ncols) != (rows, cols) {
            return Err(Error::Load(format!(
                "{name} is {nrows}x{ncols}, expected {rows}x{cols}"
            )));
        }
        let nnz = self.u64(name)? as usize;
        let indptr = self.vec(nrows + 1, |r| r.u64(name))?;
        let indices = self.vec(nnz, |r| r.u32(name))?;
        let values = self.vec(nnz, |r| r.f64(name))?;
        Csr::from_raw(nrows, ncols, indptr, indices, values)
            .map_err(|e| Error::Load(format!("{name}: {e}")))
    }
}

pub fn load_index<R: Read>(source: R) -> Result<ApmiIndex> {
    let mut r = Reader {
        inner: io::BufReader::new(source),
    };
    if &r.bytes::<4>("magic")? != MAGIC {
        return Err(Error::Load("bad magic, not an index file".into()));
    }
    let version = r.u32("format version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Load(format!(
            "format version {version}, this build reads version {FORMAT_VERSION}"
        )));
    }
    let k = r.f64("config")?;
    let estimator = match r.u8("config")? {
        0 => Estimator::Joint,
        1 => Estimator::Conditional,
        t => return Err(Error::Load(format!("unknown estimator tag {t}"))),
    };
    let log_base = match r.u8("config")? {
        0 => LogBase::Natural,
        1 => LogBase::Base2,
        2 => LogBase::Base10,
        t => return Err(Error::Load(format!("unknown log base tag {t}"))),
    };
    let config = ApmiConfig {
        k,
        estimator,
        log_base,
    };

    let n_words = r.u32("vocabulary")? as usize;
    let terms = r.vec(n_words, |r| r.string("vocabulary term"))?;
    let vocab = Vocabulary::from_terms(&terms);
    if vocab.len() != n_words || vocab.terms() != terms.as_slice() {
        return Err(Error::Load(
            "vocabulary terms are not unique and normalized".into(),
        ));
    }

    let n_ctx = r.u32("context table")? as usize;
    let mut contexts = ContextTable::new();
    for _ in 0..n_ctx {
        let key = ContextKey::from_canonical(&r.string("context key")?)
            .map_err(|e| Error::Load(e.to_string()))?;
        contexts.intern(key);
    }
    if contexts.len() != n_ctx {
        return Err(Error::Load("duplicate context keys".into()));
    }

    let m_vc = r.csr("M_vc", n_ctx, n_words)?;
    let m_cv = r.csr("M_cv", n_words, n_ctx)?;
    let mut rest = [0u8; 1];
    if r.inner.read(&mut rest)? != 0 {
        return Err(Error::Load("trailing bytes after index".into()));
    }
    ApmiIndex::new(vocab, contexts, m_vc, m_cv, config).map_err(|e| Error::Load(e.to_string()))
}
