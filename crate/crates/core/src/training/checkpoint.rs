//! Binary checkpoint: magic `BIOIE`, a `u32` format version and the SHA-256
//! digest of the JSON-serialized model config, followed by the config
//! itself, label names, vocabulary, static word vectors, named parameter
//! blocks, optimizer moments and the rng state. Integers and floats are
//! little-endian; strings are `u32` length-prefixed UTF-8.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::autodiff::{AdamConfig, AdamState, Moments, Tensor};
use crate::corpus::{EmbeddingTable, Vocabulary};
use crate::error::{io_err, Error, Result};
use crate::layers::{ModelConfig, ParamStore};
use crate::pipeline::ModelState;

pub const MAGIC: &[u8; 5] = b"BIOIE";
pub const FORMAT_VERSION: u32 = 1;

/// Position in the training stream: dropout and shuffling are derived from
/// the seed and the number of completed epochs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RngState {
    pub seed: u64,
    pub epoch: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: ModelState,
    /// Output label names in column order.
    pub labels: Vec<String>,
    pub optimizer: Option<AdamState>,
    pub rng: RngState,
}

pub fn config_digest(config: &ModelConfig) -> [u8; 32] {
    Sha256::digest(config_json(config)).into()
}

pub fn digest_hex(digest: &[u8; 32]) -> String {
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn config_json(config: &ModelConfig) -> Vec<u8> {
    serde_json::to_vec(config).expect("config serializes")
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&u32::try_from(v).expect("fits in u32").to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn floats(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        v.iter().for_each(|x| self.f64(*x));
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len());
        self.0.extend_from_slice(b);
    }
    fn str(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }
    fn tensor(&mut self, t: &Tensor) {
        self.u32(t.shape().len());
        t.shape().iter().for_each(|&d| self.u64(d as u64));
        self.floats(t.values());
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(Error::Truncated);
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn len(&mut self, width: usize) -> Result<usize> {
        let n = self.u64()? as usize;
        if n.checked_mul(width).is_none_or(|b| b > self.0.len()) {
            return Err(Error::Truncated);
        }
        Ok(n)
    }
    fn floats(&mut self) -> Result<Vec<f64>> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()?;
        self.take(n)
    }
    fn string(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| Error::invalid("checkpoint string is not UTF-8"))
    }
    fn tensor(&mut self) -> Result<Tensor> {
        let ndim = self.u32()?;
        let shape = (0..ndim).map(|_| self.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        Tensor::new(shape, self.floats()?)
    }
}

pub fn encode_checkpoint(ckpt: &Checkpoint) -> Vec<u8> {
    let m = &ckpt.model;
    let json = config_json(&m.config);
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    w.0.extend_from_slice(&config_digest(&m.config));
    w.bytes(&json);
    w.u64(m.seed);
    w.u32(ckpt.labels.len());
    ckpt.labels.iter().for_each(|l| w.str(l));
    w.u32(m.vocab.len());
    for (id, tok) in m.vocab.tokens().iter().enumerate() {
        w.str(tok);
        w.u64(m.vocab.count(id) as u64);
    }
    match &m.words {
        Some(table) => {
            w.u8(1);
            w.tensor(&table.table);
            w.u64(table.found as u64);
            w.f64(table.coverage);
        }
        None => w.u8(0),
    }
    w.u32(m.params.len());
    for (name, t) in m.params.iter() {
        w.str(name);
        w.tensor(t);
    }
    match &ckpt.optimizer {
        Some(opt) => {
            w.u8(1);
            let AdamConfig { lr, beta1, beta2, epsilon } = opt.config;
            [lr, beta1, beta2, epsilon].iter().for_each(|v| w.f64(*v));
            w.u64(opt.t);
            w.u32(opt.moments.len());
            for (name, mo) in &opt.moments {
                w.str(name);
                w.floats(&mo.m);
                w.floats(&mo.v);
            }
        }
        None => w.u8(0),
    }
    w.u64(ckpt.rng.seed);
    w.u64(ckpt.rng.epoch);
    w.0
}

/// Parses a checkpoint. With `expected`, the stored config digest must
/// match it; nothing is returned on any failure.
pub fn decode_checkpoint(bytes: &[u8], expected: Option<&ModelConfig>) -> Result<Checkpoint> {
    let mut r = Reader(bytes);
    if r.take(MAGIC.len()).map_err(|_| Error::BadMagic)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
    let json = r.bytes()?;
    if <[u8; 32]>::from(Sha256::digest(json)) != digest {
        return Err(Error::DigestMismatch);
    }
    if expected.is_some_and(|c| config_digest(c) != digest) {
        return Err(Error::DigestMismatch);
    }
    let config: ModelConfig =
        serde_json::from_slice(json).map_err(|e| Error::invalid(format!("checkpoint config: {e}")))?;
    let seed = r.u64()?;
    let labels = (0..r.u32()?).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
    let n_vocab = r.u32()?;
    let mut tokens = Vec::with_capacity(n_vocab);
    let mut counts = Vec::with_capacity(n_vocab);
    for _ in 0..n_vocab {
        tokens.push(r.string()?);
        counts.push(r.u64()? as usize);
    }
    let vocab = Vocabulary::from_parts(tokens, counts)?;
    let words = match r.u8()? {
        0 => None,
        _ => {
            let table = r.tensor()?;
            let found = r.u64()? as usize;
            let coverage = r.f64()?;
            Some(Arc::new(EmbeddingTable { table, found, coverage }))
        }
    };
    let mut params = ParamStore::new();
    for _ in 0..r.u32()? {
        let name = r.string()?;
        params.insert(name, r.tensor()?)?;
    }
    let optimizer = match r.u8()? {
        0 => None,
        _ => {
            let config = AdamConfig {
                lr: r.f64()?,
                beta1: r.f64()?,
                beta2: r.f64()?,
                epsilon: r.f64()?,
            };
            let t = r.u64()?;
            let mut moments = BTreeMap::new();
            for _ in 0..r.u32()? {
                let name = r.string()?;
                let m = r.floats()?;
                let v = r.floats()?;
                moments.insert(name, Moments { m, v });
            }
            Some(AdamState { config, t, moments })
        }
    };
    let rng = RngState {
        seed: r.u64()?,
        epoch: r.u64()?,
    };
    if !r.0.is_empty() {
        return Err(Error::invalid(format!("{} trailing bytes after checkpoint", r.0.len())));
    }
    Ok(Checkpoint {
        model: ModelState {
            config,
            params,
            vocab: Arc::new(vocab),
            words,
            seed,
        },
        labels,
        optimizer,
        rng,
    })
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    std::fs::write(path, encode_checkpoint(ckpt)).map_err(io_err(path))
}

pub fn load_checkpoint(path: &Path, expected: Option<&ModelConfig>) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode_checkpoint(&bytes, expected)
}
