//! Text embedding providers, linear dimensionality reduction, and vector
//! arithmetic used by the infection and mutation models.
//!
//! Embeddings come from one of three providers: a deterministic hash-based
//! test embedder (no external services), a binary file store keyed by post
//! id, or an HTTP endpoint. Reduction is PCA fitted on a sample corpus; the
//! projection columns are orthonormal principal components.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::draws::mix64;
use crate::error::{CascadeError, Result};

/// Default raw embedding dimension.
pub const RAW_DIM: usize = 384;
/// Default user-history reduced dimension.
pub const USER_DIM: usize = 24;
/// Default tweet reduced dimension.
pub const TWEET_DIM: usize = 96;

/// Source of embedding vectors. `key` is an opaque lookup handle (usually a
/// post id); providers that compute from text ignore it.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, key: &str, text: &str) -> Result<Vec<f32>>;
}

// ---------------------------------------------------------------------------
// Deterministic test embedder
// ---------------------------------------------------------------------------

/// Deterministic embedder: each token hashes to a fixed pseudo-random unit
/// direction; a text maps to the normalized sum over its token multiset.
/// Identical texts embed identically, token overlap raises cosine similarity.
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        HashEmbedder { dim, seed }
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(RAW_DIM, 0)
    }
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ mix64(seed);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub(crate) fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

impl EmbeddingProvider for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, _key: &str, text: &str) -> Result<Vec<f32>> {
        let mut acc = vec![0.0f64; self.dim];
        for token in tokenize(text) {
            let mut state = fnv1a(self.seed, token.as_bytes());
            for slot in acc.iter_mut() {
                state = mix64(state);
                // token direction component in [-1, 1)
                *slot += (state >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0;
            }
        }
        let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for slot in acc.iter_mut() {
                *slot /= norm;
            }
        }
        Ok(acc.into_iter().map(|x| x as f32).collect())
    }
}

// ---------------------------------------------------------------------------
// Binary file store
// ---------------------------------------------------------------------------

/// In-memory store of precomputed embeddings, keyed by an opaque string
/// (post id). Backed by the `embeddings.bin` format.
pub struct EmbeddingStore {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

const STORE_MAGIC: &[u8; 4] = b"EMB1";

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, key: impl Into<String>, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(CascadeError::DimMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        self.vectors.insert(key.into(), vector);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f32]> {
        self.vectors.get(key).map(|v| v.as_slice())
    }

    /// Write the store: magic "EMB1", u32 count, u32 dim, then per record a
    /// u16 key length, key bytes, and dim little-endian f32 values.
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        w.write_all(STORE_MAGIC)?;
        w.write_all(&(self.vectors.len() as u32).to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        let mut keys: Vec<&String> = self.vectors.keys().collect();
        keys.sort(); // deterministic file bytes
        for key in keys {
            let bytes = key.as_bytes();
            if bytes.len() > u16::MAX as usize {
                return Err(CascadeError::Format(format!("key too long: {key}")));
            }
            w.write_all(&(bytes.len() as u16).to_le_bytes())?;
            w.write_all(bytes)?;
            for &x in &self.vectors[key] {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != STORE_MAGIC {
            return Err(CascadeError::Format("bad embeddings.bin magic".into()));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)?;
        let count = u32::from_le_bytes(buf4) as usize;
        r.read_exact(&mut buf4)?;
        let dim = u32::from_le_bytes(buf4) as usize;
        let mut vectors = HashMap::with_capacity(count);
        let mut buf2 = [0u8; 2];
        for _ in 0..count {
            r.read_exact(&mut buf2)?;
            let klen = u16::from_le_bytes(buf2) as usize;
            let mut key = vec![0u8; klen];
            r.read_exact(&mut key)?;
            let key = String::from_utf8(key)
                .map_err(|_| CascadeError::Format("non-utf8 key in embeddings.bin".into()))?;
            let mut vec = Vec::with_capacity(dim);
            for _ in 0..dim {
                r.read_exact(&mut buf4)?;
                vec.push(f32::from_le_bytes(buf4));
            }
            vectors.insert(key, vec);
        }
        Ok(EmbeddingStore { dim, vectors })
    }
}

impl EmbeddingProvider for EmbeddingStore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, key: &str, _text: &str) -> Result<Vec<f32>> {
        self.vectors
            .get(key)
            .cloned()
            .ok_or_else(|| CascadeError::Embedding(format!("key `{key}` not in store")))
    }
}

// ---------------------------------------------------------------------------
// HTTP provider
// ---------------------------------------------------------------------------

/// Remote embedding endpoint: POST {"texts":[...]} -> {"vectors":[[...]]}.
pub struct HttpEmbedder {
    endpoint: String,
    auth_token: Option<String>,
    dim: usize,
    retries: u32,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: [&'a str; 1],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f32>>,
}

impl HttpEmbedder {
    pub fn new(
        endpoint: impl Into<String>,
        auth_token: Option<String>,
        dim: usize,
        retries: u32,
        timeout: Duration,
    ) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| CascadeError::Embedding(e.to_string()))?;
        Ok(HttpEmbedder {
            endpoint: endpoint.into(),
            auth_token,
            dim,
            retries,
            client,
        })
    }

    fn call(&self, text: &str) -> Result<Vec<f32>> {
        let mut req = self
            .client
            .post(&self.endpoint)
            .json(&EmbedRequest { texts: [text] });
        if let Some(token) = &self.auth_token {
            req = req.bearer_auth(token);
        }
        let resp = req
            .send()
            .map_err(|e| CascadeError::Embedding(e.to_string()))?
            .error_for_status()
            .map_err(|e| CascadeError::Embedding(e.to_string()))?;
        let body: EmbedResponse = resp
            .json()
            .map_err(|e| CascadeError::Embedding(e.to_string()))?;
        let vec = body
            .vectors
            .into_iter()
            .next()
            .ok_or_else(|| CascadeError::Embedding("empty vectors array".into()))?;
        if vec.len() != self.dim {
            return Err(CascadeError::DimMismatch {
                expected: self.dim,
                got: vec.len(),
            });
        }
        Ok(vec)
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, _key: &str, text: &str) -> Result<Vec<f32>> {
        let mut last = None;
        for _ in 0..=self.retries {
            match self.call(text) {
                Ok(v) => return Ok(v),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| CascadeError::Embedding("no attempts made".into())))
    }
}

// ---------------------------------------------------------------------------
// Linear reduction
// ---------------------------------------------------------------------------

/// Linear dimensionality reducer: mean-center then project onto orthonormal
/// principal components.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reducer {
    /// Column-major projection: `dim_out` columns of length `dim_in`.
    pub projection: Vec<f32>,
    pub mean: Vec<f32>,
    pub dim_in: usize,
    pub dim_out: usize,
}

impl Reducer {
    /// Identity reducer (zero mean, first `dim_out` coordinates); mostly for
    /// tests and degenerate configurations.
    pub fn identity(dim_in: usize, dim_out: usize) -> Self {
        let mut projection = vec![0.0f32; dim_in * dim_out];
        for k in 0..dim_out.min(dim_in) {
            projection[k * dim_in + k] = 1.0;
        }
        Reducer {
            projection,
            mean: vec![0.0; dim_in],
            dim_in,
            dim_out,
        }
    }

    pub fn reduce(&self, v: &[f32]) -> Result<Vec<f32>> {
        if v.len() != self.dim_in {
            return Err(CascadeError::DimMismatch {
                expected: self.dim_in,
                got: v.len(),
            });
        }
        let mut out = vec![0.0f32; self.dim_out];
        for (k, slot) in out.iter_mut().enumerate() {
            let col = &self.projection[k * self.dim_in..(k + 1) * self.dim_in];
            let mut acc = 0.0f64;
            for i in 0..self.dim_in {
                acc += col[i] as f64 * (v[i] - self.mean[i]) as f64;
            }
            *slot = acc as f32;
        }
        Ok(out)
    }

    /// Map a reduced vector back to the input space (plus mean). Used to
    /// measure reconstruction error.
    pub fn reconstruct(&self, reduced: &[f32]) -> Result<Vec<f32>> {
        if reduced.len() != self.dim_out {
            return Err(CascadeError::DimMismatch {
                expected: self.dim_out,
                got: reduced.len(),
            });
        }
        let mut out = self.mean.clone();
        for k in 0..self.dim_out {
            let col = &self.projection[k * self.dim_in..(k + 1) * self.dim_in];
            for i in 0..self.dim_in {
                out[i] += col[i] * reduced[k];
            }
        }
        Ok(out)
    }

    /// Max absolute deviation of `projection^T projection` from identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim_out {
            for b in a..self.dim_out {
                let ca = &self.projection[a * self.dim_in..(a + 1) * self.dim_in];
                let cb = &self.projection[b * self.dim_in..(b + 1) * self.dim_in];
                let dot: f64 = ca.iter().zip(cb).map(|(&x, &y)| x as f64 * y as f64).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Fit a PCA reducer: projection columns are the top `dim_out` principal
/// components of the centered samples. Rank-deficient inputs are padded with
/// an arbitrary orthonormal completion (with a warning).
pub fn fit_reducer(samples: &[Vec<f32>], dim_out: usize) -> Result<Reducer> {
    if samples.is_empty() {
        return Err(CascadeError::EmptyInput("fit_reducer samples"));
    }
    let dim_in = samples[0].len();
    if dim_out > dim_in {
        return Err(CascadeError::InvalidArgument(format!(
            "dim_out {dim_out} > dim_in {dim_in}"
        )));
    }
    if samples.len() < dim_out {
        return Err(CascadeError::InvalidArgument(format!(
            "need at least {dim_out} samples, got {}",
            samples.len()
        )));
    }
    for s in samples {
        if s.len() != dim_in {
            return Err(CascadeError::DimMismatch {
                expected: dim_in,
                got: s.len(),
            });
        }
    }
    let n = samples.len();
    let mut mean = vec![0.0f64; dim_in];
    for s in samples {
        for (m, &x) in mean.iter_mut().zip(s) {
            *m += x as f64;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    // covariance (upper triangle, symmetrized)
    let mut cov = DMatrix::<f64>::zeros(dim_in, dim_in);
    let mut centered = vec![0.0f64; dim_in];
    for s in samples {
        for i in 0..dim_in {
            centered[i] = s[i] as f64 - mean[i];
        }
        for i in 0..dim_in {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..dim_in {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for i in 0..dim_in {
        for j in i..dim_in {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim_in).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let total_var: f64 = eig.eigenvalues.iter().map(|&v| v.max(0.0)).sum();
    let kept_rank = order
        .iter()
        .take(dim_out)
        .filter(|&&i| eig.eigenvalues[i] > 1e-12 * total_var.max(1e-300))
        .count();
    if kept_rank < dim_out {
        log::warn!(
            "fit_reducer: sample covariance has rank ~{kept_rank} < dim_out {dim_out}; \
             padding with an orthonormal completion"
        );
    }

    let mut projection = vec![0.0f32; dim_in * dim_out];
    for (k, &ei) in order.iter().take(dim_out).enumerate() {
        let col: DVector<f64> = eig.eigenvectors.column(ei).into();
        // sign convention: largest-magnitude coordinate positive
        let lead = col
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for i in 0..dim_in {
            projection[k * dim_in + i] = (col[i] * sign) as f32;
        }
    }

    Ok(Reducer {
        projection,
        mean: mean.into_iter().map(|x| x as f32).collect(),
        dim_in,
        dim_out,
    })
}

// ---------------------------------------------------------------------------
// Vector arithmetic
// ---------------------------------------------------------------------------

/// Arithmetic mean of a non-empty set of equal-length vectors.
pub fn mean_embedding(vectors: &[Vec<f32>]) -> Result<Vec<f32>> {
    let first = vectors.first().ok_or(CascadeError::EmptyInput("mean_embedding"))?;
    let dim = first.len();
    let mut acc = vec![0.0f64; dim];
    for v in vectors {
        if v.len() != dim {
            return Err(CascadeError::DimMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        for (a, &x) in acc.iter_mut().zip(v) {
            *a += x as f64;
        }
    }
    Ok(acc
        .into_iter()
        .map(|x| (x / vectors.len() as f64) as f32)
        .collect())
}

/// Cosine similarity in [-1, 1]; zero vectors compare as 0 to avoid NaNs.
pub fn cosine_similarity(a: &[f32], b: &[f32]) -> f64 {
    if a.len() != b.len() {
        return 0.0;
    }
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        dot += x as f64 * y as f64;
        na += x as f64 * x as f64;
        nb += y as f64 * y as f64;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hash_embedder_is_deterministic_and_distinguishes_texts() {
        let e = HashEmbedder::new(RAW_DIM, 1);
        let a1 = e.embed("", "a").unwrap();
        let a2 = e.embed("", "a").unwrap();
        let b = e.embed("", "b").unwrap();
        assert_eq!(a1, a2);
        assert!(cosine_similarity(&a1, &b) < 1.0 - 1e-6);
        // unit norm
        let norm: f64 = a1.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-4);
        // token overlap beats disjoint vocabulary
        let ab = e.embed("", "alpha beta").unwrap();
        let ac = e.embed("", "alpha gamma").unwrap();
        let cd = e.embed("", "delta epsilon").unwrap();
        assert!(cosine_similarity(&ab, &ac) > cosine_similarity(&ab, &cd) + 0.2);
    }

    #[test]
    fn store_round_trip_is_bit_exact() {
        let mut store = EmbeddingStore::new(4);
        store.insert("p1", vec![1.0, -2.5, 3.25, 0.0]).unwrap();
        store.insert("p2", vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        let mut buf = Vec::new();
        store.write(&mut buf).unwrap();
        let back = EmbeddingStore::read(&buf[..]).unwrap();
        assert_eq!(back.dim(), 4);
        assert_eq!(back.embed("p1", "").unwrap(), vec![1.0, -2.5, 3.25, 0.0]);
        assert!(back.embed("missing", "").is_err());
    }

    #[test]
    fn store_rejects_wrong_dim() {
        let mut store = EmbeddingStore::new(3);
        assert!(store.insert("k", vec![1.0]).is_err());
    }

    fn planted_subspace(n: usize, dim: usize, seed: u64) -> (Vec<Vec<f32>>, Vec<(f64, f64)>) {
        // samples = c1 * e0 + c2 * e3 + fixed offset
        let mut out = Vec::with_capacity(n);
        let mut coeffs = Vec::with_capacity(n);
        let mut s = seed;
        for _ in 0..n {
            s = mix64(s);
            let c1 = (s % 1000) as f64 / 100.0 - 5.0;
            s = mix64(s);
            let c2 = (s % 1000) as f64 / 250.0 - 2.0;
            let mut v = vec![0.0f32; dim];
            v[0] = (c1 + 0.5) as f32;
            v[3] = (c2 - 1.5) as f32;
            out.push(v);
            coeffs.push((c1, c2));
        }
        (out, coeffs)
    }

    #[test]
    fn pca_recovers_planted_subspace() {
        let (samples, _) = planted_subspace(200, 8, 11);
        let r = fit_reducer(&samples, 2).unwrap();
        assert!(r.orthonormality_error() < 1e-6);
        for s in &samples {
            let rec = r.reconstruct(&r.reduce(s).unwrap()).unwrap();
            let err: f64 = rec
                .iter()
                .zip(s)
                .map(|(&a, &b)| ((a - b) as f64).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-5, "reconstruction error {err}");
        }
    }

    #[test]
    fn full_rank_reduction_preserves_norm() {
        let (samples, _) = planted_subspace(50, 4, 3);
        let r = fit_reducer(&samples, 4).unwrap();
        assert!(r.orthonormality_error() < 1e-6);
        let v = &samples[7];
        let reduced = r.reduce(v).unwrap();
        let centered_norm: f64 = v
            .iter()
            .zip(&r.mean)
            .map(|(&x, &m)| ((x - m) as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        let out_norm: f64 = reduced.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
        assert!((centered_norm - out_norm).abs() < 1e-5);
    }

    #[test]
    fn identical_samples_reduce_equal_and_mean_maps_to_zero() {
        let samples = vec![vec![1.0f32, 2.0, 3.0]; 10];
        let r = fit_reducer(&samples, 2).unwrap();
        let a = r.reduce(&samples[0]).unwrap();
        let b = r.reduce(&samples[5]).unwrap();
        assert_eq!(a, b);
        for &x in &a {
            assert!(x.abs() < 1e-6);
        }
        assert!(r.orthonormality_error() < 1e-6, "completion stays orthonormal");
    }

    #[test]
    fn variance_ordering_holds_on_training_samples() {
        let (samples, _) = planted_subspace(300, 8, 99);
        let r = fit_reducer(&samples, 3).unwrap();
        let reduced: Vec<Vec<f32>> = samples.iter().map(|s| r.reduce(s).unwrap()).collect();
        let n = reduced.len() as f64;
        let var = |k: usize| -> f64 {
            let m: f64 = reduced.iter().map(|v| v[k] as f64).sum::<f64>() / n;
            reduced.iter().map(|v| (v[k] as f64 - m).powi(2)).sum::<f64>() / n
        };
        assert!(var(0) + 1e-9 >= var(1));
        assert!(var(1) + 1e-9 >= var(2));
    }

    #[test]
    fn mean_and_cosine_basics() {
        assert!(mean_embedding(&[]).is_err());
        let m = mean_embedding(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(m, vec![0.0, 0.0]);
        let v = vec![0.3f32, -0.7, 0.2];
        assert!((cosine_similarity(&v, &v) - 1.0).abs() < 1e-9);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            a in proptest::collection::vec(-10.0f32..10.0, 6),
            b in proptest::collection::vec(-10.0f32..10.0, 6),
            lambda in 0.01f32..50.0,
        ) {
            let ab = cosine_similarity(&a, &b);
            let ba = cosine_similarity(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-9);
            let scaled: Vec<f32> = a.iter().map(|&x| x * lambda).collect();
            prop_assert!((cosine_similarity(&scaled, &b) - ab).abs() < 1e-6);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
