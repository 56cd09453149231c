//! The genome: a bank of `n_g` positions, each holding `n_v` learnable
//! variants of length `d_g`. A latent code is built by picking one variant per
//! position and concatenating them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::tensor::{dot, norm};
use crate::numerics::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenomeDims {
    pub n_g: usize,
    pub n_v: usize,
    pub d_g: usize,
}

impl GenomeDims {
    pub fn new(n_g: usize, n_v: usize, d_g: usize) -> Result<Self> {
        let dims = Self { n_g, n_v, d_g };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_g == 0 || self.n_v == 0 || self.d_g == 0 {
            return Err(Error::InvalidDims(format!(
                "n_g={}, n_v={}, d_g={} (all must be positive)",
                self.n_g, self.n_v, self.d_g
            )));
        }
        Ok(())
    }

    /// Total latent length `n_g * d_g`.
    pub fn latent_dim(&self) -> usize {
        self.n_g * self.d_g
    }

    pub fn embedding_len(&self) -> usize {
        self.n_g * self.n_v * self.d_g
    }

    /// Offset of variant `j` at position `i` in the flat embedding array.
    #[inline]
    pub fn offset(&self, position: usize, variant: usize) -> usize {
        (position * self.n_v + variant) * self.d_g
    }

    fn check_sequence(&self, seq: &GeneSequence) -> Result<()> {
        if seq.0.len() != self.n_g {
            return Err(Error::ShapeMismatch {
                expected: self.n_g,
                actual: seq.0.len(),
            });
        }
        if let Some((i, &j)) = seq.0.iter().enumerate().find(|(_, &j)| j >= self.n_v) {
            return Err(Error::IndexOutOfRange(format!(
                "variant {j} at position {i} (n_v = {})",
                self.n_v
            )));
        }
        Ok(())
    }
}

/// Chosen variant index per position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneSequence(pub Vec<usize>);

impl GeneSequence {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for GeneSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for GeneSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split('-')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Header(format!("bad gene sequence `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(GeneSequence)
    }
}

/// A concatenated latent vector of length `n_g * d_g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCode(pub Vec<f64>);

impl LatentCode {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    dims: GenomeDims,
    seed: u64,
    embeddings: Vec<f64>,
}

impl Genome {
    /// Fills every entry with a standard normal draw from `RandomStream::new(seed)`,
    /// in `[position][variant][dim]` order.
    pub fn init(dims: GenomeDims, seed: u64) -> Result<Self> {
        dims.validate()?;
        let mut rng = RandomStream::new(seed);
        Ok(Self {
            dims,
            seed,
            embeddings: rng.gaussian_vec(dims.embedding_len()),
        })
    }

    pub fn from_parts(dims: GenomeDims, seed: u64, embeddings: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if embeddings.len() != dims.embedding_len() {
            return Err(Error::ShapeMismatch {
                expected: dims.embedding_len(),
                actual: embeddings.len(),
            });
        }
        if embeddings.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("genome contains non-finite entries".into()));
        }
        Ok(Self {
            dims,
            seed,
            embeddings,
        })
    }

    pub fn dims(&self) -> GenomeDims {
        self.dims
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn embeddings(&self) -> &[f64] {
        &self.embeddings
    }

    pub fn embeddings_mut(&mut self) -> &mut [f64] {
        &mut self.embeddings
    }

    pub fn variant(&self, position: usize, variant: usize) -> &[f64] {
        let off = self.dims.offset(position, variant);
        &self.embeddings[off..off + self.dims.d_g]
    }

    /// Concatenates the selected variants.
    pub fn assemble(&self, seq: &GeneSequence) -> Result<LatentCode> {
        self.dims.check_sequence(seq)?;
        let mut values = Vec::with_capacity(self.dims.latent_dim());
        for (i, &j) in seq.0.iter().enumerate() {
            values.extend_from_slice(self.variant(i, j));
        }
        Ok(LatentCode(values))
    }

    /// `(1 - t) * assemble(a) + t * assemble(b)`, elementwise.
    pub fn interpolate(&self, a: &GeneSequence, b: &GeneSequence, t: f64) -> Result<LatentCode> {
        if !t.is_finite() {
            return Err(Error::InvalidConfig(format!("interpolation weight {t}")));
        }
        let va = self.assemble(a)?;
        let vb = self.assemble(b)?;
        Ok(LatentCode(
            va.0.iter()
                .zip(&vb.0)
                .map(|(x, y)| (1.0 - t) * x + t * y)
                .collect(),
        ))
    }

    /// Nearest variant per position. Ties go to the lowest index.
    pub fn snap_nearest(&self, code: &LatentCode, metric: Metric) -> Result<(GeneSequence, Vec<f64>)> {
        let d = self.dims.latent_dim();
        if code.0.len() != d {
            return Err(Error::ShapeMismatch {
                expected: d,
                actual: code.0.len(),
            });
        }
        let dg = self.dims.d_g;
        let mut indices = Vec::with_capacity(self.dims.n_g);
        let mut distances = Vec::with_capacity(self.dims.n_g);
        for i in 0..self.dims.n_g {
            let sub = &code.0[i * dg..(i + 1) * dg];
            let mut best = (0, f64::INFINITY);
            for j in 0..self.dims.n_v {
                let dist = metric.distance(sub, self.variant(i, j), i)?;
                if dist < best.1 {
                    best = (j, dist);
                }
            }
            indices.push(best.0);
            distances.push(best.1);
        }
        Ok((GeneSequence(indices), distances))
    }

    /// Returns a copy in which each victim's embedding is overwritten with
    /// its donor's (read from the original genome).
    pub fn apply_variant_replacement(&self, plan: &[Replacement]) -> Result<Genome> {
        let mut seen = std::collections::HashSet::new();
        for r in plan {
            if r.position >= self.dims.n_g || r.victim >= self.dims.n_v || r.donor >= self.dims.n_v {
                return Err(Error::IndexOutOfRange(format!(
                    "replacement {r:?} on dims {:?}",
                    self.dims
                )));
            }
            if !seen.insert((r.position, r.victim)) {
                return Err(Error::DuplicateVictim {
                    position: r.position,
                    victim: r.victim,
                });
            }
        }
        let mut out = self.clone();
        let dg = self.dims.d_g;
        for r in plan {
            let src = self.dims.offset(r.position, r.donor);
            let dst = self.dims.offset(r.position, r.victim);
            out.embeddings[dst..dst + dg].copy_from_slice(&self.embeddings[src..src + dg]);
        }
        Ok(out)
    }

    /// Number of distinct codes reachable: the product over positions of the
    /// number of bitwise-distinct variant vectors.
    pub fn distinct_capacity(&self) -> BigUint {
        let mut total = BigUint::from(1u32);
        for i in 0..self.dims.n_g {
            let mut uniq: Vec<Vec<u64>> = (0..self.dims.n_v)
                .map(|j| self.variant(i, j).iter().map(|v| v.to_bits()).collect())
                .collect();
            uniq.sort();
            uniq.dedup();
            total *= BigUint::from(uniq.len());
        }
        total
    }
}

/// Adds the gradient of a latent code into the blocks of the variants that
/// `seq` selected. Other blocks are left untouched.
pub fn route_gradient(dims: &GenomeDims, seq: &GeneSequence, code_grad: &[f64], genome_grad: &mut [f64]) {
    let dg = dims.d_g;
    for (i, &j) in seq.0.iter().enumerate() {
        let off = dims.offset(i, j);
        for (g, c) in genome_grad[off..off + dg].iter_mut().zip(&code_grad[i * dg..(i + 1) * dg]) {
            *g += c;
        }
    }
}

/// One uniform draw per position.
pub fn sample_sequence(dims: &GenomeDims, rng: &mut RandomStream) -> GeneSequence {
    GeneSequence((0..dims.n_g).map(|_| rng.index(dims.n_v)).collect())
}

/// `n_v ^ n_g`, exactly.
pub fn capacity(dims: &GenomeDims) -> BigUint {
    BigUint::from(dims.n_v).pow(dims.n_g as u32)
}

/// Parameters stored in the genome: `n_g * n_v * d_g`.
pub fn trainable_param_count(dims: &GenomeDims) -> u64 {
    (dims.n_g as u64) * (dims.n_v as u64) * (dims.d_g as u64)
}

/// Renders a positive integer as `m.mmme<exp>` with `sig` significant digits,
/// rounding half up on the decimal string.
pub fn scientific(value: &BigUint, sig: usize) -> String {
    let digits = value.to_str_radix(10);
    let sig = sig.max(1);
    let exp = digits.len() - 1;
    if digits.len() <= sig {
        let mantissa = format!("{}.{}", &digits[..1], &digits[1..]);
        return format!("{}e{exp}", mantissa.trim_end_matches('.'));
    }
    let mut head: Vec<u8> = digits.as_bytes()[..sig].iter().map(|b| b - b'0').collect();
    let mut exp = exp;
    if digits.as_bytes()[sig] >= b'5' {
        let mut k = sig;
        loop {
            if k == 0 {
                head.insert(0, 1);
                head.pop();
                exp += 1;
                break;
            }
            k -= 1;
            if head[k] == 9 {
                head[k] = 0;
            } else {
                head[k] += 1;
                break;
            }
        }
    }
    let s: String = head.iter().map(|d| char::from(b'0' + d)).collect();
    if sig == 1 {
        format!("{s}e{exp}")
    } else {
        format!("{}.{}e{exp}", &s[..1], &s[1..])
    }
}

/// Iterates over every sequence in lexicographic order (position 0 most significant).
pub fn enumerate_sequences(dims: GenomeDims) -> impl Iterator<Item = GeneSequence> {
    let mut next = Some(vec![0usize; dims.n_g]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        let mut i = dims.n_g;
        while i > 0 {
            i -= 1;
            succ[i] += 1;
            if succ[i] < dims.n_v {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(GeneSequence(current))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Replacement {
    pub position: usize,
    pub victim: usize,
    pub donor: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Manhattan,
    Euclidean,
    Cosine,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Manhattan, Metric::Euclidean, Metric::Cosine];

    /// Distance between a code sub-vector and a variant; cosine distance is
    /// `1 - cos`. `position` is only used for error reporting.
    pub fn distance(self, a: &[f64], b: &[f64], position: usize) -> Result<f64> {
        Ok(match self {
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Cosine => {
                let (na, nb) = (norm(a), norm(b));
                if na == 0.0 || nb == 0.0 {
                    return Err(Error::ZeroNorm { position });
                }
                // identical vectors must give exactly zero
                if a == b {
                    0.0
                } else {
                    1.0 - dot(a, b) / (na * nb)
                }
            }
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "manhattan" => Ok(Metric::Manhattan),
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Manhattan => "manhattan",
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        })
    }
}

#[cfg(test)]
mod tests;
