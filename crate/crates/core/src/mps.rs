//! Periodic (trace-closed) matrix product states over real numbers.
//!
//! Site `j` holds one `χ_j × χ_{j+1}` matrix per physical index and the value
//! at a digit string is the trace of the matrix product around the ring.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SiteTensor = Vec<DMatrix<f64>>;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicMps {
    sites: Vec<Arc<SiteTensor>>,
}

impl PeriodicMps {
    pub fn new(sites: Vec<SiteTensor>) -> Result<Self> {
        Self::from_shared(sites.into_iter().map(Arc::new).collect())
    }

    /// `n` copies of the same site tensor, sharing storage.
    pub fn uniform(site: SiteTensor, n: usize) -> Result<Self> {
        let site = Arc::new(site);
        Self::from_shared(vec![site; n])
    }

    fn from_shared(sites: Vec<Arc<SiteTensor>>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Shape("MPS needs at least one site".into()));
        }
        for (j, site) in sites.iter().enumerate() {
            let Some(first) = site.first() else {
                return Err(Error::Shape(format!("site {j} has no physical index")));
            };
            if site.iter().any(|m| m.shape() != first.shape()) {
                return Err(Error::Shape(format!("site {j} has matrices of different shapes")));
            }
            let next = &sites[(j + 1) % sites.len()][0];
            if first.ncols() != next.nrows() {
                return Err(Error::Shape(format!(
                    "bond between site {j} and {} mismatched: {} vs {}",
                    (j + 1) % sites.len(),
                    first.ncols(),
                    next.nrows()
                )));
            }
        }
        Ok(Self { sites })
    }

    /// Bond-1 MPS with value `∏_j vectors[j][x_j]`.
    pub fn product(vectors: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            vectors.iter().map(|v| v.iter().map(|&x| DMatrix::from_element(1, 1, x)).collect()).collect(),
        )
    }

    pub fn constant(n: usize, phys: usize, value: f64) -> Self {
        let mut vectors = vec![vec![1.0; phys]; n];
        vectors[0] = vec![value; phys];
        Self::product(&vectors).expect("valid shapes")
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.len()).collect()
    }

    /// Left bond dimension of every site.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s[0].nrows()).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn site(&self, j: usize) -> &SiteTensor {
        &self.sites[j]
    }

    pub fn site_mut(&mut self, j: usize) -> &mut SiteTensor {
        Arc::make_mut(&mut self.sites[j])
    }

    /// Replace a site; the caller keeps bond shapes consistent.
    pub fn set_site(&mut self, j: usize, site: SiteTensor) -> Result<()> {
        let old = &self.sites[j][0];
        if site.len() != self.sites[j].len() || site.iter().any(|m| m.shape() != old.shape()) {
            return Err(Error::Shape(format!("replacement for site {j} has the wrong shape")));
        }
        self.sites[j] = Arc::new(site);
        Ok(())
    }

    pub fn scale(&mut self, c: f64) {
        for m in self.site_mut(0) {
            *m *= c;
        }
    }

    pub fn evaluate(&self, idx: &[usize]) -> Result<f64> {
        if idx.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: idx.len() });
        }
        let mut acc: Option<DMatrix<f64>> = None;
        for (j, (&v, site)) in idx.iter().zip(&self.sites).enumerate() {
            let m = site.get(v).ok_or_else(|| Error::Shape(format!("digit {v} out of range at site {j}")))?;
            acc = Some(match acc {
                None => m.clone(),
                Some(a) => a * m,
            });
        }
        Ok(acc.expect("at least one site").trace())
    }

    fn ring_trace(transfers: impl Iterator<Item = DMatrix<f64>>) -> f64 {
        let mut acc: Option<DMatrix<f64>> = None;
        for t in transfers {
            acc = Some(match acc {
                None => t,
                Some(a) => a * t,
            });
        }
        acc.expect("at least one site").trace()
    }

    /// Sum of the values over all digit strings.
    pub fn sum_all(&self) -> f64 {
        Self::ring_trace(self.sites.iter().map(|s| s.iter().sum()))
    }

    /// `Σ_x a(x) b(x)` by one ring contraction of `Σ_v A_v ⊗ B_v`.
    pub fn inner(a: &Self, b: &Self) -> Result<f64> {
        check_compatible(a, b)?;
        Ok(Self::ring_trace(a.sites.iter().zip(&b.sites).map(|(sa, sb)| {
            let mut t = DMatrix::zeros(sa[0].nrows() * sb[0].nrows(), sa[0].ncols() * sb[0].ncols());
            for (ma, mb) in sa.iter().zip(sb.iter()) {
                t += ma.kronecker(mb);
            }
            t
        })))
    }

    /// `Σ_x m(x)²`.
    pub fn frobenius_sq(&self) -> f64 {
        Self::inner(self, self).expect("compatible with itself")
    }

    /// Pointwise product; bond dimensions multiply.
    pub fn hadamard(a: &Self, b: &Self) -> Result<Self> {
        check_compatible(a, b)?;
        let sites =
            a.sites.iter().zip(&b.sites).map(|(sa, sb)| sa.iter().zip(sb.iter()).map(|(x, y)| x.kronecker(y)).collect());
        Self::new(sites.collect())
    }

    /// Dense vector of all values, site 0 as the least significant digit.
    pub fn to_dense(&self) -> Vec<f64> {
        let dims = self.phys_dims();
        let total: usize = dims.iter().product();
        let mut idx = vec![0usize; self.len()];
        let mut out = Vec::with_capacity(total);
        for _ in 0..total {
            out.push(self.evaluate(&idx).expect("valid digits"));
            for (d, &p) in idx.iter_mut().zip(&dims) {
                *d += 1;
                if *d < p {
                    break;
                }
                *d = 0;
            }
        }
        out
    }

    pub fn to_file(&self) -> MpsFile {
        MpsFile {
            n_sites: self.len(),
            phys_dims: self.phys_dims(),
            bond_dims: self.bond_dims(),
            data: self
                .sites
                .iter()
                .map(|s| s.iter().flat_map(|m| m.transpose().iter().copied().collect::<Vec<_>>()).collect())
                .collect(),
        }
    }

    pub fn from_file(f: &MpsFile) -> Result<Self> {
        if f.phys_dims.len() != f.n_sites || f.bond_dims.len() != f.n_sites || f.data.len() != f.n_sites {
            return Err(Error::Shape("inconsistent MPS file header".into()));
        }
        let mut sites = Vec::with_capacity(f.n_sites);
        for j in 0..f.n_sites {
            let (p, l, r) = (f.phys_dims[j], f.bond_dims[j], f.bond_dims[(j + 1) % f.n_sites]);
            if f.data[j].len() != p * l * r {
                return Err(Error::Shape(format!("site {j} has {} entries, expected {}", f.data[j].len(), p * l * r)));
            }
            sites.push(f.data[j].chunks(l * r).map(|c| DMatrix::from_row_slice(l, r, c)).collect());
        }
        Self::new(sites)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(&self.to_file())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f: MpsFile = serde_json::from_slice(&std::fs::read(path)?)?;
        Self::from_file(&f)
    }
}

fn check_compatible(a: &PeriodicMps, b: &PeriodicMps) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("{} sites vs {}", a.len(), b.len())));
    }
    if a.phys_dims() != b.phys_dims() {
        return Err(Error::Shape("physical dimensions differ".into()));
    }
    Ok(())
}

/// Serialized form: row-major `[phys][left][right]` data per site.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MpsFile {
    pub n_sites: usize,
    pub phys_dims: Vec<usize>,
    pub bond_dims: Vec<usize>,
    pub data: Vec<Vec<f64>>,
}

impl Serialize for PeriodicMps {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicMps {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = MpsFile::deserialize(d)?;
        Self::from_file(&f).map_err(serde::de::Error::custom)
    }
}
