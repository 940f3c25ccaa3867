//! Sherrington–Kirkpatrick instances: a dense Gaussian coupling matrix with
//! entries of variance `1/n`, its symmetric part, and the energy `⟨σ, Aσ⟩`.

use crate::error::{check_len, Error, Result};
use crate::io;
use crate::rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

const MAGIC: &[u8; 4] = b"SKIF";
const HEADER_LEN: usize = 64;
const FORMAT_VERSION: u32 = 1;

/// How the diagonal of `A` is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Diagonal {
    /// Same variance `1/n` as the off-diagonal entries.
    #[default]
    Iid,
    /// Variance `2/n`, so that `A_sym` has a GOE-normalized diagonal.
    Goe,
}

impl std::fmt::Display for Diagonal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Diagonal::Iid => "iid",
            Diagonal::Goe => "goe",
        })
    }
}

impl std::str::FromStr for Diagonal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(Diagonal::Iid),
            "goe" => Ok(Diagonal::Goe),
            other => Err(Error::InvalidArgument(format!("unknown diagonal convention `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    v: u32,
    n: usize,
    seed: u64,
    d: String,
}

/// A coupling matrix together with the seed that produced it.
#[derive(Clone, Debug)]
pub struct SkInstance {
    n: usize,
    seed: u64,
    diagonal: Diagonal,
    a: Vec<f64>,
    a_sym: Vec<f64>,
}

impl SkInstance {
    /// Draws `A` with i.i.d. `N(0, 1/n)` entries. Row `i` comes from its own stream,
    /// so the matrix is independent of the thread count.
    pub fn sample(n: usize, seed: u64) -> Result<Self> {
        Self::sample_with(n, seed, Diagonal::Iid)
    }

    pub fn sample_with(n: usize, seed: u64, diagonal: Diagonal) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let scale = (1.0 / n as f64).sqrt();
        let mut a = vec![0.0; n * n];
        a.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let mut r = rng::stream(seed, rng::domain::INSTANCE_ROW + i as u64);
            for v in row.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut r);
                *v = z * scale;
            }
            if diagonal == Diagonal::Goe {
                row[i] *= std::f64::consts::SQRT_2;
            }
        });
        Ok(Self::assemble(n, seed, diagonal, a))
    }

    /// Wraps an explicit matrix (row-major). The seed is recorded as given.
    pub fn from_matrix(n: usize, a: Vec<f64>, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        check_len(n * n, a.len())?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self::assemble(n, seed, Diagonal::Iid, a))
    }

    fn assemble(n: usize, seed: u64, diagonal: Diagonal, a: Vec<f64>) -> Self {
        let mut a_sym = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a_sym[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
            }
        }
        Self { n, seed, diagonal, a, a_sym }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn diagonal(&self) -> Diagonal {
        self.diagonal
    }

    /// Row-major `A`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Row-major `(A + Aᵀ)/2`.
    pub fn a_sym(&self) -> &[f64] {
        &self.a_sym
    }

    /// `A_sym` as a dense faer matrix.
    pub fn a_sym_mat(&self) -> faer::Mat<f64> {
        let n = self.n;
        faer::Mat::from_fn(n, n, |i, j| self.a_sym[i * n + j])
    }

    /// `⟨σ, Aσ⟩`.
    pub fn hamiltonian(&self, sigma: &[f64]) -> Result<f64> {
        check_len(self.n, sigma.len())?;
        Ok(quad_form(&self.a, self.n, sigma))
    }

    /// `⟨σ, A_sym σ⟩`, equal to the Hamiltonian.
    pub fn hamiltonian_sym(&self, sigma: &[f64]) -> Result<f64> {
        check_len(self.n, sigma.len())?;
        Ok(quad_form(&self.a_sym, self.n, sigma))
    }

    /// `A_sym · v`.
    pub fn sym_matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.sym_matvec_into(v, &mut out);
        out
    }

    pub fn sym_matvec_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = dot(&self.a_sym[i * n..(i + 1) * n], v);
        });
    }

    /// Largest singular value of `A`, by power iteration on `AᵀA`.
    pub fn op_norm(&self) -> f64 {
        let n = self.n;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
        let mut est = 0.0;
        for _ in 0..500 {
            let nv = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= nv);
            let av: Vec<f64> = (0..n).map(|i| dot(&self.a[i * n..(i + 1) * n], &v)).collect();
            let mut atav = vec![0.0; n];
            for i in 0..n {
                let row = &self.a[i * n..(i + 1) * n];
                for j in 0..n {
                    atav[j] += row[j] * av[i];
                }
            }
            let new = dot(&atav, &v).sqrt();
            v = atav;
            if (new - est).abs() <= 1e-12 * new {
                est = new;
                break;
            }
            est = new;
        }
        est
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let header = Header { v: FORMAT_VERSION, n: self.n, seed: self.seed, d: self.diagonal.to_string() };
        io::write_container(path.as_ref(), MAGIC, HEADER_LEN, &header, &[&self.a])
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let c = io::read_container::<Header>(
            path,
            MAGIC,
            HEADER_LEN,
            |h| h.v,
            FORMAT_VERSION,
            |h| h.n * h.n,
        )?;
        let diagonal = c.header.d.parse().map_err(|_| Error::CorruptHeader {
            path: path.to_path_buf(),
            reason: format!("unknown diagonal convention `{}`", c.header.d),
        })?;
        if c.header.n == 0 {
            return Err(Error::CorruptHeader { path: path.to_path_buf(), reason: "n = 0".into() });
        }
        Ok(Self::assemble(c.header.n, c.header.seed, diagonal, c.payload))
    }

    /// Writes `A` as comma-separated rows.
    pub fn export_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        for row in self.a.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

fn quad_form(m: &[f64], n: usize, s: &[f64]) -> f64 {
    (0..n).map(|i| s[i] * dot(&m[i * n..(i + 1) * n], s)).sum()
}
