use crate::error::{Error, Result};
use std::path::Path;

const SATURATION_TOL: f64 = 1e-12;

/// A probability measure on `[0, 1]` stored through its CDF `F`, a right-continuous
/// step function: `F(t) = cdf[i]` for `t ∈ [grid[i], grid[i+1])` and `F(1) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParisiMeasure {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl ParisiMeasure {
    pub fn new(grid: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != cdf.len() {
            return Err(Error::InvalidArgument(
                "measure needs matching grid and cdf with at least two points".into(),
            ));
        }
        if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("measure grid must run from 0 to 1".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("measure grid must be strictly increasing".into()));
        }
        if cdf.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("cdf values must lie in [0, 1]".into()));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("cdf must be nondecreasing".into()));
        }
        if *cdf.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("cdf must equal 1 at t = 1".into()));
        }
        Ok(Self { grid, cdf })
    }

    /// Point mass at 0, `F ≡ 1`.
    pub fn delta0() -> Self {
        Self { grid: vec![0.0, 1.0], cdf: vec![1.0, 1.0] }
    }

    /// Point mass at 1, `F ≡ 0` on `[0, 1)`.
    pub fn delta1() -> Self {
        Self { grid: vec![0.0, 1.0], cdf: vec![0.0, 1.0] }
    }

    /// Uniform grid of `m` intervals with the given CDF values (length `m + 1`).
    pub fn uniform(m: usize, cdf: Vec<f64>) -> Result<Self> {
        let grid = (0..=m).map(|i| i as f64 / m as f64).collect();
        Self::new(grid, cdf)
    }

    /// Measure from atoms `(t_j, z_j)` with `0 < t_1 < … < t_r = 1`, where `z_j` is the
    /// value of `F` on `[t_{j−1}, t_j)` (with `t_0 = 0`).
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("at least one atom required".into()));
        }
        if atoms.last().unwrap().0 != 1.0 {
            return Err(Error::InvalidArgument("last atom must sit at t = 1".into()));
        }
        let mut grid = vec![0.0];
        let mut cdf = Vec::with_capacity(atoms.len() + 1);
        for (j, &(t, z)) in atoms.iter().enumerate() {
            cdf.push(z);
            if j + 1 < atoms.len() {
                grid.push(t);
            }
        }
        grid.push(1.0);
        cdf.push(1.0);
        Self::new(grid, cdf)
    }

    /// The atoms `(t_j, z_j)` in the convention of [`ParisiMeasure::from_atoms`].
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        (1..self.grid.len()).map(|i| (self.grid[i], self.cdf[i - 1])).collect()
    }

    /// Parses `atoms:t1:z1,t2:z2,…` or a path to a CSV file of `t,F` rows.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec {
            "delta0" => return Ok(Self::delta0()),
            "delta1" => return Ok(Self::delta1()),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("atoms:") {
            let mut atoms = Vec::new();
            for part in rest.split(',') {
                let (t, z) = part
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidArgument(format!("bad atom `{part}`")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad number `{s}`")))
                };
                atoms.push((parse(t)?, parse(z)?));
            }
            return Self::from_atoms(&atoms);
        }
        Self::read_csv(spec)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut grid = Vec::new();
        let mut cdf = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let mut it = line.split(',');
            let (Some(t), Some(f)) = (it.next(), it.next()) else {
                return Err(Error::InvalidArgument(format!("bad csv line `{line}`")));
            };
            let (Ok(t), Ok(f)) = (t.trim().parse::<f64>(), f.trim().parse::<f64>()) else {
                if grid.is_empty() {
                    continue;
                }
                return Err(Error::InvalidArgument(format!("bad csv line `{line}`")));
            };
            grid.push(t);
            cdf.push(f);
        }
        Self::new(grid, cdf)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = String::from("t,F\n");
        for (t, f) in self.grid.iter().zip(&self.cdf) {
            s.push_str(&format!("{t:.17},{f:.17}\n"));
        }
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Number of intervals.
    pub fn intervals(&self) -> usize {
        self.grid.len() - 1
    }

    /// Index `i` of the interval `[grid[i], grid[i+1])` containing `t` (the last
    /// interval also contains 1).
    pub fn interval_of(&self, t: f64) -> usize {
        let m = self.intervals();
        match self.grid.partition_point(|&g| g <= t) {
            0 => 0,
            p => (p - 1).min(m - 1),
        }
    }

    /// `F(t)`, right-continuous.
    pub fn f(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 1.0;
        }
        if t < 0.0 {
            return 0.0;
        }
        self.cdf[self.interval_of(t)]
    }

    /// Smallest grid point where `F` reaches 1.
    pub fn q_star(&self) -> f64 {
        let i = self.cdf.iter().position(|&c| c >= 1.0 - SATURATION_TOL).unwrap();
        self.grid[i]
    }

    /// `∫_a^b F(s) ds`.
    pub fn integral_f(&self, a: f64, b: f64) -> f64 {
        self.integrate(a, b, |lo, hi| hi - lo)
    }

    /// `∫_a^b s F(s) ds`.
    pub fn integral_sf(&self, a: f64, b: f64) -> f64 {
        self.integrate(a, b, |lo, hi| 0.5 * (hi * hi - lo * lo))
    }

    /// `∫_0^q ∫_s^1 F(u) du ds = ∫_0^1 F(u) min(u, q) du`.
    pub fn double_tail_integral(&self, q: f64) -> f64 {
        self.integrate(0.0, 1.0, |lo, hi| {
            let below = (hi.min(q) - lo).max(0.0);
            let lo_b = lo;
            let hi_b = lo + below;
            0.5 * (hi_b * hi_b - lo_b * lo_b) + q * (hi - lo.max(q)).max(0.0)
        })
    }

    fn integrate(&self, a: f64, b: f64, piece: impl Fn(f64, f64) -> f64) -> f64 {
        let (a, b) = (a.max(0.0), b.min(1.0));
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..self.intervals() {
            let lo = self.grid[i].max(a);
            let hi = self.grid[i + 1].min(b);
            if hi > lo {
                total += self.cdf[i] * piece(lo, hi);
            }
        }
        total
    }

    /// Total-variation distance to the point mass at 0, i.e. `1 − F(0)`.
    pub fn tv_to_delta0(&self) -> f64 {
        1.0 - self.cdf[0]
    }

    /// Splits each interval into `k` equal parts.
    pub fn refine(&self, k: usize) -> Self {
        let mut grid = Vec::new();
        let mut cdf = Vec::new();
        for i in 0..self.intervals() {
            for j in 0..k {
                grid.push(self.grid[i] + (self.grid[i + 1] - self.grid[i]) * j as f64 / k as f64);
                cdf.push(self.cdf[i]);
            }
        }
        grid.push(1.0);
        cdf.push(1.0);
        Self { grid, cdf }
    }
}
