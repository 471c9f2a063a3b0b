//! Measures of dyadic cubes counted in lattice cells.
//!
//! A [`CubeCells`] fixes a dyadic cube `Q₀` whose corners and descendants lie
//! on the sampling lattice; every set inside `Q₀` is then a set of cells and
//! every measure an exact integer count.

use crate::error::{Error, Result};
use crate::grid::{DyadicGammaCube, GridConfig};

#[derive(Debug, Clone)]
pub struct CubeCells {
    grid: GridConfig,
    q0: DyadicGammaCube,
    h: Vec<f64>,
    lo: Vec<f64>,
    shape: Vec<usize>,
    k_fine: i32,
}

impl CubeCells {
    /// `h` is the lattice cell size per axis. The finest generation is the
    /// smallest one whose sides are all at least one cell.
    pub fn new(grid: &GridConfig, q0: &DyadicGammaCube, h: &[f64]) -> Result<Self> {
        let d = grid.dim();
        if h.len() != d || q0.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.len().min(q0.dim()),
            });
        }
        let k_fine = (0..d)
            .map(|i| {
                let a = grid.curve.exponents()[i];
                (h[i].log2() / a).ceil() as i32
            })
            .max()
            .unwrap_or(q0.k)
            .min(q0.k);
        let cube = grid.cube(q0);
        let mut shape = Vec::with_capacity(d);
        for i in 0..d {
            let n = cube.sides[i] / h[i];
            if n.fract() != 0.0 || (cube.lo(i) / h[i]).fract() != 0.0 {
                return Err(Error::Domain(format!(
                    "cube {:?} is not aligned with the sampling lattice on axis {i}",
                    q0.m
                )));
            }
            shape.push(n as usize);
        }
        let lo = (0..d).map(|i| cube.lo(i)).collect();
        Ok(CubeCells {
            grid: grid.clone(),
            q0: q0.clone(),
            h: h.to_vec(),
            lo,
            shape,
            k_fine,
        })
    }

    pub fn q0(&self) -> &DyadicGammaCube {
        &self.q0
    }

    pub fn grid(&self) -> &GridConfig {
        &self.grid
    }

    pub fn cell_size(&self) -> &[f64] {
        &self.h
    }

    pub fn k_fine(&self) -> i32 {
        self.k_fine
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of cells of `Q₀`.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    /// Local index ranges `[a, b)` of a cube inside `Q₀`.
    pub fn range(&self, q: &DyadicGammaCube) -> Result<Vec<(usize, usize)>> {
        if q != &self.q0 && !self.grid.contains_exact(&self.q0, q)? {
            return Err(Error::Domain(format!(
                "cube k={} m={:?} is not inside Q0",
                q.k, q.m
            )));
        }
        let c = self.grid.cube(q);
        (0..self.dim())
            .map(|i| {
                let a = (c.lo(i) - self.lo[i]) / self.h[i];
                let b = (c.hi(i) - self.lo[i]) / self.h[i];
                if a.fract() != 0.0 || b.fract() != 0.0 {
                    return Err(Error::Domain(format!(
                        "cube k={} is below lattice resolution",
                        q.k
                    )));
                }
                Ok((a as usize, b as usize))
            })
            .collect()
    }

    /// Cell count of a cube inside `Q₀`.
    pub fn count(&self, q: &DyadicGammaCube) -> Result<usize> {
        Ok(self.range(q)?.iter().map(|(a, b)| b - a).product())
    }

    /// Local flat indices (last axis fastest) of a cube's cells.
    pub fn cells(&self, q: &DyadicGammaCube) -> Result<Vec<usize>> {
        let r = self.range(q)?;
        Ok(self.cells_of_range(&r))
    }

    fn cells_of_range(&self, r: &[(usize, usize)]) -> Vec<usize> {
        let d = self.dim();
        let mut out = Vec::with_capacity(r.iter().map(|(a, b)| b - a).product());
        if r.iter().any(|(a, b)| a >= b) {
            return out;
        }
        let mut idx: Vec<usize> = r.iter().map(|x| x.0).collect();
        loop {
            out.push(self.flatten(&idx));
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < r[axis].1 {
                    break;
                }
                idx[axis] = r[axis].0;
            }
        }
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (n, s)| acc * s + n)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for i in (0..self.dim()).rev() {
            idx[i] = flat % self.shape[i];
            flat /= self.shape[i];
        }
        idx
    }

    /// Center of a local cell.
    pub fn center(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(i, &n)| self.lo[i] + (n as f64 + 0.5) * self.h[i])
            .collect()
    }

    /// Whether the cube can be subdivided at lattice resolution.
    pub fn has_children(&self, q: &DyadicGammaCube) -> bool {
        q.k > self.k_fine
    }

    /// Every cube strictly inside `Q₀` down to generation `max(k_lo, k_fine)`,
    /// coarsest generation first.
    pub fn descendants(&self, k_lo: i32) -> Result<Vec<DyadicGammaCube>> {
        let stop = k_lo.max(self.k_fine);
        let mut out = Vec::new();
        let mut level = vec![self.q0.clone()];
        while level.first().is_some_and(|q| q.k > stop) {
            let mut next = Vec::new();
            for q in &level {
                next.extend(self.grid.children(q)?);
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        Ok(out)
    }
}

/// A set of cells of `Q₀`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    bits: Vec<bool>,
}

impl CellSet {
    pub fn empty(cells: &CubeCells) -> Self {
        CellSet {
            bits: vec![false; cells.len()],
        }
    }

    pub fn full(cells: &CubeCells) -> Self {
        CellSet {
            bits: vec![true; cells.len()],
        }
    }

    pub fn from_bits(cells: &CubeCells, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != cells.len() {
            return Err(Error::DimensionMismatch {
                expected: cells.len(),
                got: bits.len(),
            });
        }
        Ok(CellSet { bits })
    }

    /// Cells of `Q₀` whose centers lie in one of the given points' cells;
    /// any point outside `Q₀` is a domain error.
    pub fn from_points(cells: &CubeCells, points: &[Vec<f64>]) -> Result<Self> {
        let mut s = Self::empty(cells);
        for p in points {
            let mut idx = Vec::with_capacity(cells.dim());
            for i in 0..cells.dim() {
                let u = ((p[i] - cells.lo[i]) / cells.h[i]).floor();
                if u < 0.0 || u >= cells.shape[i] as f64 {
                    return Err(Error::Domain(format!("point {p:?} lies outside Q0")));
                }
                idx.push(u as usize);
            }
            s.bits[cells.flatten(&idx)] = true;
        }
        Ok(s)
    }

    /// All cells of one cube.
    pub fn of_cube(cells: &CubeCells, q: &DyadicGammaCube) -> Result<Self> {
        let mut s = Self::empty(cells);
        for c in cells.cells(q)? {
            s.bits[c] = true;
        }
        Ok(s)
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.bits[flat]
    }

    pub fn insert(&mut self, flat: usize) {
        self.bits[flat] = true;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn count_in(&self, cells: &CubeCells, q: &DyadicGammaCube) -> Result<usize> {
        Ok(cells
            .cells(q)?
            .into_iter()
            .filter(|&c| self.bits[c])
            .count())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i)
    }
}
