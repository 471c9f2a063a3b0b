//! Nonnegative functions sampled at the cell centers of a uniform lattice.
//!
//! Off-lattice evaluation is multilinear between cell centers, constant in the
//! outer half-cell of the box and zero outside it. Truncations `fχ_E` are
//! realized by zeroing the samples whose centers fall outside `E`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Cube;

/// Anything that can be evaluated at a point of `R^d`.
pub trait Field {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

/// A closure viewed as a field of fixed dimension.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

pub fn field_fn<F: Fn(&[f64]) -> f64>(dim: usize, f: F) -> FnField<F> {
    FnField { dim, f }
}

impl<F: Fn(&[f64]) -> f64> Field for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl<T: Field + ?Sized> Field for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

/// Declared monotonicity of a sampled function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MonotoneDir {
    Increasing,
    Decreasing,
    #[default]
    Unknown,
}

/// Result of an exhaustive monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Neither,
}

/// Axis-parallel sampling box `[lo, hi)` with `resolution[i]` cells along
/// axis `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != resolution.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len().min(resolution.len()),
            });
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::Config(
                "sample box must have positive, finite extent".into(),
            ));
        }
        if resolution.iter().any(|&n| n == 0) {
            return Err(Error::Config(
                "resolution must be positive on every axis".into(),
            ));
        }
        Ok(SampleBox { lo, hi, resolution })
    }

    /// Box with the given corner and `resolution` cells of width `h` per axis.
    pub fn from_cells(lo: Vec<f64>, h: f64, resolution: Vec<usize>) -> Result<Self> {
        let hi = lo
            .iter()
            .zip(&resolution)
            .map(|(a, &n)| a + h * n as f64)
            .collect();
        Self::new(lo, hi, resolution)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn cell(&self, i: usize) -> f64 {
        (self.hi[i] - self.lo[i]) / self.resolution[i] as f64
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_cube(&self) -> Cube {
        Cube::from_bounds(&self.lo, &self.hi)
    }

    pub fn center_coord(&self, i: usize, n: usize) -> f64 {
        self.lo[i] + (n as f64 + 0.5) * self.cell(i)
    }

    /// Cell centers along axis `i`.
    pub fn axis_centers(&self, i: usize) -> Vec<f64> {
        (0..self.resolution[i])
            .map(|n| self.center_coord(i, n))
            .collect()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for i in (0..self.dim().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.resolution[i + 1];
        }
        s
    }

    /// Multi-index of a flat index (row-major, last axis fastest).
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for i in (0..self.dim()).rev() {
            idx[i] = flat % self.resolution[i];
            flat /= self.resolution[i];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(n, s)| n * s).sum()
    }

    pub fn center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(i, &n)| self.center_coord(i, n))
            .collect()
    }

    /// Per-axis index ranges `[first, last)` of the cells whose centers lie in the
    /// half-open cube.
    pub fn center_ranges(&self, q: &Cube) -> Vec<(usize, usize)> {
        (0..self.dim())
            .map(|i| {
                let h = self.cell(i);
                let n = self.resolution[i] as f64;
                // center c_n = lo + (n + ½)h lies in [a, b) iff n ∈ [(a-lo)/h - ½, (b-lo)/h - ½)
                let first = ((q.lo(i) - self.lo[i]) / h - 0.5).ceil().clamp(0.0, n);
                let last = ((q.hi(i) - self.lo[i]) / h - 0.5).ceil().clamp(0.0, n);
                (first as usize, (last as usize).max(first as usize))
            })
            .collect()
    }

    /// Flat indices of every cell whose center lies in `q`.
    pub fn cells_in(&self, q: &Cube) -> Vec<usize> {
        let ranges = self.center_ranges(q);
        let mut out = Vec::new();
        if ranges.iter().any(|(a, b)| a >= b) {
            return out;
        }
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(self.flatten(&idx));
            let mut axis = self.dim();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < ranges[axis].1 {
                    break;
                }
                idx[axis] = ranges[axis].0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    sample_box: SampleBox,
    values: Vec<f64>,
    monotone_dir: MonotoneDir,
    strides: Vec<usize>,
    cell: Vec<f64>,
}

impl LatticeFunction {
    /// Wraps raw samples. A declared direction is verified.
    pub fn new(sample_box: SampleBox, values: Vec<f64>, monotone_dir: MonotoneDir) -> Result<Self> {
        if values.len() != sample_box.len() {
            return Err(Error::DimensionMismatch {
                expected: sample_box.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(
                "samples must be finite and nonnegative".into(),
            ));
        }
        let f = LatticeFunction::raw(sample_box, values, MonotoneDir::Unknown);
        let found = f.is_monotonic();
        let ok = match monotone_dir {
            MonotoneDir::Unknown => true,
            MonotoneDir::Increasing => found == Monotonicity::Increasing || f.is_constant(),
            MonotoneDir::Decreasing => found == Monotonicity::Decreasing || f.is_constant(),
        };
        if !ok {
            return Err(Error::Domain(format!("samples are not {monotone_dir:?}")));
        }
        Ok(LatticeFunction { monotone_dir, ..f })
    }

    fn raw(sample_box: SampleBox, values: Vec<f64>, monotone_dir: MonotoneDir) -> Self {
        let strides = sample_box.strides();
        let cell = (0..sample_box.dim()).map(|i| sample_box.cell(i)).collect();
        LatticeFunction {
            sample_box,
            values,
            monotone_dir,
            strides,
            cell,
        }
    }

    /// Samples `g` at every cell center.
    pub fn from_fn(
        sample_box: SampleBox,
        dir: MonotoneDir,
        g: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let values = (0..sample_box.len())
            .map(|flat| g(&sample_box.center(&sample_box.unflatten(flat))))
            .collect();
        Self::new(sample_box, values, dir)
    }

    pub fn sample_box(&self) -> &SampleBox {
        &self.sample_box
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn monotone_dir(&self) -> MonotoneDir {
        self.monotone_dir
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// Multilinear interpolation between cell centers; zero outside the box.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.interpolate(x, None)
    }

    fn interpolate(&self, x: &[f64], mask: Option<&SampleMask>) -> f64 {
        let b = &self.sample_box;
        let d = b.dim();
        debug_assert_eq!(x.len(), d);
        let mut base = [0usize; 8];
        let mut frac = [0f64; 8];
        let mut base_v = Vec::new();
        let mut frac_v = Vec::new();
        let (base, frac): (&mut [usize], &mut [f64]) = if d <= 8 {
            (&mut base[..d], &mut frac[..d])
        } else {
            base_v.resize(d, 0);
            frac_v.resize(d, 0.0);
            (&mut base_v[..], &mut frac_v[..])
        };
        for i in 0..d {
            if !(b.lo[i] <= x[i] && x[i] < b.hi[i]) {
                return 0.0;
            }
            let n = b.resolution[i];
            let u = ((x[i] - b.lo[i]) / self.cell[i] - 0.5).clamp(0.0, (n - 1) as f64);
            let fl = (u.floor() as usize).min(n.saturating_sub(2));
            base[i] = fl;
            frac[i] = if n == 1 { 0.0 } else { u - fl as f64 };
        }
        let strides = &self.strides;
        let mut acc = 0.0;
        'corners: for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            let mut inside = true;
            let mut removed = mask.is_some_and(|m| m.exclude.is_some());
            for i in 0..d {
                let up = (corner >> i) & 1 == 1;
                if up && b.resolution[i] == 1 {
                    continue 'corners;
                }
                w *= if up { frac[i] } else { 1.0 - frac[i] };
                let n = base[i] + up as usize;
                flat += n * strides[i];
                if let Some(m) = mask {
                    inside &= m.include[i][n];
                    if let Some(e) = &m.exclude {
                        removed &= e[i][n];
                    }
                }
            }
            if w != 0.0 && inside && !removed {
                acc += w * self.values[flat];
            }
        }
        acc
    }

    /// Per-axis center membership for `χ_{A ∖ B}`; `A` defaults to the box.
    pub fn mask(&self, include: Option<&Cube>, exclude: Option<&Cube>) -> SampleMask {
        let b = &self.sample_box;
        let axis_in = |q: &Cube| -> Vec<Vec<bool>> {
            (0..b.dim())
                .map(|i| {
                    b.axis_centers(i)
                        .into_iter()
                        .map(|c| q.lo(i) <= c && c < q.hi(i))
                        .collect()
                })
                .collect()
        };
        SampleMask {
            include: match include {
                Some(q) => axis_in(q),
                None => b.resolution.iter().map(|&n| vec![true; n]).collect(),
            },
            exclude: exclude.map(axis_in),
        }
    }

    /// `f χ_{A ∖ B}` evaluated lazily.
    pub fn view<'a>(&'a self, mask: &'a SampleMask) -> Masked<'a> {
        Masked { f: self, mask }
    }

    /// `⟨f⟩_{Q,p} = (|Q|^{-1} ∫_Q f^p)^{1/p}` with `f` piecewise constant on
    /// cells, cells partially covered by `Q` weighted by the covered fraction.
    pub fn average(&self, q: &Cube, p: f64) -> Result<f64> {
        let vol = q.volume();
        if !(vol > 0.0) {
            return Err(Error::Domain(
                "averaging cube must have positive volume".into(),
            ));
        }
        if !(p >= 1.0) {
            return Err(Error::UnsupportedExponent(p));
        }
        let b = &self.sample_box;
        let d = b.dim();
        let mut axis: Vec<Vec<(usize, f64)>> = Vec::with_capacity(d);
        for i in 0..d {
            let h = b.cell(i);
            let lo = q.lo(i).max(b.lo[i]);
            let hi = q.hi(i).min(b.hi[i]);
            if lo >= hi {
                return Ok(0.0);
            }
            let n = b.resolution[i];
            let first = (((lo - b.lo[i]) / h).floor().max(0.0) as usize).min(n - 1);
            let last = (((hi - b.lo[i]) / h).ceil() as usize).min(n);
            let mut cells = Vec::new();
            for c in first..last {
                let a = b.lo[i] + c as f64 * h;
                let w = (hi.min(a + h) - lo.max(a)).max(0.0);
                if w > 0.0 {
                    cells.push((c, w));
                }
            }
            axis.push(cells);
        }
        let strides = b.strides();
        let mut total = 0.0;
        let mut it = vec![0usize; d];
        'outer: loop {
            let mut w = 1.0;
            let mut flat = 0;
            for i in 0..d {
                let (c, wi) = axis[i][it[i]];
                w *= wi;
                flat += c * strides[i];
            }
            let v = self.values[flat];
            if v != 0.0 {
                total += w * if p == 1.0 { v } else { v.powf(p) };
            }
            let mut a = d;
            loop {
                if a == 0 {
                    break 'outer;
                }
                a -= 1;
                it[a] += 1;
                if it[a] < axis[a].len() {
                    break;
                }
                it[a] = 0;
            }
        }
        let mean = total / vol;
        Ok(if p == 1.0 { mean } else { mean.powf(1.0 / p) })
    }

    /// Checks every pair of lattice-adjacent samples.
    pub fn is_monotonic(&self) -> Monotonicity {
        let b = &self.sample_box;
        let strides = b.strides();
        let mut up = false;
        let mut down = false;
        for flat in 0..self.values.len() {
            let idx = b.unflatten(flat);
            for i in 0..b.dim() {
                if idx[i] + 1 < b.resolution[i] {
                    let a = self.values[flat];
                    let c = self.values[flat + strides[i]];
                    up |= c > a;
                    down |= c < a;
                }
            }
            if up && down {
                return Monotonicity::Neither;
            }
        }
        if down {
            Monotonicity::Decreasing
        } else {
            Monotonicity::Increasing
        }
    }

    /// `λ f` for `λ ≥ 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidScale(lambda));
        }
        Ok(LatticeFunction::raw(
            self.sample_box.clone(),
            self.values.iter().map(|v| v * lambda).collect(),
            self.monotone_dir,
        ))
    }

    /// Pointwise sum of two functions on the same lattice.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.sample_box != other.sample_box {
            return Err(Error::Domain("functions live on different lattices".into()));
        }
        let dir = if self.monotone_dir == other.monotone_dir {
            self.monotone_dir
        } else {
            MonotoneDir::Unknown
        };
        Ok(LatticeFunction::raw(
            self.sample_box.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            dir,
        ))
    }

    /// `f χ_{A ∖ B}`: samples whose centers lie outside `A`, or inside `B`,
    /// are set to zero.
    pub fn masked(&self, include: &Cube, exclude: Option<&Cube>) -> Self {
        let m = self.mask(Some(include), exclude);
        let b = &self.sample_box;
        let d = b.dim();
        let mut values = self.values.clone();
        let mut idx = vec![0usize; d];
        for v in values.iter_mut() {
            if !m.keeps(&idx) {
                *v = 0.0;
            }
            for axis in (0..d).rev() {
                idx[axis] += 1;
                if idx[axis] < b.resolution[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        LatticeFunction::raw(b.clone(), values, MonotoneDir::Unknown)
    }

    /// Writes a JSON header and a companion CSV or little-endian `f64` file.
    pub fn save(&self, header: &Path, format: DumpFormat) -> Result<()> {
        let data_name = format!(
            "{}.{}",
            header
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("samples"),
            match format {
                DumpFormat::Csv => "csv",
                DumpFormat::Binary => "bin",
            }
        );
        let h = DumpHeader {
            bbox: BoxRecord {
                lo: self.sample_box.lo.clone(),
                hi: self.sample_box.hi.clone(),
            },
            resolution: self.sample_box.resolution.clone(),
            monotone_dir: self.monotone_dir,
            format,
            data: data_name.clone(),
        };
        fs::write(header, serde_json::to_string_pretty(&h)?)?;
        let data_path = header.with_file_name(&data_name);
        let mut w = BufWriter::new(fs::File::create(data_path)?);
        match format {
            DumpFormat::Csv => {
                for v in &self.values {
                    writeln!(w, "{v:e}")?;
                }
            }
            DumpFormat::Binary => {
                for v in &self.values {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(header: &Path) -> Result<Self> {
        let h: DumpHeader = serde_json::from_str(&fs::read_to_string(header)?)?;
        let sample_box = SampleBox::new(h.bbox.lo, h.bbox.hi, h.resolution)?;
        let data_path = header.with_file_name(&h.data);
        let values = match h.format {
            DumpFormat::Csv => {
                let r = BufReader::new(fs::File::open(data_path)?);
                let mut out = Vec::with_capacity(sample_box.len());
                for line in r.lines() {
                    let line = line?;
                    let t = line.trim();
                    if t.is_empty() {
                        continue;
                    }
                    out.push(
                        t.parse::<f64>()
                            .map_err(|e| Error::Io(format!("bad sample {t:?}: {e}")))?,
                    );
                }
                out
            }
            DumpFormat::Binary => {
                let mut bytes = Vec::new();
                fs::File::open(data_path)?.read_to_end(&mut bytes)?;
                if bytes.len() % 8 != 0 {
                    return Err(Error::Io(
                        "binary dump length is not a multiple of 8".into(),
                    ));
                }
                bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect()
            }
        };
        Self::new(sample_box, values, h.monotone_dir)
    }
}

/// Sample-level membership of `A ∖ B`, stored per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMask {
    include: Vec<Vec<bool>>,
    exclude: Option<Vec<Vec<bool>>>,
}

impl SampleMask {
    pub fn keeps(&self, idx: &[usize]) -> bool {
        let inside = idx.iter().enumerate().all(|(i, &n)| self.include[i][n]);
        let removed = self
            .exclude
            .as_ref()
            .is_some_and(|e| idx.iter().enumerate().all(|(i, &n)| e[i][n]));
        inside && !removed
    }
}

/// A lattice function restricted by a [`SampleMask`].
#[derive(Debug, Clone, Copy)]
pub struct Masked<'a> {
    f: &'a LatticeFunction,
    mask: &'a SampleMask,
}

impl Field for Masked<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.f.interpolate(x, Some(self.mask))
    }
}

impl Field for LatticeFunction {
    fn dim(&self) -> usize {
        self.sample_box.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DumpFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BoxRecord {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DumpHeader {
    #[serde(rename = "box")]
    bbox: BoxRecord,
    resolution: Vec<usize>,
    monotone_dir: MonotoneDir,
    format: DumpFormat,
    data: String,
}

/// Families of monotone test inputs; `Oscillating` is a non-monotone control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Constant {
        c: f64,
    },
    /// `offset + Σ a_i (x_i - lo_i)` with `a_i ≥ 0`.
    LinearRamp {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `Π_i 1/(1 + e^{-(x_i - c_i)/w_i})`.
    SigmoidProduct {
        centers: Vec<f64>,
        widths: Vec<f64>,
    },
    /// `χ_{x ≥ a}`.
    UpperSetIndicator {
        threshold: Vec<f64>,
    },
    /// Cumulative sums along every axis of sparse nonnegative increments,
    /// normalized to maximum one.
    RandomMonotone {
        seed: u64,
        #[serde(default = "default_density")]
        density: f64,
    },
    /// `sin(ω x_1) + 2`.
    Oscillating {
        #[serde(default = "default_omega")]
        omega: f64,
    },
}

fn default_density() -> f64 {
    0.05
}

fn default_omega() -> f64 {
    10.0
}

impl TestFunction {
    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Constant { .. } => "constant",
            TestFunction::LinearRamp { .. } => "linear-ramp",
            TestFunction::SigmoidProduct { .. } => "sigmoid-product",
            TestFunction::UpperSetIndicator { .. } => "upper-set-indicator",
            TestFunction::RandomMonotone { .. } => "random-monotone",
            TestFunction::Oscillating { .. } => "oscillating",
        }
    }
}

pub fn make_test_function(kind: &TestFunction, sample_box: &SampleBox) -> Result<LatticeFunction> {
    let d = sample_box.dim();
    let want = |v: &Vec<f64>, what: &str| -> Result<()> {
        if v.len() != d {
            return Err(Error::Config(format!(
                "{what} needs {d} components, got {}",
                v.len()
            )));
        }
        Ok(())
    };
    let b = sample_box.clone();
    match kind {
        TestFunction::Constant { c } => {
            if !(*c >= 0.0) || !c.is_finite() {
                return Err(Error::Config(format!(
                    "constant must be nonnegative, got {c}"
                )));
            }
            LatticeFunction::new(b.clone(), vec![*c; b.len()], MonotoneDir::Increasing)
        }
        TestFunction::LinearRamp { coeffs, offset } => {
            want(coeffs, "linear-ramp coeffs")?;
            if coeffs.iter().any(|a| !(*a >= 0.0)) || !(*offset >= 0.0) {
                return Err(Error::Config(
                    "linear-ramp needs nonnegative coefficients and offset".into(),
                ));
            }
            let lo = b.lo.clone();
            LatticeFunction::from_fn(b, MonotoneDir::Increasing, |x| {
                offset
                    + coeffs
                        .iter()
                        .zip(x)
                        .zip(&lo)
                        .map(|((a, xi), l)| a * (xi - l))
                        .sum::<f64>()
            })
        }
        TestFunction::SigmoidProduct { centers, widths } => {
            want(centers, "sigmoid centers")?;
            want(widths, "sigmoid widths")?;
            if widths.iter().any(|w| !(*w > 0.0)) {
                return Err(Error::Config("sigmoid widths must be positive".into()));
            }
            LatticeFunction::from_fn(b, MonotoneDir::Increasing, |x| {
                x.iter()
                    .zip(centers)
                    .zip(widths)
                    .map(|((xi, c), w)| 1.0 / (1.0 + (-(xi - c) / w).exp()))
                    .product()
            })
        }
        TestFunction::UpperSetIndicator { threshold } => {
            want(threshold, "upper-set threshold")?;
            LatticeFunction::from_fn(b, MonotoneDir::Increasing, |x| {
                if x.iter().zip(threshold).all(|(xi, a)| xi >= a) {
                    1.0
                } else {
                    0.0
                }
            })
        }
        TestFunction::RandomMonotone { seed, density } => {
            if !(*density > 0.0 && *density <= 1.0) {
                return Err(Error::Config(format!(
                    "density must lie in (0, 1], got {density}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut v: Vec<f64> = (0..b.len())
                .map(|_| {
                    if rng.random::<f64>() < *density {
                        rng.random::<f64>()
                    } else {
                        0.0
                    }
                })
                .collect();
            let strides = b.strides();
            for axis in 0..d {
                for flat in 0..v.len() {
                    let idx = b.unflatten(flat);
                    if idx[axis] > 0 {
                        v[flat] += v[flat - strides[axis]];
                    }
                }
            }
            let max = v.iter().copied().fold(0.0, f64::max);
            if max > 0.0 {
                v.iter_mut().for_each(|x| *x /= max);
            }
            LatticeFunction::new(b, v, MonotoneDir::Increasing)
        }
        TestFunction::Oscillating { omega } => {
            let om = *omega;
            LatticeFunction::from_fn(b, MonotoneDir::Unknown, move |x| (om * x[0]).sin() + 2.0)
        }
    }
}

/// Ten monotone increasing inputs whose features sit around `focus`: a
/// constant, two ramps, two sigmoid products, two upper-set indicators and
/// three seeded random-monotone functions.
pub fn monotone_corpus(
    sample_box: &SampleBox,
    focus: &Cube,
    seed: u64,
) -> Result<Vec<(String, LatticeFunction)>> {
    let d = sample_box.dim();
    if focus.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: focus.dim(),
        });
    }
    let at = |fracs: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|i| focus.lo(i) + fracs[i % fracs.len()] * focus.sides[i])
            .collect()
    };
    let scale = |fracs: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|i| fracs[i % fracs.len()] * focus.sides[i])
            .collect()
    };
    let kinds = vec![
        TestFunction::Constant { c: 1.0 },
        TestFunction::LinearRamp {
            coeffs: vec![1.0; d],
            offset: 0.0,
        },
        TestFunction::LinearRamp {
            coeffs: (0..d).map(|i| 1.0 / (1 + i) as f64).collect(),
            offset: 0.5,
        },
        TestFunction::SigmoidProduct {
            centers: at(&[0.5]),
            widths: scale(&[0.1]),
        },
        TestFunction::SigmoidProduct {
            centers: at(&[0.3, 0.7]),
            widths: scale(&[0.05, 0.3]),
        },
        TestFunction::UpperSetIndicator {
            threshold: at(&[0.5]),
        },
        TestFunction::UpperSetIndicator {
            threshold: at(&[0.2, 0.6]),
        },
        TestFunction::RandomMonotone {
            seed,
            density: 0.01,
        },
        TestFunction::RandomMonotone {
            seed: seed.wrapping_add(1),
            density: 0.001,
        },
        TestFunction::RandomMonotone {
            seed: seed.wrapping_add(2),
            density: 0.0001,
        },
    ];
    kinds
        .iter()
        .enumerate()
        .map(|(n, k)| {
            Ok((
                format!("{:02}-{}", n, k.name()),
                make_test_function(k, sample_box)?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> SampleBox {
        SampleBox::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![n, n]).unwrap()
    }

    fn ramp(n: usize) -> LatticeFunction {
        make_test_function(
            &TestFunction::LinearRamp {
                coeffs: vec![1.0, 0.0],
                offset: 0.0,
            },
            &unit(n),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let c = make_test_function(&TestFunction::Constant { c: 2.5 }, &unit(16)).unwrap();
        assert_eq!(c.evaluate(&[0.3, 0.99]), 2.5);
        assert_eq!(c.evaluate(&[1.2, 0.5]), 0.0);
        assert_eq!(c.evaluate(&[-0.01, 0.5]), 0.0);
        assert!((ramp(64).evaluate(&[0.25, 0.7]) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn average_examples() {
        let c = make_test_function(&TestFunction::Constant { c: 3.0 }, &unit(16)).unwrap();
        let q = Cube::from_bounds(&[0.0, 0.0], &[1.0, 1.0]);
        for p in [1.0, 2.0, 3.5] {
            assert!((c.average(&q, p).unwrap() - 3.0).abs() < 1e-12);
        }
        let f = ramp(64);
        assert!((f.average(&q, 1.0).unwrap() - 0.5).abs() < 1e-14);
        // midpoint error h²/12 in the second moment
        assert!((f.average(&q, 2.0).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-4);
        let far = Cube::from_bounds(&[5.0, 5.0], &[6.0, 6.0]);
        assert_eq!(f.average(&far, 1.0).unwrap(), 0.0);
        let partial = Cube::from_bounds(&[0.5, 0.0], &[1.5, 1.0]);
        assert!((f.average(&partial, 1.0).unwrap() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn monotonicity_examples() {
        let sum = make_test_function(
            &TestFunction::LinearRamp {
                coeffs: vec![1.0, 1.0],
                offset: 0.0,
            },
            &unit(32),
        )
        .unwrap();
        assert_eq!(sum.is_monotonic(), Monotonicity::Increasing);
        let c = make_test_function(&TestFunction::Constant { c: 5.0 }, &unit(8)).unwrap();
        assert_eq!(c.is_monotonic(), Monotonicity::Increasing);
        let osc =
            make_test_function(&TestFunction::Oscillating { omega: 10.0 }, &unit(200)).unwrap();
        assert_eq!(osc.is_monotonic(), Monotonicity::Neither);
        let dec = LatticeFunction::from_fn(unit(8), MonotoneDir::Decreasing, |x| 2.0 - x[0] - x[1])
            .unwrap();
        assert_eq!(dec.is_monotonic(), Monotonicity::Decreasing);
        assert!(
            LatticeFunction::from_fn(unit(8), MonotoneDir::Increasing, |x| 2.0 - x[0]).is_err()
        );
    }

    #[test]
    fn generated_kinds_are_monotone() {
        let b = SampleBox::new(vec![-1.0, 0.0, 0.0], vec![1.0, 2.0, 1.0], vec![12, 10, 9]).unwrap();
        let kinds = [
            TestFunction::Constant { c: 1.0 },
            TestFunction::LinearRamp {
                coeffs: vec![1.0, 0.5, 2.0],
                offset: 0.1,
            },
            TestFunction::SigmoidProduct {
                centers: vec![0.0, 1.0, 0.5],
                widths: vec![0.1, 0.3, 0.2],
            },
            TestFunction::UpperSetIndicator {
                threshold: vec![0.0, 0.7, 0.3],
            },
            TestFunction::RandomMonotone {
                seed: 7,
                density: 0.05,
            },
        ];
        for k in &kinds {
            let f = make_test_function(k, &b).unwrap();
            assert_eq!(f.is_monotonic(), Monotonicity::Increasing, "{}", k.name());
            assert!(f.values().iter().all(|v| *v >= 0.0));
        }
        assert!(make_test_function(&TestFunction::Constant { c: -1.0 }, &b).is_err());
        assert!(make_test_function(
            &TestFunction::UpperSetIndicator {
                threshold: vec![0.0]
            },
            &b
        )
        .is_err());
    }

    #[test]
    fn random_monotone_is_seeded() {
        let b = unit(20);
        let a = make_test_function(
            &TestFunction::RandomMonotone {
                seed: 3,
                density: 0.1,
            },
            &b,
        )
        .unwrap();
        let a2 = make_test_function(
            &TestFunction::RandomMonotone {
                seed: 3,
                density: 0.1,
            },
            &b,
        )
        .unwrap();
        let c = make_test_function(
            &TestFunction::RandomMonotone {
                seed: 4,
                density: 0.1,
            },
            &b,
        )
        .unwrap();
        assert_eq!(a, a2);
        assert_ne!(a, c);
    }

    #[test]
    fn masking_zeroes_samples() {
        let f = make_test_function(&TestFunction::Constant { c: 1.0 }, &unit(8)).unwrap();
        let inc = Cube::from_bounds(&[0.0, 0.0], &[0.5, 1.0]);
        let exc = Cube::from_bounds(&[0.0, 0.0], &[0.25, 0.25]);
        let g = f.masked(&inc, Some(&exc));
        let kept: f64 = g.values().iter().sum();
        assert_eq!(kept, 32.0 - 4.0);
        assert_eq!(g.evaluate(&[0.9, 0.9]), 0.0);
        assert_eq!(g.evaluate(&[0.3, 0.6]), 1.0);
        let m = f.mask(Some(&inc), Some(&exc));
        let v = f.view(&m);
        for x in [[0.9, 0.9], [0.3, 0.6], [0.1, 0.1], [0.49, 0.26], [0.2, 0.3]] {
            assert_eq!(v.value(&x), g.evaluate(&x));
        }
    }

    #[test]
    fn cells_in_counts_centers() {
        let b = SampleBox::from_cells(vec![-4.0, -4.0], 1.0 / 64.0, vec![576, 576]).unwrap();
        let q0 = Cube::from_bounds(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(b.cells_in(&q0).len(), 64 * 64);
        let thin = Cube::from_bounds(&[0.0, 0.0], &[0.125, 1.0 / 64.0]);
        assert_eq!(b.cells_in(&thin).len(), 8);
    }

    #[test]
    fn dump_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let f = make_test_function(
            &TestFunction::RandomMonotone {
                seed: 1,
                density: 0.2,
            },
            &unit(9),
        )
        .unwrap();
        for fmt in [DumpFormat::Csv, DumpFormat::Binary] {
            let header = dir.path().join(format!("f-{fmt:?}.json"));
            f.save(&header, fmt).unwrap();
            let back = LatticeFunction::load(&header).unwrap();
            assert_eq!(back, f);
        }
        let text = fs::read_to_string(dir.path().join("f-Csv.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(
            v.get("box").is_some()
                && v.get("resolution").is_some()
                && v.get("monotone_dir").is_some()
        );
    }

    #[test]
    fn partition_consistency_of_averages() {
        let f = make_test_function(
            &TestFunction::SigmoidProduct {
                centers: vec![0.4, 0.6],
                widths: vec![0.1, 0.2],
            },
            &unit(40),
        )
        .unwrap();
        let q = Cube::from_bounds(&[0.1, 0.05], &[0.9, 0.85]);
        let whole = q.volume() * f.average(&q, 1.0).unwrap();
        let mut parts = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let lo = [0.1 + 0.2 * a as f64, 0.05 + 0.2 * b as f64];
                let qi = Cube::from_bounds(&lo, &[lo[0] + 0.2, lo[1] + 0.2]);
                parts += qi.volume() * f.average(&qi, 1.0).unwrap();
            }
        }
        assert!((whole - parts).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn interpolation_preserves_order(
                seed in 0u64..1000,
                x in prop::collection::vec(-0.1f64..1.1, 2),
                dx in prop::collection::vec(0.0f64..0.5, 2),
            ) {
                let f = make_test_function(&TestFunction::RandomMonotone { seed, density: 0.1 }, &unit(12)).unwrap();
                let y: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
                let inside = |p: &[f64]| p.iter().all(|v| (0.0..1.0).contains(v));
                prop_assume!(inside(&x) && inside(&y));
                prop_assert!(f.evaluate(&y) >= f.evaluate(&x) - 1e-15);
            }

            #[test]
            fn average_is_homogeneous(seed in 0u64..1000, lambda in 0.01f64..100.0, p in 1.0f64..4.0) {
                let f = make_test_function(&TestFunction::RandomMonotone { seed, density: 0.2 }, &unit(10)).unwrap();
                let q = Cube::from_bounds(&[0.13, 0.2], &[0.77, 0.95]);
                let a = f.average(&q, p).unwrap();
                let b = f.scaled(lambda).unwrap().average(&q, p).unwrap();
                prop_assert!((b - lambda * a).abs() <= 1e-12 * (lambda * a).max(1e-300));
            }
        }
    }
}
