//! γ-cubes, shifted dyadic γ-grids and their navigation.
//!
//! A dyadic γ-cube of generation `k` has side `2^{⌊kα_i⌋}` in coordinate `i`.
//! The `3^d` shifted grids offset every generation by a third of a side.
//! Cubes are half-open in every coordinate so each generation is an exact
//! partition.
//!
//! Two offset conventions are available:
//!
//! * [`ShiftConvention::ConstantThird`] offsets coordinate `i` by `+j_i/3`
//!   sides in every generation.
//! * [`ShiftConvention::AlternatingThird`] offsets by `(-1)^{e}·j_i/3` sides
//!   where `e = ⌊kα_i⌋` is the side exponent. Consecutive generations then
//!   nest for any integer exponent step, which is what the stopping-time
//!   construction needs.
//!
//! The constant offset breaks nesting in coordinates whose side doubles
//! (odd step), the `(-1)^k` offset breaks it in coordinates whose side
//! quadruples; the exponent-parity sign handles both.

use serde::{Deserialize, Serialize};

use crate::curve::MonomialCurve;
use crate::error::{Error, Result};

/// Fractional bits used by the exact interval arithmetic. Intervals are
/// numerators over the common denominator `3·2^EXACT_BITS`.
const EXACT_BITS: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftConvention {
    ConstantThird,
    AlternatingThird,
}

impl Default for ShiftConvention {
    fn default() -> Self {
        ShiftConvention::AlternatingThird
    }
}

/// Plain axis-parallel cube, described by its center and side lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub sides: Vec<f64>,
}

impl Cube {
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Self {
        Cube {
            center: lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            sides: lo.iter().zip(hi).map(|(a, b)| b - a).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.center[i] - 0.5 * self.sides[i]
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.center[i] + 0.5 * self.sides[i]
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Half-open membership `lo ≤ x < hi`.
    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|i| self.lo(i) <= x[i] && x[i] < self.hi(i))
    }

    /// Closed containment of another cube.
    pub fn contains_cube(&self, other: &Cube) -> bool {
        (0..self.dim()).all(|i| self.lo(i) <= other.lo(i) && other.hi(i) <= self.hi(i))
    }

    pub fn dilate(&self, lambda: f64) -> Result<Cube> {
        dilate_cube(self, lambda)
    }
}

/// `λQ`: same center, every side multiplied by `λ`. The result is a plain
/// cube; it is in general neither a γ-cube nor a dyadic γ-cube.
pub fn dilate_cube(q: &Cube, lambda: f64) -> Result<Cube> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidScale(lambda));
    }
    Ok(Cube {
        center: q.center.clone(),
        sides: q.sides.iter().map(|s| s * lambda).collect(),
    })
}

/// A γ-cube: side `l^{α_i}` in coordinate `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCube {
    pub center: Vec<f64>,
    pub l: f64,
    pub sides: Vec<f64>,
}

impl GammaCube {
    pub fn new(curve: &MonomialCurve, center: Vec<f64>, l: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidScale(l));
        }
        if center.len() != curve.dim() {
            return Err(Error::DimensionMismatch {
                expected: curve.dim(),
                got: center.len(),
            });
        }
        let sides = match curve.integer_exponents() {
            Some(a) => a.iter().map(|&e| l.powi(e)).collect(),
            None => curve.exponents().iter().map(|&e| l.powf(e)).collect(),
        };
        Ok(GammaCube { center, l, sides })
    }

    pub fn as_cube(&self) -> Cube {
        Cube {
            center: self.center.clone(),
            sides: self.sides.clone(),
        }
    }
}

/// A cube of one of the shifted dyadic γ-grids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "CubeRecord", try_from = "CubeRecord")]
pub struct DyadicGammaCube {
    pub k: i32,
    pub m: Vec<i64>,
    pub shift: Vec<u8>,
}

impl DyadicGammaCube {
    pub fn new(k: i32, m: Vec<i64>, shift: Vec<u8>) -> Result<Self> {
        if m.len() != shift.len() {
            return Err(Error::DimensionMismatch {
                expected: m.len(),
                got: shift.len(),
            });
        }
        if shift.iter().any(|&j| j > 2) {
            return Err(Error::Config(
                "shift components must lie in {0, 1, 2}".into(),
            ));
        }
        Ok(Self { k, m, shift })
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Base-3 encoding of the shift vector.
    pub fn grid_id(&self) -> u32 {
        shift_id(&self.shift)
    }

    /// `l_Q = 2^k`.
    pub fn scale(&self) -> f64 {
        (self.k as f64).exp2()
    }
}

pub fn shift_id(shift: &[u8]) -> u32 {
    shift.iter().rev().fold(0u32, |acc, &j| acc * 3 + j as u32)
}

/// JSON record `{grid_id, k, m, shift}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CubeRecord {
    grid_id: u32,
    k: i32,
    m: Vec<i64>,
    shift: Vec<u8>,
}

impl From<DyadicGammaCube> for CubeRecord {
    fn from(q: DyadicGammaCube) -> Self {
        CubeRecord {
            grid_id: q.grid_id(),
            k: q.k,
            m: q.m,
            shift: q.shift,
        }
    }
}

impl TryFrom<CubeRecord> for DyadicGammaCube {
    type Error = Error;

    fn try_from(r: CubeRecord) -> Result<Self> {
        let q = DyadicGammaCube::new(r.k, r.m, r.shift)?;
        if q.grid_id() != r.grid_id {
            return Err(Error::Config(format!(
                "grid_id {} does not match shift {:?}",
                r.grid_id, q.shift
            )));
        }
        Ok(q)
    }
}

/// A finite generation window of the shifted γ-grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub curve: MonomialCurve,
    pub k_min: i32,
    pub k_max: i32,
    pub convention: ShiftConvention,
}

impl GridConfig {
    pub fn new(
        curve: MonomialCurve,
        k_min: i32,
        k_max: i32,
        convention: ShiftConvention,
    ) -> Result<Self> {
        // A single-generation window is accepted so that `grid_constant` can
        // report that it has no parent relations.
        if k_min > k_max {
            return Err(Error::Config(format!(
                "k_min {k_min} exceeds k_max {k_max}"
            )));
        }
        Ok(Self {
            curve,
            k_min,
            k_max,
            convention,
        })
    }

    pub fn dim(&self) -> usize {
        self.curve.dim()
    }

    fn check_generation(&self, k: i32) -> Result<()> {
        if k < self.k_min || k > self.k_max {
            return Err(Error::GenerationOutOfRange {
                k,
                k_min: self.k_min,
                k_max: self.k_max,
            });
        }
        Ok(())
    }

    fn check_shift(&self, shift: &[u8]) -> Result<()> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: shift.len(),
            });
        }
        if shift.iter().any(|&j| j > 2) {
            return Err(Error::Config(
                "shift components must lie in {0, 1, 2}".into(),
            ));
        }
        Ok(())
    }

    /// Every shift vector in `{0,1,2}^d`.
    pub fn shifts(&self) -> Vec<Vec<u8>> {
        let d = self.dim();
        (0..3u32.pow(d as u32))
            .map(|mut id| {
                (0..d)
                    .map(|_| {
                        let j = (id % 3) as u8;
                        id /= 3;
                        j
                    })
                    .collect()
            })
            .collect()
    }

    /// Sign of the one-third offset of generation `k` in coordinate `i`.
    fn offset_sign(&self, k: i32, i: usize) -> i64 {
        match self.convention {
            ShiftConvention::ConstantThird => 1,
            ShiftConvention::AlternatingThird => {
                if self.curve.floor_exponent(k, i).rem_euclid(2) == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// Side lengths `2^{⌊kα_i⌋}` of generation `k`.
    pub fn cube_sides(&self, k: i32) -> Vec<f64> {
        cube_sides(&self.curve, k)
    }

    /// The cube of generation `k` in the grid `shift` containing `x`.
    pub fn locate(&self, shift: &[u8], k: i32, x: &[f64]) -> Result<DyadicGammaCube> {
        self.check_generation(k)?;
        self.check_shift(shift)?;
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let m = (0..self.dim())
            .map(|i| {
                let side = (self.curve.floor_exponent(k, i) as f64).exp2();
                let delta = self.offset_sign(k, i) as f64 * shift[i] as f64 / 3.0;
                (x[i] / side - delta).floor() as i64
            })
            .collect();
        Ok(DyadicGammaCube {
            k,
            m,
            shift: shift.to_vec(),
        })
    }

    /// Geometry of a dyadic cube.
    pub fn cube(&self, q: &DyadicGammaCube) -> Cube {
        let mut lo = Vec::with_capacity(q.dim());
        let mut hi = Vec::with_capacity(q.dim());
        for i in 0..q.dim() {
            let side = (self.curve.floor_exponent(q.k, i) as f64).exp2();
            let delta = self.offset_sign(q.k, i) as f64 * q.shift[i] as f64 / 3.0;
            let a = side * (q.m[i] as f64 + delta);
            lo.push(a);
            hi.push(a + side);
        }
        Cube::from_bounds(&lo, &hi)
    }

    /// Exact bounds of coordinate `i`, as numerators over `3·2^EXACT_BITS`.
    pub fn exact_interval(&self, q: &DyadicGammaCube, i: usize) -> Result<(i128, i128)> {
        let e = self.curve.floor_exponent(q.k, i) + EXACT_BITS;
        if !(0..100).contains(&e) {
            return Err(Error::Domain(format!(
                "generation {} beyond exact arithmetic range",
                q.k
            )));
        }
        let base = 3 * q.m[i] as i128 + self.offset_sign(q.k, i) as i128 * q.shift[i] as i128;
        let scale = 1i128 << e;
        let lo = base.checked_mul(scale);
        let hi = (base + 3).checked_mul(scale);
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(Error::Domain(
                "cube index beyond exact arithmetic range".into(),
            )),
        }
    }

    /// Exact closed containment `inner ⊆ outer`.
    pub fn contains_exact(&self, outer: &DyadicGammaCube, inner: &DyadicGammaCube) -> Result<bool> {
        for i in 0..self.dim() {
            let (a, b) = self.exact_interval(outer, i)?;
            let (c, e) = self.exact_interval(inner, i)?;
            if c < a || e > b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact half-open membership of a dyadic-rational point.
    pub fn contains_point_exact(&self, q: &DyadicGammaCube, x: &[f64]) -> Result<bool> {
        for (i, &xi) in x.iter().enumerate() {
            let p = exact_coordinate(xi)?;
            let (a, b) = self.exact_interval(q, i)?;
            if p < a || p >= b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The smallest cube of the same grid strictly containing `q`: the first
    /// coarser generation whose cube through `q`'s lower corner covers `q`.
    /// With the alternating convention this is always generation `k + 1`.
    pub fn parent(&self, q: &DyadicGammaCube) -> Result<DyadicGammaCube> {
        self.check_generation(q.k)?;
        for k in (q.k + 1)..=self.k_max {
            let candidate = self.enclosing_at(q, k)?;
            if self.contains_exact(&candidate, q)? {
                return Ok(candidate);
            }
        }
        Err(Error::NoParent(q.k))
    }

    /// Cube of generation `k ≥ q.k` containing the lower corner of `q`,
    /// computed in exact arithmetic.
    fn enclosing_at(&self, q: &DyadicGammaCube, k: i32) -> Result<DyadicGammaCube> {
        let m = (0..self.dim())
            .map(|i| {
                let (lo, _) = self.exact_interval(q, i)?;
                let e = self.curve.floor_exponent(k, i) + EXACT_BITS;
                if !(0..100).contains(&e) {
                    return Err(Error::Domain(format!(
                        "generation {k} beyond exact arithmetic range"
                    )));
                }
                let side = 1i128 << e;
                let shifted = lo - self.offset_sign(k, i) as i128 * q.shift[i] as i128 * side;
                Ok(div_floor(shifted, 3 * side) as i64)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DyadicGammaCube {
            k,
            m,
            shift: q.shift.clone(),
        })
    }

    /// Generation `k - 1` cubes of the same grid contained in `q`.
    pub fn children(&self, q: &DyadicGammaCube) -> Result<Vec<DyadicGammaCube>> {
        self.check_generation(q.k)?;
        let kc = q.k - 1;
        self.check_generation(kc)?;
        let mut ranges = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let (lo, hi) = self.exact_interval(q, i)?;
            let e = self.curve.floor_exponent(kc, i) + EXACT_BITS;
            let side = 1i128 << e;
            let off = self.offset_sign(kc, i) as i128 * q.shift[i] as i128 * side;
            // child m' spans [ (3m'+off')·side, (3m'+3+off')·side ) in 3·2^bits units
            let first = div_ceil(lo - off, 3 * side);
            let last = div_floor(hi - off, 3 * side) - 1;
            ranges.push((first as i64, last as i64));
        }
        let mut out = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        if ranges.iter().any(|r| r.1 < r.0) {
            return Ok(out);
        }
        loop {
            out.push(DyadicGammaCube {
                k: kc,
                m: idx.clone(),
                shift: q.shift.clone(),
            });
            let mut axis = 0;
            loop {
                if axis == idx.len() {
                    return Ok(out);
                }
                idx[axis] += 1;
                if idx[axis] <= ranges[axis].1 {
                    break;
                }
                idx[axis] = ranges[axis].0;
                axis += 1;
            }
        }
    }

    /// Parent-ratio bound `C(d,γ)` for one shifted grid, by exhaustive scan of
    /// parent relations in a window of `window` cubes per axis around the
    /// origin at every generation.
    pub fn grid_constant_for_shift(&self, shift: &[u8], window: i64) -> Result<f64> {
        self.check_shift(shift)?;
        if self.k_min == self.k_max {
            return Err(Error::DegenerateWindow(self.k_min, self.k_max));
        }
        let mut worst = 0.0f64;
        for k in self.k_min..self.k_max {
            for q in self.window_cubes(shift, k, window) {
                match self.parent(&q) {
                    Ok(p) => worst = worst.max(p.scale() / q.scale()),
                    Err(Error::NoParent(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if worst == 0.0 {
            return Err(Error::DegenerateWindow(self.k_min, self.k_max));
        }
        Ok(worst)
    }

    /// The smallest `C` valid for every shifted grid.
    pub fn grid_constant(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for shift in self.shifts() {
            worst = worst.max(self.grid_constant_for_shift(&shift, 3)?);
        }
        Ok(worst)
    }

    /// `κ = C + 1`.
    pub fn kappa(&self) -> Result<f64> {
        Ok(self.grid_constant()? + 1.0)
    }

    /// Cubes of generation `k` with every index in `[-window, window)`.
    pub fn window_cubes(&self, shift: &[u8], k: i32, window: i64) -> Vec<DyadicGammaCube> {
        let d = self.dim();
        let mut out = Vec::new();
        let mut idx = vec![-window; d];
        loop {
            out.push(DyadicGammaCube {
                k,
                m: idx.clone(),
                shift: shift.to_vec(),
            });
            let mut axis = 0;
            loop {
                if axis == d {
                    return out;
                }
                idx[axis] += 1;
                if idx[axis] < window {
                    break;
                }
                idx[axis] = -window;
                axis += 1;
            }
        }
    }

    /// Concentric γ-cube with `l = 2^{k+2}`; it contains `3Q`.
    pub fn enlarge_to_gamma_cube(&self, q: &DyadicGammaCube) -> GammaCube {
        let c = self.cube(q);
        GammaCube::new(&self.curve, c.center, ((q.k + 2) as f64).exp2())
            .expect("positive scale and matching dimension")
    }

    /// Largest concentric γ-cube inside `q`; its scale is at least `l_Q / 2`.
    pub fn embed_gamma_in_dyadic(&self, q: &DyadicGammaCube) -> GammaCube {
        let c = self.cube(q);
        let l = (0..self.dim())
            .map(|i| (self.curve.floor_exponent(q.k, i) as f64 / self.curve.exponents()[i]).exp2())
            .fold(f64::INFINITY, f64::min);
        GammaCube::new(&self.curve, c.center, l).expect("positive scale and matching dimension")
    }
}

/// Side lengths `2^{⌊kα_i⌋}` of generation `k`.
pub fn cube_sides(curve: &MonomialCurve, k: i32) -> Vec<f64> {
    (0..curve.dim())
        .map(|i| (curve.floor_exponent(k, i) as f64).exp2())
        .collect()
}

/// Exact numerator of `x` over `3·2^EXACT_BITS`; `x` must be a dyadic
/// rational with at most `EXACT_BITS` fractional bits.
fn exact_coordinate(x: f64) -> Result<i128> {
    let v = x * (EXACT_BITS as f64).exp2();
    if v.fract() != 0.0 || v.abs() >= 2f64.powi(120) {
        return Err(Error::Domain(format!(
            "{x} is not representable in exact grid arithmetic"
        )));
    }
    Ok(3 * v as i128)
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

/// Outcome of an exhaustive property scan.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub checked: u64,
    pub violations: u64,
    /// A few violating cubes or points, for diagnostics.
    pub examples: Vec<String>,
}

impl PropertyReport {
    fn new(property: &str) -> Self {
        PropertyReport {
            property: property.into(),
            ..Default::default()
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < 8 {
                self.examples.push(what());
            }
        }
    }

    pub fn holds(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

impl GridConfig {
    /// Sample points at spacing `side/4` over `window` cubes per axis, plus
    /// the unshifted cube corners, so half-open boundaries are exercised.
    fn window_points(&self, k: i32, window: i64) -> Vec<Vec<f64>> {
        let sides = self.cube_sides(k);
        let d = self.dim();
        let per_axis = (8 * window) as usize;
        let mut out = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            out.push(
                (0..d)
                    .map(|i| sides[i] * (idx[i] as f64 / 4.0 - window as f64))
                    .collect(),
            );
            let mut axis = 0;
            loop {
                if axis == d {
                    return out;
                }
                idx[axis] += 1;
                if idx[axis] < per_axis {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }

    /// Property (1): every sample point lies in exactly one cube of each
    /// generation.
    pub fn check_partition(&self, shift: &[u8], window: i64) -> Result<PropertyReport> {
        let mut rep = PropertyReport::new("partition");
        for k in self.k_min..=self.k_max {
            for x in self.window_points(k, window) {
                let q = self.locate(shift, k, &x)?;
                let mut hits = 0;
                if self.contains_point_exact(&q, &x)? {
                    hits += 1;
                }
                // Cubes are products of per-axis intervals, so uniqueness
                // reduces to the neighbouring intervals of every axis.
                for i in 0..self.dim() {
                    for step in [-1i64, 1] {
                        let mut nb = q.clone();
                        nb.m[i] += step;
                        let (a, b) = self.exact_interval(&nb, i)?;
                        let p = exact_coordinate(x[i])?;
                        if a <= p && p < b {
                            hits += 1;
                        }
                    }
                }
                rep.record(hits == 1, || format!("k={k} x={x:?} hits={hits}"));
            }
        }
        Ok(rep)
    }

    /// Property (2), checked through consecutive generations: every cube of
    /// generation `k` lies inside a single cube of generation `k + 1`.
    /// Together with the partition property this gives nesting across any
    /// pair of generations.
    pub fn check_nesting(&self, shift: &[u8], window: i64) -> Result<PropertyReport> {
        let mut rep = PropertyReport::new("nesting");
        for k in self.k_min..self.k_max {
            // Enough children to span `window` parents per axis.
            let span: i64 = (0..self.dim())
                .map(|i| {
                    1i64 << (self.curve.floor_exponent(k + 1, i) - self.curve.floor_exponent(k, i))
                })
                .max()
                .unwrap_or(1);
            for q in self.window_cubes(shift, k, window * span) {
                let outer = self.enclosing_at(&q, k + 1)?;
                let ok = self.contains_exact(&outer, &q)?;
                rep.record(ok, || {
                    format!("k={k} m={:?} straddles generation {}", q.m, k + 1)
                });
            }
        }
        Ok(rep)
    }

    /// Property (3): `l_{Q^{(1)}} ≤ C l_Q` over the scan window.
    pub fn check_parent_bound(&self, shift: &[u8], c: f64, window: i64) -> Result<PropertyReport> {
        let mut rep = PropertyReport::new("parent-bound");
        for k in self.k_min..self.k_max {
            for q in self.window_cubes(shift, k, window) {
                match self.parent(&q) {
                    Ok(p) => {
                        let strict = self.contains_exact(&p, &q)? && p != q;
                        let ratio = p.scale() / q.scale();
                        rep.record(strict && ratio <= c, || {
                            format!("k={k} m={:?} ratio={ratio}", q.m)
                        });
                    }
                    Err(Error::NoParent(_)) => {
                        rep.record(false, || format!("k={k} m={:?} no parent", q.m))
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(rep)
    }

    /// Property (4) at finite truncation: the located cubes through each
    /// sample point form a decreasing chain down to `2^{k_min}`.
    pub fn check_chains(&self, shift: &[u8], window: i64) -> Result<PropertyReport> {
        let mut rep = PropertyReport::new("shrinking-chains");
        for x in self.window_points(self.k_min, window) {
            let mut prev: Option<DyadicGammaCube> = None;
            let mut ok = true;
            for k in (self.k_min..=self.k_max).rev() {
                let q = self.locate(shift, k, &x)?;
                ok &= self.contains_point_exact(&q, &x)?;
                if let Some(p) = &prev {
                    ok &= self.contains_exact(p, &q)?;
                }
                prev = Some(q);
            }
            let last = prev.expect("non-empty window");
            ok &= last.scale() == (self.k_min as f64).exp2();
            rep.record(ok, || format!("x={x:?}"));
        }
        Ok(rep)
    }

    /// `parent(locate(k, x)) = locate(k + 1, x)`.
    pub fn check_locate_parent(&self, shift: &[u8], window: i64) -> Result<PropertyReport> {
        let mut rep = PropertyReport::new("locate-parent-coherence");
        for k in self.k_min..self.k_max {
            for x in self.window_points(k, window) {
                let q = self.locate(shift, k, &x)?;
                let up = self.locate(shift, k + 1, &x)?;
                let ok = match self.parent(&q) {
                    Ok(p) => p == up,
                    Err(_) => false,
                };
                rep.record(ok, || format!("k={k} x={x:?}"));
            }
        }
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(d: usize) -> GridConfig {
        GridConfig::new(
            MonomialCurve::standard(d).unwrap(),
            -4,
            4,
            ShiftConvention::AlternatingThird,
        )
        .unwrap()
    }

    #[test]
    fn sides() {
        assert_eq!(grid(2).cube_sides(3), vec![8.0, 64.0]);
        assert_eq!(grid(2).cube_sides(-1), vec![0.5, 0.25]);
        assert_eq!(grid(3).cube_sides(0), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn locate_examples() {
        let g = grid(2);
        let z = [0u8, 0];
        assert_eq!(g.locate(&z, 0, &[0.5, 0.5]).unwrap().m, vec![0, 0]);
        assert_eq!(g.locate(&z, 0, &[1.0, 0.5]).unwrap().m, vec![1, 0]);
        let q = g.locate(&z, 1, &[2.5, 3.9]).unwrap();
        assert_eq!(q.m, vec![1, 0]);
        assert_eq!(g.cube(&q).sides, vec![2.0, 4.0]);
        assert!(matches!(
            g.locate(&z, 5, &[0.0, 0.0]),
            Err(Error::GenerationOutOfRange { k: 5, .. })
        ));
    }

    #[test]
    fn parent_examples() {
        let g = grid(2);
        let q = |k, m: [i64; 2]| DyadicGammaCube::new(k, m.to_vec(), vec![0, 0]).unwrap();
        assert_eq!(g.parent(&q(0, [0, 0])).unwrap(), q(1, [0, 0]));
        assert_eq!(g.parent(&q(0, [3, 7])).unwrap(), q(1, [1, 1]));
        assert_eq!(g.parent(&q(-2, [0, 0])).unwrap(), q(-1, [0, 0]));
        assert_eq!(g.parent(&q(4, [0, 0])), Err(Error::NoParent(4)));
    }

    #[test]
    fn children_tile_parent() {
        let g = grid(2);
        for shift in g.shifts() {
            let q = DyadicGammaCube::new(1, vec![-1, 2], shift).unwrap();
            let kids = g.children(&q).unwrap();
            assert_eq!(kids.len(), 8);
            let vol: f64 = kids.iter().map(|c| g.cube(c).volume()).sum();
            assert_eq!(vol, g.cube(&q).volume());
            for c in &kids {
                assert_eq!(g.parent(c).unwrap(), q);
            }
        }
    }

    #[test]
    fn grid_constant_and_kappa() {
        for d in [2, 3] {
            let g = grid(d);
            assert_eq!(g.grid_constant_for_shift(&vec![0; d], 3).unwrap(), 2.0);
            assert_eq!(g.grid_constant().unwrap(), 2.0);
            assert_eq!(g.kappa().unwrap(), 3.0);
        }
        let single = GridConfig::new(
            MonomialCurve::standard(2).unwrap(),
            0,
            0,
            ShiftConvention::AlternatingThird,
        )
        .unwrap();
        assert_eq!(single.grid_constant(), Err(Error::DegenerateWindow(0, 0)));
        assert!(GridConfig::new(
            MonomialCurve::standard(2).unwrap(),
            1,
            0,
            ShiftConvention::default()
        )
        .is_err());
    }

    #[test]
    fn dilation_of_cubes() {
        let q = Cube {
            center: vec![0.0, 0.0],
            sides: vec![1.0, 1.0],
        };
        assert_eq!(dilate_cube(&q, 3.0).unwrap().sides, vec![3.0, 3.0]);
        assert_eq!(dilate_cube(&q, 1.0).unwrap(), q);
        let r = Cube {
            center: vec![1.0, 2.0],
            sides: vec![2.0, 4.0],
        };
        assert_eq!(dilate_cube(&r, 9.0).unwrap().sides, vec![18.0, 36.0]);
        assert_eq!(dilate_cube(&r, 0.0), Err(Error::InvalidScale(0.0)));
    }

    #[test]
    fn enlargement_contains_triple() {
        let g = grid(2);
        let q0 = DyadicGammaCube::new(0, vec![0, 0], vec![0, 0]).unwrap();
        let big = g.enlarge_to_gamma_cube(&q0);
        assert_eq!(big.sides, vec![4.0, 16.0]);
        assert_eq!(big.center, vec![0.5, 0.5]);
        assert!(big
            .as_cube()
            .contains_cube(&g.cube(&q0).dilate(3.0).unwrap()));
        let small = DyadicGammaCube::new(-2, vec![0, 0], vec![0, 0]).unwrap();
        assert_eq!(g.enlarge_to_gamma_cube(&small).sides, vec![1.0, 1.0]);
    }

    #[test]
    fn embedding_examples() {
        let g = grid(2);
        let q0 = DyadicGammaCube::new(0, vec![0, 0], vec![0, 0]).unwrap();
        let e0 = g.embed_gamma_in_dyadic(&q0);
        assert_eq!((e0.l, e0.sides.clone()), (1.0, vec![1.0, 1.0]));
        let q1 = DyadicGammaCube::new(1, vec![0, 0], vec![0, 0]).unwrap();
        let e1 = g.embed_gamma_in_dyadic(&q1);
        assert_eq!(e1.l, 2.0);
        assert!(g.cube(&q1).contains_cube(&e1.as_cube()));
        let real = GridConfig::new(
            MonomialCurve::with_exponents(vec![1.0, 1.5]).unwrap(),
            -4,
            4,
            ShiftConvention::AlternatingThird,
        )
        .unwrap();
        for k in -3..=3 {
            let q = DyadicGammaCube::new(k, vec![1, -1], vec![1, 2]).unwrap();
            let e = real.embed_gamma_in_dyadic(&q);
            assert!(q.scale() <= 2.0 * e.l);
            assert!(real.cube(&q).contains_cube(&e.as_cube()));
        }
    }

    #[test]
    fn cube_json_record() {
        let q = DyadicGammaCube::new(-1, vec![2, -3], vec![1, 2]).unwrap();
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"grid_id":7,"k":-1,"m":[2,-3],"shift":[1,2]}"#);
        let back: DyadicGammaCube = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<DyadicGammaCube>(
            r#"{"grid_id":0,"k":0,"m":[0,0],"shift":[1,0]}"#
        )
        .is_err());
    }

    #[test]
    fn alternating_grid_properties_d2() {
        let g = grid(2);
        for shift in g.shifts() {
            assert!(g.check_partition(&shift, 2).unwrap().holds());
            assert!(g.check_nesting(&shift, 3).unwrap().holds());
            assert!(g.check_parent_bound(&shift, 2.0, 3).unwrap().holds());
            assert!(g.check_chains(&shift, 1).unwrap().holds());
            assert!(g.check_locate_parent(&shift, 1).unwrap().holds());
        }
    }

    #[test]
    fn constant_third_shift_breaks_nesting() {
        let g = GridConfig::new(
            MonomialCurve::standard(2).unwrap(),
            -4,
            4,
            ShiftConvention::ConstantThird,
        )
        .unwrap();
        // Unshifted grid is the standard dyadic one and nests.
        assert!(g.check_nesting(&[0, 0], 3).unwrap().holds());
        // A one-third shift in the doubling coordinate does not.
        let rep = g.check_nesting(&[1, 0], 3).unwrap();
        assert!(rep.violations > 0);
        // In the quadrupling coordinate the constant offset nests.
        assert!(g.check_nesting(&[0, 1], 3).unwrap().holds());
        // Partition is unaffected by the convention.
        assert!(g.check_partition(&[1, 1], 2).unwrap().holds());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn arbitrary_pairs_nest_or_are_disjoint(
                d in 2usize..4,
                shift_id in 0u32..27,
                k1 in -4i32..=4, k2 in -4i32..=4,
                x in prop::collection::vec(-64i64..64, 3),
                y in prop::collection::vec(-64i64..64, 3),
            ) {
                let g = grid(d);
                let shift: Vec<u8> = (0..d).map(|i| ((shift_id / 3u32.pow(i as u32)) % 3) as u8).collect();
                let px: Vec<f64> = x[..d].iter().map(|&v| v as f64 / 16.0).collect();
                let py: Vec<f64> = y[..d].iter().map(|&v| v as f64 / 16.0).collect();
                let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
                let q1 = g.locate(&shift, lo, &px).unwrap();
                let q2 = g.locate(&shift, hi, &py).unwrap();
                let inside = g.contains_exact(&q2, &q1).unwrap();
                let disjoint = (0..d).any(|i| {
                    let (a, b) = g.exact_interval(&q1, i).unwrap();
                    let (c, e) = g.exact_interval(&q2, i).unwrap();
                    b <= c || e <= a
                });
                prop_assert!(inside || disjoint);
            }
        }
    }
}
