//! Truncated Hilbert transforms along the curve and their variation.
//!
//! Every `dt/t` integral is computed in the variable `u = ln|t|` on a mesh
//! with a fixed number of cells per octave, so annuli whose endpoints are
//! powers of two share nodes exactly and telescoping sums agree with the
//! integral over the union.

use serde::{Deserialize, Serialize};

use crate::curve::MonomialCurve;
use crate::error::{Error, Result};
use crate::lattice::Field;
use crate::quadrature::GaussLegendre;

/// Mesh density of the logarithmic quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Quadrature {
    pub cells_per_octave: usize,
    /// Gauss–Legendre points per cell.
    pub order: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            cells_per_octave: 64,
            order: 2,
        }
    }
}

impl Quadrature {
    pub fn new(cells_per_octave: usize, order: usize) -> Result<Self> {
        if cells_per_octave == 0 || order == 0 {
            return Err(Error::Config(
                "quadrature density and order must be positive".into(),
            ));
        }
        Ok(Quadrature {
            cells_per_octave,
            order,
        })
    }

    /// `(t, weight)` pairs for `∫_a^b g(t) dt/t`.
    pub fn log_mesh(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let octaves = (b / a).log2();
        // Round before ceil so that dyadic endpoints land on the nominal
        // cell count despite rounding in the logarithm.
        let raw = self.cells_per_octave as f64 * octaves;
        let cells = if (raw - raw.round()).abs() < 1e-9 {
            raw.round()
        } else {
            raw.ceil()
        };
        let cells = (cells as usize).max(1);
        GaussLegendre::new(self.order)
            .composite(a.ln(), b.ln(), cells)
            .into_iter()
            .map(|(u, w)| (u.exp(), w))
            .collect()
    }
}

/// Precomputed curve points of an annulus `a < |t| ≤ b`.
#[derive(Debug, Clone)]
struct Annulus {
    d: usize,
    /// `γ(t)` for each node, flattened.
    plus: Vec<f64>,
    /// `γ(-t)` for each node, flattened.
    minus: Vec<f64>,
    weights: Vec<f64>,
}

impl Annulus {
    fn new(curve: &MonomialCurve, a: f64, b: f64, quad: &Quadrature) -> Self {
        let d = curve.dim();
        let mesh = quad.log_mesh(a, b);
        let mut plus = vec![0.0; d * mesh.len()];
        let mut minus = vec![0.0; d * mesh.len()];
        for (n, (t, _)) in mesh.iter().enumerate() {
            curve.eval_into(*t, &mut plus[n * d..(n + 1) * d]);
            curve.eval_into(-*t, &mut minus[n * d..(n + 1) * d]);
        }
        Annulus {
            d,
            plus,
            minus,
            weights: mesh.iter().map(|m| m.1).collect(),
        }
    }

    /// `∫_{a<|t|≤b} f(x - γ(t)) dt/t`.
    fn integrate<F: Field + ?Sized>(&self, f: &F, x: &[f64], buf: &mut [f64]) -> f64 {
        let d = self.d;
        let mut acc = 0.0;
        for (n, w) in self.weights.iter().enumerate() {
            for i in 0..d {
                buf[i] = x[i] - self.plus[n * d + i];
            }
            let fp = f.value(buf);
            for i in 0..d {
                buf[i] = x[i] - self.minus[n * d + i];
            }
            let fm = f.value(buf);
            acc += w * (fp - fm);
        }
        acc
    }
}

fn check_point<F: Field + ?Sized>(curve: &MonomialCurve, f: &F, x: &[f64]) -> Result<()> {
    if f.dim() != curve.dim() {
        return Err(Error::DimensionMismatch {
            expected: curve.dim(),
            got: f.dim(),
        });
    }
    if x.len() != curve.dim() {
        return Err(Error::DimensionMismatch {
            expected: curve.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// `∫_{s<|t|<R} f(x - γ(t)) dt/t`.
pub fn truncated_hilbert<F: Field + ?Sized>(
    curve: &MonomialCurve,
    f: &F,
    x: &[f64],
    s: f64,
    outer: f64,
    quad: &Quadrature,
) -> Result<f64> {
    check_point(curve, f, x)?;
    if !(s > 0.0) || !(s < outer) || !outer.is_finite() {
        return Err(Error::EmptyAnnulus { inner: s, outer });
    }
    let mut buf = vec![0.0; curve.dim()];
    Ok(Annulus::new(curve, s, outer, quad).integrate(f, x, &mut buf))
}

/// `∫_{2^j<|t|≤2^{j+1}} f(x - γ(t)) dt/t`.
pub fn single_scale_average<F: Field + ?Sized>(
    curve: &MonomialCurve,
    f: &F,
    x: &[f64],
    j: i32,
    quad: &Quadrature,
) -> Result<f64> {
    let s = (j as f64).exp2();
    truncated_hilbert(curve, f, x, s, 2.0 * s, quad)
}

/// Every pair `(2^a, 2^b)` with `s_min ≤ 2^a < 2^b ≤ R`.
pub fn dyadic_pairs(s_min: f64, outer: f64) -> Vec<(f64, f64)> {
    let a0 = s_min.log2().ceil() as i32;
    let b0 = outer.log2().floor() as i32;
    let mut out = Vec::new();
    for a in a0..=b0 {
        for b in (a + 1)..=b0 {
            out.push(((a as f64).exp2(), (b as f64).exp2()));
        }
    }
    out
}

/// `max |∫_{ε<|t|<ρ} f(x-γ(t)) dt/t|` over the candidate pairs.
pub fn maximal_truncation<F: Field + ?Sized>(
    curve: &MonomialCurve,
    f: &F,
    x: &[f64],
    candidates: &[(f64, f64)],
    quad: &Quadrature,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::Config("empty truncation candidate set".into()));
    }
    let mut best = 0.0f64;
    for &(e, r) in candidates {
        best = best.max(truncated_hilbert(curve, f, x, e, r, quad)?.abs());
    }
    Ok(best)
}

/// Exact `r`-variation `sup (Σ |a_{i_{k+1}} - a_{i_k}|^r)^{1/r}` over increasing
/// index subsequences.
pub fn r_variation(a: &[f64], r: f64) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::UnsupportedExponent(r));
    }
    if a.is_empty() {
        return Err(Error::EmptySequence);
    }
    let n = a.len();
    // The endpoint jump is optimal for monotone input. Returning it directly
    // keeps r = 1 exact, where summing the increments can round up.
    if a.windows(2).all(|w| w[0] <= w[1]) || a.windows(2).all(|w| w[0] >= w[1]) {
        return Ok((a[n - 1] - a[0]).abs());
    }
    let mut best = vec![0.0f64; n];
    // Increment of the optimal chain ending at j when that chain has a single
    // step; the answer is then returned without the r-th power round trip.
    let mut jump: Vec<Option<f64>> = vec![None; n];
    let mut top = (0.0f64, None);
    for j in 1..n {
        let mut b = 0.0f64;
        for i in 0..j {
            let diff = (a[j] - a[i]).abs();
            let v = best[i] + if r == 1.0 { diff } else { diff.powf(r) };
            if v > b {
                b = v;
                jump[j] = if best[i] == 0.0 { Some(diff) } else { None };
            }
        }
        best[j] = b;
        if b > top.0 {
            top = (b, jump[j]);
        }
    }
    Ok(match top {
        (_, Some(diff)) => diff,
        (v, None) if r == 1.0 => v,
        (v, None) => v.powf(1.0 / r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationKind {
    Dyadic,
    General,
}

/// Finite set of truncation radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TruncationRecord")]
pub struct TruncationSet {
    radii: Vec<f64>,
    kind: TruncationKind,
}

#[derive(Deserialize)]
struct TruncationRecord {
    radii: Vec<f64>,
    kind: TruncationKind,
}

impl TryFrom<TruncationRecord> for TruncationSet {
    type Error = Error;

    fn try_from(r: TruncationRecord) -> Result<Self> {
        match r.kind {
            TruncationKind::General => TruncationSet::general(r.radii),
            TruncationKind::Dyadic => {
                let set = TruncationSet::general(r.radii)?;
                let ls: Vec<f64> = set.radii.iter().map(|s| s.log2()).collect();
                let contiguous = ls.iter().all(|l| l.fract() == 0.0)
                    && ls.windows(2).all(|w| w[1] - w[0] == 1.0);
                if !contiguous {
                    return Err(Error::Config(
                        "dyadic truncation set must be {2^l} for contiguous l".into(),
                    ));
                }
                Ok(TruncationSet {
                    kind: TruncationKind::Dyadic,
                    ..set
                })
            }
        }
    }
}

impl TruncationSet {
    /// `{2^l : l_min ≤ l ≤ l_max}`.
    pub fn dyadic(l_min: i32, l_max: i32) -> Result<Self> {
        if l_min > l_max {
            return Err(Error::Config(format!(
                "empty dyadic range [{l_min}, {l_max}]"
            )));
        }
        Ok(TruncationSet {
            radii: (l_min..=l_max).map(|l| (l as f64).exp2()).collect(),
            kind: TruncationKind::Dyadic,
        })
    }

    pub fn general(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Config("truncation set is empty".into()));
        }
        if radii.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Config(
                "truncation radii must be positive and finite".into(),
            ));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "truncation radii must be strictly increasing".into(),
            ));
        }
        Ok(TruncationSet {
            radii,
            kind: TruncationKind::General,
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn kind(&self) -> TruncationKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.radii.last().expect("nonempty")
    }

    pub fn min(&self) -> f64 {
        self.radii[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationParams {
    pub r: f64,
    pub outer_cutoff: f64,
}

impl VariationParams {
    pub fn new(r: f64, outer_cutoff: f64) -> Result<Self> {
        if !(r > 2.0) || !r.is_finite() {
            return Err(Error::Config(format!(
                "variation exponent must exceed 2, got {r}"
            )));
        }
        if !(outer_cutoff > 0.0) || !outer_cutoff.is_finite() {
            return Err(Error::InvalidScale(outer_cutoff));
        }
        Ok(VariationParams { r, outer_cutoff })
    }
}

/// `T f(x) = V^r{H_s f(x)}_{s∈I}` with every annulus mesh precomputed.
#[derive(Debug, Clone)]
pub struct VariationOperator {
    curve: MonomialCurve,
    set: TruncationSet,
    params: VariationParams,
    /// Annuli between consecutive radii of `I`.
    annuli: Vec<Annulus>,
    /// `max I < |t| < R`; absent when `R = max I`.
    tail: Option<Annulus>,
}

impl VariationOperator {
    pub fn new(
        curve: &MonomialCurve,
        set: &TruncationSet,
        params: VariationParams,
        quad: &Quadrature,
    ) -> Result<Self> {
        if params.outer_cutoff < set.max() {
            return Err(Error::Config(format!(
                "outer cutoff {} is below the largest radius {}",
                params.outer_cutoff,
                set.max()
            )));
        }
        let annuli = set
            .radii
            .windows(2)
            .map(|w| Annulus::new(curve, w[0], w[1], quad))
            .collect();
        let tail = (params.outer_cutoff > set.max())
            .then(|| Annulus::new(curve, set.max(), params.outer_cutoff, quad));
        Ok(VariationOperator {
            curve: curve.clone(),
            set: set.clone(),
            params,
            annuli,
            tail,
        })
    }

    pub fn curve(&self) -> &MonomialCurve {
        &self.curve
    }

    pub fn truncations(&self) -> &TruncationSet {
        &self.set
    }

    pub fn params(&self) -> VariationParams {
        self.params
    }

    /// Integrals over the annuli `s_k < |t| ≤ s_{k+1}`.
    pub fn annulus_integrals<F: Field + ?Sized>(&self, f: &F, x: &[f64]) -> Result<Vec<f64>> {
        check_point(&self.curve, f, x)?;
        let mut buf = vec![0.0; self.curve.dim()];
        Ok(self
            .annuli
            .iter()
            .map(|a| a.integrate(f, x, &mut buf))
            .collect())
    }

    /// `H_{s_k} f(x)` for every `s_k ∈ I`, with outer cutoff `R`.
    pub fn transforms<F: Field + ?Sized>(&self, f: &F, x: &[f64]) -> Result<Vec<f64>> {
        let pieces = self.annulus_integrals(f, x)?;
        let mut buf = vec![0.0; self.curve.dim()];
        let mut h = self
            .tail
            .as_ref()
            .map_or(0.0, |t| t.integrate(f, x, &mut buf));
        let mut out = vec![0.0; self.set.len()];
        out[self.set.len() - 1] = h;
        for k in (0..pieces.len()).rev() {
            h += pieces[k];
            out[k] = h;
        }
        Ok(out)
    }

    /// `T f(x)`. Only differences of transforms enter, so the tail beyond
    /// `max I` is not integrated.
    pub fn evaluate<F: Field + ?Sized>(&self, f: &F, x: &[f64]) -> Result<f64> {
        let pieces = self.annulus_integrals(f, x)?;
        r_variation(&partial_sums(&pieces), self.params.r)
    }

    /// `Σ_k |∫_{s_k<|t|≤s_{k+1}}|`, which dominates `T f(x)`.
    pub fn l1_sum<F: Field + ?Sized>(&self, f: &F, x: &[f64]) -> Result<f64> {
        Ok(self.annulus_integrals(f, x)?.iter().map(|v| v.abs()).sum())
    }
}

/// `(0, a_0, a_0 + a_1, …)`.
pub fn partial_sums(pieces: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(pieces.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for p in pieces {
        acc += p;
        out.push(acc);
    }
    out
}

/// One-shot `T f(x)`; build a [`VariationOperator`] to evaluate many points.
pub fn variation_operator<F: Field + ?Sized>(
    curve: &MonomialCurve,
    f: &F,
    x: &[f64],
    set: &TruncationSet,
    params: VariationParams,
    quad: &Quadrature,
) -> Result<f64> {
    VariationOperator::new(curve, set, params, quad)?.evaluate(f, x)
}

/// The sample points `1 + k/(n-1)` of `[1, 2]`.
pub fn short_variation_samples(s_samples: usize) -> Vec<f64> {
    (0..s_samples)
        .map(|k| 1.0 + k as f64 / (s_samples - 1) as f64)
        .collect()
}

/// 2-variation of `s ↦ ∫_{s≤|u|≤2} f(x - γ(2^j u)) du/u` over `s_samples`
/// uniform points of `[1, 2]`.
pub fn short_two_variation<F: Field + ?Sized>(
    curve: &MonomialCurve,
    f: &F,
    x: &[f64],
    j: i32,
    s_samples: usize,
    quad: &Quadrature,
) -> Result<f64> {
    if s_samples < 2 {
        return Err(Error::Config(format!(
            "need at least two s samples, got {s_samples}"
        )));
    }
    let scale = (j as f64).exp2();
    let mut values = Vec::with_capacity(s_samples);
    for s in short_variation_samples(s_samples) {
        values.push(if s >= 2.0 {
            0.0
        } else {
            truncated_hilbert(curve, f, x, scale * s, 2.0 * scale, quad)?
        });
    }
    r_variation(&values, 2.0)
}
