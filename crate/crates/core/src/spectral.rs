//! Fourier-side checks for the measures
//! `⟨ν_{j,s}, f⟩ = ∫_{s≤|u|≤2} f(γ(2^j u)) du/u`.
//!
//! Frequencies are measured in the gauge `ρ(ξ) = max_i |ξ_i|^{1/α_i}`, so
//! `ρ(2^{jD}ξ) = 2^j ρ(ξ)`.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::curve::{dilate_point, MonomialCurve};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusMeasure {
    pub j: i32,
    pub s: f64,
    pub curve: MonomialCurve,
}

impl AnnulusMeasure {
    pub fn new(curve: &MonomialCurve, j: i32, s: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&s) {
            return Err(Error::Domain(format!("s must lie in [1, 2], got {s}")));
        }
        Ok(AnnulusMeasure {
            j,
            s,
            curve: curve.clone(),
        })
    }
}

/// Mesh-doubling control for [`measure_fourier_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierConfig {
    pub order: usize,
    /// Stop once doubling the mesh moves the value by less than this.
    pub tol: f64,
    /// Give up, unconverged, past this many cells.
    pub max_cells: usize,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            order: 8,
            tol: 1e-12,
            max_cells: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierValue {
    pub value: Complex64,
    pub cells: usize,
    pub converged: bool,
}

/// `ν̂_{j,s}(ξ) = ∫_{s≤|u|≤2} e^{iξ·γ(2^j u)} du/u`.
pub fn measure_fourier(m: &AnnulusMeasure, xi: &[f64]) -> Result<Complex64> {
    Ok(measure_fourier_with(m, xi, &FourierConfig::default())?.value)
}

pub fn measure_fourier_with(
    m: &AnnulusMeasure,
    xi: &[f64],
    cfg: &FourierConfig,
) -> Result<FourierValue> {
    let d = m.curve.dim();
    if xi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: xi.len(),
        });
    }
    let scale = (m.j as f64).exp2();
    let alpha = m.curve.exponents();
    // Coefficients of the phase in u: ξ_i 2^{jα_i}, split by parity of α_i.
    let coeff: Vec<f64> = (0..d).map(|i| xi[i] * scale.powf(alpha[i])).collect();
    if coeff.iter().all(|c| *c == 0.0) || m.s == 2.0 {
        return Ok(FourierValue {
            value: Complex64::new(0.0, 0.0),
            cells: 0,
            converged: true,
        });
    }
    let odd: Vec<bool> = match m.curve.integer_exponents() {
        Some(a) => a.iter().map(|e| e % 2 != 0).collect(),
        None => return Err(Error::UnsupportedExponent(alpha[0])),
    };
    let slope: f64 = (0..d)
        .map(|i| coeff[i].abs() * alpha[i] * 2f64.powf(alpha[i] - 1.0))
        .sum();
    let mut cells = ((slope * (2.0 - m.s)) / std::f64::consts::PI)
        .ceil()
        .max(4.0) as usize;
    let gl = GaussLegendre::new(cfg.order);
    let integrate = |cells: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let width = (2.0 - m.s) / cells as f64;
        for c in 0..cells {
            let mid = m.s + (c as f64 + 0.5) * width;
            for (x, gw) in gl.nodes.iter().zip(&gl.weights) {
                let u = mid + 0.5 * width * x;
                let w = 0.5 * width * gw;
                let (mut even, mut odd_phase) = (0.0, 0.0);
                let mut pow = 1.0;
                for i in 0..d {
                    pow *= u;
                    let p = coeff[i] * pow;
                    if odd[i] {
                        odd_phase += p;
                    } else {
                        even += p;
                    }
                }
                // e^{iφ(u)} − e^{iφ(−u)} = 2i e^{iφ_even} sin φ_odd.
                let amp = 2.0 * odd_phase.sin() / u * w;
                acc += Complex64::new(-even.sin() * amp, even.cos() * amp);
            }
        }
        acc
    };
    cells = cells.min(cfg.max_cells);
    let mut prev = integrate(cells);
    while cells * 2 <= cfg.max_cells {
        cells *= 2;
        let next = integrate(cells);
        if (next - prev).norm() < cfg.tol {
            return Ok(FourierValue {
                value: next,
                cells,
                converged: true,
            });
        }
        prev = next;
    }
    Ok(FourierValue {
        value: prev,
        cells,
        converged: false,
    })
}

/// `min(r^{-1/d}, r^{1/d})`.
pub fn decay_envelope(r: f64, d: usize) -> f64 {
    let e = 1.0 / d as f64;
    r.powf(-e).min(r.powf(e))
}

/// `count` frequencies with gauge spread log-uniformly over `[ρ_lo, ρ_hi]`
/// and random directions on the unit gauge sphere.
pub fn gauge_samples(
    curve: &MonomialCurve,
    seed: u64,
    count: usize,
    rho: (f64, f64),
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = curve.dim();
    let (a, b) = (rho.0.log2(), rho.1.log2());
    (0..count)
        .map(|_| {
            let face = rng.random_range(0..d);
            let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
            v[face] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let t = rng.random_range(a..=b).exp2();
            dilate_point(curve, t, &v).expect("positive scale")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub j: i32,
    pub s: f64,
    pub xi: Vec<f64>,
    /// `ρ(2^{jD}ξ)`.
    pub rho: f64,
    pub magnitude: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub fitted_c: f64,
    pub violations: usize,
    pub unconverged: usize,
    pub samples: Vec<DecaySample>,
}

/// Smallest `C` with `|ν̂_{j,s}(ξ)| ≤ C min(ρ^{-1/d}, ρ^{1/d})`,
/// `ρ = ρ(2^{jD}ξ)`, over every `(j, s, ξ)`.
pub fn decay_check(
    curve: &MonomialCurve,
    js: &[i32],
    ss: &[f64],
    xi_samples: &[Vec<f64>],
) -> Result<DecayReport> {
    let d = curve.dim();
    let cfg = FourierConfig::default();
    let mut samples = Vec::new();
    let mut unconverged = 0;
    let mut c = 0.0f64;
    for &j in js {
        for &s in ss {
            let m = AnnulusMeasure::new(curve, j, s)?;
            for xi in xi_samples {
                let v = measure_fourier_with(&m, xi, &cfg)?;
                unconverged += usize::from(!v.converged);
                let rho = (j as f64).exp2() * curve.gauge(xi);
                let bound = decay_envelope(rho, d);
                let magnitude = v.value.norm();
                if bound > 0.0 {
                    c = c.max(magnitude / bound);
                }
                samples.push(DecaySample {
                    j,
                    s,
                    xi: xi.clone(),
                    rho,
                    magnitude,
                    bound,
                });
            }
        }
    }
    let violations = samples
        .iter()
        .filter(|p| p.magnitude > c * p.bound * (1.0 + 1e-12))
        .count();
    Ok(DecayReport {
        fitted_c: c,
        violations,
        unconverged,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySlope {
    pub slope: f64,
    /// `(ρ, max |ν̂| over the octave starting at ρ)`.
    pub envelope: Vec<(f64, f64)>,
}

/// Least-squares slope of `log max|ν̂_{0,s}(ωv)|` against `log ρ(ωv)` with the
/// maximum taken per octave of `ω`.
pub fn ray_decay_slope(
    curve: &MonomialCurve,
    s: f64,
    direction: &[f64],
    octaves: (i32, i32),
    per_octave: usize,
) -> Result<RaySlope> {
    let m = AnnulusMeasure::new(curve, 0, s)?;
    let mut envelope = Vec::new();
    for o in octaves.0..=octaves.1 {
        let mut best = 0.0f64;
        for q in 0..per_octave {
            let w = (o as f64 + q as f64 / per_octave as f64).exp2();
            let xi: Vec<f64> = direction.iter().map(|v| v * w).collect();
            best = best.max(measure_fourier(&m, &xi)?.norm());
        }
        let xi0: Vec<f64> = direction.iter().map(|v| v * (o as f64).exp2()).collect();
        envelope.push((curve.gauge(&xi0), best));
    }
    let pts: Vec<(f64, f64)> = envelope.iter().map(|(r, v)| (r.ln(), v.ln())).collect();
    Ok(RaySlope {
        slope: least_squares_slope(&pts)?,
        envelope,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<_> = pts
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if pts.len() < 2 {
        return Err(Error::EmptySequence);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// A complex field on the periodic lattice `(hZ / nhZ)^d`, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub n: usize,
    pub h: f64,
    pub values: Vec<Complex64>,
}

impl PeriodicField {
    pub fn new(n: usize, d: usize, h: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != n.pow(d as u32) {
            return Err(Error::DimensionMismatch {
                expected: n.pow(d as u32),
                got: values.len(),
            });
        }
        Ok(PeriodicField { n, h, values })
    }

    pub fn dim(&self) -> usize {
        (self.values.len() as f64).log(self.n as f64).round() as usize
    }

    /// The plane wave with integer frequency vector `m`.
    pub fn mode(n: usize, h: f64, m: &[i64]) -> Self {
        let d = m.len();
        let values = (0..n.pow(d as u32))
            .map(|flat| {
                let mut rest = flat;
                let mut phase = 0.0;
                for i in (0..d).rev() {
                    phase += (m[i] * (rest % n) as i64) as f64;
                    rest /= n;
                }
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase / n as f64)
            })
            .collect();
        PeriodicField { n, h, values }
    }

    /// Angular frequency of DFT index `idx` on every axis.
    pub fn frequency(&self, idx: &[usize]) -> Vec<f64> {
        let n = self.n as i64;
        idx.iter()
            .map(|&m| {
                let m = m as i64;
                let signed = if m < n / 2 { m } else { m - n };
                2.0 * std::f64::consts::PI * signed as f64 / (n as f64 * self.h)
            })
            .collect()
    }

    /// Unnormalized DFT along every axis.
    pub fn dft(&self) -> Vec<Complex64> {
        let d = self.dim();
        let n = self.n;
        let mut data = self.values.clone();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..d {
            let stride = n.pow((d - 1 - axis) as u32);
            for start in 0..data.len() {
                if (start / stride) % n != 0 {
                    continue;
                }
                for (t, v) in line.iter_mut().enumerate() {
                    *v = data[start + t * stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    data[start + t * stride] = *v;
                }
            }
        }
        data
    }
}

/// Real random fields: white noise and its 3-point periodic smoothing.
pub fn l2_corpus(n: usize, d: usize, h: f64, seed: u64, count: usize) -> Vec<PeriodicField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = n.pow(d as u32);
    (0..count)
        .map(|i| {
            let noise: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let values = if i % 2 == 0 {
                noise
            } else {
                (0..len)
                    .map(|flat| {
                        let prev = (flat + len - 1) % len;
                        let next = (flat + 1) % len;
                        (noise[prev] + 2.0 * noise[flat] + noise[next]) / 4.0
                    })
                    .collect()
            };
            PeriodicField {
                n,
                h,
                values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            }
        })
        .collect()
}

/// Every `j` with `2^{-k-1} ≤ 2^j ρ ≤ 2^{-k+1}`.
pub fn annulus_scales(rho: f64, k: i32) -> Vec<i32> {
    if !(rho > 0.0) {
        return Vec::new();
    }
    let lo = (-k - 1) as f64;
    let hi = (-k + 1) as f64;
    let guess = (lo - rho.log2()).floor() as i32;
    (guess - 1..=guess + 3)
        .filter(|&j| {
            let r = (j as f64).exp2() * rho;
            r >= lo.exp2() && r <= hi.exp2()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Report {
    pub k: i32,
    /// `Σ_j Σ_{ξ∈Δ^j_k} |ν̂_{j,1}(ξ)|² |f̂(ξ)|²`, Plancherel-normalized.
    pub sum: f64,
    pub norm_sq: f64,
    /// `sum / (2^{-|k|/d} ‖f‖²)`.
    pub ratio: f64,
    pub scales: Option<(i32, i32)>,
    pub modes: usize,
}

/// Caches `ν̂_{j,1}` at lattice frequencies across `k`.
pub struct L2Checker {
    curve: MonomialCurve,
    cache: HashMap<(Vec<u64>, i32), f64>,
}

impl L2Checker {
    pub fn new(curve: &MonomialCurve) -> Self {
        L2Checker {
            curve: curve.clone(),
            cache: HashMap::new(),
        }
    }

    fn weight(&mut self, xi: &[f64], j: i32) -> Result<f64> {
        let key = (xi.iter().map(|v| v.to_bits()).collect(), j);
        if let Some(&w) = self.cache.get(&key) {
            return Ok(w);
        }
        let w = measure_fourier(&AnnulusMeasure::new(&self.curve, j, 1.0)?, xi)?.norm_sqr();
        self.cache.insert(key, w);
        Ok(w)
    }

    pub fn check(&mut self, k: i32, f: &PeriodicField) -> Result<L2Report> {
        let d = self.curve.dim();
        if f.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.dim(),
            });
        }
        let spec = f.dft();
        let n = f.n;
        let scale = f.h.powi(d as i32) / spec.len() as f64;
        let mut sum = 0.0;
        let mut norm_sq = 0.0;
        let mut modes = 0;
        let mut scales: Option<(i32, i32)> = None;
        for (flat, c) in spec.iter().enumerate() {
            let power = c.norm_sqr() * scale;
            norm_sq += power;
            if power == 0.0 {
                continue;
            }
            let mut rest = flat;
            let mut idx = vec![0; d];
            for i in (0..d).rev() {
                idx[i] = rest % n;
                rest /= n;
            }
            let xi = f.frequency(&idx);
            let js = annulus_scales(self.curve.gauge(&xi), k);
            if !js.is_empty() {
                modes += 1;
            }
            for j in js {
                scales = Some(scales.map_or((j, j), |(a, b)| (a.min(j), b.max(j))));
                sum += self.weight(&xi, j)? * power;
            }
        }
        let denom = (-(k.abs() as f64) / d as f64).exp2() * norm_sq;
        Ok(L2Report {
            k,
            sum,
            norm_sq,
            ratio: if denom > 0.0 { sum / denom } else { 0.0 },
            scales,
            modes,
        })
    }
}

pub fn single_scale_l2_check(curve: &MonomialCurve, k: i32, f: &PeriodicField) -> Result<L2Report> {
    L2Checker::new(curve).check(k, f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityPoint {
    pub y: Vec<f64>,
    /// `|(y_i / λ^{α_i})_i|`.
    pub normalized: f64,
    /// `sup_ξ |m_λ(ξ)| |1 − e^{iy·ξ}|`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub lambda: f64,
    pub fitted_eta: f64,
    /// Whether the value decreases along the ladder.
    pub monotone: bool,
    pub points: Vec<ContinuityPoint>,
}

/// Multiplier of `A_λ f = ∫_{λ/2<|t|≤λ} f(x − γ(t)) dt/t` up to conjugation.
fn average_multiplier(curve: &MonomialCurve, lambda: f64, xi: &[f64]) -> Result<Complex64> {
    let scaled = dilate_point(curve, lambda / 2.0, xi)?;
    measure_fourier(&AnnulusMeasure::new(curve, 0, 1.0)?, &scaled)
}

/// `sup_ξ |m_λ(ξ)| |1 − e^{iy·ξ}|` over the samples.
pub fn translation_sup(
    curve: &MonomialCurve,
    lambda: f64,
    y: &[f64],
    xi_samples: &[Vec<f64>],
) -> Result<f64> {
    let mags = xi_samples
        .iter()
        .map(|xi| Ok(average_multiplier(curve, lambda, xi)?.norm()))
        .collect::<Result<Vec<f64>>>()?;
    sup_with(curve, lambda, y, xi_samples, &mags)
}

fn sup_with(
    curve: &MonomialCurve,
    lambda: f64,
    y: &[f64],
    xi_samples: &[Vec<f64>],
    mags: &[f64],
) -> Result<f64> {
    let alpha = curve.exponents();
    for (i, yi) in y.iter().enumerate() {
        if yi.abs() >= lambda.powf(alpha[i]) {
            return Err(Error::Precondition(format!(
                "|y_{i}| = {} must be below λ^α_{i}",
                yi.abs()
            )));
        }
    }
    let mut best = 0.0f64;
    for (xi, m) in xi_samples.iter().zip(mags) {
        let t: f64 = y.iter().zip(xi).map(|(a, b)| a * b).sum();
        let shift = Complex64::new(1.0 - t.cos(), -t.sin()).norm();
        best = best.max(m * shift);
    }
    Ok(best)
}

/// Halves `y` `levels` times and fits `η` as the log–log slope of the
/// supremum against the normalized offset.
pub fn translation_continuity_check(
    curve: &MonomialCurve,
    lambda: f64,
    y: &[f64],
    levels: usize,
    xi_samples: &[Vec<f64>],
) -> Result<ContinuityReport> {
    let alpha = curve.exponents();
    sup_with(curve, lambda, y, &[], &[])?;
    let mags = xi_samples
        .iter()
        .map(|xi| Ok(average_multiplier(curve, lambda, xi)?.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let mut points = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let yl: Vec<f64> = y.iter().map(|v| v * (-(l as f64)).exp2()).collect();
        let normalized = yl
            .iter()
            .zip(alpha)
            .map(|(v, a)| (v / lambda.powf(*a)).powi(2))
            .sum::<f64>()
            .sqrt();
        let value = sup_with(curve, lambda, &yl, xi_samples, &mags)?;
        points.push(ContinuityPoint {
            y: yl,
            normalized,
            value,
        });
    }
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.normalized.ln(), p.value.ln()))
        .collect();
    let fitted_eta = least_squares_slope(&pts)?;
    let monotone = points.windows(2).all(|w| w[1].value <= w[0].value);
    Ok(ContinuityReport {
        lambda,
        fitted_eta,
        monotone,
        points,
    })
}

/// Exact rational `num/den`, `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frac {
    pub num: i64,
    pub den: i64,
}

impl Frac {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Frac {
            num: s * num / g.max(1),
            den: s * den / g.max(1),
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapezoidRegion {
    pub d: usize,
}

impl TrapezoidRegion {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!(
                "dimension must be at least 2, got {d}"
            )));
        }
        Ok(TrapezoidRegion { d })
    }

    /// `(0,0)`, `(1,1)`, `(2/(d+1), 2(d−1)/(d(d+1)))`, `((d²−d+2)/(d(d+1)), (d−1)/(d+1))`.
    pub fn vertices(&self) -> [(Frac, Frac); 4] {
        let d = self.d as i64;
        [
            (Frac::new(0, 1), Frac::new(0, 1)),
            (Frac::new(1, 1), Frac::new(1, 1)),
            (Frac::new(2, d + 1), Frac::new(2 * (d - 1), d * (d + 1))),
            (
                Frac::new(d * d - d + 2, d * (d + 1)),
                Frac::new(d - 1, d + 1),
            ),
        ]
    }

    /// Convex hull in counter-clockwise order with repeated and collinear
    /// points dropped.
    pub fn hull(&self) -> Vec<(Frac, Frac)> {
        let mut pts: Vec<(Frac, Frac)> = self.vertices().to_vec();
        pts.sort_by(|a, b| frac_cmp(a.0, b.0).then(frac_cmp(a.1, b.1)));
        pts.dedup();
        let mut lower: Vec<(Frac, Frac)> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2
                && cross_exact(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<(Frac, Frac)> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && cross_exact(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        lower
    }
}

fn frac_cmp(a: Frac, b: Frac) -> std::cmp::Ordering {
    (a.num as i128 * b.den as i128).cmp(&(b.num as i128 * a.den as i128))
}

/// Sign-exact `(b − a) × (c − a)` scaled by positive denominators.
fn cross_exact(a: (Frac, Frac), b: (Frac, Frac), c: (Frac, Frac)) -> i128 {
    let sub = |p: Frac, q: Frac| -> (i128, i128) {
        (
            p.num as i128 * q.den as i128 - q.num as i128 * p.den as i128,
            p.den as i128 * q.den as i128,
        )
    };
    let (bx, bxd) = sub(b.0, a.0);
    let (by, byd) = sub(b.1, a.1);
    let (cx, cxd) = sub(c.0, a.0);
    let (cy, cyd) = sub(c.1, a.1);
    bx * cy * byd * cxd - by * cx * bxd * cyd
}

/// Boundary-inclusive membership of `(1/p, 1/q)`.
pub fn trapezoid_contains(region: &TrapezoidRegion, point: (f64, f64)) -> bool {
    const EPS: f64 = 1e-12;
    let hull: Vec<(f64, f64)> = region
        .hull()
        .iter()
        .map(|(x, y)| (x.to_f64(), y.to_f64()))
        .collect();
    let n = hull.len();
    (0..n).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        (b.0 - a.0) * (point.1 - a.1) - (b.1 - a.1) * (point.0 - a.0) >= -EPS
    })
}

/// Exact membership for rational points.
pub fn trapezoid_contains_exact(region: &TrapezoidRegion, point: (Frac, Frac)) -> bool {
    let hull = region.hull();
    let n = hull.len();
    (0..n).all(|i| cross_exact(hull[i], hull[(i + 1) % n], point) >= 0)
}
