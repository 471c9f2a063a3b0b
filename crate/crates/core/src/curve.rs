//! The monomial curve `t ↦ (t^{α_1}, …, t^{α_d})` and the anisotropic
//! dilation group `t^D x = (t^{α_1} x_1, …, t^{α_d} x_d)` under which it is
//! homogeneous.
//!
//! The standard curve `(t, t², …, t^d)` stores its exponents as exact
//! integers; general real exponents are admitted so the grid code can be
//! exercised with non-integer floors, but only the integer path is used by
//! the operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialCurve {
    alpha: Vec<f64>,
    /// `Some` when every exponent is an integer.
    int_alpha: Option<Vec<i32>>,
}

impl MonomialCurve {
    /// The curve `(t, t², …, t^d)`.
    pub fn standard(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidCurve(format!(
                "dimension must be at least 2, got {d}"
            )));
        }
        let ints: Vec<i32> = (1..=d as i32).collect();
        Ok(Self {
            alpha: ints.iter().map(|&a| a as f64).collect(),
            int_alpha: Some(ints),
        })
    }

    /// A curve with arbitrary positive, strictly increasing exponents.
    pub fn with_exponents(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "dimension must be at least 2, got {}",
                alpha.len()
            )));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::InvalidCurve(
                "exponents must be finite and positive".into(),
            ));
        }
        if alpha.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCurve(
                "exponents must be strictly increasing".into(),
            ));
        }
        let int_alpha = if alpha
            .iter()
            .all(|a| a.fract() == 0.0 && *a < i32::MAX as f64)
        {
            Some(alpha.iter().map(|&a| a as i32).collect())
        } else {
            None
        };
        Ok(Self { alpha, int_alpha })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.alpha
    }

    pub fn integer_exponents(&self) -> Option<&[i32]> {
        self.int_alpha.as_deref()
    }

    /// Sum of the exponents; `|t^D Q| = t^{trace} |Q|`.
    pub fn homogeneous_dimension(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// `⌊k α_i⌋`, exact for integer exponents.
    pub fn floor_exponent(&self, k: i32, i: usize) -> i32 {
        match &self.int_alpha {
            Some(a) => k * a[i],
            None => (k as f64 * self.alpha[i]).floor() as i32,
        }
    }

    /// `t^{α_i}` with the sign semantics of the monomial.
    fn power(&self, t: f64, i: usize) -> f64 {
        match &self.int_alpha {
            Some(a) => t.powi(a[i]),
            None => {
                // Odd extension for real exponents; γ_P never takes this path.
                t.signum() * t.abs().powf(self.alpha[i])
            }
        }
    }

    /// Point `γ(t)`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.power(t, i);
        }
    }

    /// Anisotropic gauge `ρ(ξ) = max_i |ξ_i|^{1/α_i}`, homogeneous of degree
    /// one under `t^D`.
    pub fn gauge(&self, xi: &[f64]) -> f64 {
        xi.iter()
            .zip(&self.alpha)
            .map(|(x, a)| x.abs().powf(1.0 / a))
            .fold(0.0, f64::max)
    }

    pub fn dilation(&self, t: f64) -> Result<AnisotropicDilation> {
        AnisotropicDilation::new(self.clone(), t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicDilation {
    curve: MonomialCurve,
    t: f64,
}

impl AnisotropicDilation {
    pub fn new(curve: MonomialCurve, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidScale(t));
        }
        Ok(Self { curve, t })
    }

    pub fn scale(&self) -> f64 {
        self.t
    }

    /// `t^D x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.curve.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.curve.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .enumerate()
            .map(|(i, xi)| self.curve.power(self.t, i) * xi)
            .collect())
    }

    /// Composition `s^D ∘ t^D = (st)^D`.
    pub fn compose(&self, other: &AnisotropicDilation) -> Result<Self> {
        Self::new(self.curve.clone(), self.t * other.t)
    }
}

/// Dilate `x` by `t^D` without constructing a dilation object.
pub fn dilate_point(curve: &MonomialCurve, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    AnisotropicDilation::new(curve.clone(), t)?.apply(x)
}
