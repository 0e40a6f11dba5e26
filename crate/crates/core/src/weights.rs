//! Heavy-tailed vertex weights.
//!
//! A [`WeightModel`] is a Pareto distribution with tail exponent `beta > 2`
//! and scale `t_min`, i.e. `P(W > t) = (t_min/t)^beta` for `t >= t_min`.
//! The subcritical regime requires `E[W^2] < E[W]`, which for Pareto is
//! `t_min < (beta-2)/(beta-1)`; the checked constructor enforces it because
//! every downstream limit constant divides by `E[W] - E[W^2]`.

use rand::Rng;
use thiserror::Error;

/// Relative tolerance for the exponential-moment quadrature.
pub const QUADRATURE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("tail exponent beta must be a finite number > 2, got {0}")]
    BetaOutOfRange(f64),
    #[error("scale t_min must be a finite number > 0, got {0}")]
    ScaleOutOfRange(f64),
    #[error(
        "subcriticality violated: E[W^2] = {second} >= E[W] = {first} \
         (Pareto needs t_min < (beta-2)/(beta-1))"
    )]
    NotSubcritical { first: f64, second: f64 },
    #[error("probability must lie strictly inside (0,1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("moment of order {order} is infinite for tail exponent beta = {beta}")]
    InfiniteMoment { order: u32, beta: f64 },
    #[error("q(n) requires n >= 2, got {0}")]
    QnTooSmall(usize),
    #[error(
        "quadrature did not converge: requested relative tolerance {requested:e}, \
         achieved {achieved:e}"
    )]
    QuadratureNotConverged { requested: f64, achieved: f64 },
    #[error("weight at index {index} must be strictly positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },
}

/// Supported weight families. Only the pure power law is implemented; its
/// quantiles and moments have closed forms, which the test suites exploit
/// for cross-validation. Slowly varying tail corrections are an extension
/// point, not implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFamily {
    Pareto,
}

/// A heavy-tailed weight distribution satisfying the model assumptions.
///
/// Immutable after construction; cheap to copy and safe to share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightModel {
    family: WeightFamily,
    beta: f64,
    t_min: f64,
}

impl WeightModel {
    /// Checked constructor: requires `beta > 2`, `t_min > 0` and the
    /// subcritical condition `E[W^2] < E[W]` (strict).
    pub fn new(beta: f64, t_min: f64) -> Result<Self, WeightError> {
        let model = Self::new_unchecked(beta, t_min)?;
        if !model.is_subcritical() {
            return Err(WeightError::NotSubcritical {
                first: model.moment(1).expect("first moment exists for beta > 2"),
                second: model.moment(2).expect("second moment exists for beta > 2"),
            });
        }
        Ok(model)
    }

    /// Like [`WeightModel::new`] but without the subcriticality check.
    /// Needed to evaluate diagnostics such as [`WeightModel::is_subcritical`]
    /// on parameters that fail it; the limit constants reject such models.
    pub fn new_unchecked(beta: f64, t_min: f64) -> Result<Self, WeightError> {
        if !(beta.is_finite() && beta > 2.0) {
            return Err(WeightError::BetaOutOfRange(beta));
        }
        if !(t_min.is_finite() && t_min > 0.0) {
            return Err(WeightError::ScaleOutOfRange(t_min));
        }
        Ok(Self { family: WeightFamily::Pareto, beta, t_min })
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    /// `P(W > t)`: equals `(t_min/t)^beta` above the scale, 1 below it.
    pub fn tail_prob(&self, t: f64) -> f64 {
        if t < self.t_min {
            1.0
        } else {
            (self.t_min / t).powf(self.beta)
        }
    }

    /// Quantile function `F^{-1}(p) = t_min (1-p)^{-1/beta}` for `p` in (0,1).
    pub fn quantile(&self, p: f64) -> Result<f64, WeightError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(WeightError::ProbabilityOutOfRange(p));
        }
        Ok(self.t_min * (1.0 - p).powf(-1.0 / self.beta))
    }

    /// The scaling sequence `q(n) = F^{-1}(1 - 1/n)`, i.e. `t_min n^{1/beta}`.
    ///
    /// Requires `n >= 2` so that `1 - 1/n` lies inside (0,1).
    pub fn q_n(&self, n: usize) -> Result<f64, WeightError> {
        if n < 2 {
            return Err(WeightError::QnTooSmall(n));
        }
        // Evaluated directly as t_min * n^(1/beta) rather than through
        // quantile(1 - 1/n): for large n the subtraction loses precision.
        Ok(self.t_min * (n as f64).powf(1.0 / self.beta))
    }

    /// Raw moment `E[W^k] = beta t_min^k / (beta - k)`, finite iff `k < beta`.
    pub fn moment(&self, k: u32) -> Result<f64, WeightError> {
        let kf = k as f64;
        if kf >= self.beta {
            return Err(WeightError::InfiniteMoment { order: k, beta: self.beta });
        }
        Ok(self.beta * self.t_min.powi(k as i32) / (self.beta - kf))
    }

    /// Exponentially damped moment `E[W^m e^{-W}]`, by adaptive quadrature of
    /// `beta t_min^beta w^{m-beta-1} e^{-w}` over `[t_min, inf)` to relative
    /// tolerance [`QUADRATURE_REL_TOL`], truncating the tail once a window
    /// contributes less than 1e-16 of the running total.
    pub fn exp_moment(&self, m: u32) -> Result<f64, WeightError> {
        let beta = self.beta;
        let power = m as f64 - beta - 1.0;
        let integrand = |w: f64| w.powf(power) * (-w).exp();

        let mut total = 0.0;
        let mut err = 0.0;
        let mut lo = self.t_min;
        // Window width covering several e-foldings; e^{-w} guarantees the
        // windows decay geometrically once w^power stops growing.
        let width = 4.0_f64.max(self.t_min);
        loop {
            let hi = lo + width;
            let scale = if total > 0.0 { total } else { integrand(lo) * width };
            // Window budget well below the overall target: the per-window
            // error estimates accumulate and are themselves conservative.
            let (piece, piece_err) =
                adaptive_simpson(&integrand, lo, hi, QUADRATURE_REL_TOL * scale / 200.0);
            total += piece;
            err += piece_err;
            lo = hi;
            if piece.abs() < 1e-16 * total && lo > self.t_min + 2.0 * width {
                break;
            }
            if lo > self.t_min + 800.0 {
                // e^{-800} underflows; nothing left to integrate.
                break;
            }
        }
        let achieved = if total > 0.0 { err / total } else { err };
        if achieved > QUADRATURE_REL_TOL {
            return Err(WeightError::QuadratureNotConverged {
                requested: QUADRATURE_REL_TOL,
                achieved,
            });
        }
        Ok(beta * self.t_min.powf(beta) * total)
    }

    /// True iff `E[W^2] < E[W]` (strict), the regime without a giant component.
    pub fn is_subcritical(&self) -> bool {
        let first = self.moment(1).expect("first moment exists for beta > 2");
        let second = self.moment(2).expect("second moment exists for beta > 2");
        second < first
    }

    /// Draws `n` i.i.d. weights by inverse transform: `W = t_min U^{-1/beta}`
    /// with `U` uniform on (0,1].
    pub fn sample_weights<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> WeightVector {
        let weights = (0..n)
            .map(|_| {
                // 1 - U is in (0,1]; U = 1 maps to the support lower end t_min.
                let u = 1.0 - rng.random::<f64>();
                self.t_min * u.powf(-1.0 / self.beta)
            })
            .collect();
        WeightVector::new(weights).expect("inverse-transform draws are positive")
    }
}

/// Per-vertex weights `W_1, ..., W_n` with the cached total `L_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    total: f64,
}

impl WeightVector {
    /// Builds a weight vector, rejecting non-positive or non-finite entries.
    pub fn new(weights: Vec<f64>) -> Result<Self, WeightError> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(WeightError::NonPositiveWeight { index, value });
            }
        }
        let total = weights.iter().sum();
        Ok(Self { weights, total })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// The total weight `L_n`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// The largest weight `W_(n)`; 0 for an empty vector.
    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the maximal weight, ties broken by the smallest label.
    pub fn top_vertex(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &w) in self.weights.iter().enumerate() {
            match best {
                Some(b) if self.weights[b] >= w => {}
                _ => best = Some(i),
            }
        }
        best
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().copied()
    }
}

/// Adaptive Simpson integration of `f` on `[a, b]` with absolute tolerance
/// `tol`. Returns the integral and an error estimate.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || depth == 0 {
            (left + right + delta / 15.0, delta.abs() / 15.0)
        } else {
            let (lv, le) = recurse(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1);
            let (rv, re) = recurse(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1);
            (lv + rv, le + re)
        }
    }

    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 40)
}
