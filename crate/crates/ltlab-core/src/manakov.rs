//! Closed-form two-soliton solutions of v_j″ + 2(v₁²+v₂²)v_j + μ_j v_j = 0 and their checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LtError, Result};
use crate::special::simpson;

/// Base step of the Richardson-extrapolated finite differences.
pub const FD_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonPair {
    pub eta1: f64,
    pub eta2: f64,
    pub a1: f64,
    pub a2: f64,
}

/// Σ s_i e^{n_i} / Σ e^{t_i}, both scaled by the largest denominator exponent.
fn ratio_lse(num: &[(f64, f64)], den: &[f64]) -> f64 {
    let m = den.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let d: f64 = den.iter().map(|t| (t - m).exp()).sum();
    let n: f64 = num.iter().map(|(s, t)| s * (t - m).exp()).sum();
    n / d
}

impl SolitonPair {
    pub fn new(eta1: f64, eta2: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(eta2 > 0.0 && eta1.is_finite() && a1.is_finite() && a2.is_finite()) {
            return Err(LtError::InvalidParameter(
                "need finite η₁, a₁, a₂ and η₂ > 0".into(),
            ));
        }
        if eta1 == eta2 {
            return Err(LtError::DegenerateEta);
        }
        if eta1 < eta2 {
            return Err(LtError::InvalidParameter("need η₁ > η₂".into()));
        }
        Ok(Self { eta1, eta2, a1, a2 })
    }

    /// The a₁ > 0 (or < 0) member with v₂(0) = 0.
    pub fn vanishing_at_origin(eta1: f64, eta2: f64, a2: f64, positive: bool) -> Result<Self> {
        let a1 = 2.0 * eta1 * ((eta1 + eta2) / (eta1 - eta2)).sqrt();
        Self::new(eta1, eta2, if positive { a1 } else { -a1 }, a2)
    }

    pub fn mu(&self) -> (f64, f64) {
        (-self.eta1 * self.eta1, -self.eta2 * self.eta2)
    }

    fn k(&self) -> f64 {
        (self.eta1 - self.eta2) / (self.eta1 + self.eta2)
    }

    /// ln c_j with c_j = a_j²/(4η_j²).
    fn log_c(&self) -> (f64, f64) {
        (
            (self.a1 * self.a1 / (4.0 * self.eta1 * self.eta1)).ln(),
            (self.a2 * self.a2 / (4.0 * self.eta2 * self.eta2)).ln(),
        )
    }

    /// Log-terms of the Hirota denominator f(x).
    fn f_terms(&self, x: f64) -> [f64; 4] {
        let (l1, l2) = self.log_c();
        let lk = 2.0 * self.k().ln();
        [
            0.0,
            l1 + 2.0 * self.eta1 * x,
            l2 + 2.0 * self.eta2 * x,
            l1 + l2 + lk + 2.0 * (self.eta1 + self.eta2) * x,
        ]
    }

    /// f(x) divided by its largest term, and that term's logarithm.
    pub fn f_scaled(&self, x: f64) -> (f64, f64) {
        let t = self.f_terms(x);
        let m = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (t.iter().map(|s| (s - m).exp()).sum(), m)
    }

    pub fn v1(&self, x: f64) -> f64 {
        if self.a1 == 0.0 {
            return 0.0;
        }
        let (_, l2) = self.log_c();
        let la = self.a1.abs().ln();
        let s = self.a1.signum();
        let num = [
            (s, la + self.eta1 * x),
            (
                s,
                la + l2 + self.k().ln() + (self.eta1 + 2.0 * self.eta2) * x,
            ),
        ];
        ratio_lse(&num, &self.f_terms(x))
    }

    pub fn v2(&self, x: f64) -> f64 {
        if self.a2 == 0.0 {
            return 0.0;
        }
        let (l1, _) = self.log_c();
        let la = self.a2.abs().ln();
        let s = self.a2.signum();
        let num = [
            (s, la + self.eta2 * x),
            (
                -s,
                la + l1 + self.k().ln() + (2.0 * self.eta1 + self.eta2) * x,
            ),
        ];
        ratio_lse(&num, &self.f_terms(x))
    }

    /// F₁ with v₁² = −F₁′: (a₂²η₁/(2η₂²)e^{2η₂x} + 2η₁)/f.
    pub fn antiderivative1(&self, x: f64) -> f64 {
        let (_, l2) = self.log_c();
        // a₂²η₁/(2η₂²) = 2η₁c₂.
        let num = [
            (1.0, (2.0 * self.eta1).ln() + l2 + 2.0 * self.eta2 * x),
            (1.0, (2.0 * self.eta1).ln()),
        ];
        ratio_lse(&num, &self.f_terms(x))
    }

    /// F₂ with v₂² = −F₂′: (a₁²η₂/(2η₁²)e^{2η₁x} + 2η₂)/f.
    pub fn antiderivative2(&self, x: f64) -> f64 {
        let (l1, _) = self.log_c();
        let num = [
            (1.0, (2.0 * self.eta2).ln() + l1 + 2.0 * self.eta1 * x),
            (1.0, (2.0 * self.eta2).ln()),
        ];
        ratio_lse(&num, &self.f_terms(x))
    }

    /// Rough centre of mass, used to place quadrature windows.
    pub fn centre(&self) -> f64 {
        let (l1, l2) = self.log_c();
        let mut c = 0.0;
        let mut n = 0.0;
        if l1.is_finite() {
            c += -l1 / (2.0 * self.eta1);
            n += 1.0;
        }
        if l2.is_finite() {
            c += -l2 / (2.0 * self.eta2);
            n += 1.0;
        }
        if n > 0.0 {
            c / n
        } else {
            0.0
        }
    }
}

pub fn soliton_pair(eta1: f64, eta2: f64, a1: f64, a2: f64) -> Result<SolitonPair> {
    SolitonPair::new(eta1, eta2, a1, a2)
}

/// Second derivative: five-point stencil at steps h and h/2, Richardson-combined.
pub fn second_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
            / (12.0 * h * h)
    };
    (16.0 * d(0.5 * h) - d(h)) / 15.0
}

pub fn first_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d =
        |h: f64| (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
    (16.0 * d(0.5 * h) - d(h)) / 15.0
}

/// Residuals of both equations for arbitrary profiles with the given μ_j.
pub fn system_residuals(
    v1: impl Fn(f64) -> f64 + Copy,
    v2: impl Fn(f64) -> f64 + Copy,
    mu: (f64, f64),
    x: f64,
) -> (f64, f64) {
    let (a, b) = (v1(x), v2(x));
    let s = 2.0 * (a * a + b * b);
    (
        second_derivative(v1, x, FD_STEP) + s * a + mu.0 * a,
        second_derivative(v2, x, FD_STEP) + s * b + mu.1 * b,
    )
}

/// The two conserved expressions evaluated at x.
pub fn motion_invariants_at(
    v1: impl Fn(f64) -> f64 + Copy,
    v2: impl Fn(f64) -> f64 + Copy,
    mu: (f64, f64),
    x: f64,
) -> (f64, f64) {
    let (a, b) = (v1(x), v2(x));
    let (da, db) = (
        first_derivative(v1, x, FD_STEP),
        first_derivative(v2, x, FD_STEP),
    );
    let rho = a * a + b * b;
    let c1 = rho * rho + da * da + db * db + mu.0 * a * a + mu.1 * b * b;
    let c2 = rho * (mu.0 * b * b + mu.1 * a * a + mu.0 * mu.1)
        + (a * db - da * b).powi(2)
        + mu.1 * da * da
        + mu.0 * db * db;
    (c1, c2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonSample {
    pub x: f64,
    pub v1: f64,
    pub v2: f64,
    pub res1: f64,
    pub res2: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn sample_pair(pair: &SolitonPair, grid: &[f64]) -> Vec<SolitonSample> {
    let mu = pair.mu();
    let v1 = |x: f64| pair.v1(x);
    let v2 = |x: f64| pair.v2(x);
    grid.par_iter()
        .map(|&x| {
            let (res1, res2) = system_residuals(v1, v2, mu, x);
            let (c1, c2) = motion_invariants_at(v1, v2, mu, x);
            SolitonSample {
                x,
                v1: v1(x),
                v2: v2(x),
                res1,
                res2,
                c1,
                c2,
            }
        })
        .collect()
}

/// Sup-norm of both equation residuals on the grid.
pub fn ode_residual(pair: &SolitonPair, grid: &[f64]) -> f64 {
    sample_pair(pair, grid)
        .iter()
        .map(|s| s.res1.abs().max(s.res2.abs()))
        .fold(0.0, f64::max)
}

/// Tables of the two invariants over the grid.
pub fn motion_invariants(pair: &SolitonPair, grid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let s = sample_pair(pair, grid);
    (
        s.iter().map(|r| r.c1).collect(),
        s.iter().map(|r| r.c2).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonNorms {
    /// Simpson quadrature of v₁², v₂².
    pub quadrature: (f64, f64),
    /// F_j(−∞) − F_j(+∞) from the antiderivatives.
    pub antiderivative: (f64, f64),
    /// Largest |v_j² + F_j′| on the sample grid.
    pub identity_residual: f64,
    /// Simpson quadrature of v₁v₂.
    pub cross: f64,
}

/// ‖v₁‖², ‖v₂‖² by quadrature and through the antiderivative identities.
pub fn soliton_norms(pair: &SolitonPair) -> SolitonNorms {
    let c = pair.centre();
    let half = 40.0 / pair.eta2 + 10.0;
    let h = (0.01 / pair.eta1).min(0.01);
    let n = 2 * ((half / h).ceil() as usize);
    let xs: Vec<f64> = (0..=n).map(|i| c - half + i as f64 * h).collect();
    let v1: Vec<f64> = xs.iter().map(|&x| pair.v1(x)).collect();
    let v2: Vec<f64> = xs.iter().map(|&x| pair.v2(x)).collect();
    let sq = |v: &[f64]| v.iter().map(|a| a * a).collect::<Vec<_>>();
    let cross: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a * b).collect();
    let far = 1e3 / pair.eta2;
    let anti = (
        pair.antiderivative1(c - far) - pair.antiderivative1(c + far),
        pair.antiderivative2(c - far) - pair.antiderivative2(c + far),
    );
    let stride = (n / 400).max(1);
    let identity_residual = (0..=n)
        .step_by(stride)
        .map(|i| {
            let x = xs[i];
            let r1 = v1[i] * v1[i] + first_derivative(|t| pair.antiderivative1(t), x, FD_STEP);
            let r2 = v2[i] * v2[i] + first_derivative(|t| pair.antiderivative2(t), x, FD_STEP);
            r1.abs().max(r2.abs())
        })
        .fold(0.0, f64::max);
    SolitonNorms {
        quadrature: (simpson(&sq(&v1), h), simpson(&sq(&v2), h)),
        antiderivative: anti,
        identity_residual,
        cross: simpson(&cross, h),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub eta1: f64,
    pub eta2: f64,
    pub norm1: f64,
    pub norm2: f64,
    /// v₁(0)² − (μ₂ − μ₁).
    pub origin_residual: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    pub admissible: usize,
    pub tolerance: f64,
}

/// Looks for equal-norm members of the v₂(0) = 0 family (a₂ = 1) over η₁ > η₂.
pub fn nonexistence_scan(
    eta1_grid: &[f64],
    eta2_grid: &[f64],
    tolerance: f64,
) -> Result<ScanReport> {
    let mut pairs = Vec::new();
    for &e1 in eta1_grid {
        for &e2 in eta2_grid {
            if e1 > e2 && e2 > 0.0 {
                pairs.push((e1, e2));
            }
        }
    }
    let points: Vec<ScanPoint> = pairs
        .par_iter()
        .map(|&(e1, e2)| -> Result<ScanPoint> {
            let pair = SolitonPair::vanishing_at_origin(e1, e2, 1.0, true)?;
            let n = soliton_norms(&pair);
            let (n1, n2) = n.quadrature;
            let (mu1, mu2) = pair.mu();
            Ok(ScanPoint {
                eta1: e1,
                eta2: e2,
                norm1: n1,
                norm2: n2,
                origin_residual: pair.v1(0.0).powi(2) - (mu2 - mu1),
                admissible: (n1 - n2).abs() <= tolerance,
            })
        })
        .collect::<Result<_>>()?;
    let admissible = points.iter().filter(|p| p.admissible).count();
    Ok(ScanReport {
        points,
        admissible,
        tolerance,
    })
}

/// The surviving equal-eigenvalue solution ±1/(2cosh((x−x₀)/2)), with μ = −1/4.
pub fn surviving_solution(x: f64, x0: f64) -> f64 {
    1.0 / (2.0 * ((x - x0) / 2.0).cosh())
}
