//! The weak-L^p quasinorms [f]′_{p,r} = sup_τ τ^{1−r/p}(∫(|f|−τ)₊^r)^{1/p} on step functions.

use serde::{Deserialize, Serialize};

use crate::constants::semiclassical_l;
use crate::error::{LtError, Result};
use crate::special::{gamma, golden_max};
use crate::spectra::{negative_eigenvalues, Geometry, GridPotential};

/// Points of the coarse log τ scan.
pub const COARSE_SCAN: usize = 200;
/// Extra scan points inside each interval between consecutive values.
pub const PER_INTERVAL: usize = 16;
/// Above this many distinct values the per-interval scan is replaced by a denser log scan.
const MAX_INTERVALS: usize = 256;

/// Finitely many (|value|, measure) pairs; grid samples and counting measures both reduce to this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    /// Distinct nonzero |values|, descending.
    values: Vec<f64>,
    measures: Vec<f64>,
}

impl StepFunction {
    pub fn from_steps(pairs: &[(f64, f64)]) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for &(x, m) in pairs {
            if !x.is_finite() || !(m >= 0.0) || !m.is_finite() {
                return Err(LtError::InvalidParameter(
                    "values must be finite, measures ≥ 0".into(),
                ));
            }
            if x != 0.0 && m > 0.0 {
                v.push((x.abs(), m));
            }
        }
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut values: Vec<f64> = Vec::new();
        let mut measures: Vec<f64> = Vec::new();
        for (x, m) in v {
            if values.last() == Some(&x) {
                *measures.last_mut().unwrap() += m;
            } else {
                values.push(x);
                measures.push(m);
            }
        }
        Ok(Self { values, measures })
    }

    /// Counting measure on a finite multiset.
    pub fn counting(values: &[f64]) -> Result<Self> {
        Self::from_steps(&values.iter().map(|&x| (x, 1.0)).collect::<Vec<_>>())
    }

    /// Grid samples, each carrying weight h.
    pub fn from_grid(samples: &[f64], h: f64) -> Result<Self> {
        Self::from_steps(&samples.iter().map(|&x| (x, h)).collect::<Vec<_>>())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn max_abs(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// λ(σ) = |{|f| > σ}|.
    pub fn distribution(&self, sigma: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.measures)
            .take_while(|(v, _)| **v > sigma)
            .map(|(_, m)| m)
            .sum()
    }

    /// ∫(|f|−τ)₊^r; for r = 0 this is λ(τ).
    pub fn power_integral(&self, tau: f64, r: f64) -> f64 {
        if r == 0.0 {
            return self.distribution(tau);
        }
        self.values
            .iter()
            .zip(&self.measures)
            .take_while(|(v, _)| **v > tau)
            .map(|(v, m)| m * (v - tau).powf(r))
            .sum()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.measures)
            .map(|(v, m)| m * v.powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c.abs()).collect(),
            measures: self.measures.clone(),
        }
    }
}

fn check_exponents(p: f64, r: f64) -> Result<()> {
    if !(r >= 0.0 && p > r && p.is_finite()) {
        return Err(LtError::InvalidParameter(format!(
            "need p > r ≥ 0, got p = {p}, r = {r}"
        )));
    }
    Ok(())
}

/// (τ*, [f]′_{p,r}) with τ* a maximiser (the left limit point when r = 0).
pub fn quasinorm_with_argmax(f: &StepFunction, p: f64, r: f64) -> Result<(f64, f64)> {
    check_exponents(p, r)?;
    let big = f.max_abs();
    if big == 0.0 {
        return Ok((0.0, 0.0));
    }
    if r == 0.0 {
        // On each level interval τλ(τ)^{1/p} increases, so the sup sits at a left limit v_k⁻.
        let mut mass = 0.0;
        let mut best = (0.0, 0.0);
        for (v, m) in f.values.iter().zip(&f.measures) {
            mass += m;
            let val = v * f64::powf(mass, 1.0 / p);
            if val > best.1 {
                best = (*v, val);
            }
        }
        return Ok(best);
    }
    // Maximise g(τ) = τ^{p−r}∫(|f|−τ)₊^r over t = ln τ; g^{1/p} is the quasinorm.
    let g = |t: f64| {
        let tau = t.exp();
        tau.powf(p - r) * f.power_integral(tau, r)
    };
    let lo = (1e-8 * big).ln();
    let hi = big.ln();
    let mut ts: Vec<f64> = Vec::new();
    let coarse = if f.values.len() > MAX_INTERVALS {
        20 * COARSE_SCAN
    } else {
        COARSE_SCAN
    };
    ts.extend((0..coarse).map(|i| lo + (hi - lo) * i as f64 / (coarse - 1) as f64));
    if f.values.len() <= MAX_INTERVALS {
        let mut edges: Vec<f64> = f.values.iter().rev().cloned().collect();
        edges.insert(0, 1e-8 * big);
        for w in edges.windows(2) {
            let (a, b) = (w[0].ln(), w[1].ln());
            ts.push(a);
            ts.extend(
                (1..=PER_INTERVAL).map(|k| a + (b - a) * k as f64 / (PER_INTERVAL + 1) as f64),
            );
        }
        // For small r the peak hugs a level from below at relative distance about r/p.
        for v in &f.values {
            ts.push((v * (p - r) / p).ln());
            ts.extend((1..=40).map(|j| (v * (1.0 - 0.5f64.powi(j))).ln()));
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let vals: Vec<f64> = ts.iter().map(|&t| g(t)).collect();
    let k = (0..ts.len()).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    let a = if k > 0 { ts[k - 1] } else { ts[0] };
    let b = if k + 1 < ts.len() { ts[k + 1] } else { ts[k] };
    let (t, gv) = if b > a {
        golden_max(g, a, b, 1e-14)
    } else {
        (ts[k], vals[k])
    };
    let (t, gv) = if gv >= vals[k] {
        (t, gv)
    } else {
        (ts[k], vals[k])
    };
    Ok((t.exp(), gv.powf(1.0 / p)))
}

pub fn quasinorm(f: &StepFunction, p: f64, r: f64) -> Result<f64> {
    Ok(quasinorm_with_argmax(f, p, r)?.1)
}

/// ((p−r)^{p−r}r^r/p^p)^{1/p}; also the sharp strong-to-weak constant.
pub fn lower_constant(p: f64, r: f64) -> f64 {
    let rr = if r == 0.0 { 1.0 } else { r.powf(r) };
    ((p - r).powf(p - r) * rr / p.powf(p)).powf(1.0 / p)
}

/// (Γ(p−r)Γ(r+1)/Γ(p))^{1/p}.
pub fn upper_constant(p: f64, r: f64) -> f64 {
    (gamma(p - r) * gamma(r + 1.0) / gamma(p)).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub quasinorm: f64,
    /// lower_constant·[f]′_{p,0}.
    pub lower: f64,
    /// upper_constant·[f]′_{p,0}.
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Relative slack granted to the numerical supremum in the sandwich comparisons.
pub const SANDWICH_SLACK: f64 = 1e-12;

pub fn sandwich_check(f: &StepFunction, p: f64, r: f64) -> Result<Sandwich> {
    let weak = quasinorm(f, p, 0.0)?;
    let value = quasinorm(f, p, r)?;
    let lower = lower_constant(p, r) * weak;
    let upper = upper_constant(p, r) * weak;
    Ok(Sandwich {
        quasinorm: value,
        lower,
        upper,
        lower_ok: lower <= value * (1.0 + SANDWICH_SLACK),
        upper_ok: value <= upper * (1.0 + SANDWICH_SLACK),
    })
}

/// ([f]′_{p,r}, lower_constant·‖f‖_p); equal on indicators.
pub fn strong_to_weak(f: &StepFunction, p: f64, r: f64) -> Result<(f64, f64)> {
    Ok((quasinorm(f, p, r)?, lower_constant(p, r) * f.lp_norm(p)))
}

/// r∫_τ^∞ λ(σ)(σ−τ)^{r−1}dσ by the midpoint rule in u = (σ−τ)^r.
pub fn layer_cake_quadrature(f: &StepFunction, tau: f64, r: f64, n: usize) -> f64 {
    let top = (f.max_abs() - tau).max(0.0).powf(r);
    if top == 0.0 {
        return 0.0;
    }
    let du = top / n as f64;
    (0..n)
        .map(|i| f.distribution(tau + ((i as f64 + 0.5) * du).powf(1.0 / r)))
        .sum::<f64>()
        * du
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakLtCheck {
    /// sup_τ τ^{κ−1}Tr(−Δ+V+τ)_−.
    pub weak_trace: f64,
    pub tau: f64,
    /// ((κ−1)^{κ−1}/κ^κ)·L^sc_{κ,1}.
    pub bound_constant: f64,
    pub integral: f64,
    pub ratio: f64,
}

/// Weak Lieb-Thirring quotient against the bound ((κ−1)^{κ−1}/κ^κ)L^sc_{κ,1}; at most 1.
pub fn weak_lt_check(v: &GridPotential, kappa: f64) -> Result<WeakLtCheck> {
    if !matches!(v.geometry, Geometry::Line { .. }) {
        return Err(LtError::InvalidParameter(
            "weak Lieb-Thirring check runs on a line grid".into(),
        ));
    }
    if !(kappa >= 1.5) {
        return Err(LtError::InvalidParameter(
            "need κ ≥ 3/2 so that L = L^sc".into(),
        ));
    }
    let levels = negative_eigenvalues(v);
    let f = StepFunction::from_steps(
        &levels
            .iter()
            .map(|&(l, m)| (l, m as f64))
            .collect::<Vec<_>>(),
    )?;
    // sup_τ τ^{κ−1}Σ(|λ|−τ)₊ is the κ-th power of [λ]′_{κ,1}.
    let (tau, q) = quasinorm_with_argmax(&f, kappa, 1.0)?;
    let weak_trace = q.powf(kappa);
    let bound_constant =
        (kappa - 1.0).powf(kappa - 1.0) / kappa.powf(kappa) * semiclassical_l(kappa, 1);
    let integral = v.negative_part_integral(kappa + 0.5);
    if !(integral > 0.0) {
        return Err(LtError::ZeroDenominator(
            "potential has no negative part".into(),
        ));
    }
    Ok(WeakLtCheck {
        weak_trace,
        tau,
        bound_constant,
        integral,
        ratio: weak_trace / (bound_constant * integral),
    })
}
