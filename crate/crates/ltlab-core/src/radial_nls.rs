//! Positive radial ground state of −ΔQ − Q^{2p−1} + Q = 0 by shooting on Q(0).

use serde::{Deserialize, Serialize};

use crate::error::{LtError, Result};
use crate::params::ProblemParams;
use crate::special::{simpson, sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub dr: f64,
    pub r_max: f64,
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            dr: 0.004,
            r_max: 40.0,
            tol: 1e-8,
        }
    }
}

impl SolveOptions {
    pub fn intervals(&self) -> usize {
        (self.r_max / self.dr).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dr > 0.0) || !(self.r_max > 0.0) {
            return Err(LtError::InvalidParameter(
                "dr and r_max must be positive".into(),
            ));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(LtError::InvalidParameter(format!(
                "tol must lie in (0, 1e-3], got {}",
                self.tol
            )));
        }
        let n = self.r_max / self.dr;
        if (n - n.round()).abs() > 1e-9 * n {
            return Err(LtError::InvalidParameter(
                "r_max must be a multiple of dr".into(),
            ));
        }
        if n.round() < 16.0 {
            return Err(LtError::GridTooSmall(
                "fewer than 16 radial intervals".into(),
            ));
        }
        Ok(())
    }
}

/// Radial samples of a solution of −ΔQ − c·Q^{2p−1} = μQ with its integrals.
///
/// The ground state has μ = −1 and c = 1; `normalized_U` produces other (μ, c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub params: ProblemParams,
    pub dr: f64,
    pub samples: Vec<f64>,
    pub derivative: Vec<f64>,
    /// ∫Q² over R^d.
    pub mass: f64,
    /// ∫Q^{2p} over R^d.
    pub lp_norm: f64,
    /// ∫|∇Q|² over R^d.
    pub kinetic: f64,
    pub shooting_value: f64,
    pub mu: f64,
    pub coupling: f64,
}

impl RadialProfile {
    /// Builds a profile from samples on r_i = i·dr; derivatives and integrals are recomputed.
    pub fn from_samples(
        params: ProblemParams,
        dr: f64,
        samples: Vec<f64>,
        mu: f64,
        coupling: f64,
    ) -> Self {
        let derivative = fd_derivative(&samples, dr, params.dim(), mu);
        let d = params.d;
        let area = sphere_area(d);
        let w = |i: usize| area * (i as f64 * dr).powi(d as i32 - 1);
        let n = samples.len();
        let q2: Vec<f64> = (0..n).map(|i| samples[i] * samples[i] * w(i)).collect();
        let q2p: Vec<f64> = (0..n)
            .map(|i| samples[i].abs().powf(2.0 * params.p) * w(i))
            .collect();
        let dq2: Vec<f64> = (0..n)
            .map(|i| derivative[i] * derivative[i] * w(i))
            .collect();
        Self {
            params,
            dr,
            mass: simpson(&q2, dr),
            lp_norm: simpson(&q2p, dr),
            kinetic: simpson(&dq2, dr),
            shooting_value: samples[0],
            samples,
            derivative,
            mu,
            coupling,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.samples.len() - 1)
    }

    /// Cubic Hermite interpolation in |r|; beyond r_max the decay envelope continues the tail.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let n = self.samples.len() - 1;
        if r >= self.r_max() {
            let rn = self.r_max();
            let s = 0.5 * (self.params.dim() - 1.0);
            let decay = (-self.mu).sqrt();
            return self.samples[n] * (-(r - rn) * decay).exp() * (rn / r).powf(s);
        }
        let t = r / self.dr;
        let i = (t.floor() as usize).min(n - 1);
        let s = t - i as f64;
        let (y0, y1) = (self.samples[i], self.samples[i + 1]);
        let (m0, m1) = (
            self.derivative[i] * self.dr,
            self.derivative[i + 1] * self.dr,
        );
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1
    }

    /// Sup-norm residual of Q″ + ((d−1)/r)Q′ + c·Q^{2p−1} + μQ on the grid (7-point stencils).
    pub fn ode_residual(&self) -> f64 {
        let q = &self.samples;
        let n = q.len();
        let h = self.dr;
        let d = self.params.dim();
        let at = |k: isize| -> f64 {
            if k < 0 {
                q[(-k) as usize]
            } else {
                q[k as usize]
            }
        };
        let mut worst: f64 = 0.0;
        #[allow(clippy::needless_range_loop)]
        for i in 0..n - 3 {
            let k = i as isize;
            let q2 = (2.0 * (at(k - 3) + at(k + 3)) - 27.0 * (at(k - 2) + at(k + 2))
                + 270.0 * (at(k - 1) + at(k + 1))
                - 490.0 * at(k))
                / (180.0 * h * h);
            let lap = if i == 0 {
                d * q2
            } else {
                q2 + (d - 1.0) / (i as f64 * h) * self.derivative[i]
            };
            let nonlin = self.coupling * q[i].abs().powf(2.0 * self.params.p - 2.0) * q[i];
            worst = worst.max((lap + nonlin + self.mu * q[i]).abs());
        }
        worst
    }

    /// Pohozaev residuals (T − cP − μm, (d/2−1)T − (dc/2p)P − (d/2)μm); both vanish for a solution.
    pub fn pohozaev_residuals(&self) -> (f64, f64) {
        let d = self.params.dim();
        let p = self.params.p;
        let c = self.coupling;
        let r1 = self.kinetic - c * self.lp_norm - self.mu * self.mass;
        let r2 = (d / 2.0 - 1.0) * self.kinetic
            - d / (2.0 * p) * c * self.lp_norm
            - d / 2.0 * self.mu * self.mass;
        (r1, r2)
    }

    /// m/∫Q^{2p} − (p−1)κ/p; meaningful for the μ = −1, c = 1 ground state.
    pub fn mass_ratio_residual(&self) -> f64 {
        let p = self.params.p;
        self.mass / self.lp_norm - (p - 1.0) * self.params.kappa() / p
    }
}

/// Solves for the ground state on the grid described by `opts`.
pub fn solve_ground_state(params: ProblemParams, opts: &SolveOptions) -> Result<RadialProfile> {
    opts.validate()?;
    let n = opts.intervals();
    let dr = opts.dr;
    let sys = Radial {
        d: params.dim(),
        p: params.p,
    };

    let (mut lo, mut hi) = (1.0, 2.0);
    let mut guard = 0;
    while sys.shoot(hi, dr, n, false).outcome != Outcome::Overshoot {
        lo = hi;
        hi *= 1.5;
        guard += 1;
        if guard > 200 {
            return Err(LtError::BracketFailure(format!(
                "no overshooting Q(0) below {hi:e}"
            )));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sys.shoot(mid, dr, n, false).outcome == Outcome::Overshoot {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let below = sys.shoot(lo, dr, n, true);
    let above = sys.shoot(hi, dr, n, true);
    let common = below.q.len().min(above.q.len());
    let mut splice = common - 1;
    for i in 1..common {
        let (a, b) = (below.q[i], above.q[i]);
        let mean = 0.5 * (a + b);
        if (a - b).abs() > 1e-12 * mean.abs() || mean < 1e-10 * lo {
            splice = i - 1;
            break;
        }
    }
    if (splice as f64) * dr < 2.0 {
        return Err(LtError::BracketFailure(format!(
            "bracketing trajectories separate at r = {:.3}",
            splice as f64 * dr
        )));
    }

    let mut samples: Vec<f64> = (0..=splice)
        .map(|i| 0.5 * (below.q[i] + above.q[i]))
        .collect();
    if splice < n {
        let tail = sys.inward_tail(samples[splice], splice, dr, n);
        samples.extend_from_slice(&tail[1..]);
    }
    let s = samples[0];
    if !(samples[n] < 1e-12 * s) {
        return Err(LtError::GridTooSmall(format!(
            "Q(r_max)/Q(0) = {:e} is not below 1e-12",
            samples[n] / s
        )));
    }

    let profile = RadialProfile::from_samples(params, dr, samples, -1.0, 1.0);
    let res = profile.ode_residual();
    if !(res < opts.tol) {
        return Err(LtError::GridTooSmall(format!(
            "ODE residual {res:e} exceeds tol {:e}; refine dr",
            opts.tol
        )));
    }
    Ok(profile)
}

/// Mass-one rescaling U(x) = m^α Q(m^β x); U solves −ΔU − λ²A^{2−2p}U^{2p−1} = −λ²U.
pub fn normalized_u(profile: &RadialProfile) -> Result<RadialProfile> {
    let pp = profile.params;
    if pp.is_mass_critical() {
        return Err(LtError::DegenerateScaling);
    }
    pp.require_subcritical()?;
    let d = pp.dim();
    let p = pp.p;
    let gap = 1.0 + 2.0 / d - p;
    let alpha = -(p - 1.0) / (2.0 * gap) - 0.5;
    let beta = -(p - 1.0) / (d * gap);
    let m = profile.mass;
    let amp = m.powf(alpha);
    let lam = m.powf(beta);
    let samples = profile.samples.iter().map(|q| amp * q).collect();
    Ok(RadialProfile::from_samples(
        pp,
        profile.dr / lam,
        samples,
        -lam * lam,
        lam * lam * amp.powf(2.0 - 2.0 * p),
    ))
}

/// (min, max) of Q(r)(1 + r^{(d−1)/2})e^{r} over grid nodes in [r_lo, r_hi].
pub fn tail_envelope_check(profile: &RadialProfile, r_lo: f64, r_hi: f64) -> Result<(f64, f64)> {
    if !(r_lo > 2.0 && r_hi < profile.r_max() && r_lo < r_hi) {
        return Err(LtError::InvalidParameter(format!(
            "need 2 < r_lo < r_hi < r_max, got [{r_lo}, {r_hi}]"
        )));
    }
    let s = 0.5 * (profile.params.dim() - 1.0);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (i, q) in profile.samples.iter().enumerate() {
        let r = profile.r(i);
        if r < r_lo || r > r_hi {
            continue;
        }
        let v = q * (1.0 + r.powf(s)) * r.exp();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

fn fd_derivative(q: &[f64], h: f64, d: f64, mu: f64) -> Vec<f64> {
    let n = q.len();
    let at = |k: isize| -> f64 {
        if k < 0 {
            q[(-k) as usize]
        } else {
            q[k as usize]
        }
    };
    let decay = (-mu).max(0.0).sqrt();
    (0..n)
        .map(|i| {
            if i == 0 {
                0.0
            } else if i + 3 < n {
                let k = i as isize;
                (at(k + 3) - at(k - 3) - 9.0 * (at(k + 2) - at(k - 2))
                    + 45.0 * (at(k + 1) - at(k - 1)))
                    / (60.0 * h)
            } else {
                let r = i as f64 * h;
                -q[i] * (decay + (d - 1.0) / (2.0 * r))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Overshoot,
    Undershoot,
    Reached,
}

struct Shot {
    outcome: Outcome,
    q: Vec<f64>,
}

struct Radial {
    d: f64,
    p: f64,
}

impl Radial {
    fn force(&self, q: f64) -> f64 {
        q - q.abs().powf(2.0 * self.p - 2.0) * q
    }

    fn rhs(&self, r: f64, q: f64, v: f64) -> (f64, f64) {
        (v, -(self.d - 1.0) / r * v + self.force(q))
    }

    fn rk4(&self, r: f64, q: f64, v: f64, h: f64) -> (f64, f64) {
        let (k1q, k1v) = self.rhs(r, q, v);
        let (k2q, k2v) = self.rhs(r + 0.5 * h, q + 0.5 * h * k1q, v + 0.5 * h * k1v);
        let (k3q, k3v) = self.rhs(r + 0.5 * h, q + 0.5 * h * k2q, v + 0.5 * h * k2v);
        let (k4q, k4v) = self.rhs(r + h, q + h * k3q, v + h * k3v);
        (
            q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
            v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    }

    /// Even series Q = s + a r² + b r⁴ at small r.
    fn start(&self, s: f64, h: f64) -> (f64, f64) {
        let f = self.force(s);
        let fp = 1.0 - (2.0 * self.p - 1.0) * s.abs().powf(2.0 * self.p - 2.0);
        let a = f / (2.0 * self.d);
        let b = fp * a / (4.0 * (self.d + 2.0));
        (
            s + a * h * h + b * h.powi(4),
            2.0 * a * h + 4.0 * b * h.powi(3),
        )
    }

    fn shoot(&self, s: f64, h: f64, n: usize, store: bool) -> Shot {
        let mut q_store = Vec::with_capacity(if store { n + 1 } else { 0 });
        if store {
            q_store.push(s);
        }
        let (mut q, mut v) = self.start(s, h / 8.0);
        let k = (h - h / 8.0) / 64.0;
        for j in 0..64 {
            let (nq, nv) = self.rk4(h / 8.0 + j as f64 * k, q, v, k);
            q = nq;
            v = nv;
        }
        for i in 1..=n {
            if store {
                q_store.push(q);
            }
            if q < 0.0 {
                return Shot {
                    outcome: Outcome::Overshoot,
                    q: q_store,
                };
            }
            if v > 0.0 {
                return Shot {
                    outcome: Outcome::Undershoot,
                    q: q_store,
                };
            }
            if i == n {
                break;
            }
            // RK4 error constants grow like r^{-4} through the (d−1)/r term, so i·sub stays ≥ 2048.
            let sub = if self.d > 1.0 { (2048 / i).max(1) } else { 1 };
            let k = h / sub as f64;
            for j in 0..sub {
                let (nq, nv) = self.rk4(i as f64 * h + j as f64 * k, q, v, k);
                q = nq;
                v = nv;
            }
        }
        Shot {
            outcome: Outcome::Reached,
            q: q_store,
        }
    }

    /// Integrates the decaying branch inward from r_max to index `from`, matching Q there.
    fn inward_tail(&self, target: f64, from: usize, h: f64, n: usize) -> Vec<f64> {
        let rs = from as f64 * h;
        let rn = n as f64 * h;
        let s = 0.5 * (self.d - 1.0);
        let mut c = target * rs.exp() * rs.powf(s);
        let mut out = vec![0.0; n - from + 1];
        for _ in 0..12 {
            let mut q = c * (-rn).exp() / rn.powf(s);
            let mut v = -q * (1.0 + s / rn);
            out[n - from] = q;
            for k in (from..n).rev() {
                let (nq, nv) = self.rk4((k + 1) as f64 * h, q, v, -h);
                q = nq;
                v = nv;
                out[k - from] = q;
            }
            let ratio = target / out[0];
            c *= ratio;
            if (ratio - 1.0).abs() < 1e-15 {
                break;
            }
        }
        let ratio = target / out[0];
        for x in out.iter_mut() {
            *x *= ratio;
        }
        out[0] = target;
        out
    }
}
