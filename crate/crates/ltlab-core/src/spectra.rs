//! Finite-difference spectra of −Δ + V on a Dirichlet line or on radial channels.

use serde::{Deserialize, Serialize};

use crate::error::{LtError, Result};
use crate::special::{binomial, sphere_area, trapezoid};
use crate::tridiag;

/// Eigenvalues above this are discretisation noise and count as non-negative.
pub const NOISE_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// Nodes x_i = −L + i·h, i = 0..n−1, h = 2L/(n−1); zero boundary values just outside.
    Line { half_width: f64, n: usize },
    /// Interior nodes r_i = i·h, i = 1..n, h = r_max/(n+1), d ≥ 2.
    Radial {
        d: usize,
        r_max: f64,
        n: usize,
        l_max: usize,
    },
}

impl Geometry {
    pub fn line(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || n < 3 {
            return Err(LtError::InvalidParameter(
                "line grid needs L > 0 and n >= 3".into(),
            ));
        }
        Ok(Geometry::Line { half_width, n })
    }

    pub fn radial(d: usize, r_max: f64, n: usize, l_max: usize) -> Result<Self> {
        if d < 2 {
            return Err(LtError::InvalidParameter(
                "radial geometry needs d >= 2; use the line for d = 1".into(),
            ));
        }
        if !(r_max > 0.0) || n < 3 {
            return Err(LtError::InvalidParameter(
                "radial grid needs r_max > 0 and n >= 3".into(),
            ));
        }
        Ok(Geometry::Radial { d, r_max, n, l_max })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Geometry::Line { .. } => 1,
            Geometry::Radial { d, .. } => d,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Geometry::Line { n, .. } | Geometry::Radial { n, .. } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        match *self {
            Geometry::Line { half_width, n } => 2.0 * half_width / (n as f64 - 1.0),
            Geometry::Radial { r_max, n, .. } => r_max / (n as f64 + 1.0),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        match *self {
            Geometry::Line { half_width, n } => {
                (0..n).map(|i| -half_width + i as f64 * h).collect()
            }
            Geometry::Radial { n, .. } => (1..=n).map(|i| i as f64 * h).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPotential {
    pub geometry: Geometry,
    pub samples: Vec<f64>,
}

impl GridPotential {
    pub fn new(geometry: Geometry, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != geometry.len() {
            return Err(LtError::InvalidParameter(format!(
                "expected {} samples, got {}",
                geometry.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(LtError::InvalidParameter("potential must be finite".into()));
        }
        Ok(Self { geometry, samples })
    }

    pub fn from_fn(geometry: Geometry, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = geometry.nodes().into_iter().map(f).collect();
        Self::new(geometry, samples)
    }

    /// ∫V_−^s over R^d by the trapezoid rule on the nodes.
    pub fn negative_part_integral(&self, s: f64) -> f64 {
        let h = self.geometry.spacing();
        match self.geometry {
            Geometry::Line { .. } => {
                let f: Vec<f64> = self.samples.iter().map(|v| (-v).max(0.0).powf(s)).collect();
                trapezoid(&f, h)
            }
            Geometry::Radial { d, .. } => {
                let nodes = self.geometry.nodes();
                let sum: f64 = nodes
                    .iter()
                    .zip(&self.samples)
                    .map(|(r, v)| r.powi(d as i32 - 1) * (-v).max(0.0).powf(s))
                    .sum();
                sphere_area(d) * h * sum
            }
        }
    }

    pub fn sup_negative_part(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(-v))
    }

    fn channel_diagonal(&self, l: usize) -> Vec<f64> {
        let h = self.geometry.spacing();
        let base = 2.0 / (h * h);
        match self.geometry {
            Geometry::Line { .. } => self.samples.iter().map(|v| base + v).collect(),
            Geometry::Radial { d, .. } => {
                let lf = l as f64;
                let df = d as f64;
                let c = (lf + (df - 3.0) / 2.0) * (lf + (df - 1.0) / 2.0);
                self.geometry
                    .nodes()
                    .iter()
                    .zip(&self.samples)
                    .map(|(r, v)| base + v + c / (r * r))
                    .collect()
            }
        }
    }

    fn off_diagonal(&self) -> Vec<f64> {
        let h = self.geometry.spacing();
        vec![-1.0 / (h * h); self.geometry.len() - 1]
    }
}

/// Dimension of the degree-ℓ spherical harmonics in d variables.
pub fn spherical_harmonic_dim(d: usize, l: usize) -> usize {
    let (l, d) = (l as i64, d as i64);
    (binomial(l + d - 1, d - 1) - binomial(l + d - 3, d - 1)) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub lambda: f64,
    pub multiplicity: usize,
    /// Angular momentum ℓ; always 0 on the line.
    pub channel: usize,
    pub radial_index: usize,
    /// Reduced radial (or line) function with h·Σu² = 1.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub geometry: Geometry,
    pub levels: Vec<Level>,
    pub requested: usize,
    pub tol: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelExport {
    pub lambda: f64,
    pub multiplicity: usize,
    pub channel: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    pub eigenvalue: f64,
    pub max_residual: f64,
    pub noise_floor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumExport {
    pub geometry: Geometry,
    pub eigenvalues: Vec<LevelExport>,
    pub tolerances: Tolerances,
}

impl Spectrum {
    /// Number of eigenvalues found, with multiplicity, capped at the request.
    pub fn count(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.multiplicity)
            .sum::<usize>()
            .min(self.requested)
    }

    /// Fewer than the requested number of negative eigenvalues exist on this grid.
    pub fn is_short(&self) -> bool {
        self.count() < self.requested
    }

    /// λ_1 ≤ λ_2 ≤ … repeated by multiplicity, at most `requested` of them.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.levels {
            for _ in 0..l.multiplicity {
                if out.len() == self.requested {
                    return out;
                }
                out.push(l.lambda);
            }
        }
        out
    }

    pub fn export(&self) -> SpectrumExport {
        SpectrumExport {
            geometry: self.geometry,
            eigenvalues: self
                .levels
                .iter()
                .map(|l| LevelExport {
                    lambda: l.lambda,
                    multiplicity: l.multiplicity,
                    channel: l.channel,
                })
                .collect(),
            tolerances: Tolerances {
                eigenvalue: self.tol,
                max_residual: self.max_residual,
                noise_floor: NOISE_FLOOR,
            },
        }
    }
}

/// Rayleigh quotient with the kinetic term in difference form (no 2/h² cancellation).
fn rayleigh(u: &[f64], diag_potential: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut kin = u[0] * u[0] + u[n - 1] * u[n - 1];
    for i in 0..n - 1 {
        kin += (u[i + 1] - u[i]).powi(2);
    }
    let pot: f64 = u.iter().zip(diag_potential).map(|(a, v)| v * a * a).sum();
    let norm: f64 = u.iter().map(|a| a * a).sum();
    (kin / (h * h) + pot) / norm
}

/// Sign convention: positive at the leftmost point of maximal modulus.
pub(crate) fn fix_phase(u: &mut [f64]) {
    let mut best = 0;
    for i in 1..u.len() {
        if u[i].abs() > u[best].abs() {
            best = i;
        }
    }
    if u[best] < 0.0 {
        for x in u.iter_mut() {
            *x = -*x;
        }
    }
}

fn channel_pairs(v: &GridPotential, l: usize, k: usize) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let h = v.geometry.spacing();
    let diag = v.channel_diagonal(l);
    let off = v.off_diagonal();
    let pairs = tridiag::lowest_eigenpairs(&diag, &off, k, NOISE_FLOOR)?;
    let base = 2.0 / (h * h);
    let pot: Vec<f64> = diag.iter().map(|x| x - base).collect();
    let mut out = Vec::with_capacity(pairs.len());
    let mut hu = vec![0.0; diag.len()];
    for (_, mut u) in pairs {
        let lam = rayleigh(&u, &pot, h);
        for i in 0..u.len() {
            let mut s = diag[i] * u[i];
            if i > 0 {
                s += off[i - 1] * u[i - 1];
            }
            if i + 1 < u.len() {
                s += off[i] * u[i + 1];
            }
            hu[i] = s - lam * u[i];
        }
        let resid = hu.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = (1.0 / (h * u.iter().map(|x| x * x).sum::<f64>())).sqrt();
        for x in u.iter_mut() {
            *x *= scale;
        }
        fix_phase(&mut u);
        out.push((lam, u, resid));
    }
    Ok(out)
}

/// The lowest (at most N, with multiplicity) negative eigenpairs of −Δ + V.
pub fn lowest_eigenpairs(v: &GridPotential, n: usize, tol: f64) -> Result<Spectrum> {
    if n == 0 {
        return Err(LtError::InvalidParameter("N must be at least 1".into()));
    }
    let h = v.geometry.spacing();
    let matrix_norm = 4.0 / (h * h) + v.samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut levels = Vec::new();
    let mut max_residual = 0.0_f64;
    match v.geometry {
        Geometry::Line { .. } => {
            for (k, (lam, u, r)) in channel_pairs(v, 0, n)?.into_iter().enumerate() {
                max_residual = max_residual.max(r);
                levels.push(Level {
                    lambda: lam,
                    multiplicity: 1,
                    channel: 0,
                    radial_index: k,
                    vector: u,
                });
            }
        }
        Geometry::Radial { d, .. } => {
            let mut l = 0;
            loop {
                let pairs = channel_pairs(v, l, n)?;
                let empty = pairs.is_empty();
                for (k, (lam, u, r)) in pairs.into_iter().enumerate() {
                    max_residual = max_residual.max(r);
                    levels.push(Level {
                        lambda: lam,
                        multiplicity: spherical_harmonic_dim(d, l),
                        channel: l,
                        radial_index: k,
                        vector: u,
                    });
                }
                // Centrifugal terms grow with ℓ, so an empty channel ends the search.
                if empty {
                    break;
                }
                l += 1;
            }
        }
    }
    let bound = tol.max(64.0 * f64::EPSILON * matrix_norm);
    if max_residual > bound {
        return Err(LtError::ConvergenceFailure(format!(
            "eigenpair residual {max_residual:e} exceeds {bound:e}"
        )));
    }
    levels.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then(a.channel.cmp(&b.channel))
            .then(a.radial_index.cmp(&b.radial_index))
    });
    let mut kept = Vec::new();
    let mut total = 0;
    for lev in levels {
        if total >= n {
            break;
        }
        total += lev.multiplicity;
        kept.push(lev);
    }
    Ok(Spectrum {
        geometry: v.geometry,
        levels: kept,
        requested: n,
        tol,
        max_residual,
    })
}

/// Every negative eigenvalue (λ, multiplicity) by bisection alone.
pub fn negative_eigenvalues(v: &GridPotential) -> Vec<(f64, usize)> {
    let off = v.off_diagonal();
    let mut out = Vec::new();
    match v.geometry {
        Geometry::Line { .. } => {
            let diag = v.channel_diagonal(0);
            for lam in tridiag::lowest_eigenvalues(&diag, &off, usize::MAX, NOISE_FLOOR) {
                out.push((lam, 1));
            }
        }
        Geometry::Radial { d, .. } => {
            for l in 0.. {
                let diag = v.channel_diagonal(l);
                let vals = tridiag::lowest_eigenvalues(&diag, &off, usize::MAX, NOISE_FLOOR);
                if vals.is_empty() {
                    break;
                }
                let m = spherical_harmonic_dim(d, l);
                out.extend(vals.into_iter().map(|x| (x, m)));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Σ_{n≤N} |λ_n|^κ with multiplicities.
pub fn riesz_sum(spec: &Spectrum, kappa: f64, n: usize) -> f64 {
    spec.eigenvalues()
        .into_iter()
        .take(n)
        .map(|l| if kappa == 0.0 { 1.0 } else { (-l).powf(kappa) })
        .sum()
}

/// Riesz sum over the N lowest eigenvalues divided by ∫V_−^{κ+d/2}.
pub fn lt_quotient(v: &GridPotential, kappa: f64, n: usize) -> Result<f64> {
    let den = v.negative_part_integral(kappa + v.geometry.dim() as f64 / 2.0);
    if !(den > 0.0) {
        return Err(LtError::ZeroDenominator(
            "potential has no negative part".into(),
        ));
    }
    let spec = lowest_eigenpairs(v, n, 1e-10)?;
    Ok(riesz_sum(&spec, kappa, n) / den)
}

/// τ^{κ−1} Σ (λ + τ)_− over listed eigenvalues with multiplicity.
pub fn weak_trace_levels(levels: &[(f64, usize)], tau: f64, kappa: f64) -> f64 {
    let s: f64 = levels
        .iter()
        .map(|&(l, m)| m as f64 * (-(l + tau)).max(0.0))
        .sum();
    tau.powf(kappa - 1.0) * s
}

pub fn weak_trace(v: &GridPotential, tau: f64, kappa: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(LtError::InvalidParameter("tau must be positive".into()));
    }
    Ok(weak_trace_levels(&negative_eigenvalues(v), tau, kappa))
}

/// (Tr(−Δγ), ∫|∇√ρ_γ|²) for γ = Σ n_j |u_j⟩⟨u_j| on a Dirichlet line grid.
pub fn hoffmann_ostenhof(orbitals: &[Vec<f64>], occupations: &[f64], h: f64) -> (f64, f64) {
    let n = orbitals.first().map_or(0, |u| u.len());
    let diff_sq = |f: &dyn Fn(usize) -> f64| {
        let mut s = f(0).powi(2) + f(n - 1).powi(2);
        for i in 0..n - 1 {
            s += (f(i + 1) - f(i)).powi(2);
        }
        s / h
    };
    let trace: f64 = orbitals
        .iter()
        .zip(occupations)
        .map(|(u, &w)| w * diff_sq(&|i| u[i]))
        .sum();
    let rho: Vec<f64> = (0..n)
        .map(|i| {
            orbitals
                .iter()
                .zip(occupations)
                .map(|(u, &w)| w * u[i] * u[i])
                .sum::<f64>()
        })
        .collect();
    let dens = diff_sq(&|i| rho[i].sqrt());
    (trace, dens)
}
