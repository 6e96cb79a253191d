//! Two-copy test potential V = −(Q₊² + Q₋²)^{p−1} and the expansion of its rank-two quotient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LtError, Result};
use crate::params::ProblemParams;
use crate::radial_nls::{RadialProfile, SolveOptions};
use crate::special::{sphere_area, NeumaierSum};
use crate::spectra::{lowest_eigenpairs, Geometry, GridPotential};

/// Margin beyond each centre kept by the quadrature and the exact line grid.
pub const WINDOW_MARGIN: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlaps {
    pub r: f64,
    /// ∫Q².
    pub m: f64,
    /// ∫Q^{2p}.
    pub q2p: f64,
    pub a: f64,
    pub e: f64,
    pub b: f64,
    /// Normalised overlap E/m.
    pub e_r: f64,
}

/// (a+b)^p − a^p − b^p without cancellation when one argument dominates.
fn excess_power(a: f64, b: f64, p: f64) -> f64 {
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big == 0.0 {
        return 0.0;
    }
    let t = small / big;
    big.powf(p) * (p * t.ln_1p()).exp_m1() - small.powf(p)
}

struct Integrands {
    m: NeumaierSum,
    q2p: NeumaierSum,
    a: NeumaierSum,
    e: NeumaierSum,
    b: NeumaierSum,
}

impl Integrands {
    fn new() -> Self {
        Self {
            m: NeumaierSum::default(),
            q2p: NeumaierSum::default(),
            a: NeumaierSum::default(),
            e: NeumaierSum::default(),
            b: NeumaierSum::default(),
        }
    }

    /// Adds w times the integrands at a point with Q₊ = qp, Q₋ = qm; `q0` is an unshifted Q sample.
    fn add(&mut self, w: f64, qp: f64, qm: f64, q0: f64, p: f64) {
        let (a2, b2) = (qp * qp, qm * qm);
        self.m.add(w * q0 * q0);
        self.q2p.add(w * (q0 * q0).powf(p));
        self.a.add(0.5 * w * excess_power(a2, b2, p));
        self.e.add(w * qp * qm);
        let s = (a2 + b2).powf(p - 1.0);
        self.b
            .add(w * qp * qm * (s - 0.5 * (a2.powf(p - 1.0) + b2.powf(p - 1.0))));
    }
}

/// A, E, B and e_R for two copies of Q at distance R.
///
/// d = 1 uses the profile grid itself; d ≥ 2 reduces to cylindrical coordinates (x₁, s)
/// with weight |S^{d−2}|s^{d−2}.
pub fn overlap_integrals(profile: &RadialProfile, r: f64) -> Result<Overlaps> {
    let params = profile.params;
    let p = params.p;
    if !(p < 2.0) {
        return Err(LtError::InvalidParameter("binding needs p < 2".into()));
    }
    if !(r > 0.0) {
        return Err(LtError::InvalidParameter(
            "separation must be positive".into(),
        ));
    }
    if profile.r_max() < r / 2.0 + 20.0 {
        return Err(LtError::GridTooSmall(format!(
            "profile radius {} < R/2 + 20 = {}",
            profile.r_max(),
            r / 2.0 + 20.0
        )));
    }
    let h = profile.dr;
    let half = r / 2.0;
    let reach = half + WINDOW_MARGIN;
    let n = (reach / h).ceil() as i64;
    let mut acc = Integrands::new();
    if params.d == 1 {
        for i in -n..=n {
            let x = i as f64 * h;
            let w = if i.abs() == n { 0.5 * h } else { h };
            acc.add(
                w,
                profile.eval(x - half),
                profile.eval(x + half),
                profile.eval(x),
                p,
            );
        }
    } else {
        let d = params.dim();
        let ns = (WINDOW_MARGIN / h).ceil() as i64;
        let ang = sphere_area(params.d - 1);
        for j in 0..=ns {
            let s = j as f64 * h;
            let ws = if j == 0 || j == ns { 0.5 * h } else { h } * ang * s.powf(d - 2.0);
            if ws == 0.0 {
                continue;
            }
            for i in -n..=n {
                let x = i as f64 * h;
                let w = if i.abs() == n { 0.5 } else { 1.0 } * h * ws;
                let qp = profile.eval((x - half).hypot(s));
                let qm = profile.eval((x + half).hypot(s));
                acc.add(w, qp, qm, profile.eval(x.hypot(s)), p);
            }
        }
    }
    let m = acc.m.value();
    let e = acc.e.value();
    Ok(Overlaps {
        r,
        m,
        q2p: acc.q2p.value(),
        a: acc.a.value(),
        e,
        b: acc.b.value(),
        e_r: e / m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevel {
    pub h: f64,
    pub delta: f64,
    /// Tr 𝓗_−^κ from the eigenvalues h ± δ.
    pub trace_bound: f64,
    /// 2|h|^κ.
    pub trace_expansion: f64,
}

/// The 2×2 matrix of −Δ + V on the Löwdin pair ψ^{(±)} = G^{−1/2}(Q₊, Q₋).
///
/// On span{Q₊, Q₋} the operator is [[−m−A, −E−B], [−E−B, −m−A]], using −ΔQ = Q^{2p−1} − Q.
pub fn two_level_from_overlaps(o: &Overlaps, kappa: f64) -> Result<TwoLevel> {
    if !(o.e.abs() < o.m) {
        return Err(LtError::GramSingular(format!(
            "|E| = {} >= m = {}",
            o.e.abs(),
            o.m
        )));
    }
    let diag = -o.m - o.a;
    let off = -o.e - o.b;
    let sp = 1.0 / (o.m + o.e).sqrt();
    let sm = 1.0 / (o.m - o.e).sqrt();
    let alpha = 0.5 * (sp + sm);
    let beta = 0.5 * (sp - sm);
    let h = (alpha * alpha + beta * beta) * diag + 2.0 * alpha * beta * off;
    let delta = 2.0 * alpha * beta * diag + (alpha * alpha + beta * beta) * off;
    let neg = |x: f64| if x < 0.0 { (-x).powf(kappa) } else { 0.0 };
    Ok(TwoLevel {
        h,
        delta,
        trace_bound: neg(h + delta) + neg(h - delta),
        trace_expansion: 2.0 * neg(h),
    })
}

pub fn variational_two_level(
    profile: &RadialProfile,
    r: f64,
    kappa: f64,
) -> Result<(Overlaps, TwoLevel)> {
    let o = overlap_integrals(profile, r)?;
    let t = two_level_from_overlaps(&o, kappa)?;
    Ok((o, t))
}

/// Exact-eigenvalue data for d = 1 on the line grid [−R/2−30, R/2+30].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineExact {
    pub lambda1: f64,
    pub lambda2: f64,
    pub two_level_sum: f64,
    /// ∫(Q₊²+Q₋²)^p on the grid.
    pub denominator: f64,
    pub quotient: f64,
    /// Same-grid |λ₁(V_Q)|^κ/∫Q^{2p}.
    pub l1_grid: f64,
    /// Eigenvalues of the grid 2×2 matrix of the Löwdin pair (ascending).
    pub grid_variational: (f64, f64),
}

fn line_geometry(r: f64, h: f64) -> Result<(Geometry, Vec<f64>)> {
    let reach = r / 2.0 + WINDOW_MARGIN;
    let n = 2 * (reach / h).round() as usize + 1;
    let g = Geometry::line(reach, n)?;
    let xs = g.nodes();
    Ok((g, xs))
}

fn difference_form(u: &[f64], v: &[f64], pot: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut kin = u[0] * v[0] + u[n - 1] * v[n - 1];
    for i in 0..n - 1 {
        kin += (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
    }
    let p: f64 = (0..n).map(|i| pot[i] * u[i] * v[i]).sum();
    kin / h + h * p
}

pub fn line_exact(profile: &RadialProfile, r: f64) -> Result<LineExact> {
    let params = profile.params;
    if params.d != 1 {
        return Err(LtError::InvalidParameter(
            "exact two-well spectrum is d = 1 only".into(),
        ));
    }
    let p = params.p;
    let kappa = params.kappa();
    let h = profile.dr;
    let (g, xs) = line_geometry(r, h)?;
    let qp: Vec<f64> = xs.iter().map(|x| profile.eval(x - r / 2.0)).collect();
    let qm: Vec<f64> = xs.iter().map(|x| profile.eval(x + r / 2.0)).collect();
    let q0: Vec<f64> = xs.iter().map(|x| profile.eval(*x)).collect();
    let two = GridPotential::new(
        g,
        qp.iter()
            .zip(&qm)
            .map(|(a, b)| -(a * a + b * b).powf(p - 1.0))
            .collect(),
    )?;
    let spec = lowest_eigenpairs(&two, 2, 1e-8)?;
    if spec.levels.len() < 2 {
        return Err(LtError::ConvergenceFailure(
            "double well has fewer than two bound states".into(),
        ));
    }
    let (l1, l2) = (spec.levels[0].lambda, spec.levels[1].lambda);
    let two_level_sum = (-l1).powf(kappa) + (-l2).powf(kappa);
    let denominator = two.negative_part_integral(params.p_prime());
    let single = GridPotential::new(g, q0.iter().map(|q| -(q * q).powf(p - 1.0)).collect())?;
    let s1 = lowest_eigenpairs(&single, 1, 1e-8)?;
    let l1_grid =
        (-s1.levels[0].lambda).powf(kappa) / single.negative_part_integral(params.p_prime());

    // Discrete variational principle: the grid pair gives upper bounds for λ₁, λ₂ exactly.
    let dot = |u: &[f64], v: &[f64]| h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let (gm, ge) = (dot(&qp, &qp), dot(&qp, &qm));
    let hpp = difference_form(&qp, &qp, &two.samples, h);
    let hpm = difference_form(&qp, &qm, &two.samples, h);
    let hmm = difference_form(&qm, &qm, &two.samples, h);
    let mut ev = generalized_2x2([[hpp, hpm], [hpm, hmm]], [[gm, ge], [ge, dot(&qm, &qm)]])?;
    ev.sort_by(f64::total_cmp);
    Ok(LineExact {
        lambda1: l1,
        lambda2: l2,
        two_level_sum,
        denominator,
        quotient: two_level_sum / denominator,
        l1_grid,
        grid_variational: (ev[0], ev[1]),
    })
}

/// Eigenvalues of H x = λ G x for symmetric 2×2 H and positive definite G.
fn generalized_2x2(hm: [[f64; 2]; 2], gm: [[f64; 2]; 2]) -> Result<Vec<f64>> {
    let det_g = gm[0][0] * gm[1][1] - gm[0][1] * gm[1][0];
    if !(det_g > 0.0) {
        return Err(LtError::GramSingular(
            "2x2 overlap matrix is not positive".into(),
        ));
    }
    // det(H − λG) = det_g λ² − (h₀₀g₁₁ + h₁₁g₀₀ − 2h₀₁g₀₁) λ + det H.
    let b = hm[0][0] * gm[1][1] + hm[1][1] * gm[0][0] - 2.0 * hm[0][1] * gm[0][1];
    let c = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
    let disc = (b * b - 4.0 * det_g * c).max(0.0).sqrt();
    let q = -0.5 * (-b + if b >= 0.0 { -disc } else { disc });
    let r1 = q / det_g;
    let r2 = if q != 0.0 { c / q } else { 0.0 };
    Ok(vec![r1, r2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingRow {
    pub r: f64,
    pub overlaps: Overlaps,
    pub two_level: TwoLevel,
    pub exact: Option<LineExact>,
    /// L^(1) used in ρ: the same-grid value for d = 1, 1/∫Q^{2p} otherwise.
    pub l1: f64,
    /// L^(2) trial quotient; the variational bound when no exact column exists.
    pub quotient: f64,
    pub predicted: f64,
    pub rho: f64,
    /// ∫(Q₊²+Q₋²)^p − 2∫Q^{2p} − 2A.
    pub denominator_residual: f64,
}

/// Profile options for a sweep up to `r_max_sep`; Δr = 0.01 puts Q(x ∓ R/2) on nodes when R/2 is on the 0.01 lattice.
pub fn binding_profile_options(r_max_sep: f64) -> SolveOptions {
    SolveOptions {
        dr: 0.01,
        r_max: (r_max_sep / 2.0 + WINDOW_MARGIN + 10.0).max(40.0),
        tol: 1e-8,
    }
}

pub fn binding_row(profile: &RadialProfile, r: f64) -> Result<BindingRow> {
    let params = profile.params;
    let kappa = params.kappa();
    let p = params.p;
    let (o, t) = variational_two_level(profile, r, kappa)?;
    let denom = 2.0 * o.q2p + 2.0 * o.a;
    let (exact, l1, quotient, denominator_residual) = if params.d == 1 {
        let ex = line_exact(profile, r)?;
        (Some(ex), ex.l1_grid, ex.quotient, ex.denominator - denom)
    } else {
        (None, 1.0 / o.q2p, t.trace_bound / denom, 0.0)
    };
    let lead = kappa * o.a / (p * o.m);
    Ok(BindingRow {
        r,
        overlaps: o,
        two_level: t,
        exact,
        l1,
        quotient,
        predicted: l1 * (1.0 + lead),
        rho: (quotient / l1 - 1.0) / lead,
        denominator_residual,
    })
}

/// ρ(R) table over an ascending list of separations.
pub fn binding_expansion_check(
    params: ProblemParams,
    r_list: &[f64],
    profile: &RadialProfile,
) -> Result<Vec<BindingRow>> {
    if profile.params != params {
        return Err(LtError::InvalidParameter(
            "profile does not match the parameters".into(),
        ));
    }
    let kappa = params.kappa();
    let floor = (2.0 - params.dim() / 2.0).max(0.0);
    if !(kappa > floor) {
        return Err(LtError::InvalidParameter(format!(
            "binding needs κ > {floor}, got {kappa}"
        )));
    }
    if r_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LtError::InvalidParameter(
            "separations must be ascending".into(),
        ));
    }
    r_list
        .par_iter()
        .map(|&r| binding_row(profile, r))
        .collect()
}
