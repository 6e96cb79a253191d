//! Closed-form and profile-based Lieb-Thirring constants, their duals, and the crossing point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LtError, Result};
use crate::params::ProblemParams;
use crate::profile_cache::{cache_key, ground_state, ProfileCache};
use crate::radial_nls::{normalized_u, RadialProfile, SolveOptions};
use crate::special::{gamma, golden_max, ln_gamma, self_power, simpson, sphere_area};

/// L^sc_{κ,d} = Γ(κ+1)/(2^d π^{d/2} Γ(κ+d/2+1)).
pub fn semiclassical_l(kappa: f64, d: usize) -> f64 {
    let df = d as f64;
    let log = ln_gamma(kappa + 1.0) - ln_gamma(kappa + df / 2.0 + 1.0);
    log.exp() / (2f64.powf(df) * std::f64::consts::PI.powf(df / 2.0))
}

/// Right side of K·L^{2/d} = (κ/(κ+d/2))^{2κ/d}·d/(2κ+d).
pub fn duality_rhs(kappa: f64, d: usize) -> f64 {
    let df = d as f64;
    (kappa / (kappa + df / 2.0)).powf(2.0 * kappa / df) * df / (2.0 * kappa + df)
}

/// The K dual to a given L.
pub fn k_from_l(kappa: f64, d: usize, l: f64) -> f64 {
    duality_rhs(kappa, d) / l.powf(2.0 / d as f64)
}

/// The L dual to a given K.
pub fn l_from_k(kappa: f64, d: usize, k: f64) -> f64 {
    (duality_rhs(kappa, d) / k).powf(d as f64 / 2.0)
}

/// Gagliardo-Nirenberg quotient T·m^{((2−d)p+d)/(d(p−1))}/P^{2/(d(p−1))} of a profile.
pub fn gn_quotient(profile: &RadialProfile) -> f64 {
    let d = profile.params.dim();
    let p = profile.params.p;
    let em = ((2.0 - d) * p + d) / (d * (p - 1.0));
    let ep = 2.0 / (d * (p - 1.0));
    profile.kinetic * profile.mass.powf(em) / profile.lp_norm.powf(ep)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OneBound {
    pub kappa: f64,
    pub d: usize,
    pub p: f64,
    /// 1/∫Q^{2p}.
    pub l1: f64,
    /// K^GN from the same profile.
    pub k_gn: f64,
    /// L^(1) recovered from K^GN through the duality formula.
    pub l1_from_k: f64,
    pub cache_key: String,
}

impl OneBound {
    /// Relative disagreement between the two routes to L^(1).
    pub fn route_residual(&self) -> f64 {
        (self.l1_from_k / self.l1 - 1.0).abs()
    }
}

/// Valid κ for the ground-state route: κ > 1/2 in d = 1, κ > 0 otherwise.
pub fn check_one_bound_kappa(kappa: f64, d: usize) -> Result<ProblemParams> {
    let min = if d == 1 { 0.5 } else { 0.0 };
    if !(kappa > min) {
        return Err(LtError::InvalidParameter(format!(
            "one-bound constant needs kappa > {min} in d = {d}, got {kappa}"
        )));
    }
    ProblemParams::from_kappa(kappa, d)
}

pub fn one_bound_l(
    kappa: f64,
    d: usize,
    opts: &SolveOptions,
    cache: Option<&ProfileCache>,
) -> Result<OneBound> {
    let params = check_one_bound_kappa(kappa, d)?;
    let q = ground_state(params, opts, cache)?;
    let k_gn = gn_quotient(&q);
    Ok(OneBound {
        kappa,
        d,
        p: params.p,
        l1: 1.0 / q.lp_norm,
        k_gn,
        l1_from_k: l_from_k(kappa, d, k_gn),
        cache_key: cache_key(params, opts),
    })
}

pub fn default_crossing_bracket(d: usize) -> (f64, f64) {
    match d {
        1 => (1.2, 2.0),
        2 => (1.0, 1.4),
        3 => (0.6, 1.1),
        _ => (0.05, 1.0),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Crossing {
    pub d: usize,
    pub kappa1: f64,
    pub tolerance: f64,
    pub iterations: usize,
    /// L^(1)/L^sc − 1 at the returned κ.
    pub residual: f64,
    pub cache_keys: Vec<String>,
}

/// Root of κ ↦ L^(1)/L^sc − 1, which is strictly decreasing, by bisection.
pub fn crossing_point(
    d: usize,
    bracket: (f64, f64),
    tol: f64,
    opts: &SolveOptions,
    cache: Option<&ProfileCache>,
) -> Result<Crossing> {
    let (mut lo, mut hi) = bracket;
    if d >= 8 {
        return Err(LtError::NoSignChange { lo, hi });
    }
    let mut keys = Vec::new();
    let f = |k: f64, keys: &mut Vec<String>| -> Result<f64> {
        let ob = one_bound_l(k, d, opts, cache)?;
        keys.push(ob.cache_key);
        Ok(ob.l1 / semiclassical_l(k, d) - 1.0)
    };
    let flo = f(lo, &mut keys)?;
    let fhi = f(hi, &mut keys)?;
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(LtError::NoSignChange { lo, hi });
    }
    let mut iterations = 0;
    let (mut best, mut fbest) = if flo.abs() < fhi.abs() {
        (lo, flo)
    } else {
        (hi, fhi)
    };
    while fbest.abs() >= tol && hi - lo > 1e-13 * hi {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let fm = f(mid, &mut keys)?;
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if fm.abs() < fbest.abs() {
            best = mid;
            fbest = fm;
        }
        if iterations > 200 {
            return Err(LtError::ConvergenceFailure(
                "crossing bisection stalled".into(),
            ));
        }
    }
    keys.sort();
    keys.dedup();
    Ok(Crossing {
        d,
        kappa1: best,
        tolerance: tol,
        iterations,
        residual: fbest,
        cache_keys: keys,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub kappa: f64,
    pub l_sc: f64,
    pub l1: f64,
    pub ratio: f64,
}

/// L^(1)/L^sc on each κ of the grid, solved in parallel.
pub fn aizenman_lieb_scan(
    d: usize,
    kappas: &[f64],
    opts: &SolveOptions,
    cache: Option<&ProfileCache>,
) -> Result<Vec<ScanRow>> {
    kappas
        .par_iter()
        .map(|&k| {
            let ob = one_bound_l(k, d, opts, cache)?;
            let l_sc = semiclassical_l(k, d);
            Ok(ScanRow {
                kappa: k,
                l_sc,
                l1: ob.l1,
                ratio: ob.l1 / l_sc,
            })
        })
        .collect()
}

/// (|λ|^κ, c_{κ,κ′}∫₀^∞(λ+t)_−^{κ′}t^{κ−κ′−1}dt) for λ < 0 and κ > κ′ ≥ 0.
pub fn beta_identity(lambda: f64, kappa: f64, kappa_p: f64) -> (f64, f64) {
    let a = kappa - kappa_p - 1.0;
    let l = lambda.abs();
    let c = gamma(kappa + 1.0) / (gamma(kappa_p + 1.0) * gamma(kappa - kappa_p));
    // t = |λ|u^{1/(a+1)} turns t^a dt into |λ|^{a+1}du/(a+1).
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f: Vec<f64> = (0..=n)
        .map(|i| {
            let u = i as f64 * h;
            (l * (1.0 - u.powf(1.0 / (a + 1.0)))).max(0.0).powf(kappa_p)
        })
        .collect();
    let integral = l.powf(a + 1.0) / (a + 1.0) * simpson(&f, h);
    (l.powf(kappa), c * integral)
}

/// L̃^sc_{κ,d} = (κ−1)^{κ−1}(1+d/2)^{1+d/2}/(κ+d/2)^{κ+d/2}·L^sc_{1,d}.
pub fn tilde_l_sc(kappa: f64, d: usize) -> f64 {
    let h = d as f64 / 2.0;
    let log = (1.0 + h) * (1.0 + h).ln() - (kappa + h) * (kappa + h).ln();
    self_power(kappa - 1.0) * log.exp() * semiclassical_l(1.0, d)
}

/// ((κ−1)^{κ−1}/κ^κ)·L^sc_{κ,d} − L̃^sc_{κ,d}.
pub fn tilde_gap(kappa: f64, d: usize) -> f64 {
    self_power(kappa - 1.0) / kappa.powf(kappa) * semiclassical_l(kappa, d) - tilde_l_sc(kappa, d)
}

pub fn tilde_constants(kappa: f64, d: usize) -> Result<(f64, f64)> {
    if !(kappa >= 1.0) {
        return Err(LtError::InvalidParameter(format!(
            "need kappa >= 1, got {kappa}"
        )));
    }
    Ok((tilde_l_sc(kappa, d), tilde_gap(kappa, d)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapSup {
    pub d: usize,
    pub kappa: f64,
    pub gap: f64,
}

/// sup_{κ>1} of the tilde gap: log-spaced scan on [1+1e−4, 50], then golden section.
pub fn tilde_gap_sup(d: usize) -> GapSup {
    let m = 400;
    let (a, b) = ((1e-4f64).ln(), (49.0f64).ln());
    let grid: Vec<f64> = (0..=m)
        .map(|i| 1.0 + (a + (b - a) * i as f64 / m as f64).exp())
        .collect();
    let mut best = 0;
    for i in 1..grid.len() {
        if tilde_gap(grid[i], d) > tilde_gap(grid[best], d) {
            best = i;
        }
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(m)];
    let (k, g) = golden_max(|k| tilde_gap(k, d), lo, hi, 1e-12);
    GapSup {
        d,
        kappa: k,
        gap: g,
    }
}

/// Right side of K̃·L̃^{2/d} = (d/2)(κ−1)^{2(κ−1)/d}/(κ+d/2)^{2κ/d+1}.
pub fn tilde_duality_rhs(kappa: f64, d: usize) -> f64 {
    let df = d as f64;
    let base = self_power(kappa - 1.0).powf(2.0 / df);
    df / 2.0 * base / (kappa + df / 2.0).powf(2.0 * kappa / df + 1.0)
}

/// The same right side written in p.
pub fn tilde_duality_rhs_in_p(params: ProblemParams) -> f64 {
    let d = params.dim();
    let p = params.p;
    let e = (d + 2.0 - d * p) / (d * (p - 1.0));
    (1.0 - d * (p - 1.0) / 2.0).powf(e) * d / 2.0 * (p - 1.0).powf((2.0 + d) / d)
        / p.powf(2.0 * p / (d * (p - 1.0)))
}

pub fn tilde_l_from_k(kappa: f64, d: usize, k: f64) -> f64 {
    (tilde_duality_rhs(kappa, d) / k).powf(d as f64 / 2.0)
}

pub fn tilde_k_from_l(kappa: f64, d: usize, l: f64) -> f64 {
    tilde_duality_rhs(kappa, d) / l.powf(2.0 / d as f64)
}

/// K̃ evaluated with |J(1)| for the energy per particle.
pub fn tilde_k_from_j1(params: ProblemParams, j1: f64) -> Result<f64> {
    params.require_subcritical()?;
    if !(j1 < 0.0) {
        return Err(LtError::InvalidParameter(format!(
            "need J(1) < 0, got {j1}"
        )));
    }
    let d = params.dim();
    let p = params.p;
    let e = (d + 2.0 - p * d) / (d * (p - 1.0));
    Ok(j1.abs().powf(-e) / (p - 1.0)
        * (d / (2.0 * p)).powf(2.0 / (d * (p - 1.0)))
        * (1.0 + 2.0 / d - p).powf(-e))
}

/// The p-independent semiclassical K̃, 4π²d/(d+2)·(d/|S^{d−1}|)^{2/d}.
pub fn tilde_k_sc_closed_form(d: usize) -> f64 {
    let df = d as f64;
    4.0 * std::f64::consts::PI.powi(2) * df / (df + 2.0) * (df / sphere_area(d)).powf(2.0 / df)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub params: ProblemParams,
    pub kappa: f64,
    /// Infinite at the critical exponent; serialised as null there.
    pub q: Option<f64>,
    #[serde(rename = "L_sc")]
    pub l_sc: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    /// Present for κ ≥ 1.
    #[serde(rename = "tildeL_sc")]
    pub tilde_l_sc: Option<f64>,
    #[serde(rename = "tildeK_sc")]
    pub tilde_k_sc: Option<f64>,
    /// ((κ−1)^{κ−1}/κ^κ)L^sc − L̃^sc, present for κ ≥ 1.
    pub tilde_gap: Option<f64>,
    /// |K1·L1^{2/d}/rhs − 1| with K1 and L1 from independent integrals.
    pub duality_residual: f64,
    /// Relative gap between 1/∫Q^{2p} and L^(1) derived from K^GN.
    pub route_residual: f64,
    /// Present for p < 1 + 2/d.
    #[serde(rename = "J1")]
    pub j1: Option<f64>,
    #[serde(rename = "tildeK1")]
    pub tilde_k1: Option<f64>,
    pub cache_key: String,
}

pub fn constants_report(
    kappa: f64,
    d: usize,
    opts: &SolveOptions,
    cache: Option<&ProfileCache>,
) -> Result<ConstantsReport> {
    let params = check_one_bound_kappa(kappa, d)?;
    let q = ground_state(params, opts, cache)?;
    let l1 = 1.0 / q.lp_norm;
    let k1 = gn_quotient(&q);
    let duality_residual = (k1 * l1.powf(2.0 / d as f64) / duality_rhs(kappa, d) - 1.0).abs();
    let (j1, tilde_k1) = if params.is_mass_subcritical() {
        let u = normalized_u(&q)?;
        let j = u.kinetic - u.lp_norm / params.p;
        (Some(j), Some(tilde_k_from_j1(params, j)?))
    } else {
        (None, None)
    };
    let tilde = (kappa >= 1.0).then(|| {
        let l = tilde_l_sc(kappa, d);
        (l, tilde_k_from_l(kappa, d, l), tilde_gap(kappa, d))
    });
    let qv = params.q();
    Ok(ConstantsReport {
        params,
        kappa,
        q: qv.is_finite().then_some(qv),
        l_sc: semiclassical_l(kappa, d),
        l1,
        k1,
        tilde_l_sc: tilde.map(|t| t.0),
        tilde_k_sc: tilde.map(|t| t.1),
        tilde_gap: tilde.map(|t| t.2),
        duality_residual,
        route_residual: (l_from_k(kappa, d, k1) / l1 - 1.0).abs(),
        j1,
        tilde_k1,
        cache_key: cache_key(params, opts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn semiclassical_examples() {
        assert_relative_eq!(semiclassical_l(1.5, 1), 3.0 / 16.0, max_relative = 1e-13);
        assert_relative_eq!(
            semiclassical_l(1.0, 1),
            2.0 / (3.0 * PI),
            max_relative = 1e-13
        );
        for d in 1..6 {
            let df = d as f64;
            let ball = PI.powf(df / 2.0) / gamma(df / 2.0 + 1.0);
            assert_relative_eq!(
                semiclassical_l(0.0, d),
                ball / (2.0 * PI).powf(df),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn cubic_line_anchor() {
        let ob = one_bound_l(1.5, 1, &SolveOptions::default(), None).unwrap();
        assert_relative_eq!(ob.l1, 3.0 / 16.0, max_relative = 1e-8);
        assert!(ob.route_residual() < 1e-8);
        let pp = ProblemParams::new(1, 2.0).unwrap();
        let q = crate::radial_nls::solve_ground_state(pp, &SolveOptions::default()).unwrap();
        assert_relative_eq!(gn_quotient(&q), 3.0, max_relative = 1e-8);
        assert_relative_eq!(
            3.0 * (3.0f64 / 16.0).powi(2),
            27.0 / 256.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(duality_rhs(1.5, 1), 27.0 / 256.0, max_relative = 1e-14);
    }

    #[test]
    fn tilde_k_at_cubic_line() {
        let pp = ProblemParams::new(1, 2.0).unwrap();
        let k = tilde_k_from_j1(pp, -1.0 / 48.0).unwrap();
        assert_relative_eq!(k, 3.0, max_relative = 1e-14);
        let k2 = tilde_k_from_j1(pp, -2.0 / 48.0).unwrap();
        assert_relative_eq!(k2 / k, 2f64.powf(-1.0), max_relative = 1e-14);
    }

    #[test]
    fn tilde_gap_vanishes_at_one() {
        for d in 1..4 {
            assert_eq!(tilde_gap(1.0, d), 0.0);
        }
    }

    #[test]
    fn tilde_sc_dual_matches_closed_form() {
        for d in 1..4 {
            let want = tilde_k_sc_closed_form(d);
            for &k in &[1.0, 1.3, 2.0, 7.5] {
                let got = tilde_k_from_l(k, d, tilde_l_sc(k, d));
                assert_relative_eq!(got, want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn beta_identity_spot_check() {
        let (l, r) = beta_identity(-1.0, 2.0, 1.0);
        assert_relative_eq!(l, 1.0);
        assert_relative_eq!(r, 1.0, max_relative = 1e-10);
        let (l, r) = beta_identity(-2.5, 2.5, 0.3);
        assert_relative_eq!(l, r, max_relative = 1e-6);
    }

    #[test]
    fn report_for_cubic_line() {
        let rep = constants_report(1.5, 1, &SolveOptions::default(), None).unwrap();
        assert_relative_eq!(rep.l_sc, 0.1875, max_relative = 1e-13);
        assert_relative_eq!(rep.l1, 0.1875, max_relative = 1e-8);
        assert_relative_eq!(rep.k1, 3.0, max_relative = 1e-8);
        assert!(rep.duality_residual < 1e-8);
        assert_relative_eq!(rep.j1.unwrap(), -1.0 / 48.0, max_relative = 1e-8);
        assert_relative_eq!(rep.tilde_k1.unwrap(), 3.0, max_relative = 1e-7);
        assert!(rep.tilde_gap.unwrap() > 0.0);
    }

    #[test]
    fn crossing_rejects_high_dimension() {
        let r = crossing_point(8, (0.1, 1.0), 1e-6, &SolveOptions::default(), None);
        assert!(matches!(r, Err(LtError::NoSignChange { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn both_tilde_duality_forms_agree(d in 1usize..4, t in 0.05f64..0.95) {
            let pp = ProblemParams::new(d, 1.0 + t * 2.0 / d as f64).unwrap();
            let a = tilde_duality_rhs(pp.kappa(), d);
            let b = tilde_duality_rhs_in_p(pp);
            prop_assert!((a / b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn duality_maps_invert(d in 1usize..4, k in 0.6f64..6.0, l in 0.01f64..2.0) {
            let back = l_from_k(k, d, k_from_l(k, d, l));
            prop_assert!((back / l - 1.0).abs() < 1e-12);
        }

        #[test]
        fn tilde_gap_nonnegative(d in 1usize..4, k in 1.0f64..50.0) {
            prop_assert!(tilde_gap(k, d) >= -1e-15 * semiclassical_l(k, d));
        }
    }
}
