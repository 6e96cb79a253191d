//! Self-consistent optimisation of the finite-rank dual quotient K^(N)_{p,1}.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::constants::duality_rhs;
use crate::error::{LtError, Result};
use crate::params::ProblemParams;
use crate::spectra::{lowest_eigenpairs, lt_quotient, Geometry, GridPotential};

/// Closed-form one-dimensional ground state (p sech²((p−1)x))^{1/(2p−2)}.
pub fn line_ground_state(p: f64, x: f64) -> f64 {
    let c = ((p - 1.0) * x).cosh();
    (p / (c * c)).powf(1.0 / (2.0 * p - 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixState {
    pub params: ProblemParams,
    pub geometry: Geometry,
    /// Largest rank the optimisation allows.
    pub rank_limit: usize,
    /// Orthonormal under h·Σ.
    pub orbitals: Vec<Vec<f64>>,
    pub occupations: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub density: Vec<f64>,
    pub quotient: f64,
    pub scf_residual: f64,
    pub iterations: usize,
}

impl DensityMatrixState {
    /// Assembles γ = Σ n_j|u_j⟩⟨u_j| on a line grid and evaluates its quotient.
    pub fn from_orbitals(
        params: ProblemParams,
        geometry: Geometry,
        orbitals: Vec<Vec<f64>>,
        occupations: Vec<f64>,
        eigenvalues: Vec<f64>,
    ) -> Result<Self> {
        if !matches!(geometry, Geometry::Line { .. }) {
            return Err(LtError::InvalidParameter(
                "density matrices live on the line".into(),
            ));
        }
        if orbitals.len() != occupations.len() || orbitals.is_empty() {
            return Err(LtError::InvalidParameter(
                "need one occupation per orbital".into(),
            ));
        }
        let density = assemble_density(&orbitals, &occupations);
        let mut s = Self {
            params,
            geometry,
            rank_limit: orbitals.len(),
            orbitals,
            occupations,
            eigenvalues,
            density,
            quotient: 0.0,
            scf_residual: 0.0,
            iterations: 0,
        };
        s.quotient = k_quotient(&s);
        Ok(s)
    }

    /// Rank-one state built from samples of a single (unnormalised) function.
    pub fn rank_one(
        params: ProblemParams,
        geometry: Geometry,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let h = geometry.spacing();
        let mut u: Vec<f64> = geometry.nodes().into_iter().map(f).collect();
        let norm = (h * u.iter().map(|x| x * x).sum::<f64>()).sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        Self::from_orbitals(params, geometry, vec![u], vec![norm * norm], vec![])
    }

    pub fn rank(&self) -> usize {
        self.orbitals.len()
    }

    pub fn spacing(&self) -> f64 {
        self.geometry.spacing()
    }

    /// Tr(−Δγ) with the kinetic term in difference form, Dirichlet ends included.
    pub fn kinetic_trace(&self) -> f64 {
        let h = self.spacing();
        self.orbitals
            .iter()
            .zip(&self.occupations)
            .map(|(u, n)| n * difference_energy(u, h))
            .sum()
    }

    /// ‖γ‖_{S^q}; the largest occupation when q = ∞.
    pub fn schatten_norm(&self) -> f64 {
        let q = self.params.q();
        if q.is_infinite() {
            self.occupations.iter().cloned().fold(0.0, f64::max)
        } else {
            self.occupations
                .iter()
                .map(|n| n.powf(q))
                .sum::<f64>()
                .powf(1.0 / q)
        }
    }

    /// ∫ρ^p by the trapezoid rule.
    pub fn density_lp(&self) -> f64 {
        let h = self.spacing();
        let p = self.params.p;
        trapezoid_pow(&self.density, p, h)
    }

    /// Largest |h·⟨u_i,u_j⟩ − δ_ij|.
    pub fn gram_error(&self) -> f64 {
        let h = self.spacing();
        let mut worst: f64 = 0.0;
        for (i, a) in self.orbitals.iter().enumerate() {
            for (j, b) in self.orbitals.iter().enumerate() {
                let ip = h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                worst = worst.max((ip - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// The potential −ρ^{p−1} of the mean-field operator.
    pub fn mean_field(&self) -> GridPotential {
        let e = self.params.p - 1.0;
        GridPotential {
            geometry: self.geometry,
            samples: self.density.iter().map(|r| -r.max(0.0).powf(e)).collect(),
        }
    }
}

fn difference_energy(u: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut s = u[0] * u[0] + u[n - 1] * u[n - 1];
    for i in 0..n - 1 {
        s += (u[i + 1] - u[i]).powi(2);
    }
    s / h
}

fn trapezoid_pow(f: &[f64], p: f64, h: f64) -> f64 {
    let n = f.len();
    let inner: f64 = f.iter().map(|r| r.max(0.0).powf(p)).sum();
    h * (inner - 0.5 * (f[0].max(0.0).powf(p) + f[n - 1].max(0.0).powf(p)))
}

fn assemble_density(orbitals: &[Vec<f64>], occupations: &[f64]) -> Vec<f64> {
    let n = orbitals[0].len();
    let mut rho = vec![0.0; n];
    for (u, w) in orbitals.iter().zip(occupations) {
        for i in 0..n {
            rho[i] += w * u[i] * u[i];
        }
    }
    rho
}

/// ‖γ‖_{S^q}^{(p(2−d)+d)/(d(p−1))}·Tr(−Δγ)/‖ρ‖_p^{2p/(d(p−1))}.
pub fn k_quotient(state: &DensityMatrixState) -> f64 {
    let d = state.params.dim();
    let p = state.params.p;
    let e1 = (p * (2.0 - d) + d) / (d * (p - 1.0));
    let e2 = 2.0 * p / (d * (p - 1.0));
    let rho_p = state.density_lp().powf(1.0 / p);
    state.schatten_norm().powf(e1) * state.kinetic_trace() / rho_p.powf(e2)
}

/// Optimal occupations for the given negative eigenvalues.
pub fn occupations_from_eigenvalues(mu: &[f64], params: ProblemParams) -> Result<Vec<f64>> {
    if mu.is_empty() || mu.iter().any(|m| !(*m < 0.0)) {
        return Err(LtError::InvalidParameter(
            "eigenvalues must be negative".into(),
        ));
    }
    params.require_at_most_critical()?;
    let d = params.dim();
    let p = params.p;
    if params.is_mass_critical() {
        let c = 2.0 / d * (d / (d + 2.0)).powf(1.0 / (p - 1.0));
        let s: f64 = mu.iter().map(|m| m.abs()).sum();
        return Ok(mu.iter().map(|_| c / s).collect());
    }
    let q = params.q();
    let c =
        (2.0 * p / (d * (p - 1.0))).powf(1.0 / (p - 1.0)) * (2.0 * p + d - d * p) / (d * (p - 1.0));
    let s: f64 = mu.iter().map(|m| m.abs().powf(q / (q - 1.0))).sum();
    Ok(mu
        .iter()
        .map(|m| c * m.abs().powf(1.0 / (q - 1.0)) / s)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScfInit {
    /// 3·exp(−x²/18).
    Gaussian,
    /// Σ_j Q²(x − x_j) with the centres spaced `separation` apart.
    Translates {
        separation: f64,
    },
    Density {
        samples: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfOptions {
    pub half_width: f64,
    pub h: f64,
    pub damping: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub init: ScfInit,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            h: 0.01,
            damping: 0.3,
            max_iter: 4000,
            tol: 1e-10,
            init: ScfInit::Gaussian,
        }
    }
}

impl ScfOptions {
    pub fn geometry(&self) -> Result<Geometry> {
        let n = (2.0 * self.half_width / self.h).round() as usize + 1;
        Geometry::line(self.half_width, n)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub quotient: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScfRun {
    pub state: DensityMatrixState,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

fn initial_density(
    params: ProblemParams,
    n: usize,
    opts: &ScfOptions,
    g: &Geometry,
) -> Result<Vec<f64>> {
    let xs = g.nodes();
    match &opts.init {
        ScfInit::Gaussian => Ok(xs.iter().map(|x| 3.0 * (-x * x / 18.0).exp()).collect()),
        ScfInit::Translates { separation } => Ok(xs
            .iter()
            .map(|x| {
                (0..n)
                    .map(|j| {
                        let c = (j as f64 - (n as f64 - 1.0) / 2.0) * separation;
                        line_ground_state(params.p, x - c).powi(2)
                    })
                    .sum()
            })
            .collect()),
        ScfInit::Density { samples } => {
            if samples.len() != xs.len() {
                return Err(LtError::InvalidParameter(
                    "initial density has the wrong length".into(),
                ));
            }
            Ok(samples.clone())
        }
    }
}

/// Runs the damped fixed-point map ρ ↦ Σ n_j(μ)|u_j|² and reports whether it converged.
pub fn scf_run(params: ProblemParams, n: usize, opts: &ScfOptions) -> Result<ScfRun> {
    if params.d != 1 {
        return Err(LtError::InvalidParameter(
            "the SCF runs in d = 1 only".into(),
        ));
    }
    params.require_at_most_critical()?;
    if n == 0 {
        return Err(LtError::InvalidParameter("N must be at least 1".into()));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(LtError::InvalidParameter(
            "damping must lie in (0, 1]".into(),
        ));
    }
    let g = opts.geometry()?;
    let h = g.spacing();
    let mut rho = initial_density(params, n, opts, &g)?;
    let mut damping = opts.damping;
    let mut prev_q = f64::INFINITY;
    let mut trace = Vec::new();
    let mut last: Option<DensityMatrixState> = None;
    for it in 1..=opts.max_iter {
        let mass: f64 = h * rho.iter().sum::<f64>();
        if !(mass > 1e-12) {
            return Err(LtError::CollapseToZero);
        }
        let v = GridPotential {
            geometry: g,
            samples: rho
                .iter()
                .map(|r| -r.max(0.0).powf(params.p - 1.0))
                .collect(),
        };
        let spec = lowest_eigenpairs(&v, n, 1e-8)?;
        if spec.levels.is_empty() {
            return Err(LtError::CollapseToZero);
        }
        let mu: Vec<f64> = spec.levels.iter().map(|l| l.lambda).collect();
        let occ = occupations_from_eigenvalues(&mu, params)?;
        let orbitals: Vec<Vec<f64>> = spec.levels.into_iter().map(|l| l.vector).collect();
        let mut state = DensityMatrixState::from_orbitals(params, g, orbitals, occ, mu)?;
        state.rank_limit = n;
        let residual = h * state
            .density
            .iter()
            .zip(&rho)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        state.scf_residual = residual;
        state.iterations = it;
        trace.push(TraceRow {
            iter: it,
            quotient: state.quotient,
            residual,
        });
        if state.quotient > prev_q + 1e-12 {
            damping = (damping / 2.0).max(0.01);
        }
        prev_q = state.quotient;
        if residual < opts.tol {
            return Ok(ScfRun {
                state,
                trace,
                converged: true,
            });
        }
        for (r, c) in rho.iter_mut().zip(&state.density) {
            *r = (1.0 - damping) * *r + damping * c;
        }
        last = Some(state);
    }
    Ok(ScfRun {
        state: last.expect("max_iter >= 1"),
        trace,
        converged: false,
    })
}

/// Converged SCF state, or `NoConvergence` carrying the last iterate.
pub fn scf_iterate(
    params: ProblemParams,
    n: usize,
    opts: &ScfOptions,
) -> Result<DensityMatrixState> {
    let run = scf_run(params, n, opts)?;
    if run.converged {
        Ok(run.state)
    } else {
        Err(LtError::NoConvergence {
            iterations: run.state.iterations,
            residual: run.state.scf_residual,
            last: Box::new(run.state),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BindingTrial {
    pub separation: f64,
    pub quotient: f64,
    pub gram_condition: f64,
}

/// Quotient of the Löwdin-orthonormalised union of the state and its translate by R.
pub fn binding_trial(state: &DensityMatrixState, r: f64) -> Result<BindingTrial> {
    // p = 2 is admitted as the borderline case where no binding is expected.
    if !(state.params.p <= 2.0) {
        return Err(LtError::InvalidParameter(
            "binding trial needs p ≤ 2".into(),
        ));
    }
    let h = state.spacing();
    let shift = (r / h).round() as usize;
    let left = shift / 2;
    let right = shift - left;
    let len = state.geometry.len();
    if shift == 0 || shift >= len {
        return Err(LtError::InvalidParameter(
            "separation must fit on the grid".into(),
        ));
    }
    let translate = |u: &[f64], s: isize| -> Vec<f64> {
        (0..len as isize)
            .map(|i| {
                let j = i - s;
                if j >= 0 && (j as usize) < len {
                    u[j as usize]
                } else {
                    0.0
                }
            })
            .collect()
    };
    let mut funcs = Vec::new();
    let mut occ = Vec::new();
    for (u, w) in state.orbitals.iter().zip(&state.occupations) {
        funcs.push(translate(u, -(left as isize)));
        occ.push(*w);
    }
    for (u, w) in state.orbitals.iter().zip(&state.occupations) {
        funcs.push(translate(u, right as isize));
        occ.push(*w);
    }
    let m = funcs.len();
    let gram = DMatrix::from_fn(m, m, |a, b| {
        h * funcs[a]
            .iter()
            .zip(&funcs[b])
            .map(|(x, y)| x * y)
            .sum::<f64>()
    });
    let eig = SymmetricEigen::new(gram);
    let smax = eig.eigenvalues.max();
    let smin = eig.eigenvalues.min();
    if !(smin > 1e-12 * smax) {
        return Err(LtError::GramSingular(format!(
            "overlap eigenvalue {smin:e}"
        )));
    }
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|s| 1.0 / s.sqrt()))
        * eig.eigenvectors.transpose();
    let mut ortho = vec![vec![0.0; len]; m];
    for a in 0..m {
        for b in 0..m {
            let c = inv_sqrt[(a, b)];
            for i in 0..len {
                ortho[a][i] += c * funcs[b][i];
            }
        }
    }
    let doubled =
        DensityMatrixState::from_orbitals(state.params, state.geometry, ortho, occ, vec![])?;
    Ok(BindingTrial {
        separation: shift as f64 * h,
        quotient: doubled.quotient,
        gram_condition: smax / smin,
    })
}

#[derive(Debug, Clone)]
pub struct DualWitness {
    pub potential: GridPotential,
    pub l_quotient: f64,
    /// K·L^{2/d}/rhs − 1.
    pub duality_residual: f64,
    pub negative_eigenvalues: usize,
}

/// V = −ρ^{p−1} and its finite-rank Lieb-Thirring quotient.
pub fn dual_witness(state: &DensityMatrixState) -> Result<DualWitness> {
    let pp = state.params;
    let kappa = pp.kappa();
    let v = state.mean_field();
    let l = lt_quotient(&v, kappa, state.rank_limit)?;
    let rhs = duality_rhs(kappa, pp.d);
    let count = crate::spectra::negative_eigenvalues(&v)
        .iter()
        .map(|(_, m)| m)
        .sum();
    Ok(DualWitness {
        duality_residual: state.quotient * l.powf(2.0 / pp.dim()) / rhs - 1.0,
        potential: v,
        l_quotient: l,
        negative_eigenvalues: count,
    })
}
