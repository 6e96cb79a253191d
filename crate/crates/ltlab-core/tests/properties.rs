use ltlab::manakov::{ode_residual, soliton_norms, SolitonPair};
use ltlab::scf::{occupations_from_eigenvalues, scf_run, DensityMatrixState, ScfOptions};
use ltlab::spectra::{lowest_eigenpairs, lt_quotient, Geometry, GridPotential};
use ltlab::weak_norm::{quasinorm, sandwich_check, StepFunction};
use ltlab::ProblemParams;
use proptest::prelude::*;

fn well(g: Geometry, bumps: &[(f64, f64, f64)]) -> GridPotential {
    GridPotential::from_fn(g, |x| {
        -bumps
            .iter()
            .map(|(a, c, s)| a * (-(x - c).powi(2) / (2.0 * s * s)).exp())
            .sum::<f64>()
    })
    .unwrap()
}

fn bumps() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.5f64..4.0, -4.0f64..4.0, 0.4f64..1.5), 1..4)
}

fn steps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0f64..10.0, 0.01f64..5.0), 1..8)
        .prop_filter("nonzero", |s| s.iter().any(|(v, _)| v.abs() > 1e-6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn occupations_follow_eigenvalue_depth(
        p in 1.1f64..3.0,
        mut mu in prop::collection::vec(-5.0f64..-0.01, 1..6),
    ) {
        mu.sort_by(f64::total_cmp);
        let pp = ProblemParams::new(1, p).unwrap();
        let n = occupations_from_eigenvalues(&mu, pp).unwrap();
        prop_assert!(n.iter().all(|x| *x > 0.0));
        for w in n.windows(2) {
            if pp.is_mass_critical() {
                prop_assert!((w[0] - w[1]).abs() <= 1e-12 * w[0]);
            } else {
                prop_assert!(w[0] >= w[1] * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn critical_occupations_are_flat(mut mu in prop::collection::vec(-5.0f64..-0.01, 1..6)) {
        mu.sort_by(f64::total_cmp);
        let pp = ProblemParams::new(1, 3.0).unwrap();
        let n = occupations_from_eigenvalues(&mu, pp).unwrap();
        prop_assert!(n.iter().all(|x| (x - n[0]).abs() <= 1e-12 * n[0]));
    }

    #[test]
    fn lt_quotient_is_reflection_invariant(b in bumps(), n in 1usize..4) {
        let g = Geometry::line(15.0, 1501).unwrap();
        let v = well(g, &b);
        let mirrored: Vec<(f64, f64, f64)> = b.iter().map(|(a, c, s)| (*a, -c, *s)).collect();
        let w = well(g, &mirrored);
        let (x, y) = (lt_quotient(&v, 1.5, n).unwrap(), lt_quotient(&w, 1.5, n).unwrap());
        prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-12));
    }

    #[test]
    fn lt_quotient_nondecreasing_in_rank(b in bumps()) {
        let g = Geometry::line(15.0, 1501).unwrap();
        let v = well(g, &b);
        let qs: Vec<f64> = (1..=4).map(|n| lt_quotient(&v, 1.0, n).unwrap()).collect();
        for w in qs.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn k_quotient_ignores_occupation_scale(c in 0.01f64..100.0, p in 1.2f64..2.8, w in 0.3f64..1.5) {
        let pp = ProblemParams::new(1, p).unwrap();
        let g = Geometry::line(20.0, 2001).unwrap();
        let s = DensityMatrixState::rank_one(pp, g, |x| (-(x * x) / (2.0 * w * w)).exp()).unwrap();
        let scaled = DensityMatrixState::from_orbitals(
            pp,
            g,
            s.orbitals.clone(),
            s.occupations.iter().map(|o| o * c).collect(),
            vec![],
        )
        .unwrap();
        prop_assert!((scaled.quotient - s.quotient).abs() <= 1e-9 * s.quotient);
    }

    #[test]
    fn weak_sandwich_holds(f in steps(), p in 0.5f64..4.0, frac in 0.0f64..0.999) {
        let f = StepFunction::from_steps(&f).unwrap();
        let s = sandwich_check(&f, p, frac * p).unwrap();
        prop_assert!(s.lower_ok && s.upper_ok, "{s:?}");
    }

    #[test]
    fn quasinorm_is_homogeneous(f in steps(), c in 0.01f64..100.0, p in 0.5f64..4.0, frac in 0.0f64..0.999) {
        let f = StepFunction::from_steps(&f).unwrap();
        let r = frac * p;
        let a = quasinorm(&f.scaled(c), p, r).unwrap();
        let b = c * quasinorm(&f, p, r).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b);
    }

    #[test]
    fn quasinorm_of_rearranged_steps_agrees(f in steps(), p in 0.5f64..4.0, frac in 0.0f64..0.999) {
        let mut g = f.clone();
        g.reverse();
        let (f, g) = (StepFunction::from_steps(&f).unwrap(), StepFunction::from_steps(&g).unwrap());
        let r = frac * p;
        let (a, b) = (quasinorm(&f, p, r).unwrap(), quasinorm(&g, p, r).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn soliton_pairs_solve_and_keep_norms(
        e2 in 0.2f64..1.8,
        de in 0.05f64..1.0,
        la in -2.0f64..2.0,
        positive in any::<bool>(),
    ) {
        let e1 = e2 + de;
        let pair = SolitonPair::vanishing_at_origin(e1, e2, 10f64.powf(la), positive).unwrap();
        let grid: Vec<f64> = (0..=120).map(|i| -30.0 + 0.5 * i as f64).collect();
        prop_assert!(ode_residual(&pair, &grid) < 1e-8);
        let n = soliton_norms(&pair);
        prop_assert!((n.quadrature.0 - 2.0 * e1).abs() < 1e-8);
        prop_assert!((n.quadrature.1 - 2.0 * e2).abs() < 1e-8);
    }
}

fn coarse() -> ScfOptions {
    ScfOptions {
        half_width: 30.0,
        h: 0.02,
        ..ScfOptions::default()
    }
}

#[test]
fn scf_fixed_point_is_its_own_aufbau_state() {
    let pp = ProblemParams::new(1, 1.5).unwrap();
    let run = scf_run(pp, 2, &coarse()).unwrap();
    assert!(run.converged);
    let s = &run.state;
    let spec = lowest_eigenpairs(&s.mean_field(), 2, 1e-10).unwrap();
    // Rediagonalising the mean field returns the stored levels and occupations.
    for (lev, mu) in spec.levels.iter().zip(&s.eigenvalues) {
        assert!((lev.lambda - mu).abs() < 1e-7, "{} vs {}", lev.lambda, mu);
    }
    let mu: Vec<f64> = spec.levels.iter().map(|l| l.lambda).collect();
    let occ = occupations_from_eigenvalues(&mu, pp).unwrap();
    for (a, b) in occ.iter().zip(&s.occupations) {
        assert!((a - b).abs() < 1e-6 * b);
    }
    assert!(s.gram_error() < 1e-8);
}

#[test]
fn k_nonincreasing_in_rank() {
    let pp = ProblemParams::new(1, 1.5).unwrap();
    let ks: Vec<f64> = (1..=3)
        .map(|n| scf_run(pp, n, &coarse()).unwrap().state.quotient)
        .collect();
    assert!(ks[0] > ks[1] && ks[1] > ks[2], "{ks:?}");
}
