use acsigma_core::bins::BinGrid;
use acsigma_core::conductivity::*;
use acsigma_core::disorder::{DisorderSpec, SiteDistribution};
use acsigma_core::lattice::{Boundary, LatticeSpec};
use acsigma_core::response::FieldPulse;
use acsigma_core::thermo::*;
use acsigma_core::Realization;
use proptest::prelude::*;

fn realization(l: usize, boundary: Boundary, lambda: f64, seed: u64) -> Realization {
    let lat = LatticeSpec::new(1, l, boundary).unwrap();
    let spec = DisorderSpec::new(SiteDistribution::default(), lambda, seed).unwrap();
    Realization::sample(&lat, &spec).unwrap()
}

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Periodic), Just(Boundary::Dirichlet)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measure_is_even_positive_and_supported(
        l in 3usize..14, b in boundary(), lambda in 0.0f64..4.0, seed in any::<u64>(),
        t in 0.05f64..5.0, mu in -2.0f64..2.0,
    ) {
        let r = realization(l, b, lambda, seed);
        let p = ThermoParams::new(t, mu).unwrap();
        let grid = r.pairs.default_grid().unwrap();
        let s = conductivity_measure(&r.pairs, &p, &grid, &MeasureOptions::default()).unwrap();
        prop_assert!(s.min_mass() >= 0.0);
        prop_assert_eq!(s.evenness_defect(), 0.0);
        let (lo, hi) = r.spectral.bounds();
        prop_assert_eq!(s.mass_outside(hi - lo), 0.0);
        let direct = conductivity_total(&r.pairs, &p);
        prop_assert!((s.total() - direct).abs() <= 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn sandwich_holds_bin_by_bin(
        l in 3usize..12, lambda in 0.1f64..3.0, seed in any::<u64>(),
        t in 0.1f64..8.0, mu in -1.5f64..1.5,
    ) {
        let r = realization(l, Boundary::Dirichlet, lambda, seed);
        let p = ThermoParams::new(t, mu).unwrap();
        let grid = r.pairs.default_grid().unwrap();
        let s = conductivity_measure(&r.pairs, &p, &grid, &MeasureOptions::default()).unwrap();
        let u = upsilon_measure(&r.pairs, &grid).unwrap();
        let rep = sandwich_check(&s, &u, &p, r.spectral.bounds(), SechConvention::HalfArgument).unwrap();
        prop_assert!(rep.holds, "{:?}", rep);
        let slack = high_temperature_slack(s.total(), u.total(), psi_total(&r.pairs), &p).unwrap();
        prop_assert!(slack >= -1e-12 * s.total());
    }

    #[test]
    fn pair_weight_is_symmetric_and_bounded(
        a in -10.0f64..10.0, b in -10.0f64..10.0, t in 1e-3f64..10.0, mu in -3.0f64..3.0,
    ) {
        let p = ThermoParams::new(t, mu).unwrap();
        let w = pair_weight(a, b, &p, 1e-12);
        prop_assert!(w >= 0.0 && w.is_finite());
        prop_assert_eq!(w, pair_weight(b, a, &p, 1e-12));
        prop_assert!(w <= 0.25 / t * (1.0 + 1e-12));
    }

    #[test]
    fn velocity_is_the_position_commutator(l in 2usize..10, lambda in 0.0f64..3.0, seed in any::<u64>()) {
        let r = realization(l, Boundary::Dirichlet, lambda, seed);
        prop_assert!(r.velocity_position_defect().unwrap() < 1e-10);
    }

    #[test]
    fn eigendecomposition_residual_is_rounding_level(
        d in 1usize..3, l in 2usize..9, b in boundary(), lambda in 0.0f64..5.0, seed in any::<u64>(),
    ) {
        let lat = LatticeSpec::new(d, l, b).unwrap();
        let spec = DisorderSpec::new(SiteDistribution::default(), lambda, seed).unwrap();
        let r = Realization::sample(&lat, &spec).unwrap();
        let scale = 2.0 * d as f64 + lambda;
        prop_assert!(r.spectral.max_residual(&r.hamiltonian) < 1e-13 * scale);
        prop_assert!(r.spectral.orthonormality_defect() < 1e-13);
        prop_assert!(r.spectral.energies().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn centered_grids_mirror_exactly(w in 1e-3f64..1.0, half in 1usize..200, x in -1.0f64..1.0) {
        let g = BinGrid::centered(w, half).unwrap();
        let x = x * g.hi();
        if let (Some(i), Some(j)) = (g.locate_even(x), g.locate_even(-x)) {
            prop_assert_eq!(g.mirror(i), j);
        }
    }

    #[test]
    fn pulse_transform_is_conjugate_symmetric(
        a in -3.0f64..3.0, s in 0.1f64..10.0, nu0 in 0.0f64..5.0, nu in -8.0f64..8.0,
    ) {
        let p = FieldPulse::gaussian_cosine(a, s, nu0).unwrap();
        prop_assert_eq!(p.fourier(-nu), p.fourier(nu).conj());
    }
}
