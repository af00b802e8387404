//! Reference values computed independently of the library's code paths.

use std::f64::consts::PI;

use acsigma_core::bins::BinGrid;
use acsigma_core::conductivity::*;
use acsigma_core::disorder::{DisorderSpec, PotentialField, SiteDistribution};
use acsigma_core::lattice::*;
use acsigma_core::quadrature::QuadratureSpec;
use acsigma_core::response::*;
use acsigma_core::spectral::{build_hamiltonian, eigendecompose};
use acsigma_core::thermo::*;
use acsigma_core::Realization;

fn fermi_ref(e: f64, t: f64, mu: f64) -> f64 {
    1.0 / (1.0 + ((e - mu) / t).exp())
}

/// Composite Simpson on [a, b] with n (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn pair_weight_matches_difference_quotient() {
    let (t, mu) = (0.7, 0.1);
    let p = ThermoParams::new(t, mu).unwrap();
    for (a, b) in [(0.3, -0.4), (1.5, 1.2), (-2.0, 0.9)] {
        let want = (fermi_ref(b, t, mu) - fermi_ref(a, t, mu)) / (a - b);
        assert!((pair_weight(a, b, &p, 1e-12) - want).abs() < 1e-14);
    }
    // degenerate limit: centred finite difference of f
    let e = 0.35;
    let h = 1e-5;
    let fd = -(fermi_ref(e + h, t, mu) - fermi_ref(e - h, t, mu)) / (2.0 * h);
    assert!((pair_weight(e, e, &p, 1e-12) - fd).abs() < 1e-9);
}

#[test]
fn sum_rule_against_bond_expectation() {
    // rhs oracle: (π/|Λ|)·Σ_x 2·f(H)[x+e₁, x], read straight off f(H).
    let lat = LatticeSpec::new(1, 10, Boundary::Periodic).unwrap();
    let spec = DisorderSpec::new(SiteDistribution::default(), 1.0, 17).unwrap();
    let r = Realization::sample(&lat, &spec).unwrap();
    let p = ThermoParams::new(0.8, 0.2).unwrap();
    let f = r.spectral.apply_function(|e| fermi_ref(e, 0.8, 0.2));
    let bonds: f64 = (0..10).map(|x| 2.0 * f[((x + 1) % 10, x)]).sum();
    let oracle = PI * bonds / 10.0;
    let terms = sum_rule_terms(&lat, &r.spectral, &r.pairs, &p, &MeasureOptions::default()).unwrap();
    assert!((terms.rhs - oracle).abs() < 1e-13, "{} vs {oracle}", terms.rhs);
    assert!((terms.lhs - terms.rhs).abs() < 1e-2 * terms.rhs);
    let dir = LatticeSpec::new(1, 10, Boundary::Dirichlet).unwrap();
    assert!(sum_rule_terms(&dir, &r.spectral, &r.pairs, &p, &MeasureOptions::default()).is_err());
}

#[test]
fn convolution_matches_simpson_on_two_sites() {
    // Γ_E^0 of the 2-site chain: π/4 at ±2 for E ∈ [−1, 1), zero otherwise.
    let lat = LatticeSpec::new(1, 2, Boundary::Dirichlet).unwrap();
    let h = build_hamiltonian(&lat, &PotentialField::zeros(2)).unwrap();
    let sd = eigendecompose(&h).unwrap().with_bounds((-2.0, 2.0)).unwrap();
    let ps = pair_spectrum(&sd, &build_velocity(&lat)).unwrap();
    let grid = ps.default_grid().unwrap();
    let (t, mu) = (0.6, 0.25);
    let p = ThermoParams::new(t, mu).unwrap();
    let rep = convolution_check(&ps, &p, &grid, &QuadratureSpec::default()).unwrap();
    let dfermi = |e: f64| {
        let x = (e - mu) / (2.0 * t);
        1.0 / (4.0 * t * x.cosh().powi(2))
    };
    let oracle = PI / 4.0 * simpson(dfermi, -1.0, 1.0, 2000);
    let i = grid.locate_even(2.0).unwrap();
    assert!((rep.convolved[i] - oracle).abs() < 1e-12, "{} vs {oracle}", rep.convolved[i]);
    assert!(rep.max_relative_gap < 1e-8);
}

#[test]
fn convolution_identity_on_random_chain() {
    let lat = LatticeSpec::new(1, 8, Boundary::Dirichlet).unwrap();
    let spec = DisorderSpec::new(SiteDistribution::default(), 1.3, 2).unwrap();
    let r = Realization::sample(&lat, &spec).unwrap();
    let p = ThermoParams::new(0.4, -0.3).unwrap();
    let rep = convolution_check(&r.pairs, &p, &r.pairs.default_grid().unwrap(), &QuadratureSpec::default()).unwrap();
    assert!(rep.max_relative_gap < 1e-8, "{}", rep.max_relative_gap);
}

#[test]
fn free_periodic_atom_is_plane_wave_sum() {
    let l = 16;
    let lat = LatticeSpec::new(1, l, Boundary::Periodic).unwrap();
    let spec = DisorderSpec::new(SiteDistribution::default(), 0.0, 0).unwrap();
    let r = Realization::sample(&lat, &spec).unwrap();
    let p = ThermoParams::new(1.0, 0.0).unwrap();
    let s = conductivity_measure(&r.pairs, &p, &r.pairs.default_grid().unwrap(), &MeasureOptions::default()).unwrap();
    let oracle: f64 = (0..l)
        .map(|j| {
            let k = 2.0 * PI * j as f64 / l as f64;
            let e = -2.0 * k.cos();
            let f = fermi_ref(e, 1.0, 0.0);
            4.0 * k.sin().powi(2) * f * (1.0 - f)
        })
        .sum::<f64>()
        * PI
        / l as f64;
    assert!((s.atom - oracle).abs() < 1e-10 * oracle);
    assert!(s.gamma_total() < 1e-10 * oracle);
}

#[test]
fn two_site_linear_response_matches_golden_rule() {
    // Two-level system: W_lin = 2π·(π/4)·(|Ê(2)|² + |Ê(−2)|²) = π²|Ê(2)|² at T = 0.
    let lat = LatticeSpec::new(1, 2, Boundary::Dirichlet).unwrap();
    let h = build_hamiltonian(&lat, &PotentialField::zeros(2)).unwrap();
    let x = build_position(&lat).unwrap();
    let pulse = FieldPulse::gaussian_cosine(1.0, 4.0, 2.0).unwrap();
    let p = ThermoParams::new(0.0, 0.0).unwrap();
    let lr = linear_response_extract(&h, &x, &pulse, &p, &[0.1, 0.05, 0.02, 0.01], &ExtractionSpec::default()).unwrap();
    let s = 4.0f64;
    let e2 = s / (2.0 * (2.0 * PI).sqrt()) * (1.0 + (-0.5 * s * s * 16.0).exp());
    let oracle = PI * PI * e2 * e2;
    assert!((lr.w_lin - oracle).abs() < 1e-3 * oracle, "{} vs {oracle}", lr.w_lin);
    assert!((3.8..=4.2).contains(&lr.scaling_ratio));
    assert!(lr.route_gap < 1e-8);
}

#[test]
fn inphase_current_parseval() {
    let lat = LatticeSpec::new(1, 6, Boundary::Dirichlet).unwrap();
    let spec = DisorderSpec::new(SiteDistribution::default(), 1.0, 4).unwrap();
    let r = Realization::sample(&lat, &spec).unwrap();
    let p = ThermoParams::new(1.0, 0.0).unwrap();
    let grid = BinGrid::centered(0.01, 1000).unwrap();
    let s = conductivity_measure(&r.pairs, &p, &grid, &MeasureOptions::default()).unwrap();
    let pulse = FieldPulse::gaussian_cosine(1.0, 3.0, 1.5).unwrap();
    let ts = time_grid(&pulse, 1e-16, 4001);
    let j = inphase_current(&s, &pulse, &ts);
    let dt = ts[1] - ts[0];
    let integral: f64 = ts.iter().zip(&j).map(|(&t, &jt)| pulse.value(t) * jt).sum::<f64>() * dt;
    let w = absorbed_energy_lr(&s, &pulse);
    assert!((integral - w).abs() < 1e-8 * w, "{integral} vs {w}");
}

#[test]
fn lower_bound_sits_below_measure_route() {
    let lat = LatticeSpec::new(1, 10, Boundary::Dirichlet).unwrap();
    let spec = DisorderSpec::new(SiteDistribution::default(), 1.0, 9).unwrap();
    let r = Realization::sample(&lat, &spec).unwrap();
    let p = ThermoParams::new(1.0, 0.0).unwrap();
    let grid = r.pairs.default_grid().unwrap();
    let s = conductivity_measure(&r.pairs, &p, &grid, &MeasureOptions::default()).unwrap();
    let u = upsilon_measure(&r.pairs, &grid).unwrap();
    let pulse = FieldPulse::gaussian_cosine(1.0, 2.0, 1.0).unwrap();
    let lb = absorbed_energy_lower_bound(&u, &pulse, &p, r.spectral.bounds(), SechConvention::HalfArgument).unwrap();
    let w = absorbed_energy_lr(&s, &pulse);
    assert!(lb > 0.0 && lb <= w);
    // time reversal leaves |Ê| unchanged; the family is even in t already
    assert_eq!(pulse.value(1.3), pulse.value(-1.3));
}
