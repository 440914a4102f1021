//! Accuracy of the finite-difference reference solver.

use twpinn::equations::{exact_profile, exact_speed, PhysicalCoeffs, ReactionSpec};
use twpinn::gtw::GeneralIC;
use twpinn::reference::{interpolate, ref_solve, RefConfig, RefInitial, Scheme};

fn final_slice(grid: &twpinn::pipeline::FieldGrid) -> &[f64] {
    grid.slice(grid.t.len() - 1)
}

/// max |u_h − u_{h/2}| over the coarse cell centres.
fn successive_difference(coarse: &RefConfig, fine: &RefConfig, spec: &ReactionSpec, c: &PhysicalCoeffs, ic: &RefInitial) -> f64 {
    let g = ref_solve(spec, c, ic, coarse).unwrap();
    let f = ref_solve(spec, c, ic, fine).unwrap();
    let (xs_f, u_f) = (&f.axes[0], final_slice(&f));
    g.axes[0]
        .iter()
        .zip(final_slice(&g))
        .map(|(&x, &u)| (u - interpolate(xs_f, u_f, x)).abs())
        .fold(0.0, f64::max)
}

fn with_cells(cells: usize, base: &RefConfig) -> RefConfig {
    RefConfig { cells, ..base.clone() }
}

#[test]
fn self_convergence_on_the_comparison_grid() {
    let spec = ReactionSpec::fisher();
    let c = PhysicalCoeffs::new(1e2, 1.0).unwrap();
    let ic = RefInitial::General(GeneralIC::Logistic { lambda: 2.0 });
    let base = RefConfig::new([-3.0, 9.0], 0.3);
    let e1 = successive_difference(&with_cells(500, &base), &with_cells(1000, &base), &spec, &c, &ic);
    let e2 = successive_difference(&with_cells(1000, &base), &with_cells(2000, &base), &spec, &c, &ic);
    let ratio = e1 / e2;
    assert!(ratio >= 3.5, "convergence ratio {ratio} ({e1:e} / {e2:e})");
}

#[test]
fn reproduces_the_closed_form_fisher_wave() {
    let spec = ReactionSpec::fisher();
    let c = PhysicalCoeffs::unit();
    let cfg = RefConfig::new([-40.0, 60.0], 5.0);
    let g = ref_solve(&spec, &c, &RefInitial::Exact, &cfg).unwrap();
    let speed = exact_speed(&spec, &c);
    let err = g.axes[0]
        .iter()
        .zip(final_slice(&g))
        .map(|(&x, &u)| (u - exact_profile(&spec, &c, x - speed * 5.0)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "L∞ error {err:e}");
}

#[test]
fn second_order_scheme_agrees_with_the_default() {
    let spec = ReactionSpec::fisher();
    let c = PhysicalCoeffs::new(1e2, 1.0).unwrap();
    let ic = RefInitial::General(GeneralIC::Step);
    let mut cfg = RefConfig::new([-3.0, 9.0], 0.3);
    let hi = ref_solve(&spec, &c, &ic, &cfg).unwrap();
    cfg.scheme = Scheme::Central2;
    let lo = ref_solve(&spec, &c, &ic, &cfg).unwrap();
    let diff = final_slice(&hi)
        .iter()
        .zip(final_slice(&lo))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-2, "schemes differ by {diff:e}");
}
