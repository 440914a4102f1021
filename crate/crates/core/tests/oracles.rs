//! The closed-form traveling waves solve the PDE, checked by an independent
//! finite-difference residual, in one and two dimensions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twpinn::equations::{exact_solution, front_steepness, PhysicalCoeffs, PhysicalPoint, ReactionSpec};
use twpinn::reference::{fd_residual, FdSteps};

fn family() -> Vec<ReactionSpec> {
    vec![
        ReactionSpec::fisher(),
        ReactionSpec::nws(2.0).unwrap(),
        ReactionSpec::nws(3.0).unwrap(),
        ReactionSpec::nws(4.0).unwrap(),
        ReactionSpec::zeldovich(),
        ReactionSpec::bistable(0.2).unwrap(),
    ]
}

fn steps(c: &PhysicalCoeffs) -> FdSteps {
    FdSteps {
        x: 1e-2 / c.length_scale(),
        t: 1e-2 / c.rho,
    }
}

fn worst_residual(dir: &[f64], n_points: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let unit: Vec<f64> = dir.iter().map(|v| v / len).collect();
    let mut worst: f64 = 0.0;
    for spec in family() {
        for rho in [1.0, 1e2] {
            for d in [1.0, 4.0] {
                let c = PhysicalCoeffs::new(rho, d).unwrap();
                let width = 1.0 / c.length_scale();
                for _ in 0..n_points {
                    // Points spread over ±8 front widths at times up to 5/ρ.
                    let x: Vec<f64> = (0..dir.len()).map(|_| rng.random_range(-8.0..8.0) * width).collect();
                    let t = rng.random_range(0.0..5.0) / rho;
                    let p = PhysicalPoint::new(x, t);
                    let field = |x: &[f64], t: f64| {
                        exact_solution(&spec, &c, &unit, &PhysicalPoint::new(x.to_vec(), t)).unwrap()
                    };
                    let r = fd_residual(field, &c, &spec, &p, steps(&c)).unwrap();
                    worst = worst.max(r.abs());
                }
            }
        }
    }
    worst
}

#[test]
fn closed_forms_satisfy_the_pde_in_one_dimension() {
    let worst = worst_residual(&[1.0], 100, 1);
    assert!(worst < 1e-6, "worst residual {worst:e}");
}

#[test]
fn closed_forms_satisfy_the_pde_along_oblique_directions() {
    for dir in [[1.0, 1.0], [1.0, 3.0]] {
        let worst = worst_residual(&dir, 25, 2);
        assert!(worst < 1e-6, "direction {dir:?}: worst residual {worst:e}");
    }
}

#[test]
fn residual_detects_a_wrong_speed() {
    let spec = ReactionSpec::fisher();
    let c = PhysicalCoeffs::new(1e2, 1.0).unwrap();
    let k = front_steepness(&spec, &c);
    let p = PhysicalPoint::new(vec![0.0], 0.0);
    // Shape of the exact wave but moving at 90% of its speed.
    let speed = 0.9 * 5.0 / 6f64.sqrt() * (c.rho * c.d).sqrt();
    let slow = |x: &[f64], t: f64| {
        let s = 1.0 / (1.0 + (k * (x[0] - speed * t)).exp());
        s * s
    };
    let r = fd_residual(slow, &c, &spec, &p, steps(&c)).unwrap();
    assert!(r.abs() > 1e-2, "residual {r:e} should expose the wrong speed");
}
