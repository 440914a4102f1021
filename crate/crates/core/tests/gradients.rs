//! Finite-difference checks of the network jet and the loss gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twpinn::equations::ReactionSpec;
use twpinn::wavenet::{
    forward_jet, loss_grad, Bounds, CollocationPoint, LabeledPoint, ProfileNet, WaveNetParams,
};

fn random_params(rng: &mut ChaCha8Rng, width: usize, bounds: Bounds) -> WaveNetParams {
    let mut draw = |s: f64| (0..width).map(|_| s * rng.random_range(-1.0..1.0)).collect::<Vec<_>>();
    let a = draw(1.0);
    let b = draw(1.0);
    let c = draw(2.0);
    let omega = rng.random_range(-1.5..2.5);
    WaveNetParams::new(omega, ProfileNet::new(a, b, c, bounds).unwrap()).unwrap()
}

fn specs() -> Vec<ReactionSpec> {
    vec![
        ReactionSpec::fisher(),
        ReactionSpec::nws(3.0).unwrap(),
        ReactionSpec::zeldovich(),
        ReactionSpec::bistable(0.2).unwrap(),
    ]
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

#[test]
fn jet_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for spec in specs() {
        for _ in 0..10 {
            let p = random_params(&mut rng, 8, Bounds::of(&spec));
            let xi = rng.random_range(-3.0..3.0);
            let tau = rng.random_range(0.0..2.0);
            let j = forward_jet(&p, xi, tau);
            let v = |x: f64, t: f64| p.value(x, t);
            let d_xi = (v(xi + h, tau) - v(xi - h, tau)) / (2.0 * h);
            let d_tau = (v(xi, tau + h) - v(xi, tau - h)) / (2.0 * h);
            // Wider step for the second derivative keeps rounding below 1e-10.
            let k = 2e-3;
            let d_xixi = (-v(xi + 2.0 * k, tau) + 16.0 * v(xi + k, tau) - 30.0 * v(xi, tau)
                + 16.0 * v(xi - k, tau)
                - v(xi - 2.0 * k, tau))
                / (12.0 * k * k);
            worst = worst
                .max(rel_err(j.v_xi, d_xi))
                .max(rel_err(j.v_tau, d_tau))
                .max(rel_err(j.v_xixi, d_xixi));
        }
    }
    assert!(worst < 1e-6, "worst jet relative error {worst:e}");
}

#[test]
fn loss_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for spec in specs() {
        for _ in 0..10 {
            let mut p = random_params(&mut rng, 8, Bounds::of(&spec));
            let icbc: Vec<LabeledPoint> = (0..32)
                .map(|_| LabeledPoint {
                    xi: rng.random_range(-4.0..4.0),
                    tau: rng.random_range(0.0..2.0),
                    target: rng.random_range(0.0..1.0),
                })
                .collect();
            let res: Vec<CollocationPoint> = (0..32)
                .map(|_| CollocationPoint {
                    xi: rng.random_range(-4.0..4.0),
                    tau: rng.random_range(0.0..2.0),
                })
                .collect();
            let g = loss_grad(&p, &spec, &icbc, &res).unwrap();
            let flat = p.to_flat();
            for k in 0..flat.len() {
                let mut f = flat.clone();
                f[k] = flat[k] + h;
                p.set_flat(&f);
                let up = loss_grad(&p, &spec, &icbc, &res).unwrap().loss;
                f[k] = flat[k] - h;
                p.set_flat(&f);
                let down = loss_grad(&p, &spec, &icbc, &res).unwrap().loss;
                p.set_flat(&flat);
                let fd = (up - down) / (2.0 * h);
                let e = (g.grad[k] - fd).abs() / g.grad[k].abs().max(fd.abs()).max(1e-4);
                worst = worst.max(e);
            }
        }
    }
    assert!(worst < 1e-5, "worst gradient relative error {worst:e}");
}

fn fd_check(flat: &[f64], analytic: &[f64], h: f64, mut loss: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut f = flat.to_vec();
    for k in 0..flat.len() {
        f[k] = flat[k] + h;
        let up = loss(&f);
        f[k] = flat[k] - h;
        let down = loss(&f);
        f[k] = flat[k];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((analytic[k] - fd).abs() / analytic[k].abs().max(fd.abs()).max(1e-4));
    }
    worst
}

#[test]
fn general_ic_gradient_matches_central_differences() {
    use twpinn::gtw::{gtw_loss_grad, GtwParams};
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = ReactionSpec::fisher();
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 1.0, 2.0] {
        for _ in 0..5 {
            let base = random_params(&mut rng, 8, Bounds::of(&spec));
            let mut p = GtwParams { lambda, w: rng.random_range(-2.0..2.0), net: base.net };
            let icbc: Vec<LabeledPoint> = (0..24)
                .map(|_| LabeledPoint {
                    xi: rng.random_range(-6.0..6.0),
                    tau: rng.random_range(0.0..3.0),
                    target: rng.random_range(0.0..1.0),
                })
                .collect();
            let res: Vec<CollocationPoint> = (0..24)
                .map(|_| CollocationPoint { xi: rng.random_range(-6.0..6.0), tau: rng.random_range(0.0..3.0) })
                .collect();
            let flat = p.to_flat();
            let mut g = vec![0.0; flat.len()];
            gtw_loss_grad(&p, &spec, &icbc, &res, 1.0, &mut g).unwrap();
            worst = worst.max(fd_check(&flat, &g, 1e-6, |f| {
                p.set_flat(f);
                let mut scratch = vec![0.0; f.len()];
                let (d, r) = gtw_loss_grad(&p, &spec, &icbc, &res, 1.0, &mut scratch).unwrap();
                d + r
            }));
        }
    }
    assert!(worst < 1e-5, "worst gradient relative error {worst:e}");
}

#[test]
fn wave_pinn_gradient_matches_central_differences() {
    use twpinn::baseline::{wavepinn_loss_grad, wavepinn_output_grad, wavepinn_forward, RhoLabeled, RhoPoint, WavePinnParams};
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let spec = ReactionSpec::fisher();
    let mut worst: f64 = 0.0;
    for trial in 0..4 {
        let mut p = WavePinnParams::init(trial, Bounds::of(&spec));
        p.omega1 = rng.random_range(0.5..1.5);
        p.omega2 = rng.random_range(-2.5..-0.5);
        p.omega3 = rng.random_range(-0.5..0.5);
        p.out_bias = rng.random_range(-0.5..0.5);
        for l in &mut p.layers {
            for b in &mut l.bias {
                *b = rng.random_range(-0.5..0.5);
            }
        }
        let draw_rho = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(0.0..3.0));
        let icbc: Vec<RhoLabeled> = (0..16)
            .map(|_| {
                let rho = draw_rho(&mut rng);
                RhoLabeled {
                    rho,
                    x: rng.random_range(-1.0..5.0),
                    t: rng.random_range(0.0..2.0) / rho.sqrt(),
                    target: rng.random_range(0.0..1.0),
                }
            })
            .collect();
        let res: Vec<RhoPoint> = (0..16)
            .map(|_| {
                let rho = draw_rho(&mut rng);
                RhoPoint { rho, x: rng.random_range(-1.0..5.0), t: rng.random_range(0.0..2.0) / rho.sqrt() }
            })
            .collect();
        let flat = p.to_flat();
        let mut g = vec![0.0; flat.len()];
        wavepinn_loss_grad(&p, &spec, &icbc, &res, &mut g).unwrap();
        worst = worst.max(fd_check(&flat, &g, 1e-6, |f| {
            p.set_flat(f);
            let mut scratch = vec![0.0; f.len()];
            let (d, r) = wavepinn_loss_grad(&p, &spec, &icbc, &res, &mut scratch).unwrap();
            d + r
        }));
        p.set_flat(&flat);
        let (rho, x, t) = (30.0, 0.7, 0.05);
        let og = wavepinn_output_grad(&p, rho, x, t).unwrap();
        worst = worst.max(fd_check(&flat, &og, 1e-6, |f| {
            p.set_flat(f);
            wavepinn_forward(&p, rho, x, t).unwrap()
        }));
    }
    assert!(worst < 1e-5, "worst gradient relative error {worst:e}");
}
