//! Small numeric helpers shared by the network and oracle code.

/// Logistic function, evaluated without overflow for either sign.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Returns `(σ(x), 1 - σ(x))`, each computed to full relative precision.
#[inline]
pub fn logistic_pair(x: f64) -> (f64, f64) {
    if x >= 0.0 {
        let e = (-x).exp();
        let d = 1.0 + e;
        (1.0 / d, e / d)
    } else {
        let e = x.exp();
        let d = 1.0 + e;
        (e / d, 1.0 / d)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `n` evenly spaced samples covering `[lo, hi]`, endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_saturates_without_nan() {
        assert_eq!(logistic(1000.0), 1.0);
        assert_eq!(logistic(-1000.0), 0.0);
        assert_eq!(logistic(0.0), 0.5);
        let (l, lc) = logistic_pair(-40.0);
        assert!(l > 0.0 && (lc - 1.0).abs() < 1e-16);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.0, 5.0, 7);
        assert_eq!(v[0], -1.0);
        assert_eq!(v[6], 5.0);
        assert_eq!(v[3], 2.0);
    }
}
