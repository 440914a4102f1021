use std::f64::consts::PI;

/// Single-cycle cosine annealing from `lr0` down to `lr_min` over `epochs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineSchedule {
    pub lr0: f64,
    pub lr_min: f64,
    pub epochs: usize,
}

impl CosineSchedule {
    pub fn lr(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.lr0;
        }
        let frac = epoch as f64 / (self.epochs - 1) as f64;
        self.lr_min + 0.5 * (self.lr0 - self.lr_min) * (1.0 + (PI * frac).cos())
    }
}
