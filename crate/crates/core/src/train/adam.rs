use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::Gradients;
use crate::error::{Error, Result};
use crate::field::VoxelGrid;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let beta_ok = |b: f64| (0.0..1.0).contains(&b);
        if !(self.learning_rate > 0.0 && beta_ok(self.beta1) && beta_ok(self.beta2) && self.eps > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid optimizer settings {self:?}")));
        }
        Ok(())
    }
}

/// First and second moments for every density and color parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> AdamState<T> {
    pub fn new(cells: usize) -> Self {
        Self {
            step: 0,
            m: vec![T::zero(); 4 * cells],
            v: vec![T::zero(); 4 * cells],
        }
    }
}

/// One bias-corrected Adam update, then σ is clamped to `>= 0` and colors to `[0, 1]`.
/// Parameters are laid out per cell as `[σ, r, g, b]`.
pub fn adam_step<T: Real>(grid: &mut VoxelGrid<T>, grads: &Gradients<T>, state: &mut AdamState<T>, cfg: &AdamConfig) {
    let cells = grid.cell_count();
    assert!(grads.sigma.len() == cells && state.m.len() == 4 * cells);
    state.step += 1;
    let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
    let t = state.step as i32;
    let lr = T::of(cfg.learning_rate);
    let c1 = T::one() - b1.powi(t);
    let c2 = T::one() - b2.powi(t);
    let eps = T::of(cfg.eps);
    let update = |p: T, g: T, m: &mut T, v: &mut T| {
        // zero moments and zero gradient leave the parameter where it is
        if g == T::zero() && *m == T::zero() && *v == T::zero() {
            return p;
        }
        *m = b1 * *m + (T::one() - b1) * g;
        *v = b2 * *v + (T::one() - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        p - lr * m_hat / (v_hat.sqrt() + eps)
    };
    grid.sigma
        .par_iter_mut()
        .zip(grid.color.par_iter_mut())
        .zip(state.m.par_chunks_mut(4).zip(state.v.par_chunks_mut(4)))
        .enumerate()
        .for_each(|(i, ((s, col), (m, v)))| {
            *s = update(*s, grads.sigma[i], &mut m[0], &mut v[0]).max(T::zero());
            for c in 0..3 {
                col[c] = update(col[c], grads.color[i][c], &mut m[c + 1], &mut v[c + 1])
                    .max(T::zero())
                    .min(T::one());
            }
        });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Aabb;

    fn grid() -> VoxelGrid<f64> {
        VoxelGrid::filled([2, 1, 1], Aabb::cube(1.0), 1.0, [0.5; 3]).unwrap()
    }

    #[test]
    fn zero_gradient_keeps_parameters() {
        let mut g = grid();
        let before = g.clone();
        let mut st = AdamState::new(2);
        adam_step(&mut g, &Gradients::zeros(2), &mut st, &AdamConfig::default());
        assert_eq!(g, before);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut g = grid();
        let mut grads = Gradients::zeros(2);
        grads.sigma = vec![0.3, -2.0];
        grads.color[0] = [1.0, -1.0, 0.0];
        let mut st = AdamState::new(2);
        let cfg = AdamConfig::default();
        adam_step(&mut g, &grads, &mut st, &cfg);
        // |g| / (|g| + eps) ~ 1 per the closed-form first step
        let expect = |g: f64| cfg.learning_rate * g.abs() / (g.abs() + cfg.eps);
        assert!((1.0 - g.sigma[0] - expect(0.3)).abs() < 1e-12);
        assert!((g.sigma[1] - 1.0 - expect(2.0)).abs() < 1e-12);
        assert!((0.5 - g.color[0][0] - expect(1.0)).abs() < 1e-12);
        assert!((g.color[0][1] - 0.5 - expect(1.0)).abs() < 1e-12);
        assert_eq!(g.color[0][2], 0.5);
    }

    #[test]
    fn projection() {
        let mut g = VoxelGrid::filled([1, 1, 1], Aabb::cube(1.0), 0.01, [0.99, 0.01, 0.5]).unwrap();
        let mut grads = Gradients::zeros(1);
        grads.sigma[0] = 5.0;
        grads.color[0] = [-1.0, 1.0, 0.0];
        adam_step(&mut g, &grads, &mut AdamState::new(1), &AdamConfig::default());
        assert_eq!(g.sigma[0], 0.0);
        assert_eq!(g.color[0], [1.0, 0.0, 0.5]);
    }
}
