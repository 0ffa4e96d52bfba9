//! Derivative-free Nelder–Mead simplex minimization.

use crate::scalar::{lit, Scalar};

/// Standard reflection/expansion/contraction/shrink coefficients and the
/// convergence policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead<F> {
    pub reflection: F,
    pub expansion: F,
    pub contraction: F,
    pub shrink: F,
    /// Converged when the simplex diameter falls below this, relative to the
    /// scale of the best vertex.
    pub rel_tol: F,
    pub max_iters: usize,
}

impl<F: Scalar> Default for NelderMead<F> {
    fn default() -> Self {
        NelderMead {
            reflection: F::one(),
            expansion: lit(2.0),
            contraction: lit(0.5),
            shrink: lit(0.5),
            rel_tol: lit(1e-9),
            max_iters: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult<F> {
    pub x: Vec<F>,
    pub value: F,
    pub iterations: usize,
    pub converged: bool,
}

impl<F: Scalar> NelderMead<F> {
    /// Minimize `f` from `x0`, with per-dimension initial steps.
    pub fn minimize(
        &self,
        f: impl Fn(&[F]) -> F,
        x0: &[F],
        steps: &[F],
    ) -> MinimizeResult<F> {
        assert_eq!(x0.len(), steps.len());
        let dim = x0.len();
        assert!(dim >= 1);

        let mut simplex: Vec<(Vec<F>, F)> = Vec::with_capacity(dim + 1);
        simplex.push((x0.to_vec(), f(x0)));
        for i in 0..dim {
            let mut p = x0.to_vec();
            p[i] = p[i] + steps[i];
            let v = f(&p);
            simplex.push((p, v));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iters {
            iterations += 1;
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));

            if self.diameter(&simplex) <= self.rel_tol * (F::one() + self.norm(&simplex[0].0)) {
                converged = true;
                break;
            }

            // Centroid of all but the worst vertex.
            let worst = simplex[dim].clone();
            let mut centroid = vec![F::zero(); dim];
            for (p, _) in simplex.iter().take(dim) {
                for (c, &x) in centroid.iter_mut().zip(p) {
                    *c = *c + x;
                }
            }
            let inv = F::one() / F::from_usize(dim).unwrap();
            for c in centroid.iter_mut() {
                *c = *c * inv;
            }

            let blend = |t: F| -> Vec<F> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(&c, &w)| c + t * (c - w))
                    .collect()
            };

            let reflected = blend(self.reflection);
            let fr = f(&reflected);
            if fr < simplex[0].1 {
                let expanded = blend(self.expansion);
                let fe = f(&expanded);
                simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
                continue;
            }
            // Contract toward the better of worst/reflected.
            let contracted = if fr < worst.1 {
                blend(self.contraction)
            } else {
                blend(-self.contraction)
            };
            let fc = f(&contracted);
            if fc < worst.1.min(fr) {
                simplex[dim] = (contracted, fc);
                continue;
            }
            // Shrink toward the best vertex.
            let best = simplex[0].0.clone();
            for (p, v) in simplex.iter_mut().skip(1) {
                for (x, &b) in p.iter_mut().zip(&best) {
                    *x = b + self.shrink * (*x - b);
                }
                *v = f(p);
            }
        }

        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (x, value) = simplex.swap_remove(0);
        MinimizeResult { x, value, iterations, converged }
    }

    fn diameter(&self, simplex: &[(Vec<F>, F)]) -> F {
        let best = &simplex[0].0;
        let mut d = F::zero();
        for (p, _) in simplex.iter().skip(1) {
            let mut dist = F::zero();
            for (&a, &b) in p.iter().zip(best) {
                dist = dist + (a - b) * (a - b);
            }
            d = d.max(dist.sqrt());
        }
        d
    }

    fn norm(&self, x: &[F]) -> F {
        x.iter().fold(F::zero(), |acc, &v| acc + v * v).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let nm = NelderMead::<f64>::default();
        let r = nm.minimize(
            |x| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2),
            &[0.0, 0.0],
            &[0.1, 0.1],
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.5).abs() < 1e-7);
        assert!((r.x[1] + 0.5).abs() < 1e-7);
    }

    #[test]
    fn rosenbrock() {
        let nm = NelderMead::<f64> { max_iters: 20_000, ..Default::default() };
        let r = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5, "{:?}", r.x);
        assert!((r.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn already_at_minimum_stops_quickly() {
        let nm = NelderMead::<f64>::default();
        let r = nm.minimize(|x| x[0] * x[0] + x[1] * x[1], &[0.0, 0.0], &[1e-10, 1e-10]);
        assert!(r.converged);
        assert!(r.iterations < 50);
        assert!(r.value < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let nm = NelderMead::<f32> { rel_tol: 1e-5, ..Default::default() };
        let r = nm.minimize(|x| (x[0] - 2.0) * (x[0] - 2.0), &[0.0], &[0.25]);
        assert!((r.x[0] - 2.0).abs() < 1e-3);
    }
}
