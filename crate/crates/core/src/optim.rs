//! Derivative-free minimizers: a box-constrained Nelder-Mead simplex and a
//! golden-section line search.

use alloc::vec;
use alloc::vec::Vec;

/// Box-constrained Nelder-Mead. Trial points are projected onto the box, so
/// minima on a face of the box are reached by the simplex collapsing onto it.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Converged once every vertex lies within this sup-norm distance of the best one.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            tolerance: 1e-6,
            max_iterations: 5000,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(lo, hi);
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0` inside `[lower, upper]`. Non-finite values are
    /// treated as `+inf`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], lower: &[f64], upper: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = x0.len();
        assert!(dim >= 1 && lower.len() == dim && upper.len() == dim);
        let mut evaluations = 0;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut start = x0.to_vec();
        project(&mut start, lower, upper);
        let mut best_value = eval(&start);
        let mut iterations = 0;
        let mut converged = false;
        // Projection can flatten the simplex against a face or corner of the
        // box before the minimum is reached, so a converged simplex is rebuilt
        // around its best vertex until a restart makes no further progress.
        while iterations < self.max_iterations {
            let (x, value, used, done) =
                self.run(&mut eval, &start, best_value, lower, upper, self.max_iterations - iterations);
            iterations += used;
            let moved = x.iter().zip(&start).any(|(a, b)| (a - b).abs() >= self.tolerance);
            let improved = value < best_value;
            if improved {
                start = x;
                best_value = value;
            }
            if !done {
                break;
            }
            if !moved || !improved {
                converged = best_value.is_finite();
                break;
            }
        }
        Minimum {
            x: start,
            value: best_value,
            iterations,
            evaluations,
            converged,
        }
    }

    /// One simplex run from `start`. Returns the best vertex, its value, the
    /// iterations used and whether the simplex collapsed below tolerance.
    fn run<E>(
        &self,
        eval: &mut E,
        start: &[f64],
        start_value: f64,
        lower: &[f64],
        upper: &[f64],
        budget: usize,
    ) -> (Vec<f64>, f64, usize, bool)
    where
        E: FnMut(&[f64]) -> f64,
    {
        let dim = start.len();
        let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
        for i in 0..dim {
            let mut v = start.to_vec();
            let step = if v[i] + self.initial_step <= upper[i] {
                self.initial_step
            } else {
                -self.initial_step
            };
            v[i] += step;
            project(&mut v, lower, upper);
            simplex.push(v);
        }
        let mut values: Vec<f64> = core::iter::once(start_value)
            .chain(simplex[1..].iter().map(|v| eval(v)))
            .collect();

        let mut iterations = 0;
        let mut converged = false;
        let mut order: Vec<usize> = (0..=dim).collect();
        while iterations < budget {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let best = order[0];
            let worst = order[dim];
            let second = order[dim - 1];

            let diameter = simplex
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if diameter < self.tolerance && values[best].is_finite() {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for &idx in &order[..dim] {
                for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                    *c += x / dim as f64;
                }
            }
            let along = |coef: f64| -> Vec<f64> {
                let mut p: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c + coef * (c - w))
                    .collect();
                project(&mut p, lower, upper);
                p
            };

            let reflected = along(1.0);
            let fr = eval(&reflected);
            if fr < values[best] {
                let expanded = along(2.0);
                let fe = eval(&expanded);
                if fe < fr {
                    simplex[worst] = expanded;
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
                continue;
            }
            if fr < values[second] {
                simplex[worst] = reflected;
                values[worst] = fr;
                continue;
            }
            let (contracted, fc) = if fr < values[worst] {
                let c = along(0.5);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = along(-0.5);
                let fc = eval(&c);
                (c, fc)
            };
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
                continue;
            }
            // Shrink towards the best vertex.
            let anchor = simplex[best].clone();
            for &idx in &order[1..] {
                for (x, a) in simplex[idx].iter_mut().zip(&anchor) {
                    *x = a + 0.5 * (*x - a);
                }
                values[idx] = eval(&simplex[idx]);
            }
        }

        let best = (0..=dim)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap_or(0);
        (simplex[best].clone(), values[best], iterations, converged)
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, tolerance: f64, max_iterations: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iterations {
        if (b - a).abs() <= tolerance {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
