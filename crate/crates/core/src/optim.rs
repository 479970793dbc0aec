//! Nelder–Mead simplex minimization.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Stop once the spread of objective values across the simplex is below
    /// `tol` relative to the best value.
    pub tol: f64,
    /// Initial step along each coordinate.
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ABS_FLOOR: f64 = 1e-300;

/// Minimizes `f` from `x0`. Non-finite objective values are treated as
/// `+∞`, which lets callers express hard constraints.
pub fn minimize(f: impl Fn(&[f64]) -> f64, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let dim = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    pts.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();

    let (alpha, gamma, rho, shrink) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=dim).collect();
    while iterations < opts.max_iters {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[dim];
        let second = order[dim.saturating_sub(1)];

        let spread = vals[worst] - vals[best];
        let size = pts
            .iter()
            .flat_map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if vals[best].is_finite()
            && (spread <= opts.tol * vals[best].abs() + ABS_FLOOR || size <= 1e-14)
        {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(&pts[i]) {
                *c += v / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(alpha);
        let f_r = eval(&reflected);
        if f_r < vals[best] {
            let expanded = along(gamma);
            let f_e = eval(&expanded);
            if f_e < f_r {
                pts[worst] = expanded;
                vals[worst] = f_e;
            } else {
                pts[worst] = reflected;
                vals[worst] = f_r;
            }
            continue;
        }
        if f_r < vals[second] {
            pts[worst] = reflected;
            vals[worst] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < vals[worst] {
            let c = along(rho * alpha);
            let v = eval(&c);
            (c, v)
        } else {
            let c = along(-rho);
            let v = eval(&c);
            (c, v)
        };
        if f_c < vals[worst].min(f_r) {
            pts[worst] = contracted;
            vals[worst] = f_c;
            continue;
        }
        let anchor = pts[best].clone();
        for i in 0..=dim {
            if i == best {
                continue;
            }
            for (p, a) in pts[i].iter_mut().zip(&anchor) {
                *p = a + shrink * (*p - a);
            }
            vals[i] = eval(&pts[i]);
        }
    }
    let best = (0..=dim).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    SimplexResult {
        x: pts[best].clone(),
        value: vals[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(
            f,
            &[-1.2, 1.0],
            &SimplexOptions {
                max_iters: 5000,
                tol: 1e-14,
                step: 0.5,
            },
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn infinite_region_is_avoided() {
        let f = |x: &[f64]| if x[0] < 0.5 { f64::NAN } else { (x[0] - 0.7).powi(2) };
        let r = minimize(
            f,
            &[2.0],
            &SimplexOptions {
                max_iters: 500,
                tol: 1e-12,
                step: 0.3,
            },
        );
        assert!((r.x[0] - 0.7).abs() < 1e-5);
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let r = minimize(
            f,
            &[3.0, -2.0, 1.0],
            &SimplexOptions {
                max_iters: 3,
                tol: 1e-15,
                step: 0.1,
            },
        );
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
