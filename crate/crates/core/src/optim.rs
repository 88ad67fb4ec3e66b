//! Derivative-free Nelder–Mead minimization on ℝⁿ.

#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Stop once the simplex value spread drops below this.
    pub f_tol: f64,
    /// Stop once the simplex diameter drops below this.
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            f_tol: 1e-14,
            x_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl NelderMead {
    /// Minimizes `f` from the axis-aligned simplex at `x0` with edge `step`.
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64) -> Minimum {
        let n = x0.len();
        let evals = std::cell::Cell::new(0usize);
        let eval = |x: &[f64]| {
            evals.set(evals.get() + 1);
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0);
        simplex.push((x0.to_vec(), v0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step;
            let v = eval(&x);
            simplex.push((x, v));
        }
        if n == 0 {
            return Minimum { x: x0.to_vec(), value: v0, evals: evals.get() };
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| dist(x, &simplex[0].0))
                .fold(0.0, f64::max);
            if evals.get() >= self.max_evals || spread.abs() <= self.f_tol || diameter <= self.x_tol {
                break;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
                .collect();
            let worst = simplex[n].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let x = along(-0.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x);
                (x, v)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for entry in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = best.iter().zip(&entry.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                let v = eval(&x);
                *entry = (x, v);
            }
        }
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value, evals: evals.get() }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
