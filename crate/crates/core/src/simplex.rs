//! Derivative-free Nelder-Mead minimization.
//!
//! Uses the dimension-adaptive coefficients of Gao and Han, which keep
//! expansion and contraction steps useful beyond a handful of dimensions.

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Function evaluation budget for one call to [`NelderMead::minimize`].
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub ftol: f64,
    /// ... and the simplex diameter falls below this.
    pub xtol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            ftol: 1e-12,
            xtol: 1e-10,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        if n == 0 {
            return Minimum {
                x: Vec::new(),
                value: f(x0),
                evals: 1,
            };
        }
        let nf = n as f64;
        let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
        let rho = 0.75 - 1.0 / (2.0 * nf);
        let sigma = 1.0 - 1.0 / nf;

        let mut evals = 0;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += if v[i] >= 0.0 { self.initial_step } else { -self.initial_step };
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

        let mut order: Vec<usize> = (0..=n).collect();
        loop {
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let best = order[0];
            let worst = order[n];
            let second = order[n - 1];

            let spread = values[worst] - values[best];
            let diameter = simplex
                .iter()
                .map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if (spread <= self.ftol && diameter <= self.xtol) || evals >= self.max_evals {
                break;
            }

            let mut centroid = vec![0.0; n];
            for &k in &order[..n] {
                for (c, v) in centroid.iter_mut().zip(&simplex[k]) {
                    *c += v / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let reflected = along(alpha);
            let fr = eval(&reflected, &mut evals);
            if fr < values[best] {
                let expanded = along(alpha * gamma);
                let fe = eval(&expanded, &mut evals);
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
            let (candidate, fc) = if fr < values[worst] {
                let outside = along(alpha * rho);
                let fo = eval(&outside, &mut evals);
                (outside, fo)
            } else {
                let inside = along(-rho);
                let fi = eval(&inside, &mut evals);
                (inside, fi)
            };
            if fc < values[worst].min(fr) {
                simplex[worst] = candidate;
                values[worst] = fc;
                continue;
            }
            // shrink toward the best vertex
            let anchor = simplex[best].clone();
            for &k in &order[1..] {
                for (v, a) in simplex[k].iter_mut().zip(&anchor) {
                    *v = a + sigma * (*v - a);
                }
                values[k] = eval(&simplex[k], &mut evals);
            }
        }

        let best = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .expect("simplex is nonempty");
        Minimum {
            x: simplex[best].clone(),
            value: values[best],
            evals,
        }
    }
}
