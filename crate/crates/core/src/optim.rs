//! Nelder–Mead simplex minimization (reflection 1, expansion 2,
//! contraction 1/2, shrink 1/2).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Converged once the simplex diameter, measured after `measure`, is at
    /// most this.
    pub tolerance: f64,
    /// Offset along each axis for the initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-8,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite values count as `+∞`. Convergence is
/// judged on `measure(x)` (e.g. the model parameters behind a
/// reparametrization): the largest coordinate distance between any vertex
/// and the best one.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    measure: impl Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let d = x0.len();
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
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let diameter = |s: &[(Vec<f64>, f64)]| -> f64 {
        let best = measure(&s[0].0);
        s[1..]
            .iter()
            .map(|(x, _)| {
                measure(x)
                    .iter()
                    .zip(&best)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };

    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if d == 0 || (simplex[0].1.is_finite() && diameter(&simplex) <= opts.tolerance) {
            converged = simplex[0].1.is_finite();
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|(x, _)| x[j]).sum::<f64>() / d as f64)
            .collect();
        let toward =
            |t: f64, worst: &[f64]| -> Vec<f64> { centroid.iter().zip(worst).map(|(c, w)| c + t * (w - c)).collect() };
        let worst = simplex[d].0.clone();
        let (best_v, second_v, worst_v) = (simplex[0].1, simplex[d - 1].1, simplex[d].1);

        let xr = toward(-1.0, &worst);
        let vr = eval(&xr);
        if vr < best_v {
            let xe = toward(-2.0, &worst);
            let ve = eval(&xe);
            simplex[d] = if ve < vr { (xe, ve) } else { (xr, vr) };
            continue;
        }
        if vr < second_v {
            simplex[d] = (xr, vr);
            continue;
        }
        let (xc, vc) = if vr < worst_v {
            let xc = toward(-0.5, &worst);
            let vc = eval(&xc);
            (xc, vc)
        } else {
            let xc = toward(0.5, &worst);
            let vc = eval(&xc);
            (xc, vc)
        };
        if vc < vr.min(worst_v) {
            simplex[d] = (xc, vc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            let v = eval(&x);
            *vertex = (x, v);
        }
    }
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        iterations,
        evaluations,
        converged,
    }
}
