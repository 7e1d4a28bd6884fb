//! Bounded Nelder–Mead with box clamping and deterministic multi-start.

use rayon::prelude::*;

/// Closed box `[lower_i, upper_i]`; infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "bound vectors differ in length");
        assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u), "empty box");
        Bounds { lower, upper }
    }

    pub fn unit(dim: usize) -> Self {
        Bounds::new(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }

    /// Evenly spaced points per coordinate over a finite box; `per_dim = 5`
    /// gives the step-0.25 grid on `[0,1]`.
    pub fn grid(&self, per_dim: usize) -> Vec<Vec<f64>> {
        assert!(per_dim >= 2);
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| {
                assert!(l.is_finite() && u.is_finite(), "grid needs a finite box");
                (0..per_dim)
                    .map(|i| l + (u - l) * i as f64 / (per_dim - 1) as f64)
                    .collect()
            })
            .collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub max_iter: usize,
    /// Stop when the simplex f-spread is below `f_tol·(1+|f_best|)` ...
    pub f_tol: f64,
    /// ... and its diameter is below `x_tol·(1+‖x_best‖∞)`.
    pub x_tol: f64,
    /// Initial edge length relative to the box width (absolute when unbounded).
    pub initial_step: f64,
    /// Fresh-simplex restarts from the incumbent after convergence.
    pub restarts: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_iter: 500,
            f_tol: 1e-10,
            x_tol: 1e-8,
            initial_step: 0.1,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Ordering used to pick a winner: smaller objective, then lexicographically
/// smaller parameter vector.
fn better(a: &Minimum, b: &Minimum) -> bool {
    match a.f.total_cmp(&b.f) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a
            .x
            .iter()
            .zip(&b.x)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .is_some_and(|o| o.is_lt()),
    }
}

fn eval<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn initial_simplex(x0: &[f64], bounds: &Bounds, step: f64) -> Vec<Vec<f64>> {
    let mut simplex = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let (l, u) = (bounds.lower[i], bounds.upper[i]);
        let width = u - l;
        let h = if width.is_finite() {
            step * width
        } else {
            step * x0[i].abs().max(1.0)
        };
        let mut v = x0.to_vec();
        v[i] = if x0[i] + h <= u { x0[i] + h } else { x0[i] - h };
        simplex.push(v);
    }
    simplex
}

fn single_run<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &Options,
) -> Minimum {
    let n = x0.len();
    let mut points = initial_simplex(x0, bounds, opts.initial_step);
    for p in points.iter_mut() {
        bounds.clamp(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| eval(f, p)).collect();
    let mut iterations = 0;
    let mut converged = false;

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let point_at = |centroid: &[f64], worst: &[f64], coef: f64| -> Vec<f64> {
        let mut p: Vec<f64> = centroid
            .iter()
            .zip(worst)
            .map(|(c, w)| c + coef * (c - w))
            .collect();
        bounds.clamp(&mut p);
        p
    };

    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        points = order.iter().map(|&i| points[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let f_best = values[0];
        let spread = values[n] - f_best;
        let scale = 1.0 + points[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diameter = points[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&points[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let spread_ok = spread.is_finite() && spread <= opts.f_tol * (1.0 + f_best.abs());
        if spread_ok && diameter <= opts.x_tol * scale {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| points[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let reflected = point_at(&centroid, &points[n], alpha);
        let fr = eval(f, &reflected);
        if fr < values[0] {
            let expanded = point_at(&centroid, &points[n], gamma);
            let fe = eval(f, &expanded);
            if fe < fr {
                points[n] = expanded;
                values[n] = fe;
            } else {
                points[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            points[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = point_at(&centroid, &points[n], rho * alpha);
            let fc = eval(f, &c);
            (c, fc)
        } else {
            let c = point_at(&centroid, &points[n], -rho);
            let fc = eval(f, &c);
            (c, fc)
        };
        if fc < values[n].min(fr) {
            points[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = points[0].clone();
        for i in 1..=n {
            let mut p: Vec<f64> = best
                .iter()
                .zip(&points[i])
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            bounds.clamp(&mut p);
            values[i] = eval(f, &p);
            points[i] = p;
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .expect("simplex is non-empty");
    Minimum {
        x: points[best].clone(),
        f: values[best],
        iterations,
        converged,
    }
}

/// Coordinate pattern search with step halving. Unlike a clamped simplex it
/// cannot flatten against a bound, so it finishes minima close to the box.
fn compass<F: Fn(&[f64]) -> f64>(f: &F, from: &Minimum, bounds: &Bounds, opts: &Options) -> Minimum {
    let n = from.x.len();
    let mut x = from.x.clone();
    let mut fx = from.f;
    let mut steps: Vec<f64> = (0..n)
        .map(|i| {
            let width = bounds.upper[i] - bounds.lower[i];
            let base = if width.is_finite() { width } else { x[i].abs().max(1.0) };
            0.1 * opts.initial_step * base
        })
        .collect();
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if steps.iter().all(|&h| h <= 0.1 * opts.x_tol * scale) {
            break;
        }
        iterations += 1;
        let mut moved = false;
        for i in 0..n {
            for dir in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[i] = (x[i] + dir * steps[i]).clamp(bounds.lower[i], bounds.upper[i]);
                if trial[i] == x[i] {
                    continue;
                }
                let ft = eval(f, &trial);
                if ft < fx {
                    x = trial;
                    fx = ft;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            for h in steps.iter_mut() {
                *h *= 0.5;
            }
        }
    }
    Minimum {
        x,
        f: fx,
        iterations: from.iterations + iterations,
        converged: from.converged,
    }
}

/// Minimises `f` over the box from `x0`. Each simplex run is followed by a
/// compass polish and, if that helped, a fresh simplex from the new incumbent.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    bounds: &Bounds,
    opts: &Options,
) -> Minimum {
    assert_eq!(x0.len(), bounds.dim());
    let mut start = x0.to_vec();
    bounds.clamp(&mut start);
    if start.is_empty() {
        return Minimum {
            f: eval(f, &start),
            x: start,
            iterations: 0,
            converged: true,
        };
    }
    let mut best = single_run(f, &start, bounds, opts);
    for _ in 0..=opts.restarts {
        let before = best.f;
        let polished = compass(f, &best, bounds, opts);
        let next = single_run(f, &polished.x, bounds, opts);
        let iterations = polished.iterations + next.iterations;
        best = if better(&next, &polished) { next } else { polished };
        best.iterations = iterations;
        let improved = before - best.f > opts.f_tol * (1.0 + before.abs());
        if !improved {
            break;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartResult {
    pub best: Minimum,
    /// Every start's local minimum, in start order.
    pub runs: Vec<Minimum>,
    /// Set when no start met the convergence tolerance.
    pub warning: bool,
}

/// Runs Nelder–Mead from each start concurrently and reduces in start order,
/// so the winner does not depend on scheduling.
pub fn multi_start<F: Fn(&[f64]) -> f64 + Sync>(
    f: &F,
    starts: &[Vec<f64>],
    bounds: &Bounds,
    opts: &Options,
) -> MultiStartResult {
    assert!(!starts.is_empty(), "at least one start is required");
    let runs: Vec<Minimum> = starts
        .par_iter()
        .map(|s| nelder_mead(f, s, bounds, opts))
        .collect();
    let mut best = runs[0].clone();
    for run in &runs[1..] {
        if better(run, &best) {
            best = run.clone();
        }
    }
    let warning = !runs.iter().any(|r| r.converged);
    MultiStartResult {
        best,
        runs,
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rosenbrock_unbounded() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let b = Bounds::new(vec![f64::NEG_INFINITY; 2], vec![f64::INFINITY; 2]);
        let opts = Options {
            max_iter: 5000,
            ..Default::default()
        };
        let m = nelder_mead(&f, &[-1.2, 1.0], &b, &opts);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{m:?}");
        assert!(m.converged);
    }

    #[test]
    fn minimum_on_the_boundary() {
        let f = |x: &[f64]| (x[0] - 2.0).powi(2) + (x[1] + 0.5).powi(2);
        let m = nelder_mead(&f, &[0.5, 0.5], &Bounds::unit(2), &Options::default());
        assert!((m.x[0] - 1.0).abs() < 1e-7 && m.x[1].abs() < 1e-7, "{m:?}");
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let f = |x: &[f64]| if x[0] > 0.7 { f64::NAN } else { (x[0] - 0.3).powi(2) };
        let m = nelder_mead(&f, &[0.65], &Bounds::unit(1), &Options::default());
        assert!((m.x[0] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn grid_of_unit_square() {
        let g = Bounds::unit(2).grid(5);
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert_eq!(g[1], vec![0.0, 0.25]);
        assert_eq!(g[24], vec![1.0, 1.0]);
    }

    #[test]
    fn multi_start_finds_global_and_breaks_ties() {
        // two equal minima at 0.2 and 0.8; the smaller parameter wins
        let f = |x: &[f64]| ((x[0] - 0.2) * (x[0] - 0.8)).powi(2);
        let b = Bounds::unit(1);
        let r = multi_start(&f, &b.grid(5), &b, &Options::default());
        assert!((r.best.x[0] - 0.2).abs() < 1e-6, "{:?}", r.best);
        assert!(!r.warning);
        assert_eq!(r.runs.len(), 5);
        let again = multi_start(&f, &b.grid(5), &b, &Options::default());
        assert_eq!(r, again);
    }

    proptest! {
        #[test]
        fn quadratic_in_box(cx in -0.5f64..1.5, cy in -0.5f64..1.5) {
            let f = |x: &[f64]| (x[0] - cx).powi(2) + 3.0 * (x[1] - cy).powi(2);
            let b = Bounds::unit(2);
            let r = multi_start(&f, &b.grid(3), &b, &Options::default());
            prop_assert!((r.best.x[0] - cx.clamp(0.0, 1.0)).abs() < 1e-6);
            prop_assert!((r.best.x[1] - cy.clamp(0.0, 1.0)).abs() < 1e-6, "{:?}", r);
            prop_assert!(r.best.x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
