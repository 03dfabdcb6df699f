//! Derivative-free minimisation (Nelder-Mead simplex), fixed schedule.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct Minimum<T> {
    pub point: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `f` from `start` with an axis-aligned initial simplex of edge
/// `step`. Stops when every vertex lies within `rel_tol * max(|x|, 1e-3)`
/// of the best vertex in each coordinate, or after `max_iter` iterations.
pub(crate) fn nelder_mead<T: Scalar>(
    f: impl Fn(&[T]) -> T,
    start: &[T],
    step: T,
    rel_tol: T,
    max_iter: usize,
) -> Minimum<T> {
    let dim = start.len();
    let (alpha, gamma, rho, sigma) = (T::one(), T::of(2.0), T::of(0.5), T::of(0.5));

    let mut simplex: Vec<Vec<T>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] = v[i] + step;
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex.iter().map(|v| f(v)).collect();

    let combine = |a: &[T], b: &[T], t: T| -> Vec<T> { a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect() };

    let mut iterations = 0;
    loop {
        // Stable order: ties keep lower index first.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = &simplex[0];
        let converged = simplex[1..]
            .iter()
            .all(|v| v.iter().zip(best).all(|(&x, &b)| (x - b).abs() <= rel_tol * b.abs().max(T::of(1e-3))));
        if converged || iterations >= max_iter {
            return Minimum { point: simplex[0].clone(), value: values[0], iterations, converged };
        }
        iterations += 1;

        let mut centroid = vec![T::zero(); dim];
        for v in &simplex[..dim] {
            for (c, &x) in centroid.iter_mut().zip(v) {
                *c = *c + x / T::from_usize_lossy(dim);
            }
        }
        let worst = simplex[dim].clone();
        let reflected = combine(&centroid, &worst, -alpha);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = combine(&centroid, &worst, -gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let (candidate, fc) = if fr < values[dim] {
            let c = combine(&centroid, &reflected, rho);
            let v = f(&c);
            (c, v)
        } else {
            let c = combine(&centroid, &worst, rho);
            let v = f(&c);
            (c, v)
        };
        if fc < values[dim].min(fr) {
            simplex[dim] = candidate;
            values[dim] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=dim {
            simplex[i] = combine(&best, &simplex[i], sigma);
            values[i] = f(&simplex[i]);
        }
    }
}
