use serde::{Deserialize, Serialize};

/// Evenly spaced points on [lo, hi], endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        Self { lo, hi, points }
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi && self.points > 0
    }

    pub fn spacing(&self) -> f64 {
        if self.points > 1 {
            (self.hi - self.lo) / (self.points - 1) as f64
        } else {
            0.0
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.spacing();
        (0..self.points).map(move |k| if k > 0 && k + 1 == self.points { self.hi } else { self.lo + h * k as f64 })
    }

    /// Window of width `(hi − lo)/factor` around `center`, shifted to stay
    /// inside `bounds`.
    fn zoom(&self, center: f64, factor: f64, bounds: (f64, f64)) -> Self {
        let width = (self.hi - self.lo) / factor;
        let mut lo = center - 0.5 * width;
        let mut hi = center + 0.5 * width;
        if lo < bounds.0 {
            lo = bounds.0;
            hi = (lo + width).min(bounds.1);
        }
        if hi > bounds.1 {
            hi = bounds.1;
            lo = (hi - width).max(bounds.0);
        }
        Self { lo, hi, points: self.points }
    }
}

/// Multi-resolution argmax of `f` over a 1-D grid. Only strict improvements
/// replace the incumbent, so ties keep the smallest point and no pass can
/// lower the objective.
pub fn maximize_1d(grid: GridSpec, passes: usize, factor: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let bounds = (grid.lo, grid.hi);
    let mut best = (grid.lo, f64::NEG_INFINITY);
    let mut g = grid;
    for pass in 0..=passes {
        for x in g.values() {
            let v = f(x);
            if v > best.1 {
                best = (x, v);
            }
        }
        if pass < passes {
            g = g.zoom(best.0, factor, bounds);
        }
    }
    best
}

/// Two-dimensional counterpart of [`maximize_1d`]; `row` prepares the inner
/// evaluation for each value of the first coordinate.
pub fn maximize_2d<R>(
    outer: GridSpec,
    inner: GridSpec,
    passes: usize,
    factor: f64,
    mut row: impl FnMut(f64) -> R,
    mut f: impl FnMut(&R, f64) -> f64,
) -> (f64, f64, f64) {
    let (b_out, b_in) = ((outer.lo, outer.hi), (inner.lo, inner.hi));
    let mut best = (outer.lo, inner.lo, f64::NEG_INFINITY);
    let (mut go, mut gi) = (outer, inner);
    for pass in 0..=passes {
        for x in go.values() {
            let prepared = row(x);
            for y in gi.values() {
                let v = f(&prepared, y);
                if v > best.2 {
                    best = (x, y, v);
                }
            }
        }
        if pass < passes {
            go = go.zoom(best.0, factor, b_out);
            gi = gi.zoom(best.1, factor, b_in);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_hit_endpoints() {
        let g = GridSpec::new(1.0, 2.0, 5);
        let v: Vec<f64> = g.values().collect();
        assert_eq!(v, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(GridSpec::new(3.0, 4.0, 1).values().collect::<Vec<_>>(), vec![3.0]);
    }

    #[test]
    fn zoom_stays_inside() {
        let g = GridSpec::new(0.0, 10.0, 11).zoom(0.2, 10.0, (0.0, 10.0));
        assert_eq!((g.lo, g.hi), (0.0, 1.0));
        let g = GridSpec::new(0.0, 10.0, 11).zoom(9.9, 10.0, (0.0, 10.0));
        assert_eq!((g.lo, g.hi), (9.0, 10.0));
    }

    #[test]
    fn zoom_finds_smooth_peak() {
        let (x, v) = maximize_1d(GridSpec::new(0.0, 10.0, 21), 3, 10.0, |x| -(x - std::f64::consts::PI).powi(2));
        assert!((x - std::f64::consts::PI).abs() < 1e-3, "{x}");
        assert!(v <= 0.0);
    }

    #[test]
    fn flat_objective_keeps_lowest_point() {
        let (x, y, v) = maximize_2d(GridSpec::new(0.5, 2.0, 7), GridSpec::new(0.0, 1.0, 7), 3, 10.0, |_| (), |_, _| 0.0);
        assert_eq!((x, y, v), (0.5, 0.0, 0.0));
    }

    #[test]
    fn refinement_never_decreases() {
        let f = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y).cos() - 0.1 * x * y;
        let mut last = f64::NEG_INFINITY;
        for passes in 0..5 {
            let (_, _, v) = maximize_2d(GridSpec::new(0.0, 4.0, 9), GridSpec::new(0.0, 4.0, 9), passes, 10.0, |x| x, |x, y| f(*x, y));
            assert!(v >= last);
            last = v;
        }
    }
}
