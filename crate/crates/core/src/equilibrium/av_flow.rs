use ndarray::{Array1, Array2};

use super::EquilibriumError;
use crate::model::accounting;
use crate::model::NetworkInstance;

/// Cheapest nonnegative flow on the complete directed graph (no self loops)
/// whose net outflow at node i equals `supply[i]`, with per-unit arc cost
/// `cost[i][j]`. Successive shortest paths with Bellman-Ford; arcs are
/// uncapacitated.
pub fn min_cost_flow(supply: &Array1<f64>, cost: &Array2<f64>) -> Array2<f64> {
    let m = supply.len();
    let mut flow = Array2::zeros((m, m));
    let mut left = supply.clone();
    let scale = supply.iter().map(|b| b.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return flow;
    }
    let eps = 1e-14 * scale;
    // relaxations must beat the incumbent by more than rounding noise, or
    // zero-cost cycles through reverse arcs can enter the predecessor tree
    let slack = 1e-12 * cost.iter().map(|c| c.abs()).fold(0.0, f64::max);
    // Each augmentation exhausts a source, a sink or a reverse arc.
    for _ in 0..(4 * m * m + 16) {
        let sources: Vec<usize> = (0..m).filter(|&i| left[i] > eps).collect();
        if sources.is_empty() {
            break;
        }
        let mut dist = vec![f64::INFINITY; m];
        let mut prev: Vec<Option<(usize, bool)>> = vec![None; m];
        for &s in &sources {
            dist[s] = 0.0;
        }
        for _ in 0..m {
            let mut changed = false;
            for u in 0..m {
                if !dist[u].is_finite() {
                    continue;
                }
                for v in 0..m {
                    if u == v {
                        continue;
                    }
                    // forward arc u→v
                    let d = dist[u] + cost[[u, v]];
                    if d < dist[v] - slack {
                        dist[v] = d;
                        prev[v] = Some((u, true));
                        changed = true;
                    }
                    // reverse of v→u, available while it carries flow
                    if flow[[v, u]] > eps {
                        let d = dist[u] - cost[[v, u]];
                        if d < dist[v] - slack {
                            dist[v] = d;
                            prev[v] = Some((u, false));
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let Some(sink) = (0..m)
            .filter(|&i| left[i] < -eps && dist[i].is_finite())
            .min_by(|a, b| dist[*a].total_cmp(&dist[*b]))
        else {
            break;
        };
        let mut path = Vec::new();
        let mut v = sink;
        let mut amount = -left[sink];
        while let Some((u, forward)) = prev[v] {
            if !forward {
                amount = amount.min(flow[[v, u]]);
            }
            path.push((u, v, forward));
            v = u;
            if path.len() > m {
                // rounding produced a negative cycle; nothing sound to augment
                return flow.mapv(|f: f64| f.max(0.0));
            }
        }
        amount = amount.min(left[v]);
        for (u, w, forward) in path {
            if forward {
                flow[[u, w]] += amount;
            } else {
                flow[[w, u]] -= amount;
            }
        }
        left[v] -= amount;
        left[sink] += amount;
    }
    flow.mapv_inplace(|f: f64| if f < 0.0 { 0.0 } else { f });
    flow
}

/// AV repositioning flow that balances AV drop-offs and pickups in every zone
/// at least total travel time.
pub fn feasible_av_flow(
    instance: &NetworkInstance,
    lambda: &Array2<f64>,
    idle_h: &Array1<f64>,
    idle_av: &Array1<f64>,
) -> Result<Array2<f64>, EquilibriumError> {
    let shares = accounting::idle_shares(idle_h, idle_av);
    let surplus = accounting::av_imbalance(lambda, &shares);
    let sum: f64 = surplus.sum();
    let magnitude: f64 = surplus.iter().map(|b| b.abs()).sum::<f64>() + lambda.sum();
    if sum.abs() > 1e-9 * magnitude.max(1e-300) {
        return Err(EquilibriumError::Imbalance { sum });
    }
    Ok(min_cost_flow(&surplus, instance.travel_time()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn net_out(f: &Array2<f64>) -> Array1<f64> {
        Array1::from_iter((0..f.nrows()).map(|i| f.row(i).sum() - f.column(i).sum()))
    }

    #[test]
    fn zero_imbalance_gives_zero_flow() {
        let f = min_cost_flow(&array![0.0, 0.0, 0.0], &Array2::from_elem((3, 3), 1.0));
        assert!(f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn two_zones_single_arc() {
        let f = min_cost_flow(&array![1.0, -1.0], &array![[1.0, 4.0], [4.0, 1.0]]);
        assert_eq!(f, array![[0.0, 1.0], [0.0, 0.0]]);
    }

    #[test]
    fn routes_through_cheaper_hub() {
        // 0 → 2 costs 10 directly but 2 via node 1
        let cost = array![[0.0, 1.0, 10.0], [1.0, 0.0, 1.0], [10.0, 1.0, 0.0]];
        let f = min_cost_flow(&array![2.0, 0.0, -2.0], &cost);
        assert_abs_diff_eq!(f[[0, 1]], 2.0);
        assert_abs_diff_eq!(f[[1, 2]], 2.0);
        assert_abs_diff_eq!(f[[0, 2]], 0.0);
    }

    #[test]
    fn reroutes_with_reverse_arcs() {
        let cost = array![[0.0, 1.0, 5.0, 9.0], [1.0, 0.0, 2.0, 1.0], [5.0, 2.0, 0.0, 3.0], [9.0, 1.0, 3.0, 0.0]];
        let b = array![3.0, 1.0, -2.0, -2.0];
        let f = min_cost_flow(&b, &cost);
        let r = net_out(&f) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        assert!(f.iter().all(|v| *v >= 0.0));
        for i in 0..4 {
            assert_eq!(f[[i, i]], 0.0);
        }
    }
}
