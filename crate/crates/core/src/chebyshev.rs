//! Chebyshev–Lobatto collocation on `[0, 1]` with barycentric cardinal functions.

/// Nodes `x_j = (1 − cos(π j/(D−1)))/2`, increasing, with `x_0 = 0` and `x_{D−1} = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    nodes: Vec<f64>,
    /// Scaled barycentric weights `(−1)^j`, halved at both ends.
    bary: Vec<f64>,
}

impl ChebyshevGrid {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2);
        let n = order - 1;
        let nodes = (0..order)
            .map(|j| {
                // sin² form keeps the small nodes accurate
                let t = std::f64::consts::FRAC_PI_2 * j as f64 / n as f64;
                t.sin().powi(2)
            })
            .collect();
        let bary = (0..order)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        ChebyshevGrid { nodes, bary }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values `ℓ_j(y)` of all cardinal functions at `y`, written into `out`.
    pub fn cardinals_into(&self, y: f64, out: &mut [f64]) {
        let mut total = 0.0;
        for (j, (&x, &b)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let diff = y - x;
            if diff == 0.0 {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[j] = 1.0;
                return;
            }
            let q = b / diff;
            out[j] = q;
            total += q;
        }
        let inv = 1.0 / total;
        out.iter_mut().for_each(|v| *v *= inv);
    }

    pub fn cardinals(&self, y: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.order()];
        self.cardinals_into(y, &mut out);
        out
    }

    /// Interpolant of the nodal values at `y`.
    pub fn interpolate<T>(&self, values: &[T], y: f64) -> T
    where
        T: Copy + std::iter::Sum + std::ops::Mul<f64, Output = T>,
    {
        let l = self.cardinals(y);
        values.iter().zip(&l).map(|(&v, &c)| v * c).sum()
    }

    /// Taylor coefficients at 0 of the cardinals: `out[k][j] = ℓ_j^{(k)}(0)/k!`, `k ≤ max_k`.
    ///
    /// `ℓ_j(y) = Π_{i≠j}(y − x_i) / Π_{i≠j}(x_j − x_i)`; all nodes are `≥ 0`, so each
    /// coefficient of the numerator is a sum of terms of one sign.
    pub fn taylor_at_zero(&self, max_k: usize) -> Vec<Vec<f64>> {
        let d = self.order();
        let mut out = vec![vec![0.0; d]; max_k + 1];
        for j in 0..d {
            let xj = self.nodes[j];
            let mut poly = vec![0.0; max_k + 1];
            poly[0] = 1.0;
            let mut denom = 1.0;
            for (i, &xi) in self.nodes.iter().enumerate() {
                if i == j {
                    continue;
                }
                denom *= xj - xi;
                for k in (0..=max_k).rev() {
                    let lower = if k > 0 { poly[k - 1] } else { 0.0 };
                    poly[k] = lower - xi * poly[k];
                }
            }
            for k in 0..=max_k {
                out[k][j] = poly[k] / denom;
            }
        }
        out
    }

    /// Clenshaw–Curtis weights for `∫_0^1`.
    pub fn clenshaw_curtis_weights(&self) -> Vec<f64> {
        let d = self.order();
        let n = d - 1;
        let mut w = vec![0.0; d];
        for (j, wj) in w.iter_mut().enumerate() {
            let theta = std::f64::consts::PI * j as f64 / n as f64;
            let mut s = 1.0;
            for k in 1..=n / 2 {
                let b = if 2 * k == n { 1.0 } else { 2.0 };
                s -= b * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            let c = if j == 0 || j == n { 1.0 } else { 2.0 };
            // factor 1/2 maps [−1, 1] to [0, 1]
            *wj = 0.5 * c * s / n as f64;
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_span_the_interval() {
        let g = ChebyshevGrid::new(9);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[8], 1.0);
        assert!((g.nodes()[4] - 0.5).abs() < 1e-15);
        assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn cardinals_partition_unity_and_hit_nodes() {
        let g = ChebyshevGrid::new(16);
        let l = g.cardinals(0.3137);
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let at_node = g.cardinals(g.nodes()[5]);
        assert_eq!(at_node[5], 1.0);
        assert_eq!(at_node.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn interpolation_is_spectrally_accurate() {
        let g = ChebyshevGrid::new(40);
        let f = |x: f64| 1.0 / (1.0 + x);
        let vals: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        for y in [0.0137, 0.5, 0.77, 0.999] {
            assert!((g.interpolate(&vals, y) - f(y)).abs() < 1e-14);
        }
    }

    #[test]
    fn taylor_coefficients_reproduce_the_interpolant() {
        let g = ChebyshevGrid::new(24);
        let f = |x: f64| (0.3 * x).exp() / (2.0 + x);
        let vals: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        let t = g.taylor_at_zero(10);
        let coef: Vec<f64> = t.iter().map(|row| row.iter().zip(&vals).map(|(a, b)| a * b).sum()).collect();
        let y: f64 = 1e-3;
        let series: f64 = coef.iter().enumerate().map(|(k, c)| c * y.powi(k as i32)).sum();
        assert!((series - g.interpolate(&vals, y)).abs() < 1e-15);
        // first coefficient of f at 0 is 1/2, second is (0.3·2 − 1)/4
        assert!((coef[0] - 0.5).abs() < 1e-14);
        assert!((coef[1] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn quadrature_weights() {
        let g = ChebyshevGrid::new(33);
        let w = g.clenshaw_curtis_weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let integral: f64 = w.iter().zip(g.nodes()).map(|(w, x)| w / (1.0 + x)).sum();
        assert!((integral - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
