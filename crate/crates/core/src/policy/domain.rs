//! Truncated spread domain `[0, ε_max]²` and its tensor-product quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    /// Nodes at `i·h`, `h = ε_max/(n−1)`, end weights halved.
    Trapezoid,
    /// Nodes at cell centres `(i + ½)·h`, `h = ε_max/n`.
    Midpoint,
}

impl std::str::FromStr for Quadrature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "trapezoid" => Ok(Quadrature::Trapezoid),
            "midpoint" => Ok(Quadrature::Midpoint),
            other => Err(Error::InvalidParameter(format!(
                "unknown quadrature {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Quadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Quadrature::Trapezoid => "trapezoid",
            Quadrature::Midpoint => "midpoint",
        })
    }
}

pub const MIN_GRID_N: usize = 16;
pub const DEFAULT_GRID_N: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadDomain {
    pub eps_max: f64,
    /// Nodes per axis.
    pub grid_n: usize,
    pub quadrature: Quadrature,
}

impl SpreadDomain {
    pub fn new(eps_max: f64, grid_n: usize, quadrature: Quadrature) -> Result<Self> {
        if !(eps_max > 0.0 && eps_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps_max must be positive, got {eps_max}"
            )));
        }
        if grid_n < MIN_GRID_N {
            return Err(Error::InvalidParameter(format!(
                "grid_n must be at least {MIN_GRID_N}, got {grid_n}"
            )));
        }
        Ok(Self {
            eps_max,
            grid_n,
            quadrature,
        })
    }

    /// `ε_max = 10%` of the mid-price, 257 trapezoid nodes per axis.
    pub fn default_for_price(mid_price: f64) -> Result<Self> {
        Self::new(0.1 * mid_price.abs(), DEFAULT_GRID_N, Quadrature::Trapezoid)
    }

    /// Distance between adjacent nodes.
    pub fn spacing(&self) -> f64 {
        match self.quadrature {
            Quadrature::Trapezoid => self.eps_max / (self.grid_n - 1) as f64,
            Quadrature::Midpoint => self.eps_max / self.grid_n as f64,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        match self.quadrature {
            Quadrature::Trapezoid => (0..self.grid_n)
                .map(|i| {
                    if i + 1 == self.grid_n {
                        self.eps_max
                    } else {
                        i as f64 * h
                    }
                })
                .collect(),
            Quadrature::Midpoint => (0..self.grid_n).map(|i| (i as f64 + 0.5) * h).collect(),
        }
    }

    /// One-dimensional quadrature weights; the 2-D weight of node `(i, j)` is
    /// `w[i]·w[j]`.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.grid_n];
        if self.quadrature == Quadrature::Trapezoid {
            w[0] = 0.5 * h;
            w[self.grid_n - 1] = 0.5 * h;
        }
        w
    }

    /// Weights of the trapezoid rule on every other node, or `None` when the
    /// grid does not nest (midpoint rule or an even node count).
    pub(crate) fn coarse_weights(&self) -> Option<Vec<f64>> {
        if self.quadrature != Quadrature::Trapezoid || self.grid_n % 2 == 0 {
            return None;
        }
        let h2 = 2.0 * self.spacing();
        let last = self.grid_n - 1;
        Some(
            (0..self.grid_n)
                .map(|i| match i {
                    _ if i % 2 == 1 => 0.0,
                    0 => 0.5 * h2,
                    _ if i == last => 0.5 * h2,
                    _ => h2,
                })
                .collect(),
        )
    }

    /// Cell boundaries along one axis used when sampling. Trapezoid cells
    /// span adjacent nodes; midpoint cells are centred on their node.
    pub fn cell_edges(&self) -> Vec<f64> {
        match self.quadrature {
            Quadrature::Trapezoid => self.nodes(),
            Quadrature::Midpoint => {
                let h = self.spacing();
                (0..=self.grid_n)
                    .map(|i| {
                        if i == self.grid_n {
                            self.eps_max
                        } else {
                            i as f64 * h
                        }
                    })
                    .collect()
            }
        }
    }

    /// The same domain with twice the resolution; trapezoid grids stay nested.
    pub fn refined(&self) -> Self {
        let grid_n = match self.quadrature {
            Quadrature::Trapezoid => 2 * self.grid_n - 1,
            Quadrature::Midpoint => 2 * self.grid_n,
        };
        Self { grid_n, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_grids_and_bad_extent() {
        assert!(SpreadDomain::new(1.0, 15, Quadrature::Trapezoid).is_err());
        assert!(SpreadDomain::new(0.0, 16, Quadrature::Trapezoid).is_err());
        assert!(SpreadDomain::new(f64::INFINITY, 16, Quadrature::Midpoint).is_err());
        assert!(SpreadDomain::new(1.0, 16, Quadrature::Midpoint).is_ok());
    }

    #[test]
    fn weights_integrate_constants_exactly() {
        for q in [Quadrature::Trapezoid, Quadrature::Midpoint] {
            let d = SpreadDomain::new(2.5, 33, q).unwrap();
            let total: f64 = d.weights().iter().sum();
            assert!((total - 2.5).abs() < 1e-14, "{q}: {total}");
        }
    }

    #[test]
    fn trapezoid_nodes_span_the_domain() {
        let d = SpreadDomain::new(3.0, 17, Quadrature::Trapezoid).unwrap();
        let n = d.nodes();
        assert_eq!(n[0], 0.0);
        assert_eq!(*n.last().unwrap(), 3.0);
        assert_eq!(d.cell_edges().len(), 17);
    }

    #[test]
    fn coarse_weights_nest() {
        let d = SpreadDomain::new(1.0, 17, Quadrature::Trapezoid).unwrap();
        let w = d.coarse_weights().unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(SpreadDomain::new(1.0, 16, Quadrature::Trapezoid)
            .unwrap()
            .coarse_weights()
            .is_none());
        assert_eq!(d.refined().grid_n, 33);
    }

    #[test]
    fn default_domain_follows_price() {
        let d = SpreadDomain::default_for_price(250.0).unwrap();
        assert_eq!(d.eps_max, 25.0);
        assert_eq!(d.grid_n, 257);
        assert_eq!(d.quadrature, Quadrature::Trapezoid);
    }
}
