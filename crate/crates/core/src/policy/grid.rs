//! The normalized Gibbs density on the spread grid and sampling from it.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::pairwise_sum;

use super::domain::{Quadrature, SpreadDomain};
use super::integrand::IntegrandTable;
use super::model::{expected_reward, Moments, SpreadModel};
use super::solver::{RobustSolution, WorstCaseProblem};

/// Gibbs density `π(ε⁺, ε⁻) = M/Z` at the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyGrid {
    pub domain: SpreadDomain,
    pub nodes: Vec<f64>,
    /// Row-major, the buy-side spread indexes rows.
    pub density: Vec<f64>,
    /// `log Z`, the unnormalized mass of `M`.
    pub log_partition: f64,
    /// Quadrature of the stored density minus one.
    pub normalization_residual: f64,
    /// Relative error estimate of `Z` from the nested coarse grid.
    pub quadrature_error: Option<f64>,
}

fn from_table(
    domain: &SpreadDomain,
    table: &IntegrandTable,
    moments: &Moments,
) -> Result<PolicyGrid> {
    let log_m = table.log_m_grid(moments)?;
    let lz = match table.log_mass(moments) {
        Ok(v) => v,
        Err(Error::QuadratureNonFinite) => {
            return Err(Error::DegeneratePolicy(
                "partition function is not finite".into(),
            ))
        }
        Err(e) => return Err(e),
    };
    let density: Vec<f64> = log_m.iter().map(|l| (l - lz).exp()).collect();
    let quadrature_error = match table.log_mass_coarse(moments) {
        Some(lc) => Some((lc? - lz).exp_m1().abs() / 3.0),
        None => None,
    };
    let mut grid = PolicyGrid {
        domain: *domain,
        nodes: table.nodes().to_vec(),
        density,
        log_partition: lz,
        normalization_residual: 0.0,
        quadrature_error,
    };
    let mass = grid.total_mass();
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::DegeneratePolicy(format!("density mass {mass}")));
    }
    grid.normalization_residual = mass - 1.0;
    Ok(grid)
}

/// The Gibbs policy for fixed moments.
pub fn gibbs_policy(
    model: &SpreadModel,
    domain: &SpreadDomain,
    moments: &Moments,
) -> Result<PolicyGrid> {
    let table = IntegrandTable::new(model, domain)?;
    from_table(domain, &table, moments)
}

/// The Gibbs policy at the worst-case moments of a solution.
pub fn build_policy(
    model: &SpreadModel,
    domain: &SpreadDomain,
    solution: &RobustSolution,
) -> Result<PolicyGrid> {
    gibbs_policy(model, domain, &solution.moments())
}

impl WorstCaseProblem {
    /// [`build_policy`] reusing this problem's integrand table.
    pub fn policy(&self, solution: &RobustSolution) -> Result<PolicyGrid> {
        from_table(self.domain(), self.table(), &solution.moments())
    }

    /// The Gibbs policy for arbitrary moments on this problem's grid.
    pub fn policy_for(&self, moments: &Moments) -> Result<PolicyGrid> {
        from_table(self.domain(), self.table(), moments)
    }
}

/// `∑ wᵢwⱼ (π·r − γ π log π)` for any density on the grid: the discretized
/// entropy-regularized objective the Gibbs density maximizes.
pub fn inner_objective(
    model: &SpreadModel,
    domain: &SpreadDomain,
    moments: &Moments,
    density: &[f64],
) -> Result<f64> {
    let n = domain.grid_n;
    if density.len() != n * n {
        return Err(Error::InvalidParameter(format!(
            "density has {} entries, grid needs {}",
            density.len(),
            n * n
        )));
    }
    let nodes = domain.nodes();
    let w = domain.weights();
    let rows: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                let p = density[i * n + j];
                let r = expected_reward(model, nodes[i], nodes[j], moments);
                let ent = if p > 0.0 { p * p.ln() } else { 0.0 };
                s += w[i] * w[j] * (p * r - model.gamma * ent);
            }
            s
        })
        .collect();
    Ok(pairwise_sum(&rows))
}

impl PolicyGrid {
    pub fn grid_n(&self) -> usize {
        self.domain.grid_n
    }

    pub fn density_at(&self, i: usize, j: usize) -> f64 {
        self.density[i * self.grid_n() + j]
    }

    /// Quadrature of the density over the domain.
    pub fn total_mass(&self) -> f64 {
        let w = self.domain.weights();
        let n = self.grid_n();
        let rows: Vec<f64> = (0..n)
            .map(|i| {
                let row = &self.density[i * n..(i + 1) * n];
                let s: f64 = w.iter().zip(row).map(|(wj, d)| wj * d).sum();
                w[i] * s
            })
            .collect();
        pairwise_sum(&rows)
    }

    /// Marginal density of the buy-side spread at the nodes.
    pub fn marginal_plus(&self) -> Vec<f64> {
        let w = self.domain.weights();
        let n = self.grid_n();
        (0..n)
            .map(|i| (0..n).map(|j| w[j] * self.density[i * n + j]).sum())
            .collect()
    }

    /// Expected single-period reward under this policy for given moments.
    pub fn expected_reward(&self, model: &SpreadModel, moments: &Moments) -> f64 {
        let w = self.domain.weights();
        let n = self.grid_n();
        let rows: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    let r = expected_reward(model, self.nodes[i], self.nodes[j], moments);
                    s += w[i] * w[j] * self.density[i * n + j] * r;
                }
                s
            })
            .collect();
        pairwise_sum(&rows)
    }

    /// CSV with header `eps_plus,eps_minus,density`, row-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "eps_plus,eps_minus,density")?;
        let n = self.grid_n();
        for i in 0..n {
            for j in 0..n {
                writeln!(
                    out,
                    "{:?},{:?},{:?}",
                    self.nodes[i],
                    self.nodes[j],
                    self.density[i * n + j]
                )?;
            }
        }
        Ok(())
    }
}

/// Inverse-CDF sampler over grid cells. Trapezoid grids use the cells
/// between adjacent nodes with the corner-averaged mass; midpoint grids use
/// the cell around each node.
#[derive(Debug, Clone)]
pub struct PolicySampler {
    edges: Vec<f64>,
    cells_per_axis: usize,
    cdf: Vec<f64>,
}

impl PolicySampler {
    pub fn new(grid: &PolicyGrid) -> Result<Self> {
        let n = grid.grid_n();
        let edges = grid.domain.cell_edges();
        let masses = cell_masses(grid);
        let cells_per_axis = edges.len() - 1;
        debug_assert_eq!(masses.len(), cells_per_axis * cells_per_axis);
        let mut cdf = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for &m in &masses {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::DegeneratePolicy(format!("cell mass {m}")));
            }
            acc += m;
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::DegeneratePolicy(format!(
                "zero total cell mass on a {n}×{n} grid"
            )));
        }
        Ok(Self {
            edges,
            cells_per_axis,
            cdf,
        })
    }

    /// Mass of each cell, normalized to sum to one, row-major.
    pub fn cell_probabilities(&self) -> Vec<f64> {
        let total = *self.cdf.last().unwrap();
        let mut prev = 0.0;
        self.cdf
            .iter()
            .map(|&c| {
                let p = (c - prev) / total;
                prev = c;
                p
            })
            .collect()
    }

    pub fn cell_edges(&self) -> &[f64] {
        &self.edges
    }

    /// Index `(i, j)` of the cell containing a point.
    pub fn cell_of(&self, eps_plus: f64, eps_minus: f64) -> (usize, usize) {
        let locate = |e: f64| {
            let k = self.edges.partition_point(|&x| x <= e);
            k.clamp(1, self.cells_per_axis) - 1
        };
        (locate(eps_plus), locate(eps_minus))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let total = *self.cdf.last().unwrap();
        let u = rng.random::<f64>() * total;
        let k = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        let (i, j) = (k / self.cells_per_axis, k % self.cells_per_axis);
        let within = |c: usize, r: f64| self.edges[c] + r * (self.edges[c + 1] - self.edges[c]);
        let ep = within(i, rng.random::<f64>());
        let em = within(j, rng.random::<f64>());
        (ep, em)
    }
}

fn cell_masses(grid: &PolicyGrid) -> Vec<f64> {
    let n = grid.grid_n();
    let h = grid.domain.spacing();
    let a = h * h;
    match grid.domain.quadrature {
        Quadrature::Midpoint => grid.density.iter().map(|d| a * d).collect(),
        Quadrature::Trapezoid => {
            let mut out = Vec::with_capacity((n - 1) * (n - 1));
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    let corners = grid.density_at(i, j)
                        + grid.density_at(i + 1, j)
                        + grid.density_at(i, j + 1)
                        + grid.density_at(i + 1, j + 1);
                    out.push(0.25 * a * corners);
                }
            }
            out
        }
    }
}

/// One seeded draw of `(ε⁺, ε⁻)` from the policy.
pub fn sample_policy(grid: &PolicyGrid, seed: u64) -> Result<(f64, f64)> {
    let sampler = PolicySampler::new(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.sample(&mut rng))
}
