//! Precomputed per-node coefficients of the log-integrand.
//!
//! `log M` is affine in `(α⁺, α⁻, β⁺, β⁻, α⁺α⁻)` at every node, so the table
//! stores those coefficients once and each quadrature is a single fused pass.

use crate::error::{Error, Result};
use crate::stats::pairwise_sum;

use super::domain::SpreadDomain;
use super::model::{coefficients, Moments, SpreadModel};

#[derive(Debug, Clone)]
pub(crate) struct IntegrandTable {
    n: usize,
    nodes: Vec<f64>,
    log_w: Vec<f64>,
    log_w_coarse: Option<Vec<f64>>,
    base: Vec<f64>,
    c_ap: Vec<f64>,
    c_am: Vec<f64>,
    c_bp: Vec<f64>,
    c_bm: Vec<f64>,
    c_x: Vec<f64>,
}

impl IntegrandTable {
    pub(crate) fn new(model: &SpreadModel, domain: &SpreadDomain) -> Result<Self> {
        model.validate(domain.eps_max)?;
        let n = domain.grid_n;
        let nodes = domain.nodes();
        let g = model.gamma;
        let eta = model.eta;
        let size = n * n;
        let mut t = Self {
            n,
            log_w: domain.weights().iter().map(|w| w.ln()).collect(),
            log_w_coarse: domain
                .coarse_weights()
                .map(|w| w.iter().map(|w| w.ln()).collect()),
            base: Vec::with_capacity(size),
            c_ap: Vec::with_capacity(size),
            c_am: Vec::with_capacity(size),
            c_bp: Vec::with_capacity(size),
            c_bm: Vec::with_capacity(size),
            c_x: Vec::with_capacity(size),
            nodes,
        };
        for i in 0..n {
            let ep = t.nodes[i];
            let hp = model.h_plus.eval(ep);
            let fp = model.f_plus.eval(ep);
            for j in 0..n {
                let em = t.nodes[j];
                let hm = model.h_minus.eval(em);
                let fm = model.f_minus.eval(em);
                let co = coefficients(model, ep, em);
                let base = ((model.s + ep) * fp - (model.s - em) * fm - eta * co.c * co.c) / g;
                if !base.is_finite() {
                    return Err(Error::IntegrandOverflow {
                        eps_plus: ep,
                        eps_minus: em,
                    });
                }
                t.base.push(base);
                t.c_ap.push((co.a - 2.0 * eta * co.c * hp) / g);
                t.c_am.push(-(co.b - 2.0 * eta * co.c * hm) / g);
                t.c_bp.push(-eta * hp * hp / g);
                t.c_bm.push(-eta * hm * hm / g);
                t.c_x.push(2.0 * eta * hp * hm / g);
            }
        }
        Ok(t)
    }

    pub(crate) fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// No moment enters the exponent anywhere on the grid.
    pub(crate) fn is_moment_free(&self) -> bool {
        [&self.c_ap, &self.c_am, &self.c_bp, &self.c_bm, &self.c_x]
            .iter()
            .all(|c| c.iter().all(|&v| v == 0.0))
    }

    #[inline]
    fn exponent(&self, k: usize, m: &Moments) -> f64 {
        self.base[k]
            + self.c_ap[k] * m.plus.alpha
            + self.c_am[k] * m.minus.alpha
            + self.c_bp[k] * m.plus.beta
            + self.c_bm[k] * m.minus.beta
            + self.c_x[k] * (m.plus.alpha * m.minus.alpha)
    }

    fn overflow(&self, k: usize) -> Error {
        Error::IntegrandOverflow {
            eps_plus: self.nodes[k / self.n],
            eps_minus: self.nodes[k % self.n],
        }
    }

    /// `log M` at every node, row-major with the buy-side spread as row.
    pub(crate) fn log_m_grid(&self, m: &Moments) -> Result<Vec<f64>> {
        (0..self.n * self.n)
            .map(|k| {
                let v = self.exponent(k, m);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(self.overflow(k))
                }
            })
            .collect()
    }

    /// Log of the quadrature of `M` over the domain.
    pub(crate) fn log_mass(&self, m: &Moments) -> Result<f64> {
        self.log_mass_with(&self.log_w, m)
    }

    /// Same quadrature on the nested grid of every other node, when it exists.
    pub(crate) fn log_mass_coarse(&self, m: &Moments) -> Option<Result<f64>> {
        self.log_w_coarse
            .as_ref()
            .map(|lw| self.log_mass_with(lw, m))
    }

    fn log_mass_with(&self, log_w: &[f64], m: &Moments) -> Result<f64> {
        let n = self.n;
        let mut max = f64::NEG_INFINITY;
        for i in 0..n {
            if log_w[i] == f64::NEG_INFINITY {
                continue;
            }
            for j in 0..n {
                if log_w[j] == f64::NEG_INFINITY {
                    continue;
                }
                let k = i * n + j;
                let e = self.exponent(k, m);
                if !e.is_finite() {
                    return Err(self.overflow(k));
                }
                max = max.max(log_w[i] + log_w[j] + e);
            }
        }
        // Sequential within rows, pairwise across rows.
        let rows: Vec<f64> = (0..n)
            .map(|i| {
                if log_w[i] == f64::NEG_INFINITY {
                    return 0.0;
                }
                let mut s = 0.0;
                for j in 0..n {
                    if log_w[j] != f64::NEG_INFINITY {
                        s += (log_w[i] + log_w[j] + self.exponent(i * n + j, m) - max).exp();
                    }
                }
                s
            })
            .collect();
        let total = pairwise_sum(&rows);
        let out = max + total.ln();
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::QuadratureNonFinite)
        }
    }
}
