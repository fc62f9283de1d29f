use rayon::prelude::*;
use serde::Serialize;

use super::engine::run;
use super::Scenario;
use crate::analysis::{estimate_theta_bounds, sync_error_bound};
use crate::signals::Disturbance;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub k: f64,
    pub d: f64,
    /// `sup |e|` over the last fifth of the horizon.
    pub steady_abs_e: Option<f64>,
    pub bound: f64,
    pub connected: Option<bool>,
    pub connection_time: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub ks: Vec<f64>,
    pub ds: Vec<f64>,
    /// Row-major over `ks`, then `ds`.
    pub cells: Vec<SweepCell>,
    /// Per `k`: whether steady `|e|` is nondecreasing along increasing `|d|`.
    pub monotone_in_d: Vec<bool>,
}

impl SweepResult {
    pub fn cell(&self, ik: usize, id: usize) -> &SweepCell {
        &self.cells[ik * self.ds.len() + id]
    }

    pub fn csv_header() -> &'static str {
        "k,d,steady_abs_e,bound,connected,connection_time,error"
    }

    pub fn to_csv_string(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
        let mut out = String::from(Self::csv_header());
        out.push('\n');
        for c in &self.cells {
            out += &format!(
                "{:?},{:?},{},{:?},{},{},{}\n",
                c.k,
                c.d,
                opt(c.steady_abs_e),
                c.bound,
                c.connected.map_or(String::new(), |b| b.to_string()),
                opt(c.connection_time),
                c.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            );
        }
        out
    }
}

/// One full run per `(k, d)` cell with a constant offset `d`. Cells run in
/// parallel; a failing cell records its error and the sweep continues.
pub fn sweep(base: &Scenario, ks: &[f64], ds: &[f64]) -> Result<SweepResult> {
    if ks.is_empty() || ds.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let theta = estimate_theta_bounds(&base.params, &base.load, base.sim.horizon)?;
    let grid: Vec<(f64, f64)> = ks.iter().flat_map(|&k| ds.iter().map(move |&d| (k, d))).collect();
    let cells: Vec<SweepCell> = grid
        .par_iter()
        .map(|&(k, d)| {
            let mut sc = base.clone();
            sc.params.k = k;
            sc.disturbance = Disturbance::Constant { amplitude: d };
            let bound = sync_error_bound(&sc.params, d.abs(), theta.delta_theta, theta.delta_theta_dot);
            match run(&sc) {
                Ok(tr) => SweepCell {
                    k,
                    d,
                    steady_abs_e: tr.tail_sup_abs_e(),
                    bound,
                    connected: Some(tr.connection().is_some()),
                    connection_time: tr.connection_time(),
                    error: None,
                },
                Err(e) => SweepCell {
                    k,
                    d,
                    steady_abs_e: None,
                    bound,
                    connected: None,
                    connection_time: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by(|&a, &b| ds[a].abs().total_cmp(&ds[b].abs()));
    let monotone_in_d = (0..ks.len())
        .map(|ik| {
            let col: Vec<Option<f64>> = order.iter().map(|&id| cells[ik * ds.len() + id].steady_abs_e).collect();
            col.windows(2).all(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => b >= a * (1.0 - 1e-9),
                _ => false,
            })
        })
        .collect();
    Ok(SweepResult { ks: ks.to_vec(), ds: ds.to_vec(), cells, monotone_in_d })
}
