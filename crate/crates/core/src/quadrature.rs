//! Adaptive Gauss–Kronrod (7, 15) quadrature for vector-valued integrands
//! over the whole real line, for integrands that decay in both directions.
//!
//! The working interval starts at `initial` and grows by panels of width
//! `panel_width` until the newest panel at each end is negligible. Panels
//! are then bisected, largest error first, until the summed error estimate
//! drops below the tolerance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute tolerance on the sup norm of the vector result.
    pub tol: f64,
    pub initial: (f64, f64),
    pub panel_width: f64,
    /// The interval may not grow beyond `[-max_extent, max_extent]`.
    pub max_extent: f64,
    /// Budget on integrand evaluations.
    pub max_evals: usize,
}

impl QuadOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            initial: (-6.0, 6.0),
            panel_width: 2.0,
            max_extent: 80.0,
            max_evals: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadReport {
    pub nodes: usize,
    pub est_error: f64,
    pub interval: [f64; 2],
    /// Panel endpoints in increasing order.
    pub splits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not reach the tolerance within budget (error estimate {:e}, {} nodes)", .0.est_error, .0.nodes)]
    Budget(QuadReport),
    #[error("integrand is not finite at u = {0}")]
    NonFinite(f64),
    #[error("integrand does not decay inside [-{0}, {0}]")]
    NoDecay(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadOutcome {
    pub value: Vec<f64>,
    pub report: QuadReport,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
    magnitude: f64,
}

fn panel<F>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let nodes: Vec<f64> = (0..15)
        .map(|i| {
            if i < 7 {
                c - h * XGK[i]
            } else if i == 7 {
                c
            } else {
                c + h * XGK[14 - i]
            }
        })
        .collect();
    let values: Vec<Vec<f64>> = nodes.par_iter().map(|&u| f(u)).collect();
    for (u, v) in nodes.iter().zip(&values) {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(QuadError::NonFinite(*u));
        }
    }
    let len = values[0].len();
    let mut kron = vec![0.0; len];
    let mut gauss = vec![0.0; len];
    let mut magnitude: f64 = 0.0;
    for (i, v) in values.iter().enumerate() {
        let k = if i < 8 { i } else { 14 - i };
        let wg = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        for (j, x) in v.iter().enumerate() {
            kron[j] += WGK[k] * x;
            gauss[j] += wg * x;
            magnitude = magnitude.max(x.abs());
        }
    }
    let mut error: f64 = 0.0;
    for j in 0..len {
        kron[j] *= h;
        gauss[j] *= h;
        error = error.max((kron[j] - gauss[j]).abs());
    }
    Ok(Panel {
        a,
        b,
        value: kron,
        error,
        magnitude: magnitude * (b - a),
    })
}

/// `∫_{-∞}^{∞} f(u) du` componentwise.
pub fn integrate_line<F>(f: F, opts: &QuadOptions) -> Result<QuadOutcome, QuadError>
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    let w = opts.panel_width;
    let (mut lo, mut hi) = opts.initial;
    let mut panels = Vec::new();
    let mut u = lo;
    while u < hi - 1e-12 {
        let b = (u + w).min(hi);
        panels.push(panel(&f, u, b)?);
        u = b;
    }
    let negligible = opts.tol / 10.0;
    loop {
        if lo - w < -opts.max_extent {
            return Err(QuadError::NoDecay(opts.max_extent));
        }
        let p = panel(&f, lo - w, lo)?;
        lo -= w;
        let small = p.magnitude < negligible;
        panels.push(p);
        if small {
            break;
        }
    }
    loop {
        if hi + w > opts.max_extent {
            return Err(QuadError::NoDecay(opts.max_extent));
        }
        let p = panel(&f, hi, hi + w)?;
        hi += w;
        let small = p.magnitude < negligible;
        panels.push(p);
        if small {
            break;
        }
    }
    let report = |panels: &[Panel]| {
        let mut splits: Vec<f64> = panels.iter().map(|p| p.a).collect();
        splits.push(hi);
        splits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        QuadReport {
            nodes: 15 * panels.len(),
            est_error: panels.iter().map(|p| p.error).sum(),
            interval: [lo, hi],
            splits,
        }
    };
    loop {
        let total: f64 = panels.iter().map(|p| p.error).sum();
        if total <= opts.tol {
            break;
        }
        if 15 * (panels.len() + 1) > opts.max_evals {
            return Err(QuadError::Budget(report(&panels)));
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].error.partial_cmp(&panels[j].error).unwrap())
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(panel(&f, p.a, mid)?);
        panels.push(panel(&f, mid, p.b)?);
    }
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
    let len = panels[0].value.len();
    let mut value = vec![0.0; len];
    for p in &panels {
        for (v, x) in value.iter_mut().zip(&p.value) {
            *v += x;
        }
    }
    Ok(QuadOutcome {
        value,
        report: report(&panels),
    })
}
