use alloc::vec;
use alloc::vec::Vec;

use super::poly_eval;
use crate::error::invalid;
use crate::Result;

/// Density-evolution parameters. Polynomial coefficients are indexed by
/// power of `z`: `λ̃(z) = Σ_k edge_lambda[k] z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DEParams {
    pub edge_lambda: Vec<f64>,
    pub edge_rho: Vec<f64>,
    pub p_c: f64,
    pub p_e: f64,
}

fn check_distribution(coeffs: &[f64], name: &str) -> Result<()> {
    let total: f64 = coeffs.iter().sum();
    if coeffs.is_empty() || coeffs.iter().any(|&c| !(c >= 0.0)) || !(libm::fabs(total - 1.0) <= 1e-9) {
        return Err(invalid(alloc::format!(
            "{name} coefficients must be nonnegative and sum to 1"
        )));
    }
    Ok(())
}

fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(alloc::format!("{name} must lie in [0, 1]")));
    }
    Ok(())
}

impl DEParams {
    pub fn new(edge_lambda: Vec<f64>, edge_rho: Vec<f64>, p_c: f64, p_e: f64) -> Result<Self> {
        let params = Self {
            edge_lambda,
            edge_rho,
            p_c,
            p_e,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_distribution(&self.edge_lambda, "lambda")?;
        check_distribution(&self.edge_rho, "rho")?;
        check_probability(self.p_c, "p_c")?;
        check_probability(self.p_e, "p_e")
    }

    fn update(&self, z: f64, p_e: f64) -> f64 {
        p_e * poly_eval(&self.edge_lambda, 1.0 - self.p_c * poly_eval(&self.edge_rho, 1.0 - z))
    }
}

/// `z' = p_e λ̃(1 - P_c ρ̃(1 - z))`.
pub fn de_step(z: f64, params: &DEParams) -> f64 {
    params.update(z, params.p_e)
}

/// Below this level the recursion is considered to have reached zero.
pub const DE_SUCCESS_LEVEL: f64 = 1e-9;

/// `z(0) = p_e, z(1), …`, stopping once `|Δz| < 1e-12` or after `max_steps`
/// steps.
pub fn de_trajectory(params: &DEParams, max_steps: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if max_steps == 0 {
        return Err(invalid("max_steps must be at least 1"));
    }
    let mut z = vec![params.p_e];
    for _ in 0..max_steps {
        let prev = z[z.len() - 1];
        let next = de_step(prev, params);
        z.push(next);
        if libm::fabs(next - prev) < 1e-12 {
            break;
        }
    }
    Ok(z)
}

/// Final value of [`de_trajectory`].
pub fn de_limit(params: &DEParams, max_steps: usize) -> Result<f64> {
    Ok(*de_trajectory(params, max_steps)?.last().unwrap_or(&params.p_e))
}

const GRID: usize = 10_000;

/// Whether `p_e λ̃(1 - P_c ρ̃(1 - z)) < z` on `(0, p_e)`: checked on a
/// uniform grid, then refined by ternary search around the grid point with
/// the smallest margin.
fn recovers(params: &DEParams, p_e: f64) -> bool {
    if p_e <= 0.0 {
        return true;
    }
    let margin = |z: f64| z - params.update(z, p_e);
    let step = p_e / GRID as f64;
    let mut worst = (f64::INFINITY, 0usize);
    for k in 1..GRID {
        let m = margin(k as f64 * step);
        if m <= 0.0 {
            return false;
        }
        if m < worst.0 {
            worst = (m, k);
        }
    }
    let (mut lo, mut hi) = ((worst.1 - 1) as f64 * step, (worst.1 + 1) as f64 * step);
    lo = lo.max(step * 1e-6);
    for _ in 0..100 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if margin(a) < margin(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    margin(0.5 * (lo + hi)) > 0.0
}

/// Largest `p_e` for which density evolution drives the error probability to
/// zero, found by bisection on `[0, 1]` to absolute tolerance `tol`.
pub fn de_threshold(edge_lambda: &[f64], edge_rho: &[f64], p_c: f64, tol: f64) -> Result<f64> {
    let params = DEParams::new(edge_lambda.to_vec(), edge_rho.to_vec(), p_c, 0.0)?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if recovers(&params, 1.0) {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if recovers(&params, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
