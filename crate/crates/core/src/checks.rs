//! Runtime invariant suite: each row evaluates one identity on freshly
//! computed data and compares it with a threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bvp::{solve_signed, Nonlinearity, Sign, SolveConfig};
use crate::eigen::{compute_lambda1, random_start};
use crate::energy::{
    eval_i, eval_jtilde, fucik_functional, phi_functional, residual_norm, shifted_functional, FucikParams, Functional,
    ShiftParam,
};
use crate::error::Result;
use crate::grid::{negative_part, Domain, Exponent, Field};
use crate::minimax::{mountain_pass_c, MinimaxConfig};
use crate::sphere::{normalize, rayleigh, sign_path, sign_path_allowance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckRow {
    fn new(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value.is_finite() && value <= threshold,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub p: f64,
    pub nodes: usize,
    pub seed: u64,
    pub samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            nodes: 50,
            seed: 0,
            samples: 8,
        }
    }
}

fn random_field(rng: &mut ChaCha8Rng, d: Domain<f64>, amp: f64) -> Result<Field<f64>> {
    Field::new(d, (0..d.n_interior()).map(|_| rng.gen_range(-amp..amp)).collect())
}

/// Worst relative mismatch between central differences and gradients.
fn gradient_mismatch<F: Functional<f64>>(f: &F, rng: &mut ChaCha8Rng, d: Domain<f64>, samples: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = random_field(rng, d, 2.0)?;
        let v = random_field(rng, d, 1.0)?;
        let delta = 1e-6;
        let fd = (f.value(&u.plus_scaled(delta, &v)) - f.value(&u.plus_scaled(-delta, &v))) / (2.0 * delta);
        let an = f.gradient(&u).dot(&v);
        worst = worst.max((fd - an).abs() / an.abs().max(fd.abs()).max(1e-8));
    }
    Ok(worst)
}

/// Runs every row; failures are reported in the rows, errors abort.
pub fn run_checks(cfg: &CheckConfig) -> Result<Vec<CheckRow>> {
    let dom = Domain::unit(cfg.nodes)?;
    let p = Exponent::new(cfg.p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fd_tol = if cfg.p == 2.0 { 1e-5 } else { 1e-3 };
    let mut rows = vec![];

    let ab = FucikParams::new(7.0, 3.0)?;
    rows.push(CheckRow::new(
        "gradient: Fucik functional",
        gradient_mismatch(&fucik_functional(ab, p), &mut rng, dom, cfg.samples)?,
        fd_tol,
    ));
    rows.push(CheckRow::new(
        "gradient: shifted functional",
        gradient_mismatch(
            &shifted_functional(ShiftParam::new(5.0)?, p),
            &mut rng,
            dom,
            cfg.samples,
        )?,
        fd_tol,
    ));
    let f = Nonlinearity::model(FucikParams::new(45.0, 40.0)?, FucikParams::new(5.0, 3.0)?, p, 0.5, 2.0)?;
    rows.push(CheckRow::new(
        "gradient: asymptotically Fucik functional",
        gradient_mismatch(&phi_functional(&f), &mut rng, dom, cfg.samples)?,
        fd_tol,
    ));

    let mut homog = 0.0f64;
    let mut rayl = 0.0f64;
    let mut restriction = 0.0f64;
    for _ in 0..cfg.samples {
        let u = random_field(&mut rng, dom, 1.0)?;
        let t = rng.gen_range(0.1..10.0);
        let base = eval_i(&u, ab, &p);
        homog = homog
            .max((eval_i(&u.scaled(t), ab, &p) - t.powf(cfg.p) * base).abs() / base.abs().max(1e-12) / t.powf(cfg.p));
        let s = ShiftParam::new(4.0)?;
        let r = rayleigh(&u, s, &p);
        rayl = rayl.max((rayleigh(&u.scaled(t), s, &p) - r).abs() / r.abs());
        let w = normalize(&u, &p)?;
        let (b, gap) = (rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0));
        let lhs = eval_i(w.field(), FucikParams::new(b + gap, b)?, &p);
        let rhs = eval_jtilde(w.field(), ShiftParam::new(gap)?, &p)? - b;
        restriction = restriction.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    rows.push(CheckRow::new("homogeneity of degree p", homog, 1e-10));
    rows.push(CheckRow::new("Rayleigh quotient scale invariance", rayl, 1e-10));
    rows.push(CheckRow::new(
        "restriction of I(b + s, b) to the sphere",
        restriction,
        1e-12,
    ));

    let eig = compute_lambda1(&dom, &p, 1e-9)?;
    let mut identity = 0.0f64;
    for _ in 0..cfg.samples {
        let b = rng.gen_range(0.0..100.0);
        let ab = FucikParams::new(eig.lambda, b)?;
        identity = identity.max(eval_i(eig.phi.field(), ab, &p).abs() / eig.lambda);
        identity = identity.max(residual_norm(&fucik_functional(ab, p).gradient(eig.phi.field())) / eig.lambda);
    }
    rows.push(CheckRow::new(
        "first eigenfunction annihilates I(lambda1, b)",
        identity,
        1e-8,
    ));

    let mut lower = 0.0f64;
    let zero = ShiftParam::new(0.0)?;
    for k in 0..cfg.samples as u64 {
        let w = random_start(&dom, &p, 6, cfg.seed.wrapping_add(k))?;
        lower = lower.max(eig.lambda - w.jtilde(zero));
    }
    rows.push(CheckRow::new(
        "lambda1 bounds the Rayleigh quotient below",
        lower,
        1e-9 * eig.lambda,
    ));

    let s = ShiftParam::new(10.0)?;
    let mp = mountain_pass_c(s, &eig, &MinimaxConfig::default())?;
    let path = sign_path(&mp.argmax_bead, 20)?;
    let spread = path.values(s).iter().map(|v| (v - mp.c).abs()).fold(0.0, f64::max);
    let allowance = sign_path_allowance(&mp.argmax_bead, s, mp.c, 20);
    rows.push(CheckRow::new(
        "value constant along the sign-collapsing path",
        spread,
        allowance,
    ));

    let (lo, hi) = (0.5 * eig.lambda, 2.0 * eig.lambda);
    let g = Nonlinearity::model(FucikParams::new(lo, lo)?, FucikParams::new(hi, hi)?, p, 0.5, 2.0)?;
    let solve = SolveConfig::<f64> {
        seed: cfg.seed,
        ..SolveConfig::default()
    };
    let purity = match solve_signed(&g, Sign::Positive, &eig, &solve)?.critical {
        Some(c) => negative_part(&c.u).max_abs() / c.u.max_abs(),
        None => f64::INFINITY,
    };
    rows.push(CheckRow::new("sign purity of the positive solution", purity, 1e-8));
    Ok(rows)
}

/// Fixed-width table, one row per check.
pub fn render_table(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>12.3e}  <= {:>9.1e}  {}\n",
            r.name,
            r.value,
            r.threshold,
            if r.passed { "PASS" } else { "FAIL" },
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_at_p2() {
        let rows = run_checks(&CheckConfig {
            nodes: 30,
            seed: 7,
            ..CheckConfig::default()
        })
        .unwrap();
        let table = render_table(&rows);
        assert!(rows.iter().all(|r| r.passed), "{table}");
    }

    #[test]
    fn nan_never_passes() {
        assert!(!CheckRow::new("x", f64::NAN, 1.0).passed);
    }
}
