use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::energy::Functional;
use crate::grid::{Domain, Field};

pub fn random_field(rng: &mut ChaCha8Rng, d: Domain<f64>, amp: f64) -> Field<f64> {
    let v = (0..d.n_interior()).map(|_| rng.gen_range(-amp..amp)).collect();
    Field::new(d, v).unwrap()
}

/// Random combination of the first few sine modes.
pub fn smooth_random_field(rng: &mut ChaCha8Rng, d: Domain<f64>) -> Field<f64> {
    let coef: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field::interpolate(d, |x| {
        coef.iter()
            .enumerate()
            .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * x).sin())
            .sum()
    })
    .unwrap()
}

/// Relative mismatch between a central difference and the directional
/// derivative from the gradient.
pub fn fd_check<F: Functional<f64> + ?Sized>(f: &F, u: &Field<f64>, v: &Field<f64>, delta: f64) -> f64 {
    let fd = (f.value(&u.plus_scaled(delta, v)) - f.value(&u.plus_scaled(-delta, v))) / (2.0 * delta);
    let an = f.gradient(u).dot(v);
    (fd - an).abs() / an.abs().max(fd.abs()).max(1e-8)
}
