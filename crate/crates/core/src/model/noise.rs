use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::invalid;
use crate::{rng, Result};

/// Additive `{-1, 0, +1}` noise: each entry is hit with probability `p_e`,
/// the sign being uniform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    p_e: f64,
    seed: u64,
}

impl NoiseSpec {
    pub fn new(p_e: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_e) {
            return Err(invalid("noise probability must lie in [0, 1]"));
        }
        Ok(Self { p_e, seed })
    }

    pub fn p_e(&self) -> f64 {
        self.p_e
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Corrupt `x` and clamp into `[0, Q-1]`.
///
/// Returns the noisy pattern and the noise drawn before clamping, so a `+1`
/// on an entry already at `Q-1` still shows up in the noise vector.
pub fn apply_noise(x: &[u32], spec: NoiseSpec, alphabet_size: u32) -> (Vec<u32>, Vec<i8>) {
    let mut rng = rng::from_seed(spec.seed);
    apply_noise_with(x, spec.p_e, alphabet_size, &mut rng)
}

pub(crate) fn apply_noise_with(
    x: &[u32],
    p_e: f64,
    alphabet_size: u32,
    rng: &mut rng::Rng,
) -> (Vec<u32>, Vec<i8>) {
    let top = alphabet_size as i64 - 1;
    let half = p_e / 2.0;
    let mut noisy = Vec::with_capacity(x.len());
    let mut noise = Vec::with_capacity(x.len());
    for &v in x {
        let u: f64 = rng.gen();
        let e: i8 = if u < half {
            -1
        } else if u < p_e {
            1
        } else {
            0
        };
        noisy.push((v as i64 + e as i64).clamp(0, top) as u32);
        noise.push(e);
    }
    (noisy, noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_noise_is_identity() {
        let x = vec![0, 3, 7, 15];
        let (noisy, e) = apply_noise(&x, NoiseSpec::new(0.0, 9).unwrap(), 16);
        assert_eq!(noisy, x);
        assert!(e.iter().all(|&v| v == 0));
    }

    #[test]
    fn clamps_but_records_raw_noise() {
        let x = vec![15u32; 64];
        let (noisy, e) = apply_noise(&x, NoiseSpec::new(1.0, 1).unwrap(), 16);
        for (v, n) in noisy.iter().zip(&e) {
            match n {
                1 => assert_eq!(*v, 15),
                -1 => assert_eq!(*v, 14),
                _ => unreachable!("p_e = 1 hits every entry"),
            }
        }
        assert!(e.contains(&1) && e.contains(&-1));
    }

    #[test]
    fn additive_step_down() {
        let x = vec![5u32; 200];
        let (noisy, e) = apply_noise(&x, NoiseSpec::new(0.5, 2).unwrap(), 16);
        for ((v, n), orig) in noisy.iter().zip(&e).zip(&x) {
            assert_eq!(*v as i64, *orig as i64 + *n as i64);
        }
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(NoiseSpec::new(1.5, 0).is_err());
        assert!(NoiseSpec::new(-0.1, 0).is_err());
    }

    #[test]
    fn corruption_fraction_is_binomial() {
        let n = 100_000usize;
        let x = vec![8u32; n];
        let (_, e) = apply_noise(&x, NoiseSpec::new(0.2, 77).unwrap(), 16);
        let hits = e.iter().filter(|&&v| v != 0).count() as f64;
        let sd = libm::sqrt(n as f64 * 0.2 * 0.8);
        assert!((hits - 0.2 * n as f64).abs() <= 3.0 * sd, "hits {hits}");
    }
}
