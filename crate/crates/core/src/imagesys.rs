//! Grayscale images as patterns: quantization, binary expansion, projection
//! onto the learned pattern set and SNR.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::math::log10;
use crate::model::{extract_subpattern, ClusterLayout, Dataset, SparseWeightMatrix};
use crate::recall::{peel, unsatisfied_clusters, RecallConfig, SatTolerance};
use crate::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagePattern {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl ImagePattern {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::DimensionMismatch {
                expected: width.saturating_mul(height),
                actual: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// `level = floor(pixel · Q / 256)`.
pub fn quantize(img: &ImagePattern, alphabet_size: u32) -> Result<Vec<u32>> {
    if !(2..=256).contains(&alphabet_size) {
        return Err(invalid("quantization needs 2 <= Q <= 256"));
    }
    Ok(img.pixels.iter().map(|&p| p as u32 * alphabet_size / 256).collect())
}

/// Pixel value at the bottom of each quantization level, the inverse of
/// [`quantize`] up to the floor.
pub fn dequantize(levels: &[u32], alphabet_size: u32) -> Result<Vec<u8>> {
    if !(2..=256).contains(&alphabet_size) {
        return Err(invalid("quantization needs 2 <= Q <= 256"));
    }
    levels
        .iter()
        .map(|&l| {
            if l >= alphabet_size {
                Err(Error::OutOfAlphabet {
                    value: l as u64,
                    max: alphabet_size as u64 - 1,
                })
            } else {
                Ok(((l * 256).div_ceil(alphabet_size)) as u8)
            }
        })
        .collect()
}

fn bits_per_symbol(alphabet_size: u32) -> Result<usize> {
    if alphabet_size < 2 || !alphabet_size.is_power_of_two() {
        return Err(invalid("binary expansion needs Q to be a power of two"));
    }
    Ok(alphabet_size.trailing_zeros() as usize)
}

/// Replace each entry by its `log₂ Q` bits, most significant first.
pub fn binary_expand(x: &[u32], alphabet_size: u32) -> Result<Vec<u32>> {
    let bits = bits_per_symbol(alphabet_size)?;
    let mut out = Vec::with_capacity(x.len() * bits);
    for &v in x {
        if v >= alphabet_size {
            return Err(Error::OutOfAlphabet {
                value: v as u64,
                max: alphabet_size as u64 - 1,
            });
        }
        out.extend((0..bits).rev().map(|b| (v >> b) & 1));
    }
    Ok(out)
}

/// Inverse of [`binary_expand`].
pub fn binary_collapse(b: &[u32], alphabet_size: u32) -> Result<Vec<u32>> {
    let bits = bits_per_symbol(alphabet_size)?;
    if !b.len().is_multiple_of(bits) {
        return Err(invalid("length is not a multiple of the bits per symbol"));
    }
    b.chunks(bits)
        .map(|chunk| {
            chunk.iter().try_fold(0u32, |acc, &bit| {
                if bit > 1 {
                    Err(Error::OutOfAlphabet { value: bit as u64, max: 1 })
                } else {
                    Ok((acc << 1) | bit)
                }
            })
        })
        .collect()
}

/// `10 log₁₀(‖reference‖² / ‖test - reference‖²)`, `+∞` when equal.
pub fn snr(reference: &[u32], test: &[u32]) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            actual: test.len(),
        });
    }
    let signal: f64 = reference.iter().map(|&v| (v as f64) * (v as f64)).sum();
    if signal == 0.0 {
        return Err(invalid("reference pattern is all zero"));
    }
    let noise: f64 = reference
        .iter()
        .zip(test)
        .map(|(&r, &t)| {
            let d = t as f64 - r as f64;
            d * d
        })
        .sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * log10(signal / noise))
}

/// Per-cluster tolerance: the `quantile` of `max_i |h_i|` over the clean
/// patterns, but never below `floor`.
pub fn calibrate_tolerance(
    weights: &[SparseWeightMatrix],
    layout: &ClusterLayout,
    dataset: &Dataset,
    quantile: f64,
    floor: f64,
) -> Result<SatTolerance> {
    if !(0.0..=1.0).contains(&quantile) {
        return Err(invalid("quantile must lie in [0, 1]"));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if weights.len() != layout.num_clusters() {
        return Err(Error::DimensionMismatch {
            expected: layout.num_clusters(),
            actual: weights.len(),
        });
    }
    let mut tols = vec![floor; weights.len()];
    for (c, w) in weights.iter().enumerate() {
        let mut peaks: Vec<f64> = dataset
            .patterns()
            .map(|p| {
                let sub: Vec<f64> = extract_subpattern(p, layout, c)?.iter().map(|&v| v as f64).collect();
                Ok(w.mul_vec(&sub)?.iter().fold(0.0, |a: f64, &h| a.max(libm::fabs(h))))
            })
            .collect::<Result<_>>()?;
        peaks.sort_by(f64::total_cmp);
        let idx = libm::ceil(quantile * peaks.len() as f64) as usize;
        let q = peaks[idx.clamp(1, peaks.len()) - 1];
        tols[c] = q.max(floor);
    }
    Ok(SatTolerance::PerCluster(tols))
}

/// Result of [`project_to_learned`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub pattern: Vec<u32>,
    /// Clusters still unsatisfied after peeling.
    pub residual_clusters: Vec<usize>,
    pub rounds: usize,
}

/// Move a binary pattern onto the learned set by peeling, treating its
/// deviation from the learned subspace as noise.
pub fn project_to_learned(
    x: &[u32],
    weights: &[SparseWeightMatrix],
    layout: &ClusterLayout,
    config: &RecallConfig,
) -> Result<Projection> {
    if let Some(&v) = x.iter().find(|&&v| v > 1) {
        return Err(Error::OutOfAlphabet { value: v as u64, max: 1 });
    }
    let out = peel(weights, layout, x, config, 2)?;
    let residual_clusters = unsatisfied_clusters(weights, layout, &out.state, config)?;
    Ok(Projection {
        pattern: out.state,
        residual_clusters,
        rounds: out.rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_examples() {
        let img = ImagePattern::new(3, 1, vec![255, 0, 128]).unwrap();
        assert_eq!(quantize(&img, 16).unwrap(), vec![15, 0, 8]);
        assert!(ImagePattern::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn dequantize_lands_in_level() {
        let img = ImagePattern::new(256, 1, (0..=255).collect()).unwrap();
        for q in [2, 3, 16, 100, 256] {
            let levels = quantize(&img, q).unwrap();
            let back = dequantize(&levels, q).unwrap();
            let again = quantize(&ImagePattern::new(256, 1, back).unwrap(), q).unwrap();
            assert_eq!(levels, again);
        }
    }

    #[test]
    fn binary_examples() {
        assert_eq!(binary_expand(&[9], 16).unwrap(), vec![1, 0, 0, 1]);
        assert_eq!(binary_expand(&[0], 16).unwrap(), vec![0; 4]);
        assert_eq!(binary_expand(&[0; 1024], 16).unwrap().len(), 4096);
        assert_eq!(binary_collapse(&[1, 0, 0, 1], 16).unwrap(), vec![9]);
        assert_eq!(binary_collapse(&[0; 8], 16).unwrap(), vec![0, 0]);
        assert!(binary_expand(&[1], 12).is_err());
        assert!(binary_expand(&[16], 16).is_err());
        assert!(binary_collapse(&[1, 0, 1], 16).is_err());
        assert!(binary_collapse(&[2, 0, 0, 0], 16).is_err());
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr(&[3, 4], &[3, 4]).unwrap(), f64::INFINITY);
        assert!((snr(&[3, 4], &[3, 3]).unwrap() - 13.979400086720377).abs() < 1e-12);
        assert!(snr(&[0, 0], &[1, 0]).is_err());
        let one = snr(&[10, 10], &[11, 10]).unwrap();
        let two = snr(&[10, 10], &[11, 11]).unwrap();
        assert!((one - two - 3.0103).abs() < 1e-4);
    }
}
