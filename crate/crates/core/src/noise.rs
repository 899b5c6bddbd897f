//! Symmetric geometric ("discrete Laplace") sampling, the geometric
//! mechanism, high-probability noise bounds, and labeled reproducible RNG
//! streams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("geometric parameter b must be positive and finite (got {0})")]
    BadParam(f64),
    #[error("epsilon must be positive (got {0})")]
    BadEpsilon(f64),
    #[error("sensitivity must be >= 1 (got {0})")]
    BadSensitivity(u64),
    #[error("whp bound requires c >= 1 (got {0})")]
    BadConstant(f64),
}

/// Parameter of the symmetric geometric distribution Geom(b), with pmf
/// ((e^b - 1)/(e^b + 1)) * e^{-|i| b}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomParam {
    b: f64,
}

impl GeomParam {
    pub fn new(b: f64) -> Result<Self, NoiseError> {
        if b <= 0.0 || !b.is_finite() {
            return Err(NoiseError::BadParam(b));
        }
        Ok(GeomParam { b })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Exact pmf at `i` (for tests against the closed form).
    pub fn pmf(&self, i: i64) -> f64 {
        let eb = self.b.exp();
        (eb - 1.0) / (eb + 1.0) * (-(i.abs() as f64) * self.b).exp()
    }
}

/// Label identifying one logical noise draw. Distinct labels map to
/// statistically independent streams, so per-node work can run in any
/// order (or concurrently) with bit-identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StreamLabel {
    pub round: u32,
    pub node: u32,
    pub channel: u8,
    /// Extra discriminator for algorithms that draw several times per
    /// (round, node, channel), e.g. the MWU ell-scan.
    pub aux: u32,
}

impl StreamLabel {
    pub fn new(round: u32, node: u32, channel: u8) -> Self {
        StreamLabel {
            round,
            node,
            channel,
            aux: 0,
        }
    }

    pub fn with_aux(mut self, aux: u32) -> Self {
        self.aux = aux;
        self
    }
}

/// Deterministic, labeled RNG stream: identical (seed, label) yields an
/// identical draw sequence.
pub struct RngStream {
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: StreamLabel) -> Self {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&seed.to_le_bytes());
        key[8..12].copy_from_slice(&label.round.to_le_bytes());
        key[12..16].copy_from_slice(&label.node.to_le_bytes());
        key[16] = label.channel;
        key[17..21].copy_from_slice(&label.aux.to_le_bytes());
        RngStream {
            rng: ChaCha12Rng::from_seed(key),
        }
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn gen_range_usize(&mut self, upper: usize) -> usize {
        self.rng.gen_range(0..upper)
    }
}

/// Draws X ~ Geom(b): zero with probability (e^b - 1)/(e^b + 1), otherwise
/// a uniform sign and a magnitude that is geometric with success
/// probability 1 - e^{-b} conditioned on being >= 1 (inverse CDF on a
/// 64-bit uniform; bias < 2^-53, documented and accepted).
pub fn sample_symmetric_geom(p: GeomParam, rng: &mut RngStream) -> i64 {
    let b = p.b();
    let eb = b.exp();
    let p_zero = (eb - 1.0) / (eb + 1.0);
    let u = rng.next_f64();
    if u < p_zero {
        return 0;
    }
    let negative = rng.next_u64() & 1 == 1;
    // Magnitude k >= 1 with P(k) = (1 - q) q^{k-1}, q = e^{-b}:
    // k = ceil(ln(1 - v) / ln(q)) for v uniform in [0, 1).
    let v = rng.next_f64();
    let k = ((1.0 - v).ln() / (-b)).ceil().max(1.0);
    let k = if k.is_finite() { k as i64 } else { i64::MAX };
    if negative {
        -k
    } else {
        k
    }
}

/// Controls whether sampled noise is real or forced to zero. Noiseless
/// runs realize the expectation-level behavior used by utility tests and
/// are NOT private; the budget ledger is still charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NoiseMode {
    Noisy,
    Noiseless,
}

impl NoiseMode {
    pub fn is_noiseless(self) -> bool {
        self == NoiseMode::Noiseless
    }

    /// One labeled draw from Geom(b), respecting the mode.
    pub fn draw(self, b: f64, seed: u64, label: StreamLabel) -> i64 {
        match self {
            NoiseMode::Noiseless => 0,
            NoiseMode::Noisy => {
                let p = GeomParam::new(b).expect("noise parameter must be positive");
                sample_symmetric_geom(p, &mut RngStream::new(seed, label))
            }
        }
    }
}

/// Geometric mechanism: value + Geom(epsilon / sensitivity). epsilon-edge
/// DP for a function with global sensitivity `sensitivity`.
pub fn geometric_mechanism(
    value: i64,
    sensitivity: u64,
    epsilon: f64,
    rng: &mut RngStream,
) -> Result<i64, NoiseError> {
    if sensitivity < 1 {
        return Err(NoiseError::BadSensitivity(sensitivity));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(NoiseError::BadEpsilon(epsilon));
    }
    let p = GeomParam::new(epsilon / sensitivity as f64)?;
    Ok(value + sample_symmetric_geom(p, rng))
}

/// High-probability bound on |X| for X ~ Geom(b): ceil(c ln n / b), which
/// fails with probability at most n^{-c}.
pub fn whp_noise_bound(p: GeomParam, n: usize, c: f64) -> Result<i64, NoiseError> {
    if c < 1.0 {
        return Err(NoiseError::BadConstant(c));
    }
    assert!(n >= 2, "whp bound needs n >= 2");
    Ok((c * (n as f64).ln() / p.b()).ceil() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_closed_form_ln2() {
        let p = GeomParam::new(std::f64::consts::LN_2).unwrap();
        assert!((p.pmf(0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.pmf(1) - 1.0 / 6.0).abs() < 1e-12);
        assert!((p.pmf(-1) - 1.0 / 6.0).abs() < 1e-12);
        assert!((p.pmf(2) - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn pmf_symmetric_and_normalized() {
        for b in [0.1, 0.5, 2.0] {
            let p = GeomParam::new(b).unwrap();
            let mut total = p.pmf(0);
            for i in 1..2000 {
                assert_eq!(p.pmf(i), p.pmf(-i));
                total += 2.0 * p.pmf(i);
            }
            assert!((total - 1.0).abs() < 1e-9, "b={b}: total={total}");
        }
    }

    #[test]
    fn determinism_per_label() {
        let label = StreamLabel::new(3, 7, 1);
        let p = GeomParam::new(0.5).unwrap();
        let a: Vec<i64> = {
            let mut rng = RngStream::new(42, label);
            (0..50).map(|_| sample_symmetric_geom(p, &mut rng)).collect()
        };
        let b: Vec<i64> = {
            let mut rng = RngStream::new(42, label);
            (0..50).map(|_| sample_symmetric_geom(p, &mut rng)).collect()
        };
        assert_eq!(a, b);
        let c: Vec<i64> = {
            let mut rng = RngStream::new(42, label.with_aux(1));
            (0..50).map(|_| sample_symmetric_geom(p, &mut rng)).collect()
        };
        assert_ne!(a, c);
    }

    #[test]
    fn mechanism_noiseless_limit_and_domain_errors() {
        assert_eq!(NoiseMode::Noiseless.draw(1.0, 0, StreamLabel::new(0, 0, 0)), 0);
        let mut rng = RngStream::new(0, StreamLabel::new(0, 0, 0));
        assert!(matches!(
            geometric_mechanism(1, 0, 1.0, &mut rng),
            Err(NoiseError::BadSensitivity(0))
        ));
        assert!(matches!(
            geometric_mechanism(1, 1, 0.0, &mut rng),
            Err(NoiseError::BadEpsilon(_))
        ));
        assert!(GeomParam::new(-1.0).is_err());
        assert!(GeomParam::new(f64::NAN).is_err());
    }

    #[test]
    fn mechanism_empirical_mean() {
        // Geom noise has mean 0: the empirical mean of value + noise at
        // value = 5 stays within 3 sigma of 5.
        let n = 100_000;
        let b: f64 = 0.5; // variance 2 e^{-b} / (1 - e^{-b})^2
        let var = 2.0 * (-b).exp() / (1.0 - (-b).exp()).powi(2);
        let mut sum = 0i64;
        for i in 0..n {
            let mut rng = RngStream::new(9, StreamLabel::new(0, i as u32, 0));
            sum += geometric_mechanism(5, 1, b, &mut rng).unwrap();
        }
        let mean = sum as f64 / n as f64;
        let sigma = (var / n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * sigma, "mean={mean}");
    }

    #[test]
    fn whp_bound_examples() {
        let p1 = GeomParam::new(1.0).unwrap();
        assert_eq!(whp_noise_bound(p1, 55, 1.0).unwrap(), 5);
        let p2 = GeomParam::new(2.0).unwrap();
        assert_eq!(whp_noise_bound(p2, 55, 1.0).unwrap(), 3);
        assert!(whp_noise_bound(p1, 55, 0.0).is_err());
    }
}
