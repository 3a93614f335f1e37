//! The classical statistical layer: probabilities, signs and the real
//! classical wave function `q_τ = s_τ √p_τ`, evolved by rotations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{apply_dense, split_with_tolerance, EvolutionGenerator, Method, EXACT_DIM_LIMIT};
use crate::sparse::SparseMatrix;

/// Normalization tolerance on `Σ q²` and `Σ p`.
pub const NORM_TOL: f64 = 1e-9;

/// Default `p_τ` below which a sign flip is considered legitimate.
pub const JUMP_THRESHOLD: f64 = 1e-6;

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Real, unit-norm amplitude vector over classical states.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalWaveFunction {
    q: Vec<f64>,
}

impl ClassicalWaveFunction {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        check_finite(&q)?;
        let norm_sq: f64 = q.iter().map(|x| x * x).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { q })
    }

    /// Scales an arbitrary nonzero vector to unit norm.
    pub fn normalized(mut q: Vec<f64>) -> Result<Self> {
        check_finite(&q)?;
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        q.iter_mut().for_each(|x| *x /= n);
        Self::new(q)
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, n: dim });
        }
        let mut q = vec![0.0; dim];
        q[index] = 1.0;
        Ok(Self { q })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.q
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.q.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> ProbabilityDistribution {
        ProbabilityDistribution { p: self.q.iter().map(|x| x * x).collect() }
    }

    pub fn signs(&self) -> SignVector {
        SignVector { s: self.q.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect() }
    }

    /// `(p, s)` with `p_τ = q_τ²` and `s_τ = sign q_τ` (`+1` at zero).
    pub fn split(&self) -> (ProbabilityDistribution, SignVector) {
        (self.probabilities(), self.signs())
    }

    /// `q_τ = s_τ √p_τ`.
    pub fn join(p: &ProbabilityDistribution, s: &SignVector) -> Result<Self> {
        if p.p.len() != s.s.len() {
            return Err(Error::DimensionMismatch { expected: p.p.len(), got: s.s.len() });
        }
        Self::new(p.p.iter().zip(&s.s).map(|(&p, &s)| f64::from(s) * p.sqrt()).collect())
    }
}

impl std::ops::Deref for ClassicalWaveFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.q
    }
}

/// `p_τ ≥ 0`, `Σ p_τ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    p: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_finite(&p)?;
        if let Some((index, &value)) = p.iter().enumerate().find(|(_, &x)| x < 0.0) {
            return Err(Error::NegativeProbability { index, value });
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq: total });
        }
        Ok(Self { p })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    /// Classical rule `Σ_τ p_τ A_τ`.
    pub fn expect(&self, a: &[f64]) -> f64 {
        self.p.iter().zip(a).map(|(p, a)| p * a).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    s: Vec<i8>,
}

impl SignVector {
    pub fn new(s: Vec<i8>) -> Result<Self> {
        if let Some(index) = s.iter().position(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidParameter(format!("sign at {index} is not ±1")));
        }
        Ok(Self { s })
    }

    pub fn values(&self) -> &[i8] {
        &self.s
    }
}

/// `q(t) = exp(tK) q`.
pub fn evolve(q: &ClassicalWaveFunction, k: &EvolutionGenerator, t: f64, method: Method) -> Result<ClassicalWaveFunction> {
    if q.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: q.len() });
    }
    let use_exact = match method {
        Method::Exact => true,
        Method::Splitting { .. } => false,
        Method::Auto { .. } => k.dim() < EXACT_DIM_LIMIT,
    };
    let out = if k.is_zero() {
        q.q.clone()
    } else if use_exact {
        apply_dense(&k.propagator(t), &q.q)
    } else {
        let tol = match method {
            Method::Splitting { tol } | Method::Auto { tol } => tol,
            Method::Exact => unreachable!(),
        };
        split_with_tolerance(k, &q.q, t, tol).0
    };
    ClassicalWaveFunction::new(out)
}

/// Samples `q(t_n)`, `t_n = n h`, `n = 0..=steps`, by repeated application of
/// the exact one-step rotation `exp(hK)`.
pub fn trajectory(q: &ClassicalWaveFunction, k: &EvolutionGenerator, h: f64, steps: usize) -> Result<Vec<ClassicalWaveFunction>> {
    if q.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: q.len() });
    }
    let r = k.propagator(h);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(q.clone());
    for _ in 0..steps {
        let next = apply_dense(&r, &out.last().unwrap().q);
        out.push(ClassicalWaveFunction::new(next)?);
    }
    Ok(out)
}

/// Generator `ω (0, 1; -1, 0)` of the periodic two-state model.
pub fn two_state_generator(omega: f64) -> EvolutionGenerator {
    EvolutionGenerator::new(SparseMatrix::from_triplets(2, 2, [(0, 1, omega), (1, 0, -omega)]))
        .expect("exactly antisymmetric")
}

/// Closed-form two-state amplitudes at time `t`.
pub fn two_state_closed_form(q0: [f64; 2], omega: f64, t: f64) -> [f64; 2] {
    let (s, c) = (omega * t).sin_cos();
    [c * q0[0] + s * q0[1], -s * q0[0] + c * q0[1]]
}

/// Max over interior samples of `|∂²_t p₀ − 2ω²(1 − 2p₀)|` with the
/// three-point second difference at uniform spacing `h`.
pub fn second_order_check(p0: &[f64], h: f64, omega: f64) -> Result<f64> {
    if p0.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: p0.len() });
    }
    let w2 = omega * omega;
    Ok(p0
        .windows(3)
        .map(|w| {
            let d2 = (w[2] - 2.0 * w[1] + w[0]) / (h * h);
            (d2 - 2.0 * w2 * (1.0 - 2.0 * w[1])).abs()
        })
        .fold(0.0, f64::max))
}

/// One sign change of `s_τ` between consecutive samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignJump {
    pub state: usize,
    pub t_before: f64,
    pub t_after: f64,
    /// Linear interpolation of the zero of `q_τ` inside the bucket.
    pub t_zero: f64,
    /// `min(p_τ(t_before), p_τ(t_after))`.
    pub min_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignReport {
    pub threshold: f64,
    pub jumps: Vec<SignJump>,
    /// Jumps whose bucket never came below the threshold.
    pub violations: Vec<SignJump>,
}

impl SignReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Locates sign flips along a densely sampled trajectory. A flip is only
/// admissible inside a bucket where `p_τ` dropped below `threshold`.
pub fn track_signs(times: &[f64], series: &[ClassicalWaveFunction], threshold: f64) -> Result<(Vec<SignVector>, SignReport)> {
    if times.len() != series.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: series.len() });
    }
    let signs: Vec<SignVector> = series.iter().map(|q| q.signs()).collect();
    let mut jumps = Vec::new();
    for n in 1..series.len() {
        let (a, b) = (&series[n - 1].q, &series[n].q);
        for (tau, (sa, sb)) in signs[n - 1].s.iter().zip(&signs[n].s).enumerate() {
            if sa == sb {
                continue;
            }
            let (qa, qb) = (a[tau], b[tau]);
            let frac = if qa == qb { 0.5 } else { qa / (qa - qb) };
            jumps.push(SignJump {
                state: tau,
                t_before: times[n - 1],
                t_after: times[n],
                t_zero: times[n - 1] + frac * (times[n] - times[n - 1]),
                min_p: (qa * qa).min(qb * qb),
            });
        }
    }
    let violations = jumps.iter().filter(|j| j.min_p >= threshold).cloned().collect();
    Ok((signs, SignReport { threshold, jumps, violations }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn split_examples() {
        let (p, s) = ClassicalWaveFunction::new(vec![1.0, 0.0]).unwrap().split();
        assert_eq!(p.values(), &[1.0, 0.0]);
        assert_eq!(s.values(), &[1, 1]);

        let (p, s) = ClassicalWaveFunction::new(vec![-FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap().split();
        assert!((p.values()[0] - 0.5).abs() < 1e-15 && (p.values()[1] - 0.5).abs() < 1e-15);
        assert_eq!(s.values(), &[-1, 1]);
    }

    #[test]
    fn join_rejects_negative_probability() {
        assert!(matches!(
            ProbabilityDistribution::new(vec![1.5, -0.5]),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
        assert!(SignVector::new(vec![1, 0]).is_err());
    }

    #[test]
    fn zero_generator_is_identity() {
        let k = EvolutionGenerator::new(SparseMatrix::zeros(3, 3)).unwrap();
        let q = ClassicalWaveFunction::normalized(vec![1.0, 2.0, 3.0]).unwrap();
        for m in [Method::Exact, Method::Splitting { tol: 1e-12 }] {
            assert_eq!(evolve(&q, &k, 4.0, m).unwrap(), q);
        }
    }

    #[test]
    fn two_state_matches_closed_form() {
        let omega = 0.8;
        let q0 = [0.6, -0.8];
        let q = ClassicalWaveFunction::new(q0.to_vec()).unwrap();
        let k = two_state_generator(omega);
        for t in [0.1, 1.0, 7.3] {
            let e = evolve(&q, &k, t, Method::Exact).unwrap();
            let c = two_state_closed_form(q0, omega, t);
            assert!((e[0] - c[0]).abs() < 1e-13 && (e[1] - c[1]).abs() < 1e-13);
        }
    }

    #[test]
    fn second_order_edge_cases() {
        assert!(matches!(second_order_check(&[0.5, 0.5], 0.1, 1.0), Err(Error::TooFewSamples { .. })));
        assert_eq!(second_order_check(&[0.5; 10], 0.1, 1.3).unwrap(), 0.0);
        assert_eq!(second_order_check(&[0.3; 10], 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn second_order_residual_converges_quadratically() {
        let omega = 1.1;
        let res = |h: f64| {
            let p: Vec<f64> = (0..200).map(|n| (omega * n as f64 * h).cos().powi(2)).collect();
            second_order_check(&p, h, omega).unwrap()
        };
        // Taylor: residual = h²/12 · max|∂⁴p₀| + O(h⁴), ∂⁴p₀ = 8ω⁴ cos(2ωt) → order 2
        let order = (res(0.01) / res(0.005)).log2();
        assert!(order > 1.9 && order < 2.1, "observed order {order}");
    }

    #[test]
    fn positive_probabilities_have_no_flips() {
        let times: Vec<f64> = (0..5).map(f64::from).collect();
        let series: Vec<_> = times.iter().map(|_| ClassicalWaveFunction::new(vec![0.6, 0.8]).unwrap()).collect();
        let (_, report) = track_signs(&times, &series, JUMP_THRESHOLD).unwrap();
        assert!(report.jumps.is_empty() && report.ok());
    }
}
