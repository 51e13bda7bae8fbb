//! Wendel probabilities, entropy exponents and threshold curves.
//!
//! `P_{m,M}` is the probability that `M` points drawn from a distribution
//! symmetric about the origin (and in general position) in `R^m` all lie in
//! some halfspace through the origin:
//!
//! `P_{m,M} = 2^{-(M-1)} * sum_{l < m} C(M-1, l)`.
//!
//! Below [`EXACT_LIMIT`] points the value is returned as an exact rational;
//! above it only the logarithm is computed, by summing saddle-point binomial
//! terms in log space.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::{DimensionSpec, Error, Result, Shape};

/// Largest point count `M` evaluated in exact rational arithmetic.
pub const EXACT_LIMIT: usize = 10_000;
/// Step of the bracketing scan used by [`rho_strong`].
pub const ROOT_SCAN_STEP: f64 = 1e-3;
/// Bracket width at which [`rho_strong`] stops bisecting.
pub const ROOT_TOL: f64 = 1e-12;

const LN_2: f64 = std::f64::consts::LN_2;

/// Undersampling ratio `delta = n/N` and sparsity ratio `rho = k/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct PhaseParams {
    pub delta: f64,
    pub rho: f64,
}

impl PhaseParams {
    /// Both ratios must lie in `[0, 1]`; the endpoints are admitted so that
    /// exponents can be evaluated at their continuity limits.
    pub fn new(delta: f64, rho: f64) -> Result<Self> {
        for (name, v) in [("delta", delta), ("rho", rho)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(PhaseParams { delta, rho })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WendelProb {
    /// Ambient dimension.
    pub m: usize,
    /// Number of points.
    #[serde(rename = "M")]
    pub points: usize,
    /// Exact value; `None` when `points > EXACT_LIMIT`.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub exact: Option<BigRational>,
    /// Natural log of the value, `-inf` when the value is zero.
    pub log_value: f64,
}

impl WendelProb {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// `1 - P` computed without cancellation.
    pub fn complement(&self) -> f64 {
        match &self.exact {
            Some(q) => rational_to_f64(&(BigRational::one() - q)),
            None => -self.log_value.exp_m1(),
        }
    }
}

pub(crate) fn serialize_opt_rational<S: Serializer>(
    v: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(q) => s.serialize_str(&format_rational(q)),
        None => s.serialize_none(),
    }
}

/// `"p/q"` in lowest terms; integers are written with denominator 1.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn wendel_probability(m: usize, points: usize) -> Result<WendelProb> {
    if points == 0 {
        return Err(Error::InvalidArgument(
            "Wendel probability needs at least one point".into(),
        ));
    }
    if m >= points {
        return Ok(WendelProb {
            m,
            points,
            exact: Some(BigRational::one()),
            log_value: 0.0,
        });
    }
    if m == 0 {
        return Ok(WendelProb {
            m,
            points,
            exact: Some(BigRational::zero()),
            log_value: f64::NEG_INFINITY,
        });
    }
    if points > EXACT_LIMIT {
        return Ok(WendelProb {
            m,
            points,
            exact: None,
            log_value: wendel_log(m, points),
        });
    }
    let n = points - 1;
    let mut term = BigUint::one();
    let mut sum = BigUint::zero();
    for l in 0..m {
        sum += &term;
        term = term * BigUint::from(n - l) / BigUint::from(l + 1);
    }
    let log_value = if 2 * (m - 1) > n {
        // near one: go through the complement P_{M-m,M} to keep the sign right
        let rest = wendel_probability(points - m, points)?;
        (-rest.value()).ln_1p()
    } else {
        ln_biguint(&sum) - n as f64 * LN_2
    };
    let exact = BigRational::new(sum.into(), (BigUint::one() << n).into());
    Ok(WendelProb {
        m,
        points,
        exact: Some(exact),
        log_value,
    })
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap();
    (top as f64).ln() + shift as f64 * LN_2
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `ln P_{m,M}` by log-space summation, valid for any `1 <= m < M`.
pub fn wendel_log(m: usize, points: usize) -> f64 {
    debug_assert!(m >= 1 && m < points);
    let n = points - 1;
    // sum_{l < m} C(n, l) 2^-n; the complement sum_{l <= n-m} is the smaller one past the median
    if 2 * (m - 1) > n {
        let upper = lower_tail_log(n - m, n);
        return (-upper.exp()).ln_1p();
    }
    lower_tail_log(m - 1, n)
}

/// `ln sum_{l <= top} C(n, l) 2^-n` for `2 top <= n + 1`.
fn lower_tail_log(top: usize, n: usize) -> f64 {
    let head = ln_binom_half(top, n);
    // terms relative to the largest one, t_{l-1}/t_l = l/(n-l+1)
    let mut ratio = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut l = top;
    while l > 0 {
        ratio *= l as f64 / (n - l + 1) as f64;
        let t = sum + ratio;
        comp += if sum.abs() >= ratio.abs() {
            (sum - t) + ratio
        } else {
            (ratio - t) + sum
        };
        sum = t;
        if ratio < 1e-18 * sum {
            break;
        }
        l -= 1;
    }
    head + (sum + comp).ln()
}

const STIRLING_ERR: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_26,
    0.041_340_695_955_409_3,
    0.027_677_925_684_998_34,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_193,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_77,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_87,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_53,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_847_5,
    0.005_554_733_551_962_801,
];

/// `ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)]` for integer `n >= 1`.
fn stirling_err(n: usize) -> f64 {
    if n < STIRLING_ERR.len() {
        return STIRLING_ERR[n];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let x = n as f64;
    let xx = x * x;
    (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
}

/// Deviance term `x ln(x/np) + np - x`, evaluated stably near `x = np`.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / np).ln() + np - x
}

/// `ln [C(n, x) 2^-n]` by the saddle-point expansion.
fn ln_binom_half(x: usize, n: usize) -> f64 {
    if x == 0 || x == n {
        return -(n as f64) * LN_2;
    }
    let (xf, nf) = (x as f64, n as f64);
    let half = 0.5 * nf;
    let lc = stirling_err(n) - stirling_err(x) - stirling_err(n - x) - deviance(xf, half) - deviance(nf - xf, half);
    let lf = (2.0 * std::f64::consts::PI).ln() + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

/// Whether `P_{m,M} + P_{M-m,M} = 1` in exact arithmetic.
pub fn binomial_symmetry_check(m: usize, points: usize) -> Result<bool> {
    if m > points || points > EXACT_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "symmetry check needs m <= M <= {EXACT_LIMIT}, got m = {m}, M = {points}"
        )));
    }
    let a = wendel_probability(m, points)?.exact.unwrap();
    let b = wendel_probability(points - m, points)?.exact.unwrap();
    Ok(a + b == BigRational::one())
}

/// Expected fraction of `k`-faces that survive projection,
/// `1 - P_{N-n, N-k}`, for the orthant or the hypercube.
pub fn expected_face_ratio(dims: DimensionSpec, shape: Shape) -> Result<BigRational> {
    check_ratio_shape(shape)?;
    let p = wendel_probability(dims.wendel_m(), dims.wendel_points())?;
    match p.exact {
        Some(q) => Ok(BigRational::one() - q),
        None => Err(Error::InvalidArgument(format!(
            "exact ratio limited to N - k <= {EXACT_LIMIT}"
        ))),
    }
}

/// Floating-point [`expected_face_ratio`], available at any size.
pub fn expected_face_ratio_f64(dims: DimensionSpec, shape: Shape) -> Result<f64> {
    check_ratio_shape(shape)?;
    Ok(wendel_probability(dims.wendel_m(), dims.wendel_points())?.complement())
}

fn check_ratio_shape(shape: Shape) -> Result<()> {
    if shape == Shape::Simplex {
        return Err(Error::InvalidArgument(
            "face ratio formula covers the orthant and hypercube only".into(),
        ));
    }
    Ok(())
}

/// Shannon entropy in nats with `H(0) = H(1) = 0`.
pub fn shannon_entropy(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "entropy argument {gamma} outside [0, 1]"
        )));
    }
    Ok(entropy(gamma))
}

fn entropy(g: f64) -> f64 {
    let part = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    part(g) + part(1.0 - g)
}

/// `H(delta) + delta H(rho) - H(rho delta) - (1 - rho delta) ln 2`.
pub fn psi_weak(p: PhaseParams) -> f64 {
    let rd = p.rho * p.delta;
    entropy(p.delta) + p.delta * entropy(p.rho) - entropy(rd) - (1.0 - rd) * LN_2
}

/// `H(delta) + delta H(rho) - (1 - rho delta) ln 2`.
pub fn psi_strong(p: PhaseParams) -> f64 {
    let rd = p.rho * p.delta;
    entropy(p.delta) + p.delta * entropy(p.rho) - (1.0 - rd) * LN_2
}

/// `max(0, 2 - 1/delta)`, shared by the orthant and the hypercube.
pub fn rho_weak(delta: f64, shape: Shape) -> Result<f64> {
    check_ratio_shape(shape)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} outside (0, 1]")));
    }
    Ok(weak_curve(delta))
}

pub(crate) fn weak_curve(delta: f64) -> f64 {
    if delta <= 0.5 {
        0.0
    } else {
        2.0 - 1.0 / delta
    }
}

/// Smallest root of `rho -> psi_strong(delta, rho)` on `[0, 1]`, for
/// `delta` in `[1/2, 1]`.
pub fn rho_strong(delta: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!(
            "strong threshold needs delta in [0.5, 1], got {delta}"
        )));
    }
    let f = |rho: f64| psi_strong(PhaseParams { delta, rho });
    if f(0.0).abs() <= ROOT_TOL {
        return Ok(0.0);
    }
    let steps = (1.0 / ROOT_SCAN_STEP).round() as usize;
    let mut lo = 0.0;
    for i in 1..=steps {
        let hi = i as f64 * ROOT_SCAN_STEP;
        if f(hi) > 0.0 {
            return Ok(bisect(f, lo, hi));
        }
        lo = hi;
    }
    Err(Error::InvalidArgument(format!(
        "no sign change of the strong exponent at delta = {delta}"
    )))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curve {
    WeakHypercube,
}

/// Composite Simpson integral of the curve over `delta` in `[0, 1]`. The
/// interval count is rounded up to a multiple of four so the kink at
/// `delta = 1/2` falls on a node.
pub fn curve_area(curve: Curve, quad_points: usize) -> Result<f64> {
    if quad_points < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 quadrature points, got {quad_points}"
        )));
    }
    let f = match curve {
        Curve::WeakHypercube => weak_curve,
    };
    let intervals = quad_points.div_ceil(4) * 4;
    let h = 1.0 / intervals as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    Ok(acc * h / 3.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    LowerTail,
    Middle,
    UpperTail,
}

/// Position of `m = N - n` relative to the band `M/2 +- sqrt(M/4)`, `M = N - k`.
pub fn regime_classify(dims: DimensionSpec) -> Regime {
    let m = dims.wendel_m() as f64;
    let big_m = dims.wendel_points() as f64;
    let half_width = (big_m / 4.0).sqrt();
    if m < big_m / 2.0 - half_width {
        Regime::LowerTail
    } else if m > big_m / 2.0 + half_width {
        Regime::UpperTail
    } else {
        Regime::Middle
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn exact(m: usize, big_m: usize) -> BigRational {
        wendel_probability(m, big_m).unwrap().exact.unwrap()
    }

    #[test]
    fn wendel_examples() {
        assert_eq!(exact(5, 5), BigRational::one());
        assert_eq!(exact(9, 5), BigRational::one());
        assert_eq!(exact(1, 3), ratio(1, 4));
        assert_eq!(exact(2, 3), ratio(3, 4));
        assert_eq!(exact(4, 6), ratio(13, 16));
        assert_eq!(exact(0, 4), BigRational::zero());
        assert_eq!(wendel_probability(0, 4).unwrap().log_value, f64::NEG_INFINITY);
        assert!(wendel_probability(1, 0).is_err());
    }

    #[test]
    fn exact_matches_explicit_binomial_sum() {
        fn choose(n: u64, k: u64) -> BigUint {
            (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
        }
        for big_m in 1..=64usize {
            for m in 0..=big_m {
                let sum: BigUint = (0..m as u64).map(|l| choose(big_m as u64 - 1, l)).sum();
                let expect = BigRational::new(sum.into(), (BigUint::one() << (big_m - 1)).into());
                assert_eq!(exact(m, big_m), expect, "m={m} M={big_m}");
                assert!(binomial_symmetry_check(m, big_m).unwrap());
            }
        }
    }

    #[test]
    fn symmetry_examples() {
        assert!(binomial_symmetry_check(2, 4).unwrap());
        assert!(binomial_symmetry_check(0, 5).unwrap());
        assert!(binomial_symmetry_check(7, 20).unwrap());
    }

    #[test]
    fn monotone_in_both_arguments() {
        for big_m in 1..=40usize {
            for m in 1..=big_m {
                assert!(exact(m - 1, big_m) <= exact(m, big_m));
                assert!(exact(m, big_m + 1) <= exact(m, big_m));
            }
        }
    }

    #[test]
    fn log_value_agrees_with_exact() {
        for big_m in 1..=200usize {
            for m in 1..=big_m {
                let w = wendel_probability(m, big_m).unwrap();
                let v = rational_to_f64(w.exact.as_ref().unwrap());
                assert!((w.value() - v).abs() <= 1e-12 * v, "m={m} M={big_m}");
            }
        }
    }

    #[test]
    fn log_path_agrees_with_exact_path() {
        for &big_m in &[2usize, 3, 17, 200, 1001, 4000, 10_000] {
            for m in [1, 2, big_m / 4, big_m / 2, big_m / 2 + 1, 3 * big_m / 4, big_m - 1] {
                if m == 0 || m >= big_m {
                    continue;
                }
                let w = wendel_probability(m, big_m).unwrap();
                let e = rational_to_f64(w.exact.as_ref().unwrap());
                let l = wendel_log(m, big_m).exp();
                assert!((l - e).abs() <= 1e-12 * e, "m={m} M={big_m}: {l} vs {e}");
            }
        }
    }

    #[test]
    fn large_point_counts_use_log_path() {
        let w = wendel_probability(5_000, 20_001).unwrap();
        assert!(w.exact.is_none());
        assert!(w.log_value < -1000.0);
        let mid = wendel_probability(10_000, 20_000).unwrap();
        assert!((mid.value() - 0.5).abs() < 1e-12);
        let top = wendel_probability(20_000, 20_001).unwrap();
        assert!((top.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn face_ratio_examples() {
        let d = DimensionSpec::new(2, 4, 8).unwrap();
        assert_eq!(expected_face_ratio(d, Shape::Orthant).unwrap(), ratio(3, 16));
        assert_eq!(expected_face_ratio(d, Shape::Hypercube).unwrap(), ratio(3, 16));
        let top = DimensionSpec::new(4, 4, 8).unwrap();
        assert_eq!(expected_face_ratio(top, Shape::Orthant).unwrap(), BigRational::zero());
        let big = DimensionSpec::new(12, 60, 80).unwrap();
        assert!(expected_face_ratio(big, Shape::Orthant).unwrap() >= ratio(999, 1000));
        assert!(expected_face_ratio(big, Shape::Simplex).is_err());
        assert_eq!(format_rational(&ratio(13, 16)), "13/16");
        assert_eq!(format_rational(&BigRational::one()), "1/1");
    }

    #[test]
    fn json_writes_rationals_as_strings() {
        let text = serde_json::to_string(&wendel_probability(4, 6).unwrap()).unwrap();
        assert!(text.contains(r#""exact":"13/16""#), "{text}");
    }

    #[test]
    fn entropy_examples() {
        assert!((shannon_entropy(0.5).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(shannon_entropy(0.0).unwrap(), 0.0);
        assert_eq!(shannon_entropy(1.0).unwrap(), 0.0);
        assert!((shannon_entropy(0.75).unwrap() - 0.562335).abs() < 1e-6);
        assert!(shannon_entropy(1.5).is_err());
    }

    fn pp(delta: f64, rho: f64) -> PhaseParams {
        PhaseParams::new(delta, rho).unwrap()
    }

    #[test]
    fn weak_exponent_examples() {
        assert!(psi_weak(pp(0.75, 2.0 / 3.0)).abs() <= 1e-12);
        let below = psi_weak(pp(0.75, 0.5));
        assert!((below + 0.0126).abs() < 5e-4, "{below}");
        // the exponent peaks at zero on the threshold curve and is negative on both sides
        let above = psi_weak(pp(0.75, 0.9));
        assert!((above + 0.0497).abs() < 5e-4, "{above}");
        assert!(psi_weak(pp(0.75, 0.7)) < 0.0);
    }

    #[test]
    fn strong_exponent_examples() {
        assert!(psi_strong(pp(0.5, 1e-12)).abs() < 1e-9);
        let v = psi_strong(pp(0.5, 0.5));
        assert!((v - (0.5 * LN_2 + 0.25 * LN_2)).abs() < 1e-12);
        assert!((v - 0.5199).abs() < 1e-4);
        assert!(psi_strong(pp(1.0, 0.22)) < 0.0);
        assert!(psi_strong(pp(1.0, 0.23)) > 0.0);
    }

    #[test]
    fn zero_level_curve_of_weak_exponent() {
        for i in 1..=100 {
            let delta = 0.5 + 0.5 * i as f64 / 101.0;
            let rho = 2.0 - 1.0 / delta;
            assert!(psi_weak(pp(delta, rho)).abs() <= 1e-10, "delta={delta}");
        }
    }

    #[test]
    fn weak_threshold_examples() {
        assert_eq!(rho_weak(0.5, Shape::Hypercube).unwrap(), 0.0);
        assert!((rho_weak(0.75, Shape::Orthant).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(rho_weak(0.25, Shape::Orthant).unwrap(), 0.0);
        assert!(rho_weak(0.0, Shape::Orthant).is_err());
        assert!(rho_weak(0.75, Shape::Simplex).is_err());
    }

    #[test]
    fn strong_threshold_examples() {
        assert_eq!(rho_strong(0.5).unwrap(), 0.0);
        let r = rho_strong(1.0).unwrap();
        assert!(r > 0.22 && r < 0.23, "{r}");
        assert!(psi_strong(pp(1.0, r)).abs() <= 1e-10);
        assert!(rho_strong(0.4).is_err());
        for i in 1..=20 {
            let delta = 0.5 + 0.025 * i as f64;
            let r = rho_strong(delta).unwrap();
            assert!(psi_strong(pp(delta, r)).abs() <= 1e-10);
            assert!(r <= weak_curve(delta) + 1e-12);
        }
    }

    #[test]
    fn area_under_weak_curve() {
        let a = curve_area(Curve::WeakHypercube, 1000).unwrap();
        assert!((a - (1.0 - LN_2)).abs() < 1e-4);
        assert!((a - 0.306853).abs() < 1e-4);
        let b = curve_area(Curve::WeakHypercube, 2000).unwrap();
        assert!((a - b).abs() < 1e-6);
        assert!(curve_area(Curve::WeakHypercube, 99).is_err());
        for i in 1..=50 {
            assert_eq!(weak_curve(i as f64 / 100.0), 0.0);
        }
    }

    #[test]
    fn regime_examples() {
        assert_eq!(
            regime_classify(DimensionSpec::new(12, 60, 80).unwrap()),
            Regime::LowerTail
        );
        assert_eq!(regime_classify(DimensionSpec::new(2, 4, 8).unwrap()), Regime::Middle);
        // m = 5, M = 10
        assert_eq!(regime_classify(DimensionSpec::new(0, 5, 10).unwrap()), Regime::Middle);
        // m = 100, M = 250 and m = 100, M = 160
        assert_eq!(
            regime_classify(DimensionSpec::new(150, 300, 400).unwrap()),
            Regime::LowerTail
        );
        assert_eq!(
            regime_classify(DimensionSpec::new(240, 300, 400).unwrap()),
            Regime::UpperTail
        );
    }

    #[test]
    fn wendel_upper_bound_from_weak_exponent() {
        // P_{N-n,N-k} <= n^{3/2} exp(N psi_weak(n/N, k/n)) whenever N - n < (N - k)/2
        let table: Vec<Vec<f64>> = (0..=200usize)
            .map(|big_m| {
                (0..=big_m)
                    .map(|m| {
                        if big_m == 0 {
                            0.0
                        } else {
                            wendel_probability(m, big_m).unwrap().log_value
                        }
                    })
                    .collect()
            })
            .collect();
        let mut checked = 0usize;
        for big_n in 2..=200usize {
            for n in 1..big_n {
                for k in 0..=n {
                    if 2 * (big_n - n) >= big_n - k {
                        continue;
                    }
                    let lhs = table[big_n - k][big_n - n];
                    let p = pp(n as f64 / big_n as f64, k as f64 / n as f64);
                    let rhs = 1.5 * (n as f64).ln() + big_n as f64 * psi_weak(p);
                    assert!(lhs <= rhs + 1e-9, "(k, n, N) = ({k}, {n}, {big_n})");
                    checked += 1;
                }
            }
        }
        assert!(checked > 100_000);
    }

    #[test]
    fn ratio_approaches_its_limit_from_the_right_side() {
        let delta: f64 = 0.75;
        for (rho, toward_one) in [(0.5, true), (0.8, false)] {
            let vals: Vec<f64> = [100usize, 200, 400]
                .iter()
                .map(|&n| {
                    let k = (rho * n as f64).floor() as usize;
                    let big_n = (n as f64 / delta).floor() as usize;
                    expected_face_ratio_f64(DimensionSpec::new(k, n, big_n).unwrap(), Shape::Orthant).unwrap()
                })
                .collect();
            if toward_one {
                assert!(vals[0] < vals[1] && vals[1] < vals[2] && vals[2] > 0.99, "{vals:?}");
            } else {
                assert!(vals[0] > vals[1] && vals[1] > vals[2] && vals[2] < 0.01, "{vals:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn probabilities_stay_in_unit_interval(m in 0usize..300, big_m in 1usize..300) {
            let w = wendel_probability(m, big_m).unwrap();
            let q = w.exact.unwrap();
            prop_assert!(q >= BigRational::zero() && q <= BigRational::one());
            prop_assert!(w.log_value <= 0.0);
        }

        #[test]
        fn symmetry_holds(big_m in 1usize..400, frac in 0.0f64..=1.0) {
            let m = (frac * big_m as f64).round() as usize;
            prop_assert!(binomial_symmetry_check(m, big_m).unwrap());
        }

        #[test]
        fn log_path_symmetry(big_m in 10_001usize..40_000, frac in 0.01f64..0.99) {
            let m = ((frac * big_m as f64) as usize).max(1);
            let a = wendel_log(m, big_m).exp();
            let b = wendel_log(big_m - m, big_m).exp();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn strong_root_is_a_root(delta in 0.5f64..=1.0) {
            let r = rho_strong(delta).unwrap();
            let at_root = psi_strong(PhaseParams { delta, rho: r });
            prop_assert!(at_root.abs() <= 1e-10);
        }
    }
}
