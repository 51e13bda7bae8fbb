//! Random and deterministic projection-matrix families.
//!
//! Every random draw comes from a ChaCha8 stream keyed by `(seed, trial)`:
//! the seed selects the key and the trial index selects the stream, so a
//! draw never depends on which other trials ran or in what order.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{orthonormal_rows, singular_values};
use crate::{Error, Matrix, Result};

/// Relative singular-value floor used when certifying general position.
pub const GENERAL_POSITION_TOL: f64 = 1e-10;
/// Redraws allowed after the first censored Rademacher draw.
pub const CENSORING_RETRIES: usize = 64;
/// Largest number of column subsets checked exhaustively before sampling.
pub const SUBSET_BUDGET: u128 = 20_000;
const SAMPLED_SUBSETS: usize = 2_000;
const SUBSET_SAMPLING_SEED: u64 = 0x6E6E_5EED;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EnsembleKind {
    #[serde(rename = "GaussianIID")]
    GaussianIid,
    /// Entries uniform on `[-1, 1]`.
    #[serde(rename = "UniformIID")]
    UniformIid,
    /// Entries uniform on `{-1, +1}`, redrawn until every `n` columns are independent.
    RademacherCensored,
    /// Entries uniform on `{-1, 0, +1}`.
    #[serde(rename = "TernaryIID")]
    TernaryIid,
    /// Orthonormalised Gaussian rows.
    Orthoprojector,
    /// A fixed generator with independent uniform column sign flips.
    SignEnsemble { generator: Matrix },
    /// Low-frequency partial Fourier matrix (deterministic).
    PartialFourier,
    /// A row of ones stacked on a draw from `inner`.
    AdjoinOnes { inner: Box<EnsembleSpec> },
}

impl EnsembleKind {
    pub fn name(&self) -> String {
        match self {
            EnsembleKind::GaussianIid => "gaussian".into(),
            EnsembleKind::UniformIid => "uniform".into(),
            EnsembleKind::RademacherCensored => "rademacher".into(),
            EnsembleKind::TernaryIid => "ternary".into(),
            EnsembleKind::Orthoprojector => "orthoprojector".into(),
            EnsembleKind::SignEnsemble { .. } => "sign".into(),
            EnsembleKind::PartialFourier => "fourier".into(),
            EnsembleKind::AdjoinOnes { inner } => format!("ones+{}", inner.kind.name()),
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    /// Parses the short names used on the command line. `ones+<inner>`
    /// adjoins a row of ones to an inner ensemble; the inner dimensions are
    /// filled in by [`EnsembleSpec::new`].
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if let Some(inner) = lower.strip_prefix("ones+") {
            let inner_kind: EnsembleKind = inner.parse()?;
            return Ok(EnsembleKind::AdjoinOnes {
                inner: Box::new(EnsembleSpec {
                    kind: inner_kind,
                    rows: 0,
                    cols: 0,
                    seed: 0,
                }),
            });
        }
        match lower.as_str() {
            "gaussian" | "gaussianiid" => Ok(EnsembleKind::GaussianIid),
            "uniform" | "uniformiid" => Ok(EnsembleKind::UniformIid),
            "rademacher" | "rademachercensored" => Ok(EnsembleKind::RademacherCensored),
            "ternary" | "ternaryiid" => Ok(EnsembleKind::TernaryIid),
            "orthoprojector" | "ortho" => Ok(EnsembleKind::Orthoprojector),
            "fourier" | "partialfourier" => Ok(EnsembleKind::PartialFourier),
            _ => Err(Error::InvalidArgument(format!("unknown ensemble '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    /// Builds a validated spec; an `AdjoinOnes` inner spec is resized to
    /// `(rows - 1) x cols` and given the same seed.
    pub fn new(kind: EnsembleKind, rows: usize, cols: usize, seed: u64) -> Result<Self> {
        let kind = match kind {
            EnsembleKind::AdjoinOnes { inner } => {
                if rows == 0 {
                    return Err(Error::InvalidDimensions("AdjoinOnes needs at least one row".into()));
                }
                EnsembleKind::AdjoinOnes {
                    inner: Box::new(EnsembleSpec::new(inner.kind, rows - 1, cols, seed)?),
                }
            }
            other => other,
        };
        let spec = EnsembleSpec { kind, rows, cols, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.seed = seed;
        if let EnsembleKind::AdjoinOnes { inner } = &mut out.kind {
            **inner = inner.with_seed(seed);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows >= self.cols {
            return Err(Error::InvalidDimensions(format!(
                "ensemble needs rows < cols, got {}x{}",
                self.rows, self.cols
            )));
        }
        match &self.kind {
            EnsembleKind::PartialFourier if self.rows.is_multiple_of(2) => {
                Err(Error::InvalidArgument("partial Fourier needs an odd row count".into()))
            }
            EnsembleKind::SignEnsemble { generator }
                if generator.rows() != self.rows || generator.cols() != self.cols =>
            {
                Err(Error::InvalidDimensions(
                    "sign ensemble generator shape mismatch".into(),
                ))
            }
            EnsembleKind::AdjoinOnes { inner } => {
                if inner.rows + 1 != self.rows || inner.cols != self.cols {
                    return Err(Error::InvalidDimensions(
                        "AdjoinOnes inner spec must be (rows - 1) x cols".into(),
                    ));
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: EnsembleSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Per-trial random stream keyed by `(seed, trial_index)`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

pub fn sample_matrix(spec: &EnsembleSpec, trial_index: u64) -> Result<Matrix> {
    spec.validate()?;
    let (n, big_n) = (spec.rows, spec.cols);
    let mut rng = trial_rng(spec.seed, trial_index);
    match &spec.kind {
        EnsembleKind::GaussianIid => Ok(gaussian(&mut rng, n, big_n)),
        EnsembleKind::UniformIid => Ok(Matrix::from_fn(n, big_n, |_, _| rng.random_range(-1.0..=1.0))),
        EnsembleKind::TernaryIid => Ok(Matrix::from_fn(n, big_n, |_, _| f64::from(rng.random_range(-1i8..=1)))),
        EnsembleKind::RademacherCensored => {
            for _ in 0..=CENSORING_RETRIES {
                let a = Matrix::from_fn(n, big_n, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
                if check_general_position(&a, GENERAL_POSITION_TOL).holds {
                    return Ok(a);
                }
            }
            Err(Error::CensoringLimit {
                rows: n,
                cols: big_n,
                attempts: CENSORING_RETRIES + 1,
            })
        }
        EnsembleKind::Orthoprojector => Ok(orthonormal_rows(&gaussian(&mut rng, n, big_n))),
        EnsembleKind::SignEnsemble { generator } => {
            let signs: Vec<f64> = (0..big_n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            Ok(Matrix::from_fn(n, big_n, |i, j| generator.get(i, j) * signs[j]))
        }
        EnsembleKind::PartialFourier => build_partial_fourier(n, big_n),
        EnsembleKind::AdjoinOnes { inner } => Ok(adjoin_ones(&sample_matrix(inner, trial_index)?)),
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Rows `1, 3, 5, ...` are `cos(pi (j-1)(i-1) / N)`, rows `2, 4, ...` are
/// `sin(pi (j-1) i / N)` (1-based), so the first row is all ones.
pub fn build_partial_fourier(n: usize, big_n: usize) -> Result<Matrix> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("partial Fourier needs odd n, got {n}")));
    }
    if n >= big_n {
        return Err(Error::InvalidDimensions(format!("need n < N, got {n} >= {big_n}")));
    }
    let nf = big_n as f64;
    Ok(Matrix::from_fn(n, big_n, |i0, j0| {
        let (i, j) = ((i0 + 1) as f64, j0 as f64);
        if (i0 + 1) % 2 == 1 {
            (std::f64::consts::PI * j * (i - 1.0) / nf).cos()
        } else {
            (std::f64::consts::PI * j * i / nf).sin()
        }
    }))
}

/// Stacks a row of ones on top of `a`.
pub fn adjoin_ones(a: &Matrix) -> Matrix {
    Matrix::from_fn(
        a.rows() + 1,
        a.cols(),
        |i, j| if i == 0 { 1.0 } else { a.get(i - 1, j) },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneralPosition {
    pub holds: bool,
    /// True when only a random sample of column subsets was examined.
    pub sampled: bool,
    pub subsets_checked: usize,
}

/// Whether every `n x n` column submatrix of the `n x N` matrix `a` has
/// smallest singular value above `tol` times the largest singular value of `a`.
pub fn check_general_position(a: &Matrix, tol: f64) -> GeneralPosition {
    let (n, big_n) = (a.rows(), a.cols());
    if n == 0 {
        return GeneralPosition {
            holds: true,
            sampled: false,
            subsets_checked: 0,
        };
    }
    let floor = tol * singular_values(a).first().copied().unwrap_or(0.0);
    let independent = |cols: &[usize]| {
        let s = singular_values(&a.select_columns(cols));
        s.len() == n && s[n - 1] > floor
    };

    if binomial(big_n, n) <= SUBSET_BUDGET {
        let mut checked = 0;
        let mut holds = true;
        for subset in Combinations::new(big_n, n) {
            checked += 1;
            if !independent(&subset) {
                holds = false;
                break;
            }
        }
        GeneralPosition {
            holds,
            sampled: false,
            subsets_checked: checked,
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SUBSET_SAMPLING_SEED);
        let mut checked = 0;
        let mut holds = true;
        for _ in 0..SAMPLED_SUBSETS {
            let mut subset = sample_indices(&mut rng, big_n, n).into_vec();
            subset.sort_unstable();
            checked += 1;
            if !independent(&subset) {
                holds = false;
                break;
            }
        }
        GeneralPosition {
            holds,
            sampled: true,
            subsets_checked: checked,
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for l in i + 1..k {
                    next[l] = next[l - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}
