//! Monte Carlo and exhaustive experiment harnesses.
//!
//! Trials run in parallel on the rayon pool, but each trial draws from its
//! own stream keyed by `(seed, trial_index)` and results are tallied in
//! trial order, so every report is a pure function of its arguments.

use std::fmt::Write as _;

use num_rational::BigRational;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{adjoin_ones, sample_matrix, trial_rng, EnsembleKind, EnsembleSpec};
use crate::geometry::{count_faces_exhaustive, face_survives, nullspace_basis, FaceCount, FaceSpec, SurvivalStatus};
use crate::lp::{box_ranges, min_l1_nonneg};
use crate::probcalc::{expected_face_ratio_f64, serialize_opt_rational, wendel_probability};
use crate::{DimensionSpec, Error, Result, Shape};

/// Largest tolerated fraction of rank-deficient draws.
pub const DEGENERATE_LIMIT: f64 = 0.01;
/// Largest tolerated fraction of indeterminate verdicts.
pub const INDETERMINATE_LIMIT: f64 = 0.001;
/// Largest `max |x_hat - x_0|` (or box range width) counted as recovery.
pub const RECOVERY_TOL: f64 = 1e-6;

pub const TRIAL_CSV_HEADER: &str = "shape,ensemble,k,n,N,trials,survived,lost,indeterminate,predicted,empirical,stderr";
pub const PHASE_CSV_HEADER: &str = "delta,rho,k,n,N,predicted,empirical,stderr,indeterminate";
pub const RECOVERY_CSV_HEADER: &str = "kind,ensemble,k,n,N,trials,successes,certified,lp_failures";

/// How the coordinates pinned at one are chosen for hypercube trials.
const AUX_KEY: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream for per-trial draws other than the matrix. The key is offset so
/// that passing the ensemble's own seed does not reuse the matrix stream.
fn aux_rng(seed: u64, trial: u64) -> rand_chacha::ChaCha8Rng {
    trial_rng(seed ^ AUX_KEY, trial)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PinPolicy {
    /// Each coordinate off the support is pinned at one with probability 1/2, per trial.
    Random,
    /// Every coordinate off the support is pinned at zero.
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub dims: DimensionSpec,
    pub shape: Shape,
    pub ensemble: EnsembleSpec,
    pub trials: usize,
    pub survived: usize,
    pub lost: usize,
    /// Includes rank-deficient draws.
    pub indeterminate: usize,
    pub degenerate: usize,
    pub predicted: f64,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub predicted_exact: Option<BigRational>,
    pub stderr: f64,
}

impl TrialReport {
    /// Survival frequency among conclusive trials.
    pub fn empirical(&self) -> f64 {
        let conclusive = self.survived + self.lost;
        if conclusive == 0 {
            f64::NAN
        } else {
            self.survived as f64 / conclusive as f64
        }
    }

    /// Whether `|empirical - predicted| <= sigmas * stderr`, with the
    /// standard error taken at the predicted value when the sample one is zero.
    pub fn within_band(&self, sigmas: f64) -> bool {
        let conclusive = (self.survived + self.lost) as f64;
        let p = self.predicted;
        let spread = self.stderr.max((p * (1.0 - p) / conclusive).sqrt());
        (self.empirical() - p).abs() <= sigmas * spread
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.12},{:.12},{:.12}",
            self.shape,
            self.ensemble.name(),
            self.dims.k,
            self.dims.n,
            self.dims.big_n,
            self.trials,
            self.survived,
            self.lost,
            self.indeterminate,
            self.predicted,
            self.empirical(),
            self.stderr
        )
    }
}

pub fn trial_reports_csv(reports: &[TrialReport]) -> String {
    let mut out = String::from(TRIAL_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Survives,
    Lost,
    Indeterminate,
    Degenerate,
}

fn check_ensemble_shape(dims: DimensionSpec, ensemble: &EnsembleSpec) -> Result<()> {
    if ensemble.rows != dims.n || ensemble.cols != dims.big_n {
        return Err(Error::InvalidDimensions(format!(
            "ensemble is {}x{} but dimensions call for {}x{}",
            ensemble.rows, ensemble.cols, dims.n, dims.big_n
        )));
    }
    Ok(())
}

/// Estimates the probability that the face with free coordinates
/// `0..k` survives, for the orthant or the hypercube.
///
/// Matrices come from `ensemble` (keyed by its own seed); `seed` drives the
/// hypercube pinning.
pub fn mc_face_ratio(
    dims: DimensionSpec,
    shape: Shape,
    ensemble: &EnsembleSpec,
    trials: usize,
    seed: u64,
    pins: PinPolicy,
    tol: f64,
) -> Result<TrialReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    check_ensemble_shape(dims, ensemble)?;
    let predicted = expected_face_ratio_f64(dims, shape)?;
    let predicted_exact = wendel_probability(dims.wendel_m(), dims.wendel_points())?
        .exact
        .map(|p| BigRational::from_integer(1.into()) - p);
    let support: Vec<usize> = (0..dims.k).collect();

    let outcomes: Vec<Outcome> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let a = sample_matrix(ensemble, t)?;
            let basis = match nullspace_basis(&a) {
                Ok(b) => b,
                Err(Error::RankDeficient(_)) => return Ok(Outcome::Degenerate),
                Err(e) => return Err(e),
            };
            let upper = match (shape, pins) {
                (Shape::Hypercube, PinPolicy::Random) => {
                    let mut rng = aux_rng(seed, t);
                    (dims.k..dims.big_n).filter(|_| rng.random::<bool>()).collect()
                }
                _ => Vec::new(),
            };
            let face = FaceSpec::new(shape, support.clone(), upper)?;
            Ok(match face_survives(&basis, &face, tol)?.status {
                SurvivalStatus::Survives => Outcome::Survives,
                SurvivalStatus::Lost => Outcome::Lost,
                SurvivalStatus::Indeterminate => Outcome::Indeterminate,
            })
        })
        .collect::<Result<_>>()?;

    let count = |o: Outcome| outcomes.iter().filter(|&&x| x == o).count();
    let (survived, lost) = (count(Outcome::Survives), count(Outcome::Lost));
    let degenerate = count(Outcome::Degenerate);
    let indeterminate = count(Outcome::Indeterminate) + degenerate;
    if degenerate as f64 > DEGENERATE_LIMIT * trials as f64 {
        return Err(Error::DegenerateDraws { degenerate, trials });
    }
    if (indeterminate - degenerate) as f64 > INDETERMINATE_LIMIT * trials as f64 {
        return Err(Error::TooManyIndeterminate {
            indeterminate: indeterminate - degenerate,
            trials,
        });
    }
    let conclusive = survived + lost;
    let stderr = if conclusive == 0 {
        0.0
    } else {
        let p = survived as f64 / conclusive as f64;
        (p * (1.0 - p) / conclusive as f64).sqrt()
    };
    Ok(TrialReport {
        dims,
        shape,
        ensemble: ensemble.clone(),
        trials,
        survived,
        lost,
        indeterminate,
        degenerate,
        predicted,
        predicted_exact,
        stderr,
    })
}

/// [`mc_face_ratio`] on the orthant for each ensemble in turn.
pub fn universality_sweep(
    dims: DimensionSpec,
    ensembles: &[EnsembleSpec],
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<TrialReport>> {
    ensembles
        .iter()
        .map(|e| mc_face_ratio(dims, Shape::Orthant, e, trials, seed, PinPolicy::Random, tol))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseCell {
    pub delta: f64,
    pub rho: f64,
    pub k: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub predicted: f64,
    /// `None` when only the formula was evaluated (`k = 0`, `k = n`, or no trials).
    pub empirical: Option<f64>,
    pub stderr: Option<f64>,
    pub indeterminate: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseTable {
    pub cells: Vec<PhaseCell>,
}

impl PhaseTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(PHASE_CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12}")).unwrap_or_default();
        for c in &self.cells {
            writeln!(
                out,
                "{:.6},{:.6},{},{},{},{:.12},{},{},{}",
                c.delta,
                c.rho,
                c.k,
                c.n,
                c.big_n,
                c.predicted,
                opt(c.empirical),
                opt(c.stderr),
                c.indeterminate
            )
            .unwrap();
        }
        out
    }
}

/// Predicted and simulated survival on a `grid x grid` lattice of cell
/// centres in `(0, 1)^2`, with `n = round(delta N)` and `k = round(rho n)`.
/// With `trials = 0` only the formula is evaluated.
pub fn phase_diagram(
    big_n: usize,
    grid: usize,
    trials: usize,
    shape: Shape,
    kind: &EnsembleKind,
    seed: u64,
    tol: f64,
) -> Result<PhaseTable> {
    if grid < 4 {
        return Err(Error::InvalidArgument(format!("grid must be at least 4, got {grid}")));
    }
    if big_n < 2 {
        return Err(Error::InvalidDimensions("phase diagram needs N >= 2".into()));
    }
    let mut cells = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let delta = (i as f64 + 0.5) / grid as f64;
        let n = ((delta * big_n as f64).round() as usize).clamp(1, big_n - 1);
        for j in 0..grid {
            let rho = (j as f64 + 0.5) / grid as f64;
            let k = (rho * n as f64).round() as usize;
            let dims = DimensionSpec::new(k, n, big_n)?;
            let predicted = expected_face_ratio_f64(dims, shape)?;
            let (empirical, stderr, indeterminate) = if trials == 0 || k == 0 || k == n {
                (None, None, 0)
            } else {
                let spec = EnsembleSpec::new(kind.clone(), n, big_n, seed)?;
                let r = mc_face_ratio(dims, shape, &spec, trials, seed, PinPolicy::Random, tol)?;
                (Some(r.empirical()), Some(r.stderr), r.indeterminate)
            };
            cells.push(PhaseCell {
                delta,
                rho,
                k,
                n,
                big_n,
                predicted,
                empirical,
                stderr,
                indeterminate,
            });
        }
    }
    Ok(PhaseTable { cells })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceLevel {
    pub k: usize,
    pub count: FaceCount,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub levels: Vec<FaceLevel>,
}

impl FourierReport {
    /// Whether every face at levels `k <= (n-1)/2` survived.
    pub fn neighborly(&self) -> bool {
        self.levels
            .iter()
            .filter(|l| l.k <= (self.n - 1) / 2)
            .all(|l| l.count.survived == l.count.total)
    }
}

/// Exhaustive orthant face counts for the partial Fourier matrix at every
/// level `k = 0..=max_k`.
pub fn fourier_neighborliness(n: usize, big_n: usize, max_k: usize, tol: f64) -> Result<FourierReport> {
    let omega = crate::ensembles::build_partial_fourier(n, big_n)?;
    let basis = nullspace_basis(&omega)?;
    let levels = (0..=max_k.min(n))
        .map(|k| {
            Ok(FaceLevel {
                k,
                count: count_faces_exhaustive(&basis, Shape::Orthant, k, tol)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(FourierReport { n, big_n, levels })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BijectionLevel {
    pub k: usize,
    /// Orthant `k`-faces that survive under the matrix with adjoined ones.
    pub orthant_faces: u64,
    /// Simplex `(k-1)`-faces that survive under the original matrix.
    pub simplex_faces: u64,
    pub indeterminate: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BijectionTrial {
    pub trial: usize,
    pub levels: Vec<BijectionLevel>,
}

impl BijectionTrial {
    pub fn conclusive(&self) -> bool {
        self.levels.iter().all(|l| l.indeterminate == 0)
    }

    pub fn counts_agree(&self) -> bool {
        self.levels.iter().all(|l| l.orthant_faces == l.simplex_faces)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BijectionReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub trials: Vec<BijectionTrial>,
}

impl BijectionReport {
    /// Counts agree in every conclusive trial.
    pub fn holds(&self) -> bool {
        self.trials
            .iter()
            .filter(|t| t.conclusive())
            .all(BijectionTrial::counts_agree)
    }
}

/// For Gaussian `A` of shape `(n-1) x N`, compares surviving orthant
/// `k`-faces of `A` with a row of ones adjoined against surviving simplex
/// `(k-1)`-faces of `A`, for `0 < k < n`.
pub fn adjoin_ones_bijection(big_n: usize, n: usize, trials: usize, seed: u64, tol: f64) -> Result<BijectionReport> {
    if n < 2 {
        return Err(Error::InvalidDimensions("adjoined-ones comparison needs n >= 2".into()));
    }
    let spec = EnsembleSpec::new(EnsembleKind::GaussianIid, n - 1, big_n, seed)?;
    let trials = (0..trials)
        .map(|t| {
            let a = sample_matrix(&spec, t as u64)?;
            bijection_counts(&a, t, tol)
        })
        .collect::<Result<_>>()?;
    Ok(BijectionReport { n, big_n, trials })
}

pub(crate) fn bijection_counts(a: &crate::Matrix, trial: usize, tol: f64) -> Result<BijectionTrial> {
    let n = a.rows() + 1;
    let plain = nullspace_basis(a)?;
    let augmented = nullspace_basis(&adjoin_ones(a))?;
    let levels = (1..n)
        .map(|k| {
            let o = count_faces_exhaustive(&augmented, Shape::Orthant, k, tol)?;
            let s = count_faces_exhaustive(&plain, Shape::Simplex, k, tol)?;
            Ok(BijectionLevel {
                k,
                orthant_faces: o.survived,
                simplex_faces: s.survived,
                indeterminate: o.indeterminate + s.indeterminate,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BijectionTrial { trial, levels })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PlantedKind {
    /// Nonnegative with `k` nonzeros.
    KSparseNonneg,
    /// In `[0,1]^N` with `k` entries strictly inside `(0, 1)`.
    KSimpleBox,
}

impl PlantedKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlantedKind::KSparseNonneg => "sparse",
            PlantedKind::KSimpleBox => "box",
        }
    }
}

impl std::str::FromStr for PlantedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sparse" | "ksparsenonneg" | "nonneg" => Ok(PlantedKind::KSparseNonneg),
            "box" | "ksimplebox" | "simple" => Ok(PlantedKind::KSimpleBox),
            _ => Err(Error::InvalidArgument(format!("unknown planted kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub dims: DimensionSpec,
    pub ensemble: EnsembleSpec,
    pub planted_kind: PlantedKind,
    pub trials: usize,
    pub successes: usize,
    pub uniqueness_certified: usize,
    pub lp_failures: usize,
    /// Trials certified unique whose recovery nevertheless failed.
    pub certified_but_failed: usize,
}

impl RecoveryReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.planted_kind.name(),
            self.ensemble.name(),
            self.dims.k,
            self.dims.n,
            self.dims.big_n,
            self.trials,
            self.successes,
            self.uniqueness_certified,
            self.lp_failures
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{RECOVERY_CSV_HEADER}\n{}\n", self.csv_row())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct RecoveryOutcome {
    certified: bool,
    /// `None` when a linear program failed.
    recovered: Option<bool>,
}

/// Plants a `k`-sparse nonnegative or `k`-simple box vector `x_0`, sets
/// `b = A x_0`, certifies uniqueness with the survival oracle and checks
/// whether linear programming returns `x_0`.
pub fn recovery_trial(
    dims: DimensionSpec,
    ensemble: &EnsembleSpec,
    kind: PlantedKind,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<RecoveryReport> {
    check_ensemble_shape(dims, ensemble)?;
    let big_n = dims.big_n;
    let outcomes: Vec<RecoveryOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let a = sample_matrix(ensemble, t)?;
            let mut rng = aux_rng(seed, t);
            let mut support = sample_indices(&mut rng, big_n, dims.k).into_vec();
            support.sort_unstable();
            let mut x0 = vec![0.0; big_n];
            for &i in &support {
                x0[i] = rng.random_range(0.0..1.0);
            }
            let mut upper = Vec::new();
            if kind == PlantedKind::KSimpleBox {
                for (i, x) in x0.iter_mut().enumerate() {
                    if support.binary_search(&i).is_err() && rng.random::<bool>() {
                        *x = 1.0;
                        upper.push(i);
                    }
                }
            }
            let b = a.matvec(&x0);
            let shape = match kind {
                PlantedKind::KSparseNonneg => Shape::Orthant,
                PlantedKind::KSimpleBox => Shape::Hypercube,
            };
            let certified = match nullspace_basis(&a) {
                Ok(basis) => {
                    let face = FaceSpec::new(shape, support, upper)?;
                    face_survives(&basis, &face, tol)?.status == SurvivalStatus::Survives
                }
                Err(Error::RankDeficient(_)) => false,
                Err(e) => return Err(e),
            };
            let recovered = match kind {
                PlantedKind::KSparseNonneg => {
                    let sol = min_l1_nonneg(&a, &b)?;
                    sol.is_optimal()
                        .then(|| sol.x.iter().zip(&x0).all(|(u, v)| (u - v).abs() <= RECOVERY_TOL))
                }
                PlantedKind::KSimpleBox => match box_ranges(&a, &b) {
                    Ok(ranges) => Some(ranges.iter().all(|(lo, hi)| hi - lo <= RECOVERY_TOL)),
                    Err(Error::Lp(_)) => None,
                    Err(e) => return Err(e),
                },
            };
            Ok(RecoveryOutcome { certified, recovered })
        })
        .collect::<Result<_>>()?;

    let mut report = RecoveryReport {
        dims,
        ensemble: ensemble.clone(),
        planted_kind: kind,
        trials,
        successes: 0,
        uniqueness_certified: 0,
        lp_failures: 0,
        certified_but_failed: 0,
    };
    for o in outcomes {
        report.uniqueness_certified += usize::from(o.certified);
        match o.recovered {
            Some(true) => report.successes += 1,
            Some(false) => report.certified_but_failed += usize::from(o.certified),
            None => report.lp_failures += 1,
        }
    }
    Ok(report)
}
