//! Null-space bases and the face-survival oracle.
//!
//! For an `n x N` matrix `A` with null basis `B` (rows orthonormal, shape
//! `(N-n) x N`), write `beta_i` for column `i` of `B`. A face of the orthant
//! with free coordinates `S` is lost under `A` exactly when some nonzero `c`
//! satisfies `beta_i . c >= 0` for every `i` outside `S`. Hypercube faces
//! reduce to the same test after negating `beta_i` on the coordinates pinned
//! at one, and simplex faces add the equality `(B 1) . c = 0`.
//!
//! The test is decided by the max-margin program
//!
//! ```text
//! maximize t  subject to  beta_i . c >= t,  g . c = 0,  ||c||_inf = 1
//! ```
//!
//! whose optimum is positive when the face is lost and negative when it
//! survives.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{binomial, build_partial_fourier, trial_rng, Combinations};
use crate::linalg::{singular_values, HouseholderQr};
use crate::lp::{solve, LinearProgram, LpSolution, LpStatus, FEAS_TOL};
use crate::{Error, Matrix, Result, Shape};

/// Default margin tolerance for survival verdicts.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Relative singular-value floor below which `A` is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Largest residual accepted for a null basis.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Largest number of faces [`count_faces_exhaustive`] will enumerate.
pub const FACE_BUDGET: u128 = 1_000_000;
/// Entries above `-ZERO_TOL` count as nonnegative in sign tallies.
pub const ZERO_TOL: f64 = 1e-12;
const FAILING_CAP: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NullBasis {
    /// `(N - n) x N`, orthonormal rows.
    pub b: Matrix,
    /// `max |A B'|` divided by `max |A|`.
    pub residual: f64,
    pub rank_certified: bool,
}

impl NullBasis {
    /// Dimension of the null space.
    pub fn dim(&self) -> usize {
        self.b.rows()
    }

    /// Number of columns of the projected matrix.
    pub fn ambient(&self) -> usize {
        self.b.cols()
    }

    /// Column `i` of the basis matrix.
    pub fn beta(&self, i: usize) -> Vec<f64> {
        self.b.column(i)
    }

    /// Basis of the null space of `A D`, where `D` negates the columns in `cols`.
    pub fn with_negated_columns(&self, cols: &[usize]) -> NullBasis {
        let mut b = self.b.clone();
        for &j in cols {
            for i in 0..b.rows() {
                b.set(i, j, -b.get(i, j));
            }
        }
        NullBasis { b, ..self.clone() }
    }

    /// Basis of the null space of `A P`, where column `j` of `A P` is column `perm[j]` of `A`.
    pub fn with_permuted_columns(&self, perm: &[usize]) -> NullBasis {
        NullBasis {
            b: self.b.select_columns(perm),
            ..self.clone()
        }
    }
}

/// Orthonormal basis of the null space of a full-row-rank `A`, taken from
/// the trailing columns of the Householder factor of `A'`.
pub fn nullspace_basis(a: &Matrix) -> Result<NullBasis> {
    let (n, big_n) = (a.rows(), a.cols());
    if n >= big_n {
        return Err(Error::InvalidDimensions(format!("need n < N, got {n}x{big_n}")));
    }
    if n > 0 {
        let s = singular_values(a);
        let ratio = if s[0] > 0.0 { s[n - 1] / s[0] } else { 0.0 };
        if ratio <= RANK_TOL {
            return Err(Error::RankDeficient(ratio));
        }
    }
    let qr = HouseholderQr::new(&a.transpose());
    let mut b = Matrix::zeros(big_n - n, big_n);
    for r in 0..big_n - n {
        for (j, v) in qr.q_column(n + r).into_iter().enumerate() {
            b.set(r, j, v);
        }
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let residual = if n == 0 {
        0.0
    } else {
        a.matmul(&b.transpose()).max_abs() / scale
    };
    let gram = b.matmul(&b.transpose());
    let orthonormal = (0..b.rows())
        .all(|i| (0..b.rows()).all(|j| (gram.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs() <= RANK_TOL));
    Ok(NullBasis {
        b,
        residual,
        rank_certified: orthonormal && residual <= RESIDUAL_TOL,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Margin {
    /// Optimal margin; `-inf` when only `c = 0` satisfies the equalities.
    pub t_star: f64,
    /// An optimiser with `||c||_inf = 1`, when one exists.
    pub direction: Option<Vec<f64>>,
}

fn margin_lp(points: &[Vec<f64>], equalities: &[Vec<f64>], fixed: Option<(usize, f64)>) -> LpSolution {
    let m = points[0].len();
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let mut lp = LinearProgram::new(objective);
    for p in points {
        let mut row = p.clone();
        row.push(-1.0);
        lp.add_ge(&row, 0.0);
    }
    for g in equalities {
        let mut row = g.clone();
        row.push(0.0);
        lp.add_eq(&row, 0.0);
    }
    for j in 0..m {
        lp.set_bounds(j, -1.0, 1.0);
    }
    lp.set_bounds(m, f64::NEG_INFINITY, f64::INFINITY);
    if let Some((j, v)) = fixed {
        lp.set_bounds(j, v, v);
    }
    solve(&lp)
}

/// Largest `t` such that some `c` with `||c||_inf = 1` has `p . c >= t` for
/// every point and `g . c = 0` for every equality vector.
pub fn max_margin_direction(points: &[Vec<f64>], equalities: &[Vec<f64>]) -> Result<Margin> {
    let m = match points.first() {
        Some(p) if !p.is_empty() => p.len(),
        _ => {
            return Err(Error::InvalidArgument(
                "max-margin problem needs a nonempty point set".into(),
            ))
        }
    };
    if points.iter().chain(equalities).any(|p| p.len() != m) {
        return Err(Error::InvalidDimensions("all vectors must have the same length".into()));
    }
    // Over the cube the optimum is at least 0 (take c = 0); when it is
    // positive the optimiser already sits on the sphere.
    let cube = margin_lp(points, equalities, None);
    if !cube.is_optimal() {
        return Err(Error::Lp(cube.status));
    }
    if cube.objective_value > FEAS_TOL {
        return Ok(Margin {
            t_star: cube.objective_value,
            direction: Some(cube.x[..m].to_vec()),
        });
    }
    let mut best = Margin {
        t_star: f64::NEG_INFINITY,
        direction: None,
    };
    for j in 0..m {
        for s in [1.0, -1.0] {
            let sol = margin_lp(points, equalities, Some((j, s)));
            match sol.status {
                LpStatus::Optimal => {
                    if sol.objective_value > best.t_star {
                        best = Margin {
                            t_star: sol.objective_value,
                            direction: Some(sol.x[..m].to_vec()),
                        };
                    }
                }
                LpStatus::Infeasible => {}
                other => return Err(Error::Lp(other)),
            }
        }
    }
    Ok(best)
}

/// A face of the orthant, hypercube or simplex. Indices are 0-based.
///
/// `support` holds the free coordinates. For the hypercube, `upper` holds
/// the coordinates pinned at one; the remaining coordinates are pinned at
/// zero. A simplex support of size `k` names a `(k-1)`-face.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaceSpec {
    pub shape: Shape,
    pub support: Vec<usize>,
    #[serde(default)]
    pub upper: Vec<usize>,
}

impl FaceSpec {
    pub fn new(shape: Shape, mut support: Vec<usize>, mut upper: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        upper.sort_unstable();
        upper.dedup();
        if shape != Shape::Hypercube && !upper.is_empty() {
            return Err(Error::InvalidArgument(format!("{shape} faces have no upper set")));
        }
        if shape == Shape::Simplex && support.is_empty() {
            return Err(Error::InvalidArgument("simplex faces need a nonempty support".into()));
        }
        if upper.iter().any(|i| support.binary_search(i).is_ok()) {
            return Err(Error::InvalidArgument("upper set must avoid the support".into()));
        }
        Ok(FaceSpec { shape, support, upper })
    }

    /// Face dimension of the generator face.
    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Simplex => self.support.len() - 1,
            _ => self.support.len(),
        }
    }

    fn check(&self, big_n: usize) -> Result<()> {
        if self.support.iter().chain(&self.upper).any(|&i| i >= big_n) {
            return Err(Error::InvalidArgument(format!(
                "face index out of range for N = {big_n}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurvivalStatus {
    Survives,
    Lost,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivalVerdict {
    pub status: SurvivalStatus,
    pub margin: f64,
    pub witness: Option<Vec<f64>>,
}

/// The points and equalities of the max-margin problem for `face`.
fn face_constraints(basis: &NullBasis, face: &FaceSpec) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let big_n = basis.ambient();
    let mut in_support = vec![false; big_n];
    for &i in &face.support {
        in_support[i] = true;
    }
    let mut negate = vec![false; big_n];
    for &i in &face.upper {
        negate[i] = true;
    }
    let points = (0..big_n)
        .filter(|&i| !in_support[i])
        .map(|i| {
            let mut beta = basis.beta(i);
            if negate[i] {
                beta.iter_mut().for_each(|v| *v = -*v);
            }
            beta
        })
        .collect();
    let equalities = if face.shape == Shape::Simplex {
        let ones = vec![1.0; big_n];
        vec![basis.b.matvec(&ones)]
    } else {
        Vec::new()
    };
    (points, equalities)
}

/// Lost if the margin exceeds `tol`, survives if it is below `-tol`,
/// indeterminate otherwise or when a linear program fails.
pub fn face_survives(basis: &NullBasis, face: &FaceSpec, tol: f64) -> Result<SurvivalVerdict> {
    face.check(basis.ambient())?;
    if basis.dim() == 0 {
        // A is injective: every face survives
        return Ok(SurvivalVerdict {
            status: SurvivalStatus::Survives,
            margin: f64::NEG_INFINITY,
            witness: None,
        });
    }
    let (points, equalities) = face_constraints(basis, face);
    if points.is_empty() {
        // the whole body is the face; nothing can be lost
        return Ok(SurvivalVerdict {
            status: SurvivalStatus::Survives,
            margin: f64::NEG_INFINITY,
            witness: None,
        });
    }
    Ok(match max_margin_direction(&points, &equalities) {
        Ok(Margin { t_star, direction }) => {
            let status = if t_star > tol {
                SurvivalStatus::Lost
            } else if t_star < -tol {
                SurvivalStatus::Survives
            } else {
                SurvivalStatus::Indeterminate
            };
            SurvivalVerdict {
                status,
                margin: t_star,
                witness: direction,
            }
        }
        Err(Error::Lp(_)) => SurvivalVerdict {
            status: SurvivalStatus::Indeterminate,
            margin: f64::NAN,
            witness: None,
        },
        Err(e) => return Err(e),
    })
}

/// The hypercube vertex pinned at one exactly where the first basis row is
/// nonpositive. The first basis row is then a strict witness, so the vertex
/// cannot survive.
pub fn lost_vertex(basis: &NullBasis) -> Result<FaceSpec> {
    if basis.dim() == 0 {
        return Err(Error::InvalidArgument(
            "lost vertex needs a nontrivial null space".into(),
        ));
    }
    let w = basis.b.row(0);
    if w.iter().all(|v| v.abs() <= ZERO_TOL) {
        return Err(Error::InvalidArgument("first basis row is numerically zero".into()));
    }
    let upper = (0..w.len()).filter(|&i| w[i] <= 0.0).collect();
    FaceSpec::new(Shape::Hypercube, Vec::new(), upper)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceCount {
    pub total: u64,
    pub survived: u64,
    pub lost: u64,
    pub indeterminate: u64,
    /// Lost or indeterminate faces, at most 256 of them, in enumeration order.
    pub failing: Vec<FaceSpec>,
}

/// Number of `k`-faces of the generator body on `big_n` coordinates.
/// For the simplex, `k` is the support size.
pub fn face_total(shape: Shape, big_n: usize, k: usize) -> u128 {
    let choose = binomial(big_n, k);
    match shape {
        Shape::Hypercube => {
            if big_n - k.min(big_n) >= 128 {
                u128::MAX
            } else {
                choose.saturating_mul(1u128 << (big_n - k.min(big_n)))
            }
        }
        _ => choose,
    }
}

/// Every face with `k` free coordinates (for the simplex: support size `k`).
pub fn enumerate_faces(shape: Shape, big_n: usize, k: usize) -> Result<Vec<FaceSpec>> {
    if k > big_n || (shape == Shape::Simplex && k == 0) {
        return Err(Error::InvalidArgument(format!(
            "no {shape} faces with support size {k} in N = {big_n}"
        )));
    }
    let total = face_total(shape, big_n, k);
    if total > FACE_BUDGET {
        return Err(Error::BudgetExceeded {
            faces: total,
            budget: FACE_BUDGET,
        });
    }
    let mut faces = Vec::with_capacity(total as usize);
    for support in Combinations::new(big_n, k) {
        if shape == Shape::Hypercube {
            let rest: Vec<usize> = (0..big_n).filter(|i| support.binary_search(i).is_err()).collect();
            for mask in 0u64..(1u64 << rest.len()) {
                let upper = rest
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                faces.push(FaceSpec {
                    shape,
                    support: support.clone(),
                    upper,
                });
            }
        } else {
            faces.push(FaceSpec {
                shape,
                support,
                upper: Vec::new(),
            });
        }
    }
    Ok(faces)
}

/// Runs [`face_survives`] on every face with `k` free coordinates.
pub fn count_faces_exhaustive(basis: &NullBasis, shape: Shape, k: usize, tol: f64) -> Result<FaceCount> {
    let faces = enumerate_faces(shape, basis.ambient(), k)?;
    let verdicts: Vec<SurvivalStatus> = faces
        .par_iter()
        .map(|f| face_survives(basis, f, tol).map(|v| v.status))
        .collect::<Result<_>>()?;
    let mut count = FaceCount {
        total: faces.len() as u64,
        survived: 0,
        lost: 0,
        indeterminate: 0,
        failing: Vec::new(),
    };
    for (face, status) in faces.into_iter().zip(verdicts) {
        match status {
            SurvivalStatus::Survives => count.survived += 1,
            SurvivalStatus::Lost => count.lost += 1,
            SurvivalStatus::Indeterminate => count.indeterminate += 1,
        }
        if status != SurvivalStatus::Survives && count.failing.len() < FAILING_CAP {
            count.failing.push(face);
        }
    }
    Ok(count)
}

/// Draws `samples` Gaussian combinations of a null basis of the `n x N`
/// partial Fourier matrix and checks each has at least `(n-1)/2` entries
/// below `-ZERO_TOL`.
pub fn highpass_negativity_check(n: usize, big_n: usize, samples: usize, seed: u64) -> Result<bool> {
    Ok(highpass_min_negatives(n, big_n, samples, seed)? >= (n - 1) / 2)
}

/// Fewest negative entries seen over the samples of [`highpass_negativity_check`].
pub fn highpass_min_negatives(n: usize, big_n: usize, samples: usize, seed: u64) -> Result<usize> {
    let omega = build_partial_fourier(n, big_n)?;
    let basis = nullspace_basis(&omega)?;
    let bt = basis.b.transpose();
    let mut fewest = big_n;
    for s in 0..samples {
        let mut rng = trial_rng(seed, s as u64);
        let g: Vec<f64> = (0..basis.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let v = bt.matvec(&g);
        let negatives = v.iter().filter(|&&x| x < -ZERO_TOL).count();
        fewest = fewest.min(negatives);
    }
    Ok(fewest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{adjoin_ones, sample_matrix, EnsembleKind, EnsembleSpec};
    use crate::linalg::dot;
    use crate::probcalc::wendel_probability;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn min_product(points: &[Vec<f64>], c: &[f64]) -> f64 {
        points.iter().map(|p| dot(p, c)).fold(f64::INFINITY, f64::min)
    }

    fn gaussian(rows: usize, cols: usize, seed: u64, trial: u64) -> Matrix {
        let spec = EnsembleSpec::new(EnsembleKind::GaussianIid, rows, cols, seed).unwrap();
        sample_matrix(&spec, trial).unwrap()
    }

    fn orthant(support: &[usize]) -> FaceSpec {
        FaceSpec::new(Shape::Orthant, support.to_vec(), Vec::new()).unwrap()
    }

    #[test]
    fn null_basis_of_coordinate_projector() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let nb = nullspace_basis(&a).unwrap();
        assert_eq!((nb.b.rows(), nb.b.cols()), (1, 3));
        assert!(nb.b.get(0, 0).abs() < 1e-15 && nb.b.get(0, 1).abs() < 1e-15);
        assert!((nb.b.get(0, 2).abs() - 1.0).abs() < 1e-15);
        assert!(nb.rank_certified);
    }

    #[test]
    fn null_basis_of_gaussian_draw() {
        let a = gaussian(4, 8, 1, 0);
        let nb = nullspace_basis(&a).unwrap();
        assert!(nb.residual <= 1e-12);
        assert_eq!((nb.b.rows(), nb.b.cols()), (4, 8));
        let g = nb.b.matmul(&nb.b.transpose());
        for i in 0..4 {
            for j in 0..4 {
                assert!((g.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert_eq!(nullspace_basis(&a).unwrap(), nb);
    }

    #[test]
    fn null_basis_rejects_repeated_rows() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(nullspace_basis(&a), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn margin_examples() {
        let q = max_margin_direction(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[]).unwrap();
        assert!((q.t_star - 1.0).abs() < 1e-12);
        let c = q.direction.unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] - 1.0).abs() < 1e-12);

        let cross = [vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let r = max_margin_direction(&cross, &[]).unwrap();
        assert!(r.t_star < 0.0);
        assert!((r.t_star + 1.0).abs() < 1e-12);

        let flat = max_margin_direction(&[vec![1.0, 0.0]], &[vec![1.0, 0.0]]).unwrap();
        assert!(flat.t_star.abs() < 1e-12);

        let none = max_margin_direction(&[vec![1.0]], &[vec![1.0]]).unwrap();
        assert_eq!(none.t_star, f64::NEG_INFINITY);
        assert!(max_margin_direction(&[], &[]).is_err());
    }

    #[test]
    fn survival_examples_on_coordinate_projector() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let nb = nullspace_basis(&a).unwrap();
        // make the basis vector +e3 so the witness direction is +1
        let nb = if nb.b.get(0, 2) < 0.0 {
            nb.with_negated_columns(&[0, 1, 2])
        } else {
            nb
        };
        let v = face_survives(&nb, &orthant(&[0, 1]), DEFAULT_TOL).unwrap();
        assert_eq!(v.status, SurvivalStatus::Lost);
        assert!((v.margin - 1.0).abs() < 1e-12);
        let v = face_survives(&nb, &orthant(&[2]), DEFAULT_TOL).unwrap();
        assert_eq!(v.status, SurvivalStatus::Indeterminate);
        assert!(v.margin.abs() < 1e-12);
    }

    #[test]
    fn lost_witness_satisfies_constraints() {
        for trial in 0..20 {
            let nb = nullspace_basis(&gaussian(4, 8, 3, trial)).unwrap();
            let face = orthant(&[0, 1]);
            let v = face_survives(&nb, &face, DEFAULT_TOL).unwrap();
            if v.status == SurvivalStatus::Lost {
                let (points, _) = face_constraints(&nb, &face);
                let c = v.witness.unwrap();
                assert!(min_product(&points, &c) >= v.margin * (1.0 - 1e-6));
                assert!((c.iter().fold(0.0f64, |m, x| m.max(x.abs())) - 1.0).abs() < 1e-9);
            } else {
                assert_eq!(v.status, SurvivalStatus::Survives);
            }
        }
    }

    #[test]
    fn lost_vertex_examples() {
        let nb = NullBasis {
            b: Matrix::from_rows(&[vec![1.0, -1.0, 1.0]]).unwrap(),
            residual: 0.0,
            rank_certified: true,
        };
        assert_eq!(lost_vertex(&nb).unwrap().upper, vec![1]);
        let nb = NullBasis {
            b: Matrix::from_rows(&[vec![1.0, 0.0, 1.0]]).unwrap(),
            residual: 0.0,
            rank_certified: true,
        };
        assert_eq!(lost_vertex(&nb).unwrap().upper, vec![1]);
        for trial in 0..20 {
            let nb = nullspace_basis(&gaussian(6, 10, 5, trial)).unwrap();
            let v = face_survives(&nb, &lost_vertex(&nb).unwrap(), DEFAULT_TOL).unwrap();
            assert_eq!(v.status, SurvivalStatus::Lost);
        }
    }

    #[test]
    fn face_spec_validation_and_json() {
        assert!(FaceSpec::new(Shape::Orthant, vec![0], vec![1]).is_err());
        assert!(FaceSpec::new(Shape::Hypercube, vec![0], vec![0]).is_err());
        assert!(FaceSpec::new(Shape::Simplex, vec![], vec![]).is_err());
        let f = FaceSpec::new(Shape::Hypercube, vec![2, 0], vec![3]).unwrap();
        assert_eq!(f.support, vec![0, 2]);
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"shape":"Hypercube","support":[0,2],"upper":[3]}"#);
        let back: FaceSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn face_totals() {
        assert_eq!(face_total(Shape::Orthant, 8, 2), 28);
        assert_eq!(face_total(Shape::Hypercube, 3, 1), 12);
        assert_eq!(enumerate_faces(Shape::Hypercube, 3, 0).unwrap().len(), 8);
        assert_eq!(enumerate_faces(Shape::Simplex, 5, 2).unwrap().len(), 10);
        assert!(matches!(
            enumerate_faces(Shape::Hypercube, 30, 2),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn fourier_low_faces_all_survive() {
        let nb = nullspace_basis(&build_partial_fourier(5, 11).unwrap()).unwrap();
        for (k, total) in [(1, 11), (2, 55)] {
            let c = count_faces_exhaustive(&nb, Shape::Orthant, k, DEFAULT_TOL).unwrap();
            assert_eq!((c.total, c.survived, c.indeterminate), (total, total, 0), "k={k}");
        }
    }

    #[test]
    fn hypercube_always_loses_a_vertex() {
        for trial in 0..3 {
            let nb = nullspace_basis(&gaussian(3, 7, 11, trial)).unwrap();
            let c = count_faces_exhaustive(&nb, Shape::Hypercube, 0, DEFAULT_TOL).unwrap();
            assert!(c.survived < 128 && c.lost > 0);
        }
    }

    #[test]
    fn top_dimensional_orthant_faces_are_all_lost() {
        let nb = nullspace_basis(&gaussian(4, 8, 2, 0)).unwrap();
        let c = count_faces_exhaustive(&nb, Shape::Orthant, 4, DEFAULT_TOL).unwrap();
        assert_eq!((c.total, c.survived, c.lost), (70, 0, 70));
    }

    #[test]
    fn highpass_examples() {
        assert!(highpass_negativity_check(5, 11, 1000, 3).unwrap());
        assert!(highpass_negativity_check(1, 4, 10, 3).unwrap());
        assert!(highpass_min_negatives(7, 15, 200, 1).unwrap() >= 3);
    }

    /// Sign vectors `sign(B' c)` over all nonzero `c` in `R^3`, from the
    /// arrangement of the planes `beta_i . c = 0`.
    fn arrangement_sign_vectors(betas: &[Vec<f64>]) -> Vec<Vec<i8>> {
        fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        }
        fn solve3(rows: [[f64; 3]; 3], rhs: [f64; 3]) -> [f64; 3] {
            let m = nalgebra::Matrix3::from_fn(|i, j| rows[i][j]);
            let x = m.lu().solve(&nalgebra::Vector3::from(rhs)).unwrap();
            [x[0], x[1], x[2]]
        }
        let sign = |v: f64| {
            if v > 1e-12 {
                1
            } else if v < -1e-12 {
                -1
            } else {
                0
            }
        };
        let mut out = Vec::new();
        for i in 0..betas.len() {
            for j in i + 1..betas.len() {
                let v0 = cross(&betas[i], &betas[j]);
                for s in [1.0, -1.0] {
                    let v = v0.map(|x| s * x);
                    let rows = [
                        [betas[i][0], betas[i][1], betas[i][2]],
                        [betas[j][0], betas[j][1], betas[j][2]],
                        v,
                    ];
                    let p = solve3(rows, [1.0, 0.0, 0.0]);
                    let q = solve3(rows, [0.0, 1.0, 0.0]);
                    let scale = 1e-6 * (dot(&v, &v)).sqrt();
                    for (a, b) in [
                        (0.0, 0.0),
                        (1.0, 0.0),
                        (-1.0, 0.0),
                        (0.0, 1.0),
                        (0.0, -1.0),
                        (1.0, 1.0),
                        (1.0, -1.0),
                        (-1.0, 1.0),
                        (-1.0, -1.0),
                    ] {
                        let c: Vec<f64> = (0..3).map(|d| v[d] + scale * (a * p[d] + b * q[d])).collect();
                        out.push(betas.iter().map(|beta| sign(dot(beta, &c))).collect());
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn sign_pattern_oracle_on_all_column_flips() {
        let generator = gaussian(3, 6, 99, 0);
        for k in 0..=3usize {
            let p = wendel_probability(3, 6 - k).unwrap().exact.unwrap();
            let expect = ((num_rational::BigRational::from_integer(64.into()))
                * (num_rational::BigRational::from_integer(1.into()) - p))
                .to_integer()
                .to_u64()
                .unwrap();
            for support in Combinations::new(6, k) {
                let mut survived = 0;
                for flips in 0u32..64 {
                    let a = Matrix::from_fn(3, 6, |i, j| {
                        if flips >> j & 1 == 1 {
                            -generator.get(i, j)
                        } else {
                            generator.get(i, j)
                        }
                    });
                    let nb = nullspace_basis(&a).unwrap();
                    let face = orthant(&support);
                    let v = face_survives(&nb, &face, DEFAULT_TOL).unwrap();
                    let betas: Vec<Vec<f64>> = (0..6).map(|i| nb.beta(i)).collect();
                    let lost_by_oracle = arrangement_sign_vectors(&betas)
                        .iter()
                        .any(|s| s.iter().any(|&x| x != 0) && (0..6).all(|i| support.contains(&i) || s[i] >= 0));
                    let lost_by_lp = match v.status {
                        SurvivalStatus::Lost => true,
                        SurvivalStatus::Survives => false,
                        SurvivalStatus::Indeterminate => panic!("indeterminate verdict"),
                    };
                    assert_eq!(lost_by_lp, lost_by_oracle, "k={k} S={support:?} flips={flips}");
                    survived += u64::from(!lost_by_lp);
                }
                assert_eq!(survived, expect, "k={k} S={support:?}");
            }
        }
    }

    #[test]
    fn simplex_faces_match_orthant_faces_of_the_augmented_matrix() {
        for trial in 0..3 {
            let a = gaussian(4, 9, 21, trial);
            let plain = nullspace_basis(&a).unwrap();
            let augmented = nullspace_basis(&adjoin_ones(&a)).unwrap();
            for k in 1..=4 {
                for support in Combinations::new(9, k) {
                    let s = face_survives(
                        &plain,
                        &FaceSpec::new(Shape::Simplex, support.clone(), vec![]).unwrap(),
                        DEFAULT_TOL,
                    )
                    .unwrap();
                    let o = face_survives(&augmented, &orthant(&support), DEFAULT_TOL).unwrap();
                    assert_eq!(s.status, o.status, "trial={trial} S={support:?}");
                }
            }
        }
    }

    fn hypercube_face() -> impl Strategy<Value = (u64, Vec<usize>, Vec<usize>)> {
        (
            0u64..1000,
            proptest::sample::subsequence((0..8).collect::<Vec<_>>(), 0..=4),
        )
            .prop_flat_map(|(seed, support)| {
                let rest: Vec<usize> = (0..8).filter(|i| !support.contains(i)).collect();
                let len = rest.len();
                (Just(seed), Just(support), proptest::sample::subsequence(rest, 0..=len))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sign_flip_reduction((seed, support, upper) in hypercube_face()) {
            let nb = nullspace_basis(&gaussian(4, 8, seed, 0)).unwrap();
            let face = FaceSpec::new(Shape::Hypercube, support.clone(), upper.clone()).unwrap();
            let flipped = nb.with_negated_columns(&upper);
            let lower = FaceSpec::new(Shape::Hypercube, support, vec![]).unwrap();
            let a = face_survives(&nb, &face, DEFAULT_TOL).unwrap();
            let b = face_survives(&flipped, &lower, DEFAULT_TOL).unwrap();
            prop_assert_eq!(a.status, b.status);
            prop_assert!((a.margin - b.margin).abs() <= 1e-9 || a.margin == b.margin);
        }

        #[test]
        fn column_permutation_equivariance(seed in 0u64..1000, perm in Just((0..8).collect::<Vec<usize>>()).prop_shuffle(), k in 0usize..=4) {
            let nb = nullspace_basis(&gaussian(4, 8, seed, 1)).unwrap();
            let support: Vec<usize> = (0..k).collect();
            let v = face_survives(&nb, &orthant(&support), DEFAULT_TOL).unwrap();
            // column j of the permuted basis is column perm[j] of the original
            let permuted = nb.with_permuted_columns(&perm);
            let moved: Vec<usize> = support.iter().map(|&i| perm.iter().position(|&p| p == i).unwrap()).collect();
            let w = face_survives(&permuted, &orthant(&moved), DEFAULT_TOL).unwrap();
            prop_assert_eq!(v.status, w.status);
        }

        #[test]
        fn orthant_and_lower_hypercube_faces_agree(seed in 0u64..1000, k in 0usize..=4) {
            let nb = nullspace_basis(&gaussian(4, 8, seed, 2)).unwrap();
            let support: Vec<usize> = (0..k).collect();
            let o = face_survives(&nb, &orthant(&support), DEFAULT_TOL).unwrap();
            let h = face_survives(&nb, &FaceSpec::new(Shape::Hypercube, support, vec![]).unwrap(), DEFAULT_TOL).unwrap();
            prop_assert_eq!(o.status, h.status);
            prop_assert!(o.margin == h.margin);
        }

        #[test]
        fn verdicts_are_deterministic(seed in 0u64..1000) {
            let nb = nullspace_basis(&gaussian(4, 8, seed, 3)).unwrap();
            let face = orthant(&[1, 5]);
            prop_assert_eq!(face_survives(&nb, &face, DEFAULT_TOL).unwrap(), face_survives(&nb, &face, DEFAULT_TOL).unwrap());
        }
    }
}
