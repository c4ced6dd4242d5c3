//! Dense complex linear algebra and fixed-step integration.
//!
//! Everything here works on small matrices (at most a few dozen rows), so
//! the routines favour accuracy and reproducibility over speed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Hermiticity tolerance applied to inputs of [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative eigenvalue gap below which partial-fraction closed forms are
/// considered unreliable.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

const EXPM_MAX_TERMS: usize = 64;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_one(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// Maximum entry deviation of `U U†` from the identity.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    max_abs(&(m * m.adjoint() - ComplexMatrix::identity(n, n)))
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    unitarity_defect(m) <= tol
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == Complex64::ZERO {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    /// Real eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomp {
    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let diag = ComplexVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&e| c64(e, 0.0)),
        );
        &self.eigenvectors * ComplexMatrix::from_diagonal(&diag) * self.eigenvectors.adjoint()
    }

    /// `exp(-i H t) = V diag(exp(-i E t)) V†`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let phases = ComplexVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
        );
        &self.eigenvectors * ComplexMatrix::from_diagonal(&phases) * self.eigenvectors.adjoint()
    }

    pub fn relative_gap(&self) -> f64 {
        relative_gap(&self.eigenvalues)
    }
}

/// Smallest pairwise eigenvalue separation divided by the largest
/// eigenvalue modulus. Zero for an all-zero spectrum.
pub fn relative_gap(eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut gap = f64::INFINITY;
    for (i, a) in eigenvalues.iter().enumerate() {
        for b in &eigenvalues[i + 1..] {
            gap = gap.min((a - b).abs());
        }
    }
    gap / scale
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<SpectralDecomp> {
    if !m.is_square() {
        return Err(Error::validation(format!(
            "eigen-decomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::validation(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    let n = m.nrows();
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
    })
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2; the
/// series is summed until the last added term is below `1e-16` relative to
/// the partial sum, then squared back `s` times.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::validation(format!(
            "expm needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let norm = norm_one(m);
    if !norm.is_finite() {
        return Err(Error::validation("expm argument has non-finite entries"));
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m.scale(0.5_f64.powi(squarings));

    let mut sum = ComplexMatrix::identity(n, n);
    let mut term = ComplexMatrix::identity(n, n);
    for j in 1..=EXPM_MAX_TERMS {
        term = &term * &scaled;
        term.scale_mut(1.0 / j as f64);
        sum += &term;
        if norm_one(&term) < 1e-16 * norm_one(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Per-step invariant supervised by [`integrate_ode`].
///
/// `drift` returns the deviation of the monitored quantity at time `t`;
/// integration aborts once its magnitude exceeds `tolerance(t)`.
pub struct InvariantCheck<'a> {
    pub name: &'a str,
    pub drift: &'a dyn Fn(f64, &ComplexMatrix) -> f64,
    pub tolerance: &'a dyn Fn(f64) -> f64,
}

impl InvariantCheck<'_> {
    fn verify(&self, t: f64, y: &ComplexMatrix) -> Result<()> {
        let drift = (self.drift)(t, y);
        let tol = (self.tolerance)(t);
        if drift.abs() > tol || !drift.is_finite() {
            return Err(Error::Integration {
                time: t,
                reason: format!("{} drift {drift:.3e} exceeds {tol:.3e}", self.name),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub y: ComplexMatrix,
    pub steps: usize,
    pub dt: f64,
    /// Richardson estimate of the global error from a second run at `dt/2`.
    pub error_estimate: f64,
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<F>(rhs: &F, t: f64, y: &ComplexMatrix, h: f64) -> ComplexMatrix
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &(y + k1.scale(0.5 * h)));
    let k3 = rhs(t + 0.5 * h, &(y + k2.scale(0.5 * h)));
    let k4 = rhs(t + h, &(y + k3.scale(h)));
    y + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0)
}

fn step_count(span: f64, dt: f64) -> usize {
    if span <= 0.0 {
        0
    } else {
        ((span / dt) - 1e-9).ceil().max(1.0) as usize
    }
}

fn advance<F>(
    rhs: &F,
    y: &mut ComplexMatrix,
    t0: f64,
    t1: f64,
    dt: f64,
    invariant: Option<&InvariantCheck<'_>>,
) -> Result<usize>
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
{
    let n = step_count(t1 - t0, dt);
    if n == 0 {
        return Ok(0);
    }
    let h = (t1 - t0) / n as f64;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        *y = rk4_step(rhs, t, y, h);
        if let Some(check) = invariant {
            check.verify(t + h, y)?;
        }
    }
    Ok(n)
}

fn check_step(t_end: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation(format!("step size must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::validation(format!("end time must be non-negative, got {t_end}")));
    }
    Ok(())
}

/// Fixed-step RK4 from `0` to `t_end`.
///
/// The step is shrunk to `t_end / ceil(t_end / dt)` so the final time is hit
/// exactly. A second pass at half the step provides the error estimate.
pub fn integrate_ode<F>(
    rhs: F,
    y0: &ComplexMatrix,
    t_end: f64,
    dt: f64,
    invariant: Option<&InvariantCheck<'_>>,
) -> Result<OdeSolution>
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
{
    check_step(t_end, dt)?;
    let mut y = y0.clone();
    let steps = advance(&rhs, &mut y, 0.0, t_end, dt, invariant)?;
    let mut y_half = y0.clone();
    advance(&rhs, &mut y_half, 0.0, t_end, 0.5 * dt, None)?;
    let error_estimate = max_abs(&(&y - &y_half)) / 15.0;
    let used_dt = if steps == 0 { dt } else { t_end / steps as f64 };
    Ok(OdeSolution {
        y,
        steps,
        dt: used_dt,
        error_estimate,
    })
}

/// Fixed-step RK4 returning the state at each of `times` (non-decreasing,
/// starting at or after zero). Each interval between sample times is
/// subdivided uniformly with steps no larger than `dt`.
pub fn integrate_sampled<F>(
    rhs: F,
    y0: &ComplexMatrix,
    times: &[f64],
    dt: f64,
    invariant: Option<&InvariantCheck<'_>>,
) -> Result<Vec<ComplexMatrix>>
where
    F: Fn(f64, &ComplexMatrix) -> ComplexMatrix,
{
    let last = times.last().copied().unwrap_or(0.0);
    check_step(last, dt)?;
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0.clone();
    let mut t = 0.0;
    for &target in times {
        if target < t {
            return Err(Error::validation("sample times must be non-decreasing and non-negative"));
        }
        advance(&rhs, &mut y, t, target, dt, invariant)?;
        t = target;
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&a + a.adjoint()).scale(0.5)
    }

    /// Roots of the characteristic polynomial of a 3x3 Hermitian matrix by
    /// bisection between the Gershgorin bounds, using sign changes of
    /// det(xI - m) found on a fine scan.
    fn cubic_roots_by_bisection(m: &ComplexMatrix) -> Vec<f64> {
        // det(xI - m) = x^3 - tr x^2 + c1 x - det for Hermitian m (real coefficients)
        let tr = (m[(0, 0)] + m[(1, 1)] + m[(2, 2)]).re;
        let minor = |i: usize, j: usize| (m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)]).re;
        let c1 = minor(0, 1) + minor(0, 2) + minor(1, 2);
        let det = (m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]))
            .re;
        let p = |x: f64| ((x - tr) * x + c1) * x - det;
        let bound = (0..3)
            .map(|i| (0..3).map(|j| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
            + 1.0;
        let samples = 200_000;
        let mut roots = Vec::new();
        let mut prev_x = -bound;
        let mut prev = p(prev_x);
        for i in 1..=samples {
            let x = -bound + 2.0 * bound * i as f64 / samples as f64;
            let cur = p(x);
            if prev == 0.0 {
                roots.push(prev_x);
            } else if prev.signum() != cur.signum() && cur != 0.0 {
                let (mut lo, mut hi) = (prev_x, x);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if p(mid).signum() == p(lo).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev = cur;
        }
        roots
    }

    #[test]
    fn identity_eigenvalues() {
        let d = eig_hermitian(&ComplexMatrix::identity(3, 3)).unwrap();
        for e in &d.eigenvalues {
            assert!((e - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let (w1, w2, k) = (1.3, 0.7, 0.25);
        let diag = [2.0 * w1 * (1.0 + k), w1 + w2, 2.0 * w2 * (1.0 + k)];
        let m = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(3, diag.iter().map(|&x| c64(x, 0.0))));
        let d = eig_hermitian(&m).unwrap();
        let mut expected = diag.to_vec();
        expected.sort_by(f64::total_cmp);
        for (a, b) in d.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn random_hermitian_matches_bisection_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let m = random_hermitian(&mut rng, 3);
            let d = eig_hermitian(&m).unwrap();
            let roots = cubic_roots_by_bisection(&m);
            assert_eq!(roots.len(), 3);
            for (a, b) in d.eigenvalues.iter().zip(&roots) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn eig_reconstruction_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 6, 12] {
            let m = random_hermitian(&mut rng, n);
            let d = eig_hermitian(&m).unwrap();
            let scale = max_abs(&m);
            assert!(max_abs(&(d.reconstruct() - &m)) < 1e-9 * scale);
            assert!(unitarity_defect(&d.eigenvectors) < 1e-10);
            for (i, e) in d.eigenvalues.iter().enumerate() {
                let v = d.eigenvectors.column(i);
                let residual = &m * v - v * c64(*e, 0.0);
                assert!(residual.iter().all(|z| z.norm() < 1e-10 * scale.max(1.0)));
            }
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = ComplexMatrix::identity(2, 2);
        m[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(eig_hermitian(&m), Err(Error::Validation(_))));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(eig_hermitian(&rect).is_err());
    }

    #[test]
    fn relative_gap_metric() {
        assert_eq!(relative_gap(&[0.0, 0.0]), 0.0);
        assert!((relative_gap(&[1.0, 2.0, 4.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn expm_zero_is_identity() {
        let e = expm(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert!(max_abs(&(e - ComplexMatrix::identity(4, 4))) == 0.0);
    }

    #[test]
    fn expm_diagonal() {
        let l1 = c64(0.3, -1.2);
        let l2 = c64(-2.0, 5.0);
        let m = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![l1, l2]));
        let e = expm(&m).unwrap();
        assert!((e[(0, 0)] - l1.exp()).norm() < 1e-13);
        assert!((e[(1, 1)] - l2.exp()).norm() < 1e-13 * l2.exp().norm());
        assert!(e[(0, 1)].norm() < 1e-15 && e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn expm_rejects_rectangular() {
        assert!(expm(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn expm_of_antihermitian_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3, 6, 29] {
            let h = random_hermitian(&mut rng, n);
            for t in [0.0, 0.1, 1.0, 10.0, 100.0, 1000.0] {
                let u = expm(&h.scale(t).map(|z| z * c64(0.0, -1.0))).unwrap();
                assert!(unitarity_defect(&u) < 1e-10, "n={n} t={t}: {}", unitarity_defect(&u));
            }
        }
    }

    #[test]
    fn expm_agrees_with_spectral_propagator() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 6);
        let d = eig_hermitian(&h).unwrap();
        for t in [0.5, 7.0, 300.0] {
            let u = expm(&h.map(|z| z * c64(0.0, -t))).unwrap();
            assert!(max_abs(&(u - d.propagator(t))) < 1e-10);
        }
    }

    #[test]
    fn kron_shape_and_entries() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0), c64(4.0, 0.0)]);
        let b = ComplexMatrix::identity(2, 2);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(0, 2)], c64(2.0, 0.0));
        assert_eq!(k[(3, 1)], c64(3.0, 0.0));
        assert_eq!(k[(1, 2)], Complex64::ZERO);
    }

    #[test]
    fn zero_rhs_returns_initial_value() {
        let y0 = ComplexMatrix::from_fn(2, 2, |i, j| c64(i as f64, j as f64));
        let sol = integrate_ode(|_, y| ComplexMatrix::zeros(y.nrows(), y.ncols()), &y0, 3.0, 0.1, None).unwrap();
        assert_eq!(sol.y, y0);
    }

    #[test]
    fn scalar_exponential_decay() {
        let gamma = 0.7;
        let y0 = ComplexMatrix::from_element(1, 1, c64(1.0, 0.0));
        let sol = integrate_ode(|_, y| y.scale(-gamma), &y0, 1.0, 1e-3, None).unwrap();
        assert_eq!(sol.steps, 1000);
        assert!((sol.y[(0, 0)].re - (-gamma).exp()).abs() < 1e-8);
        assert!(sol.error_estimate < 1e-12);
    }

    #[test]
    fn fourth_order_convergence() {
        let rhs = |t: f64, y: &ComplexMatrix| y.map(|z| z * c64(0.0, -2.0) + c64(t.cos(), 0.0) * 0.3);
        let y0 = ComplexMatrix::from_element(1, 1, c64(1.0, 0.0));
        let reference = integrate_ode(rhs, &y0, 5.0, 1e-4, None).unwrap().y;
        let coarse = integrate_ode(rhs, &y0, 5.0, 0.1, None).unwrap().y;
        let fine = integrate_ode(rhs, &y0, 5.0, 0.05, None).unwrap().y;
        let e1 = max_abs(&(coarse - &reference));
        let e2 = max_abs(&(fine - &reference));
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn invariant_violation_reports_time() {
        let y0 = ComplexMatrix::from_element(1, 1, c64(1.0, 0.0));
        let drift = |_: f64, y: &ComplexMatrix| y[(0, 0)].re - 1.0;
        let tol = |_: f64| 1e-3;
        let check = InvariantCheck { name: "value", drift: &drift, tolerance: &tol };
        let err = integrate_ode(|_, y| y.scale(-1.0), &y0, 1.0, 0.01, Some(&check)).unwrap_err();
        match err {
            Error::Integration { time, .. } => assert!(time > 0.0 && time < 0.01 + 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sampled_integration_hits_sample_times() {
        let y0 = ComplexMatrix::from_element(1, 1, c64(1.0, 0.0));
        let times = [0.0, 0.25, 1.0, 1.0, 2.5];
        let ys = integrate_sampled(|_, y| y.scale(-1.0), &y0, &times, 0.01, None).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[(0, 0)].re - (-t).exp()).abs() < 1e-10);
        }
        assert!(integrate_sampled(|_, y| y.clone(), &y0, &[1.0, 0.5], 0.1, None).is_err());
        assert!(integrate_ode(|_, y| y.clone(), &y0, 1.0, 0.0, None).is_err());
    }
}
