// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change point detection on top of the path: stopping, the staircase
//! correction, conversion to primal locations and the final refit.

use crate::linop::DifferenceOperator;
use crate::path::{EventKind, PathConfig, PathEvent, PathSolver, PathState};
use crate::scalar::{sign_of, Scalar};
use crate::stopping::{estimate_sigma_mad, should_stop, NoiseScale, StoppingConfig};
use crate::{PrutfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Plain path search.
    Prutf,
    /// Path search with staircase sign zeroing.
    Mprutf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    pub stopping: StoppingConfig,
    pub method: Method,
    /// Event cap; `None` means `5 n`.
    pub max_events: Option<usize>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            stopping: StoppingConfig::default(),
            method: Method::Mprutf,
            max_events: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The interior dual fell below the noise threshold.
    Threshold,
    /// The path reached `λ = 0` before the rule fired.
    PathEnd,
}

#[derive(Debug, Clone)]
pub struct DetectionResult<T> {
    /// 1-based index of the last observation before each change.
    pub change_points: Vec<usize>,
    /// Direction of each change, the sign of `D f` at its dual coordinate.
    pub signs: Vec<i8>,
    /// 0-based dual coordinates of the changes.
    pub dual_taus: Vec<usize>,
    /// Critical value at which the search was halted.
    pub lambda_stop: T,
    pub sigma: f64,
    /// Segment-wise polynomial refit.
    pub fitted: Vec<T>,
    /// `y − Dᵀ û(λ_stop)`.
    pub shrunken: Vec<T>,
    pub events: Vec<PathEvent<T>>,
    /// Primal locations whose sign was zeroed and are still in the model.
    pub zeroed: Vec<usize>,
    pub stop_reason: StopReason,
    /// Joins that kept a same-signed neighbour after one round of zeroing.
    pub unresolved_conflicts: usize,
}

pub fn detect_prutf<T: Scalar>(y: &[T], r: usize, stopping: StoppingConfig) -> Result<DetectionResult<T>> {
    detect(
        y,
        r,
        &DetectConfig {
            stopping,
            method: Method::Prutf,
            max_events: None,
        },
    )
}

pub fn detect_mprutf<T: Scalar>(y: &[T], r: usize, stopping: StoppingConfig) -> Result<DetectionResult<T>> {
    detect(
        y,
        r,
        &DetectConfig {
            stopping,
            method: Method::Mprutf,
            max_events: None,
        },
    )
}

pub fn detect<T: Scalar>(y: &[T], r: usize, cfg: &DetectConfig) -> Result<DetectionResult<T>> {
    cfg.stopping.validate()?;
    DifferenceOperator::new(y.len(), r)?;
    let sigma = match cfg.stopping.sigma {
        NoiseScale::Known(s) => s,
        NoiseScale::Mad => estimate_sigma_mad(y, r)?,
    };
    let mut solver = PathSolver::new(
        y,
        r,
        PathConfig {
            max_events: cfg.max_events,
            modified: cfg.method == Method::Mprutf,
            keep_history: false,
        },
    )?;
    let stop_reason = loop {
        if should_stop(solver.state(), sigma, &cfg.stopping)? {
            break StopReason::Threshold;
        }
        if solver.step()?.is_none() {
            break StopReason::PathEnd;
        }
    };
    finish(solver, sigma, stop_reason)
}

fn finish<T: Scalar>(solver: PathSolver<T>, sigma: f64, stop_reason: StopReason) -> Result<DetectionResult<T>> {
    let r = solver.operator().order();
    let state = solver.state();
    let lambda_stop = match stop_reason {
        StopReason::PathEnd => T::zero(),
        StopReason::Threshold => {
            let mut probe = solver.clone();
            match probe.step()? {
                Some(ev) => ev.lambda,
                None => T::zero(),
            }
        }
    };
    let dual_taus = state.taus();
    let change_points = to_primal_changepoints(&dual_taus.iter().map(|t| t + 1).collect::<Vec<_>>(), r);
    let y = solver.signal();
    let fitted = segment_polynomial_fit(y, &change_points, r)?;
    let d_fit = solver.operator().apply(&fitted)?;
    let signs = dual_taus.iter().map(|&t| sign_of(d_fit[t])).collect();
    let u = state.dual(lambda_stop);
    let shrunken = y
        .iter()
        .zip(solver.operator().apply_transpose(&u)?)
        .map(|(&yi, f)| yi - f)
        .collect();
    let zeroed = state
        .boundary
        .runs()
        .iter()
        .filter(|run| run.sign == 0)
        .map(|run| run.tau + state.boundary.r_a() + 1)
        .collect();
    Ok(DetectionResult {
        change_points,
        signs,
        dual_taus,
        lambda_stop,
        sigma,
        fitted,
        shrunken,
        events: solver.events().to_vec(),
        zeroed,
        stop_reason,
        unresolved_conflicts: solver.unresolved_conflicts(),
    })
}

/// Maps 1-based dual coordinates to 1-based primal change points by adding `r_a`.
pub fn to_primal_changepoints(tau_dual: &[usize], r: usize) -> Vec<usize> {
    let r_a = (r + 1) / 2;
    let mut out: Vec<usize> = tau_dual.iter().map(|t| t + r_a).collect();
    out.sort_unstable();
    out
}

/// Least-squares fit of a degree-`r` polynomial in `i/n` on every segment.
/// `change_points` are 1-based indices of the last point of each segment
/// but the final one.
pub fn segment_polynomial_fit<T: Scalar>(y: &[T], change_points: &[usize], r: usize) -> Result<Vec<T>> {
    let n = y.len();
    let mut bounds = Vec::with_capacity(change_points.len() + 2);
    bounds.push(0);
    bounds.extend_from_slice(change_points);
    bounds.push(n);
    let mut fitted = Vec::with_capacity(n);
    for w in bounds.windows(2) {
        let (start, end) = (w[0], w[1]);
        if end < start + r + 1 {
            return Err(PrutfError::UnderdeterminedSegment {
                start,
                end,
                needed: r + 1,
            });
        }
        fitted.extend(project_polynomial(&y[start..end], start, n, r));
    }
    Ok(fitted)
}

// Orthogonal projection of `seg` onto polynomials of degree `r` in `x = i/n`.
// The basis is centred on the segment, which spans the same space.
fn project_polynomial<T: Scalar>(seg: &[T], offset: usize, n: usize, r: usize) -> Vec<T> {
    let len = seg.len();
    let n_t = T::of_usize(n);
    let centre = T::of_usize(2 * offset + len - 1) / (T::of(2.0) * n_t);
    let half = (T::of_usize(len) / (T::of(2.0) * n_t)).max(T::epsilon());
    let x: Vec<T> = (0..len)
        .map(|i| ((T::of_usize(offset + i) / n_t) - centre) / half)
        .collect();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(r + 1);
    let mut column = vec![T::one(); len];
    for _ in 0..=r {
        let mut q = column.clone();
        for _ in 0..2 {
            for e in &basis {
                let dot = dot(e, &q);
                q.iter_mut().zip(e).for_each(|(qi, &ei)| *qi -= dot * ei);
            }
        }
        let norm = dot(&q, &q).sqrt();
        q.iter_mut().for_each(|qi| *qi /= norm);
        basis.push(q);
        column.iter_mut().zip(&x).for_each(|(c, &xi)| *c *= xi);
    }
    let mut fit = vec![T::zero(); len];
    for e in &basis {
        let coef = dot(e, seg);
        fit.iter_mut().zip(e).for_each(|(f, &ei)| *f += coef * ei);
    }
    fit
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// True iff the changes `j` and `j + 1` carry the same nonzero sign.
pub fn is_staircase(signs: &[i8], j: usize) -> bool {
    match (signs.get(j), signs.get(j + 1)) {
        (Some(&a), Some(&b)) => a != 0 && a == b,
        _ => false,
    }
}

/// How one interior block fares against the exact-recovery conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagnostic {
    pub block: usize,
    pub start: usize,
    pub len: usize,
    /// Both neighbouring changes exist and share a nonzero sign.
    pub staircase: bool,
    /// Coordinates where `−λ(1 − b_t) ≤ û^st_t ≤ λ(1 + b_t)` fails.
    pub envelope_violations: usize,
    /// For staircase blocks, whether `û^st` keeps one sign on the block.
    pub one_sided: Option<bool>,
}

impl BlockDiagnostic {
    pub fn holds(&self) -> bool {
        self.envelope_violations == 0 && self.one_sided != Some(false)
    }
}

/// Per-block check of the exact pattern recovery conditions at `lambda`
/// for the boundary set of `state`.
pub fn pattern_diagnostics<T: Scalar>(state: &PathState<T>, lambda: T) -> Vec<BlockDiagnostic> {
    let runs = state.boundary.runs();
    let tol = T::of(1e-9) * T::one().max(lambda);
    state
        .gram
        .blocks()
        .iter()
        .enumerate()
        .map(|(j, block)| {
            let range = block.start..block.start + block.len;
            let mut envelope_violations = 0;
            for t in range.clone() {
                let (u, b) = (state.a[t], state.b[t]);
                if u < -lambda * (T::one() - b) - tol || u > lambda * (T::one() + b) + tol {
                    envelope_violations += 1;
                }
            }
            let staircase = j > 0 && j < runs.len() && runs[j - 1].sign != 0 && runs[j - 1].sign == runs[j].sign;
            let one_sided = staircase.then(|| {
                let seg = &state.a[range];
                seg.iter().all(|&u| u <= T::zero()) || seg.iter().all(|&u| u >= T::zero())
            });
            BlockDiagnostic {
                block: j,
                start: block.start,
                len: block.len,
                staircase,
                envelope_violations,
                one_sided,
            }
        })
        .collect()
}

/// Counts of each event kind, handy for summaries.
pub fn event_counts<T>(events: &[PathEvent<T>]) -> (usize, usize, usize) {
    events.iter().fold((0, 0, 0), |(j, l, z), e| match e.kind {
        EventKind::Join => (j + 1, l, z),
        EventKind::Leave => (j, l + 1, z),
        EventKind::ZeroSign => (j, l, z + 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn known(sigma: f64) -> StoppingConfig {
        StoppingConfig {
            sigma: NoiseScale::Known(sigma),
            ..StoppingConfig::default()
        }
    }

    #[test]
    fn primal_shift() {
        assert_eq!(to_primal_changepoints(&[3, 9], 0), vec![3, 9]);
        assert_eq!(to_primal_changepoints(&[9, 3], 1), vec![4, 10]);
        assert_eq!(to_primal_changepoints(&[6, 13], 2), vec![7, 14]);
    }

    #[test]
    fn staircase_predicate() {
        assert!(is_staircase(&[1, 1], 0));
        assert!(!is_staircase(&[1, -1], 0));
        assert!(!is_staircase(&[1, 0], 0));
        assert!(!is_staircase(&[1], 0));
    }

    #[test]
    fn segment_means_and_lines() {
        let y = [1.0f64, 2.0, 3.0, 10.0, 10.0];
        let f = segment_polynomial_fit(&y, &[3], 0).unwrap();
        for (a, b) in f.iter().zip([2.0, 2.0, 2.0, 10.0, 10.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let line: Vec<f64> = (0..12).map(|i| if i < 5 { 0.5 * i as f64 } else { 7.0 - 0.25 * i as f64 }).collect();
        let f = segment_polynomial_fit(&line, &[5], 1).unwrap();
        for (a, b) in f.iter().zip(&line) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(matches!(
            segment_polynomial_fit(&line, &[1], 1),
            Err(PrutfError::UnderdeterminedSegment { .. })
        ));
    }

    #[test]
    fn noiseless_two_jumps() {
        let y: Vec<f64> = (0..60)
            .map(|i| match i {
                0..=19 => 0.0,
                20..=39 => 2.0,
                _ => -1.0,
            })
            .collect();
        for method in [Method::Prutf, Method::Mprutf] {
            let res = detect(
                &y,
                0,
                &DetectConfig {
                    stopping: known(0.1),
                    method,
                    max_events: None,
                },
            )
            .unwrap();
            assert_eq!(res.change_points, vec![20, 40]);
            assert_eq!(res.signs, vec![1, -1]);
            assert_eq!(res.stop_reason, StopReason::Threshold);
            for (a, b) in res.fitted.iter().zip(&y) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_signal_is_empty() {
        let res = detect_mprutf(&[1.5f64; 30], 0, known(1.0)).unwrap();
        assert!(res.change_points.is_empty());
        assert!(res.fitted.iter().all(|v| (v - 1.5).abs() < 1e-12));
    }

    #[test]
    fn mad_on_constant_is_degenerate() {
        let err = detect_prutf(&[1.0f64; 30], 0, StoppingConfig::default()).unwrap_err();
        assert_eq!(err, PrutfError::DegenerateScale);
    }
}
