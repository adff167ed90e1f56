// SPDX-License-Identifier: MIT OR Apache-2.0

//! The dual solution path of trend filtering, traced event by event.
//!
//! On every stretch of `λ` between two events the dual is affine: interior
//! coordinates equal `a − λ b` and augmented coordinates equal `λ s`. A
//! [`PathSolver`] holds the current stretch and moves to the next one by
//! taking the larger of the next joining and leaving times.

use std::sync::Arc;

use crate::linop::{boundary_load, AugmentedBoundary, BandedCholesky, BlockedGram, DifferenceOperator};
use crate::scalar::{ensure_finite, Scalar};
use crate::{PrutfError, Result};

const DENOM_GUARD: f64 = 1e-12;
const EVENT_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Join,
    Leave,
    /// Staircase correction: the run at `tau` had its sign set to 0.
    ZeroSign,
}

/// One change to the boundary set. `tau` is a 0-based dual coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathEvent<T> {
    pub lambda: T,
    pub kind: EventKind,
    pub tau: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathConfig {
    /// Event cap; `None` means `5 n`.
    pub max_events: Option<usize>,
    /// Zero the sign of a same-signed neighbour before a join (mPRUTF).
    pub modified: bool,
    /// Keep every affine stretch so the path can be evaluated afterwards.
    pub keep_history: bool,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            max_events: None,
            modified: false,
            keep_history: false,
        }
    }
}

/// Current affine stretch of the path.
#[derive(Debug, Clone)]
pub struct PathState<T> {
    /// Upper end of the stretch, `∞` before the first event.
    pub lambda: T,
    /// Number of join and leave events taken so far.
    pub step: usize,
    pub boundary: AugmentedBoundary,
    /// Intercepts, length `m`, zero on augmented coordinates.
    pub a: Vec<T>,
    /// Slopes, length `m`, zero on augmented coordinates.
    pub b: Vec<T>,
    /// `D_Aᵀ s_A`.
    pub load: Vec<T>,
    pub gram: BlockedGram<T>,
}

impl<T: Scalar> PathState<T> {
    /// Full dual vector at `lambda` on this stretch.
    pub fn dual(&self, lambda: T) -> Vec<T> {
        assemble_dual(&self.boundary, &self.a, &self.b, lambda)
    }

    /// `max |a_t|` over interior coordinates, the stochastic part of the dual.
    pub fn interior_sup(&self) -> T {
        self.a.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Dual coordinates of the current changes, 0-based.
    pub fn taus(&self) -> Vec<usize> {
        self.boundary.runs().iter().map(|r| r.tau).collect()
    }
}

fn assemble_dual<T: Scalar>(boundary: &AugmentedBoundary, a: &[T], b: &[T], lambda: T) -> Vec<T> {
    let mut u: Vec<T> = a.iter().zip(b).map(|(&ai, &bi)| ai - lambda * bi).collect();
    for run in boundary.runs() {
        let (first, last) = boundary.span(run.tau).expect("stored runs fit");
        let value = lambda * T::of(f64::from(run.sign));
        u[first..=last].iter_mut().for_each(|x| *x = value);
    }
    u
}

/// A closed affine stretch `[lower, upper]` of the path.
#[derive(Debug, Clone)]
pub struct PathSegment<T> {
    pub upper: T,
    pub lower: T,
    pub boundary: AugmentedBoundary,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

/// Incremental PRUTF / mPRUTF path tracer.
#[derive(Debug, Clone)]
pub struct PathSolver<T> {
    op: DifferenceOperator,
    factor: Arc<BandedCholesky<T>>,
    y: Vec<T>,
    config: PathConfig,
    cap: usize,
    state: PathState<T>,
    events: Vec<PathEvent<T>>,
    history: Vec<PathSegment<T>>,
    last_joined: Option<usize>,
    last_left: Option<usize>,
    conflicts: usize,
    complete: bool,
}

impl<T: Scalar> PathSolver<T> {
    pub fn new(y: &[T], r: usize, config: PathConfig) -> Result<Self> {
        let op = DifferenceOperator::new(y.len(), r)?;
        ensure_finite(y)?;
        let factor = Arc::new(BandedCholesky::toeplitz_gram(r, op.rows())?);
        let boundary = AugmentedBoundary::empty(op.rows(), r);
        let state = Self::build_state(&op, &factor, y, boundary, T::infinity(), 0)?;
        Ok(Self {
            cap: config.max_events.unwrap_or(5 * y.len()),
            op,
            factor,
            y: y.to_vec(),
            config,
            state,
            events: Vec::new(),
            history: Vec::new(),
            last_joined: None,
            last_left: None,
            conflicts: 0,
            complete: false,
        })
    }

    fn build_state(
        op: &DifferenceOperator,
        factor: &Arc<BandedCholesky<T>>,
        y: &[T],
        boundary: AugmentedBoundary,
        lambda: T,
        step: usize,
    ) -> Result<PathState<T>> {
        let gram = BlockedGram::with_factor(Arc::clone(factor), &boundary)?;
        let a = gram.contrast_apply(op, y)?;
        let load = boundary_load(op, &boundary);
        let b = if boundary.runs().iter().all(|r| r.sign == 0) {
            vec![T::zero(); op.rows()]
        } else {
            gram.contrast_apply(op, &load)?
        };
        Ok(PathState {
            lambda,
            step,
            boundary,
            a,
            b,
            load,
            gram,
        })
    }

    fn rebuild(&mut self, boundary: AugmentedBoundary, lambda: T, step: usize) -> Result<()> {
        self.state = Self::build_state(&self.op, &self.factor, &self.y, boundary, lambda, step)?;
        Ok(())
    }

    pub fn operator(&self) -> &DifferenceOperator {
        &self.op
    }

    pub fn signal(&self) -> &[T] {
        &self.y
    }

    pub fn state(&self) -> &PathState<T> {
        &self.state
    }

    /// Join, leave and sign-zeroing events in the order they happened.
    pub fn events(&self) -> &[PathEvent<T>] {
        &self.events
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Joins after which a same-signed neighbour remained even after zeroing.
    pub fn unresolved_conflicts(&self) -> usize {
        self.conflicts
    }

    fn tol(&self, lambda: T) -> T {
        T::of(EVENT_TIE) * T::one().max(lambda)
    }

    /// Next joining event: the largest `a_i / (s + b_i)` in `[0, λ]` over
    /// interior coordinates whose run fits.
    pub fn next_join(&self) -> Option<PathEvent<T>> {
        let st = &self.state;
        let upper = st.lambda;
        let slack = if upper.is_finite() { self.tol(upper) } else { T::zero() };
        let mut best: Option<PathEvent<T>> = None;
        for i in 0..self.op.rows() {
            if Some(i) == self.last_left || !st.boundary.can_insert(i) {
                continue;
            }
            for s in [1i8, -1] {
                let den = T::of(f64::from(s)) + st.b[i];
                if den.abs() < T::of(DENOM_GUARD) {
                    continue;
                }
                let t = st.a[i] / den;
                if !(t >= T::zero()) || t > upper + slack {
                    continue;
                }
                let t = t.min(upper);
                if best.is_none_or(|b| t > b.lambda + self.tol(b.lambda)) {
                    best = Some(PathEvent {
                        lambda: t,
                        kind: EventKind::Join,
                        tau: i,
                        sign: s,
                    });
                }
            }
        }
        best
    }

    /// `(c, d)` over the boundary coordinates, aligned with `boundary()`.
    pub fn leave_coefficients(&self) -> (Vec<T>, Vec<T>) {
        let st = &self.state;
        let op = &self.op;
        let fit_a = op.apply_transpose(&st.a).expect("length m");
        let fit_b = op.apply_transpose(&st.b).expect("length m");
        let res_y: Vec<T> = self.y.iter().zip(&fit_a).map(|(&y, &f)| y - f).collect();
        let res_l: Vec<T> = st.load.iter().zip(&fit_b).map(|(&l, &f)| l - f).collect();
        let mut c = Vec::new();
        let mut d = Vec::new();
        for (i, s) in st.boundary.boundary().into_iter().zip(st.boundary.boundary_signs()) {
            let s = T::of(f64::from(s));
            c.push(s * op.row_dot(i, &res_y));
            d.push(s * op.row_dot(i, &res_l));
        }
        (c, d)
    }

    /// Next leaving event: the largest `c_i / d_i` with `c_i < 0`, `d_i < 0`
    /// over boundary coordinates; the whole run holding the maximiser leaves.
    pub fn next_leave(&self) -> Option<PathEvent<T>> {
        let st = &self.state;
        if st.boundary.is_empty() {
            return None;
        }
        let upper = st.lambda;
        let slack = if upper.is_finite() { self.tol(upper) } else { T::zero() };
        let (c, d) = self.leave_coefficients();
        let coords = st.boundary.boundary();
        let mut best: Option<PathEvent<T>> = None;
        for ((&i, &ci), &di) in coords.iter().zip(&c).zip(&d) {
            if !(ci < T::zero() && di < T::zero()) {
                continue;
            }
            let run = st.boundary.runs()[st.boundary.run_covering(i).expect("boundary coordinate")];
            if Some(run.tau) == self.last_joined {
                continue;
            }
            let t = ci / di;
            if t > upper + slack {
                continue;
            }
            let t = t.min(upper);
            if best.is_none_or(|b| t > b.lambda + self.tol(b.lambda)) {
                best = Some(PathEvent {
                    lambda: t,
                    kind: EventKind::Leave,
                    tau: run.tau,
                    sign: run.sign,
                });
            }
        }
        best
    }

    /// Larger of the next join and leave; joins win near-ties. `None` once
    /// no event remains above `λ = 0`.
    fn select_event(&self) -> Option<PathEvent<T>> {
        let join = self.next_join();
        let leave = self.next_leave();
        let ev = match (join, leave) {
            (Some(j), Some(l)) => {
                if j.lambda >= l.lambda - self.tol(l.lambda) {
                    j
                } else {
                    l
                }
            }
            (Some(j), None) => j,
            (None, Some(l)) => l,
            (None, None) => return None,
        };
        (ev.lambda > T::zero()).then_some(ev)
    }

    /// Nearest changes before and after `tau` whose sign equals `sign`.
    /// Zeroed neighbours still count as neighbours; their sign never matches.
    fn same_sign_neighbours(&self, tau: usize, sign: i8) -> Vec<usize> {
        let runs = self.state.boundary.runs();
        let idx = runs.partition_point(|r| r.tau < tau);
        let before = idx.checked_sub(1).map(|k| runs[k]);
        let after = runs.get(idx).copied();
        [before, after]
            .into_iter()
            .flatten()
            .filter(|r| r.sign != 0 && r.sign == sign)
            .map(|r| r.tau)
            .collect()
    }

    fn close_segment(&mut self, lower: T) {
        if self.config.keep_history {
            self.history.push(PathSegment {
                upper: self.state.lambda,
                lower,
                boundary: self.state.boundary.clone(),
                a: self.state.a.clone(),
                b: self.state.b.clone(),
            });
        }
    }

    /// Advances to the next event. Returns `Ok(None)` once the path has
    /// reached `λ = 0`.
    pub fn step(&mut self) -> Result<Option<PathEvent<T>>> {
        if self.complete {
            return Ok(None);
        }
        let mut next = self.select_event();
        if self.config.modified {
            if let Some(ev) = next.filter(|e| e.kind == EventKind::Join) {
                let clash = self.same_sign_neighbours(ev.tau, ev.sign);
                if !clash.is_empty() {
                    let mut boundary = self.state.boundary.clone();
                    for &tau in &clash {
                        boundary.set_sign(tau, 0);
                        self.events.push(PathEvent {
                            lambda: self.state.lambda,
                            kind: EventKind::ZeroSign,
                            tau,
                            sign: 0,
                        });
                    }
                    let (lambda, step) = (self.state.lambda, self.state.step);
                    self.rebuild(boundary, lambda, step)?;
                    next = self.select_event();
                    if let Some(again) = next.filter(|e| e.kind == EventKind::Join) {
                        if !self.same_sign_neighbours(again.tau, again.sign).is_empty() {
                            self.conflicts += 1;
                        }
                    }
                }
            }
        }
        let Some(ev) = next else {
            self.close_segment(T::zero());
            self.complete = true;
            self.state.lambda = T::zero();
            return Ok(None);
        };
        if self.state.step >= self.cap {
            return Err(PrutfError::CapExceeded { cap: self.cap });
        }
        self.close_segment(ev.lambda);
        let mut boundary = self.state.boundary.clone();
        match ev.kind {
            EventKind::Join => {
                boundary.insert(ev.tau, ev.sign)?;
                self.last_joined = Some(ev.tau);
                self.last_left = None;
            }
            EventKind::Leave => {
                boundary.remove(ev.tau);
                self.last_left = Some(ev.tau);
                self.last_joined = None;
            }
            EventKind::ZeroSign => unreachable!("selection yields joins and leaves only"),
        }
        let step = self.state.step + 1;
        self.rebuild(boundary, ev.lambda, step)?;
        self.events.push(ev);
        Ok(Some(ev))
    }

    /// Runs until `λ = 0` and returns the evaluable path.
    pub fn run_to_end(mut self) -> Result<SolutionPath<T>> {
        self.config.keep_history = true;
        while self.step()?.is_some() {}
        Ok(self.into_path())
    }

    /// Finishes the record. An unfinished path is closed at the next event,
    /// so it covers `[next event, ∞)`.
    pub fn into_path(mut self) -> SolutionPath<T> {
        if !self.complete {
            let lower = self.select_event().map_or(T::zero(), |e| e.lambda);
            self.close_segment(lower);
        }
        SolutionPath {
            op: self.op,
            y: self.y,
            segments: self.history,
            events: self.events,
        }
    }
}

/// A recorded path, evaluable at any `λ` it covers.
#[derive(Debug, Clone)]
pub struct SolutionPath<T> {
    op: DifferenceOperator,
    y: Vec<T>,
    segments: Vec<PathSegment<T>>,
    events: Vec<PathEvent<T>>,
}

impl<T: Scalar> SolutionPath<T> {
    pub fn segments(&self) -> &[PathSegment<T>] {
        &self.segments
    }

    pub fn events(&self) -> &[PathEvent<T>] {
        &self.events
    }

    /// Critical values `λ_1 ≥ λ_2 ≥ …` of the join and leave events.
    pub fn knots(&self) -> Vec<T> {
        self.events
            .iter()
            .filter(|e| e.kind != EventKind::ZeroSign)
            .map(|e| e.lambda)
            .collect()
    }

    fn segment_at(&self, lambda: T) -> Result<&PathSegment<T>> {
        let lowest = self.segments.last().map_or(T::infinity(), |s| s.lower);
        self.segments
            .iter()
            .find(|s| lambda <= s.upper && lambda >= s.lower)
            .ok_or(PrutfError::LambdaOutOfRange {
                lambda: lambda.to_f64_lossy(),
                lower: lowest.to_f64_lossy(),
                upper: f64::INFINITY,
            })
    }

    /// `û(λ)`.
    pub fn dual_at(&self, lambda: T) -> Result<Vec<T>> {
        let seg = self.segment_at(lambda)?;
        Ok(assemble_dual(&seg.boundary, &seg.a, &seg.b, lambda))
    }

    /// `f̂(λ) = y − Dᵀ û(λ)`.
    pub fn primal_at(&self, lambda: T) -> Result<Vec<T>> {
        let u = self.dual_at(lambda)?;
        let fit = self.op.apply_transpose(&u)?;
        Ok(self.y.iter().zip(fit).map(|(&y, f)| y - f).collect())
    }

    /// Boundary set in force at `lambda`.
    pub fn boundary_at(&self, lambda: T) -> Result<&AugmentedBoundary> {
        Ok(&self.segment_at(lambda)?.boundary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_join_on_single_step() {
        let y = [0.0f64, 0.0, 0.0, 1.0, 1.0, 1.0];
        let mut solver = PathSolver::new(&y, 0, PathConfig::default()).unwrap();
        let ev = solver.step().unwrap().unwrap();
        assert_eq!(ev.kind, EventKind::Join);
        assert_eq!(ev.tau, 2);
        assert_eq!(ev.sign, 1);
        assert!((ev.lambda - 1.5).abs() < 1e-12);
    }

    #[test]
    fn constant_signal_has_no_events() {
        let mut solver = PathSolver::new(&[2.0f64; 10], 1, PathConfig::default()).unwrap();
        assert!(solver.step().unwrap().is_none());
        assert!(solver.is_complete());
        assert!(solver.events().is_empty());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // |û| is symmetric around the centre, so two coordinates tie.
        let y = [0.0, 1.0, 1.0, 1.0, 0.0];
        let mut solver = PathSolver::new(&y, 0, PathConfig::default()).unwrap();
        let ev = solver.step().unwrap().unwrap();
        assert_eq!(ev.tau, 0);
    }

    #[test]
    fn r0_never_leaves() {
        let y: Vec<f64> = (0..40).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let path = PathSolver::new(&y, 0, PathConfig::default()).unwrap().run_to_end().unwrap();
        assert!(path.events().iter().all(|e| e.kind == EventKind::Join));
        assert_eq!(path.events().len(), 39);
    }

    #[test]
    fn endpoints_of_path() {
        let y = [0.3f64, -1.0, 2.0, 0.5, 0.1, 1.2, -0.7, 0.4];
        let path = PathSolver::new(&y, 0, PathConfig::default()).unwrap().run_to_end().unwrap();
        let f0 = path.primal_at(0.0).unwrap();
        for (a, b) in f0.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(path.dual_at(-1.0).is_err());
        let path = PathSolver::new(&y, 1, PathConfig::default()).unwrap().run_to_end().unwrap();
        // Above λ₁ the fit is the global line.
        let f = path.primal_at(1e6).unwrap();
        let d2 = DifferenceOperator::new(8, 1).unwrap().apply(&f).unwrap();
        assert!(d2.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn works_in_single_precision() {
        let y = [0.0f32, 0.1, -0.1, 2.0, 2.1, 1.9];
        let mut solver = PathSolver::new(&y, 0, PathConfig::default()).unwrap();
        let ev = solver.step().unwrap().unwrap();
        assert_eq!(ev.tau, 2);
    }
}
