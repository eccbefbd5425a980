//! The SA inner loop and the self-stabilized outer loop with truncations on
//! expanding compact sets.
//!
//! The stable loop restarts from the anchor `(x*, theta*)` whenever the
//! proposed iterate escapes the active set `K_I`, increments `I`, and resets
//! the within-set counter `zeta`. The step size applied with pre-update
//! counters `(I, zeta)` is `schedule.gamma_at(I + zeta + 1)`, which realizes
//! the shifted sequence: after the `i`-th truncation the loop effectively
//! continues the schedule from index `i`.

use crate::trace::{Trace, TraceRecord};
use crate::{CompactFamily, Field, Kernel, Param, RunRng, SaError, StepSchedule};

/// Outcome of the plain (unstabilized) inner loop.
#[derive(Clone, Debug, PartialEq)]
pub enum SaExit {
    /// The iterate left the active set at step `n` (1-based).
    ExitedAt(usize),
    /// The budget ran out with every iterate inside the set.
    Exhausted,
}

/// One SA update: draw `x' ~ P_theta(x, .)` then move `theta' = theta + rho H(theta, x')`.
pub fn sa_step<X>(
    theta: &Param,
    x: &X,
    kernel: &dyn Kernel<X>,
    field: &dyn Field<X>,
    rho: f64,
    rng: &mut RunRng,
) -> Result<(Param, X), SaError> {
    let x_next = kernel.step(theta, x, rng);
    let h = field.eval(theta, &x_next)?;
    if !h.is_finite() {
        return Err(SaError::NonFiniteField);
    }
    let theta_next = theta.step_by(rho, &h)?;
    Ok((theta_next, x_next))
}

/// Run the inner loop until the iterate leaves `in_set` or `max_iters` steps
/// elapse. The step at iteration `n` (0-based) is `schedule.gamma_at(n)`.
/// Returns the iterates `theta_1, theta_2, ...` produced.
pub fn run_sa_until_exit<X: Clone>(
    init_x: &X,
    init_theta: &Param,
    in_set: impl Fn(&Param) -> bool,
    schedule: &StepSchedule,
    kernel: &dyn Kernel<X>,
    field: &dyn Field<X>,
    max_iters: usize,
    rng: &mut RunRng,
) -> Result<(Vec<Param>, SaExit), SaError> {
    if !in_set(init_theta) {
        return Err(SaError::InitOutsideSet);
    }
    let mut theta = init_theta.clone();
    let mut x = init_x.clone();
    let mut iterates = Vec::new();
    for n in 0..max_iters {
        let (t, xn) = sa_step(&theta, &x, kernel, field, schedule.gamma_at(n), rng)?;
        theta = t;
        x = xn;
        iterates.push(theta.clone());
        if !in_set(&theta) {
            return Ok((iterates, SaExit::ExitedAt(n + 1)));
        }
    }
    Ok((iterates, SaExit::Exhausted))
}

/// Options for the stable loop.
#[derive(Clone, Copy, Debug)]
pub struct StableOptions {
    /// Total number of iterations to perform.
    pub budget: usize,
    /// Store every `thin`-th record; truncation rows and the final row are
    /// always stored.
    pub thin: usize,
    /// Abort with a diagnostic once `I` exceeds this cap.
    pub max_truncations: usize,
}

impl StableOptions {
    pub fn new(budget: usize) -> Self {
        StableOptions {
            budget,
            thin: 1,
            max_truncations: 10_000,
        }
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        assert!(thin >= 1);
        self.thin = thin;
        self
    }

    pub fn with_max_truncations(mut self, cap: usize) -> Self {
        self.max_truncations = cap;
        self
    }
}

/// The self-stabilized loop. On a truncation event both the parameter and the
/// chain state reset to the anchor on the next iteration; the escaped iterate
/// is recorded with `restart = true`.
pub fn run_stable_sa<X: Clone>(
    opts: StableOptions,
    family: &dyn CompactFamily,
    kernel: &dyn Kernel<X>,
    field: &dyn Field<X>,
    schedule: &StepSchedule,
    anchor_x: &X,
    anchor_theta: &Param,
    rng: &mut RunRng,
) -> Result<Trace, SaError> {
    assert!(opts.budget >= 1);
    if !family.contains(0, anchor_theta) {
        return Err(SaError::AnchorOutsideSet);
    }
    let mut theta = anchor_theta.clone();
    let mut x = anchor_x.clone();
    let mut trunc_count = 0usize;
    let mut zeta = 0usize;
    let mut records = Vec::with_capacity(opts.budget / opts.thin + 2);
    for n in 1..=opts.budget {
        let (theta_half, x_half) = if zeta == 0 {
            (anchor_theta, anchor_x)
        } else {
            (&theta, &x)
        };
        let rho = schedule.gamma_at(trunc_count + zeta + 1);
        let (proposed, x_next) = sa_step(theta_half, x_half, kernel, field, rho, rng)?;
        let restart = !family.contains(trunc_count, &proposed);
        if restart {
            trunc_count += 1;
            zeta = 0;
            if trunc_count > opts.max_truncations {
                return Err(SaError::TruncationCapExceeded {
                    cap: opts.max_truncations,
                });
            }
        } else {
            zeta += 1;
        }
        theta = proposed;
        x = x_next;
        if restart || n % opts.thin == 0 || n == opts.budget {
            records.push(TraceRecord {
                n,
                trunc_count,
                zeta,
                restart,
                theta: theta.clone(),
            });
        }
    }
    Ok(Trace { records })
}
