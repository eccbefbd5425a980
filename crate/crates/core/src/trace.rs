//! Per-iteration trace records, CSV persistence and the bookkeeping validator.
//!
//! CSV layout: `n,I,zeta,restart,theta_0,...,theta_{k-1}` with `restart` as
//! `0`/`1`. Every truncation row is stored regardless of thinning, so the
//! validator can check counter bookkeeping across stride gaps.

use std::fmt::Write as _;

use crate::Param;

/// One stored iteration: the post-update state of the stable loop.
/// `restart` is true exactly when this step performed the truncation branch
/// (active-set index incremented, `zeta` reset to zero).
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub n: usize,
    pub trunc_count: usize,
    pub zeta: usize,
    pub restart: bool,
    pub theta: Param,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Componentwise mean of theta over records with `n` in the last `frac`
    /// share of the budget (restart rows included; they are rare in the tail
    /// of a stable run).
    pub fn tail_mean(&self, budget: usize, frac: f64) -> Option<Vec<f64>> {
        let cutoff = ((budget as f64) * (1.0 - frac)).floor() as usize;
        let tail: Vec<&TraceRecord> =
            self.records.iter().filter(|r| r.n > cutoff).collect();
        let first = tail.first()?;
        let dim = first.theta.dim();
        let mut mean = vec![0.0; dim];
        for r in &tail {
            for (m, c) in mean.iter_mut().zip(r.theta.as_slice()) {
                *m += c;
            }
        }
        for m in &mut mean {
            *m /= tail.len() as f64;
        }
        Some(mean)
    }

    pub fn to_csv(&self) -> String {
        let dim = self.records.first().map_or(0, |r| r.theta.dim());
        let mut out = String::from("n,I,zeta,restart");
        for i in 0..dim {
            let _ = write!(out, ",theta_{i}");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{},{},{},{}",
                r.n,
                r.trunc_count,
                r.zeta,
                if r.restart { 1 } else { 0 }
            );
            for c in r.theta.as_slice() {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Trace, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty trace file")?;
        if !header.starts_with("n,I,zeta,restart") {
            return Err(format!("unexpected header: {header}"));
        }
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 5 {
                return Err(format!("row {}: expected at least 5 columns", lineno + 2));
            }
            let parse_u = |s: &str, what: &str| {
                s.parse::<usize>()
                    .map_err(|_| format!("row {}: bad {what} `{s}`", lineno + 2))
            };
            let theta: Result<Vec<f64>, String> = cols[4..]
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| format!("row {}: bad theta `{s}`", lineno + 2))
                })
                .collect();
            records.push(TraceRecord {
                n: parse_u(cols[0], "n")?,
                trunc_count: parse_u(cols[1], "I")?,
                zeta: parse_u(cols[2], "zeta")?,
                restart: match cols[3] {
                    "0" => false,
                    "1" => true,
                    other => return Err(format!("row {}: bad restart `{other}`", lineno + 2)),
                },
                theta: Param::new(theta?).map_err(|e| format!("row {}: {e}", lineno + 2))?,
            });
        }
        Ok(Trace { records })
    }

    /// Check the stable-loop bookkeeping relations. Assumes every restart row
    /// was stored (the engine guarantees this under thinning): `I` only moves
    /// at restart rows and by exactly one, restart rows carry `zeta = 0`, and
    /// across a stride gap of accepted rows `zeta` advances with `n`.
    pub fn validate(&self) -> Result<(), String> {
        let mut prev_n = 0usize;
        let mut prev_i = 0usize;
        let mut prev_zeta = 0usize;
        for r in &self.records {
            if r.n <= prev_n {
                return Err(format!("row n={}: n not strictly increasing", r.n));
            }
            if !r.theta.is_finite() {
                return Err(format!("row n={}: non-finite theta", r.n));
            }
            let gap = r.n - prev_n;
            if r.restart {
                if r.zeta != 0 {
                    return Err(format!("row n={}: restart row with zeta={}", r.n, r.zeta));
                }
                if r.trunc_count != prev_i + 1 {
                    return Err(format!(
                        "row n={}: restart row jumps I from {} to {}",
                        r.n, prev_i, r.trunc_count
                    ));
                }
                // the gap-1 hidden rows before the truncation were accepts
                if prev_zeta + gap < 1 {
                    return Err(format!("row n={}: inconsistent gap", r.n));
                }
            } else {
                if r.trunc_count != prev_i {
                    return Err(format!(
                        "row n={}: I changed from {} to {} without a restart flag",
                        r.n, prev_i, r.trunc_count
                    ));
                }
                if r.zeta != prev_zeta + gap {
                    return Err(format!(
                        "row n={}: zeta={} but expected {} (prev zeta {} + gap {})",
                        r.n,
                        r.zeta,
                        prev_zeta + gap,
                        prev_zeta,
                        gap
                    ));
                }
            }
            prev_n = r.n;
            prev_i = r.trunc_count;
            prev_zeta = r.zeta;
        }
        Ok(())
    }
}
