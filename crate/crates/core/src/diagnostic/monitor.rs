use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::null::NullApproximation;
use super::statistic::VnValue;
use super::test::Decision;

/// One evaluation of `V_n` during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<S> {
    pub iteration: u64,
    pub vn: VnValue<S>,
    /// `|1 - V_k / V_{k-1}|`; absent at the first checkpoint.
    pub rel_diff: Option<S>,
    /// Null moments and decision when the quantitative test ran here.
    pub null: Option<NullApproximation<S>>,
    pub decision: Option<Decision>,
}

/// Checkpoints in increasing iteration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticSeries<S> {
    checkpoints: Vec<Checkpoint<S>>,
}

/// `|(V_prev - V_cur) / V_prev|` from logarithms. A zero previous value
/// gives `0` when the current value is also zero and `+inf` otherwise.
pub fn relative_difference<S: Scalar>(prev: VnValue<S>, cur: VnValue<S>) -> S {
    if prev.ln_value == S::neg_infinity() {
        return if cur.ln_value == S::neg_infinity() { S::zero() } else { S::infinity() };
    }
    (S::one() - (cur.ln_value - prev.ln_value).exp()).abs()
}

impl<S: Scalar> DiagnosticSeries<S> {
    pub fn new() -> Self {
        DiagnosticSeries { checkpoints: Vec::new() }
    }

    /// Builds a series from plain `(iteration, V)` pairs.
    pub fn from_values(points: &[(u64, S)]) -> Result<Self> {
        let mut s = Self::new();
        for &(it, v) in points {
            s.push(it, VnValue::from_ln(v.ln()))?;
        }
        Ok(s)
    }

    pub fn push(&mut self, iteration: u64, vn: VnValue<S>) -> Result<&Checkpoint<S>> {
        if vn.ln_value.is_nan() {
            return Err(Error::Numerical(format!("V_n is not a number at iteration {iteration}")));
        }
        if let Some(last) = self.checkpoints.last() {
            if iteration <= last.iteration {
                return Err(Error::Domain(format!(
                    "checkpoint iteration {iteration} does not follow {}",
                    last.iteration
                )));
            }
        }
        let rel_diff = self.checkpoints.last().map(|c| relative_difference(c.vn, vn));
        self.checkpoints.push(Checkpoint { iteration, vn, rel_diff, null: None, decision: None });
        Ok(self.checkpoints.last().unwrap())
    }

    /// Attaches a quantitative-test result to the latest checkpoint.
    pub fn annotate_last(&mut self, null: NullApproximation<S>, decision: Decision) {
        if let Some(c) = self.checkpoints.last_mut() {
            c.null = Some(null);
            c.decision = Some(decision);
        }
    }

    pub fn checkpoints(&self) -> &[Checkpoint<S>] {
        &self.checkpoints
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    pub fn last(&self) -> Option<&Checkpoint<S>> {
        self.checkpoints.last()
    }

    /// First checkpoint iteration at which the relative difference drops below `epsilon`.
    pub fn first_stop(&self, epsilon: S) -> Option<u64> {
        self.checkpoints.iter().find(|c| c.rel_diff.is_some_and(|r| r < epsilon)).map(|c| c.iteration)
    }

    /// Writes `iteration,V_n,rel_diff,lambda_sum,lambda_sq_sum,decision` rows.
    /// Missing entries are left empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,V_n,rel_diff,lambda_sum,lambda_sq_sum,decision")?;
        for c in &self.checkpoints {
            let opt = |v: Option<S>| v.map(|x| format!("{:e}", x.as_f64())).unwrap_or_default();
            writeln!(
                out,
                "{},{:e},{},{},{},{}",
                c.iteration,
                c.vn.value.as_f64(),
                opt(c.rel_diff),
                opt(c.null.map(|n| n.lambda_sum)),
                opt(c.null.map(|n| n.lambda_sq_sum)),
                c.decision.map_or("", Decision::label),
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorDecision {
    Stop,
    Continue,
}

/// Stop iff the latest relative difference is below `epsilon`.
pub fn relative_difference_monitor<S: Scalar>(series: &DiagnosticSeries<S>, epsilon: S) -> Result<MonitorDecision> {
    if !(epsilon > S::zero()) {
        return Err(Error::Domain(format!("epsilon = {epsilon} must be positive")));
    }
    Ok(match series.last().and_then(|c| c.rel_diff) {
        Some(r) if r < epsilon => MonitorDecision::Stop,
        _ => MonitorDecision::Continue,
    })
}

/// Iterations to criterion of algorithm 1 over those of algorithm 2.
/// Values below one favour algorithm 1.
pub fn efficiency_measure<S: Scalar>(
    first: &DiagnosticSeries<S>,
    second: &DiagnosticSeries<S>,
    epsilon: S,
) -> Result<S> {
    let a = first.first_stop(epsilon).ok_or(Error::NotConverged { side: "first" })?;
    let b = second.first_stop(epsilon).ok_or(Error::NotConverged { side: "second" })?;
    Ok(S::from_u64(a).unwrap() / S::from_u64(b).unwrap())
}
