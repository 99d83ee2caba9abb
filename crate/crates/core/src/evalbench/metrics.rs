use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interpreter::{parse, execute, DroneState, ExecConfig, Tolerance, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("cannot compute an accuracy over zero items")]
    EmptyCorpus,
}

/// Length of the longest prefix on which `predicted` matches `gt`.
pub fn correct_prefix(predicted: &[Transition], gt: &[Transition], tol: &Tolerance) -> usize {
    predicted.iter().zip(gt).take_while(|(p, g)| p.matches(g, tol)).count()
}

/// Predicted actions beyond the ground-truth length.
pub fn surplus(predicted: &[Transition], gt: &[Transition]) -> usize {
    predicted.len().saturating_sub(gt.len())
}

/// Fraction of ground-truth actions matched by strict prefix.
pub fn completeness(predicted: &[Transition], gt: &[Transition], tol: &Tolerance) -> Result<f64, MetricError> {
    if gt.is_empty() {
        return Err(MetricError::EmptyGroundTruth);
    }
    Ok(correct_prefix(predicted, gt, tol) as f64 / gt.len() as f64)
}

/// Full prefix match with nothing extra.
pub fn success(predicted: &[Transition], gt: &[Transition], tol: &Tolerance) -> Result<bool, MetricError> {
    Ok(completeness(predicted, gt, tol)? == 1.0 && surplus(predicted, gt) == 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub completeness: f64,
    pub success: bool,
    pub surplus: usize,
    pub faulted: bool,
}

impl Score {
    pub const ZERO: Score = Score { completeness: 0.0, success: false, surplus: 0, faulted: true };
}

/// Score generated code against a ground truth by running it through the interpreter.
///
/// Code that does not parse scores zero. Only transitions before the first
/// order violation (e.g. flying before takeoff) count, and any fault fails success.
pub fn score_code(code: &str, gt: &[Transition], exec: &ExecConfig, tol: &Tolerance) -> Result<Score, MetricError> {
    if gt.is_empty() {
        return Err(MetricError::EmptyGroundTruth);
    }
    let Ok(program) = parse(code) else {
        return Ok(Score::ZERO);
    };
    let trace = execute(&program, DroneState::grounded(), exec);
    let usable = &trace.transitions[..trace.actions_before_order_violation()];
    let completeness = completeness(usable, gt, tol)?;
    let surplus = surplus(&trace.transitions, gt);
    let faulted = !trace.faults.is_empty();
    Ok(Score { completeness, success: completeness == 1.0 && surplus == 0 && !faulted, surplus, faulted })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub hits: usize,
    pub total: usize,
    /// Items that could not be judged (backend errors); counted as misses.
    pub errors: usize,
}

impl Accuracy {
    pub fn new(hits: usize, total: usize, errors: usize) -> Result<Self, MetricError> {
        if total == 0 {
            return Err(MetricError::EmptyCorpus);
        }
        Ok(Self { hits, total, errors })
    }

    pub fn percent(&self) -> f64 {
        self.hits as f64 / self.total as f64 * 100.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(dx: f64, dy: f64, dz: f64, dt: f64) -> Transition {
        Transition::new(dx, dy, dz, dt)
    }

    fn square() -> Vec<Transition> {
        vec![
            t(0., 0., -2.5, 0.),
            t(0., 0., -5., 0.),
            t(0., 0., 0., 90.),
            t(5., 0., 0., 0.),
            t(0., 0., 0., 90.),
            t(0., 5., 0., 0.),
            t(0., 0., 0., 90.),
            t(-5., 0., 0., 0.),
            t(0., 0., 0., 90.),
            t(0., -5., 0., 0.),
        ]
    }

    #[test]
    fn prefix_cases() {
        let gt = square();
        let tol = Tolerance::default();
        assert_eq!(completeness(&gt, &gt, &tol).unwrap(), 1.0);
        let mut wrong = gt.clone();
        wrong[6] = t(0., 3., 0., 0.);
        assert_eq!(completeness(&wrong, &gt, &tol).unwrap(), 0.6);
        assert!(!success(&wrong, &gt, &tol).unwrap());
        assert_eq!(completeness(&[], &gt, &tol).unwrap(), 0.0);
        let mut extra = gt.clone();
        extra.push(t(1., 0., 0., 0.));
        assert_eq!(completeness(&extra, &gt, &tol).unwrap(), 1.0);
        assert!(!success(&extra, &gt, &tol).unwrap());
        assert_eq!(completeness(&gt, &[], &tol), Err(MetricError::EmptyGroundTruth));
    }

    #[test]
    fn tolerance_absorbs_rounding() {
        let gt = vec![t(5., 0., 0., 90.)];
        let near = vec![t(5.05, 0., 0., 90.5)];
        assert_eq!(completeness(&near, &gt, &Tolerance::default()).unwrap(), 1.0);
        assert_eq!(completeness(&near, &gt, &Tolerance::EXACT).unwrap(), 0.0);
    }

    #[test]
    fn scoring_code() {
        let gt = vec![t(0., 0., -2.5, 0.), t(3., 0., 0., 0.)];
        let exec = ExecConfig::default();
        let tol = Tolerance::default();
        let ok = score_code("aw.takeoff()\naw.fly_to([3, 0, -2.5])", &gt, &exec, &tol).unwrap();
        assert!(ok.success);
        let bad = score_code("aw.fly_to([3, 0, -2.5])\naw.takeoff()", &gt, &exec, &tol).unwrap();
        assert_eq!(bad.completeness, 0.0);
        assert!(!bad.success && bad.faulted);
        assert_eq!(score_code("aw.takeoff(", &gt, &exec, &tol).unwrap(), Score::ZERO);
    }

    #[test]
    fn accuracy_guard() {
        assert_eq!(Accuracy::new(0, 0, 0), Err(MetricError::EmptyCorpus));
        assert_eq!(Accuracy::new(39, 40, 0).unwrap().percent(), 97.5);
    }
}
