//! Argument scoring, fallacy flags and feedback text.

mod lexicon;

use serde::{Deserialize, Serialize};

use crate::debate::DebateState;
use crate::error::{Error, Result};
use crate::gateway::Gateway;

pub use lexicon::{FallacyFlag, FallacyKind, Lexicon, Span, DEFAULT_LEXICON};

/// Scores below this earn an improvement suggestion.
pub const SUGGESTION_THRESHOLD: u8 = 7;

pub const DIMENSION_NAMES: [&str; 4] = ["Relevance", "Persuasiveness", "Logical Consistency", "Evidence Usage"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationScores {
    pub relevance: u8,
    pub persuasiveness: u8,
    pub logical_consistency: u8,
    pub evidence_usage: u8,
    pub overall: f64,
}

impl EvaluationScores {
    pub fn zero() -> Self {
        EvaluationScores::with_overall([0; 4], 0.0)
    }

    /// Clamps `dims` to [0, 10] and combines them with `weights`.
    pub fn from_dims(dims: [u8; 4], weights: &RubricWeights) -> Result<Self> {
        let dims = dims.map(|d| d.min(10));
        Ok(EvaluationScores::with_overall(dims, combine_scores(dims, weights)?))
    }

    /// Takes `overall` as given, without checking it against the dimensions.
    pub fn with_overall(dims: [u8; 4], overall: f64) -> Self {
        let [relevance, persuasiveness, logical_consistency, evidence_usage] = dims;
        EvaluationScores {
            relevance,
            persuasiveness,
            logical_consistency,
            evidence_usage,
            overall,
        }
    }

    pub fn dims(&self) -> [u8; 4] {
        [
            self.relevance,
            self.persuasiveness,
            self.logical_consistency,
            self.evidence_usage,
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.dims().iter().all(|d| *d <= 10) && (0.0..=10.0).contains(&self.overall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RubricWeights {
    pub relevance: f64,
    pub persuasiveness: f64,
    pub logical_consistency: f64,
    pub evidence_usage: f64,
}

impl Default for RubricWeights {
    fn default() -> Self {
        RubricWeights {
            relevance: 0.30,
            persuasiveness: 0.30,
            logical_consistency: 0.25,
            evidence_usage: 0.15,
        }
    }
}

impl RubricWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.relevance,
            self.persuasiveness,
            self.logical_consistency,
            self.evidence_usage,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("rubric weights must be finite and non-negative"));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("rubric weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Weighted sum of the four dimensions, rounded to two decimals.
pub fn combine_scores(dims: [u8; 4], weights: &RubricWeights) -> Result<f64> {
    weights.validate()?;
    let total: f64 = dims
        .iter()
        .zip(weights.as_array())
        .map(|(d, w)| f64::from((*d).min(10)) * w)
        .sum();
    Ok(((total * 100.0).round() / 100.0).clamp(0.0, 10.0))
}

/// Scores from the evaluator role plus whether the stub stood in for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub scores: EvaluationScores,
    pub degraded: bool,
}

pub fn score_argument_detailed(
    gateway: &Gateway,
    argument: &str,
    context: &DebateState,
    weights: &RubricWeights,
) -> Result<Scored> {
    if argument.trim().is_empty() {
        return Err(Error::invalid("argument is empty"));
    }
    weights.validate()?;
    let raw = gateway.raw_evaluate(argument, context)?;
    Ok(Scored {
        scores: EvaluationScores::from_dims(raw.dims, weights)?,
        degraded: raw.degraded,
    })
}

pub fn score_argument(
    gateway: &Gateway,
    argument: &str,
    context: &DebateState,
    weights: &RubricWeights,
) -> Result<EvaluationScores> {
    score_argument_detailed(gateway, argument, context, weights).map(|s| s.scores)
}

/// Flags against the shipped lexicon.
pub fn flag_fallacies(argument: &str) -> Result<Vec<FallacyFlag>> {
    Lexicon::default().flag(argument)
}

fn improvement(dimension: usize) -> &'static str {
    match dimension {
        0 => "Tie your argument more directly to the motion and to your opponent's last point.",
        1 => "Make the stakes concrete so the audience feels why your side matters.",
        2 => "Spell out each step of your reasoning so the conclusion follows from the premises.",
        _ => "Support your main claim with a specific fact, figure or source.",
    }
}

/// Plain feedback: every dimension with its score, one suggestion for each
/// dimension below [`SUGGESTION_THRESHOLD`], then any fallacy flags.
pub fn feedback_draft(scores: &EvaluationScores, flags: &[FallacyFlag], argument: &str) -> String {
    let mut out = String::new();
    for (i, (name, score)) in DIMENSION_NAMES.iter().zip(scores.dims()).enumerate() {
        out.push_str(&format!("{name}: {score}/10"));
        if score < SUGGESTION_THRESHOLD {
            out.push_str(&format!(" - {}", improvement(i)));
        }
        out.push('\n');
    }
    out.push_str(&format!("Overall: {:.2}/10", scores.overall));
    let chars: Vec<char> = argument.chars().collect();
    for flag in flags {
        let end = flag.span.end.min(chars.len());
        let start = flag.span.start.min(end);
        let quoted: String = chars[start..end].iter().collect();
        out.push_str(&format!(
            "\nPossible {} fallacy: \"{}\"",
            flag.kind.as_str().replace('-', " "),
            quoted
        ));
    }
    out
}

/// Feedback text, phrased by the assistant role when it is a live model.
pub fn build_feedback(
    gateway: &Gateway,
    scores: &EvaluationScores,
    flags: &[FallacyFlag],
    argument: &str,
) -> String {
    let draft = feedback_draft(scores, flags, argument);
    match gateway.phrase_feedback(&draft) {
        Ok(c) if !c.degraded && !c.text.trim().is_empty() => c.text,
        _ => draft,
    }
}
