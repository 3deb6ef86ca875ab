use serde::{Deserialize, Serialize};
use std::fmt;

/// The four kinds of idea facet a node can hold.
///
/// Serialized with the human-readable labels the prompts use, so documents
/// and model responses share one vocabulary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FacetType {
    #[default]
    #[serde(rename = "Problem Description and RQ")]
    ProblemDescriptionAndRQ,
    #[serde(rename = "Proposed Design and Solution")]
    ProposedDesignAndSolution,
    #[serde(rename = "Evaluation Method")]
    EvaluationMethod,
    #[serde(rename = "Contribution and Impact")]
    ContributionAndImpact,
}

impl FacetType {
    /// Canonical brief order: problem, design, evaluation, contribution.
    pub const ALL: [FacetType; 4] = [
        FacetType::ProblemDescriptionAndRQ,
        FacetType::ProposedDesignAndSolution,
        FacetType::EvaluationMethod,
        FacetType::ContributionAndImpact,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FacetType::ProblemDescriptionAndRQ => "Problem Description and RQ",
            FacetType::ProposedDesignAndSolution => "Proposed Design and Solution",
            FacetType::EvaluationMethod => "Evaluation Method",
            FacetType::ContributionAndImpact => "Contribution and Impact",
        }
    }

    pub fn ordinal(self) -> usize {
        match self {
            FacetType::ProblemDescriptionAndRQ => 0,
            FacetType::ProposedDesignAndSolution => 1,
            FacetType::EvaluationMethod => 2,
            FacetType::ContributionAndImpact => 3,
        }
    }

    /// The facet that follows this one in canonical order.
    pub fn next(self) -> Option<FacetType> {
        FacetType::ALL.get(self.ordinal() + 1).copied()
    }

    /// Lenient parse for labels coming back from a model.
    ///
    /// Accepts the canonical labels plus the spellings that appear in the
    /// prompt examples ("Problem Description and Research Question",
    /// "Proposed Design/Solution") and a few obvious abbreviations.
    pub fn parse_label(label: &str) -> Option<FacetType> {
        let key: String = label
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        let facet = match key.as_str() {
            "problemdescriptionandrq"
            | "problemdescriptionandresearchquestion"
            | "problemdescriptionresearchquestion"
            | "problemdescriptionrq"
            | "problemdescription"
            | "researchquestion"
            | "rq"
            | "problem" => FacetType::ProblemDescriptionAndRQ,
            "proposeddesignandsolution"
            | "proposeddesignsolution"
            | "proposeddesign"
            | "designandsolution"
            | "proposedsolution"
            | "design" => FacetType::ProposedDesignAndSolution,
            "evaluationmethod" | "evaluationmethods" | "evaluation" => FacetType::EvaluationMethod,
            "contributionandimpact" | "contributionimpact" | "contribution" | "impact" => {
                FacetType::ContributionAndImpact
            }
            _ => return None,
        };
        Some(facet)
    }
}

impl fmt::Display for FacetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_with_exact_labels() {
        let labels: Vec<String> = FacetType::ALL
            .iter()
            .map(|f| serde_json::to_string(f).unwrap())
            .collect();
        assert_eq!(
            labels,
            [
                "\"Problem Description and RQ\"",
                "\"Proposed Design and Solution\"",
                "\"Evaluation Method\"",
                "\"Contribution and Impact\""
            ]
        );
    }

    #[test]
    fn parses_example_spellings() {
        assert_eq!(
            FacetType::parse_label("Problem Description and Research Question"),
            Some(FacetType::ProblemDescriptionAndRQ)
        );
        assert_eq!(
            FacetType::parse_label("Proposed Design/Solution"),
            Some(FacetType::ProposedDesignAndSolution)
        );
        assert_eq!(FacetType::parse_label("Evaluation Methods"), Some(FacetType::EvaluationMethod));
        assert_eq!(FacetType::parse_label("Limitations"), None);
        for facet in FacetType::ALL {
            assert_eq!(FacetType::parse_label(facet.label()), Some(facet));
        }
    }

    #[test]
    fn canonical_successor_chain() {
        assert_eq!(FacetType::EvaluationMethod.next(), Some(FacetType::ContributionAndImpact));
        assert_eq!(FacetType::ContributionAndImpact.next(), None);
    }
}
