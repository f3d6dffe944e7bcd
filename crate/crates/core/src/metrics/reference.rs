//! Published reference magnitudes, kept for report formatting and
//! side-by-side display. They are never used as test targets.

/// Macro expected accuracy and unexpected frequency, discovered graph
/// against reference graph, for the four model/steering combinations.
pub struct GraphComparisonRef {
    pub setting: &'static str,
    pub expected: (f64, f64),
    pub unexpected: (f64, f64),
}

pub const GRAPH_COMPARISON: [GraphComparisonRef; 4] = [
    GraphComparisonRef { setting: "Gemma-2B-IT, role", expected: (0.69, 0.51), unexpected: (0.56, 0.60) },
    GraphComparisonRef { setting: "Gemma-2B-IT, SAE", expected: (0.57, 0.43), unexpected: (0.51, 0.53) },
    GraphComparisonRef { setting: "Llama3-8B-IT, role", expected: (0.57, 0.45), unexpected: (0.47, 0.50) },
    GraphComparisonRef { setting: "Llama3-8B-IT, SAE", expected: (0.74, 0.49), unexpected: (0.46, 0.55) },
];

/// Mean number of values changed per condition.
pub const MEAN_STEERED: [(&str, f64); 4] =
    [("Gemma-2B-IT, role", 14.6), ("Llama3-8B-IT, role", 7.7), ("Gemma-2B-IT, SAE", 4.3), ("Llama3-8B-IT, SAE", 4.2)];

/// Thought/answer inconsistency before and after steering.
pub const INCONSISTENCY: [(&str, f64, f64); 2] = [("Gemma-2B-IT", 0.18, 0.20), ("Llama3-8B-IT", 0.15, 0.15)];
