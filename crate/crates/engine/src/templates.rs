//! Prompt templates shipped with the engine. A template's version is a
//! digest of its text, so editing one invalidates cached responses.

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemplateId {
    Complexity,
    Describe,
    Events,
    Actions,
    ActionOccurrence,
    ActionSmoothness,
    Clarity,
    HerdExtract,
    HerdQuestions,
    Polarity,
    HerdAnswer,
    SplitEvents,
}

impl TemplateId {
    pub const ALL: [TemplateId; 12] = [
        TemplateId::Complexity,
        TemplateId::Describe,
        TemplateId::Events,
        TemplateId::Actions,
        TemplateId::ActionOccurrence,
        TemplateId::ActionSmoothness,
        TemplateId::Clarity,
        TemplateId::HerdExtract,
        TemplateId::HerdQuestions,
        TemplateId::Polarity,
        TemplateId::HerdAnswer,
        TemplateId::SplitEvents,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateId::Complexity => "complexity",
            TemplateId::Describe => "describe",
            TemplateId::Events => "events",
            TemplateId::Actions => "actions",
            TemplateId::ActionOccurrence => "action_occurrence",
            TemplateId::ActionSmoothness => "action_smoothness",
            TemplateId::Clarity => "clarity",
            TemplateId::HerdExtract => "herd_extract",
            TemplateId::HerdQuestions => "herd_questions",
            TemplateId::Polarity => "polarity",
            TemplateId::HerdAnswer => "herd_answer",
            TemplateId::SplitEvents => "split_events",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            TemplateId::Complexity => include_str!("../assets/templates/complexity.txt"),
            TemplateId::Describe => include_str!("../assets/templates/describe.txt"),
            TemplateId::Events => include_str!("../assets/templates/events.txt"),
            TemplateId::Actions => include_str!("../assets/templates/actions.txt"),
            TemplateId::ActionOccurrence => {
                include_str!("../assets/templates/action_occurrence.txt")
            }
            TemplateId::ActionSmoothness => {
                include_str!("../assets/templates/action_smoothness.txt")
            }
            TemplateId::Clarity => include_str!("../assets/templates/clarity.txt"),
            TemplateId::HerdExtract => include_str!("../assets/templates/herd_extract.txt"),
            TemplateId::HerdQuestions => include_str!("../assets/templates/herd_questions.txt"),
            TemplateId::Polarity => include_str!("../assets/templates/polarity.txt"),
            TemplateId::HerdAnswer => include_str!("../assets/templates/herd_answer.txt"),
            TemplateId::SplitEvents => include_str!("../assets/templates/split_events.txt"),
        }
    }

    /// `<name>@<first 12 hex digits of sha256(text)>`.
    pub fn version(self) -> String {
        let digest = Sha256::digest(self.text().as_bytes());
        format!("{}@{}", self.name(), &hex::encode(digest)[..12])
    }

    /// Substitutes `{key}` placeholders. Unknown placeholders are left alone.
    pub fn render(self, vars: &[(&str, &str)]) -> String {
        let mut out = self.text().to_string();
        for (k, v) in vars {
            out = out.replace(&format!("{{{k}}}"), v);
        }
        out
    }
}

/// Fixed follow-up questions asked about every extracted human action.
pub const SMOOTHNESS_QUESTIONS: [&str; 3] = [
    "Does the action proceed without sudden jumps or freezes?",
    "Do the body movements during the action look natural rather than rigid?",
    "Does the action flow continuously from its beginning to its end?",
];

pub fn occurrence_question(subject: &str, action: &str) -> String {
    format!("Did the {subject} {action} in the video?")
}
