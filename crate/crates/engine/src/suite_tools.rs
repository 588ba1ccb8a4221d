//! Suite-side LLM pipelines that fill in prompt-record fields: complexity,
//! human actions, ground-truth events, HERD questions with polarity, and
//! per-event prompts.

use std::collections::BTreeMap;

use locot2v_core::{ActionSpec, ComplexityScore, EventSpec, HerdDimension, HerdQuestion, Polarity, PromptRecord};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evaluate::parse_events;
use crate::pool::par_map;
use crate::provider::{Hub, ProviderKind};
use crate::suite::Suite;
use crate::templates::TemplateId;

const JUDGE: ProviderKind = ProviderKind::ComplexityJudge;

fn schema(message: impl Into<String>) -> Error {
    Error::provider(JUDGE, message)
}

fn require_nonempty(what: &str, text: &str) -> Result<()> {
    if text.trim().is_empty() {
        return Err(Error::Usage(format!("{what} is empty")));
    }
    Ok(())
}

pub fn score_prompt_complexity(hub: &Hub, prompt: &str) -> Result<ComplexityScore> {
    require_nonempty("prompt", prompt)?;
    hub.llm_json(TemplateId::Complexity, &[("prompt_text", prompt)], &[], |v| {
        let axis = |key: &str| -> Result<u8> {
            let s = v
                .get(key)
                .and_then(|o| o.get("score"))
                .and_then(Value::as_u64)
                .ok_or_else(|| schema(format!("{key}.score missing or not an integer")))?;
            u8::try_from(s).map_err(|_| schema(format!("{key}.score {s} out of range")))
        };
        ComplexityScore::new(
            axis("semantic_complexity")?,
            axis("structural_complexity")?,
            axis("control_complexity")?,
        )
        .map_err(|e| schema(e.to_string()))
    })
}

pub fn extract_human_actions(hub: &Hub, prompt: &str) -> Result<Vec<ActionSpec>> {
    require_nonempty("prompt", prompt)?;
    hub.llm_json(TemplateId::Actions, &[("prompt_text", prompt)], &[], |v| {
        let arr = v.as_array().ok_or_else(|| schema("actions reply is not an array"))?;
        arr.iter()
            .enumerate()
            .map(|(i, a)| {
                let field = |k: &str| a.get(k).and_then(Value::as_str).map(str::trim).unwrap_or("");
                let (subject, action) = (field("subject"), field("action"));
                if subject.is_empty() || action.is_empty() {
                    return Err(schema(format!("action {i} lacks subject or action")));
                }
                Ok(ActionSpec {
                    subject: subject.into(),
                    action: action.into(),
                })
            })
            .collect()
    })
}

/// Ground-truth events of a prompt base.
pub fn extract_prompt_events(hub: &Hub, prompt_base: &str) -> Result<Vec<EventSpec>> {
    require_nonempty("prompt base", prompt_base)?;
    hub.llm_json(TemplateId::Events, &[("description_text", prompt_base)], &[], parse_events)
}

/// Reads a reply object keyed by the seven aspect titles into a per-aspect
/// map of non-empty strings.
fn seven_key_map(v: &Value, what: &str) -> Result<BTreeMap<HerdDimension, String>> {
    let obj = v.as_object().ok_or_else(|| schema(format!("{what} reply is not an object")))?;
    let mut out = BTreeMap::new();
    for (k, val) in obj {
        if let (Some(d), Some(s)) = (HerdDimension::parse(k), val.as_str()) {
            if !s.trim().is_empty() {
                out.insert(d, s.trim().to_string());
            }
        }
    }
    let missing: Vec<&str> = HerdDimension::ALL
        .iter()
        .filter(|d| !out.contains_key(d))
        .map(|d| d.title())
        .collect();
    if !missing.is_empty() {
        return Err(schema(format!("{what} reply lacks {}", missing.join(", "))));
    }
    Ok(out)
}

/// Splits free-form expectation text into the seven aspects.
pub fn extract_dimension_evaluations(hub: &Hub, evaluation_text: &str) -> Result<BTreeMap<HerdDimension, String>> {
    require_nonempty("evaluation text", evaluation_text)?;
    hub.llm_json(
        TemplateId::HerdExtract,
        &[("evaluation_text", evaluation_text)],
        &[],
        |v| seven_key_map(v, "aspect extraction"),
    )
}

/// Questions for one aspect plus the texts accepted as duplicates after the
/// single regeneration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratedQuestions {
    pub questions: Vec<(HerdDimension, String)>,
    pub duplicates: Vec<(HerdDimension, String)>,
}

/// Asks for one question per aspect per slot until `per_dimension` slots
/// are filled. A question repeating an earlier one of the same aspect is
/// regenerated once and then kept with a flag.
pub fn generate_herd_questions(
    hub: &Hub,
    evaluations: &BTreeMap<HerdDimension, String>,
    per_dimension: usize,
) -> Result<GeneratedQuestions> {
    let missing: Vec<&str> = HerdDimension::ALL
        .iter()
        .filter(|d| !evaluations.contains_key(d))
        .map(|d| d.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Usage(format!("aspect evaluations lack {}", missing.join(", "))));
    }
    let text_obj: serde_json::Map<String, Value> = evaluations
        .iter()
        .map(|(d, t)| (d.title().to_string(), json!(t)))
        .collect();
    let evaluation_text = Value::Object(text_obj).to_string();
    let ask = |slot: usize, regen: usize| -> Result<BTreeMap<HerdDimension, String>> {
        hub.llm_json(
            TemplateId::HerdQuestions,
            &[("evaluation_text", &evaluation_text)],
            &[("slot", json!(slot)), ("regen", json!(regen))],
            |v| {
                let m = seven_key_map(v, "question generation")?;
                if let Some((d, q)) = m.iter().find(|(_, q)| !q.ends_with('?')) {
                    return Err(schema(format!("{} question does not end with '?': {q}", d.title())));
                }
                Ok(m)
            },
        )
    };
    let mut by_dim: BTreeMap<HerdDimension, Vec<String>> = BTreeMap::new();
    let mut out = GeneratedQuestions::default();
    for slot in 0..per_dimension {
        let first = ask(slot, 0)?;
        let mut retry: Option<BTreeMap<HerdDimension, String>> = None;
        for d in HerdDimension::ALL {
            let seen = by_dim.entry(d).or_default();
            let mut q = first[&d].clone();
            if seen.contains(&q) {
                if retry.is_none() {
                    retry = Some(ask(slot, 1)?);
                }
                q = retry.as_ref().expect("regenerated above")[&d].clone();
                if seen.contains(&q) {
                    out.duplicates.push((d, q.clone()));
                }
            }
            seen.push(q);
        }
    }
    for d in HerdDimension::ALL {
        for q in by_dim.remove(&d).unwrap_or_default() {
            out.questions.push((d, q));
        }
    }
    Ok(out)
}

pub fn annotate_polarity(hub: &Hub, question: &str) -> Result<Polarity> {
    require_nonempty("question", question)?;
    hub.llm(TemplateId::Polarity, &[("question_text", question)], &[], |text| {
        let word: String = text
            .trim()
            .chars()
            .take_while(|c| c.is_alphabetic())
            .flat_map(char::to_lowercase)
            .collect();
        match word.as_str() {
            "positive" => Ok(Polarity::Positive),
            "negative" => Ok(Polarity::Negative),
            _ => Err(schema(format!("polarity reply is neither positive nor negative: {}", text.trim()))),
        }
    })
}

/// One self-contained prompt per event, in event order.
pub fn split_event_prompts(hub: &Hub, prompt: &str, events: &[EventSpec]) -> Result<Vec<String>> {
    require_nonempty("prompt", prompt)?;
    if events.is_empty() {
        return Err(Error::Usage("no events to split the prompt by".into()));
    }
    let events_json = serde_json::to_string(events).map_err(|e| Error::json("events", e))?;
    let count = events.len().to_string();
    hub.llm_json(
        TemplateId::SplitEvents,
        &[("event_count", &count), ("events_json", &events_json), ("prompt_text", prompt)],
        &[],
        |v| {
            let arr = v.as_array().ok_or_else(|| schema("split reply is not an array"))?;
            if arr.len() != events.len() {
                return Err(schema(format!("expected {} sub-prompts, got {}", events.len(), arr.len())));
            }
            arr.iter()
                .enumerate()
                .map(|(i, p)| match p.as_str().map(str::trim) {
                    Some(s) if !s.is_empty() => Ok(s.to_string()),
                    _ => Err(schema(format!("sub-prompt {i} is empty or not a string"))),
                })
                .collect()
        },
    )
}

/// Which record fields a suite pass fills in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tool {
    Complexity,
    Actions,
    Events,
    HerdQuestions,
}

/// Outcome of a suite pass: per-record notes and failures.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ToolReport {
    pub updated: usize,
    pub flags: Vec<String>,
    pub failures: Vec<String>,
}

/// Options for [`apply_tool`].
#[derive(Debug, Clone, Default)]
pub struct ToolOptions {
    pub workers: usize,
    pub herd_questions_per_dimension: usize,
    /// Free-form expectation text per sample id for HERD generation; the
    /// prompt text is used where absent.
    pub evaluations: BTreeMap<String, String>,
    /// Keep fields that are already filled in.
    pub only_missing: bool,
}

fn fill(hub: &Hub, tool: Tool, record: &mut PromptRecord, opts: &ToolOptions) -> Result<Vec<String>> {
    let mut flags = Vec::new();
    match tool {
        Tool::Complexity => record.complexity = Some(score_prompt_complexity(hub, &record.prompt_text)?),
        Tool::Actions => record.human_actions = extract_human_actions(hub, &record.prompt_text)?,
        Tool::Events => record.ground_truth_events = extract_prompt_events(hub, &record.prompt_base)?,
        Tool::HerdQuestions => {
            let text = opts.evaluations.get(&record.id).unwrap_or(&record.prompt_text);
            let evaluations = extract_dimension_evaluations(hub, text)?;
            let generated = generate_herd_questions(hub, &evaluations, opts.herd_questions_per_dimension)?;
            for (d, q) in &generated.duplicates {
                flags.push(format!("{}: duplicate {} question kept after regeneration: {q}", record.id, d.as_str()));
            }
            record.herd_questions = generated
                .questions
                .into_iter()
                .map(|(dimension, text)| {
                    let polarity = annotate_polarity(hub, &text)?;
                    Ok(HerdQuestion {
                        dimension,
                        text,
                        polarity,
                    })
                })
                .collect::<Result<_>>()?;
        }
    }
    Ok(flags)
}

fn already_filled(tool: Tool, r: &PromptRecord) -> bool {
    match tool {
        Tool::Complexity => r.complexity.is_some(),
        Tool::Actions => !r.human_actions.is_empty(),
        Tool::Events => !r.ground_truth_events.is_empty(),
        Tool::HerdQuestions => !r.herd_questions.is_empty(),
    }
}

/// Runs one tool over every record. A failing record keeps its old fields
/// and is listed in the report.
pub fn apply_tool(hub: &Hub, suite: &mut Suite, tool: Tool, opts: &ToolOptions) -> ToolReport {
    let results = par_map(&suite.samples, opts.workers, |_, rec| {
        if opts.only_missing && already_filled(tool, rec) {
            return None;
        }
        let mut r = rec.clone();
        Some(fill(hub, tool, &mut r, opts).map(|flags| (r, flags)))
    });
    let mut report = ToolReport::default();
    for (slot, res) in suite.samples.iter_mut().zip(results) {
        match res {
            None => {}
            Some(Ok((r, flags))) => {
                *slot = r;
                report.updated += 1;
                report.flags.extend(flags);
            }
            Some(Err(e)) => report.failures.push(format!("{}: {e}", slot.id)),
        }
    }
    report
}

/// Mean complexity over the records that have a score.
pub fn suite_complexity(suite: &Suite) -> Option<f64> {
    let v: Vec<f64> = suite.samples.iter().filter_map(|r| r.complexity.map(|c| c.average)).collect();
    locot2v_core::math::mean(&v)
}

/// Per-event prompts for every record with events, keyed by sample id.
pub fn split_suite(hub: &Hub, suite: &Suite, workers: usize) -> (BTreeMap<String, Vec<String>>, Vec<String>) {
    let results = par_map(&suite.samples, workers, |_, r| {
        if r.ground_truth_events.is_empty() {
            return Err(Error::Usage("no ground-truth events".into()));
        }
        split_event_prompts(hub, &r.prompt_text, &r.ground_truth_events)
    });
    let mut out = BTreeMap::new();
    let mut failures = Vec::new();
    for (r, res) in suite.samples.iter().zip(results) {
        match res {
            Ok(p) => {
                out.insert(r.id.clone(), p);
            }
            Err(e) => failures.push(format!("{}: {e}", r.id)),
        }
    }
    (out, failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::{default_specs, ProviderSpec};

    fn hub_with(params: &[(&str, Value)]) -> Hub {
        let mut specs = default_specs();
        let mut judge = ProviderSpec::mock("default");
        for (k, v) in params {
            judge = judge.with_param(k, v.clone());
        }
        specs.insert(JUDGE, judge);
        Hub::new(specs, None, 2)
    }

    #[test]
    fn complexity_average_and_range() {
        let hub = hub_with(&[("complexity", json!([9, 9, 8]))]);
        let c = score_prompt_complexity(&hub, "A long prompt.").unwrap();
        assert!((c.average - 26.0 / 3.0).abs() < 1e-12);
        let bad = hub_with(&[("complexity", json!([11, 5, 5]))]);
        assert!(score_prompt_complexity(&bad, "x").is_err());
        assert!(score_prompt_complexity(&hub, " ").is_err());
    }

    #[test]
    fn actions_keep_order() {
        let acts = json!([{"subject": "chef", "action": "dices onions"}, {"subject": "waiter", "action": "pours wine"}]);
        let hub = hub_with(&[("actions", acts)]);
        let a = extract_human_actions(&hub, "A chef dices onions while a waiter pours wine.").unwrap();
        assert_eq!(a[0].subject, "chef");
        assert_eq!(a[1].action, "pours wine");
        assert!(extract_human_actions(&Hub::mocked(), "Mountains at dawn.").unwrap().is_empty());
    }

    #[test]
    fn herd_generation_counts_and_polarity() {
        let hub = Hub::mocked();
        let ev = extract_dimension_evaluations(&hub, "Viewers expect a tense, coherent story.").unwrap();
        let g = generate_herd_questions(&hub, &ev, 6).unwrap();
        assert_eq!(g.questions.len(), 42);
        assert!(g.duplicates.is_empty());
        assert!(g.questions.iter().all(|(_, q)| q.ends_with('?')));
        let mut partial = ev.clone();
        partial.remove(&HerdDimension::Themes);
        assert!(matches!(generate_herd_questions(&hub, &partial, 6), Err(Error::Usage(_))));
    }

    #[test]
    fn duplicate_questions_regenerate_once_then_flag() {
        let hub = hub_with(&[("fixed_slot", json!(0))]);
        let ev = extract_dimension_evaluations(&hub, "x").unwrap();
        let g = generate_herd_questions(&hub, &ev, 3).unwrap();
        assert_eq!(g.questions.len(), 21);
        // Slot 1 is fixed by the regeneration; slot 2 repeats it and is kept.
        assert_eq!(g.duplicates.len(), 7);
        assert!(g.duplicates.iter().all(|(_, q)| q.contains("variant 1")));
    }

    #[test]
    fn polarity_canonicalization() {
        let hub = Hub::mocked();
        assert_eq!(
            annotate_polarity(&hub, "Did the characters lack depth and have unclear relationships?").unwrap(),
            Polarity::Negative
        );
        assert_eq!(
            annotate_polarity(&hub, "Did the video make you feel tense and claustrophobic?").unwrap(),
            Polarity::Positive
        );
    }

    #[test]
    fn split_counts() {
        let hub = Hub::mocked();
        let ev = |s: &str| EventSpec::new(s, s, "", "", "");
        let prompt = "A fox wakes. The fox hunts. The fox eats. The fox sleeps.";
        let four: Vec<EventSpec> = ["a", "b", "c", "d"].map(ev).to_vec();
        assert_eq!(split_event_prompts(&hub, prompt, &four).unwrap().len(), 4);
        let one = split_event_prompts(&hub, prompt, &[ev("a")]).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].contains("wakes") && one[0].contains("sleeps"));
        assert!(split_event_prompts(&hub, prompt, &[]).is_err());
    }
}
