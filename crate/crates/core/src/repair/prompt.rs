use std::collections::BTreeMap;
use std::path::Path;

use super::{Feedback, RepairTranscript};
use crate::synth::{render, Prompt, TemplateError};

/// Prompt templates. Slots are written `{{name}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    pub initial_system: String,
    pub initial_user: String,
    pub repair_user: String,
    pub coverage_user: String,
    pub definition: String,
    pub checklist: String,
    pub planner_excerpt: String,
    pub examples: [String; 2],
}

impl Default for Templates {
    fn default() -> Self {
        Templates {
            initial_system: include_str!("../../templates/initial_system.txt").into(),
            initial_user: include_str!("../../templates/initial_user.txt").into(),
            repair_user: include_str!("../../templates/repair_user.txt").into(),
            coverage_user: include_str!("../../templates/coverage_user.txt").into(),
            definition: include_str!("../../templates/definition.txt").into(),
            checklist: include_str!("../../templates/checklist.txt").into(),
            planner_excerpt: include_str!("../../templates/planner_excerpt.txt").into(),
            examples: [
                include_str!("../../templates/examples/visitall.py").into(),
                include_str!("../../templates/examples/logistics.py").into(),
            ],
        }
    }
}

impl Templates {
    /// Defaults, with any file present in `dir` replacing its counterpart.
    /// File names match the shipped templates (`initial_user.txt`, ...).
    pub fn with_overrides(dir: &Path) -> std::io::Result<Self> {
        let mut t = Templates::default();
        let fields: [(&str, &mut String); 7] = [
            ("initial_system.txt", &mut t.initial_system),
            ("initial_user.txt", &mut t.initial_user),
            ("repair_user.txt", &mut t.repair_user),
            ("coverage_user.txt", &mut t.coverage_user),
            ("definition.txt", &mut t.definition),
            ("checklist.txt", &mut t.checklist),
            ("planner_excerpt.txt", &mut t.planner_excerpt),
        ];
        for (name, field) in fields {
            let path = dir.join(name);
            if path.exists() {
                *field = std::fs::read_to_string(path)?;
            }
        }
        Ok(t)
    }
}

fn slots<'a>(pairs: &[(&'a str, &str)]) -> BTreeMap<&'a str, String> {
    pairs.iter().map(|(k, v)| (*k, v.trim_end().to_string())).collect()
}

/// The first prompt of a synthesis run. It never mentions the property the
/// validator checks.
pub fn build_initial_prompt(
    templates: &Templates,
    domain_text: &str,
    smallest_task_text: &str,
    largest_task_text: &str,
    examples: &[String],
    planner_excerpt: &str,
    checklist: &str,
) -> Result<Prompt, TemplateError> {
    let mut pairs = vec![
        ("domain", domain_text),
        ("smallest_task", smallest_task_text),
        ("largest_task", largest_task_text),
        ("planner_excerpt", planner_excerpt),
        ("checklist", checklist),
    ];
    if let Some(e) = examples.first() {
        pairs.push(("example_1", e));
    }
    if let Some(e) = examples.get(1) {
        pairs.push(("example_2", e));
    }
    let user = render(&templates.initial_user, &slots(&pairs))?;
    Ok(Prompt::new().system(templates.initial_system.trim_end()).user(user))
}

/// Renders one piece of feedback for a prompt. Counterexamples are embedded
/// as their JSON document, unchanged.
pub fn render_feedback(feedback: &Feedback) -> String {
    match feedback {
        Feedback::Counterexample(cx) => {
            let what = match cx.kind {
                crate::validator::CounterexampleKind::Plateau => format!(
                    "On task {} the state below has value {} but none of its successors has a strictly smaller value.",
                    cx.task_id, cx.h_state
                ),
                crate::validator::CounterexampleKind::DeadEnd => format!(
                    "On task {} hill climbing can reach the state below, which has no applicable action.",
                    cx.task_id
                ),
            };
            format!("{what}\n\n```json\n{}\n```", cx.to_json())
        }
        Feedback::Error { task_id, phase, message, stderr_tail } => {
            let mut s = format!(
                "The heuristic failed while {}{}:\n\n```\n{}\n```",
                phase.describe(),
                task_id.as_ref().map(|t| format!(" on task {t}")).unwrap_or_default(),
                message
            );
            if let Some(tail) = stderr_tail.as_ref().filter(|t| !t.trim().is_empty()) {
                s.push_str(&format!("\n\nStandard error:\n\n```\n{}\n```", tail.trim_end()));
            }
            s
        }
        Feedback::Coverage { task_id, expansions, reason, solved, total } => format!(
            "The heuristic failed to solve training task {task_id} within the limit ({reason}); greedy best-first search expanded {expansions} states before stopping. It solved {solved} of {total} training tasks."
        ),
    }
}

fn request_for(feedback: &Feedback) -> &'static str {
    match feedback {
        Feedback::Counterexample(_) => {
            "Explain why the heuristic fails on this state before writing the new code, and keep what worked on the earlier tasks."
        }
        Feedback::Error { .. } => "Fix the error in the heuristic so that it loads and evaluates every state without raising.",
        Feedback::Coverage { .. } => "Propose a new heuristic that solves more training tasks with greedy best-first search.",
    }
}

fn render_history(history: &RepairTranscript) -> String {
    let mut out = Vec::new();
    for it in &history.iterations {
        let code = it.candidate.as_ref().map_or("(no code block in the response)", |c| c.code.trim_end());
        let feedback = it.feedback.as_ref().map_or_else(|| "passed".to_string(), render_feedback);
        out.push(format!("### Heuristic {}\n\n```python\n{code}\n```\n\nFeedback for heuristic {}:\n\n{feedback}", it.index, it.index));
    }
    out.join("\n\n")
}

/// A prompt asking for a repaired candidate after `feedback`. `history`
/// holds every earlier iteration, the failing one included.
pub fn build_repair_prompt(
    templates: &Templates,
    domain_text: &str,
    failing_task_text: &str,
    feedback: &Feedback,
    history: &RepairTranscript,
    checklist: &str,
) -> Result<Prompt, TemplateError> {
    let feedback_text = render_feedback(feedback);
    let history_text = render_history(history);
    let template = match feedback {
        Feedback::Coverage { .. } => &templates.coverage_user,
        _ => &templates.repair_user,
    };
    let user = render(
        template,
        &slots(&[
            ("definition", &templates.definition),
            ("domain", domain_text),
            ("failing_task", failing_task_text),
            ("feedback", &feedback_text),
            ("history", &history_text),
            ("request", request_for(feedback)),
            ("checklist", checklist),
        ]),
    )?;
    Ok(Prompt::new().system(templates.initial_system.trim_end()).user(user))
}
