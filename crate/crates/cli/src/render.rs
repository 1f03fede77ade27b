//! Plain-text view of a session, one section per pipeline stage.

use std::fmt::Write as _;

use dblpqa::session::{SessionState, StageError};

fn stage_error(out: &mut String, e: &Option<StageError>) {
    if let Some(e) = e {
        let _ = writeln!(out, "  ! {}: {}", e.code, e.message);
    }
}

pub fn session(s: &SessionState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "question: {}", s.question);

    let _ = writeln!(out, "\n[1] logical form");
    if let Some(lf) = &s.logical_form {
        let _ = writeln!(out, "  {}", lf.text);
        if !lf.parsed {
            let _ = writeln!(out, "  (did not parse; raw output)");
        }
    }
    stage_error(&mut out, &s.stage_errors.translator);

    let _ = writeln!(out, "\n[2] entities");
    for (i, m) in s.mentions.iter().enumerate() {
        let _ = writeln!(
            out,
            "  mention {i}: {} ({})",
            m.mention.surface, m.mention.inferred_kind
        );
        if let Some(l) = &m.literal {
            let _ = writeln!(out, "    literal {l:?}");
        }
        for (j, c) in m.candidates.iter().enumerate() {
            let mark = if m.selected_index == Some(j) { "x" } else { " " };
            let _ = writeln!(out, "    [{mark}] {j}: {} <{}> score {}", c.label, c.uri, c.score);
        }
        if m.literal.is_none() && m.candidates.is_empty() {
            let _ = writeln!(out, "    no candidates");
        }
        stage_error(&mut out, &m.error);
    }
    stage_error(&mut out, &s.stage_errors.linker);

    let _ = writeln!(out, "\n[3] templates");
    for (i, t) in s.template_matches.iter().enumerate() {
        let mark = if s.selected_template == Some(i) { "x" } else { " " };
        let _ = writeln!(out, "  [{mark}] {i}: d={:.3} f={} {}", t.distance, t.frequency, t.template);
    }
    stage_error(&mut out, &s.stage_errors.template);

    let _ = writeln!(out, "\n[4] query");
    if let Some(q) = &s.query {
        for line in q.text.lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    for d in &s.validation {
        let _ = writeln!(out, "  {:?} {}: {}", d.severity, d.code, d.message);
    }
    stage_error(&mut out, &s.stage_errors.query);

    let _ = writeln!(out, "\n[5] answers");
    if let Some(table) = &s.answers {
        if let Some(b) = table.as_boolean() {
            let _ = writeln!(out, "  {b}");
        } else {
            let _ = writeln!(out, "  {}", table.columns.join(" | "));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|v| v.canonical().unwrap_or_default()).collect();
                let _ = writeln!(out, "  {}", cells.join(" | "));
            }
            let _ = writeln!(out, "  ({} rows{})", table.rows.len(), if table.truncated { ", truncated" } else { "" });
        }
    }
    stage_error(&mut out, &s.stage_errors.execution);
    out
}
