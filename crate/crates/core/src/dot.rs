//! Graphviz export of unrollings.

use std::fmt::Write as _;

use crate::model::{Choice, Unrolled};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One DOT node per unrolled position. The recorded choice is drawn bold,
/// holes are dashed.
pub fn to_dot(tree: &Unrolled) -> String {
    let mut out = String::from("digraph unrolling {\n  node [fontname=\"Helvetica\"];\n");
    let mut next = 0usize;
    emit(tree, &mut out, &mut next);
    out.push_str("}\n");
    out
}

fn emit(t: &Unrolled, out: &mut String, next: &mut usize) -> usize {
    let id = *next;
    *next += 1;
    let site = t.site();
    match t {
        Unrolled::Leaf { payoff, .. } => {
            let body: Vec<String> = payoff.iter().map(|(a, u)| format!("{a}: {u}")).collect();
            let _ = writeln!(
                out,
                "  v{id} [shape=box, label=\"{}\\n{}@{}\"];",
                escape(&body.join(", ")),
                escape(&site.label),
                site.n
            );
        }
        Unrolled::Hole(_) => {
            let _ = writeln!(
                out,
                "  v{id} [shape=ellipse, style=dashed, label=\"...\\n{}@{}\"];",
                escape(&site.label),
                site.n
            );
        }
        Unrolled::Node {
            agent,
            choice,
            left,
            right,
            ..
        } => {
            let _ = writeln!(
                out,
                "  v{id} [shape=ellipse, label=\"{}\\n{}@{}\"];",
                escape(agent.as_str()),
                escape(&site.label),
                site.n
            );
            for (c, child) in [(Choice::Left, left), (Choice::Right, right)] {
                let cid = emit(child, out, next);
                let style = if c == *choice { ", style=bold" } else { "" };
                let _ = writeln!(out, "  v{id} -> v{cid} [label=\"{c}\"{style}];");
            }
        }
    }
    id
}
