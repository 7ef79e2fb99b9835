use std::fmt::Write;

use super::{CycleBasis, Incidence};

/// Graphviz dump of the basis orientation: tree edges green, back edges red,
/// bridges dashed grey. `labels` maps node index to the printed bus id.
pub fn to_dot(inc: &Incidence, basis: &CycleBasis, labels: &[usize]) -> String {
    let oriented = basis.oriented(inc);
    let mut out = String::from("digraph topology {\n  node [shape=circle];\n");
    for (k, label) in labels.iter().enumerate().take(inc.n()) {
        let root = if basis.roots().contains(&k) { ", peripheries=2" } else { "" };
        let _ = writeln!(out, "  {label} [label=\"{label}\"{root}];");
    }
    let role = |e: usize| {
        if basis.bridges().contains(&e) {
            ("bridge", "gray", "dashed")
        } else if basis.back_edges().contains(&e) {
            ("back", "red", "solid")
        } else {
            ("tree", "green", "solid")
        }
    };
    for (e, &(s, t)) in oriented.ends().iter().enumerate() {
        let (name, color, style) = role(e);
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"e{}\", role={name}, color={color}, style={style}];",
            labels[s],
            labels[t],
            e + 1
        );
    }
    out.push_str("}\n");
    out
}
