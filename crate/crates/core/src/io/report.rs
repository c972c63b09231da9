//! Human-readable rendering of condition reports. Machine-readable output
//! is the `serde_json` serialization of the same structures (0-based ids).

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::conditions::ConditionReport;
use crate::graph::Partition;

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn format_complex(z: Complex64) -> String {
    let im = if z.im.abs() < 1e-12 { 0.0 } else { z.im };
    if im == 0.0 {
        format!("{:.6}", z.re)
    } else if im > 0.0 {
        format!("{:.6} + {:.6}i", z.re, im)
    } else {
        format!("{:.6} - {:.6}i", z.re, -im)
    }
}

fn ids(nodes: &[usize]) -> String {
    let labels: Vec<String> = nodes.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", labels.join(","))
}

/// Multi-line summary with 1-based node and cluster labels.
pub fn render_text(report: &ConditionReport, p: &Partition) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "partition:");
    for (s, members) in p.clusters().iter().enumerate() {
        let _ = writeln!(
            out,
            "  cluster {}: nodes {} representative {}",
            s + 1,
            ids(members),
            p.representative(s) + 1
        );
    }

    let _ = writeln!(out, "(A1) equal frequencies in clusters: {}", verdict(report.a1.pass));
    for v in &report.a1.violations {
        let _ = writeln!(
            out,
            "  cluster {}: nodes {} and {} differ",
            v.cluster + 1,
            v.nodes.0 + 1,
            v.nodes.1 + 1
        );
    }

    let _ = writeln!(out, "(A2) uniform inter-cluster in-degrees: {}", verdict(report.a2.pass));
    for pair in &report.a2.pairs {
        let degrees: Vec<String> = pair.degrees.iter().map(usize::to_string).collect();
        let _ = writeln!(
            out,
            "  c_{}{}: {{{}}}{}",
            pair.s + 1,
            pair.r + 1,
            degrees.join(","),
            if pair.uniform() { "" } else { "  (not uniform)" }
        );
    }
    let card = &report.structure.cardinalities;
    let _ = writeln!(
        out,
        "  c_in = {}, c_out = {}, c_max = {}",
        card.c_in, card.c_out, card.c_max
    );

    let a3 = &report.a3;
    let _ = writeln!(out, "(A3) plasticity bounds: {}", verdict(a3.pass));
    let _ = writeln!(out, "  w_min - mu*delta*c_max/gamma = {:.6}", a3.l7);
    match a3.l8 {
        Some(l8) => {
            let _ = writeln!(out, "  second inequality left side = {l8:.6} (must be < 1)");
        }
        None => {
            let _ = writeln!(out, "  second inequality: not applicable (first is violated)");
        }
    }

    let a4 = &report.a4;
    let _ = writeln!(
        out,
        "(A4) clusterwise stability: {}  [Gamma(0) = {:.6}{}]",
        verdict(a4.pass),
        a4.gamma0,
        if a4.degenerate_gamma0 { ", degenerate" } else { "" }
    );
    for c in &a4.clusters {
        let eigs: Vec<String> = c.spectrum.eigenvalues.iter().map(|z| format_complex(*z)).collect();
        let margin = c
            .signed_max_real_part
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "n/a (single node)".into());
        let _ = writeln!(
            out,
            "  cluster {}: {}  sign(Gamma(0))*max Re = {}  eig = [{}]",
            c.cluster + 1,
            verdict(c.pass),
            margin,
            eigs.join(", ")
        );
    }

    let _ = writeln!(out, "invariant manifold exists: {}", verdict(report.existence));
    let _ = writeln!(out, "manifold locally stable: {}", verdict(report.stability));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{check_all, CheckOptions};
    use crate::presets;

    #[test]
    fn example2_text_mentions_key_values() {
        let spec = presets::example2_spec();
        let p = presets::example2_partition();
        let r = check_all(&spec, &p, &CheckOptions::default()).unwrap();
        let text = render_text(&r, &p);
        assert!(text.contains("= 0.495000"));
        assert!(text.contains("-1.500000 + 0.866025i"));
        assert!(text.contains("-2.000000"));
        assert!(text.contains("representative 7"));
        assert!(text.contains("manifold locally stable: PASS"));
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(Complex64::new(-1.0, -1.0)), "-1.000000 - 1.000000i");
        assert_eq!(format_complex(Complex64::new(2.0, 1e-15)), "2.000000");
    }
}
