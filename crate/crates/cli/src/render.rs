use std::fmt::Write;

use minimax_cert::certify::{CertificateReport, CheckOutcome, Mode, Verdict};
use minimax_cert::oracle::{ClassificationReport, Evidence, OracleVerdict, TauProfile, Tri};

use crate::RunReport;

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Vacuous => "vacuous",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn mode(m: Mode) -> &'static str {
    match m {
        Mode::Proved => "proved",
        Mode::Sampled => "sampled",
    }
}

fn tri(t: Tri) -> &'static str {
    match t {
        Tri::True => "true",
        Tri::False => "false",
        Tri::Undetermined => "undetermined",
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{:.6e}", v + 0.0)
    } else {
        format!("{v}")
    }
}

fn vector(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", items.join(", "))
}

fn check_line(s: &mut String, name: &str, o: &CheckOutcome) {
    let margin = o.margin.map(num).unwrap_or_else(|| "-".into());
    let _ = write!(
        s,
        "  {name:<28}{:<14}{:<9}{margin:>14}",
        verdict(o.verdict),
        mode(o.mode)
    );
    if let Some(w) = &o.witness {
        let _ = write!(s, "  witness value {}", num(w.value));
        if let Some(u) = &w.u {
            let _ = write!(s, " u={}", vector(u));
        }
        if let Some(h) = &w.h {
            let _ = write!(s, " h={}", vector(h));
        }
    }
    if !o.note.is_empty() {
        let _ = write!(s, "  ({})", o.note);
    }
    s.push('\n');
}

fn certificate(s: &mut String, c: &CertificateReport) {
    let _ = writeln!(s, "checks:");
    for (name, o) in c.checks() {
        check_line(s, name, o);
    }
}

fn oracle_line(s: &mut String, name: &str, v: &OracleVerdict) {
    let _ = write!(s, "  {name:<24}{:<14}", tri(v.verdict));
    match &v.evidence {
        Some(Evidence::Point {
            x,
            y,
            value,
            reference,
        }) => {
            let _ = write!(
                s,
                "at x={} y={} value {} vs {}",
                vector(x),
                vector(y),
                num(*value),
                num(*reference)
            );
        }
        Some(Evidence::Ratio {
            max_ratio,
            exponent,
            ..
        }) => {
            let e = exponent
                .map(|e| format!("{e:.4}"))
                .unwrap_or_else(|| "n/a".into());
            let _ = write!(s, "max tau/delta {} exponent {e}", num(*max_ratio));
        }
        Some(Evidence::Note { text }) => {
            let _ = write!(s, "{text}");
        }
        None => {}
    }
    s.push('\n');
}

fn profile(s: &mut String, t: &TauProfile) {
    let _ = writeln!(s, "tau profile ({} nodes per axis):", t.nodes_per_axis);
    let _ = writeln!(s, "  {:>14}{:>16}{:>16}", "delta", "tau_min", "ratio");
    for r in &t.rows {
        let _ = writeln!(
            s,
            "  {:>14}{:>16}{:>16}",
            num(r.delta),
            num(r.tau_min),
            num(r.ratio)
        );
    }
    let e = t
        .fitted_exponent
        .map(|e| format!("{e:.4}"))
        .unwrap_or_else(|| "n/a".into());
    let _ = writeln!(s, "  exponent {e}, verdict {}", t.calm_verdict.as_str());
}

fn classification(s: &mut String, c: &ClassificationReport) {
    let r = &c.resolution;
    let _ = writeln!(
        s,
        "classification (mesh {} per axis, {} used, finest delta {}):",
        r.mesh_per_axis,
        r.nodes_per_axis,
        num(r.finest_delta)
    );
    oracle_line(s, "nash", &c.nash);
    oracle_line(s, "local_nash", &c.local_nash);
    oracle_line(s, "calm_local_minimax", &c.calm_local_minimax);
    oracle_line(s, "local_minimax", &c.local_minimax);
    oracle_line(s, "global_minimax_on_box", &c.global_minimax_on_box);
    if let Some(a) = &c.argmax_calmness {
        let _ = writeln!(s, "  argmax calmness estimate {}", num(a.kappa_hat));
    }
    if let Some(t) = &c.tau_profile {
        profile(s, t);
    }
}

/// Human-readable report. The certificate conclusion, when present, is the
/// first line.
pub fn text(r: &RunReport) -> String {
    let mut s = String::new();
    if let Some(line) = r.conclusion_line() {
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(
        s,
        "{} {} {} candidate x={} y={}",
        r.tool,
        r.version,
        r.subcommand,
        vector(&r.candidate.x),
        vector(&r.candidate.y)
    );
    if let Some(c) = &r.certificate {
        certificate(&mut s, c);
    }
    if let Some(c) = &r.classification {
        classification(&mut s, c);
    }
    if let Some(t) = &r.tau_profile {
        profile(&mut s, t);
    }
    if !r.assumptions.is_empty() {
        let _ = writeln!(s, "assumptions (not verified):");
        for a in &r.assumptions {
            let _ = writeln!(s, "  - {a}");
        }
    }
    let _ = writeln!(s, "input {} seed {}", r.input_digest, r.seed);
    s
}
