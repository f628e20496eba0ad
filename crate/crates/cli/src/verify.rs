//! The `verify` table: count identities, symbolic preflight, constructor
//! round trips, and optionally the census, for each `0 ≤ n ≤ N`.

use std::fmt::Write as _;

use repvar::words::{chi, compose_substitution};
use repvar::{
    canonical_representative, canonical_torus_representative, census, classify_fix, classify_torus, count_fix,
    count_fix_char, count_torus, enumerate_fix_labels, enumerate_torus_labels, fixed_point_residual, phi_substitution,
    torus_residual, PathConfig, System,
};
use serde::Serialize;

#[derive(Serialize)]
pub struct Row {
    pub check: String,
    pub n: Option<i64>,
    pub pass: bool,
    pub detail: String,
}

#[derive(Serialize)]
pub struct Report {
    pub format: &'static str,
    pub n_max: i64,
    pub rows: Vec<Row>,
    pub pass: bool,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let n = r.n.map(|n| format!("n={n}")).unwrap_or_default();
            let _ = writeln!(s, "{} {:<14} {:<5} {}", if r.pass { "PASS" } else { "FAIL" }, r.check, n, r.detail);
        }
        let _ = writeln!(s, "{}", if self.pass { "all checks passed" } else { "some checks FAILED" });
        s
    }
}

fn symbolic_rows() -> Vec<Row> {
    let power_law = (-4..=4i64).all(|m| {
        (-4..=4i64).all(|n| compose_substitution(&phi_substitution(m), &phi_substitution(n)) == phi_substitution(m + n))
    });
    let chi_fixed = (-8..=8).all(|n| phi_substitution(n).apply(&chi()) == chi());
    vec![
        Row {
            check: "power-law".into(), n: None, pass: power_law, detail: "Φᵐ∘Φⁿ = Φᵐ⁺ⁿ for |m|,|n| ≤ 4".into()
        },
        Row { check: "chi-fixed".into(), n: None, pass: chi_fixed, detail: "Φⁿ(χ) = χ for |n| ≤ 8".into() },
    ]
}

fn count_row(n: i64) -> Row {
    let m = n as u64;
    let fix_parity = if m.is_multiple_of(2) { m * m / 2 + 1 } else { (m * m).div_ceil(2) };
    let torus_parity = if m.is_multiple_of(2) { m * m + 1 } else { m * m };
    let pass = count_fix(n) == fix_parity
        && count_fix_char(n) == fix_parity
        && count_torus(n) == torus_parity
        && enumerate_fix_labels(n).len() as u64 == count_fix(n)
        && enumerate_torus_labels(n).len() as u64 == count_torus(n);
    Row {
        check: "counts".into(),
        n: Some(n),
        pass,
        detail: format!("fix {} char {} torus {}", count_fix(n), count_fix_char(n), count_torus(n)),
    }
}

fn round_trip_row(n: i64) -> Row {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for label in enumerate_fix_labels(n) {
        match canonical_representative(n, label) {
            Ok(rep) => {
                worst = worst.max(fixed_point_residual(&rep, n).max);
                if classify_fix(&rep, n, 1e-9).ok() != Some(label) {
                    failures.push(label.to_string());
                }
            }
            Err(_) => failures.push(label.to_string()),
        }
    }
    for label in enumerate_torus_labels(n) {
        match canonical_torus_representative(n, label) {
            Ok(t) => {
                worst = worst.max(torus_residual(&t, n).max);
                if classify_torus(&t, n, 1e-9).ok() != Some(label) {
                    failures.push(label.to_string());
                }
            }
            Err(_) => failures.push(label.to_string()),
        }
    }
    let pass = failures.is_empty() && worst < 1e-9;
    let detail = if failures.is_empty() {
        format!("max residual {worst:.1e}")
    } else {
        format!("failed: {}", failures.join(" "))
    };
    Row { check: "round-trip".into(), n: Some(n), pass, detail }
}

fn census_row(n: i64, system: System, samples: usize, seed: u64, cfg: &PathConfig) -> Row {
    let r = census(n, system, samples, seed, cfg);
    Row {
        check: format!("census-{system}"),
        n: Some(n),
        pass: r.agreement,
        detail: format!(
            "estimated {} expected {} unresolved {} cross {}",
            r.estimated_components, r.expected_components, r.unresolved, r.cross_label_certificates
        ),
    }
}

pub fn run_checks(n_max: i64, samples: usize, seed: u64, cfg: &PathConfig) -> Report {
    let mut rows = symbolic_rows();
    for n in 0..=n_max {
        rows.push(count_row(n));
        rows.push(round_trip_row(n));
        if samples > 0 {
            rows.push(census_row(n, System::Fix, samples, seed, cfg));
            rows.push(census_row(n, System::Torus, samples, seed, cfg));
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Report { format: "repvar-verify-1", n_max, rows, pass }
}
