//! Acceptance run: one PASS/FAIL line per criterion, each backed by a
//! verification suite at its default configuration.
//!
//! Built with `harness = false` so the lines are printed even when the
//! output of ordinary tests is captured. Exits non-zero if any criterion
//! fails.

use std::collections::BTreeMap;
use std::process::ExitCode;

use curext::suite::{run_suite, Bound, Check, Report, SuiteConfig};

struct Criterion {
    id: u32,
    title: &'static str,
    suite: &'static str,
    /// Check-name prefixes that belong to this criterion; empty = all checks.
    checks: &'static [&'static str],
    /// Wall-clock budget for the whole suite, if the criterion states one.
    budget_s: Option<f64>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "Witten invariant: C5 = -1/2 mod Z (5e-3), epsilon = -1, runtime <= 60 s",
        suite: "witten",
        checks: &["C5(rotation of instanton(1))", "epsilon(rotation of instanton(1))"],
        budget_s: Some(60.0),
    },
    Criterion {
        id: 2,
        title: "degree-0 rotation: C5 = 0 mod Z (5e-3), epsilon = +1",
        suite: "witten",
        checks: &["C5(rotation of degree-0", "epsilon(rotation of degree-0"],
        budget_s: None,
    },
    Criterion { id: 3, title: "Polyakov-Wiegmann on M (5e-3), doubled beta rejected", suite: "polyakov-wiegmann", checks: &[], budget_s: None },
    Criterion { id: 4, title: "descent equations p = 1, 2, 3 (1e-3, >= 4x under refinement)", suite: "descent", checks: &[], budget_s: None },
    Criterion { id: 5, title: "su(2) vanishing of trace lemma, c21, c20, c30 (1e-10)", suite: "su2-vanishing", checks: &[], budget_s: None },
    Criterion { id: 6, title: "cocycle identities: gamma, beta2, alpha, chi", suite: "mickelsson-cocycle", checks: &[], budget_s: None },
    Criterion { id: 7, title: "extension group law (5e-3 equivalence distance)", suite: "extension-law", checks: &[], budget_s: None },
    Criterion { id: 8, title: "Lie algebra: commutator = -i omega (1e-2 rel), antisymmetry, Jacobi", suite: "jacobi", checks: &[], budget_s: None },
    Criterion { id: 9, title: "adjoint action vs group-law oracle (1e-2 rel), d/dt Ad = ad", suite: "adjoint", checks: &[], budget_s: None },
    Criterion { id: 10, title: "mapping degrees, additivity, homotopy invariance", suite: "degree", checks: &[], budget_s: None },
    Criterion { id: 11, title: "restriction to su(2): chi in {+1,-1}, chi = epsilon", suite: "restriction", checks: &[], budget_s: None },
];

fn selected<'a>(report: &'a Report, c: &Criterion) -> Vec<&'a Check> {
    report.checks.iter().filter(|k| c.checks.is_empty() || c.checks.iter().any(|p| k.name.starts_with(p))).collect()
}

fn main() -> ExitCode {
    let mut reports: BTreeMap<&str, Result<Report, String>> = BTreeMap::new();
    let mut all_pass = true;
    for c in CRITERIA {
        let report = reports.entry(c.suite).or_insert_with(|| {
            let cfg = SuiteConfig { suite: c.suite.to_string(), ..SuiteConfig::default() };
            run_suite(&cfg).map_err(|e| e.to_string())
        });
        let line = match report {
            Err(e) => {
                all_pass = false;
                format!("criterion {:>2} FAIL  {}: suite {} errored: {e}", c.id, c.title, c.suite)
            }
            Ok(r) => {
                let checks = selected(r, c);
                let failed: Vec<&str> = checks.iter().filter(|k| !k.pass).map(|k| k.name.as_str()).collect();
                let over_budget = c.budget_s.is_some_and(|b| r.wall_time_s > b);
                let pass = !checks.is_empty() && failed.is_empty() && !over_budget;
                all_pass &= pass;
                let worst = checks
                    .iter()
                    .filter(|k| k.tolerance > 0.0)
                    .map(|k| match k.bound {
                        Bound::Max => (k.residual / k.tolerance, k),
                        Bound::Min => (k.tolerance / k.residual, k),
                    })
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, k)| {
                        let op = if matches!(k.bound, Bound::Max) { "<=" } else { ">=" };
                        format!("; tightest: {} {:.3e} {op} {:.1e}", k.name, k.residual, k.tolerance)
                    })
                    .unwrap_or_default();
                let mut s = format!(
                    "criterion {:>2} {}  {} [{} checks, {:.1}s{}]",
                    c.id,
                    if pass { "PASS" } else { "FAIL" },
                    c.title,
                    checks.len(),
                    r.wall_time_s,
                    worst
                );
                if over_budget {
                    s.push_str(&format!(" runtime {:.1}s exceeds {:.0}s", r.wall_time_s, c.budget_s.unwrap_or(0.0)));
                }
                if !failed.is_empty() {
                    s.push_str(&format!(" failing: {}", failed.join(", ")));
                }
                if c.suite == "adjoint" {
                    if let Some(sel) = r.normalization.get("ad_prefactor") {
                        s.push_str(&format!("; oracle selects {sel}"));
                    }
                }
                s
            }
        };
        println!("{line}");
    }
    println!("acceptance: {}", if all_pass { "all criteria PASS" } else { "some criteria FAIL" });
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
