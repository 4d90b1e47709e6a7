//! Acceptance gate: one line per criterion, all must pass.

use upq::suite::{run_all, run_suite, RunConfig};

struct Gate {
    results: Vec<(String, bool)>,
}

impl Gate {
    fn new() -> Self {
        Gate {
            results: Vec::new(),
        }
    }

    fn record(&mut self, name: &str, ok: bool) {
        println!(
            "criterion {:02} {:<46} {}",
            self.results.len() + 1,
            name,
            if ok { "pass" } else { "FAIL" }
        );
        self.results.push((name.to_string(), ok));
    }

    fn finish(self) {
        let failed: Vec<String> = self
            .results
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| n)
            .collect();
        assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
    }
}

fn rows_pass(rep: &upq::suite::SuiteReport, prefix: &str) -> bool {
    let matching: Vec<_> = rep
        .rows
        .iter()
        .filter(|r| r.check.starts_with(prefix))
        .collect();
    !matching.is_empty() && matching.iter().all(|r| r.passed())
}

#[test]
fn acceptance() {
    let cfg = RunConfig::default();
    let mut gate = Gate::new();

    let group = run_suite("group", &cfg).expect("group suite runs");
    gate.record("dimension counts exact (all p <= q <= 3)", rows_pass(&group, "dim_"));
    gate.record("membership closure residual <= 1e-8", rows_pass(&group, "closure_residual"));

    let iwasawa = run_suite("iwasawa", &cfg).expect("iwasawa suite runs");
    gate.record(
        "iwasawa round trip <= 1e-8 and deterministic",
        rows_pass(&iwasawa, "decompose_round_trip") && rows_pass(&iwasawa, "decompose_deterministic"),
    );
    gate.record(
        "heisenberg axioms exact to rounding",
        rows_pass(&iwasawa, "heisenberg_"),
    );

    let bargmann = run_suite("bargmann", &cfg).expect("bargmann suite runs");
    gate.record(
        "fock model: spherical identity, ccr, residual decay, commutant",
        bargmann.passed,
    );

    let special = run_suite("special", &cfg).expect("special suite runs");
    gate.record(
        "cocycle existence conditions (slope 1, stable ii/iii)",
        rows_pass(&special, "condition"),
    );

    let extension = run_suite("extension", &cfg).expect("extension suite runs");
    gate.record(
        "cocycle identity fiber residual <= 1e-6",
        rows_pass(&extension, "cocycle_identity_fiber"),
    );
    gate.record(
        "extension homomorphism on U(1,2)/U(2,2), B|K = 0",
        rows_pass(&extension, "extension_homomorphism") && rows_pass(&extension, "cocycle_vanishes"),
    );
    gate.record(
        "gram matrix of 5 sections strictly positive",
        rows_pass(&extension, "gram_min_eigenvalue"),
    );

    let qp = run_suite("qp", &cfg).expect("qp suite runs");
    gate.record(
        "quasi-poisson cf matches closed form (5 functions, poisson limit)",
        rows_pass(&qp, "cf_") && rows_pass(&qp, "poisson_void"),
    );
    gate.record(
        "quasi-invariance density ratio finite and window-stable",
        rows_pass(&qp, "quasi_invariance"),
    );

    let currents = run_suite("currents", &cfg).expect("currents suite runs");
    gate.record(
        "current factorization and constant-current consistency",
        currents.passed,
    );

    let a = serde_json::to_string(&run_all(&cfg).expect("full run 1")).expect("serialize");
    let b = serde_json::to_string(&run_all(&cfg).expect("full run 2")).expect("serialize");
    gate.record("determinism: identical reports on re-run", a == b);

    gate.finish();
}
