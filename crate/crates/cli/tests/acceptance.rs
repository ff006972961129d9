//! Acceptance criteria, one PASS/FAIL line each. Runs the shipped configs end to end.
//! Exits nonzero if any criterion fails, except those listed in `KNOWN_UNATTAINABLE`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use conformal_sorter::report::Check;
use conformal_sorter::suites::{self, PlateParams};
use conformal_sorter::{run, Outcome, Scenario, ScenarioConfig};

/// A holomorphic composition cannot also be irrotational, so "the cascade passes the
/// gradient-field test" cannot hold for any correct implementation.
const KNOWN_UNATTAINABLE: &[&str] = &["3b"];

struct Criterion {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn summarize(checks: &[Check]) -> (bool, String) {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}={:.4e}", c.name, c.measured))
        .collect();
    if failed.is_empty() {
        (true, format!("{} checks", checks.len()))
    } else {
        (false, format!("failed: {}", failed.join(", ")))
    }
}

fn worst(checks: &[Check], pattern: &str) -> String {
    checks
        .iter()
        .filter(|c| c.name.contains(pattern))
        .map(|c| format!("{}={:.4e}", c.name, c.measured))
        .collect::<Vec<_>>()
        .join(" ")
}

fn config_path(s: Scenario) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{}.cfg", s.name()))
}

fn run_with_threads(s: Scenario, threads: usize, out: &Path) -> (Outcome, Duration) {
    let cfg = ScenarioConfig::parse(&std::fs::read_to_string(config_path(s)).unwrap()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let t = Instant::now();
    let outcome = pool
        .install(|| run(s, &cfg, out))
        .unwrap_or_else(|e| panic!("{}: {e}", s.name()));
    (outcome, t.elapsed())
}

fn files_identical(a: &Path, b: &Path) -> bool {
    let names = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
        v.sort();
        v
    };
    let (na, nb) = (names(a), names(b));
    na == nb && na.iter().all(|n| std::fs::read(a.join(n)).unwrap() == std::fs::read(b.join(n)).unwrap())
}

fn main() {
    let p = PlateParams::default();
    let mut out = Vec::new();
    let mut push = |id, title, pass, detail: String| {
        println!("{} [{id}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        out.push(Criterion { id, title, pass, detail });
    };

    // 1. second-order Laplacian convergence, per-plate runtime
    let mut checks = Vec::new();
    let mut slowest = Duration::ZERO;
    for n in suites::PLATE_FACTORS {
        let t = Instant::now();
        checks.extend(suites::harmonicity(&p, n, 512).unwrap());
        slowest = slowest.max(t.elapsed());
    }
    checks.push(Check::below("harmonic.slowest_plate_s", slowest.as_secs_f64(), 5.0));
    let (ok, d) = summarize(&checks);
    push("1", "harmonic plates converge at second order", ok, format!("{d}; {}", worst(&checks, "ratio")));

    // 2
    let mut checks = Vec::new();
    for n in suites::PLATE_FACTORS {
        checks.extend(suites::map_equivalence(&p, n, 512).unwrap());
    }
    let (ok, d) = summarize(&checks);
    push("2", "gradient map equals the closed-form sector map", ok, format!("{d}; {}", worst(&checks, "max_rel")));

    // 3
    let cr = suites::cauchy_riemann(&p, 512).unwrap();
    let (ok, d) = summarize(&cr.checks);
    push(
        "3",
        "single stages pass both residual tests; cascade violates the anti-holomorphic test by > 1e3",
        ok,
        format!("{d}; {}", worst(&cr.checks, "cascade")),
    );
    let c5 = Check::below("cascade.irrotational_rel", cr.composition_irrotational_rel, 1e-6);
    push(
        "3b",
        "cascade passes the irrotational test",
        c5.pass,
        format!(
            "irrotational residual {:.3e}; the cascade is holomorphic and a holomorphic non-constant map has curl != 0 (documented deviation)",
            c5.measured
        ),
    );

    // 4
    let t = Instant::now();
    let mut checks = suites::propagator_oracle(&p, 0..3).unwrap();
    checks.push(Check::below("propagator.runtime_s", t.elapsed().as_secs_f64(), 30.0));
    let (ok, d) = summarize(&checks);
    push("4", "FFT propagation matches direct quadrature", ok, format!("{d}; {}", worst(&checks, "propagator")));

    // 5
    let checks = suites::unitarity(&p, 1024).unwrap();
    let (ok, d) = summarize(&checks);
    push("5", "propagators preserve the L2 norm on 1024^2", ok, format!("{d}; {}", worst(&checks, "unitarity")));

    // 6-11 from the shipped scenarios; each runs on 1 thread, then again on 3
    let tmp = tempfile::tempdir().unwrap();
    let mut outcomes = Vec::new();
    let mut timing = Vec::new();
    let mut deterministic = Vec::new();
    for s in Scenario::ALL {
        let (a, b) = (tmp.path().join(format!("{}-1", s.name())), tmp.path().join(format!("{}-3", s.name())));
        let (o1, t1) = run_with_threads(s, 1, &a);
        let (o3, t3) = run_with_threads(s, 3, &b);
        timing.push(Check::below(format!("{}.runtime_s", s.name()), t1.max(t3).as_secs_f64(), 60.0));
        let same = o1.manifest == o3.manifest && files_identical(&a, &b);
        deterministic.push(Check::at_least(format!("{}.identical_outputs", s.name()), same as u8 as f64, 1.0));
        outcomes.push((s, o1));
    }
    let checks_of = |s: Scenario| outcomes.iter().find(|(x, _)| *x == s).unwrap().1.checks.clone();

    let checks = checks_of(Scenario::Fig1Sector);
    let (ok, d) = summarize(&checks);
    push("6", "sector transforms concentrate energy in the wedge; stationary phase agrees", ok, format!("{d}; {}", worst(&checks, "energy")));

    let mut checks = checks_of(Scenario::Fig2Charges);
    checks.extend(checks_of(Scenario::Fig4Monopole));
    let (ok, d) = summarize(&checks);
    push("7", "charge-model potentials match the plate phases", ok, format!("{d}; {}", worst(&checks, ".correlation")));

    let checks = checks_of(Scenario::Fig3Astig);
    let (ok, d) = summarize(&checks);
    push("8", "astigmatism sorting is linear and recovers orientation", ok, format!("{d}; {}", worst(&checks, "fig3")));

    let checks = checks_of(Scenario::Fig3Dipole);
    let (ok, d) = summarize(&checks);
    push("9", "dipole sorting is linear and matches the closed-form shift", ok, format!("{d}; {}", worst(&checks, "fig3")));

    let checks = checks_of(Scenario::FigS1Cascade);
    let (ok, d) = summarize(&checks);
    push("10", "the (-2, +1/2) cascade reproduces single-stage dipole sorting", ok, format!("{d}; {}", worst(&checks, "cascade_vs_single")));

    let mut checks = timing;
    checks.extend(deterministic);
    let (ok, d) = summarize(&checks);
    push("11", "every scenario finishes in < 60 s with identical outputs across reruns and thread counts", ok, format!("{d}; {}", worst(&checks, "runtime")));

    let blocking: Vec<&Criterion> = out.iter().filter(|c| !c.pass && !KNOWN_UNATTAINABLE.contains(&c.id)).collect();
    let passed = out.iter().filter(|c| c.pass).count();
    println!("{passed}/{} criteria passed", out.len());
    if !blocking.is_empty() {
        for c in blocking {
            eprintln!("criterion {} failed: {} ({})", c.id, c.title, c.detail);
        }
        std::process::exit(1);
    }
}
