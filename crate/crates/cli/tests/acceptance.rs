//! Acceptance run on the reference manifold: one PASS/FAIL line per
//! criterion, nonzero exit if any criterion fails.
//!
//! Every suite is driven through the compiled binary, so the reports
//! checked here are exactly what a user would see.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

/// Wall-clock budget for the exact-sequence suite.
const EXACTNESS_BUDGET: Duration = Duration::from_secs(30);
/// Wall-clock budget for the normalization suite.
const NORMALIZATION_BUDGET: Duration = Duration::from_secs(60);
/// pi1 images are compared as reduced words; no slack is allowed.
const PI1_TOLERANCE: u64 = 0;
const SEED: &str = "7";

struct Run {
    code: i32,
    stdout: Vec<u8>,
    elapsed: Duration,
}

fn mcgseq(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_mcgseq"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        elapsed: start.elapsed(),
    }
}

fn report(run: &Run) -> Value {
    serde_json::from_slice(&run.stdout).unwrap_or(Value::Null)
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"]
        .as_array()
        .and_then(|cs| cs.iter().find(|c| c["name"] == name))
        .unwrap_or(&Value::Null)
}

fn clean(c: &Value) -> bool {
    c["passed"] == true && c["failures"] == 0
}

fn stat(c: &Value, key: &str) -> u64 {
    c["stats"][key].as_u64().unwrap_or(u64::MAX)
}

fn cases(c: &Value) -> u64 {
    c["cases"].as_u64().unwrap_or(0)
}

/// Words of length 0..=n over an alphabet of size a.
fn words(a: u64, n: u32) -> u64 {
    (0..=n).map(|k| a.pow(k)).sum()
}

fn criterion_1(m: &str) -> (bool, String) {
    let run = mcgseq(&["verify", "--suite", "exactness", "--manifold", m, "--max-len", "4"]);
    let r = report(&run);
    let kernel = check(&r, "discrepant_words_educe_trivially");
    let section = check(&r, "lift_is_a_section");
    let factor = check(&r, "kernel_iff_factorization");
    let ok = run.code == 0
        && clean(kernel)
        && cases(kernel) == words(45, 4)
        && clean(section)
        && stat(section, "group_order") == 8
        && stat(section, "hit") == 8
        && clean(factor)
        && cases(factor) == words(48, 3)
        && run.elapsed < EXACTNESS_BUDGET;
    let detail = format!(
        "{} discrepant words, H(V) {}/{} hit, {} mixed words ({} discrepant), {:.1?}",
        cases(kernel),
        stat(section, "hit"),
        stat(section, "group_order"),
        cases(factor),
        stat(factor, "discrepant"),
        run.elapsed
    );
    (ok, detail)
}

fn criterion_2(m: &str) -> (bool, String) {
    let run = mcgseq(&["verify", "--suite", "normalization", "--manifold", m]);
    let r = report(&run);
    let reach = check(&r, "no_unreachable");
    let ok = run.code == 0
        && clean(reach)
        && clean(check(&r, "reproduces_family"))
        && clean(check(&r, "reproduces_assignment"))
        && clean(check(&r, "single_search_agrees"))
        && stat(reach, "laminar_families") == 176_128
        && stat(reach, "assignments") == cases(reach)
        && cases(reach) > 0
        && run.elapsed < NORMALIZATION_BUDGET;
    let detail = format!(
        "{} laminar families, {} symmetric, {} assignments, {} unreachable, longest word {}, {:.1?}",
        stat(reach, "laminar_families"),
        stat(reach, "symmetric_families"),
        cases(reach),
        reach["failures"],
        stat(reach, "longest_word"),
        run.elapsed
    );
    (ok, detail)
}

fn criterion_3(m: &str) -> (bool, String) {
    let run = mcgseq(&["verify", "--suite", "pi1", "--manifold", m, "--seed", SEED]);
    let r = report(&run);
    let hom = check(&r, "homomorphism");
    let ab = check(&r, "abelianization_agrees");
    let failures = hom["failures"].as_u64().unwrap_or(u64::MAX);
    let ok = run.code == 0
        && failures <= PI1_TOLERANCE
        && clean(hom)
        && cases(hom) == 300
        && clean(ab)
        && clean(check(&r, "spin_negates_handle"))
        && clean(check(&r, "twists_abelianize_trivially"));
    let detail = format!(
        "{} pairs, {} abelianized words, {} spin and {} twist letters",
        cases(hom),
        cases(ab),
        cases(check(&r, "spin_negates_handle")),
        cases(check(&r, "twists_abelianize_trivially"))
    );
    (ok, detail)
}

fn criterion_4(m: &str) -> (bool, String) {
    let run = mcgseq(&["verify", "--suite", "relations", "--manifold", m]);
    let r = report(&run);
    let names = [
        "twist_squared_is_trivial",
        "spin_squared_is_assoc_twist",
        "spin_squared_fixes_pi1",
        "spin_squared_fixes_families",
        "spin_swaps_handle_ends",
    ];
    let ok = run.code == 0 && names.iter().all(|n| clean(check(&r, n)) && cases(check(&r, n)) > 0);
    let detail = format!(
        "{} family checks for spin squares, {} for end swaps",
        cases(check(&r, "spin_squared_fixes_families")),
        cases(check(&r, "spin_swaps_handle_ends"))
    );
    (ok, detail)
}

fn criterion_5(marking: &str) -> (bool, String) {
    let run = mcgseq(&["verify", "--suite", "spotted", "--manifold", marking, "--max-len", "3"]);
    let r = report(&run);
    let surj = check(&r, "lifts_cover_the_group");
    let kernel = check(&r, "kernel_is_trivial_pairs");
    let ok = run.code == 0
        && r["parameters"]["spots"] == 3
        && clean(surj)
        && stat(surj, "group_order") == 2 * 6
        && clean(kernel)
        && cases(kernel) == words(stat(kernel, "alphabet"), 3)
        && clean(check(&r, "educe_is_multiplicative"));
    let detail = format!(
        "|mcg x S3| = {}, {} words, {} in the kernel",
        stat(surj, "group_order"),
        cases(kernel),
        stat(kernel, "kernel")
    );
    (ok, detail)
}

fn criterion_6(dir: &Path) -> (bool, String) {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let (m, f, t, a) = (p("m.txt"), p("f.txt"), p("t.txt"), p("a.txt"));
    let (w, d, img, mk, sw) = (p("w.txt"), p("d.txt"), p("h.json"), p("mk.txt"), p("sw.txt"));
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", "--manifold", &m, "--family", &f, "--word", &w],
        vec!["classify", "--manifold", &m, "--family", &t],
        vec!["educe", "--manifold", &m, "--word", &w],
        vec!["lift", "--manifold", &m, "--image", &img],
        vec!["kernel-test", "--manifold", &m, "--word", &w],
        vec!["factor", "--manifold", &m, "--word", &d],
        vec!["act-pi1", "--manifold", &m, "--word", &w],
        vec!["act-system", "--manifold", &m, "--word", &d],
        vec!["normalize-system", "--manifold", &m, "--family", &t, "--assignment", &a],
        vec!["normalize-system", "--manifold", &m, "--family", &t, "--format", "dot"],
        vec!["spotted-educe", "--manifold", &mk, "--word", &sw],
        vec!["verify", "--suite", "exactness", "--max-len", "2", "--seed", SEED],
        vec!["verify", "--suite", "normalization", "--seed", SEED],
        vec!["verify", "--suite", "pi1", "--seed", SEED],
        vec!["verify", "--suite", "relations", "--seed", SEED],
        vec!["verify", "--suite", "spotted", "--seed", SEED],
        vec!["render", "--family", &f, "--format", "dot"],
    ];
    let mut differing = Vec::new();
    let mut failed = Vec::new();
    for cmd in &commands {
        let (first, second) = (mcgseq(cmd), mcgseq(cmd));
        if first.code != 0 {
            failed.push(cmd[0]);
        }
        if first.stdout != second.stdout || first.code != second.code {
            differing.push(cmd[0]);
        }
    }
    let ok = differing.is_empty() && failed.is_empty();
    let detail = format!(
        "{} commands run twice, {} differing {:?}, {} failing {:?}",
        commands.len(),
        differing.len(),
        differing,
        failed.len(),
        failed
    );
    (ok, detail)
}

fn fixtures(dir: &Path) {
    let files = [
        ("m.txt", mcgseq::REFERENCE_MANIFOLD),
        ("mk.txt", mcgseq_cli::REFERENCE_MARKING),
        ("f.txt", "block {s1}\nblock {s1,e1+}\nblock {e2-}\n"),
        ("t.txt", "block {s1}\nblock {s2}\nblock {s1,e1+}\nblock {e2+}\n"),
        (
            "a.txt",
            "assign d1 {s1}\nassign d2 {s2}\nassign d1+ {s1,e1+} +\nassign d1- {s1,e1+} -\n\
             assign d2+ {e2+} +\nassign d2- {e2+} -\n",
        ),
        ("w.txt", "slideIrr(1; x1) swapIrr(1,2) aut(1,tau) spin(2)\n"),
        ("d.txt", "slideIrr(2; x1) aut(1,tau) spin(2) slideEnd(1,-; g1@2) aut(1,tau)\n"),
        ("h.json", r#"{"perm":[2,1],"tokens":{"1":"tau"}}"#),
        ("sw.txt", "capAut(tau) spotSwap(1,3) spotTwist(2) spotSlide(1; g1)\n"),
    ];
    for (name, body) in files {
        fs::write(dir.join(name), body).expect("fixture written");
    }
}

fn main() {
    let dir = tempfile::TempDir::new().expect("temp dir");
    fixtures(dir.path());
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (m, mk) = (p("m.txt"), p("mk.txt"));
    let results = [
        ("exact sequence", criterion_1(&m)),
        ("normalization", criterion_2(&m)),
        ("pi1 action", criterion_3(&m)),
        ("relations", criterion_4(&m)),
        ("spotted sequence", criterion_5(&mk)),
        ("determinism", criterion_6(dir.path())),
    ];
    let mut all = true;
    for (n, (name, (ok, detail))) in results.iter().enumerate() {
        all &= ok;
        println!(
            "criterion {} ({name}): {} - {detail}",
            n + 1,
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    if !all {
        std::process::exit(1);
    }
}
