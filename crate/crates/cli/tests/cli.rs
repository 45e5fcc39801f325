use std::fs;
use std::path::PathBuf;

use mcgseq_cli::run;
use serde_json::Value;
use tempfile::TempDir;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture { dir: TempDir::new().unwrap() };
        f.write("m.txt", mcgseq::REFERENCE_MANIFOLD);
        f
    }

    fn write(&self, name: &str, body: &str) -> String {
        let p: PathBuf = self.dir.path().join(name);
        fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }
}

fn call(args: &[&str]) -> (i32, String) {
    let out = run(std::iter::once("mcgseq").chain(args.iter().copied()));
    (out.code, out.stdout)
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

#[test]
fn educe_prints_the_image() {
    let fx = Fixture::new();
    let w = fx.write("w.txt", "aut(1,tau)\n");
    let (code, out) = call(&["educe", "--manifold", &fx.path("m.txt"), "--word", &w, "--format", "json"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), r#"{"perm":[1,2],"tokens":{"1":"tau","2":"1"}}"#);
}

#[test]
fn exactness_report_has_case_counts() {
    let fx = Fixture::new();
    let (code, out) = call(&[
        "verify", "--suite", "exactness", "--manifold", &fx.path("m.txt"), "--max-len", "3", "--seed", "7",
    ]);
    assert_eq!(code, 0, "{out}");
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["checks"][0]["cases"], 1 + 45 + 45 * 45 + 45 * 45 * 45);
}

#[test]
fn render_draws_the_forest() {
    let fx = Fixture::new();
    let f = fx.write("f.txt", "block {s1}\nblock {s1,e1+}\n");
    let (code, out) = call(&["render", "--family", &f, "--format", "dot"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph family {"));
    assert!(out.contains("b1 -> b0;"));
    assert!(out.contains("b0 -> \"s1\";"));
    assert!(out.contains("root -> \"e1-\";"));
}

#[test]
fn domain_errors_exit_one_with_json() {
    let fx = Fixture::new();
    let w = fx.write("w.txt", "aut(1,tau)");
    let (code, out) = call(&["factor", "--manifold", &fx.path("m.txt"), "--word", &w]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["error"]["kind"], "NotDiscrepant");

    let w = fx.write("w2.txt", "swapIrr(1,1)");
    let (code, out) = call(&["educe", "--manifold", &fx.path("m.txt"), "--word", &w]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["error"]["kind"], "InvalidWord");

    let t = fx.write("t.txt", "block {s1}\nblock {s2}\nblock {e1+}\nblock {e1+,e1-}\n");
    let (code, out) = call(&["normalize-system", "--manifold", &fx.path("m.txt"), "--family", &t]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["error"]["kind"], "NotSymmetric");
}

#[test]
fn parse_and_config_errors_exit_two() {
    let fx = Fixture::new();
    let bad = fx.write("bad.txt", "type A pi1=Z/2 mcg=1\nsummand 1 A\nhandles x\n");
    let w = fx.write("w.txt", "e");
    let (code, out) = call(&["educe", "--manifold", &bad, "--word", &w]);
    assert_eq!(code, 2);
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "ParseError");
    assert!(v["error"]["message"].as_str().unwrap().contains("line 3"), "{out}");

    let w = fx.write("w2.txt", "frobnicate(1)");
    let (code, out) = call(&["educe", "--manifold", &fx.path("m.txt"), "--word", &w]);
    assert_eq!((code, json(&out)["error"]["kind"].clone()), (2, Value::from("ParseError")));

    let (code, out) = call(&["educe", "--manifold", &fx.path("m.txt")]);
    assert_eq!((code, json(&out)["error"]["kind"].clone()), (2, Value::from("ConfigError")));

    let (code, _) = call(&["educe", "--manifold", &fx.path("missing.txt"), "--word", &w]);
    assert_eq!(code, 2);

    let (code, _) = call(&["verify", "--suite", "pi1", "--max-len", "7"]);
    assert_eq!(code, 2);
    let (code, _) = call(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _) = call(&["educe", "--format", "dot", "--manifold", &fx.path("m.txt"), "--word", &w]);
    assert_eq!(code, 2);
}

#[test]
fn help_exits_zero() {
    let (code, out) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("normalize-system"));
}

#[test]
fn out_flag_writes_a_file() {
    let fx = Fixture::new();
    let w = fx.write("w.txt", "swapIrr(1,2) aut(1,tau)");
    let target = fx.path("out.json");
    let (code, out) = call(&["educe", "--manifold", &fx.path("m.txt"), "--word", &w, "--out", &target]);
    assert_eq!((code, out.as_str()), (0, ""));
    let v = json(&fs::read_to_string(target).unwrap());
    assert_eq!(v["perm"], serde_json::json!([2, 1]));
    assert_eq!(v["tokens"]["2"], "tau");
}

#[test]
fn lift_and_educe_agree() {
    let fx = Fixture::new();
    let img = fx.write("h.json", r#"{"perm":[2,1],"tokens":{"1":"tau","2":"tau"}}"#);
    let (code, out) = call(&["lift", "--manifold", &fx.path("m.txt"), "--image", &img, "--format", "text"]);
    assert_eq!(code, 0);
    let w = fx.write("w.txt", &out);
    let (_, back) = call(&["educe", "--manifold", &fx.path("m.txt"), "--word", &w]);
    assert_eq!(json(&back), json(&fs::read_to_string(fx.path("h.json")).unwrap()));

    let bad = fx.write("bad.json", r#"{"perm":[2,1],"tokens":{"3":"tau"}}"#);
    let (code, _) = call(&["lift", "--manifold", &fx.path("m.txt"), "--image", &bad]);
    assert_eq!(code, 1);
}

#[test]
fn validate_reports_problems() {
    let fx = Fixture::new();
    let f = fx.write("f.txt", "block {s1,e1+}\nblock {e1+,e2+}\n");
    let (code, out) = call(&["validate", "--manifold", &fx.path("m.txt"), "--family", &f]);
    assert_eq!(code, 1);
    let v = json(&out);
    assert_eq!(v["family"]["violations"][0]["kind"], "overlap");

    let f = fx.write("g.txt", "block {s1}\nblock {s2}\nblock {e1+}\nblock {e2+}\n");
    let a = fx.write("a.txt", "assign d1 {s2}\nassign d2 {s1}\nassign d1+ {e1+} +\nassign d1- {e1+} -\nassign d2+ {e2+} +\nassign d2- {e2+} -\n");
    let (code, out) =
        call(&["validate", "--manifold", &fx.path("m.txt"), "--family", &f, "--assignment", &a]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(json(&out)["family"]["symmetric"], true);
}

#[test]
fn normalize_system_emits_a_trace() {
    let fx = Fixture::new();
    let f = fx.write("f.txt", "block {s1}\nblock {s2}\nblock {e1-}\nblock {e2+}\n");
    let a = fx.write(
        "a.txt",
        "assign d1 {s1}\nassign d2 {s2}\nassign d1+ {e1-} -\nassign d1- {e1-} +\nassign d2+ {e2+} +\nassign d2- {e2+} -\n",
    );
    let (code, out) =
        call(&["normalize-system", "--manifold", &fx.path("m.txt"), "--family", &f, "--assignment", &a]);
    assert_eq!(code, 0, "{out}");
    let v = json(&out);
    assert_eq!(v["word"], "spin(1)");
    assert_eq!(v["trace"][0]["family"], serde_json::json!(["{s1}", "{s2}", "{e1-}", "{e2+}"]));
}

#[test]
fn spotted_and_pi1_commands() {
    let fx = Fixture::new();
    let mk = fx.write("mk.txt", mcgseq_cli::REFERENCE_MARKING);
    let w = fx.write("sw.txt", "capAut(tau) spotSwap(1,2) spotSwap(1,2)");
    let (code, out) = call(&["spotted-educe", "--manifold", &mk, "--word", &w]);
    assert_eq!((code, out.trim()), (0, r#"{"cap":"tau","perm":[1,2,3]}"#));

    let w = fx.write("w.txt", "spin(1) slideEnd(2,+; x1)");
    let (code, out) =
        call(&["act-pi1", "--manifold", &fx.path("m.txt"), "--word", &w, "--element", "x2 x1"]);
    assert_eq!(code, 0);
    // spin(1) gives x2 x1^-1, then the end slide turns x2 into x2 x1.
    assert_eq!(json(&out)["images"]["x2 x1"], "x2");
}
