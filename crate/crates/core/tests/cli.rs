//! End-to-end tests of the command-line surface.

use std::io::Write;
use std::process::Command;

use ninewalls::cli::{run, verify, CommandResult, Config, Format, StrategyName, VerifyFixtures, CONFIG_ENV};
use ninewalls::lattice::{CapacityVector, HClass, PDClass};
use serde_json::Value;

fn call(args: &[&str]) -> CommandResult {
    let mut argv = vec!["ninewalls".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run(&argv, &Config::default())
}

fn json(res: &CommandResult) -> Value {
    assert_eq!(res.code, 0, "{}", res.diagnostics);
    serde_json::from_str(&res.payload).unwrap()
}

const TENTH: &str = "1/10,1/10,1/10,1/10,1/10,1/10,1/10,1/10,1/10";

#[test]
fn class_info_of_d9() {
    let v = json(&call(&["class-info", "(3;1,1,1,1,1,1,1,1,1)"]));
    assert_eq!(v["self_int"], 0);
    assert_eq!(v["c1"], 0);
    assert_eq!(v["k"], 0);
    assert_eq!(v["codim"], 2);
}

#[test]
fn game_play_one_move() {
    let v = json(&call(&["game", "play", "--moves", "1", "--strategy", "first"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["fired_node"], 0);
    assert_eq!(rows[0]["crossed_class"], "(1; 1,1,1,0,0,0,0,0,0)");
    assert_eq!(rows[0]["values"], serde_json::json!([-1, 0, 0, 1, 0, 0, 0, 0, 0]));
    assert_eq!(rows[0]["invariant"], 3);
}

#[test]
fn sequence_one_step() {
    let v = json(&call(&["sequence", "--delta0", TENTH, "--steps", "1"]));
    let row = &v[0];
    assert_eq!(row["crossed"], "(1; 1,1,1,0,0,0,0,0,0)");
    let delta: Vec<&str> = row["delta"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(delta, ["8/17", "8/17", "8/17", "1/17", "1/17", "1/17", "1/17", "1/17", "1/17"]);
}

#[test]
fn sequence_on_wall_is_a_math_error_with_suggestion() {
    let res = call(&["sequence", "--delta0", TENTH, "--steps", "2"]);
    assert_eq!(res.code, 1);
    assert!(res.diagnostics.contains("--delta0"), "{}", res.diagnostics);
    assert!(res.payload.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(call(&["frobnicate"]).code, 2);
    assert_eq!(call(&["class-info"]).code, 2);
    assert_eq!(call(&["sequence", "--steps", "many"]).code, 2);
    assert_eq!(call(&["verify", "--only", "nonsense"]).code, 2);
    let help = call(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.payload.contains("enumerate-classes"));
}

#[test]
fn math_errors_exit_1() {
    assert_eq!(call(&["class-info", "(1;1,1)"]).code, 1);
    assert_eq!(call(&["chamber", "--delta", "1/2,1/2,1/2,1/2,1/2,1/2,1/2,1/2,1/2"]).code, 1);
    assert_eq!(call(&["area", "--delta", "0,1/2", "--class", "(1;1,1)"]).code, 1);
}

#[test]
fn malformed_values_exit_2() {
    assert_eq!(call(&["class-info", "(1;x,1)"]).code, 2);
    assert_eq!(call(&["area", "--delta", "1/0", "--class", "(1;1)"]).code, 2);
}

#[test]
fn enumerate_families() {
    let le3 = json(&call(&["enumerate-classes", "--family", "le3"]));
    assert_eq!(le3.as_array().unwrap().len(), 437);
    let neg2 = json(&call(&["enumerate-classes", "--family", "neg2", "--max-m", "2"]));
    assert_eq!(neg2.as_array().unwrap().len(), 84 + 480);
    let exc = json(&call(&["enumerate-classes", "--family", "exceptional", "--max-a0", "1"]));
    assert_eq!(exc.as_array().unwrap().len(), 45);
    let csv = call(&["enumerate-classes", "--family", "le3", "--format", "csv"]);
    let mut lines = csv.payload.lines();
    assert_eq!(lines.next().unwrap(), "family,indices,m,a0,a1,a2,a3,a4,a5,a6,a7,a8,a9,self_int,c1,codim");
    assert_eq!(lines.count(), 437);
}

#[test]
fn reduce_area_chamber_walls_restrict_admissible() {
    let v = json(&call(&["reduce", "(17/10; 8/10,8/10,8/10,1/10,1/10,1/10,1/10,1/10,1/10)"]));
    assert_eq!(v["class"], "(1; 1/10,1/10,1/10,1/10,1/10,1/10,1/10,1/10,1/10)");
    assert_eq!(v["word"], serde_json::json!(["r0"]));
    let v = json(&call(&["area", "--delta", TENTH, "--class", "(1;1,1,1,0,0,0,0,0,0)"]));
    assert_eq!(v["area"], "7/10");
    let v = json(&call(&["chamber", "--delta", TENTH]));
    assert_eq!(v["negative"].as_array().unwrap().len(), 0);
    assert_eq!(v["on_wall"].as_array().unwrap().len(), 0);
    let v = json(&call(&["separating-walls", "--from", TENTH, "--to", "8/17,8/17,8/17,1/18,1/18,1/18,1/18,1/18,1/18"]));
    assert!(v.as_array().unwrap().iter().any(|w| w["class"] == "(1; 1,1,1,0,0,0,0,0,0)"));
    let v = json(&call(&[
        "restrict",
        "--wall",
        "(1;1,1,1,0,0,0,0,0,0)",
        "--near",
        "3/10,3/10,3/10,1/100,1/100,1/100,1/100,1/100,1/100",
        "--epsilon",
        "1/2",
    ]));
    assert_eq!(v["wall"], "(1; 1,1,1,0,0,0,0,0,0)");
    let v = json(&call(&["admissible", "--delta", TENTH]));
    assert_eq!(v["admissible"], true);
    let v = json(&call(&["admissible", "--delta", "1/3,1/3,1/3,1/3,1/3,1/3,1/3,1/3,1/3"]));
    assert_eq!(v["admissible"], false);
    assert_eq!(v["certificate"]["kind"], "non_positive_square");
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["sequence", "--steps", "40", "--strategy", "random", "--seed", "5"],
        vec!["game", "play", "--moves", "30", "--strategy", "random", "--seed", "9", "--format", "csv"],
        vec!["chamber", "--delta", "8/17,8/17,8/17,1/17,1/17,1/17,1/17,1/17,1/17"],
    ] {
        let (a, b) = (call(&args), call(&args));
        assert_eq!(a.code, 0, "{}", a.diagnostics);
        assert_eq!(a.payload, b.payload);
    }
    let a = call(&["sequence", "--steps", "40", "--strategy", "random", "--seed", "5"]);
    let b = call(&["sequence", "--steps", "40", "--strategy", "random", "--seed", "6"]);
    assert_ne!(a.payload, b.payload);
}

#[test]
fn serialized_values_round_trip() {
    let v = json(&call(&["sequence", "--steps", "25"]));
    for row in v.as_array().unwrap() {
        let crossed: HClass = row["crossed"].as_str().unwrap().parse().unwrap();
        assert_eq!(crossed.to_string(), row["crossed"].as_str().unwrap());
        let pd: PDClass = row["pd_unnormalized"].as_str().unwrap().parse().unwrap();
        assert_eq!(pd.to_string(), row["pd_unnormalized"].as_str().unwrap());
        let text: Vec<&str> = row["delta"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
        let d: CapacityVector = text.join(",").parse().unwrap();
        assert_eq!(d.to_string(), text.join(","));
    }
}

#[test]
fn config_parsing() {
    let cfg =
        Config::parse("# defaults\ndefault_max_m = 2\ndefault_strategy = random\nseed = 4\nformat = csv\n").unwrap();
    assert_eq!(cfg.default_max_m, 2);
    assert_eq!(cfg.default_strategy, StrategyName::Random);
    assert_eq!(cfg.seed, 4);
    assert_eq!(cfg.format, Format::Csv);
    assert!(Config::parse("colour = blue").is_err());
    assert!(Config::parse("default_max_a0 = 0").is_err());
    assert!(Config::parse("default_max_m = -1").is_err());
    assert!(Config::parse("default_n = 8").is_err());
    assert!(Config::parse("just words").is_err());
}

#[test]
fn flags_override_config() {
    let cfg = Config::parse("format = csv\ndefault_max_m = 2").unwrap();
    let argv: Vec<String> =
        ["ninewalls", "enumerate-classes", "--family", "neg2"].iter().map(|s| s.to_string()).collect();
    let res = run(&argv, &cfg);
    assert_eq!(res.payload.lines().count(), 1 + 84 + 480);
    let mut argv2 = argv.clone();
    argv2.extend(["--format", "json", "--max-m", "0"].iter().map(|s| s.to_string()));
    let res = run(&argv2, &cfg);
    let v: Value = serde_json::from_str(&res.payload).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 84);
}

#[test]
fn binary_reads_config_from_environment() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "format = csv").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ninewalls"))
        .args(["class-info", "(3;1,1,1,1,1,1,1,1,1)"])
        .env(CONFIG_ENV, file.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("class,self_int"));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "unknown_key = 1").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ninewalls")).arg("--help").env(CONFIG_ENV, bad.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out =
        Command::new(env!("CARGO_BIN_EXE_ninewalls")).args(["frobnicate"]).env_remove(CONFIG_ENV).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_module() {
    let res = call(&["verify", "--only", "numbers_game"]);
    assert_eq!(res.code, 0, "{}", res.payload);
    let v: Value = serde_json::from_str(&res.payload).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["module"] == "numbers_game" && c["status"] == "pass"));
    for module in ["lattice", "negative_classes"] {
        assert_eq!(call(&["verify", "--only", module]).code, 0);
    }
}

#[test]
fn verify_detects_corrupted_d9() {
    let fixtures = VerifyFixtures { d9: "(3;1,1,1,1,1,1,1,1,2)".parse().unwrap() };
    let res = verify(&Config::default(), Some("lattice"), &fixtures);
    assert_eq!(res.code, 1);
    let v: Value = serde_json::from_str(&res.payload).unwrap();
    let d9 = v["checks"].as_array().unwrap().iter().find(|c| c["check"] == "d9_decomposition").unwrap();
    assert_eq!(d9["status"], "fail");
}

#[test]
fn verify_full_suite_passes() {
    let res = call(&["verify"]);
    assert_eq!(res.code, 0, "{}", res.payload);
}
