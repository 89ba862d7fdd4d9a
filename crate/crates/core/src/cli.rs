//! Command-line front end: argument parsing, configuration, serialization
//! and the bundled verification suite.
//!
//! Output is a pure function of argv, configuration and seed. Timings and
//! error messages go to `diagnostics`, never into the payload.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::{
    class_invariants, combine, cremona_reduce, int, intersect, parse_rational, rational, reflect, simple_roots,
    CapacityVector, HClass, PDClass, Rational, D9_MULTIPLICITIES,
};
use crate::negative_classes::{
    classify_negative, enumerate_exceptional, enumerate_le_minus3, enumerate_neg2_roots, is_positive_root, FamilyTag,
};
use crate::numbers_game::{e8_affine_graph, lattice_init, play, GameState, Strategy, E8_AFFINE_WEIGHTS};
use crate::wall_crossing::{
    chamber_signature, comparable_pair, default_delta0, generate_sequence, is_admissible, restriction_direction,
    separating_walls, transition_pair, Certificate, RestrictionDirection, SequenceRecord, Wall, DEFAULT_MAX_A0,
    DEFAULT_STEPS,
};

/// Environment variable naming a configuration file.
pub const CONFIG_ENV: &str = "NINEWALLS_CONFIG";

pub const EXIT_OK: i32 = 0;
pub const EXIT_MATH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    First,
    Random,
}

/// Defaults applied when a flag is absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub default_n: usize,
    pub default_max_m: i64,
    pub default_max_a0: i64,
    pub default_strategy: StrategyName,
    pub seed: u64,
    pub format: Format,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            default_n: 9,
            default_max_m: 1,
            default_max_a0: DEFAULT_MAX_A0,
            default_strategy: StrategyName::First,
            seed: 0,
            format: Format::Json,
        }
    }
}

impl Config {
    /// Parses `key = value` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse(format!("config line {}: {msg}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let positive = |v: &str| -> Result<i64> {
                match v.parse::<i64>() {
                    Ok(x) if x > 0 => Ok(x),
                    _ => Err(bad(format!("{key} must be a positive integer, got {v:?}"))),
                }
            };
            match key {
                "default_n" => {
                    let n = positive(value)?;
                    if n != 9 {
                        return Err(bad(format!("default_n must be 9, got {n}")));
                    }
                    cfg.default_n = 9;
                }
                "default_max_m" => cfg.default_max_m = positive(value)?,
                "default_max_a0" => cfg.default_max_a0 = positive(value)?,
                "default_strategy" => {
                    cfg.default_strategy =
                        StrategyName::from_str(value, true).map_err(|_| bad(format!("unknown strategy {value:?}")))?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad(format!("invalid seed {value:?}")))?,
                "format" => {
                    cfg.format = Format::from_str(value, true).map_err(|_| bad(format!("unknown format {value:?}")))?
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    /// Reads the file named by [`CONFIG_ENV`], or the defaults when unset.
    pub fn from_env() -> Result<Config> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => Config::load(Path::new(&p)),
            None => Ok(Config::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub code: i32,
    pub payload: String,
    pub diagnostics: String,
}

impl CommandResult {
    fn ok(payload: String) -> Self {
        CommandResult { code: EXIT_OK, payload, diagnostics: String::new() }
    }

    fn math(err: &Error) -> Self {
        CommandResult { code: EXIT_MATH, payload: String::new(), diagnostics: format!("error: {err}\n") }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ninewalls", version, about = "Walls and chambers for nine-ball packings of the projective plane")]
struct Cli {
    /// Output format; overrides the configuration file.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    Le3,
    Neg2,
    Exceptional,
}

#[derive(Debug, Args)]
struct StrategyArgs {
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List classes of one family with their invariants.
    EnumerateClasses {
        #[arg(long, value_enum)]
        family: FamilyName,
        #[arg(long)]
        max_m: Option<i64>,
        #[arg(long)]
        max_a0: Option<i64>,
    },
    /// Invariants and family of a class `(a0; a1,...,a9)`.
    ClassInfo { class: String },
    /// Cremona reduction of a class with rational coefficients.
    Reduce { class: String },
    /// Area of a class at the given capacities.
    Area {
        #[arg(long)]
        delta: String,
        #[arg(long)]
        class: String,
    },
    /// The numbers game on affine E8.
    Game {
        #[command(subcommand)]
        action: GameAction,
    },
    /// Wall-crossing sequence driven by the numbers game.
    Sequence {
        #[arg(long)]
        delta0: Option<String>,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[command(flatten)]
        strategy: StrategyArgs,
    },
    /// Negative walls and wall incidences at a point.
    Chamber {
        #[arg(long)]
        delta: String,
    },
    /// Walls with opposite signs at two points.
    SeparatingWalls {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Comparable capacities on either side of one (-2)-wall.
    Restrict {
        #[arg(long)]
        wall: String,
        #[arg(long)]
        near: String,
        #[arg(long)]
        epsilon: String,
    },
    /// Bounded admissibility test with certificate.
    Admissible {
        #[arg(long)]
        delta: String,
        #[arg(long)]
        max_a0: Option<i64>,
    },
    /// Run the bundled invariant suite.
    Verify {
        /// Restrict to one module: lattice, negative_classes, numbers_game or wall_crossing.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum GameAction {
    Play {
        #[arg(long)]
        moves: usize,
        #[command(flatten)]
        strategy: StrategyArgs,
    },
}

/// Parses `argv` (including the program name) and executes it.
pub fn run(argv: &[String], config: &Config) -> CommandResult {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandResult { code: EXIT_USAGE, payload: String::new(), diagnostics: text }
            } else {
                CommandResult::ok(text)
            };
        }
    };
    let format = cli.format.unwrap_or(config.format);
    if let Command::Verify { only } = &cli.command {
        return verify(config, only.as_deref(), &VerifyFixtures::default());
    }
    match dispatch(cli.command, format, config) {
        Ok(payload) => CommandResult::ok(payload),
        Err(e @ Error::Parse(_)) => CommandResult { code: EXIT_USAGE, ..CommandResult::math(&e) },
        Err(e) => CommandResult::math(&e),
    }
}

fn strategy(args: &StrategyArgs, config: &Config) -> Strategy {
    match args.strategy.unwrap_or(config.default_strategy) {
        StrategyName::First => Strategy::FirstPositive,
        StrategyName::Random => Strategy::RandomPositive { seed: args.seed.unwrap_or(config.seed) },
    }
}

fn capacities(s: &str) -> Result<CapacityVector> {
    s.parse()
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let field = |f: &String| {
        if f.contains([',', '"', '\n']) {
            format!("\"{}\"", f.replace('"', "\"\""))
        } else {
            f.clone()
        }
    };
    let mut out = String::new();
    for line in std::iter::once(header.to_vec()).chain(rows.iter().cloned()) {
        out.push_str(&line.iter().map(field).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(T::to_string).collect()
}

fn wall_json(w: &Wall) -> Value {
    json!({
        "class": w.class.to_string(),
        "family": w.family.name(),
        "indices": w.family.indices(),
        "m": w.family.level(),
    })
}

fn delta_json(d: &CapacityVector) -> Value {
    json!(strings(d.delta()))
}

fn dispatch(command: Command, format: Format, config: &Config) -> Result<String> {
    match command {
        Command::EnumerateClasses { family, max_m, max_a0 } => {
            let classes: Vec<HClass> = match family {
                FamilyName::Le3 => enumerate_le_minus3().to_vec(),
                FamilyName::Neg2 => {
                    enumerate_neg2_roots(max_m.unwrap_or(config.default_max_m))?.iter().map(|r| r.cls.clone()).collect()
                }
                FamilyName::Exceptional => enumerate_exceptional(max_a0.unwrap_or(1))?,
            };
            let rows: Vec<(FamilyTag, HClass)> = classes.into_iter().map(|c| (classify_negative(&c), c)).collect();
            match format {
                Format::Json => {
                    let mut out = Vec::with_capacity(rows.len());
                    for (tag, c) in &rows {
                        let inv = class_invariants(c)?;
                        out.push(json!({
                            "family": tag.name(),
                            "indices": tag.indices(),
                            "m": tag.level(),
                            "class": c.to_string(),
                            "self_int": inv.self_int,
                            "c1": inv.c1,
                            "codim": inv.codim,
                        }));
                    }
                    Ok(to_json(&Value::Array(out)))
                }
                Format::Csv => {
                    let mut header = strings(&["family", "indices", "m", "a0"]);
                    header.extend((1..=9).map(|i| format!("a{i}")));
                    header.extend(strings(&["self_int", "c1", "codim"]));
                    let mut body = Vec::with_capacity(rows.len());
                    for (tag, c) in &rows {
                        let inv = class_invariants(c)?;
                        let mut row = vec![
                            tag.name().to_string(),
                            strings(&tag.indices()).join(" "),
                            tag.level().map(|m| m.to_string()).unwrap_or_default(),
                            c.a0().to_string(),
                        ];
                        row.extend(strings(c.a()));
                        row.extend([inv.self_int.to_string(), inv.c1.to_string(), inv.codim.to_string()]);
                        body.push(row);
                    }
                    Ok(csv(&header, &body))
                }
            }
        }
        Command::ClassInfo { class } => {
            let c: HClass = class.parse()?;
            let inv = class_invariants(&c)?;
            let tag = classify_negative(&c);
            let v = json!({
                "class": c.to_string(),
                "self_int": inv.self_int,
                "c1": inv.c1,
                "k": inv.k,
                "genus_defect": inv.genus_defect,
                "codim": inv.codim,
                "family": tag.name(),
                "indices": tag.indices(),
                "m": tag.level(),
            });
            Ok(match format {
                Format::Json => to_json(&v),
                Format::Csv => csv(
                    &strings(&["class", "self_int", "c1", "k", "genus_defect", "codim", "family"]),
                    &[vec![
                        c.to_string(),
                        inv.self_int.to_string(),
                        inv.c1.to_string(),
                        inv.k.to_string(),
                        inv.genus_defect.to_string(),
                        inv.codim.to_string(),
                        tag.name().to_string(),
                    ]],
                ),
            })
        }
        Command::Reduce { class } => {
            let pd: PDClass = class.parse()?;
            let red = cremona_reduce(&pd)?;
            let word = strings(&red.word);
            Ok(match format {
                Format::Json => to_json(&json!({
                    "input": pd.to_string(),
                    "class": red.class.to_string(),
                    "word": word,
                    "reduced": red.reduced,
                })),
                Format::Csv => csv(
                    &strings(&["input", "class", "word", "reduced"]),
                    &[vec![pd.to_string(), red.class.to_string(), word.join(" "), red.reduced.to_string()]],
                ),
            })
        }
        Command::Area { delta, class } => {
            let d = capacities(&delta)?;
            let c: HClass = class.parse()?;
            let a = d.area(&c)?;
            Ok(match format {
                Format::Json => {
                    to_json(&json!({"delta": delta_json(&d), "class": c.to_string(), "area": a.to_string()}))
                }
                Format::Csv => {
                    csv(&strings(&["delta", "class", "area"]), &[vec![d.to_string(), c.to_string(), a.to_string()]])
                }
            })
        }
        Command::Game { action: GameAction::Play { moves, strategy: s } } => {
            let steps = play(moves, strategy(&s, config))?;
            Ok(match format {
                Format::Json => to_json(&Value::Array(
                    steps
                        .iter()
                        .map(|r| {
                            json!({
                                "step": r.step,
                                "fired_node": r.fired_node,
                                "values": r.values,
                                "invariant": r.invariant,
                                "crossed_class": r.crossed_class.to_string(),
                            })
                        })
                        .collect(),
                )),
                Format::Csv => {
                    let mut header = strings(&["step", "fired_node"]);
                    header.extend((0..9).map(|i| format!("v{i}")));
                    header.extend(strings(&["invariant", "crossed_class"]));
                    let rows: Vec<Vec<String>> = steps
                        .iter()
                        .map(|r| {
                            let mut row = vec![r.step.to_string(), r.fired_node.to_string()];
                            row.extend(strings(&r.values));
                            row.extend([r.invariant.to_string(), r.crossed_class.to_string()]);
                            row
                        })
                        .collect();
                    csv(&header, &rows)
                }
            })
        }
        Command::Sequence { delta0, steps, strategy: s } => {
            let d0 = match delta0 {
                Some(text) => capacities(&text)?,
                None => default_delta0(),
            };
            let records = generate_sequence(&d0, steps, strategy(&s, config)).map_err(|e| match e {
                Error::LandedOnWall { step, wall } => Error::LandedOnWall {
                    step,
                    wall: format!("{wall}; perturb the start, for example --delta0 {}", perturbed(&d0)),
                },
                other => other,
            })?;
            Ok(match format {
                Format::Json => to_json(&Value::Array(records.iter().map(record_json).collect())),
                Format::Csv => {
                    let mut header = strings(&["step", "fired_node", "crossed", "area_before", "area_after"]);
                    header.extend((1..=9).map(|i| format!("d{i}")));
                    header.extend(strings(&["invariant", "sup_distance_to_monotone", "on_walls"]));
                    let rows: Vec<Vec<String>> = records
                        .iter()
                        .map(|r| {
                            let mut row = vec![
                                r.step.to_string(),
                                r.fired_node.to_string(),
                                r.crossed.to_string(),
                                r.area_before.to_string(),
                                r.area_after.to_string(),
                            ];
                            row.extend(strings(r.delta.delta()));
                            row.extend([
                                r.invariant_value.to_string(),
                                r.sup_distance_to_monotone.to_string(),
                                strings(&r.on_walls).join(" "),
                            ]);
                            row
                        })
                        .collect();
                    csv(&header, &rows)
                }
            })
        }
        Command::Chamber { delta } => {
            let d = capacities(&delta)?;
            let sig = chamber_signature(&d)?;
            let negative: Vec<&Wall> = sig.negative_walls();
            Ok(match format {
                Format::Json => to_json(&json!({
                    "delta": delta_json(&d),
                    "level_bound": sig.level_bound,
                    "walls_checked": sig.signs.len() + sig.on_wall.len(),
                    "negative": negative.iter().map(|w| wall_json(w)).collect::<Vec<_>>(),
                    "on_wall": sig.on_wall.iter().map(wall_json).collect::<Vec<_>>(),
                })),
                Format::Csv => {
                    let rows: Vec<Vec<String>> = negative
                        .iter()
                        .map(|w| (*w, "-"))
                        .chain(sig.on_wall.iter().map(|w| (w, "0")))
                        .map(|(w, s)| wall_row(w, s))
                        .collect();
                    csv(&strings(&["class", "family", "indices", "m", "sign"]), &rows)
                }
            })
        }
        Command::SeparatingWalls { from, to } => {
            let walls = separating_walls(&capacities(&from)?, &capacities(&to)?)?;
            Ok(match format {
                Format::Json => to_json(&Value::Array(walls.iter().map(wall_json).collect())),
                Format::Csv => csv(
                    &strings(&["class", "family", "indices", "m", "sign"]),
                    &walls.iter().map(|w| wall_row(w, "flip")).collect::<Vec<_>>(),
                ),
            })
        }
        Command::Restrict { wall, near, epsilon } => {
            let w: HClass = wall.parse()?;
            let pair = comparable_pair(&w, &capacities(&near)?, &parse_rational(&epsilon)?)?;
            Ok(match format {
                Format::Json => to_json(&json!({
                    "wall": pair.wall.to_string(),
                    "x_minus": delta_json(&pair.x_minus),
                    "x_plus": delta_json(&pair.x_plus),
                    "epsilon": pair.epsilon.to_string(),
                    "k": pair.k.to_string(),
                })),
                Format::Csv => csv(
                    &strings(&["wall", "x_minus", "x_plus", "epsilon", "k"]),
                    &[vec![
                        pair.wall.to_string(),
                        pair.x_minus.to_string(),
                        pair.x_plus.to_string(),
                        pair.epsilon.to_string(),
                        pair.k.to_string(),
                    ]],
                ),
            })
        }
        Command::Admissible { delta, max_a0 } => {
            let d = capacities(&delta)?;
            let bound = max_a0.unwrap_or(config.default_max_a0);
            let adm = is_admissible(&d, bound)?;
            let detail = match &adm.certificate {
                Certificate::NonPositiveSquare { square } => format!("square {square} is not positive"),
                Certificate::ViolatedClass { class, area } => format!("area {area} on {class}"),
                Certificate::Verified { max_a0, orbit_representatives } => {
                    format!("positive on all exceptional classes with a0 <= {max_a0} ({orbit_representatives} orbit representatives)")
                }
            };
            Ok(match format {
                Format::Json => to_json(&json!({
                    "delta": delta_json(&d),
                    "admissible": adm.admissible,
                    "certificate": serde_json::to_value(&adm.certificate).expect("certificates serialize"),
                    "cremona_admissible": adm.cremona_admissible,
                })),
                Format::Csv => csv(
                    &strings(&["delta", "admissible", "certificate", "cremona_admissible"]),
                    &[vec![d.to_string(), adm.admissible.to_string(), detail, adm.cremona_admissible.to_string()]],
                ),
            })
        }
        Command::Verify { .. } => unreachable!("handled before dispatch"),
    }
}

fn wall_row(w: &Wall, sign: &str) -> Vec<String> {
    vec![
        w.class.to_string(),
        w.family.name().to_string(),
        strings(&w.family.indices()).join(" "),
        w.family.level().map(|m| m.to_string()).unwrap_or_default(),
        sign.to_string(),
    ]
}

fn record_json(r: &SequenceRecord) -> Value {
    json!({
        "step": r.step,
        "fired_node": r.fired_node,
        "crossed": r.crossed.to_string(),
        "pd_unnormalized": r.pd_unnormalized.to_string(),
        "delta": delta_json(&r.delta),
        "area_before": r.area_before.to_string(),
        "area_after": r.area_after.to_string(),
        "invariant": r.invariant_value,
        "sup_distance_to_monotone": r.sup_distance_to_monotone.to_string(),
        "on_walls": strings(&r.on_walls),
    })
}

/// `delta_i - i * min(delta) / 1000`: stays positive and breaks ties in
/// decreasing order, which moves a reduced point into the interior.
fn perturbed(d: &CapacityVector) -> String {
    let min = d.delta().iter().min().cloned().unwrap_or_default();
    let step = min / int(1000);
    let v: Vec<String> =
        d.delta().iter().enumerate().map(|(i, x)| (x - &step * int(i as i64 + 1)).to_string()).collect();
    v.join(",")
}

/// Constants the suite checks against; tests replace them to confirm the
/// checks can fail.
#[derive(Debug, Clone)]
pub struct VerifyFixtures {
    pub d9: HClass,
}

impl Default for VerifyFixtures {
    fn default() -> Self {
        VerifyFixtures { d9: HClass::d9() }
    }
}

pub const MODULES: [&str; 4] = ["lattice", "negative_classes", "numbers_game", "wall_crossing"];

type Check = fn(&Config, &VerifyFixtures) -> std::result::Result<(), String>;

fn checks() -> Vec<(&'static str, &'static str, Check)> {
    vec![
        ("lattice", "d9_decomposition", check_d9_decomposition),
        ("lattice", "d9_invariants", check_d9_invariants),
        ("lattice", "reflection_involution_isometry", check_reflections),
        ("lattice", "cremona_example", check_cremona),
        ("negative_classes", "enumeration_counts", check_counts),
        ("negative_classes", "d9_fixed_by_root_reflections", check_d9_fixed),
        ("negative_classes", "adjunction_consistency", check_adjunction),
        ("numbers_game", "graph_null_vector", check_null_vector),
        ("numbers_game", "invariant_conservation", check_game_invariant),
        ("numbers_game", "lattice_game_equivalence", check_lattice_game),
        ("wall_crossing", "one_step_crossing", check_one_step),
        ("wall_crossing", "sequence_soundness", check_sequence),
        ("wall_crossing", "convergence_trend", check_convergence),
        ("wall_crossing", "admissibility_examples", check_admissibility),
        ("wall_crossing", "restriction_directions", check_directions),
        ("wall_crossing", "transition_pairs", check_transition_pairs),
    ]
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_d9_decomposition(_: &Config, fx: &VerifyFixtures) -> std::result::Result<(), String> {
    let (roots, _) = simple_roots();
    let sum = combine(&D9_MULTIPLICITIES, &roots).map_err(|e| e.to_string())?;
    ensure(sum == fx.d9, || format!("weighted sum of simple roots is {sum}, expected {}", fx.d9))
}

fn check_d9_invariants(_: &Config, fx: &VerifyFixtures) -> std::result::Result<(), String> {
    let inv = class_invariants(&fx.d9).map_err(|e| e.to_string())?;
    ensure(inv.self_int == 0 && inv.c1 == 0 && inv.k == 0 && inv.codim == 2, || format!("{inv:?}"))
}

fn check_reflections(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let roots = enumerate_neg2_roots(1).map_err(|e| e.to_string())?;
    let samples = enumerate_le_minus3();
    for (i, r) in roots.iter().enumerate().step_by(7) {
        let b = &samples[i % samples.len()];
        let c = &samples[(i * 13 + 5) % samples.len()];
        let rb = reflect(&r.cls, b).map_err(|e| e.to_string())?;
        let rc = reflect(&r.cls, c).map_err(|e| e.to_string())?;
        ensure(reflect(&r.cls, &rb).ok().as_ref() == Some(b), || format!("reflection in {} is not involutive", r.cls))?;
        ensure(rb.self_intersection() == b.self_intersection(), || format!("reflection in {} changes squares", r.cls))?;
        let (x, y) = (intersect(&rb, &rc), intersect(b, c));
        ensure(x == y, || format!("reflection in {} is not an isometry", r.cls))?;
    }
    Ok(())
}

fn check_cremona(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let pd: PDClass =
        "(17/10; 8/10,8/10,8/10,1/10,1/10,1/10,1/10,1/10,1/10)".parse().map_err(|e: Error| e.to_string())?;
    let red = cremona_reduce(&pd).map_err(|e| e.to_string())?;
    let want = CapacityVector::uniform(9, rational(1, 10)).expect("positive").pd_class();
    ensure(red.class == want && red.reduced, || format!("reduced to {}", red.class))?;
    let again = cremona_reduce(&red.class).map_err(|e| e.to_string())?;
    ensure(again.word.is_empty(), || "reduction is not idempotent".into())
}

fn check_counts(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let le3 = enumerate_le_minus3().len();
    ensure(le3 == 437, || format!("{le3} classes of square <= -3"))?;
    for m in 0..=5 {
        let got = enumerate_neg2_roots(m).map_err(|e| e.to_string())?.len() as i64;
        ensure(got == 84 + 240 * m, || format!("{got} roots of level <= {m}"))?;
    }
    let e = enumerate_exceptional(1).map_err(|e| e.to_string())?.len();
    ensure(e == 45, || format!("{e} exceptional classes with a0 <= 1"))
}

fn check_d9_fixed(_: &Config, fx: &VerifyFixtures) -> std::result::Result<(), String> {
    for r in enumerate_neg2_roots(2).map_err(|e| e.to_string())?.iter() {
        let img = reflect(&r.cls, &fx.d9).map_err(|e| e.to_string())?;
        ensure(img == fx.d9, || format!("reflection in {} moves {}", r.cls, fx.d9))?;
    }
    Ok(())
}

fn check_adjunction(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let roots = enumerate_neg2_roots(2).map_err(|e| e.to_string())?;
    for c in enumerate_le_minus3().iter().chain(roots.iter().map(|r| &r.cls)) {
        let g = class_invariants(c).map_err(|e| e.to_string())?.genus_defect;
        ensure(g >= 0, || format!("{c} has genus defect {g}"))?;
    }
    for c in enumerate_exceptional(6).map_err(|e| e.to_string())? {
        let g = class_invariants(&c).map_err(|e| e.to_string())?.genus_defect;
        ensure(g == 0, || format!("exceptional {c} has genus defect {g}"))?;
    }
    Ok(())
}

fn check_null_vector(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    ensure(e8_affine_graph().is_null_vector(&E8_AFFINE_WEIGHTS), || "weights are not a null vector".into())
}

fn check_game_invariant(cfg: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    for strategy in [Strategy::FirstPositive, Strategy::RandomPositive { seed: cfg.seed }] {
        let mut chooser = strategy.chooser();
        let mut state = GameState::e8_initial();
        for step in 1..=1000 {
            let node = chooser.choose(state.values()).ok_or("no positive node")?;
            state = state.fire(node).map_err(|e| e.to_string())?;
            let inv = state.invariant(&E8_AFFINE_WEIGHTS).map_err(|e| e.to_string())?;
            ensure(inv == 3, || format!("invariant {inv} after move {step}"))?;
        }
    }
    Ok(())
}

fn check_lattice_game(cfg: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    for strategy in [Strategy::FirstPositive, Strategy::RandomPositive { seed: cfg.seed }] {
        let mut chooser = strategy.chooser();
        let mut game = GameState::e8_initial();
        let mut lattice = lattice_init();
        for step in 1..=200 {
            let node = chooser.choose(game.values()).ok_or("no positive node")?;
            game = game.fire(node).map_err(|e| e.to_string())?;
            lattice = lattice.fire(node).map_err(|e| e.to_string())?.0;
            ensure(lattice.values() == game.values(), || format!("values diverge after move {step}"))?;
        }
    }
    Ok(())
}

fn check_one_step(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let d0 = CapacityVector::uniform(9, rational(1, 10)).expect("positive");
    let rec = generate_sequence(&d0, 1, Strategy::FirstPositive).map_err(|e| e.to_string())?;
    let want: CapacityVector =
        "8/17,8/17,8/17,1/17,1/17,1/17,1/17,1/17,1/17".parse().map_err(|e: Error| e.to_string())?;
    ensure(rec[0].delta == want, || format!("one step gives {}", rec[0].delta))
}

fn default_run(steps: usize) -> std::result::Result<Vec<SequenceRecord>, String> {
    generate_sequence(&default_delta0(), steps, Strategy::FirstPositive).map_err(|e| e.to_string())
}

fn check_sequence(cfg: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let recs = default_run(50)?;
    let mut prev = default_delta0().pd_class();
    for r in &recs {
        ensure(is_positive_root(&r.crossed), || format!("step {} crosses {}", r.step, r.crossed))?;
        ensure(r.area_before.is_positive() && r.area_after == -r.area_before.clone(), || {
            format!("step {} areas {} / {}", r.step, r.area_before, r.area_after)
        })?;
        let grows =
            r.pd_unnormalized.c0() > prev.c0() && r.pd_unnormalized.c().iter().zip(prev.c()).all(|(a, b)| a >= b);
        ensure(grows, || format!("step {} does not increase the class", r.step))?;
        let adm = is_admissible(&r.delta, cfg.default_max_a0).map_err(|e| e.to_string())?;
        ensure(adm.admissible, || format!("step {} leaves the admissible cone", r.step))?;
        prev = r.pd_unnormalized.clone();
    }
    Ok(())
}

fn check_convergence(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let recs = default_run(50)?;
    let (d10, d50) = (&recs[9].sup_distance_to_monotone, &recs[49].sup_distance_to_monotone);
    ensure(d50 < d10, || format!("sup-distance {d50} at step 50 is not below {d10} at step 10"))
}

fn check_admissibility(cfg: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let cases = [
        ("1/10,1/10,1/10,1/10,1/10,1/10,1/10,1/10,1/10", true),
        ("1/3,1/3,1/3,1/3,1/3,1/3,1/3,1/3,1/3", false),
        ("1,1/10,1/10,1/10,1/10,1/10,1/10,1/10,1/10", false),
    ];
    for (text, want) in cases {
        let d: CapacityVector = text.parse().map_err(|e: Error| e.to_string())?;
        let adm = is_admissible(&d, cfg.default_max_a0).map_err(|e| e.to_string())?;
        ensure(adm.admissible == want && adm.agrees(), || format!("{text}: {adm:?}"))?;
    }
    Ok(())
}

fn check_directions(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    for i in 0..9 {
        for j in 0..9 {
            let mut n = vec![int(0); 9];
            n[i] += int(1);
            n[j] -= int(1);
            let want = if i == j { None } else { Some(RestrictionDirection::Both) };
            ensure(restriction_direction(&n).ok() == want, || format!("e{} - e{}", i + 1, j + 1))?;
            let mut e = vec![int(0); 9];
            e[i] = int(1);
            ensure(restriction_direction(&e).ok() == Some(RestrictionDirection::PlusToMinusOnly), || {
                format!("e{}", i + 1)
            })?;
            let neg: Vec<Rational> = e.iter().map(|x| -x).collect();
            ensure(restriction_direction(&neg).ok() == Some(RestrictionDirection::MinusToPlusOnly), || {
                format!("-e{}", i + 1)
            })?;
        }
    }
    Ok(())
}

fn check_transition_pairs(_: &Config, _: &VerifyFixtures) -> std::result::Result<(), String> {
    let recs = default_run(3)?;
    let mut before = default_delta0().pd_class();
    for r in &recs {
        let pair = transition_pair(&before, &r.crossed, &rational(1, 2)).map_err(|e| e.to_string())?;
        pair.verify(DEFAULT_MAX_A0).map_err(|e| e.to_string())?;
        before = r.pd_unnormalized.clone();
    }
    Ok(())
}

/// Runs the suite, optionally restricted to one module. Exit code 1 when a
/// check fails.
pub fn verify(config: &Config, only: Option<&str>, fixtures: &VerifyFixtures) -> CommandResult {
    if let Some(m) = only {
        if !MODULES.contains(&m) {
            return CommandResult {
                code: EXIT_USAGE,
                payload: String::new(),
                diagnostics: format!("error: unknown module {m:?}; expected one of {}\n", MODULES.join(", ")),
            };
        }
    }
    let mut rows = Vec::new();
    let mut diagnostics = String::new();
    let mut failed = 0;
    for (module, name, check) in checks() {
        if only.is_some_and(|m| m != module) {
            continue;
        }
        let start = Instant::now();
        let outcome = check(config, fixtures);
        let _ = writeln!(diagnostics, "{module}::{name} {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
        let (status, detail) = match outcome {
            Ok(()) => ("pass", Value::Null),
            Err(msg) => {
                failed += 1;
                ("fail", Value::String(msg))
            }
        };
        rows.push(json!({"module": module, "check": name, "status": status, "detail": detail}));
    }
    if failed > 0 {
        let _ = writeln!(diagnostics, "{failed} check(s) failed");
    }
    CommandResult {
        code: if failed == 0 { EXIT_OK } else { EXIT_MATH },
        payload: to_json(&json!({"checks": rows, "failed": failed})),
        diagnostics,
    }
}
