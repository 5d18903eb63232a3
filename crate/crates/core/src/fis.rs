//! Mamdani fuzzy inference producing the fuzzy index (FI) from scaled
//! privacy, attack-resistance and utility guarantees.
//!
//! AND = min, OR = max, implication clips each output level at its rule
//! strength, aggregation takes the pointwise max, and the crisp output is the
//! centre of gravity of the aggregate sampled on a uniform grid over [0, 1].

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FisError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("invalid FIS document: {0}")]
    Syntax(String),
    #[error("input {name} is not a finite number")]
    NonFinite { name: &'static str },
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> FisError {
    FisError::Config {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "LOW" => Some(Level::Low),
            "MEDIUM" => Some(Level::Medium),
            "HIGH" => Some(Level::High),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Low => "LOW",
            Level::Medium => "MEDIUM",
            Level::High => "HIGH",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Privacy,
    AttackResistance,
    Utility,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::Privacy, Variable::AttackResistance, Variable::Utility];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "privacy" => Some(Variable::Privacy),
            "attack_resistance" => Some(Variable::AttackResistance),
            "utility" => Some(Variable::Utility),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::Privacy => "privacy",
            Variable::AttackResistance => "attack_resistance",
            Variable::Utility => "utility",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum MembershipFunction {
    Gaussian { center: f64, sigma: f64 },
    Triangular { a: f64, b: f64, c: f64 },
    Trapezoidal { a: f64, b: f64, c: f64, d: f64 },
}

impl MembershipFunction {
    pub fn gaussian(center: f64, sigma: f64) -> Self {
        MembershipFunction::Gaussian { center, sigma }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MembershipFunction::Gaussian { center, sigma } => {
                let z = (x - center) / sigma;
                (-0.5 * z * z).exp()
            }
            MembershipFunction::Triangular { a, b, c } => {
                if x < a || x > c {
                    0.0
                } else if x == b {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (c - x) / (c - b)
                }
            }
            MembershipFunction::Trapezoidal { a, b, c, d } => {
                if x < a || x > d {
                    0.0
                } else if x >= b && x <= c {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (d - x) / (d - c)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            MembershipFunction::Gaussian { center, sigma } => {
                if !finite(&[center, sigma]) || sigma <= 0.0 {
                    return Err(format!("gaussian sigma must be positive, got {sigma}"));
                }
            }
            MembershipFunction::Triangular { a, b, c } => {
                if !finite(&[a, b, c]) || !(a <= b && b <= c) {
                    return Err(format!("triangular needs a <= b <= c, got ({a}, {b}, {c})"));
                }
            }
            MembershipFunction::Trapezoidal { a, b, c, d } => {
                if !finite(&[a, b, c, d]) || !(a <= b && b <= c && c <= d) {
                    return Err(format!("trapezoidal needs a <= b <= c <= d, got ({a}, {b}, {c}, {d})"));
                }
            }
        }
        Ok(())
    }
}

/// Membership functions for LOW, MEDIUM and HIGH.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub levels: [MembershipFunction; 3],
}

impl LinguisticVariable {
    pub fn level(&self, level: Level) -> &MembershipFunction {
        &self.levels[level.index()]
    }

    /// The default three gaussians: centres 0, 0.5, 1 with σ = 0.15.
    pub fn default_gaussians() -> Self {
        Self {
            levels: [
                MembershipFunction::gaussian(0.0, DEFAULT_SIGMA),
                MembershipFunction::gaussian(0.5, DEFAULT_SIGMA),
                MembershipFunction::gaussian(1.0, DEFAULT_SIGMA),
            ],
        }
    }
}

pub const DEFAULT_SIGMA: f64 = 0.15;
pub const DEFAULT_RESOLUTION: usize = 1001;
pub const MIN_RESOLUTION: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedents: Vec<(Variable, Level)>,
    pub consequent: Level,
}

impl Rule {
    pub fn new(antecedents: &[(Variable, Level)], consequent: Level) -> Self {
        Self {
            antecedents: antecedents.to_vec(),
            consequent,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IF ")?;
        for (i, (v, l)) in self.antecedents.iter().enumerate() {
            if i > 0 {
                write!(f, " AND ")?;
            }
            write!(f, "{} = {}", v.as_str(), l.as_str())?;
        }
        write!(f, " THEN FI = {}", self.consequent.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub rules: Vec<Rule>,
}

impl RuleBase {
    /// Any LOW input forces a LOW index; the remaining eight rules cover every
    /// MEDIUM/HIGH combination except (M, M, H), (M, H, M) which stay MEDIUM.
    pub fn default_rules() -> Self {
        use Level::*;
        use Variable::*;
        let r = Rule::new;
        Self {
            rules: vec![
                r(&[(Privacy, Low)], Low),
                r(&[(AttackResistance, Low)], Low),
                r(&[(Utility, Low)], Low),
                r(&[(Privacy, Medium), (AttackResistance, Medium), (Utility, Medium)], Medium),
                r(&[(Privacy, Medium), (AttackResistance, Medium), (Utility, High)], Medium),
                r(&[(Privacy, Medium), (AttackResistance, High), (Utility, Medium)], Medium),
                r(&[(Privacy, Medium), (AttackResistance, High), (Utility, High)], High),
                r(&[(Privacy, High), (AttackResistance, Medium), (Utility, Medium)], Medium),
                r(&[(Privacy, High), (AttackResistance, Medium), (Utility, High)], High),
                r(&[(Privacy, High), (AttackResistance, High), (Utility, Medium)], High),
                r(&[(Privacy, High), (AttackResistance, High), (Utility, High)], High),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisModel {
    /// Indexed by [`Variable::index`].
    pub inputs: [LinguisticVariable; 3],
    pub output: LinguisticVariable,
    pub rules: RuleBase,
    pub resolution: usize,
}

impl Default for FisModel {
    fn default() -> Self {
        Self {
            inputs: [LinguisticVariable::default_gaussians(); 3],
            output: LinguisticVariable::default_gaussians(),
            rules: RuleBase::default_rules(),
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

/// Membership degrees of one crisp input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fuzzified {
    pub degrees: [f64; 3],
    /// The input was outside [0, 1] and got clamped.
    pub clamped: bool,
}

pub fn fuzzify(x: f64, var: &LinguisticVariable) -> Fuzzified {
    let clamped = !(0.0..=1.0).contains(&x);
    let x = x.clamp(0.0, 1.0);
    Fuzzified {
        degrees: Level::ALL.map(|l| var.level(l).eval(x).clamp(0.0, 1.0)),
        clamped,
    }
}

/// Per-output-level clipping heights: MIN within a rule, MAX across rules.
pub fn evaluate_rules(degrees: &[[f64; 3]; 3], rules: &RuleBase) -> [f64; 3] {
    let mut heights = [0.0f64; 3];
    for rule in &rules.rules {
        let strength = rule
            .antecedents
            .iter()
            .map(|(v, l)| degrees[v.index()][l.index()])
            .fold(1.0, f64::min);
        let h = &mut heights[rule.consequent.index()];
        *h = h.max(strength);
    }
    heights
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Defuzzified {
    pub value: f64,
    /// No rule fired; `value` is the 0.5 fallback.
    pub degenerate: bool,
}

/// Discrete centre of gravity of the clipped, max-aggregated output shape.
/// The two grid end points carry half weight (trapezoid rule), which removes
/// the first-order bias a plain sum picks up at a non-zero boundary.
pub fn defuzzify_cog(heights: &[f64; 3], output: &LinguisticVariable, resolution: usize) -> Defuzzified {
    let steps = resolution.max(2) - 1;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..=steps {
        let x = k as f64 / steps as f64;
        let mu = Level::ALL
            .iter()
            .map(|&l| heights[l.index()].min(output.level(l).eval(x)))
            .fold(0.0, f64::max);
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        num += w * mu * x;
        den += w * mu;
    }
    if den <= 0.0 {
        Defuzzified {
            value: 0.5,
            degenerate: true,
        }
    } else {
        Defuzzified {
            value: num / den,
            degenerate: false,
        }
    }
}

/// Full trace of one inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub fi: f64,
    pub inputs: [Fuzzified; 3],
    pub heights: [f64; 3],
    pub degenerate: bool,
}

impl FisModel {
    pub fn new(
        inputs: [LinguisticVariable; 3],
        output: LinguisticVariable,
        rules: RuleBase,
        resolution: usize,
    ) -> Result<Self, FisError> {
        let m = Self {
            inputs,
            output,
            rules,
            resolution,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), FisError> {
        for v in Variable::ALL {
            for l in Level::ALL {
                self.inputs[v.index()]
                    .level(l)
                    .validate()
                    .map_err(|m| config_err(format!("membership.{}.{}", v.as_str(), l.as_str()), m))?;
            }
        }
        for l in Level::ALL {
            self.output
                .level(l)
                .validate()
                .map_err(|m| config_err(format!("membership.fi.{}", l.as_str()), m))?;
        }
        if self.rules.rules.is_empty() {
            return Err(config_err("rule", "rule base is empty"));
        }
        for (i, r) in self.rules.rules.iter().enumerate() {
            if r.antecedents.is_empty() {
                return Err(config_err(format!("rule[{i}].if"), "rule has no antecedents"));
            }
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(config_err(
                "resolution",
                format!("must be at least {MIN_RESOLUTION}, got {}", self.resolution),
            ));
        }
        Ok(())
    }

    pub fn infer(&self, privacy: f64, resistance: f64, utility: f64) -> Result<Inference, FisError> {
        let raw = [privacy, resistance, utility];
        for (v, x) in Variable::ALL.iter().zip(raw) {
            if !x.is_finite() {
                return Err(FisError::NonFinite { name: v.as_str() });
            }
        }
        let inputs = [0, 1, 2].map(|i| fuzzify(raw[i], &self.inputs[i]));
        let degrees = inputs.map(|f| f.degrees);
        let heights = evaluate_rules(&degrees, &self.rules);
        let out = defuzzify_cog(&heights, &self.output, self.resolution);
        Ok(Inference {
            fi: out.value,
            inputs,
            heights,
            degenerate: out.degenerate,
        })
    }

    /// Renders the model as a document accepted by [`load_fis_config`].
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "resolution = {}", self.resolution);
        let mut section = |name: &str, var: &LinguisticVariable| {
            let _ = writeln!(s, "\n[membership.{name}]");
            for l in Level::ALL {
                let body = match *var.level(l) {
                    MembershipFunction::Gaussian { center, sigma } => {
                        format!("shape = \"gaussian\", center = {center:?}, sigma = {sigma:?}")
                    }
                    MembershipFunction::Triangular { a, b, c } => {
                        format!("shape = \"triangular\", a = {a:?}, b = {b:?}, c = {c:?}")
                    }
                    MembershipFunction::Trapezoidal { a, b, c, d } => {
                        format!("shape = \"trapezoidal\", a = {a:?}, b = {b:?}, c = {c:?}, d = {d:?}")
                    }
                };
                let _ = writeln!(s, "{} = {{ {body} }}", l.as_str());
            }
        };
        for v in Variable::ALL {
            section(v.as_str(), &self.inputs[v.index()]);
        }
        section("fi", &self.output);
        for r in &self.rules.rules {
            let _ = writeln!(s, "\n[[rule]]");
            let conds: Vec<String> = r
                .antecedents
                .iter()
                .map(|(v, l)| format!("{} = \"{}\"", v.as_str(), l.as_str()))
                .collect();
            let _ = writeln!(s, "if = {{ {} }}", conds.join(", "));
            let _ = writeln!(s, "then = \"{}\"", r.consequent.as_str());
        }
        s
    }
}

/// Fuzzy index of a scaled (privacy, resistance, utility) triple.
pub fn fuzzy_index(privacy: f64, resistance: f64, utility: f64, model: &FisModel) -> Result<f64, FisError> {
    Ok(model.infer(privacy, resistance, utility)?.fi)
}

fn as_f64(v: &toml::Value, path: &str) -> Result<f64, FisError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(config_err(path, "expected a number")),
    }
}

fn parse_mf(v: &toml::Value, path: &str) -> Result<MembershipFunction, FisError> {
    let t = v.as_table().ok_or_else(|| config_err(path, "expected a table"))?;
    let shape = t
        .get("shape")
        .and_then(toml::Value::as_str)
        .ok_or_else(|| config_err(format!("{path}.shape"), "missing shape"))?;
    let expected: &[&str] = match shape {
        "gaussian" => &["center", "sigma"],
        "triangular" => &["a", "b", "c"],
        "trapezoidal" => &["a", "b", "c", "d"],
        other => {
            return Err(config_err(
                format!("{path}.shape"),
                format!("unknown shape {other:?} (gaussian, triangular, trapezoidal)"),
            ))
        }
    };
    for key in t.keys() {
        if key != "shape" && !expected.contains(&key.as_str()) {
            return Err(config_err(format!("{path}.{key}"), format!("not a {shape} parameter")));
        }
    }
    let mut p = Vec::with_capacity(expected.len());
    for key in expected {
        let kp = format!("{path}.{key}");
        let val = t.get(*key).ok_or_else(|| config_err(&kp, "missing parameter"))?;
        p.push(as_f64(val, &kp)?);
    }
    let mf = match shape {
        "gaussian" => MembershipFunction::Gaussian { center: p[0], sigma: p[1] },
        "triangular" => MembershipFunction::Triangular { a: p[0], b: p[1], c: p[2] },
        _ => MembershipFunction::Trapezoidal {
            a: p[0],
            b: p[1],
            c: p[2],
            d: p[3],
        },
    };
    mf.validate().map_err(|m| config_err(path, m))?;
    Ok(mf)
}

fn parse_level(v: &toml::Value, path: &str) -> Result<Level, FisError> {
    let s = v.as_str().ok_or_else(|| config_err(path, "expected a level string"))?;
    Level::parse(s).ok_or_else(|| config_err(path, format!("unknown level {s:?} (LOW, MEDIUM, HIGH)")))
}

/// Parses a FIS document. Omitted parts keep their defaults; a `[[rule]]`
/// list, when present, replaces the default rule base.
///
/// ```toml
/// resolution = 1001
///
/// [membership.privacy]
/// LOW = { shape = "triangular", a = 0.0, b = 0.0, c = 0.5 }
///
/// [[rule]]
/// if = { privacy = "HIGH", utility = "HIGH" }
/// then = "HIGH"
/// ```
pub fn load_fis_config(document: &str) -> Result<FisModel, FisError> {
    let table: toml::Table = document.parse().map_err(|e: toml::de::Error| FisError::Syntax(e.to_string()))?;
    let mut model = FisModel::default();
    for (key, value) in &table {
        match key.as_str() {
            "resolution" => {
                let r = value
                    .as_integer()
                    .filter(|r| *r > 0)
                    .ok_or_else(|| config_err("resolution", "expected a positive integer"))?;
                model.resolution = r as usize;
            }
            "membership" => {
                let vars = value
                    .as_table()
                    .ok_or_else(|| config_err("membership", "expected a table"))?;
                for (vname, levels) in vars {
                    let vpath = format!("membership.{vname}");
                    let target = if vname == "fi" {
                        &mut model.output
                    } else {
                        let v = Variable::parse(vname)
                            .ok_or_else(|| config_err(&vpath, format!("unknown variable {vname:?}")))?;
                        &mut model.inputs[v.index()]
                    };
                    let levels = levels.as_table().ok_or_else(|| config_err(&vpath, "expected a table"))?;
                    for (lname, mf) in levels {
                        let lpath = format!("{vpath}.{lname}");
                        let level = Level::parse(lname)
                            .ok_or_else(|| config_err(&lpath, format!("unknown level {lname:?} (LOW, MEDIUM, HIGH)")))?;
                        target.levels[level.index()] = parse_mf(mf, &lpath)?;
                    }
                }
            }
            "rule" => {
                let arr = value.as_array().ok_or_else(|| config_err("rule", "expected [[rule]] entries"))?;
                let mut rules = Vec::with_capacity(arr.len());
                for (i, r) in arr.iter().enumerate() {
                    let rpath = format!("rule[{i}]");
                    let t = r.as_table().ok_or_else(|| config_err(&rpath, "expected a table"))?;
                    for k in t.keys() {
                        if k != "if" && k != "then" {
                            return Err(config_err(format!("{rpath}.{k}"), "unknown key (if, then)"));
                        }
                    }
                    let cond = t
                        .get("if")
                        .and_then(toml::Value::as_table)
                        .ok_or_else(|| config_err(format!("{rpath}.if"), "missing antecedent table"))?;
                    let mut antecedents = Vec::with_capacity(cond.len());
                    for (vname, lv) in cond {
                        let apath = format!("{rpath}.if.{vname}");
                        let v = Variable::parse(vname)
                            .ok_or_else(|| config_err(&apath, format!("unknown variable {vname:?}")))?;
                        antecedents.push((v, parse_level(lv, &apath)?));
                    }
                    antecedents.sort();
                    let then = t
                        .get("then")
                        .ok_or_else(|| config_err(format!("{rpath}.then"), "missing consequent"))?;
                    rules.push(Rule {
                        antecedents,
                        consequent: parse_level(then, &format!("{rpath}.then"))?,
                    });
                }
                model.rules = RuleBase { rules };
            }
            other => return Err(config_err(other, "unknown key (resolution, membership, rule)")),
        }
    }
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gauss() -> LinguisticVariable {
        LinguisticVariable::default_gaussians()
    }

    #[test]
    fn fuzzify_closed_forms() {
        let f = fuzzify(0.5, &gauss());
        assert_eq!(f.degrees[1], 1.0);
        assert_eq!(f.degrees[0], f.degrees[2]);
        let f = fuzzify(0.0, &gauss());
        assert_eq!(f.degrees[0], 1.0);
        let expect = (-1.0f64 / (2.0 * 0.0225)).exp();
        assert_abs_diff_eq!(f.degrees[2], expect, epsilon = 1e-20);
        assert!((2.2e-10..2.4e-10).contains(&f.degrees[2]));
        let f = fuzzify(1.3, &gauss());
        assert!(f.clamped);
        assert_eq!(f.degrees[2], 1.0);
    }

    #[test]
    fn shapes_evaluate() {
        let t = MembershipFunction::Triangular { a: 0.0, b: 0.25, c: 0.5 };
        assert_eq!(t.eval(0.125), 0.5);
        assert_eq!(t.eval(0.25), 1.0);
        assert_eq!(t.eval(0.6), 0.0);
        let shoulder = MembershipFunction::Triangular { a: 0.0, b: 0.0, c: 0.5 };
        assert_eq!(shoulder.eval(0.0), 1.0);
        let z = MembershipFunction::Trapezoidal { a: 0.2, b: 0.4, c: 0.6, d: 1.0 };
        assert_eq!(z.eval(0.5), 1.0);
        assert_abs_diff_eq!(z.eval(0.8), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(z.eval(0.3), 0.5, epsilon = 1e-15);
        assert!(MembershipFunction::gaussian(0.5, 0.0).validate().is_err());
        assert!(MembershipFunction::Triangular { a: 0.5, b: 0.2, c: 0.9 }.validate().is_err());
    }

    #[test]
    fn rule_semantics() {
        let rb = RuleBase::default_rules();
        assert_eq!(rb.rules.len(), 11);
        let mut deg = [[0.0; 3]; 3];
        deg[0][0] = 0.9;
        assert!(evaluate_rules(&deg, &rb)[0] >= 0.9);

        let mut deg = [[0.0; 3]; 3];
        deg[0][2] = 0.8;
        deg[1][2] = 0.6;
        deg[2][2] = 0.9;
        assert_eq!(evaluate_rules(&deg, &rb)[2], 0.6);

        let two = RuleBase {
            rules: vec![
                Rule::new(&[(Variable::Privacy, Level::Medium)], Level::Medium),
                Rule::new(&[(Variable::Utility, Level::Medium)], Level::Medium),
            ],
        };
        let mut deg = [[0.0; 3]; 3];
        deg[0][1] = 0.3;
        deg[2][1] = 0.5;
        assert_eq!(evaluate_rules(&deg, &two)[1], 0.5);
    }

    #[test]
    fn cog_of_symmetric_medium() {
        for h in [0.2, 0.7, 1.0] {
            let out = defuzzify_cog(&[0.0, h, 0.0], &gauss(), 1001);
            assert_abs_diff_eq!(out.value, 0.5, epsilon = 1e-6);
        }
    }

    #[test]
    fn cog_of_high_half_gaussian() {
        // oracle: trapezoid quadrature of x·µ and µ on a fine grid
        let mf = MembershipFunction::gaussian(1.0, 0.15);
        let n = 200_000;
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..=n {
            let x = k as f64 / n as f64;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            num += w * x * mf.eval(x);
            den += w * mf.eval(x);
        }
        let oracle = num / den;
        let analytic = 1.0 - 0.15 * (2.0 / std::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(oracle, analytic, epsilon = 1e-6);
        let cog = defuzzify_cog(&[0.0, 0.0, 1.0], &gauss(), 1001).value;
        assert_abs_diff_eq!(cog, oracle, epsilon = 2e-3);
        let finer = defuzzify_cog(&[0.0, 0.0, 1.0], &gauss(), 2001).value;
        assert!((finer - cog).abs() < 1e-4);
    }

    #[test]
    fn degenerate_output() {
        let out = defuzzify_cog(&[0.0; 3], &gauss(), 1001);
        assert!(out.degenerate);
        assert_eq!(out.value, 0.5);
    }

    #[test]
    fn index_corners() {
        let m = FisModel::default();
        assert!(fuzzy_index(1.0, 1.0, 1.0, &m).unwrap() >= 0.85);
        assert!(fuzzy_index(0.0, 1.0, 1.0, &m).unwrap() <= 0.20);
        let mid = fuzzy_index(0.5, 0.5, 0.5, &m).unwrap();
        assert!(fuzzy_index(1.0, 1.0, 1.0, &m).unwrap() > mid);
        assert!(mid > fuzzy_index(0.0, 0.0, 0.0, &m).unwrap());
        let fi = fuzzy_index(0.9981, 0.1353, 0.7404, &m).unwrap();
        assert!((fi - 0.2744).abs() <= 0.15, "{fi}");
        assert!(matches!(fuzzy_index(f64::NAN, 0.0, 0.0, &m), Err(FisError::NonFinite { .. })));
    }

    #[test]
    fn empty_document_is_default() {
        assert_eq!(load_fis_config("").unwrap(), FisModel::default());
        let m = FisModel::default();
        assert_eq!(load_fis_config(&m.to_toml()).unwrap(), m);
    }

    #[test]
    fn unknown_level_is_rejected_with_path() {
        let doc = "[[rule]]\nif = { privacy = \"VERYHIGH\" }\nthen = \"HIGH\"\n";
        match load_fis_config(doc) {
            Err(FisError::Config { path, .. }) => assert_eq!(path, "rule[0].if.privacy"),
            other => panic!("unexpected {other:?}"),
        }
        let doc = "[membership.utility]\nVERYHIGH = { shape = \"gaussian\", center = 1, sigma = 0.1 }\n";
        assert!(matches!(load_fis_config(doc), Err(FisError::Config { .. })));
        let doc = "[membership.privacy]\nLOW = { shape = \"gaussian\", center = 0, sigma = -1 }\n";
        match load_fis_config(doc) {
            Err(FisError::Config { path, .. }) => assert_eq!(path, "membership.privacy.LOW"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load_fis_config("resolution = 10"), Err(FisError::Config { .. })));
        assert!(matches!(load_fis_config("rule = ["), Err(FisError::Syntax(_))));
    }

    #[test]
    fn triangular_override_is_used() {
        let doc = "[membership.privacy]\nLOW = { shape = \"triangular\", a = 0, b = 0, c = 0.5 }\n";
        let m = load_fis_config(doc).unwrap();
        assert_eq!(
            m.inputs[0].levels[0],
            MembershipFunction::Triangular { a: 0.0, b: 0.0, c: 0.5 }
        );
        let inf = m.infer(0.25, 1.0, 1.0).unwrap();
        assert_eq!(inf.inputs[0].degrees[0], 0.5);
        assert_eq!(inf.heights[0], 0.5);
    }

    proptest! {
        #[test]
        fn fi_in_unit_interval(p in 0f64..=1.0, r in 0f64..=1.0, u in 0f64..=1.0) {
            let m = FisModel::default();
            let fi = fuzzy_index(p, r, u, &m).unwrap();
            prop_assert!((0.0..=1.0).contains(&fi));
            prop_assert_eq!(fi.to_bits(), fuzzy_index(p, r, u, &m).unwrap().to_bits());
        }

        #[test]
        fn a_zero_input_caps_the_index(a in 0f64..=1.0, b in 0f64..=1.0, which in 0usize..3) {
            let m = FisModel::default();
            let mut lo = [a, b, a];
            lo[which] = 0.0;
            let mut hi = lo;
            hi[which] = 1.0;
            let fi_lo = fuzzy_index(lo[0], lo[1], lo[2], &m).unwrap();
            let fi_hi = fuzzy_index(hi[0], hi[1], hi[2], &m).unwrap();
            prop_assert!(fi_lo <= 0.35, "{}", fi_lo);
            prop_assert!(fi_lo <= fi_hi + 1e-12);
        }
    }
}
