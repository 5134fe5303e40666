//! Text format for decision lists, CSV instances, and a seeded random model
//! generator.
//!
//! ```text
//! # comment
//! feature x1 : 0, 1, 2
//! feature x2 : 0, 1, 2
//! classes : neg, pos
//! rule : x1=1 & x2!=0 => neg
//! default => pos
//! ```

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dl::{ClassId, DecisionList, Feature, FeatureSpace, Instance, Literal, Polarity, Rule};
use crate::error::ModelError;

fn column_of(line: &str, token: &str) -> usize {
    let base = line.as_ptr() as usize;
    let at = token.as_ptr() as usize;
    if at >= base && at <= base + line.len() {
        at - base + 1
    } else {
        1
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '&' | '=' | '!' | ':' | '#'))
}

struct LineCtx<'a> {
    number: usize,
    raw: &'a str,
}

impl LineCtx<'_> {
    fn err(&self, token: &str, message: impl Into<String>) -> ModelError {
        ModelError::Parse {
            line: self.number,
            column: column_of(self.raw, token),
            message: message.into(),
        }
    }

    fn name<'t>(&self, token: &'t str, what: &str) -> Result<&'t str, ModelError> {
        let t = token.trim();
        if is_name(t) {
            Ok(t)
        } else {
            Err(self.err(token, format!("invalid {what} `{t}`")))
        }
    }
}

#[derive(Default)]
struct Header {
    features: Vec<Feature>,
    classes: Option<Vec<String>>,
}

/// Parses the line-oriented model format into a validated decision list.
pub fn parse_model(text: &str) -> Result<DecisionList, ModelError> {
    let mut header = Header::default();
    let mut space: Option<FeatureSpace> = None;
    let mut rules: Vec<Rule> = Vec::new();
    let mut default: Option<(ClassId, usize)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let ctx = LineCtx { number: idx + 1, raw };
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some((_, at)) = default {
            return Err(ctx.err(line, format!("default rule on line {at} must be the last rule")));
        }

        let keyword = line.split(|c: char| c.is_whitespace() || c == ':' || c == '=').next().unwrap_or("");
        match keyword {
            "feature" => {
                if space.is_some() {
                    return Err(ctx.err(line, "feature declared after the first rule"));
                }
                let rest = &line["feature".len()..];
                let (name, values) = rest
                    .split_once(':')
                    .ok_or_else(|| ctx.err(line, "expected `feature <name> : <values>`"))?;
                let name = ctx.name(name, "feature name")?;
                if header.features.iter().any(|f| f.name == name) {
                    return Err(ctx.err(name, format!("duplicate domain declaration for `{name}`")));
                }
                let mut domain = Vec::new();
                for v in values.split(',') {
                    let v = ctx.name(v, "value name")?;
                    if domain.iter().any(|d| d == v) {
                        return Err(ctx.err(v, format!("duplicate value `{v}` for `{name}`")));
                    }
                    domain.push(v.to_string());
                }
                header.features.push(Feature {
                    name: name.to_string(),
                    domain,
                });
            }
            "classes" => {
                if header.classes.is_some() {
                    return Err(ctx.err(line, "duplicate class declaration"));
                }
                if space.is_some() {
                    return Err(ctx.err(line, "classes declared after the first rule"));
                }
                let (_, list) = line
                    .split_once(':')
                    .ok_or_else(|| ctx.err(line, "expected `classes : <names>`"))?;
                let mut classes = Vec::new();
                for c in list.split(',') {
                    let c = ctx.name(c, "class name")?;
                    if classes.iter().any(|x| x == c) {
                        return Err(ctx.err(c, format!("duplicate class `{c}`")));
                    }
                    classes.push(c.to_string());
                }
                header.classes = Some(classes);
            }
            "rule" | "default" => {
                if space.is_none() {
                    let classes = header
                        .classes
                        .take()
                        .ok_or_else(|| ctx.err(line, "rules must follow a `classes` declaration"))?;
                    let features = std::mem::take(&mut header.features);
                    space = Some(FeatureSpace::new(features, classes).map_err(|e| ctx.err(line, e.to_string()))?);
                }
                let sp = space.as_ref().expect("space built above");
                let (lhs, class) = line
                    .split_once("=>")
                    .ok_or_else(|| ctx.err(line, "expected `=> <class>`"))?;
                let class_name = ctx.name(class, "class name")?;
                let class = sp
                    .class_index(class_name)
                    .ok_or_else(|| ctx.err(class_name, format!("unknown class `{class_name}`")))?;
                if keyword == "default" {
                    if lhs.trim() != "default" {
                        return Err(ctx.err(lhs, "default rule takes no antecedent"));
                    }
                    default = Some((class, ctx.number));
                    continue;
                }
                let body = lhs.trim()["rule".len()..].trim_start();
                let body = body
                    .strip_prefix(':')
                    .ok_or_else(|| ctx.err(lhs, "expected `rule : <literals> => <class>`"))?;
                let mut antecedent = Vec::new();
                for part in body.split('&') {
                    antecedent.push(parse_literal(&ctx, part, sp)?);
                }
                let rule = Rule::new(antecedent, class, sp).map_err(|e| ctx.err(line, e.to_string()))?;
                rules.push(rule);
            }
            _ => return Err(ctx.err(line, format!("unexpected `{keyword}`"))),
        }
    }

    let (default, _) = default.ok_or_else(|| ModelError::Parse {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing default rule".into(),
    })?;
    let space = space.expect("a default line implies a space");
    DecisionList::new(space, rules, default)
}

fn parse_literal(ctx: &LineCtx<'_>, part: &str, space: &FeatureSpace) -> Result<Literal, ModelError> {
    let (name, polarity, value) = if let Some((n, v)) = part.split_once("!=") {
        (n, Polarity::Neq, v)
    } else if let Some((n, v)) = part.split_once('=') {
        (n, Polarity::Eq, v)
    } else {
        return Err(ctx.err(part, format!("expected `<feature>=<value>` or `<feature>!=<value>`, got `{}`", part.trim())));
    };
    let fname = ctx.name(name, "feature name")?;
    let feature = space
        .feature_index(fname)
        .ok_or_else(|| ctx.err(fname, format!("unknown feature `{fname}`")))?;
    let vname = ctx.name(value, "value name")?;
    let value = space
        .value_index(feature, vname)
        .ok_or_else(|| ctx.err(vname, format!("unknown value `{vname}` for feature `{fname}`")))?;
    Ok(Literal {
        feature,
        polarity,
        value,
    })
}

/// Canonical text form: header, then rules in order with literals in
/// feature order.
pub fn serialize_model(dl: &DecisionList) -> String {
    let space = dl.space();
    let mut out = String::new();
    for f in space.features() {
        let _ = writeln!(out, "feature {} : {}", f.name, f.domain.join(", "));
    }
    let _ = writeln!(out, "classes : {}", space.classes().join(", "));
    for rule in dl.rules() {
        let lits: Vec<String> = rule
            .antecedent()
            .iter()
            .map(|l| l.display(space).to_string())
            .collect();
        let _ = writeln!(out, "rule : {} => {}", lits.join(" & "), space.class_name(rule.prediction()));
    }
    let _ = writeln!(out, "default => {}", space.class_name(dl.default_class()));
    out
}

/// Reads instances from CSV. The header names every feature (any order) and
/// may add a `class` column holding the expected label.
pub fn parse_instances(text: &str, space: &FeatureSpace) -> Result<Vec<Instance>, ModelError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ModelError::Instance {
            row: 1,
            message: e.to_string(),
        })?
        .clone();

    let mut columns: Vec<Option<usize>> = Vec::with_capacity(headers.len());
    let mut class_col = None;
    for (col, h) in headers.iter().enumerate() {
        if h == "class" {
            if class_col.replace(col).is_some() {
                return Err(ModelError::Instance {
                    row: 1,
                    message: "duplicate `class` column".into(),
                });
            }
            columns.push(None);
            continue;
        }
        let f = space.feature_index(h).ok_or_else(|| ModelError::Instance {
            row: 1,
            message: format!("unknown feature column `{h}`"),
        })?;
        if columns.contains(&Some(f)) {
            return Err(ModelError::Instance {
                row: 1,
                message: format!("duplicate column `{h}`"),
            });
        }
        columns.push(Some(f));
    }
    for (j, f) in space.features().iter().enumerate() {
        if !columns.contains(&Some(j)) {
            return Err(ModelError::Instance {
                row: 1,
                message: format!("missing feature column `{}`", f.name),
            });
        }
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ModelError::Instance {
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: match e.kind() {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("ragged row: {len} fields, expected {expected_len}")
                }
                _ => e.to_string(),
            },
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut point = vec![0usize; space.num_features()];
        let mut label = None;
        for (col, field) in record.iter().enumerate() {
            match columns[col] {
                Some(j) => {
                    point[j] = space.value_index(j, field).ok_or_else(|| ModelError::Instance {
                        row,
                        message: format!("value `{field}` outside the domain of feature `{}`", space.feature(j).name),
                    })?;
                }
                None => {
                    label = Some(space.class_index(field).ok_or_else(|| ModelError::Instance {
                        row,
                        message: format!("unknown class `{field}`"),
                    })?);
                }
            }
        }
        out.push(Instance { point, label });
    }
    Ok(out)
}

/// Writes instances as CSV in feature order, with a class column when
/// `labels` is given.
pub fn serialize_instances(space: &FeatureSpace, instances: &[Instance], with_labels: bool) -> String {
    let mut out = String::new();
    let mut header: Vec<&str> = space.features().iter().map(|f| f.name.as_str()).collect();
    if with_labels {
        header.push("class");
    }
    let _ = writeln!(out, "{}", header.join(","));
    for inst in instances {
        let mut row: Vec<&str> = inst
            .point
            .iter()
            .enumerate()
            .map(|(j, &v)| space.feature(j).domain[v].as_str())
            .collect();
        if with_labels {
            row.push(inst.label.map(|c| space.class_name(c)).unwrap_or(""));
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorParams {
    pub seed: u64,
    pub num_features: usize,
    pub domain_size: usize,
    pub num_rules: usize,
    pub max_antecedent_len: usize,
    pub num_classes: usize,
}

/// Seeded random decision list. Features are `x1..xm` with values
/// `0..d-1`, classes `c0..`. Rule `i` predicts class `i mod K` and the default
/// continues the cycle. Antecedents use distinct features, so every rule is
/// self-consistent.
pub fn generate_random_dl(params: &GeneratorParams) -> Result<DecisionList, ModelError> {
    let p = params;
    if p.num_features == 0 || p.domain_size == 0 || p.num_rules == 0 || p.max_antecedent_len == 0 || p.num_classes == 0 {
        return Err(ModelError::Invalid("generator parameters must all be at least 1".into()));
    }
    if p.max_antecedent_len > p.num_features {
        return Err(ModelError::Invalid("max antecedent length exceeds the number of features".into()));
    }
    let features = (1..=p.num_features)
        .map(|i| Feature {
            name: format!("x{i}"),
            domain: (0..p.domain_size).map(|v| v.to_string()).collect(),
        })
        .collect();
    let classes = (0..p.num_classes).map(|c| format!("c{c}")).collect();
    let space = FeatureSpace::new(features, classes)?;

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut rules = Vec::with_capacity(p.num_rules);
    for i in 0..p.num_rules {
        let len = rng.gen_range(1..=p.max_antecedent_len);
        let mut chosen = sample(&mut rng, p.num_features, len).into_vec();
        chosen.sort_unstable();
        let antecedent = chosen
            .into_iter()
            .map(|f| {
                let value = rng.gen_range(0..p.domain_size);
                if p.domain_size > 1 && rng.gen_bool(0.25) {
                    Literal::neq(f, value)
                } else {
                    Literal::eq(f, value)
                }
            })
            .collect();
        rules.push(Rule::new(antecedent, ClassId(i % p.num_classes), &space)?);
    }
    DecisionList::new(space, rules, ClassId(p.num_rules % p.num_classes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::classify;

    const MHS: &str = "\
# three-rule list over ternary domains
feature x1 : 0, 1, 2
feature x2 : 0, 1, 2
feature x3 : 0, 1, 2
feature x4 : 0, 1, 2
feature x5 : 0, 1, 2
classes : neg, pos
rule : x1=1 & x2=1 => neg
rule : x3!=1 => pos
default => neg
";

    #[test]
    fn parses_three_rule_list() {
        let dl = parse_model(MHS).unwrap();
        assert_eq!(dl.num_rules(), 2);
        assert_eq!(dl.space().class_name(dl.default_class()), "neg");
        assert_eq!(dl.rules()[1].antecedent(), &[Literal::neq(2, 1)]);
    }

    #[test]
    fn default_only_model() {
        let dl = parse_model("classes : c\ndefault => c\n").unwrap();
        assert_eq!(dl.num_rules(), 0);
        assert_eq!(dl.space().num_features(), 0);
        let text = serialize_model(&dl);
        assert_eq!(text, "classes : c\ndefault => c\n");
        assert_eq!(parse_model(&text).unwrap(), dl);
    }

    fn parse_err(text: &str) -> ModelError {
        parse_model(text).unwrap_err()
    }

    #[test]
    fn missing_default() {
        let e = parse_err("feature a : 0, 1\nclasses : n, p\nrule : a=1 => p\n");
        assert!(e.to_string().contains("missing default rule"), "{e}");
    }

    #[test]
    fn default_not_last() {
        let e = parse_err("feature a : 0, 1\nclasses : n, p\ndefault => n\nrule : a=1 => p\n");
        assert!(matches!(e, ModelError::Parse { line: 4, .. }), "{e}");
    }

    #[test]
    fn unknown_names_carry_columns() {
        let e = parse_err("feature a : 0, 1\nclasses : n, p\nrule : b=1 => p\ndefault => n\n");
        assert_eq!(
            e,
            ModelError::Parse {
                line: 3,
                column: 8,
                message: "unknown feature `b`".into()
            }
        );
        let e = parse_err("feature a : 0, 1\nclasses : n, p\nrule : a=2 => p\ndefault => n\n");
        assert!(matches!(e, ModelError::Parse { line: 3, column: 10, .. }), "{e}");
        let e = parse_err("feature a : 0, 1\nclasses : n, p\nrule : a=1 => q\ndefault => n\n");
        assert!(e.to_string().contains("unknown class"), "{e}");
    }

    #[test]
    fn duplicate_domain_declaration() {
        let e = parse_err("feature a : 0, 1\nfeature a : 0, 1\nclasses : n, p\ndefault => n\n");
        assert!(e.to_string().contains("duplicate domain declaration"), "{e}");
    }

    #[test]
    fn round_trip_generated() {
        let params = GeneratorParams {
            seed: 7,
            num_features: 6,
            domain_size: 3,
            num_rules: 10,
            max_antecedent_len: 4,
            num_classes: 3,
        };
        let dl = generate_random_dl(&params).unwrap();
        assert_eq!(parse_model(&serialize_model(&dl)).unwrap(), dl);
    }

    #[test]
    fn generator_is_deterministic() {
        let params = GeneratorParams {
            seed: 1,
            num_features: 4,
            domain_size: 2,
            num_rules: 6,
            max_antecedent_len: 3,
            num_classes: 2,
        };
        assert_eq!(generate_random_dl(&params).unwrap(), generate_random_dl(&params).unwrap());
        let one = generate_random_dl(&GeneratorParams { num_rules: 1, ..params }).unwrap();
        assert_eq!(one.num_rules(), 1);
        assert_ne!(one.rules()[0].prediction(), one.default_class());
    }

    #[test]
    fn generated_rules_are_consistent_and_classes_cycle() {
        let params = GeneratorParams {
            seed: 2,
            num_features: 8,
            domain_size: 3,
            num_rules: 50,
            max_antecedent_len: 4,
            num_classes: 3,
        };
        let dl = generate_random_dl(&params).unwrap();
        assert!(dl.rules().iter().all(|r| r.is_consistent()));
        assert!(dl.rules().iter().all(|r| (1..=4).contains(&r.antecedent().len())));
        let mut seen = [false; 3];
        for r in dl.rules() {
            seen[r.prediction().0] = true;
        }
        assert!(seen.iter().all(|s| *s));
        let mut n = 0;
        for p in dl.space().points() {
            classify(&dl, &p).unwrap();
            n += 1;
        }
        assert_eq!(n, 6561);
    }

    #[test]
    fn instances_any_column_order() {
        let dl = parse_model(MHS).unwrap();
        let insts = parse_instances("x5,x4,x3,x2,x1,class\n1,1,1,1,0,pos\n", dl.space()).unwrap();
        assert_eq!(insts.len(), 1);
        assert_eq!(insts[0].point, vec![0, 1, 1, 1, 1]);
        assert_eq!(insts[0].label, dl.space().class_index("pos"));
    }

    #[test]
    fn instance_errors() {
        let dl = parse_model(MHS).unwrap();
        assert!(parse_instances("", dl.space()).unwrap().is_empty());
        assert!(parse_instances("x1,x2,x3,x4,x5\n", dl.space()).unwrap().is_empty());
        let e = parse_instances("x1,x2,x3,x4,x5\n1,1,1,1,1\n1,1,7,1,1\n", dl.space()).unwrap_err();
        match e {
            ModelError::Instance { row, message } => {
                assert_eq!(row, 3);
                assert!(message.contains("x3"), "{message}");
            }
            other => panic!("{other}"),
        }
        let e = parse_instances("x1,x2,x3,x4\n1,1,1,1\n", dl.space()).unwrap_err();
        assert!(e.to_string().contains("missing feature column `x5`"), "{e}");
        let e = parse_instances("x1,x2,x3,x4,x5\n1,1,1,1\n", dl.space()).unwrap_err();
        assert!(e.to_string().contains("ragged"), "{e}");
    }
}
