//! One function per subcommand, each producing a [`Report`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use measure_audit::combinatorics::DEFAULT_BUDGET;
use measure_audit::inconsistency::{
    indistinguishable_groups, literal_indistinguishable_groups, model_pairs, pairwise_inconsistency_with,
    rank_models_with, DistinguishReport,
};
use measure_audit::measures::{parse_measure_list, Arity};
use measure_audit::properties::{
    approximate_baseline_value, check_averaging_preservation, check_property, exact_baseline_expectation, AuditSpace,
    PropertyId, Verdict, Witness,
};
use measure_audit::{AveragingScheme, Budget, ConfusionMatrix, Measure, Value, ValueKind, EPSILON};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{AuditArgs, BaselineArgs, Command, DistinguishArgs, EvalArgs, InputFormat, ModelArgs, RunConfig};
use crate::error::{CliError, CliResult};
use crate::input::{infer_format, matrix_to_json, parse_inputs, parse_label_files, InputSummary};
use crate::report::{Report, Table};

/// Largest `n` that `distinguish` enumerates literally without `--full`.
pub const LITERAL_N_MAX: usize = 7;

pub struct Context {
    pub budget: Budget,
    pub epsilon: f64,
}

impl Context {
    pub fn from_config(cfg: &RunConfig) -> CliResult<Self> {
        let limit = cfg.budget.unwrap_or(DEFAULT_BUDGET);
        if limit == 0 {
            return Err(CliError::input("--budget must be positive"));
        }
        let epsilon = cfg.epsilon.unwrap_or(EPSILON);
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(CliError::input("--epsilon must be a finite nonnegative number"));
        }
        Ok(Context {
            budget: Budget::new(limit),
            epsilon,
        })
    }
}

pub fn execute(cfg: &RunConfig, ctx: &Context) -> CliResult<Report> {
    let mut report = match &cfg.command {
        Command::Eval(a) => eval(a)?,
        Command::Audit(a) => audit(a, ctx)?,
        Command::Distinguish(a) => distinguish(a, ctx)?,
        Command::Compare(a) => compare(a, ctx)?,
        Command::Rank(a) => rank(a, ctx)?,
        Command::Baseline(a) => baseline(a, ctx)?,
    };
    if let serde_json::Value::Object(settings) = &mut report.settings {
        settings.insert("budget".into(), json!(ctx.budget.limit()));
        settings.insert("epsilon".into(), json!(ctx.epsilon));
    }
    Ok(report)
}

fn measures_or(text: Option<&str>, default: impl FnOnce() -> Vec<Measure>) -> CliResult<Vec<Measure>> {
    match text {
        Some(t) => Ok(parse_measure_list(t)?),
        None => Ok(default()),
    }
}

/// Registry measures that can be evaluated with `m` classes.
fn applicable(m: usize) -> Vec<Measure> {
    Measure::registry()
        .into_iter()
        .filter(|x| m == 2 || x.arity() != Arity::BinaryOnly)
        .collect()
}

fn ids(measures: &[Measure]) -> Vec<String> {
    measures.iter().map(Measure::id).collect()
}

fn kind_label(v: &Value) -> &'static str {
    match v.kind() {
        ValueKind::Rational => "rational",
        ValueKind::Surd => "surd",
        ValueKind::Float => "float",
    }
}

fn exact_label(v: &Value) -> String {
    if v.is_exact() {
        v.to_string()
    } else {
        String::new()
    }
}

fn approx(v: &Value) -> String {
    format!("{:.6}", v.to_f64())
}

fn mark(holds: bool) -> String {
    if holds { "✓" } else { "✗" }.to_string()
}

fn eval(args: &EvalArgs) -> CliResult<Report> {
    let (path, csv_default) = match (&args.matrix, &args.labels) {
        (Some(p), _) => (p.as_path(), InputFormat::MatrixCsv),
        (None, Some(p)) => (p.as_path(), InputFormat::LabelsCsv),
        (None, None) => return Err(CliError::input("pass --matrix or --labels")),
    };
    let format = match (args.source.input_format, &args.labels) {
        (None, Some(_)) => InputFormat::LabelsCsv,
        (f, _) => infer_format(path, f, csv_default)?,
    };
    let (parsed, summary) = parse_inputs(path, format, args.source.alphabet.as_deref())?;
    let c = parsed.matrix()?;
    let measures = measures_or(args.measures.as_deref(), || applicable(c.m()))?;
    if let Some(out) = &args.emit_matrix {
        fs::write(out, matrix_to_json(&c) + "\n").map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
    }

    let mut table = Table::new(
        "Values",
        ["measure", "id", "value", "exact", "class"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    let mut values = Vec::new();
    for m in &measures {
        let v = m.evaluate(&c)?;
        table.rows.push(vec![
            m.name(),
            m.id(),
            approx(&v),
            exact_label(&v),
            kind_label(&v).to_string(),
        ]);
        values.push(json!({ "measure": m.descriptor(), "value": v }));
    }
    let binary = c.binary().map(|b| {
        json!({
            "tp": b.tp.to_string(),
            "fn": b.fn_.to_string(),
            "fp": b.fp.to_string(),
            "tn": b.tn.to_string(),
        })
    });

    let mut report = Report::new("eval");
    report.settings = json!({ "measures": ids(&measures) });
    report.inputs.push(summary);
    report.data = json!({ "matrix": c, "binary_counts": binary, "values": values });
    report
        .notes
        .push(format!("Confusion matrix (rows are true classes): {c}"));
    report.tables.push(table);
    Ok(report)
}

fn parse_bound(text: &str) -> CliResult<(PropertyId, usize)> {
    let (p, n) = text
        .split_once('=')
        .ok_or_else(|| CliError::input(format!("bound {text:?} is not PROPERTY=N")))?;
    let p: PropertyId = p.trim().parse()?;
    let n: usize = n
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("bound {text:?} needs a positive integer")))?;
    Ok((p, n))
}

fn parse_properties(text: Option<&str>) -> CliResult<Vec<PropertyId>> {
    match text {
        None => Ok(PropertyId::ALL.to_vec()),
        Some(t) => {
            let ps = t
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<PropertyId>().map_err(CliError::from))
                .collect::<CliResult<Vec<_>>>()?;
            if ps.is_empty() {
                return Err(CliError::input("empty property list"));
            }
            Ok(ps)
        }
    }
}

/// Search space for one property: an explicit bound wins, then `--n-max`
/// (which never widens the triple-based distance search), then the default.
fn space_for(p: PropertyId, m: usize, n_max: Option<usize>, bounds: &BTreeMap<PropertyId, usize>) -> AuditSpace {
    let mut space = AuditSpace::default_for(p, m);
    if let Some(&n) = bounds.get(&p) {
        space.n_max = n;
    } else if let Some(n) = n_max {
        space.n_max = if p == PropertyId::Dist { n.min(space.n_max) } else { n };
    }
    space
}

fn show_counts(sizes: &(Vec<u64>, Vec<u64>)) -> String {
    format!("a={:?} b={:?}", sizes.0, sizes.1)
}

/// One-line description of a counterexample.
pub fn witness_summary(w: &Witness) -> String {
    match w {
        Witness::Extreme {
            reference,
            reference_value,
            matrix,
            value,
        } => format!("{matrix} gives {value} against {reference_value} at {reference}"),
        Witness::Transform {
            matrix,
            value,
            transformed,
            transformed_value,
            ..
        } => format!("{matrix} gives {value}, {transformed} gives {transformed_value}"),
        Witness::Edit {
            before,
            before_value,
            after,
            after_value,
        } => format!("{before} ({before_value}) to {after} ({after_value})"),
        Witness::Metric {
            failure,
            a,
            b,
            c,
            distances,
            ..
        } => {
            let ds: Vec<String> = distances.iter().map(Value::to_string).collect();
            let mut s = format!("{failure:?} fails for A={a}, B={b}");
            if let Some(c) = c {
                s.push_str(&format!(", C={c}"));
            }
            format!("{s}; distances {}", ds.join(", "))
        }
        Witness::Baseline {
            first,
            first_value,
            second,
            second_value,
        } => format!(
            "{} gives {first_value}, {} gives {second_value}",
            show_counts(first),
            show_counts(second)
        ),
    }
}

fn replayed(v: &Verdict, measure: &Measure) -> CliResult<()> {
    if v.witness.is_some() && !v.replay(measure)? {
        return Err(CliError::Internal(format!(
            "witness for {} {} does not replay",
            v.measure, v.property
        )));
    }
    Ok(())
}

fn audit(args: &AuditArgs, ctx: &Context) -> CliResult<Report> {
    let m = if args.binary { 2 } else { args.classes };
    if m < 2 {
        return Err(CliError::input("--classes must be at least 2"));
    }
    if args.n_max == Some(0) {
        return Err(CliError::input("--n-max must be positive"));
    }
    let properties = parse_properties(args.properties.as_deref())?;
    let bounds = args
        .bounds
        .iter()
        .map(|b| parse_bound(b))
        .collect::<CliResult<BTreeMap<_, _>>>()?;
    if args.averaging {
        return audit_averaging(&properties, ctx);
    }
    let mut measures = parse_measure_list(&args.measures)?;
    if m > 2 && args.measures.trim().eq_ignore_ascii_case("all") {
        measures.retain(|x| x.arity() != Arity::BinaryOnly);
    }

    let cells: Vec<(usize, PropertyId)> = (0..measures.len())
        .flat_map(|i| properties.iter().map(move |&p| (i, p)))
        .collect();
    let verdicts = cells
        .par_iter()
        .map(|&(i, p)| check_property(&measures[i], p, &space_for(p, m, args.n_max, &bounds), &ctx.budget))
        .collect::<Result<Vec<_>, _>>()?;
    for (v, &(i, _)) in verdicts.iter().zip(&cells) {
        replayed(v, &measures[i])?;
    }

    let mut columns = vec!["measure".to_string()];
    columns.extend(properties.iter().map(|p| p.to_string()));
    let mut grid = Table::new(format!("Properties with {m} classes"), columns);
    let mut witnesses = Table::new(
        "Counterexamples",
        ["measure", "property", "witness"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for (i, measure) in measures.iter().enumerate() {
        let row_verdicts = &verdicts[i * properties.len()..(i + 1) * properties.len()];
        let mut row = vec![measure.name()];
        row.extend(row_verdicts.iter().map(|v| mark(v.holds())));
        grid.rows.push(row);
        for v in row_verdicts {
            if let Some(w) = &v.witness {
                witnesses
                    .rows
                    .push(vec![measure.name(), v.property.to_string(), witness_summary(w)]);
            }
        }
    }
    let spaces: BTreeMap<String, String> = properties
        .iter()
        .map(|&p| (p.to_string(), space_for(p, m, args.n_max, &bounds).to_string()))
        .collect();

    let mut report = Report::new("audit");
    report.settings = json!({
        "measures": ids(&measures),
        "classes": m,
        "properties": properties,
        "spaces": spaces,
    });
    report.data = json!({ "verdicts": verdicts });
    report.tables.push(grid);
    if !witnesses.rows.is_empty() {
        report.tables.push(witnesses);
    }
    report.notes.push(
        "✓ means no counterexample exists in the searched space; every ✗ carries a replayed witness.".to_string(),
    );
    Ok(report)
}

fn audit_averaging(properties: &[PropertyId], ctx: &Context) -> CliResult<Report> {
    let cells: Vec<(AveragingScheme, PropertyId)> = AveragingScheme::ALL
        .iter()
        .flat_map(|&s| properties.iter().map(move |&p| (s, p)))
        .collect();
    let verdicts = cells
        .par_iter()
        .map(|&(s, p)| check_averaging_preservation(s, p, &ctx.budget))
        .collect::<Result<Vec<_>, _>>()?;
    for v in &verdicts {
        if let Some(ce) = &v.counterexample {
            let measure: Measure = ce.measure.parse()?;
            replayed(ce, &measure)?;
        }
    }

    let mut columns = vec!["averaging".to_string()];
    columns.extend(properties.iter().map(|p| p.to_string()));
    let mut grid = Table::new("Preserved properties", columns);
    let mut witnesses = Table::new(
        "Counterexamples",
        ["averaging", "property", "measure", "witness"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for (k, scheme) in AveragingScheme::ALL.iter().enumerate() {
        let row_verdicts = &verdicts[k * properties.len()..(k + 1) * properties.len()];
        let mut row = vec![scheme.to_string()];
        row.extend(row_verdicts.iter().map(|v| mark(v.preserved)));
        grid.rows.push(row);
        for v in row_verdicts {
            if let Some(ce) = &v.counterexample {
                let w = ce.witness.as_ref().map(witness_summary).unwrap_or_default();
                witnesses
                    .rows
                    .push(vec![scheme.to_string(), v.property.to_string(), ce.measure.clone(), w]);
            }
        }
    }

    let mut report = Report::new("audit");
    report.settings = json!({ "averaging": true, "properties": properties });
    report.data = json!({ "preservation": verdicts });
    report.tables.push(grid);
    if !witnesses.rows.is_empty() {
        report.tables.push(witnesses);
    }
    Ok(report)
}

fn parse_range(text: &str) -> CliResult<(usize, usize)> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::input(format!("{text:?} is not N or LO:HI")))
    };
    let (lo, hi) = match text.split_once(':') {
        Some((a, b)) => (num(a)?, num(b)?),
        None => {
            let n = num(text)?;
            (n, n)
        }
    };
    if lo < 2 || hi < lo {
        return Err(CliError::input(format!("range {text:?} must satisfy 2 <= LO <= HI")));
    }
    Ok((lo, hi))
}

fn group_label(r: &DistinguishReport) -> String {
    if r.groups.is_empty() {
        return "-".to_string();
    }
    r.groups
        .iter()
        .map(|g| format!("{{{}}}", g.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn distinguish(args: &DistinguishArgs, ctx: &Context) -> CliResult<Report> {
    let (lo, hi) = parse_range(&args.n)?;
    let measures = measures_or(args.measures.as_deref(), Measure::distinguish_measures)?;
    let mut reports = Vec::new();
    let mut methods = Vec::new();
    for n in lo..=hi {
        let literal = args.full || n <= LITERAL_N_MAX;
        let r = if literal {
            literal_indistinguishable_groups(n, &measures, &ctx.budget)?
        } else {
            indistinguishable_groups(n, &measures, &ctx.budget)?
        };
        methods.push(if literal { "literal" } else { "reduced" });
        reports.push(r);
    }

    // consecutive n with the same groups share a row
    let mut table = Table::new(
        "Indistinguishable measures",
        vec!["n".to_string(), "groups".to_string()],
    );
    let mut start = 0;
    for i in 0..reports.len() {
        let last = i + 1 == reports.len() || reports[i + 1].groups != reports[i].groups;
        if last {
            let (a, b) = (reports[start].n, reports[i].n);
            let n = if a == b { a.to_string() } else { format!("{a}-{b}") };
            table.rows.push(vec![n, group_label(&reports[i])]);
            start = i + 1;
        }
    }

    let data: Vec<serde_json::Value> = reports
        .iter()
        .zip(&methods)
        .map(|(r, m)| json!({ "method": m, "report": r }))
        .collect();
    let mut report = Report::new("distinguish");
    report.settings = json!({
        "measures": ids(&measures),
        "n": [lo, hi],
        "full": args.full,
    });
    report.data = json!({ "results": data });
    report.tables.push(table);
    Ok(report)
}

/// Split `name=path`; a bare path is named after its file stem.
fn model_spec(text: &str) -> (String, &Path) {
    if let Some((name, path)) = text.split_once('=') {
        if !name.is_empty() && !name.contains(['/', '\\']) {
            return (name.to_string(), Path::new(path));
        }
    }
    let path = Path::new(text);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| text.to_string());
    (name, path)
}

enum Models {
    Labels {
        truth: measure_audit::Labeling,
        preds: Vec<(String, measure_audit::Labeling)>,
    },
    Matrices(Vec<(String, ConfusionMatrix)>),
}

fn load_models(args: &ModelArgs) -> CliResult<(Models, Vec<InputSummary>)> {
    let specs: Vec<(String, &Path)> = args.models.iter().map(|s| model_spec(s)).collect();
    for (i, (name, _)) in specs.iter().enumerate() {
        if specs[..i].iter().any(|(n, _)| n == name) {
            return Err(CliError::input(format!("model name {name:?} is used twice")));
        }
    }
    let formats = specs
        .iter()
        .map(|(_, p)| infer_format(p, args.source.input_format, InputFormat::LabelsCsv))
        .collect::<CliResult<Vec<_>>>()?;
    if formats.iter().all(|&f| f == InputFormat::LabelsCsv) {
        let (alpha, raws, summaries) = parse_label_files(&specs, args.source.alphabet.as_deref())?;
        for (raw, (name, _)) in raws.iter().zip(&specs).skip(1) {
            if raw.truth != raws[0].truth {
                return Err(CliError::input(format!(
                    "true labels of model {name:?} differ from those of {:?}",
                    specs[0].0
                )));
            }
        }
        let truth = alpha.labeling(&raws[0].truth)?;
        let preds = raws
            .iter()
            .zip(&specs)
            .map(|(r, (name, _))| Ok((name.clone(), alpha.labeling(&r.pred)?)))
            .collect::<CliResult<Vec<_>>>()?;
        return Ok((Models::Labels { truth, preds }, summaries));
    }
    if formats.contains(&InputFormat::LabelsCsv) {
        return Err(CliError::input("models must be all label files or all matrices"));
    }
    let mut mats = Vec::new();
    let mut summaries = Vec::new();
    for ((name, path), f) in specs.iter().zip(formats) {
        let (parsed, mut summary) = parse_inputs(path, f, None)?;
        summary.name = name.clone();
        mats.push((name.clone(), parsed.matrix()?));
        summaries.push(summary);
    }
    if mats.iter().any(|(_, c)| c.m() != mats[0].1.m()) {
        return Err(CliError::input("matrices have different numbers of classes"));
    }
    Ok((Models::Matrices(mats), summaries))
}

fn compare(args: &ModelArgs, ctx: &Context) -> CliResult<Report> {
    if args.models.len() < 2 {
        return Err(CliError::input("compare needs at least two models"));
    }
    let (models, summaries) = load_models(args)?;
    let (comparisons, m) = match &models {
        Models::Labels { truth, preds } => (model_pairs(truth, preds)?, truth.classes()),
        Models::Matrices(mats) => {
            let mut out = Vec::new();
            for i in 0..mats.len() {
                for j in i + 1..mats.len() {
                    out.push((mats[i].1.clone(), mats[j].1.clone()));
                }
            }
            (out, mats[0].1.m())
        }
    };
    let default = || {
        if m == 2 {
            Measure::distinguish_measures()
        } else {
            applicable(m)
        }
    };
    let measures = measures_or(args.measures.as_deref(), default)?;
    let rep = pairwise_inconsistency_with(&measures, &comparisons, ctx.epsilon)?;

    let names: Vec<String> = measures.iter().map(Measure::name).collect();
    let mut columns = vec![String::new()];
    columns.extend(names.iter().cloned());
    let mut table = Table::new("Inconsistency (%)", columns);
    for a in &names {
        let mut row = vec![a.clone()];
        for b in &names {
            row.push(if a == b {
                "-".to_string()
            } else {
                rep.rate(a, b).map(|p| p.percent_label()).unwrap_or_default()
            });
        }
        table.rows.push(row);
    }

    let mut report = Report::new("compare");
    report.settings =
        json!({ "measures": ids(&measures), "models": summaries.iter().map(|s| &s.name).collect::<Vec<_>>() });
    report.inputs = summaries;
    report.notes.push(format!(
        "{} comparisons over unordered model pairs; percentages give the share on which two measures disagree.",
        rep.comparisons
    ));
    if rep.epsilon_sensitive > 0 {
        report.notes.push(format!(
            "{} comparisons change verdict when the tolerance moves by a factor of ten.",
            rep.epsilon_sensitive
        ));
    }
    report.data = json!({ "inconsistency": rep });
    report.tables.push(table);
    Ok(report)
}

fn rank(args: &ModelArgs, ctx: &Context) -> CliResult<Report> {
    let (models, summaries) = load_models(args)?;
    let Models::Labels { truth, preds } = models else {
        return Err(CliError::input("rank needs label files with a shared true column"));
    };
    let measures = measures_or(args.measures.as_deref(), || applicable(truth.classes()))?;
    let table_data = rank_models_with(&measures, &truth, &preds, ctx.epsilon)?;

    let mut columns = vec!["model".to_string()];
    columns.extend(measures.iter().map(Measure::name));
    let mut table = Table::new("Ranks", columns);
    for (k, model) in table_data.models.iter().enumerate() {
        let mut row = vec![model.clone()];
        for col in &table_data.columns {
            row.push(format!("{} ({:.4})", col.ranks[k], col.values[k].to_f64()));
        }
        table.rows.push(row);
    }

    let mut report = Report::new("rank");
    report.settings = json!({ "measures": ids(&measures) });
    report.inputs = summaries;
    report.data = json!({ "ranking": table_data });
    report.tables.push(table);
    report
        .notes
        .push("Each cell is the rank (1 is best, ties share the better rank) followed by the value.".to_string());
    Ok(report)
}

fn baseline(args: &BaselineArgs, ctx: &Context) -> CliResult<Report> {
    if args.a.len() != args.b.len() || args.a.len() < 2 {
        return Err(CliError::input(
            "--a and --b need the same number (at least 2) of class sizes",
        ));
    }
    if args.a.iter().sum::<u64>() != args.b.iter().sum::<u64>() {
        return Err(CliError::input("--a and --b must sum to the same number of elements"));
    }
    let m = args.a.len();
    let measures = measures_or(args.measures.as_deref(), || applicable(m))?;
    let mut table = Table::new(
        "Expected value under random predictions",
        ["measure", "expected", "exact", "class", "at expected matrix"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    let mut values = Vec::new();
    for measure in &measures {
        let e = exact_baseline_expectation(measure, &args.a, &args.b, &ctx.budget)?;
        let at = approximate_baseline_value(measure, &args.a, &args.b)?;
        table.rows.push(vec![
            measure.name(),
            approx(&e),
            exact_label(&e),
            kind_label(&e).to_string(),
            approx(&at),
        ]);
        values.push(json!({ "measure": measure.descriptor(), "expected": e, "at_expected_matrix": at }));
    }
    let mut report = Report::new("baseline");
    report.settings = json!({ "measures": ids(&measures), "a": args.a, "b": args.b });
    report.data = json!({ "values": values });
    report.tables.push(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2:8").unwrap(), (2, 8));
        assert_eq!(parse_range("5").unwrap(), (5, 5));
        assert!(parse_range("1:3").is_err());
        assert!(parse_range("6:4").is_err());
    }

    #[test]
    fn bounds_override_n_max() {
        let bounds: BTreeMap<_, _> = [parse_bound("dist=4").unwrap()].into_iter().collect();
        assert_eq!(space_for(PropertyId::Dist, 2, Some(8), &bounds).n_max, 4);
        assert_eq!(space_for(PropertyId::Mon, 2, Some(5), &bounds).n_max, 5);
        assert_eq!(space_for(PropertyId::Dist, 2, Some(8), &BTreeMap::new()).n_max, 6);
        assert!(parse_bound("Mon=0").is_err());
    }

    #[test]
    fn model_names() {
        assert_eq!(model_spec("a=x/y.csv").0, "a");
        assert_eq!(model_spec("runs/m1.csv").0, "m1");
        assert_eq!(model_spec("dir=x/m.csv").1, Path::new("x/m.csv"));
    }
}
