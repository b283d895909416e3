use std::path::Path;

use num_traits::ToPrimitive;
use refinable::bounds::{
    all_bounds, ball_bound, best_bound, enclosing_integer_box, general_ball_bound,
};
use refinable::cascade::{
    cascade_run, discrete_mass, empirical_support, lattice_cell, CascadeConfig, DEFAULT_LEVEL_CAP,
};
use refinable::linalg::{
    contraction_power, eigenvalues, inverse, is_dilation, operator_norm, operator_norm_rational,
    real_jordan_structure, CONTRACTION_SEARCH_CAP, MAX_DIMENSION,
};
use refinable::mask::{coset_sum_report, ProblemDocument};
use refinable::pointwise::{
    candidate_points, export_values, import_values, left_closed_values, periodization_check,
    refine_values, solve_integer_values, EigenOptions,
};
use refinable::samples::{format_float, write_samples, SampleRow};
use refinable::{
    IntBox, IntMatrix, Problem, ProblemError, Provenance, Region, SupportBound, ValueTable,
};

use crate::report::{Cell, Report, Section};
use crate::{
    load_problem, read_source, stem, CascadeArgs, CheckArgs, CliError, Output, RefineArgs,
    ValuesArgs,
};

fn index_columns(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

fn int_cells(k: &[i64]) -> Vec<Cell> {
    k.iter().map(|&v| Cell::Int(v)).collect()
}

fn polynomial_text(coeffs: &[num_bigint::BigInt]) -> String {
    let mut terms = Vec::new();
    for (power, c) in coeffs.iter().enumerate().rev() {
        if c == &0.into() {
            continue;
        }
        let x = match power {
            0 => String::new(),
            1 => "x".into(),
            p => format!("x^{p}"),
        };
        let mag = c.magnitude().to_string();
        let body = if power > 0 && mag == "1" {
            x
        } else {
            format!("{mag}{x}")
        };
        let negative = c < &0.into();
        terms.push(match (terms.is_empty(), negative) {
            (true, false) => body,
            (true, true) => format!("-{body}"),
            (false, false) => format!("+ {body}"),
            (false, true) => format!("- {body}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" ")
    }
}

/// Matrix analysis does not need a valid mask, so a document whose matrix is
/// square is analysed even when full validation fails; that failure is
/// reported after the analysis.
pub fn analyze(path: &Path) -> Result<Output, CliError> {
    let source = read_source(path)?;
    let validation = refinable::parse_problem(&source).err();
    let doc: ProblemDocument = match serde_json::from_str(&source) {
        Ok(doc) => doc,
        Err(_) => return Err(validation.expect("document failed to deserialize").into()),
    };
    let blocking = matches!(
        validation,
        Some(
            ProblemError::Parse(_)
                | ProblemError::DimensionTooLarge { .. }
                | ProblemError::DimensionMismatch { .. }
        )
    );
    if blocking || doc.matrix.len() > MAX_DIMENSION {
        return Err(validation.expect("validation failed").into());
    }
    let m = IntMatrix::new(doc.matrix).map_err(ProblemError::from)?;
    let mut report = analyze_matrix(&m)?;
    let verdict = is_dilation(&m);
    let mut summary = Section::fields("verdict")
        .field("dilation", verdict.is_dilation)
        .field(
            "verdict",
            if verdict.is_dilation {
                "dilation"
            } else {
                "not a dilation"
            },
        );
    if let Some(reason) = &verdict.reason {
        summary.push_field("reason", reason.as_str());
    }
    report.push(summary);
    let mut out = Output::new(report);
    out.deferred = validation.map(CliError::from);
    Ok(out)
}

fn analyze_matrix(m: &IntMatrix) -> Result<Report, CliError> {
    let mut report = Report::new("analyze");
    let spectrum = eigenvalues(m).map_err(ProblemError::from)?;
    let det = refinable::linalg::determinant(m);
    let det_cell = det
        .to_i64()
        .map(Cell::Int)
        .unwrap_or_else(|| Cell::Text(det.to_string()));
    let mut summary = Section::fields("matrix")
        .field("dimension", m.dim())
        .field(
            "rows",
            m.rows()
                .iter()
                .map(|r| format!("{r:?}"))
                .collect::<Vec<_>>()
                .join(" "),
        )
        .field("determinant", det_cell)
        .field("m", det.magnitude().to_string())
        .field(
            "characteristic polynomial",
            polynomial_text(&spectrum.characteristic),
        )
        .field("‖M‖", operator_norm(&m.to_f64()));
    match inverse(m) {
        Ok(inv) => {
            let n = operator_norm_rational(&inv);
            summary.push_field("‖M⁻¹‖", n);
            summary.push_field("‖M⁻¹‖²", n * n);
            let k = match contraction_power(m).map_err(ProblemError::from)? {
                Some((k, _)) => Cell::Int(k.into()),
                None => Cell::Text(format!("none up to {CONTRACTION_SEARCH_CAP}")),
            };
            summary.push_field("smallest k with ‖M⁻ᵏ‖ < 1", k);
        }
        Err(_) => summary.push_field("‖M⁻¹‖", "undefined (singular)"),
    }
    report.push(summary);

    let mut eig = Section::rows("eigenvalues", &["re", "im", "modulus", "multiplicity"]);
    for e in &spectrum.distinct {
        eig.push_row(vec![
            e.value.re.into(),
            e.value.im.into(),
            e.value.norm().into(),
            e.multiplicity.into(),
        ]);
    }
    report.push(eig);

    if spectrum.all_real {
        match real_jordan_structure(m) {
            Ok(j) => {
                let mut blocks = Section::rows("jordan blocks", &["eigenvalue", "size"]);
                for b in &j.blocks {
                    blocks.push_row(vec![b.eigenvalue.into(), b.size.into()]);
                }
                report.push(blocks);
                let mut t = Section::rows("jordan transform", &index_columns("c", m.dim()));
                for row in j.transform.row_iter() {
                    t.push_row(row.iter().map(|&v| Cell::Float(v)).collect());
                }
                report.push(t);
                report.push(Section::fields("jordan").field("condition number", j.condition));
            }
            Err(e) => report.push(Section::fields("jordan").field("unavailable", e.to_string())),
        }
    } else {
        report.push(Section::fields("jordan").field("unavailable", "spectrum is not real"));
    }
    Ok(report)
}

fn bound_statement(b: &SupportBound) -> String {
    let var = |i: usize, name: &str| {
        if b.dim == 1 {
            format!("|{name}|")
        } else {
            format!("|{name}{}|", i + 1)
        }
    };
    match &b.region {
        Region::Ball { radius } => format!("|x| <= {}", format_float(*radius)),
        Region::Box { half_widths } => half_widths
            .iter()
            .enumerate()
            .map(|(i, h)| format!("{} <= {}", var(i, "x"), format_float(*h)))
            .collect::<Vec<_>>()
            .join(", "),
        Region::TransformedBox { half_widths, .. } => {
            let ys: Vec<String> = half_widths
                .iter()
                .enumerate()
                .map(|(i, h)| format!("{} <= {}", var(i, "y"), format_float(*h)))
                .collect();
            format!("x = C·y with {}", ys.join(", "))
        }
    }
}

fn box_text(b: &IntBox) -> String {
    b.lo()
        .iter()
        .zip(b.hi())
        .map(|(l, h)| format!("[{l}, {h}]"))
        .collect::<Vec<_>>()
        .join(" x ")
}

pub fn bound(path: &Path) -> Result<Output, CliError> {
    let p = load_problem(path)?;
    let mut report = Report::new("bound");
    report.push(
        Section::fields("mask")
            .field("coefficients", p.mask().len())
            .field("Q", p.mask().radius()),
    );
    let mut statements = Section::fields("bounds");
    let mut extents = Section::rows("extents", &["method", "outer radius", "integer box"]);
    let mut transform = None;
    for (name, result) in all_bounds(&p) {
        match result {
            Ok(b) => {
                let mut statement = bound_statement(&b);
                if name == "iterated-norm-ball" {
                    let power = match b.provenance {
                        Provenance::IteratedNormBall { power } => power,
                        _ => 1,
                    };
                    statement.push_str(&format!(" (k = {power})"));
                }
                statements.push_field(name, statement);
                extents.push_row(vec![
                    name.into(),
                    b.outer_radius().into(),
                    box_text(&enclosing_integer_box(&b)).into(),
                ]);
                if let Region::TransformedBox { transform: c, .. } = &b.region {
                    transform = Some(c.clone());
                }
            }
            Err(e) => statements.push_field(name, format!("not applicable: {e}")),
        }
    }
    report.push(statements);
    report.push(extents);
    if let Some(c) = transform {
        let mut t = Section::rows("parallelepiped transform C", &index_columns("c", p.dim()));
        for row in c.row_iter() {
            t.push_row(row.iter().map(|&v| Cell::Float(v)).collect());
        }
        report.push(t);
    }
    let best = best_bound(&p)?;
    let candidates = candidate_points(&p)?;
    report.push(
        Section::fields("selected")
            .field("method", best.provenance.to_string())
            .field("integer candidates", candidates.len()),
    );
    Ok(Output::new(report))
}

fn write_dump(dir: &Path, name: String, text: &str) -> Result<String, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(&name);
    std::fs::write(&path, text).map_err(|source| CliError::Write { path, source })?;
    Ok(name)
}

pub fn cascade(args: &CascadeArgs, parallel: bool) -> Result<Output, CliError> {
    let path = &args.input.problem;
    let p = load_problem(path)?;
    let d = p.dim();
    let config = CascadeConfig {
        initial: args.initial.into(),
        levels: args.iters,
        warmup: args.warmup,
        parallel,
        level_cap: DEFAULT_LEVEL_CAP,
    };
    let runs = cascade_run(&p, &config)?;
    let mut report = Report::new("cascade");
    report.push(
        Section::fields("cascade")
            .field("initial", config.initial.to_string())
            .field("levels", args.iters)
            .field("warmup", args.warmup)
            .field("eps", args.eps),
    );
    let mut table = Section::rows(
        "levels",
        &[
            "level",
            "points",
            "nonzero",
            "mass",
            "support lo",
            "support hi",
        ],
    );
    let mut dumps = Section::rows("dumps", &["level", "file"]);
    let name = stem(path);
    for f in &runs {
        let s = empirical_support(f, args.eps);
        let nonzero = f
            .grid
            .values()
            .iter()
            .filter(|v| v.abs() > args.eps)
            .count();
        let (lo, hi): (Cell, Cell) = match (s.lo(), s.hi()) {
            (Some(lo), Some(hi)) => (lo.to_vec().into(), hi.to_vec().into()),
            _ => ("empty".into(), "empty".into()),
        };
        table.push_row(vec![
            f.level.into(),
            f.domain_box().count().to_string().into(),
            nonzero.into(),
            discrete_mass(f).into(),
            lo,
            hi,
        ]);
        if let Some(dir) = &args.dump_dir {
            let file = write_dump(
                dir,
                format!("{name}.level{}.tsv", f.level),
                &write_samples(d, &f.rows()),
            )?;
            dumps.push_row(vec![f.level.into(), file.into()]);
        }
    }
    report.push(table);
    if args.dump_dir.is_some() {
        report.push(dumps);
    }

    let top = runs.last().expect("level 0 is always present");
    let bound = best_bound(&p)?;
    let h: Vec<f64> = enclosing_integer_box(&bound)
        .hi()
        .iter()
        .map(|&v| v as f64)
        .collect();
    let inside = empirical_support(top, args.eps)
        .within_symmetric(&h, &lattice_cell(&top.inverse_power().to_f64()));
    report.push(
        Section::fields("containment")
            .field("bound", bound.provenance.to_string())
            .field("integer box", box_text(&enclosing_integer_box(&bound)))
            .field("final support inside", inside),
    );
    Ok(Output::new(report))
}

fn non_unique_warning(dimension: usize) -> String {
    format!("warning: code=non-unique-eigenspace dimension={dimension}")
}

pub fn values(args: &ValuesArgs) -> Result<Output, CliError> {
    let p = load_problem(&args.input.problem)?;
    let d = p.dim();
    let options = EigenOptions::default();
    let (b, values) = solve_integer_values(&p, &options)?;
    let mut report = Report::new("values");
    let mut summary = Section::fields("transfer matrix")
        .field("bound", best_bound(&p)?.provenance.to_string())
        .field("candidate points", b.len())
        .field("eigenspace dimension", values.eigenspace_dimension())
        .field("residual", values.residual)
        .field("structural zeros", values.structural_zeros.len());
    let mut out_warnings = Vec::new();
    if let Some(w) = values.warning {
        summary.push_field(
            "warning",
            format!("non-unique eigenspace of dimension {}", w.dimension),
        );
        out_warnings.push(non_unique_warning(w.dimension));
    }
    report.push(summary);

    let mut columns = index_columns("k", d);
    match values.unique() {
        Some(v) => {
            columns.push("value".into());
            let mut t = Section::rows("values", &columns);
            for (k, x) in values.points.iter().zip(v) {
                let mut row = int_cells(k);
                row.push((*x).into());
                t.push_row(row);
            }
            report.push(t);
        }
        None => {
            columns.extend(index_columns("v", values.basis.len()));
            let mut t = Section::rows("eigenbasis", &columns);
            for (i, k) in values.points.iter().enumerate() {
                let mut row = int_cells(k);
                row.extend(values.basis.iter().map(|v| Cell::Float(v[i])));
                t.push_row(row);
            }
            report.push(t);
        }
    }
    if args.left_closed {
        let lc = left_closed_values(&p, &values, &options)?;
        let mut columns = index_columns("k", d);
        columns.push("value".into());
        let mut t = Section::rows("left-closed values", &columns);
        for (k, x) in values.points.iter().zip(&lc) {
            let mut row = int_cells(k);
            row.push((*x).into());
            t.push_row(row);
        }
        report.push(t);
    }
    let mut out = Output::new(report);
    out.warnings = out_warnings;
    Ok(out)
}

struct Seed {
    points: Vec<Vec<i64>>,
    values: Vec<f64>,
    label: &'static str,
}

fn seed_values(p: &Problem, left_closed: bool) -> Result<Seed, CliError> {
    let options = EigenOptions::default();
    let (b, values) = solve_integer_values(p, &options)?;
    if left_closed {
        return Ok(Seed {
            points: b.points().to_vec(),
            values: left_closed_values(p, &values, &options)?,
            label: "left-closed",
        });
    }
    match values.unique() {
        Some(v) => Ok(Seed {
            points: b.points().to_vec(),
            values: v.to_vec(),
            label: "eigenvector",
        }),
        None => Err(CliError::NonUniqueEigenspace {
            dimension: values.eigenspace_dimension(),
        }),
    }
}

fn value_rows_section(name: &str, dim: usize, rows: &[SampleRow]) -> Section {
    let mut columns = vec!["level".to_string()];
    columns.extend(index_columns("k", dim));
    columns.extend(index_columns("x", dim));
    columns.push("value".into());
    let mut t = Section::rows(name, &columns);
    for r in rows {
        let mut row = vec![Cell::from(r.level)];
        row.extend(int_cells(&r.index));
        row.extend(r.coords.iter().map(|&x| Cell::Float(x)));
        row.push(r.value.into());
        t.push_row(row);
    }
    t
}

pub fn refine(args: &RefineArgs, parallel: bool) -> Result<Output, CliError> {
    let path = &args.input.problem;
    let p = load_problem(path)?;
    let d = p.dim();
    let seed = seed_values(&p, args.left_closed)?;
    let table = refine_values(&p, &seed.points, &seed.values, args.levels, parallel)?;
    let rows = table.rows(p.matrix().inverse());
    let mut report = Report::new("refine");
    let mut summary = Section::fields("refinement")
        .field("levels", args.levels)
        .field("seed", seed.label)
        .field("normalized", table.normalized);
    for (j, level) in table.levels() {
        summary.push_field(&format!("level {j} values"), level.len());
    }
    report.push(summary);
    report.push(value_rows_section("values", d, &rows));
    if let Some(dir) = &args.dump_dir {
        let name = stem(path);
        let mut dumps = Section::rows("dumps", &["level", "file"]);
        for (j, _) in table.levels() {
            let level_rows: Vec<SampleRow> =
                rows.iter().filter(|r| r.level == j).cloned().collect();
            let file = write_dump(
                dir,
                format!("{name}.level{j}.tsv"),
                &write_samples(d, &level_rows),
            )?;
            dumps.push_row(vec![j.into(), file.into()]);
        }
        report.push(dumps);
    }
    Ok(Output::new(report))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Warn,
    Skip,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
            Status::Skip => "SKIP",
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

struct Suite {
    section: Section,
    failed: Vec<String>,
}

impl Suite {
    fn record(&mut self, name: &str, status: Status, detail: impl Into<String>) {
        if status == Status::Fail {
            self.failed.push(name.to_string());
        }
        self.section.push_row(vec![
            name.into(),
            status.label().into(),
            detail.into().into(),
        ]);
    }
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn check(args: &CheckArgs, parallel: bool) -> Result<Output, CliError> {
    let p = load_problem(&args.input.problem)?;
    let mut s = Suite {
        section: Section::rows("invariants", &["invariant", "status", "detail"]),
        failed: Vec::new(),
    };

    let sum = p.mask().exact_sum();
    let exact_one = sum == num_rational::BigRational::from_integer(1.into());
    let sum_f = sum.to_f64().unwrap_or(f64::NAN);
    if p.mask().all_fractions() {
        s.record(
            "mask-sum",
            Status::from_ok(exact_one),
            format!("exact sum {sum}"),
        );
    } else {
        let dev = (sum_f - 1.0).abs();
        s.record(
            "mask-sum",
            Status::from_ok(dev <= 1e-12),
            format!("|Σc − 1| = {}", sci(dev)),
        );
    }

    let cosets = coset_sum_report(&p);
    let worst = cosets
        .classes
        .iter()
        .map(|c| (c.sum - cosets.target).abs())
        .fold(0.0, f64::max);
    s.record(
        "coset-sums",
        if cosets.uniform {
            Status::Pass
        } else {
            Status::Warn
        },
        format!(
            "{} classes, max |sum − 1/m| = {}",
            cosets.classes.len(),
            sci(worst)
        ),
    );

    let verdict = is_dilation(p.matrix().matrix());
    s.record(
        "dilation",
        Status::from_ok(verdict.is_dilation),
        verdict.reason.unwrap_or_else(|| "all |λ| > 1".into()),
    );

    let bound = best_bound(&p)?;
    s.record(
        "bound-contains-origin",
        Status::from_ok(bound.contains(&vec![0.0; p.dim()])),
        bound.provenance.to_string(),
    );

    match ball_bound(&p) {
        Ok(ball) => {
            let general = general_ball_bound(&p)?;
            let gap = (ball.outer_radius() - general.outer_radius()).abs();
            s.record(
                "ball-consistency",
                Status::from_ok(gap <= 1e-12 * ball.outer_radius().max(1.0)),
                format!("gap {}", sci(gap)),
            );
        }
        Err(e) => s.record("ball-consistency", Status::Skip, e.to_string()),
    }

    let runs = cascade_run(
        &p,
        &CascadeConfig {
            levels: args.levels,
            parallel,
            ..Default::default()
        },
    )?;
    let base = discrete_mass(&runs[0]);
    let drift = runs
        .iter()
        .map(|f| (discrete_mass(f) - base).abs() / base.abs())
        .fold(0.0, f64::max);
    s.record(
        "cascade-mass",
        Status::from_ok(drift <= 1e-12),
        format!("max relative drift {}", sci(drift)),
    );

    let top = runs.last().expect("level 0 is always present");
    let h: Vec<f64> = enclosing_integer_box(&bound)
        .hi()
        .iter()
        .map(|&v| v as f64)
        .collect();
    let inside = empirical_support(top, args.eps)
        .within_symmetric(&h, &lattice_cell(&top.inverse_power().to_f64()));
    s.record(
        "cascade-containment",
        Status::from_ok(inside),
        format!(
            "level {} inside {}",
            top.level,
            box_text(&enclosing_integer_box(&bound))
        ),
    );

    let options = EigenOptions::default();
    match solve_integer_values(&p, &options) {
        Ok((_, values)) => s.record(
            "unit-eigenvector",
            Status::from_ok(values.residual <= options.unit_tolerance),
            format!(
                "dimension {}, residual {}",
                values.eigenspace_dimension(),
                sci(values.residual)
            ),
        ),
        Err(e) => s.record("unit-eigenvector", Status::Fail, e.to_string()),
    }

    match seed_values(&p, args.left_closed) {
        Ok(seed) => {
            let table = refine_values(&p, &seed.points, &seed.values, args.levels, parallel)?;
            refinement_checks(&mut s, &p, &table, args.levels, cosets.uniform, seed.label);
        }
        Err(e) => {
            for name in [
                "refinement-consistency",
                "partition-of-unity",
                "export-roundtrip",
            ] {
                s.record(name, Status::Skip, e.to_string());
            }
        }
    }

    let mut report = Report::new("check");
    let failed = s.failed;
    report.push(s.section);
    report.push(Section::fields("summary").field("failed", failed.len()));
    let mut out = Output::new(report);
    if !failed.is_empty() {
        out.deferred = Some(CliError::InvariantFailure(failed));
    }
    Ok(out)
}

fn refinement_checks(
    s: &mut Suite,
    p: &Problem,
    table: &ValueTable,
    levels: u32,
    uniform: bool,
    seed: &str,
) {
    let m = p.matrix().matrix();
    let mut consistency: f64 = 0.0;
    for j in 1..=levels {
        for (k, v) in table.level(j - 1).into_iter().flatten() {
            if let Some(w) = m.checked_mul_vec(k).and_then(|mk| table.get(j, &mk)) {
                consistency = consistency.max((w - v).abs());
            }
        }
    }
    s.record(
        "refinement-consistency",
        Status::from_ok(consistency <= 1e-12),
        format!(
            "{seed} seed, max |V_j(Mk) − V_(j−1)(k)| = {}",
            sci(consistency)
        ),
    );

    if !uniform {
        s.record(
            "partition-of-unity",
            Status::Skip,
            "coset sums are not uniform",
        );
    } else {
        let level = levels.min(2);
        let probes: Vec<Vec<i64>> = IntBox::symmetric(&vec![1; p.dim()]).points().collect();
        let worst = periodization_check(table, p.matrix(), level, &probes)
            .iter()
            .map(|d| d.deviation)
            .fold(0.0, f64::max);
        s.record(
            "partition-of-unity",
            Status::from_ok(worst <= 1e-8),
            format!(
                "level {level}, {} probes, max deviation {}",
                probes.len(),
                sci(worst)
            ),
        );
    }

    let text = export_values(table, p.matrix().inverse());
    let same = import_values(&text).is_ok_and(|back| {
        table.levels().all(|(j, level)| {
            level
                .iter()
                .all(|(k, v)| back.get(j, k).map(f64::to_bits) == Some(v.to_bits()))
        })
    });
    s.record(
        "export-roundtrip",
        Status::from_ok(same),
        format!("{} bytes", text.len()),
    );
}
