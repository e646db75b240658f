//! Machine-readable run reports. JSON is the only machine format; the
//! human rendering is a thin view over the same data. Reports are
//! deterministic apart from the timing field.

use crate::endo::{
    is_generalized_isometry, is_isometry, make_pi, make_rho, make_tau, order2_pair, order4_pair,
    order4_quotient_condition, EndoMap,
};
use crate::families::{build_family, compare_predictions, FamilySpec, FamilySpecJson, SchemeTarget};
use crate::forms::FormSpec;
use crate::gf4::GF4;
use crate::group_table::TwistedTable;
use crate::pds::{classify_ls_nls, expected_params, verify_pds, LevelClass, PdsOutcome};
use crate::regular::{check_gkt, RegularGroup};
use crate::schemes::{build_scheme, intersection_numbers, is_amorphic, SchemeCheck, SchemeVariant};
use crate::twisted::{GroupContext, Subgroup};
use crate::{Error, IndexSet, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::time::Instant;

pub const SCHEMA: &str = "pdslab-report/1";

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    pub inputs: Value,
    pub verdicts: BTreeMap<String, bool>,
    pub data: Value,
    pub timing_secs: f64,
}

impl RunReport {
    fn new(command: &str, inputs: Value) -> RunReport {
        RunReport {
            schema: SCHEMA,
            command: command.to_string(),
            inputs,
            verdicts: BTreeMap::new(),
            data: Value::Null,
            timing_secs: 0.0,
        }
    }

    fn verdict(&mut self, name: &str, value: bool) {
        self.verdicts.insert(name.to_string(), value);
    }

    /// Every recorded check passed.
    pub fn ok(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per verdict plus a headline; the thin human view.
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} [{}]\n",
            self.command,
            if self.ok() { "OK" } else { "FAIL" }
        ));
        for (name, v) in &self.verdicts {
            out.push_str(&format!(
                "  check {name}: {}\n",
                if *v { "pass" } else { "FAIL" }
            ));
        }
        out
    }
}

fn pds_failure_json(f: &crate::pds::PdsFailure) -> Value {
    match f {
        crate::pds::PdsFailure::ContainsIdentity => json!({"kind": "contains_identity"}),
        crate::pds::PdsFailure::NotInverseClosed { witness } => {
            json!({"kind": "not_inverse_closed", "witness": witness})
        }
        crate::pds::PdsFailure::NotConstant {
            violating_g,
            count,
            expected,
            side,
        } => json!({
            "violating_g": violating_g,
            "count": count,
            "expected": expected,
            "side": match side { crate::pds::Side::InD => "in_D", crate::pds::Side::OutD => "out_D" },
        }),
    }
}

pub struct VerifyPdsArgs {
    pub n: usize,
    pub e: String,
    pub a: String,
    pub level: String,
    pub threads: usize,
}

pub fn run_verify_pds(args: &VerifyPdsArgs) -> Result<RunReport> {
    let start = Instant::now();
    let ctx = GroupContext::parse(&args.e)?;
    let form = FormSpec::parse(&args.a)?;
    if ctx.block_count() != args.n || form.block_count() != args.n {
        return Err(Error::DimensionMismatch {
            expected: args.n,
            got: ctx.block_count().max(form.block_count()),
        });
    }
    let level = if args.level.chars().count() == 1 {
        GF4::from_char(args.level.chars().next().unwrap())?
    } else {
        return Err(Error::InvalidLiteral(args.level.clone()));
    };
    let mut report = RunReport::new(
        "verify-pds",
        json!({"n": args.n, "e": args.e, "a": args.a, "level": args.level}),
    );
    let d = form.level_set(&ctx, level)?;
    let table = TwistedTable(&ctx);
    let outcome = verify_pds(&table, &d, args.threads)?;
    let expected = expected_params(
        args.n as u32,
        form.sign(),
        if level.is_zero() {
            LevelClass::Zero
        } else {
            LevelClass::Nonzero
        },
    );
    let (verified, params, degenerate, failure) = match &outcome {
        PdsOutcome::Verified(v) => (true, Some(v.params), v.degenerate, Value::Null),
        PdsOutcome::Failed(f) => (false, None, false, pds_failure_json(f)),
    };
    let matches = params.map(|p| p == expected).unwrap_or(false);
    report.verdict("pds_verified", verified);
    report.verdict("params_match_expected", matches);
    report.data = json!({
        "set_size": d.count(),
        "params": params,
        "expected": expected,
        "classification": params.map(|p| classify_ls_nls(&p).to_string()),
        "degenerate": degenerate,
        "sign": form.sign(),
        "failure": failure,
    });
    report.timing_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

pub struct SchemeArgs {
    pub n: usize,
    pub e: String,
    pub a: String,
    pub variant: u32,
    pub amorphic: bool,
    pub threads: usize,
}

pub fn run_scheme(args: &SchemeArgs) -> Result<RunReport> {
    let start = Instant::now();
    let ctx = GroupContext::parse(&args.e)?;
    let form = FormSpec::parse(&args.a)?;
    if ctx.block_count() != args.n || form.block_count() != args.n {
        return Err(Error::DimensionMismatch {
            expected: args.n,
            got: ctx.block_count().max(form.block_count()),
        });
    }
    let variant = SchemeVariant::parse(args.variant)?;
    let mut report = RunReport::new(
        "scheme",
        json!({"n": args.n, "e": args.e, "a": args.a, "variant": args.variant, "amorphic": args.amorphic}),
    );
    let partition = build_scheme(&ctx, &form, variant)?;
    let table = TwistedTable(&ctx);
    let check = intersection_numbers(&table, &partition)?;
    let (is_scheme, witness) = match &check {
        SchemeCheck::Scheme(_) => (true, Value::Null),
        SchemeCheck::NotScheme(w) => (false, serde_json::to_value(w).expect("witness")),
    };
    report.verdict("scheme", is_scheme);
    let mut data = json!({
        "class_sizes": partition.class_sizes(),
        "sign": form.sign(),
        "witness": witness,
    });
    if args.amorphic && is_scheme {
        let amorphic = is_amorphic(&table, &partition)?;
        report.verdict("amorphic", amorphic.amorphic);
        report.verdict("types_uniform", amorphic.uniform_type.is_some());
        report.verdict("fusion_sums_consistent", amorphic.fusion_sums_consistent);
        data["certificate"] = json!({
            "fusions": amorphic.fusions,
            "class_types": amorphic.class_types,
        });
        data["uniform_type"] = json!(amorphic.uniform_type);
    } else if args.amorphic {
        report.verdict("amorphic", false);
    }
    report.data = data;
    report.timing_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

pub enum RegularMode {
    Family(FamilySpec),
    Custom {
        e: String,
        a: String,
        custom: Value,
    },
    Search {
        e: String,
        a: String,
        descriptor: Value,
    },
}

pub struct RegularArgs {
    pub mode: RegularMode,
    pub pullback: bool,
    pub threads: usize,
}

fn endo_from_descriptor(ctx: &GroupContext, descriptor: &Value) -> Result<EndoMap> {
    let kind = descriptor
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidLiteral(descriptor.to_string()))?;
    match kind {
        "tau" => {
            let v = descriptor
                .get("v")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::InvalidLiteral(descriptor.to_string()))?;
            make_tau(ctx, &GF4::parse_vec(v)?)
        }
        "rho" => {
            let a = descriptor
                .get("a")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::InvalidLiteral(descriptor.to_string()))?;
            make_rho(ctx, &GF4::parse_vec(a)?)
        }
        "pi" => {
            let v = descriptor
                .get("v")
                .and_then(Value::as_str)
                .unwrap_or("");
            make_pi(ctx, &GF4::parse_vec(v)?)
        }
        other => Err(Error::InvalidLiteral(format!("descriptor kind {other:?}"))),
    }
}

/// Shared verification pipeline once a group exists: regularity over the
/// designated classes, direct invariants, closed-form checks, optional
/// pullback of every designated class.
fn regular_pipeline(
    report: &mut RunReport,
    group: &RegularGroup,
    form: &FormSpec,
    classes: &[IndexSet],
    pullback: bool,
    threads: usize,
) -> Result<Value> {
    let action = group.verify_regular_action(classes, 0xC0FFEE);
    report.verdict(
        "regular_action",
        action.regular(group.context().order()) && action.classes_preserved,
    );
    let inv = group.invariants();
    let inv_report = group.check_closed_form_predictions(&inv);
    report.verdict("eq_derived_chain_match", inv_report.eq2_match);
    report.verdict("eq_center_match", inv_report.eq3_match);
    report.verdict("eq_frattini_match", inv_report.eq4_match);
    report.verdict("eq_frattini_variants_agree", inv_report.eq4_variants_agree);
    let mut pullback_data = Value::Null;
    if pullback {
        let mut rows = Vec::new();
        let mut all = true;
        let table = TwistedTable(group.context());
        for (ci, class) in classes.iter().enumerate() {
            let base = match verify_pds(&table, class, threads)? {
                PdsOutcome::Verified(v) => v.params,
                PdsOutcome::Failed(_) => {
                    all = false;
                    continue;
                }
            };
            let lifted = group.pds_pullback(class);
            let pulled = match verify_pds(group, &lifted, threads)? {
                PdsOutcome::Verified(v) => Some(v.params),
                PdsOutcome::Failed(_) => None,
            };
            let matches = pulled == Some(base);
            all &= matches;
            rows.push(json!({
                "class": ci + 1,
                "abelian": base,
                "pulled_back": pulled,
                "match": matches,
            }));
        }
        report.verdict("pullback_params_match", all);
        pullback_data = Value::Array(rows);
    }
    let _ = form;
    Ok(json!({
        "action": action,
        "invariants": inv_report,
        "non_abelian": inv.derived.order() > 1,
        "pullback": pullback_data,
    }))
}

pub fn run_regular(args: &RegularArgs) -> Result<RunReport> {
    let start = Instant::now();
    match &args.mode {
        RegularMode::Family(spec) => {
            let spec_json = spec.to_json();
            let mut report = RunReport::new(
                "regular",
                serde_json::to_value(&spec_json).expect("family spec serializes"),
            );
            let instance = build_family(spec)?;
            report.verdict("conditions_ok", true);
            let classes = instance.designated_classes()?;
            let inv = instance.group.invariants();
            let (rows, predictions_match) = compare_predictions(&instance.predicted, &inv);
            report.verdict("predictions_match", predictions_match);
            let mut data = regular_pipeline(
                &mut report,
                &instance.group,
                &instance.form,
                &classes,
                args.pullback,
                args.threads,
            )?;
            data["predicted"] = serde_json::to_value(&instance.predicted).expect("predictions");
            data["comparisons"] = serde_json::to_value(&rows).expect("rows");
            data["target"] = json!(format!("{:?}", instance.target));
            report.data = data;
            report.timing_secs = start.elapsed().as_secs_f64();
            Ok(report)
        }
        RegularMode::Custom { e, a, custom } => {
            let ctx = GroupContext::parse(e)?;
            let form = FormSpec::parse(a)?;
            let mut report = RunReport::new(
                "regular",
                json!({"mode": "custom", "e": e, "a": a, "custom": custom}),
            );
            let tau = endo_from_descriptor(
                &ctx,
                custom
                    .get("tau")
                    .ok_or_else(|| Error::InvalidLiteral("custom needs a tau".into()))?,
            )?;
            let k_gens = custom
                .get("K_gens")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidLiteral("custom needs K_gens".into()))?
                .iter()
                .map(|v| {
                    v.as_str()
                        .ok_or_else(|| Error::InvalidLiteral(v.to_string()))
                        .and_then(|s| ctx.parse_element(s))
                })
                .collect::<Result<Vec<_>>>()?;
            let h = custom
                .get("h")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::InvalidLiteral("custom needs h".into()))?;
            let h = ctx.parse_element(h)?;
            let k = Subgroup::closure(ctx.clone(), &k_gens);
            let gkt = check_gkt(&form, &k, &tau, h)?;
            report.verdict("conditions_ok", gkt.ok);
            let mut data = json!({
                "gkt": gkt,
            });
            if gkt.ok {
                let group = RegularGroup::build(&form, &k, &tau, h)?;
                let classes = classes_for_map(&ctx, &form, &tau)?;
                let pipeline = regular_pipeline(
                    &mut report,
                    &group,
                    &form,
                    &classes,
                    args.pullback,
                    args.threads,
                )?;
                data["pipeline"] = pipeline;
            }
            report.data = data;
            report.timing_secs = start.elapsed().as_secs_f64();
            Ok(report)
        }
        RegularMode::Search { e, a, descriptor } => {
            let ctx = GroupContext::parse(e)?;
            let form = FormSpec::parse(a)?;
            let mut report = RunReport::new(
                "regular",
                json!({"mode": "search", "e": e, "a": a, "tau": descriptor}),
            );
            let tau = endo_from_descriptor(&ctx, descriptor)?;
            let order = tau.order()?;
            let mut data = json!({"tau_order": order});
            let pair = match order {
                2 => Some(order2_pair(&tau)?),
                4 => {
                    let quotient_route = order4_quotient_condition(&tau)?;
                    data["quotient_condition_found"] = json!(quotient_route.is_some());
                    order4_pair(&tau)?
                }
                _ => {
                    return Err(Error::WrongOrder {
                        expected: 2,
                        got: order as u32,
                    })
                }
            };
            match pair {
                None => {
                    report.verdict("pair_found", false);
                    report.data = data;
                }
                Some((k, h)) => {
                    report.verdict("pair_found", true);
                    let gkt = check_gkt(&form, &k, &tau, h)?;
                    report.verdict("conditions_ok", gkt.ok);
                    data["k_order"] = json!(k.size());
                    data["h"] = json!(ctx.format_element(h));
                    data["gkt"] = serde_json::to_value(&gkt).expect("gkt");
                    if gkt.ok {
                        let group = RegularGroup::build(&form, &k, &tau, h)?;
                        let classes = classes_for_map(&ctx, &form, &tau)?;
                        let pipeline = regular_pipeline(
                            &mut report,
                            &group,
                            &form,
                            &classes,
                            args.pullback,
                            args.threads,
                        )?;
                        data["pipeline"] = pipeline;
                    }
                    report.data = data;
                }
            }
            report.timing_secs = start.elapsed().as_secs_f64();
            Ok(report)
        }
    }
}

/// Isometries must preserve all four level classes, generalized
/// isometries the merged three.
fn classes_for_map(ctx: &GroupContext, form: &FormSpec, tau: &EndoMap) -> Result<Vec<IndexSet>> {
    let target = if is_isometry(tau, form)? {
        SchemeTarget::S4
    } else if is_generalized_isometry(tau, form)? {
        SchemeTarget::S3
    } else {
        return Err(Error::BuildRejected(
            "map is not a generalized isometry of the form".into(),
        ));
    };
    target.classes(ctx, form)
}

/// Exit code policy: 2 for malformed inputs, 1 for verification-level
/// failures surfaced as errors.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::DimensionMismatch { .. }
        | Error::IndexOutOfRange { .. }
        | Error::InvalidLiteral(_)
        | Error::BadBlockCount(_)
        | Error::EmptySchemeClass { .. }
        | Error::ShapeMismatch(_)
        | Error::WrongOrder { .. }
        | Error::FamilySpec(_) => 2,
        Error::NotASubgroup { .. }
        | Error::NotHomomorphism { .. }
        | Error::NotAutomorphism
        | Error::InvalidScheme(_)
        | Error::BuildRejected(_)
        | Error::SearchDiscrepancy(_)
        | Error::BadGroupTable(_) => 1,
    }
}

/// Thread-count resolution: explicit flag, then PDSLAB_THREADS, then 1.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("PDSLAB_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(1)
    .max(1)
}

// re-exported for the CLI's family flag parsing
pub use crate::families::FamilySpecJson as FamilyJson;

pub fn family_spec_from_json_str(s: &str) -> Result<FamilySpec> {
    let j: FamilySpecJson =
        serde_json::from_str(s).map_err(|e| Error::InvalidLiteral(format!("{s}: {e}")))?;
    FamilySpec::from_json(&j)
}
