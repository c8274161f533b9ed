//! One function per subcommand: parse the payload, run the library,
//! assemble the output document. Documents are plain `serde_json` values;
//! objects serialize with sorted keys, so equal inputs give equal bytes.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::{json, Value};

use evpoly::colorings::{sumset_growth_sep, character_sumset_exp_poly, PipelineOutcome};
use evpoly::commuting::{iterated_image_sep, SepSearch};
use evpoly::fitting::{
    fit_exp_poly, fit_polynomial, fit_quasipolynomial, fit_sep, verify_exp_poly, verify_fit,
    Fitted, Quasipolynomial,
};
use evpoly::gf::{ExpPoly, Gf, GfTerm, SepDescription};
use evpoly::orthants::{gf_of_simple_set, simple_set_from_gf};
use evpoly::poly::{default_names, MultiPoly};
use evpoly::polytopes::{CountingFit, RationalPolytope};
use evpoly::semigroups::{n_fold_sumset, Elem, Semigroup};
use evpoly::{Cyclotomic, Error, Rational, Result};

use crate::doc::*;

/// A finished job: the output document, plus the inconclusive reason when
/// a pipeline gave up early (partial report, exit code 4).
pub struct JobOutcome {
    pub document: Value,
    pub inconclusive: Option<String>,
}

fn done(document: Value) -> Result<JobOutcome> {
    Ok(JobOutcome { document, inconclusive: None })
}

/// Refuses jobs whose scheduled enumeration exceeds the budget. Costs are
/// documented per command in the README; no budget means no check (the
/// library's own hard caps still apply).
fn charge(params: &Params, cost: u64, what: &str) -> Result<()> {
    if let Some(cap) = params.cap {
        if cost > cap {
            return Err(Error::ResourceCap(format!(
                "{what} schedules {cost} evaluations, over the budget of {cap}"
            )));
        }
    }
    Ok(())
}

fn pow_cost(base: u64, exp: usize) -> u64 {
    let mut acc = 1u64;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

fn bbox_cost(p: &RationalPolytope, n: u32) -> u64 {
    p.bbox_dims(n)
        .iter()
        .fold(1u64, |acc, &d| acc.saturating_mul(d as u64 + 1))
}

pub fn run(command: &str, payload: Value, params: &Params) -> Result<JobOutcome> {
    match command {
        "ehrhart" => ehrhart(payload, params),
        "colorcount" => colorcount(payload, params),
        "sumset" => sumset_job(payload, params),
        "sep" => sep_job(payload, params),
        "charsum" => charsum(payload, params),
        "gf" => gf_job(payload, params),
        "orthants" => orthants_job(payload, params),
        "substantial" => substantial(payload, params),
        "iterimage" => iterimage(payload, params),
        "fit" => fit_job(payload, params),
        "verify" => verify_job(payload, params),
        other => Err(Error::Schema(format!("unknown command {other:?}"))),
    }
}

// ---------------------------------------------------------------------

fn fit_value(fit: &CountingFit) -> Value {
    match fit {
        CountingFit::Polynomial(p) => {
            let mut v = poly_value(p, &default_names(1));
            v.as_object_mut().unwrap().insert("kind".into(), json!("polynomial"));
            v
        }
        CountingFit::Quasipolynomial(qp) => json!({
            "kind": "quasipolynomial",
            "period": qp.period(),
            "residues": qp
                .residues()
                .iter()
                .map(|r| poly_value(r, &default_names(1)))
                .collect::<Vec<_>>(),
        }),
    }
}

fn ehrhart(payload: Value, params: &Params) -> Result<JobOutcome> {
    let doc: PolytopeDoc = from_value(payload, "ehrhart payload")?;
    let p = doc.to_polytope()?;
    // Top dilation the fit sweeps, by its sampling schedule.
    let top = p.denominator().saturating_mul(3 * (p.k() as u32 + 1));
    charge(params, bbox_cost(&p, top), "dilation sweep")?;
    let fit = p.ehrhart_fit()?;
    done(json!({
        "command": "ehrhart",
        "k": p.k(),
        "denominator": p.denominator(),
        "fit": fit_value(&fit),
    }))
}

fn colorcount(payload: Value, params: &Params) -> Result<JobOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Payload {
        polytope: PolytopeDoc,
        coloring: Value,
    }
    let doc: Payload = from_value(payload, "colorcount payload")?;
    let p = doc.polytope.to_polytope()?;
    let chi = parse_coloring(doc.coloring, params.scan)?;
    let limit = params.threshold_limit.unwrap_or(16);
    let degree = params.degree;
    let top = limit
        + p.denominator() * 3 * (degree.unwrap_or(p.k() as u32) + 1)
        + 1;
    charge(params, bbox_cost(&p, top), "dilation sweep")?;
    let fit = p.color_count_fit(&chi, degree, limit)?;
    done(json!({
        "command": "colorcount",
        "k": p.k(),
        "threshold": fit.threshold,
        "fit": fit_value(&fit.fit),
    }))
}

fn sumset_job(payload: Value, params: &Params) -> Result<JobOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Payload {
        semigroup: Value,
        set: Vec<ElemDoc>,
        n: u32,
    }
    let doc: Payload = from_value(payload, "sumset payload")?;
    let g = parse_semigroup(doc.semigroup)?;
    let a: BTreeSet<Elem> = doc.set.iter().map(ElemDoc::to_elem).collect();
    charge(params, doc.n as u64 + 1, "sumset rounds")?;
    let s = n_fold_sumset(&g, &a, doc.n)?;
    done(json!({
        "command": "sumset",
        "semigroup": g.describe(),
        "n": doc.n,
        "size": s.len(),
        "elements": s.iter().map(elem_value).collect::<Vec<_>>(),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowthPayload {
    semigroup: Value,
    sets: Vec<Vec<ElemDoc>>,
    #[serde(default)]
    character: Option<Value>,
}

fn outcome_fields(doc: &mut serde_json::Map<String, Value>, outcome: &PipelineOutcome) -> Option<String> {
    match outcome {
        PipelineOutcome::Completed => {
            doc.insert("outcome".into(), json!("completed"));
            None
        }
        PipelineOutcome::Inconclusive(reason) => {
            doc.insert("outcome".into(), json!("inconclusive"));
            doc.insert("reason".into(), json!(reason));
            Some(reason.clone())
        }
    }
}

fn growth_cost(sets: &[Vec<ElemDoc>], box_limit: u32) -> u64 {
    let k: usize = sets.iter().map(Vec::len).sum();
    pow_cost(k as u64 * box_limit as u64 + 1, k)
}

fn sep_job(payload: Value, params: &Params) -> Result<JobOutcome> {
    let doc: GrowthPayload = from_value(payload, "sep payload")?;
    if doc.character.is_some() {
        return Err(Error::Schema("sep takes no character; use charsum".into()));
    }
    let g = parse_semigroup(doc.semigroup)?;
    let box_limit = params.box_limit.unwrap_or(16);
    let grid = params.grid.unwrap_or(6);
    charge(params, growth_cost(&doc.sets, box_limit), "slice classification")?;
    let sets: Vec<Vec<Elem>> = doc
        .sets
        .iter()
        .map(|s| s.iter().map(ElemDoc::to_elem).collect())
        .collect();
    let report = sumset_growth_sep(&g, &sets, box_limit, grid)?;
    let mut out = serde_json::Map::new();
    out.insert("command".into(), json!("sep"));
    let inconclusive = outcome_fields(&mut out, &report.outcome);
    out.insert("semigroup".into(), json!(report.semigroup));
    out.insert("coordinates".into(), json!(report.coordinates));
    out.insert("partition".into(), json!(report.partition));
    out.insert("boxes".into(), json!(report.boxes));
    out.insert(
        "minimal_non_substantial".into(),
        json!(report.minimal_non_substantial.points()),
    );
    out.insert("closed".into(), json!(report.closed));
    out.insert(
        "sep".into(),
        report.sep.as_ref().map(sep_value).unwrap_or(Value::Null),
    );
    out.insert("integral".into(), json!(report.integral));
    out.insert("verified_grid".into(), json!(report.verified_grid));
    Ok(JobOutcome { document: Value::Object(out), inconclusive })
}

fn charsum(payload: Value, params: &Params) -> Result<JobOutcome> {
    let doc: GrowthPayload = from_value(payload, "charsum payload")?;
    let g = parse_semigroup(doc.semigroup)?;
    let psi = parse_character(
        doc.character
            .ok_or_else(|| Error::Schema("charsum needs a character".into()))?,
    )?;
    let box_limit = params.box_limit.unwrap_or(16);
    let grid = params.grid.unwrap_or(6);
    charge(params, growth_cost(&doc.sets, box_limit), "slice classification")?;
    let sets: Vec<Vec<Elem>> = doc
        .sets
        .iter()
        .map(|s| s.iter().map(ElemDoc::to_elem).collect())
        .collect();
    let report = character_sumset_exp_poly(&g, &sets, &psi, box_limit, grid)?;
    let mut out = serde_json::Map::new();
    out.insert("command".into(), json!("charsum"));
    let inconclusive = outcome_fields(&mut out, &report.outcome);
    out.insert("semigroup".into(), json!(report.semigroup));
    out.insert("coordinates".into(), json!(report.coordinates));
    out.insert("partition".into(), json!(report.partition));
    out.insert("boxes".into(), json!(report.boxes));
    out.insert(
        "minimal_non_substantial".into(),
        json!(report.minimal_non_substantial.points()),
    );
    out.insert("closed".into(), json!(report.closed));
    out.insert(
        "exp_poly".into(),
        report.exp_poly.as_ref().map(exp_poly_value).unwrap_or(Value::Null),
    );
    out.insert("verified_grid".into(), json!(report.verified_grid));
    Ok(JobOutcome { document: Value::Object(out), inconclusive })
}

// ---------------------------------------------------------------------

fn gf_job(payload: Value, params: &Params) -> Result<JobOutcome> {
    let op = payload
        .get("op")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Schema("gf payload needs a string \"op\" field".into()))?;
    match op.as_str() {
        "coefficient" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                gf: GfDoc,
                point: Vec<u32>,
            }
            let doc: Payload = from_value(payload, "gf coefficient payload")?;
            let cost = doc
                .point
                .iter()
                .fold(1u64, |acc, &n| acc.saturating_mul(n as u64 + 1));
            charge(params, cost, "series unrolling")?;
            let coefficient = if doc.gf.has_cyclotomic() {
                cyclotomic_value(&doc.gf.to_cyclotomic()?.coefficient(&doc.point)?)
            } else {
                rational_value(&doc.gf.to_rational()?.coefficient(&doc.point)?)
            };
            done(json!({
                "command": "gf",
                "op": "coefficient",
                "point": doc.point,
                "coefficient": coefficient,
            }))
        }
        "substitute" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                gf: GfDoc,
                partition: Vec<Vec<usize>>,
            }
            let doc: Payload = from_value(payload, "gf substitute payload")?;
            let gf = if doc.gf.has_cyclotomic() {
                cyc_gf_value(&doc.gf.to_cyclotomic()?.p_substitution(&doc.partition)?)
            } else {
                gf_value(&doc.gf.to_rational()?.p_substitution(&doc.partition)?)
            };
            done(json!({
                "command": "gf",
                "op": "substitute",
                "partition": doc.partition,
                "gf": gf,
            }))
        }
        "extract" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                gf: GfDoc,
            }
            let doc: Payload = from_value(payload, "gf extract payload")?;
            if doc.gf.has_cyclotomic() {
                let ep = doc.gf.to_cyclotomic()?.extract_exp_poly()?;
                done(json!({
                    "command": "gf",
                    "op": "extract",
                    "exp_poly": exp_poly_value(&ep),
                }))
            } else {
                let sep = doc.gf.to_rational()?.extract_sep()?;
                done(json!({
                    "command": "gf",
                    "op": "extract",
                    "sep": sep_value(&sep),
                }))
            }
        }
        "from-numerator" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                k: usize,
                numerator: Vec<TermDoc>,
            }
            let doc: Payload = from_value(payload, "gf from-numerator payload")?;
            let cyclotomic = doc.numerator.iter().any(|t| t.coefficient.is_cyclotomic());
            let gf = if cyclotomic {
                let terms = doc
                    .numerator
                    .iter()
                    .map(|t| {
                        Ok(GfTerm::plain(
                            t.coefficient.to_cyclotomic()?,
                            t.exponents.clone(),
                            vec![1; doc.k],
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                cyc_gf_value(&Gf::<Cyclotomic>::new(doc.k, terms)?)
            } else {
                let terms = doc
                    .numerator
                    .iter()
                    .map(|t| {
                        Ok(GfTerm::plain(
                            t.coefficient.to_rational()?,
                            t.exponents.clone(),
                            vec![1; doc.k],
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                gf_value(&Gf::<Rational>::new(doc.k, terms)?)
            };
            done(json!({"command": "gf", "op": "from-numerator", "gf": gf}))
        }
        other => Err(Error::Schema(format!(
            "unknown gf op {other:?}; expected coefficient, substitute, extract or from-numerator"
        ))),
    }
}

fn orthants_job(payload: Value, _params: &Params) -> Result<JobOutcome> {
    let op = payload
        .get("op")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Schema("orthants payload needs a string \"op\" field".into()))?;
    match op.as_str() {
        "union" | "intersect" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                a: SimpleSetDoc,
                b: SimpleSetDoc,
            }
            let doc: Payload = from_value(payload, "orthants payload")?;
            let a = doc.a.to_set()?;
            let b = doc.b.to_set()?;
            let out = if op == "union" { a.union(&b)? } else { a.intersect(&b)? };
            done(json!({
                "command": "orthants",
                "op": op,
                "set": simple_set_value(&out),
            }))
        }
        "complement" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                a: SimpleSetDoc,
            }
            let doc: Payload = from_value(payload, "orthants payload")?;
            done(json!({
                "command": "orthants",
                "op": op,
                "set": simple_set_value(&doc.a.to_set()?.complement()?),
            }))
        }
        "contains" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                a: SimpleSetDoc,
                point: Vec<u32>,
            }
            let doc: Payload = from_value(payload, "orthants payload")?;
            done(json!({
                "command": "orthants",
                "op": op,
                "point": doc.point,
                "contains": doc.a.to_set()?.contains(&doc.point)?,
            }))
        }
        "gf" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                a: SimpleSetDoc,
            }
            let doc: Payload = from_value(payload, "orthants payload")?;
            done(json!({
                "command": "orthants",
                "op": op,
                "gf": gf_value(&gf_of_simple_set(&doc.a.to_set()?)?),
            }))
        }
        "from-gf" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                op: String,
                gf: GfDoc,
            }
            let doc: Payload = from_value(payload, "orthants payload")?;
            if doc.gf.has_cyclotomic() {
                return Err(Error::Unsupported(
                    "an indicator series must have rational weights".into(),
                ));
            }
            done(json!({
                "command": "orthants",
                "op": op,
                "set": simple_set_value(&simple_set_from_gf(&doc.gf.to_rational()?)?),
            }))
        }
        other => Err(Error::Schema(format!(
            "unknown orthants op {other:?}; expected union, intersect, complement, contains, gf or from-gf"
        ))),
    }
}

// ---------------------------------------------------------------------

fn substantial(payload: Value, params: &Params) -> Result<JobOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Payload {
        coloring: Value,
        partition: Vec<Vec<usize>>,
        #[serde(default)]
        norm: Option<Vec<u32>>,
        #[serde(default)]
        bound: Option<u32>,
    }
    let doc: Payload = from_value(payload, "substantial payload")?;
    let chi = parse_coloring(doc.coloring, params.scan)?;
    match (doc.norm, doc.bound) {
        (Some(norm), None) => {
            let cost = doc
                .partition
                .iter()
                .zip(&norm)
                .fold(1u64, |acc, (block, &n)| {
                    acc.saturating_mul(pow_cost(n as u64 + 1, block.len()))
                });
            charge(params, cost, "slice sweep")?;
            let points = chi.substantial_points(&doc.partition, &norm)?;
            done(json!({
                "command": "substantial",
                "norm": norm,
                "points": points,
            }))
        }
        (None, Some(bound)) => {
            let k = chi.k();
            charge(params, pow_cost(k as u64 * bound as u64 + 1, k), "box sweep")?;
            let report = chi.substantial_upper_ideal(&doc.partition, bound)?;
            done(json!({
                "command": "substantial",
                "bound": report.bound,
                "substantial": report.substantial,
                "minimal_non_substantial": report.minimal_non_substantial.points(),
                "closed": report.closed,
            }))
        }
        _ => Err(Error::Schema(
            "substantial needs exactly one of \"norm\" (slice mode) or \"bound\" (box mode)".into(),
        )),
    }
}

fn iterimage(payload: Value, params: &Params) -> Result<JobOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Payload {
        family: MapFamilyDoc,
        start: Vec<usize>,
        #[serde(default)]
        n: Option<Vec<u32>>,
    }
    let doc: Payload = from_value(payload, "iterimage payload")?;
    let family = doc.family.to_family()?;
    match doc.n {
        Some(n) => {
            let rounds: u64 = n.iter().map(|&x| x as u64).sum();
            charge(
                params,
                (rounds + 1).saturating_mul(family.size() as u64),
                "map iteration",
            )?;
            let image = family.iterated_image(&doc.start, &n)?;
            done(json!({
                "command": "iterimage",
                "n": n,
                "size": image.len(),
                "image": image,
            }))
        }
        None => {
            let search = SepSearch {
                degree: params.degree.unwrap_or(1),
                c_limit: params.c_limit.unwrap_or(12),
                grid: params.grid.unwrap_or(12),
                box_limit: params.box_limit.unwrap_or(16),
                ..SepSearch::default()
            };
            let cost = pow_cost(search.grid as u64 + 1, family.blocks())
                .saturating_mul(family.size() as u64);
            charge(params, cost, "image table search")?;
            let report = iterated_image_sep(&family, &doc.start, &search)?;
            let mut out = serde_json::Map::new();
            out.insert("command".into(), json!("iterimage"));
            let inconclusive = outcome_fields(&mut out, &report.outcome);
            out.insert("blocks".into(), json!(report.blocks));
            out.insert(
                "sep".into(),
                report.sep.as_ref().map(sep_value).unwrap_or(Value::Null),
            );
            out.insert("verified_grid".into(), json!(report.verified_grid));
            out.insert("structural_checked".into(), json!(report.structural_checked));
            Ok(JobOutcome { document: Value::Object(out), inconclusive })
        }
    }
}

// ---------------------------------------------------------------------

type RationalSamples = BTreeMap<Vec<u32>, Rational>;

fn rational_samples(raw: &[(Vec<u32>, ScalarDoc)]) -> Result<RationalSamples> {
    let mut map = BTreeMap::new();
    for (point, value) in raw {
        if map.insert(point.clone(), value.to_rational()?).is_some() {
            return Err(Error::Schema(format!("sample at {point:?} listed twice")));
        }
    }
    Ok(map)
}

fn lookup(map: &RationalSamples, point: &[u32]) -> Result<Rational> {
    map.get(point)
        .cloned()
        .ok_or_else(|| Error::Schema(format!("no sample at {point:?}")))
}

fn fit_job(payload: Value, params: &Params) -> Result<JobOutcome> {
    let kind = payload
        .get("kind")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Schema("fit payload needs a string \"kind\" field".into()))?;
    match kind.as_str() {
        "polynomial" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                kind: String,
                vars: usize,
                degree: u32,
                samples: Vec<(Vec<u32>, ScalarDoc)>,
            }
            let doc: Payload = from_value(payload, "fit payload")?;
            charge(params, doc.samples.len() as u64, "sample sweep")?;
            let samples = doc
                .samples
                .iter()
                .map(|(p, v)| Ok((p.clone(), v.to_rational()?)))
                .collect::<Result<Vec<_>>>()?;
            let poly = fit_polynomial(doc.vars, &samples, doc.degree)?;
            let mut fit = poly_value(&poly, &default_names(doc.vars));
            fit.as_object_mut().unwrap().insert("kind".into(), json!("polynomial"));
            done(json!({"command": "fit", "fit": fit}))
        }
        "quasipolynomial" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                kind: String,
                period: u32,
                degree: u32,
                #[serde(default)]
                start: u32,
                samples: Vec<(Vec<u32>, ScalarDoc)>,
            }
            let doc: Payload = from_value(payload, "fit payload")?;
            charge(params, doc.samples.len() as u64, "sample sweep")?;
            let map = rational_samples(&doc.samples)?;
            let oracle = |n: u32| lookup(&map, &[n]);
            let qp = fit_quasipolynomial(oracle, doc.period, doc.degree, doc.start)?;
            let fit = json!({
                "kind": "quasipolynomial",
                "period": qp.period(),
                "residues": qp
                    .residues()
                    .iter()
                    .map(|r| poly_value(r, &default_names(1)))
                    .collect::<Vec<_>>(),
            });
            done(json!({"command": "fit", "fit": fit}))
        }
        "sep" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                kind: String,
                l: usize,
                degree: u32,
                c_limit: u32,
                samples: Vec<(Vec<u32>, ScalarDoc)>,
            }
            let doc: Payload = from_value(payload, "fit payload")?;
            charge(params, doc.samples.len() as u64, "sample sweep")?;
            let map = rational_samples(&doc.samples)?;
            let oracle = |n: &[u32]| lookup(&map, n);
            let sep = fit_sep(doc.l, oracle, doc.degree, doc.c_limit)?;
            let mut fit = sep_value(&sep);
            fit.as_object_mut().unwrap().insert("kind".into(), json!("sep"));
            done(json!({"command": "fit", "fit": fit}))
        }
        "exp-poly" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Payload {
                #[allow(dead_code)]
                kind: String,
                l: usize,
                order: u64,
                roots: Vec<Vec<u64>>,
                degree: u32,
                #[serde(default)]
                start: u32,
                samples: Vec<(Vec<u32>, ScalarDoc)>,
            }
            let doc: Payload = from_value(payload, "fit payload")?;
            charge(params, doc.samples.len() as u64, "sample sweep")?;
            let mut map: BTreeMap<Vec<u32>, Cyclotomic> = BTreeMap::new();
            for (point, value) in &doc.samples {
                if map.insert(point.clone(), value.to_cyclotomic()?).is_some() {
                    return Err(Error::Schema(format!("sample at {point:?} listed twice")));
                }
            }
            let oracle = |n: &[u32]| {
                map.get(n)
                    .cloned()
                    .ok_or_else(|| Error::Schema(format!("no sample at {n:?}")))
            };
            let ep = fit_exp_poly(doc.l, oracle, doc.order, &doc.roots, doc.degree, doc.start)?;
            let mut fit = exp_poly_value(&ep);
            fit.as_object_mut().unwrap().insert("kind".into(), json!("exp-poly"));
            done(json!({"command": "fit", "fit": fit}))
        }
        other => Err(Error::Schema(format!(
            "unknown fit kind {other:?}; expected polynomial, quasipolynomial, sep or exp-poly"
        ))),
    }
}

// ---------------------------------------------------------------------

enum ParsedFit {
    Poly(MultiPoly<Rational>),
    Quasi(Quasipolynomial),
    Sep(SepDescription),
    Exp(ExpPoly<Cyclotomic>),
}

fn parse_fit(v: Value) -> Result<ParsedFit> {
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Schema("fit document needs a string \"kind\" field".into()))?;
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ResidueDoc {
        vars: usize,
        terms: Vec<TermDoc>,
        /// Informational; ignored on input.
        #[allow(dead_code)]
        #[serde(default)]
        rendered: Option<String>,
    }
    impl ResidueDoc {
        fn to_poly(&self) -> Result<MultiPoly<Rational>> {
            terms_to_poly(self.vars, &self.terms)
        }
    }
    match kind.as_str() {
        "polynomial" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Doc {
                #[allow(dead_code)]
                kind: String,
                vars: usize,
                terms: Vec<TermDoc>,
                #[serde(default)]
                rendered: Option<String>,
            }
            let d: Doc = from_value(v, "polynomial fit document")?;
            let _ = d.rendered;
            Ok(ParsedFit::Poly(terms_to_poly(d.vars, &d.terms)?))
        }
        "quasipolynomial" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Doc {
                #[allow(dead_code)]
                kind: String,
                period: u32,
                residues: Vec<ResidueDoc>,
            }
            let d: Doc = from_value(v, "quasipolynomial fit document")?;
            let residues = d
                .residues
                .iter()
                .map(ResidueDoc::to_poly)
                .collect::<Result<Vec<_>>>()?;
            Ok(ParsedFit::Quasi(Quasipolynomial::new(d.period, residues)?))
        }
        "sep" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Doc {
                #[allow(dead_code)]
                kind: String,
                l: usize,
                c: u32,
                entries: Vec<SepEntryDoc>,
            }
            let d: Doc = from_value(v, "sep fit document")?;
            Ok(ParsedFit::Sep(sep_from_doc(d.l, d.c, &d.entries)?))
        }
        "exp-poly" => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct SummandDoc {
                root: Vec<u64>,
                polynomial: CycPolyDoc,
            }
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct CycPolyDoc {
                vars: usize,
                terms: Vec<TermDoc>,
            }
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Doc {
                #[allow(dead_code)]
                kind: String,
                l: usize,
                order: u64,
                threshold: u32,
                summands: Vec<SummandDoc>,
            }
            let d: Doc = from_value(v, "exp-poly fit document")?;
            let summands = d
                .summands
                .iter()
                .map(|s| {
                    let mut poly = MultiPoly::<Cyclotomic>::zero(s.polynomial.vars);
                    for t in &s.polynomial.terms {
                        if t.exponents.len() != s.polynomial.vars {
                            return Err(Error::ArityMismatch {
                                expected: s.polynomial.vars,
                                got: t.exponents.len(),
                            });
                        }
                        poly = poly.add(&MultiPoly::monomial(
                            s.polynomial.vars,
                            t.exponents.clone(),
                            t.coefficient.to_cyclotomic()?,
                        ));
                    }
                    Ok((s.root.clone(), poly))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ParsedFit::Exp(ExpPoly::from_parts(d.l, d.order, d.threshold, summands)?))
        }
        other => Err(Error::Schema(format!(
            "unknown fit kind {other:?}; expected polynomial, quasipolynomial, sep or exp-poly"
        ))),
    }
}

fn verify_job(payload: Value, params: &Params) -> Result<JobOutcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Payload {
        fit: Value,
        samples: Vec<(Vec<u32>, ScalarDoc)>,
        dims: Vec<u32>,
    }
    let doc: Payload = from_value(payload, "verify payload")?;
    let cost = doc
        .dims
        .iter()
        .fold(1u64, |acc, &d| acc.saturating_mul(d as u64 + 1));
    charge(params, cost, "verification grid")?;
    let fit = parse_fit(doc.fit)?;
    let report = match &fit {
        ParsedFit::Exp(ep) => {
            let mut map: BTreeMap<Vec<u32>, Cyclotomic> = BTreeMap::new();
            for (point, value) in &doc.samples {
                if map.insert(point.clone(), value.to_cyclotomic()?).is_some() {
                    return Err(Error::Schema(format!("sample at {point:?} listed twice")));
                }
            }
            let oracle = |n: &[u32]| {
                map.get(n)
                    .cloned()
                    .ok_or_else(|| Error::Schema(format!("no sample at {n:?}")))
            };
            verify_exp_poly(ep, oracle, &doc.dims)?
        }
        _ => {
            let map = rational_samples(&doc.samples)?;
            let oracle = |n: &[u32]| lookup(&map, n);
            let fitted = match &fit {
                ParsedFit::Poly(p) => Fitted::Polynomial(p),
                ParsedFit::Quasi(qp) => Fitted::Quasipolynomial(qp),
                ParsedFit::Sep(s) => Fitted::Sep(s),
                ParsedFit::Exp(_) => unreachable!(),
            };
            verify_fit(&fitted, oracle, &doc.dims)?
        }
    };
    let mismatches: Vec<Value> = report
        .mismatches
        .iter()
        .map(|m| json!({"point": m.point, "expected": m.expected, "got": m.got}))
        .collect();
    done(json!({
        "command": "verify",
        "checked": report.checked,
        "clean": report.clean(),
        "mismatches": mismatches,
    }))
}
