//! Wire schema for job documents.
//!
//! Everything is JSON. Rationals travel as exact strings ("p/q" or "p"),
//! cyclotomics as {"order": m, "coeffs": [...]}; machine integers (sizes,
//! exponents, indices) are plain JSON integers. Floats never appear, in
//! either direction.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use evpoly::colorings::Coloring;
use evpoly::commuting::MapFamily;
use evpoly::gf::{ExpPoly, Gf, GfTerm, SepDescription, SepEntry, Word, WordEntry};
use evpoly::orthants::{Orthant, SimpleSet};
use evpoly::poly::{default_names, render_poly, MultiPoly};
use evpoly::polytopes::RationalPolytope;
use evpoly::scalar::{parse_rational, render_rational};
use evpoly::semigroups::{
    AnySemigroup, CayleyTableSemigroup, Character, Elem, ModAdd, ModMul, TruncatedNat, ZdAdd,
};
use evpoly::{Cyclotomic, Error, Rational, Result};

/// One batch job: the command must match the subcommand it is run under.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobDocument {
    pub command: String,
    pub payload: Value,
    #[serde(default)]
    pub params: Params,
    /// Default output path; the --output flag takes precedence.
    #[serde(default)]
    pub output: Option<String>,
}

/// Tuning knobs shared across commands. Command-line flags override the
/// document's values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Box bound for stabilization sweeps and verification grids.
    #[serde(rename = "box", default)]
    pub box_limit: Option<u32>,
    /// Enumeration budget: a job whose scheduled point count exceeds
    /// this is refused up front with a resource-cap error.
    #[serde(default)]
    pub cap: Option<u64>,
    /// Cross-check grid bound, where distinct from the box.
    #[serde(default)]
    pub grid: Option<u32>,
    #[serde(default)]
    pub degree: Option<u32>,
    #[serde(default)]
    pub c_limit: Option<u32>,
    #[serde(default)]
    pub threshold_limit: Option<u32>,
    /// Shift-stability scan bound used when validating explicit colorings.
    #[serde(default)]
    pub scan: Option<u32>,
}

pub fn parse_job(text: &str) -> Result<JobDocument> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("job document: {e}")))
}

pub fn from_value<T: DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Schema(format!("{what}: {e}")))
}

// ---------------------------------------------------------------------
// Scalars

/// A scalar on the wire: integer, "p/q" string, or cyclotomic object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScalarDoc {
    Int(i64),
    Rational(String),
    Cyclotomic(CycDoc),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycDoc {
    pub order: u64,
    pub coeffs: Vec<String>,
}

impl ScalarDoc {
    pub fn is_cyclotomic(&self) -> bool {
        matches!(self, ScalarDoc::Cyclotomic(_))
    }

    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            ScalarDoc::Int(n) => Ok(Rational::from_integer((*n).into())),
            ScalarDoc::Rational(s) => parse_rational(s),
            ScalarDoc::Cyclotomic(_) => Err(Error::Schema(
                "expected a rational, found a cyclotomic value".into(),
            )),
        }
    }

    pub fn to_cyclotomic(&self) -> Result<Cyclotomic> {
        match self {
            ScalarDoc::Cyclotomic(c) => {
                let coeffs = c
                    .coeffs
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<Vec<_>>>()?;
                Cyclotomic::new(c.order, coeffs)
            }
            other => Ok(Cyclotomic::from_rational_in(1, other.to_rational()?)),
        }
    }
}

pub fn rational_value(r: &Rational) -> Value {
    Value::String(render_rational(r))
}

pub fn cyclotomic_value(c: &Cyclotomic) -> Value {
    json!({
        "order": c.order(),
        "coeffs": c.coeffs().iter().map(render_rational).collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------------
// Polynomials and fits

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub exponents: Vec<u32>,
    pub coefficient: ScalarDoc,
}

pub fn terms_to_poly(vars: usize, terms: &[TermDoc]) -> Result<MultiPoly<Rational>> {
    let mut poly = MultiPoly::zero(vars);
    for t in terms {
        if t.exponents.len() != vars {
            return Err(Error::ArityMismatch { expected: vars, got: t.exponents.len() });
        }
        poly = poly.add(&MultiPoly::monomial(vars, t.exponents.clone(), t.coefficient.to_rational()?));
    }
    Ok(poly)
}

pub fn poly_value(p: &MultiPoly<Rational>, names: &[String]) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(e, c)| json!({"exponents": e, "coefficient": render_rational(c)}))
        .collect();
    json!({
        "vars": p.vars(),
        "terms": terms,
        "rendered": render_poly(p, names),
    })
}

/// Cyclotomic-coefficient polynomial; no text rendering, structure only.
pub fn cyc_poly_value(p: &MultiPoly<Cyclotomic>) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(e, c)| json!({"exponents": e, "coefficient": cyclotomic_value(c)}))
        .collect();
    json!({"vars": p.vars(), "terms": terms})
}

// ---------------------------------------------------------------------
// Words and SEP tables

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WordEntryDoc {
    Fixed(u32),
    Named(String),
}

impl WordEntryDoc {
    pub fn to_entry(&self) -> Result<WordEntry> {
        match self {
            WordEntryDoc::Fixed(v) => Ok(WordEntry::Fixed(*v)),
            WordEntryDoc::Named(s) if s == "inf" => Ok(WordEntry::Inf),
            WordEntryDoc::Named(s) => {
                Err(Error::Schema(format!("word entry must be an integer or \"inf\", got {s:?}")))
            }
        }
    }
}

pub fn word_value(w: &Word) -> Value {
    Value::Array(
        w.0.iter()
            .map(|e| match e {
                WordEntry::Fixed(v) => json!(v),
                WordEntry::Inf => json!("inf"),
            })
            .collect(),
    )
}

pub fn sep_value(sep: &SepDescription) -> Value {
    let names = default_names(sep.l());
    let entries: Vec<Value> = sep
        .table()
        .iter()
        .map(|(w, entry)| {
            let entry_names: Vec<String> =
                entry.free.iter().map(|&i| names[i].clone()).collect();
            let terms: Vec<Value> = entry
                .poly
                .terms()
                .map(|(e, c)| json!({"exponents": e, "coefficient": render_rational(c)}))
                .collect();
            json!({
                "word": word_value(w),
                "free": entry.free,
                "terms": terms,
                "rendered": render_poly(&entry.poly, &entry_names),
            })
        })
        .collect();
    json!({"l": sep.l(), "c": sep.c(), "entries": entries})
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SepEntryDoc {
    pub word: Vec<WordEntryDoc>,
    pub free: Vec<usize>,
    pub terms: Vec<TermDoc>,
    /// Informational; ignored on input.
    #[serde(default)]
    pub rendered: Option<String>,
}

pub fn sep_from_doc(l: usize, c: u32, entries: &[SepEntryDoc]) -> Result<SepDescription> {
    let mut table = BTreeMap::new();
    for e in entries {
        let word = Word(e.word.iter().map(|w| w.to_entry()).collect::<Result<Vec<_>>>()?);
        let poly = terms_to_poly(e.free.len(), &e.terms)?;
        if table
            .insert(word, SepEntry { free: e.free.clone(), poly })
            .is_some()
        {
            return Err(Error::Schema("duplicate word in table".into()));
        }
    }
    SepDescription::from_parts(l, c, table)
}

pub fn exp_poly_value(ep: &ExpPoly<Cyclotomic>) -> Value {
    let summands: Vec<Value> = ep
        .summands()
        .iter()
        .map(|(root, poly)| json!({"root": root, "polynomial": cyc_poly_value(poly)}))
        .collect();
    json!({
        "l": ep.l(),
        "order": ep.order(),
        "threshold": ep.threshold(),
        "summands": summands,
    })
}

// ---------------------------------------------------------------------
// Generating functions

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfDoc {
    pub k: usize,
    pub terms: Vec<GfTermDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfTermDoc {
    pub gamma: ScalarDoc,
    pub b: Vec<u32>,
    /// Denominator twists; omitted means untwisted (all 1).
    #[serde(default)]
    pub alpha: Option<Vec<ScalarDoc>>,
    pub e: Vec<u32>,
}

impl GfDoc {
    pub fn has_cyclotomic(&self) -> bool {
        self.terms.iter().any(|t| {
            t.gamma.is_cyclotomic()
                || t.alpha
                    .as_ref()
                    .is_some_and(|a| a.iter().any(|s| s.is_cyclotomic()))
        })
    }

    pub fn to_rational(&self) -> Result<Gf<Rational>> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let gamma = t.gamma.to_rational()?;
                let alpha = match &t.alpha {
                    Some(a) => a.iter().map(|s| s.to_rational()).collect::<Result<Vec<_>>>()?,
                    None => vec![Rational::from_integer(1.into()); t.b.len()],
                };
                Ok(GfTerm::new(gamma, t.b.clone(), alpha, t.e.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Gf::new(self.k, terms)
    }

    pub fn to_cyclotomic(&self) -> Result<Gf<Cyclotomic>> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let gamma = t.gamma.to_cyclotomic()?;
                let alpha = match &t.alpha {
                    Some(a) => {
                        a.iter().map(|s| s.to_cyclotomic()).collect::<Result<Vec<_>>>()?
                    }
                    None => vec![Cyclotomic::from_rational_in(1, Rational::from_integer(1.into())); t.b.len()],
                };
                Ok(GfTerm::new(gamma, t.b.clone(), alpha, t.e.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Gf::new(self.k, terms)
    }
}

pub fn gf_value(f: &Gf<Rational>) -> Value {
    let terms: Vec<Value> = f
        .terms()
        .iter()
        .map(|t| {
            json!({
                "gamma": rational_value(&t.gamma),
                "b": t.b,
                "alpha": t.alpha.iter().map(render_rational).collect::<Vec<_>>(),
                "e": t.e,
            })
        })
        .collect();
    json!({"k": f.k(), "terms": terms})
}

pub fn cyc_gf_value(f: &Gf<Cyclotomic>) -> Value {
    let terms: Vec<Value> = f
        .terms()
        .iter()
        .map(|t| {
            json!({
                "gamma": cyclotomic_value(&t.gamma),
                "b": t.b,
                "alpha": t.alpha.iter().map(cyclotomic_value).collect::<Vec<_>>(),
                "e": t.e,
            })
        })
        .collect();
    json!({"k": f.k(), "terms": terms})
}

// ---------------------------------------------------------------------
// Simple sets

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimpleSetDoc {
    pub k: usize,
    pub orthants: Vec<OrthantDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthantDoc {
    pub base: Vec<u32>,
    #[serde(default)]
    pub frozen: Vec<usize>,
}

impl SimpleSetDoc {
    pub fn to_set(&self) -> Result<SimpleSet> {
        let orthants = self
            .orthants
            .iter()
            .map(|o| Orthant::new(o.base.clone(), o.frozen.iter().copied().collect::<BTreeSet<_>>()))
            .collect::<Result<Vec<_>>>()?;
        SimpleSet::new(self.k, orthants)
    }
}

pub fn simple_set_value(s: &SimpleSet) -> Value {
    let orthants: Vec<Value> = s
        .orthants()
        .iter()
        .map(|o| {
            json!({
                "base": o.base(),
                "frozen": o.frozen().iter().collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"k": s.k(), "orthants": orthants})
}

// ---------------------------------------------------------------------
// Polytopes

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeDoc {
    pub vertices: Vec<Vec<ScalarDoc>>,
}

impl PolytopeDoc {
    pub fn to_polytope(&self) -> Result<RationalPolytope> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|s| s.to_rational()).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        RationalPolytope::new(vertices)
    }
}

// ---------------------------------------------------------------------
// Semigroups, elements, characters, colorings

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ElemDoc {
    Scalar(i64),
    Vector(Vec<i64>),
}

impl ElemDoc {
    pub fn to_elem(&self) -> Elem {
        match self {
            ElemDoc::Scalar(v) => Elem::scalar(*v),
            ElemDoc::Vector(v) => Elem(v.clone()),
        }
    }
}

pub fn elem_value(e: &Elem) -> Value {
    json!(e.0)
}

fn kind_of(v: &Value, what: &str) -> Result<String> {
    v.get("kind")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Schema(format!("{what} needs a string \"kind\" field")))
}

pub fn parse_semigroup(v: Value) -> Result<AnySemigroup> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ZAddDoc {
        #[allow(dead_code)]
        kind: String,
        #[serde(default)]
        d: Option<usize>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ModDoc {
        #[allow(dead_code)]
        kind: String,
        m: u64,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct TruncDoc {
        #[allow(dead_code)]
        kind: String,
        cap: u64,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct TableDoc {
        #[allow(dead_code)]
        kind: String,
        table: Vec<Vec<usize>>,
    }
    match kind_of(&v, "semigroup")?.as_str() {
        "z-add" => {
            let d: ZAddDoc = from_value(v, "z-add semigroup")?;
            Ok(AnySemigroup::ZdAdd(ZdAdd { d: d.d.unwrap_or(1) }))
        }
        "mod-add" => {
            let d: ModDoc = from_value(v, "mod-add semigroup")?;
            Ok(AnySemigroup::ModAdd(ModAdd { m: d.m }))
        }
        "mod-mul" => {
            let d: ModDoc = from_value(v, "mod-mul semigroup")?;
            Ok(AnySemigroup::ModMul(ModMul { m: d.m }))
        }
        "truncated-nat" => {
            let d: TruncDoc = from_value(v, "truncated-nat semigroup")?;
            Ok(AnySemigroup::TruncatedNat(TruncatedNat { cap: d.cap }))
        }
        "table" => {
            let d: TableDoc = from_value(v, "table semigroup")?;
            Ok(AnySemigroup::Table(CayleyTableSemigroup::new(d.table)?))
        }
        other => Err(Error::Schema(format!(
            "unknown semigroup kind {other:?}; expected z-add, mod-add, mod-mul, truncated-nat or table"
        ))),
    }
}

pub fn parse_character(v: Value) -> Result<Character> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct TrivialDoc {
        #[allow(dead_code)]
        kind: String,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct LinearDoc {
        #[allow(dead_code)]
        kind: String,
        order: u64,
        coeffs: Vec<i64>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct TableDoc {
        #[allow(dead_code)]
        kind: String,
        order: u64,
        exps: Vec<(ElemDoc, u64)>,
    }
    match kind_of(&v, "character")?.as_str() {
        "trivial" => {
            let _: TrivialDoc = from_value(v, "trivial character")?;
            Ok(Character::trivial())
        }
        "linear" => {
            let d: LinearDoc = from_value(v, "linear character")?;
            if d.order == 0 {
                return Err(Error::Schema("character order must be positive".into()));
            }
            Ok(Character::Linear { order: d.order, coeffs: d.coeffs })
        }
        "table" => {
            let d: TableDoc = from_value(v, "table character")?;
            if d.order == 0 {
                return Err(Error::Schema("character order must be positive".into()));
            }
            let mut exps = BTreeMap::new();
            for (e, x) in &d.exps {
                if exps.insert(e.to_elem(), *x).is_some() {
                    return Err(Error::Schema(format!(
                        "character value listed twice for {:?}",
                        e.to_elem().0
                    )));
                }
            }
            Ok(Character::Table { order: d.order, exps })
        }
        other => Err(Error::Schema(format!(
            "unknown character kind {other:?}; expected trivial, linear or table"
        ))),
    }
}

/// Parses a coloring document. Explicit tables are run through the
/// shift-stability check before use; `scan` bounds that scan (default:
/// the table's own box bound).
pub fn parse_coloring(v: Value, scan_override: Option<u32>) -> Result<Coloring<AnySemigroup>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct AssociatedDoc {
        #[allow(dead_code)]
        kind: String,
        semigroup: Value,
        generators: Vec<ElemDoc>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ExplicitDoc {
        #[allow(dead_code)]
        kind: String,
        k: usize,
        bound: u32,
        entries: Vec<(Vec<u32>, u32)>,
        #[serde(default)]
        scan: Option<u32>,
    }
    match kind_of(&v, "coloring")?.as_str() {
        "associated" => {
            let d: AssociatedDoc = from_value(v, "associated coloring")?;
            let g = parse_semigroup(d.semigroup)?;
            let gens = d.generators.iter().map(ElemDoc::to_elem).collect();
            Coloring::associated(g, gens)
        }
        "explicit" => {
            let d: ExplicitDoc = from_value(v, "explicit coloring")?;
            let mut table = BTreeMap::new();
            for (point, color) in &d.entries {
                if table.insert(point.clone(), *color).is_some() {
                    return Err(Error::Schema(format!("point {point:?} colored twice")));
                }
            }
            let scan = scan_override.or(d.scan).unwrap_or(d.bound);
            Coloring::<AnySemigroup>::explicit(d.k, d.bound, table)?.validated(Some(scan))
        }
        other => Err(Error::Schema(format!(
            "unknown coloring kind {other:?}; expected associated or explicit"
        ))),
    }
}

// ---------------------------------------------------------------------
// Map families

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFamilyDoc {
    pub size: usize,
    pub maps: Vec<Vec<usize>>,
    pub partition: Vec<Vec<usize>>,
}

impl MapFamilyDoc {
    pub fn to_family(&self) -> Result<MapFamily> {
        MapFamily::new(self.size, self.maps.clone(), self.partition.clone())
    }
}

