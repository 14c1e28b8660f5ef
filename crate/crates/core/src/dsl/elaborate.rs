//! Elaboration: name resolution, validation, and evaluation of derived
//! instances and mappings, in declaration order.

use std::collections::HashMap;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::dsl::ast::*;
use crate::dsl::{Diagnostic, DiagnosticKind};
use crate::error::Error;
use crate::matcher::{match_mapping, match_span, MatchResult, SimilarityConfig};
use crate::migrate::{
    coproduct, delta, invert_mapping, pi, sigma, InversionBounds, MigrationResult,
};
use crate::schema::{
    compose_mappings, validate_instance, validate_mapping_with, validate_schema, validate_typeside,
    InstancePresentation, Mapping, Schema, SymbolImage, Typeside,
};
use crate::term::{
    build_term_model, Collision, Equation, FunctionSymbol, Literal, SaturationLimits, SortKind,
    SymbolFlavor, Term, TermModel, Var, INT_TYPE, STRING_TYPE,
};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElabOptions {
    pub limits: SaturationLimits,
    pub inversion: InversionBounds,
    pub matcher: SimilarityConfig,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub presentation: Arc<InstancePresentation>,
    pub model: Arc<TermModel>,
}

#[derive(Debug, Clone)]
pub enum Object {
    Typeside(Arc<Typeside>),
    Schema(Arc<Schema>),
    Instance(Instance),
    Mapping(Arc<Mapping>),
}

impl Object {
    fn kind(&self) -> &'static str {
        match self {
            Object::Typeside(_) => "typeside",
            Object::Schema(_) => "schema",
            Object::Instance(_) => "instance",
            Object::Mapping(_) => "mapping",
        }
    }
}

/// The result of a directive.
#[derive(Debug, Clone)]
pub enum Outcome {
    Check {
        name: String,
        collision: Option<Collision>,
    },
    Match {
        source: String,
        target: String,
        result: Box<MatchResult>,
    },
    Invert {
        mapping: String,
        inverse: Option<Mapping>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Environment {
    objects: IndexMap<String, Object>,
    pub outcomes: Vec<Outcome>,
}

impl Environment {
    pub fn get(&self, name: &str) -> Option<&Object> {
        self.objects.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(String::as_str)
    }

    pub fn objects(&self) -> impl Iterator<Item = (&str, &Object)> {
        self.objects.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn typeside(&self, name: &str) -> Option<&Arc<Typeside>> {
        match self.get(name)? {
            Object::Typeside(t) => Some(t),
            _ => None,
        }
    }

    pub fn schema(&self, name: &str) -> Option<&Arc<Schema>> {
        match self.get(name)? {
            Object::Schema(s) => Some(s),
            _ => None,
        }
    }

    pub fn instance(&self, name: &str) -> Option<&Instance> {
        match self.get(name)? {
            Object::Instance(i) => Some(i),
            _ => None,
        }
    }

    pub fn mapping(&self, name: &str) -> Option<&Arc<Mapping>> {
        match self.get(name)? {
            Object::Mapping(m) => Some(m),
            _ => None,
        }
    }

    pub fn instances(&self) -> impl Iterator<Item = (&str, &Instance)> {
        self.objects.iter().filter_map(|(k, v)| match v {
            Object::Instance(i) => Some((k.as_str(), i)),
            _ => None,
        })
    }

    /// The first inconsistent instance, in declaration order.
    pub fn first_collision(&self) -> Option<(&str, Collision)> {
        self.instances()
            .find_map(|(n, i)| i.model.collision().map(|c| (n, c)))
    }
}

/// Elaborates every item of `program`. Items that fail are skipped and
/// reported; later references to them fail name resolution.
pub fn elaborate(program: &Program, opts: &ElabOptions) -> (Environment, Vec<Diagnostic>) {
    let mut env = Environment::default();
    let mut diags = Vec::new();
    for item in &program.items {
        let result = match item {
            Item::Decl(d) => elaborate_decl(&env, d, opts).map(|obj| {
                env.objects.insert(d.name.text.clone(), obj);
            }),
            Item::Directive(d) => run_directive(&env, d, opts).map(|o| env.outcomes.push(o)),
            Item::Error(_) => Ok(()),
        };
        if let Err(d) = result {
            diags.push(d);
        }
    }
    (env, diags)
}

type Elab<T> = Result<T, Diagnostic>;

fn article(kind: &str) -> String {
    if kind.starts_with('i') {
        format!("an {kind}")
    } else {
        format!("a {kind}")
    }
}

fn err(span: &SourceSpan, e: Error) -> Diagnostic {
    Diagnostic::from_error(span.clone(), &e)
}

fn lookup<'a>(env: &'a Environment, id: &Ident, kind: &str) -> Elab<&'a Object> {
    let obj = env.get(&id.text).ok_or_else(|| {
        Diagnostic::name(id.span.clone(), format!("`{}` is not declared", id.text))
    })?;
    if obj.kind() != kind {
        return Err(Diagnostic::name(
            id.span.clone(),
            format!(
                "`{}` is {}, not {}",
                id.text,
                article(obj.kind()),
                article(kind)
            ),
        ));
    }
    Ok(obj)
}

fn typeside_ref(env: &Environment, id: &Ident) -> Elab<Arc<Typeside>> {
    lookup(env, id, "typeside")?;
    Ok(Arc::clone(env.typeside(&id.text).expect("kind checked")))
}

fn schema_ref(env: &Environment, id: &Ident) -> Elab<Arc<Schema>> {
    lookup(env, id, "schema")?;
    Ok(Arc::clone(env.schema(&id.text).expect("kind checked")))
}

fn instance_ref<'a>(env: &'a Environment, id: &Ident) -> Elab<&'a Instance> {
    lookup(env, id, "instance")?;
    Ok(env.instance(&id.text).expect("kind checked"))
}

fn mapping_ref(env: &Environment, id: &Ident) -> Elab<Arc<Mapping>> {
    lookup(env, id, "mapping")?;
    Ok(Arc::clone(env.mapping(&id.text).expect("kind checked")))
}

fn elaborate_decl(env: &Environment, d: &Decl, opts: &ElabOptions) -> Elab<Object> {
    if env.get(&d.name.text).is_some() {
        return Err(Diagnostic::name(
            d.name.span.clone(),
            format!("`{}` is already declared", d.name.text),
        ));
    }
    let name = d.name.text.as_str();
    match (&d.expr, d.kind) {
        (Expr::Literal { over, block, span }, kind) => {
            let want = match kind {
                DeclKind::Typeside => 0,
                DeclKind::Schema | DeclKind::Instance => 1,
                DeclKind::Mapping => 2,
            };
            if over.len() != want {
                let shape = ["literal", "literal : Ty", "literal : S -> T"][want];
                return Err(Diagnostic::syntax(
                    span.clone(),
                    format!(
                        "a {} literal is written `{shape} {{ ... }}`",
                        kind.keyword()
                    ),
                    vec![],
                ));
            }
            match kind {
                DeclKind::Typeside => typeside_literal(name, block, span).map(Object::Typeside),
                DeclKind::Schema => {
                    let ts = typeside_ref(env, &over[0])?;
                    schema_literal(name, ts, block, span).map(Object::Schema)
                }
                DeclKind::Instance => {
                    let s = schema_ref(env, &over[0])?;
                    let pres = instance_literal(name, s, block, span)?;
                    let model = build_term_model(Arc::clone(&pres), opts.limits)
                        .map_err(|e| err(span, e))?;
                    Ok(Object::Instance(Instance {
                        presentation: pres,
                        model: Arc::new(model),
                    }))
                }
                DeclKind::Mapping => {
                    let s = schema_ref(env, &over[0])?;
                    let t = schema_ref(env, &over[1])?;
                    let m = mapping_literal(name, s, t, block, span)?;
                    validate_mapping_with(&m, opts.limits).map_err(|e| err(span, e))?;
                    Ok(Object::Mapping(Arc::new(m)))
                }
            }
        }
        (Expr::Apply { op, args, span }, DeclKind::Instance) => {
            let migrated = |r: MigrationResult| {
                let model = Arc::new(r.output.with_name(name));
                Object::Instance(Instance {
                    presentation: Arc::clone(model.presentation()),
                    model,
                })
            };
            match op {
                Operation::Sigma => {
                    let f = mapping_ref(env, &args[0])?;
                    let i = instance_ref(env, &args[1])?;
                    sigma(&f, &i.presentation, opts.limits)
                        .map(migrated)
                        .map_err(|e| err(span, e))
                }
                Operation::Delta => {
                    let f = mapping_ref(env, &args[0])?;
                    let j = instance_ref(env, &args[1])?;
                    delta(&f, &j.model, opts.limits)
                        .map(migrated)
                        .map_err(|e| err(span, e))
                }
                Operation::Pi => {
                    let f = mapping_ref(env, &args[0])?;
                    let i = instance_ref(env, &args[1])?;
                    pi(&f, &i.model, opts.limits)
                        .map(migrated)
                        .map_err(|e| err(span, e))
                }
                Operation::Coproduct => {
                    let i = instance_ref(env, &args[0])?;
                    let j = instance_ref(env, &args[1])?;
                    let mut sum =
                        coproduct(&i.presentation, &j.presentation).map_err(|e| err(span, e))?;
                    sum.name = name.to_string();
                    let pres = Arc::new(sum);
                    let model = build_term_model(Arc::clone(&pres), opts.limits)
                        .map_err(|e| err(span, e))?;
                    Ok(Object::Instance(Instance {
                        presentation: pres,
                        model: Arc::new(model),
                    }))
                }
                _ => Err(wrong_operation(*op, d.kind, span)),
            }
        }
        (Expr::Apply { op, args, span }, DeclKind::Mapping) => match op {
            Operation::Compose => {
                let f = mapping_ref(env, &args[0])?;
                let g = mapping_ref(env, &args[1])?;
                let mut h = compose_mappings(&f, &g).map_err(|e| err(span, e))?;
                h.name = name.to_string();
                Ok(Object::Mapping(Arc::new(h)))
            }
            Operation::Identity => {
                let s = schema_ref(env, &args[0])?;
                let mut h = Mapping::identity(&s);
                h.name = name.to_string();
                Ok(Object::Mapping(Arc::new(h)))
            }
            _ => Err(wrong_operation(*op, d.kind, span)),
        },
        (Expr::Apply { op, span, .. }, kind) => Err(wrong_operation(*op, kind, span)),
    }
}

fn wrong_operation(op: Operation, kind: DeclKind, span: &SourceSpan) -> Diagnostic {
    Diagnostic {
        kind: DiagnosticKind::Validation,
        message: format!(
            "`{}` does not produce {}",
            op.keyword(),
            article(kind.keyword())
        ),
        span: span.clone(),
        expected: Vec::new(),
    }
}

fn typeside_literal(name: &str, block: &Block, span: &SourceSpan) -> Elab<Arc<Typeside>> {
    let mut ts = Typeside::new(name);
    for s in &block.sections {
        match s {
            Section::Names(SectionKind::Types, names) => {
                ts.types.extend(names.iter().map(|n| n.text.clone()));
            }
            Section::Signatures(SectionKind::Constants, sigs) => {
                for sig in sigs {
                    for n in &sig.names {
                        ts.constants.push(FunctionSymbol::constant(
                            n.text.clone(),
                            sig.from.text.clone(),
                            SymbolFlavor::TypesideConstant,
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    let mut equations = Vec::new();
    for s in &block.sections {
        if let Section::Equations(eqs) = s {
            let scope = Scope::new(&ts, None, None);
            for e in eqs {
                equations.push(scope.equation(e)?);
            }
        }
    }
    ts.equations = equations;
    validate_typeside(&ts).map_err(|e| err(span, e))?;
    Ok(Arc::new(ts))
}

fn schema_literal(
    name: &str,
    ts: Arc<Typeside>,
    block: &Block,
    span: &SourceSpan,
) -> Elab<Arc<Schema>> {
    let mut b = Schema::builder(name, Arc::clone(&ts));
    for s in &block.sections {
        match s {
            Section::Names(SectionKind::Entities, names) => {
                for n in names {
                    b = b.entity(&n.text);
                }
            }
            Section::Signatures(kind, sigs) => {
                for sig in sigs {
                    let to = sig.to.as_ref().map(|t| t.text.as_str()).unwrap_or_default();
                    for n in &sig.names {
                        b = match kind {
                            SectionKind::ForeignKeys => b.foreign_key(&n.text, &sig.from.text, to),
                            _ => b.attribute(&n.text, &sig.from.text, to),
                        };
                    }
                }
            }
            _ => {}
        }
    }
    let bare = b.build();
    let mut constraints = Vec::new();
    for s in &block.sections {
        if let Section::Equations(eqs) = s {
            for e in eqs {
                let Some((v, sort)) = &e.binder else {
                    return Err(err(
                        &e.span,
                        Error::BadConstraintShape("a constraint needs `forall v:Entity.`".into()),
                    ));
                };
                let sort = match sort {
                    Some(s) => s.text.clone(),
                    None => infer_var_sort(&bare, &v.text, &[&e.lhs, &e.rhs]).ok_or_else(|| {
                        Diagnostic::name(
                            v.span.clone(),
                            format!("cannot infer the sort of `{}`", v.text),
                        )
                    })?,
                };
                let scope = Scope::new(&ts, Some(&bare), Some((&v.text, &sort)));
                let eq = scope.equation(e)?;
                constraints.push(Equation::forall(
                    Var::new(v.text.clone(), sort),
                    eq.lhs,
                    eq.rhs,
                ));
            }
        }
    }
    let schema = Schema::new(
        name,
        ts,
        bare.entities,
        bare.foreign_keys,
        bare.attributes,
        constraints,
    );
    validate_schema(&schema).map_err(|e| err(span, e))?;
    Ok(Arc::new(schema))
}

/// The domain of the first symbol applied directly to `var`.
fn infer_var_sort(schema: &Schema, var: &str, terms: &[&TermAst]) -> Option<String> {
    fn go(schema: &Schema, var: &str, t: &TermAst) -> Option<String> {
        match t {
            TermAst::App(f, args, _) => {
                if let [TermAst::Bare(a)] = args.as_slice() {
                    if a.text == var {
                        let sym = schema
                            .foreign_key(&f.text)
                            .or_else(|| schema.attribute(&f.text))?;
                        return sym.domain().map(str::to_string);
                    }
                }
                args.iter().find_map(|a| go(schema, var, a))
            }
            _ => None,
        }
    }
    terms.iter().find_map(|t| go(schema, var, t))
}

fn instance_literal(
    name: &str,
    schema: Arc<Schema>,
    block: &Block,
    span: &SourceSpan,
) -> Elab<Arc<InstancePresentation>> {
    let mut gens = Vec::new();
    for s in &block.sections {
        if let Section::Signatures(SectionKind::Generators, sigs) = s {
            for sig in sigs {
                for n in &sig.names {
                    gens.push(FunctionSymbol::constant(
                        n.text.clone(),
                        sig.from.text.clone(),
                        SymbolFlavor::Generator,
                    ));
                }
            }
        }
    }
    let mut scope = Scope::new(&schema.typeside, Some(&schema), None);
    scope.generators = gens
        .iter()
        .map(|g| (g.name.as_str(), g.out.as_str()))
        .collect();
    let mut eqs = Vec::new();
    for s in &block.sections {
        if let Section::Equations(list) = s {
            for e in list {
                eqs.push(scope.equation(e)?);
            }
        }
    }
    let pres = InstancePresentation::new(name, Arc::clone(&schema), gens, eqs);
    validate_instance(&pres).map_err(|e| err(span, e))?;
    Ok(Arc::new(pres))
}

fn mapping_literal(
    name: &str,
    s: Arc<Schema>,
    t: Arc<Schema>,
    block: &Block,
    span: &SourceSpan,
) -> Elab<Mapping> {
    let mut m = Mapping::new(name, Arc::clone(&s), Arc::clone(&t));
    for sec in &block.sections {
        if let Section::EntityMap(pairs) = sec {
            for (a, b) in pairs {
                if !s.is_entity(&a.text) {
                    return Err(Diagnostic::name(
                        a.span.clone(),
                        format!("`{}` is not an entity of `{}`", a.text, s.name),
                    ));
                }
                if !t.is_entity(&b.text) {
                    return Err(Diagnostic::name(
                        b.span.clone(),
                        format!("`{}` is not an entity of `{}`", b.text, t.name),
                    ));
                }
                m.entity_map.insert(a.text.clone(), b.text.clone());
            }
        }
    }
    for sec in &block.sections {
        let Section::SymbolMap(_, pairs) = sec else {
            continue;
        };
        for (sym_id, lambda) in pairs {
            let sym = s
                .foreign_key(&sym_id.text)
                .or_else(|| s.attribute(&sym_id.text))
                .ok_or_else(|| {
                    Diagnostic::name(
                        sym_id.span.clone(),
                        format!("`{}` is not a symbol of `{}`", sym_id.text, s.name),
                    )
                })?;
            let dom = sym.domain().unwrap_or_default();
            let var_sort = m.entity(dom).map_err(|e| err(&sym_id.span, e))?.to_string();
            let out = m.sort(&sym.out).map_err(|e| err(&sym_id.span, e))?;
            let var_name = match &lambda.binder {
                Some((v, sort)) => {
                    if let Some(srt) = sort {
                        if srt.text != var_sort {
                            return Err(err(
                                &srt.span,
                                Error::sort_mismatch(
                                    format!("variable of `{}`", sym_id.text),
                                    var_sort,
                                    srt.text.clone(),
                                ),
                            ));
                        }
                    }
                    v.text.clone()
                }
                None => implicit_var(&t, &lambda.body)
                    .map_err(|m| Diagnostic::name(lambda.body.span().clone(), m))?,
            };
            let scope = Scope::new(&t.typeside, Some(&t), Some((&var_name, &var_sort)));
            let body = scope.term(&lambda.body, Some(&out))?;
            m.symbol_map.insert(
                sym_id.text.clone(),
                SymbolImage::new(Var::new(var_name, var_sort), body),
            );
        }
    }
    let _ = span;
    Ok(m)
}

/// The variable of a lambda-free image: its only identifier that is not a
/// symbol or constant of the target.
fn implicit_var(t: &Schema, body: &TermAst) -> Result<String, String> {
    fn collect<'a>(t: &Schema, body: &'a TermAst, out: &mut Vec<&'a str>) {
        match body {
            TermAst::Bare(i) => {
                let numeric = i
                    .text
                    .starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+');
                let constant = t.typeside.constants.iter().any(|c| c.name == i.text);
                if !numeric && !constant && !out.contains(&i.text.as_str()) {
                    out.push(&i.text);
                }
            }
            TermAst::Str(..) => {}
            TermAst::App(_, args, _) => args.iter().for_each(|a| collect(t, a, out)),
        }
    }
    let mut found = Vec::new();
    collect(t, body, &mut found);
    match found.as_slice() {
        [] => Ok("x".into()),
        [v] => Ok(v.to_string()),
        many => Err(format!(
            "cannot tell which of {} is the variable; write `lambda v:E. ...`",
            many.iter()
                .map(|v| format!("`{v}`"))
                .collect::<Vec<_>>()
                .join(", ")
        )),
    }
}

/// What bare names can refer to while resolving a term.
struct Scope<'a> {
    typeside: &'a Typeside,
    schema: Option<&'a Schema>,
    generators: HashMap<&'a str, &'a str>,
    var: Option<(&'a str, &'a str)>,
}

impl<'a> Scope<'a> {
    fn new(
        typeside: &'a Typeside,
        schema: Option<&'a Schema>,
        var: Option<(&'a str, &'a str)>,
    ) -> Self {
        Scope {
            typeside,
            schema,
            generators: HashMap::new(),
            var,
        }
    }

    fn unary(&self, name: &str) -> Option<&'a FunctionSymbol> {
        let s = self.schema?;
        s.foreign_key(name).or_else(|| s.attribute(name))
    }

    fn constant_sort(&self, name: &str) -> Option<&str> {
        if let Some(s) = self.generators.get(name) {
            return Some(s);
        }
        self.typeside
            .constants
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.out.as_str())
    }

    /// The sort of `t` when it can be told without an expected sort.
    fn hint(&self, t: &TermAst) -> Option<String> {
        match t {
            TermAst::Str(..) => Some(STRING_TYPE.into()),
            TermAst::App(f, _, _) => self.unary(&f.text).map(|s| s.out.clone()),
            TermAst::Bare(i) => {
                if let Some((v, s)) = self.var {
                    if v == i.text {
                        return Some(s.into());
                    }
                }
                self.constant_sort(&i.text).map(str::to_string)
            }
        }
    }

    fn equation(&self, e: &EquationAst) -> Elab<Equation> {
        let expected = self.hint(&e.lhs).or_else(|| self.hint(&e.rhs)).or_else(|| {
            let numeric = |t: &TermAst| matches!(t, TermAst::Bare(i) if Literal::parse_for(INT_TYPE, &i.text).is_some());
            (numeric(&e.lhs) || numeric(&e.rhs)).then(|| INT_TYPE.to_string())
        });
        let Some(expected) = expected else {
            return Err(Diagnostic::name(
                e.span.clone(),
                "cannot infer the sort of this equation; neither side is a known name",
            ));
        };
        let lhs = self.term(&e.lhs, Some(&expected))?;
        let rhs = self.term(&e.rhs, Some(&expected))?;
        Ok(Equation::ground(lhs, rhs))
    }

    fn term(&self, t: &TermAst, expected: Option<&str>) -> Elab<Term> {
        let (term, sort) = self.resolve(t, expected)?;
        if let Some(want) = expected {
            if sort != want {
                return Err(err(
                    t.span(),
                    Error::sort_mismatch(
                        format!("term `{}`", crate::dsl::printer::term(t)),
                        want,
                        sort,
                    ),
                ));
            }
        }
        Ok(term)
    }

    fn resolve(&self, t: &TermAst, expected: Option<&str>) -> Elab<(Term, String)> {
        match t {
            TermAst::Str(s, _) => Ok((Term::lit(Literal::str(s.clone())), STRING_TYPE.into())),
            TermAst::App(f, args, span) => {
                let sym = self.unary(&f.text).ok_or_else(|| {
                    Diagnostic::name(
                        f.span.clone(),
                        format!("`{}` is not a foreign key or attribute", f.text),
                    )
                })?;
                let [arg] = args.as_slice() else {
                    return Err(err(
                        span,
                        Error::Invalid(format!(
                            "`{}` takes one argument, got {}",
                            f.text,
                            args.len()
                        )),
                    ));
                };
                let dom = sym.domain().unwrap_or_default();
                let a = self.term(arg, Some(dom))?;
                Ok((Term::app(f.text.clone(), a), sym.out.clone()))
            }
            TermAst::Bare(i) => {
                if let Some((v, s)) = self.var {
                    if v == i.text {
                        return Ok((Term::var(v, s), s.to_string()));
                    }
                }
                if let Some(want) = expected {
                    if self.typeside.builtin_of(want).is_some() {
                        if let Some(l) = Literal::parse_for(want, &i.text) {
                            return Ok((Term::lit(l), want.to_string()));
                        }
                    }
                }
                if let Some(s) = self.constant_sort(&i.text) {
                    return Ok((Term::constant(i.text.clone()), s.to_string()));
                }
                if expected.is_none() {
                    if let Some(l) = Literal::parse_for(INT_TYPE, &i.text) {
                        return Ok((Term::lit(l), INT_TYPE.into()));
                    }
                }
                let hint = match expected.and_then(|e| self.sort_kind(e)) {
                    Some(SortKind::Entity) => " (no generator has that name)",
                    _ => "",
                };
                Err(Diagnostic::name(
                    i.span.clone(),
                    format!("`{}` is not declared{hint}", i.text),
                ))
            }
        }
    }

    fn sort_kind(&self, s: &str) -> Option<SortKind> {
        use crate::term::Signature;
        match self.schema {
            Some(schema) => schema.sort_kind(s),
            None => self.typeside.sort_kind(s),
        }
    }
}

fn run_directive(env: &Environment, d: &Directive, opts: &ElabOptions) -> Elab<Outcome> {
    match d {
        Directive::Check(id) => {
            let obj = env.get(&id.text).ok_or_else(|| {
                Diagnostic::name(id.span.clone(), format!("`{}` is not declared", id.text))
            })?;
            let collision = match obj {
                Object::Instance(i) => i.model.collision(),
                _ => None,
            };
            Ok(Outcome::Check {
                name: id.text.clone(),
                collision,
            })
        }
        Directive::Match {
            source,
            target,
            span,
            cutoff,
        } => {
            let s = schema_ref(env, source)?;
            let t = schema_ref(env, target)?;
            let mut cfg = opts.matcher;
            if let Some(c) = cutoff {
                let value: f64 = c.parse().map_err(|_| {
                    Diagnostic::syntax(source.span.clone(), format!("bad cutoff `{c}`"), vec![])
                })?;
                cfg = SimilarityConfig {
                    case_sensitive: cfg.case_sensitive,
                    ..SimilarityConfig::new(value).map_err(|e| err(&source.span, e))?
                };
            }
            let result = if *span {
                match_span(&s, &t, &cfg)
            } else {
                match_mapping(&s, &t, &cfg)
            }
            .map_err(|e| err(&source.span, e))?;
            Ok(Outcome::Match {
                source: source.text.clone(),
                target: target.text.clone(),
                result: Box::new(result),
            })
        }
        Directive::Invert { mapping, depth } => {
            let f = mapping_ref(env, mapping)?;
            let mut bounds = opts.inversion;
            if let Some(d) = depth {
                bounds.depth = d.parse().map_err(|_| {
                    Diagnostic::syntax(mapping.span.clone(), format!("bad depth `{d}`"), vec![])
                })?;
            }
            let inverse = invert_mapping(&f, bounds).map_err(|e| err(&mapping.span, e))?;
            Ok(Outcome::Invert {
                mapping: mapping.text.clone(),
                inverse,
            })
        }
    }
}
