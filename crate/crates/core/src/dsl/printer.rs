//! Pretty-printing of syntax trees back to `.catq` text.

use std::fmt::Write;

use crate::dsl::ast::*;
use crate::schema::{Mapping, Schema};
use crate::term::{Literal, Term};

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, item) in p.items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match item {
            Item::Decl(d) => print_decl(&mut out, d),
            Item::Directive(d) => print_directive(&mut out, d),
            Item::Error(_) => out.push_str("// unparsed\n"),
        }
    }
    out
}

fn print_decl(out: &mut String, d: &Decl) {
    let _ = write!(out, "{} {} = ", d.kind.keyword(), d.name.text);
    match &d.expr {
        Expr::Apply { op, args, .. } => {
            out.push_str(op.keyword());
            for a in args {
                let _ = write!(out, " {}", a.text);
            }
            out.push('\n');
        }
        Expr::Literal { over, block, .. } => {
            out.push_str("literal");
            if let Some(a) = over.first() {
                let _ = write!(out, " : {}", a.text);
            }
            if let Some(b) = over.get(1) {
                let _ = write!(out, " -> {}", b.text);
            }
            out.push_str(" {\n");
            for s in &block.sections {
                print_section(out, s);
            }
            out.push_str("}\n");
        }
    }
}

fn print_section(out: &mut String, s: &Section) {
    const IND: &str = "        ";
    match s {
        Section::Names(kind, names) => {
            let _ = writeln!(out, "    {}", kind.keyword());
            for n in names {
                let _ = writeln!(out, "{IND}{}", n.text);
            }
        }
        Section::Signatures(kind, sigs) => {
            let _ = writeln!(out, "    {}", kind.keyword());
            for sig in sigs {
                let names: Vec<_> = sig.names.iter().map(|n| n.text.as_str()).collect();
                let _ = write!(out, "{IND}{} : {}", names.join(" "), sig.from.text);
                if let Some(to) = &sig.to {
                    let _ = write!(out, " -> {}", to.text);
                }
                out.push('\n');
            }
        }
        Section::Equations(eqs) => {
            out.push_str("    equations\n");
            for e in eqs {
                out.push_str(IND);
                print_binder(out, "forall", &e.binder);
                let _ = writeln!(out, "{} = {}", term(&e.lhs), term(&e.rhs));
            }
        }
        Section::EntityMap(pairs) => {
            out.push_str("    entities\n");
            for (a, b) in pairs {
                let _ = writeln!(out, "{IND}{} -> {}", a.text, b.text);
            }
        }
        Section::SymbolMap(kind, pairs) => {
            let _ = writeln!(out, "    {}", kind.keyword());
            for (a, l) in pairs {
                let _ = write!(out, "{IND}{} -> ", a.text);
                print_binder(out, "lambda", &l.binder);
                let _ = writeln!(out, "{}", term(&l.body));
            }
        }
    }
}

fn print_binder(out: &mut String, keyword: &str, binder: &Option<(Ident, Option<Ident>)>) {
    if let Some((v, sort)) = binder {
        let _ = write!(out, "{keyword} {}", v.text);
        if let Some(s) = sort {
            let _ = write!(out, ":{}", s.text);
        }
        out.push_str(". ");
    }
}

/// Renders a term in the concrete syntax; strings are always quoted.
pub fn term(t: &TermAst) -> String {
    match t {
        TermAst::Bare(i) => i.text.clone(),
        TermAst::Str(s, _) => quote(s),
        TermAst::App(f, args, _) => {
            let args: Vec<_> = args.iter().map(term).collect();
            format!("{}({})", f.text, args.join(", "))
        }
    }
}

/// Renders an elaborated term; string literals are quoted.
pub fn core_term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.name.clone(),
        Term::Lit(Literal::Str(s)) => quote(s),
        Term::Lit(l) => l.to_string(),
        Term::App(f, args) if args.is_empty() => f.clone(),
        Term::App(f, args) => {
            let args: Vec<_> = args.iter().map(core_term).collect();
            format!("{f}({})", args.join(", "))
        }
    }
}

/// A schema as a `schema ... = literal` declaration.
pub fn schema_text(s: &Schema) -> String {
    let mut out = format!("schema {} = literal : {} {{\n", s.name, s.typeside.name);
    if !s.entities.is_empty() {
        out.push_str("    entities\n");
        for e in &s.entities {
            let _ = writeln!(out, "        {e}");
        }
    }
    for (title, syms) in [
        ("foreign_keys", &s.foreign_keys),
        ("attributes", &s.attributes),
    ] {
        if syms.is_empty() {
            continue;
        }
        let _ = writeln!(out, "    {title}");
        for f in syms {
            let _ = writeln!(
                out,
                "        {} : {} -> {}",
                f.name,
                f.domain().unwrap_or_default(),
                f.out
            );
        }
    }
    if !s.constraints.is_empty() {
        out.push_str("    equations\n");
        for e in &s.constraints {
            let binder = e
                .vars
                .first()
                .map(|v| format!("forall {}:{}. ", v.name, v.sort))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "        {binder}{} = {}",
                core_term(&e.lhs),
                core_term(&e.rhs)
            );
        }
    }
    out.push_str("}\n");
    out
}

/// A mapping as a `mapping ... = literal` declaration with lambda images.
pub fn mapping_text(m: &Mapping) -> String {
    let mut out = format!(
        "mapping {} = literal : {} -> {} {{\n",
        m.name, m.source.name, m.target.name
    );
    if !m.entity_map.is_empty() {
        out.push_str("    entities\n");
        for (a, b) in &m.entity_map {
            let _ = writeln!(out, "        {a} -> {b}");
        }
    }
    for (title, syms) in [
        ("foreign_keys", &m.source.foreign_keys),
        ("attributes", &m.source.attributes),
    ] {
        let images: Vec<_> = syms
            .iter()
            .filter_map(|f| m.symbol_map.get(&f.name).map(|img| (&f.name, img)))
            .collect();
        if images.is_empty() {
            continue;
        }
        let _ = writeln!(out, "    {title}");
        for (name, img) in images {
            let _ = writeln!(
                out,
                "        {name} -> lambda {}:{}. {}",
                img.var.name,
                img.var.sort,
                core_term(&img.body)
            );
        }
    }
    out.push_str("}\n");
    out
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn print_directive(out: &mut String, d: &Directive) {
    match d {
        Directive::Check(n) => {
            let _ = writeln!(out, "check {}", n.text);
        }
        Directive::Match {
            source,
            target,
            span,
            cutoff,
        } => {
            out.push_str("match ");
            if *span {
                out.push_str("span ");
            }
            let _ = write!(out, "{} -> {}", source.text, target.text);
            if let Some(c) = cutoff {
                let _ = write!(out, " cutoff {c}");
            }
            out.push('\n');
        }
        Directive::Invert { mapping, depth } => {
            let _ = write!(out, "invert {}", mapping.text);
            if let Some(d) = depth {
                let _ = write!(out, " depth {d}");
            }
            out.push('\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn printed_mapping_reparses() {
        use crate::dsl::{load, ElabOptions};
        let src = format!(
            "{}\n{}",
            crate::dsl::elaborate::tests::RUNNING,
            "schema C = literal : Ty { entities E foreign_keys g : E -> E equations forall v:E. g(g(v)) = v }"
        );
        let (env, d) = load(&src, "t", &ElabOptions::default());
        assert!(d.is_empty());
        let f = env.mapping("F").unwrap();
        let c = env.schema("C").unwrap();
        let again = format!(
            "typeside Ty = literal {{ types String Int }}\n{}{}{}{}",
            schema_text(env.schema("S").unwrap()),
            schema_text(env.schema("T").unwrap()),
            schema_text(c),
            mapping_text(f)
        );
        let (env2, d) = load(&again, "t", &ElabOptions::default());
        assert!(d.is_empty(), "{d:?}\n{again}");
        assert_eq!(env2.mapping("F").unwrap().as_ref(), f.as_ref());
        assert_eq!(env2.schema("C").unwrap().as_ref(), c.as_ref());
    }

    #[test]
    fn round_trip() {
        let src =
            "typeside Ty = literal { types String Int constants zero : Int equations zero = 0 }
            schema S = literal : Ty {
                entities N1 N2
                foreign_keys f : N1 -> N2
                attributes name : N1 -> String age : N2 -> Int
                equations forall x:N1. age(f(x)) = zero forall y. name(y) = \"a \\\"b\\\"\"
            }
            mapping F = literal : S -> S {
                entities N1 -> N1 N2 -> N2
                foreign_keys f -> lambda x:N1. f(x)
                attributes name -> name(x) age -> lambda x. age(x)
            }
            instance I = literal : S { generators 1 2 : N1 a : N2 equations f(1) = a }
            instance J = sigma F I
            mapping G = identity S
            check I
            match span S -> S cutoff 0.5
            invert F depth 2
            match S -> S
            invert G";
        let (p1, d) = parse(src, "t");
        assert!(d.is_empty(), "{d:?}");
        let text = print_program(&p1);
        let (p2, d) = parse(&text, "t");
        assert!(d.is_empty(), "{d:?}\n{text}");
        assert_eq!(p1, p2);
        assert_eq!(print_program(&p2), text);
    }
}
