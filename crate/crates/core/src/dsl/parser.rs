//! Recursive-descent parser. Never fails outright: syntax errors become
//! diagnostics and the offending item becomes [`Item::Error`].

use crate::dsl::ast::*;
use crate::dsl::lexer::{tokenize, Token, TokenKind};
use crate::dsl::Diagnostic;

const DECL_KEYWORDS: [&str; 4] = ["typeside", "schema", "instance", "mapping"];
const DIRECTIVE_KEYWORDS: [&str; 3] = ["check", "match", "invert"];
const EXTERNAL_SECTIONS: [&str; 2] = ["java_types", "java_constants"];

/// Parses a whole program. The returned program contains every item that
/// parsed; the diagnostics describe the rest.
pub fn parse(src: &str, file: &str) -> (Program, Vec<Diagnostic>) {
    let (tokens, diags) = tokenize(src, file);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags,
    };
    let program = p.program();
    (program, p.diags)
}

struct Failed;

type PResult<T> = Result<T, Failed>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, k: usize) -> &TokenKind {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), TokenKind::Ident(s) if s == word)
    }

    fn fail<T>(
        &mut self,
        span: SourceSpan,
        message: impl Into<String>,
        expected: &[&str],
    ) -> PResult<T> {
        self.diags.push(Diagnostic::syntax(
            span,
            message,
            expected.iter().map(|s| s.to_string()).collect(),
        ));
        Err(Failed)
    }

    fn unexpected<T>(&mut self, expected: &[&str]) -> PResult<T> {
        let found = self.peek().describe();
        let span = self.span();
        self.fail(span, format!("unexpected {found}"), expected)
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Token> {
        if *self.peek() == kind {
            Ok(self.bump())
        } else {
            self.unexpected(&[what])
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<Token> {
        if self.is_word(word) {
            Ok(self.bump())
        } else {
            self.unexpected(&[&format!("`{word}`")])
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            TokenKind::Ident(s) => {
                let t = self.bump();
                Ok(Ident::new(s, t.span))
            }
            _ => self.unexpected(&[what]),
        }
    }

    /// An identifier directly after `->`; a missing one is blamed on the
    /// arrow.
    fn ident_after_arrow(&mut self, what: &str) -> PResult<Ident> {
        if matches!(self.peek(), TokenKind::Ident(_)) {
            return self.ident(what);
        }
        let arrow = self.prev_span();
        let found = self.peek().describe();
        self.fail(
            arrow,
            format!("dangling `->`: expected {what}, found {found}"),
            &[what],
        )
    }

    /// Identifiers and numbers both name things.
    fn name(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            TokenKind::Ident(s) | TokenKind::Number(s) => {
                let t = self.bump();
                Ok(Ident::new(s, t.span))
            }
            _ => self.unexpected(&[what]),
        }
    }

    fn at_name(&self) -> bool {
        matches!(self.peek(), TokenKind::Ident(_) | TokenKind::Number(_)) && !self.at_section_end()
    }

    fn at_section_end(&self) -> bool {
        match self.peek() {
            TokenKind::RBrace | TokenKind::Eof => true,
            TokenKind::Ident(s) => {
                SectionKind::from_keyword(s).is_some() || EXTERNAL_SECTIONS.contains(&s.as_str())
            }
            _ => false,
        }
    }

    fn at_item_start(&self) -> bool {
        match self.peek() {
            TokenKind::Ident(s) if DECL_KEYWORDS.contains(&s.as_str()) => {
                matches!(self.peek_at(1), TokenKind::Ident(_))
                    && matches!(self.peek_at(2), TokenKind::Eq)
            }
            TokenKind::Ident(s) => DIRECTIVE_KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn program(&mut self) -> Program {
        let mut items = Vec::new();
        while *self.peek() != TokenKind::Eof {
            let start = self.span();
            let start_pos = self.pos;
            let item = match self.peek().clone() {
                TokenKind::Ident(w) if DECL_KEYWORDS.contains(&w.as_str()) => {
                    self.decl().map(Item::Decl)
                }
                TokenKind::Ident(w) if DIRECTIVE_KEYWORDS.contains(&w.as_str()) => {
                    self.directive().map(Item::Directive)
                }
                _ => self.unexpected(&["a declaration", "a directive"]),
            };
            match item {
                Ok(item) => items.push(item),
                Err(Failed) => {
                    if self.pos == start_pos || !self.at_item_start() {
                        self.bump();
                    }
                    while *self.peek() != TokenKind::Eof && !self.at_item_start() {
                        self.bump();
                    }
                    items.push(Item::Error(start.to(&self.prev_span())));
                }
            }
        }
        Program { items }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let kw = self.bump();
        let kind = match &kw.kind {
            TokenKind::Ident(w) => match w.as_str() {
                "typeside" => DeclKind::Typeside,
                "schema" => DeclKind::Schema,
                "instance" => DeclKind::Instance,
                _ => DeclKind::Mapping,
            },
            _ => unreachable!("decl called on a keyword"),
        };
        let name = self.ident("a name")?;
        self.expect(TokenKind::Eq, "`=`")?;
        let expr = self.expr(kind)?;
        Ok(Decl {
            kind,
            name,
            span: kw.span.to(&self.prev_span()),
            expr,
        })
    }

    fn expr(&mut self, kind: DeclKind) -> PResult<Expr> {
        let start = self.span();
        let word = match self.peek() {
            TokenKind::Ident(w) => w.clone(),
            _ => return self.unexpected(&["`literal`", "an operation"]),
        };
        if word == "literal" {
            self.bump();
            let mut over = Vec::new();
            if *self.peek() == TokenKind::Colon {
                self.bump();
                over.push(self.ident("a name")?);
                if *self.peek() == TokenKind::Arrow {
                    self.bump();
                    over.push(self.ident_after_arrow("a name")?);
                }
            }
            self.expect(TokenKind::LBrace, "`{`")?;
            let block = self.block(kind)?;
            self.expect(TokenKind::RBrace, "`}`")?;
            return Ok(Expr::Literal {
                over,
                block,
                span: start.to(&self.prev_span()),
            });
        }
        let Some(op) = Operation::from_keyword(&word) else {
            return self.unexpected(&[
                "`literal`",
                "`sigma`",
                "`delta`",
                "`pi`",
                "`coproduct`",
                "`compose`",
                "`identity`",
            ]);
        };
        self.bump();
        let mut args = Vec::new();
        for _ in 0..op.arity() {
            args.push(self.ident("a name")?);
        }
        Ok(Expr::Apply {
            op,
            args,
            span: start.to(&self.prev_span()),
        })
    }

    fn block(&mut self, kind: DeclKind) -> PResult<Block> {
        let mut sections = Vec::new();
        loop {
            let word = match self.peek() {
                TokenKind::RBrace | TokenKind::Eof => return Ok(Block { sections }),
                TokenKind::Ident(w) => w.clone(),
                _ => return self.unexpected(&["a section keyword", "`}`"]),
            };
            if EXTERNAL_SECTIONS.contains(&word.as_str()) {
                let span = self.span();
                self.diags.push(Diagnostic::syntax(
                    span,
                    "external bindings unsupported; use builtin String/Int",
                    vec![],
                ));
                self.bump();
                while !self.at_section_end() {
                    self.bump();
                }
                continue;
            }
            let Some(section) = SectionKind::from_keyword(&word) else {
                return self.unexpected(&["a section keyword", "`}`"]);
            };
            if !allowed(kind, section) {
                let span = self.span();
                return self.fail(
                    span,
                    format!("`{word}` is not a section of a {}", kind.keyword()),
                    &[],
                );
            }
            self.bump();
            sections.push(self.section(kind, section)?);
        }
    }

    fn section(&mut self, kind: DeclKind, section: SectionKind) -> PResult<Section> {
        use SectionKind::*;
        Ok(match (kind, section) {
            (DeclKind::Mapping, Entities) => {
                let mut pairs = Vec::new();
                while self.at_name() {
                    let from = self.ident("an entity")?;
                    self.expect(TokenKind::Arrow, "`->`")?;
                    let to = self.ident_after_arrow("an entity")?;
                    pairs.push((from, to));
                }
                Section::EntityMap(pairs)
            }
            (DeclKind::Mapping, _) => {
                let mut pairs = Vec::new();
                while self.at_name() {
                    let from = self.ident("a symbol")?;
                    self.expect(TokenKind::Arrow, "`->`")?;
                    pairs.push((from, self.lambda()?));
                }
                Section::SymbolMap(section, pairs)
            }
            (_, Types | Entities) => {
                let mut names = Vec::new();
                while self.at_name() {
                    names.push(self.ident("a name")?);
                }
                Section::Names(section, names)
            }
            (_, Equations) => {
                let mut eqs = Vec::new();
                while !self.at_section_end() {
                    eqs.push(self.equation(kind == DeclKind::Schema)?);
                }
                Section::Equations(eqs)
            }
            (_, _) => {
                let arrow = matches!(section, ForeignKeys | Attributes);
                let mut sigs = Vec::new();
                while self.at_name() {
                    let mut names = vec![self.name("a name")?];
                    while *self.peek() != TokenKind::Colon {
                        if !self.at_name() {
                            return self.unexpected(&["a name", "`:`"]);
                        }
                        names.push(self.name("a name")?);
                    }
                    self.bump();
                    let from = self.ident("a sort")?;
                    let to = if arrow {
                        self.expect(TokenKind::Arrow, "`->`")?;
                        Some(self.ident_after_arrow("a sort")?)
                    } else {
                        None
                    };
                    sigs.push(Signature { names, from, to });
                }
                Section::Signatures(section, sigs)
            }
        })
    }

    fn binder(&mut self, keyword: &str) -> PResult<Option<(Ident, Option<Ident>)>> {
        if !self.is_word(keyword) {
            return Ok(None);
        }
        self.expect_word(keyword)?;
        let var = self.ident("a variable")?;
        let sort = if *self.peek() == TokenKind::Colon {
            self.bump();
            Some(self.ident("a sort")?)
        } else {
            None
        };
        self.expect(TokenKind::Dot, "`.`")?;
        Ok(Some((var, sort)))
    }

    fn equation(&mut self, quantified: bool) -> PResult<EquationAst> {
        let start = self.span();
        let binder = if quantified {
            self.binder("forall")?
        } else {
            None
        };
        let lhs = self.term()?;
        self.expect(TokenKind::Eq, "`=`")?;
        let rhs = self.term()?;
        Ok(EquationAst {
            binder,
            lhs,
            rhs,
            span: start.to(&self.prev_span()),
        })
    }

    fn lambda(&mut self) -> PResult<LambdaAst> {
        let binder = self.binder("lambda")?;
        let body = self.term()?;
        Ok(LambdaAst { binder, body })
    }

    fn term(&mut self) -> PResult<TermAst> {
        match self.peek().clone() {
            TokenKind::Str(s) => {
                let t = self.bump();
                Ok(TermAst::Str(s, t.span))
            }
            TokenKind::Ident(_) | TokenKind::Number(_) => {
                let head = self.name("a term")?;
                if *self.peek() != TokenKind::LParen {
                    return Ok(TermAst::Bare(head));
                }
                self.bump();
                let mut args = vec![self.term()?];
                while *self.peek() == TokenKind::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
                self.expect(TokenKind::RParen, "`)`")?;
                let span = head.span.to(&self.prev_span());
                Ok(TermAst::App(head, args, span))
            }
            _ => self.unexpected(&["a term"]),
        }
    }

    fn directive(&mut self) -> PResult<Directive> {
        let kw = self.ident("a directive")?;
        match kw.text.as_str() {
            "check" => Ok(Directive::Check(self.ident("a name")?)),
            "match" => {
                let span = if self.is_word("span") {
                    self.bump();
                    true
                } else {
                    false
                };
                let source = self.ident("a schema")?;
                self.expect(TokenKind::Arrow, "`->`")?;
                let target = self.ident_after_arrow("a schema")?;
                let cutoff = if self.is_word("cutoff") {
                    self.bump();
                    Some(self.number("a cutoff")?)
                } else {
                    None
                };
                Ok(Directive::Match {
                    source,
                    target,
                    span,
                    cutoff,
                })
            }
            _ => {
                let mapping = self.ident("a mapping")?;
                let depth = if self.is_word("depth") {
                    self.bump();
                    Some(self.number("a depth")?)
                } else {
                    None
                };
                Ok(Directive::Invert { mapping, depth })
            }
        }
    }

    fn number(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            TokenKind::Number(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.unexpected(&[what]),
        }
    }
}

fn allowed(kind: DeclKind, section: SectionKind) -> bool {
    use SectionKind::*;
    match kind {
        DeclKind::Typeside => matches!(section, Types | Constants | Equations),
        DeclKind::Schema => matches!(section, Entities | ForeignKeys | Attributes | Equations),
        DeclKind::Instance => matches!(section, Generators | Equations),
        DeclKind::Mapping => matches!(section, Entities | ForeignKeys | Attributes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::DiagnosticKind;

    const SCHEMA_S: &str = "schema S = literal : Ty {
        entities
             N1
             N2
        foreign_keys
             f : N1 -> N2
        attributes
             name : N1 -> String
             salary : N1 -> Int
             age : N2 -> Int
    }";

    fn ok(src: &str) -> Program {
        let (p, d) = parse(src, "t.catq");
        assert!(d.is_empty(), "{d:?}");
        p
    }

    #[test]
    fn schema_sections() {
        let p = ok(SCHEMA_S);
        let Item::Decl(d) = &p.items[0] else { panic!() };
        let Expr::Literal { over, block, .. } = &d.expr else {
            panic!()
        };
        assert_eq!(over[0].text, "Ty");
        let Section::Names(_, ents) = &block.sections[0] else {
            panic!()
        };
        assert_eq!(ents.len(), 2);
        let Section::Signatures(_, fks) = &block.sections[1] else {
            panic!()
        };
        assert_eq!(fks.len(), 1);
        let Section::Signatures(_, atts) = &block.sections[2] else {
            panic!()
        };
        assert_eq!(atts.len(), 3);
    }

    #[test]
    fn empty_schema() {
        let p = ok("schema S = literal : Ty { }");
        let Item::Decl(d) = &p.items[0] else { panic!() };
        assert!(matches!(&d.expr, Expr::Literal { block, .. } if block.sections.is_empty()));
    }

    #[test]
    fn instance_equations_run_together() {
        let p = ok("instance I = literal : S {
            generators 1 2 3 : N1
            equations name(1) = Alice salary(1) = 100 age(f(1)) = 20
        }");
        let Item::Decl(d) = &p.items[0] else { panic!() };
        let Expr::Literal { block, .. } = &d.expr else {
            panic!()
        };
        let Section::Signatures(_, gens) = &block.sections[0] else {
            panic!()
        };
        assert_eq!(gens[0].names.len(), 3);
        let Section::Equations(eqs) = &block.sections[1] else {
            panic!()
        };
        assert_eq!(eqs.len(), 3);
    }

    #[test]
    fn dangling_arrow() {
        let (p, d) = parse("mapping F = literal : S -> T { entities N1 -> }", "t");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Syntax);
        assert_eq!(d[0].span.column, 44);
        assert!(matches!(p.items[0], Item::Error(_)));
    }

    #[test]
    fn recovery_continues_with_next_declaration() {
        let (p, d) = parse(
            "schema S = literal : Ty { entities ( }\nschema T = literal : Ty { }",
            "t",
        );
        assert_eq!(d.len(), 1);
        assert_eq!(p.items.len(), 2);
        assert!(matches!(p.items[1], Item::Decl(_)));
    }

    #[test]
    fn external_bindings_are_rejected() {
        let (_, d) = parse(
            "typeside Ty = literal { java_types String = \"java.lang.String\" }",
            "t",
        );
        assert!(d[0].message.contains("external bindings unsupported"));
    }

    #[test]
    fn lambda_forms() {
        let p = ok("mapping F = literal : S -> T {
            entities N1 -> N N2 -> N
            foreign_keys f -> lambda x:N. x
            attributes name -> lambda x. name(x) age -> age(y)
        }");
        let Item::Decl(d) = &p.items[0] else { panic!() };
        let Expr::Literal { block, .. } = &d.expr else {
            panic!()
        };
        let Section::SymbolMap(_, atts) = &block.sections[2] else {
            panic!()
        };
        assert!(atts[0].1.binder.is_some());
        assert!(atts[1].1.binder.is_none());
    }

    #[test]
    fn directives_and_operations() {
        let p = ok("instance J = sigma F I
            mapping G = compose F H
            check J
            match span S -> T cutoff 0.4
            invert F depth 2");
        assert_eq!(p.items.len(), 5);
        assert!(matches!(
            &p.items[3],
            Item::Directive(Directive::Match { span: true, cutoff: Some(c), .. }) if c == "0.4"
        ));
    }

    #[test]
    fn truncated_declaration_keeps_the_next_one() {
        let (p, d) = parse("schema S =\nschema T = literal : Ty { }", "t");
        assert_eq!(d.len(), 1);
        assert!(matches!(p.items[1], Item::Decl(_)));
    }

    #[test]
    fn garbage_never_panics() {
        for src in [
            "}",
            "schema",
            "schema S =",
            "instance I = literal : S { equations a = }",
            "(((",
        ] {
            let (_, d) = parse(src, "t");
            assert!(!d.is_empty(), "{src}");
        }
    }
}
