use std::collections::BTreeSet;
use std::sync::Arc;

use catq::dsl::printer::schema_text;
use catq::dsl::render::tables;
use catq::dsl::{load, parse, print_program, render_model, ElabOptions, Format};
use catq::term::Equation;
use catq::*;
use proptest::prelude::*;

const L: SaturationLimits = SaturationLimits {
    max_classes_per_sort: 10_000,
    max_rounds: 1_000,
};

const RUNNING: &str = include_str!("data/running.catq");
const TRIPTYCH: &str = include_str!("data/triptych.catq");

/// A constraint-free schema with lowercase, pairwise distinct names.
fn arb_schema() -> impl Strategy<Value = Arc<Schema>> {
    (
        1usize..=4,
        prop::collection::vec((0usize..4, 0usize..4), 0..4),
        prop::collection::vec((0usize..4, any::<bool>()), 0..5),
    )
        .prop_map(|(n, fks, atts)| {
            let ts = Arc::new(Typeside::builtin("Ty"));
            let ents: Vec<String> = ["person", "dept", "office", "city"][..n]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let mut b = Schema::builder("S", ts);
            for e in &ents {
                b = b.entity(e);
            }
            for (k, (a, c)) in fks.iter().enumerate() {
                b = b.foreign_key(&format!("link{k}"), &ents[a % n], &ents[c % n]);
            }
            for (k, (a, int)) in atts.iter().enumerate() {
                b = b.attribute(
                    &format!("attr{k}"),
                    &ents[a % n],
                    if *int { "Int" } else { "String" },
                );
            }
            Arc::new(b.build())
        })
}

fn env(src: &str) -> catq::dsl::Environment {
    let (env, d) = load(src, "p.catq", &ElabOptions::default());
    assert!(d.is_empty(), "{d:?}");
    env
}

/// A fully specified instance of the running schema `S`.
fn arb_running_instance() -> impl Strategy<Value = Arc<InstancePresentation>> {
    prop::collection::vec(
        (0usize..3, 0i64..3, prop::option::of(0usize..4), 0i64..3),
        0..4,
    )
    .prop_map(|rows| {
        let s = Arc::clone(env(RUNNING).schema("S").unwrap());
        let names = ["Alice", "Bob", "Sue"];
        let gens: Vec<String> = (0..rows.len()).map(|k| format!("g{k}")).collect();
        let mut eqs = Vec::new();
        for (k, (n, sal, share, age)) in rows.iter().enumerate() {
            let x = Term::constant(gens[k].as_str());
            eqs.push(Equation::ground(
                Term::app("name", x.clone()),
                Term::lit(Literal::str(names[*n])),
            ));
            eqs.push(Equation::ground(
                Term::app("salary", x.clone()),
                Term::lit(Literal::int(*sal)),
            ));
            match share {
                Some(j) if *j < k => {
                    let y = Term::constant(gens[*j].as_str());
                    eqs.push(Equation::ground(Term::app("f", x), Term::app("f", y)));
                }
                _ => eqs.push(Equation::ground(
                    Term::app("age", Term::app("f", x)),
                    Term::lit(Literal::int(20 + 10 * age)),
                )),
            }
        }
        let parts: Vec<(&str, &str)> = gens.iter().map(|g| (g.as_str(), "N1")).collect();
        Arc::new(InstancePresentation::from_parts("R", s, &parts, eqs))
    })
}

/// A fully specified instance of the foreign-key-free schema.
fn arb_free_instance() -> impl Strategy<Value = Arc<InstancePresentation>> {
    (
        prop::collection::vec((0usize..3, 0i64..3), 0..4),
        prop::collection::vec(0i64..3, 0..4),
    )
        .prop_map(|(left, right)| {
            let s = Arc::clone(env(TRIPTYCH).schema("S").unwrap());
            let names = ["Alice", "Bob", "Sue"];
            let mut gens = Vec::new();
            let mut eqs = Vec::new();
            for (k, (n, sal)) in left.iter().enumerate() {
                let g = format!("a{k}");
                eqs.push(Equation::ground(
                    Term::app("name", Term::constant(g.as_str())),
                    Term::lit(Literal::str(names[*n])),
                ));
                eqs.push(Equation::ground(
                    Term::app("salary", Term::constant(g.as_str())),
                    Term::lit(Literal::int(*sal)),
                ));
                gens.push((g, "N1"));
            }
            for (k, age) in right.iter().enumerate() {
                let g = format!("b{k}");
                eqs.push(Equation::ground(
                    Term::app("age", Term::constant(g.as_str())),
                    Term::lit(Literal::int(*age)),
                ));
                gens.push((g, "N2"));
            }
            let parts: Vec<(&str, &str)> = gens.iter().map(|(g, s)| (g.as_str(), *s)).collect();
            Arc::new(InstancePresentation::from_parts("R", s, &parts, eqs))
        })
}

fn build(p: &Arc<InstancePresentation>) -> Arc<TermModel> {
    Arc::new(build_term_model(Arc::clone(p), L).unwrap())
}

fn apex_names(s: &Arc<Schema>, t: &Arc<Schema>, c: f64) -> BTreeSet<String> {
    let r = match_span(s, t, &SimilarityConfig::new(c).unwrap()).unwrap();
    let sp = r.span().unwrap();
    sp.apex
        .entities
        .iter()
        .cloned()
        .chain(sp.apex.unary_symbols().map(|f| f.name.clone()))
        .collect()
}

proptest! {
    #[test]
    fn similarity_is_symmetric_and_bounded(a in "[a-zA-Z_]{0,12}", b in "[a-zA-Z_]{0,12}") {
        let cfg = SimilarityConfig::default();
        let x = cfg.similarity(&a, &b);
        prop_assert_eq!(x, cfg.similarity(&b, &a));
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert_eq!(cfg.similarity(&a, &a), 1.0);
    }

    #[test]
    fn a_shared_position_gives_positive_similarity(a in "[a-c]{1,6}", b in "[a-c]{1,6}") {
        let x = SimilarityConfig::default().similarity(&a, &b);
        if a.chars().zip(b.chars()).any(|(p, q)| p == q) {
            prop_assert!(x > 0.0);
        }
    }

    #[test]
    fn self_match_is_identity(s in arb_schema()) {
        let r = match_mapping(&s, &s, &SimilarityConfig::default()).unwrap();
        let c = r.candidate().unwrap();
        prop_assert!(c.validated);
        prop_assert!(mappings_equal(&c.mapping, &Mapping::identity(&s)).unwrap());
    }

    #[test]
    fn raising_the_cutoff_shrinks_the_apex(s in arb_schema(), t in arb_schema(), lo in 0.0f64..1.0, step in 0.0f64..1.0) {
        let hi = lo + (1.0 - lo) * step;
        let small = apex_names(&s, &t, hi);
        let large = apex_names(&s, &t, lo);
        prop_assert!(small.is_subset(&large), "{small:?} not in {large:?}");
    }

    #[test]
    fn identity_composition_is_neutral(s in arb_schema()) {
        let id = Mapping::identity(&s);
        let twice = compose_mappings(&id, &id).unwrap();
        prop_assert!(mappings_equal(&twice, &id).unwrap());
    }

    #[test]
    fn printed_schemas_reparse(s in arb_schema()) {
        let src = format!("typeside Ty = literal {{ types String Int }}\n{}", schema_text(&s));
        let (env, d) = load(&src, "p.catq", &ElabOptions::default());
        prop_assert!(d.is_empty(), "{:?}", d);
        prop_assert_eq!(env.schema("S").unwrap().as_ref(), s.as_ref());
        let (p1, _) = parse(&src, "p.catq");
        let (p2, d) = parse(&print_program(&p1), "p.catq");
        prop_assert!(d.is_empty());
        prop_assert_eq!(p1, p2);
    }

    #[test]
    fn parsing_is_total(src in "[a-z0-9 :=>{}().\"\n/-]{0,80}") {
        let (p, _) = parse(&src, "p.catq");
        let _ = print_program(&p);
        let _ = load(&src, "p.catq", &ElabOptions::default());
    }

    #[test]
    fn term_models_are_deterministic(i in arb_running_instance()) {
        let a = build(&i);
        let b = build(&i);
        prop_assert_eq!(a.as_ref(), b.as_ref());
        prop_assert_eq!(render_model(&a, Format::Json), render_model(&b, Format::Json));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn identity_migrations_are_isomorphisms(i in arb_running_instance()) {
        let s = Arc::clone(&i.schema);
        let id = Mapping::identity(&s);
        let m = build(&i);
        prop_assert!(instances_isomorphic(&sigma(&id, &i, L).unwrap().output, &m).unwrap().is_some());
        prop_assert!(instances_isomorphic(&delta(&id, &m, L).unwrap().output, &m).unwrap().is_some());
        prop_assert!(instances_isomorphic(&pi(&id, &m, L).unwrap().output, &m).unwrap().is_some());
    }

    #[test]
    fn sigma_preserves_coproducts(a in arb_running_instance(), b in arb_running_instance()) {
        let env = env(RUNNING);
        let f = env.mapping("F").unwrap();
        let sum = Arc::new(coproduct(&a, &b).unwrap());
        let left = sigma(f, &sum, L).unwrap().output;
        let sa = sigma(f, &a, L).unwrap();
        let sb = sigma(f, &b, L).unwrap();
        let right = Arc::new(build_term_model(Arc::new(coproduct(&sa.presentation, &sb.presentation).unwrap()), L).unwrap());
        prop_assert!(instances_isomorphic(&left, &right).unwrap().is_some());
    }

    #[test]
    fn row_counts_without_foreign_keys(i in arb_free_instance()) {
        let env = env(TRIPTYCH);
        let f = env.mapping("F").unwrap();
        let m = build(&i);
        let (n1, n2) = (m.carrier("N1").len(), m.carrier("N2").len());
        let s = sigma(f, &i, L).unwrap().output;
        prop_assert_eq!(s.carrier("N").len(), n1 + n2);
        let p = pi(f, &m, L).unwrap().output;
        prop_assert_eq!(p.carrier("N").len(), n1 * n2);
        let d = delta(f, &p, L).unwrap().output;
        prop_assert_eq!(d.carrier("N1").len(), n1 * n2);
        prop_assert_eq!(d.carrier("N2").len(), n1 * n2);
        let rows = &tables(&p)[0].rows;
        prop_assert!(rows.iter().all(|r| r.iter().skip(1).all(|c| c.literal.is_some())));
    }

    #[test]
    fn functoriality_through_a_renaming(i in arb_running_instance()) {
        let env = env(&format!("{RUNNING}
            schema S2 = literal : Ty {{
                entities M1 M2
                foreign_keys g : M1 -> M2
                attributes nm : M1 -> String sal : M1 -> Int ag : M2 -> Int
            }}
            mapping Rinv = literal : S -> S2 {{
                entities N1 -> M1 N2 -> M2
                foreign_keys f -> lambda x:M1. g(x)
                attributes name -> nm(x) salary -> sal(x) age -> ag(x)
            }}
            mapping R = literal : S2 -> S {{
                entities M1 -> N1 M2 -> N2
                foreign_keys g -> lambda x:N1. f(x)
                attributes nm -> name(x) sal -> salary(x) ag -> age(x)
            }}"));
        let (r, rinv) = (env.mapping("R").unwrap(), env.mapping("Rinv").unwrap());
        let round = compose_mappings(rinv, r).unwrap();
        prop_assert!(mappings_equal(&round, &Mapping::identity(&rinv.source)).unwrap());
        let m = build(&i);
        let there = sigma(rinv, &i, L).unwrap();
        let back = sigma(r, &there.presentation, L).unwrap().output;
        prop_assert!(instances_isomorphic(&back, &m).unwrap().is_some());
        let d = delta(rinv, &delta(r, &m, L).unwrap().output, L).unwrap().output;
        prop_assert!(instances_isomorphic(&d, &m).unwrap().is_some());
    }
}
