//! Coproducts of instance presentations.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::migrate::fresh_name;
use crate::schema::InstancePresentation;
use crate::term::{Equation, FunctionSymbol, Term};

/// `I + J`: the generators of both, those of `J` renamed apart, and the
/// equations of both.
pub fn coproduct(
    i: &InstancePresentation,
    j: &InstancePresentation,
) -> Result<InstancePresentation> {
    if i.schema != j.schema {
        return Err(Error::SchemaMismatch(format!(
            "`{}` and `{}` are on different schemas",
            i.name, j.name
        )));
    }
    let mut renaming: HashMap<String, String> = HashMap::new();
    let mut generators: Vec<FunctionSymbol> = i.generators.clone();
    for g in &j.generators {
        let name = fresh_name(&g.name, &|n| {
            i.schema.symbol_is_declared(n)
                || generators.iter().any(|h| h.name == n)
                || (n != g.name && j.generator(n).is_some())
        });
        renaming.insert(g.name.clone(), name.clone());
        generators.push(FunctionSymbol { name, ..g.clone() });
    }
    let mut equations = i.equations.clone();
    for e in &j.equations {
        equations.push(Equation::ground(
            rename(&e.lhs, &renaming),
            rename(&e.rhs, &renaming),
        ));
    }
    Ok(InstancePresentation::new(
        format!("{}_{}", i.name, j.name),
        Arc::clone(&i.schema),
        generators,
        equations,
    ))
}

fn rename(t: &Term, renaming: &HashMap<String, String>) -> Term {
    match t {
        Term::App(name, args) if args.is_empty() => {
            Term::constant(renaming.get(name).unwrap_or(name).clone())
        }
        Term::App(name, args) => Term::App(
            name.clone(),
            args.iter().map(|a| rename(a, renaming)).collect(),
        ),
        other => other.clone(),
    }
}
