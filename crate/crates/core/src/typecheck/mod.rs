//! Hindley–Milner inference for the staged source language and for the
//! unstaged host language, parameterized by a let-generalization policy.

mod host;
mod staged;
mod unify;
mod validate;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use host::{comb_scheme, infer_host, infer_host_detailed};
pub use staged::{infer_staged, infer_staged_detailed, StagedTyping};
pub use unify::Unifier;
pub use validate::validate_staged;

use crate::ast::{SourceExpr, TargetTerm};
use crate::types::{TyVar, Type, TypeEnv, TypeScheme};

/// Which let-bound right-hand sides get generalized.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum GenPolicy {
    /// Only syntactic values.
    StrictValue,
    /// Non-expansive expressions.
    NonExpansive,
    /// Non-expansive expressions fully; otherwise the type variables that
    /// occur only covariantly.
    #[default]
    Relaxed,
}

impl FromStr for GenPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "value" => Ok(GenPolicy::StrictValue),
            "nonexpansive" => Ok(GenPolicy::NonExpansive),
            "relaxed" => Ok(GenPolicy::Relaxed),
            other => Err(format!("unknown generalization policy `{other}`")),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Variance {
    Unused,
    Covariant,
    Contravariant,
    Invariant,
}

impl Variance {
    /// Variance of an occurrence with variance `inner` under a constructor
    /// argument of variance `self`.
    pub fn compose(self, inner: Variance) -> Variance {
        use Variance::*;
        match (self, inner) {
            (_, Unused) | (Unused, _) => Unused,
            (Covariant, v) => v,
            (Contravariant, Covariant) => Contravariant,
            (Contravariant, Contravariant) => Covariant,
            (Contravariant, Invariant) | (Invariant, _) => Invariant,
        }
    }

    /// Least upper bound of two occurrences.
    pub fn join(self, other: Variance) -> Variance {
        use Variance::*;
        match (self, other) {
            (Unused, v) | (v, Unused) => v,
            (a, b) if a == b => a,
            _ => Invariant,
        }
    }
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variance::Unused => "unused",
            Variance::Covariant => "covariant",
            Variance::Contravariant => "contravariant",
            Variance::Invariant => "invariant",
        })
    }
}

/// How `v` occurs in `t` (which must already be resolved).
pub fn variance_of(v: TyVar, t: &Type) -> Variance {
    use Variance::*;
    match t {
        Type::Var(w) => {
            if *w == v {
                Covariant
            } else {
                Unused
            }
        }
        Type::Int | Type::Str | Type::Unit => Unused,
        Type::List(a) | Type::Code(a) => Covariant.compose(variance_of(v, a)),
        Type::Pair(a, b) => variance_of(v, a).join(variance_of(v, b)),
        Type::Arrow(a, b) => Contravariant
            .compose(variance_of(v, a))
            .join(variance_of(v, b)),
        Type::Ref(a) | Type::Scope(a) | Type::FunScope(a) => Invariant.compose(variance_of(v, a)),
    }
}

/// Syntactic values: variables, literals, functions, and pairs/conses of
/// values.
pub fn is_value(e: &SourceExpr) -> bool {
    use SourceExpr::*;
    match e {
        Var(_) | IntLit(_) | StrLit(_) | Nil | Unit | Fun(..) => true,
        Pair(a, b) | Cons(a, b) => is_value(a) && is_value(b),
        _ => false,
    }
}

/// Expressions whose evaluation has no effect that can contribute to the
/// result. A bracket is non-expansive when nothing it runs at generation
/// time (escapes and CSP operands) is expansive.
pub fn is_nonexpansive(e: &SourceExpr) -> bool {
    use SourceExpr::*;
    match e {
        Var(_) | IntLit(_) | StrLit(_) | Nil | Unit | Fun(..) | Persisted(_) => true,
        Pair(a, b) | Cons(a, b) => is_nonexpansive(a) && is_nonexpansive(b),
        Let(_, a, b) => is_nonexpansive(a) && is_nonexpansive(b),
        Csp(a) => is_nonexpansive(a),
        Bracket(b) => generation_is_nonexpansive(b),
        Add(..) | App(..) | RefNew(_) | RefGet(_) | Rset(..) | Escape(_) => false,
    }
}

fn generation_is_nonexpansive(level1: &SourceExpr) -> bool {
    match level1 {
        SourceExpr::Escape(e) | SourceExpr::Csp(e) => is_nonexpansive(e),
        other => other.children().into_iter().all(generation_is_nonexpansive),
    }
}

pub fn is_value_target(t: &TargetTerm) -> bool {
    use TargetTerm::*;
    match t {
        Var(_) | IntLit(_) | StrLit(_) | UnitLit | Nil | Fun(..) => true,
        Comb(_, args) => args.is_empty(),
        Pair(a, b) | Cons(a, b) => is_value_target(a) && is_value_target(b),
        _ => false,
    }
}

/// Host-side non-expansiveness. Any combinator application is expansive; a
/// bare combinator constant is not.
pub fn is_nonexpansive_target(t: &TargetTerm) -> bool {
    use TargetTerm::*;
    match t {
        Var(_) | IntLit(_) | StrLit(_) | UnitLit | Nil | Fun(..) | Persisted(_) => true,
        Comb(_, args) => args.is_empty(),
        Pair(a, b) | Cons(a, b) | Let(_, a, b) => is_nonexpansive_target(a) && is_nonexpansive_target(b),
        Add(..) | App(..) | RefNew(_) | RefGet(_) | Rset(..) => false,
    }
}

/// The predicate a policy uses to decide whether a right-hand side counts as
/// generalizable.
pub fn rhs_generalizable(policy: GenPolicy, e: &SourceExpr) -> bool {
    match policy {
        GenPolicy::StrictValue => is_value(e),
        GenPolicy::NonExpansive | GenPolicy::Relaxed => is_nonexpansive(e),
    }
}

pub fn rhs_generalizable_target(policy: GenPolicy, t: &TargetTerm) -> bool {
    match policy {
        GenPolicy::StrictValue => is_value_target(t),
        GenPolicy::NonExpansive | GenPolicy::Relaxed => is_nonexpansive_target(t),
    }
}

/// Generalizes `t` with respect to `env`; both must be fully resolved.
pub fn generalize(t: &Type, env: &TypeEnv, rhs_generalizable: bool, policy: GenPolicy) -> TypeScheme {
    generalize_against(t, &env.free_vars(), rhs_generalizable, policy)
}

pub(crate) fn generalize_against(
    t: &Type,
    env_fvs: &BTreeSet<TyVar>,
    rhs_generalizable: bool,
    policy: GenPolicy,
) -> TypeScheme {
    let mut order = Vec::new();
    t.vars_in_order(&mut order);
    let quantified = order
        .into_iter()
        .filter(|v| !env_fvs.contains(v))
        .filter(|v| {
            rhs_generalizable
                || (policy == GenPolicy::Relaxed
                    && matches!(variance_of(*v, t), Variance::Covariant | Variance::Unused))
        })
        .collect();
    TypeScheme {
        quantified,
        body: t.clone(),
    }
}
