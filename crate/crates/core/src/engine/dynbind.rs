//! Dynamic binding: a current environment of dynamic variables that `dlet`
//! replaces for the extent of a computation and then restores.

use std::rc::Rc;

use crate::diag::Diagnostic;

use super::{Session, Value};

pub type DVar = u64;

/// Immutable map from dynamic variables to values; the newest binding of a
/// variable shadows older ones.
#[derive(Clone, Default)]
pub struct DEnv(Option<Rc<(DVar, Value, DEnv)>>);

impl DEnv {
    pub fn extend(&self, d: DVar, v: Value) -> DEnv {
        DEnv(Some(Rc::new((d, v, self.clone()))))
    }

    pub fn get(&self, d: DVar) -> Option<&Value> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.0 == d {
                return Some(&node.1);
            }
            cur = &node.2;
        }
        None
    }

    pub fn ptr_eq(&self, other: &DEnv) -> bool {
        match (&self.0, &other.0) {
            (None, None) => true,
            (Some(a), Some(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Session {
    pub fn dnew(&mut self) -> DVar {
        self.next_dvar += 1;
        self.next_dvar
    }

    pub fn dref(&self, d: DVar) -> Result<Value, Diagnostic> {
        self.denv
            .get(d)
            .cloned()
            .ok_or_else(|| Diagnostic::runtime(format!("unbound dynamic variable d{d}")))
    }

    pub fn denv_get(&self) -> DEnv {
        self.denv.clone()
    }

    /// Runs `body` with the current environment set to `denv` extended by
    /// `d = v`; the previous environment is restored afterwards, whether or
    /// not `body` fails.
    pub fn dlet<T>(&mut self, denv: &DEnv, d: DVar, v: Value, body: impl FnOnce(&mut Session) -> T) -> T {
        let saved = std::mem::replace(&mut self.denv, denv.extend(d, v));
        let out = body(self);
        self.denv = saved;
        out
    }
}
