//! Name-keyed registries for interchangeable strategies.
//!
//! Activations, optimizers, class-weighting schemes and acoustic front-ends are
//! each a family of variants behind a common trait. A [`Registry`] maps the
//! name used in config files and on the command line to a constructor.

use crate::error::{Error, Result};

pub struct Registry<F> {
    kind: &'static str,
    entries: Vec<(&'static str, F)>,
}

impl<F> Registry<F> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Registers `ctor` under `name`; a later registration with the same name wins.
    pub fn register(mut self, name: &'static str, ctor: F) -> Self {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, ctor));
        self
    }

    pub fn get(&self, name: &str) -> Result<&F> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| f)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }
}
