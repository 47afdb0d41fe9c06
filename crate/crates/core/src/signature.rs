//! Symbol tables: agent names and their arities.

use std::fmt;

use thiserror::Error;

/// Largest arity accepted by [`Signature::new`].
pub const MAX_ARITY: usize = 4096;

/// Index of a symbol inside its [`Signature`].
///
/// Symbols are numbered in lexicographic order of their names, so comparing
/// two ids compares the names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub(crate) u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("arity {arity} of `{name}` exceeds the limit of {MAX_ARITY}")]
    ArityTooLarge { name: String, arity: usize },
}

/// Returns true for names matching `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A set of symbols with fixed arities. An agent of arity `n` has ports
/// `0..=n`, port 0 being the principal one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    // sorted by name
    symbols: Vec<(String, usize)>,
}

impl Signature {
    pub fn new<I, S>(entries: I) -> Result<Self, SignatureError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut symbols: Vec<(String, usize)> = Vec::new();
        for (name, arity) in entries {
            let name = name.into();
            if !is_identifier(&name) {
                return Err(SignatureError::InvalidName(name));
            }
            if arity > MAX_ARITY {
                return Err(SignatureError::ArityTooLarge { name, arity });
            }
            symbols.push((name, arity));
        }
        symbols.sort();
        for pair in symbols.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(SignatureError::DuplicateSymbol(pair[0].0.clone()));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.symbols
            .binary_search_by(|(n, _)| n.as_str().cmp(name))
            .ok()
            .map(|i| SymbolId(i as u32))
    }

    pub fn contains(&self, id: SymbolId) -> bool {
        id.index() < self.symbols.len()
    }

    /// Panics if `id` does not belong to this signature.
    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.index()].0
    }

    /// Panics if `id` does not belong to this signature.
    pub fn arity(&self, id: SymbolId) -> usize {
        self.symbols[id.index()].1
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &str, usize)> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, (n, a))| (SymbolId(i as u32), n.as_str(), *a))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (name, arity)) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name}:{arity}")?;
        }
        write!(f, "}}")
    }
}
