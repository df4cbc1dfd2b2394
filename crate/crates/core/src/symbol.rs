//! Global symbol interning for predicate names and constants.
//!
//! Symbols are interned once and never freed. Equality and hashing use the
//! interned id, so comparing two symbols is a single integer comparison.
//! Ordering is by content (integers numerically, before other text) so that
//! sorted output does not depend on interning order.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{LazyLock, Mutex};

struct SymInfo {
    id: u32,
    text: &'static str,
    int: Option<i64>,
}

static INTERNER: LazyLock<Mutex<HashMap<&'static str, &'static SymInfo>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// An interned string.
#[derive(Clone, Copy)]
pub struct Sym(&'static SymInfo);

impl Sym {
    pub fn intern(text: &str) -> Sym {
        let mut table = INTERNER.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(info) = table.get(text) {
            return Sym(info);
        }
        let text: &'static str = Box::leak(text.to_owned().into_boxed_str());
        let info: &'static SymInfo =
            Box::leak(Box::new(SymInfo { id: table.len() as u32, text, int: text.parse().ok() }));
        table.insert(text, info);
        Sym(info)
    }

    pub fn as_str(self) -> &'static str {
        self.0.text
    }

    pub fn id(self) -> u32 {
        self.0.id
    }

    /// The integer value, if the symbol is an integer literal.
    pub fn as_int(self) -> Option<i64> {
        self.0.int
    }
}

impl PartialEq for Sym {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}

impl Eq for Sym {}

impl Hash for Sym {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.id.hash(state)
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match (self.0.int, other.0.int) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.text.cmp(other.0.text)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.text.cmp(other.0.text),
        }
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.text)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0.text)
    }
}
