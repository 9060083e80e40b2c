use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use crate::scalar::Scalar;

/// A query variable. Names follow `[a-zA-Z_][a-zA-Z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        debug_assert!(is_identifier(name), "invalid variable name {name:?}");
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Var {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A variable or a constant of the dense ordered domain.
///
/// Constants order before variables; constants compare by value and
/// variables by name. This is the canonical term order used for printing
/// and for deterministic search.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term<T> {
    Const(T),
    Var(Var),
}

impl<T: Scalar> Term<T> {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn constant(value: T) -> Self {
        Term::Const(value)
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&T> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }
}

impl<T: Scalar> fmt::Debug for Term<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: Scalar> fmt::Display for Term<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// Relation name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rel(Arc<str>);

impl Rel {
    pub fn new(name: &str) -> Self {
        Rel(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom<T> {
    pub relation: Rel,
    pub args: Vec<Term<T>>,
}

impl<T: Scalar> Atom<T> {
    pub fn new(relation: &str, args: Vec<Term<T>>) -> Self {
        Atom { relation: Rel::new(relation), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> + '_ {
        self.args.iter().filter_map(Term::as_var)
    }

    /// Applies `f` to every argument.
    pub fn map_terms(&self, mut f: impl FnMut(&Term<T>) -> Term<T>) -> Self {
        Atom { relation: self.relation.clone(), args: self.args.iter().map(&mut f).collect() }
    }
}

impl<T: Scalar> fmt::Debug for Atom<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: Scalar> fmt::Display for Atom<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Comparison operator. `>` and `>=` are normalized away by the parser.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
        }
    }

    pub fn holds<V: Ord>(self, a: &V, b: &V) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Comparison<T> {
    pub lhs: Term<T>,
    pub op: CmpOp,
    pub rhs: Term<T>,
}

impl<T: Scalar> Comparison<T> {
    pub fn new(lhs: Term<T>, op: CmpOp, rhs: Term<T>) -> Self {
        Comparison { lhs, op, rhs }
    }

    pub fn lt(lhs: Term<T>, rhs: Term<T>) -> Self {
        Self::new(lhs, CmpOp::Lt, rhs)
    }

    pub fn le(lhs: Term<T>, rhs: Term<T>) -> Self {
        Self::new(lhs, CmpOp::Le, rhs)
    }

    /// Same comparison with its operands swapped (`r < s` becomes `s < r`).
    pub fn reversed(&self) -> Self {
        Comparison { lhs: self.rhs.clone(), op: self.op, rhs: self.lhs.clone() }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term<T>) -> Term<T>) -> Self {
        Comparison { lhs: f(&self.lhs), op: self.op, rhs: f(&self.rhs) }
    }

    pub fn terms(&self) -> [&Term<T>; 2] {
        [&self.lhs, &self.rhs]
    }
}

impl<T: Scalar> fmt::Debug for Comparison<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<T: Scalar> fmt::Display for Comparison<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}
