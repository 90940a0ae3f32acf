use std::fmt;

use crate::frontend::ast::ColumnType;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    /// Integer with a nonnegativity side condition.
    UInt,
    /// Opaque identity; equality only.
    Addr,
    Map(Vec<Sort>, Box<Sort>),
}

impl Sort {
    pub fn map(keys: Vec<Sort>, value: Sort) -> Sort {
        assert!(!keys.is_empty(), "map sort needs a key");
        assert!(!value.is_map(), "map values cannot be maps");
        Sort::Map(keys, Box::new(value))
    }

    pub fn is_map(&self) -> bool {
        matches!(self, Sort::Map(..))
    }

    /// Int and UInt.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Sort::Int | Sort::UInt)
    }

    /// Sorts lowered to SMT Int.
    pub fn is_intlike(&self) -> bool {
        matches!(self, Sort::Int | Sort::UInt | Sort::Addr)
    }

    /// Whether values of the two sorts may be compared for equality.
    pub fn unifies(&self, other: &Sort) -> bool {
        match (self, other) {
            (a, b) if a.is_intlike() && b.is_intlike() => true,
            (Sort::Bool, Sort::Bool) => true,
            (Sort::Map(ka, va), Sort::Map(kb, vb)) => {
                ka.len() == kb.len()
                    && ka.iter().zip(kb).all(|(a, b)| a.unifies(b))
                    && va.unifies(vb)
            }
            _ => false,
        }
    }

    pub fn from_column(t: ColumnType) -> Sort {
        match t {
            ColumnType::Address => Sort::Addr,
            ColumnType::Uint => Sort::UInt,
            ColumnType::Int => Sort::Int,
            ColumnType::Bool => Sort::Bool,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("bool"),
            Sort::Int => f.write_str("int"),
            Sort::UInt => f.write_str("uint"),
            Sort::Addr => f.write_str("address"),
            Sort::Map(keys, v) if keys.len() == 1 => write!(f, "{} ↦ {v}", keys[0]),
            Sort::Map(keys, v) => {
                let ks: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
                write!(f, "({}) ↦ {v}", ks.join(" × "))
            }
        }
    }
}
