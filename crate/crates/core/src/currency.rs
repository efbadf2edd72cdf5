use std::fmt;

use serde::{Deserialize, Serialize};

use crate::amount::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrencyKind {
    Real,
    Virtual,
}

/// Identifies a currency. Real currencies are global and carry an empty
/// `app_id`; virtual currencies belong to exactly one app.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CurrencyId {
    pub app_id: String,
    pub code: String,
    pub kind: CurrencyKind,
}

impl CurrencyId {
    pub fn real(code: impl Into<String>) -> Self {
        CurrencyId {
            app_id: String::new(),
            code: code.into(),
            kind: CurrencyKind::Real,
        }
    }

    pub fn virtual_in(app_id: impl Into<String>, code: impl Into<String>) -> Self {
        CurrencyId {
            app_id: app_id.into(),
            code: code.into(),
            kind: CurrencyKind::Virtual,
        }
    }

    pub fn is_real(&self) -> bool {
        self.kind == CurrencyKind::Real
    }

    /// True when the identifier satisfies the per-kind shape rules.
    pub fn is_well_formed(&self) -> bool {
        match self.kind {
            CurrencyKind::Real => {
                self.app_id.is_empty()
                    && self.code.len() == 3
                    && self.code.bytes().all(|b| b.is_ascii_uppercase())
            }
            CurrencyKind::Virtual => !self.app_id.is_empty() && !self.code.is_empty(),
        }
    }

    /// Whether `code` would be accepted as a real currency code.
    pub fn looks_real(code: &str) -> bool {
        code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
    }
}

impl fmt::Display for CurrencyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CurrencyKind::Real => f.write_str(&self.code),
            CurrencyKind::Virtual => write!(f, "{}:{}", self.app_id, self.code),
        }
    }
}

/// An exact amount of real money.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Money {
    pub amount: Rational,
    pub currency: CurrencyId,
}

impl Money {
    pub fn new(amount: Rational, currency: CurrencyId) -> Self {
        Money { amount, currency }
    }

    pub fn zero(currency: CurrencyId) -> Self {
        Money {
            amount: Rational::zero(),
            currency,
        }
    }

    pub fn symbol(&self) -> &'static str {
        currency_symbol(&self.currency.code)
    }

    /// `"$1.99"` style rendering, truncated to cents.
    pub fn display(&self) -> String {
        format!("{}{}", self.symbol(), self.amount.to_display())
    }
}

pub fn currency_symbol(code: &str) -> &'static str {
    match code {
        "USD" | "CAD" | "AUD" => "$",
        "EUR" => "€",
        "GBP" => "£",
        "JPY" => "¥",
        _ => "",
    }
}
