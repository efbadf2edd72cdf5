//! Demo shop catalog: currency packs, exchange offers and items.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amount::Rational;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("reading catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid catalog JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid catalog: {0}")]
    Invalid(String),
}

/// A currency amount as listed in the shop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceTag {
    pub code: String,
    pub units: u64,
}

/// Real money → virtual currency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pack {
    pub pack: String,
    /// Decimal string in the report currency.
    pub price: String,
    pub currency: String,
    pub units: u64,
}

/// Virtual → virtual currency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeOffer {
    pub exchange: String,
    pub spent: PriceTag,
    pub received: PriceTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShopItem {
    pub item: String,
    pub name: String,
    /// One entry per currency; a purchase pays all of them.
    pub price: Vec<PriceTag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub app_id: String,
    pub report_currency: String,
    pub packs: Vec<Pack>,
    pub exchanges: Vec<ExchangeOffer>,
    pub items: Vec<ShopItem>,
}

impl Catalog {
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let catalog: Catalog = serde_json::from_str(text)?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Catalog::from_json(&text)
    }

    /// Pretty JSON with a trailing newline. Parsing this text and
    /// canonicalizing again yields identical bytes.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("catalog serializes");
        s.push('\n');
        s
    }

    pub fn pack(&self, id: &str) -> Option<&Pack> {
        self.packs.iter().find(|p| p.pack == id)
    }

    pub fn item(&self, id: &str) -> Option<&ShopItem> {
        self.items.iter().find(|i| i.item == id)
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let invalid = |msg: String| Err(CatalogError::Invalid(msg));
        for p in &self.packs {
            match Rational::parse_decimal(&p.price) {
                Ok(r) if !r.is_zero() => {}
                _ => return invalid(format!("pack {} has bad price {:?}", p.pack, p.price)),
            }
            if p.units == 0 {
                return invalid(format!("pack {} grants no units", p.pack));
            }
        }
        for x in &self.exchanges {
            if x.spent.units == 0 || x.received.units == 0 {
                return invalid(format!("exchange {} has a zero amount", x.exchange));
            }
        }
        for i in &self.items {
            if i.price.is_empty() || i.price.iter().any(|p| p.units == 0) {
                return invalid(format!("item {} has an empty or zero price", i.item));
            }
        }
        Ok(())
    }
}
