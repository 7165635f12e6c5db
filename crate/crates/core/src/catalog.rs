//! Product catalogs and per-product session parameters.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::money::Money;

pub const DEFAULT_BUDGET_FACTOR: f64 = 0.8;
pub const DEFAULT_MAX_TURNS: u32 = 10;
pub const DEFAULT_SIGMA: Money = Money::CENT;

/// One catalog item with its historical price extremes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub title: String,
    pub description: String,
    #[serde(default)]
    pub features: Vec<String>,
    pub category: String,
    pub highest_price: Money,
    pub lowest_price: Money,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_price: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_url: Option<String>,
    pub codename: String,
}

/// Products in file order, addressable by codename.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    products: Vec<Product>,
    index: HashMap<String, usize>,
}

impl Catalog {
    /// Builds a catalog, rejecting duplicate codenames.
    pub fn new(products: Vec<Product>) -> Result<Self> {
        let mut index = HashMap::with_capacity(products.len());
        for (i, p) in products.iter().enumerate() {
            if index.insert(p.codename.clone(), i).is_some() {
                return Err(Error::InvalidRecord {
                    index: i,
                    message: format!("duplicate codename `{}`", p.codename),
                });
            }
        }
        Ok(Catalog { products, index })
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn get(&self, codename: &str) -> Option<&Product> {
        self.index.get(codename).map(|&i| &self.products[i])
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Product> {
        self.products.iter()
    }

    /// Writes the catalog in the same document format `load_catalog` reads.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.products)?)
    }
}

impl<'a> IntoIterator for &'a Catalog {
    type Item = &'a Product;
    type IntoIter = std::slice::Iter<'a, Product>;
    fn into_iter(self) -> Self::IntoIter {
        self.products.iter()
    }
}

/// Whether a deal can leave both sides with nonnegative profit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Mutual interest: budget above cost.
    MI,
    /// Conflicting interest: budget at or below cost.
    CI,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::MI => "MI",
            Scenario::CI => "CI",
        })
    }
}

pub fn classify_interest(budget: Money, cost: Money) -> Scenario {
    if budget > cost {
        Scenario::MI
    } else {
        Scenario::CI
    }
}

/// Frozen parameters of one bargaining session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub product: Product,
    pub list_price: Money,
    pub cost: Money,
    pub budget: Money,
    pub budget_factor: f64,
    pub max_turns: u32,
    pub sigma: Money,
    pub scenario: Scenario,
    pub quantity: u32,
}

impl SessionConfig {
    pub fn codename(&self) -> &str {
        &self.product.codename
    }
}

/// Derives list price, cost, and budget for `product`.
///
/// The budget is `factor * list_price` rounded to cents; when that lands
/// exactly on the cost it is pushed down by `sigma` so normalized profits
/// never divide by zero.
pub fn configure_session(
    product: &Product,
    budget_factor: f64,
    max_turns: u32,
    sigma: Money,
) -> Result<SessionConfig> {
    if !(budget_factor.is_finite() && budget_factor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "budget factor must be positive, got {budget_factor}"
        )));
    }
    if max_turns == 0 {
        return Err(Error::InvalidParameter("max turns must be at least 1".into()));
    }
    if !sigma.is_positive() {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let list_price = product.highest_price;
    let cost = product.lowest_price;
    let mut budget = list_price.scale(budget_factor);
    if budget == cost {
        budget = cost - sigma;
    }
    Ok(SessionConfig {
        product: product.clone(),
        list_price,
        cost,
        budget,
        budget_factor,
        max_turns,
        sigma,
        scenario: classify_interest(budget, cost),
        quantity: 1,
    })
}

/// Lowercases a category and joins its words with hyphens:
/// `Toys & Games` becomes `toys-games`.
pub fn category_slug(category: &str) -> String {
    let mut slug = String::with_capacity(category.len());
    for ch in category.trim().chars() {
        if ch.is_whitespace() || ch == '&' || ch == '-' {
            if !slug.is_empty() && !slug.ends_with('-') {
                slug.push('-');
            }
        } else {
            slug.extend(ch.to_lowercase());
        }
    }
    while slug.ends_with('-') {
        slug.pop();
    }
    slug
}

fn is_valid_codename(codename: &str) -> bool {
    let Some((slug, index)) = codename.rsplit_once('_') else {
        return false;
    };
    !slug.is_empty()
        && slug
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_')
        && !index.is_empty()
        && !index.starts_with('0')
        && index.bytes().all(|b| b.is_ascii_digit())
}

/// Reads a catalog document: a JSON array of product records.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_catalog(&text)
}

/// Parses catalog text. Codenames are assigned per category in order of
/// appearance unless a record carries its own.
pub fn parse_catalog(text: &str) -> Result<Catalog> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::CatalogFormat(e.to_string()))?;
    let records = doc
        .as_array()
        .ok_or_else(|| Error::CatalogFormat("top-level value must be an array of records".into()))?;

    let mut per_category: HashMap<String, u32> = HashMap::new();
    let mut products = Vec::with_capacity(records.len());
    for (index, record) in records.iter().enumerate() {
        let obj = record.as_object().ok_or_else(|| Error::InvalidRecord {
            index,
            message: "record is not an object".into(),
        })?;

        let text_field = |field: &'static str, required: bool| -> Result<Option<String>> {
            match obj.get(field) {
                None | Some(Value::Null) if required => Err(Error::MissingField { index, field }),
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(s.clone())),
                Some(other) => Err(Error::InvalidRecord {
                    index,
                    message: format!("field `{field}` must be a string, got {other}"),
                }),
            }
        };
        let money_field = |field: &'static str, required: bool| -> Result<Option<Money>> {
            match obj.get(field) {
                None | Some(Value::Null) if required => Err(Error::MissingField { index, field }),
                None | Some(Value::Null) => Ok(None),
                Some(v) => {
                    let m: Money = serde_json::from_value(v.clone()).map_err(|e| Error::InvalidRecord {
                        index,
                        message: format!("field `{field}`: {e}"),
                    })?;
                    if m < Money::ZERO {
                        return Err(Error::InvalidRecord {
                            index,
                            message: format!("field `{field}` is negative"),
                        });
                    }
                    Ok(Some(m))
                }
            }
        };

        let title = text_field("title", true)?.unwrap_or_default();
        let category = text_field("category", true)?.unwrap_or_default();
        let highest_price = money_field("highest_price", true)?.unwrap_or_default();
        let lowest_price = money_field("lowest_price", true)?.unwrap_or_default();
        let description = text_field("description", false)?.unwrap_or_default();
        let current_price = money_field("current_price", false)?;
        let image_url = text_field("image_url", false)?;
        let features = match obj.get("features") {
            None | Some(Value::Null) => Vec::new(),
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| Error::InvalidRecord {
                index,
                message: "field `features` must be an array of strings".into(),
            })?,
        };

        if highest_price < lowest_price {
            return Err(Error::InvalidRecord {
                index,
                message: format!("highest_price {highest_price} is below lowest_price {lowest_price}"),
            });
        }

        let slug = category_slug(&category);
        let counter = per_category.entry(slug.clone()).or_insert(0);
        *counter += 1;
        let codename = match text_field("codename", false)? {
            Some(c) => {
                if !is_valid_codename(&c) {
                    return Err(Error::InvalidRecord {
                        index,
                        message: format!("codename `{c}` does not match <category>_<n>"),
                    });
                }
                c
            }
            None => {
                if slug.is_empty() {
                    return Err(Error::InvalidRecord {
                        index,
                        message: "category has no usable characters".into(),
                    });
                }
                format!("{slug}_{counter}")
            }
        };

        products.push(Product {
            title,
            description,
            features,
            category,
            highest_price,
            lowest_price,
            current_price,
            image_url,
            codename,
        });
    }
    Catalog::new(products)
}

const SYNTH_CATEGORIES: &[&str] = &[
    "Electronics",
    "Home & Kitchen",
    "Beauty",
    "Toys & Games",
    "Sports & Outdoors",
    "Tools & Home Improvement",
    "Video Games",
    "Pet Supplies",
];

/// Deterministic pseudo-products for fixtures and benchmarks. Prices fall
/// in `[1, 4500]` with the lowest price a random fraction of the highest.
pub fn synth_catalog(seed: u64, n: usize) -> Catalog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_category: HashMap<&str, u32> = HashMap::new();
    let mut products = Vec::with_capacity(n);
    for i in 0..n {
        let category = SYNTH_CATEGORIES[rng.random_range(0..SYNTH_CATEGORIES.len())];
        let counter = per_category.entry(category).or_insert(0);
        *counter += 1;
        // Skew toward cheaper items, as in real popular-product listings.
        let u: f64 = rng.random();
        let highest = Money::from_cents((100.0 + u * u * 449_900.0).round() as i64);
        let ratio: f64 = rng.random_range(0.2..0.86);
        let lowest = highest.scale(ratio).max(Money::dollars(1)).min(highest);
        let current = Money::from_cents(rng.random_range(lowest.cents()..=highest.cents()));
        products.push(Product {
            title: format!("Synthetic {category} item {}", i + 1),
            description: format!("Deterministic fixture product #{} in {category}.", i + 1),
            features: Vec::new(),
            category: category.to_string(),
            highest_price: highest,
            lowest_price: lowest,
            current_price: Some(current),
            image_url: None,
            codename: format!("{}_{}", category_slug(category), counter),
        });
    }
    Catalog::new(products).expect("synthetic codenames are unique")
}

/// Counts of MI and CI sessions a catalog yields at the given parameters.
pub fn scenario_split(catalog: &Catalog, budget_factor: f64, sigma: Money) -> Result<(usize, usize)> {
    let mut mi = 0;
    let mut ci = 0;
    for p in catalog {
        match configure_session(p, budget_factor, 1, sigma)?.scenario {
            Scenario::MI => mi += 1,
            Scenario::CI => ci += 1,
        }
    }
    Ok((mi, ci))
}

/// Codenames present in `catalog`, for quick membership checks.
pub fn codenames(catalog: &Catalog) -> HashSet<&str> {
    catalog.iter().map(|p| p.codename.as_str()).collect()
}
