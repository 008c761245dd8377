//! Variant selectors: `top:N`, `ids:1,4,7` and `share>=0.05`.

use std::fmt;
use std::str::FromStr;

use arbor_core::event_log::TraceVariant;

#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    /// The `N` most frequent variants.
    Top(usize),
    /// Variants by id, as printed by `arbor variants`.
    Ids(Vec<usize>),
    /// Variants whose share of cases is at least the threshold.
    MinShare(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorSyntaxError(String);

impl fmt::Display for SelectorSyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid selector `{}`, expected `top:N`, `ids:1,4,7` or `share>=0.05`",
            self.0
        )
    }
}

impl std::error::Error for SelectorSyntaxError {}

impl FromStr for Selector {
    type Err = SelectorSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || SelectorSyntaxError(s.to_string());
        let s = s.trim();
        if let Some(n) = s.strip_prefix("top:") {
            return n.trim().parse().map(Selector::Top).map_err(|_| err());
        }
        if let Some(ids) = s.strip_prefix("ids:") {
            if ids.trim().is_empty() {
                return Ok(Selector::Ids(Vec::new()));
            }
            return ids
                .split(',')
                .map(|id| id.trim().parse().map_err(|_| err()))
                .collect::<Result<_, _>>()
                .map(Selector::Ids);
        }
        if let Some(share) = s.strip_prefix("share>=") {
            let share: f64 = share.trim().parse().map_err(|_| err())?;
            if !(0.0..=1.0).contains(&share) {
                return Err(err());
            }
            return Ok(Selector::MinShare(share));
        }
        Err(err())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionError {
    Empty,
    OutOfRange { id: usize, variants: usize },
}

impl fmt::Display for SelectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionError::Empty => write!(f, "the selector matches no variant"),
            SelectionError::OutOfRange { id, variants } => {
                write!(f, "variant id {id} is out of range, the log has {variants} variants")
            }
        }
    }
}

impl std::error::Error for SelectionError {}

impl Selector {
    /// Selected variant ids, ascending and without duplicates.
    pub fn resolve(&self, variants: &[TraceVariant]) -> Result<Vec<usize>, SelectionError> {
        let mut ids: Vec<usize> = match self {
            Selector::Top(n) => variants.iter().take(*n).map(|v| v.variant_id).collect(),
            Selector::Ids(ids) => {
                if let Some(&id) = ids.iter().find(|&&id| id >= variants.len()) {
                    return Err(SelectionError::OutOfRange { id, variants: variants.len() });
                }
                ids.clone()
            }
            Selector::MinShare(min) => variants
                .iter()
                .filter(|v| v.frequency_share >= *min)
                .map(|v| v.variant_id)
                .collect(),
        };
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(SelectionError::Empty);
        }
        Ok(ids)
    }
}
