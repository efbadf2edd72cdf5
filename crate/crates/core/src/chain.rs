use crate::amount::Rational;
use crate::error::ChainError;

/// Price of an item from its exchange-rate chain: the product of every hop
/// rate, from real money through each virtual currency to the item.
pub fn chain_price(rates: &[Rational]) -> Result<Rational, ChainError> {
    if rates.is_empty() {
        return Err(ChainError::EmptyChain);
    }
    if let Some(i) = rates.iter().position(Rational::is_negative) {
        return Err(ChainError::NegativeRate(i));
    }
    Ok(rates.iter().fold(Rational::one(), |acc, r| &acc * r))
}
