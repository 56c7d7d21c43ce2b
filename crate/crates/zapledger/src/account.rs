//! Account identifiers.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A 20-byte account address, rendered as lowercase hex with a `0x` prefix.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccountId([u8; 20]);

/// The reserved utility (grid operator) account: all-zero bytes with a
/// trailing `0x01`.
pub const UTILITY_ACCOUNT: AccountId =
    AccountId([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);

impl AccountId {
    pub const fn from_bytes(bytes: [u8; 20]) -> Self {
        AccountId(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// Test/simulation helper: an address whose first byte is `tag` and
    /// whose remaining bytes are zero. `AccountId::tagged(0)` collides with
    /// nothing meaningful; callers that need the utility account should use
    /// [`UTILITY_ACCOUNT`].
    pub fn tagged(tag: u8) -> Self {
        let mut bytes = [0u8; 20];
        bytes[0] = tag;
        AccountId(bytes)
    }

    pub fn is_utility(&self) -> bool {
        *self == UTILITY_ACCOUNT
    }

    /// Parse a `0x`-prefixed 40-digit hex string.
    pub fn parse(s: &str) -> Result<Self, AccountParseError> {
        let hex = s.strip_prefix("0x").ok_or(AccountParseError)?;
        if hex.len() != 40 {
            return Err(AccountParseError);
        }
        let mut bytes = [0u8; 20];
        for (i, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let hi = hex_val(chunk[0]).ok_or(AccountParseError)?;
            let lo = hex_val(chunk[1]).ok_or(AccountParseError)?;
            bytes[i] = hi << 4 | lo;
        }
        Ok(AccountId(bytes))
    }
}

fn hex_val(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'a'..=b'f' => Some(c - b'a' + 10),
        _ => None,
    }
}

/// The string was not a `0x`-prefixed 40-digit lowercase hex address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccountParseError;

impl fmt::Display for AccountParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected 0x-prefixed 40-digit lowercase hex address")
    }
}

impl std::error::Error for AccountParseError {}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x")?;
        for b in &self.0 {
            write!(f, "{:02x}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for AccountId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AccountId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        AccountId::parse(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_lowercase_hex() {
        let a = AccountId::from_bytes([0xab; 20]);
        assert_eq!(a.to_string(), format!("0x{}", "ab".repeat(20)));
    }

    #[test]
    fn utility_account_is_distinguished() {
        assert!(UTILITY_ACCOUNT.is_utility());
        assert!(!AccountId::tagged(1).is_utility());
        assert_eq!(
            UTILITY_ACCOUNT.to_string(),
            "0x0000000000000000000000000000000000000001"
        );
    }

    #[test]
    fn parse_round_trips() {
        let a = AccountId::tagged(0x5e);
        assert_eq!(AccountId::parse(&a.to_string()).unwrap(), a);
        assert!(AccountId::parse("0x1234").is_err());
        assert!(AccountId::parse("no-prefix").is_err());
    }
}
