//! US states plus DC: postal code, full name, census FIPS and UCR numbering.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateInfo {
    pub postal: &'static str,
    pub name: &'static str,
    pub fips: u16,
    pub ucr: u16,
}

macro_rules! states {
    ($(($postal:literal, $name:literal, $fips:literal, $ucr:literal)),* $(,)?) => {
        pub static STATES: &[StateInfo] = &[
            $(StateInfo { postal: $postal, name: $name, fips: $fips, ucr: $ucr }),*
        ];
    };
}

states![
    ("AL", "Alabama", 1, 1),
    ("AK", "Alaska", 2, 50),
    ("AZ", "Arizona", 4, 2),
    ("AR", "Arkansas", 5, 3),
    ("CA", "California", 6, 4),
    ("CO", "Colorado", 8, 5),
    ("CT", "Connecticut", 9, 6),
    ("DE", "Delaware", 10, 7),
    ("DC", "District of Columbia", 11, 8),
    ("FL", "Florida", 12, 9),
    ("GA", "Georgia", 13, 10),
    ("HI", "Hawaii", 15, 51),
    ("ID", "Idaho", 16, 11),
    ("IL", "Illinois", 17, 12),
    ("IN", "Indiana", 18, 13),
    ("IA", "Iowa", 19, 14),
    ("KS", "Kansas", 20, 15),
    ("KY", "Kentucky", 21, 16),
    ("LA", "Louisiana", 22, 17),
    ("ME", "Maine", 23, 18),
    ("MD", "Maryland", 24, 19),
    ("MA", "Massachusetts", 25, 20),
    ("MI", "Michigan", 26, 21),
    ("MN", "Minnesota", 27, 22),
    ("MS", "Mississippi", 28, 23),
    ("MO", "Missouri", 29, 24),
    ("MT", "Montana", 30, 25),
    ("NE", "Nebraska", 31, 26),
    ("NV", "Nevada", 32, 27),
    ("NH", "New Hampshire", 33, 28),
    ("NJ", "New Jersey", 34, 29),
    ("NM", "New Mexico", 35, 30),
    ("NY", "New York", 36, 31),
    ("NC", "North Carolina", 37, 32),
    ("ND", "North Dakota", 38, 33),
    ("OH", "Ohio", 39, 34),
    ("OK", "Oklahoma", 40, 35),
    ("OR", "Oregon", 41, 36),
    ("PA", "Pennsylvania", 42, 37),
    ("RI", "Rhode Island", 44, 38),
    ("SC", "South Carolina", 45, 39),
    ("SD", "South Dakota", 46, 40),
    ("TN", "Tennessee", 47, 41),
    ("TX", "Texas", 48, 42),
    ("UT", "Utah", 49, 43),
    ("VT", "Vermont", 50, 44),
    ("VA", "Virginia", 51, 45),
    ("WA", "Washington", 53, 46),
    ("WV", "West Virginia", 54, 47),
    ("WI", "Wisconsin", 55, 48),
    ("WY", "Wyoming", 56, 49),
];

/// Two-letter postal code of a US state or DC.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateCode([u8; 2]);

impl StateCode {
    /// Accepts a postal code or a full state name, case-insensitively.
    pub fn parse(s: &str) -> Option<StateCode> {
        let s = s.trim();
        lookup(s).map(|info| StateCode(code_bytes(info.postal)))
    }

    pub fn as_str(&self) -> &str {
        // Only ever built from the ASCII table above.
        std::str::from_utf8(&self.0).expect("ASCII state code")
    }

    pub fn info(&self) -> &'static StateInfo {
        lookup(self.as_str()).expect("StateCode always refers to a table entry")
    }
}

fn code_bytes(postal: &str) -> [u8; 2] {
    let b = postal.as_bytes();
    [b[0], b[1]]
}

/// Finds a state by postal code or full name.
pub fn lookup(s: &str) -> Option<&'static StateInfo> {
    STATES
        .iter()
        .find(|st| st.postal.eq_ignore_ascii_case(s) || st.name.eq_ignore_ascii_case(s))
}

pub fn by_fips(fips: u16) -> Option<&'static StateInfo> {
    STATES.iter().find(|st| st.fips == fips)
}

pub fn by_ucr(ucr: u16) -> Option<&'static StateInfo> {
    STATES.iter().find(|st| st.ucr == ucr)
}

impl fmt::Display for StateCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for StateCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateCode({})", self.as_str())
    }
}

impl Serialize for StateCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for StateCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        StateCode::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown state {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifty_states_and_dc() {
        assert_eq!(STATES.len(), 51);
        let mut ucr: Vec<_> = STATES.iter().map(|s| s.ucr).collect();
        ucr.sort_unstable();
        ucr.dedup();
        assert_eq!(ucr.len(), 51);
    }

    #[test]
    fn parses_postal_and_names() {
        assert_eq!(StateCode::parse("la").unwrap().as_str(), "LA");
        assert_eq!(StateCode::parse("Louisiana").unwrap().as_str(), "LA");
        assert_eq!(StateCode::parse("district of columbia").unwrap().as_str(), "DC");
        assert!(StateCode::parse("PR").is_none());
        assert!(StateCode::parse("XX").is_none());
    }
}
