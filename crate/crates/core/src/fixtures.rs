//! Bundled example markets.

use crate::format::{parse_market, MarketFile};

pub const EB: &str = include_str!("../fixtures/eb.market");
pub const M2: &str = include_str!("../fixtures/m2.market");
pub const M4: &str = include_str!("../fixtures/m4.market");
pub const M4_PI: &str = include_str!("../fixtures/m4_pi.market");
pub const TEAMS: &str = include_str!("../fixtures/teams.market");
pub const NO_ACCEPTABLE: &str = include_str!("../fixtures/no_acceptable.market");

/// All bundled fixtures by name.
pub const ALL: &[(&str, &str)] = &[
    ("eb", EB),
    ("m2", M2),
    ("m4", M4),
    ("m4_pi", M4_PI),
    ("teams", TEAMS),
    ("no_acceptable", NO_ACCEPTABLE),
];

fn load(text: &str) -> MarketFile {
    parse_market(text).expect("bundled fixture parses")
}

/// Two firms, two workers, health-plan complementarities, with its
/// non-unit scheme.
pub fn eb() -> MarketFile {
    load(EB)
}

/// A market without any stable matching.
pub fn m2() -> MarketFile {
    load(M2)
}

/// Stable but not concave under the unit scheme.
pub fn m4() -> MarketFile {
    load(M4)
}

/// `m4` with the capacity scheme that makes it π-concave.
pub fn m4_pi() -> MarketFile {
    load(M4_PI)
}

/// Leader–follower market with two leaders and three followers.
pub fn teams() -> MarketFile {
    load(TEAMS)
}

pub fn no_acceptable() -> MarketFile {
    load(NO_ACCEPTABLE)
}
