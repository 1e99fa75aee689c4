//! Exact-arithmetic engine for two-sided many-to-one matching with
//! complementarities.
//!
//! The crate is organised bottom-up:
//!
//! * [`market`] holds agents, contracts and the preference orders, including
//!   the worker order refined by artificial externalities.
//! * [`schedule`] defines π-schemes, π-schedule matchings, worst-situation
//!   profiles, dominance and both stability notions.
//! * [`tableau`] is the exact pivoting kernel shared by the Scarf engine and
//!   the small linear programs used by the concavity checker.
//! * [`scarf`] runs Scarf's ordinal/cardinal pivoting algorithm and records a
//!   full trace.
//! * [`concavity`] decides π-concavity by pattern enumeration and provides
//!   brute-force stability oracles.
//! * [`team`] handles leader-follower team markets: the variant deferred
//!   acceptance algorithm and rounding of schedule matchings.
//! * [`format`] reads and writes the line-oriented market file format.

pub mod concavity;
mod error;
pub mod fixtures;
pub mod format;
pub mod frac;
pub mod market;
pub mod scarf;
pub mod schedule;
pub mod tableau;
pub mod team;

pub use error::{Error, Result};
pub use frac::Rational;
pub use market::{AgentId, Assignment, Contract, ContractId, FirmId, Market, Situation, WorkerId};
pub use schedule::{Matching, PiScheduleMatching, PiScheme, WorstSituationProfile};
