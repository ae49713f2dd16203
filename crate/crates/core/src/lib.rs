//! Reconnaissance blind chess: rules engine, arbiter, information-set
//! tracking, canonical bots, complexity metrics and a tournament driver.

pub mod arbiter;
pub mod board;
pub mod bots;
pub mod infoset;
pub mod metrics;
pub mod tournament;
