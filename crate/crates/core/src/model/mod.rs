//! Market primitives: domain types and the elementary demand, supply,
//! waiting-time and vehicle-hour formulas every solver stage composes.

pub mod accounting;
pub mod choice;
mod decision;
mod instance;
mod params;
mod state;
pub mod units;
pub mod welfare;

pub use accounting::{
    commission_from_wage, flow_balance_residuals, human_reposition_flow, idle_split_accounting,
    trip_stats, BalanceResiduals, Commission, FleetHours, TripStats,
};
pub use choice::{demand_rate, driver_supply, generalized_cost, passenger_wait, reposition_probs};
pub use decision::PlatformDecision;
pub use instance::{NetworkInstance, Zone, ZoneLabel};
pub use params::BehaviorParams;
pub use state::MarketState;
pub use welfare::{welfare, MarketMetrics, ZoneSummary};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("{matrix}[{row}][{col}] = {value} is not a valid entry")]
    InvalidEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid decision: {0}")]
    InvalidDecision(String),
    #[error("passenger wait undefined with {idle} idle vehicles")]
    NoIdleVehicles { idle: f64 },
    #[error("commission undefined without fare revenue")]
    UndefinedCommission,
    #[error("zone index {zone} has demand but no idle vehicles to split")]
    SplitUndefined { zone: usize },
}

/// Platform profit of a decision at its market state, $/min.
pub fn platform_profit(
    instance: &NetworkInstance,
    params: &BehaviorParams,
    decision: &PlatformDecision,
    state: &MarketState,
) -> f64 {
    accounting::profit_per_minute(
        state.revenue(&decision.r, instance.travel_time()),
        state.n_a,
        params.av_cost,
        decision.human_hours(params),
        decision.q,
    )
}
