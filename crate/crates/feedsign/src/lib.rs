//! Desk-scale simulator for federated optimization over a bit-rate budget.
//!
//! A server and `K` clients minimize a shared objective. Every round the
//! server announces a direction seed; each client evaluates its local loss
//! twice along that direction and reports what it learned. How much of that
//! report survives the uplink is the experiment:
//!
//! - `fedsgd` sends the full local gradient, 32 bits per coordinate,
//! - `zo_fedsgd` sends one finite-difference projection per client,
//! - `feedsign` sends a single sign bit, aggregated by majority vote,
//! - `dp_feedsign` randomizes that bit for differential privacy.
//!
//! Everything is deterministic. Directions, batches, initializations, and
//! attacker draws all come from one counter-based generator keyed by the
//! run seed, so a run is a pure function of its config, and the sign-rule
//! history compresses to one bit per round: [`orbit`] stores it and replays
//! the whole parameter trajectory from the bits alone.
//!
//! [`models`] holds the objectives (quadratic family with a closed-form
//! optimum, logistic regression, a small MLP) and synthetic datasets.
//! [`zo`] turns two loss evaluations into a projection, [`aggregation`]
//! turns client reports into an update and prices the traffic,
//! [`federation`] runs rounds against partitioned data with optional
//! Byzantine and heterogeneous clients, and [`analysis`] measures what the
//! runs produce: error-floor fits, sign-reversal probabilities, vote
//! composition checks.
//!
//! The `examples/` directory is the guided tour; `train_feedsign` is the
//! short version, `orbit_replay` the party trick.

pub mod aggregation;
pub mod analysis;
pub mod config;
pub mod error;
pub mod federation;
pub mod models;
pub mod orbit;
pub mod prng;
pub mod zo;
