//! Energy-aware sensor scheduling for tracking a target that moves as a
//! Markov chain through a sensor network.
//!
//! The scheduling problem is a partially observable stochastic shortest path
//! problem: each step the controller picks which sensors are awake, pays `c`
//! per awake sensor and 1 per tracking error, and the episode ends when the
//! target leaves the network. The crate provides
//!
//! * [`model`]: the network, motion, sensing and cost models;
//! * [`belief`]: Bayes filtering and belief sampling;
//! * [`qmdp`]: per-sensor QMDP policies (exact and learned decoupling);
//! * [`pointbased`]: alpha-vector value functions and a Perseus-style solver;
//! * [`bounds`]: lower bounds on the optimal energy-tracking tradeoff;
//! * [`sim`]: episode simulation, Monte Carlo evaluation and `c` sweeps;
//! * [`io`]: model files, value-function files and CSV output.

pub mod belief;
pub mod bounds;
pub mod error;
pub mod io;
pub mod lp;
pub mod model;
pub mod numeric;
pub mod pointbased;
pub mod qmdp;
pub mod sim;

pub use belief::Belief;
pub use error::{Error, Result};
pub use model::{ActionMask, NetworkModel, Observation, SensingSpec};
