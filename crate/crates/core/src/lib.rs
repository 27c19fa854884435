//! Spiking neural latch modules built from Izhikevich neurons with
//! conductance-based alpha synapses, tools to certify their bistability and
//! robustness, and a four-module ring pattern generator closed through a
//! simulated actuator plant.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cpg;
pub mod engine;
pub mod network;
pub mod neuron;

pub use engine::{EngineError, SimConfig, Trajectory};
pub use network::{ExternalInput, MuscleCell, MuscleConfig, Network, Pulse, SpikeRecord, Synapse};
pub use neuron::{NeuronParam, NeuronParams, NeuronState};
pub mod latch;
pub mod montecarlo;
pub mod poincare;
