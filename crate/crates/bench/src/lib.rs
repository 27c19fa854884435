//! Fixtures shared by the benchmarks.

use spikelatch::latch::{build_latch, SynapticParams};
use spikelatch::poincare::{LatchSystem, PoincareConfig};
use spikelatch::NeuronParams;

/// The nominal latch wrapped for return-map and viability work.
pub fn nominal_system() -> LatchSystem {
    let (net, topo) = build_latch(
        &NeuronParams::RS,
        &NeuronParams::LTS,
        &SynapticParams::NOMINAL,
    );
    LatchSystem::new(net, topo, PoincareConfig::default())
}
