//! NV-centre spin Hamiltonians and simulated 2D ESEEM data.
//!
//! Frequencies are angular (rad/s) throughout except where a name says Hz;
//! fields are in gauss and times in seconds.

mod echo;
mod hamiltonian;
pub mod presets;
mod synthetic;
mod system;

pub use echo::{eseem_signal, zero_population, EchoModel, EseemSignal, SimulationWarning};
pub use hamiltonian::{
    build_hamiltonian, electron_gamma, manifold_hamiltonians, ManifoldHamiltonians, BOHR_MAGNETON, GAMMA_13C,
    GAMMA_14N, PLANCK,
};
pub use synthetic::{synthetic_low_rank_signal, SyntheticPeak};
pub use system::{mhz, CarbonSite, EseemGrid, SpinSystem};
