//! Chaotic environments built from random level ensembles.
//!
//! An environment is a set of `M` levels `ε_m` with a random traceless
//! coupling `Q`. Its broadened spectral function
//!
//! `R̂(ω) = (π/M) Σ_{m,m'} |Q_{mm'}|² δ_σ(ε_m − ε_{m'} − ω)`
//!
//! sets the pure dephasing rate `γ = ½ lim_{ω→0} R̂(ω)`. Level repulsion makes
//! the nearest-neighbour spacing density vanish at zero, which drives `γ` to
//! zero. Poisson spectra keep a finite density at zero and a finite rate.
//!
//! # Seeding
//!
//! Every random draw uses `ChaCha8Rng::seed_from_u64(seed)`. Realization `r`
//! of an ensemble draws its levels from stream `2r` and its coupling from
//! stream `2r + 1`. Realization 0 therefore reproduces [`sample_levels`] and
//! [`sample_coupling`] called with the master seed.
//! Realizations run in parallel and are reduced in index order, so results
//! do not depend on the thread count.

mod coupling;
mod levels;
mod spectrum;

pub use coupling::{sample_coupling, CouplingMatrix};
pub use levels::{poisson_cdf, sample_levels, wigner_cdf, wigner_pdf, LevelEnsemble, LevelKind};
pub use spectrum::{
    dephasing_rate_from_spectrum, run_ensemble, spectral_curve, spectral_function, uniform_grid, EnsembleConfig,
    RateFit, SpectralFunctionEstimate,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
