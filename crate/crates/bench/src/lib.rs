//! Shared fixtures for the criterion benches.

use parpbo_core::{generate_instance, write_opb, GeneratorParams, PboInstance};

/// Planted random instance of the given size, 30% density.
pub fn instance(num_vars: usize, num_constraints: usize, seed: u64) -> PboInstance {
    generate_instance(&GeneratorParams::new(num_vars, num_constraints, seed))
        .expect("generator parameters are valid")
}

/// The same instance as OPB text.
pub fn opb_text(num_vars: usize, num_constraints: usize, seed: u64) -> String {
    write_opb(&instance(num_vars, num_constraints, seed))
}
