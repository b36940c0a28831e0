//! Shared inputs for the criterion benches.

use hyperrep_core::variety::rho0_data;

/// Complex and quaternionic parameter vectors at the discrete point.
pub fn rho0_vectors() -> (Vec<f64>, Vec<f64>) {
    let r = rho0_data().expect("bundled data");
    (r.complex_vec(), r.quaternionic_vec())
}
