//! Closed-form and numeric functions of `(d, k, δ)`.

pub mod first;
pub mod fixed_point;
pub mod hp;
pub mod regime;
pub mod second;

pub use first::{f_dk, f_type, g_poly, g_poly_factored, h0, h2, maximize_type, shannon_h, t_star};
pub use fixed_point::{core_fixed_point, FixedPointTrace};
pub use hp::Hp;
pub use regime::{d_of_eta, r_of_eta, AnalyticParams, RegimePoint};
pub use second::{
    delta0_of_delta, delta_of_delta0, kl_report, psi, psi0, psi0_scan, psi0_value, t_delta, KlReport,
    PairTypeOptimum, Psi0Scan,
};
