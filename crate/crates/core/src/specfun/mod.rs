//! Cylinder functions and the solutions of the unperturbed radial equation.

pub mod bessel;
pub mod free;

pub use bessel::{bessel, cylinder, gamma, jhat, sincospi, BesselKind, Cylinder};
pub use free::{
    c_l, f_l, f_l_dk, free_solution, free_solution_dk, green_free, green_free_dk, green_free_hankel, h_l,
    h_l_dk, is_log_case, jost_free, order, phi_l, phi_l_dk, psi_l, psi_l_dk, theta_l, weyl_m_free, FreeDkKind,
    FreeKind, Sample,
};
