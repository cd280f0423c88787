//! Interval arithmetic for attractors of iterated function systems whose
//! maps are drawn from a first-stage attractor: Cantor constructions with
//! certified dissection-ratio floors, unions and Minkowski sums that keep
//! those certificates, and a grid oracle for independent cross-checks.

pub mod attractor;
pub mod dissection;
pub mod error;
pub mod exec;
pub mod ifs;
pub mod interval;
pub mod oracle;
pub mod scalar;
pub mod setops;
pub mod union;
pub mod word;

pub use attractor::{
    compose_phi, default_merge_tau, n_epsilon, n_epsilon_envelope, partial_geometric_sum,
    sandwich_check, second_gen_attractor, select_cover, CoverSelection, FirstGen, Mode,
    SandwichReport, SecondGenOptions, SecondGenResult, TailCertificate,
};
pub use dissection::{Construction, UlbdCertificate, UnionCase, UnionPlan};
pub use error::{Error, Result};
pub use ifs::{compose_maps, fixed_point, ContractionMap, Ifs, TwoMapOutcome};
pub use interval::Interval;
pub use oracle::{grid_attractor, grid_minkowski, grid_second_gen, GridSet};
pub use scalar::Scalar;
pub use setops::{
    a_m, aprime, filling_check, filling_value, geometric_count, separation_constant_with_floors,
    separation_constant, sum_is_interval, sum_subset_construct, union_construct,
    IntervalCertificate,
};
pub use union::IntervalUnion;
pub use word::BinaryWord;
