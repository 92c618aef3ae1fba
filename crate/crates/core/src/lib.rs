//! Geometric stochastic block model: instance sampling, two-phase exact
//! recovery of community labels, and the information-theoretic threshold.

pub mod dsu;
pub mod error;
pub mod experiment;
pub mod generator;
pub mod geometry;
pub mod metrics;
pub mod phase1;
pub mod phase2;
pub mod prob;
pub mod rng;
pub mod theory;
pub mod visibility;

pub use error::{GsbmError, Result};
pub use experiment::{run_sweep, run_trial, write_csv, ChiChoice, Estimator, RawConfig, SweepConfig, TrialPoint};
pub use generator::{
    common_neighbor_count, read_instance, sample_edges, sample_instance, sample_labels, sample_point_process,
    write_instance, EdgeQuery, GeometricGraph, Labeling, ModelParams,
};
pub use geometry::{blocks_mutually_visible, torus_distance, unit_ball_volume, BlockGrid, Point, PointSet, Torus};
pub use metrics::{agreement, count_empty_block_segments, neighborhood_mistakes, StageTimes, TrialResult};
pub use phase1::{pairwise_classify, propagate, run_phase1, Phase1Result};
pub use phase2::{degree_profile, degree_profile_in, genie_estimate, refine, tau, DegreeProfile, IntensityVector};
pub use prob::Prob;
pub use theory::{
    ch_divergence_plus, ch_divergence_t, classify_regime, practical_chi, solve_parameters, solve_parameters_with_chi,
    threshold_curve, DerivedParams, Regime, Threshold,
};
pub use visibility::{build_visibility_graph, max_unoccupied_cluster, occupied_blocks, VisibilityGraph};
