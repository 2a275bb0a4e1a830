//! Persistence-driven optimization: build filtrations of simplicial or
//! cubical complexes from parameters (point clouds, vertex functions,
//! distance matrices, image height directions), compute their persistence
//! diagrams, evaluate losses on the diagrams, and route subgradients back to
//! the parameters for stochastic descent.
//!
//! The pipeline is `parameters -> filtration (+ tape) -> diagram -> loss`,
//! and gradients travel the same road backwards: every diagram coordinate is
//! one of the filtration values, so a loss gradient lands on a cell, the
//! cell's tape entry lands on the parameters.
//!
//! ```
//! use persopt_core::*;
//!
//! // four corners of the unit square and the full 2-skeleton over them
//! let cloud = PointCloud::from_rows(&[
//!     vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0],
//! ])?;
//! let complex = Complex::full_simplex(cloud.n_points(), 2)?;
//! let (filtration, tape) = rips_filtration(&cloud, &complex)?;
//! let dgm = diagram(&complex, &filtration)?;
//!
//! // one loop: born at the side length, filled at the diagonal
//! let loop_point = dgm.dim(1).regular.iter().find(|p| p.persistence() > 0.0).unwrap();
//! assert_eq!(loop_point.birth, 1.0);
//! assert_eq!(loop_point.death, 2f64.sqrt());
//!
//! // reward the loop and route the gradient back to the coordinates
//! let loss = hole_penalty(&dgm);
//! let grad = pull_back_gradient(&dgm, &loss.grad, &tape)?;
//! assert_eq!(grad.len(), cloud.n_params());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod complex;
pub mod filtration;
pub mod grad;
pub mod loss;
pub mod matrix;
pub mod optim;
pub mod persistence;
pub mod sample;

pub use complex::{validate_filtration, Cell, Complex, ComplexError, ComplexKind, Filtration};
pub use filtration::{
    background_sentinel, dtm_weights, height_filtration, lower_star_filtration, rips_filtration,
    rips_from_matrix, weighted_rips_filtration, FiltrationError, HeightDirection, PointCloud,
    VertexFunction,
};
pub use grad::{DiagramGrad, GradTape};
pub use loss::{
    bottleneck, bottleneck_with_metric, hole_penalty, label_contrast_loss, landscape,
    landscape_points, penalty_binary_image, penalty_mse, penalty_square, penalty_tv,
    persistence_image, sliced_wasserstein, total_persistence, wasserstein,
    wasserstein_with_metric, AxisBox, ContrastLoss, GroundMetric, ImageWeight, LandscapeVector,
    LossError, LossValue, MatchSide, Matching, PersistenceImage, DEFAULT_SLICED_DIRECTIONS,
};
pub use matrix::DenseMatrix;
pub use optim::{
    check_assumptions, run, step, trace_to_csv, window_range, AssumptionReport, NoiseModel,
    OptState, OptimError, Schedule, StopReason, StopRule, TraceRow,
};
pub use persistence::{
    assemble_diagram, compute_pairs, diagram, pull_back_gradient, total_order, Diagram,
    DiagramDim, EssentialPoint, PairSet, PersistenceError, RegularPoint, TotalOrder,
};
