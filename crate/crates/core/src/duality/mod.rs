//! Duality applications on finite data: matrix games, moment cones,
//! trigonometric moments and conjugates of convex grid functions.

mod conjugate;
mod games;
mod moments;
mod trig;

pub use conjugate::{conjugate, conjugate_on, fenchel_check, inf_convolution, Conjugate, FenchelReport, GridFunction};
pub use games::{game_value, game_value_restricted, GameSolution};
pub use moments::{moment_feasible, MomentProblem};
pub use trig::{toeplitz, trig_moment, TrigReport};
