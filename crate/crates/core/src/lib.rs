//! Subjective evaluation of parametric forms.
//!
//! A subject judges a family of products in three stages (pairwise
//! dissimilarity, hedonic appeal, signs of the appeal change under
//! shape-regulating rules). This crate embeds the dissimilarities with sparse
//! metric MDS, maps appeal onto the perceptual space with the vector model,
//! fits a quadratic appeal model that also honours the derivative judgments,
//! and analyses the resulting response surface.

pub mod api;
pub mod appeal;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod mds;
pub mod model;
pub mod pipeline;
pub mod plot;
pub mod prefmap;
