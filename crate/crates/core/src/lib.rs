//! Linearized plug-and-play ADMM for image restoration with a fast
//! doubly stochastic nonlocal-means denoiser.
//!
//! * [`image`], [`integral`], [`io`]: image container, summed-area tables,
//!   PGM/PFM files.
//! * [`denoise`]: NLM and DSG-NLM filters plus a dense weight-matrix oracle.
//! * [`forward`]: super-resolution and single-photon (QIS) data terms and
//!   simulators.
//! * [`solver`]: linearized PnP-ADMM, the standard ADMM + CG baseline, and
//!   iteration logging.
//! * [`bench`]: the denoiser timing harness.

pub mod bench;
pub mod denoise;
pub mod error;
pub mod forward;
pub mod image;
pub mod integral;
pub mod io;
pub mod solver;

pub use error::{Error, FormatError, Result};
pub use image::{pad_symmetric, project, psnr, ConstraintSet, Image, Pixel};
pub use integral::{integral_image, IntegralImage};
pub use io::{read_image, write_image, ImageFormat};
