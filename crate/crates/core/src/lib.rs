//! Adversarial patch masking with multi-level Haar wavelet analysis.
//!
//! Patches that fool object detectors tend to carry unusually strong
//! high-frequency energy. The pipeline decomposes an image with the Haar
//! DWT, thresholds per-level detail amplitude, blurs the flagged pixels and
//! aggregates detections from several decomposition depths with NMS.
//!
//! ```
//! use asd::spectral_mask::{asd_mask, MaskConfig, RgbImage};
//!
//! let image = RgbImage::filled(32, 32, 0.5);
//! let (defended, mask) = asd_mask(&image, &MaskConfig::default()).unwrap();
//! assert!(mask.is_empty());
//! assert_eq!(defended, image);
//! ```

pub mod analysis;
pub mod detection;
pub mod error;
pub mod harness;
pub mod spectral_mask;
pub mod wavelet;

pub use detection::{detect_with_asd, nms, AsdConfig, BoundingBox, DetectionSet, Detector};
pub use error::{AsdError, Result};
pub use spectral_mask::{asd_mask, spectral_mask, BinaryMask, MaskConfig, RgbImage};
pub use wavelet::{decompose, reconstruct, GrayImage, WaveletPyramid};
