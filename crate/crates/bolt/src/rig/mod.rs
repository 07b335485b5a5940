//! Skinning-weight transfer from body to garment by normal-ray projection
//! with closest-point fallback.
