//! End-to-end batch refitting: outfit manifests, garment bundles, proxy
//! simplification, progressive layered draping, and report/output handling.
