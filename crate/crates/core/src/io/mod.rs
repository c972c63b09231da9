//! File formats: JSON configuration, CSV tables, text reports and SVG charts.

pub mod config;
pub mod csv;
pub mod report;
pub mod svg;
