//! Quarterly panel ingest: date axis, aligned series, transforms, CSV IO.

pub mod ingest;
pub mod panel;
pub mod quarter;
pub mod series;
pub mod transforms;

pub use ingest::{load_panel, read_panel_dir, write_panel_dir, LoadedPanel, PanelManifest, Variable};
pub use panel::{
    build_panel, CountrySeries, EuroConversion, HpModeOption, RawCountrySeries, SeriesPanel,
    TransformOptions,
};
pub use quarter::Quarter;
pub use series::{Axis, Series};
pub use transforms::{
    euro_convert, hp_gap, hp_trend, quarterly_inflation, real_exchange_rate, seasonal_adjust,
    HpMode,
};
