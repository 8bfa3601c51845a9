//! Two-stage forecaster: logistic gate and single-step recurrent regressor.

mod design;
pub mod gate;
pub mod logistic;
pub mod lstm;
mod bundle;
mod train;

pub use design::Design;
pub use gate::{
    fit_l1_selection, fit_l2_gate, gate_predict, lambda_max, time_folds, GateConfig, GateDecision, LogisticGate, Selection,
    SelectionConfig,
};
pub use logistic::{average_precision, fit_l1_logistic, fit_l1_logistic_from, fit_l2_logistic, sigmoid, LogisticFit};
pub use lstm::{cell_forward, mse_and_grad, train_regressor, Adam, LstmParams, RecurrentRegressor, TrainConfig, TrainReport};
pub use bundle::{decode_bundle, encode_bundle, read_bundle, write_bundle, TensorEntry, BUNDLE_MAGIC, BUNDLE_VERSION};
pub use train::{
    predict_state_series, rows_in, train_rows, train_two_stage, Forecast, ModelConfig, RowPrediction, StateSeries,
    TrainSummary, TwoStageModel, REGRESSOR_FEATURES,
};
