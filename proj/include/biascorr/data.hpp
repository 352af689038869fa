#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biascorr/greene.hpp"
#include "biascorr/predictor.hpp"

namespace biascorr {

enum class FeatureType { continuous, categorical, binary, ordinal };

struct FeatureSpec {
    std::string name;
    FeatureType type = FeatureType::continuous;
    std::string positive;                   // binary: category mapped to 1
    std::map<std::string, double> levels;   // ordinal: category -> numeric code
};

/// A sample keeps its label iff `<feature> <comparator> <threshold>` holds on
/// the raw (unstandardized) value.
struct BiasRule {
    std::string feature;
    std::string comparator;  // ">", ">=", "<" or "<="
    double threshold = 0.0;

    bool holds(double value) const;
};

struct DatasetSchema {
    std::vector<FeatureSpec> features;
    std::string target;
    std::vector<std::string> target_positive_values;
    std::string missing_marker;       // rows with this cell value are dropped; "" = keep all
    char delimiter = ',';
    std::string selection_column;     // optional 0/1 column with precomputed selection
    std::vector<std::string> selection_features;   // encoded column names
    std::vector<std::string> prediction_features;  // must be a subset of selection_features
    std::optional<BiasRule> bias_rule;

    static DatasetSchema from_json_file(const std::string& path);
    void to_json_file(const std::string& path) const;
    void validate() const;
};

struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

RawTable read_csv(const std::string& path, char delimiter = ',');

/// Census-specific cleaning: drop rows with missing cells, binarize marital
/// status, collapse rare countries into Other, drop the final-weight and race
/// columns, and collapse workclass into government/private (the target).
RawTable preprocess_adult(const RawTable& raw);

/// Encoded dataset in raw (unstandardized) units. `selection` marks label
/// visibility; labels stay stored so unbiased baselines can be evaluated.
struct Dataset {
    DatasetSchema schema;
    std::vector<std::string> feature_names;   // post-encoding column names
    std::vector<bool> standardizable;         // continuous/ordinal columns
    Mat X;                                    // raw-unit encoded features
    std::vector<int> y;
    std::vector<double> selection;            // 1 = label observed
    std::vector<std::size_t> row_ids;         // indices into the originating table
    std::vector<std::size_t> sel_idx;         // columns used as selection features
    std::vector<std::size_t> pred_idx;        // columns used as prediction features

    std::size_t n() const { return X.size(); }
    std::size_t column(const std::string& name) const;  // throws if unknown
};

Dataset encode_dataset(const RawTable& raw, const DatasetSchema& schema);
Dataset load_csv_dataset(const std::string& path, const DatasetSchema& schema);
void write_dataset_csv(const Dataset& d, const std::string& path);

/// Zero-mean unit-variance transform of the standardizable columns, with a
/// 1e-12 variance floor; fitted on one dataset (the training split) and
/// applied to any compatible matrix.
struct Standardizer {
    Vec mean;
    Vec scale;
    std::vector<bool> active;

    static Standardizer fit(const Dataset& d);
    Mat apply(const Mat& x) const;
    Vec apply_row(const Vec& row) const;
    Vec restore_row(const Vec& row) const;
};

/// Mask labels of every row violating the rule; features are never touched
/// and the rule is evaluated on raw values.
Dataset inject_mnar_bias(const Dataset& d, const BiasRule& rule);

/// Threshold on the rule feature's empirical quantile so that a fraction of
/// about `target_eta` rows violates it; used by the eta sweep.
BiasRule rule_for_target_eta(const Dataset& d, const BiasRule& base, double target_eta);

/// Masking precedence: an explicit eta target (quantile-retargeted rule),
/// then an already-masked selection column, then the schema's rule.
Dataset apply_masking(const Dataset& train, std::optional<double> target_eta);

/// Seeded shuffle followed by a head/tail split; standardization statistics
/// are a separate, later step so they can be fitted on the training side only.
std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double fraction,
                                             std::uint64_t seed);

/// |D_u| / n.
double missingness_ratio(const Dataset& d);

/// Convert standardized rows into estimator samples: selection/prediction
/// feature subsets with a trailing intercept column; labels hidden wherever
/// selection is 0.
std::vector<SelectionSample> make_selection_samples(const Dataset& d, const Mat& x_std);

/// Feature sub-matrix for the plain classifiers (no intercept column; the
/// predictors carry their own bias term).
Mat feature_matrix(const Mat& x_std, const std::vector<std::size_t>& cols);

// ---- synthetic generator -------------------------------------------------

struct SynthSpec {
    std::size_t n = 1000;
    std::size_t d_sel = 3;   // selection covariates; the first d_pred also predict
    std::size_t d_pred = 2;
    Vec gamma;  // d_sel + 1 coefficients, intercept last
    Vec beta;   // d_pred + 1 coefficients, intercept last
    double sigma = 1.0;
    double rho = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthTruth {
    Vec p_select;  // P(s=1 | x)
    Vec f_label;   // f(y_i | x_i), noise integrated out
    Vec eps;
    Vec v;
    Vec u_sel;
    Vec z;
};

struct SyntheticData {
    Dataset dataset;
    SynthTruth truth;
};

/// Draw covariates and noise, apply the latent selection equation and the
/// noisy logistic label model, then mask labels where unselected. The truth
/// record keeps latent values and exact per-sample probabilities for
/// oracle-mode bias analysis.
SyntheticData generate_synthetic(const SynthSpec& spec);

/// Intercept giving the latent selection index a marginal pass rate `rate`
/// when covariates are iid standard normal.
double intercept_for_selection_rate(const Vec& gamma_covariates, double rate);

}  // namespace biascorr
